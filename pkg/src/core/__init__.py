"""
Numerical core: linear algebra, channels, precoders, phase-shift solvers and
the large-N analysis.
"""
