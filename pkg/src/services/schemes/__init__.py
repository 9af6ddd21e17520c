"""
Scheme implementations.

Each module holds the schemes of one scenario family.
"""

from . import multiuser, single_user

__all__ = ["multiuser", "single_user"]
