"""Shared fixtures: seeded generators, random channel instances and preset draws."""

from __future__ import annotations

from collections.abc import Callable

import numpy as np
import pytest

from harness.runner import build_context
from src.config.loader import load_preset
from src.schemas.channel import ChannelRealization
from src.schemas.solver import MultiuserInstance, SinrSpec
from src.services import TrialContext


def crandn(rng: np.random.Generator, *shape: int) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def make_channels() -> Callable[..., ChannelRealization]:
    """Factory for i.i.d. CN(0, 1) channel triples with a weaker direct link."""

    def _make(seed: int, m: int, n: int, k: int = 1, direct_scale: float = 0.3) -> ChannelRealization:
        gen = np.random.default_rng(seed)
        return ChannelRealization(
            g=crandn(gen, n, m),
            h_d=direct_scale * crandn(gen, k, m),
            h_r=crandn(gen, k, n),
        )

    return _make


@pytest.fixture
def make_instance(make_channels) -> Callable[..., MultiuserInstance]:
    """Factory for multiuser instances with uniform SINR targets."""

    def _make(
        seed: int,
        m: int,
        n: int,
        k: int,
        bits: int = 1,
        gamma: float = 1.0,
        sigma2: float = 0.1,
    ) -> MultiuserInstance:
        return MultiuserInstance(
            channels=make_channels(seed, m, n, k),
            spec=SinrSpec.uniform(k, gamma, sigma2),
            bits=bits,
        )

    return _make


@pytest.fixture
def preset_context() -> Callable[..., TrialContext]:
    """Trial contexts drawn the way the experiment runner draws them for a preset."""

    def _make(preset: str, sweep_value: float, trial: int = 0, bits: int = 1) -> TrialContext:
        return build_context(load_preset(preset), sweep_value, bits, trial)

    return _make
