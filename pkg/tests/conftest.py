from collections.abc import Callable

import numpy as np
import pytest
from icecream import ic

from core.models.channel import ChannelRealization, SlotTaps
from core.models.scenario import ScenarioConfig, SolverOptions
from core.models.solution import SnrTable
from solver.channel import cascade_vectors

ic.disable()

type ChannelFactory = Callable[..., ChannelRealization]


@pytest.fixture
def config() -> ScenarioConfig:
    """Small scenario that keeps every solver fast."""
    return ScenarioConfig(
        n_subcarriers=3,
        n_elements=2,
        rng_seed=11,
        solver=SolverOptions(max_rounds=10, randomization_draws=200),
    )


@pytest.fixture
def unit_config() -> ScenarioConfig:
    """Unit powers and noise with a unit rate prefactor, for hand-checked values."""
    return ScenarioConfig(
        n_subcarriers=2,
        n_elements=1,
        noise_power_w=1.0,
        subcarrier_bandwidth_hz=1.0,
        slot_duration_s=0.5,
    )


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


def _cn(rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


@pytest.fixture
def make_channels() -> ChannelFactory:
    """Builds a realization straight from frequency responses.

    Scalars are ``(N,)`` and RIS links ``(N, M)``; missing RIS links are zero.
    """

    def factory(
        g_sr,
        g_rd,
        h_si=None,
        h_ir=None,
        h_id1=None,
        h_id2=None,
        h_ri=None,
    ) -> ChannelRealization:
        g_sr = np.asarray(g_sr, dtype=np.complex128)
        g_rd = np.asarray(g_rd, dtype=np.complex128)
        n = g_sr.shape[0]
        shape = next(
            (np.shape(h) for h in (h_si, h_ir, h_id1, h_id2, h_ri) if h is not None), (n, 0)
        )

        def ris(h) -> np.ndarray:
            if h is None:
                return np.zeros(shape, dtype=np.complex128)
            return np.asarray(h, dtype=np.complex128).reshape(shape)

        links = [ris(h) for h in (h_si, h_ir, h_id1, h_id2, h_ri)]
        a, b, c = cascade_vectors(*links)
        empty = np.zeros((shape[1], 1), dtype=np.complex128)
        taps = SlotTaps(
            g_sr=g_sr[:1], g_rd=g_rd[:1], h_si=empty, h_ir=empty, h_id=empty, h_ri=empty
        )
        return ChannelRealization(
            taps=(taps, taps),
            g_sr=g_sr,
            g_rd=g_rd,
            h_si=links[0],
            h_ir=links[1],
            h_id1=links[2],
            h_id2=links[3],
            h_ri=links[4],
            a=a,
            b=b,
            c=c,
        )

    return factory


@pytest.fixture
def random_channels(make_channels: ChannelFactory) -> Callable[..., ChannelRealization]:
    """Unit-variance Rayleigh responses on every link."""

    def factory(n: int, m: int, rng: np.random.Generator) -> ChannelRealization:
        return make_channels(
            _cn(rng, (n,)),
            _cn(rng, (n,)),
            *(_cn(rng, (n, m)) for _ in range(5)),
        )

    return factory


@pytest.fixture
def random_snr() -> Callable[[int, np.random.Generator], SnrTable]:
    """Exponentially distributed SNRs, as seen on Rayleigh subcarriers."""

    def factory(n: int, rng: np.random.Generator, scale: float = 10.0) -> SnrTable:
        return SnrTable(relay=rng.exponential(scale, n), dest=rng.exponential(scale, (n, n)))

    return factory
