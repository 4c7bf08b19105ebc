"""Per-subcarrier SNRs and decode-and-forward rates.

``k`` selects Case-I (0, the reflected source signal at the destination is ignored) or
Case-II (1, it is combined with the relayed signal).
"""

import numpy as np

from core.errors import DomainError
from core.models.channel import ChannelRealization
from core.models.scenario import ScenarioConfig
from core.models.solution import Matching, SnrTable
from core.types import CaseIndicator, ComplexArray, RealArray


def _check_index(index: int, n: int) -> None:
    if not 0 <= index < n:
        raise DomainError(f"subcarrier index {index} out of range for N={n}")


def snr_relay(
    p: int, v1: ComplexArray, channels: ChannelRealization, config: ScenarioConfig
) -> float:
    _check_index(p, channels.n_subcarriers)
    gain = channels.g_sr[p] + v1 @ channels.a[p]
    return float(config.p_source_w * abs(gain) ** 2 / config.noise_power_w)


def snr_dest(
    p: int,
    q: int,
    v1: ComplexArray,
    v2: ComplexArray,
    k: CaseIndicator,
    channels: ChannelRealization,
    config: ScenarioConfig,
) -> float:
    n = channels.n_subcarriers
    _check_index(p, n)
    _check_index(q, n)
    reflected = k * config.p_source_w * abs(v1 @ channels.c[p]) ** 2
    relayed = config.p_relay_w * abs(channels.g_rd[q] + v2 @ channels.b[q]) ** 2
    return float((reflected + relayed) / config.noise_power_w)


def hop_snrs(
    v1: ComplexArray,
    v2: ComplexArray,
    k: CaseIndicator,
    channels: ChannelRealization,
    config: ScenarioConfig,
) -> tuple[RealArray, RealArray, RealArray]:
    """Relay SNR, reflected destination SNR and relayed destination SNR.

    ``v1`` and ``v2`` may carry leading batch axes; outputs are ``(..., N)``.
    """
    sigma2 = config.noise_power_w
    relay = config.p_source_w * np.abs(channels.g_sr + v1 @ channels.a.T) ** 2 / sigma2
    reflected = k * config.p_source_w * np.abs(v1 @ channels.c.T) ** 2 / sigma2
    relayed = config.p_relay_w * np.abs(channels.g_rd + v2 @ channels.b.T) ** 2 / sigma2
    return relay, reflected, relayed


def snr_table(
    v1: ComplexArray,
    v2: ComplexArray,
    k: CaseIndicator,
    channels: ChannelRealization,
    config: ScenarioConfig,
) -> SnrTable:
    relay, reflected, relayed = hop_snrs(v1, v2, k, channels, config)
    return SnrTable(relay=relay, dest=reflected[:, None] + relayed[None, :])


def pair_rate(snr_r: float, snr_d: float, config: ScenarioConfig) -> float:
    if snr_r < 0 or snr_d < 0:
        raise DomainError(f"SNRs must be non-negative, got ({snr_r}, {snr_d})")
    return float(config.rate_prefactor * np.log2(1.0 + min(snr_r, snr_d)))


def pair_rates(snr: SnrTable, config: ScenarioConfig) -> RealArray:
    """``(N, N)`` matrix of pair rates in bits/s, the weights of the matching problem."""
    return config.rate_prefactor * np.log2(1.0 + np.minimum(snr.relay[:, None], snr.dest))


def matching_rate(matching: Matching, snr: SnrTable, config: ScenarioConfig) -> float:
    return sum(
        (pair_rate(snr.relay[p], snr.dest[p, q], config) for p, q in matching.pairs), 0.0
    )


def sum_rate(
    matching: Matching,
    v1: ComplexArray,
    v2: ComplexArray,
    k: CaseIndicator,
    channels: ChannelRealization,
    config: ScenarioConfig,
) -> float:
    if not matching.fits(channels.n_subcarriers):
        raise DomainError(f"matching {matching.pairs} exceeds N={channels.n_subcarriers}")
    return matching_rate(matching, snr_table(v1, v2, k, channels, config), config)


def sum_rate_batch(
    matching: Matching,
    v1: ComplexArray,
    v2: ComplexArray,
    k: CaseIndicator,
    channels: ChannelRealization,
    config: ScenarioConfig,
) -> RealArray:
    """Sum rate of ``matching`` for a batch of ``(D, M)`` candidate phase vectors."""
    relay, reflected, relayed = hop_snrs(v1, v2, k, channels, config)
    if not matching.pairs:
        return np.zeros(relay.shape[:-1])
    p, q = (np.array(idx) for idx in zip(*matching.pairs, strict=True))
    bottleneck = np.minimum(relay[..., p], reflected[..., p] + relayed[..., q])
    return config.rate_prefactor * np.log2(1.0 + bottleneck).sum(axis=-1)
