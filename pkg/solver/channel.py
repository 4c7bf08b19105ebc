"""Wideband channel generation for the source-relay-destination link with an RIS.

Node placement: source at the origin, relay at ``(d1, 0, 0)``, destination at
``(d1 + d2, 0, 0)`` and the RIS at height ``h`` above a point ``d3`` away from the
anchor (the relay, or the source-destination midpoint) along the y axis.
"""

import logging

import numpy as np

from core.errors import DomainError
from core.models.channel import ChannelRealization, SlotTaps
from core.models.scenario import ScenarioConfig
from core.types import LINK_IDS, ComplexArray, LinkId

logger = logging.getLogger(__name__)

DIRECT_LINKS: frozenset[LinkId] = frozenset({"SR", "RD"})


def path_loss_db(
    d_m: float, exponent: float, pl1_db: float, ref_m: float, shadow_db: float = 0.0
) -> float:
    """Large-scale fading ``PL1 + 10 log10((d/D1)^-α) + Shad`` in dB."""
    if d_m <= 0:
        raise DomainError(f"distance must be positive, got {d_m}")
    if ref_m <= 0:
        raise DomainError(f"reference distance must be positive, got {ref_m}")
    return float(pl1_db - 10.0 * exponent * np.log10(d_m / ref_m) + shadow_db)


def node_positions(config: ScenarioConfig) -> dict[str, np.ndarray]:
    d1, d2 = config.d_source_relay_m, config.d_relay_dest_m
    anchor_x = d1 if config.ris_anchor == "relay" else (d1 + d2) / 2
    return {
        "source": np.zeros(3),
        "relay": np.array([d1, 0.0, 0.0]),
        "destination": np.array([d1 + d2, 0.0, 0.0]),
        "ris": np.array([anchor_x, config.d_ris_relay_m, config.ris_height_m]),
    }


def link_distances(config: ScenarioConfig) -> dict[LinkId, float]:
    pos = node_positions(config)
    ris_relay = float(np.linalg.norm(pos["ris"] - pos["relay"]))
    return {
        "SR": config.d_source_relay_m,
        "RD": config.d_relay_dest_m,
        "SI": float(np.linalg.norm(pos["ris"] - pos["source"])),
        "IR": ris_relay,
        "ID": float(np.linalg.norm(pos["ris"] - pos["destination"])),
        "RI": ris_relay,
    }


def link_amplitudes(config: ScenarioConfig) -> dict[LinkId, float]:
    """Linear amplitude gain ``10^(PL/20)`` of every link."""
    distances = link_distances(config)
    return {
        link: 10.0
        ** (
            path_loss_db(
                distances[link],
                config.fading_exponent,
                config.pathloss_ref_db,
                config.ref_distance_m,
                config.shadow_db(link),
            )
            / 20.0
        )
        for link in LINK_IDS
    }


def cscg(rng: np.random.Generator, shape: tuple[int, ...]) -> ComplexArray:
    """Unit-variance circularly symmetric complex Gaussian samples."""
    re_im = rng.standard_normal((2, *shape))
    return (re_im[0] + 1j * re_im[1]) / np.sqrt(2.0)


def generate_taps(config: ScenarioConfig, rng: np.random.Generator) -> tuple[SlotTaps, SlotTaps]:
    """Draws independent time-domain taps of every link for both slots.

    Every tap has the same power (uniform profile). The direct links of both slots are drawn
    before any RIS link, so the direct channels of a seed do not depend on ``M``; within each
    group links follow ``LINK_IDS`` order, slot 1 first.
    """
    amplitude = link_amplitudes(config)
    m, taps = config.n_elements, config.n_taps
    direct = [link for link in LINK_IDS if link in DIRECT_LINKS]
    reflected = [link for link in LINK_IDS if link not in DIRECT_LINKS]
    per_slot: list[dict[LinkId, ComplexArray]] = [{}, {}]
    for links, shape in ((direct, (taps,)), (reflected, (m, taps))):
        for slot in per_slot:
            for link in links:
                slot[link] = amplitude[link] * cscg(rng, shape)

    slots = []
    for draws in per_slot:
        slots.append(
            SlotTaps(
                g_sr=draws["SR"],
                g_rd=draws["RD"],
                h_si=draws["SI"],
                h_ir=draws["IR"],
                h_id=draws["ID"],
                h_ri=draws["RI"],
            )
        )
    return slots[0], slots[1]


def to_frequency(taps: ComplexArray, n: int) -> ComplexArray:
    """N-point DFT of zero-padded taps along the last axis."""
    taps = np.asarray(taps, dtype=np.complex128)
    if taps.shape[-1] > n:
        raise DomainError(f"{taps.shape[-1]} taps do not fit in {n} subcarriers")
    return np.fft.fft(taps, n=n, axis=-1)


def cascade_vectors(
    h_si: ComplexArray,
    h_ir: ComplexArray,
    h_id1: ComplexArray,
    h_id2: ComplexArray,
    h_ri: ComplexArray,
) -> tuple[ComplexArray, ComplexArray, ComplexArray]:
    """Per-subcarrier cascaded vectors ``a`` (S-I-R), ``b`` (R-I-D) and ``c`` (S-I-D).

    Entry-wise ``a[p, m] = conj(h_ir[p, m]) * h_si[p, m]`` so that ``v @ a[p]`` is the
    reflected channel for reflection coefficients ``v``.
    """
    a = np.conj(h_ir) * h_si
    b = np.conj(h_id2) * h_ri
    c = np.conj(h_id1) * h_si
    return a, b, c


def realize(config: ScenarioConfig, rng: np.random.Generator) -> ChannelRealization:
    slot1, slot2 = generate_taps(config, rng)
    n = config.n_subcarriers

    def ris(taps: ComplexArray) -> ComplexArray:
        # (M, L) -> (N, M)
        return to_frequency(taps, n).T.copy()

    h_si, h_ir, h_id1 = ris(slot1.h_si), ris(slot1.h_ir), ris(slot1.h_id)
    h_id2, h_ri = ris(slot2.h_id), ris(slot2.h_ri)
    a, b, c = cascade_vectors(h_si, h_ir, h_id1, h_id2, h_ri)
    return ChannelRealization(
        taps=(slot1, slot2),
        g_sr=to_frequency(slot1.g_sr, n),
        g_rd=to_frequency(slot2.g_rd, n),
        h_si=h_si,
        h_ir=h_ir,
        h_id1=h_id1,
        h_id2=h_id2,
        h_ri=h_ri,
        a=a,
        b=b,
        c=c,
    )


def draw_channels(
    config: ScenarioConfig, rng: np.random.Generator | None = None
) -> ChannelRealization:
    """Realization for ``config``, seeded from ``config.rng_seed`` unless ``rng`` is given."""
    if rng is None:
        rng = np.random.default_rng(config.rng_seed)
    channels = realize(config, rng)
    logger.debug(
        f"Drew channels N={config.n_subcarriers} M={config.n_elements} L={config.n_taps}"
    )
    return channels
