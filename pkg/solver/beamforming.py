"""Passive beamforming for a fixed matching.

The reflection vectors are lifted to ``ṽ = [v; 1]`` and ``Φ = ṽ ṽᴴ``; relaxing the rank
gives a semidefinite program whose solution is turned back into unit-modulus phases by
Gaussian randomization.
"""

import itertools
import logging

import numpy as np
from icecream import ic

from core.errors import DomainError, SolverError
from core.models.channel import ChannelRealization
from core.models.scenario import ScenarioConfig
from core.models.solution import BeamformingSolution, LiftedMatrices, Matching, SdpSolution
from core.types import CaseIndicator, ComplexArray, RealArray
from solver.sdp import BarrierProblem, UnitDiagonalBasis, solve_barrier
from solver.snr_model import hop_snrs, sum_rate_batch

logger = logging.getLogger(__name__)

MAX_SWEEP_ELEMENTS = 3
MAX_SWEEP_POINTS = 2**28
SWEEP_CHUNK = 2**22


def _lift(vectors: ComplexArray, direct: ComplexArray | None) -> ComplexArray:
    """``w wᴴ`` with ``w = [conj(v); conj(g)]``, minus ``|g|²`` in the corner."""
    n, m = vectors.shape
    s = np.conj(vectors)
    lifted = np.zeros((n, m + 1, m + 1), dtype=np.complex128)
    lifted[:, :m, :m] = s[:, :, None] * np.conj(s[:, None, :])
    if direct is not None:
        lifted[:, :m, m] = s * direct[:, None]
        lifted[:, m, :m] = np.conj(lifted[:, :m, m])
    return lifted


def build_lifted_matrices(channels: ChannelRealization, config: ScenarioConfig) -> LiftedMatrices:
    """``A_p``, ``B_q``, ``C_p`` with ``ṽᴴ A_p ṽ + |g^SR_p|² = |g^SR_p + v @ a_p|²``."""
    return LiftedMatrices(
        A=_lift(channels.a, channels.g_sr),
        B=_lift(channels.b, channels.g_rd),
        C=_lift(channels.c, None),
        direct_sr_power=np.abs(channels.g_sr) ** 2,
        direct_rd_power=np.abs(channels.g_rd) ** 2,
    )


def solve_sdr(
    matching: Matching, lifted: LiftedMatrices, k: CaseIndicator, config: ScenarioConfig
) -> SdpSolution:
    """Semidefinite relaxation of the beamforming subproblem.

    Both slots are solved jointly for either case. ``upper_bound`` is in bits/s.
    """
    n = lifted.dimension
    if n < 2:
        raise DomainError("semidefinite relaxation needs at least one reflecting element")
    if not matching.pairs:
        eye = np.eye(n, dtype=np.complex128)
        return SdpSolution(phi1=eye, phi2=eye.copy(), upper_bound=0.0, kkt_residual=0.0)

    basis = UnitDiagonalBasis(n)
    p, q = (np.array(idx) for idx in zip(*matching.pairs, strict=True))
    n_pairs, size = p.size, basis.size
    sigma2 = config.noise_power_w
    p1, p2 = config.p_source_w, config.p_relay_w

    tr_a = np.trace(lifted.A, axis1=1, axis2=2).real
    tr_b = np.trace(lifted.B, axis1=1, axis2=2).real
    tr_c = np.trace(lifted.C, axis1=1, axis2=2).real
    relay0 = p1 * (tr_a[p] + lifted.direct_sr_power[p]) / sigma2
    dest0 = (k * p1 * tr_c[p] + p2 * (tr_b[q] + lifted.direct_rd_power[q])) / sigma2
    scale = max(1.0, float(np.max(np.minimum(relay0, dest0))))

    rows = np.arange(n_pairs)
    g1 = np.zeros((n_pairs, 2 * size + n_pairs))
    g1[:, :size] = p1 / (sigma2 * scale) * basis.trace_coefficients(lifted.A[p])
    g1[rows, 2 * size + rows] = -1.0
    g2 = np.zeros_like(g1)
    g2[:, :size] = k * p1 / (sigma2 * scale) * basis.trace_coefficients(lifted.C[p])
    g2[:, size : 2 * size] = p2 / (sigma2 * scale) * basis.trace_coefficients(lifted.B[q])
    g2[rows, 2 * size + rows] = -1.0

    problem = BarrierProblem(
        basis=basis, h1=relay0 / scale, g1=g1, h2=dest0 / scale, g2=g2, scale=scale
    )
    options = config.solver
    solution = solve_barrier(problem, options.sdp_tolerance, options.sdp_max_iterations)
    upper_bound = config.rate_prefactor * solution.upper_bound / np.log(2.0)
    logger.debug(
        f"SDR with {n_pairs} pairs, M={n - 1}: bound {upper_bound:.6g} bps "
        f"in {solution.newton_steps} Newton steps"
    )
    return SdpSolution(
        phi1=solution.phi1,
        phi2=solution.phi2,
        upper_bound=float(upper_bound),
        kkt_residual=solution.residual,
        iterations=solution.newton_steps,
    )


def extract_phases(lifted_vectors: ComplexArray) -> ComplexArray:
    """``exp(j arg(u_m / u_M))`` for lifted vectors ``u`` of length ``M + 1``."""
    u = np.asarray(lifted_vectors)
    return np.exp(1j * np.angle(u[..., :-1] * np.conj(u[..., -1:])))


def quantize_phases(v: ComplexArray, bits: int) -> ComplexArray:
    """Snaps every phase to the nearest of ``2^bits`` levels ``2πk / 2^bits``."""
    if bits < 1:
        raise DomainError(f"quantization needs at least one bit, got {bits}")
    levels = 2**bits
    step = 2 * np.pi / levels
    theta = np.mod(np.angle(v), 2 * np.pi)
    k = np.mod(np.round(theta / step), levels)
    return np.exp(1j * k * step)


def quantize_solution(solution: BeamformingSolution, bits: int | None) -> BeamformingSolution:
    if bits is None:
        return solution
    return BeamformingSolution(
        v1=quantize_phases(solution.v1, bits),
        v2=quantize_phases(solution.v2, bits),
        phi1=solution.phi1,
        phi2=solution.phi2,
        sdp_upper_bound=solution.sdp_upper_bound,
    )


def _eigen_factor(phi: ComplexArray) -> tuple[ComplexArray, RealArray]:
    """``U √Σ`` with eigenvalues clamped at zero, and the sorted eigenvalues."""
    try:
        eigenvalues, vectors = np.linalg.eigh(phi)
    except np.linalg.LinAlgError as e:
        raise SolverError(f"eigendecomposition of a lift failed: {e}", best_iterate=phi) from e
    eigenvalues = np.clip(eigenvalues, 0.0, None)
    return vectors * np.sqrt(eigenvalues), eigenvalues


def _is_rank_one(eigenvalues: RealArray, ratio: float) -> bool:
    return eigenvalues.size < 2 or eigenvalues[-2] < ratio * eigenvalues[-1]


def gaussian_randomization(
    sdp: SdpSolution,
    draws: int,
    matching: Matching,
    channels: ChannelRealization,
    k: CaseIndicator,
    config: ScenarioConfig,
    rng: np.random.Generator,
) -> BeamformingSolution:
    """Best unit-modulus candidate drawn from the Gaussian of the relaxed lifts.

    Candidate 0 is the principal eigenvector of each lift; the ``draws`` random candidates
    follow in generation order. Candidates are scored by the true sum rate and the first
    best one wins.
    """
    if draws < 1:
        raise DomainError(f"randomization needs at least one draw, got {draws}")
    factor1, eig1 = _eigen_factor(sdp.phi1)
    factor2, eig2 = _eigen_factor(sdp.phi2)
    ratio = config.solver.rank_one_ratio

    candidates1, candidates2 = factor1[None, :, -1], factor2[None, :, -1]
    if not (_is_rank_one(eig1, ratio) and _is_rank_one(eig2, ratio)):
        n = factor1.shape[0]
        r = rng.standard_normal((draws, 4, n))
        xi1 = ((r[:, 0] + 1j * r[:, 1]) / np.sqrt(2.0)) @ factor1.T
        xi2 = ((r[:, 2] + 1j * r[:, 3]) / np.sqrt(2.0)) @ factor2.T
        candidates1 = np.vstack([candidates1, xi1])
        candidates2 = np.vstack([candidates2, xi2])

    v1, v2 = extract_phases(candidates1), extract_phases(candidates2)
    if config.quantization_bits is not None:
        v1 = quantize_phases(v1, config.quantization_bits)
        v2 = quantize_phases(v2, config.quantization_bits)
    rates = sum_rate_batch(matching, v1, v2, k, channels, config)
    best = int(np.argmax(rates))
    ic(len(rates), best, rates[best], sdp.upper_bound)
    return BeamformingSolution(
        v1=v1[best], v2=v2[best], phi1=sdp.phi1, phi2=sdp.phi2, sdp_upper_bound=sdp.upper_bound
    )


def phase_grid(levels: int, n_elements: int) -> ComplexArray:
    """Every combination of ``levels`` phases on ``n_elements`` elements, ``(levels^M, M)``."""
    phases = np.exp(2j * np.pi * np.arange(levels) / levels)
    return np.array(list(itertools.product(phases, repeat=n_elements)), dtype=np.complex128)


def phase_sweep_oracle(
    matching: Matching,
    channels: ChannelRealization,
    k: CaseIndicator,
    config: ScenarioConfig,
    levels: int,
) -> BeamformingSolution:
    """Exhaustive search over a ``levels``-point phase grid per element and slot."""
    m = channels.n_elements
    if levels < 1:
        raise DomainError(f"levels must be positive, got {levels}")
    if m > MAX_SWEEP_ELEMENTS or levels ** (2 * m) > MAX_SWEEP_POINTS:
        raise DomainError(f"phase sweep refused for M={m} with {levels} levels")
    if m == 0:
        empty = np.zeros(0, dtype=np.complex128)
        return BeamformingSolution(v1=empty, v2=empty.copy())

    grid = phase_grid(levels, m)
    relay, reflected, relayed = hop_snrs(grid, grid, k, channels, config)
    if not matching.pairs:
        return BeamformingSolution(v1=grid[0], v2=grid[0].copy())
    p, q = (np.array(idx) for idx in zip(*matching.pairs, strict=True))
    r, dc, d2 = relay[:, p], reflected[:, p], relayed[:, q]

    chunk = max(1, SWEEP_CHUNK // (len(grid) * p.size))
    best_value, best_index = -np.inf, (0, 0)
    for start in range(0, len(grid), chunk):
        stop = min(start + chunk, len(grid))
        bottleneck = np.minimum(r[start:stop, None, :], dc[start:stop, None, :] + d2[None, :, :])
        values = np.log2(1.0 + bottleneck).sum(axis=-1)
        flat = int(np.argmax(values))
        i, j = divmod(flat, len(grid))
        if values[i, j] > best_value:
            best_value, best_index = float(values[i, j]), (start + i, j)

    i, j = best_index
    logger.debug(f"Phase sweep over {len(grid) ** 2} points: {best_value:.6g} bits")
    return BeamformingSolution(v1=grid[i], v2=grid[j])
