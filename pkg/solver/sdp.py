"""Dense log-barrier interior-point method for the lifted beamforming problem.

The problem solved is::

    maximize    Σ_k log(1 + S α_k)
    subject to  α_k < h1_k + G1_k · y,  α_k < h2_k + G2_k · y,
                Φ1(y), Φ2(y) ⪰ 0 with unit diagonal,

where each ``Φ_t = I + Σ_i y_i E_i`` is parametrized by the real and imaginary parts of
its strictly upper triangle. The scale ``S`` keeps the linear constraints close to unity
when SNRs are large.
"""

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from icecream import ic

from core.errors import SolverError
from core.types import ComplexArray, RealArray

logger = logging.getLogger(__name__)

BARRIER_GROWTH = 50.0
ARMIJO_SLOPE = 0.25
MAX_BACKTRACKS = 60


class UnitDiagonalBasis:
    """Real coordinates of an ``n x n`` Hermitian matrix with unit diagonal.

    Coordinates are ``[Re Φ_ab, Im Φ_ab]`` over the strictly upper triangle ``a < b``.
    """

    def __init__(self, n: int):
        self.n = n
        self.a, self.b = np.triu_indices(n, k=1)
        self.size = 2 * self.a.size

    def matrix(self, y: RealArray) -> ComplexArray:
        half = self.a.size
        phi = np.eye(self.n, dtype=np.complex128)
        upper = y[:half] + 1j * y[half:]
        phi[self.a, self.b] = upper
        phi[self.b, self.a] = np.conj(upper)
        return phi

    def coordinates(self, phi: ComplexArray) -> RealArray:
        upper = phi[self.a, self.b]
        return np.concatenate([upper.real, upper.imag])

    def trace_coefficients(self, matrices: ComplexArray) -> RealArray:
        """``Tr(E_i A)`` for every basis element and every Hermitian ``A`` in the batch."""
        upper = matrices[..., self.a, self.b]
        return np.concatenate([2.0 * upper.real, 2.0 * upper.imag], axis=-1)

    def logdet_derivatives(self, w: ComplexArray) -> tuple[RealArray, RealArray]:
        """Gradient and Hessian of ``log det Φ`` given ``w = Φ^-1``."""
        a, b = self.a, self.b
        grad = self.trace_coefficients(w)

        c, d = a[None, :], b[None, :]
        a, b = a[:, None], b[:, None]
        t1 = w[d, a] * w[b, c]
        t2 = w[c, a] * w[b, d]
        t3 = w[d, b] * w[a, c]
        t4 = w[c, b] * w[a, d]
        # Tr(W E_i W E_j)
        re_re = (t1 + t2 + t3 + t4).real
        re_im = (1j * (t1 - t2 + t3 - t4)).real
        im_re = (1j * (t1 + t2 - t3 - t4)).real
        im_im = (-(t1 - t2 - t3 + t4)).real
        hess = -np.block([[re_re, re_im], [im_re, im_im]])
        return grad, hess


@dataclass
class BarrierProblem:
    """Affine data of the barrier problem; ``z = [y1, y2, α]``."""

    basis: UnitDiagonalBasis
    h1: RealArray
    g1: RealArray
    h2: RealArray
    g2: RealArray
    scale: float

    @property
    def n_pairs(self) -> int:
        return self.h1.shape[0]

    @property
    def n_vars(self) -> int:
        return 2 * self.basis.size + self.n_pairs

    @property
    def barrier_parameter(self) -> float:
        return 2.0 * self.n_pairs + 2.0 * self.basis.n

    def split(self, z: RealArray) -> tuple[RealArray, RealArray, RealArray]:
        size = self.basis.size
        return z[:size], z[size : 2 * size], z[2 * size :]

    def objective(self, z: RealArray) -> float:
        """Σ log(1 + S α) in nats."""
        alpha = self.split(z)[2]
        return float(np.sum(np.log1p(self.scale * alpha)))


@dataclass(frozen=True)
class BarrierSolution:
    phi1: ComplexArray
    phi2: ComplexArray
    objective: float  # nats
    upper_bound: float  # nats
    residual: float
    newton_steps: int


def _cholesky_logdet(phi: ComplexArray) -> float | None:
    try:
        chol = np.linalg.cholesky(phi)
    except np.linalg.LinAlgError:
        return None
    return float(2.0 * np.sum(np.log(np.abs(np.diag(chol)))))


def initial_point(problem: BarrierProblem) -> RealArray:
    """Identity lifts, each ``α`` halfway between ``-1/S`` and its tightest constraint."""
    m = np.minimum(problem.h1, problem.h2)
    alpha = (m - 1.0 / problem.scale) / 2.0
    return np.concatenate([np.zeros(2 * problem.basis.size), alpha])


def _barrier(problem: BarrierProblem, z: RealArray, t: float) -> float | None:
    y1, y2, alpha = problem.split(z)
    growth = 1.0 + problem.scale * alpha
    s1 = problem.h1 + problem.g1 @ z
    s2 = problem.h2 + problem.g2 @ z
    if np.any(growth <= 0) or np.any(s1 <= 0) or np.any(s2 <= 0):
        return None
    logdet1 = _cholesky_logdet(problem.basis.matrix(y1))
    logdet2 = _cholesky_logdet(problem.basis.matrix(y2))
    if logdet1 is None or logdet2 is None:
        return None
    return float(
        t * np.sum(np.log(growth))
        + np.sum(np.log(s1))
        + np.sum(np.log(s2))
        + logdet1
        + logdet2
    )


def _derivatives(problem: BarrierProblem, z: RealArray, t: float) -> tuple[RealArray, RealArray]:
    y1, y2, alpha = problem.split(z)
    size = problem.basis.size
    grad = np.zeros(problem.n_vars)
    hess = np.zeros((problem.n_vars, problem.n_vars))

    growth = 1.0 + problem.scale * alpha
    idx = np.arange(2 * size, problem.n_vars)
    grad[idx] += t * problem.scale / growth
    hess[idx, idx] -= t * problem.scale**2 / growth**2

    for h, g in ((problem.h1, problem.g1), (problem.h2, problem.g2)):
        inv = 1.0 / (h + g @ z)
        grad += g.T @ inv
        hess -= (g.T * inv**2) @ g

    for offset, y in ((0, y1), (size, y2)):
        w = np.linalg.inv(problem.basis.matrix(y))
        g_det, h_det = problem.basis.logdet_derivatives(w)
        block = slice(offset, offset + size)
        grad[block] += g_det
        hess[block, block] += h_det
    return grad, hess


def solve_barrier(
    problem: BarrierProblem, tolerance: float, max_newton_steps: int
) -> BarrierSolution:
    """Follows the central path until ``ν/t`` is below ``tolerance`` relative.

    Each centering stops when half the squared Newton decrement drops below
    ``tolerance``; more than ``max_newton_steps`` steps in one centering raise
    ``SolverError`` carrying the current lifts.
    """
    nu = problem.barrier_parameter
    z = initial_point(problem)
    t = 1.0
    total_steps = 0
    decrement = np.inf

    while True:
        value = _barrier(problem, z, t)
        if value is None:
            raise SolverError("barrier iterate left the feasible set")
        for step in range(max_newton_steps + 1):
            try:
                grad, hess = _derivatives(problem, z, t)
            except np.linalg.LinAlgError as e:
                raise SolverError(
                    f"lift became singular: {e}",
                    best_iterate=_lifts(problem, z),
                    residual=decrement,
                ) from e
            delta = _newton_direction(problem, z, hess, grad, decrement)
            slope = float(grad @ delta)
            decrement = slope / 2.0
            if decrement <= tolerance:
                break
            if step == max_newton_steps:
                raise SolverError(
                    f"centering did not converge in {max_newton_steps} Newton steps",
                    best_iterate=_lifts(problem, z),
                    residual=decrement,
                )
            size = 1.0
            for _ in range(MAX_BACKTRACKS):
                candidate = _barrier(problem, z + size * delta, t)
                if candidate is not None and candidate >= value + ARMIJO_SLOPE * size * slope:
                    break
                size /= 2.0
            else:
                # no ascent possible at machine precision
                break
            z = z + size * delta
            value = candidate
            total_steps += 1

        objective = problem.objective(z)
        if nu / t <= tolerance * max(1.0, abs(objective)):
            break
        t *= BARRIER_GROWTH

    phi1, phi2 = _lifts(problem, z)
    ic(t, total_steps, objective)
    logger.debug(f"Barrier solve: {total_steps} Newton steps, objective {objective:.6g} nats")
    return BarrierSolution(
        phi1=phi1,
        phi2=phi2,
        objective=objective,
        # duality gap of a central point at the final t
        upper_bound=objective + nu / t,
        residual=decrement,
        newton_steps=total_steps,
    )


def _newton_direction(
    problem: BarrierProblem, z: RealArray, hess: RealArray, grad: RealArray, residual: float
) -> RealArray:
    try:
        return scipy.linalg.solve(-hess, grad, assume_a="pos")
    except (np.linalg.LinAlgError, ValueError):
        logger.debug("Newton system not numerically positive definite, using least squares")
    try:
        return scipy.linalg.lstsq(-hess, grad)[0]
    except (np.linalg.LinAlgError, ValueError) as e:
        raise SolverError(
            f"Newton system is singular: {e}",
            best_iterate=_lifts(problem, z),
            residual=residual,
        ) from e


def _lifts(problem: BarrierProblem, z: RealArray) -> tuple[ComplexArray, ComplexArray]:
    y1, y2, _ = problem.split(z)
    return problem.basis.matrix(y1), problem.basis.matrix(y2)
