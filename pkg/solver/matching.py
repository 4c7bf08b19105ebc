"""Subcarrier matching for fixed beamforming.

Three solvers share one objective, the sum over matched pairs of
``(Δ/2T) log2(1 + min(SNR^R_p, x_pq SNR^D_pq))``:

* ``assignment_oracle``: the fixed-SNR problem is a linear assignment problem.
* ``bnb_match``: depth-first branch-and-bound bounded by row/column maxima and the box
  relaxation.
* ``dcp_match``: difference-of-convex penalty iterations over the relaxed polytope.

Relaxation values are handled in bits (without the ``Δ/2T`` prefactor) and converted to
bits/s on the way out.
"""

import logging

import numpy as np
from icecream import ic
from pydantic import ValidationError
from scipy.optimize import OptimizeResult, linear_sum_assignment, minimize, minimize_scalar

from core.errors import DomainError
from core.models.scenario import ScenarioConfig
from core.models.solution import BnbNode, FractionalMatching, Matching, SnrTable
from core.types import FREE, FixingArray, RealArray
from solver.convergence import converged
from solver.snr_model import pair_rates

logger = logging.getLogger(__name__)

LN2 = np.log(2.0)


def assignment_oracle(weights: RealArray) -> tuple[Matching, float]:
    """Maximum-weight partial matching; zero-weight pairs are left unmatched."""
    w = np.asarray(weights, dtype=float)
    if np.isnan(w).any():
        raise DomainError("assignment weights contain NaN")
    if w.size == 0:
        return Matching(), 0.0
    rows, cols = linear_sum_assignment(w, maximize=True)
    keep = w[rows, cols] > 0
    rows, cols = rows[keep], cols[keep]
    return Matching.of(zip(rows.tolist(), cols.tolist(), strict=True)), float(w[rows, cols].sum())


def matching_value(matching: Matching, weights: RealArray) -> float:
    return float(sum((weights[p, q] for p, q in matching.pairs), 0.0))


def relaxed_objective(x: RealArray, snr: SnrTable, config: ScenarioConfig) -> float:
    """Objective of the box relaxation at a fractional ``x``, in bits/s."""
    bottleneck = np.minimum(snr.relay[:, None], np.clip(x, 0.0, 1.0) * snr.dest)
    return float(config.rate_prefactor * np.log2(1.0 + bottleneck).sum())


# -- box relaxation ------------------------------------------------------------------------


class _BoxRelaxation:
    """Free part of the relaxation for one set of fixings.

    Only free entries in rows and columns without a fixed one, and with positive SNR on
    both hops, carry a variable; on those ``x`` is capped at ``u = min(1, R/D)`` since the
    rate is flat beyond it.
    """

    def __init__(self, fixed: FixingArray, snr: SnrTable):
        n = snr.n_subcarriers
        ones = fixed == 1
        self.n = n
        self.fixed = fixed
        self.feasible = bool(ones.sum(axis=1).max(initial=0) <= 1) and bool(
            ones.sum(axis=0).max(initial=0) <= 1
        )
        taken_rows, taken_cols = ones.any(axis=1), ones.any(axis=0)
        relay, dest = snr.relay, snr.dest

        self.constant = float(np.log2(1.0 + np.minimum(relay[:, None], dest))[ones].sum())
        active = (
            (fixed == FREE)
            & ~taken_rows[:, None]
            & ~taken_cols[None, :]
            & (dest > 0)
            & (relay[:, None] > 0)
        )
        self.rows, self.cols = np.nonzero(active)
        self.d = dest[self.rows, self.cols]
        self.u = np.minimum(1.0, relay[self.rows] / self.d)
        self.bounds = [(0.0, 0.0) if taken else (0.0, None) for taken in taken_rows] + [
            (0.0, 0.0) if taken else (0.0, None) for taken in taken_cols
        ]

    def inner(self, z: RealArray) -> RealArray:
        """Maximizer of the Lagrangian over the free entries for multipliers ``z``."""
        s = z[self.rows] + z[self.n + self.cols]
        with np.errstate(divide="ignore"):
            x = 1.0 / (s * LN2) - 1.0 / self.d
        return np.clip(x, 0.0, self.u)

    def dual(self, z: RealArray) -> tuple[float, RealArray]:
        """Dual function (bits, without the fixed constant) and its gradient."""
        x = self.inner(z)
        s = z[self.rows] + z[self.n + self.cols]
        value = z.sum() + np.sum(np.log2(1.0 + self.d * x) - s * x)
        grad = np.ones(2 * self.n)
        grad[: self.n] -= np.bincount(self.rows, weights=x, minlength=self.n)
        grad[self.n :] -= np.bincount(self.cols, weights=x, minlength=self.n)
        return float(value), grad

    def primal(self, z: RealArray) -> RealArray:
        """Fractional matching recovered from ``z`` and scaled into the polytope."""
        x = np.zeros((self.n, self.n))
        x[self.rows, self.cols] = self.inner(z)
        x /= np.maximum(1.0, x.sum(axis=1, keepdims=True))
        x /= np.maximum(1.0, x.sum(axis=0, keepdims=True))
        x[self.fixed == 1] = 1.0
        return x


def relaxed_bound(
    fixed: FixingArray,
    snr: SnrTable,
    config: ScenarioConfig,
    *,
    incumbent: float = -np.inf,
    duals: RealArray | None = None,
) -> FractionalMatching:
    """Upper bound of the box relaxation under ``fixed`` (``FREE``, 0 or 1 per entry).

    The bound is the Lagrangian dual over the row and column constraints, which is a valid
    bound at any non-negative multipliers; minimization stops early once it drops below
    ``incumbent``. Conflicting fixings give an infeasible result with bound ``-inf``.
    """
    n = snr.n_subcarriers
    fixed = np.asarray(fixed, dtype=np.int8)
    relaxation = _BoxRelaxation(fixed, snr)
    if not relaxation.feasible:
        return FractionalMatching(x=np.zeros((n, n)), objective=-np.inf, bound=-np.inf)

    prefactor = config.rate_prefactor
    options = config.solver
    # incumbent in the units of the dual function
    threshold = incumbent / prefactor - relaxation.constant
    z0 = np.zeros(2 * n) if duals is None else np.asarray(duals, dtype=float).copy()
    for i, (low, high) in enumerate(relaxation.bounds):
        if high is not None:
            z0[i] = low

    best = {"value": np.inf, "z": z0}

    def fun(z: RealArray) -> tuple[float, RealArray]:
        value, grad = relaxation.dual(z)
        if value < best["value"]:
            best["value"], best["z"] = value, z.copy()
        return value, grad

    def stop_below_incumbent(intermediate_result: OptimizeResult) -> None:
        if best["value"] <= threshold:
            raise StopIteration

    fun(z0)
    if best["value"] > threshold and relaxation.rows.size:
        minimize(
            fun,
            z0,
            jac=True,
            method="L-BFGS-B",
            bounds=relaxation.bounds,
            callback=stop_below_incumbent,
            options={
                "maxiter": options.relaxation_max_iterations,
                "ftol": options.relaxation_tolerance,
                "gtol": options.relaxation_tolerance,
            },
        )

    x = relaxation.primal(best["z"])
    bound = prefactor * (relaxation.constant + best["value"])
    objective = relaxed_objective(x, snr, config)
    return FractionalMatching(
        x=x, objective=objective, bound=max(bound, objective), duals=best["z"]
    )


# -- branch-and-bound ----------------------------------------------------------------------


def assignment_bound(fixed: FixingArray, weights: RealArray) -> float:
    """Bound in bits/s on every binary completion of ``fixed``.

    A free row (or column) adds at most its best allowed weight, so the smaller of the row
    and column sums plus the weight fixed to one caps the completion.
    """
    fixed = np.asarray(fixed)
    ones = fixed == 1
    if ones.sum(axis=1).max(initial=0) > 1 or ones.sum(axis=0).max(initial=0) > 1:
        return -np.inf
    allowed = (fixed == FREE) & ~ones.any(axis=1)[:, None] & ~ones.any(axis=0)[None, :]
    free = np.where(allowed, np.maximum(weights, 0.0), 0.0)
    rest = min(free.max(axis=1, initial=0.0).sum(), free.max(axis=0, initial=0.0).sum())
    return float(weights[ones].sum() + rest)


def _candidates(fixed: FixingArray, x: RealArray, weights: RealArray) -> list[Matching]:
    """Matchings near a node: its relaxed point rounded, and its row-best completion."""
    positive = weights > 0
    scores = np.where(positive, (np.clip(x, 0.0, 1.0) + 1e-3) * weights, 0.0)
    candidates = [assignment_oracle(scores)[0]]

    ones = fixed == 1
    allowed = (fixed == FREE) & ~ones.any(axis=1)[:, None] & ~ones.any(axis=0)[None, :]
    free = np.where(allowed & positive, weights, 0.0)
    rows = np.flatnonzero(free.max(axis=1, initial=0.0) > 0)
    cols = free[rows].argmax(axis=1)
    if np.unique(cols).size == cols.size:
        pairs = [*zip(*np.nonzero(ones), strict=True), *zip(rows, cols, strict=True)]
        candidates.append(Matching.of(pairs))
    return candidates


def bnb_match(snr: SnrTable, config: ScenarioConfig) -> tuple[Matching, float, int]:
    """Globally optimal matching by depth-first branch-and-bound.

    Variables are branched from the last ``x[N-1, N-1]`` back to ``x[0, 0]``, 0-branch
    first. A node's bound is the smaller of ``assignment_bound`` and the box relaxation,
    and the relaxation is only solved when ``assignment_bound`` does not prune. Returns the
    matching, its sum rate in bits/s and the number of nodes created.
    """
    n = snr.n_subcarriers
    weights = pair_rates(snr, config)
    tie = config.solver.bnb_tie_tolerance
    order = [(p, q) for p in range(n) for q in range(n)]

    best = Matching.of((p, p) for p in range(n) if weights[p, p] > 0)
    best_value = matching_value(best, weights)

    def beats(value: float, reference: float) -> bool:
        return value > reference + tie * max(abs(reference), 1.0)

    def offer(candidate: Matching) -> None:
        nonlocal best, best_value
        value = matching_value(candidate, weights)
        if beats(value, best_value):
            best, best_value = candidate, value

    def evaluate(fixed: FixingArray, duals: RealArray | None) -> tuple[float, RealArray | None]:
        cheap = assignment_bound(fixed, weights)
        if not beats(cheap, best_value):
            return cheap, duals
        relaxed = relaxed_bound(fixed, snr, config, incumbent=best_value, duals=duals)
        if not relaxed.feasible:
            return relaxed.bound, duals
        if relaxed.is_integral():
            offer(Matching.from_array(relaxed.x))
        for candidate in _candidates(fixed, relaxed.x, weights):
            offer(candidate)
        return min(cheap, relaxed.bound), relaxed.duals

    root_fixed = np.full((n, n), FREE, dtype=np.int8)
    root_bound, root_duals = evaluate(root_fixed, None)
    stack = [BnbNode(fixed=root_fixed, depth=0, bound=root_bound, duals=root_duals)]
    nodes = 1

    while stack:
        node = stack.pop()
        if not beats(node.bound, best_value):
            continue
        if node.depth == len(order):
            offer(Matching.from_array((node.fixed == 1).astype(float)))
            continue

        p, q = order[-1 - node.depth]
        row_taken = bool((node.fixed[p] == 1).any())
        col_taken = bool((node.fixed[:, q] == 1).any())
        children = []
        for value in (1, 0):
            nodes += 1
            if value == 1 and (row_taken or col_taken or weights[p, q] <= 0):
                # infeasible, or dominated by the same matching without (p, q)
                continue
            fixed = node.fixed.copy()
            fixed[p, q] = value
            if value == 0 and (row_taken or col_taken or weights[p, q] <= 0):
                bound, duals = node.bound, node.duals
            else:
                bound, duals = evaluate(fixed, node.duals)
            if beats(bound, best_value):
                children.append(
                    BnbNode(fixed=fixed, depth=node.depth + 1, bound=bound, duals=duals)
                )
        # 1-child is pushed first so the 0-child is explored first
        stack.extend(children)

    ic(n, nodes, best_value)
    logger.debug(f"BnB matched {len(best)} pairs in {nodes} nodes, rate {best_value:.6g} bps")
    return best, best_value, nodes


# -- difference-of-convex penalty ----------------------------------------------------------


def dc_penalty(x: RealArray, x_prev: RealArray, eta: float) -> float:
    """Convexified penalty ``η Σ (x + x_prev² - 2 x_prev x)``, never below ``η Σ x(1-x)``."""
    x, x_prev = np.asarray(x, dtype=float), np.asarray(x_prev, dtype=float)
    return float(eta * np.sum(x + x_prev**2 - 2.0 * x_prev * x))


def penalty_weight(snr: SnrTable, config: ScenarioConfig) -> float:
    """η in bits/s: the configured value, or the rate of the best destination SNR."""
    if config.solver.dcp_eta is not None:
        return config.solver.dcp_eta
    return float(config.rate_prefactor * np.log2(1.0 + snr.dest.max(initial=0.0)))


def penalized_objective(x: RealArray, snr: SnrTable, config: ScenarioConfig, eta: float) -> float:
    """Relaxed objective minus the exact penalty ``η Σ x(1-x)``, in bits/s."""
    return relaxed_objective(x, snr, config) - eta * float(np.sum(x * (1.0 - x)))


def _assignment_vertex(gradient: RealArray) -> RealArray:
    """Vertex of the doubly-substochastic polytope maximizing ``<gradient, s>``."""
    vertex = np.zeros_like(gradient)
    gain = np.maximum(gradient, 0.0)
    rows, cols = linear_sum_assignment(gain, maximize=True)
    keep = gain[rows, cols] > 0
    vertex[rows[keep], cols[keep]] = 1.0
    return vertex


def _surrogate_step(
    x_prev: RealArray, snr: SnrTable, config: ScenarioConfig, eta_bits: float
) -> tuple[RealArray, int]:
    """Frank-Wolfe on the convexified subproblem, started at ``x_prev``.

    Exact line search keeps every step non-decreasing, so the result is never worse than
    the expansion point. Values are in bits.
    """
    relay, dest = snr.relay[:, None], snr.dest
    linear = eta_bits * (1.0 - 2.0 * x_prev)
    constant = eta_bits * float(np.sum(x_prev**2))

    def value(x: RealArray) -> float:
        rates = np.log2(1.0 + np.minimum(relay, x * dest)).sum()
        return float(rates - np.sum(linear * x) - constant)

    def gradient(x: RealArray) -> RealArray:
        grad = np.where(x * dest < relay, dest / ((1.0 + x * dest) * LN2), 0.0)
        return grad - linear

    options = config.solver
    x = x_prev.copy()
    f = value(x)
    iterations = 0
    for iterations in range(1, options.frank_wolfe_max_iterations + 1):
        g = gradient(x)
        direction = _assignment_vertex(g) - x
        gap = float(np.sum(g * direction))
        if gap <= options.frank_wolfe_gap * max(abs(f), 1.0):
            break
        search = minimize_scalar(
            lambda gamma: -value(x + gamma * direction),
            bounds=(0.0, 1.0),
            method="bounded",
            options={"xatol": 1e-12},
        )
        gamma, f_new = float(search.x), -float(search.fun)
        f_full = value(x + direction)
        if f_full > f_new:
            gamma, f_new = 1.0, f_full
        if f_new <= f:
            break
        x = np.clip(x + gamma * direction, 0.0, 1.0)
        f = f_new
    return x, iterations


def dcp_relaxation(snr: SnrTable, config: ScenarioConfig) -> tuple[RealArray, list[float]]:
    """Difference-of-convex iterations from the diagonal matching.

    Returns the final fractional point and the penalized objective (bits/s) after every
    iteration, starting with the diagonal.
    """
    n = snr.n_subcarriers
    eta = penalty_weight(snr, config)
    eta_bits = eta / config.rate_prefactor
    options = config.solver

    x = np.eye(n)
    trace = [penalized_objective(x, snr, config, eta)]
    for _ in range(options.dcp_max_iterations):
        x, fw_iterations = _surrogate_step(x, snr, config, eta_bits)
        trace.append(penalized_objective(x, snr, config, eta))
        logger.debug(f"DCP iteration {len(trace) - 1}: {trace[-1]:.6g} bps ({fw_iterations} FW)")
        if converged(trace, options.dcp_threshold):
            break
    return x, trace


def round_matching(x: RealArray, weights: RealArray) -> Matching:
    """Thresholds ``x`` at 0.5; conflicting rows or columns fall back to the assignment oracle."""
    try:
        matching = Matching.from_array(x, threshold=0.5)
    except ValidationError:
        matching, _ = assignment_oracle(x)
    return Matching.of((p, q) for p, q in matching.pairs if weights[p, q] > 0)


def dcp_match(snr: SnrTable, config: ScenarioConfig) -> tuple[Matching, float, int]:
    """Matching from the DC penalty method with its true sum rate and iteration count."""
    weights = pair_rates(snr, config)
    x, trace = dcp_relaxation(snr, config)
    matching = round_matching(x, weights)
    value = matching_value(matching, weights)
    ic(snr.n_subcarriers, len(trace) - 1, value)
    return matching, value, len(trace) - 1
