"""Alternating optimization of subcarrier matching and RIS beamforming."""

import logging
import time

import numpy as np
from icecream import ic

from core.errors import OptimizationError, SolverError
from core.models.channel import ChannelRealization
from core.models.scenario import ScenarioConfig
from core.models.solution import (
    BeamformingSolution,
    LiftedMatrices,
    Matching,
    OptimizationResult,
    SnrTable,
)
from core.types import MatcherKind
from solver.beamforming import (
    build_lifted_matrices,
    gaussian_randomization,
    quantize_solution,
    solve_sdr,
)
from solver.convergence import converged
from solver.matching import bnb_match, dcp_match
from solver.snr_model import matching_rate, snr_table

logger = logging.getLogger(__name__)

# stream index of the optimizer RNG next to the channel stream of a seed
OPTIMIZER_STREAM = 1

__all__ = [
    "AlternatingOptimizer",
    "alternating_optimize",
    "converged",
    "optimizer_rng",
    "random_phase_baseline",
    "relay_only",
]


def optimizer_rng(config: ScenarioConfig) -> np.random.Generator:
    return np.random.default_rng([config.rng_seed, OPTIMIZER_STREAM])


class AlternatingOptimizer:
    """Alternates a matcher with semidefinite relaxation plus Gaussian randomization.

    Every step keeps its previous decision when the new one lowers the sum rate, so the
    objective trace never decreases.
    """

    def __init__(
        self,
        channels: ChannelRealization,
        config: ScenarioConfig,
        matcher: MatcherKind,
        rng: np.random.Generator | None = None,
    ):
        self.channels = channels
        self.config = config
        self.matcher = matcher
        self.rng = rng if rng is not None else optimizer_rng(config)
        self.k = config.case_indicator

        self.beamforming = quantize_solution(
            BeamformingSolution.random(channels.n_elements, self.rng), config.quantization_bits
        )
        self.snr = self._snr(self.beamforming)
        self.matching = Matching()
        self.rate = 0.0
        self.trace: list[float] = []
        self.bnb_nodes = 0
        self.dcp_iterations = 0
        self._started = time.perf_counter()

    def _snr(self, beamforming: BeamformingSolution) -> SnrTable:
        return snr_table(beamforming.v1, beamforming.v2, self.k, self.channels, self.config)

    def match_step(self) -> None:
        if self.matcher == "exact":
            candidate, value, nodes = bnb_match(self.snr, self.config)
            self.bnb_nodes += nodes
        else:
            candidate, value, iterations = dcp_match(self.snr, self.config)
            self.dcp_iterations += iterations
        current = matching_rate(self.matching, self.snr, self.config)
        if not self.trace or value >= current:
            self.matching = candidate
        else:
            logger.debug(f"Matcher regressed ({value:.6g} < {current:.6g} bps), kept matching")
        self.rate = matching_rate(self.matching, self.snr, self.config)

    def beamforming_step(self, lifted: LiftedMatrices) -> None:
        options = self.config.solver
        sdp = solve_sdr(self.matching, lifted, self.k, self.config)
        candidate = gaussian_randomization(
            sdp,
            options.randomization_draws,
            self.matching,
            self.channels,
            self.k,
            self.config,
            self.rng,
        )
        snr = self._snr(candidate)
        rate = matching_rate(self.matching, snr, self.config)
        if rate >= self.rate:
            self.beamforming, self.snr, self.rate = candidate, snr, rate
        else:
            logger.debug(f"Randomization regressed ({rate:.6g} < {self.rate:.6g} bps)")

    def result(self) -> OptimizationResult:
        return OptimizationResult(
            matching=self.matching,
            beamforming=self.beamforming,
            snr=self.snr,
            sum_rate_bps=self.rate,
            objective_trace=list(self.trace),
            rounds=len(self.trace),
            matcher=self.matcher,
            case_indicator=self.k,
            bnb_nodes=self.bnb_nodes,
            dcp_iterations=self.dcp_iterations,
            wall_time_s=time.perf_counter() - self._started,
        )

    def run(self) -> OptimizationResult:
        options = self.config.solver
        has_ris = self.channels.n_elements > 0
        lifted = build_lifted_matrices(self.channels, self.config) if has_ris else None

        for round_index in range(1, options.max_rounds + 1):
            self.match_step()
            if has_ris:
                try:
                    self.beamforming_step(lifted)
                except SolverError as e:
                    self.trace.append(self.rate)
                    logger.error(f"Beamforming failed in round {round_index}: {e}")
                    raise OptimizationError(
                        f"beamforming failed in round {round_index}: {e}",
                        best_result=self.result(),
                    ) from e
            self.trace.append(self.rate)
            ic(round_index, self.rate)
            logger.debug(f"Round {round_index}: {self.rate:.6g} bps")
            if not has_ris or converged(self.trace, options.outer_threshold):
                break
        else:
            logger.warning(f"Stopped after {options.max_rounds} rounds without converging")

        result = self.result()
        logger.info(
            f"{self.matcher} matcher, case {self.k}: {result.sum_rate_bps:.6g} bps "
            f"after {result.rounds} rounds in {result.wall_time_s:.3f}s"
        )
        return result


def alternating_optimize(
    channels: ChannelRealization,
    config: ScenarioConfig,
    matcher: MatcherKind,
    rng: np.random.Generator | None = None,
) -> OptimizationResult:
    return AlternatingOptimizer(channels, config, matcher, rng).run()


def relay_only(channels: ChannelRealization, config: ScenarioConfig) -> OptimizationResult:
    """Optimal matching on the direct links alone."""
    return alternating_optimize(channels.without_ris(), config, "exact")


def random_phase_baseline(
    channels: ChannelRealization,
    config: ScenarioConfig,
    rng: np.random.Generator | None = None,
) -> OptimizationResult:
    """Uniformly random phases with the optimal matching for them."""
    optimizer = AlternatingOptimizer(channels, config, "exact", rng)
    optimizer.match_step()
    optimizer.trace.append(optimizer.rate)
    return optimizer.result()
