import logging
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np
from icecream import ic

from core.errors import OptimizationError, RelayError
from core.models.experiment import SweepSpec, TrialRecord
from core.models.scenario import ScenarioConfig
from core.models.solution import OptimizationResult
from core.types import Scheme
from solver.channel import draw_channels
from solver.optimizer import alternating_optimize, random_phase_baseline, relay_only

logger = logging.getLogger(__name__)


def trial_seed(base_seed: int, trial: int) -> int:
    """Seed of one trial; shared by every scheme and swept value."""
    state = np.random.SeedSequence([base_seed, trial]).generate_state(1, dtype=np.uint64)
    return int(state[0])


def run_scheme(scheme: Scheme, config: ScenarioConfig) -> OptimizationResult:
    """Runs ``scheme`` on the channels of ``config.rng_seed``."""
    channels = draw_channels(config)
    case = 1 if scheme.endswith("-II") else 0
    config = config.evolve(case_indicator=case)
    match scheme:
        case "BnB-I" | "BnB-II":
            return alternating_optimize(channels, config, "exact")
        case "DCP-I" | "DCP-II":
            return alternating_optimize(channels, config, "dcp")
        case "Random-I" | "Random-II":
            return random_phase_baseline(channels, config)
        case "RelayOnly":
            return relay_only(channels, config)
    raise ValueError(f"unknown scheme {scheme}")


def _record(
    spec: SweepSpec, scheme: Scheme, value: float, seed: int, result: OptimizationResult
) -> TrialRecord:
    snr = result.snr
    return TrialRecord(
        scheme=scheme,
        param=spec.swept_parameter,
        value=value,
        seed=seed,
        sum_rate_bps=result.sum_rate_bps,
        wall_time_s=result.wall_time_s,
        nodes=result.bnb_nodes,
        iters=result.dcp_iterations,
        rounds=result.rounds,
        pairs=result.matching.pairs,
        pair_snrs=tuple(
            (float(snr.relay[p]), float(snr.dest[p, q])) for p, q in result.matching.pairs
        ),
    )


def run_trial(spec: SweepSpec, value: float, trial: int) -> list[TrialRecord]:
    """Every scheme of ``spec`` on one channel draw; failures become error records."""
    seed = trial_seed(spec.base.rng_seed, trial)
    config = spec.scenario_for(value).evolve(rng_seed=seed)
    records = []
    for scheme in spec.schemes:
        started = time.perf_counter()
        try:
            result = run_scheme(scheme, config)
        except OptimizationError as e:
            logger.error(f"{scheme} failed at {spec.swept_parameter}={value}, seed {seed}: {e}")
            best = e.best_result
            records.append(
                TrialRecord(
                    scheme=scheme,
                    param=spec.swept_parameter,
                    value=value,
                    seed=seed,
                    sum_rate_bps=best.sum_rate_bps if best is not None else 0.0,
                    wall_time_s=time.perf_counter() - started,
                    error=str(e),
                )
            )
            continue
        except RelayError as e:
            logger.error(f"{scheme} failed at {spec.swept_parameter}={value}, seed {seed}: {e}")
            records.append(
                TrialRecord(
                    scheme=scheme,
                    param=spec.swept_parameter,
                    value=value,
                    seed=seed,
                    sum_rate_bps=0.0,
                    wall_time_s=time.perf_counter() - started,
                    error=str(e),
                )
            )
            continue
        records.append(_record(spec, scheme, value, seed, result))
    return records


class SweepService:
    """Runs Monte-Carlo sweeps, optionally across worker processes."""

    def run_sweep(self, spec: SweepSpec, workers: int = 1) -> list[TrialRecord]:
        tasks = [(value, trial) for value in spec.values for trial in range(spec.trials)]
        ic(spec.swept_parameter, len(tasks), workers)
        logger.info(
            f"Sweeping {spec.swept_parameter} over {list(spec.values)} with {spec.trials} "
            f"trials and schemes {list(spec.schemes)}"
        )
        records: list[TrialRecord] = []
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                futures = [pool.submit(run_trial, spec, value, trial) for value, trial in tasks]
                for future in futures:
                    records.extend(future.result())
        else:
            for value, trial in tasks:
                records.extend(run_trial(spec, value, trial))

        records.sort(key=lambda record: record.sort_key)
        failed = sum(record.failed for record in records)
        if failed:
            logger.warning(f"{failed} of {len(records)} trials failed")
        logger.info(f"Sweep finished with {len(records)} records")
        return records


sweep_service = SweepService()
