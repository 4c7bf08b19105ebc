import logging
import math
from pathlib import Path

from icecream import ic

from core.abstract import App
from core.errors import ConfigError, OptimizationError
from core.models.experiment import SweepSpec
from core.models.scenario import ScenarioConfig
from core.serialization import get_records_hash, write_records
from core.types import SCHEMES, Scheme
from harness.services import export_service, report_service, sweep_service
from harness.services.report import mean_ratio
from harness.services.sweep import run_scheme, trial_seed

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_SOLVER_FAILURE = 1
EXIT_CONFIG_ERROR = 2


def parse_schemes(raw: str | None) -> tuple[Scheme, ...] | None:
    """Comma separated scheme list, e.g. ``BnB-I,DCP-I``."""
    if raw is None:
        return None
    schemes = tuple(s.strip() for s in raw.split(",") if s.strip())
    unknown = [s for s in schemes if s not in SCHEMES]
    if unknown:
        raise ConfigError(f"unknown schemes {unknown}, choose from {', '.join(SCHEMES)}")
    if not schemes:
        raise ConfigError("at least one scheme is required")
    return schemes  # type: ignore[return-value]


class _ExperimentApp(App):
    """Shared handling of the command-line overrides."""

    def scenario(self) -> ScenarioConfig:
        config = ScenarioConfig.from_file(self.args.config)
        if self.args.seed is not None:
            config = config.evolve(rng_seed=self.args.seed)
        return config

    def sweep_spec(self) -> SweepSpec:
        spec = SweepSpec.from_file(self.args.config)
        changes = {}
        if self.args.seed is not None:
            changes["base"] = spec.base.evolve(rng_seed=self.args.seed)
        if self.args.trials is not None:
            changes["trials"] = self.args.trials
        schemes = parse_schemes(self.args.schemes)
        if schemes is not None:
            changes["schemes"] = schemes
        return spec.evolve(**changes) if changes else spec

    @property
    def out_dir(self) -> Path:
        out_dir = Path(self.args.out_dir) if self.args.out_dir else self.settings.out_dir
        try:
            out_dir.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise ConfigError(f"Cannot create output directory {out_dir}: {e}") from e
        return out_dir

    @property
    def workers(self) -> int:
        return self.args.workers or self.settings.workers


class RunApp(_ExperimentApp):
    """Optimizes one scenario with every requested scheme and prints a summary."""

    def run(self) -> int:
        config = self.scenario()
        schemes = parse_schemes(self.args.schemes) or ("BnB-I",)
        status = EXIT_OK
        for scheme in schemes:
            try:
                result = run_scheme(scheme, config)
            except OptimizationError as e:
                logger.error(f"{scheme} failed: {e}")
                status = EXIT_SOLVER_FAILURE
                if e.best_result is None:
                    continue
                result = e.best_result
            print(f"{scheme}: {result.sum_rate_bps:.6g} bit/s in {result.rounds} rounds")
            print(f"  pairs: {list(result.matching.pairs)}")
            print(f"  trace: {[round(value, 6) for value in result.objective_trace]}")
            print(
                f"  nodes: {result.bnb_nodes}, DCP iterations: {result.dcp_iterations}, "
                f"time: {result.wall_time_s:.3f}s"
            )
        return status


class SweepApp(_ExperimentApp):
    """Runs a sweep and writes the CSV table, the plot script and the record archive.

    The table is reproducible; wall times go to ``<stem>_timing.csv``.
    """

    def run(self) -> int:
        spec = self.sweep_spec()
        records = sweep_service.run_sweep(spec, self.workers)
        stem = Path(self.args.config).stem
        out_dir = self.out_dir

        csv_path = export_service.emit_csv(records, out_dir / f"{stem}.csv", timings=False)
        export_service.emit_timing_csv(records, out_dir / f"{stem}_timing.csv")
        export_service.emit_plot_script(records, out_dir / f"{stem}_plot.py", csv_path, spec.base)
        stats = write_records(records, out_dir / f"{stem}.msgpack")
        ic(stats)
        logger.info(f"Records hash {get_records_hash(records)}")

        for row in report_service.summary_table(records):
            failures = f" ({row.failures} failed)" if row.failures else ""
            print(
                f"{row.scheme:<10} {spec.swept_parameter}={row.value:<8g} "
                f"{row.mean_rate_bps:12.6g} bit/s over {row.trials} trials{failures}"
            )
        return EXIT_SOLVER_FAILURE if any(record.failed for record in records) else EXIT_OK


class SnrReportApp(_ExperimentApp):
    """Per-pair hop SNRs with and without the RIS."""

    def run(self) -> int:
        config = self.scenario()
        schemes = parse_schemes(self.args.schemes) or ("BnB-I", "RelayOnly")
        trials = self.args.trials or 1
        status = EXIT_OK
        for scheme in schemes:
            ratios = []
            for trial in range(trials):
                trial_config = config.evolve(rng_seed=trial_seed(config.rng_seed, trial))
                try:
                    result = run_scheme(scheme, trial_config)
                except OptimizationError as e:
                    logger.error(f"{scheme} failed on trial {trial}: {e}")
                    status = EXIT_SOLVER_FAILURE
                    if e.best_result is None:
                        continue
                    result = e.best_result
                rows = report_service.snr_balance_report(result)
                ratios.append(mean_ratio(rows))
                if trial == 0:
                    print(f"{scheme}, seed {trial_config.rng_seed}")
                    for row in rows:
                        print(
                            f"  ({row.p}, {row.q})  SNR_R={row.snr_relay:10.4g}  "
                            f"SNR_D={row.snr_dest:10.4g}  ratio={row.ratio:.4f}"
                        )
            valid = [r for r in ratios if not math.isnan(r)]
            if valid:
                mean = sum(valid) / len(valid)
                print(f"{scheme}: mean ratio {mean:.4f} over {len(valid)} trials")
        return status


class BenchApp(_ExperimentApp):
    """Runtime table over the number of subcarriers."""

    def run(self) -> int:
        spec = self.sweep_spec()
        rows = report_service.timing_table(spec, self.workers)
        print(f"{'scheme':<10} {'N':>3} {'time (s)':>10} {'nodes':>10} {'iters':>8}")
        for row in rows:
            print(
                f"{row.scheme:<10} {row.n_subcarriers:>3} {row.mean_time_s:>10.4f} "
                f"{row.mean_nodes:>10.1f} {row.mean_iters:>8.1f}"
            )
        return EXIT_OK
