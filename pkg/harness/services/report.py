import logging
from collections import defaultdict
from collections.abc import Iterable, Sequence

import numpy as np

from core.errors import ConfigError
from core.models.experiment import BalanceRow, SummaryRow, SweepSpec, TimingRow, TrialRecord
from core.models.solution import OptimizationResult
from core.types import Scheme
from harness.services.sweep import sweep_service

logger = logging.getLogger(__name__)

# schemes compared by the runtime table, exact matcher against its DC counterpart
TIMED_PAIRS: tuple[tuple[Scheme, Scheme], ...] = (("BnB-I", "DCP-I"), ("BnB-II", "DCP-II"))


def mean_ratio(rows: Sequence[BalanceRow]) -> float:
    """Mean min/max SNR ratio over matched pairs; NaN without pairs."""
    if not rows:
        return float("nan")
    return float(np.mean([row.ratio for row in rows]))


def record_balance(record: TrialRecord) -> list[BalanceRow]:
    return [
        BalanceRow(p=p, q=q, snr_relay=snr_relay, snr_dest=snr_dest)
        for (p, q), (snr_relay, snr_dest) in zip(record.pairs, record.pair_snrs, strict=True)
    ]


class ReportService:
    """Tables derived from optimization results and sweep records."""

    def snr_balance_report(self, result: OptimizationResult) -> list[BalanceRow]:
        """Both hop SNRs of every matched pair; unmatched subcarriers are left out."""
        return [
            BalanceRow(
                p=p,
                q=q,
                snr_relay=float(result.snr.relay[p]),
                snr_dest=float(result.snr.dest[p, q]),
            )
            for p, q in result.matching.pairs
        ]

    def summary_table(self, records: Iterable[TrialRecord]) -> list[SummaryRow]:
        """Mean rate per scheme and swept value, failed trials included at their best rate."""
        groups: dict[tuple[Scheme, float], list[TrialRecord]] = defaultdict(list)
        for record in records:
            groups[(record.scheme, record.value)].append(record)
        rows = [
            SummaryRow(
                scheme=scheme,
                value=value,
                mean_rate_bps=float(np.mean([r.sum_rate_bps for r in group])),
                trials=len(group),
                failures=sum(r.failed for r in group),
            )
            for (scheme, value), group in groups.items()
        ]
        return sorted(rows, key=lambda row: (row.scheme, row.value))

    def timing_rows(self, records: Iterable[TrialRecord]) -> list[TimingRow]:
        groups: dict[tuple[Scheme, int], list[TrialRecord]] = defaultdict(list)
        for record in records:
            groups[(record.scheme, int(record.value))].append(record)
        rows = [
            TimingRow(
                scheme=scheme,
                n_subcarriers=n,
                mean_time_s=float(np.mean([r.wall_time_s for r in group])),
                mean_nodes=float(np.mean([r.nodes for r in group])),
                mean_iters=float(np.mean([r.iters for r in group])),
                trials=len(group),
            )
            for (scheme, n), group in groups.items()
        ]
        return sorted(rows, key=lambda row: (row.scheme, row.n_subcarriers))

    def timing_table(self, spec: SweepSpec, workers: int = 1) -> list[TimingRow]:
        """Mean wall time per scheme and number of subcarriers."""
        if spec.swept_parameter != "n_subcarriers":
            raise ConfigError(
                f"timing table needs an n_subcarriers sweep, got {spec.swept_parameter}"
            )
        rows = self.timing_rows(sweep_service.run_sweep(spec, workers))
        for violation in self.timing_violations(rows):
            logger.warning(violation)
        return rows

    def timing_violations(self, rows: Sequence[TimingRow], min_subcarriers: int = 3) -> list[str]:
        """Sizes where branch-and-bound was not slower than the DC penalty method."""
        times = {(row.scheme, row.n_subcarriers): row.mean_time_s for row in rows}
        violations = []
        for exact, dcp in TIMED_PAIRS:
            for (scheme, n), exact_time in sorted(times.items()):
                if scheme != exact or n < min_subcarriers or (dcp, n) not in times:
                    continue
                if exact_time <= times[(dcp, n)]:
                    violations.append(
                        f"{exact} ({exact_time:.3g}s) not slower than {dcp} "
                        f"({times[(dcp, n)]:.3g}s) at N={n}"
                    )
        return violations


report_service = ReportService()
