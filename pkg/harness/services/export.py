"""CSV tables and generated plot scripts for sweep records."""

import csv
import json
import logging
from collections.abc import Iterable, Sequence
from pathlib import Path
from string import Template

from pydantic import ValidationError

from core.errors import ConfigError
from core.models.experiment import TrialRecord
from core.models.scenario import ScenarioConfig

logger = logging.getLogger(__name__)

CSV_HEADER = (
    "scheme",
    "param",
    "value",
    "seed",
    "rate_bps",
    "time_s",
    "nodes",
    "iters",
    "rounds",
    "pairs",
    "pair_snrs",
    "error",
)
TIMING_HEADER = ("scheme", "param", "value", "seed", "time_s")

AXIS_LABELS = {
    "transmit_power": "Transmit power (W)",
    "n_elements": "Number of reflecting elements",
    "n_subcarriers": "Number of subcarriers",
    "ris_height": "RIS height (m)",
    "fading_exponent": "Path-loss exponent",
    "quantization_bits": "Phase quantization bits (0 = continuous)",
}

PLOT_TEMPLATE = Template('''\
"""Mean achievable rate per scheme against $param, read from $csv_name."""

import csv
from collections import defaultdict
from pathlib import Path

import matplotlib.pyplot as plt

CSV_PATH = Path(__file__).with_name($csv_literal)
PARAM = $param_literal
X_LABEL = $label_literal
SUBCARRIER_BANDWIDTH_HZ = $bandwidth
N_SUBCARRIERS = $n_subcarriers
MARKERS = {"BnB": "o", "DCP": "s", "Random": "^", "RelayOnly": "x"}


def spectral_efficiency(row):
    n = float(row["value"]) if PARAM == "n_subcarriers" else N_SUBCARRIERS
    return float(row["rate_bps"]) / (n * SUBCARRIER_BANDWIDTH_HZ)


def main():
    rates = defaultdict(lambda: defaultdict(list))
    with CSV_PATH.open(newline="") as f:
        for row in csv.DictReader(f):
            rates[row["scheme"]][float(row["value"])].append(spectral_efficiency(row))

    fig, ax = plt.subplots(figsize=(6, 4.5))
    for scheme, by_value in rates.items():
        values = sorted(by_value)
        means = [sum(by_value[v]) / len(by_value[v]) for v in values]
        marker = MARKERS.get(scheme.split("-")[0], "o")
        linestyle = "--" if scheme.endswith("-II") else "-"
        ax.plot(values, means, marker=marker, linestyle=linestyle, label=scheme)
    ax.set_xlabel(X_LABEL)
    ax.set_ylabel("Achievable rate (bit/s/Hz)")
    ax.grid(True, linestyle="--", alpha=0.5)
    ax.legend()
    fig.tight_layout()
    fig.savefig(CSV_PATH.with_suffix(".png"), dpi=150)
    plt.show()


if __name__ == "__main__":
    main()
''')


def _require_records(records: Sequence[TrialRecord]) -> None:
    if not records:
        raise ConfigError("no records to export")


class ExportService:
    def emit_csv(self, records: Sequence[TrialRecord], path: Path, *, timings: bool = True) -> Path:
        """Writes one row per record with the fixed header.

        Floats are written with ``repr`` and the list columns as JSON, so parsing gives back
        the same records. With ``timings=False`` the ``time_s`` column is zeroed, which makes
        the file a pure function of the sweep and its seeds.
        """
        _require_records(records)
        rows = (
            (
                record.scheme,
                record.param,
                repr(record.value),
                record.seed,
                repr(record.sum_rate_bps),
                repr(record.wall_time_s if timings else 0.0),
                record.nodes,
                record.iters,
                record.rounds,
                json.dumps(record.pairs),
                json.dumps(record.pair_snrs),
                json.dumps(record.error),
            )
            for record in records
        )
        return self._write(path, CSV_HEADER, rows, len(records))

    def emit_timing_csv(self, records: Sequence[TrialRecord], path: Path) -> Path:
        """Wall times keyed like ``emit_csv`` rows, kept apart from the reproducible table."""
        _require_records(records)
        rows = (
            (record.scheme, record.param, repr(record.value), record.seed, repr(record.wall_time_s))
            for record in records
        )
        return self._write(path, TIMING_HEADER, rows, len(records))

    def _write(self, path: Path, header: tuple[str, ...], rows: Iterable, count: int) -> Path:
        path = Path(path)
        try:
            with path.open("w", newline="") as f:
                writer = csv.writer(f, lineterminator="\n")
                writer.writerow(header)
                writer.writerows(rows)
        except OSError as e:
            raise ConfigError(f"Cannot write {path}: {e}") from e
        logger.info(f"Wrote {count} records to {path}")
        return path

    def parse_csv(self, path: Path) -> list[TrialRecord]:
        try:
            with Path(path).open(newline="") as f:
                reader = csv.DictReader(f)
                if tuple(reader.fieldnames or ()) != CSV_HEADER:
                    raise ConfigError(f"{path} does not have the header {','.join(CSV_HEADER)}")
                return [
                    TrialRecord(
                        scheme=row["scheme"],
                        param=row["param"],
                        value=float(row["value"]),
                        seed=int(row["seed"]),
                        sum_rate_bps=float(row["rate_bps"]),
                        wall_time_s=float(row["time_s"]),
                        nodes=int(row["nodes"]),
                        iters=int(row["iters"]),
                        rounds=int(row["rounds"]),
                        pairs=json.loads(row["pairs"]),
                        pair_snrs=json.loads(row["pair_snrs"]),
                        error=json.loads(row["error"]),
                    )
                    for row in reader
                ]
        except OSError as e:
            raise ConfigError(f"Cannot read {path}: {e}") from e
        except ConfigError:
            raise
        except (ValueError, ValidationError) as e:
            raise ConfigError(f"Malformed row in {path}: {e}") from e

    def emit_plot_script(
        self,
        records: Sequence[TrialRecord],
        path: Path,
        csv_path: Path,
        base: ScenarioConfig,
    ) -> Path:
        """Writes a standalone matplotlib script plotting ``csv_path`` in bit/s/Hz."""
        _require_records(records)
        param = records[0].param
        script = PLOT_TEMPLATE.substitute(
            param=param,
            csv_name=Path(csv_path).name,
            csv_literal=repr(Path(csv_path).name),
            param_literal=repr(param),
            label_literal=repr(AXIS_LABELS[param]),
            bandwidth=repr(base.subcarrier_bandwidth_hz),
            n_subcarriers=base.n_subcarriers,
        )
        path = Path(path)
        try:
            path.write_text(script)
        except OSError as e:
            raise ConfigError(f"Cannot write {path}: {e}") from e
        logger.info(f"Wrote plot script {path}")
        return path


export_service = ExportService()
