import pytest

from core.errors import ConfigError
from harness.services import export_service, sweep_service
from harness.services.export import CSV_HEADER, TIMING_HEADER


@pytest.fixture
def records(small_spec):
    return sweep_service.run_sweep(small_spec.evolve(schemes=("BnB-I", "DCP-II", "RelayOnly")))


class TestCsv:
    def test_header_and_rows(self, records, tmp_path):
        path = export_service.emit_csv(records, tmp_path / "sweep.csv")
        lines = path.read_text().splitlines()
        assert lines[0] == ",".join(CSV_HEADER)
        assert len(lines) == len(records) + 1

    def test_parse_gives_back_records(self, records, tmp_path):
        path = export_service.emit_csv(records, tmp_path / "sweep.csv")
        assert export_service.parse_csv(path) == records

    def test_failed_records_survive(self, records, tmp_path):
        failed = [
            records[0].model_copy(update={"sum_rate_bps": 0.0, "error": "SolverError: stalled"}),
            *records[1:],
        ]
        path = export_service.emit_csv(failed, tmp_path / "sweep.csv")
        parsed = export_service.parse_csv(path)
        assert parsed == failed
        assert parsed[0].failed
        assert parsed[1].pairs == records[1].pairs

    def test_timings_are_written_apart(self, records, tmp_path):
        path = export_service.emit_csv(records, tmp_path / "sweep.csv", timings=False)
        timing = export_service.emit_timing_csv(records, tmp_path / "sweep_timing.csv")
        parsed = export_service.parse_csv(path)
        assert all(record.wall_time_s == 0.0 for record in parsed)
        assert parsed == [r.model_copy(update={"wall_time_s": 0.0}) for r in records]
        lines = timing.read_text().splitlines()
        assert lines[0] == ",".join(TIMING_HEADER)
        assert [float(line.rsplit(",", 1)[1]) for line in lines[1:]] == [
            record.wall_time_s for record in records
        ]

    def test_without_timings_is_reproducible(self, small_spec, tmp_path):
        spec = small_spec.evolve(schemes=("DCP-I", "Random-II"))
        first = export_service.emit_csv(
            sweep_service.run_sweep(spec), tmp_path / "first.csv", timings=False
        )
        second = export_service.emit_csv(
            sweep_service.run_sweep(spec), tmp_path / "second.csv", timings=False
        )
        assert first.read_bytes() == second.read_bytes()

    def test_empty_records(self, tmp_path):
        with pytest.raises(ConfigError):
            export_service.emit_csv([], tmp_path / "empty.csv")

    def test_unwritable_path(self, records, tmp_path):
        with pytest.raises(ConfigError):
            export_service.emit_csv(records, tmp_path / "missing" / "sweep.csv")

    def test_wrong_header(self, tmp_path):
        path = tmp_path / "other.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(ConfigError):
            export_service.parse_csv(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            export_service.parse_csv(tmp_path / "nope.csv")


def test_plot_script(records, small_spec, tmp_path):
    csv_path = export_service.emit_csv(records, tmp_path / "elements.csv")
    path = export_service.emit_plot_script(
        records, tmp_path / "elements_plot.py", csv_path, small_spec.base
    )
    script = path.read_text()
    compile(script, str(path), "exec")
    assert "'elements.csv'" in script
    assert "Number of reflecting elements" in script
    assert "N_SUBCARRIERS = 2" in script
    assert "import matplotlib.pyplot as plt" in script


def test_malformed_cell(records, tmp_path):
    path = export_service.emit_csv(records[:1], tmp_path / "sweep.csv")
    text = path.read_text().replace("[[", "[[oops", 1)
    path.write_text(text)
    with pytest.raises(ConfigError):
        export_service.parse_csv(path)
