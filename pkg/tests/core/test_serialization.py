from core.config import Settings
from core.models.experiment import TrialRecord
from core.serialization import (
    get_records_hash,
    pack_records,
    read_records,
    unpack_records,
    write_records,
)


def _records() -> list[TrialRecord]:
    return [
        TrialRecord(
            scheme="BnB-I",
            param="n_elements",
            value=4.0,
            seed=3,
            sum_rate_bps=123456.789,
            wall_time_s=0.5,
            nodes=17,
            rounds=3,
            pairs=((0, 1), (1, 0)),
            pair_snrs=((10.0, 9.5), (3.0, 4.0)),
        ),
        TrialRecord(
            scheme="DCP-I",
            param="n_elements",
            value=4.0,
            seed=3,
            sum_rate_bps=0.0,
            wall_time_s=0.1,
            error="beamforming failed",
        ),
    ]


def test_pack_keeps_every_field():
    packed, stats = pack_records(_records())
    assert stats["records"] == 2
    assert stats["failed"] == 1
    assert stats["packed_size"] == len(packed)
    assert unpack_records(packed) == _records()


def test_archive_file(tmp_path):
    path = tmp_path / "records.msgpack"
    write_records(_records(), path)
    assert read_records(path) == _records()


def test_hash_ignores_wall_time():
    records = _records()
    slower = [r.model_copy(update={"wall_time_s": r.wall_time_s + 1.0}) for r in records]
    changed = [records[0].model_copy(update={"sum_rate_bps": 1.0}), records[1]]
    assert get_records_hash(records) == get_records_hash(slower)
    assert get_records_hash(records) != get_records_hash(changed)


def test_settings_from_environment(monkeypatch):
    monkeypatch.setenv("RELAY_WORKERS", "3")
    monkeypatch.setenv("RELAY_DEBUG", "true")
    settings = Settings()
    assert settings.workers == 3
    assert settings.debug
