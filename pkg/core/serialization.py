"""Shared serialization utilities for trial records using msgpack."""

import hashlib
from collections.abc import Iterable
from pathlib import Path
from typing import Any

import msgpack

from core.models.experiment import TrialRecord


def pack_records(records: Iterable[TrialRecord]) -> tuple[bytes, dict[str, Any]]:
    """
    Pack trial records using msgpack with statistics.

    Args:
        records: Trial records, already in emission order

    Returns:
        Tuple of (packed_bytes, stats_dict)
    """
    payload = [record.model_dump(mode="json") for record in records]
    packed: bytes = msgpack.packb(payload, use_bin_type=True)  # type: ignore[assignment]

    stats = {
        "records": len(payload),
        "failed": sum(1 for item in payload if item["error"] is not None),
        "packed_size": len(packed),
        "format": "msgpack",
    }
    return packed, stats


def unpack_records(packed_data: bytes) -> list[TrialRecord]:
    """
    Unpack trial records from msgpack format.

    Args:
        packed_data: Binary msgpack data

    Returns:
        Validated trial records
    """
    payload = msgpack.unpackb(packed_data, raw=False, strict_map_key=False)
    return [TrialRecord.model_validate(item) for item in payload]


def get_records_hash(records: Iterable[TrialRecord]) -> str:
    """MD5 of the packed records without wall times, used to compare sweeps for determinism."""
    packed, _ = pack_records(record.model_copy(update={"wall_time_s": 0.0}) for record in records)
    return hashlib.md5(packed).hexdigest()


def write_records(records: Iterable[TrialRecord], path: Path) -> dict[str, Any]:
    packed, stats = pack_records(records)
    Path(path).write_bytes(packed)
    return stats


def read_records(path: Path) -> list[TrialRecord]:
    return unpack_records(Path(path).read_bytes())
