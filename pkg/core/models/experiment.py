"""Monte-Carlo sweep description and per-trial records."""

from pathlib import Path
from typing import Any, Self

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    PositiveInt,
    ValidationError,
    field_validator,
    model_validator,
)

from core.errors import ConfigError
from core.models.scenario import ScenarioConfig
from core.types import SCHEMES, Scheme, SweptParameter

# quantization_bits sweep value meaning continuous phases
CONTINUOUS_BITS = 0

INTEGER_PARAMETERS: frozenset[SweptParameter] = frozenset(
    {"n_elements", "n_subcarriers", "quantization_bits"}
)


class SweepSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    base: ScenarioConfig = Field(default_factory=ScenarioConfig)
    swept_parameter: SweptParameter
    values: tuple[float, ...]
    trials: PositiveInt = 50
    schemes: tuple[Scheme, ...] = SCHEMES
    blockage: bool = False

    @field_validator("values", mode="after")
    @classmethod
    def validate_values(cls, values: tuple[float, ...]) -> tuple[float, ...]:
        if not values:
            raise ValueError("values must not be empty")
        if list(values) != sorted(values):
            raise ValueError(f"values must be sorted, got {values}")
        return values

    @field_validator("schemes", mode="after")
    @classmethod
    def validate_schemes(cls, schemes: tuple[Scheme, ...]) -> tuple[Scheme, ...]:
        if not schemes:
            raise ValueError("at least one scheme is required")
        if len(set(schemes)) != len(schemes):
            raise ValueError(f"duplicate scheme in {schemes}")
        return schemes

    @model_validator(mode="after")
    def validate_integer_values(self) -> Self:
        if self.swept_parameter in INTEGER_PARAMETERS:
            bad = [v for v in self.values if v != int(v) or v < 0]
            if bad:
                raise ValueError(f"{self.swept_parameter} takes non-negative integers, got {bad}")
        return self

    def scenario_for(self, value: float) -> ScenarioConfig:
        """Base scenario with the swept parameter set to ``value``."""
        base = self.base.with_blockage() if self.blockage else self.base
        match self.swept_parameter:
            case "transmit_power":
                return base.evolve(p_source_w=value, p_relay_w=value)
            case "n_elements":
                return base.evolve(n_elements=int(value))
            case "n_subcarriers":
                return base.evolve(n_subcarriers=int(value))
            case "ris_height":
                return base.evolve(ris_height_m=value)
            case "fading_exponent":
                return base.evolve(fading_exponent=value)
            case "quantization_bits":
                bits = int(value)
                return base.evolve(quantization_bits=None if bits == CONTINUOUS_BITS else bits)

    def evolve(self, **changes: Any) -> "SweepSpec":
        data = self.model_dump()
        data.update(changes)
        try:
            return SweepSpec.model_validate(data)
        except ValidationError as e:
            raise ConfigError(str(e)) from e

    @classmethod
    def from_file(cls, path: Path) -> "SweepSpec":
        try:
            return cls.model_validate_json(Path(path).read_text())
        except ValidationError as e:
            raise ConfigError(f"Invalid sweep file {path}: {e}") from e
        except OSError as e:
            raise ConfigError(f"Cannot read sweep file {path}: {e}") from e


class TrialRecord(BaseModel):
    """Outcome of one scheme on one channel draw."""

    model_config = ConfigDict(frozen=True)

    scheme: Scheme
    param: SweptParameter
    value: float
    seed: int
    sum_rate_bps: float
    wall_time_s: float
    nodes: int = 0
    iters: int = 0
    rounds: int = 0
    pairs: tuple[tuple[int, int], ...] = ()
    pair_snrs: tuple[tuple[float, float], ...] = ()
    error: str | None = None

    @property
    def sort_key(self) -> tuple[int, float, int]:
        return SCHEMES.index(self.scheme), self.value, self.seed

    @property
    def failed(self) -> bool:
        return self.error is not None


class BalanceRow(BaseModel):
    p: int
    q: int
    snr_relay: float
    snr_dest: float

    @property
    def ratio(self) -> float:
        high = max(self.snr_relay, self.snr_dest)
        return min(self.snr_relay, self.snr_dest) / high if high > 0 else 1.0


class TimingRow(BaseModel):
    scheme: Scheme
    n_subcarriers: int
    mean_time_s: float
    mean_nodes: float
    mean_iters: float
    trials: int


class SummaryRow(BaseModel):
    scheme: Scheme
    value: float
    mean_rate_bps: float
    trials: int
    failures: int = 0
