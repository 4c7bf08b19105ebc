"""Scenario and solver configuration models."""

import math
from pathlib import Path
from typing import Any, Literal, Self

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    NonNegativeFloat,
    NonNegativeInt,
    PositiveFloat,
    PositiveInt,
    ValidationError,
    model_validator,
)

from core.errors import ConfigError
from core.types import LinkId, RisAnchor

# Links crossing the obstacle in the blockage study; IR and RI are the same physical link
BLOCKED_LINKS: tuple[LinkId, ...] = ("SR", "RD", "IR", "RI")


class SolverOptions(BaseModel):
    """Tolerances and iteration caps of every solver in the pipeline."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    # branch-and-bound / box relaxation
    bnb_tie_tolerance: NonNegativeFloat = 1e-12
    relaxation_tolerance: PositiveFloat = 1e-10
    relaxation_max_iterations: PositiveInt = 200

    # difference-of-convex penalty
    dcp_threshold: PositiveFloat = 1e-6
    dcp_max_iterations: PositiveInt = 50
    dcp_eta: PositiveFloat | None = None
    frank_wolfe_gap: PositiveFloat = 1e-7
    frank_wolfe_max_iterations: PositiveInt = 400

    # alternating optimization
    outer_threshold: PositiveFloat = 1e-6
    max_rounds: PositiveInt = 30

    # semidefinite relaxation and randomization
    sdp_tolerance: PositiveFloat = 1e-7
    sdp_max_iterations: PositiveInt = 200
    randomization_draws: PositiveInt = 1000
    rank_one_ratio: PositiveFloat = 1e-6


class ScenarioConfig(BaseModel):
    """All physical and algorithmic parameters of one experiment.

    Powers and noise are linear watts; path-loss reference and shadowing are dB.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    n_subcarriers: PositiveInt = 4
    n_elements: NonNegativeInt = 8
    n_taps: PositiveInt = 2
    subcarrier_bandwidth_hz: PositiveFloat = 15e3
    slot_duration_s: PositiveFloat = 0.1
    noise_power_w: PositiveFloat = 1e-12  # -90 dBm
    p_source_w: PositiveFloat = 1.0
    p_relay_w: PositiveFloat = 1.0

    d_source_relay_m: PositiveFloat = 8.0
    d_relay_dest_m: PositiveFloat = 8.0
    d_ris_relay_m: PositiveFloat = 1.0
    ris_height_m: NonNegativeFloat = 1 / math.sqrt(2)
    ris_anchor: RisAnchor = "relay"

    pathloss_ref_db: float = -20.0
    ref_distance_m: PositiveFloat = 1.0
    fading_exponent: PositiveFloat = 2.2
    shadow_db_per_link: dict[LinkId, float] = Field(default_factory=dict)

    case_indicator: Literal[0, 1] = 0
    quantization_bits: PositiveInt | None = None
    rng_seed: int = Field(default=0, ge=0, lt=2**64)

    solver: SolverOptions = Field(default_factory=SolverOptions)

    @model_validator(mode="after")
    def validate_taps(self) -> Self:
        if self.n_taps > self.n_subcarriers:
            raise ValueError(
                f"n_taps ({self.n_taps}) must not exceed n_subcarriers ({self.n_subcarriers})"
            )
        return self

    @property
    def rate_prefactor(self) -> float:
        """Δ/(2T): bits/s carried by one bit/s/Hz of a relayed subcarrier pair."""
        return self.subcarrier_bandwidth_hz / (2 * self.slot_duration_s)

    def shadow_db(self, link: LinkId) -> float:
        return self.shadow_db_per_link.get(link, 0.0)

    def evolve(self, **changes: Any) -> "ScenarioConfig":
        """Returns a validated copy with ``changes`` applied."""
        data = self.model_dump()
        data.update(changes)
        try:
            return ScenarioConfig.model_validate(data)
        except ValidationError as e:
            raise ConfigError(str(e)) from e

    def with_blockage(self, shadow_db: float = -20.0) -> "ScenarioConfig":
        shadows = dict(self.shadow_db_per_link)
        shadows.update(dict.fromkeys(BLOCKED_LINKS, shadow_db))
        return self.evolve(shadow_db_per_link=shadows)

    @classmethod
    def from_file(cls, path: Path) -> "ScenarioConfig":
        try:
            return cls.model_validate_json(Path(path).read_text())
        except ValidationError as e:
            raise ConfigError(f"Invalid scenario file {path}: {e}") from e
        except OSError as e:
            raise ConfigError(f"Cannot read scenario file {path}: {e}") from e

    @classmethod
    def build(cls, **fields: Any) -> "ScenarioConfig":
        """Validating constructor that reports problems as ``ConfigError``."""
        try:
            return cls.model_validate(fields)
        except ValidationError as e:
            raise ConfigError(str(e)) from e
