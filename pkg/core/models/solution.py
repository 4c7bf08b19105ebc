"""Decision variables and results of the joint matching/beamforming problem.

Subcarrier indices are 0-based everywhere in the code base.
"""

from collections.abc import Iterable
from dataclasses import dataclass, field

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator

from core.errors import DomainError
from core.types import ComplexArray, FixingArray, MatcherKind, Pair, RealArray

UNIT_MODULUS_TOLERANCE = 1e-9


class Matching(BaseModel):
    """Exclusive pairing of first-hop subcarriers ``p`` with second-hop subcarriers ``q``."""

    model_config = ConfigDict(frozen=True)

    pairs: tuple[Pair, ...] = ()

    @field_validator("pairs", mode="after")
    @classmethod
    def validate_exclusive(cls, pairs: tuple[Pair, ...]) -> tuple[Pair, ...]:
        firsts = [p for p, _ in pairs]
        seconds = [q for _, q in pairs]
        if len(set(firsts)) != len(firsts):
            raise ValueError(f"first-hop subcarrier matched twice in {pairs}")
        if len(set(seconds)) != len(seconds):
            raise ValueError(f"second-hop subcarrier matched twice in {pairs}")
        if any(p < 0 or q < 0 for p, q in pairs):
            raise ValueError(f"negative subcarrier index in {pairs}")
        return tuple(sorted(pairs))

    @classmethod
    def of(cls, pairs: Iterable[Pair]) -> "Matching":
        return cls(pairs=tuple((int(p), int(q)) for p, q in pairs))

    @classmethod
    def diagonal(cls, n: int) -> "Matching":
        return cls.of((p, p) for p in range(n))

    @classmethod
    def from_array(cls, x: np.ndarray, threshold: float = 0.5) -> "Matching":
        rows, cols = np.nonzero(x > threshold)
        return cls.of(zip(rows.tolist(), cols.tolist(), strict=True))

    def to_array(self, n: int) -> RealArray:
        x = np.zeros((n, n))
        for p, q in self.pairs:
            x[p, q] = 1.0
        return x

    def fits(self, n: int) -> bool:
        return all(p < n and q < n for p, q in self.pairs)

    def relabel(self, perm_p: np.ndarray, perm_q: np.ndarray) -> "Matching":
        """Renames subcarrier ``p`` to ``perm_p[p]`` and ``q`` to ``perm_q[q]``."""
        return Matching.of((int(perm_p[p]), int(perm_q[q])) for p, q in self.pairs)

    def __len__(self) -> int:
        return len(self.pairs)


@dataclass(frozen=True)
class SnrTable:
    """Linear SNRs for a fixed beamforming: ``relay[p]`` and ``dest[p, q]``."""

    relay: RealArray
    dest: RealArray

    @property
    def n_subcarriers(self) -> int:
        return self.relay.shape[0]


@dataclass(frozen=True)
class FractionalMatching:
    """Solution of a box relaxation of the matching problem.

    ``objective`` is the relaxed objective at ``x`` and ``bound`` a certified upper bound
    on every binary completion of the fixings that produced it (``-inf`` if infeasible).
    """

    x: RealArray
    objective: float
    bound: float
    duals: RealArray | None = field(default=None, repr=False)

    @property
    def feasible(self) -> bool:
        return np.isfinite(self.bound)

    def is_integral(self, tolerance: float = 1e-9) -> bool:
        return bool(np.all(np.minimum(np.abs(self.x), np.abs(1 - self.x)) <= tolerance))


@dataclass
class BnbNode:
    fixed: FixingArray
    depth: int
    bound: float
    duals: RealArray | None = None


@dataclass(frozen=True)
class BeamformingSolution:
    """Reflection coefficients of both slots, ``v1`` and ``v2`` (unit modulus)."""

    v1: ComplexArray
    v2: ComplexArray
    phi1: ComplexArray | None = field(default=None, repr=False)
    phi2: ComplexArray | None = field(default=None, repr=False)
    sdp_upper_bound: float | None = None

    def __post_init__(self) -> None:
        for name, v in (("v1", self.v1), ("v2", self.v2)):
            if v.size and np.max(np.abs(np.abs(v) - 1.0)) > UNIT_MODULUS_TOLERANCE:
                raise DomainError(f"{name} is not unit-modulus")

    @property
    def n_elements(self) -> int:
        return self.v1.shape[0]

    @classmethod
    def from_phases(cls, theta1: RealArray, theta2: RealArray) -> "BeamformingSolution":
        return cls(v1=np.exp(1j * np.asarray(theta1)), v2=np.exp(1j * np.asarray(theta2)))

    @classmethod
    def random(cls, n_elements: int, rng: np.random.Generator) -> "BeamformingSolution":
        theta = rng.uniform(0.0, 2 * np.pi, size=(2, n_elements))
        return cls.from_phases(theta[0], theta[1])


@dataclass(frozen=True)
class LiftedMatrices:
    """Hermitian ``(M+1)x(M+1)`` matrices of the lifted beamforming problem, per subcarrier."""

    A: ComplexArray  # (N, M+1, M+1)
    B: ComplexArray  # (N, M+1, M+1)
    C: ComplexArray  # (N, M+1, M+1)
    direct_sr_power: RealArray  # |g^SR_p|^2
    direct_rd_power: RealArray  # |g^RD_q|^2

    @property
    def dimension(self) -> int:
        return self.A.shape[1]


@dataclass(frozen=True)
class SdpSolution:
    phi1: ComplexArray
    phi2: ComplexArray
    upper_bound: float  # bits/s
    kkt_residual: float
    iterations: int = 0


@dataclass
class OptimizationResult:
    matching: Matching
    beamforming: BeamformingSolution
    snr: SnrTable
    sum_rate_bps: float
    objective_trace: list[float]
    rounds: int
    matcher: MatcherKind
    case_indicator: int
    bnb_nodes: int = 0
    dcp_iterations: int = 0
    wall_time_s: float = 0.0
