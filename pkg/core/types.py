from typing import Literal

import numpy as np
from numpy.typing import NDArray

type ComplexArray = NDArray[np.complex128]
type RealArray = NDArray[np.float64]
type FixingArray = NDArray[np.int8]
type Pair = tuple[int, int]
type Slot = Literal[1, 2]
type CaseIndicator = Literal[0, 1]
type LinkId = Literal["SR", "RD", "SI", "IR", "ID", "RI"]
type MatcherKind = Literal["exact", "dcp"]
type RisAnchor = Literal["relay", "midpoint"]
type Scheme = Literal["BnB-I", "BnB-II", "DCP-I", "DCP-II", "Random-I", "Random-II", "RelayOnly"]
type SweptParameter = Literal[
    "transmit_power",
    "n_elements",
    "n_subcarriers",
    "ris_height",
    "fading_exponent",
    "quantization_bits",
]

LINK_IDS: tuple[LinkId, ...] = ("SR", "RD", "SI", "IR", "ID", "RI")
SCHEMES: tuple[Scheme, ...] = (
    "BnB-I",
    "BnB-II",
    "DCP-I",
    "DCP-II",
    "Random-I",
    "Random-II",
    "RelayOnly",
)

# x_{p,q} fixing states inside the branch-and-bound tree
FREE = -1

__all__ = [
    "FREE",
    "LINK_IDS",
    "SCHEMES",
    "CaseIndicator",
    "ComplexArray",
    "FixingArray",
    "LinkId",
    "MatcherKind",
    "Pair",
    "RealArray",
    "RisAnchor",
    "Scheme",
    "Slot",
    "SweptParameter",
]
