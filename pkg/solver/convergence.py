from collections.abc import Sequence
from itertools import pairwise


def relative_increase(previous: float, current: float) -> float:
    if previous == current:
        return 0.0
    return (current - previous) / max(abs(previous), 1e-300)


def converged(trace: Sequence[float], threshold: float) -> bool:
    """True once the last step of ``trace`` increased it by less than ``threshold`` relative."""
    if len(trace) < 2:
        return False
    return relative_increase(trace[-2], trace[-1]) < threshold


def non_decreasing(trace: Sequence[float], tolerance: float) -> bool:
    return all(relative_increase(a, b) >= -tolerance for a, b in pairwise(trace))
