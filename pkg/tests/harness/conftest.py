import pytest

from core.models.experiment import SweepSpec
from core.models.scenario import ScenarioConfig, SolverOptions
from core.types import SCHEMES


@pytest.fixture
def small_base() -> ScenarioConfig:
    return ScenarioConfig(
        n_subcarriers=2,
        n_elements=1,
        rng_seed=5,
        solver=SolverOptions(max_rounds=4, randomization_draws=50),
    )


@pytest.fixture
def small_spec(small_base: ScenarioConfig) -> SweepSpec:
    return SweepSpec(
        base=small_base, swept_parameter="n_elements", values=(1, 2), trials=2, schemes=SCHEMES
    )
