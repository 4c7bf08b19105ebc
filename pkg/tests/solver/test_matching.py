import functools
import itertools
import time

import numpy as np
import pytest

from core.errors import DomainError
from core.models.solution import Matching, SnrTable
from core.types import FREE
from solver.channel import draw_channels
from solver.convergence import non_decreasing
from solver.matching import (
    assignment_bound,
    assignment_oracle,
    bnb_match,
    dc_penalty,
    dcp_match,
    dcp_relaxation,
    matching_value,
    relaxed_bound,
    round_matching,
)
from solver.snr_model import matching_rate, pair_rates, snr_table


def _free(n: int) -> np.ndarray:
    return np.full((n, n), FREE, dtype=np.int8)


def _enumeration_nodes(n: int) -> int:
    """Nodes the branching tree creates when nothing is pruned by a bound."""
    order = [(p, q) for p in range(n) for q in range(n)][::-1]

    @functools.cache
    def size(depth: int, rows: int, cols: int) -> int:
        if depth == len(order):
            return 1
        p, q = order[depth]
        if rows >> p & 1 or cols >> q & 1:
            one = 1
        else:
            one = size(depth + 1, rows | 1 << p, cols | 1 << q)
        return 1 + one + size(depth + 1, rows, cols)

    return size(0, 0, 0)


class TestAssignmentOracle:
    def test_diagonal(self):
        matching, value = assignment_oracle(np.array([[2.0, 0.0], [0.0, 2.0]]))
        assert matching.pairs == ((0, 0), (1, 1))
        assert value == 4.0

    def test_anti_diagonal(self):
        matching, value = assignment_oracle(np.array([[1.0, 2.0], [2.0, 1.0]]))
        assert matching.pairs == ((0, 1), (1, 0))
        assert value == 4.0

    def test_zero_weights(self):
        matching, value = assignment_oracle(np.zeros((3, 3)))
        assert value == 0.0
        assert len(matching) == 0

    def test_nan(self):
        with pytest.raises(DomainError):
            assignment_oracle(np.array([[1.0, np.nan], [0.0, 1.0]]))


class TestRelaxedBound:
    def test_single_subcarrier_saturates(self, unit_config):
        snr = SnrTable(relay=np.array([5.0]), dest=np.array([[3.0]]))
        relaxed = relaxed_bound(_free(1), snr, unit_config)
        assert relaxed.x[0, 0] == pytest.approx(1.0)
        assert relaxed.bound == pytest.approx(2.0)
        assert relaxed.is_integral()

    def test_fixed_pair_forces_the_rest(self, unit_config):
        snr = SnrTable(relay=np.array([4.0, 9.0]), dest=np.array([[3.0, 5.0], [6.0, 7.0]]))
        fixed = _free(2)
        fixed[0, 0] = 1
        relaxed = relaxed_bound(fixed, snr, unit_config)
        assert relaxed.bound == pytest.approx(2.0 + 3.0)
        np.testing.assert_allclose(relaxed.x, np.eye(2), atol=1e-9)

    def test_conflicting_fixings_are_infeasible(self, unit_config):
        snr = SnrTable(relay=np.ones(2), dest=np.ones((2, 2)))
        fixed = _free(2)
        fixed[0, 0] = fixed[0, 1] = 1
        relaxed = relaxed_bound(fixed, snr, unit_config)
        assert relaxed.bound == -np.inf
        assert not relaxed.feasible

    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    def test_dominates_binary_optimum(self, n, random_snr, unit_config):
        rng = np.random.default_rng(n)
        for _ in range(25):
            snr = random_snr(n, rng)
            _, optimum = assignment_oracle(pair_rates(snr, unit_config))
            relaxed = relaxed_bound(_free(n), snr, unit_config)
            assert relaxed.bound >= optimum * (1 - 1e-9)
            assert relaxed.bound >= relaxed.objective

    def test_early_stop_still_bounds(self, random_snr, unit_config):
        rng = np.random.default_rng(7)
        snr = random_snr(4, rng)
        _, optimum = assignment_oracle(pair_rates(snr, unit_config))
        relaxed = relaxed_bound(_free(4), snr, unit_config, incumbent=optimum)
        assert relaxed.bound >= optimum * (1 - 1e-9)


class TestAssignmentBound:
    def test_row_and_column_maxima(self):
        weights = np.array([[3.0, 1.0], [2.0, 0.5]])
        # rows give 3 + 2, columns give 3 + 1
        assert assignment_bound(_free(2), weights) == 4.0

    def test_fixed_one_adds_its_weight(self):
        weights = np.array([[3.0, 1.0], [2.0, 0.5]])
        fixed = _free(2)
        fixed[0, 1] = 1
        assert assignment_bound(fixed, weights) == 1.0 + 2.0

    def test_conflicting_fixings(self):
        fixed = _free(2)
        fixed[0, 0] = fixed[1, 0] = 1
        assert assignment_bound(fixed, np.ones((2, 2))) == -np.inf

    @pytest.mark.parametrize("scale", [10.0, 1e8])
    def test_dominates_binary_optimum(self, scale, random_snr, config):
        rng = np.random.default_rng(17)
        for _ in range(25):
            weights = pair_rates(random_snr(4, rng, scale), config)
            _, optimum = assignment_oracle(weights)
            assert assignment_bound(_free(4), weights) >= optimum * (1 - 1e-12)

            q = int(rng.integers(4))
            fixed = _free(4)
            fixed[3, q] = 1
            rest = np.delete(np.delete(weights, 3, axis=0), q, axis=1)
            completion = weights[3, q] + assignment_oracle(rest)[1]
            assert assignment_bound(fixed, weights) >= completion * (1 - 1e-12)


class TestBnbMatch:
    def test_single_subcarrier(self, unit_config):
        snr = SnrTable(relay=np.array([2.0]), dest=np.array([[1.0]]))
        matching, value, nodes = bnb_match(snr, unit_config)
        assert matching.pairs == ((0, 0),)
        assert value == pytest.approx(1.0)
        assert nodes >= 1

    def test_dead_second_hop(self, unit_config):
        snr = SnrTable(relay=np.ones(3), dest=np.zeros((3, 3)))
        matching, value, _ = bnb_match(snr, unit_config)
        assert len(matching) == 0
        assert value == 0.0

    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    def test_agrees_with_assignment_oracle(self, n, random_snr, config):
        rng = np.random.default_rng(100 + n)
        for _ in range(25):
            snr = random_snr(n, rng)
            _, expected = assignment_oracle(pair_rates(snr, config))
            matching, value, _ = bnb_match(snr, config)
            assert value == pytest.approx(expected, rel=1e-9)
            assert matching_value(matching, pair_rates(snr, config)) == pytest.approx(value)

    def test_agrees_with_exhaustive_permutations(self, random_snr, unit_config):
        rng = np.random.default_rng(3)
        snr = random_snr(3, rng)
        best = max(
            matching_rate(Matching.of(enumerate(perm)), snr, unit_config)
            for perm in itertools.permutations(range(3))
        )
        assert bnb_match(snr, unit_config)[1] == pytest.approx(best, rel=1e-9)

    def test_agrees_with_assignment_oracle_at_high_snr(self, random_snr, config):
        rng = np.random.default_rng(44)
        for _ in range(10):
            snr = random_snr(4, rng, 1e8)
            _, expected = assignment_oracle(pair_rates(snr, config))
            assert bnb_match(snr, config)[1] == pytest.approx(expected, rel=1e-9)

    @pytest.mark.parametrize("n", [3, 4, 5])
    def test_prunes_below_enumeration(self, n, random_snr, config):
        rng = np.random.default_rng(60 + n)
        enumeration = _enumeration_nodes(n)
        counts = []
        for scale in (10.0, 1e8):
            for _ in range(5):
                counts.append(bnb_match(random_snr(n, rng, scale), config)[2])
        assert max(counts) < enumeration
        if n > 3:
            assert np.mean(counts) < enumeration / 2

    @pytest.mark.slow
    def test_hundred_instances_per_size_within_a_minute(self, random_snr, config):
        rng = np.random.default_rng(2024)
        elapsed = 0.0
        for n in (2, 3, 4, 5):
            for _ in range(100):
                snr = random_snr(n, rng, 1e8)
                _, expected = assignment_oracle(pair_rates(snr, config))
                start = time.perf_counter()
                value = bnb_match(snr, config)[1]
                elapsed += time.perf_counter() - start
                assert value == pytest.approx(expected, rel=1e-9)
        assert elapsed < 60.0

    @pytest.mark.slow
    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    def test_agrees_with_assignment_oracle_at_scale(self, n, random_snr, config):
        rng = np.random.default_rng(1000 + n)
        for _ in range(100):
            snr = random_snr(n, rng)
            weights = pair_rates(snr, config)
            _, expected = assignment_oracle(weights)
            assert bnb_match(snr, config)[1] == pytest.approx(expected, rel=1e-9)
            assert relaxed_bound(_free(n), snr, config).bound >= expected * (1 - 1e-9)


class TestDcPenalty:
    @pytest.mark.parametrize("x", [0.0, 1.0])
    def test_vanishes_at_binary_points(self, x):
        assert dc_penalty(np.array([x]), np.array([x]), 3.0) == 0.0

    def test_tight_at_expansion_point(self):
        assert dc_penalty(np.array([0.5]), np.array([0.5]), 2.0) == pytest.approx(0.5)

    def test_majorizes_true_penalty(self):
        assert dc_penalty(np.array([0.3]), np.array([0.7]), 1.0) == pytest.approx(0.37)
        assert 0.37 >= 0.3 * 0.7

    def test_linearization_of_concave_part(self):
        rng = np.random.default_rng(0)
        x, x_prev = rng.random(100_000), rng.random(100_000)
        gap = x_prev**2 - 2 * x_prev * x + x**2
        assert np.all(gap >= -1e-12)
        assert np.all((np.abs(gap) <= 1e-12) == (np.abs(x - x_prev) <= 1e-6))


class TestDcpMatch:
    def test_single_subcarrier(self, unit_config):
        snr = SnrTable(relay=np.array([2.0]), dest=np.array([[1.0]]))
        matching, value, _ = dcp_match(snr, unit_config)
        assert matching.pairs == ((0, 0),)
        assert value == pytest.approx(1.0)

    def test_trace_is_non_decreasing(self, random_snr, config):
        rng = np.random.default_rng(21)
        for _ in range(10):
            _, trace = dcp_relaxation(random_snr(4, rng), config)
            assert len(trace) >= 2
            assert non_decreasing(trace, 1e-9)

    def test_never_beats_bnb(self, random_snr, config):
        rng = np.random.default_rng(5)
        for _ in range(20):
            snr = random_snr(4, rng)
            _, dcp_value, iterations = dcp_match(snr, config)
            _, bnb_value, _ = bnb_match(snr, config)
            assert 0.0 <= dcp_value <= bnb_value * (1 + 1e-9)
            assert iterations >= 1

    @pytest.mark.slow
    def test_finds_clear_optimum(self, random_snr, config):
        rng = np.random.default_rng(77)
        hits = trials = 0
        while trials < 100:
            snr = random_snr(3, rng)
            weights = pair_rates(snr, config)
            values = sorted(
                (matching_value(Matching.of(enumerate(perm)), weights), perm)
                for perm in itertools.permutations(range(3))
            )
            if values[-1][0] < 1.05 * values[-2][0]:
                continue
            trials += 1
            hits += dcp_match(snr, config)[0] == bnb_match(snr, config)[0]
        assert hits >= 95


def test_round_matching_falls_back_to_assignment():
    x = np.array([[0.6, 0.9], [0.1, 0.2]])
    assert round_matching(x, np.ones((2, 2))).pairs == ((0, 1), (1, 0))
    weights = np.array([[1.0, 1.0], [0.0, 1.0]])
    assert round_matching(x, weights).pairs == ((0, 1),)


@pytest.mark.slow
def test_runtime_ordering_on_bench_scenarios(config):
    elapsed = {"bnb": {}, "dcp": {}}
    for n in (3, 4, 5):
        scenario = config.evolve(n_subcarriers=n, n_elements=8)
        rng = np.random.default_rng(n)
        totals = {"bnb": 0.0, "dcp": 0.0}
        for seed in range(20):
            channels = draw_channels(scenario.evolve(rng_seed=seed))
            v1, v2 = (np.exp(2j * np.pi * rng.random(8)) for _ in range(2))
            snr = snr_table(v1, v2, 0, channels, scenario)
            for name, matcher in (("bnb", bnb_match), ("dcp", dcp_match)):
                start = time.perf_counter()
                matcher(snr, scenario)
                totals[name] += time.perf_counter() - start
        for name, total in totals.items():
            elapsed[name][n] = total

    bnb, dcp = elapsed["bnb"], elapsed["dcp"]
    assert bnb[5] > dcp[5]
    assert bnb[5] / bnb[3] > 5 / 3
    assert dcp[5] / dcp[3] < (5 / 3) ** 2
