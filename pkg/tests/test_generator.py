"""Branching-model construction, probabilities, expected sizes, generation."""

import math
from fractions import Fraction

import numpy as np
import pytest

from arbortopo._kernels import substream_seed
from arbortopo.errors import DivergenceError, TruncationError
from arbortopo.generator import (
    BranchModel,
    STATS_COLUMNS,
    branching_probability,
    generate,
    generate_population,
    mean_size,
    simulate_population_stats,
    solve_homogeneous_p,
)
from arbortopo.morphometry import compute_metrics
from arbortopo.topology_core import classify_nodes

from _oracles import exact_mean_size_homogeneous


# ---------------------------------------------------------------- BranchModel

class TestBranchModel:
    def test_homogeneous_supercritical_rejected(self):
        with pytest.raises(DivergenceError, match="supercritical"):
            BranchModel.homogeneous(0.5)

    def test_homogeneous_supercritical_opt_in(self):
        m = BranchModel.homogeneous(0.6, allow_supercritical=True)
        assert m.p == 0.6

    def test_inhomogeneous_supercritical_plateau_rejected(self):
        with pytest.raises(DivergenceError, match="supercritical"):
            BranchModel.inhomogeneous(0.5, 1.0, 0.5)

    def test_inhomogeneous_supercritical_opt_in(self):
        m = BranchModel.inhomogeneous(0.5, 1.0, 0.7, allow_supercritical=True)
        assert m.c == 0.7

    @pytest.mark.parametrize("p", [-0.1, 1.5, None])
    def test_homogeneous_p_out_of_range(self, p):
        with pytest.raises(ValueError, match="0 <= p <= 1"):
            BranchModel.homogeneous(p)

    def test_inhomogeneous_negative_param(self):
        with pytest.raises(ValueError, match=">= 0"):
            BranchModel.inhomogeneous(-0.1, 1.0, 0.3)

    def test_inhomogeneous_missing_param(self):
        with pytest.raises(ValueError, match="needs a, b, c"):
            BranchModel(variant="inhomogeneous", a=0.5, b=1.0)

    def test_unknown_variant(self):
        with pytest.raises(ValueError, match="unknown variant"):
            BranchModel(variant="exponential", p=0.3)

    def test_max_order_must_be_positive(self):
        with pytest.raises(ValueError, match="max_order"):
            BranchModel.homogeneous(0.3, max_order=0)

    def test_kernel_params(self):
        assert BranchModel.homogeneous(0.37).kernel_params() == (0.0, 0.0, 0.37)
        assert BranchModel.inhomogeneous(0.2, 0.9, 0.4).kernel_params() == \
            (0.2, 0.9, 0.4)

    def test_to_dict(self):
        d = BranchModel.homogeneous(0.3, max_order=50).to_dict()
        assert d == {"variant": "homogeneous", "p": 0.3, "max_order": 50}
        d = BranchModel.inhomogeneous(0.2, 0.9, 0.4).to_dict()
        assert d == {"variant": "inhomogeneous", "a": 0.2, "b": 0.9, "c": 0.4,
                     "max_order": 10_000}


# --------------------------------------------------- branching_probability

class TestBranchingProbability:
    def test_first_order_always_one(self):
        assert branching_probability(BranchModel.homogeneous(0.0), 1) == 1.0
        assert branching_probability(
            BranchModel.inhomogeneous(1.0, 0.1, 0.0), 1) == 1.0

    def test_orders_are_one_based(self):
        with pytest.raises(ValueError, match="1-based"):
            branching_probability(BranchModel.homogeneous(0.3), 0)

    def test_homogeneous_constant(self):
        m = BranchModel.homogeneous(0.37)
        assert [branching_probability(m, k) for k in (2, 5, 100)] == [0.37] * 3

    def test_inhomogeneous_value(self):
        m = BranchModel.inhomogeneous(0.5, 1.0, 0.1)
        assert branching_probability(m, 2) == pytest.approx(
            1.0 * math.exp(-1.0) + 0.1, rel=1e-15)

    def test_capped_at_one(self):
        m = BranchModel.inhomogeneous(0.0, 5.0, 0.3, allow_supercritical=True)
        assert branching_probability(m, 2) == 1.0


# ------------------------------------------------------------------ mean_size

class TestMeanSize:
    def test_homogeneous_closed_form(self):
        assert mean_size(BranchModel.homogeneous(0.25)) == 2.0
        assert mean_size(BranchModel.homogeneous(0.0)) == 1.0

    @pytest.mark.parametrize("p", [Fraction(1, 10), Fraction(1, 4),
                                   Fraction(2, 5)])
    def test_homogeneous_matches_exact_series(self, p):
        got = mean_size(BranchModel.homogeneous(float(p)))
        want = float(exact_mean_size_homogeneous(p, max_terms=600))
        assert got == pytest.approx(want, rel=1e-9)

    def test_homogeneous_divergence(self):
        m = BranchModel.homogeneous(0.5, allow_supercritical=True)
        with pytest.raises(DivergenceError, match="diverges"):
            mean_size(m)

    def test_inhomogeneous_flat_matches_homogeneous(self):
        # a = 0, b = 0.3, c = 0 gives constant p_k = 0.3 for k >= 2
        got = mean_size(BranchModel.inhomogeneous(0.0, 0.3, 0.0))
        assert got == pytest.approx(1.0 / (1.0 - 0.6), rel=1e-9)

    def test_inhomogeneous_divergent_plateau(self):
        m = BranchModel.inhomogeneous(0.5, 1.0, 0.5, allow_supercritical=True)
        with pytest.raises(DivergenceError, match="diverges"):
            mean_size(m)

    def test_decay_reduces_mean_below_flat(self):
        flat = mean_size(BranchModel.inhomogeneous(0.0, 0.4, 0.0))
        decayed = mean_size(BranchModel.inhomogeneous(1.0, 0.4, 0.0))
        assert decayed < flat


class TestSolveHomogeneousP:
    def test_round_trip(self):
        for target in (1.5, 2.0, 25.0 / 3.0, 100.0):
            p = solve_homogeneous_p(target)
            assert mean_size(BranchModel.homogeneous(p)) == \
                pytest.approx(target, rel=1e-12)

    def test_known_value(self):
        assert solve_homogeneous_p(25.0 / 3.0) == pytest.approx(0.44, abs=1e-15)

    def test_target_below_one(self):
        with pytest.raises(ValueError, match=">= 1"):
            solve_homogeneous_p(0.5)


# ------------------------------------------------------------------- generate

class TestGenerate:
    def test_deterministic(self):
        m = BranchModel.homogeneous(0.4)
        t1 = generate(m, 12345)
        t2 = generate(m, 12345)
        np.testing.assert_array_equal(t1.parent, t2.parent)

    def test_metadata(self):
        t = generate(BranchModel.homogeneous(0.3), 99)
        assert t.kind == "virtual"
        assert t.seed == 99
        assert t.lengths is None
        t.validate()

    def test_p_zero_always_single_bifurcation(self):
        m = BranchModel.homogeneous(0.0)
        for seed in (0, 1, 77, 2**60):
            np.testing.assert_array_equal(generate(m, seed).parent,
                                          [-1, 0, 1, 1])

    def test_truncation_is_an_error(self):
        # p = 1 branches at every order, so a cap of 4 is always exceeded
        m = BranchModel.homogeneous(1.0, allow_supercritical=True, max_order=4)
        with pytest.raises(TruncationError, match="max_order=4"):
            generate(m, 5)


class TestGeneratePopulation:
    def test_prefix_property(self):
        m = BranchModel.homogeneous(0.42)
        big = generate_population(m, 100, master_seed=314)
        small = generate_population(m, 10, master_seed=314)
        for t_small, t_big in zip(small, big[:10]):
            np.testing.assert_array_equal(t_small.parent, t_big.parent)

    def test_substream_seeds_recorded(self):
        trees = generate_population(BranchModel.homogeneous(0.3), 5,
                                    master_seed=2718)
        for i, t in enumerate(trees):
            assert t.seed == substream_seed(2718, i)

    def test_count_must_be_positive(self):
        with pytest.raises(ValueError, match=">= 1"):
            generate_population(BranchModel.homogeneous(0.3), 0, master_seed=1)

    def test_truncation_reports_index(self):
        m = BranchModel.homogeneous(1.0, allow_supercritical=True, max_order=4)
        with pytest.raises(TruncationError, match="population index 0"):
            generate_population(m, 3, master_seed=5)


# --------------------------------------------------- simulate_population_stats

class TestSimulatePopulationStats:
    def test_matches_per_tree_metrics(self):
        m = BranchModel.homogeneous(0.4)
        stats = simulate_population_stats(m, 200, master_seed=909)
        assert stats.shape == (200, len(STATS_COLUMNS))
        for i in range(200):
            tree = generate(m, substream_seed(909, i))
            met = compute_metrics(tree)
            cls = classify_nodes(tree)
            row = stats[i]
            assert row[0] == met.N
            assert row[1] == met.k_max
            assert row[2] == met.j_max
            assert (row[3], row[4], row[5]) == (cls["B"], cls["M"], cls["S"])
            if met.A is None:
                assert math.isnan(row[6])
            else:
                assert row[6] == met.A
            assert row[7] == met.eligible_A
            if met.E_p is None:
                assert math.isnan(row[8])
            else:
                assert row[8] == met.E_p
            assert row[9] == met.eligible_Ep

    def test_count_must_be_positive(self):
        with pytest.raises(ValueError, match=">= 1"):
            simulate_population_stats(BranchModel.homogeneous(0.3), 0, 1)

    def test_truncation_reports_index(self):
        m = BranchModel.homogeneous(1.0, allow_supercritical=True, max_order=4)
        with pytest.raises(TruncationError, match="population index"):
            simulate_population_stats(m, 3, master_seed=5)
