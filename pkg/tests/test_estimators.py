"""Estimators, sample-size planners, deviations, and the grid-hitting check."""

import itertools
import math

import numpy as np
import pytest

from gridest.distributions import (
    Modulus,
    ProductDistribution,
    event_probability,
    sample,
)
from gridest.domain import ProductDomain, build_grid
from gridest.estimators import (
    DeviationReport,
    EmpiricalMeanEstimator,
    EmpiricalProductEstimator,
    ExactEstimator,
    SamplingPlan,
    build_product_grid_estimator,
    check_grid_hitting,
    empirical_mean,
    empirical_product_distribution,
    empirical_product_estimate,
    phase1_size,
    phase2_size,
    product_case_size,
    query_estimate,
    sup_deviation,
)
from gridest.families import (
    ExplicitFamily,
    PermutationGraphs,
    perm_graph_bits,
)


def uniform_product(n):
    d = ProductDomain.of_sizes(n, n)
    u = np.full(n, 1.0 / n)
    return ProductDistribution(d, [u, u])


def diagonal_sample(m, n):
    """m points with pairwise distinct rows and columns."""
    return np.stack([np.arange(m), np.arange(m)], axis=1).astype(np.int64)


def identity_plan(eps=0.2, delta=0.1, g=1, d=2, c0=1.0, split=None):
    return SamplingPlan(
        epsilon=eps, delta=delta, lvc=g, width=d,
        modulus=Modulus.identity(), c0=c0, split=split,
    )


class TestPlanners:
    def test_phase1_reference_value(self):
        # identity modulus, C0=1, d=2, g=1, eps=0.2, delta=0.1
        plan = identity_plan()
        assert phase1_size(plan) == 1322

    def test_phase1_quadratic_in_width(self):
        # delta = 1/e makes g + ln(1/delta) = 2, so the value is exactly 200 d^2
        base = SamplingPlan(0.2, 1 / math.e, 1, 2, Modulus.identity())
        double = SamplingPlan(0.2, 1 / math.e, 1, 4, Modulus.identity())
        assert phase1_size(double) == 4 * phase1_size(base)

    def test_phase1_mixture_modulus_factor(self):
        # beta(0.1) drops from 0.1 to 0.01/1.1, a factor 11, squaring to 121
        identity = identity_plan()
        mixture = SamplingPlan(0.2, 0.1, 1, 2, Modulus.for_mixture(2, 2))
        ratio = phase1_size(mixture) / phase1_size(identity)
        assert ratio == pytest.approx(121, rel=1e-3)

    def test_phase1_rejects_vanished_modulus(self):
        # beta^2 underflows to zero in floating point
        table = Modulus.from_table([0.1], [1e-300])
        plan = SamplingPlan(0.4, 0.1, 1, 2, table)
        with pytest.raises(ValueError, match="vanished"):
            phase1_size(plan)

    def test_phase2_reference_values(self):
        assert phase2_size(0.1, 0.05, 1000) == 2258
        assert phase2_size(1 - 1e-12, 0.5, 1) == 5

    def test_phase2_monotone_in_class_count(self):
        values = [phase2_size(0.1, 0.1, c) for c in (1, 10, 100, 10_000)]
        assert values == sorted(values)

    def test_product_case_reference_value(self):
        assert product_case_size(0.1, 1 / math.e, g=1, d=1) == 200

    def test_product_case_scalings(self):
        base = product_case_size(0.1, 1 / math.e, g=1, d=1)
        assert product_case_size(0.1, 1 / math.e, g=1, d=2) == 4 * base
        gaps = [
            product_case_size(0.1, 1 / math.e, g=g + 1, d=1)
            - product_case_size(0.1, 1 / math.e, g=g, d=1)
            for g in (1, 2, 3)
        ]
        assert gaps[0] == gaps[1] == gaps[2]


class TestEmpiricalMean:
    def test_all_inside(self):
        d = ProductDomain.of_sizes(3, 3)
        s = np.array([[0, 0], [1, 1]])
        assert empirical_mean(s, np.ones(9, bool), d) == 1.0

    def test_none_inside(self):
        d = ProductDomain.of_sizes(3, 3)
        s = np.array([[0, 0], [1, 1]])
        assert empirical_mean(s, np.zeros(9, bool), d) == 0.0

    def test_birthday_regime_admits_a_covering_permutation(self):
        # distinct rows and columns: some permutation graph contains the sample
        n, m = 100, 5
        dist = uniform_product(n)
        s = diagonal_sample(m, n)
        bits = perm_graph_bits(np.arange(n), dist.domain)
        assert empirical_mean(s, bits, dist.domain) == 1.0
        est = EmpiricalMeanEstimator(s, dist.domain)
        dev = sup_deviation(est, PermutationGraphs(n), dist, method="assignment")
        assert dev == pytest.approx(1 - 1 / n, abs=1e-12)

    def test_empty_sample_rejected(self):
        d = ProductDomain.of_sizes(2, 2)
        with pytest.raises(ValueError, match="empty sample"):
            empirical_mean(np.empty((0, 2)), np.ones(4, bool), d)


class TestEmpiricalProduct:
    def test_antidiagonal_sample_decouples(self):
        d = ProductDomain.of_sizes(2, 2)
        s = np.array([[0, 0], [1, 1]])
        dist = empirical_product_distribution(s, d)
        assert np.allclose(dist.table().probs, 0.25, atol=1e-15)
        # decoupling: the product estimate halves while the mean saturates
        f_id = perm_graph_bits([0, 1], d)
        assert empirical_product_estimate(s, f_id, d) == pytest.approx(0.5)
        assert empirical_mean(s, f_id, d) == 1.0

    def test_single_point_gives_point_mass(self):
        d = ProductDomain.of_sizes(3, 3)
        dist = empirical_product_distribution(np.array([[2, 1]]), d)
        assert event_probability(dist, perm_graph_bits([1, 2, 0], d)) == 0.0
        bits = np.zeros(9, bool)
        bits[d.flat_index(np.array([[2, 1]]))[0]] = True
        assert event_probability(dist, bits) == 1.0

    def test_structured_path_agrees_with_dense_sum(self):
        rng = np.random.default_rng(0)
        n = 6
        d = ProductDomain.of_sizes(n, n)
        s = rng.integers(0, n, size=(50, 2))
        est = EmpiricalProductEstimator(s, d)
        weights = est.cell_weights()
        for _ in range(20):
            perm = rng.permutation(n)
            fast = float(weights[np.arange(n), perm].sum())
            dense = est.estimate(perm_graph_bits(perm, d))
            assert fast == pytest.approx(dense, abs=1e-12)

    def test_uniform_sample_sanity(self):
        # estimates concentrate near 1/n for a fixed permutation
        n, m, trials = 10, 10_000, 200
        dist = uniform_product(n)
        perm = np.roll(np.arange(n), 3)
        bits = perm_graph_bits(perm, dist.domain)
        master = np.random.SeedSequence(123)
        hits = 0
        for child in master.spawn(trials):
            s = sample(dist, m, child)
            if abs(empirical_product_estimate(s, bits, dist.domain) - 0.1) <= 0.02:
                hits += 1
        assert hits / trials >= 0.95


def small_interval_family():
    # four nested/shifted blocks on a 3x3 domain
    d = ProductDomain.of_sizes(3, 3)
    pts = d.all_points()
    members = [
        (pts[:, 0] <= 1) & (pts[:, 1] <= 1),
        (pts[:, 0] <= 1),
        (pts[:, 1] <= 1),
        np.ones(9, bool),
        np.zeros(9, bool),
    ]
    return ExplicitFamily(d, np.array(members))


class TestProductGridEstimator:
    def test_single_member_family(self):
        d = ProductDomain.of_sizes(2, 2)
        fam = ExplicitFamily(d, [[1, 0, 0, 1]])
        s = np.array([[0, 0], [1, 1], [0, 1], [1, 0], [0, 0], [1, 1]])
        plan = identity_plan(split=(2, 4))
        est = build_product_grid_estimator(s, fam, plan)
        assert est.class_count == 1
        member = fam.members_matrix()[0]
        want = empirical_mean(s[2:6], member, d)
        assert query_estimate(est, member) == pytest.approx(want, abs=1e-15)

    def test_full_grid_separates_all_permutations(self):
        n = 3
        fam = PermutationGraphs(n)
        dist = uniform_product(n)
        s = sample(dist, 60, seed=5)
        est = build_product_grid_estimator(s, fam, identity_plan(split=(30, 30)))
        assert est.grid.is_full
        assert est.class_count == 6

    def test_explicit_build_matches_structured(self):
        n = 3
        fam = PermutationGraphs(n)
        dist = uniform_product(n)
        s = sample(dist, 80, seed=6)
        plan = identity_plan(split=(40, 40))
        structured = build_product_grid_estimator(s, fam, plan)
        explicit = build_product_grid_estimator(s, fam.materialize(), plan)
        assert structured.is_structured and not explicit.is_structured
        for row in fam.members_matrix():
            assert structured.query(row) == explicit.query(row)

    def test_equal_traces_share_one_estimate(self):
        d = ProductDomain.of_sizes(3, 3)
        fam = small_interval_family()
        # grid misses row 2 and column 2, merging several members
        s = np.array([[0, 0], [1, 1], [0, 1], [1, 0], [0, 0], [1, 1], [0, 1]])
        est = build_product_grid_estimator(s, fam, identity_plan(split=(4, 3)))
        members = fam.members_matrix()
        from gridest.families import trace_of

        for a in range(len(members)):
            for b in range(len(members)):
                if trace_of(members[a], est.grid) == trace_of(members[b], est.grid):
                    assert est.query(members[a]) == est.query(members[b])

    def test_unseen_trace_rejected(self):
        d = ProductDomain.of_sizes(2, 2)
        fam = ExplicitFamily(d, [[1, 0, 0, 1]])
        s = np.array([[0, 0], [1, 1], [0, 1], [1, 0]])
        est = build_product_grid_estimator(s, fam, identity_plan(split=(2, 2)))
        stranger = np.array([0, 1, 1, 0], dtype=bool)
        with pytest.raises(ValueError, match="trace not represented"):
            est.query(stranger)

    def test_representative_is_lexicographically_smallest(self):
        d = ProductDomain.of_sizes(2, 2)
        # two members with the same trace on the 1-cell grid {0} x {0}
        a = np.array([0, 1, 1, 0], dtype=bool)
        b = np.array([0, 0, 1, 0], dtype=bool)
        fam = ExplicitFamily(d, [a, b])
        s = np.array([[0, 0], [0, 0], [1, 1]])
        est = build_product_grid_estimator(s, fam, identity_plan(split=(2, 1)))
        assert est.class_count == 1
        rep = est.representative(a)
        assert np.array_equal(rep, b)  # 0010 precedes 0110

    def test_phase_separation(self):
        rng = np.random.default_rng(9)
        fam = small_interval_family()
        dist = uniform_product(3)
        s = sample(dist, 60, seed=11)
        plan = identity_plan(split=(30, 30))
        base = build_product_grid_estimator(s, fam, plan)
        members = fam.members_matrix()

        shuffled_s1 = s.copy()
        shuffled_s1[30:] = shuffled_s1[30:][rng.permutation(30)]
        alt = build_product_grid_estimator(shuffled_s1, fam, plan)
        assert np.array_equal(base.grid.cells(), alt.grid.cells())
        for row in members:
            assert base.query(row) == alt.query(row)

        shuffled_s0 = s.copy()
        shuffled_s0[:30] = shuffled_s0[:30][rng.permutation(30)]
        alt0 = build_product_grid_estimator(shuffled_s0, fam, plan)
        for row in members:
            assert base.query(row) == alt0.query(row)

    def test_insufficient_sample_with_split(self):
        fam = small_interval_family()
        with pytest.raises(ValueError, match="insufficient sample"):
            build_product_grid_estimator(
                np.array([[0, 0], [1, 1]]), fam, identity_plan(split=(2, 1))
            )

    def test_planner_refuses_thin_phase2(self):
        fam = small_interval_family()
        dist = uniform_product(3)
        plan = identity_plan(eps=0.2, delta=0.1)
        m0 = phase1_size(plan)
        s = sample(dist, m0 + 3, seed=2)
        with pytest.raises(ValueError, match="phase 2 needs"):
            build_product_grid_estimator(s, fam, plan)

    def test_default_split_uses_phase1_size(self):
        fam = small_interval_family()
        dist = uniform_product(3)
        plan = identity_plan(eps=0.4, delta=0.2)
        m0 = phase1_size(plan)
        m1 = phase2_size(0.4, 0.2, 5) + 10
        s = sample(dist, m0 + m1, seed=3)
        est = build_product_grid_estimator(s, fam, plan)
        assert est.split == (m0, m1)


class _CellWeightStub:
    """Estimator stub defined entirely by a per-cell weight matrix."""

    name = "stub"

    def __init__(self, weights, domain):
        self.weights = weights
        self.domain = domain

    def estimate(self, event) -> float:
        bits = np.asarray(event, dtype=bool).reshape(self.weights.shape)
        return float(self.weights[bits].sum())

    def cell_weights(self):
        return self.weights


class TestSupDeviation:
    def test_exact_estimator_has_zero_deviation(self):
        dist = uniform_product(4)
        est = ExactEstimator(dist)
        assert sup_deviation(est, PermutationGraphs(4), dist) == pytest.approx(
            0.0, abs=1e-12
        )

    @pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
    def test_assignment_matches_brute_force(self, n):
        rng = np.random.default_rng(n)
        dist = uniform_product(n)
        fam = PermutationGraphs(n)
        for _ in range(100 if n <= 4 else 20):
            weights = rng.random((n, n))
            weights /= weights.sum()
            est = _CellWeightStub(weights, dist.domain)
            fast = sup_deviation(est, fam, dist, method="assignment")
            slow = max(
                abs(sum(weights[i, p[i]] for i in range(n)) - 1 / n)
                for p in itertools.permutations(range(n))
            )
            assert fast == pytest.approx(slow, abs=1e-12)

    def test_assignment_matches_enumeration_path(self):
        rng = np.random.default_rng(31)
        n = 5
        dist = uniform_product(n)
        fam = PermutationGraphs(n)
        s = rng.integers(0, n, size=(40, 2))
        est = EmpiricalMeanEstimator(s, dist.domain)
        assert sup_deviation(est, fam, dist, "assignment") == pytest.approx(
            sup_deviation(est, fam, dist, "enumerate"), abs=1e-12
        )

    def test_assignment_requires_cell_weights(self):
        dist = uniform_product(3)

        class NoWeights:
            def estimate(self, event):
                return 0.0

            def cell_weights(self):
                return None

        with pytest.raises(ValueError, match="method inapplicable"):
            sup_deviation(NoWeights(), PermutationGraphs(3), dist, "assignment")

    def test_assignment_requires_permutation_family(self):
        dist = uniform_product(3)
        est = ExactEstimator(dist)
        with pytest.raises(ValueError, match="method inapplicable"):
            sup_deviation(est, small_interval_family(), dist, "assignment")


class TestGridHitting:
    def test_full_grid_hits_everything(self):
        d = ProductDomain.of_sizes(3, 3)
        fam = small_interval_family()
        dist = uniform_product(3)
        assert check_grid_hitting(fam, d.full_grid(), dist, eps=0.1) == []

    def test_single_member_family(self):
        d = ProductDomain.of_sizes(3, 3)
        fam = ExplicitFamily(d, [np.ones(9, bool)])
        grid = build_grid(np.array([[0, 0]]), d)
        assert check_grid_hitting(fam, grid, uniform_product(3), eps=0.1) == []

    def test_detects_a_missed_large_difference(self):
        d = ProductDomain.of_sizes(3, 3)
        pts = d.all_points()
        a = pts[:, 0] == 2  # the row missed by the grid below
        b = np.zeros(9, bool)
        fam = ExplicitFamily(d, [a, b])
        grid = build_grid(np.array([[0, 0], [1, 1]]), d)
        pairs = check_grid_hitting(fam, grid, uniform_product(3), eps=0.2)
        assert len(pairs) == 1

    def test_hitting_implies_rounding(self):
        # when no eps/2-large difference is missed, every member sits within
        # eps/2 of its representative in probability
        dist = uniform_product(3)
        fam = small_interval_family()
        eps = 0.4
        for seed in range(5):
            s = sample(dist, 40, seed=seed)
            est = build_product_grid_estimator(
                s, fam, identity_plan(split=(20, 20))
            )
            if check_grid_hitting(fam, est.grid, dist, eps / 2):
                continue
            for row in fam.members_matrix():
                rep = est.representative(row)
                gap = abs(
                    event_probability(dist, row) - event_probability(dist, rep)
                )
                assert gap <= eps / 2 + 1e-12


class TestDeviationReport:
    def test_summary_fields(self):
        devs = np.linspace(0, 1, 101)
        report = DeviationReport.from_deviations(
            "empirical-mean", "fam", "dist", seed=4, deviations=devs
        )
        assert report.trials == 101
        assert report.mean == pytest.approx(0.5)
        assert report.q50 == pytest.approx(0.5)
        assert report.q90 == pytest.approx(0.9)

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            DeviationReport.from_deviations("e", "f", "d", 0, np.array([1.5]))

    def test_dict_field_order(self):
        report = DeviationReport.from_deviations(
            "e", "f", "d", 0, np.array([0.25])
        )
        assert list(report.to_dict()) == [
            "estimator", "family", "distribution", "trials", "seed",
            "deviations", "mean", "q50", "q90", "q99", "wall_ms",
        ]
