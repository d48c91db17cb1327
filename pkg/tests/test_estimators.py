"""Tests for the end-to-end estimators and baselines."""

import numpy as np
import pytest

from divbasis.datasets import LabeledDataset, gen_gaussian, make_experiment_dataset
from divbasis.estimators import (
    bhattacharyya_bounds,
    dp_bounds,
    estimate_ber_upper_bound,
    estimate_functional,
    euclidean_mst,
    mst_dp_estimate,
    parametric_plugin,
    report_csv_header,
    report_csv_row,
    theoretical_bound_curves,
)
from divbasis.functionals import default_eta_grid, dp_map, hellinger_map, kl_map
from divbasis.optimize import FitConfig
from divbasis.oracles import analytic_gaussian_divergence, mc_integral_functional


def same_distribution_dataset(n_per_class, seed):
    """Both classes drawn from the same standard normal."""
    x0 = gen_gaussian(n_per_class, 0.0, 0.0, 3, seed)
    x1 = gen_gaussian(n_per_class, 0.0, 0.0, 3, seed + 1)
    return LabeledDataset(
        points=np.vstack([x0, x1]),
        labels=np.concatenate([np.zeros(n_per_class, int), np.ones(n_per_class, int)]),
    )


class TestEstimateFunctional:
    def test_identical_distributions_give_near_zero_divergence(self):
        ds = same_distribution_dataset(2500, seed=1)
        for method in ("convex_uniform", "convex_density"):
            report = estimate_functional(ds, dp_map(0.5), FitConfig(k=10, lam=0.01), method)
            assert abs(report.value) < 0.05
        # the plug-in weighting carries the finite-k approximation error: with
        # eta constant at 1/2 its limit is the binomial variance term 1/k
        report = estimate_functional(ds, dp_map(0.5), FitConfig(k=10, lam=0.01), "bernstein")
        assert abs(report.value - 1.0 / 10.0) < 0.05
        assert abs(parametric_plugin(ds, "dp").value) < 0.05

    def test_hellinger_close_to_truth_at_large_n(self):
        truth = 1.0 - np.exp(-1.0 / 8.0)
        ds = make_experiment_dataset(1, 5000, seed=2)
        report = estimate_functional(ds, hellinger_map(), FitConfig(k=10, lam=0.01), "convex_uniform")
        assert abs(report.value - truth) < 0.05

    def test_kl_close_to_truth_at_large_n(self):
        ds = make_experiment_dataset(1, 5000, seed=3)
        cfg = FitConfig(k=10, lam=0.01, grid=default_eta_grid("kl_clipped"))
        report = estimate_functional(ds, kl_map("kl01"), cfg, "convex_density")
        assert abs(report.value - 0.5) < 0.1

    def test_report_fields_and_csv(self):
        ds = make_experiment_dataset(1, 100, seed=4)
        report = estimate_functional(ds, hellinger_map(), FitConfig(k=5, lam=0.01), "bernstein", seed=4)
        assert report.method == "bernstein"
        assert report.n == 200 and report.k == 5
        row = report_csv_row(report)
        assert row.startswith("bernstein,")
        assert len(row.split(",")) == len(report_csv_header().split(","))

    def test_k_must_be_below_n(self):
        ds = make_experiment_dataset(1, 4, seed=0)
        with pytest.raises(ValueError):
            estimate_functional(ds, hellinger_map(), FitConfig(k=8), "bernstein")


class TestEstimateBerUpperBound:
    def test_indistinguishable_classes_bound_near_half(self):
        ds = same_distribution_dataset(2500, seed=5)
        cfg = FitConfig(k=10, lam=0.01, constraint="upper_bound")
        report = estimate_ber_upper_bound(ds, cfg)
        assert 0.4 < report.value <= 0.55
        assert report.diagnostics["min_constraint_slack"] >= -1e-9
        assert report.diagnostics["kkt_residual"] <= 1e-7

    def test_requires_upper_bound_config(self):
        ds = same_distribution_dataset(50, seed=6)
        with pytest.raises(ValueError):
            estimate_ber_upper_bound(ds, FitConfig(k=5))


class TestParametricPlugin:
    def test_well_specified_model_recovers_truth(self):
        ds = make_experiment_dataset(1, 50_000, seed=7)
        truth = 1.0 - np.exp(-1.0 / 8.0)
        report = parametric_plugin(ds, "hellinger")
        assert abs(report.value - truth) < 0.01

    def test_kl_directions_swap(self):
        ds = make_experiment_dataset(2, 2000, seed=8)
        kl01 = parametric_plugin(ds, "kl01").value
        flipped = LabeledDataset(points=ds.points, labels=1 - ds.labels)
        kl10 = parametric_plugin(flipped, "kl10").value
        assert kl01 == pytest.approx(kl10, rel=1e-10)

    def test_identical_classes_give_zero_kl(self):
        ds = same_distribution_dataset(5000, seed=9)
        assert abs(parametric_plugin(ds, "kl01").value) < 1e-3

    def test_misspecified_model_is_biased(self):
        # Gaussian fit to uniform-cube data misses the truth by far more
        # than the basis-expansion estimate does
        f0_truth = mc_integral_functional(
            *__import__("divbasis.datasets", fromlist=["experiment_specs"]).experiment_specs(4),
            hellinger_map(),
            0.5,
            1_000_000,
            seed=10,
        ).value
        ds = make_experiment_dataset(4, 50_000, seed=11)
        plugin_err = abs(parametric_plugin(ds, "hellinger").value - f0_truth)
        convex_err = abs(
            estimate_functional(ds, hellinger_map(), FitConfig(k=10, lam=0.01), "convex_uniform").value
            - f0_truth
        )
        assert plugin_err > 3.0 * convex_err

    def test_dp_quadrature_matches_mc_on_fitted_model(self):
        ds = make_experiment_dataset(1, 4000, seed=12)
        report = parametric_plugin(ds, "dp")
        assert report.diagnostics["integration"] == "quadrature"
        # identical classes: the quadratic divergence of the fitted pair is small
        ds_same = same_distribution_dataset(4000, seed=13)
        assert abs(parametric_plugin(ds_same, "dp").value) < 0.01

    def test_needs_enough_samples_per_class(self):
        ds = make_experiment_dataset(1, 3, d=3, seed=14)
        with pytest.raises(ValueError):
            parametric_plugin(ds, "hellinger")


class TestBoundFormulas:
    def test_bhattacharyya_extremes(self):
        b = bhattacharyya_bounds(0.0)
        assert (b.lower, b.upper) == (0.5, 0.5)
        b = bhattacharyya_bounds(1.0)
        assert (b.lower, b.upper) == (0.0, 0.0)

    def test_bhattacharyya_clamps(self):
        assert bhattacharyya_bounds(1.2).clamped
        assert not bhattacharyya_bounds(0.3).clamped

    @pytest.mark.parametrize(
        "u,expected",
        [(0.0, (0.5, 0.5)), (1.0, (0.0, 0.0)), (0.25, (0.25, 0.375))],
    )
    def test_dp_bound_values(self, u, expected):
        b = dp_bounds(u)
        assert (b.lower, b.upper) == pytest.approx(expected)

    def test_dp_bound_clamps_negative_input(self):
        b = dp_bounds(-0.2)
        assert b.clamped and (b.lower, b.upper) == (0.5, 0.5)


class TestEuclideanMst:
    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_total_weight_matches_scipy(self, seed):
        from scipy.sparse.csgraph import minimum_spanning_tree
        from scipy.spatial.distance import squareform, pdist

        points = np.random.default_rng(seed).standard_normal((60, 3))
        edges = euclidean_mst(points)
        mine = sum(np.linalg.norm(points[a] - points[b]) for a, b in edges)
        ref = minimum_spanning_tree(squareform(pdist(points))).sum()
        assert mine == pytest.approx(float(ref), rel=1e-12)

    def test_edge_count(self):
        points = np.random.default_rng(3).standard_normal((25, 2))
        assert euclidean_mst(points).shape == (24, 2)


class TestMstDpEstimate:
    def test_separated_clusters_single_bridge(self):
        rng = np.random.default_rng(4)
        n = 100
        points = np.concatenate([rng.random(n // 2), 100.0 + rng.random(n // 2)])[:, None]
        ds = LabeledDataset(
            points=points,
            labels=np.concatenate([np.zeros(n // 2, int), np.ones(n // 2, int)]),
        )
        expected = 1.0 - n / (2.0 * (n // 2) * (n // 2))
        assert mst_dp_estimate(ds) == pytest.approx(expected)

    def test_mixed_classes_near_zero(self):
        ds = same_distribution_dataset(1000, seed=5)
        assert abs(mst_dp_estimate(ds)) < 0.2

    def test_permutation_invariant(self):
        ds = make_experiment_dataset(1, 100, seed=6)
        perm = np.random.default_rng(7).permutation(ds.n)
        shuffled = LabeledDataset(points=ds.points[perm], labels=ds.labels[perm])
        assert mst_dp_estimate(ds) == pytest.approx(mst_dp_estimate(shuffled), abs=1e-12)

    def test_single_class_rejected(self):
        ds = LabeledDataset(points=np.random.default_rng(8).standard_normal((10, 2)), labels=np.zeros(10, int))
        with pytest.raises(ValueError):
            mst_dp_estimate(ds)


class TestTheoreticalBoundCurves:
    def test_midpoint_and_endpoints(self):
        curves = theoretical_bound_curves(10, 0.01)
        mid = 50
        assert curves["dp"][mid] == pytest.approx(0.5)
        assert all(curves[name][mid] >= 0.5 - 1e-9 for name in ("bc", "dp", "convex"))
        assert curves["dp"][0] == 0.0
        assert curves["convex"][0] >= -1e-9

    def test_convex_is_tightest(self):
        curves = theoretical_bound_curves(10, 0.01)
        gap_convex = np.max(curves["convex"] - curves["ber"])
        gap_dp = np.max(curves["dp"] - curves["ber"])
        assert gap_convex < gap_dp
