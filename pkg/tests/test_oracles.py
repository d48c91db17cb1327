"""Tests for ground-truth oracles: closed forms, Monte Carlo, error split."""

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import expit
from scipy.stats import binom, norm

from divbasis.datasets import GaussianSpec, experiment_specs, fukunaga_specs, make_experiment_dataset
from divbasis.functionals import dp_map, hellinger_map
from divbasis.optimize import FitConfig
from divbasis.oracles import (
    GroundTruth,
    analytic_gaussian_divergence,
    asymptotic_fractions,
    error_decomposition,
    mc_integral_functional,
    normal_cdf,
    parse_truth_manifest,
    posterior_draws,
    true_ber,
    truth_manifest_header,
    truth_manifest_row,
)

EXP1_MEAN_SHIFT = np.full(3, np.sqrt(1.0 / 3.0))


class ConstMap:
    def __init__(self, c):
        self.c = c

    def __call__(self, eta):
        return np.full_like(np.asarray(eta, dtype=float), self.c)


class TestAnalyticGaussianDivergence:
    def test_unit_shift_hellinger(self):
        gt = analytic_gaussian_divergence("hellinger_sq", np.zeros(3), np.eye(3), EXP1_MEAN_SHIFT, np.eye(3))
        assert gt.value == pytest.approx(1.0 - np.exp(-1.0 / 8.0), abs=1e-14)
        assert gt.std_error == 0.0

    def test_unit_shift_kl(self):
        gt = analytic_gaussian_divergence("kl", np.zeros(3), np.eye(3), EXP1_MEAN_SHIFT, np.eye(3))
        assert gt.value == pytest.approx(0.5, abs=1e-14)

    def test_identical_pairs_vanish(self):
        S = np.array([[2.0, 0.4], [0.4, 1.0]])
        mu = np.array([1.0, -2.0])
        for target in ("hellinger_sq", "kl"):
            assert analytic_gaussian_divergence(target, mu, S, mu, S).value == pytest.approx(0.0, abs=1e-12)

    def test_hellinger_cross_checked_by_mc(self):
        f0 = GaussianSpec(mean=np.zeros(3), cov=np.eye(3))
        f1 = GaussianSpec(mean=EXP1_MEAN_SHIFT, cov=np.eye(3))
        gt = mc_integral_functional(f0, f1, hellinger_map(), 0.5, 200_000, seed=5)
        exact = analytic_gaussian_divergence("hellinger_sq", f0.mean, f0.cov, f1.mean, f1.cov).value
        assert abs(gt.value - exact) < 4 * gt.std_error + 1e-4

    def test_non_pd_rejected(self):
        with pytest.raises(ValueError):
            analytic_gaussian_divergence("kl", np.zeros(2), np.array([[1.0, 2.0], [2.0, 1.0]]), np.zeros(2), np.eye(2))


class TestMcIntegralFunctional:
    def test_constant_map(self):
        f0, f1 = experiment_specs(1)
        gt = mc_integral_functional(f0, f1, ConstMap(0.7), 0.5, 10_000, seed=1)
        assert gt.value == pytest.approx(0.7, abs=1e-12)
        assert gt.std_error == pytest.approx(0.0, abs=1e-12)

    def test_quadratic_map_against_1d_quadrature(self):
        # equal-covariance pair: the posterior depends on one projection, so
        # the mixture expectation reduces to a 1-d integral
        f0, f1 = experiment_specs(1)
        m2 = 1.0  # squared distance between the means
        g = dp_map(0.5)

        def integrand(t):
            eta = expit(t - m2 / 2.0)
            mix = 0.5 * norm.pdf(t, 0.0, np.sqrt(m2)) + 0.5 * norm.pdf(t, m2, np.sqrt(m2))
            return (2.0 * eta - 1.0) ** 2 * mix

        exact, quad_err = quad(integrand, -12.0, 13.0, epsabs=1e-12)
        gt = mc_integral_functional(f0, f1, g, 0.5, 400_000, seed=2)
        assert abs(gt.value - exact) < 3.0 * gt.std_error + quad_err

    def test_std_error_scaling(self):
        f0, f1 = experiment_specs(1)
        g = hellinger_map()
        se1 = mc_integral_functional(f0, f1, g, 0.5, 50_000, seed=3).std_error
        se2 = mc_integral_functional(f0, f1, g, 0.5, 100_000, seed=3).std_error
        assert se1 / se2 == pytest.approx(np.sqrt(2.0), rel=0.1)

    def test_minimum_draws(self):
        f0, f1 = experiment_specs(1)
        with pytest.raises(ValueError):
            mc_integral_functional(f0, f1, hellinger_map(), 0.5, 100, seed=0)


class TestPosteriorDraws:
    def test_identical_pair_gives_half(self):
        f0, _ = experiment_specs(1)
        etas = posterior_draws(f0, f0, 0.5, 10_000, seed=4)
        np.testing.assert_allclose(etas, 0.5, atol=1e-12)

    def test_disjoint_support_maps_to_endpoints(self):
        from divbasis.datasets import UniformCubeSpec

        f0 = UniformCubeSpec(mu=0.0, beta=1.0, d=2)
        f1 = UniformCubeSpec(mu=10.0, beta=1.0, d=2)
        etas = posterior_draws(f0, f1, 0.5, 10_000, seed=5)
        assert set(np.unique(etas)) == {0.0, 1.0}

    def test_deterministic(self):
        f0, f1 = experiment_specs(4)
        a = posterior_draws(f0, f1, 0.5, 20_000, seed=6)
        b = posterior_draws(f0, f1, 0.5, 20_000, seed=6)
        np.testing.assert_array_equal(a, b)


class TestAsymptoticFractions:
    def test_identical_pair_is_binomial(self):
        f0, _ = experiment_specs(1)
        k = 6
        frac = asymptotic_fractions(f0, f0, 0.5, k, 50_000, seed=7)
        np.testing.assert_allclose(frac, binom.pmf(np.arange(k + 1), k, 0.5), atol=1e-12)

    def test_degree_one_recovers_priors(self):
        f0, f1 = experiment_specs(1)
        frac = asymptotic_fractions(f0, f1, 0.5, 1, 200_000, seed=8)
        np.testing.assert_allclose(frac, [0.5, 0.5], atol=5e-3)

    def test_sums_to_exactly_one(self):
        f0, f1 = experiment_specs(3)
        frac = asymptotic_fractions(f0, f1, 0.5, 9, 50_000, seed=9)
        assert frac.sum() == pytest.approx(1.0, abs=0.0)

    def test_mean_abscissa_matches_class_prior(self):
        f0, f1 = experiment_specs(1)
        k = 10
        frac = asymptotic_fractions(f0, f1, 0.5, k, 200_000, seed=10)
        mean_eta = float(np.arange(k + 1) / k @ frac)
        assert mean_eta == pytest.approx(0.5, abs=0.004)


class TestTrueBer:
    def test_first_benchmark_pair_analytic(self):
        f0, f1 = fukunaga_specs(1)
        gt = true_ber(f0, f1, method="analytic_equal_cov")
        assert gt.value == pytest.approx(float(normal_cdf(-1.28)), abs=1e-12)
        assert gt.value == pytest.approx(0.10027, abs=1e-4)

    def test_identical_pair_is_half(self):
        f0, _ = experiment_specs(1)
        gt = true_ber(f0, f0, method="mc", n_draws=10_000, seed=11)
        assert gt.value == pytest.approx(0.5, abs=1e-12)

    def test_analytic_requires_equal_covariance(self):
        f0, f1 = fukunaga_specs(2)
        with pytest.raises(ValueError):
            true_ber(f0, f1, method="analytic_equal_cov")

    def test_normal_cdf_matches_scipy(self):
        x = np.linspace(-8, 8, 200)
        np.testing.assert_allclose(normal_cdf(x), norm.cdf(x), atol=1e-12)


class TestErrorDecomposition:
    def test_identity_random_configs(self):
        rng = np.random.default_rng(12)
        ds = make_experiment_dataset(1, 150, seed=13)
        for _ in range(25):
            k = int(rng.integers(2, 12))
            lam = float(rng.choice([0.0, 0.01, 0.3]))
            method = str(rng.choice(["bernstein", "convex_uniform", "convex_density"]))
            limits = rng.dirichlet(np.ones(k + 1))
            truth = GroundTruth(value=float(rng.normal()), method="analytic")
            e_a, e_s, e_t = error_decomposition(
                ds, hellinger_map(), FitConfig(k=k, lam=lam), truth, limits, method
            )
            assert abs(e_t - (e_a + e_s)) <= 1e-12

    def test_exact_map_has_no_approximation_error(self):
        # truth and limit fractions share draws, so the exactly representable
        # quadratic map leaves only sampling error
        f0, f1 = experiment_specs(1)
        g = dp_map(0.5)
        draws, seed = 100_000, 21
        truth = mc_integral_functional(f0, f1, g, 0.5, draws, seed)
        limits = asymptotic_fractions(f0, f1, 0.5, 8, draws, seed)
        ds = make_experiment_dataset(1, 300, seed=22)
        e_a, _, _ = error_decomposition(ds, g, FitConfig(k=8, lam=0.0), truth, limits, "convex_uniform")
        assert abs(e_a) <= 1e-9

    def test_shape_validation(self):
        ds = make_experiment_dataset(1, 50, seed=0)
        truth = GroundTruth(value=0.1, method="analytic")
        with pytest.raises(ValueError):
            error_decomposition(ds, hellinger_map(), FitConfig(k=5), truth, np.ones(3))


class TestTruthManifest:
    def test_round_trip(self):
        gt = GroundTruth(value=0.1175, method="mc_integration", mc_samples=10_000, std_error=2e-4)
        text = truth_manifest_header() + "\n" + truth_manifest_row("experiment1", "hellinger", 3, gt) + "\n"
        parsed = parse_truth_manifest(text)
        key = ("experiment1", "hellinger", 10_000, 3)
        assert key in parsed
        assert parsed[key].value == pytest.approx(gt.value)
        assert parsed[key].std_error == pytest.approx(gt.std_error)

    def test_empty_text(self):
        assert parse_truth_manifest("") == {}

    def test_bad_header_rejected(self):
        with pytest.raises(ValueError):
            parse_truth_manifest("a,b,c\n1,2,3\n")
