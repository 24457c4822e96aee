import numpy as np
import pytest
from scipy import integrate, stats

from fidres.exceptions import DomainError
from fidres.stochastics import (
    RiskEstimate,
    RngStream,
    as_generator,
    ks_critical_value,
    ks_pvalue,
    ks_statistic,
    sample_chi_square,
    sample_gamma,
    sample_std_normal,
    sample_trunc_pareto,
    trunc_pareto_cdf,
    trunc_pareto_ppf,
)


class TestRngStream:
    def test_reproducible(self):
        a = RngStream(7, 3).generator.standard_normal(1000)
        b = RngStream(7, 3).generator.standard_normal(1000)
        assert np.array_equal(a, b)

    def test_substreams_reproducible_and_distinct(self):
        root = RngStream(11)
        a = root.substream(2).generator.random(10)
        assert np.array_equal(a, RngStream(11).substream(2).generator.random(10))
        assert not np.array_equal(a, root.substream(3).generator.random(10))

    def test_streams_uncorrelated(self):
        x = RngStream(0, 0).generator.standard_normal(100_000)
        y = RngStream(0, 1).generator.standard_normal(100_000)
        assert abs(np.corrcoef(x, y)[0, 1]) < 0.01

    @pytest.mark.parametrize("seed,stream", [(-1, 0), (2**64, 0), (0, -5)])
    def test_rejects_out_of_range_ids(self, seed, stream):
        with pytest.raises(DomainError):
            RngStream(seed, stream)

    def test_as_generator_variants(self):
        gen = np.random.default_rng(1)
        assert as_generator(gen) is gen
        assert np.array_equal(as_generator(5).random(3), RngStream(5).generator.random(3))
        assert isinstance(as_generator(None), np.random.Generator)
        with pytest.raises(TypeError):
            as_generator("seed")


class TestSamplers:
    def test_gamma_mean(self):
        x = sample_gamma(3.0, 2.0, RngStream(1), 1_000_000)
        se = x.std(ddof=1) / np.sqrt(x.size)
        assert abs(x.mean() - 6.0) <= 3 * se

    def test_gamma_small_shape(self):
        x = sample_gamma(0.3, 1.0, RngStream(2), 100_000)
        assert ks_pvalue(ks_statistic(x, stats.gamma(0.3).cdf), x.size) > 0.01

    def test_chi_square_variance(self):
        x = sample_chi_square(4.0, RngStream(3), 1_000_000)
        dev2 = (x - x.mean()) ** 2
        se = dev2.std(ddof=1) / np.sqrt(x.size)
        assert abs(x.var(ddof=1) - 8.0) <= 3 * se

    def test_normal_ks(self):
        x = sample_std_normal(RngStream(4), 100_000)
        assert ks_statistic(x, stats.norm.cdf) < ks_critical_value(x.size, 0.01)
        assert ks_critical_value(100_000) == pytest.approx(1.63 / np.sqrt(100_000), rel=0.01)

    @pytest.mark.parametrize("args", [(0, 1), (1, 0), (-1, 2)])
    def test_gamma_rejects_non_positive(self, args):
        with pytest.raises(DomainError):
            sample_gamma(*args, RngStream(0), 3)

    def test_chi_square_rejects_non_positive(self):
        with pytest.raises(DomainError):
            sample_chi_square(0.0, RngStream(0))


class TestTruncatedPareto:
    def test_degenerate_support(self):
        assert np.all(sample_trunc_pareto(1.7, 1.7, 3.0, RngStream(0), 50) == 1.7)

    def test_ks_against_closed_form(self):
        lo, hi, n = 1.0, 2.0, 2.0
        x = sample_trunc_pareto(lo, hi, n, RngStream(5), 100_000)

        def closed(t):
            return (lo**-n - t**-n) / (lo**-n - hi**-n)

        assert ks_statistic(x, closed) < 0.01

    def test_mean_against_integral(self):
        lo, hi, n = 1.0, 2.0, 2.0
        z = integrate.quad(lambda t: t ** (-n - 1), lo, hi)[0]
        want = integrate.quad(lambda t: t * t ** (-n - 1), lo, hi)[0] / z
        x = sample_trunc_pareto(lo, hi, n, RngStream(6), 200_000)
        assert abs(x.mean() - want) <= 3 * x.std(ddof=1) / np.sqrt(x.size)

    # Supports of relative width ~1e-4 cannot reach 1e-12: one ulp of theta
    # already moves the CDF by ~1e-11 there.
    @pytest.mark.parametrize("lo,hi,n", [(1.0, 2.0, 2.0), (0.3, 50.0, 0.5), (5.0, 5.5, 40.0)])
    def test_ppf_inverts_cdf(self, lo, hi, n):
        u = np.linspace(0.0, 1.0, 101)
        assert np.max(np.abs(trunc_pareto_cdf(trunc_pareto_ppf(u, lo, hi, n), lo, hi, n) - u)) < 1e-12

    def test_rejects_empty_interval(self):
        with pytest.raises(DomainError):
            sample_trunc_pareto(2.0, 1.0, 1.0, RngStream(0))

    def test_ppf_rejects_bad_probability(self):
        with pytest.raises(DomainError):
            trunc_pareto_ppf(1.5, 1.0, 2.0, 1.0)


class TestKS:
    def test_single_draw(self):
        assert ks_statistic([0.3], lambda x: np.full_like(x, 0.5)) == 0.5

    def test_quantile_construction(self):
        n = 40
        draws = (np.arange(1, n + 1) - 0.5) / n
        assert ks_statistic(draws, lambda x: x) == pytest.approx(0.5 / n, abs=1e-15)

    def test_uniform_draws(self):
        x = RngStream(8).generator.random(100_000)
        assert ks_statistic(x, lambda t: t) < 0.006

    def test_scalar_cdf_is_vectorized(self):
        assert ks_statistic([0.25, 0.75], lambda t: float(t)) == pytest.approx(0.25)

    def test_matches_scipy(self):
        x = RngStream(9).generator.standard_normal(500)
        ref = stats.kstest(x, "norm")
        assert ks_statistic(x, stats.norm.cdf) == pytest.approx(ref.statistic, abs=1e-14)
        assert ks_pvalue(ref.statistic, x.size) == pytest.approx(ref.pvalue, rel=1e-8)

    def test_empty(self):
        with pytest.raises(DomainError):
            ks_statistic([], lambda t: t)


class TestRiskEstimate:
    def test_standard_error_definition(self):
        v = np.array([1.0, 2.0, 4.0, 7.0])
        r = RiskEstimate.from_values(v, n_failed=2)
        assert r.mean == pytest.approx(3.5)
        assert r.std_error == pytest.approx(v.std(ddof=1) / 2)
        assert (r.n, r.n_failed) == (4, 2)

    def test_needs_two_values(self):
        with pytest.raises(DomainError):
            RiskEstimate.from_values([1.0])

    def test_agreement(self):
        a = RiskEstimate(1.0, 0.3, 10)
        b = RiskEstimate(2.0, 0.4, 10)
        assert a.combined_se(b) == pytest.approx(0.5)
        assert a.agrees_with(b, k=3)
        assert not a.agrees_with(b, k=1)
        assert a.to_dict() == {"mean": 1.0, "std_error": 0.3, "n": 10, "n_failed": 0}
