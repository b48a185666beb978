"""k-statistics, theoretical variances, cumulant bounds and higher-order kernels."""

from fractions import Fraction
from math import pi, sqrt

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from fieldclt.cumulants import (
    CumulantEstimator,
    cumulant_bound,
    cumulant_exponent,
    h2_chaos_variance,
    h2_finite_variance,
    k_statistic,
    kernel_property_highorder,
    lag_domain_variance,
    theoretical_h2_variance,
    theoretical_variance,
)
from fieldclt.domains import ConvexBody
from fieldclt.exceptions import AssumptionViolation
from fieldclt.simulate import SimConfig, replicate_functionals
from fieldclt.spectra import SpectralDensity, covariance_radial

LINE = ConvexBody.cube(1)
OU = SpectralDensity.cauchy(1.0, c=1 / pi)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3), min_size=8, max_size=60), st.sampled_from([2, 3, 4]))
def test_kstat_matches_scipy(data, k):
    x = np.array(data)
    ours = k_statistic(x, k).estimate
    assert ours == pytest.approx(stats.kstat(x, k), rel=1e-7, abs=1e-7 * max(1.0, np.ptp(x)) ** k)


def test_jackknife_matches_brute_force():
    x = np.random.default_rng(0).exponential(size=40)
    for k in (2, 3, 4):
        loo = np.array([stats.kstat(np.delete(x, i), k) for i in range(x.size)])
        se = sqrt((x.size - 1) / x.size * np.sum((loo - loo.mean()) ** 2))
        assert k_statistic(x, k).standard_error == pytest.approx(se, rel=1e-8)


def test_exponential_cumulants():
    # kappa_n of Exp(1) is (n - 1)!
    x = np.random.default_rng(1).exponential(size=400_000)
    for k, kappa in ((2, 1.0), (3, 2.0), (4, 6.0)):
        r = k_statistic(x, k)
        assert abs(r.estimate - kappa) < 4 * r.standard_error


def test_kstat_is_unbiased_for_normal_samples():
    rng = np.random.default_rng(2)
    est = np.array([[k_statistic(rng.normal(size=12), k).estimate for k in (2, 3, 4)] for _ in range(4000)])
    mean, se = est.mean(axis=0), est.std(axis=0, ddof=1) / np.sqrt(len(est))
    assert np.all(np.abs(mean - [1.0, 0.0, 0.0]) < 4 * se)


def test_kstat_docstring_example_and_validation():
    assert k_statistic([1.0, 2.0, 3.0, 4.0], 2).estimate == pytest.approx(5 / 3)
    with pytest.raises(ValueError):
        k_statistic([1.0, 2.0, 3.0], 5)
    with pytest.raises(ValueError):
        k_statistic([1.0, np.nan, 2.0, 3.0], 2)


def test_cumulant_estimator():
    x = np.random.default_rng(4).normal(size=500)
    est = CumulantEstimator().fit(x)
    assert set(est.cumulants_) == {2, 3, 4}
    assert est.report(2).estimate == est.cumulants_[2]
    assert est.n_samples_ == 500


def test_interval_variance_closed_form():
    for T in (1.0, 8.0, 64.0):
        res = theoretical_variance(OU, LINE, T)
        assert res.finite_T == pytest.approx(2 - 2 * (1 - np.exp(-T)) / T, rel=1e-8)
        assert res.limit == pytest.approx(2.0)


def test_lag_domain_matches_spectral_route():
    f = SpectralDensity.compact(2.0)
    spectral = theoretical_variance(f, LINE, 6.0).finite_T
    lag = lag_domain_variance(lambda r: covariance_radial(f, r), LINE, 6.0)
    assert spectral == pytest.approx(lag, rel=1e-8)


def test_disk_variance_against_lens_oracle():
    f = SpectralDensity.gaussian(0.8, d=2)
    body = ConvexBody.ball(2)
    T = 6.0
    R = T / 2

    def lens(r):
        return 2 * R * R * np.arccos(r / (2 * R)) - 0.5 * r * np.sqrt(4 * R * R - r * r)

    ref, _ = integrate.quad(lambda r: 2 * pi * r * covariance_radial(f, r) * lens(r), 0, 2 * R, epsabs=1e-12)
    assert theoretical_variance(f, body, T).finite_T == pytest.approx(ref / T ** 2, rel=1e-7)


def test_square_variance_factorizes_for_gaussian_density():
    s = 0.9
    f = SpectralDensity.gaussian(s, d=2)
    T = 5.0
    axis, _ = integrate.quad(lambda t: sqrt(2 * pi) * s * np.exp(-0.5 * s * s * t * t) * 2 * (T - t), 0, T)
    assert theoretical_variance(f, ConvexBody.cube(2), T).finite_T == pytest.approx((axis / T) ** 2, rel=1e-8)


def test_degenerate_variance_rejected():
    with pytest.raises(AssumptionViolation) as err:
        theoretical_variance(SpectralDensity.band_pass(0.5, 1.0), LINE, 4.0)
    assert err.value.assumption == "B"


def test_h2_variances_gaussian_density():
    f = SpectralDensity.gaussian(1.0)
    assert theoretical_h2_variance(f, LINE) == pytest.approx(2 * pi * sqrt(pi))
    # sigma0^2 = sqrt(2 pi), so the chaos variance is 2 sqrt(pi)
    assert h2_chaos_variance(f, LINE) == pytest.approx(2 * sqrt(pi))
    # finite T: the output density is again Gaussian, scaled by 2 / sigma0^4
    g2 = SpectralDensity.gaussian(sqrt(2.0), c=sqrt(pi))
    for T in (4.0, 32.0):
        ref = 2 / (2 * pi) * theoretical_variance(g2, LINE, T).finite_T
        assert h2_finite_variance(f, LINE, T) == pytest.approx(ref, rel=1e-8)


def test_h2_third_cumulant_matches_asymptotics():
    # kappa_3 of S_T(H_2) / sqrt(T) ~ 8 T^(-1/2) int int rho(a) rho(b) rho(a+b),
    # rho(t) = exp(-t^2/2) here, and the double integral is 2 pi / sqrt(3)
    f = SpectralDensity.gaussian(1.0)
    T = 32.0
    cfg = SimConfig(f, LINE, T, seed=99, replications=8000)
    s = replicate_functionals(cfg, hermite_m=2) / sqrt(T)
    k3 = k_statistic(s, 3)
    assert abs(k3.estimate - 8 * 2 * pi / sqrt(3) / sqrt(T)) < 4 * k3.standard_error + 0.2


def test_cumulant_exponent_values():
    assert cumulant_exponent(3, 1, Fraction(3, 2)) == Fraction(-1, 2)
    assert cumulant_exponent(4, 2, 2) == 0
    assert cumulant_exponent(4, 1, Fraction(4, 3)) == -1


def test_cumulant_bound_scaling_and_admissibility():
    b8 = cumulant_bound(3, 1, Fraction(3, 2), LINE, 1.0, 8.0)
    b32 = cumulant_bound(3, 1, Fraction(3, 2), LINE, 1.0, 32.0)
    assert b32 / b8 == pytest.approx(0.5)
    with pytest.raises(ValueError):
        cumulant_bound(4, 1, Fraction(5, 4), LINE, 1.0, 8.0)
    with pytest.raises(AssumptionViolation):
        cumulant_bound(3, 2, Fraction(4, 3), ConvexBody.ball(2), 1.0, 8.0)


def test_second_order_kernel_is_approximate_identity():
    prop = kernel_property_highorder(LINE, 16.0, 2)
    assert prop.mass == pytest.approx(1.0, abs=1e-9)
    small = kernel_property_highorder(LINE, 4.0, 2).concentration
    assert small < prop.concentration < 1


def test_third_order_kernel_mass():
    prop = kernel_property_highorder(LINE, 16.0, 3)
    assert abs(prop.mass - 1.0) < max(10 * prop.truncation_error, 1e-4)
    conc = [kernel_property_highorder(LINE, T, 3).concentration for T in (4.0, 16.0, 64.0)]
    assert conc[0] < conc[1] < conc[2] < 1.0 + 1e-6
