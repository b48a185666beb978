"""Empirical k-statistics and the theoretical variance integrals.

Empirical side: Fisher's unbiased k-statistics ``k_2, k_3, k_4`` with
delete-1 jackknife standard errors, computed in ``O(N)`` from leave-one-out
power sums.

Theoretical side: the finite-``T`` variance of ``S_T / T^{d/2}``,

    (2 pi)^d |K| int Phi_T(lam) f2(lam) dlam = T^{-d} int |Delta_T|^2 f2,

its limit ``(2 pi)^d |K| f2(0)``, the variance of the second Hermite
functional, the power-counting cumulant bound and the mass of the
higher-order Fejer kernels.
"""

from dataclasses import dataclass
from fractions import Fraction
from math import gamma, pi
from typing import NamedTuple

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .domains import dirichlet_kernel, kernel_norm, p_star, volume
from .exceptions import AssumptionViolation
from .quadrature import gauss_kronrod, gauss_legendre_panels, sin_power_tail, smoothed_panels
from .special import bessel_zeros
from .spectra import covariance_radial, l2_norm_squared, require_lp, value_at_zero
from .utils.validation import check_positive, check_samples

ORDERS = (2, 3, 4)


@dataclass(frozen=True)
class CumulantReport:
    order: int
    estimate: float
    standard_error: float
    N: int
    normalization: str = "T_half_d"


def _power_sums(x):
    return [np.sum(x ** r) for r in range(1, 5)]


def _kstat(k, n, s1, s2, s3, s4):
    # works elementwise on arrays of power sums (used by the jackknife)
    if k == 2:
        return (n * s2 - s1 * s1) / (n * (n - 1))
    if k == 3:
        return (2 * s1 ** 3 - 3 * n * s1 * s2 + n * n * s3) / (n * (n - 1) * (n - 2))
    num = (-6 * s1 ** 4 + 12 * n * s1 ** 2 * s2 - 3 * n * (n - 1) * s2 ** 2
           - 4 * n * (n + 1) * s1 * s3 + n * n * (n + 1) * s4)
    return num / (n * (n - 1) * (n - 2) * (n - 3))


def _check_order(k):
    if k not in ORDERS:
        raise ValueError(f"k-statistics are implemented for k in {ORDERS}, got {k}")


def k_statistic(samples, k, normalization="T_half_d"):
    """Unbiased k-statistic of order ``k`` with a jackknife standard error.

    The data are centred at their mean first; k-statistics of order two and
    higher are shift invariant, and centring keeps the power sums well
    conditioned.  Leave-one-out statistics reuse the full power sums, so
    the jackknife costs ``O(N)``.

    Examples
    --------
    >>> k_statistic([1.0, 2.0, 3.0, 4.0], 2).estimate
    1.6666666666666667
    """
    _check_order(k)
    x = check_samples(samples, min_samples=k + 1 if k < 4 else 8)
    n = x.size
    x = x - np.mean(x)
    sums = _power_sums(x)
    estimate = float(_kstat(k, n, *sums))
    loo = [s - x ** r for r, s in enumerate(sums, start=1)]
    theta = _kstat(k, n - 1, *loo)
    se = float(np.sqrt((n - 1) / n * np.sum((theta - np.mean(theta)) ** 2)))
    return CumulantReport(k, estimate, se, n, normalization)


class CumulantEstimator(BaseEstimator):
    """k-statistics of orders 2-4 as an estimator.

    Attributes
    ----------
    cumulants_ : dict
        Order -> k-statistic.
    standard_errors_ : dict
        Order -> jackknife standard error.
    n_samples_ : int
    """

    def __init__(self, orders=ORDERS, normalization="T_half_d"):
        self.orders = orders
        self.normalization = normalization

    def fit(self, X, y=None):
        reports = [k_statistic(X, k, self.normalization) for k in self.orders]
        self.reports_ = {r.order: r for r in reports}
        self.cumulants_ = {r.order: r.estimate for r in reports}
        self.standard_errors_ = {r.order: r.standard_error for r in reports}
        self.n_samples_ = reports[0].N
        return self

    def report(self, k):
        check_is_fitted(self, "reports_")
        return self.reports_[k]


class VarianceResult(NamedTuple):
    finite_T: float
    limit: float


def _require_assumption_b(f2):
    if value_at_zero(f2) == 0:
        raise AssumptionViolation("B", "f2(0) = 0: the limiting variance degenerates")


def _tail_cutoff(f2, T, tol):
    # beyond L, |Delta_T|^2 <= 4 / lam^2 per axis; choose L with f2(L) 8 / (T L) small
    L = 2 * pi / T * 64
    while float(f2.radial(L)) * 8 / (T * L) > tol and L < 1e7:
        L *= 2
    return L


def _variance_interval(f2, T, a, tol):
    """``T^-1 int |Delta_T|^2 f2`` for an interval of half width ``a`` (d = 1)."""
    half = a * T
    L = _tail_cutoff(f2, T, tol)
    zeros = np.arange(0.0, L + 1e-12, pi / half)
    if f2.family in ("bounded_compact", "band_pass"):
        jumps = [f2.cutoff] + ([f2.inner] if f2.family == "band_pass" else [])
        zeros = np.unique(np.concatenate([zeros[zeros < f2.cutoff], jumps]))

    def integrand(lam):
        kern = np.abs(dirichlet_kernel_interval(half, lam)) ** 2
        return kern * f2.radial(lam)

    res = gauss_kronrod(integrand, zeros, tol=tol)
    return 2 * res.value / T


def dirichlet_kernel_interval(half, lam):
    # 2 sin(half lam) / lam with the removable singularity filled in
    return 2 * half * np.sinc(half * lam / pi)


def _variance_ball(f2, body, T, tol):
    d = body.dimension
    radius = 0.5 * T
    L = _tail_cutoff(f2, T, tol)
    count = int(np.ceil(L * radius / pi)) + 2
    zeros = bessel_zeros(d / 2, count) / radius
    edges = np.concatenate([[0.0], zeros[zeros < L]])
    area = 2 * pi ** (d / 2) / gamma(d / 2)
    lam_axis = np.zeros(d)
    lam_axis[0] = 1.0

    def integrand(r):
        kern = np.abs(dirichlet_kernel(body, T, r[..., None] * lam_axis)) ** 2
        return kern * f2.radial(r) * r ** (d - 1)

    res = gauss_kronrod(*smoothed_panels(integrand, edges), tol=tol)
    return area * res.value / T ** d


def _variance_box_time_domain(cov_radial, body, T, panels=48):
    """``T^-d int c(tau) prod_i (L_i - |tau_i|) dtau`` over the box of lags."""
    d = body.dimension
    sides = [2 * a * T for a in body.half_widths]
    axes = [gauss_legendre_panels(0.0, s, panels, order=8) for s in sides]
    grids = np.meshgrid(*[ax[0] for ax in axes], indexing="ij")
    weight = np.ones_like(grids[0])
    for g in np.meshgrid(*[ax[1] for ax in axes], indexing="ij"):
        weight = weight * g
    for g, s in zip(grids, sides):
        weight = weight * 2 * (s - g)  # both signs of each lag coordinate
    r = np.sqrt(sum(g * g for g in grids))
    return float(np.sum(cov_radial(r) * weight)) / T ** d


def theoretical_variance(f2, body, T, tol=1e-10):
    """Finite-``T`` and limiting variance of ``S_T / T^{d/2}``.

    ``finite_T`` is ``T^{-d} int |Delta_T|^2 f2`` by oscillatory quadrature
    in dimension one and for balls; boxes in higher dimension use the
    equivalent lag-domain form ``T^{-d} int c(tau) |TK & (TK + tau)| dtau``.

    Raises
    ------
    AssumptionViolation
        Assumption B, when ``f2(0) = 0``.
    """
    _require_assumption_b(f2)
    T = check_positive(T, "T")
    d = body.dimension
    limit = (2 * pi) ** d * volume(body) * value_at_zero(f2)
    if d == 1:
        finite = _variance_interval(f2, T, body.half_widths[0], tol)
    elif body.kind == "ball":
        finite = _variance_ball(f2, body, T, tol)
    else:
        finite = _variance_box_time_domain(lambda r: covariance_radial(f2, r), body, T)
    return VarianceResult(float(finite), float(limit))


def lag_domain_variance(cov_radial, body, T, tol=1e-11):
    """``T^-d Var(int_{TK} Y)`` for a stationary ``Y`` with isotropic covariance ``cov_radial``.

    Boxes only.  In dimension one this is
    ``(2 / T) int_0^{2aT} c(tau) (2aT - tau) dtau`` by adaptive quadrature.
    """
    T = check_positive(T, "T")
    if not body.is_box:
        raise ValueError("lag-domain variance is implemented for boxes")
    if body.dimension == 1:
        side = 2 * body.half_widths[0] * T
        edges = np.linspace(0.0, side, 65)
        res = gauss_kronrod(lambda t: cov_radial(t) * (side - t), edges, tol=tol * side)
        return 2 * res.value / T
    return _variance_box_time_domain(cov_radial, body, T)


def theoretical_h2_variance(f, body):
    """``(2 pi)^d |K| int f^2``, the displayed limit for the second Hermite functional.

    This is the expression as stated for ``S_T(H_2(X)) / T^{d/2}`` with a
    unit-variance field.  Because ``Var H_2(Z) = 2``, the variance of that
    functional is in fact twice this value; see :func:`h2_chaos_variance`.
    """
    require_lp(f, 2, "A")
    d = body.dimension
    return (2 * pi) ** d * volume(body) * l2_norm_squared(f)


def h2_chaos_variance(f, body):
    """Limiting variance of ``S_T(H_2(X / sigma0)) / T^{d/2}``.

    ``Cov(H_2(X_s/sigma0), H_2(X_t/sigma0)) = 2 c(s - t)^2 / sigma0^4`` whose
    spectral density is ``2 g2 / sigma0^4``; at the origin this gives
    ``2 (2 pi)^d |K| int f^2 / sigma0^4``.
    """
    require_lp(f, 2, "A")
    sigma0_sq = float(covariance_radial(f, 0.0))
    return 2 * theoretical_h2_variance(f, body) / sigma0_sq ** 2


def h2_finite_variance(f, body, T):
    """Finite-``T`` variance of ``S_T(H_2(X / sigma0)) / T^{d/2}`` (boxes)."""
    sigma0_sq = float(covariance_radial(f, 0.0))
    return lag_domain_variance(lambda r: 2 * covariance_radial(f, r) ** 2 / sigma0_sq ** 2, body, T)


def _admissible(k, p1, body):
    if k < 3:
        raise ValueError(f"cumulant bounds need k >= 3, got {k}")
    p1 = Fraction(p1).limit_denominator(10 ** 9) if not isinstance(p1, Fraction) else p1
    if not p1 > p_star(body):
        raise AssumptionViolation("K", f"p1 = {p1} <= p_* = {p_star(body)}")
    # C1 for the cumulant maps fixes 1/p_{k+1} = 1 - k / ((k - 1) p1), which must lie in [0, 1]
    if p1 < Fraction(k, k - 1):
        raise ValueError(f"(k, p1) = ({k}, {p1}) is inadmissible: needs p1 >= k/(k-1)")
    return p1


def cumulant_exponent(k, d, p1):
    """T-exponent ``k d (1 - 1/p1) - k d / 2`` of the cumulant bound."""
    p1 = Fraction(p1)
    return k * d * (1 - 1 / p1) - Fraction(k * d, 2)


def cumulant_bound(k, d, p1, body, f_norm, T):
    """``C_{p1}(K)^k ||f_k||_{p_{k+1}} T^{k d (1 - 1/p1) - k d / 2}``.

    The multiplicative constant of the underlying inequality is not
    identified and is set to one, so only ratios across ``T`` are meaningful.
    """
    if d != body.dimension:
        raise ValueError("d must equal the body dimension")
    p1 = _admissible(k, p1, body)
    f_norm = check_positive(f_norm, "f_norm", allow_zero=True)
    T = check_positive(T, "T")
    c = kernel_norm(body, float(p1)).value
    return c ** k * f_norm * T ** float(cumulant_exponent(k, d, p1))


class KernelProperty(NamedTuple):
    mass: float
    concentration: float
    truncation_error: float


def _unit_kernel_1d(mu):
    # Delta_1 for [-1/2, 1/2]: 2 sin(mu/2) / mu
    return np.sinc(mu / (2 * pi))


def kernel_property_highorder(body, T, k, epsilon=1.0, half_range=None):
    """Mass and concentration of ``Phi_T^{(k)}`` for intervals, ``k in {2, 3}``.

    ``Phi_T^{(k)}(lam_1..lam_{k-1}) = Delta_T(lam_1) ... Delta_T(lam_{k-1})
    Delta_T(-sum lam) / ((2 pi)^{k-1} |K| T)``, which integrates to one.
    ``mass`` is the integral over a truncated square in the rescaled
    variables ``mu = T lam`` (the mass does not depend on ``T``).  For
    ``k = 3`` the square's deficit decays like ``1/R``, so the mass is the
    Richardson extrapolation from half-widths ``R/2`` and ``R``, and
    ``truncation_error`` is the change in that extrapolation from ``R/4``.
    ``concentration`` is the integral over ``|lam_i| <= epsilon a``.
    """
    if not body.is_box:
        raise ValueError("kernel property asserted for rectangles only")
    if body.dimension != 1:
        raise ValueError("higher-order kernel quadrature is implemented for d = 1")
    if k not in (2, 3):
        raise ValueError(f"k must be 2 or 3, got {k}")
    T = check_positive(T, "T")
    a = body.half_widths[0]
    side = 2 * a
    norm = (2 * pi) ** (k - 1) * side

    def kern(mu):
        return side * _unit_kernel_1d(side * mu)

    # in mu-units Phi^(k) is T-free; the concentration box is |mu| <= epsilon a T
    inner = epsilon * a * T
    if k == 2:
        step = 2 * pi / side
        panels = 4096
        res = gauss_kronrod(lambda m: kern(m) ** 2, np.arange(panels + 1) * step, tol=1e-12)
        # int_B^inf 4 sin^2(side m / 2) / m^2 dm = 2 side int_{pi panels}^inf sin^2 u / u^2 du
        tail = sin_power_tail(2, 2, pi * panels)
        mass = 2 * (res.value + 2 * side * tail.value) / norm
        near = gauss_kronrod(lambda m: kern(m) ** 2, np.linspace(0.0, inner, 65), tol=1e-12)
        error = 2 * (res.error + 2 * side * tail.error) / norm
        return KernelProperty(float(mass), float(2 * near.value / norm), float(error))

    if half_range is None:
        half_range = 160 * pi / side

    def square_mass(R):
        panels = int(np.ceil(2 * R * side / pi))
        x, w = gauss_legendre_panels(-R, R, panels, order=8)
        kx = kern(x)
        total = 0.0
        for start in range(0, x.size, 512):
            xs = x[start:start + 512]
            block = kx[start:start + 512, None] * kx[None, :] * kern(-(xs[:, None] + x[None, :]))
            total += float(w[start:start + 512] @ block @ w)
        return total / norm

    fine = square_mass(half_range)
    mid = square_mass(half_range / 2)
    coarse = square_mass(half_range / 4)
    mass = 2 * fine - mid
    panels = max(8, int(np.ceil(2 * inner * side / pi)) * 2)
    x, w = gauss_legendre_panels(-inner, inner, panels, order=8)
    block = kern(x)[:, None] * kern(x)[None, :] * kern(-(x[:, None] + x[None, :]))
    concentration = float(w @ block @ w) / norm
    return KernelProperty(mass, concentration, abs(mass - (2 * mid - coarse)))
