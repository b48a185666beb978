"""Parametric spectral densities and homogeneous weight functions.

Densities are isotropic functions of ``|lam|`` on ``R^d`` and pair with a
covariance through ``c(tau) = int exp(i lam.tau) f(lam) dlam``.  Families:

``cauchy_type``      ``c (1 + |lam|^2)^(-alpha)`` (Matern covariance)
``gaussian_type``    ``c exp(-|lam|^2 / (2 s^2))``
``bounded_compact``  ``c`` on the ball ``|lam| <= cutoff``
``band_pass``        ``c`` on the shell ``inner < |lam| <= cutoff``; vanishes
                     at the origin and so serves as a degenerate-variance case.
"""

from dataclasses import dataclass
from math import gamma, lgamma, pi, sqrt
from typing import NamedTuple

import numpy as np
from scipy.special import kv

from .domains import ConvexBody
from .exceptions import AssumptionViolation
from .quadrature import QuadResult, gauss_kronrod, gauss_legendre_panels
from .special import bessel_j_scaled
from .utils.validation import check_dimension, check_points, check_positive

FAMILIES = ("cauchy_type", "gaussian_type", "bounded_compact", "band_pass")
WEIGHT_FAMILIES = ("power_norm", "power_sum", "power_gamma_sum", "average")
AVERAGES = ("arithmetic", "geometric", "harmonic")


def _unit_sphere_area(d):
    return 2 * pi ** (d / 2) / gamma(d / 2)


def _ball_volume(radius, d):
    return pi ** (d / 2) * radius ** d / gamma(d / 2 + 1)


@dataclass(frozen=True)
class SpectralDensity:
    """An isotropic spectral density on ``R^d``.

    Use the family constructors (:meth:`cauchy`, :meth:`gaussian`,
    :meth:`compact`, :meth:`band_pass`) rather than filling fields by hand.
    Only the parameters relevant to ``family`` are set; the rest stay None.
    """

    family: str
    dimension: int = 1
    c: float = 1.0
    alpha: float = None
    s: float = None
    cutoff: float = None
    inner: float = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"family must be one of {FAMILIES}, got {self.family!r}")
        check_dimension(self.dimension)
        check_positive(self.c, "c")
        required = {
            "cauchy_type": ("alpha",),
            "gaussian_type": ("s",),
            "bounded_compact": ("cutoff",),
            "band_pass": ("inner", "cutoff"),
        }[self.family]
        for name in ("alpha", "s", "cutoff", "inner"):
            value = getattr(self, name)
            if name in required:
                if value is None:
                    raise ValueError(f"{self.family} needs parameter {name!r}")
                object.__setattr__(self, name, check_positive(value, name))
            elif value is not None:
                raise ValueError(f"{self.family} takes no parameter {name!r}")
        if self.family == "band_pass" and not self.inner < self.cutoff:
            raise ValueError("band_pass needs inner < cutoff")

    @classmethod
    def cauchy(cls, alpha, c=1.0, d=1):
        return cls("cauchy_type", d, c, alpha=alpha)

    @classmethod
    def gaussian(cls, s, c=1.0, d=1):
        return cls("gaussian_type", d, c, s=s)

    @classmethod
    def compact(cls, cutoff, c=1.0, d=1):
        return cls("bounded_compact", d, c, cutoff=cutoff)

    @classmethod
    def band_pass(cls, inner, cutoff, c=1.0, d=1):
        return cls("band_pass", d, c, cutoff=cutoff, inner=inner)

    @property
    def params(self):
        """The family parameters as a dict (``c`` included)."""
        names = ("alpha", "s", "cutoff", "inner")
        out = {"c": self.c}
        out.update({n: getattr(self, n) for n in names if getattr(self, n) is not None})
        return out

    def radial(self, r):
        """Density as a function of ``|lam|``."""
        r = np.asarray(r, dtype=float)
        if self.family == "cauchy_type":
            return self.c * (1.0 + r * r) ** (-self.alpha)
        if self.family == "gaussian_type":
            return self.c * np.exp(-r * r / (2 * self.s ** 2))
        inside = r <= self.cutoff
        if self.family == "band_pass":
            inside &= r > self.inner
        return np.where(inside, self.c, 0.0)

    def __call__(self, lam):
        return evaluate_density(self, lam)


def evaluate_density(f, lam):
    """Pointwise value ``f(lam)`` for ``lam`` of shape ``(..., d)``."""
    lam = check_points(lam, f.dimension, name="lambda")
    return f.radial(np.linalg.norm(lam, axis=-1))


def value_at_zero(f):
    """``f(0)``, the quantity Assumption B requires to be nonzero."""
    return float(f.radial(0.0))


class Membership(NamedTuple):
    member: bool
    rule: str


def lp_membership(f, p):
    """Decide ``f in L_p(R^d)`` analytically.

    Returns
    -------
    Membership
        ``member`` and a human-readable ``rule`` recording the criterion used.
    """
    p = float(p)
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    d = f.dimension
    if f.family == "cauchy_type":
        lhs = 2 * f.alpha * p
        return Membership(lhs > d, f"power law: 2*alpha*p = {lhs:g} {'>' if lhs > d else '<='} d = {d}")
    if f.family == "gaussian_type":
        return Membership(True, "gaussian decay: every L_p")
    return Membership(True, "bounded with compact support: every L_p")


def require_lp(f, p, assumption):
    """Raise :class:`AssumptionViolation` unless ``f in L_p``."""
    verdict = lp_membership(f, p)
    if not verdict.member:
        raise AssumptionViolation(assumption, f"spectral density not in L_{p:g} ({verdict.rule})")
    return verdict


def _two_ball_overlap(r1, r2, dist, d):
    """Volume of ``B(0, r1) & B(x, r2)`` with ``|x| = dist`` in dimension ``d``."""
    dist = np.asarray(dist, dtype=float)
    out = np.zeros_like(dist)
    contained = dist <= abs(r1 - r2)
    out[contained] = _ball_volume(min(r1, r2), d)
    lens = (~contained) & (dist < r1 + r2)
    x = dist[lens]
    if d == 1:
        out[lens] = np.minimum(r1, x + r2) - np.maximum(-r1, x - r2)
    elif d == 2:
        a1 = np.arccos(np.clip((x * x + r1 * r1 - r2 * r2) / (2 * x * r1), -1, 1))
        a2 = np.arccos(np.clip((x * x + r2 * r2 - r1 * r1) / (2 * x * r2), -1, 1))
        kite = (-x + r1 + r2) * (x + r1 - r2) * (x - r1 + r2) * (x + r1 + r2)
        out[lens] = r1 * r1 * a1 + r2 * r2 * a2 - 0.5 * np.sqrt(np.maximum(kite, 0.0))
    else:
        s = r1 + r2 - x
        out[lens] = pi * s * s * (x * x + 2 * x * (r1 + r2) - 3 * (r1 - r2) ** 2) / (12 * x)
    return out


def _matern_covariance(f, r):
    # int exp(i lam.tau) (1+|lam|^2)^(-alpha) dlam
    #   = (2 pi)^(d/2) 2^(1-alpha) / Gamma(alpha) |tau|^(alpha-d/2) K_(alpha-d/2)(|tau|)
    d, a = f.dimension, f.alpha
    nu = a - d / 2
    at_zero = pi ** (d / 2) * np.exp(lgamma(nu) - lgamma(a)) if nu > 0 else np.inf
    r = np.asarray(r, dtype=float)
    safe = np.where(r > 0, r, 1.0)
    value = (2 * pi) ** (d / 2) * 2 ** (1 - a) / gamma(a) * safe ** nu * kv(nu, safe)
    return f.c * np.where(r > 0, value, at_zero)


def covariance_radial(f, r):
    """Covariance as a function of ``|tau|``."""
    d = f.dimension
    r = np.asarray(r, dtype=float)
    if f.family == "cauchy_type":
        if not 2 * f.alpha > d:
            raise AssumptionViolation("A", "cauchy_type density is not integrable (2*alpha <= d)")
        return _matern_covariance(f, r)
    if f.family == "gaussian_type":
        return f.c * (2 * pi * f.s ** 2) ** (d / 2) * np.exp(-0.5 * f.s ** 2 * r * r)

    def ball_transform(radius):
        return (2 * pi) ** (d / 2) * radius ** d * bessel_j_scaled(d / 2, radius * r)

    value = ball_transform(f.cutoff)
    if f.family == "band_pass":
        value = value - ball_transform(f.inner)
    return f.c * value


def covariance(f, tau):
    """``c(tau) = int exp(i lam.tau) f(lam) dlam`` for ``tau`` of shape ``(..., d)``.

    Closed forms are used for every family: the Matern form (through
    ``scipy.special.kv``) for ``cauchy_type``, a Gaussian for
    ``gaussian_type`` and the ball Fourier transform for the indicator
    families.
    """
    tau = check_points(tau, f.dimension, name="tau")
    return covariance_radial(f, np.linalg.norm(tau, axis=-1))


def lp_integral(f, p, tol=1e-12):
    """``int f(lam)^p dlam`` by radial quadrature.

    The ``cauchy_type`` range is mapped onto ``[0, pi/2)`` by ``r = tan(theta)``,
    so no truncation is needed; Gaussian integrals are truncated where the
    remaining mass is below ``1e-18`` of the total.
    """
    require_lp(f, p, "A")
    d = f.dimension
    area = _unit_sphere_area(d)
    if f.family == "cauchy_type":
        a = f.alpha

        def integrand(theta):
            # r^(d-1) (1 + r^2)^(-alpha p) dr  with  r = tan(theta)
            return np.sin(theta) ** (d - 1) * np.cos(theta) ** (2 * a * p - d - 1)

        res = gauss_kronrod(integrand, [0.0, pi / 4, pi / 2], tol=tol)
        scale = area * f.c ** p
        return QuadResult(scale * res.value, scale * res.error)
    if f.family == "gaussian_type":
        stop = f.s * sqrt(2 * (45 + d * 4) / p)
        edges = np.linspace(0.0, stop, 9)
        res = gauss_kronrod(lambda r: r ** (d - 1) * f.radial(r) ** p, edges, tol=tol)
        # the neglected mass is below exp(-45) times a modest polynomial factor
        return QuadResult(area * res.value, area * res.error + 1e-18 * area * res.value)
    lower = f.inner if f.family == "band_pass" else 0.0
    res = gauss_kronrod(lambda r: r ** (d - 1) * np.full_like(r, f.c ** p), [lower, f.cutoff], tol=tol)
    return QuadResult(area * res.value, area * res.error)


def l2_norm_squared(f):
    """``int f^2``.  Raises :class:`AssumptionViolation` when ``f`` is not in ``L_2``."""
    return float(lp_integral(f, 2).value)


def _g2_cauchy_line(f, lam, tol):
    # u = tan(theta) keeps the tails exact; integrable endpoint singularity
    # cos(theta)^(4 alpha - 2) because 4 alpha > 1 in L_2.
    out = np.empty(lam.shape)
    for i, x in enumerate(lam.ravel()):
        def integrand(theta, x=x):
            u = np.tan(theta)
            jac = 1.0 / np.cos(theta) ** 2
            return f.radial(u) * f.radial(u + x) * jac

        atan = np.arctan(-x)
        edges = np.unique(np.array([-pi / 2, min(0.0, atan), max(0.0, atan), pi / 2]))
        out.flat[i] = gauss_kronrod(integrand, edges, tol=tol).value
    return out


def _g2_radial_fourier(f, lam, tol):
    # g2 is the transform of c(tau)^2 / (2 pi)^d; for radial c this reduces to
    # (2 pi)^(-d/2) int c(r)^2 r^(d-1) J_{d/2-1}(|lam| r) / (|lam| r)^(d/2-1) dr.
    d = f.dimension
    nu = d / 2 - 1
    stop = 60.0
    edges = np.linspace(0.0, stop, 61)
    out = np.empty(lam.shape)
    for i, x in enumerate(lam.ravel()):
        def integrand(r, x=x):
            return covariance_radial(f, r) ** 2 * r ** (d - 1) * bessel_j_scaled(nu, x * r)

        out.flat[i] = gauss_kronrod(integrand, edges, tol=tol).value
    return out * (2 * pi) ** (-d / 2)


def h2_output_density(f, lam, tol=1e-12):
    """Autoconvolution ``g2(lam) = int f(u) f(lam + u) du``.

    This is the spectral density of the second-order Wick power of a
    Gaussian field with spectral density ``f`` (up to the factor 2 of
    ``Var H_2(Z)``); ``g2(0) = int f^2``.

    Raises
    ------
    AssumptionViolation
        If ``f`` is not square integrable.
    """
    require_lp(f, 2, "A")
    d = f.dimension
    lam = check_points(lam, d, name="lambda")
    r = np.linalg.norm(lam, axis=-1)
    if f.family == "gaussian_type":
        return f.c ** 2 * (pi * f.s ** 2) ** (d / 2) * np.exp(-r * r / (4 * f.s ** 2))
    if f.family == "bounded_compact":
        return f.c ** 2 * _two_ball_overlap(f.cutoff, f.cutoff, r, d)
    if f.family == "band_pass":
        big, small = f.cutoff, f.inner
        overlap = (_two_ball_overlap(big, big, r, d) - 2 * _two_ball_overlap(big, small, r, d)
                   + _two_ball_overlap(small, small, r, d))
        return f.c ** 2 * overlap
    if d == 1:
        return _g2_cauchy_line(f, r, tol)
    if not 2 * f.alpha > d:
        raise AssumptionViolation("A", "g2 for cauchy_type in d >= 2 needs an integrable density")
    return _g2_radial_fourier(f, r, tol)


# -- homogeneous weights ------------------------------------------------------------

@dataclass(frozen=True)
class WeightFunction:
    """A positively homogeneous weight ``w(a t) = a**degree * w(t)``.

    Families
    --------
    power_norm       ``|t|**nu``; ``nu = 0`` is the constant weight.
    power_sum        ``|t_1 + ... + t_d|**nu``
    power_gamma_sum  ``(|t_1|**gamma + ... + |t_d|**gamma)**nu``
    average          arithmetic, geometric or harmonic mean of ``|t_i|``
    """

    family: str
    dimension: int = 1
    nu: float = 1.0
    gamma: float = 1.0
    mean: str = "arithmetic"

    def __post_init__(self):
        if self.family not in WEIGHT_FAMILIES:
            raise ValueError(f"family must be one of {WEIGHT_FAMILIES}, got {self.family!r}")
        check_dimension(self.dimension)
        check_positive(self.nu, "nu", allow_zero=True)
        check_positive(self.gamma, "gamma")
        if self.mean not in AVERAGES:
            raise ValueError(f"mean must be one of {AVERAGES}, got {self.mean!r}")

    @property
    def degree(self):
        """Homogeneity degree ``beta``."""
        if self.family == "average":
            return 1.0
        if self.family == "power_gamma_sum":
            return self.nu * self.gamma
        return float(self.nu)

    def __call__(self, t):
        t = check_points(t, self.dimension, name="t")
        if self.family == "power_norm":
            base = np.linalg.norm(t, axis=-1)
        elif self.family == "power_sum":
            base = np.abs(np.sum(t, axis=-1))
        elif self.family == "power_gamma_sum":
            base = np.sum(np.abs(t) ** self.gamma, axis=-1)
        else:
            m = np.abs(t)
            if self.mean == "arithmetic":
                return np.mean(m, axis=-1)
            if self.mean == "geometric":
                return np.prod(m, axis=-1) ** (1.0 / self.dimension)
            with np.errstate(divide="ignore"):
                inv = np.sum(1.0 / m, axis=-1)
            return np.where(np.isfinite(inv), self.dimension / inv, 0.0)
        if self.nu == 0:
            return np.ones_like(base)
        return base ** self.nu


def _is_unit_anchored_interval(body):
    return body.dimension == 1 and body.is_box and body.anchored and body.half_widths == (0.5,)


def _power_moments_fourier(nu, lam):
    """``int_0^1 t^nu exp(i lam t) dt`` for integer ``nu``.

    Power series near the origin, where the derivative formula
    ``(1/i^nu) d^nu/dlam^nu (e^{i lam} - 1)/(i lam)`` cancels badly, and the
    upward recursion ``I_n = (e^{i lam} - n I_{n-1}) / (i lam)`` elsewhere.
    """
    lam = np.asarray(lam, dtype=float)
    out = np.empty(lam.shape, dtype=complex)
    small = np.abs(lam) < nu + 1.0
    if np.any(small):
        z = 1j * lam[small]
        term = np.ones_like(z)
        total = term / (nu + 1)
        for k in range(1, 80):
            term = term * z / k
            total = total + term / (nu + k + 1)
        out[small] = total
    if np.any(~small):
        x = lam[~small]
        e = np.exp(1j * x)
        value = (e - 1) / (1j * x)
        for n in range(1, nu + 1):
            value = (e - n * value) / (1j * x)
        out[~small] = value
    return out


def _box_nodes(body, T, panels, order=8):
    lower, upper = body.bounds(T)
    axes = [gauss_legendre_panels(lo, hi, panels, order) for lo, hi in zip(lower, upper)]
    grids = np.meshgrid(*[a[0] for a in axes], indexing="ij")
    weights = np.ones_like(grids[0])
    for wk in np.meshgrid(*[a[1] for a in axes], indexing="ij"):
        weights = weights * wk
    points = np.stack(grids, axis=-1).reshape(-1, body.dimension)
    return points, weights.ravel()


def _check_weight_body(w, body):
    if w.dimension != body.dimension:
        raise ValueError("weight and body dimensions differ")
    if not body.is_box:
        raise ValueError("weighted functionals are supported on boxes only")


def weight_fourier(w, body, T, lam, panels=None):
    """``w_T(lam) = int_{TK} w(t) exp(i t.lam) dt = T^(d+beta) w_1(T lam)``.

    ``w_1`` is exact for ``power_norm`` with integer ``nu`` on ``[0, 1]``;
    otherwise it is a tensor Gauss-Legendre sum over ``K`` with enough
    panels to resolve the oscillation.
    """
    _check_weight_body(w, body)
    T = check_positive(T, "T")
    d = body.dimension
    lam = check_points(lam, d, name="lambda")
    scaled = T * lam
    factor = T ** (d + w.degree)
    if w.family == "power_norm" and float(w.nu).is_integer() and _is_unit_anchored_interval(body):
        return factor * _power_moments_fourier(int(w.nu), scaled[..., 0])
    if panels is None:
        extent = 2 * max(body.half_widths)
        panels = int(min(256, max(8, np.ceil(np.max(np.abs(scaled), initial=0.0) * extent / pi) + 8)))
        if d == 3:
            panels = min(panels, 24)
    points, weights = _box_nodes(body, 1.0, panels)
    wt = w(points) * weights
    phase = np.exp(1j * scaled.reshape(-1, d) @ points.T)
    return factor * (phase @ wt).reshape(scaled.shape[:-1])


def weight_l2(w, body, T, panels=None):
    """``W^2(T) = int_{TK} w(t)^2 dt`` computed directly on ``TK``.

    Closed forms: ``|K| T^d`` for a constant weight and
    ``T^(2 nu + 1) / (2 nu + 1)`` for ``|t|^nu`` on ``[0, T]``.  Everything
    else uses a tensor Gauss-Legendre rule on ``TK`` itself (no rescaling),
    so the ``T^(d + 2 beta)`` law is a genuine check.
    """
    _check_weight_body(w, body)
    T = check_positive(T, "T")
    d = body.dimension
    if w.family == "power_norm" and w.nu == 0:
        return float(np.prod([2 * a * T for a in body.half_widths]))
    if w.family == "power_norm" and _is_unit_anchored_interval(body):
        return T ** (2 * w.nu + 1) / (2 * w.nu + 1)
    if panels is None:
        panels = {1: 512, 2: 96, 3: 20}[d]
    points, weights = _box_nodes(body, T, panels)
    return float(np.sum(w(points) ** 2 * weights))


def weighted_variance(f2, w, body, T, tol=1e-10):
    """``Var(S_T^w) / W^2(T)`` for a field with spectral density ``f2`` on ``[0, T]``.

    Equals ``(2 pi)^d int f2 dmu_T``; it is evaluated in the time domain as
    ``2 int_0^T c(tau) rho(tau) dtau / W^2(T)`` with the weight
    autocorrelation ``rho(tau) = int_0^{T-tau} w(t) w(t+tau) dt``.
    """
    if not _is_unit_anchored_interval(body):
        raise ValueError("weighted variance quadrature is implemented for K = [0, 1]")
    T = check_positive(T, "T")
    x, wx = np.polynomial.legendre.leggauss(48)

    def rho(tau):
        length = T - tau
        t = 0.5 * length[:, None] * (x[None, :] + 1)
        vals = w(t) * w(t + tau[:, None])
        return 0.5 * length * (vals @ wx)

    def integrand(tau):
        flat = tau.ravel()
        return (covariance_radial(f2, flat) * rho(flat)).reshape(tau.shape)

    edges = np.linspace(0.0, T, 33)
    res = gauss_kronrod(integrand, edges, tol=tol * weight_l2(w, body, T))
    return float(2 * res.value / weight_l2(w, body, T))


def anchored_unit_box(d):
    """``[0, 1]^d`` as an anchored cube."""
    return ConvexBody.cube(d, anchored=True)


__all__ = [
    "FAMILIES", "SpectralDensity", "evaluate_density", "value_at_zero", "lp_membership", "Membership",
    "require_lp", "covariance", "covariance_radial", "lp_integral", "l2_norm_squared",
    "h2_output_density", "WeightFunction", "weight_fourier", "weight_l2", "weighted_variance",
    "anchored_unit_box",
]
