"""Observation windows, their Dirichlet-type kernels and kernel norms.

A window ``K`` is a cube ``[-1/2, 1/2]^d``, a ball of radius ``1/2`` or an
axis-aligned rectangle, optionally anchored at the origin (``[0, 2a]``
instead of ``[-a, a]``).  The kernel of the dilation ``TK`` is

    Delta_T(lam) = int_{TK} exp(i t.lam) dt,

whose ``L_p`` norm scales as ``T**(d (1 - 1/p)) * C_p(K)``.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from math import gamma, pi, sqrt
from typing import NamedTuple

import numpy as np

from .exceptions import AssumptionViolation, NumericalError
from .quadrature import QuadResult, gauss_kronrod, sin_power_tail, smoothed_panels
from .special import bessel_j_scaled, bessel_zeros
from .utils.validation import check_dimension, check_points, check_positive

KINDS = ("cube", "ball", "rectangle")
# Panel cap; past it the returned error bound exceeds the requested tolerance.
_MAX_PANELS = 1 << 16
# relative accuracy of the in-repo Bessel routine near its crossover
_BESSEL_FLOOR = 1e-9


@dataclass(frozen=True)
class ConvexBody:
    """A centred (or anchored) convex window ``K`` in dimension 1 to 3.

    Parameters
    ----------
    kind : {"cube", "ball", "rectangle"}
    dimension : int
    half_widths : tuple of float, optional
        Rectangle half side lengths.  Cubes and balls fill this in with
        ``1/2`` (the ball radius).
    anchored : bool
        Boxes only.  Place the box at ``[0, 2a]`` along each axis instead of
        centring it; used by the weighted functionals.
    """

    kind: str
    dimension: int
    half_widths: tuple = field(default=())
    anchored: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        d = check_dimension(self.dimension)
        if self.kind in ("cube", "ball"):
            if self.half_widths and tuple(self.half_widths) != (0.5,) * d:
                raise ValueError(f"{self.kind} has fixed half width 1/2")
            object.__setattr__(self, "half_widths", (0.5,) * d)
        else:
            widths = tuple(check_positive(a, "half_width") for a in self.half_widths)
            if len(widths) != d:
                raise ValueError(f"rectangle needs {d} half widths, got {len(widths)}")
            object.__setattr__(self, "half_widths", widths)
        if self.anchored and self.kind == "ball":
            raise ValueError("only boxes can be anchored")

    @classmethod
    def cube(cls, d, anchored=False):
        return cls("cube", d, anchored=anchored)

    @classmethod
    def ball(cls, d):
        return cls("ball", d)

    @classmethod
    def rectangle(cls, half_widths, anchored=False):
        half_widths = tuple(half_widths)
        return cls("rectangle", len(half_widths), half_widths, anchored)

    @property
    def is_box(self):
        return self.kind != "ball"

    @property
    def volume(self):
        return volume(self)

    @property
    def inradius(self):
        return min(self.half_widths)

    @property
    def surface_area(self):
        d = self.dimension
        if self.kind == "ball":
            return 2 * pi ** (d / 2) / gamma(d / 2) * 0.5 ** (d - 1)
        sides = [2 * a for a in self.half_widths]
        if d == 1:
            return 2.0
        return 2 * sum(np.prod(sides[:j] + sides[j + 1:]) for j in range(d))

    @property
    def center(self):
        if self.anchored:
            return np.array(self.half_widths, dtype=float)
        return np.zeros(self.dimension)

    def bounds(self, T=1.0):
        """Lower and upper corners of the bounding box of ``TK``."""
        a = np.array(self.half_widths)
        lower = self.center - a
        return T * lower, T * (lower + 2 * a)

    def contains(self, points, T=1.0, rtol=1e-12):
        """Boolean mask of ``points`` (shape ``(..., d)``) lying in ``TK``."""
        x = check_points(points, self.dimension)
        slack = rtol * T
        if self.kind == "ball":
            return np.linalg.norm(x, axis=-1) <= 0.5 * T + slack
        offset = np.abs(x - T * self.center)
        return np.all(offset <= T * np.array(self.half_widths) + slack, axis=-1)

    def centred(self):
        """The same body translated so that its centre is the origin."""
        if not self.anchored:
            return self
        return ConvexBody(self.kind, self.dimension, self.half_widths, False)


def volume(body):
    """Lebesgue measure of ``K``."""
    d = body.dimension
    if body.kind == "ball":
        return pi ** (d / 2) * 0.5 ** d / gamma(d / 2 + 1)
    return float(np.prod([2 * a for a in body.half_widths]))


def p_star(body):
    """Integrability threshold of ``Delta_1``: ``1`` for boxes, ``2d/(d+1)`` for balls."""
    if body.kind == "ball":
        return Fraction(2 * body.dimension, body.dimension + 1)
    return Fraction(1)


def dirichlet_kernel(body, T, lam):
    """Evaluate ``Delta_T(lam) = int_{TK} exp(i t.lam) dt``.

    ``lam`` has shape ``(..., d)`` (a bare scalar or 1-D array is accepted
    for ``d = 1``).  Returns a complex array of shape ``lam.shape[:-1]``.
    """
    T = check_positive(T, "T")
    lam = check_points(lam, body.dimension, name="lambda")
    if body.kind == "ball":
        d = body.dimension
        radius = 0.5 * T
        r = np.linalg.norm(lam, axis=-1)
        value = (2 * pi) ** (d / 2) * radius ** d * bessel_j_scaled(d / 2, radius * r)
        return value.astype(complex)
    a = T * np.array(body.half_widths)
    # 2 sin(a lam) / lam == 2a sinc(a lam / pi)
    factors = 2 * a * np.sinc(a * lam / pi)
    value = np.prod(factors, axis=-1).astype(complex)
    if body.anchored:
        value = value * np.exp(1j * np.sum(a * lam, axis=-1))
    return value


def fejer_kernel(body, T, lam):
    """The approximate identity ``|Delta_T|^2 / ((2 pi)^d |K| T^d)``."""
    d = body.dimension
    mod2 = np.abs(dirichlet_kernel(body, T, lam)) ** 2
    return mod2 / ((2 * pi) ** d * volume(body) * T ** d)


class KernelNorm(NamedTuple):
    value: float
    error_bound: float


def _check_p(body, p):
    p = float(p)
    threshold = p_star(body)
    if not p > threshold:
        raise AssumptionViolation("K", f"p = {p:g} <= p_* = {threshold} for {body.kind}, d={body.dimension}")
    return p


def _norm_from_integral(integral, error, p):
    value = integral ** (1 / p)
    # d(I^(1/p)) = I^(1/p - 1) dI / p
    return value, value * error / (p * integral)


# -- one-dimensional box factors ------------------------------------------------

def _sinc_power_halfline(p, omega, amplitude, stop, tol, integrand):
    """``int_0^stop |amplitude sin(omega x) / x|^p dx`` (``stop=None`` is infinity).

    ``integrand`` evaluates the function being integrated on an array of
    abscissae; breakpoints are the zeros ``n pi / omega``.
    """
    if stop is not None:
        n_full = int(np.floor(stop * omega / pi))
        edges = np.arange(n_full + 1) * pi / omega
        if stop > edges[-1]:
            edges = np.append(edges, stop)
        if edges.size < 2:
            edges = np.array([0.0, stop])
        return gauss_kronrod(*smoothed_panels(integrand, edges), tol=tol)
    scale = amplitude ** p * omega ** (p - 1)
    n = 64
    while True:
        tail = sin_power_tail(p, p, n * pi)
        if scale * tail.error <= tol / 2 or n >= _MAX_PANELS:
            break
        n *= 2
    edges = np.arange(n + 1) * pi / omega
    body = gauss_kronrod(*smoothed_panels(integrand, edges), tol=tol / 2)
    return QuadResult(body.value + scale * tail.value, body.error + scale * tail.error)


def _box_axis_integral(a, T, p, tol, stop=None):
    """``int_0^stop |2 sin(T a x) / x|^p dx`` through the rectangle kernel."""
    axis_body = ConvexBody.rectangle((a,))

    def integrand(x):
        return np.abs(dirichlet_kernel(axis_body, T, x[..., None])) ** p

    return _sinc_power_halfline(p, T * a, 2.0, stop, tol, integrand)


def _cube_constant_integral(p, tol):
    """``int_0^inf |sin z / z|^p dz``; the normalisation ``C_p = (4 I)^(1/p)``."""

    def integrand(z):
        return np.abs(np.sinc(z / pi)) ** p

    return _sinc_power_halfline(p, 1.0, 1.0, None, tol, integrand)


# -- ball radial integrals --------------------------------------------------------

def _bessel_phase(nu):
    return 0.5 * nu * pi + 0.25 * pi


def _radial_breaks(nu, n, rho_stop):
    # true zeros keep the |J|^p cusps on panel edges; the tail starts at rho_stop
    zeros = bessel_zeros(nu, n + 1)
    zeros = zeros[zeros < rho_stop * (1 - 1e-12)]
    return np.append(zeros, rho_stop)


def _ball_tail(d, p, n):
    """Asymptotic tail of ``int rho^(d-1-dp/2) |J_{d/2}(rho)|^p`` from the n-th panel."""
    nu = d / 2
    phase = _bessel_phase(nu)
    q = p * (d + 1) / 2 - d + 1
    start = (n + 1) * pi  # in u = rho - phase + pi/2
    shift = phase - pi / 2
    amp = (2 / pi) ** (p / 2)
    base = sin_power_tail(p, q, start, shift)
    rho0 = start + shift
    # first Hankel correction: |J - J_asym| <= sqrt(2/(pi rho)) |4nu^2-1| / (8 rho) (1+eps)
    correction = amp * p * abs(4 * nu * nu - 1) / 8 * 1.1 ** p * rho0 ** (-q) / q
    return rho0, QuadResult(amp * base.value, amp * base.error + correction)


def _ball_radial_rho(d, p, tol):
    """``int_0^inf rho^(d-1-dp/2) |J_{d/2}(rho)|^p d rho`` by panels and tail."""
    nu = d / 2
    n = 64
    while True:
        rho_stop, tail = _ball_tail(d, p, n)
        if tail.error <= tol / 2 or n >= _MAX_PANELS:
            break
        n *= 2
    edges = np.concatenate([[0.0], _radial_breaks(nu, n, rho_stop)])

    def integrand(rho):
        return rho ** (d - 1) * np.abs(bessel_j_scaled(nu, rho)) ** p

    body = gauss_kronrod(*smoothed_panels(integrand, edges), tol=tol / 2, rel_floor=_BESSEL_FLOOR)
    return QuadResult(body.value + tail.value, body.error + tail.error)


def _ball_radial_direct(body, T, p, tol, r_lower=0.0):
    """``int_{r_lower}^inf r^(d-1) |Delta_T(r e_1)|^p dr`` evaluated through the kernel."""
    d = body.dimension
    nu = d / 2
    radius = 0.5 * T
    scale = (2 * pi) ** (d * p / 2) * radius ** (d * (p - 1))
    n = 64
    while True:
        rho_stop, tail = _ball_tail(d, p, n)
        if scale * tail.error <= tol / 2 or n >= _MAX_PANELS:
            break
        n *= 2
    zeros = _radial_breaks(nu, n, rho_stop) / radius
    rho_lower = r_lower * radius
    if rho_lower >= zeros[-1]:
        raise NumericalError("radial lower limit beyond truncation radius")
    edges = np.concatenate([[r_lower], zeros[zeros > r_lower]])
    e1 = np.zeros(d)
    e1[0] = 1.0

    def integrand(r):
        lam = r[..., None] * e1
        return r ** (d - 1) * np.abs(dirichlet_kernel(body, T, lam)) ** p

    body_part = gauss_kronrod(*smoothed_panels(integrand, edges), tol=tol / 2, rel_floor=_BESSEL_FLOOR)
    return QuadResult(body_part.value + scale * tail.value, body_part.error + scale * tail.error)


def _unit_sphere_area(d):
    return 2 * pi ** (d / 2) / gamma(d / 2)


# -- public kernel norms ------------------------------------------------------------

def kernel_norm(body, p, tolerance=1e-9):
    """Compute ``C_p(K) = ||Delta_1||_p`` with an error bound.

    Raises
    ------
    AssumptionViolation
        If ``p <= p_star(body)``: the norm diverges (Assumption K).
    """
    p = _check_p(body, p)
    tolerance = check_positive(tolerance, "tolerance")
    d = body.dimension
    if body.is_box:
        integral = _cube_constant_integral(p, tol=tolerance * 1e-2)
        c_p, c_err = _norm_from_integral(4 * integral.value, 4 * integral.error, p)
        value, rel = 1.0, 0.0
        for a in body.half_widths:
            factor = (2 * a) ** (1 - 1 / p) * c_p
            value *= factor
            rel += c_err / c_p
        return KernelNorm(value, value * rel)
    radial = _ball_radial_rho(d, p, tol=tolerance * 1e-2)
    prefactor = (2 * pi) ** (d / 2) * 2 ** (-d * (1 - 1 / p)) * _unit_sphere_area(d) ** (1 / p)
    root, root_err = _norm_from_integral(radial.value, radial.error, p)
    return KernelNorm(prefactor * root, prefactor * root_err)


def scaled_kernel_norm(body, p, T, tolerance=1e-9):
    """``||Delta_T||_p = T^(d(1-1/p)) C_p(K)`` from the scaling law."""
    T = check_positive(T, "T")
    norm = kernel_norm(body, p, tolerance)
    factor = T ** (body.dimension * (1 - 1 / float(p)))
    return factor * norm.value


def direct_kernel_norm(body, p, T, rtol=1e-9):
    """``||Delta_T||_p`` by quadrature of ``|Delta_T|^p`` itself (no rescaling).

    ``rtol`` is relative to the size of the integral; the returned error
    bound is absolute.
    """
    p = _check_p(body, p)
    T = check_positive(T, "T")
    if body.is_box:
        value, rel = 1.0, 0.0
        for a in body.half_widths:
            magnitude = 2 ** p * (T * a) ** (p - 1)
            half = _box_axis_integral(a, T, p, tol=rtol * magnitude)
            axis, axis_err = _norm_from_integral(2 * half.value, 2 * half.error, p)
            value *= axis
            rel += axis_err / axis
        return KernelNorm(value, value * rel)
    d = body.dimension
    magnitude = (2 * pi) ** (d * p / 2) * (0.5 * T) ** (d * (p - 1))
    radial = _ball_radial_direct(body, T, p, tol=rtol * magnitude)
    total = _unit_sphere_area(d) * radial.value
    value, err = _norm_from_integral(total, _unit_sphere_area(d) * radial.error, p)
    return KernelNorm(value, err)


@dataclass(frozen=True)
class KernelNormTable:
    """``C_p(K)`` for a list of exponents, with per-entry error bounds."""

    body: ConvexBody
    entries: tuple  # of (p, C_p, error_bound)

    def plancherel_defect(self):
        """``|C_2^2 - (2 pi)^d |K||`` and its allowed error, if ``p = 2`` is tabulated."""
        for p, value, err in self.entries:
            if p == 2:
                target = (2 * pi) ** self.body.dimension * volume(self.body)
                return abs(value ** 2 - target), 2 * value * err + 1e-12
        return None

    def as_rows(self):
        return [{"p": p, "C_p": value, "error_bound": err} for p, value, err in self.entries]


def kernel_norm_table(body, exponents, tolerance=1e-9):
    rows = []
    for p in exponents:
        norm = kernel_norm(body, p, tolerance)
        rows.append((float(p), norm.value, norm.error_bound))
    return KernelNormTable(body, tuple(rows))


# -- approximate identity -----------------------------------------------------------

class FejerMass(NamedTuple):
    total_mass: float
    tail_mass: float
    error_bound: float
    surface_bound: float


def surface_tail_bound(body, T, epsilon):
    """Ceiling on the Fejer mass outside ``epsilon K``.

    Uses ``int_{|lam|>e} |Delta_1|^2 <= (8/e) |dK| / int_0^pi sin^d`` applied
    to ``TK`` (surface ``T^(d-1) |dK|``) with ``e = epsilon * inradius``,
    since the complement of ``epsilon K`` lies outside that ball.
    """
    d = body.dimension
    sin_power = sqrt(pi) * gamma((d + 1) / 2) / gamma(d / 2 + 1)
    eps = epsilon * body.inradius
    raw = 8 / eps * T ** (d - 1) * body.surface_area / sin_power
    return raw / ((2 * pi) ** d * volume(body) * T ** d)


def fejer_mass(body, T, epsilon, tolerance=1e-9):
    """Total mass of the Fejer kernel and its mass outside ``epsilon K``.

    ``epsilon K`` is taken for the centred copy of ``K``: translating ``K``
    does not change ``|Delta_T|``, and the excluded neighbourhood must
    surround the origin.
    """
    T = check_positive(T, "T")
    epsilon = check_positive(epsilon, "epsilon")
    d = body.dimension
    body = body.centred()
    norm = (2 * pi) ** d * volume(body) * T ** d
    if body.is_box:
        total, inside, err_total, err_inside = 1.0, 1.0, 0.0, 0.0
        for a in body.half_widths:
            axis_norm = 2 * pi * 2 * a * T
            full = _box_axis_integral(a, T, 2.0, tol=tolerance * 1e-2)
            near = _box_axis_integral(a, T, 2.0, tol=tolerance * 1e-2, stop=epsilon * a)
            t_axis = 2 * full.value / axis_norm
            i_axis = 2 * near.value / axis_norm
            err_total += 2 * full.error / axis_norm
            err_inside += 2 * near.error / axis_norm
            total *= t_axis
            inside *= i_axis
        tail = total - inside
        error = err_total + err_inside
    else:
        area = _unit_sphere_area(d)
        full = _ball_radial_direct(body, T, 2.0, tol=tolerance * norm * 1e-2 / area)
        outer = _ball_radial_direct(body, T, 2.0, tol=tolerance * norm * 1e-2 / area, r_lower=0.5 * epsilon)
        total = area * full.value / norm
        tail = area * outer.value / norm
        error = area * (full.error + outer.error) / norm
    return FejerMass(total, tail, error, surface_tail_bound(body, T, epsilon))
