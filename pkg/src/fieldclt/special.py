"""Bessel functions of the first kind for the orders needed by ball kernels.

Only non-negative integer and half-integer orders are supported: the ball
kernel in dimension ``d`` uses ``J_{d/2}``.  Integer orders use the power
series below ``CROSSOVER`` and the Hankel asymptotic expansion above it.
Half-integer orders reduce to elementary functions away from the origin.
"""

from math import gamma, lgamma, pi

import numpy as np

CROSSOVER = 12.0
_SERIES_TERMS = 60
_HANKEL_TERMS = 40


def _check_order(nu):
    twice = 2 * nu
    if nu < 0 or abs(twice - round(twice)) > 1e-12:
        raise ValueError(f"order must be a non-negative integer or half-integer, got {nu}")
    return round(twice) % 2 == 1


def _series(nu, x):
    # sum_k (-1)^k (x/2)^(2k+nu) / (k! Gamma(k+nu+1))
    half = 0.5 * x
    q = -half * half
    term = np.exp(nu * np.log(np.where(half > 0, half, 1.0)) - lgamma(nu + 1))
    term = np.where(half > 0, term, 1.0 if nu == 0 else 0.0)
    total = term.copy()
    for k in range(1, _SERIES_TERMS):
        term = term * q / (k * (k + nu))
        total += term
        if np.all(np.abs(term) <= 1e-17 * np.maximum(np.abs(total), 1e-300)):
            break
    return total


def _hankel(nu, x):
    mu = 4.0 * nu * nu
    omega = x - 0.5 * nu * pi - 0.25 * pi
    p = np.ones_like(x)
    q = np.zeros_like(x)
    term = np.ones_like(x)
    # a_k(nu) / x^k with a_k = prod_{j<=k} (mu - (2j-1)^2) / (k! 8^k)
    for k in range(1, _HANKEL_TERMS):
        new = term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        if np.all(np.abs(new) >= np.abs(term)) and k > 2:
            break
        term = new
        sign = (-1) ** (k // 2)
        if k % 2 == 0:
            p = p + sign * term
        else:
            q = q + sign * term
        if np.all(np.abs(term) < 1e-17):
            break
    return np.sqrt(2.0 / (pi * x)) * (p * np.cos(omega) - q * np.sin(omega))


def _half_integer(nu, x):
    # J_{1/2}, J_{3/2} closed forms, then upward recurrence (stable for x > nu).
    s, c = np.sin(x), np.cos(x)
    amp = np.sqrt(2.0 / (pi * x))
    prev = amp * s
    if nu == 0.5:
        return prev
    cur = amp * (s / x - c)
    order = 1.5
    while order < nu:
        prev, cur = cur, (2 * order / x) * cur - prev
        order += 1.0
    return cur


def bessel_j(nu, x):
    """Evaluate ``J_nu(x)`` for ``x >= 0`` (array-valued)."""
    half_integer = _check_order(nu)
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("bessel_j is implemented for x >= 0 only")
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    out = np.empty_like(x)
    if half_integer:
        small = x < max(1.0, nu + 0.5)
    else:
        small = x < CROSSOVER
    if np.any(small):
        out[small] = _series(nu, x[small])
    if np.any(~small):
        big = x[~small]
        out[~small] = _half_integer(nu, big) if half_integer else _hankel(nu, big)
    return out[0] if scalar else out


def bessel_j_scaled(nu, x):
    """Evaluate ``J_nu(x) / x**nu``, continuous at ``x = 0``."""
    x = np.asarray(x, dtype=float)
    value_at_zero = 1.0 / (2.0 ** nu * gamma(nu + 1))
    safe = np.where(x > 0, x, 1.0)
    out = bessel_j(nu, safe) / safe ** nu
    tiny = x < 1e-6
    # second-order Taylor term keeps relative accuracy near the origin
    out = np.where(tiny, value_at_zero * (1 - x * x / (4 * (nu + 1))), out)
    return out


def bessel_zeros(nu, count):
    """First ``count`` positive zeros of ``J_nu`` (Newton from McMahon's guess)."""
    _check_order(nu)
    k = np.arange(1, count + 1, dtype=float)
    x = (k + 0.5 * nu - 0.25) * pi
    mu = 4.0 * nu * nu
    x = x - (mu - 1) / (8 * x)
    for _ in range(50):
        value = bessel_j(nu, x)
        # J_nu' = J_{nu-1} - (nu/x) J_nu, with J_{-1/2}(x) = sqrt(2/(pi x)) cos x
        if nu >= 1:
            lower = bessel_j(nu - 1, x)
        else:
            lower = np.sqrt(2.0 / (pi * x)) * np.cos(x)
        step = value / (lower - nu / x * value)
        x = x - step
        if np.all(np.abs(step) <= 1e-14 * x):
            break
    return x
