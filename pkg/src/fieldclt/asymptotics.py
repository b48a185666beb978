"""Monte Carlo experiments for the central limit theorems.

A ladder of window sizes ``T`` is simulated, each functional is normalized
(``T^{d/2}`` or ``W(T)``), and the k-statistics, Kolmogorov distance to the
limiting normal law and the fourth-cumulant Berry-Esseen bound are
recorded per ``T``.  Power-law rates are fitted across the ladder.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from math import pi, sqrt
from typing import Optional, Sequence

import numpy as np
from scipy import stats
from scipy.special import ndtr

from .cumulants import (
    h2_chaos_variance,
    h2_finite_variance,
    k_statistic,
    theoretical_h2_variance,
    theoretical_variance,
)
from .domains import p_star
from .exceptions import AssumptionViolation, ConfigError
from .hybl import admissible_pk, check_paper_family
from .quadrature import gauss_kronrod
from .simulate import SimConfig, replicate_functionals, replicate_nested
from .spectra import (
    WeightFunction,
    lp_membership,
    require_lp,
    value_at_zero,
    weight_fourier,
    weight_l2,
    weighted_variance,
)
from .utils.validation import check_positive, check_samples

MODES = ("base", "hermite2", "weighted")
# Standard deviation of sqrt(N) * D_N under the null (Kolmogorov distribution).
KOLMOGOROV_SD = 0.2603


def kolmogorov_distance(samples, mean=0.0, variance=1.0):
    """Exact ``sup_z |F_N(z) - Phi((z - mean) / sqrt(variance))|``.

    The supremum is attained at an order statistic, approached from the
    left or the right, so both one-sided gaps are checked at every jump.

    Examples
    --------
    >>> kolmogorov_distance([0.0, 0.0, 0.0])
    0.5
    """
    x = np.sort(check_samples(samples, min_samples=2))
    if not variance > 0 or not np.isfinite(variance):
        raise ValueError(f"variance must be positive, got {variance}")
    n = x.size
    cdf = ndtr((x - mean) / sqrt(variance))
    upper = np.arange(1, n + 1) / n - cdf
    lower = cdf - np.arange(0, n) / n
    return float(max(upper.max(), lower.max()))


def kolmogorov_se(n):
    """Null-distribution scale of the Kolmogorov distance for ``n`` samples."""
    return KOLMOGOROV_SD / sqrt(n)


class BerryEsseen(float):
    """Float subclass carrying a ``flagged`` attribute for negative radicands."""

    flagged: bool = False


def berry_esseen_bound(cum2, cum4):
    """``sqrt(cum4 / 6 + (cum2 - 1)**2)`` for a standardized chaos variable.

    When an estimated ``cum4`` drives the radicand below zero the bound is
    returned as 0 with ``flagged`` set.
    """
    radicand = cum4 / 6 + (cum2 - 1) ** 2
    out = BerryEsseen(sqrt(radicand) if radicand >= 0 else 0.0)
    out.flagged = radicand < 0
    return out


def berry_esseen_se(cum2, cum4, se2, se4):
    """Propagated standard error of :func:`berry_esseen_bound`.

    The radicand's error ``s_R`` follows from the delta method; the bound's
    error is taken as ``sqrt(R + s_R) - sqrt(R)``, which stays finite when
    ``R`` is near zero.
    """
    radicand = max(cum4 / 6 + (cum2 - 1) ** 2, 0.0)
    s_r = sqrt((se4 / 6) ** 2 + (2 * (cum2 - 1) * se2) ** 2)
    return sqrt(radicand + s_r) - sqrt(radicand)


def derive_seed(seed, position):
    """Seed for ladder point ``position``, from the experiment seed."""
    state = np.random.SeedSequence([int(seed), int(position)]).generate_state(2, np.uint32)
    return int(state[0]) | (int(state[1]) << 32)


@dataclass
class Estimate:
    est: float
    se: float


@dataclass
class LadderRecord:
    """Statistics of the normalized functional at one window size."""

    T: float
    N: int
    seed: int
    k2: Estimate
    k3: Estimate
    k4: Estimate
    sigma2_theory: float
    sigma2_finite: Optional[float]
    dkol: float
    dkol_se: float
    berry_esseen: float
    berry_esseen_se: float
    berry_esseen_flagged: bool
    h: float


@dataclass
class CltExperimentReport:
    """Results of one ladder run; ``to_dict`` follows the report schema."""

    config: dict
    mode: str
    ladder: list
    sigma2_label: str
    notes: list = field(default_factory=list)
    admissibility: dict = field(default_factory=dict)

    @property
    def T(self):
        return [r.T for r in self.ladder]

    def quantity(self, name):
        if name == "dkol":
            return np.array([r.dkol for r in self.ladder])
        if name == "cum4":
            return np.array([r.k4.est for r in self.ladder])
        if name == "k2":
            return np.array([r.k2.est for r in self.ladder])
        raise ValueError(f"unknown quantity {name!r}")

    def ratefits(self):
        out = {}
        for name in ("dkol", "cum4"):
            try:
                slope, se = rate_fit(self, name)
                out[name] = {"slope": slope, "se": se}
            except ValueError:
                out[name] = None
        return out

    def to_dict(self):
        return {
            "config": self.config,
            "mode": self.mode,
            "sigma2_label": self.sigma2_label,
            "notes": list(self.notes),
            "admissibility": self.admissibility,
            "ladder": [asdict(r) for r in self.ladder],
            "ratefits": self.ratefits(),
        }


def rate_fit(report, quantity):
    """Least-squares slope of ``log(quantity)`` against ``log(T)``.

    ``report`` may be a :class:`CltExperimentReport` or a ``(T, values)``
    pair.  Returns ``(slope, stderr)``.
    """
    if isinstance(report, CltExperimentReport):
        T, values = np.asarray(report.T, dtype=float), report.quantity(quantity)
    else:
        T, values = (np.asarray(a, dtype=float) for a in report)
    if T.size < 3:
        raise ValueError("rate fits need at least three ladder points")
    if np.any(values <= 0) or np.any(T <= 0):
        raise ValueError(f"{quantity} must be positive at every ladder point for a log-log fit")
    fit = stats.linregress(np.log(T), np.log(values))
    return float(fit.slope), float(fit.stderr)


def trend_nonincreasing(values, ses):
    """True if every rise between consecutive points stays within one combined SE."""
    values, ses = np.asarray(values), np.asarray(ses)
    rises = np.diff(values)
    allowed = np.sqrt(ses[1:] ** 2 + ses[:-1] ** 2)
    return bool(np.all(rises <= allowed))


def check_mode_assumptions(density, body, mode, weight=None):
    """Raise :class:`AssumptionViolation` naming the first failed hypothesis.

    Returns a dict with the hybl admissibility data for cumulant orders 3, 4.
    """
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}, got {mode!r}")
    if not p_star(body) < 2:
        raise AssumptionViolation("K", f"p_* = {p_star(body)} is not below 2")
    require_lp(density, 1, "A")
    if mode == "base":
        if value_at_zero(density) == 0:
            raise AssumptionViolation("B", "f2(0) = 0: the limiting variance degenerates")
    elif mode == "hermite2":
        require_lp(density, 2, "A")
    else:
        if weight is None:
            raise ConfigError("weighted mode needs a weight function")
        if not isinstance(weight, WeightFunction):
            raise ConfigError("weight must be a WeightFunction")
        if weight.dimension != body.dimension:
            raise ConfigError("weight and body dimensions differ")
        if not body.anchored:
            raise AssumptionViolation("D", "weights are defined on the anchored window [0, 1]^d")
        w2 = weight_l2(weight, body, 1.0)
        if not np.isfinite(w2) or w2 <= 0:
            raise AssumptionViolation("F", f"weight norm W^2(1) = {w2} is not finite and positive")
    d = body.dimension
    admissibility = {}
    for k in (3, 4):
        verdict = check_paper_family(k, d, "1/2")
        admissibility[str(k)] = {
            "p_k": str(admissible_pk(k)),
            "c1": verdict.c1_holds,
            "c2": verdict.c2_holds,
        }
    admissibility["L4"] = lp_membership(density, 4).member
    return admissibility


def _sigma2(mode, density, body, T, weight):
    """(reference variance, finite-T variance) of the normalized functional."""
    if mode == "base":
        res = theoretical_variance(density, body, T)
        return res.limit, res.finite_T
    if mode == "hermite2":
        finite = h2_finite_variance(density, body, T) if body.is_box else None
        return h2_chaos_variance(density, body), finite
    finite = weighted_variance(density, weight, body, T)
    return finite, finite


def _normalizer(mode, body, T, weight):
    if mode == "weighted":
        return sqrt(weight_l2(weight, body, T))
    return T ** (body.dimension / 2)


def run_clt_experiment(config: SimConfig, ladder: Sequence[float], mode="base", weight=None,
                       threads=1, spacing=None):
    """Simulate the normalized functional along ``ladder`` and summarize it.

    Parameters
    ----------
    config : SimConfig
        Density, body, generator, seed and replication count; its ``T`` is
        replaced by each ladder value.
    ladder : sequence of float
        Strictly increasing window sizes.
    mode : {"base", "hermite2", "weighted"}
        ``base`` integrates the Gaussian field itself; ``hermite2``
        integrates ``H_2(X / sigma0)``; ``weighted`` integrates ``w(t) X_t``
        over ``[0, T]^d`` and normalizes by ``W(T)``.
    spacing : callable, optional
        ``T -> h``; defaults to the simulator's rule.

    Notes
    -----
    For ``hermite2`` the reference variance is that of ``H_2(Z)``-based
    chaos, ``2 (2 pi)^d |K| int f^2 / sigma0^4``; the displayed value
    without the factor two is stored under ``sigma2_displayed``.  For
    ``weighted`` the reference variance is the finite-``T`` variance at the
    top of the ladder, an estimate of the limit.
    """
    ladder = [check_positive(T, "T") for T in ladder]
    if not ladder:
        raise ConfigError("T ladder is empty")
    if any(b <= a for a, b in zip(ladder, ladder[1:])):
        raise ConfigError("T ladder must be strictly increasing")
    density, body = config.density, config.body
    admissibility = check_mode_assumptions(density, body, mode, weight)
    notes = []
    label = "limit"
    if mode == "hermite2":
        notes.append("sigma2_theory includes Var H_2(Z) = 2")
        admissibility["sigma2_displayed"] = theoretical_h2_variance(density, body)
    if mode == "weighted":
        label = "estimated"
        notes.append("sigma2_theory is the finite-T variance at the top of the ladder")

    reference = None
    if mode == "weighted":
        reference = _sigma2(mode, density, body, ladder[-1], weight)[0]
    records = []
    for i, T in enumerate(ladder):
        seed = derive_seed(config.seed, i)
        h = spacing(T) if spacing is not None else None
        cfg = config.with_T(T, h)
        cfg = SimConfig(cfg.density, cfg.body, cfg.T, cfg.h, seed, cfg.generator,
                        cfg.spectral_nodes, cfg.replications)
        values = replicate_functionals(cfg, weight=weight if mode == "weighted" else None,
                                       hermite_m=2 if mode == "hermite2" else None, threads=threads)
        y = values / _normalizer(mode, body, T, weight)
        sigma2, finite = _sigma2(mode, density, body, T, weight)
        if reference is not None:
            sigma2 = reference
        ks = [k_statistic(y, k, "W_T" if mode == "weighted" else "T_half_d") for k in (2, 3, 4)]
        dkol = kolmogorov_distance(y, 0.0, sigma2)
        c2, c4 = ks[0].estimate / sigma2, ks[2].estimate / sigma2 ** 2
        s2, s4 = ks[0].standard_error / sigma2, ks[2].standard_error / sigma2 ** 2
        be = berry_esseen_bound(c2, c4)
        records.append(LadderRecord(
            T=float(T), N=int(y.size), seed=seed,
            k2=Estimate(ks[0].estimate, ks[0].standard_error),
            k3=Estimate(ks[1].estimate, ks[1].standard_error),
            k4=Estimate(ks[2].estimate, ks[2].standard_error),
            sigma2_theory=float(sigma2), sigma2_finite=None if finite is None else float(finite),
            dkol=dkol, dkol_se=kolmogorov_se(y.size),
            berry_esseen=float(be), berry_esseen_se=berry_esseen_se(c2, c4, s2, s4),
            berry_esseen_flagged=be.flagged, h=float(cfg.h),
        ))
    return CltExperimentReport(config=describe_config(config, ladder, mode, weight), mode=mode,
                               ladder=records, sigma2_label=label, notes=notes,
                               admissibility=admissibility)


def describe_config(config, ladder, mode, weight=None):
    """JSON-ready summary of an experiment's inputs."""
    f, body = config.density, config.body
    out = {
        "mode": mode,
        "ladder": [float(T) for T in ladder],
        "density": {"family": f.family, "dimension": f.dimension, **f.params},
        "body": {"kind": body.kind, "dimension": body.dimension,
                 "half_widths": list(body.half_widths), "anchored": body.anchored},
        "generator": config.generator,
        "seed": int(config.seed),
        "replications": int(config.replications),
    }
    if weight is not None:
        out["weight"] = {"family": weight.family, "dimension": weight.dimension, "nu": weight.nu,
                         "gamma": weight.gamma, "mean": weight.mean}
    return out


@dataclass
class TightnessResult:
    pairs: list
    moments: list
    ratios: list
    passed: bool
    spread: float


def tightness_check(config: SimConfig, pairs, threads=1, max_spread=10.0):
    """Fourth-moment increments of the partial-window process.

    ``Y_T(u)`` integrates the field over the window ``u^{1/d} T K`` and
    divides by ``T^{d/2}``.  For each pair the Monte Carlo mean of
    ``|Y_T(v) - Y_T(u)|^4`` is divided by ``(v - u)^2``; the check passes
    when the largest ratio is less than ``max_spread`` times the smallest.
    """
    pairs = [(float(u), float(v)) for u, v in pairs]
    for u, v in pairs:
        if not 0 <= u < v <= 1:
            raise ValueError(f"pairs need 0 <= u < v <= 1, got ({u}, {v})")
    if len(pairs) < 2:
        raise ValueError("at least two pairs are needed")
    d = config.body.dimension
    levels = sorted({x for pair in pairs for x in pair if x > 0})
    nested = replicate_nested(config, [x ** (1.0 / d) for x in levels], threads=threads)
    nested = nested / config.T ** (d / 2)
    column = {x: nested[:, i] for i, x in enumerate(levels)}

    def y(x):
        return column[x] if x > 0 else np.zeros(nested.shape[0])

    moments = [float(np.mean((y(v) - y(u)) ** 4)) for u, v in pairs]
    ratios = [m / (v - u) ** 2 for m, (u, v) in zip(moments, pairs)]
    spread = max(ratios) / min(ratios)
    return TightnessResult(pairs, moments, ratios, bool(spread < max_spread), float(spread))


@dataclass
class WeightedScaling:
    T: list
    ratios: list
    expected: list
    max_rel_error: float
    plancherel_defect: float
    passed: bool


def weighted_scaling_check(w: WeightFunction, body, ladder, rtol=1e-6, panels=None):
    """Compare ``W^2(T) / W^2(1)`` with ``T^{d + 2 beta}`` along ``ladder``.

    Also checks Plancherel at ``T = 1``: ``int w^2`` against
    ``(2 pi)^{-d} int |w_1|^2``, the latter by quadrature on ``d = 1``.
    """
    d = body.dimension
    base = weight_l2(w, body, 1.0, panels)
    if not np.isfinite(base) or base <= 0:
        raise AssumptionViolation("F", "weight norm is not finite")
    beta = w.degree
    ratios = [weight_l2(w, body, T, panels) / base for T in ladder]
    expected = [float(T) ** (d + 2 * beta) for T in ladder]
    rel = max(abs(r / e - 1) for r, e in zip(ratios, expected))
    defect = _plancherel_defect(w, body, base) if d == 1 else float("nan")
    ok = rel <= rtol and (np.isnan(defect) or defect <= 1e-3)
    return WeightedScaling([float(T) for T in ladder], ratios, expected, float(rel), defect, bool(ok))


def _plancherel_defect(w, body, w2):
    # |w_1(lam)|^2 ~ |e^{i lam} w(1) - w(0)|^2 / lam^2 whose mean over a period
    # is (w(1)^2 + w(0)^2) / lam^2; integrate to L and add both tails
    L = 4000.0
    edges = np.linspace(-L, L, 4001)
    res = gauss_kronrod(lambda lam: np.abs(weight_fourier(w, body, 1.0, lam[..., None])) ** 2,
                        edges, tol=1e-7)
    ends = w(np.array([[0.0], [1.0]])) ** 2
    tail = 2 * float(np.sum(ends)) / L
    freq = (res.value + tail) / (2 * pi) ** body.dimension
    return abs(freq / w2 - 1)
