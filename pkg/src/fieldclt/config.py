"""Experiment configuration files.

The format is INI (``configparser``) with fixed sections and typed keys::

    [experiment]
    mode = hermite2
    ladder = 8.0, 16.0, 32.0, 64.0
    replications = 2000
    seed = 20240601

    [body]
    kind = cube
    dimension = 1

    [density]
    family = gaussian_type
    s = 1.0
    c = 0.3989422804014327

Unknown sections or keys are rejected.  :func:`dump_config` writes every
key with ``repr`` floats, so parsing its output reproduces the config.
"""

from __future__ import annotations

import configparser
from dataclasses import asdict, dataclass, field, fields, replace
from fractions import Fraction
from math import isfinite
from typing import Optional

from .domains import ConvexBody, p_star
from .exceptions import ConfigError
from .simulate import GENERATORS, SimConfig
from .spectra import FAMILIES, WEIGHT_FAMILIES, SpectralDensity, WeightFunction, lp_membership, value_at_zero

MODES = ("base", "hermite2", "weighted")


def _floats(text):
    return tuple(float(x) for x in text.replace(",", " ").split())


def _ints(text):
    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..")
        return tuple(range(int(lo), int(hi) + 1))
    return tuple(int(x) for x in text.replace(",", " ").split())


def _pairs(text):
    out = []
    for item in text.replace(",", " ").split():
        u, v = item.split(":")
        out.append((float(u), float(v)))
    return tuple(out)


def _bool(text):
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _optional_float(text):
    return None if text.strip().lower() in ("", "none", "auto") else float(text)


def _fmt(value):
    if value is None:
        return "auto"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        if value and isinstance(value[0], tuple):
            return ", ".join(f"{u!r}:{v!r}" for u, v in value)
        return ", ".join(_fmt(v) for v in value)
    return str(value)


@dataclass(frozen=True)
class ExperimentSection:
    mode: str = "base"
    ladder: tuple = (8.0, 16.0, 32.0, 64.0)
    h: Optional[float] = None
    replications: int = 2000
    seed: int = 0
    generator: str = "circulant_embedding"
    spectral_nodes: int = 512
    p_values: tuple = (1.5, 2.0, 3.0, 4.0)
    k_range: tuple = tuple(range(3, 13))
    pairs: tuple = ((0.0, 0.125), (0.0, 0.25), (0.0, 0.5), (0.0, 1.0))
    epsilon: float = 1.0


@dataclass(frozen=True)
class BodySection:
    kind: str = "cube"
    dimension: int = 1
    half_widths: tuple = ()
    anchored: bool = False


@dataclass(frozen=True)
class DensitySection:
    family: str = "cauchy_type"
    alpha: float = 1.0
    s: float = 1.0
    c: float = 0.3183098861837907
    cutoff: float = 1.0
    inner: float = 0.5


@dataclass(frozen=True)
class WeightSection:
    family: str = "power_norm"
    nu: float = 1.0
    gamma: float = 1.0
    mean: str = "arithmetic"


@dataclass(frozen=True)
class OutputSection:
    dir: str = "out"
    svg: bool = False


@dataclass(frozen=True)
class ToleranceSection:
    quadrature: float = 1e-9
    scaling_rtol: float = 1e-6
    spread: float = 10.0


_PARSERS = {
    "experiment": {
        "mode": str, "ladder": _floats, "h": _optional_float, "replications": int, "seed": int,
        "generator": str, "spectral_nodes": int, "p_values": _floats, "k_range": _ints,
        "pairs": _pairs, "epsilon": float,
    },
    "body": {"kind": str, "dimension": int, "half_widths": _floats, "anchored": _bool},
    "density": {"family": str, "alpha": float, "s": float, "c": float, "cutoff": float, "inner": float},
    "weight": {"family": str, "nu": float, "gamma": float, "mean": str},
    "output": {"dir": str, "svg": _bool},
    "tolerances": {"quadrature": float, "scaling_rtol": float, "spread": float},
}

_SECTIONS = {
    "experiment": ExperimentSection, "body": BodySection, "density": DensitySection,
    "weight": WeightSection, "output": OutputSection, "tolerances": ToleranceSection,
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Parsed configuration.  ``weight`` is ``None`` when the section is absent."""

    experiment: ExperimentSection = field(default_factory=ExperimentSection)
    body: BodySection = field(default_factory=BodySection)
    density: DensitySection = field(default_factory=DensitySection)
    weight: Optional[WeightSection] = None
    output: OutputSection = field(default_factory=OutputSection)
    tolerances: ToleranceSection = field(default_factory=ToleranceSection)

    def override(self, section, **values):
        """Copy with some keys of ``section`` replaced (``None`` values ignored)."""
        values = {k: v for k, v in values.items() if v is not None}
        if not values:
            return self
        current = getattr(self, section)
        if current is None:
            current = _SECTIONS[section]()
        unknown = set(values) - {f.name for f in fields(current)}
        if unknown:
            raise ConfigError(f"unknown keys for [{section}]: {sorted(unknown)}")
        return replace(self, **{section: replace(current, **values)})

    def to_dict(self):
        out = {}
        for f in fields(self):
            section = getattr(self, f.name)
            if section is not None:
                out[f.name] = {k: (list(map(list, v)) if k == "pairs" else list(v) if isinstance(v, tuple) else v)
                               for k, v in asdict(section).items()}
        return out

    # -- builders -------------------------------------------------------------

    def build_body(self) -> ConvexBody:
        b = self.body
        try:
            if b.kind == "cube":
                return ConvexBody.cube(b.dimension, anchored=b.anchored)
            if b.kind == "ball":
                return ConvexBody.ball(b.dimension)
            if b.kind == "rectangle":
                if len(b.half_widths) != b.dimension:
                    raise ValueError("rectangle needs one half width per dimension")
                return ConvexBody.rectangle(b.half_widths, anchored=b.anchored)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"[body]: {exc}") from None
        raise ConfigError(f"[body] kind must be cube, ball or rectangle, got {b.kind!r}")

    def build_density(self) -> SpectralDensity:
        f, d = self.density, self.body.dimension
        try:
            if f.family == "cauchy_type":
                return SpectralDensity.cauchy(f.alpha, f.c, d)
            if f.family == "gaussian_type":
                return SpectralDensity.gaussian(f.s, f.c, d)
            if f.family == "bounded_compact":
                return SpectralDensity.compact(f.cutoff, f.c, d)
            if f.family == "band_pass":
                return SpectralDensity.band_pass(f.inner, f.cutoff, f.c, d)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"[density]: {exc}") from None
        raise ConfigError(f"[density] family must be one of {FAMILIES}, got {f.family!r}")

    def build_weight(self) -> Optional[WeightFunction]:
        if self.weight is None:
            return None
        w = self.weight
        try:
            return WeightFunction(w.family, self.body.dimension, w.nu, w.gamma, w.mean)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"[weight]: {exc}") from None

    def build_sim(self) -> SimConfig:
        e = self.experiment
        if not e.ladder:
            raise ConfigError("[experiment] ladder is empty")
        try:
            return SimConfig(self.build_density(), self.build_body(), e.ladder[0], e.h, e.seed,
                             e.generator, e.spectral_nodes, e.replications)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"[experiment]: {exc}") from None

    def spacing(self):
        """``T -> h`` rule, or ``None`` for the simulator default."""
        h = self.experiment.h
        return None if h is None else (lambda T: h)


def parse_config(text: str) -> ExperimentConfig:
    """Parse INI text; raises :class:`ConfigError` on unknown or malformed keys."""
    parser = configparser.ConfigParser(interpolation=None, default_section="__unused__")
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"unreadable config: {exc}") from None
    sections = {}
    for name in parser.sections():
        if name not in _PARSERS:
            raise ConfigError(f"unknown section [{name}]")
        values = {}
        for key, raw in parser.items(name):
            if key not in _PARSERS[name]:
                raise ConfigError(f"unknown key {key!r} in [{name}]")
            try:
                values[key] = _PARSERS[name][key](raw)
            except (ValueError, TypeError) as exc:
                raise ConfigError(f"bad value for {name}.{key}: {raw!r} ({exc})") from None
        sections[name] = _SECTIONS[name](**values)
    return ExperimentConfig(**sections)


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None


def dump_config(cfg: ExperimentConfig) -> str:
    """Serialize every key; ``parse_config(dump_config(c)) == c``."""
    lines = []
    for f in fields(cfg):
        section = getattr(cfg, f.name)
        if section is None:
            continue
        lines.append(f"[{f.name}]")
        for key, value in asdict(section).items():
            if isinstance(value, list):
                value = tuple(tuple(v) if isinstance(v, list) else v for v in value)
            lines.append(f"{key} = {_fmt(value)}")
        lines.append("")
    return "\n".join(lines)


@dataclass(frozen=True)
class Violation:
    """A failed check; ``assumption`` is the hypothesis label or ``"config"``."""

    assumption: str
    message: str
    severity: str = "error"

    def __str__(self):
        tag = "Assumption " + self.assumption if self.assumption != "config" else "Config"
        return f"{tag}: {self.message}" + (" (notice)" if self.severity == "notice" else "")


def validate_config(cfg: ExperimentConfig) -> list:
    """List every violated requirement of the configured mode, without running.

    Errors carry ``severity="error"``; informational entries, such as the
    plug-in variance used for weighted experiments, are ``"notice"``.
    """
    out = []
    e = cfg.experiment
    if e.mode not in MODES:
        out.append(Violation("config", f"mode must be one of {MODES}, got {e.mode!r}"))
    if not e.ladder:
        out.append(Violation("config", "T ladder is empty"))
    elif any(T <= 0 or not isfinite(T) for T in e.ladder):
        out.append(Violation("config", "ladder values must be positive and finite"))
    elif any(b <= a for a, b in zip(e.ladder, e.ladder[1:])):
        out.append(Violation("config", "T ladder must be strictly increasing"))
    if e.replications < 8:
        out.append(Violation("config", "need at least 8 replications for fourth k-statistics"))
    if e.h is not None and not e.h > 0:
        out.append(Violation("config", "h must be positive"))
    if not 0 <= e.seed < 2 ** 64:
        out.append(Violation("config", "seed must be an unsigned 64-bit integer"))
    if e.generator not in GENERATORS:
        out.append(Violation("config", f"generator must be one of {GENERATORS}"))
    try:
        body = cfg.build_body()
        density = cfg.build_density()
    except ConfigError as exc:
        out.append(Violation("config", str(exc)))
        return out

    if not p_star(body) < 2:
        out.append(Violation("K", f"p_* = {p_star(body)} must be below 2"))
    if not lp_membership(density, 1).member:
        out.append(Violation("A", f"spectral density not integrable ({lp_membership(density, 1).rule})"))
    if e.mode == "base" and value_at_zero(density) == 0:
        out.append(Violation("B", "f2(0) = 0: the limiting variance degenerates"))
    if e.mode == "hermite2":
        m2 = lp_membership(density, 2)
        if not m2.member:
            out.append(Violation("A", f"f not in L_2, so H_2(X) has no second-order density ({m2.rule})"))
        elif not lp_membership(density, 4).member:
            out.append(Violation("A", "f not in L_4: the T^{-d/2} rate is not predicted", "notice"))
    if e.mode == "weighted":
        if cfg.weight is None:
            out.append(Violation("C", "weighted mode needs a [weight] section"))
        else:
            try:
                w = cfg.build_weight()
                if w.family not in WEIGHT_FAMILIES:
                    out.append(Violation("C", f"unknown weight family {w.family!r}"))
            except ConfigError as exc:
                out.append(Violation("C", str(exc)))
        if not body.anchored:
            out.append(Violation("D", "weighted functionals use the anchored window [0, 1]^d"))
        if body.dimension != 1:
            out.append(Violation("F", "weighted variance quadrature is implemented for d = 1"))
        out.append(Violation("E", "limit variance is estimated from the top ladder point", "notice"))
    for p in e.p_values:
        if Fraction(p).limit_denominator(10 ** 6) <= p_star(body):
            out.append(Violation("K", f"p = {p} <= p_* = {p_star(body)}: kernel norm diverges", "notice"))
    return out
