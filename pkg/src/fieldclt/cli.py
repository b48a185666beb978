"""Command line entry point: ``fieldclt <subcommand> [options]``.

Every subcommand writes ``report.json`` and ``report.csv`` into ``--out``
(and ``*.svg`` plots with ``--svg``).  Exit status: 0 success, 2 bad
configuration, 3 violated assumption, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from fractions import Fraction

from . import __version__
from .asymptotics import (
    kolmogorov_se,
    rate_fit,
    run_clt_experiment,
    tightness_check,
    trend_nonincreasing,
    weighted_scaling_check,
)
from .config import ExperimentConfig, WeightSection, _floats, _ints, _pairs, load_config, validate_config
from .cumulants import kernel_property_highorder
from .domains import fejer_mass, kernel_norm_table, p_star
from .exceptions import AssumptionViolation, ConfigError, FieldCLTError, NumericalError
from .hybl import admissible_pk, check_c2, check_paper_family, parse_instance
from .report import ladder_rows, write_csv, write_json, write_loglog_svg

EXIT_OK, EXIT_CONFIG, EXIT_ASSUMPTION, EXIT_NUMERICAL = 0, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_CONFIG)


def _common(p):
    p.add_argument("--config", help="INI experiment file")
    p.add_argument("--seed", type=int, help="unsigned 64-bit experiment seed")
    p.add_argument("--out", help="output directory")
    p.add_argument("--threads", type=int, default=1, help="worker threads (results do not depend on it)")
    p.add_argument("--svg", action="store_true", default=None, help="also write SVG plots")
    g = p.add_argument_group("overrides")
    g.add_argument("--mode", choices=("base", "hermite2", "weighted"))
    g.add_argument("--ladder", type=_floats, help="window sizes, e.g. '8,16,32'")
    g.add_argument("--N", dest="replications", type=int, help="replications per ladder point")
    g.add_argument("--h", type=float, help="lattice spacing")
    g.add_argument("--generator")
    g.add_argument("--body", dest="kind", choices=("cube", "ball", "rectangle"))
    g.add_argument("--dim", dest="dimension", type=int)
    g.add_argument("--half-widths", type=_floats)
    g.add_argument("--anchored", action="store_true", default=None)
    g.add_argument("--family", help="spectral density family")
    g.add_argument("--alpha", type=float)
    g.add_argument("--s", type=float)
    g.add_argument("--c", type=float)
    g.add_argument("--cutoff", type=float)
    g.add_argument("--inner", type=float)
    g.add_argument("--p", dest="p_values", type=_floats, help="exponents for kernel norms")
    g.add_argument("--k", dest="k_range", type=_ints, help="cumulant orders, e.g. '3..8'")
    g.add_argument("--pairs", type=_pairs, help="tightness pairs 'u:v,u:v'")
    g.add_argument("--epsilon", type=float)
    g.add_argument("--weight", dest="weight_family", help="weight family")
    g.add_argument("--nu", type=float)
    g.add_argument("--gamma", type=float)
    g.add_argument("--mean")


def build_parser():
    parser = _Parser(prog="fieldclt", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "constants": "kernel norm constants C_p(K) and p_*",
        "hybl": "admissible integrability indices and feasibility verdicts",
        "clt": "CLT ladder experiment",
        "rate": "log-log rate fits of d_Kol and cum4",
        "tightness": "fourth-moment increments of the partial-window process",
        "weighted": "weight scaling and the weighted CLT experiment",
        "kernelcheck": "Fejer kernel mass, tail and higher-order kernels",
        "validate": "list violated assumptions without running",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        _common(p)
        if name == "hybl":
            p.add_argument("--instance", help="instance file in the plain-text interchange format")
        if name == "rate":
            p.add_argument("--from-report", help="reuse a clt report.json instead of simulating")
    return parser


def resolve_config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    cfg = cfg.override("experiment", mode=args.mode, ladder=args.ladder, replications=args.replications,
                       h=args.h, generator=args.generator, seed=args.seed, p_values=args.p_values,
                       k_range=args.k_range, pairs=args.pairs, epsilon=args.epsilon)
    cfg = cfg.override("body", kind=args.kind, dimension=args.dimension, half_widths=args.half_widths,
                       anchored=args.anchored)
    cfg = cfg.override("density", family=args.family, alpha=args.alpha, s=args.s, c=args.c,
                       cutoff=args.cutoff, inner=args.inner)
    if cfg.weight is None and args.command == "weighted":
        cfg = replace(cfg, weight=WeightSection())
    cfg = cfg.override("weight", family=args.weight_family, nu=args.nu, gamma=args.gamma, mean=args.mean)
    cfg = cfg.override("output", dir=args.out, svg=args.svg)
    return cfg


def _report_config(cfg):
    # output location and thread count never enter the report
    out = cfg.to_dict()
    out.pop("output", None)
    return out


# -- subcommands ------------------------------------------------------------------

def cmd_constants(cfg, args):
    body = cfg.build_body()
    table = kernel_norm_table(body, cfg.experiment.p_values, cfg.tolerances.quadrature)
    rows = [{"body": body.kind, "dim": body.dimension, "p_star": str(p_star(body)), **r}
            for r in table.as_rows()]
    defect = table.plancherel_defect()
    report = {"config": _report_config(cfg), "p_star": str(p_star(body)), "table": rows,
              "plancherel": None if defect is None else {"defect": defect[0], "allowed": defect[1]}}
    return report, rows, None


def cmd_hybl(cfg, args):
    d = cfg.body.dimension
    rows = []
    for k in cfg.experiment.k_range:
        pk = admissible_pk(k)
        verdict = check_paper_family(k, d, Fraction(1, 2))
        rows.append({"k": k, "p_k": str(pk), "z_last": str(verdict.exponents[-1]),
                     "c1": verdict.c1_holds, "c2": verdict.c2_holds, "c3": verdict.c3_holds,
                     "complete": verdict.complete})
    pks = [admissible_pk(k) for k in cfg.experiment.k_range]
    report = {"config": _report_config(cfg), "table": rows,
              "strictly_decreasing": all(a > b for a, b in zip(pks, pks[1:])),
              "above_two": all(p > 2 for p in pks)}
    if getattr(args, "instance", None):
        try:
            with open(args.instance, encoding="utf-8") as fh:
                inst = parse_instance(fh.read())
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read instance: {exc}") from None
        report["instance"] = check_c2(inst).to_dict()
    return report, rows, None


def _clt(cfg, args, mode=None):
    sim = cfg.build_sim()
    mode = mode or cfg.experiment.mode
    report = run_clt_experiment(sim, cfg.experiment.ladder, mode, weight=cfg.build_weight(),
                                threads=args.threads, spacing=cfg.spacing())
    out = report.to_dict()
    out["config"] = _report_config(cfg)
    dk = report.quantity("dkol")
    out["trend"] = {"dkol_nonincreasing": trend_nonincreasing(dk, [kolmogorov_se(r.N) for r in report.ladder])}
    return out


def _dkol_plot(report):
    T = [r["T"] for r in report["ladder"]]
    return {"name": "dkol.svg", "T": T,
            "series": {"d_Kol": [r["dkol"] for r in report["ladder"]],
                       "Berry-Esseen": [max(r["berry_esseen"], 1e-12) for r in report["ladder"]]},
            "title": f"{report['mode']} mode", "ylabel": "distance"}


def cmd_clt(cfg, args):
    report = _clt(cfg, args)
    return report, ladder_rows(report), _dkol_plot(report)


def cmd_rate(cfg, args):
    if getattr(args, "from_report", None):
        try:
            with open(args.from_report, encoding="utf-8") as fh:
                source = json.load(fh)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read report: {exc}") from None
    else:
        source = _clt(cfg, args)
    T = [r["T"] for r in source["ladder"]]
    fits = {}
    for name, key in (("dkol", "dkol"), ("cum4", "k4")):
        values = [r[key] if name == "dkol" else r[key]["est"] for r in source["ladder"]]
        try:
            slope, se = rate_fit((T, values), name)
            fits[name] = {"slope": slope, "se": se}
        except ValueError as exc:
            fits[name] = {"slope": None, "se": None, "reason": str(exc)}
    d = source["config"]["body"]["dimension"] if "body" in source["config"] else cfg.body.dimension
    predicted = -d / 2 if source.get("mode") == "hermite2" else None
    check = None
    if predicted is not None and fits["dkol"]["slope"] is not None:
        check = fits["dkol"]["slope"] <= predicted + 2 * fits["dkol"]["se"]
    report = {"config": source["config"], "mode": source.get("mode"), "ratefits": fits,
              "predicted_dkol_slope": predicted, "dkol_slope_within_prediction": check}
    rows = [{"quantity": k, **v} for k, v in fits.items()]
    return report, rows, _dkol_plot(source)


def cmd_tightness(cfg, args):
    e = cfg.experiment
    sim = cfg.build_sim().with_T(e.ladder[-1], e.h)
    result = tightness_check(sim, e.pairs, threads=args.threads, max_spread=cfg.tolerances.spread)
    rows = [{"u": u, "v": v, "moment4": m, "ratio": r}
            for (u, v), m, r in zip(result.pairs, result.moments, result.ratios)]
    report = {"config": _report_config(cfg), "T": e.ladder[-1], "rows": rows,
              "spread": result.spread, "pass": result.passed}
    return report, rows, None


def cmd_weighted(cfg, args):
    body, w = cfg.build_body(), cfg.build_weight()
    scaling = weighted_scaling_check(w, body, cfg.experiment.ladder, rtol=cfg.tolerances.scaling_rtol)
    clt = _clt(cfg, args, mode="weighted")
    top, prev = clt["ladder"][-1]["k2"], clt["ladder"][-2]["k2"] if len(clt["ladder"]) > 1 else None
    stable = None
    if prev is not None:
        stable = abs(top["est"] - prev["est"]) <= 3 * (top["se"] ** 2 + prev["se"] ** 2) ** 0.5
    report = {"config": _report_config(cfg),
              "scaling": {"T": scaling.T, "ratios": scaling.ratios, "expected": scaling.expected,
                          "max_rel_error": scaling.max_rel_error,
                          "plancherel_defect": scaling.plancherel_defect, "pass": scaling.passed},
              "experiment": clt, "variance_stable_top_two": stable}
    rows = [{"T": T, "ratio": r, "expected": x} for T, r, x in zip(scaling.T, scaling.ratios, scaling.expected)]
    rows += [{"T": r["T"], "k2": r["k2"]["est"], "k2_se": r["k2"]["se"], "sigma2": r["sigma2_theory"]}
             for r in clt["ladder"]]
    return report, rows, _dkol_plot(clt)


def cmd_kernelcheck(cfg, args):
    body = cfg.build_body()
    eps = cfg.experiment.epsilon
    rows = []
    for T in cfg.experiment.ladder:
        m = fejer_mass(body, T, eps, cfg.tolerances.quadrature)
        rows.append({"T": T, "total_mass": m.total_mass, "tail_mass": m.tail_mass,
                     "error_bound": m.error_bound, "surface_bound": m.surface_bound,
                     "below_surface_bound": m.tail_mass <= m.surface_bound})
    tails = [r["tail_mass"] for r in rows]
    report = {"config": _report_config(cfg), "fejer": rows,
              "tail_strictly_decreasing": all(a > b for a, b in zip(tails, tails[1:]))}
    if body.is_box and body.dimension == 1:
        high = []
        for T in cfg.experiment.ladder:
            for k in (2, 3):
                kp = kernel_property_highorder(body, T, k, epsilon=eps)
                high.append({"T": T, "k": k, "mass": kp.mass, "concentration": kp.concentration,
                             "truncation_error": kp.truncation_error})
        report["higher_order"] = high
    else:
        report["higher_order"] = None
    return report, rows, None


def cmd_validate(cfg, args):
    violations = validate_config(cfg)
    rows = [{"assumption": v.assumption, "severity": v.severity, "message": v.message} for v in violations]
    report = {"config": _report_config(cfg), "violations": rows,
              "ok": not any(v.severity == "error" for v in violations)}
    return report, rows, None


COMMANDS = {
    "constants": cmd_constants, "hybl": cmd_hybl, "clt": cmd_clt, "rate": cmd_rate,
    "tightness": cmd_tightness, "weighted": cmd_weighted, "kernelcheck": cmd_kernelcheck,
    "validate": cmd_validate,
}
# subcommands whose assumptions are checked before anything runs
_SIMULATING = ("clt", "rate", "tightness", "weighted")


def _summary(command, report):
    if command == "constants":
        return "\n".join(f"p={r['p']:g}  C_p={r['C_p']:.10g}  +/- {r['error_bound']:.2g}" for r in report["table"])
    if command == "hybl":
        return "\n".join(f"k={r['k']:>2}  p_k={r['p_k']:>5}  C2={r['c2']}" for r in report["table"])
    if command in ("clt", "weighted"):
        ladder = report["ladder"] if command == "clt" else report["experiment"]["ladder"]
        return "\n".join(f"T={r['T']:g}  k2={r['k2']['est']:.4f}+/-{r['k2']['se']:.4f}  dKol={r['dkol']:.4f}"
                         for r in ladder)
    if command == "rate":
        return "\n".join(f"{k}: slope={v['slope']}" for k, v in report["ratefits"].items())
    if command == "tightness":
        return f"spread={report['spread']:.3f} pass={report['pass']}"
    if command == "kernelcheck":
        return "\n".join(f"T={r['T']:g}  mass={r['total_mass']:.10f}  tail={r['tail_mass']:.4g}" for r in report["fejer"])
    if command == "validate":
        return "\n".join(f"{r['severity']}: Assumption {r['assumption']}: {r['message']}"
                         for r in report["violations"]) or "no violations"
    return ""


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        if args.command in _SIMULATING and not getattr(args, "from_report", None):
            mode = {"tightness": "base", "weighted": "weighted"}.get(args.command, cfg.experiment.mode)
            checked = cfg.override("experiment", mode=mode)
            for v in validate_config(checked):
                if v.severity != "error":
                    continue
                if v.assumption == "config":
                    raise ConfigError(v.message)
                raise AssumptionViolation(v.assumption, v.message)
        if args.threads is None or args.threads < 1:
            raise ConfigError("--threads must be a positive integer")
        report, rows, plot = COMMANDS[args.command](cfg, args)
        out = cfg.output.dir
        os.makedirs(out, exist_ok=True)
        write_json(os.path.join(out, "report.json"), report)
        write_csv(os.path.join(out, "report.csv"), rows)
        if cfg.output.svg and plot is not None:
            write_loglog_svg(os.path.join(out, plot["name"]), plot["T"], plot["series"],
                             plot["title"], plot["ylabel"])
        print(_summary(args.command, report))
        if args.command == "validate" and not report["ok"]:
            labels = {r["assumption"] for r in report["violations"] if r["severity"] == "error"}
            return EXIT_CONFIG if labels == {"config"} else EXIT_ASSUMPTION
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except AssumptionViolation as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_ASSUMPTION
    except (NumericalError, ArithmeticError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except FieldCLTError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
