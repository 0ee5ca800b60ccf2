"""Command-line interface: bounds, sweeps, maximal confidence, optics, verification.

Exit codes: 0 ok, 1 verification failure, 2 combination without a known
quantum formula, 64 usage error, 74 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__
from . import bounds as B
from . import ontic, optics
from .core import Tolerances
from .errors import ContextualQNDError, UnsupportedCombination, UnsupportedPriors
from .maxconf import QubitEnsemble, max_confidence

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_UNSUPPORTED = 2
EXIT_USAGE = 64
EXIT_IO = 74

SCHEMA_VERSION = 1

BOUND_COLUMNS = ("task", "q1", "c", "N", "n", "m", "nc", "quantum", "margin", "regime")
SWEEP_VARIABLES = ("c", "s", "q1", "p", "theta", "N", "n", "m")
_INT_VARIABLES = ("N", "n", "m")

_ANGLE_RE = re.compile(r"^\s*([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?|[+-])?\s*\*?\s*pi\s*$")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_angle(text: str) -> float:
    """Radians from ``"0.42pi"``, ``"pi"``, ``"-0.5pi"`` or a plain number."""
    m = _ANGLE_RE.match(text)
    if m:
        coef = m.group(1)
        if coef in (None, "+"):
            return math.pi
        if coef == "-":
            return -math.pi
        return float(coef) * math.pi
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an angle: {text!r}") from None
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"angle must be finite: {text!r}")
    return value


def _unit(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"value must lie in [0, 1], got {text}")
    return value


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"value must be >= 1, got {text}")
    return value


# -- output -------------------------------------------------------------------


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.12g" % (float(value) + 0.0)
    return str(value)


def _csv_text(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(row.get(col)) for col in columns])
    return buf.getvalue()


def _json_default(obj):
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _with_meta(payload: dict, meta: bool) -> dict:
    out = {"schema_version": SCHEMA_VERSION, **payload}
    if meta:
        out["meta"] = {
            "version": __version__,
            "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        }
    return out


def _json_text(payload) -> str:
    return json.dumps(payload, indent=2, default=_json_default) + "\n"


def _emit(text: str, out_path: str | None = None):
    if out_path is None or out_path == "-":
        sys.stdout.write(text)
        return
    with open(out_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


# -- records ------------------------------------------------------------------


def bound_record(task: str, params: B.TaskParams, tol: float) -> dict:
    """Flat output record for one task; raises when no quantum formula exists."""
    reg = B.regime_classify(task, params, tol)
    return {
        "task": task,
        "q1": params.q1,
        "c": params.c,
        "N": params.N,
        "n": params.n,
        "m": params.m,
        "nc": reg.nc,
        "quantum": reg.quantum,
        "margin": reg.margin,
        "regime": reg.label,
    }


def _record_json(rec: dict) -> dict:
    params = {k: rec[k] for k in ("q1", "c", "N", "n", "m")}
    return {
        "task": rec["task"],
        "params": params,
        "nc": rec["nc"],
        "quantum": rec["quantum"],
        "margin": rec["margin"],
        "regime": rec["regime"],
        "extra": rec.get("extra", {}),
    }


def _params_from_args(args, **override) -> B.TaskParams:
    kw = {"q1": args.q1, "N": args.N, "n": args.n, "m": args.m}
    if getattr(args, "s", None) is not None:
        kw["c"] = args.s * args.s
    elif getattr(args, "c", None) is not None:
        kw["c"] = args.c
    else:
        kw["c"] = 0.0
    kw.update(override)
    return B.TaskParams(**kw)


# -- commands -----------------------------------------------------------------


def cmd_bounds(args) -> int:
    params = _params_from_args(args)
    rec = bound_record(args.task, params, args.tol.tol_eq)
    if args.s is not None:
        rec["extra"] = {"s": args.s}
    if args.format == "csv":
        _emit(_csv_text(BOUND_COLUMNS, [rec]))
    else:
        _emit(_json_text(_with_meta(_record_json(rec), args.meta)))
    return EXIT_OK


def _number(text: str, angle: bool = False) -> float:
    try:
        return parse_angle(text) if angle else float(text)
    except (ValueError, argparse.ArgumentTypeError) as exc:
        raise UsageError(f"bad sweep value {text!r}") from exc


def _sweep_values(args) -> list:
    angle = args.var == "theta"
    if args.values is not None:
        vals = [_number(v, angle) for v in args.values]
    else:
        lo, hi, steps = args.range
        lo, hi, steps_f = _number(lo, angle), _number(hi, angle), _number(steps)
        if steps_f != int(steps_f) or steps_f < 2:
            raise UsageError("range needs an integer step count >= 2")
        if not lo <= hi:
            raise UsageError("range is empty (need lo <= hi)")
        vals = np.linspace(lo, hi, int(steps_f)).tolist()
    if not vals:
        raise UsageError("sweep has no values")
    if args.var in _INT_VARIABLES:
        if any(v != int(v) or v < 1 for v in vals):
            raise UsageError(f"{args.var} takes positive integers")
        return [int(v) for v in vals]
    if args.var in ("c", "s", "q1", "p") and not all(0.0 <= x <= 1.0 for x in vals):
        raise UsageError(f"{args.var} values must lie in [0, 1]")
    return vals


def _sweep_row(args, var, value) -> dict:
    if args.task == "maxconf":
        kw = {"theta": args.theta, "p": args.p, "q1": args.q1}
        if var not in kw:
            raise UsageError(f"maxconf sweeps take theta, p or q1, not {var}")
        kw[var] = value
        ens = QubitEnsemble(**kw)
        c1, c2 = (max_confidence(ens, k).confidence for k in (1, 2))
        return {var: value, **{k: v for k, v in kw.items() if k != var}, "C1": c1, "C2": c2}
    if var in ("p", "theta"):
        raise UsageError(f"{var} is only swept for the maxconf task")
    override = {"c": value * value} if var == "s" else {var: value}
    params = _params_from_args(args, **override)
    try:
        rec = bound_record(args.task, params, args.tol.tol_eq)
    except (UnsupportedCombination, UnsupportedPriors):
        rec = {
            "task": args.task, "q1": params.q1, "c": params.c, "N": params.N, "n": params.n,
            "m": params.m, "nc": None, "quantum": None, "margin": None, "regime": "Unsupported",
        }
    if var == "s":
        rec["s"] = value
    return rec


def cmd_sweep(args) -> int:
    vals = _sweep_values(args)
    rows = [_sweep_row(args, args.var, v) for v in vals]
    if args.task == "maxconf":
        columns = (args.var,) + tuple(k for k in ("theta", "p", "q1") if k != args.var) + ("C1", "C2")
    else:
        columns = (("s",) if args.var == "s" else ()) + BOUND_COLUMNS
    if args.format == "csv":
        text = _csv_text(columns, rows)
    else:
        payload = {"variable": args.var, "task": args.task, "columns": list(columns), "rows": rows}
        text = _json_text(_with_meta(payload, args.meta))
    _emit(text, args.out)
    return EXIT_OK


def cmd_maxconf(args) -> int:
    ens = QubitEnsemble(args.theta, args.p, args.q1)
    rows = []
    for k in (1, 2):
        r = max_confidence(ens, k, args.tol)
        rows.append({
            "k": k,
            "confidence": r.confidence,
            "dual_value": r.dual_value,
            "certificate_min_eig": r.certificate_min_eig,
            "slackness": r.slackness,
        })
    if args.format == "csv":
        _emit(_csv_text(("k", "confidence", "dual_value", "certificate_min_eig", "slackness"), rows))
    else:
        payload = {"params": {"theta": args.theta, "p": args.p, "q1": args.q1}, "outcomes": rows}
        _emit(_json_text(_with_meta(payload, args.meta)))
    return EXIT_OK


def cmd_optics(args) -> int:
    if args.mode == "usd":
        cfg, achieved = optics.solve_usd_config(args.q1, args.s, args.tol)
        rep = optics.usd_report(args.q1, args.s, cfg)
        payload = {
            "mode": "usd",
            "params": {"q1": args.q1, "s": args.s},
            "config": cfg.to_dict(),
            "achieved": achieved,
            "idp_bound": B.q_usd_max(args.q1, args.s * args.s),
            "alphas": rep["alphas"],
            "residuals": {
                "orthogonality": rep["orthogonality_residual"],
                "failure_overlap": rep["failure_overlap"],
            },
        }
        row = {"q1": args.q1, "s": args.s, **cfg.to_dict(), "alpha1": rep["alphas"][0],
               "alpha2": rep["alphas"][1], "achieved": achieved}
        cols = ("q1", "s", "phi", "mu", "nu", "xi1", "xi2", "eta", "alpha1", "alpha2", "achieved")
    else:
        cfg, c1, c2 = optics.solve_mc_config(args.q1, args.theta, args.p, args.tol)
        fam = optics.NoisyTheta(args.theta, args.p)
        payload = {
            "mode": "maxconf",
            "params": {"q1": args.q1, "theta": args.theta, "p": args.p},
            "config": cfg.to_dict(),
            "confidences": [c1, c2],
            "simulated_confidences": list(optics.simulate_mc_confidences(args.q1, args.theta, args.p, cfg)),
            "residuals": {
                "orthogonality": optics.orthogonality_residual(fam, cfg.phi, cfg.mu, cfg.nu),
                "failure_overlap": optics.failure_overlap(fam, cfg.phi, cfg.mu, cfg.nu),
            },
        }
        row = {"q1": args.q1, "theta": args.theta, "p": args.p, **cfg.to_dict(), "C1": c1, "C2": c2}
        cols = ("q1", "theta", "p", "phi", "mu", "nu", "xi1", "xi2", "eta", "C1", "C2")
    if args.format == "csv":
        _emit(_csv_text(cols, [row]))
    else:
        _emit(_json_text(_with_meta(payload, args.meta)))
    return EXIT_OK


def _check_table(results, fmt: str) -> str:
    cols = ("suite", "name", "points", "max_dev", "tol", "passed")
    rows = [r.to_dict() for r in results]
    if fmt == "csv":
        return _csv_text(cols, rows)
    if fmt == "json":
        return _json_text({"schema_version": SCHEMA_VERSION, "checks": rows,
                           "passed": all(r.passed for r in results)})
    lines = [f"{'suite':<8} {'check':<26} {'points':>6} {'max_dev':>11} {'tol':>8}  status"]
    for r in results:
        lines.append(f"{r.suite:<8} {r.name:<26} {r.points:>6} {r.max_dev:>11.3e} {r.tol:>8.0e}  "
                     f"{'PASS' if r.passed else 'FAIL'}")
    return "\n".join(lines) + "\n"


def cmd_verify(args) -> int:
    from .verify import run_suite

    results = run_suite(args.suite, args.tol)
    _emit(_check_table(results, args.format))
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


def cmd_ontic(args) -> int:
    from .verify import CheckResult, bundled_models, ontic_residuals

    models = {"model": ontic.load_model(args.model)} if args.model else bundled_models()
    res = ontic_residuals(models, n_random=args.random)
    count = len(models) + args.random
    results = [CheckResult("ontic", k, count, v, args.tol.tol_eq) for k, v in res.items()]
    _emit(_check_table(results, args.format))
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


# -- parser -------------------------------------------------------------------


def _add_format(p, default="json", table=False):
    choices = ("table", "json", "csv") if table else ("json", "csv")
    p.add_argument("--format", choices=choices, default=default)


def _add_task_params(p, q1_default=0.5):
    p.add_argument("--q1", type=_unit, default=q1_default, help="prior of the first state")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--c", type=_unit, help="confusability (squared overlap)")
    g.add_argument("--s", type=_unit, help="overlap; sets c = s^2")
    p.add_argument("--N", type=_positive_int, default=1, help="number of sequential receivers")
    p.add_argument("--n", type=_positive_int, default=1, help="input copies")
    p.add_argument("--m", type=_positive_int, default=2, help="output copies")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="contextual-qnd", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("bounds", help="noncontextual and quantum bound for one task")
    p.add_argument("task", choices=[t.value for t in B.Task])
    _add_task_params(p)
    _add_format(p)
    p.add_argument("--meta", action="store_true", help="add version and timestamp")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("sweep", help="tabulate bounds or confidences over one variable")
    p.add_argument("--task", choices=[t.value for t in B.Task] + ["maxconf"], required=True)
    p.add_argument("--var", choices=SWEEP_VARIABLES, required=True)
    rg = p.add_mutually_exclusive_group(required=True)
    rg.add_argument("--range", nargs=3, metavar=("LO", "HI", "STEPS"), type=str)
    rg.add_argument("--values", nargs="+", type=str)
    _add_task_params(p)
    p.add_argument("--theta", type=parse_angle, default=0.25 * math.pi)
    p.add_argument("--p", type=_unit, default=1.0)
    p.add_argument("--out", help="output file (default stdout)")
    _add_format(p, default="csv")
    p.add_argument("--meta", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("maxconf", help="maximal confidence of two depolarized qubit states")
    p.add_argument("--theta", type=parse_angle, required=True, help="radians, or e.g. 0.42pi")
    p.add_argument("--p", type=_unit, required=True)
    p.add_argument("--q1", type=_unit, default=0.5)
    _add_format(p)
    p.add_argument("--meta", action="store_true")
    p.set_defaults(func=cmd_maxconf)

    p = sub.add_parser("optics", help="solve wave-plate angles of the interferometer")
    osub = p.add_subparsers(dest="mode", required=True, parser_class=_Parser)
    u = osub.add_parser("usd")
    u.add_argument("--q1", type=_unit, default=0.5)
    u.add_argument("--s", type=_unit, required=True)
    mc = osub.add_parser("maxconf")
    mc.add_argument("--q1", type=_unit, default=0.5)
    mc.add_argument("--theta", type=parse_angle, required=True)
    mc.add_argument("--p", type=_unit, required=True)
    for q in (u, mc):
        _add_format(q)
        q.add_argument("--meta", action="store_true")
        q.set_defaults(func=cmd_optics)

    p = sub.add_parser("ontic", help="ontological-model identities")
    osub = p.add_subparsers(dest="action", required=True, parser_class=_Parser)
    v = osub.add_parser("verify")
    v.add_argument("--model", help="JSON model file (default: bundled toy models)")
    v.add_argument("--random", type=int, default=50, help="extra random feasible instances")
    _add_format(v, default="table", table=True)
    v.set_defaults(func=cmd_ontic)

    p = sub.add_parser("verify", help="compare analytic results with brute-force oracles")
    p.add_argument("--suite", choices=("all", "bounds", "maxconf", "optics", "ontic"), default="all")
    _add_format(p, default="table", table=True)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.tol = Tolerances.from_env()
    except ValueError as exc:
        print(f"contextual-qnd: error: bad tolerance override: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except (UnsupportedCombination, UnsupportedPriors) as exc:
        print(f"contextual-qnd: unsupported: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except UsageError as exc:
        print(f"contextual-qnd: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"contextual-qnd: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ContextualQNDError as exc:
        print(f"contextual-qnd: error: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except ValueError as exc:
        print(f"contextual-qnd: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
