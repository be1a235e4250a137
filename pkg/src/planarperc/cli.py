"""Command-line entry point: ``planarperc <command> [options]``.

Every command builds a result made of a summary dict and an optional table
of rows. ``--format csv`` writes the table (or the summary as key,value
rows), ``--format json`` writes one JSON object. Both carry the version and
a hash of the resolved configuration. Exit codes: 0 success, 2 bad
configuration, 3 numeric failure, 4 failed acceptance check.
"""
from __future__ import annotations

import argparse
import hashlib
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .errors import ConfigError, PlanarPercError

VERSION_TAG = f"v{__version__}"
JSON_ROW_LIMIT = 10_000
# options that shape where and how results are written, not what is computed
_OUTPUT_KEYS = {"out", "format", "plot", "config", "threads", "func"}


@dataclass
class Result:
    summary: dict
    rows: list = field(default_factory=list)
    columns: list = field(default_factory=list)
    plot: tuple | None = None  # (x column, y column, log axes)
    exit_code: int = 0


# ---------------------------------------------------------------- helpers

def _weights(args):
    from .weights import parse_weights, preset
    if getattr(args, "weights", None):
        try:
            with open(args.weights) as fh:
                return parse_weights(json.load(fh))
        except OSError as exc:
            raise ConfigError(f"cannot read weights file: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid weights JSON: {exc}") from exc
    return preset(args.preset)


def _solved(args):
    from .partition import solve_cached
    return solve_cached(_weights(args), l_max=args.l_max)


def _clean(x):
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        if math.isnan(x) or math.isinf(x):
            return str(x)
        return x
    if isinstance(x, (np.bool_,)):
        return bool(x)
    return x


def config_hash(args) -> str:
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in _OUTPUT_KEYS}
    blob = json.dumps(_clean(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple, dict)):
        return json.dumps(_clean(v), separators=(",", ":"))
    return str(v)


def _p_value(args, solved) -> float:
    return solved.p_c if args.p is None else args.p


def _window(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(x) for x in text.split(":"))
    except ValueError as exc:
        raise ConfigError(f"window must look like LO:HI, got {text!r}") from exc
    return lo, hi


# ---------------------------------------------------------------- commands

def cmd_solve(args) -> Result:
    s = _solved(args)
    return Result(_clean({**s.summary(), "weights": s.weights.to_json()}))


def cmd_classify(args) -> Result:
    from .weights import classify
    s = _solved(args)
    c = classify(s)
    return Result(_clean({"kind": c.kind, "type_a": c.a, "alpha": c.alpha, "label": c.label,
                          "evidence": c.evidence}))


def cmd_tune(args) -> Result:
    from .weights import solve_admissibility, tuned_family
    q = tuned_family(args.a, k_cap=args.k_cap, k_min=args.k_min)
    s = solve_admissibility(q, l_max=args.l_max)
    return Result(_clean({"weights": q.to_json(), "m_mu": s.m_mu, "p_c": s.p_c, "Z": s.Z,
                          "type_a": s.type_a, "alpha": s.alpha}))


def cmd_disk(args) -> Result:
    from . import partition
    s = _solved(args)
    if args.enumerate is not None:
        res = partition.w_disk_enumerate(s.weights, args.enumerate, args.e_max, method=args.method_enum)
        val, err = partition.w_disk_quadrature(s, args.enumerate)
        rows = [{"E": e, "weight": float(t)} for e, t in enumerate(res.terms)]
        return Result(_clean({"k": args.enumerate, "e_max": args.e_max, "value": res.value,
                              "truncation_bound": res.truncation_bound, "heuristic": res.heuristic,
                              "quadrature": val, "quadrature_error": err}),
                      rows, ["E", "weight"], ("E", "weight", True))
    t = s.table if args.method == "series" else partition.quadrature_table(s.weights, s.Z, args.l_max)
    rows = []
    for k in range(t.l_max + 1):
        tutte = math.nan
        if 1 <= k and k + int(s.weights.coefficients[0].max()) - 1 <= t.l_max:
            tutte = partition.check_tutte_identity(s, t, k)
        rows.append({"k": k, "W_scaled": float(t.scaled[k]), "log_W": float(t.log_values[k]),
                     "rel_error": float(t.error[k]), "tutte_residual": tutte})
    tr = [r["tutte_residual"] for r in rows if not math.isnan(r["tutte_residual"])]
    return Result(_clean({"method": t.method, "l_max": t.l_max, "r": t.r,
                          "max_tutte_residual": max(tr) if tr else None}),
                  rows, ["k", "W_scaled", "log_W", "rel_error", "tutte_residual"], ("k", "W_scaled", True))


def cmd_oracle(args) -> Result:
    from . import walk_oracle as wo
    from .stats import fit_power_tail
    s = _solved(args)
    p = _p_value(args, s)
    law = wo.step_law(s, p)
    h = wo.hcut_table(law, args.kmax)
    kc = min(args.kmax, args.cyclic_kmax)
    lhs, rhs = wo.cyclic_table(law, kc)
    rows = []
    for k in range(args.kmax + 1):
        rows.append({"k": k, "hcut_exact": float(h[k]),
                     "lhs": float(lhs[k]) if k <= kc else math.nan,
                     "rhs": float(rhs[k]) if k <= kc else math.nan})
    summary = {"p": p, "p_c": s.p_c, "drift": law.drift,
               "max_cyclic_rel_gap": float(np.max(np.abs(lhs - rhs) / rhs))}
    lo, hi = _window(args.window) if args.window else (max(args.kmax / 64, 1), args.kmax)
    try:
        k = np.arange(args.kmax + 1)
        summary["fit"] = fit_power_tail(list(zip(k[1:], h[1:])), (lo, hi)).to_json()
    except PlanarPercError as exc:
        summary["fit"] = {"error": exc.name}
    return Result(_clean(summary), rows, ["k", "hcut_exact", "lhs", "rhs"], ("k", "hcut_exact", True))


def cmd_halfplane(args) -> Result:
    from . import halfplane as hp
    from .walk_oracle import step_law
    s = _solved(args)
    if args.scan:
        grid = [float(x) for x in args.scan.split(",")]
        rows = hp.threshold_scan(s, grid, args.runs, args.cap, args.seed)
        cols = ["p", "runs", "survival", "stderr", "mean_tau_star_dying", "drift", "monotone_violation"]
        return Result(_clean({"p_c": s.p_c, "runs": args.runs, "cap": args.cap}), rows, cols,
                      ("p", "survival", False))
    p = _p_value(args, s)
    law = step_law(s, p)
    b = hp.run_batch(law, args.seed, args.runs, args.cap, tail_a=hp._tail_a(s))
    kidx = b.hcut_index
    rows = [{"run": i, "tau_star": int(b.tau_star[i]), "T_star": int(b.T_star[i]),
             "exit_zero": int(b.hit_zero[i]), "hcut_k": int(kidx[i]), "survived": int(b.survived_cap[i])}
            for i in range(b.runs)]
    summary = {"p": p, "p_c": s.p_c, "runs": b.runs, "cap": args.cap,
               "survival": float(b.survived_cap.mean()),
               "zero_exit_fraction": float(b.hit_zero.mean())}
    return Result(_clean(summary), rows, ["run", "tau_star", "T_star", "exit_zero", "hcut_k", "survived"],
                  ("run", "tau_star", False))


def cmd_finite(args) -> Result:
    from . import finite_peel as fp
    s = _solved(args)
    b = fp.run_theta_batch(s, args.p, args.runs, args.seed, args.cap)
    rows = [{"run": i, "theta": int(b.theta[i]), "perimeter_upper": int(b.theta[i]) + 1,
             "censored": int(b.censored[i]), "switch_perimeter": int(b.switch_perimeter[i])}
            for i in range(len(b.theta))]
    summary = {"p": args.p, "runs": args.runs, "censored_fraction": b.censored_fraction,
               "max_tutte_residual": b.max_tutte_residual,
               "median_theta": float(np.median(b.theta))}
    try:
        summary["fit"] = fp.theta_tail_fit(b).to_json()
    except PlanarPercError as exc:
        summary["fit"] = {"error": exc.name}
    return Result(_clean(summary), rows, ["run", "theta", "perimeter_upper", "censored", "switch_perimeter"],
                  ("run", "theta", False))


def cmd_gw(args) -> Result:
    from . import gw_trees
    s = _solved(args)
    b = gw_trees.sample_leaves(s.mu, args.runs, args.seed, args.node_cap)
    rows = [{"run": i, "leaves": int(b.leaves[i]), "nodes": int(b.nodes[i])} for i in range(len(b.leaves))]
    summary = {"runs": args.runs, "node_cap": args.node_cap, "censored_fraction": b.censored_fraction,
               "m_mu": s.m_mu, "alpha": s.alpha}
    try:
        rep = gw_trees.volume_tail(s.mu, args.runs, batch=b,
                                   n_grid=_window(args.window) if args.window else None)
        summary.update(pointed=rep.pointed.to_json(), unpointed=rep.unpointed.to_json())
    except PlanarPercError as exc:
        summary["fit"] = {"error": exc.name}
    return Result(_clean(summary), rows, ["run", "leaves", "nodes"], ("run", "leaves", False))


def _read_points(path, xcol, ycol):
    xs, ys = [], []
    try:
        with open(path) as fh:
            lines = [ln for ln in fh if ln.strip() and not ln.startswith("#")]
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    if not lines:
        raise ConfigError(f"{path} has no data")
    head = [h.strip() for h in lines[0].split(",")]
    try:
        ix = head.index(xcol) if xcol else 0
        iy = head.index(ycol) if ycol else 1
    except ValueError as exc:
        raise ConfigError(f"column not found in header {head}") from exc
    for ln in lines[1:]:
        parts = ln.strip().split(",")
        x, y = float(parts[ix]), float(parts[iy])
        if math.isfinite(x) and math.isfinite(y):
            xs.append(x)
            ys.append(y)
    return list(zip(xs, ys))


def cmd_fit(args) -> Result:
    from .stats import fit_exp_tail, fit_power_tail
    pts = _read_points(args.input, args.x, args.y)
    win = _window(args.window) if args.window else None
    fitter = fit_power_tail if args.kind == "power" else fit_exp_tail
    return Result(_clean(fitter(pts, win).to_json()))


def cmd_verify(args) -> Result:
    from . import acceptance
    if args.criteria:
        numbers = [int(x) for x in args.criteria.split(",")]
        bad = [n for n in numbers if n not in acceptance.CRITERIA]
        if bad:
            raise ConfigError(f"unknown criteria {bad}")
    else:
        if args.suite not in acceptance.SUITES:
            raise ConfigError(f"unknown suite {args.suite!r}; known: {', '.join(acceptance.SUITES)}")
        numbers = list(acceptance.SUITES[args.suite])
    results = []
    for n in numbers:
        kw = {"k_max": args.kmax} if n == 2 and args.kmax else {}
        res = acceptance.run_criterion(n, args.seed, **kw)
        print(res.line, file=sys.stderr, flush=True)
        results.append(res)
    # timings go to stderr only so that output files stay reproducible
    rows = [{"criterion": r.number, "name": r.name, "passed": int(r.passed), "summary": r.summary}
            for r in results]
    crit = [{k: v for k, v in r.to_json().items() if k != "elapsed"} for r in results]
    passed = all(r.passed for r in results)
    return Result(_clean({"passed": passed, "criteria": crit}), rows,
                  ["criterion", "name", "passed", "summary"], None, 0 if passed else 4)


# ---------------------------------------------------------------- output

def _csv_field(v) -> str:
    s = _fmt(v)
    if any(c in s for c in ',"\n'):
        s = '"' + s.replace('"', '""') + '"'
    return s


def render(result: Result, args) -> str:
    meta = {"version": VERSION_TAG, "config_hash": config_hash(args), "command": args.command}
    if args.format == "json":
        doc = {"meta": meta, "summary": result.summary}
        if result.rows and len(result.rows) <= JSON_ROW_LIMIT:
            doc["rows"] = _clean(result.rows)
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"
    buf = io.StringIO()
    buf.write(f"# planarperc {VERSION_TAG} command={args.command} config_hash={meta['config_hash']}\n")
    if result.rows:
        buf.write(",".join(result.columns) + "\n")
        for row in result.rows:
            buf.write(",".join(_csv_field(row.get(c, "")) for c in result.columns) + "\n")
    else:
        buf.write("key,value\n")
        for k, v in result.summary.items():
            buf.write(f"{k},{_csv_field(v)}\n")
    return buf.getvalue()


def gnuplot_script(result: Result, args, data_path: str) -> str:
    x, y, logs = result.plot
    cx, cy = result.columns.index(x) + 1, result.columns.index(y) + 1
    lines = [f"# planarperc {VERSION_TAG} config_hash={config_hash(args)}",
             "set datafile separator ','", "set key off",
             f"set xlabel '{x}'", f"set ylabel '{y}'"]
    if logs:
        lines.append("set logscale xy")
    lines.append(f"plot '{os.path.basename(data_path)}' every ::1 using {cx}:{cy} with points pt 7 ps 0.5")
    return "\n".join(lines) + "\n"


def _write(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


# ---------------------------------------------------------------- parser

def _add_weights(sp, p_flag=False):
    sp.add_argument("--preset", default="crit-quad",
                    help="crit-quad, subcrit-quad:<g>, quad:<g>, mixed, tuned:<a>")
    sp.add_argument("--weights", help="weight sequence JSON file (overrides --preset)")
    sp.add_argument("--l-max", type=int, default=4096, help="disk table size")
    if p_flag:
        sp.add_argument("--p", type=float, default=None, help="percolation parameter (default p_c)")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default=None, help="output file (default stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="json")
    common.add_argument("--threads", type=int, default=None,
                        help="accepted for compatibility; Monte Carlo kernels run on one thread")
    common.add_argument("--plot", action="store_true", help="write a gnuplot script next to a CSV --out")
    common.add_argument("--config", default=None, help="JSON file of option defaults")

    ap = argparse.ArgumentParser(prog="planarperc", description="Percolation on random planar maps.")
    ap.add_argument("--version", action="version", version=f"planarperc {VERSION_TAG}")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve", parents=[common], help="solve the admissibility equation")
    _add_weights(sp)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("classify", parents=[common], help="type a and alpha of a sequence")
    _add_weights(sp)
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("tune", parents=[common], help="tune the power family to criticality")
    sp.add_argument("--a", type=float, default=2.2)
    sp.add_argument("--k-cap", type=int, default=65536)
    sp.add_argument("--k-min", type=int, default=1)
    sp.add_argument("--l-max", type=int, default=4096)
    sp.set_defaults(func=cmd_tune)

    sp = sub.add_parser("disk", parents=[common], help="disk partition function table")
    _add_weights(sp)
    sp.add_argument("--method", choices=("series", "quadrature"), default="series")
    sp.add_argument("--enumerate", type=int, default=None, metavar="K",
                    help="enumerate maps with root face 2K instead of tabulating")
    sp.add_argument("--e-max", type=int, default=40)
    sp.add_argument("--method-enum", choices=("construction", "maps"), default="construction")
    sp.set_defaults(func=cmd_disk)

    sp = sub.add_parser("oracle", parents=[common], help="exact Hcut and cyclic-lemma tables")
    _add_weights(sp, p_flag=True)
    sp.add_argument("--kmax", type=int, default=4096)
    sp.add_argument("--cyclic-kmax", type=int, default=512)
    sp.add_argument("--window", default=None, help="fit window LO:HI")
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("halfplane", parents=[common], help="half-plane exploration Monte Carlo")
    _add_weights(sp, p_flag=True)
    sp.add_argument("--runs", type=int, default=10_000)
    sp.add_argument("--cap", type=int, default=10**6)
    sp.add_argument("--scan", default=None, help="comma-separated p grid for a threshold scan")
    sp.set_defaults(func=cmd_halfplane)

    sp = sub.add_parser("finite", parents=[common], help="finite-map (B, F) chain Monte Carlo")
    _add_weights(sp)
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--runs", type=int, default=10_000)
    sp.add_argument("--cap", type=int, default=10**6)
    sp.set_defaults(func=cmd_finite)

    sp = sub.add_parser("gw", parents=[common], help="Galton-Watson leaf counts")
    _add_weights(sp)
    sp.add_argument("--runs", type=int, default=10_000)
    sp.add_argument("--node-cap", type=int, default=10**7)
    sp.add_argument("--window", default=None, help="fit window LO:HI")
    sp.set_defaults(func=cmd_gw)

    sp = sub.add_parser("fit", parents=[common], help="power or exponential fit of a CSV")
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--kind", choices=("power", "exp"), default="power")
    sp.add_argument("--window", default=None, help="LO:HI (default [max/64, max])")
    sp.add_argument("--x", default=None, help="x column name (default first column)")
    sp.add_argument("--y", default=None, help="y column name (default second column)")
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("verify", parents=[common], help="run acceptance checks")
    sp.add_argument("--suite", default="all")
    sp.add_argument("--criteria", default=None, help="comma-separated criterion numbers")
    sp.add_argument("--kmax", type=int, default=None, help="k range of the Feller check")
    sp.set_defaults(func=cmd_verify)
    return ap


def _parse(argv):
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.config:
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot load config: {exc}") from exc
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a JSON object")
        # config entries act as defaults; explicit flags still win
        probe = build_parser()
        subs = next(a for a in probe._actions if isinstance(a, argparse._SubParsersAction))
        sp = subs.choices[args.command]
        known = {a.dest for a in sp._actions}
        unknown = sorted(set(k.replace("-", "_") for k in cfg) - known)
        if unknown:
            raise ConfigError(f"unknown config keys {unknown}")
        sp.set_defaults(**{k.replace("-", "_"): v for k, v in cfg.items()})
        args = probe.parse_args(argv)
    return args


def run(argv=None) -> int:
    try:
        args = _parse(argv)
    except SystemExit as exc:  # argparse reports usage errors with exit code 2
        return int(exc.code or 0)
    except ConfigError as exc:
        print(f"{exc.name}: {exc}", file=sys.stderr)
        return exc.exit_code
    try:
        result = args.func(args)
    except PlanarPercError as exc:
        print(f"{exc.name}: {exc}", file=sys.stderr)
        return exc.exit_code
    text = render(result, args)
    try:
        _write(text, args.out)
        if args.plot and args.out and args.format == "csv" and result.plot and result.rows:
            _write(gnuplot_script(result, args, args.out), os.path.splitext(args.out)[0] + ".gp")
    except OSError as exc:
        print(f"ConfigError: cannot write output: {exc}", file=sys.stderr)
        return 2
    return result.exit_code


def main() -> None:
    sys.exit(run())
