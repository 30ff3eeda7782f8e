"""Command-line entry point: ``netregret {run,sweep,graph,verify}``.

Exit codes: 0 success, 1 a bound or verification check failed, 2 usage or
configuration error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import sys
from pathlib import Path

import numpy as np

from . import analysis
from . import graph as gr
from .config import ExperimentConfig, build_experiment, build_graph_from_spec, parse_graph_spec
from .errors import ExactSolverLimitError, SimulationError, ValidationError
from .simulator import monte_carlo, report_csv, report_row, run_simulation, replicate_seed, write_trace_csv

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _fmt(x, digits=4):
    if x is None:
        return "n/a"
    if isinstance(x, float):
        return f"{x:.{digits}f}"
    return str(x)


def _apply_overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    changes = {}
    if getattr(args, "seed", None) is not None:
        changes["seed"] = args.seed
    if getattr(args, "replicates", None) is not None:
        changes["replicates"] = args.replicates
    if getattr(args, "out_dir", None) is not None:
        changes["out_dir"] = args.out_dir
    new = dataclasses.replace(cfg, **changes)
    from .config import validate_config_dict

    validate_config_dict(new.to_dict())
    return new


def _out_dir(cfg: ExperimentConfig) -> Path:
    out = Path(cfg.out_dir)
    if not out.is_absolute():
        out = Path.cwd() / out
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_run(args) -> int:
    cfg = _apply_overrides(ExperimentConfig.load(args.config), args)
    ex = build_experiment(cfg)
    report = monte_carlo(ex, cfg.T, cfg.replicates, cfg.seed)
    out = _out_dir(cfg)
    h = cfg.config_hash()
    (out / "report.csv").write_text(report_csv([report_row(report, h, ex.graph.n)]))
    if args.trace:
        trace = run_simulation(ex.graph, ex.geometry, ex.policy, ex.environment, ex.eta, cfg.T,
                               replicate_seed(cfg.seed, 0))
        write_trace_csv(trace, out / "trace.csv")
    verdict = report.within_bound
    print(f"config {h}  seed {cfg.seed}  T={cfg.T}  replicates={cfg.replicates}  eta={report.eta:.6g}")
    print(f"regret mean {report.mean:.4f} +/- {report.se:.4f} (se), min {report.min:.4f}, max {report.max:.4f}")
    c = report.constants
    print(f"alpha={_fmt(c['alpha'])}  cover_size={c['cover_size']}  Q={_fmt(c['Q'])}")
    print(f"bound[alpha]={_fmt(report.bounds['alpha'])}  bound[cover]={_fmt(report.bounds['cover_size'])}"
          f"  bound[Q]={_fmt(report.bounds['Q'])}")
    if verdict is None:
        print("theory bound: not applicable to this configuration")
    else:
        status = "OK" if verdict else "VIOLATED"
        print(f"theory bound ({report.multiplier_kind}) {report.theory_bound:.4f}: {status}")
    print(f"wrote {out / 'report.csv'}")
    return EXIT_OK if verdict in (None, True) else EXIT_FAIL


def _fit_slope(xs, ys) -> float:
    xs, ys = np.asarray(xs, float), np.asarray(ys, float)
    if np.any(xs <= 0) or np.any(ys <= 0):
        return float("nan")
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


def cmd_sweep(args) -> int:
    cfg = _apply_overrides(ExperimentConfig.load(args.config), args)
    points = []
    if args.horizons:
        horizons = [int(x) for x in args.horizons.split(",") if x.strip()]
        if len(horizons) < 3:
            raise ValidationError(f"sweep needs at least 3 points, got {len(horizons)}")
        for T in horizons:
            c = dataclasses.replace(cfg, T=T)
            rep = monte_carlo(build_experiment(c), T, c.replicates, c.seed)
            points.append(("T", T, T, rep))
    else:
        specs = args.graphs
        if len(specs) < 3:
            raise ValidationError(f"sweep needs at least 3 points, got {len(specs)}")
        for text in specs:
            spec = parse_graph_spec(text)
            c = dataclasses.replace(cfg, graph=spec)
            ex = build_experiment(c)
            try:
                alpha = gr.independence_number_exact(ex.graph)
            except ExactSolverLimitError:
                if not args.heuristic:
                    raise
                alpha = len(gr.maximal_independent_set(ex.graph))
            rep = monte_carlo(ex, c.T, c.replicates, c.seed)
            points.append(("alpha", alpha, c.T, rep))
    slope = _fit_slope([p[1] for p in points], [p[3].mean for p in points])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["axis", "x", "T", "regret_mean", "regret_se", "theory_bound", "seed"])
    for axis, x, T, rep in points:
        w.writerow([axis, x, T, repr(rep.mean), repr(rep.se), "" if rep.theory_bound is None else repr(rep.theory_bound), cfg.seed])
    out = _out_dir(cfg)
    (out / "sweep.csv").write_text(buf.getvalue())
    print(f"{'x':>10} {'T':>8} {'mean regret':>12} {'se':>9} {'bound':>10}")
    for axis, x, T, rep in points:
        print(f"{x:>10} {T:>8} {rep.mean:>12.4f} {rep.se:>9.4f} {_fmt(rep.theory_bound):>10}")
    print(f"fitted slope of log(mean regret) vs log({points[0][0]}): {slope:.4f}")
    print(f"wrote {out / 'sweep.csv'}")
    return EXIT_OK


def cmd_graph(args) -> int:
    spec = parse_graph_spec(args.spec)
    g = build_graph_from_spec(spec)
    try:
        alpha = str(gr.independence_number_exact(g, limit=args.limit))
    except ExactSolverLimitError:
        if not args.heuristic:
            raise
        alpha = f"{len(gr.maximal_independent_set(g))} (heuristic lower bound)"
    rows = [
        ("n", g.n),
        ("m", g.m),
        ("alpha", alpha),
        ("greedy_cover", len(gr.greedy_clique_cover(g))),
        ("greedy_dominating", len(gr.greedy_dominating_set(g))),
        ("sum_inv_closed_nbhd", f"{gr.inverse_neighborhood_sum(g):.6f}"),
    ]
    for k, v in rows:
        print(f"{k:<20} {v}")
    return EXIT_OK


def cmd_verify(args) -> int:
    rep = analysis.verify_constants(seed=args.seed, inject_fault=args.inject_fault)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rep.write_csv(out / "verification.csv")
    print(rep.summary())
    print(f"wrote {out / 'verification.csv'}")
    return EXIT_OK if rep.ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="netregret", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("config", help="experiment config (JSON)")
        sp.add_argument("--seed", type=int, help="override the master seed")
        sp.add_argument("--replicates", type=int, help="override the replicate count")
        sp.add_argument("--out-dir", help="override the output directory")

    r = sub.add_parser("run", help="run one experiment and write report.csv")
    common(r)
    r.add_argument("--trace", action="store_true", help="also write the per-round trace of replicate 0")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="scaling study over horizons or graphs")
    common(s)
    axis = s.add_mutually_exclusive_group(required=True)
    axis.add_argument("--horizons", help="comma-separated list of T values")
    axis.add_argument("--graphs", nargs="+", help="graph specs such as cliques:count=4,size=4")
    s.add_argument("--heuristic", action="store_true", help="allow a labeled heuristic alpha for large graphs")
    s.set_defaults(func=cmd_sweep)

    g = sub.add_parser("graph", help="print graph metrics")
    g.add_argument("spec", help="edge-list path or kind:key=value,...")
    g.add_argument("--heuristic", action="store_true", help="allow a labeled heuristic alpha above the exact limit")
    g.add_argument("--limit", type=int, default=gr.EXACT_ALPHA_LIMIT, help="exact solver vertex limit")
    g.set_defaults(func=cmd_graph)

    v = sub.add_parser("verify", help="run the randomized verification corpus")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--out-dir", default=".")
    v.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValidationError, SimulationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
