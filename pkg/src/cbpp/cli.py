"""Command-line entry point.

Exit codes: 0 success, 1 infeasible / verification failure / refused
input, 2 usage error.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

from . import bench
from .core import verify_solution
from .errors import CBPPError, GuardError
from .fileio import (parse_bpp_bins, parse_bpp_instance, read_instance, read_solution, format_instance,
                     write_solution)

log = logging.getLogger("cbpp")


def _out_dir(value: str | None) -> Path:
    return Path(value) if value else bench.default_output_dir()


def _fmt(v) -> str:
    if v is None or (isinstance(v, float) and not math.isfinite(v)):
        return "--"
    return str(int(v)) if float(v).is_integer() else f"{v:.6f}"


def cmd_generate(args) -> int:
    out = _out_dir(args.out)
    if args.family == "bpplib-adapt":
        if not (args.bpp and args.bins):
            print("bpplib-adapt needs --bpp and --bins", file=sys.stderr)
            return 2
        lengths, capacity = parse_bpp_instance(Path(args.bpp).read_text())
        bins = parse_bpp_bins(Path(args.bins).read_text())
        inst = bench.adapt_bpplib(lengths, capacity, bins)
        out.mkdir(parents=True, exist_ok=True)
        target = out / (Path(args.bpp).stem + "_cbpp.txt")
        target.write_text(format_instance(inst, [f"class bpplib-adapt({Path(args.bpp).stem})",
                                                 f"donor_bins {len(bins)}"]))
        print(f"wrote {target} ({inst.m} items, {inst.total_copies} copies, donor bins {len(bins)})")
        return 0
    if args.family == "uniform":
        Ms = args.M or bench.UNIFORM_M
        Ls = args.L or bench.UNIFORM_L
        Qs = args.Q or bench.UNIFORM_Q
        Ws = [tuple(w.split(",")) for w in args.W] if args.W else bench.UNIFORM_W
        configs = [bench.GeneratorConfig("uniform", M, L, Q, W, args.seed, r)
                   for M in Ms for L in Ls for Q in Qs for W in Ws for r in range(args.replicates)]
    else:
        Ms = args.M or bench.ZIPF_M
        Ls = args.L or bench.ZIPF_L
        W = tuple(args.W[0].split(",")) if args.W else bench.ZIPF_W
        configs = [bench.GeneratorConfig("zipf", M, L, None, W, args.seed, r)
                   for M in Ms for L in Ls for r in range(args.replicates)]
    paths = bench.write_set(configs, out)
    print(f"wrote {len(paths)} {args.family} instances to {out}")
    return 0


def _print_result(name, model, out) -> None:
    r = out.result
    gap = r.gap
    print(f"instance {name}  model {model}")
    print(f"status   {r.status}")
    print(f"lb       {_fmt(r.lb)}")
    print(f"ub       {_fmt(r.ub)}")
    print(f"gap      {'--' if gap is None or r.incumbent is None else f'{gap:.6f}'}")
    print(f"nodes    {r.nodes}")
    print(f"time_ms  {r.elapsed_ms}")


def cmd_solve(args) -> int:
    from .pipeline import VerificationFailed, solve_instance

    inst = read_instance(args.instance)
    try:
        out = solve_instance(inst, args.model, not args.no_normal_patterns, args.time_limit_ms,
                             args.node_limit, args.backend)
    except VerificationFailed as exc:
        print(f"verification failed: {exc}")
        return 1
    _print_result(Path(args.instance).stem, args.model, out)
    if out.solution is None:
        return 1
    target = Path(args.solution) if args.solution else \
        _out_dir(args.out) / f"{Path(args.instance).stem}.{args.model}.sol"
    target.parent.mkdir(parents=True, exist_ok=True)
    write_solution(target, out.solution)
    print(f"solution {target}")
    return 0


def cmd_verify(args) -> int:
    inst = read_instance(args.instance)
    sol = read_solution(args.solution)
    rep = verify_solution(inst, sol, args.mode)
    if rep.ok:
        print(f"valid: {rep.n_bins} bins")
        if args.mode == "existential" and args.show_witness:
            for w in rep.witnesses:
                print(" ".join(map(str, w.ordered)))
        return 0
    print(f"invalid: {len(rep.violations)} violation(s)")
    for v in rep.violations:
        print(f"  {v}")
    return 1


def cmd_export(args) -> int:
    from .bounds import ff_heuristic, lower_bound
    from .lpformat import emit_lp
    from .pipeline import build

    inst = read_instance(args.instance)
    _, milp = build(inst, args.model, not args.no_normal_patterns)
    if args.bounded:
        milp.set_bounds(milp.z, lb=lower_bound(inst), ub=len(ff_heuristic(inst)))
    target = Path(args.lp) if args.lp else _out_dir(args.out) / f"{Path(args.instance).stem}.{args.model}.lp"
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(emit_lp(milp))
    print(f"wrote {target} ({milp.num_vars} columns, {len(milp.constraints)} rows)")
    return 0


def cmd_bench(args) -> int:
    models = [m.strip() for m in args.models.split(",") if m.strip()]
    if any(m not in ("ca", "ml") for m in models):
        print(f"unknown model in {args.models!r}", file=sys.stderr)
        return 2
    out = _out_dir(args.out)
    report = bench.run_bench(args.instance_dir, models, args.time_limit_ms, args.workers,
                             not args.no_normal_patterns, out, figures=not args.no_figures)
    print(f"{'class':<40} {'model':<5} {'n':>4} {'opt':>4} {'time_ms':>10} {'gap':>9}")
    for s in report.summary():
        gap = "--" if s["mean_gap"] is None else f"{s['mean_gap']:.4f}"
        print(f"{s['class']:<40} {s['model']:<5} {s['instances']:>4} {s['opt']:>4} "
              f"{s['mean_time_ms']:>10.1f} {gap:>9}")
    print(f"results in {out}")
    return 0


def cmd_oracle(args) -> int:
    from .oracle import brute_force_opt

    inst = read_instance(args.instance)
    try:
        value, sol = brute_force_opt(inst)
    except GuardError as exc:
        print(f"refused: {exc}")
        return 1
    print(f"optimum {value}")
    for b in sol.bins:
        print(" ".join(map(str, b.ordered)))
    if args.solution:
        write_solution(args.solution, sol)
    return 0


def cmd_lp_solve(args) -> int:
    from .solver import SolveConfig, format_solution_text, solve_lp_file

    model, res = solve_lp_file(Path(args.lp_file).read_text(), SolveConfig(time_limit_ms=args.time_limit_ms))
    Path(args.solution_file).write_text(format_solution_text(model, res))
    print(f"status {res.status} objective {_fmt(res.ub)}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cbpp", description="Exact solvers for colored bin packing.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write benchmark instance files")
    g.add_argument("--family", choices=["uniform", "zipf", "bpplib-adapt"], required=True)
    g.add_argument("--out", help="output directory (default $CBPP_OUTPUT_DIR or .)")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--replicates", type=int, default=bench.REPLICATES)
    g.add_argument("--M", type=int, action="append", help="item copies (repeatable)")
    g.add_argument("--L", type=int, action="append", help="capacity (repeatable)")
    g.add_argument("--Q", type=int, action="append", help="colors, uniform family (repeatable)")
    g.add_argument("--W", action="append", help="relative length interval 'lo,hi' (repeatable)")
    g.add_argument("--bpp", help="bin packing instance file (count, capacity, lengths)")
    g.add_argument("--bins", help="donor solution: one bin of lengths per line")
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("solve", help="solve an instance exactly")
    s.add_argument("instance")
    s.add_argument("--model", choices=["ca", "ml"], default="ca")
    s.add_argument("--no-normal-patterns", action="store_true", help="use every point 0..L")
    s.add_argument("--time-limit-ms", type=int, default=None)
    s.add_argument("--node-limit", type=int, default=None)
    s.add_argument("--backend", default="builtin", type=_backend, help="builtin or external:<command>")
    s.add_argument("--solution", help="solution file to write")
    s.add_argument("--out", help="output directory for the solution file")
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("verify", help="check a solution file")
    v.add_argument("instance")
    v.add_argument("solution")
    v.add_argument("--mode", choices=["ordered", "existential"], default="ordered")
    v.add_argument("--show-witness", action="store_true")
    v.set_defaults(func=cmd_verify)

    e = sub.add_parser("export", help="write the model as an LP file")
    e.add_argument("instance")
    e.add_argument("--model", choices=["ca", "ml"], default="ca")
    e.add_argument("--no-normal-patterns", action="store_true")
    e.add_argument("--bounded", action="store_true", help="apply the combinatorial bounds on z")
    e.add_argument("--lp", help="LP file to write")
    e.add_argument("--out", help="output directory")
    e.set_defaults(func=cmd_export)

    b = sub.add_parser("bench", help="solve a directory of instances and write CSV + figures")
    b.add_argument("instance_dir")
    b.add_argument("--models", default="ca,ml")
    b.add_argument("--time-limit-ms", type=int, default=bench.DEFAULT_TIME_LIMIT_MS)
    b.add_argument("--workers", type=int, default=1)
    b.add_argument("--no-normal-patterns", action="store_true")
    b.add_argument("--no-figures", action="store_true")
    b.add_argument("--out", help="output directory")
    b.set_defaults(func=cmd_bench)

    o = sub.add_parser("oracle", help="brute-force optimum of a tiny instance")
    o.add_argument("instance")
    o.add_argument("--solution")
    o.set_defaults(func=cmd_oracle)

    lp = sub.add_parser("lp-solve", help="solve an LP file with the built-in solver")
    lp.add_argument("lp_file")
    lp.add_argument("solution_file")
    lp.add_argument("--time-limit-ms", type=int, default=None)
    lp.set_defaults(func=cmd_lp_solve)
    return p


def _backend(value: str) -> str:
    if value == "builtin" or (value.startswith("external:") and len(value) > len("external:")):
        return value
    raise argparse.ArgumentTypeError("expected 'builtin' or 'external:<command>'")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (OSError, CBPPError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
