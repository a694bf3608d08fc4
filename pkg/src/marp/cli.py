"""``marp`` command-line entry point.

Exit codes: 0 ok, 1 reduction check failed, 2 usage, 3 validation/parse,
4 size limit, 5 I/O.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from marp import __version__
from marp.coverage import compute_coverage, write_coverage_csv
from marp.errors import (EmptySelectionError, InsufficientDataError, InvalidParameterError, MarpError,
                         NoPathError, ParseError, SizeLimitError, ValidationError)
from marp.instance import generate_instance, generate_network, load_instance, save_instance
from marp.metrics import format_metrics_csv, full_report, report_row
from marp.qubo import PenaltyConfig, build_qubo, export_qubo, import_qubo
from marp.reduction import load_wsp, reduce_wsp_to_marp, solve_wsp_via_marp, wsp_brute_force
from marp.solvers import default_sa_params, load_solution, save_solution, solve_exact, solve_greedy, solve_sa
from marp.sweep import (SweepConfig, binned_frontiers, knee_point, pareto_csv, points_from_metrics_csv,
                        run_sweep, sweep_csv)

EXIT_OK, EXIT_CHECK_FAILED, EXIT_USAGE, EXIT_VALIDATION, EXIT_SIZE, EXIT_IO = 0, 1, 2, 3, 4, 5


class UsageError(MarpError):
    pass


def _input(path: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"input file not found: {path}")
    return p


def _write(path, text: str) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(text, encoding="utf-8", newline="\n")


def _write_manifest(path: Path, args, argv, inputs, outputs, started: float, seeds=()) -> None:
    flags = {k: v for k, v in sorted(vars(args).items()) if k not in ("func",)}
    doc = {
        "command": args.command,
        "argv": list(argv),
        "flags": flags,
        "seeds": list(seeds),
        "tool_version": __version__,
        "inputs": [str(p) for p in inputs],
        "outputs": [str(p) for p in outputs],
        "wall_time_s": time.perf_counter() - started,
    }
    _write(path, json.dumps(doc, indent=2) + "\n")


def _manifest_for(out: str) -> Path:
    return Path(f"{out}.manifest.json")


# ---------------------------------------------------------------------------
# commands


def cmd_generate(args, argv, started):
    if args.vehicles < 1:
        raise UsageError("--vehicles must be >= 1")
    if args.size < 2:
        raise UsageError("--size must be >= 2")
    net = generate_network(args.kind, args.size, args.seed)
    label = args.radius_label if args.radius_label is not None else f"{args.kind}{args.size}"
    inst = generate_instance(net, args.vehicles, args.seed, label)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    save_instance(inst, args.out)
    _write_manifest(_manifest_for(args.out), args, argv, [], [args.out], started, [args.seed])
    print(f"wrote {args.out}: {net.n_nodes} nodes, {len(net.edges)} edges, {inst.n_vehicles} vehicles")


def _penalty_from_args(regime: str, value) -> PenaltyConfig:
    if regime == "custom" and value is None:
        raise UsageError("--regime custom requires --lambda")
    if regime == "custom" and not value > 0:
        raise UsageError("--lambda must be positive")
    return PenaltyConfig(regime, value if regime == "custom" else None)


def cmd_build(args, argv, started):
    penalty = _penalty_from_args(args.regime, args.lam)
    inst = load_instance(_input(args.instance))
    stats = compute_coverage(inst)
    model = build_qubo(stats, penalty)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    export_qubo(model, args.out)
    outputs = [args.out]
    if args.coverage_csv:
        write_coverage_csv(stats, args.coverage_csv)
        outputs.append(args.coverage_csv)
    _write_manifest(_manifest_for(args.out), args, argv, [args.instance], outputs, started)
    print(f"{model.lambda_used:.6g}")


def cmd_solve(args, argv, started):
    model = import_qubo(_input(args.qubo))
    if args.solver == "exact":
        sol = solve_exact(model)
    elif args.solver == "greedy":
        sol = solve_greedy(model)
    else:
        params = default_sa_params(model, args.seed, args.num_reads, args.sweeps)
        sol = solve_sa(model, params)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    save_solution(sol, args.out, record_time=args.record_time)
    _write_manifest(_manifest_for(args.out), args, argv, [args.qubo], [args.out], started, [args.seed])
    print(f"energy={sol.energy!r} selected={sum(sol.x)}/{len(sol.x)}")


def cmd_evaluate(args, argv, started):
    penalty = _penalty_from_args(args.lambda_regime, args.lam)
    inst = load_instance(_input(args.instance))
    sol = load_solution(_input(args.solution))
    if len(sol.x) != inst.n_vehicles:
        raise ValidationError(f"solution has {len(sol.x)} entries, instance has {inst.n_vehicles} vehicles")
    stats = compute_coverage(inst)
    model = build_qubo(stats, penalty)
    rep = full_report(inst, stats, model, sol)
    row = report_row(rep, model, sol.solver, sol.wall_time if args.record_time else 0.0)
    _write(args.out, format_metrics_csv([row]))
    _write_manifest(_manifest_for(args.out), args, argv, [args.instance, args.solution], [args.out], started)
    if rep.n_selected == 0:
        print("empty selection: usage-based metrics reported as 0")
    print(f"pct_cov={rep.pct_coverage:.6g} pct_ov={rep.pct_overlap:.6g} energy={rep.objective_energy!r}")


def _parse_bins(text: str):
    bins = []
    for part in text.split(","):
        lo, sep, hi = part.strip().partition("-")
        try:
            bins.append((int(lo), int(hi if sep else lo)))
        except ValueError:
            raise UsageError(f"bad bin {part!r}; expected LO-HI") from None
    return tuple(bins)


def _frontier_report(frontiers) -> None:
    for label, front in frontiers.items():
        if len(front) >= 3:
            k = knee_point(front)
            print(f"bin {label}: {len(front)} frontier points, knee pct_cov={k.pct_cov:.6g} pct_ov={k.pct_ov:.6g}")
        else:
            print(f"bin {label}: {len(front)} frontier points, no knee")


def cmd_sweep(args, argv, started):
    cfg_path = _input(args.config)
    try:
        doc = json.loads(cfg_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{args.config}: invalid JSON: {exc}") from None
    config = SweepConfig.from_dict(doc)
    records = run_sweep(config)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write(out / "metrics.csv", sweep_csv(records, record_time=args.record_time))
    frontiers = binned_frontiers(records, config.bins)
    _write(out / "pareto.csv", pareto_csv(frontiers))
    _write_manifest(out / "manifest.json", args, argv, [args.config],
                    [out / "metrics.csv", out / "pareto.csv"], started, config.seeds)
    print(f"{len(records)} rows")
    _frontier_report(frontiers)


def cmd_pareto(args, argv, started):
    points = points_from_metrics_csv(_input(args.rows).read_text(encoding="utf-8"))
    bins = _parse_bins(args.bins) if args.bins else tuple((f, f) for f in sorted({p.fleet_size for p in points}))
    frontiers = binned_frontiers(points, bins)
    _write(args.out, pareto_csv(frontiers))
    _write_manifest(_manifest_for(args.out), args, argv, [args.rows], [args.out], started)
    _frontier_report(frontiers)


def cmd_reduce_wsp(args, argv, started):
    wsp = load_wsp(_input(args.wsp))
    stats, lam = reduce_wsp_to_marp(wsp)
    lines = [f"m={wsp.m} |U|={wsp.universe_size} overlapping_pairs={len(stats.overlaps)} lambda={lam}"]
    code = EXIT_OK
    if args.check:
        selected, weight = solve_wsp_via_marp(wsp)
        _, oracle = wsp_brute_force(wsp)
        disjoint = all(not (wsp.sets[i] & wsp.sets[j]) for i in selected for j in selected if i < j)
        ok = disjoint and weight == oracle
        lines.append(f"{'PASS' if ok else 'FAIL'} weight {weight:g} (brute force {oracle:g}) "
                     f"selected {sorted(selected)}")
        code = EXIT_OK if ok else EXIT_CHECK_FAILED
    text = "\n".join(lines) + "\n"
    print(text, end="")
    if args.out:
        _write(args.out, text)
        _write_manifest(_manifest_for(args.out), args, argv, [args.wsp], [args.out], started)
    return code


def cmd_replay(args, argv, started):
    doc = json.loads(_input(args.manifest).read_text(encoding="utf-8"))
    if "argv" not in doc:
        raise ParseError(f"{args.manifest}: missing field 'argv'")
    return main(doc["argv"])


# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="marp", description="Vehicle selection as a QUBO: build, solve, evaluate, sweep.")
    parser.add_argument("--version", action="version", version=f"marp {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("generate", help="synthetic network and vehicle routes")
    p.add_argument("--kind", choices=("grid", "random_geometric"), default="grid")
    p.add_argument("--size", type=int, required=True)
    p.add_argument("--vehicles", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--radius-label", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("build", help="QUBO coordinate file from an instance")
    p.add_argument("--instance", required=True)
    p.add_argument("--regime", choices=("soft", "hard", "custom"), default="soft")
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--coverage-csv", default=None, help="also dump u_i and c_ij rows")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("solve", help="minimise a QUBO file")
    p.add_argument("--qubo", required=True)
    p.add_argument("--solver", choices=("exact", "sa", "greedy"), default="sa")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--num-reads", type=int, default=100)
    p.add_argument("--sweeps", type=int, default=1000)
    p.add_argument("--record-time", action="store_true", help="write measured wall time instead of 0")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("evaluate", help="metrics CSV row for a solution")
    p.add_argument("--instance", required=True)
    p.add_argument("--solution", required=True)
    p.add_argument("--lambda-regime", choices=("soft", "hard", "custom"), default="soft")
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--record-time", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sweep", help="lambda x fleet-size sweep with Pareto output")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--record-time", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("pareto", help="binned Pareto frontiers from a metrics CSV")
    p.add_argument("--rows", required=True)
    p.add_argument("--bins", default=None, help="comma-separated LO-HI fleet-size ranges")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_pareto)

    p = sub.add_parser("reduce-wsp", help="weighted set packing through the QUBO")
    p.add_argument("--wsp", required=True)
    p.add_argument("--check", action="store_true", help="compare against brute force")
    p.add_argument("--out", default=None, help="also write the report to this file")
    p.set_defaults(func=cmd_reduce_wsp)

    p = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    p.add_argument("manifest")
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    started = time.perf_counter()
    try:
        code = args.func(args, argv, started)
    except (UsageError, InvalidParameterError) as exc:
        print(f"marp {args.command}: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, ValidationError, NoPathError, EmptySelectionError, InsufficientDataError) as exc:
        print(f"marp {args.command}: invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except SizeLimitError as exc:
        print(f"marp {args.command}: size limit: {exc}", file=sys.stderr)
        return EXIT_SIZE
    except OSError as exc:
        print(f"marp {args.command}: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK if code is None else code


if __name__ == "__main__":
    sys.exit(main())
