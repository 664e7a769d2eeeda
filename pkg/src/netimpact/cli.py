"""Command-line front end.

Exit codes: 0 success, 1 validation error, 2 computational error
(overflow, non-convergence, unstable step), 3 I/O error.
"""

from __future__ import annotations

import argparse
import contextlib
import sys

from . import scenario as sc
from .analytic import DEFAULT_TOLERANCE
from .errors import DivergentHorizon, ModelOverflow, NotConverged, StepTooLarge, ValidationError
from .graph import load_edgelist
from .simulate import SimConfig
from .sir import SirParams, basic_reproduction_number, final_size_residual, integrate_sir, threshold_report


EXIT_OK, EXIT_VALIDATION, EXIT_COMPUTE, EXIT_IO = 0, 1, 2, 3


def _global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--csv", metavar="PATH", default=default,
                        help="write CSV to PATH ('-' for stdout) instead of a table")
    parser.add_argument("--tolerance", type=float, metavar="T",
                        default=argparse.SUPPRESS if suppress else DEFAULT_TOLERANCE,
                        help=f"regime classification tolerance (default {DEFAULT_TOLERANCE:g})")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="netimpact",
        description="Network-amplified expected impact of an initiating act.")
    _global_flags(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common], help="closed-form report for scenario files or presets")
    p.add_argument("scenarios", nargs="+", metavar="FILE", help="scenario file or preset name")

    p = sub.add_parser("sweep", parents=[common], help="evaluate a parameter grid")
    p.add_argument("scenario", metavar="FILE")
    p.add_argument("--axis", action="append", required=True, metavar="NAME=SPEC",
                   help="name=start:stop:count or name=v1,v2,... (repeatable; first axis outermost)")
    p.add_argument("--max-rows", type=int, default=sc.DEFAULT_MAX_ROWS)

    p = sub.add_parser("levers", parents=[common], help="critical lever values and depth cap")
    p.add_argument("scenario", metavar="FILE")
    p.add_argument("--budget", type=float, help="multiplier budget for the depth cap")

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo check against the analytic total")
    p.add_argument("scenario", metavar="FILE")
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--cap", type=int, default=1_000_000, help="max nodes per trial")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--graph-file", metavar="PATH", help="simulate an activate-once cascade on this edge list")
    p.add_argument("--seed-node", type=int)

    p = sub.add_parser("graph", parents=[common], help="walk-sum total and Neumann margin on a graph")
    p.add_argument("scenario", metavar="FILE")
    p.add_argument("--graph-file", metavar="PATH")
    p.add_argument("--seed-node", type=int)

    p = sub.add_parser("sir", parents=[common], help="integrate the SIR model and report the threshold")
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--population", type=float, required=True)
    p.add_argument("--i0", type=float, required=True)
    p.add_argument("--t-max", type=float, required=True)
    p.add_argument("--step", type=float, required=True)
    p.add_argument("--behavioral-r", type=float, help="compare against this behavioural ratio")

    sub.add_parser("presets", parents=[common], help="list shipped scenarios")
    return parser


@contextlib.contextmanager
def _output(path: str | None):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def _emit_csv(args, rows, columns) -> None:
    with _output(args.csv) as out:
        sc.write_csv(rows, columns, out)


def _with_graph(loaded: sc.LoadedScenario, graph_file: str | None, seed_node: int | None):
    spec = loaded.spec
    if graph_file is not None:
        if seed_node is None:
            seed_node = spec.seed_node if spec.seed_node is not None else 0
        g = load_edgelist(graph_file)
        spec = spec.replace(graph_path=str(graph_file), seed_node=seed_node)
    else:
        if seed_node is not None and spec.graph_path is not None:
            spec = spec.replace(seed_node=seed_node)
        g = sc.load_graph_for(sc.LoadedScenario(spec, loaded.base_dir))
    return spec, g


def cmd_analyze(args) -> int:
    reports = []
    for source in args.scenarios:
        loaded = sc.load_scenario(source)
        reports.append(sc.run_scenario(loaded.spec, args.tolerance, sc.load_graph_for(loaded)))
    if args.csv is not None:
        _emit_csv(args, (sc.report_row(r) for r in reports), sc.ANALYZE_COLUMNS)
    else:
        sys.stdout.write("\n".join(sc.format_report(r) for r in reports))
    return EXIT_OK


def cmd_sweep(args) -> int:
    loaded = sc.load_scenario(args.scenario)
    axes = tuple(sc.Axis.parse(a) for a in args.axis)
    spec = sc.SweepSpec(loaded.spec, axes, args.max_rows)
    with _output(args.csv) as out:
        sc.sweep_grid(spec, out, args.tolerance)
    return EXIT_OK


def cmd_levers(args) -> int:
    loaded = sc.load_scenario(args.scenario)
    rep = sc.lever_report(loaded.spec, args.budget, args.tolerance)
    if args.csv is not None:
        _emit_csv(args, sc.lever_rows(rep), sc.LEVER_COLUMNS)
    else:
        sys.stdout.write(sc.format_lever_report(rep))
    return EXIT_OK


def cmd_simulate(args) -> int:
    loaded = sc.load_scenario(args.scenario)
    spec, g = _with_graph(loaded, args.graph_file, args.seed_node)
    cfg = SimConfig(trials=args.trials, master_seed=args.seed, max_nodes_per_trial=args.cap,
                    workers=args.workers)
    rep = sc.simulate_command(spec, cfg, g)
    if args.csv is not None:
        _emit_csv(args, [sc.simulation_row(rep)], sc.SIM_COLUMNS)
    else:
        sys.stdout.write(sc.format_simulation(rep))
    return EXIT_OK


GRAPH_COLUMNS = ("label", "seed_node", "nodes", "arcs", "w", "alpha", "q", "d", "graph_total", "rho", "margin",
                 "convergent", "overflow")


def cmd_graph(args) -> int:
    loaded = sc.load_scenario(args.scenario)
    spec, g = _with_graph(loaded, args.graph_file, args.seed_node)
    if g is None:
        raise ValidationError("graph needs --graph-file or a scenario with a graph entry", key="graph")
    rep = sc.run_scenario(spec, args.tolerance, g)
    if args.csv is not None:
        s, p = rep.graph, rep.params
        row = {"label": rep.label, "seed_node": s.seed_node, "nodes": s.nodes, "arcs": s.arcs, "w": p.w,
               "alpha": p.alpha, "q": p.q, "d": p.d, "graph_total": s.total, "rho": s.rho, "margin": s.margin,
               "convergent": s.convergent, "overflow": s.overflow}
        _emit_csv(args, [row], GRAPH_COLUMNS)
    else:
        sys.stdout.write(sc.format_report(rep))
    return EXIT_OK


def cmd_sir(args) -> int:
    p = SirParams(beta=args.beta, gamma=args.gamma, population=args.population, i0=args.i0)
    traj = integrate_sir(p, args.t_max, args.step)
    if args.csv is not None:
        rows = ({"t": t, "S": s, "I": i, "R": r} for t, s, i, r in zip(traj.times, traj.s, traj.i, traj.r))
        _emit_csv(args, rows, ("t", "S", "I", "R"))
        return EXIT_OK
    r0 = basic_reproduction_number(p)
    t_peak, i_peak = traj.peak()
    n = p.population
    out = [
        f"SIR: beta={sc.fmt6(p.beta)} gamma={sc.fmt6(p.gamma)} N={sc.fmt6(n)} i0={sc.fmt6(p.i0)}",
        f"  R0 = beta/gamma = {sc.fmt6(r0)}; outbreak grows: {'yes' if r0 * p.s0 / n > 1 else 'no'}",
        f"  peak I = {sc.fmt6(i_peak)} at t = {sc.fmt6(t_peak)}",
        f"  final S/N = {sc.fmt6(traj.s[-1] / n)}  final R/N = {sc.fmt6(traj.r[-1] / n)}",
        f"  final-size residual = {sc.fmt6(final_size_residual(r0, traj.s[-1] / n))}",
        f"  conservation drift = {sc.fmt6(traj.conservation_drift(n))}",
    ]
    if args.behavioral_r is not None:
        rep = threshold_report(p, args.behavioral_r, args.tolerance)
        out.append(f"  behavioural r = {sc.fmt6(args.behavioral_r)} ({rep.behavioral_regime}); "
                   f"{'aligned' if rep.aligned else 'not aligned'} with the SIR threshold")
    sys.stdout.write("\n".join(out) + "\n")
    return EXIT_OK


def cmd_presets(args) -> int:
    names = sc.preset_names()
    if args.csv is not None:
        _emit_csv(args, ({"name": n, "description": sc.preset_description(n)} for n in names),
                  ("name", "description"))
    else:
        width = max(map(len, names))
        for name in names:
            print(f"{name:<{width}}  {sc.preset_description(name)}")
    return EXIT_OK


COMMANDS = {
    "analyze": cmd_analyze, "sweep": cmd_sweep, "levers": cmd_levers, "simulate": cmd_simulate,
    "graph": cmd_graph, "sir": cmd_sir, "presets": cmd_presets,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ModelOverflow, NotConverged, StepTooLarge, DivergentHorizon) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
