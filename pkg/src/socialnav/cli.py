"""Command-line entry points: simulate, costfield, plan.

Exit codes: 0 success, 1 usage or input error, 2 goal not reached within
the time limit, 3 no path between the requested endpoints.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .costmap import (
    read_costmap_csv,
    write_costmap_csv,
    write_field_pgm,
    write_grid_csv,
    write_pgm,
)
from .fileio import atomic_write_text
from .geometry import GridSpec, OutOfBounds
from .planner import InvalidRequest, NoPath, PlanRequest, astar
from .render import write_trace_svg
from .scenario import SchemaError, ValidationError, resolve_scenario
from .simulator import Simulation, metrics, write_trace
from .social import InteractionSpec, SocialParams, interaction_cost, person_cost
from .tracking import PersonEstimate, Posture

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_TIME_LIMIT = 2
EXIT_NO_PATH = 3


class CliError(Exception):
    """Input problem the user can fix; message goes to stderr, exit 1."""


def _parse_pair(text: str, name: str) -> tuple:
    parts = text.split(",")
    if len(parts) != 2:
        raise CliError(f"{name} must be 'x,y', got {text!r}")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError:
        raise CliError(f"{name} must be numeric, got {text!r}") from None


def _parse_grid(text: str) -> GridSpec:
    parts = text.split(",")
    if len(parts) != 5:
        raise CliError("--grid must be 'origin_x,origin_y,resolution,width,height'")
    try:
        return GridSpec(
            float(parts[0]), float(parts[1]), float(parts[2]), int(parts[3]), int(parts[4])
        )
    except ValueError as exc:
        raise CliError(f"bad --grid: {exc}") from None


def _regrid(spec: GridSpec, resolution: float) -> GridSpec:
    """Same extent, different cell size (cell counts rounded up)."""
    if resolution <= 0:
        raise CliError("--resolution must be positive")
    x0, y0, x1, y1 = spec.extent
    return GridSpec(
        origin_x=x0,
        origin_y=y0,
        resolution=resolution,
        width=max(1, math.ceil((x1 - x0) / resolution - 1e-9)),
        height=max(1, math.ceil((y1 - y0) / resolution - 1e-9)),
    )


def cmd_simulate(args) -> int:
    scenario = resolve_scenario(args.scenario)
    if args.seed is not None:
        scenario = scenario.with_seed(args.seed)
    if args.resolution is not None:
        scenario = scenario.with_grid(_regrid(scenario.grid, args.resolution))

    sim = Simulation(scenario, handover_gate=args.handover_gate)
    trace = sim.run()
    outdir = Path(args.out)
    write_trace(trace, outdir)
    if args.dump_costmaps:
        write_costmap_csv(outdir / "costmap_static.csv", sim.static)
        write_pgm(outdir / "costmap_static.pgm", sim.static)
        write_costmap_csv(outdir / "costmap_final.csv", sim.costmap)
        write_pgm(outdir / "costmap_final.pgm", sim.costmap)
    if args.render:
        write_trace_svg(outdir / "trajectory.svg", trace, sim.costmap)

    m = metrics(trace)
    summary = m.to_dict()
    print(f"scenario: {scenario.name}")
    print(f"goal_reached: {summary['goal_reached']}")
    print(f"sim_time: {summary['sim_time']} s over {summary['frames']} frames")
    print(f"path_length: {summary['path_length']} m, replans: {summary['replan_count']}")
    print(
        f"violations: {summary['violation_frames']} frames, "
        f"interaction intrusions: {summary['interaction_frames']} frames"
    )
    for pid, pm in summary["persons"].items():
        print(
            f"person {pid}: min_distance {pm['min_distance']} m at t={pm['closest_time']}, "
            f"passed {pm['passing_side']}, cost {pm['cost_at_closest']}"
        )
    for pid, verdict in summary["handovers"].items():
        print(f"handover {pid}: {verdict}")
    print(f"artifacts: {outdir}")
    return EXIT_OK if trace.success else EXIT_TIME_LIMIT


def cmd_costfield(args) -> int:
    if (args.posture is None) == (args.interaction is None):
        raise CliError("give exactly one of --posture or --interaction")

    if args.grid is not None:
        spec = _parse_grid(args.grid)
    else:
        try:
            x0, y0, x1, y1 = (float(v) for v in args.extent.split(","))
        except ValueError:
            raise CliError("--extent must be 'x0,y0,x1,y1'") from None
        if args.resolution <= 0:
            raise CliError("--resolution must be positive")
        spec = GridSpec(
            x0, y0, args.resolution,
            max(1, math.ceil((x1 - x0) / args.resolution - 1e-9)),
            max(1, math.ceil((y1 - y0) / args.resolution - 1e-9)),
        )
    points = spec.cell_centers()

    if args.interaction is not None:
        parts = args.interaction.split(",")
        if len(parts) != 4:
            raise CliError("--interaction must be 'x1,y1,x2,y2'")
        a = (float(parts[0]), float(parts[1]))
        b = (float(parts[2]), float(parts[3]))
        field = interaction_cost(points, InteractionSpec(a, b, importance=args.importance))
        label = "interaction"
    else:
        posture = Posture(args.posture)
        x, y = _parse_pair(args.at, "--at")
        speed = args.speed if args.speed is not None else (1.0 if posture is Posture.WALKING else 0.0)
        est = PersonEstimate(
            position=(x, y),
            velocity=(speed * math.cos(args.heading), speed * math.sin(args.heading)),
            speed=speed,
            heading=args.heading,
            posture=posture,
            handover_target=args.handover_target,
        )
        field = person_cost(points, est, SocialParams())
        label = args.posture

    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    write_grid_csv(outdir / "costfield.csv", spec, field)
    write_field_pgm(outdir / "costfield.pgm", spec, field)
    print(f"costfield ({label}): min {field.min():.6g}, max {field.max():.6g}")
    print(f"artifacts: {outdir}")
    return EXIT_OK


def cmd_plan(args) -> int:
    costmap = read_costmap_csv(args.costmap)
    start = _parse_pair(args.start, "--start")
    goal = _parse_pair(args.goal, "--goal")
    try:
        path = astar(costmap, PlanRequest(start=start, goal=goal, cost_weight=args.weight))
    except NoPath:
        print("no path", file=sys.stderr)
        return EXIT_NO_PATH
    except (InvalidRequest, OutOfBounds) as exc:
        raise CliError(str(exc)) from None

    lines = ["seq,x,y"]
    for i, (x, y) in enumerate(path.points):
        lines.append(f"{i},{x:.6g},{y:.6g}")
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    print(f"total_cost,{path.total_cost:.6g}")
    if args.out is not None:
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        atomic_write_text(outdir / "path.csv", text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="socialnav",
        description="Socially aware navigation: simulate scenarios, dump cost fields, plan paths.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a scenario and write trace artifacts")
    sim.add_argument("--scenario", required=True, help="scenario JSON path or bundled name")
    sim.add_argument("--out", required=True, help="output directory")
    sim.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    sim.add_argument("--resolution", type=float, default=None, help="override grid resolution (m)")
    sim.add_argument("--render", action="store_true", help="also write trajectory.svg")
    sim.add_argument("--dump-costmaps", action="store_true", help="also write costmap CSV/PGM dumps")
    sim.add_argument(
        "--handover-gate",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="open a zero-cost frontal cone for hand-over targets (default on)",
    )
    sim.set_defaults(fn=cmd_simulate)

    cf = sub.add_parser("costfield", help="sample one person's or interaction's cost field")
    cf.add_argument("--posture", choices=[p.value for p in Posture], default=None)
    cf.add_argument("--at", default="0,0", help="person position 'x,y'")
    cf.add_argument("--heading", type=float, default=0.0, help="heading / facing (rad)")
    cf.add_argument("--speed", type=float, default=None, help="walking speed (m/s)")
    cf.add_argument("--handover-target", action="store_true")
    cf.add_argument("--interaction", default=None, help="interaction endpoints 'x1,y1,x2,y2'")
    cf.add_argument("--importance", type=float, default=1.0)
    cf.add_argument("--grid", default=None, help="'origin_x,origin_y,resolution,width,height'")
    cf.add_argument("--extent", default="-3,-3,3,3", help="'x0,y0,x1,y1' when --grid is not given")
    cf.add_argument("--resolution", type=float, default=0.05)
    cf.add_argument("--out", required=True, help="output directory")
    cf.set_defaults(fn=cmd_costfield)

    pl = sub.add_parser("plan", help="plan on a costmap CSV dump")
    pl.add_argument("--costmap", required=True, help="costmap CSV dump path")
    pl.add_argument("--start", required=True, help="'x,y'")
    pl.add_argument("--goal", required=True, help="'x,y'")
    pl.add_argument("--weight", type=float, default=10.0, help="social cost weight")
    pl.add_argument("--out", default=None, help="also write path.csv here")
    pl.set_defaults(fn=cmd_plan)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (SchemaError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
