"""Run the four bundled scenarios end to end and render the trajectories.

Each run writes the usual trace artifacts plus an SVG overlay of the robot
path, person tracks, and final costmap. Run
`python3 demos/run_experiments.py` (takes around 10 seconds); everything
lands in demos/output/experiments/<scenario>/.
"""

from pathlib import Path

from socialnav import BUNDLED_SCENARIOS, Simulation, metrics, resolve_scenario, write_trace
from socialnav.render import write_trace_svg

out_root = Path(__file__).parent / "output" / "experiments"

for name in BUNDLED_SCENARIOS:
    scenario = resolve_scenario(name)
    sim = Simulation(scenario)
    trace = sim.run()
    m = metrics(trace)

    outdir = out_root / name
    write_trace(trace, outdir)
    write_trace_svg(outdir / "trajectory.svg", trace, sim.costmap)

    verdict = "reached goal" if m.goal_reached else "did not reach goal"
    print(f"{name}: {verdict} at t = {m.sim_time:.1f} s, "
          f"path {m.path_length:.1f} m, {m.replan_count} replans")
    for pid, pm in sorted(m.persons.items()):
        print(f"  {pid}: closest {pm.min_distance:.2f} m (cost {pm.cost_at_closest:.2f}), "
              f"passed on the {pm.passing_side}")
    for pid, outcome in sorted(m.handovers.items()):
        print(f"  handover to {pid}: {outcome}")

print(f"\ntraces and SVGs in {out_root}")
