"""Acceptance gate: ten end-to-end criteria covering fields, planning,
tracking, filtering, and the four bundled scenarios.

Each test prints a single PASS/FAIL line with its tolerances and runtime
budget; run with `pytest -s tests/test_acceptance.py` to see them all.
"""

import math
import time

import numpy as np

from test_tracking import brute_force_marginals, meas, simulate_crossing, track

from socialnav.costmap import Costmap, fuse, inflate, rasterize_static
from socialnav.detection import Detection, PixelBBox, threshold_filter
from socialnav.geometry import GridSpec, normalize_angle
from socialnav.planner import NoPath, PlanRequest, astar, dijkstra_oracle
from socialnav.scenario import resolve_scenario
from socialnav.simulator import metrics, metrics_json_text, run, trace_csv_text
from socialnav.social import (
    AsymmetricGaussianParams,
    SocialParams,
    asymmetric_gaussian,
    circular_gaussian,
    overtake_left,
    seated_cost,
    seated_visibility,
    standing_personal_space,
    walking_cost,
    walking_personal_space,
)
from socialnav.tracking import AssociationParams, PersonEstimate, Posture, nnjpda_associate


def report(num, label, failures, elapsed, budget):
    status = "PASS" if not failures and elapsed < budget else "FAIL"
    print(f"\nacceptance {num:>2} {status}  {label}  ({elapsed:.2f} s / {budget:g} s)")
    for f in failures:
        print(f"    - {f}")
    assert not failures, f"criterion {num}: " + "; ".join(failures)
    assert elapsed < budget, f"criterion {num}: runtime {elapsed:.2f} s over {budget:g} s budget"


def walker(heading, speed=1.0, position=(0.0, 0.0)):
    return PersonEstimate(
        position=position,
        velocity=(speed * math.cos(heading), speed * math.sin(heading)),
        speed=speed,
        heading=heading,
        posture=Posture.WALKING,
        handover_target=False,
    )


def test_criterion_1_cost_field_goldens():
    t0 = time.perf_counter()
    failures = []

    # unit-speed walker heading +y: closed-form samples at 1 m
    person = walker(math.pi / 2)
    goldens = [
        ((0.0, 1.0), math.exp(-0.5), "1 m ahead"),
        ((0.0, -1.0), math.exp(-2.0), "1 m behind"),
        ((1.0, 0.0), math.exp(-1.125), "1 m beside"),
        ((-1.0, 0.0), math.exp(-1.125), "1 m beside (other)"),
    ]
    for point, want, what in goldens:
        got = float(walking_personal_space(np.array(point), person))
        if abs(got - want) > 1e-9:
            failures.append(f"{what}: {got!r} vs {want!r}")

    # continuity across the front/rear switch (directions perpendicular
    # to the orientation)
    params = AsymmetricGaussianParams(orientation=0.3, front=1.0, rear=0.5, side=2.0 / 3.0)
    for r in (0.3, 1.0, 2.5):
        for boundary in (params.orientation + math.pi / 2, params.orientation - math.pi / 2):
            a = np.array([r * math.cos(boundary + 1e-5), r * math.sin(boundary + 1e-5)])
            b = np.array([r * math.cos(boundary - 1e-5), r * math.sin(boundary - 1e-5)])
            gap = abs(
                float(asymmetric_gaussian(a, (0.0, 0.0), params))
                - float(asymmetric_gaussian(b, (0.0, 0.0), params))
            )
            if gap >= 1e-6:
                failures.append(f"jump {gap!r} across lateral boundary at r={r}")

    # equal spreads degenerate to the circular field
    rng = np.random.default_rng(11)
    pts = rng.uniform(-3.0, 3.0, (300, 2))
    sym = AsymmetricGaussianParams(orientation=1.1, front=0.45, rear=0.45, side=0.45)
    worst = float(
        np.max(np.abs(asymmetric_gaussian(pts, (0.0, 0.0), sym) - circular_gaussian(pts, (0.0, 0.0))))
    )
    if worst >= 1e-12:
        failures.append(f"degeneration error {worst!r}")

    report(
        1,
        "cost-field goldens: samples within 1e-9, boundary continuity < 1e-6, "
        "circular degeneration < 1e-12",
        failures,
        time.perf_counter() - t0,
        budget=1.0,
    )


def test_criterion_2_fusion_dominance():
    t0 = time.perf_counter()
    failures = []
    rng = np.random.default_rng(2)
    pts = rng.uniform(-4.0, 4.0, (10_000, 2))
    params = SocialParams()

    seated = PersonEstimate(
        position=(0.3, -0.2),
        velocity=(0.0, 0.0),
        speed=0.0,
        heading=0.7,
        posture=Posture.SEATED,
        handover_target=False,
    )
    g6 = seated_cost(pts, seated, params)
    for name, component in (
        ("standing", standing_personal_space(pts, seated, params)),
        ("visibility", seated_visibility(pts, seated, params)),
    ):
        short = int(np.sum(g6 < component - 1e-15))
        if short:
            failures.append(f"seated field below its {name} component at {short} points")

    moving = walker(heading=-0.4, speed=1.3, position=(-0.5, 0.8))
    g7 = walking_cost(pts, moving, params)
    for name, component in (
        ("personal-space", walking_personal_space(pts, moving, params)),
        ("overtake", overtake_left(pts, moving, params)),
    ):
        short = int(np.sum(g7 < component - 1e-15))
        if short:
            failures.append(f"walking field below its {name} component at {short} points")

    # fuse() is an idempotent, commutative, associative max
    spec = GridSpec(0.0, 0.0, 0.1, 24, 18)
    layers = [
        Costmap(spec, rng.integers(0, 256, (18, 24)).astype(np.uint8)) for _ in range(3)
    ]
    a, b, c = layers
    checks = [
        ("idempotent", fuse([a, a]).cells, a.cells),
        ("commutative", fuse([a, b]).cells, fuse([b, a]).cells),
        ("associative", fuse([fuse([a, b]), c]).cells, fuse([a, fuse([b, c])]).cells),
    ]
    for law, left, right in checks:
        if not np.array_equal(left, right):
            failures.append(f"fuse() is not {law}")

    report(
        2,
        "fused fields dominate their components at 10^4 points; fuse() semilattice laws",
        failures,
        time.perf_counter() - t0,
        budget=5.0,
    )


def test_criterion_3_planner_optimality():
    t0 = time.perf_counter()
    failures = []
    rng = np.random.default_rng(3)
    spec = GridSpec(0.0, 0.0, 0.1, 30, 30)

    def random_free_cell(cells):
        while True:
            ix = int(rng.integers(0, spec.width))
            iy = int(rng.integers(0, spec.height))
            if cells[iy, ix] < 253:
                return ix, iy

    mismatches = 0
    for trial in range(100):
        cells = rng.integers(0, 256, (30, 30)).astype(np.uint8)
        six, siy = random_free_cell(cells)
        gix, giy = random_free_cell(cells)
        cm = Costmap(spec, cells)
        req = PlanRequest(
            start=tuple(spec.cell_center(six, siy)),
            goal=tuple(spec.cell_center(gix, giy)),
            cost_weight=float(rng.uniform(0.0, 20.0)),
        )
        try:
            want = dijkstra_oracle(cm, req)
        except NoPath:
            try:
                astar(cm, req)
            except NoPath:
                continue
            failures.append(f"trial {trial}: oracle found no path but the planner did")
            continue
        got = astar(cm, req).total_cost
        if abs(got - want) > 1e-9:
            mismatches += 1
            failures.append(f"trial {trial}: planner {got!r} vs oracle {want!r}")
    if mismatches:
        failures.append(f"{mismatches} oracle mismatches of 100")

    # zero weight: metric length only, closed form on an open map
    open_map = Costmap(spec, np.full((30, 30), 120, np.uint8))
    for _ in range(10):
        six, siy = random_free_cell(open_map.cells)
        gix, giy = random_free_cell(open_map.cells)
        req = PlanRequest(
            start=tuple(spec.cell_center(six, siy)),
            goal=tuple(spec.cell_center(gix, giy)),
            cost_weight=0.0,
        )
        dx, dy = abs(gix - six), abs(giy - siy)
        want = 0.1 * (math.sqrt(2) * min(dx, dy) + abs(dx - dy))
        got = astar(open_map, req).total_cost
        if abs(got - want) > 1e-9:
            failures.append(f"w=0 length {got!r} vs {want!r} for dx={dx}, dy={dy}")

    # raising costs can never cheapen the best path
    for trial in range(20):
        cells = rng.integers(0, 120, (30, 30)).astype(np.uint8)
        cm = Costmap(spec, cells)
        six, siy = random_free_cell(cells)
        gix, giy = random_free_cell(cells)
        req = PlanRequest(
            start=tuple(spec.cell_center(six, siy)),
            goal=tuple(spec.cell_center(gix, giy)),
            cost_weight=10.0,
        )
        base = astar(cm, req).total_cost
        bump = np.minimum(cells.astype(int) + rng.integers(0, 80, cells.shape), 252)
        raised = astar(Costmap(spec, bump.astype(np.uint8)), req).total_cost
        if raised < base - 1e-9:
            failures.append(f"monotonicity trial {trial}: {base!r} -> {raised!r}")

    report(
        3,
        "A* equals the Dijkstra oracle on 100 random 30x30 maps within 1e-9; "
        "w=0 gives shortest 8-connected length; 20 monotonicity instances",
        failures,
        time.perf_counter() - t0,
        budget=30.0,
    )


def test_criterion_4_tracker_accuracy():
    t0 = time.perf_counter()
    failures = []

    for seed in range(10):
        tracker, errors, id_map = simulate_crossing(seed=seed)
        if len(tracker.confirmed) != 2:
            failures.append(f"seed {seed}: {len(tracker.confirmed)} confirmed tracks")
            continue
        if sorted(id_map.values()) != [0, 1]:
            failures.append(f"seed {seed}: identity swap ({id_map})")
        for truth_idx, errs in errors.items():
            rmse = math.sqrt(float(np.mean(np.square(errs))))
            if rmse >= 0.2:
                failures.append(f"seed {seed}: target {truth_idx} RMSE {rmse:.3f}")

    # marginal rows are probability distributions
    rng = np.random.default_rng(4)
    params = AssociationParams()
    for trial in range(25):
        tracks = [
            track(float(rng.uniform(0, 5)), float(rng.uniform(0, 5)), tid=i)
            for i in range(int(rng.integers(1, 5)))
        ]
        zs = [
            meas(float(rng.uniform(0, 5)), float(rng.uniform(0, 5)))
            for _ in range(int(rng.integers(0, 5)))
        ]
        marg = nnjpda_associate(tracks, zs, params).marginals
        gap = float(np.max(np.abs(marg.sum(axis=1) - 1.0)))
        if gap >= 1e-9:
            failures.append(f"trial {trial}: marginal row sums off by {gap!r}")

    # two tracks, two nearby measurements: exact agreement with brute force
    pair_tracks = [track(0.0, 0.0, tid=0), track(1.0, 0.0, tid=1)]
    pair_meas = [meas(0.1, 0.05), meas(0.9, -0.05)]
    got = nnjpda_associate(pair_tracks, pair_meas, params).marginals
    want = brute_force_marginals(pair_tracks, pair_meas, params)
    worst = float(np.max(np.abs(got - want)))
    if worst >= 1e-12:
        failures.append(f"2x2 marginals differ from brute force by {worst!r}")

    report(
        4,
        "crossing targets, seeds 0-9: RMSE < 0.2 m, no identity swaps; marginal "
        "rows sum to 1 within 1e-9; 2x2 case matches brute force within 1e-12",
        failures,
        time.perf_counter() - t0,
        budget=30.0,
    )


def test_criterion_5_threshold_cascade():
    t0 = time.perf_counter()
    failures = []
    rng = np.random.default_rng(5)
    n = 100_000
    bbox = PixelBBox(0.0, 0.0, 10.0, 20.0)

    tp = [Detection("cam", 0.0, bbox, float(s)) for s in rng.normal(70.0, 8.0, n)]
    fp = [Detection("cam", 0.0, bbox, float(s)) for s in rng.normal(15.0, 8.0, n)]
    tp_rate = len(threshold_filter(tp, 40.0)) / n
    fp_rate = len(threshold_filter(fp, 40.0)) / n

    def phi(x):
        return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))

    tp_pred = phi((70.0 - 40.0) / 8.0)
    fp_pred = 1.0 - phi((40.0 - 15.0) / 8.0)

    if fp_rate >= 0.002:
        failures.append(f"FP pass rate {fp_rate:.5f} >= 0.2%")
    if tp_rate <= 0.999:
        failures.append(f"TP pass rate {tp_rate:.5f} <= 99.9%")
    if abs(fp_rate - fp_pred) > 0.001:
        failures.append(f"FP rate {fp_rate:.5f} vs Gaussian tail {fp_pred:.5f}")
    if abs(tp_rate - tp_pred) > 0.001:
        failures.append(f"TP rate {tp_rate:.5f} vs Gaussian tail {tp_pred:.5f}")

    report(
        5,
        "score threshold 40 over 10^5 draws: FP pass < 0.2%, TP pass > 99.9%, "
        "each within 0.1 pp of the Gaussian tail",
        failures,
        time.perf_counter() - t0,
        budget=10.0,
    )


def test_criterion_6_slalom_runs():
    t0 = time.perf_counter()
    failures = []
    sc = resolve_scenario("experiment1_slalom")
    static = inflate(rasterize_static(sc.grid, sc.obstacles), sc.inflation)

    reached = 0
    for seed in range(20):
        trace = run(sc, seed=seed)
        m = metrics(trace)
        if m.goal_reached:
            reached += 1
        else:
            failures.append(f"seed {seed}: goal not reached")
        if m.violation_frames:
            failures.append(f"seed {seed}: {m.violation_frames} personal-space violation frames")
        for f in trace.frames:
            ix, iy = sc.grid.world_to_cell((f.robot_x, f.robot_y))
            if static.cells[iy, ix] >= 253:
                failures.append(f"seed {seed}: robot entered a blocked cell at t={f.time}")
                break
    if reached < 20:
        failures.append(f"only {reached}/20 runs reached the goal")

    report(
        6,
        "slalom, seeds 0-19: 20/20 goals, zero frames above the 0.6 cost "
        "threshold, no executed pose on cells >= 253",
        failures,
        time.perf_counter() - t0,
        budget=120.0,
    )


def test_criterion_7_overtake_side():
    t0 = time.perf_counter()
    failures = []
    sc = resolve_scenario("experiment2_overtake")

    lefts = 0
    for seed in range(20):
        m = metrics(run(sc, seed=seed))
        pm = m.persons["p1"]
        if pm.passing_side == "left":
            lefts += 1
        if pm.cost_at_closest > 0.6:
            failures.append(
                f"seed {seed}: cost {pm.cost_at_closest:.3f} at closest approach"
            )
    if lefts < 19:
        failures.append(f"passed left in only {lefts}/20 runs")

    report(
        7,
        "overtake, seeds 0-19: left passes >= 19/20, closest approach outside "
        "the 0.6-cost contour",
        failures,
        time.perf_counter() - t0,
        budget=120.0,
    )


def test_criterion_8_interaction_replan():
    t0 = time.perf_counter()
    failures = []
    trace = run(resolve_scenario("experiment3_tv"))

    t_on = None
    for f in trace.frames:
        if any(e.startswith("interaction_on") for e in f.events):
            t_on = f.time
            break
    if t_on is None:
        failures.append("interaction never switched on")
    else:
        replans = [f.time for f in trace.frames if f.planned and f.time >= t_on]
        if not replans:
            failures.append("no replan after the interaction started")
        elif replans[0] > t_on + 2.0:
            failures.append(f"first replan {replans[0] - t_on:.1f} s after the event")
        intrusions = 0
        for f in trace.frames:
            if f.time < t_on:
                continue
            for cx, cy, radius, _ in f.interactions:
                if math.hypot(f.robot_x - cx, f.robot_y - cy) <= radius:
                    intrusions += 1
                    break
        if intrusions:
            failures.append(f"{intrusions} frames inside the interaction disc")
        if not metrics(trace).goal_reached:
            failures.append("goal not reached")

    report(
        8,
        "interaction scenario: replan within 2 s of the event, zero later "
        "frames inside the disc",
        failures,
        time.perf_counter() - t0,
        budget=60.0,
    )


def _handover_pose_ok(trace):
    last = trace.frames[-1]
    person = next(s for s in last.persons if s.id == "p1")
    dx = last.robot_x - person.x
    dy = last.robot_y - person.y
    dist = math.hypot(dx, dy)
    bearing = abs(float(normalize_angle(math.atan2(dy, dx) - person.heading)))
    return 0.6 <= dist <= 0.9 and bearing <= math.radians(22.5) + 1e-9, dist, bearing


def test_criterion_9_handover_pose():
    t0 = time.perf_counter()
    failures = []
    sc = resolve_scenario("experiment4_handover")

    trace = run(sc)
    ok, dist, bearing = _handover_pose_ok(trace)
    if not trace.success:
        failures.append("gated run did not report success")
    if not ok:
        failures.append(
            f"final pose {dist:.2f} m / {math.degrees(bearing):.1f} deg off the target cone"
        )

    control = run(sc, handover_gate=False)
    ctrl_ok, ctrl_dist, _ = _handover_pose_ok(control)
    if ctrl_ok:
        failures.append(f"gate-off control still reached the pose ({ctrl_dist:.2f} m)")

    report(
        9,
        "hand-over: final pose inside the frontal 22.5 deg cone at 0.6-0.9 m; "
        "gate-off control fails",
        failures,
        time.perf_counter() - t0,
        budget=60.0,
    )


def test_criterion_10_determinism():
    t0 = time.perf_counter()
    failures = []
    sc = resolve_scenario("experiment1_slalom")

    first = run(sc, seed=0)
    second = run(sc, seed=0)
    if trace_csv_text(first) != trace_csv_text(second):
        failures.append("trace.csv differs between identical runs")
    if metrics_json_text(first) != metrics_json_text(second):
        failures.append("metrics.json differs between identical runs")

    report(
        10,
        "repeating the slalom seed-0 run reproduces trace.csv and metrics.json "
        "byte for byte",
        failures,
        time.perf_counter() - t0,
        budget=60.0,
    )
