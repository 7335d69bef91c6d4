"""Deterministic scenario simulator.

One frame, every dt seconds:

1. fire due scenario events,
2. synthesize camera detections from the scripted ground truth,
3. threshold them and project survivors to ground measurements,
4. step the tracker,
5. rebuild the social layer from confirmed tracks and active interactions
   and fuse it over the inflated static map,
6. replan when the period elapsed or the costmap changed semantically,
7. record the frame, then advance people and the robot.

Everything downstream of the seeded generator is deterministic: two runs
with the same scenario and seed produce identical traces byte for byte.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace as dc_replace
from pathlib import Path

import numpy as np
import shapely

from .costmap import INSCRIBED_COST, fuse, inflate, rasterize_social, rasterize_static
from .detection import Detection, detection_log_text, ground_measurements, threshold_filter
from .fileio import atomic_write_text
from .geometry import PixelBBox, normalize_angle
from .planner import InvalidRequest, NoPath, PlanRequest, astar, replan_policy
from .scenario import Scenario
from .social import InteractionSpec, person_cost
from .tracking import PersonEstimate, Posture, Tracker, TrackStatus, estimate_person

# A handover approaches to this distance in front of the person, and is
# only attempted when the social cost there is negligible.
HANDOVER_APPROACH_DISTANCE = 0.75
HANDOVER_COMFORT_THRESHOLD = 0.05

# A confirmed track inherits the scenario annotations (seated posture,
# facing, handover flag) of the closest scripted person within this range.
ANNOTATION_MATCH_RADIUS = 1.0

PERSON_HEIGHT_M = 1.7
BBOX_ASPECT = 0.4


@dataclass
class PersonSnapshot:
    """Ground-truth state of one person at one frame."""

    id: str
    x: float
    y: float
    heading: float
    posture: str
    speed: float
    handover_target: bool


@dataclass
class TrackSnapshot:
    """One track as the costmap saw it at one frame."""

    id: int
    x: float
    y: float
    vx: float
    vy: float
    posture: str
    status: str


@dataclass
class FrameRecord:
    """Everything the simulator knew and did during one frame."""

    index: int
    time: float
    robot_x: float
    robot_y: float
    robot_heading: float
    goal: tuple | None
    persons: list = field(default_factory=list)
    detections: list = field(default_factory=list)
    tracks: list = field(default_factory=list)
    interactions: list = field(default_factory=list)  # (cx, cy, radius, importance)
    costmap_rev: int = 0
    replans: int = 0
    planned: bool = False
    events: list = field(default_factory=list)
    path: object = None  # the PlannerPath being followed, shared across frames

    @property
    def robot_position(self) -> np.ndarray:
        return np.array([self.robot_x, self.robot_y])


@dataclass
class TraceLog:
    """A finished run: per-frame records plus its outcome flags."""

    scenario: Scenario
    frames: list
    success: bool
    time_limit_exceeded: bool
    handover_gate: bool
    handovers: dict


class _PersonState:
    """Runtime ground truth for one scripted person."""

    def __init__(self, script):
        self.script = script
        self.position = np.array(script.position, dtype=float)
        self.heading = float(script.facing)
        self.leg_index = 0
        self.released = not script.await_start_event
        self.handover_target = False

    def active_leg(self, t: float):
        if not self.released or self.leg_index >= len(self.script.legs):
            return None
        leg = self.script.legs[self.leg_index]
        if t + 1e-12 < leg.time:
            return None
        return leg

    def snapshot(self, t: float) -> PersonSnapshot:
        leg = self.active_leg(t)
        walking = False
        speed = 0.0
        if leg is not None:
            vec = np.asarray(leg.target) - self.position
            if np.hypot(*vec) > 1e-9:
                walking = True
                speed = leg.speed
                self.heading = math.atan2(vec[1], vec[0])
        if self.script.seated:
            posture = Posture.SEATED
        elif walking:
            posture = Posture.WALKING
        else:
            posture = Posture.STANDING
        return PersonSnapshot(
            id=self.script.id,
            x=float(self.position[0]),
            y=float(self.position[1]),
            heading=float(normalize_angle(self.heading)),
            posture=posture.value,
            speed=speed,
            handover_target=self.handover_target,
        )

    def advance(self, t: float, dt: float):
        budget = dt
        while budget > 1e-12:
            leg = self.active_leg(t)
            if leg is None:
                return
            vec = np.asarray(leg.target) - self.position
            dist = float(np.hypot(*vec))
            if dist < 1e-9:
                self.leg_index += 1
                continue
            step = min(leg.speed * budget, dist)
            self.position = self.position + vec * (step / dist)
            self.heading = math.atan2(vec[1], vec[0])
            budget -= step / leg.speed
            if step >= dist - 1e-12:
                self.leg_index += 1


def synthesize_detections(positions, cameras: dict, time: float, rng) -> list:
    """Camera detections for ground-truth person positions.

    Each camera sees positions inside its field-of-view polygon, drops them
    with its miss probability, projects the rest to the image with Gaussian
    pixel noise, and adds Poisson clutter boxes. Scores are drawn from the
    camera's true-positive and false-positive distributions.
    """
    out = []
    for cam_id, setup in cameras.items():
        det = setup.detector
        fov = shapely.Polygon(setup.fov)
        pix_h = PERSON_HEIGHT_M * setup.pixels_per_meter
        pix_w = BBOX_ASPECT * pix_h
        for pos in positions:
            p = np.asarray(pos, dtype=float)
            if not shapely.contains_xy(fov, float(p[0]), float(p[1])):
                continue
            if det.miss_prob > 0 and rng.random() < det.miss_prob:
                continue
            image_point = setup.ground_to_image.apply(p)
            if det.pixel_noise_std > 0:
                image_point = image_point + rng.normal(0.0, det.pixel_noise_std, 2)
            bbox = PixelBBox(
                x=float(image_point[0] - pix_w / 2.0),
                y=float(image_point[1] - pix_h),
                w=pix_w,
                h=pix_h,
            )
            score = float(rng.normal(det.score_mean_tp, det.score_std_tp))
            out.append(Detection(cam_id, time, bbox, score))
        if det.clutter_rate > 0:
            for _ in range(int(rng.poisson(det.clutter_rate))):
                u = float(rng.uniform(0.0, setup.model.image_width))
                v = float(rng.uniform(0.0, setup.model.image_height))
                bbox = PixelBBox(u - pix_w / 2.0, v - pix_h, pix_w, pix_h)
                score = float(rng.normal(det.score_mean_fp, det.score_std_fp))
                out.append(Detection(cam_id, time, bbox, score))
    return out


def _snapshot_estimate(snap: PersonSnapshot) -> PersonEstimate:
    """PersonEstimate equivalent of a ground-truth snapshot (for metrics)."""
    heading = snap.heading
    vx = snap.speed * math.cos(heading)
    vy = snap.speed * math.sin(heading)
    return PersonEstimate(
        position=(snap.x, snap.y),
        velocity=(vx, vy),
        speed=snap.speed,
        heading=heading,
        posture=Posture(snap.posture),
        handover_target=snap.handover_target,
    )


class Simulation:
    """One scenario run; create, call run(), inspect the TraceLog."""

    def __init__(self, scenario: Scenario, *, handover_gate: bool = True):
        self.scenario = scenario
        self.handover_gate = handover_gate
        self.rng = np.random.default_rng(scenario.seed)
        self.static = inflate(rasterize_static(scenario.grid, scenario.obstacles), scenario.inflation)
        self.tracker = Tracker(
            association=scenario.association,
            lifecycle=scenario.lifecycle,
            accel_noise=scenario.accel_noise,
            walk_speed_threshold=scenario.walk_speed_threshold,
        )
        self.registry = scenario.camera_registry()
        self.persons = [_PersonState(p) for p in scenario.persons]
        self.robot_pos = np.array(scenario.robot.start, dtype=float)
        self.robot_heading = scenario.robot.heading
        self.goal: np.ndarray | None = None
        self.path = None
        self.path_cursor = 0
        self.interactions: dict = {}
        self.costmap = self.static
        self.costmap_rev = 0
        self.replans = 0
        self.handovers: dict = {}
        self._event_cursor = 0
        self._last_plan = -math.inf
        self._last_signature = None

    def _person(self, person_id: str) -> _PersonState:
        for p in self.persons:
            if p.script.id == person_id:
                return p
        raise KeyError(person_id)

    def _fire_event(self, ev) -> str:
        if ev.kind == "start_walking":
            self._person(ev.person).released = True
            return f"start_walking:{ev.person}"
        if ev.kind == "interaction_on":
            person = self._person(ev.person)
            spec = InteractionSpec(
                entity_a=(float(person.position[0]), float(person.position[1])),
                entity_b=self.scenario.objects[ev.object],
                importance=ev.importance,
            )
            self.interactions[(ev.person, ev.object)] = spec
            return f"interaction_on:{ev.person}+{ev.object}"
        if ev.kind == "interaction_off":
            self.interactions.pop((ev.person, ev.object), None)
            return f"interaction_off:{ev.person}+{ev.object}"
        if ev.kind == "handover_request":
            accepted = self._request_handover(ev.person)
            verdict = "accepted" if accepted else "refused"
            self.handovers[ev.person] = verdict
            return f"handover_{verdict}:{ev.person}"
        if ev.kind == "set_goal":
            self.goal = np.array(ev.goal, dtype=float)
            return "set_goal"
        raise ValueError(f"unknown event kind {ev.kind!r}")

    def _request_handover(self, person_id: str) -> bool:
        """Point the robot at an approach pose in front of the person.

        The pose sits HANDOVER_APPROACH_DISTANCE along the facing
        direction. The request is refused when approaching there would
        still be uncomfortable, which is exactly what happens when the
        frontal corridor is not opened.
        """
        person = self._person(person_id)
        person.handover_target = True
        heading = float(normalize_angle(person.heading))
        approach = person.position + HANDOVER_APPROACH_DISTANCE * np.array(
            [math.cos(heading), math.sin(heading)]
        )
        snap = person.snapshot(self._now)
        cost = person_cost(
            approach,
            _snapshot_estimate(snap),
            self.scenario.social,
            handover_gate_enabled=self.handover_gate,
        )
        if not self.scenario.grid.contains(approach) or cost > HANDOVER_COMFORT_THRESHOLD:
            return False
        self.goal = approach
        return True

    def _annotation_for(self, track) -> dict:
        best = None
        best_dist = ANNOTATION_MATCH_RADIUS
        for person in self.persons:
            dist = float(np.hypot(*(track.position - person.position)))
            if dist <= best_dist:
                best = person
                best_dist = dist
        if best is None:
            return {"seated": False, "facing": 0.0, "handover_target": False}
        return {
            "seated": best.script.seated,
            "facing": float(best.heading),
            "handover_target": best.handover_target,
        }

    def _advance_robot(self, budget: float):
        if self.path is None:
            return
        points = self.path.points
        while budget > 1e-12 and self.path_cursor < len(points):
            target = np.asarray(points[self.path_cursor])
            vec = target - self.robot_pos
            dist = float(np.hypot(*vec))
            if dist < 1e-9:
                self.path_cursor += 1
                continue
            step = min(budget, dist)
            candidate = self.robot_pos + vec * (step / dist)
            ix, iy = self.scenario.grid.world_to_cell(candidate)
            if self.costmap.cells[iy, ix] >= INSCRIBED_COST:
                return  # the cell ahead turned untraversable; halt until a replan
            self.robot_pos = candidate
            self.robot_heading = math.atan2(vec[1], vec[0])
            budget -= step

    def run(self) -> TraceLog:
        sc = self.scenario
        dt = sc.dt
        tolerance = sc.robot.goal_tolerance
        max_frames = int(math.floor(sc.time_limit / dt + 1e-9)) + 1
        frames = []
        success = False

        for index in range(max_frames):
            t = index * dt
            self._now = t

            fired = []
            while self._event_cursor < len(sc.events) and sc.events[self._event_cursor].time <= t + 1e-12:
                fired.append(self._fire_event(sc.events[self._event_cursor]))
                self._event_cursor += 1

            detections = synthesize_detections(
                [p.position for p in self.persons], sc.cameras, t, self.rng
            )
            kept = threshold_filter(detections, sc.detection_threshold)
            measurements = ground_measurements(kept, self.registry)
            self.tracker.step(measurements, dt)
            confirmed = self.tracker.confirmed

            estimates = []
            for track in confirmed:
                annotation = self._annotation_for(track)
                estimates.append(
                    estimate_person(track, sc.walk_speed_threshold, **annotation)
                )

            social_layer = rasterize_social(
                sc.grid,
                estimates,
                list(self.interactions.values()),
                sc.social,
                handover_gate_enabled=self.handover_gate,
            )
            self.costmap = fuse([self.static, social_layer])

            signature = (
                tuple(
                    sorted(
                        (track.id, est.posture.value, est.handover_target)
                        for track, est in zip(confirmed, estimates)
                    )
                ),
                tuple(sorted(self.interactions.keys())),
                None if self.goal is None else (float(self.goal[0]), float(self.goal[1])),
            )
            changed = signature != self._last_signature
            self._last_signature = signature
            if changed:
                self.costmap_rev += 1

            planned = False
            if self.goal is not None and replan_policy(t, self._last_plan, sc.replan_period, changed):
                self._last_plan = t
                self.replans += 1
                planned = True
                try:
                    self.path = astar(
                        self.costmap,
                        PlanRequest(
                            start=tuple(self.robot_pos),
                            goal=tuple(self.goal),
                            cost_weight=sc.cost_weight,
                        ),
                    )
                    self.path_cursor = 1 if len(self.path.points) > 1 else 0
                except (NoPath, InvalidRequest):
                    self.path = None
                    fired.append("plan_failed")

            frames.append(
                FrameRecord(
                    index=index,
                    time=t,
                    robot_x=float(self.robot_pos[0]),
                    robot_y=float(self.robot_pos[1]),
                    robot_heading=float(normalize_angle(self.robot_heading)),
                    goal=None if self.goal is None else (float(self.goal[0]), float(self.goal[1])),
                    persons=[p.snapshot(t) for p in self.persons],
                    detections=detections,
                    tracks=[
                        TrackSnapshot(
                            id=track.id,
                            x=float(track.state[0]),
                            y=float(track.state[1]),
                            vx=float(track.state[2]),
                            vy=float(track.state[3]),
                            posture=est.posture.value,
                            status=track.status.value,
                        )
                        for track, est in zip(confirmed, estimates)
                    ],
                    interactions=[
                        (float(spec.center[0]), float(spec.center[1]), spec.radius, spec.importance)
                        for spec in self.interactions.values()
                    ],
                    costmap_rev=self.costmap_rev,
                    replans=self.replans,
                    planned=planned,
                    events=fired,
                    path=self.path,
                )
            )

            if self.goal is not None and float(np.hypot(*(self.robot_pos - self.goal))) <= tolerance:
                success = True
                break

            for person in self.persons:
                person.advance(t, dt)
            self._advance_robot(sc.robot.v_max * dt)

        return TraceLog(
            scenario=sc,
            frames=frames,
            success=success,
            time_limit_exceeded=not success,
            handover_gate=self.handover_gate,
            handovers=dict(self.handovers),
        )


def run(scenario: Scenario, *, seed: int | None = None, handover_gate: bool = True) -> TraceLog:
    """Run a scenario to completion; optionally override its seed."""
    if seed is not None:
        scenario = dc_replace(scenario, seed=seed)
    return Simulation(scenario, handover_gate=handover_gate).run()


@dataclass
class PersonMetrics:
    """Per-person interaction of the robot with one scripted person."""

    min_distance: float
    closest_time: float
    passing_side: str
    cost_at_closest: float


@dataclass
class Metrics:
    """Run outcome plus the social-navigation quality measures."""

    goal_reached: bool
    time_limit_exceeded: bool
    sim_time: float
    frames: int
    path_length: float
    replan_count: int
    violation_frames: int
    violation_seconds: float
    interaction_frames: int
    interaction_seconds: float
    final_x: float
    final_y: float
    final_heading: float
    persons: dict
    handovers: dict

    def to_dict(self) -> dict:
        def r6(x):
            return float(f"{float(x):.6g}")

        return {
            "goal_reached": self.goal_reached,
            "time_limit_exceeded": self.time_limit_exceeded,
            "sim_time": r6(self.sim_time),
            "frames": self.frames,
            "path_length": r6(self.path_length),
            "replan_count": self.replan_count,
            "violation_frames": self.violation_frames,
            "violation_seconds": r6(self.violation_seconds),
            "interaction_frames": self.interaction_frames,
            "interaction_seconds": r6(self.interaction_seconds),
            "final_pose": [r6(self.final_x), r6(self.final_y), r6(self.final_heading)],
            "persons": {
                pid: {
                    "min_distance": r6(pm.min_distance),
                    "closest_time": r6(pm.closest_time),
                    "passing_side": pm.passing_side,
                    "cost_at_closest": r6(pm.cost_at_closest),
                }
                for pid, pm in sorted(self.persons.items())
            },
            "handovers": dict(sorted(self.handovers.items())),
        }


VIOLATION_COST_THRESHOLD = 0.6


def metrics(trace: TraceLog) -> Metrics:
    """Distill a trace into navigation quality measures.

    A frame counts as a personal-space violation when the true continuous
    cost of any person (handover targets excluded) at the robot position
    exceeds 0.6. Passing side is the sign of the cross product between the
    person's heading and the robot offset at closest approach.
    """
    sc = trace.scenario
    frames = trace.frames
    dt = sc.dt

    path_length = 0.0
    for a, b in zip(frames, frames[1:]):
        path_length += float(np.hypot(b.robot_x - a.robot_x, b.robot_y - a.robot_y))

    violation_frames = 0
    interaction_frames = 0
    per_person: dict = {}
    for frame in frames:
        robot = frame.robot_position
        violated = False
        for snap in frame.persons:
            rel = robot - np.array([snap.x, snap.y])
            dist = float(np.hypot(*rel))
            record = per_person.setdefault(snap.id, [])
            record.append((dist, frame.time, snap, rel))
            if snap.handover_target:
                continue
            cost = person_cost(robot, _snapshot_estimate(snap), sc.social)
            if cost > VIOLATION_COST_THRESHOLD:
                violated = True
        if violated:
            violation_frames += 1
        for cx, cy, radius, _ in frame.interactions:
            if float(np.hypot(robot[0] - cx, robot[1] - cy)) <= radius:
                interaction_frames += 1
                break

    persons = {}
    for pid, samples in per_person.items():
        dist, when, snap, rel = min(samples, key=lambda s: s[0])
        heading_vec = np.array([math.cos(snap.heading), math.sin(snap.heading)])
        cross = float(heading_vec[0] * rel[1] - heading_vec[1] * rel[0])
        if cross > 0:
            side = "left"
        elif cross < 0:
            side = "right"
        else:
            side = "none"
        robot_at_closest = np.array([snap.x, snap.y]) + rel
        persons[pid] = PersonMetrics(
            min_distance=dist,
            closest_time=when,
            passing_side=side,
            cost_at_closest=float(
                person_cost(robot_at_closest, _snapshot_estimate(snap), sc.social)
            ),
        )

    last = frames[-1]
    return Metrics(
        goal_reached=trace.success,
        time_limit_exceeded=trace.time_limit_exceeded,
        sim_time=last.time,
        frames=len(frames),
        path_length=path_length,
        replan_count=last.replans,
        violation_frames=violation_frames,
        violation_seconds=violation_frames * dt,
        interaction_frames=interaction_frames,
        interaction_seconds=interaction_frames * dt,
        final_x=last.robot_x,
        final_y=last.robot_y,
        final_heading=last.robot_heading,
        persons=persons,
        handovers=dict(trace.handovers),
    )


def _fmt(x: float) -> str:
    return f"{float(x):.6g}"


def trace_csv_text(trace: TraceLog) -> str:
    lines = [
        "frame,time,robot_x,robot_y,robot_heading,goal_x,goal_y,costmap_rev,replans,planned,n_detections,n_tracks,events"
    ]
    for f in trace.frames:
        gx = _fmt(f.goal[0]) if f.goal is not None else ""
        gy = _fmt(f.goal[1]) if f.goal is not None else ""
        lines.append(
            f"{f.index},{_fmt(f.time)},{_fmt(f.robot_x)},{_fmt(f.robot_y)},{_fmt(f.robot_heading)},"
            f"{gx},{gy},{f.costmap_rev},{f.replans},{int(f.planned)},{len(f.detections)},{len(f.tracks)},"
            f"{';'.join(f.events)}"
        )
    return "\n".join(lines) + "\n"


def persons_csv_text(trace: TraceLog) -> str:
    lines = ["frame,time,person_id,x,y,heading,posture,speed"]
    for f in trace.frames:
        for s in f.persons:
            lines.append(
                f"{f.index},{_fmt(f.time)},{s.id},{_fmt(s.x)},{_fmt(s.y)},"
                f"{_fmt(s.heading)},{s.posture},{_fmt(s.speed)}"
            )
    return "\n".join(lines) + "\n"


def tracks_csv_text(trace: TraceLog) -> str:
    lines = ["t,track_id,x,y,vx,vy,posture,status"]
    for f in trace.frames:
        for s in f.tracks:
            lines.append(
                f"{_fmt(f.time)},{s.id},{_fmt(s.x)},{_fmt(s.y)},"
                f"{_fmt(s.vx)},{_fmt(s.vy)},{s.posture},{s.status}"
            )
    return "\n".join(lines) + "\n"


def metrics_json_text(trace: TraceLog) -> str:
    return json.dumps(metrics(trace).to_dict(), indent=2, sort_keys=True) + "\n"


def write_trace(trace: TraceLog, outdir):
    """Write trace.csv, persons.csv, tracks.csv, detections.csv, metrics.json."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    atomic_write_text(outdir / "trace.csv", trace_csv_text(trace))
    atomic_write_text(outdir / "persons.csv", persons_csv_text(trace))
    atomic_write_text(outdir / "tracks.csv", tracks_csv_text(trace))
    all_detections = [d for f in trace.frames for d in f.detections]
    atomic_write_text(outdir / "detections.csv", detection_log_text(all_detections))
    atomic_write_text(outdir / "metrics.json", metrics_json_text(trace))
