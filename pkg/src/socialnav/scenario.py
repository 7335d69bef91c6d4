"""Scenario files: the JSON schema, loading, and semantic validation.

A scenario describes the world (grid, obstacles, cameras), the people and
objects in it, a timed event script, the robot, and every tunable the
simulator consumes. Four ready-made scenario files ship inside the
package; bundled_scenario_path() locates them by name.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
import jsonschema

from .costmap import InflationParams, ObstacleSet
from .detection import CameraModel
from .geometry import GridSpec, Homography
from .social import SocialParams
from .tracking import AssociationParams, LifecycleParams


class SchemaError(ValueError):
    """The scenario JSON does not match the schema; names the failing field."""


class ValidationError(ValueError):
    """The scenario is well-formed but semantically inconsistent."""


_POINT = {
    "type": "array",
    "minItems": 2,
    "maxItems": 2,
    "items": {"type": "number"},
}

_DETECTOR = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "pixel_noise_std": {"type": "number", "minimum": 0},
        "miss_prob": {"type": "number", "minimum": 0, "maximum": 1},
        "clutter_rate": {"type": "number", "minimum": 0},
        "score_mean_tp": {"type": "number"},
        "score_std_tp": {"type": "number", "exclusiveMinimum": 0},
        "score_mean_fp": {"type": "number"},
        "score_std_fp": {"type": "number", "exclusiveMinimum": 0},
    },
}

_CAMERA = {
    "type": "object",
    "required": ["homography", "image_width", "image_height", "fov"],
    "additionalProperties": False,
    "properties": {
        "homography": {
            "type": "array",
            "minItems": 9,
            "maxItems": 9,
            "items": {"type": "number"},
        },
        "image_width": {"type": "integer", "minimum": 1},
        "image_height": {"type": "integer", "minimum": 1},
        "measurement_noise_std": {"type": "number", "exclusiveMinimum": 0},
        "pixels_per_meter": {"type": "number", "exclusiveMinimum": 0},
        "fov": {"type": "array", "minItems": 3, "items": _POINT},
        "detector": _DETECTOR,
    },
}

_WAYPOINT = {
    "type": "object",
    "required": ["target", "speed"],
    "additionalProperties": False,
    "properties": {
        "time": {"type": "number", "minimum": 0},
        "target": _POINT,
        "speed": {"type": "number", "exclusiveMinimum": 0},
    },
}

_PERSON = {
    "type": "object",
    "required": ["id", "position"],
    "additionalProperties": False,
    "properties": {
        "id": {"type": "string", "minLength": 1},
        "position": _POINT,
        "facing": {"type": "number"},
        "posture": {"enum": ["standing", "seated"]},
        "waypoints": {"type": "array", "items": _WAYPOINT},
    },
}

_EVENT = {
    "type": "object",
    "required": ["time", "kind"],
    "additionalProperties": False,
    "properties": {
        "time": {"type": "number", "minimum": 0},
        "kind": {
            "enum": [
                "start_walking",
                "interaction_on",
                "interaction_off",
                "handover_request",
                "set_goal",
            ]
        },
        "person": {"type": "string"},
        "object": {"type": "string"},
        "importance": {"type": "number", "minimum": 0, "maximum": 1},
        "goal": _POINT,
    },
}

SCENARIO_SCHEMA = {
    "type": "object",
    "required": ["grid", "robot"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string"},
        "grid": {
            "type": "object",
            "required": ["origin", "resolution", "width", "height"],
            "additionalProperties": False,
            "properties": {
                "origin": _POINT,
                "resolution": {"type": "number", "exclusiveMinimum": 0},
                "width": {"type": "integer", "minimum": 1},
                "height": {"type": "integer", "minimum": 1},
            },
        },
        "obstacles": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "polygons": {
                    "type": "array",
                    "items": {"type": "array", "minItems": 3, "items": _POINT},
                },
                "cells": {
                    "type": "array",
                    "items": {
                        "type": "array",
                        "minItems": 2,
                        "maxItems": 2,
                        "items": {"type": "integer", "minimum": 0},
                    },
                },
            },
        },
        "cameras": {"type": "object", "additionalProperties": _CAMERA},
        "persons": {"type": "array", "items": _PERSON},
        "objects": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "position"],
                "additionalProperties": False,
                "properties": {
                    "id": {"type": "string", "minLength": 1},
                    "position": _POINT,
                },
            },
        },
        "events": {"type": "array", "items": _EVENT},
        "robot": {
            "type": "object",
            "required": ["start"],
            "additionalProperties": False,
            "properties": {
                "start": _POINT,
                "heading": {"type": "number"},
                "v_max": {"type": "number", "exclusiveMinimum": 0},
                "radius": {"type": "number", "exclusiveMinimum": 0},
                "goal_tolerance": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "goals": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["goal"],
                "additionalProperties": False,
                "properties": {
                    "time": {"type": "number", "minimum": 0},
                    "goal": _POINT,
                },
            },
        },
        "seed": {"type": "integer", "minimum": 0},
        "dt": {"type": "number", "exclusiveMinimum": 0},
        "time_limit": {"type": "number", "exclusiveMinimum": 0},
        "detection_threshold": {"type": "number"},
        "planner": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "cost_weight": {"type": "number", "minimum": 0},
                "replan_period": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "tracker": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "gate_threshold": {"type": "number", "exclusiveMinimum": 0},
                "detection_prob": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "clutter_density": {"type": "number", "exclusiveMinimum": 0},
                "unassign_distance": {"type": "number", "exclusiveMinimum": 0},
                "accel_noise": {"type": "number", "exclusiveMinimum": 0},
                "confirm_hits": {"type": "integer", "minimum": 1},
                "confirm_window": {"type": "integer", "minimum": 1},
                "inactivity_limit": {"type": "integer", "minimum": 1},
                "birth_radius": {"type": "number", "exclusiveMinimum": 0},
                "walk_speed_threshold": {"type": "number", "minimum": 0},
            },
        },
        "social": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "standing_sigma_x": {"type": "number", "exclusiveMinimum": 0},
                "standing_sigma_y": {"type": "number", "exclusiveMinimum": 0},
                "walking_min_scale": {"type": "number", "exclusiveMinimum": 0},
                "seated_front": {"type": "number", "exclusiveMinimum": 0},
                "seated_rear": {"type": "number", "exclusiveMinimum": 0},
                "seated_side": {"type": "number", "exclusiveMinimum": 0},
                "overtake_front": {"type": "number", "exclusiveMinimum": 0},
                "overtake_rear": {"type": "number", "exclusiveMinimum": 0},
                "overtake_side": {"type": "number", "exclusiveMinimum": 0},
                "handover_cone_deg": {"type": "number", "exclusiveMinimum": 0},
                "handover_min_distance": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "inflation": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "inscribed_radius": {"type": "number", "minimum": 0},
                "decay_rate": {"type": "number", "exclusiveMinimum": 0},
                "cutoff_radius": {"type": "number", "minimum": 0},
            },
        },
    },
}

DEFAULT_DETECTOR = {
    "pixel_noise_std": 1.0,
    "miss_prob": 0.05,
    "clutter_rate": 0.1,
    "score_mean_tp": 70.0,
    "score_std_tp": 8.0,
    "score_mean_fp": 15.0,
    "score_std_fp": 8.0,
}


@dataclass(frozen=True)
class DetectorParams:
    """Synthetic detector behavior for one camera."""

    pixel_noise_std: float = 1.0
    miss_prob: float = 0.05
    clutter_rate: float = 0.1
    score_mean_tp: float = 70.0
    score_std_tp: float = 8.0
    score_mean_fp: float = 15.0
    score_std_fp: float = 8.0


@dataclass
class CameraSetup:
    """A calibrated camera plus its field of view and detector behavior."""

    model: CameraModel
    fov: np.ndarray
    detector: DetectorParams
    pixels_per_meter: float
    ground_to_image: Homography = None

    def __post_init__(self):
        if self.ground_to_image is None:
            self.ground_to_image = self.model.homography.inverse()


@dataclass(frozen=True)
class WaypointLeg:
    time: float
    target: tuple
    speed: float


@dataclass
class PersonScript:
    """Scripted ground truth for one person."""

    id: str
    position: tuple
    facing: float = 0.0
    seated: bool = False
    legs: list = field(default_factory=list)
    await_start_event: bool = False


@dataclass(frozen=True)
class Event:
    """One timed scenario event; unused fields stay None."""

    time: float
    kind: str
    person: str | None = None
    object: str | None = None
    importance: float = 1.0
    goal: tuple | None = None


@dataclass
class RobotConfig:
    start: tuple
    heading: float = 0.0
    v_max: float = 0.5
    radius: float = 0.3
    goal_tolerance: float = 0.25


@dataclass
class Scenario:
    """A fully resolved scenario, ready for the simulator."""

    name: str
    grid: GridSpec
    obstacles: ObstacleSet
    cameras: dict
    persons: list
    objects: dict
    events: list
    robot: RobotConfig
    seed: int = 0
    dt: float = 0.1
    time_limit: float = 60.0
    detection_threshold: float = 40.0
    association: AssociationParams = field(default_factory=AssociationParams)
    lifecycle: LifecycleParams = field(default_factory=LifecycleParams)
    accel_noise: float = 0.5
    walk_speed_threshold: float = 0.25
    social: SocialParams = field(default_factory=SocialParams)
    inflation: InflationParams = field(default_factory=InflationParams)
    cost_weight: float = 10.0
    replan_period: float = 1.0

    def camera_registry(self) -> dict:
        return {cam_id: setup.model for cam_id, setup in self.cameras.items()}

    def with_seed(self, seed: int) -> "Scenario":
        return dataclasses.replace(self, seed=int(seed))

    def with_grid(self, grid: GridSpec) -> "Scenario":
        return dataclasses.replace(self, grid=grid)


_EVENT_FIELDS = {
    "start_walking": {"required": ["person"], "forbidden": ["object", "goal"]},
    "interaction_on": {"required": ["person", "object"], "forbidden": ["goal"]},
    "interaction_off": {"required": ["person", "object"], "forbidden": ["goal"]},
    "handover_request": {"required": ["person"], "forbidden": ["object", "goal"]},
    "set_goal": {"required": ["goal"], "forbidden": ["person", "object"]},
}


def parse_scenario(data: dict, name: str = "scenario") -> Scenario:
    """Validate a scenario dict and resolve it into a Scenario."""
    try:
        jsonschema.validate(data, SCENARIO_SCHEMA)
    except jsonschema.ValidationError as exc:
        path = ".".join(str(p) for p in exc.absolute_path) or "<root>"
        raise SchemaError(f"{path}: {exc.message}") from None

    g = data["grid"]
    grid = GridSpec(
        origin_x=float(g["origin"][0]),
        origin_y=float(g["origin"][1]),
        resolution=float(g["resolution"]),
        width=int(g["width"]),
        height=int(g["height"]),
    )

    obstacles_data = data.get("obstacles", {})
    obstacles = ObstacleSet(
        polygons=[np.asarray(p, dtype=float) for p in obstacles_data.get("polygons", [])],
        cells=[tuple(c) for c in obstacles_data.get("cells", [])],
    )
    for ix, iy in obstacles.cells:
        if ix >= grid.width or iy >= grid.height:
            raise ValidationError(f"occupied cell ({ix}, {iy}) outside the grid")

    cameras = {}
    for cam_id, cam in data.get("cameras", {}).items():
        try:
            homography = Homography(cam["homography"])
        except ValueError as exc:
            raise ValidationError(f"camera {cam_id!r}: {exc}") from None
        detector = dict(DEFAULT_DETECTOR)
        detector.update(cam.get("detector", {}))
        cameras[cam_id] = CameraSetup(
            model=CameraModel(
                homography=homography,
                image_width=int(cam["image_width"]),
                image_height=int(cam["image_height"]),
                measurement_noise_std=float(cam.get("measurement_noise_std", 0.05)),
            ),
            fov=np.asarray(cam["fov"], dtype=float),
            detector=DetectorParams(**detector),
            pixels_per_meter=float(cam.get("pixels_per_meter", 50.0)),
        )

    person_ids = set()
    persons = []
    for p in data.get("persons", []):
        if p["id"] in person_ids:
            raise ValidationError(f"duplicate person id {p['id']!r}")
        person_ids.add(p["id"])
        legs = []
        last_time = 0.0
        for wp in p.get("waypoints", []):
            t = float(wp.get("time", last_time))
            if t < last_time:
                raise ValidationError(
                    f"person {p['id']!r}: waypoint times must be non-decreasing"
                )
            last_time = t
            legs.append(WaypointLeg(time=t, target=tuple(wp["target"]), speed=float(wp["speed"])))
        persons.append(
            PersonScript(
                id=p["id"],
                position=tuple(p["position"]),
                facing=float(p.get("facing", 0.0)),
                seated=p.get("posture", "standing") == "seated",
                legs=legs,
            )
        )

    objects = {}
    for obj in data.get("objects", []):
        if obj["id"] in objects or obj["id"] in person_ids:
            raise ValidationError(f"duplicate object id {obj['id']!r}")
        objects[obj["id"]] = tuple(obj["position"])

    events = []
    for ev in data.get("events", []):
        kind = ev["kind"]
        rules = _EVENT_FIELDS[kind]
        for fieldname in rules["required"]:
            if fieldname not in ev:
                raise ValidationError(f"{kind} event needs a {fieldname!r} field")
        for fieldname in rules["forbidden"]:
            if fieldname in ev:
                raise ValidationError(f"{kind} event must not carry {fieldname!r}")
        if "person" in ev and ev["person"] not in person_ids:
            raise ValidationError(f"event references unknown person {ev['person']!r}")
        if "object" in ev and ev["object"] not in objects:
            raise ValidationError(f"event references unknown object {ev['object']!r}")
        events.append(
            Event(
                time=float(ev["time"]),
                kind=kind,
                person=ev.get("person"),
                object=ev.get("object"),
                importance=float(ev.get("importance", 1.0)),
                goal=tuple(ev["goal"]) if "goal" in ev else None,
            )
        )

    for goal in data.get("goals", []):
        events.append(Event(time=float(goal.get("time", 0.0)), kind="set_goal", goal=tuple(goal["goal"])))

    events.sort(key=lambda e: e.time)

    await_ids = {e.person for e in events if e.kind == "start_walking"}
    for person in persons:
        person.await_start_event = person.id in await_ids

    r = data["robot"]
    robot = RobotConfig(
        start=tuple(r["start"]),
        heading=float(r.get("heading", 0.0)),
        v_max=float(r.get("v_max", 0.5)),
        radius=float(r.get("radius", 0.3)),
        goal_tolerance=float(r.get("goal_tolerance", 0.25)),
    )
    if not grid.contains(robot.start):
        raise ValidationError("robot start is outside the grid")
    for person in persons:
        if not grid.contains(person.position):
            raise ValidationError(f"person {person.id!r} starts outside the grid")

    tracker = data.get("tracker", {})
    association = AssociationParams(
        gate_threshold=tracker.get("gate_threshold", 9.21),
        detection_prob=tracker.get("detection_prob", 0.9),
        clutter_density=tracker.get("clutter_density", 1e-4),
        unassign_distance=tracker.get("unassign_distance", math.sqrt(9.21)),
    )
    lifecycle = LifecycleParams(
        confirm_hits=tracker.get("confirm_hits", 3),
        confirm_window=tracker.get("confirm_window", 5),
        inactivity_limit=tracker.get("inactivity_limit", 10),
        birth_radius=tracker.get("birth_radius", 0.5),
    )

    planner = data.get("planner", {})
    return Scenario(
        name=data.get("name", name),
        grid=grid,
        obstacles=obstacles,
        cameras=cameras,
        persons=persons,
        objects=objects,
        events=events,
        robot=robot,
        seed=int(data.get("seed", 0)),
        dt=float(data.get("dt", 0.1)),
        time_limit=float(data.get("time_limit", 60.0)),
        detection_threshold=float(data.get("detection_threshold", 40.0)),
        association=association,
        lifecycle=lifecycle,
        accel_noise=float(tracker.get("accel_noise", 0.5)),
        walk_speed_threshold=float(tracker.get("walk_speed_threshold", 0.25)),
        social=SocialParams(**data.get("social", {})),
        inflation=InflationParams(**data.get("inflation", {})),
        cost_weight=float(planner.get("cost_weight", 10.0)),
        replan_period=float(planner.get("replan_period", 1.0)),
    )


def load_scenario(path) -> Scenario:
    """Load and validate a scenario JSON file."""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"<root>: not valid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise SchemaError("<root>: scenario must be a JSON object")
    return parse_scenario(data, name=path.stem)


BUNDLED_SCENARIOS = (
    "experiment1_slalom",
    "experiment2_overtake",
    "experiment3_tv",
    "experiment4_handover",
)


def bundled_scenario_path(name: str) -> Path:
    """Path of a scenario file shipped with the package."""
    candidate = resources.files("socialnav") / "scenarios" / f"{name}.json"
    with resources.as_file(candidate) as path:
        if not path.exists():
            raise FileNotFoundError(
                f"no bundled scenario {name!r}; available: {', '.join(BUNDLED_SCENARIOS)}"
            )
        return Path(path)


def resolve_scenario(ref) -> Scenario:
    """Load a scenario from a filesystem path or a bundled scenario name."""
    path = Path(ref)
    if path.exists():
        return load_scenario(path)
    return load_scenario(bundled_scenario_path(str(ref)))
