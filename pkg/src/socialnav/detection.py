"""Scored pedestrian detections and their projection to ground-plane measurements."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .geometry import Homography, PixelBBox


class UnknownCamera(KeyError):
    """A detection references a camera id that is not registered."""


@dataclass(frozen=True)
class Detection:
    """One detector hit: where in the image, when, and how confident."""

    camera_id: str
    timestamp: float
    bbox: PixelBBox
    score: float


@dataclass(frozen=True)
class CameraModel:
    """Calibration needed to turn an image detection into a ground position.

    homography maps image pixels onto the ground plane.
    measurement_noise_std is the scalar world-frame position noise (meters)
    attributed to measurements from this camera.
    """

    homography: Homography
    image_width: int
    image_height: int
    measurement_noise_std: float = 0.05

    def __post_init__(self):
        if self.image_width < 1 or self.image_height < 1:
            raise ValueError("image dimensions must be positive")
        if self.measurement_noise_std <= 0:
            raise ValueError("measurement_noise_std must be positive")


# Registry: camera id -> CameraModel
CameraRegistry = dict


@dataclass(frozen=True)
class GroundMeasurement:
    """A detection projected onto the ground plane, ready for tracking."""

    x: float
    y: float
    timestamp: float
    camera_id: str
    noise_std: float

    @property
    def position(self) -> np.ndarray:
        return np.array([self.x, self.y])


def threshold_filter(batch, threshold):
    """Keep detections whose score is at or above the threshold, preserving order."""
    return [d for d in batch if d.score >= threshold]


def ground_measurements(batch, registry):
    """Project a batch of detections to ground measurements via their cameras.

    Raises UnknownCamera when a detection names a camera missing from the
    registry.
    """
    out = []
    for det in batch:
        try:
            cam = registry[det.camera_id]
        except KeyError:
            raise UnknownCamera(det.camera_id) from None
        ground = cam.homography.apply(det.bbox.ground_point())
        out.append(
            GroundMeasurement(
                x=float(ground[0]),
                y=float(ground[1]),
                timestamp=det.timestamp,
                camera_id=det.camera_id,
                noise_std=cam.measurement_noise_std,
            )
        )
    return out


_LOG_HEADER = "t,camera_id,x,y,w,h,score"


def detection_log_text(detections) -> str:
    """Render detections as CSV rows `t,camera_id,x,y,w,h,score`."""
    lines = [_LOG_HEADER]
    for d in detections:
        if "," in d.camera_id:
            raise ValueError(f"camera id {d.camera_id!r} must not contain commas")
        b = d.bbox
        lines.append(
            f"{d.timestamp:.6g},{d.camera_id},{b.x:.6g},{b.y:.6g},"
            f"{b.w:.6g},{b.h:.6g},{d.score:.6g}"
        )
    return "\n".join(lines) + "\n"


def write_detection_log(path, detections):
    Path(path).write_text(detection_log_text(detections), encoding="utf-8")


def read_detection_log(path):
    """Read a CSV detection log written by write_detection_log."""
    text = Path(path).read_text(encoding="utf-8")
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != _LOG_HEADER:
        raise ValueError(f"not a detection log: missing header {_LOG_HEADER!r}")
    out = []
    for ln in lines[1:]:
        t, cam, x, y, w, h, score = ln.split(",")
        out.append(
            Detection(
                camera_id=cam,
                timestamp=float(t),
                bbox=PixelBBox(float(x), float(y), float(w), float(h)),
                score=float(score),
            )
        )
    return out
