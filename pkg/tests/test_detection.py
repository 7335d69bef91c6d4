import math

import numpy as np
import pytest

from socialnav.detection import (
    CameraModel,
    Detection,
    UnknownCamera,
    detection_log_text,
    ground_measurements,
    read_detection_log,
    threshold_filter,
    write_detection_log,
)
from socialnav.geometry import Homography, PixelBBox


def make_camera(scale=0.01, offset=(0.0, 0.0), noise=0.05):
    h = Homography([scale, 0.0, offset[0], 0.0, -scale, offset[1], 0.0, 0.0, 1.0])
    return CameraModel(homography=h, image_width=640, image_height=480, measurement_noise_std=noise)


def det(camera_id="cam", t=0.0, x=100.0, y=50.0, w=20.0, h=40.0, score=70.0):
    return Detection(camera_id, t, PixelBBox(x, y, w, h), score)


def test_threshold_filter_keeps_order():
    batch = [det(score=s) for s in [10.0, 80.0, 40.0, 39.999, 55.0]]
    kept = threshold_filter(batch, 40.0)
    assert [d.score for d in kept] == [80.0, 40.0, 55.0]


def test_threshold_filter_empty():
    assert threshold_filter([], 40.0) == []


def test_ground_measurement_projects_bbox_foot():
    cam = make_camera(scale=0.01, offset=(-1.0, 3.0))
    d = det(x=100.0, y=50.0, w=20.0, h=40.0)
    (m,) = ground_measurements([d], {"cam": cam})
    # foot point = (110, 90) in pixels
    assert m.x == pytest.approx(-1.0 + 0.01 * 110)
    assert m.y == pytest.approx(3.0 - 0.01 * 90)
    assert m.camera_id == "cam"
    assert m.noise_std == pytest.approx(0.05)


def test_ground_measurements_unknown_camera():
    with pytest.raises(UnknownCamera):
        ground_measurements([det(camera_id="nope")], {"cam": make_camera()})


def test_camera_model_validation():
    with pytest.raises(ValueError):
        CameraModel(Homography(np.eye(3)), image_width=0, image_height=480)
    with pytest.raises(ValueError):
        CameraModel(Homography(np.eye(3)), image_width=640, image_height=480, measurement_noise_std=0.0)


def test_detection_log_roundtrip(tmp_path):
    batch = [
        det(camera_id="a", t=0.1, score=70.5),
        det(camera_id="b", t=0.2, x=1.25, y=2.5, w=3.0, h=4.0, score=15.0),
    ]
    path = tmp_path / "detections.csv"
    write_detection_log(path, batch)
    back = read_detection_log(path)
    assert len(back) == 2
    assert back[0].camera_id == "a"
    assert back[1].bbox.x == pytest.approx(1.25)
    assert back[1].score == pytest.approx(15.0)


def test_detection_log_header():
    text = detection_log_text([])
    assert text.splitlines()[0] == "t,camera_id,x,y,w,h,score"


def test_detection_log_rejects_comma_camera_id():
    with pytest.raises(ValueError):
        detection_log_text([det(camera_id="a,b")])


def test_log_floats_use_six_significant_digits():
    text = detection_log_text([det(t=1.0 / 3.0)])
    assert text.splitlines()[1].startswith("0.333333,")
