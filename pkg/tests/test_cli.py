import json
import math

import numpy as np
import pytest

from socialnav.cli import EXIT_ERROR, EXIT_NO_PATH, EXIT_OK, EXIT_TIME_LIMIT, main
from socialnav.costmap import Costmap, LETHAL_COST, read_grid_csv, write_costmap_csv
from socialnav.geometry import GridSpec


def small_scenario(tmp_path, **extra):
    data = {
        "grid": {"origin": [0.0, 0.0], "resolution": 0.1, "width": 60, "height": 30},
        "robot": {"start": [1.0, 1.5], "v_max": 0.6},
        "goals": [{"goal": [4.5, 1.5]}],
        "time_limit": 20.0,
    }
    data.update(extra)
    path = tmp_path / "small.json"
    path.write_text(json.dumps(data))
    return path


class TestSimulate:
    def test_happy_path(self, tmp_path, capsys):
        scenario = small_scenario(tmp_path)
        out = tmp_path / "run"
        code = main(["simulate", "--scenario", str(scenario), "--out", str(out)])
        assert code == EXIT_OK
        assert (out / "trace.csv").exists()
        assert (out / "metrics.json").exists()
        stdout = capsys.readouterr().out
        assert "goal_reached: True" in stdout

    def test_time_limit_exit_code(self, tmp_path):
        scenario = small_scenario(tmp_path, time_limit=1.0)
        code = main(["simulate", "--scenario", str(scenario), "--out", str(tmp_path / "run")])
        assert code == EXIT_TIME_LIMIT

    def test_missing_scenario(self, tmp_path, capsys):
        code = main(["simulate", "--scenario", str(tmp_path / "nope.json"), "--out", str(tmp_path)])
        assert code == EXIT_ERROR
        assert "error:" in capsys.readouterr().err

    def test_invalid_scenario_json(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{oops")
        code = main(["simulate", "--scenario", str(bad), "--out", str(tmp_path / "run")])
        assert code == EXIT_ERROR
        assert "not valid JSON" in capsys.readouterr().err

    def test_dump_costmaps(self, tmp_path):
        scenario = small_scenario(tmp_path, obstacles={"cells": [[30, 15]]})
        out = tmp_path / "run"
        code = main(
            ["simulate", "--scenario", str(scenario), "--out", str(out), "--dump-costmaps"]
        )
        assert code == EXIT_OK
        for name in ("costmap_static.csv", "costmap_static.pgm", "costmap_final.csv", "costmap_final.pgm"):
            assert (out / name).exists(), name

    def test_render_writes_svg(self, tmp_path):
        scenario = small_scenario(tmp_path)
        out = tmp_path / "run"
        main(["simulate", "--scenario", str(scenario), "--out", str(out), "--render"])
        svg = (out / "trajectory.svg").read_text()
        assert svg.startswith("<svg") or "<svg" in svg.splitlines()[0]

    def test_rerun_is_byte_identical(self, tmp_path):
        scenario = small_scenario(tmp_path)
        out1 = tmp_path / "a"
        out2 = tmp_path / "b"
        main(["simulate", "--scenario", str(scenario), "--out", str(out1), "--seed", "5"])
        main(["simulate", "--scenario", str(scenario), "--out", str(out2), "--seed", "5"])
        for name in ("trace.csv", "metrics.json", "persons.csv", "tracks.csv", "detections.csv"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes(), name


class TestCostfield:
    def test_walking_field_samples(self, tmp_path):
        out = tmp_path / "cf"
        code = main(
            [
                "costfield",
                "--posture", "walking",
                "--at", "0,0",
                "--heading", "0",
                "--speed", "1.0",
                "--grid=-2.25,-2.25,0.5,10,10",
                "--out", str(out),
            ]
        )
        assert code == EXIT_OK
        spec, field = read_grid_csv(out / "costfield.csv")
        grid = field.reshape(spec.height, spec.width)

        def value_at(x, y):
            # cell centers sit on the integer lattice for this grid
            ix, iy = spec.world_to_cell((x, y))
            cx, cy = spec.cell_center(ix, iy)
            assert (cx, cy) == (x, y)
            return grid[iy, ix]

        # unit-speed walker: one sigma ahead 1.0, behind 0.5, beside 2/3
        # (CSV keeps 6 significant digits)
        assert value_at(1.0, 0.0) == pytest.approx(math.exp(-0.5), abs=1e-6)
        assert value_at(-1.0, 0.0) == pytest.approx(math.exp(-2.0), abs=1e-6)
        assert value_at(0.0, 1.0) == pytest.approx(math.exp(-1.125), abs=1e-6)
        assert (out / "costfield.pgm").exists()

    def test_interaction_field(self, tmp_path):
        out = tmp_path / "cf"
        code = main(
            [
                "costfield",
                "--interaction=-1,0,1,0",
                "--grid=-2,-2,0.5,9,9",
                "--out", str(out),
            ]
        )
        assert code == EXIT_OK
        spec, field = read_grid_csv(out / "costfield.csv")
        grid = field.reshape(spec.height, spec.width)
        ix, iy = spec.world_to_cell((0.0, 0.0))
        assert grid[iy, ix] == pytest.approx(1.0)
        ix, iy = spec.world_to_cell((0.0, -2.0))
        assert grid[iy, ix] == pytest.approx(0.0)

    def test_requires_exactly_one_mode(self, tmp_path, capsys):
        code = main(["costfield", "--out", str(tmp_path)])
        assert code == EXIT_ERROR
        assert "exactly one" in capsys.readouterr().err
        code = main(
            ["costfield", "--posture", "seated", "--interaction", "0,0,1,0", "--out", str(tmp_path)]
        )
        assert code == EXIT_ERROR

    def test_bad_grid_string(self, tmp_path, capsys):
        code = main(["costfield", "--posture", "seated", "--grid", "1,2", "--out", str(tmp_path)])
        assert code == EXIT_ERROR


def write_map(path, cells, resolution=1.0):
    h, w = cells.shape
    spec = GridSpec(0.0, 0.0, resolution, w, h)
    write_costmap_csv(path, Costmap(spec, cells.astype(np.uint8)))


class TestPlan:
    def test_diagonal(self, tmp_path, capsys):
        cm = tmp_path / "map.csv"
        write_map(cm, np.zeros((5, 5)))
        code = main(["plan", "--costmap", str(cm), "--start", "0.5,0.5", "--goal", "4.5,4.5"])
        assert code == EXIT_OK
        out = capsys.readouterr().out
        lines = out.strip().splitlines()
        assert lines[0] == "seq,x,y"
        assert lines[1] == "0,0.5,0.5"
        total = float(lines[-1].split(",")[1])
        assert total == pytest.approx(4 * math.sqrt(2), abs=1e-4)

    def test_start_equals_goal(self, tmp_path, capsys):
        cm = tmp_path / "map.csv"
        write_map(cm, np.zeros((5, 5)))
        code = main(["plan", "--costmap", str(cm), "--start", "1.5,1.5", "--goal", "1.5,1.5"])
        assert code == EXIT_OK
        assert "total_cost,0" in capsys.readouterr().out

    def test_no_path_exit_code(self, tmp_path, capsys):
        cells = np.zeros((5, 5))
        cells[:, 2] = LETHAL_COST
        cm = tmp_path / "map.csv"
        write_map(cm, cells)
        code = main(["plan", "--costmap", str(cm), "--start", "0.5,0.5", "--goal", "4.5,0.5"])
        assert code == EXIT_NO_PATH
        assert "no path" in capsys.readouterr().err

    def test_bad_endpoint(self, tmp_path, capsys):
        cm = tmp_path / "map.csv"
        write_map(cm, np.zeros((5, 5)))
        code = main(["plan", "--costmap", str(cm), "--start=-9,0", "--goal", "4.5,0.5"])
        assert code == EXIT_ERROR

    def test_writes_path_csv(self, tmp_path, capsys):
        cm = tmp_path / "map.csv"
        write_map(cm, np.zeros((5, 5)))
        out = tmp_path / "plan"
        main(
            ["plan", "--costmap", str(cm), "--start", "0.5,0.5", "--goal", "4.5,0.5", "--out", str(out)]
        )
        capsys.readouterr()
        text = (out / "path.csv").read_text()
        assert text.splitlines()[0] == "seq,x,y"
        assert len(text.splitlines()) == 6
