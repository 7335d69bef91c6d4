"""SVG rendering of a finished run: costmap shading, paths, people."""

from __future__ import annotations

import numpy as np

from .costmap import Costmap, INSCRIBED_COST, LETHAL_COST
from .fileio import atomic_write_text

_SCALE = 60.0  # svg px per meter


def _grey(cost: int) -> str:
    if cost >= LETHAL_COST:
        return "#1a1a1a"
    if cost >= INSCRIBED_COST:
        return "#4d4d4d"
    level = int(round(255 - (cost / 252.0) * 170))
    return f"#{level:02x}{level:02x}{level:02x}"


class _Canvas:
    def __init__(self, extent):
        self.x0, self.y0, self.x1, self.y1 = extent
        self.width = (self.x1 - self.x0) * _SCALE
        self.height = (self.y1 - self.y0) * _SCALE
        self.parts = []

    def to_px(self, x, y):
        return (x - self.x0) * _SCALE, (self.y1 - y) * _SCALE

    def rect(self, x, y, w, h, fill):
        px, py = self.to_px(x, y + h)
        self.parts.append(
            f'<rect x="{px:.1f}" y="{py:.1f}" width="{w * _SCALE:.1f}" '
            f'height="{h * _SCALE:.1f}" fill="{fill}"/>'
        )

    def circle(self, x, y, radius_m, fill, opacity=1.0):
        px, py = self.to_px(x, y)
        self.parts.append(
            f'<circle cx="{px:.1f}" cy="{py:.1f}" r="{radius_m * _SCALE:.1f}" '
            f'fill="{fill}" fill-opacity="{opacity}"/>'
        )

    def polyline(self, points, stroke, width=2.0, dash=None):
        if len(points) < 2:
            return
        coords = " ".join(f"{px:.1f},{py:.1f}" for px, py in (self.to_px(x, y) for x, y in points))
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        self.parts.append(
            f'<polyline points="{coords}" fill="none" stroke="{stroke}" '
            f'stroke-width="{width}"{dash_attr}/>'
        )

    def arrow(self, x, y, heading, length_m, stroke):
        tip = (x + length_m * np.cos(heading), y + length_m * np.sin(heading))
        self.polyline([(x, y), tip], stroke, width=2.5)

    def text(self):
        return (
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width:.0f}" '
            f'height="{self.height:.0f}" viewBox="0 0 {self.width:.0f} {self.height:.0f}">\n'
            + "\n".join(self.parts)
            + "\n</svg>\n"
        )


def _draw_costmap(canvas: _Canvas, costmap: Costmap):
    spec = costmap.spec
    cells = costmap.cells
    # Merge runs of equal cost along each row to keep the file small.
    for iy in range(spec.height):
        row = cells[iy]
        ix = 0
        while ix < spec.width:
            cost = row[ix]
            run = ix
            while run < spec.width and row[run] == cost:
                run += 1
            if cost > 0:
                canvas.rect(
                    spec.origin_x + ix * spec.resolution,
                    spec.origin_y + iy * spec.resolution,
                    (run - ix) * spec.resolution,
                    spec.resolution,
                    _grey(int(cost)),
                )
            ix = run


def render_costmap_svg(costmap: Costmap) -> str:
    canvas = _Canvas(costmap.spec.extent)
    canvas.rect(canvas.x0, canvas.y0, canvas.x1 - canvas.x0, canvas.y1 - canvas.y0, "#ffffff")
    _draw_costmap(canvas, costmap)
    return canvas.text()


def render_trace_svg(trace, costmap: Costmap | None = None) -> str:
    """Overlay robot and person trajectories on the final costmap."""
    sc = trace.scenario
    canvas = _Canvas(sc.grid.extent)
    canvas.rect(canvas.x0, canvas.y0, canvas.x1 - canvas.x0, canvas.y1 - canvas.y0, "#ffffff")
    if costmap is not None:
        _draw_costmap(canvas, costmap)

    person_tracks: dict = {}
    for frame in trace.frames:
        for snap in frame.persons:
            person_tracks.setdefault(snap.id, []).append((snap.x, snap.y))
    palette = ["#c0392b", "#8e44ad", "#d35400", "#16a085"]
    for i, (pid, pts) in enumerate(sorted(person_tracks.items())):
        color = palette[i % len(palette)]
        canvas.polyline(pts, color, width=1.5, dash="4,3")
        canvas.circle(pts[-1][0], pts[-1][1], 0.18, color, opacity=0.9)

    robot_pts = [(f.robot_x, f.robot_y) for f in trace.frames]
    canvas.polyline(robot_pts, "#2471a3", width=2.5)
    first, last = trace.frames[0], trace.frames[-1]
    canvas.circle(first.robot_x, first.robot_y, 0.12, "#2471a3")
    canvas.circle(last.robot_x, last.robot_y, 0.15, "#1b4f72")
    canvas.arrow(last.robot_x, last.robot_y, last.robot_heading, 0.35, "#1b4f72")

    if last.goal is not None:
        canvas.circle(last.goal[0], last.goal[1], 0.1, "#1e8449")

    for frame in trace.frames:
        for cx, cy, radius, _ in frame.interactions:
            canvas.circle(cx, cy, radius, "#f1c40f", opacity=0.02)

    return canvas.text()


def write_trace_svg(path, trace, costmap: Costmap | None = None):
    atomic_write_text(path, render_trace_svg(trace, costmap))
