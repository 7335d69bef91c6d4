"""Grid planning over costmaps: 8-connected A* with a Dijkstra cross-check.

A step into cell v costs its metric length times (1 + w * c(v) / 252);
cells at 253 or above are untraversable. Diagonal moves may not cut
corners: both adjacent orthogonal cells must be traversable too.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .costmap import Costmap, INSCRIBED_COST, MAX_SOCIAL_COST
from .geometry import OutOfBounds

_SQRT2 = math.sqrt(2.0)
_MOVES = (
    (1, 0, 1.0),
    (-1, 0, 1.0),
    (0, 1, 1.0),
    (0, -1, 1.0),
    (1, 1, _SQRT2),
    (1, -1, _SQRT2),
    (-1, 1, _SQRT2),
    (-1, -1, _SQRT2),
)


class NoPath(RuntimeError):
    """The goal is unreachable on the given costmap."""


class InvalidRequest(ValueError):
    """Start or goal is off-map or sits on an untraversable cell."""


@dataclass(frozen=True)
class PlanRequest:
    """World-frame start and goal plus the cost weighting exponent w >= 0."""

    start: tuple
    goal: tuple
    cost_weight: float = 10.0

    def __post_init__(self):
        if self.cost_weight < 0:
            raise ValueError("cost_weight must be non-negative")


@dataclass
class PlannerPath:
    """A planned path: cell indices, their world centers, and the total cost."""

    cells: list
    points: list
    total_cost: float

    def length(self) -> float:
        """Metric polyline length of the path."""
        if len(self.points) < 2:
            return 0.0
        pts = np.asarray(self.points)
        return float(np.sum(np.hypot(*np.diff(pts, axis=0).T)))


def _validate_endpoints(costmap: Costmap, request: PlanRequest):
    try:
        start = costmap.spec.world_to_cell(request.start)
        goal = costmap.spec.world_to_cell(request.goal)
    except OutOfBounds as exc:
        raise InvalidRequest(str(exc)) from None
    if costmap.cells[start[1], start[0]] >= INSCRIBED_COST:
        raise InvalidRequest(f"start cell {start} is untraversable")
    if costmap.cells[goal[1], goal[0]] >= INSCRIBED_COST:
        raise InvalidRequest(f"goal cell {goal} is untraversable")
    return start, goal


def _step_costs(costmap: Costmap, cost_weight: float):
    """(blocked mask, per-cell step factor) shared by A* and Dijkstra."""
    grid = costmap.cells
    blocked = grid >= INSCRIBED_COST
    factor = 1.0 + cost_weight * grid.astype(float) / MAX_SOCIAL_COST
    return blocked, factor


def astar(costmap: Costmap, request: PlanRequest) -> PlannerPath:
    """Optimal 8-connected path under the weighted-cost metric.

    The heuristic is the Euclidean distance between cell centers, which
    never exceeds the true remaining cost (every step costs at least its
    length). Ties on f break toward smaller h, then row-major cell index.
    """
    start, goal = _validate_endpoints(costmap, request)
    spec = costmap.spec
    blocked, factor = _step_costs(costmap, request.cost_weight)
    res = spec.resolution
    width, height = spec.width, spec.height
    goal_ix, goal_iy = goal

    def heuristic(ix, iy):
        return res * math.hypot(ix - goal_ix, iy - goal_iy)

    g = np.full((height, width), np.inf)
    parent = np.full((height, width), -1, dtype=np.int64)
    g[start[1], start[0]] = 0.0
    h0 = heuristic(*start)
    heap = [(h0, h0, start[1] * width + start[0], start[0], start[1])]
    while heap:
        f, _, _, ix, iy = heapq.heappop(heap)
        best = g[iy, ix]
        if f > best + heuristic(ix, iy) + 1e-12:
            continue  # stale entry
        if (ix, iy) == goal:
            break
        for dx, dy, length in _MOVES:
            nx, ny = ix + dx, iy + dy
            if not (0 <= nx < width and 0 <= ny < height):
                continue
            if blocked[ny, nx]:
                continue
            if dx != 0 and dy != 0 and (blocked[iy, nx] or blocked[ny, ix]):
                continue  # no cutting corners past untraversable cells
            step = res * length * factor[ny, nx]
            ng = best + step
            if ng < g[ny, nx]:
                g[ny, nx] = ng
                parent[ny, nx] = iy * width + ix
                nh = heuristic(nx, ny)
                heapq.heappush(heap, (ng + nh, nh, ny * width + nx, nx, ny))
    total = g[goal[1], goal[0]]
    if not math.isfinite(total):
        raise NoPath(f"no route from cell {start} to cell {goal}")

    cells = [goal]
    while cells[-1] != start:
        code = parent[cells[-1][1], cells[-1][0]]
        cells.append((int(code % width), int(code // width)))
    cells.reverse()
    points = [tuple(spec.cell_center(ix, iy)) for ix, iy in cells]
    return PlannerPath(cells=cells, points=points, total_cost=float(total))


def dijkstra_oracle(costmap: Costmap, request: PlanRequest) -> float:
    """Minimal path cost by uniform-cost search over the identical step graph."""
    start, goal = _validate_endpoints(costmap, request)
    spec = costmap.spec
    blocked, factor = _step_costs(costmap, request.cost_weight)
    res = spec.resolution
    width, height = spec.width, spec.height

    g = np.full((height, width), np.inf)
    g[start[1], start[0]] = 0.0
    heap = [(0.0, start[1] * width + start[0], start[0], start[1])]
    while heap:
        cost, _, ix, iy = heapq.heappop(heap)
        if cost > g[iy, ix] + 1e-12:
            continue
        if (ix, iy) == goal:
            return float(cost)
        for dx, dy, length in _MOVES:
            nx, ny = ix + dx, iy + dy
            if not (0 <= nx < width and 0 <= ny < height):
                continue
            if blocked[ny, nx]:
                continue
            if dx != 0 and dy != 0 and (blocked[iy, nx] or blocked[ny, ix]):
                continue
            ng = cost + res * length * factor[ny, nx]
            if ng < g[ny, nx]:
                g[ny, nx] = ng
                heapq.heappush(heap, (ng, ny * width + nx, nx, ny))
    raise NoPath(f"no route from cell {start} to cell {goal}")


def replan_policy(now: float, last_plan: float, period: float, costmap_changed: bool) -> bool:
    """Replan when the period has elapsed or the costmap changed semantically."""
    if period <= 0:
        raise ValueError("period must be positive")
    return costmap_changed or (now - last_plan) >= period
