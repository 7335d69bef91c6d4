"""Layered occupancy costmaps on a 0..254 scale.

254 marks lethal obstacle cells, 253 the inscribed band around them, and
0..252 carries scaled social cost. Layers over the same grid fuse by
cellwise maximum, so no layer can erase another's cost.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import shapely
from scipy.ndimage import distance_transform_edt

from .fileio import atomic_write_bytes, atomic_write_text
from .geometry import GridSpec
from .social import SocialParams, interaction_cost, person_cost

LETHAL_COST = 254
INSCRIBED_COST = 253
MAX_SOCIAL_COST = 252


class SpecMismatch(ValueError):
    """Layers over different grids cannot be fused."""


@dataclass
class Costmap:
    """A grid of integer costs; cells is (height, width) indexed [iy, ix]."""

    spec: GridSpec
    cells: np.ndarray

    def __post_init__(self):
        expected = (self.spec.height, self.spec.width)
        if self.cells.shape != expected:
            raise ValueError(f"cells shape {self.cells.shape} does not match grid {expected}")
        self.cells = self.cells.astype(np.uint8, copy=False)

    def copy(self) -> "Costmap":
        return Costmap(self.spec, self.cells.copy())

    def cost_at(self, point) -> int:
        """Cost of the cell containing a world point; raises OutOfBounds."""
        ix, iy = self.spec.world_to_cell(point)
        return int(self.cells[iy, ix])


@dataclass
class ObstacleSet:
    """Static obstacles: world polygons and/or explicitly occupied cells."""

    polygons: list = field(default_factory=list)
    cells: list = field(default_factory=list)

    @staticmethod
    def empty() -> "ObstacleSet":
        return ObstacleSet()


@dataclass(frozen=True)
class InflationParams:
    """Exponential cost decay around lethal cells.

    Cells within inscribed_radius of a lethal cell get 253; beyond that the
    cost falls off as exp(-decay_rate * (d - inscribed_radius)) out to
    cutoff_radius.
    """

    inscribed_radius: float = 0.3
    decay_rate: float = 5.0
    cutoff_radius: float = 1.5

    def __post_init__(self):
        if self.inscribed_radius < 0:
            raise ValueError("inscribed_radius must be non-negative")
        if self.decay_rate <= 0:
            raise ValueError("decay_rate must be positive")
        if self.cutoff_radius < self.inscribed_radius:
            raise ValueError("cutoff_radius must be at least inscribed_radius")


def rasterize_static(spec: GridSpec, obstacles: ObstacleSet | None = None) -> Costmap:
    """Mark cells whose center lies inside any obstacle polygon (or is
    explicitly listed) as lethal."""
    cells = np.zeros((spec.height, spec.width), dtype=np.uint8)
    if obstacles is None:
        return Costmap(spec, cells)
    if obstacles.polygons:
        centers = spec.cell_centers()
        xs = centers[..., 0].ravel()
        ys = centers[..., 1].ravel()
        for polygon in obstacles.polygons:
            poly = shapely.Polygon(np.asarray(polygon, dtype=float))
            inside = shapely.contains_xy(poly, xs, ys).reshape(spec.height, spec.width)
            cells[inside] = LETHAL_COST
    for ix, iy in obstacles.cells:
        if not (0 <= ix < spec.width and 0 <= iy < spec.height):
            raise ValueError(f"occupied cell ({ix}, {iy}) outside the grid")
        cells[iy, ix] = LETHAL_COST
    return Costmap(spec, cells)


def inflate(costmap: Costmap, params: InflationParams | None = None) -> Costmap:
    """Spread cost outward from lethal cells; never decreases any cell.

    Distances are Euclidean between cell centers, in meters. Radius
    comparisons get a 1e-9 slack so a cell sitting exactly on a band
    boundary (3 cells at 0.1 m resolution vs a 0.3 m radius, say) lands
    inside it regardless of rounding in the distance transform.
    """
    if params is None:
        params = InflationParams()
    lethal = costmap.cells >= LETHAL_COST
    if not lethal.any():
        return costmap.copy()
    distance = distance_transform_edt(~lethal, sampling=costmap.spec.resolution)
    falloff = np.exp(-params.decay_rate * np.maximum(distance - params.inscribed_radius, 0.0))
    contribution = np.where(
        distance <= params.inscribed_radius + 1e-9,
        float(INSCRIBED_COST),
        np.where(
            distance <= params.cutoff_radius + 1e-9,
            np.rint(MAX_SOCIAL_COST * falloff),
            0.0,
        ),
    ).astype(np.uint8)
    return Costmap(costmap.spec, np.maximum(costmap.cells, contribution))


def rasterize_social(
    spec: GridSpec,
    persons,
    interactions=(),
    params: SocialParams | None = None,
    *,
    handover_gate_enabled: bool = True,
) -> Costmap:
    """Sample every person and interaction field at cell centers.

    The continuous [0, 1] costs fuse by maximum and scale to 0..252.
    """
    if params is None:
        params = SocialParams()
    centers = spec.cell_centers()
    combined = np.zeros((spec.height, spec.width))
    for person in persons:
        combined = np.maximum(
            combined,
            person_cost(centers, person, params, handover_gate_enabled=handover_gate_enabled),
        )
    for interaction in interactions:
        combined = np.maximum(combined, interaction_cost(centers, interaction))
    return Costmap(spec, np.rint(MAX_SOCIAL_COST * combined).astype(np.uint8))


def fuse(layers) -> Costmap:
    """Cellwise maximum of costmap layers over one common grid."""
    layers = list(layers)
    if not layers:
        raise ValueError("fuse needs at least one layer")
    spec = layers[0].spec
    for layer in layers[1:]:
        if layer.spec != spec:
            raise SpecMismatch(f"grid {layer.spec} differs from {spec}")
    return Costmap(spec, np.maximum.reduce([layer.cells for layer in layers]).copy())


def write_pgm(path, costmap: Costmap):
    """Binary PGM dump for visual inspection.

    Rows run top-to-bottom from max y to min y; lethal cells are brightened
    to 255 so they stand out from the inscribed band.
    """
    img = costmap.cells.astype(np.uint8).copy()
    img[img == LETHAL_COST] = 255
    img = np.flipud(img)
    header = f"P5\n{costmap.spec.width} {costmap.spec.height}\n255\n".encode("ascii")
    atomic_write_bytes(path, header + img.tobytes())


def write_field_pgm(path, spec: GridSpec, values: np.ndarray):
    """Greyscale PGM of a continuous field; values are clipped to [0, 1]
    and mapped so cost 1.0 renders white."""
    values = np.asarray(values, dtype=float)
    if values.shape != (spec.height, spec.width):
        raise ValueError("values shape does not match the grid")
    img = np.rint(np.clip(values, 0.0, 1.0) * 255.0).astype(np.uint8)
    img = np.flipud(img)
    header = f"P5\n{spec.width} {spec.height}\n255\n".encode("ascii")
    atomic_write_bytes(path, header + img.tobytes())


_GRID_HEADER = "origin_x,origin_y,resolution,width,height"


def write_grid_csv(path, spec: GridSpec, values: np.ndarray):
    """CSV grid dump: a header describing the grid, then one row per iy
    starting at iy = 0 (the bottom row)."""
    values = np.asarray(values)
    if values.shape != (spec.height, spec.width):
        raise ValueError("values shape does not match the grid")
    lines = [
        _GRID_HEADER,
        f"{spec.origin_x:.6g},{spec.origin_y:.6g},{spec.resolution:.6g},{spec.width},{spec.height}",
    ]
    integral = np.issubdtype(values.dtype, np.integer)
    for row in values:
        if integral:
            lines.append(",".join(str(int(v)) for v in row))
        else:
            lines.append(",".join(f"{float(v):.6g}" for v in row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_grid_csv(path):
    """Read a CSV grid dump; returns (GridSpec, float array (height, width))."""
    text = Path(path).read_text(encoding="utf-8")
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != _GRID_HEADER:
        raise ValueError(f"not a grid dump: missing header {_GRID_HEADER!r}")
    ox, oy, res, width, height = lines[1].split(",")
    spec = GridSpec(float(ox), float(oy), float(res), int(width), int(height))
    rows = [np.array([float(v) for v in ln.split(",")]) for ln in lines[2:]]
    values = np.vstack(rows)
    if values.shape != (spec.height, spec.width):
        raise ValueError("grid dump has inconsistent dimensions")
    return spec, values


def write_costmap_csv(path, costmap: Costmap):
    write_grid_csv(path, costmap.spec, costmap.cells)


def read_costmap_csv(path) -> Costmap:
    spec, values = read_grid_csv(path)
    cells = np.rint(values)
    if cells.min() < 0 or cells.max() > LETHAL_COST:
        raise ValueError("costmap values must lie in 0..254")
    return Costmap(spec, cells.astype(np.uint8))
