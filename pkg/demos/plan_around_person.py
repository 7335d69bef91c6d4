"""Plan across a room, with and without a person standing in the way.

Builds a static costmap (walls plus inflation), drops a walking person's
cost field onto it, and plans the same start/goal pair on both maps to
show the detour the social layer buys. Run
`python3 demos/plan_around_person.py`; artifacts land in
demos/output/plan_around_person/.
"""

import math
from pathlib import Path

from socialnav import (
    GridSpec,
    ObstacleSet,
    PersonEstimate,
    PlanRequest,
    Posture,
    astar,
    fuse,
    inflate,
    rasterize_social,
    rasterize_static,
    write_pgm,
)

out = Path(__file__).parent / "output" / "plan_around_person"
out.mkdir(parents=True, exist_ok=True)

# An 8 x 4 m corridor; walls along the top and bottom edges.
spec = GridSpec(origin_x=0.0, origin_y=0.0, resolution=0.05, width=160, height=80)
walls = ObstacleSet(
    polygons=[
        [(0.0, 3.8), (8.0, 3.8), (8.0, 4.0), (0.0, 4.0)],
        [(0.0, 0.0), (8.0, 0.0), (8.0, 0.2), (0.0, 0.2)],
    ]
)
static = inflate(rasterize_static(spec, walls))

# Someone walking toward the robot down the middle of the corridor.
person = PersonEstimate(
    position=(4.0, 2.0),
    velocity=(-1.0, 0.0),
    speed=1.0,
    heading=math.pi,
    posture=Posture.WALKING,
    handover_target=False,
)
social = rasterize_social(spec, [person])
fused = fuse([static, social])

request = PlanRequest(start=(0.5, 2.0), goal=(7.5, 2.0), cost_weight=10.0)
plain = astar(static, request)
polite = astar(fused, request)


def clearance(path):
    return min(math.hypot(x - 4.0, y - 2.0) for x, y in path.points)


print(f"without the person: {len(plain.points)} waypoints, "
      f"{plain.length():.2f} m, closest pass {clearance(plain):.2f} m")
print(f"with the person:    {len(polite.points)} waypoints, "
      f"{polite.length():.2f} m, closest pass {clearance(polite):.2f} m")

write_pgm(out / "static.pgm", static)
write_pgm(out / "fused.pgm", fused)
print(f"costmap heatmaps in {out}")
