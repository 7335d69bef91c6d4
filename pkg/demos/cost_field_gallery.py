"""Sample every person-centered cost field and write heatmaps.

Run `python3 demos/cost_field_gallery.py`; PGM images land in
demos/output/cost_fields/ (any image viewer opens them).
"""

import math
from pathlib import Path

import numpy as np

from socialnav import (
    GridSpec,
    InteractionSpec,
    PersonEstimate,
    Posture,
    SocialParams,
    interaction_cost,
    person_cost,
    write_field_pgm,
)

out = Path(__file__).parent / "output" / "cost_fields"
out.mkdir(parents=True, exist_ok=True)

spec = GridSpec(origin_x=-3.0, origin_y=-3.0, resolution=0.02, width=300, height=300)
points = spec.cell_centers()
params = SocialParams()


def person(posture, heading=0.0, speed=0.0, handover=False):
    return PersonEstimate(
        position=(0.0, 0.0),
        velocity=(speed * math.cos(heading), speed * math.sin(heading)),
        speed=speed,
        heading=heading,
        posture=posture,
        handover_target=handover,
    )


# A walker heading +x at 1 m/s. The field reaches twice as far ahead as
# behind, and a thin high-cost beam trails along the walker's right so a
# robot coming up from behind is pushed to pass on the left.
walking = person(Posture.WALKING, speed=1.0)
field = person_cost(points, walking, params)
write_field_pgm(out / "walking.pgm", spec, field)
for label, probe in [("1 m ahead", (1.0, 0.0)), ("1 m behind", (-1.0, 0.0)), ("1 m beside", (0.0, 1.0))]:
    print(f"walking cost {label}: {float(person_cost(np.array(probe), walking, params)):.4f}")

# Standing: a plain circular bubble.
write_field_pgm(out / "standing.pgm", spec, person_cost(points, person(Posture.STANDING), params))

# Standing and expecting a hand-over: the frontal cone beyond 0.6 m opens
# up to zero cost so the robot may approach from the front.
handover = person(Posture.STANDING, handover=True)
write_field_pgm(out / "handover.pgm", spec, person_cost(points, handover, params))
print(f"handover cost 0.75 m ahead: {float(person_cost(np.array([0.75, 0.0]), handover, params)):.4f}")
print(f"handover cost 0.75 m behind: {float(person_cost(np.array([-0.75, 0.0]), handover, params)):.4f}")

# Seated: the bubble plus a long narrow wedge behind the head marking the
# space the person is looking away from... and should not be startled in.
write_field_pgm(out / "seated.pgm", spec, person_cost(points, person(Posture.SEATED), params))

# The overtake beam is pencil-thin at its default width; widen it the way
# the overtake scenario does so the heatmap actually shows it.
wide = SocialParams(overtake_side=0.35)
write_field_pgm(out / "walking_wide_beam.pgm", spec, person_cost(points, walking, wide))

# Two people talking: a disc spanning the pair that plans should not cut.
talk = InteractionSpec(entity_a=(-0.8, 0.0), entity_b=(0.8, 0.0), importance=1.0)
write_field_pgm(out / "interaction.pgm", spec, interaction_cost(points, talk))
cx, cy = talk.center
print(f"interaction disc radius: {talk.radius:.2f} m around ({cx:.1f}, {cy:.1f})")

print(f"wrote 6 heatmaps to {out}")
