"""Social cost fields around people and their interactions.

Every field maps ground-plane points to a discomfort cost in [0, 1]. All
functions are vectorized: `points` may be a single (2,) point or any
(..., 2) array, and the result has the leading shape of the input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import normalize_angle
from .tracking import PersonEstimate, Posture


@dataclass(frozen=True)
class AsymmetricGaussianParams:
    """Spreads of an oriented Gaussian: front along the orientation, rear
    against it, side across it (all in meters)."""

    orientation: float
    front: float
    rear: float
    side: float

    def __post_init__(self):
        if min(self.front, self.rear, self.side) <= 0:
            raise ValueError("all spreads must be positive")


def _as_points(points):
    p = np.asarray(points, dtype=float)
    if p.shape[-1] != 2:
        raise ValueError("points must have a trailing dimension of 2")
    return p


def _scalar_or_array(values, points):
    if points.ndim == 1:
        return float(values)
    return values


def asymmetric_gaussian(points, center, params: AsymmetricGaussianParams):
    """Oriented Gaussian with a direction-dependent longitudinal spread.

    The longitudinal spread is `front` for points within a quarter turn of
    the orientation and `rear` behind; `side` applies across. Peak value 1
    at the center.
    """
    p = _as_points(points)
    c = np.asarray(center, dtype=float)
    d = p - c
    dx = d[..., 0]
    dy = d[..., 1]
    theta = normalize_angle(np.arctan2(dy, dx) - params.orientation)
    longitudinal = np.where(np.abs(theta) <= math.pi / 2.0, params.front, params.rear)

    sin_a = math.sin(params.orientation)
    cos_a = math.cos(params.orientation)
    sin_2a = math.sin(2.0 * params.orientation)
    long_var = 2.0 * longitudinal**2
    side_var = 2.0 * params.side**2
    a = cos_a**2 / long_var + sin_a**2 / side_var
    b = sin_2a / (2.0 * long_var) - sin_2a / (2.0 * side_var)
    c_coef = sin_a**2 / long_var + cos_a**2 / side_var
    return _scalar_or_array(
        np.exp(-(a * dx**2 + 2.0 * b * dx * dy + c_coef * dy**2)), p
    )


def circular_gaussian(points, center, sigma_x: float = 0.45, sigma_y: float = 0.45):
    """Axis-aligned Gaussian bump, peak 1 at the center."""
    if sigma_x <= 0 or sigma_y <= 0:
        raise ValueError("sigmas must be positive")
    p = _as_points(points)
    c = np.asarray(center, dtype=float)
    dx = p[..., 0] - c[0]
    dy = p[..., 1] - c[1]
    return _scalar_or_array(
        np.exp(-(dx**2) / (2.0 * sigma_x**2) - dy**2 / (2.0 * sigma_y**2)), p
    )


@dataclass(frozen=True)
class SocialParams:
    """Tunable spreads and gates for all person-centered fields."""

    standing_sigma_x: float = 0.45
    standing_sigma_y: float = 0.45
    walking_min_scale: float = 0.8
    seated_front: float = 1.2
    seated_rear: float = 0.8
    seated_side: float = 0.006
    overtake_front: float = 1.5
    overtake_rear: float = 0.3
    overtake_side: float = 0.0075
    handover_cone_deg: float = 45.0
    handover_min_distance: float = 0.6


_DEFAULTS = SocialParams()


def walking_personal_space(points, person: PersonEstimate, params: SocialParams = _DEFAULTS):
    """Personal space of a walking person.

    The spread scales with speed (floored at walking_min_scale): the full
    scale ahead, half of it behind, and two thirds to the sides.
    """
    scale = max(person.speed, params.walking_min_scale)
    return asymmetric_gaussian(
        points,
        person.position,
        AsymmetricGaussianParams(
            orientation=person.heading,
            front=scale,
            rear=scale / 2.0,
            side=2.0 * scale / 3.0,
        ),
    )


def standing_personal_space(points, person: PersonEstimate, params: SocialParams = _DEFAULTS):
    """Isotropic personal space of a person standing still."""
    return circular_gaussian(
        points, person.position, params.standing_sigma_x, params.standing_sigma_y
    )


def seated_visibility(points, person: PersonEstimate, params: SocialParams = _DEFAULTS):
    """Discomfort behind a seated person, who cannot see traffic there.

    The main lobe points opposite the facing direction; the field is very
    thin across that axis.
    """
    return asymmetric_gaussian(
        points,
        person.position,
        AsymmetricGaussianParams(
            orientation=person.heading - math.pi,
            front=params.seated_front,
            rear=params.seated_rear,
            side=params.seated_side,
        ),
    )


def overtake_left(points, person: PersonEstimate, params: SocialParams = _DEFAULTS):
    """Extra cost on a walking person's right so the robot overtakes on the left.

    The lobe points a quarter turn clockwise from the heading (the person's
    right-hand side).
    """
    return asymmetric_gaussian(
        points,
        person.position,
        AsymmetricGaussianParams(
            orientation=person.heading - math.pi / 2.0,
            front=params.overtake_front,
            rear=params.overtake_rear,
            side=params.overtake_side,
        ),
    )


def handover_gate(points, person: PersonEstimate, base, params: SocialParams = _DEFAULTS):
    """Open a frontal approach corridor through a base cost field.

    Points within half the cone angle of the facing direction and at least
    handover_min_distance away get cost 0; everywhere else the base cost
    stands. The cut is deliberately hard (discontinuous at the cone edge).
    """
    p = _as_points(points)
    c = np.asarray(person.position, dtype=float)
    dx = p[..., 0] - c[0]
    dy = p[..., 1] - c[1]
    bearing = np.abs(normalize_angle(np.arctan2(dy, dx) - person.heading))
    distance = np.hypot(dx, dy)
    half_cone = math.radians(params.handover_cone_deg) / 2.0
    opened = (bearing <= half_cone) & (distance >= params.handover_min_distance)
    return _scalar_or_array(np.where(opened, 0.0, base), p)


@dataclass(frozen=True)
class InteractionSpec:
    """Two interacting entities (person-person or person-object).

    The affected region is the disc spanned by the pair: centered at their
    midpoint with radius half their separation. importance in [0, 1] is the
    cost inside.
    """

    entity_a: tuple
    entity_b: tuple
    importance: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.importance <= 1.0:
            raise ValueError("importance must lie in [0, 1]")
        if self.radius <= 0:
            raise ValueError("interacting entities must be distinct")

    @property
    def center(self) -> np.ndarray:
        a = np.asarray(self.entity_a, dtype=float)
        b = np.asarray(self.entity_b, dtype=float)
        return (a + b) / 2.0

    @property
    def radius(self) -> float:
        a = np.asarray(self.entity_a, dtype=float)
        b = np.asarray(self.entity_b, dtype=float)
        return float(np.hypot(*(a - b))) / 2.0


def interaction_cost(points, spec: InteractionSpec, *, literal_boundary: bool = False):
    """Constant cost inside the interaction disc, zero outside.

    With literal_boundary=True the squared distance is compared against the
    radius itself (a legacy reading of the boundary test), which shrinks or
    grows the disc unless the radius is exactly 1.
    """
    p = _as_points(points)
    c = spec.center
    d2 = (p[..., 0] - c[0]) ** 2 + (p[..., 1] - c[1]) ** 2
    bound = spec.radius if literal_boundary else spec.radius**2
    return _scalar_or_array(np.where(d2 <= bound, spec.importance, 0.0), p)


def seated_cost(points, person: PersonEstimate, params: SocialParams = _DEFAULTS):
    """Combined field of a seated person: personal space plus the blind zone behind."""
    return np.maximum(
        standing_personal_space(points, person, params),
        seated_visibility(points, person, params),
    )


def walking_cost(points, person: PersonEstimate, params: SocialParams = _DEFAULTS):
    """Combined field of a walking person: personal space plus the keep-left lobe."""
    return np.maximum(
        walking_personal_space(points, person, params),
        overtake_left(points, person, params),
    )


def person_cost(
    points,
    person: PersonEstimate,
    params: SocialParams = _DEFAULTS,
    *,
    handover_gate_enabled: bool = True,
):
    """Discomfort field of one person, dispatched on posture.

    A standing person who is the target of a pending handover gets the
    frontal corridor opened (unless the gate is disabled for a control
    run).
    """
    if person.posture is Posture.WALKING:
        return walking_cost(points, person, params)
    if person.posture is Posture.SEATED:
        return seated_cost(points, person, params)
    base = standing_personal_space(points, person, params)
    if person.handover_target and handover_gate_enabled:
        return handover_gate(points, person, base, params)
    return base
