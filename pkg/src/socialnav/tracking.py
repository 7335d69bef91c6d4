"""Multi-person tracking on the ground plane.

Each person is a constant-velocity Kalman filter over [x, y, vx, vy].
Measurements are gated per track, associated with a joint probabilistic
data association step (exact enumeration of joint events, then a hard
one-to-one assignment by descending marginal probability), and fed through
an M-consecutive-frames birth / inactivity-based deletion lifecycle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .geometry import normalize_angle

_H = np.array([[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0]])
_MAX_TRACKS = 10
_MAX_GATED_PER_TRACK = 10


class NumericalFailure(RuntimeError):
    """Covariance arithmetic lost positive definiteness or finiteness."""


class EnumerationOverflow(RuntimeError):
    """The joint-event enumeration would be too large to be exact."""


class TrackStatus(Enum):
    TENTATIVE = "tentative"
    CONFIRMED = "confirmed"


class Posture(Enum):
    STANDING = "standing"
    WALKING = "walking"
    SEATED = "seated"


@dataclass
class KalmanTrack:
    """One tracked person: filter state plus lifecycle bookkeeping.

    state is [x, y, vx, vy]; covariance the matching 4x4 matrix.
    hits counts supporting measurements, inactivity counts consecutive
    frames without one, age counts frames since creation.
    """

    id: int
    state: np.ndarray
    covariance: np.ndarray
    hits: int = 1
    inactivity: int = 0
    age: int = 0
    status: TrackStatus = TrackStatus.TENTATIVE

    @property
    def position(self) -> np.ndarray:
        return self.state[:2].copy()

    @property
    def velocity(self) -> np.ndarray:
        return self.state[2:4].copy()


def _symmetrize(m: np.ndarray) -> np.ndarray:
    return (m + m.T) / 2.0


def kf_predict(track: KalmanTrack, dt: float, accel_noise: float = 0.5) -> KalmanTrack:
    """Propagate a track dt seconds under the constant-velocity model.

    Process noise is white acceleration with standard deviation accel_noise
    (m/s^2) independently per axis.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    f = np.eye(4)
    f[0, 2] = dt
    f[1, 3] = dt
    q = accel_noise**2
    dt2 = dt * dt
    q_pos = q * dt2 * dt2 / 4.0
    q_cross = q * dt2 * dt / 2.0
    q_vel = q * dt2
    process = np.array(
        [
            [q_pos, 0.0, q_cross, 0.0],
            [0.0, q_pos, 0.0, q_cross],
            [q_cross, 0.0, q_vel, 0.0],
            [0.0, q_cross, 0.0, q_vel],
        ]
    )
    state = f @ track.state
    cov = _symmetrize(f @ track.covariance @ f.T + process)
    return replace(track, state=state, covariance=cov)


def _innovation_cov(track: KalmanTrack, noise_std: float) -> np.ndarray:
    return track.covariance[:2, :2] + noise_std**2 * np.eye(2)


def kf_update(track: KalmanTrack, measurement) -> KalmanTrack:
    """Condition a track on one position measurement (its own noise_std)."""
    s = _innovation_cov(track, measurement.noise_std)
    try:
        s_inv = np.linalg.inv(s)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure("innovation covariance is singular") from exc
    if not np.all(np.isfinite(s_inv)):
        raise NumericalFailure("innovation covariance inverse is not finite")
    gain = track.covariance[:, :2] @ s_inv
    innovation = measurement.position - track.state[:2]
    state = track.state + gain @ innovation
    cov = _symmetrize(track.covariance - gain @ _H @ track.covariance)
    return replace(track, state=state, covariance=cov)


def gate_distance(track: KalmanTrack, measurement) -> float:
    """Squared Mahalanobis distance of a measurement in the innovation space."""
    s = _innovation_cov(track, measurement.noise_std)
    nu = measurement.position - track.state[:2]
    try:
        solved = np.linalg.solve(s, nu)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure("innovation covariance is singular") from exc
    return float(nu @ solved)


@dataclass(frozen=True)
class AssociationParams:
    """Gating and joint-association parameters.

    gate_threshold is a squared Mahalanobis bound (9.21 is the 99% point of
    a chi-square with 2 dof). clutter_density is the expected false
    measurements per square meter. Pairs assigned beyond unassign_distance
    (plain Mahalanobis) are dropped again after the hard assignment.
    """

    gate_threshold: float = 9.21
    detection_prob: float = 0.9
    clutter_density: float = 1e-4
    unassign_distance: float = math.sqrt(9.21)

    def __post_init__(self):
        if self.gate_threshold <= 0:
            raise ValueError("gate_threshold must be positive")
        if not 0.0 < self.detection_prob < 1.0:
            raise ValueError("detection_prob must be in (0, 1)")
        if self.clutter_density <= 0:
            raise ValueError("clutter_density must be positive")
        if self.unassign_distance <= 0:
            raise ValueError("unassign_distance must be positive")


@dataclass
class Association:
    """Hard assignment plus the JPDA marginals it was distilled from.

    pairs maps track index -> measurement index. marginals has shape
    (n_tracks, n_measurements + 1); the final column is the
    missed-detection probability of each track.
    """

    pairs: dict
    unassigned_tracks: list
    unassigned_measurements: list
    marginals: np.ndarray


def _gaussian_likelihood(d2: float, s: np.ndarray) -> float:
    det = float(np.linalg.det(s))
    if det <= 0:
        raise NumericalFailure("innovation covariance has non-positive determinant")
    return math.exp(-0.5 * d2) / (2.0 * math.pi * math.sqrt(det))


def _enumerate_events(gated, likelihood, params, n_meas):
    """All feasible joint events as (assignment tuple, weight).

    An event assigns each track either None (missed) or one of its gated
    measurements, never sharing a measurement. Its weight multiplies
    detection_prob * likelihood per assigned track, (1 - detection_prob)
    per missed track, and clutter_density per unassigned measurement.
    """
    n_tracks = len(gated)
    p_d = params.detection_prob
    lam = params.clutter_density
    events = []
    assignment = [None] * n_tracks

    def recurse(t, used, weight):
        if t == n_tracks:
            n_clutter = n_meas - len(used)
            events.append((tuple(assignment), weight * lam**n_clutter))
            return
        assignment[t] = None
        recurse(t + 1, used, weight * (1.0 - p_d))
        for j in gated[t]:
            if j in used:
                continue
            assignment[t] = j
            recurse(t + 1, used | {j}, weight * p_d * likelihood[t][j])
        assignment[t] = None

    recurse(0, frozenset(), 1.0)
    return events


def _marginals_from_events(events, n_tracks, n_meas) -> np.ndarray:
    """Normalize event weights into per-track marginals (last column = miss)."""
    beta = np.zeros((n_tracks, n_meas + 1))
    total = 0.0
    for assignment, weight in events:
        total += weight
        for t, j in enumerate(assignment):
            beta[t, n_meas if j is None else j] += weight
    if total <= 0.0:
        beta[:, :] = 0.0
        beta[:, n_meas] = 1.0
        return beta
    return beta / total


def nnjpda_associate(tracks, measurements, params: AssociationParams | None = None) -> Association:
    """Gate, enumerate joint events, and assign measurements to tracks.

    The hard assignment repeatedly picks the largest remaining marginal
    (one-to-one); assigned pairs whose gate distance exceeds
    unassign_distance squared are dropped again.
    """
    if params is None:
        params = AssociationParams()
    n_tracks = len(tracks)
    n_meas = len(measurements)
    if n_tracks > _MAX_TRACKS:
        raise EnumerationOverflow(f"{n_tracks} tracks exceeds the enumeration guard")

    d2 = np.full((n_tracks, max(n_meas, 1)), np.inf)
    likelihood = [dict() for _ in range(n_tracks)]
    gated = []
    for t, track in enumerate(tracks):
        in_gate = []
        for j, z in enumerate(measurements):
            s = _innovation_cov(track, z.noise_std)
            dist = gate_distance(track, z)
            d2[t, j] = dist
            if dist <= params.gate_threshold:
                in_gate.append(j)
                likelihood[t][j] = _gaussian_likelihood(dist, s)
        if len(in_gate) > _MAX_GATED_PER_TRACK:
            raise EnumerationOverflow(
                f"track {track.id} gates {len(in_gate)} measurements, guard is {_MAX_GATED_PER_TRACK}"
            )
        gated.append(in_gate)

    events = _enumerate_events(gated, likelihood, params, n_meas)
    marginals = _marginals_from_events(events, n_tracks, n_meas)

    pairs = {}
    used_measurements = set()
    while True:
        best = None
        for t in range(n_tracks):
            if t in pairs:
                continue
            for j in gated[t]:
                if j in used_measurements:
                    continue
                beta = marginals[t, j]
                if beta > 0.0 and (best is None or beta > best[0]):
                    best = (beta, t, j)
        if best is None:
            break
        _, t, j = best
        pairs[t] = j
        used_measurements.add(j)

    limit = params.unassign_distance**2
    for t in [t for t, j in pairs.items() if d2[t, j] > limit]:
        used_measurements.discard(pairs[t])
        del pairs[t]

    unassigned_tracks = [t for t in range(n_tracks) if t not in pairs]
    unassigned_measurements = [j for j in range(n_meas) if j not in used_measurements]
    return Association(pairs, unassigned_tracks, unassigned_measurements, marginals)


@dataclass(frozen=True)
class LifecycleParams:
    """Birth and death policy for tracks.

    A spot must produce measurements (each within birth_radius of the last)
    on confirm_hits consecutive frames before a track is created there.
    Tracks die after inactivity_limit frames without a supporting
    measurement, and tentative tracks that fail to confirm within
    confirm_window frames are dropped.
    """

    confirm_hits: int = 3
    confirm_window: int = 5
    inactivity_limit: int = 10
    birth_radius: float = 0.5
    birth_velocity_std: float = 1.5

    def __post_init__(self):
        if self.confirm_hits < 1:
            raise ValueError("confirm_hits must be at least 1")
        if self.confirm_window < self.confirm_hits:
            raise ValueError("confirm_window must be at least confirm_hits")
        if self.inactivity_limit < 1:
            raise ValueError("inactivity_limit must be at least 1")
        if self.birth_radius <= 0:
            raise ValueError("birth_radius must be positive")


@dataclass
class BirthCandidate:
    """Consecutive unassigned measurements that may become a track."""

    positions: list
    noise_std: float

    @property
    def count(self) -> int:
        return len(self.positions)


def lifecycle_step(
    tracks,
    association: Association,
    measurements,
    params: LifecycleParams | None = None,
    candidates=None,
    next_id: int = 0,
):
    """Apply hit/inactivity bookkeeping, deletions, and births.

    Returns (tracks, candidates, next_id). Leftover measurements extend a
    birth candidate when within birth_radius of its last position (at most
    one per candidate per frame); candidates missing a frame are dropped;
    a candidate reaching confirm_hits becomes a track at rest, with enough
    velocity uncertainty for the filter to pick up the true motion.
    """
    if params is None:
        params = LifecycleParams()
    candidates = list(candidates) if candidates else []

    survivors = []
    for t_idx, track in enumerate(tracks):
        if t_idx in association.pairs:
            track = replace(track, hits=track.hits + 1, inactivity=0, age=track.age + 1)
            if track.status is TrackStatus.TENTATIVE and track.hits >= params.confirm_hits:
                track = replace(track, status=TrackStatus.CONFIRMED)
        else:
            track = replace(track, inactivity=track.inactivity + 1, age=track.age + 1)
        if track.inactivity >= params.inactivity_limit:
            continue
        if track.status is TrackStatus.TENTATIVE and track.age > params.confirm_window:
            continue
        survivors.append(track)

    track_positions = [t.position for t in survivors]
    extended = set()
    fresh = []
    fed_positions = []
    for j in association.unassigned_measurements:
        z = measurements[j]
        pos = z.position
        # A measurement this close to a live track is its duplicate view
        # (another camera) or clutter; it must not seed a second track.
        if any(
            float(np.hypot(*(pos - tp))) <= params.birth_radius for tp in track_positions
        ):
            continue
        matched = None
        for c_idx, cand in enumerate(candidates):
            if c_idx in extended:
                continue
            if float(np.hypot(*(pos - cand.positions[-1]))) <= params.birth_radius:
                matched = c_idx
                break
        if matched is None:
            # Same rationale one stage earlier: a measurement near a
            # candidate already fed this frame is another camera's view of
            # the same nascent person, not a second person.
            if any(
                float(np.hypot(*(pos - q))) <= params.birth_radius for q in fed_positions
            ):
                continue
            fresh.append(BirthCandidate([pos], z.noise_std))
            fed_positions.append(pos)
        else:
            candidates[matched].positions.append(pos)
            candidates[matched].noise_std = z.noise_std
            extended.add(matched)
            fed_positions.append(pos)

    candidates = [c for i, c in enumerate(candidates) if i in extended] + fresh

    remaining = []
    for cand in candidates:
        if cand.count < params.confirm_hits:
            remaining.append(cand)
            continue
        # Velocity starts at zero: a slope fitted to confirm_hits noisy
        # points is flimsy (one bad draw and the track coasts out of its
        # own gate), so the filter learns velocity from the updates that
        # follow instead. birth_velocity_std must cover walking speeds.
        state = np.concatenate([cand.positions[-1], np.zeros(2)])
        cov = np.diag(
            [
                cand.noise_std**2,
                cand.noise_std**2,
                params.birth_velocity_std**2,
                params.birth_velocity_std**2,
            ]
        )
        # The candidate's run of supporting measurements already meets the
        # confirmation threshold, so the track is born confirmed.
        survivors.append(
            KalmanTrack(
                id=next_id,
                state=state,
                covariance=cov,
                hits=cand.count,
                inactivity=0,
                age=cand.count - 1,
                status=TrackStatus.CONFIRMED,
            )
        )
        next_id += 1

    return survivors, remaining, next_id


@dataclass(frozen=True)
class PersonEstimate:
    """A tracked person distilled for the social cost layer."""

    position: tuple
    velocity: tuple
    speed: float
    heading: float
    posture: Posture
    handover_target: bool = False


def estimate_person(
    track: KalmanTrack,
    walk_speed_threshold: float = 0.25,
    *,
    seated: bool = False,
    facing: float = 0.0,
    handover_target: bool = False,
) -> PersonEstimate:
    """Turn a track plus scenario annotations into a PersonEstimate.

    Posture is Walking when the estimated speed reaches
    walk_speed_threshold, Standing otherwise, and Seated only when
    annotated. Heading comes from the velocity while walking and from the
    annotated facing direction otherwise.
    """
    vx, vy = float(track.state[2]), float(track.state[3])
    speed = math.hypot(vx, vy)
    if seated:
        posture = Posture.SEATED
        heading = facing
    elif speed >= walk_speed_threshold:
        posture = Posture.WALKING
        heading = math.atan2(vy, vx)
    else:
        posture = Posture.STANDING
        heading = facing
    return PersonEstimate(
        position=(float(track.state[0]), float(track.state[1])),
        velocity=(vx, vy),
        speed=speed,
        heading=float(normalize_angle(heading)),
        posture=posture,
        handover_target=handover_target,
    )


class Tracker:
    """Stateful multi-camera tracker; call step() once per frame.

    Measurements are associated one camera batch at a time (prediction
    happens once per frame), so several cameras seeing the same person
    refine one track instead of spawning duplicates.
    """

    def __init__(
        self,
        association: AssociationParams | None = None,
        lifecycle: LifecycleParams | None = None,
        accel_noise: float = 0.5,
        walk_speed_threshold: float = 0.25,
    ):
        self.association = association or AssociationParams()
        self.lifecycle = lifecycle or LifecycleParams()
        self.accel_noise = accel_noise
        self.walk_speed_threshold = walk_speed_threshold
        self.tracks: list[KalmanTrack] = []
        self._candidates: list[BirthCandidate] = []
        self._next_id = 0

    @property
    def confirmed(self) -> list:
        return [t for t in self.tracks if t.status is TrackStatus.CONFIRMED]

    def step(self, measurements, dt: float) -> list:
        """Predict, associate and update against one frame of measurements."""
        self.tracks = [kf_predict(t, dt, self.accel_noise) for t in self.tracks]

        batches = {}
        for z in measurements:
            batches.setdefault(z.camera_id, []).append(z)

        assigned_this_frame = {}
        leftovers = []
        for batch in batches.values():
            assoc = nnjpda_associate(self.tracks, batch, self.association)
            for t_idx, j in assoc.pairs.items():
                self.tracks[t_idx] = kf_update(self.tracks[t_idx], batch[j])
                assigned_this_frame.setdefault(t_idx, batch[j])
            leftovers.extend(batch[j] for j in assoc.unassigned_measurements)

        # Lifecycle only needs to know which tracks were supported and which
        # measurements are leftover; the merged pairs keys carry the former.
        merged = Association(
            pairs=dict(assigned_this_frame),
            unassigned_tracks=[
                t for t in range(len(self.tracks)) if t not in assigned_this_frame
            ],
            unassigned_measurements=list(range(len(leftovers))),
            marginals=np.zeros((len(self.tracks), len(leftovers) + 1)),
        )
        self.tracks, self._candidates, self._next_id = lifecycle_step(
            self.tracks,
            merged,
            leftovers,
            self.lifecycle,
            self._candidates,
            self._next_id,
        )
        return self.tracks
