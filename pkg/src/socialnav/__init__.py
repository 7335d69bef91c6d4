"""Socially aware navigation: multi-camera person tracking, social cost
fields, layered costmaps, A* replanning, and a deterministic scenario
simulator."""

from .costmap import (
    Costmap,
    InflationParams,
    INSCRIBED_COST,
    LETHAL_COST,
    MAX_SOCIAL_COST,
    ObstacleSet,
    SpecMismatch,
    fuse,
    inflate,
    rasterize_social,
    rasterize_static,
    read_costmap_csv,
    read_grid_csv,
    write_costmap_csv,
    write_field_pgm,
    write_grid_csv,
    write_pgm,
)
from .detection import (
    CameraModel,
    Detection,
    GroundMeasurement,
    UnknownCamera,
    ground_measurements,
    threshold_filter,
)
from .geometry import (
    DegenerateProjection,
    GridSpec,
    Homography,
    OutOfBounds,
    PixelBBox,
    Pose2,
    normalize_angle,
)
from .planner import (
    InvalidRequest,
    NoPath,
    PlannerPath,
    PlanRequest,
    astar,
    dijkstra_oracle,
    replan_policy,
)
from .scenario import (
    BUNDLED_SCENARIOS,
    Scenario,
    SchemaError,
    ValidationError,
    bundled_scenario_path,
    load_scenario,
    parse_scenario,
    resolve_scenario,
)
from .simulator import Metrics, Simulation, TraceLog, metrics, run, write_trace
from .social import (
    AsymmetricGaussianParams,
    InteractionSpec,
    SocialParams,
    asymmetric_gaussian,
    circular_gaussian,
    handover_gate,
    interaction_cost,
    person_cost,
    seated_cost,
    seated_visibility,
    standing_personal_space,
    walking_cost,
    walking_personal_space,
)
from .tracking import (
    AssociationParams,
    EnumerationOverflow,
    KalmanTrack,
    LifecycleParams,
    NumericalFailure,
    PersonEstimate,
    Posture,
    Tracker,
    TrackStatus,
    estimate_person,
    gate_distance,
    kf_predict,
    kf_update,
    nnjpda_associate,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
