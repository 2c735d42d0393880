"""Motion planning, state estimation, and game-state handling for SSL robots."""

from .worldmodel import (
    ROBOT_RADIUS,
    FieldGeometry,
    KeepOutDisc,
    MotionLimits,
    MovingDisc,
    Obstacle,
    Rect,
    RobotState,
    StaticDisc,
    Vec2,
    distance_to_obstacle,
    inflate,
    wrap_angle,
)
from .trajectory import (
    Profile1D,
    Segment1D,
    Trajectory2D,
    plan_1d,
    plan_2d_synchronized,
)
from .planner import (
    DEFAULT_SEARCH,
    PlanRequest,
    PlanResult,
    SearchConfig,
    encode_obstacles,
    first_collision,
    plan,
    plan_via,
    reset_candidate,
)
from .estimator import (
    CommandLog,
    CommandLogEntry,
    VisionFrame,
    WheelConfig,
    advance_pose,
    fuse_on_vision,
    odometry_step,
    predict_current_state,
)
from .navigation import (
    DEFAULT_GAINS,
    NavGains,
    NavKind,
    NavTarget,
    VelocityCommand,
    command_for,
    drive_to_point,
    follow_trajectory,
    rotate_in_point,
    rotate_on_self,
)
from .refparser import (
    Command,
    GameConstraints,
    DynamicFormation,
    FormationReason,
    GameTactic,
    Halt,
    PlannedPlay,
    PlannedTactic,
    RefereeInput,
    Stage,
    TacticMode,
    constraints_for,
    parse,
    replay_log,
)

__version__ = "0.1.0"

__all__ = [
    "ROBOT_RADIUS",
    "FieldGeometry",
    "KeepOutDisc",
    "MotionLimits",
    "MovingDisc",
    "Obstacle",
    "Rect",
    "RobotState",
    "StaticDisc",
    "Vec2",
    "distance_to_obstacle",
    "inflate",
    "wrap_angle",
    "Profile1D",
    "Segment1D",
    "Trajectory2D",
    "plan_1d",
    "plan_2d_synchronized",
    "DEFAULT_SEARCH",
    "PlanRequest",
    "PlanResult",
    "SearchConfig",
    "encode_obstacles",
    "first_collision",
    "plan",
    "plan_via",
    "reset_candidate",
    "CommandLog",
    "CommandLogEntry",
    "VisionFrame",
    "WheelConfig",
    "advance_pose",
    "fuse_on_vision",
    "odometry_step",
    "predict_current_state",
    "DEFAULT_GAINS",
    "NavGains",
    "NavKind",
    "NavTarget",
    "VelocityCommand",
    "command_for",
    "drive_to_point",
    "follow_trajectory",
    "rotate_in_point",
    "rotate_on_self",
    "Command",
    "GameConstraints",
    "DynamicFormation",
    "FormationReason",
    "GameTactic",
    "Halt",
    "PlannedPlay",
    "PlannedTactic",
    "RefereeInput",
    "Stage",
    "TacticMode",
    "constraints_for",
    "parse",
    "replay_log",
]
