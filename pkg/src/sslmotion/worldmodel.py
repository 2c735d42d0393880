"""Shared geometric vocabulary for the motion stack.

World frame convention: x points at the opposing goal, y points left from
our goal, angles are CCW radians. All types here are immutable value
objects; downstream modules exchange them as message snapshots and never
mutate shared state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union


def wrap_angle(a: float) -> float:
    """Normalize an angle to (-pi, pi]; in-range values pass unchanged."""
    if -math.pi < a <= math.pi:
        return a
    r = math.fmod(a + math.pi, 2.0 * math.pi)
    if r <= 0.0:
        r += 2.0 * math.pi
    return r - math.pi


def _require_finite(name: str, *values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise ValueError(f"{name}: non-finite component {v!r}")


@dataclass(frozen=True, slots=True)
class Vec2:
    x: float  # m
    y: float  # m

    def __post_init__(self):
        _require_finite("Vec2", self.x, self.y)

    def __add__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x - other.x, self.y - other.y)

    def __mul__(self, k: float) -> "Vec2":
        return Vec2(self.x * k, self.y * k)

    __rmul__ = __mul__

    def __neg__(self) -> "Vec2":
        return Vec2(-self.x, -self.y)

    def dot(self, other: "Vec2") -> float:
        return self.x * other.x + self.y * other.y

    def norm(self) -> float:
        return math.hypot(self.x, self.y)

    def dist(self, other: "Vec2") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)

    def perp(self) -> "Vec2":
        """CCW perpendicular."""
        return Vec2(-self.y, self.x)

    def rotated(self, angle: float) -> "Vec2":
        c, s = math.cos(angle), math.sin(angle)
        return Vec2(c * self.x - s * self.y, s * self.x + c * self.y)

    def angle(self) -> float:
        return math.atan2(self.y, self.x)


ZERO = Vec2(0.0, 0.0)


@dataclass(frozen=True, slots=True)
class RobotState:
    """Planar rigid-body state. Heading is stored normalized to (-pi, pi]."""

    position: Vec2
    velocity: Vec2  # m/s, world frame
    heading: float  # rad
    angular_velocity: float = 0.0  # rad/s, CCW

    def __post_init__(self):
        _require_finite("RobotState", self.heading, self.angular_velocity)
        object.__setattr__(self, "heading", wrap_angle(self.heading))


@dataclass(frozen=True, slots=True)
class MotionLimits:
    v_max: float  # m/s
    a_max: float  # m/s^2
    omega_max: float  # rad/s
    alpha_max: float  # rad/s^2

    def __post_init__(self):
        _require_finite("MotionLimits", self.v_max, self.a_max,
                        self.omega_max, self.alpha_max)
        for name in ("v_max", "a_max", "omega_max", "alpha_max"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"MotionLimits.{name} must be > 0")


# --- obstacles ------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class StaticDisc:
    center: Vec2
    radius: float  # m

    def __post_init__(self):
        _require_finite("StaticDisc", self.radius)
        if self.radius < 0.0:
            raise ValueError("StaticDisc.radius must be >= 0")


@dataclass(frozen=True, slots=True)
class MovingDisc:
    """Disc extrapolated at constant velocity, frozen past the horizon.

    Constant-velocity extrapolation is only trusted for `horizon` seconds;
    for query times beyond it the disc is held at its horizon position.
    """

    center: Vec2  # position at t = 0
    radius: float  # m
    velocity: Vec2  # m/s
    horizon: float = 1.0  # s

    def __post_init__(self):
        _require_finite("MovingDisc", self.radius, self.horizon)
        if self.radius < 0.0:
            raise ValueError("MovingDisc.radius must be >= 0")
        if self.horizon < 0.0:
            raise ValueError("MovingDisc.horizon must be >= 0")

    def center_at(self, t: float) -> Vec2:
        dt = min(max(t, 0.0), self.horizon)
        return self.center + self.velocity * dt


@dataclass(frozen=True, slots=True)
class Rect:
    """Axis-aligned rectangle (defense areas, forbidden zones)."""

    lo: Vec2  # min corner
    hi: Vec2  # max corner

    def __post_init__(self):
        if self.lo.x > self.hi.x or self.lo.y > self.hi.y:
            raise ValueError("Rect corners out of order")


@dataclass(frozen=True, slots=True)
class KeepOutDisc:
    """Rule-driven exclusion zone (e.g. around the kick point)."""

    center: Vec2
    radius: float  # m
    active: bool = True

    def __post_init__(self):
        _require_finite("KeepOutDisc", self.radius)
        if self.radius < 0.0:
            raise ValueError("KeepOutDisc.radius must be >= 0")


Obstacle = Union[StaticDisc, MovingDisc, Rect, KeepOutDisc]


def distance_to_obstacle(p: Vec2, obstacle: Obstacle, t: float = 0.0) -> float:
    """Signed clearance from point `p` to the obstacle at query time `t`.

    Negative inside the obstacle. Inactive keep-outs report +inf.
    """
    if isinstance(obstacle, StaticDisc):
        return p.dist(obstacle.center) - obstacle.radius
    if isinstance(obstacle, MovingDisc):
        return p.dist(obstacle.center_at(t)) - obstacle.radius
    if isinstance(obstacle, KeepOutDisc):
        if not obstacle.active:
            return math.inf
        return p.dist(obstacle.center) - obstacle.radius
    if isinstance(obstacle, Rect):
        dx = max(obstacle.lo.x - p.x, 0.0, p.x - obstacle.hi.x)
        dy = max(obstacle.lo.y - p.y, 0.0, p.y - obstacle.hi.y)
        if dx > 0.0 or dy > 0.0:
            return math.hypot(dx, dy)
        # inside: negative distance to the nearest face
        return -min(p.x - obstacle.lo.x, obstacle.hi.x - p.x,
                    p.y - obstacle.lo.y, obstacle.hi.y - p.y)
    raise TypeError(f"unknown obstacle type {type(obstacle).__name__}")


def inflate(obstacle: Obstacle, margin: float) -> Obstacle:
    """Grow an obstacle by `margin`, preserving its type and motion."""
    if margin < 0.0:
        raise ValueError("margin must be >= 0")
    if isinstance(obstacle, StaticDisc):
        return StaticDisc(obstacle.center, obstacle.radius + margin)
    if isinstance(obstacle, MovingDisc):
        return MovingDisc(obstacle.center, obstacle.radius + margin,
                          obstacle.velocity, obstacle.horizon)
    if isinstance(obstacle, KeepOutDisc):
        return KeepOutDisc(obstacle.center, obstacle.radius + margin,
                           obstacle.active)
    if isinstance(obstacle, Rect):
        m = Vec2(margin, margin)
        return Rect(obstacle.lo - m, obstacle.hi + m)
    raise TypeError(f"unknown obstacle type {type(obstacle).__name__}")


# --- field ----------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class FieldGeometry:
    """Field dimensions, origin at center. Division B sizes by default."""

    length: float = 9.0  # m, along x
    width: float = 6.0  # m, along y
    defense_area_depth: float = 1.0  # m, into the field from the goal line
    defense_area_width: float = 2.0  # m, centered on y = 0
    boundary_margin: float = 0.3  # m, targets keep this far from the lines

    def __post_init__(self):
        if self.length <= 0 or self.width <= 0:
            raise ValueError("field dimensions must be > 0")
        if self.defense_area_depth < 0 or self.defense_area_width < 0:
            raise ValueError("defense area dimensions must be >= 0")

    def our_defense_area(self) -> Rect:
        half_w = self.defense_area_width / 2.0
        return Rect(Vec2(-self.length / 2.0, -half_w),
                    Vec2(-self.length / 2.0 + self.defense_area_depth, half_w))

    def their_defense_area(self) -> Rect:
        half_w = self.defense_area_width / 2.0
        return Rect(Vec2(self.length / 2.0 - self.defense_area_depth, -half_w),
                    Vec2(self.length / 2.0, half_w))

    def clamp_target(self, p: Vec2) -> Vec2:
        """Pull a point inside the field minus the boundary margin."""
        mx = self.length / 2.0 - self.boundary_margin
        my = self.width / 2.0 - self.boundary_margin
        return Vec2(min(max(p.x, -mx), mx), min(max(p.y, -my), my))


ROBOT_RADIUS = 0.09  # m, max machine radius per league constraints
