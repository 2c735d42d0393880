"""Velocity-command laws that turn a navigation target into a body twist.

Four laws cover the behaviours the skills layer asks for: spinning in
place to face a direction, driving to a point, orbiting a pivot while
facing it, and tracking a planned trajectory. Every law returns a body
frame command already clamped to the motion limits, so the output can be
sent to the base unmodified.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

from .trajectory import Trajectory2D
from .worldmodel import MotionLimits, RobotState, Vec2, wrap_angle


@dataclass(frozen=True, slots=True)
class NavGains:
    k_omega: float = 4.0  # 1/s, heading proportional gain
    d_slow: float = 0.5  # m, distance where approach speed starts tapering
    k_p: float = 2.0  # 1/s, trajectory position correction
    k_radial: float = 2.0  # 1/s, orbit radius correction

    def __post_init__(self):
        if min(self.k_omega, self.d_slow, self.k_p, self.k_radial) <= 0.0:
            raise ValueError("all gains must be > 0")


DEFAULT_GAINS = NavGains()


@dataclass(frozen=True, slots=True)
class VelocityCommand:
    """Body-frame velocity command: x forward, y left, omega CCW."""
    vx: float
    vy: float
    omega: float

    def speed(self) -> float:
        return math.hypot(self.vx, self.vy)


class NavKind(enum.Enum):
    ROTATE_ON_SELF = "rotate_on_self"
    DRIVE_TO_POINT = "drive_to_point"
    ROTATE_IN_POINT = "rotate_in_point"
    FOLLOW_TRAJECTORY = "follow_trajectory"


_REQUIRED_FIELDS = {
    NavKind.ROTATE_ON_SELF: ("target_heading",),
    NavKind.DRIVE_TO_POINT: ("point", "target_heading"),
    NavKind.ROTATE_IN_POINT: ("point", "radius", "tangential_speed"),
    NavKind.FOLLOW_TRAJECTORY: ("trajectory", "t"),
}


@dataclass(frozen=True, slots=True)
class NavTarget:
    """Tagged union of law inputs; each kind checks its own fields."""

    kind: NavKind
    point: Optional[Vec2] = None
    target_heading: Optional[float] = None
    radius: Optional[float] = None
    tangential_speed: Optional[float] = None
    trajectory: Optional[Trajectory2D] = None
    t: Optional[float] = None

    def __post_init__(self):
        missing = [f for f in _REQUIRED_FIELDS[self.kind]
                   if getattr(self, f) is None]
        if missing:
            raise ValueError(
                f"{self.kind.value} requires {', '.join(missing)}")
        if self.kind is NavKind.ROTATE_IN_POINT:
            if self.radius <= 0.0:
                raise ValueError("radius must be > 0")
            if self.tangential_speed < 0.0:
                raise ValueError("tangential_speed must be >= 0")


def _clamp(value: float, limit: float) -> float:
    return max(-limit, min(limit, value))


def _clamp_speed(v: Vec2, v_max: float) -> Vec2:
    speed = v.norm()
    if speed > v_max > 0.0:
        return v * (v_max / speed)
    return v


def _world_to_body(v: Vec2, heading: float) -> Vec2:
    return v.rotated(-heading)


def _heading_command(current: float, target: float,
                     gains: NavGains, limits: MotionLimits) -> float:
    return _clamp(gains.k_omega * wrap_angle(target - current),
                  limits.omega_max)


def rotate_on_self(state: RobotState, target_heading: float,
                   limits: MotionLimits,
                   gains: NavGains = DEFAULT_GAINS) -> VelocityCommand:
    """Spin in place toward a heading; no translation."""
    return VelocityCommand(
        0.0, 0.0, _heading_command(state.heading, target_heading,
                                   gains, limits))


def drive_to_point(state: RobotState, point: Vec2, target_heading: float,
                   limits: MotionLimits,
                   gains: NavGains = DEFAULT_GAINS) -> VelocityCommand:
    """Drive straight at a point, slowing on approach and while misaligned.

    Speed scales with the cosine of the heading error (never negative), so
    the base stops translating when pointing more than 90 degrees away and
    accelerates as the turn completes.
    """
    delta = point - state.position
    dist = delta.norm()
    omega = _heading_command(state.heading, target_heading, gains, limits)
    if dist < 1e-9:
        return VelocityCommand(0.0, 0.0, omega)
    err = wrap_angle(target_heading - state.heading)
    speed = limits.v_max * max(0.0, math.cos(err)) * min(1.0, dist / gains.d_slow)
    v_world = delta * (speed / dist)
    v_body = _world_to_body(_clamp_speed(v_world, limits.v_max), state.heading)
    return VelocityCommand(v_body.x, v_body.y, omega)


def rotate_in_point(state: RobotState, pivot: Vec2, radius: float,
                    tangential_speed: float, limits: MotionLimits,
                    gains: NavGains = DEFAULT_GAINS) -> VelocityCommand:
    """Orbit a pivot at a set radius and tangential speed, facing the pivot.

    The radial term pulls the base onto the circle; the feedforward term
    omega = v_t / r keeps the heading locked to the pivot as the orbit
    advances.
    """
    offset = state.position - pivot
    dist = offset.norm()
    if dist < 1e-6:
        # on top of the pivot the orbit direction is undefined; just hold
        return rotate_on_self(state, state.heading, limits, gains)
    r_hat = offset * (1.0 / dist)
    t_hat = r_hat.perp()
    v_world = t_hat * tangential_speed + r_hat * (gains.k_radial * (radius - dist))
    face_pivot = math.atan2(-offset.y, -offset.x)
    omega = _clamp(tangential_speed / radius
                   + gains.k_omega * wrap_angle(face_pivot - state.heading),
                   limits.omega_max)
    v_body = _world_to_body(_clamp_speed(v_world, limits.v_max), state.heading)
    return VelocityCommand(v_body.x, v_body.y, omega)


def follow_trajectory(state: RobotState, trajectory: Trajectory2D, t: float,
                      limits: MotionLimits,
                      target_heading: Optional[float] = None,
                      gains: NavGains = DEFAULT_GAINS,
                      lookahead: float = 0.0) -> VelocityCommand:
    """Track a planned trajectory: feedforward velocity plus position pull.

    A discrete executor that holds each command for one control period
    should pass lookahead = period/2: the velocity reference is sampled
    that far ahead so the held command integrates to the reference
    displacement, while the position term stays contemporaneous. Past the
    trajectory end this degrades to holding the final position.
    """
    total = trajectory.total_time
    pos_ref, _, _ = trajectory.sample(min(max(t, 0.0), total))
    if t >= total:
        vel_ref = Vec2(0.0, 0.0)
    else:
        _, vel_ref, _ = trajectory.sample(min(max(t + lookahead, 0.0), total))
    v_world = vel_ref + (pos_ref - state.position) * gains.k_p
    omega = 0.0
    if target_heading is not None:
        omega = _heading_command(state.heading, target_heading, gains, limits)
    v_body = _world_to_body(_clamp_speed(v_world, limits.v_max), state.heading)
    return VelocityCommand(v_body.x, v_body.y, omega)


def command_for(state: RobotState, target: NavTarget, limits: MotionLimits,
                gains: NavGains = DEFAULT_GAINS) -> VelocityCommand:
    """Dispatch a NavTarget to its law."""
    if target.kind is NavKind.ROTATE_ON_SELF:
        return rotate_on_self(state, target.target_heading, limits, gains)
    if target.kind is NavKind.DRIVE_TO_POINT:
        return drive_to_point(state, target.point, target.target_heading,
                              limits, gains)
    if target.kind is NavKind.ROTATE_IN_POINT:
        return rotate_in_point(state, target.point, target.radius,
                               target.tangential_speed, limits, gains)
    return follow_trajectory(state, target.trajectory, target.t, limits,
                             target.target_heading, gains)
