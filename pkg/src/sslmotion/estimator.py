"""Latency compensation and odometry for an omnidirectional base.

Vision frames describe where the robot was when the camera captured them,
not where it is now. The estimator closes that gap by replaying the
body-velocity commands sent since the capture time over the stale state:
each command is held until the next one (zero-order hold) and integrated
in closed form, rotating the body velocity by the heading as it evolves.

Odometry works the other way around: wheel speeds are mapped back to a
body twist through the least-squares inverse of the wheel Jacobian, with
the gyro rate replacing the encoder-derived rotation, and the pose is
advanced by the same closed-form arc step.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import IO, Iterable, Optional, Sequence, Tuple

import numpy as np

from .worldmodel import RobotState, Vec2, wrap_angle


@dataclass(frozen=True, slots=True)
class VisionFrame:
    t_capture: float  # s, camera capture time
    position: Vec2
    heading: float  # rad
    velocity: Optional[Vec2] = None  # m/s world frame, if the source has one


@dataclass(frozen=True, slots=True)
class CommandLogEntry:
    t_sent: float  # s
    vx: float  # m/s, body frame
    vy: float  # m/s, body frame
    omega: float  # rad/s


class CommandLog:
    """Bounded, time-ordered record of sent commands.

    A single producer appends; replay readers work on immutable snapshots,
    so the log can sit between pipeline stages without locking.
    """

    def __init__(self, capacity: int = 256):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self._entries: deque[CommandLogEntry] = deque(maxlen=capacity)

    def append(self, entry: CommandLogEntry) -> None:
        if self._entries and entry.t_sent < self._entries[-1].t_sent:
            raise ValueError(
                f"command log must be appended in time order: "
                f"{entry.t_sent} after {self._entries[-1].t_sent}")
        self._entries.append(entry)

    def record(self, t_sent: float, vx: float, vy: float, omega: float) -> None:
        self.append(CommandLogEntry(t_sent, vx, vy, omega))

    def snapshot(self) -> Tuple[CommandLogEntry, ...]:
        return tuple(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def dump(self, fp: IO[str]) -> None:
        for e in self._entries:
            fp.write(f"{e.t_sent!r} {e.vx!r} {e.vy!r} {e.omega!r}\n")

    @classmethod
    def load(cls, lines: Iterable[str], capacity: int = 256) -> "CommandLog":
        log = cls(capacity)
        for lineno, raw in enumerate(lines, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 4:
                raise ValueError(
                    f"line {lineno}: expected 't vx vy omega', "
                    f"got {len(parts)} fields")
            try:
                t, vx, vy, om = (float(p) for p in parts)
            except ValueError:
                raise ValueError(f"line {lineno}: bad number") from None
            log.record(t, vx, vy, om)
        return log


def advance_pose(x: float, y: float, heading: float,
                 vx: float, vy: float, omega: float,
                 dt: float) -> Tuple[float, float, float]:
    """Integrate a constant body twist for dt; exact arc when rotating."""
    if abs(omega) < 1e-12:
        c = math.cos(heading)
        s = math.sin(heading)
        return (x + (c * vx - s * vy) * dt,
                y + (s * vx + c * vy) * dt,
                heading)
    h1 = heading + omega * dt
    s0 = math.sin(heading)
    c0 = math.cos(heading)
    s1 = math.sin(h1)
    c1 = math.cos(h1)
    return (x + (vx * (s1 - s0) + vy * (c1 - c0)) / omega,
            y + (vx * (c0 - c1) + vy * (s1 - s0)) / omega,
            h1)


def predict_current_state(frame: VisionFrame,
                          log: Optional[CommandLog],
                          now: float) -> RobotState:
    """Replay sent commands over the stale frame to estimate the state at `now`.

    Gaps not covered by the log (an empty log, or the span before its first
    entry) coast ballistically on the frame's own velocity, or hold still
    if the frame has none.
    """
    if now < frame.t_capture:
        raise ValueError(
            f"now ({now}) is before the frame capture time "
            f"({frame.t_capture})")

    entries = log.snapshot() if log is not None else ()
    x = frame.position.x
    y = frame.position.y
    heading = frame.heading
    bvx = frame.velocity.x if frame.velocity is not None else 0.0
    bvy = frame.velocity.y if frame.velocity is not None else 0.0

    # rightmost entry sent at or before the capture time, scanning from the
    # recent end because the window is short compared to the log
    n = len(entries)
    i = n - 1
    while i >= 0 and entries[i].t_sent > frame.t_capture:
        i -= 1

    t = frame.t_capture
    applied: Optional[CommandLogEntry] = None
    while t < now:
        t_next = entries[i + 1].t_sent if i + 1 < n else now
        if t_next > now:
            t_next = now
        if t_next > t:
            if i < 0:
                # before any logged command: world-frame coast
                x += bvx * (t_next - t)
                y += bvy * (t_next - t)
            else:
                e = entries[i]
                x, y, heading = advance_pose(x, y, heading,
                                             e.vx, e.vy, e.omega, t_next - t)
                applied = e
        t = t_next
        if i + 1 < n and t >= entries[i + 1].t_sent:
            i += 1
        elif t >= now:
            break

    if applied is not None:
        velocity = Vec2(applied.vx, applied.vy).rotated(heading)
        omega = applied.omega
    else:
        velocity = Vec2(bvx, bvy)
        omega = 0.0
    return RobotState(Vec2(x, y), velocity, heading, omega)


# --- odometry ----------------------------------------------------------------

# wheel positions front +-30 deg and rear +-45 deg off the back axis;
# stored as rolling (tangent) directions, position + 90 deg
_DEFAULT_TANGENTS = tuple(
    math.radians(p + 90.0) for p in (30.0, -30.0, 135.0, -135.0))


@dataclass(frozen=True)
class WheelConfig:
    """Omnidirectional wheel layout and drivetrain constants."""

    wheel_tangents: Tuple[float, float, float, float] = _DEFAULT_TANGENTS
    wheel_radius: float = 0.027  # m
    base_radius: float = 0.08  # m, center to wheel contact
    gear_ratio: float = 18.0 / 60.0  # wheel revs per motor rev

    def __post_init__(self):
        if self.wheel_radius <= 0.0 or self.base_radius <= 0.0:
            raise ValueError("wheel_radius and base_radius must be > 0")
        if not 0.0 < self.gear_ratio:
            raise ValueError("gear_ratio must be > 0")
        jac = np.empty((len(self.wheel_tangents), 3))
        for i, psi in enumerate(self.wheel_tangents):
            jac[i, 0] = math.cos(psi)
            jac[i, 1] = math.sin(psi)
            jac[i, 2] = self.base_radius
        if np.linalg.matrix_rank(jac) < 3:
            raise ValueError(
                "wheel layout is rank-deficient; the body twist is not "
                "observable from wheel speeds")
        object.__setattr__(self, "_jacobian", jac)
        object.__setattr__(self, "_pinv", np.linalg.pinv(jac))

    @property
    def jacobian(self) -> np.ndarray:
        """Rows map a body twist (vx, vy, omega) to wheel rim speeds."""
        return self._jacobian

    def motor_to_wheel(self, motor_speed: float) -> float:
        return motor_speed * self.gear_ratio

    def wheel_speeds_for(self, vx: float, vy: float, omega: float,
                         ) -> Tuple[float, ...]:
        """Forward kinematics: wheel angular speeds (rad/s) for a body twist."""
        rims = self._jacobian @ np.array([vx, vy, omega])
        return tuple(rims / self.wheel_radius)

    def twist_from_wheels(self, wheel_speeds: Sequence[float],
                          ) -> Tuple[float, float, float]:
        """Least-squares body twist from wheel angular speeds (rad/s)."""
        speeds = np.asarray(wheel_speeds, dtype=float)
        if speeds.shape != (len(self.wheel_tangents),):
            raise ValueError(
                f"expected {len(self.wheel_tangents)} wheel speeds, "
                f"got shape {speeds.shape}")
        twist = self._pinv @ (speeds * self.wheel_radius)
        return float(twist[0]), float(twist[1]), float(twist[2])


def odometry_step(previous: RobotState, wheel_speeds: Sequence[float],
                  gyro_omega: float, dt: float,
                  config: WheelConfig = WheelConfig()) -> RobotState:
    """Advance the pose one sample using wheel speeds and the gyro rate.

    The gyro fully replaces the encoder-derived rotation rate; encoders
    contribute translation only.
    """
    if dt < 0.0:
        raise ValueError("dt must be >= 0")
    vx, vy, _ = config.twist_from_wheels(wheel_speeds)
    x, y, heading = advance_pose(previous.position.x, previous.position.y,
                                 previous.heading, vx, vy, gyro_omega, dt)
    return RobotState(Vec2(x, y), Vec2(vx, vy).rotated(heading),
                      heading, gyro_omega)


def fuse_on_vision(frame: VisionFrame, odom: RobotState, trust: float,
                   log: Optional[CommandLog] = None,
                   now: Optional[float] = None) -> RobotState:
    """Convex blend between the vision-predicted state and odometry.

    trust = 1 returns the vision prediction (replayed to `now` when a log
    is supplied), trust = 0 returns the odometry state. Headings blend
    along the shorter arc.
    """
    if not 0.0 <= trust <= 1.0:
        raise ValueError(f"trust must be within [0, 1], got {trust!r}")
    vision = predict_current_state(
        frame, log, now if now is not None else frame.t_capture)
    w = 1.0 - trust
    pos = vision.position * trust + odom.position * w
    vel = vision.velocity * trust + odom.velocity * w
    heading = wrap_angle(
        odom.heading + trust * wrap_angle(vision.heading - odom.heading))
    omega = trust * vision.angular_velocity + w * odom.angular_velocity
    return RobotState(pos, vel, heading, omega)
