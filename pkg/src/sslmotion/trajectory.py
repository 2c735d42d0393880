"""Time-optimal trajectories under velocity and acceleration caps.

1D profiles are bang-bang: brake first if the stopping point already
overshoots the target, then maximum acceleration, an optional cruise at the
velocity cap, and maximum deceleration into rest exactly on the target.
Planar motion splits the caps between the axes by an angle alpha
(x gets cos(alpha) of both caps, y gets sin(alpha)) chosen by binary search
so both axes finish together.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from . import _kernels as K
from .worldmodel import MotionLimits, RobotState, Vec2

SYNC_TOLERANCE = K.SYNC_TOL  # s
SYNC_ITERATIONS = K.SYNC_ITERS


@dataclass(frozen=True, slots=True)
class Segment1D:
    """Constant-acceleration piece; x0/v0 are the state at the piece start."""

    t_end: float  # s, relative to profile start
    x0: float  # m
    v0: float  # m/s
    a: float  # m/s^2


@dataclass(frozen=True, slots=True)
class Profile1D:
    """Piecewise-constant-acceleration motion ending at rest on `target`."""

    segments: Tuple[Segment1D, ...]
    total_time: float  # s
    target: float  # m

    def sample(self, t: float) -> Tuple[float, float, float]:
        """(position, velocity, acceleration) at time t; holds rest past the end."""
        segs = self.segments
        n = len(segs)
        if n == 0 or t >= segs[-1].t_end:
            return self.target, 0.0, 0.0
        if t < 0.0:
            t = 0.0
        t_start = 0.0
        i = 0
        while i < n - 1 and t >= segs[i].t_end:
            t_start = segs[i].t_end
            i += 1
        seg = segs[i]
        tau = t - t_start
        return (seg.x0 + seg.v0 * tau + 0.5 * seg.a * tau * tau,
                seg.v0 + seg.a * tau,
                seg.a)


@dataclass(frozen=True, slots=True)
class Trajectory2D:
    """Per-axis profiles plus the axis split that synchronized them."""

    x: Profile1D
    y: Profile1D
    alpha: float  # rad, axis budget split
    total_time: float  # s

    def sample(self, t: float) -> Tuple[Vec2, Vec2, Vec2]:
        px, vx, ax = self.x.sample(t)
        py, vy, ay = self.y.sample(t)
        return Vec2(px, py), Vec2(vx, vy), Vec2(ax, ay)

    def end_position(self) -> Vec2:
        return Vec2(self.x.target, self.y.target)


def _validate_finite(**values: float) -> None:
    for name, v in values.items():
        if not math.isfinite(v):
            raise ValueError(f"{name} must be finite, got {v!r}")


def _validate_limits(v_max: float, a_max: float) -> None:
    _validate_finite(v_max=v_max, a_max=a_max)
    if v_max <= 0.0:
        raise ValueError(f"v_max must be > 0, got {v_max!r}")
    if a_max <= 0.0:
        raise ValueError(f"a_max must be > 0, got {a_max!r}")


def profile_from_table(tab: np.ndarray, n: int, target: float) -> Profile1D:
    """Wrap a kernel profile table (absolute x0 rows) in value types."""
    segments = tuple(Segment1D(tab[i, 0], tab[i, 1], tab[i, 2], tab[i, 3])
                     for i in range(n))
    total = tab[n - 1, 0] if n > 0 else 0.0
    return Profile1D(segments, total, target)


def table_from_profile(profile: Profile1D) -> Tuple[np.ndarray, int]:
    """Inverse of profile_from_table, for feeding compiled checks."""
    n = len(profile.segments)
    tab = np.empty((max(n, 1), 4))
    for i, seg in enumerate(profile.segments):
        tab[i, 0] = seg.t_end
        tab[i, 1] = seg.x0
        tab[i, 2] = seg.v0
        tab[i, 3] = seg.a
    return tab, n


def plan_1d(x0: float, v0: float, target: float,
            v_max: float, a_max: float) -> Profile1D:
    """Time-optimal 1D profile from (x0, v0) to rest at target.

    An initial speed above v_max is brought back inside the cap by the
    first segment; the cap then holds for the rest of the profile.
    """
    _validate_finite(x0=x0, v0=v0, target=target)
    _validate_limits(v_max, a_max)
    tab = np.empty((3, 4))
    n = K.fill_profile_1d(target - x0, v0, v_max, a_max, tab)
    for i in range(n):
        tab[i, 1] += x0
    return profile_from_table(tab, n, target)


def plan_2d_synchronized(start: RobotState, target: Vec2,
                         limits: MotionLimits) -> Trajectory2D:
    """Planar time-optimal trajectory ending at rest on target.

    Heading is not planned here; rotation is controlled independently.
    """
    tabx = np.empty((3, 4))
    taby = np.empty((3, 4))
    nx, ny, total, alpha = K.build_direct(
        start.position.x, start.position.y,
        start.velocity.x, start.velocity.y,
        target.x, target.y,
        limits.v_max, limits.a_max,
        SYNC_TOLERANCE, SYNC_ITERATIONS,
        tabx, taby)
    return Trajectory2D(profile_from_table(tabx, nx, target.x),
                        profile_from_table(taby, ny, target.y),
                        alpha, total)
