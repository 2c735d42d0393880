"""Movement primitives: RoS, DtP, RiP, trajectory following."""

import math
import random

from sslmotion.navigation import (
    NavKind,
    NavTarget,
    command_for,
    drive_to_point,
    follow_trajectory,
    rotate_in_point,
    rotate_on_self,
)
from sslmotion.trajectory import plan_2d_synchronized
from sslmotion.worldmodel import MotionLimits, RobotState, Vec2, wrap_angle

LIM = MotionLimits(2.0, 3.0, 10.0, 30.0)


def state(x=0.0, y=0.0, heading=0.0, vx=0.0, vy=0.0):
    return RobotState(Vec2(x, y), Vec2(vx, vy), heading, 0.0)


def body_to_world(cmd, heading):
    return Vec2(cmd.vx, cmd.vy).rotated(heading)


# --- rotate on self -----------------------------------------------------------


def test_ros_fixed_point():
    cmd = rotate_on_self(state(heading=0.8), 0.8, LIM)
    assert cmd.vx == 0.0 and cmd.vy == 0.0 and cmd.omega == 0.0


def test_ros_clamps_to_omega_max():
    lim = MotionLimits(2.0, 3.0, 6.0, 30.0)
    cmd = rotate_on_self(state(heading=0.0), math.pi / 2.0, lim)
    # raw law says 4 * pi/2 = 2pi, the cap wins
    assert cmd.omega == 6.0


def test_ros_proportional_law():
    cmd = rotate_on_self(state(heading=0.0), -0.1, LIM)
    assert abs(cmd.omega - (-0.4)) < 1e-12


def test_ros_takes_short_way_around():
    cmd = rotate_on_self(state(heading=3.0), -3.0, LIM)
    # error wraps to +0.28.., not -6.0
    assert cmd.omega > 0.0


def test_ros_converges_within_two_seconds():
    dt = 0.005
    for start_err in (math.pi, -2.0, 1.0, 0.3):
        heading = start_err
        t = 0.0
        while t < 2.0:
            cmd = rotate_on_self(state(heading=heading), 0.0, LIM)
            heading = wrap_angle(heading + cmd.omega * dt)
            t += dt
        assert abs(heading) < math.radians(1.0)


# --- drive to point -----------------------------------------------------------


def test_dtp_zero_translation_at_target():
    cmd = drive_to_point(state(1.0, 1.0), Vec2(1.0, 1.0), 0.0, LIM)
    assert cmd.vx == 0.0 and cmd.vy == 0.0


def test_dtp_full_speed_when_aligned_and_far():
    cmd = drive_to_point(state(), Vec2(3.0, 0.0), 0.0, LIM)
    assert abs(cmd.vx - LIM.v_max) < 1e-12
    assert abs(cmd.vy) < 1e-12


def test_dtp_cos_gate_blocks_translation_at_right_angle():
    # commanded to face +x while pointing -y: rotation error is exactly
    # pi/2, so the cos gate pins translation to zero until the turn starts
    cmd = drive_to_point(state(heading=-math.pi / 2.0), Vec2(3.0, 0.0),
                         0.0, LIM)
    assert abs(cmd.vx) < 1e-12 and abs(cmd.vy) < 1e-12
    assert cmd.omega > 0.0


def test_dtp_translation_points_at_target():
    rng = random.Random(7)
    for _ in range(200):
        s = state(rng.uniform(-2, 2), rng.uniform(-2, 2),
                  rng.uniform(-0.5, 0.5))
        target = Vec2(rng.uniform(-2, 2), rng.uniform(-2, 2))
        if target.dist(s.position) < 1e-6:
            continue
        cmd = drive_to_point(s, target, s.heading, LIM)
        world = body_to_world(cmd, s.heading)
        if world.norm() < 1e-12:
            continue
        to_target = target - s.position
        cosang = world.dot(to_target) / (world.norm() * to_target.norm())
        assert cosang > 1.0 - 1e-9


def test_dtp_speed_monotone_in_error_and_distance():
    speeds = []
    for err in [k * math.pi / 40.0 for k in range(21)]:
        cmd = drive_to_point(state(), Vec2(3.0, 0.0), err, LIM)
        speeds.append(math.hypot(cmd.vx, cmd.vy))
    assert all(a >= b - 1e-12 for a, b in zip(speeds, speeds[1:]))
    assert speeds[0] == LIM.v_max and speeds[-1] < 1e-12
    speeds = []
    for dist in [0.05 * k for k in range(1, 11)]:
        cmd = drive_to_point(state(), Vec2(dist, 0.0), 0.0, LIM)
        speeds.append(math.hypot(cmd.vx, cmd.vy))
    assert all(b >= a - 1e-12 for a, b in zip(speeds, speeds[1:]))


# --- rotate in point ----------------------------------------------------------


def test_rip_pure_tangential_on_circle():
    # on the circle, facing the pivot: no radial correction, just the
    # tangential term and the matching turn rate
    s = state(1.0, 0.0, heading=math.pi)  # pivot at origin, looking at it
    cmd = rotate_in_point(s, Vec2(0.0, 0.0), 1.0, 0.5, LIM)
    world = body_to_world(cmd, s.heading)
    radial = Vec2(1.0, 0.0)  # outward unit vector at this pose
    assert abs(world.dot(radial)) < 1e-12
    assert abs(world.norm() - 0.5) < 1e-12
    assert abs(cmd.omega - 0.5 / 1.0) < 1e-12


def test_rip_zero_speed_on_circle_is_equilibrium():
    s = state(1.0, 0.0, heading=math.pi)
    cmd = rotate_in_point(s, Vec2(0.0, 0.0), 1.0, 0.0, LIM)
    assert cmd.vx == 0.0 and cmd.vy == 0.0 and cmd.omega == 0.0


def test_rip_corrects_inward_when_outside():
    s = state(1.1, 0.0, heading=math.pi)
    cmd = rotate_in_point(s, Vec2(0.0, 0.0), 1.0, 0.5, LIM)
    world = body_to_world(cmd, s.heading)
    # positive x is outward here, so the correction must point in -x
    assert world.dot(Vec2(1.0, 0.0)) < 0.0


def test_rip_falls_back_to_ros_at_pivot():
    s = state(0.0, 0.0, heading=1.0)
    cmd = rotate_in_point(s, Vec2(0.0, 0.0), 1.0, 0.5, LIM)
    assert cmd.vx == 0.0 and cmd.vy == 0.0


def test_rip_orbit_stays_on_circle():
    # closed-loop kinematic orbit for ten seconds; the radius error must
    # stay inside 2 cm once any transient dies out
    dt = 0.005
    pivot = Vec2(0.0, 0.0)
    pos = Vec2(1.0, 0.0)
    heading = math.pi
    t = 0.0
    while t < 10.0:
        s = RobotState(pos, Vec2(0.0, 0.0), heading, 0.0)
        cmd = rotate_in_point(s, pivot, 1.0, 0.8, LIM)
        pos = pos + body_to_world(cmd, heading) * dt
        heading = heading + cmd.omega * dt
        t += dt
        if t > 1.0:
            assert abs(pos.dist(pivot) - 1.0) < 0.02


# --- follow trajectory ---------------------------------------------------------


def test_follow_is_pure_feedforward_on_trajectory():
    traj = plan_2d_synchronized(state(), Vec2(2.0, 1.0), LIM)
    t = 0.4
    pos, vel, _ = traj.sample(t)
    s = RobotState(pos, vel, 0.0, 0.0)
    cmd = follow_trajectory(s, traj, t, LIM)
    assert abs(cmd.vx - vel.x) < 1e-12
    assert abs(cmd.vy - vel.y) < 1e-12


def test_follow_feedforward_rotates_into_body_frame():
    traj = plan_2d_synchronized(state(), Vec2(2.0, 0.0), LIM)
    t = 0.4
    pos, vel, _ = traj.sample(t)
    s = RobotState(pos, vel, math.pi / 2.0, 0.0)
    cmd = follow_trajectory(s, traj, t, LIM, target_heading=math.pi / 2.0)
    world = body_to_world(cmd, s.heading)
    assert abs(world.x - vel.x) < 1e-12
    assert abs(world.y - vel.y) < 1e-12


def test_follow_terminal_hold_is_zero_at_target():
    traj = plan_2d_synchronized(state(), Vec2(1.0, 0.0), LIM)
    s = state(1.0, 0.0)
    cmd = follow_trajectory(s, traj, traj.total_time + 5.0, LIM)
    assert cmd.vx == 0.0 and cmd.vy == 0.0


def test_follow_corrects_lateral_offset():
    traj = plan_2d_synchronized(state(), Vec2(2.0, 0.0), LIM)
    t = 0.4
    pos, vel, _ = traj.sample(t)
    s = RobotState(pos + Vec2(0.0, -0.05), vel, 0.0, 0.0)
    cmd = follow_trajectory(s, traj, t, LIM)
    # k_p = 2 on a 5 cm error adds 0.1 m/s toward the reference
    assert abs(cmd.vy - 0.1) < 1e-12
    assert abs(cmd.vx - vel.x) < 1e-12


def test_commands_respect_limits():
    rng = random.Random(19)
    lim = MotionLimits(1.2, 2.0, 4.0, 20.0)
    traj = plan_2d_synchronized(state(), Vec2(1.5, -1.0), lim)
    for _ in range(500):
        s = state(rng.uniform(-3, 3), rng.uniform(-3, 3),
                  rng.uniform(-math.pi, math.pi))
        picks = [
            rotate_on_self(s, rng.uniform(-math.pi, math.pi), lim),
            drive_to_point(s, Vec2(rng.uniform(-3, 3), rng.uniform(-3, 3)),
                           0.0, lim),
            rotate_in_point(s, Vec2(rng.uniform(-1, 1), rng.uniform(-1, 1)),
                            rng.uniform(0.2, 1.0), rng.uniform(0, 3), lim),
            follow_trajectory(s, traj, rng.uniform(0, 2), lim),
        ]
        for cmd in picks:
            assert math.hypot(cmd.vx, cmd.vy) <= lim.v_max + 1e-9
            assert abs(cmd.omega) <= lim.omega_max + 1e-9


def test_command_for_dispatches_by_kind():
    s = state(heading=0.0)
    ros = command_for(s, NavTarget(kind=NavKind.ROTATE_ON_SELF,
                                   target_heading=-0.1), LIM)
    assert abs(ros.omega - (-0.4)) < 1e-12
    dtp = command_for(s, NavTarget(kind=NavKind.DRIVE_TO_POINT,
                                   point=Vec2(3.0, 0.0), target_heading=0.0),
                      LIM)
    assert abs(dtp.vx - LIM.v_max) < 1e-12
