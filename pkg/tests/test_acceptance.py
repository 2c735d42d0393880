"""Acceptance gate: the checks this package ships against, one test each.

Every test prints a single summary line on success (visible with `pytest -s`
or in captured output). Thresholds are stated inline and are not tunable:
if one regresses, the test fails rather than loosening the bound.
"""

import dataclasses
import glob
import itertools
import math
import os
import random
import time

import numpy as np

import oracles
from sslmotion.estimator import WheelConfig
from sslmotion.harness import (VisionConfig, format_report, format_trace,
                               load_scenario, run)
from sslmotion.harness.cli import bench_scene
from sslmotion.harness.sim import ROBOT_RADIUS
from sslmotion.planner import PlanRequest, plan
from sslmotion.refparser import (Command, DynamicFormation, FormationReason,
                                 GameTactic, Halt, PlannedPlay, PlannedTactic,
                                 RefereeInput, Stage, TacticMode, parse,
                                 replay_log)
from sslmotion.trajectory import plan_1d, plan_2d_synchronized
from sslmotion.worldmodel import (KeepOutDisc, MotionLimits, MovingDisc,
                                  Rect, RobotState, StaticDisc, Vec2)

HERE = os.path.dirname(__file__)
SCENARIO_DIR = os.path.join(HERE, "..", "scenarios")


def note(msg):
    print(f"acceptance: {msg}")


# ------------------------------------------------- 1. planner latency


def test_planner_latency_budget():
    rng = np.random.default_rng(0)
    obstacles = bench_scene(15, rng)
    limits = MotionLimits(2.0, 3.0, 10.0, 30.0)
    a, b = Vec2(-4.0, -2.5), Vec2(4.0, 2.5)
    state = RobotState(a, Vec2(0.0, 0.0), 0.0)
    target = b

    # first call excluded: it may pay one-time kernel compilation
    prev = plan(PlanRequest(start=state, target=target, limits=limits,
                            obstacles=obstacles))
    samples = []
    control_dt = 1.0 / 60.0
    for _ in range(10_000):
        req = PlanRequest(start=state, target=target, limits=limits,
                          obstacles=obstacles, previous=prev)
        t0 = time.perf_counter()
        prev = plan(req)
        samples.append((time.perf_counter() - t0) * 1e3)
        pos, vel, _ = prev.trajectory.sample(control_dt)
        state = RobotState(pos, vel, 0.0)
        if pos.dist(target) < 0.1:
            target = a if target is b else b
            prev = None

    arr = np.asarray(samples)
    median = float(np.median(arr))
    p99 = float(np.percentile(arr, 99))
    assert median < 1.0, f"median {median:.4f} ms"
    assert p99 < 5.0, f"p99 {p99:.4f} ms"
    note(f"planner latency, 15 obstacles x 10000 iterations: "
         f"median {median:.4f} ms (< 1), p99 {p99:.4f} ms (< 5): PASS")


# ------------------------------------------------- 2. 1D optimality


def test_1d_profiles_are_time_optimal():
    t_start = time.perf_counter()
    rng = random.Random(20260816)
    worst = 0.0
    for _ in range(10_000):
        v_max = rng.uniform(0.3, 4.0)
        a_max = rng.uniform(0.5, 6.0)
        x0 = rng.uniform(-5.0, 5.0)
        v0 = rng.uniform(-v_max, v_max)
        target = x0 + rng.uniform(-8.0, 8.0)
        p = plan_1d(x0, v0, target, v_max, a_max)
        want = oracles.min_time_1d(x0, v0, target, v_max, a_max)
        worst = max(worst, abs(p.total_time - want))
    assert worst <= 1e-9, f"worst duration gap {worst:.3e}"

    worst_end = 0.0
    for _ in range(100):
        v_max = rng.uniform(0.3, 4.0)
        a_max = rng.uniform(0.5, 6.0)
        x0 = rng.uniform(-5.0, 5.0)
        v0 = rng.uniform(-v_max, v_max)
        p = plan_1d(x0, v0, x0 + rng.uniform(-8.0, 8.0), v_max, a_max)
        x_end, v_end, _peak = oracles.integrate_profile(p)
        gx, gv, _ = p.sample(p.total_time)
        worst_end = max(worst_end, abs(x_end - gx), abs(v_end - gv))
    assert worst_end <= 1e-4, f"worst integrated endpoint gap {worst_end:.3e}"

    elapsed = time.perf_counter() - t_start
    assert elapsed < 10.0, f"took {elapsed:.2f} s"
    note(f"1d optimality, 10000 closed-form (gap {worst:.1e} <= 1e-9) + "
         f"100 integrated (gap {worst_end:.1e} <= 1e-4) in {elapsed:.2f} s "
         f"(< 10): PASS")


# ------------------------------------------------- 3. 2D synchronization


def test_2d_axes_synchronize_within_budget_split():
    # Rest starts: from standstill every instance must satisfy all three
    # clauses at once (sync gap, endpoint, per-axis caps).
    rng = random.Random(77)
    worst_gap = 0.0
    worst_end = 0.0
    for _ in range(1_000):
        v_max = rng.uniform(0.5, 4.0)
        a_max = rng.uniform(0.8, 6.0)
        limits = MotionLimits(v_max, a_max, 10.0, 30.0)
        start = RobotState(
            Vec2(rng.uniform(-4.0, 4.0), rng.uniform(-3.0, 3.0)),
            Vec2(0.0, 0.0), 0.0)
        dx = rng.choice((-1.0, 1.0)) * rng.uniform(0.05, 8.0)
        dy = rng.choice((-1.0, 1.0)) * rng.uniform(0.05, 8.0)
        target = Vec2(start.position.x + dx, start.position.y + dy)

        traj = plan_2d_synchronized(start, target, limits)
        gap = abs(traj.x.total_time - traj.y.total_time)
        worst_gap = max(worst_gap, gap)
        assert gap <= 1e-3, f"sync gap {gap:.3e}"

        end = traj.end_position()
        err = end.dist(target)
        worst_end = max(worst_end, err)
        assert err < 1e-6, f"endpoint error {err:.3e}"

        cos_a, sin_a = math.cos(traj.alpha), math.sin(traj.alpha)
        vx_cap = v_max * cos_a + 1e-9
        vy_cap = v_max * sin_a + 1e-9
        ax_cap = a_max * cos_a + 1e-9
        ay_cap = a_max * sin_a + 1e-9
        for k in range(61):
            t = traj.total_time * k / 60.0
            _, vel, acc = traj.sample(t)
            assert abs(vel.x) <= vx_cap and abs(vel.y) <= vy_cap
            assert abs(acc.x) <= ax_cap and abs(acc.y) <= ay_cap
    note(f"2d synchronization, 1000 instances: "
         f"worst sync gap {worst_gap:.2e} (<= 1e-3), "
         f"worst endpoint {worst_end:.2e} (< 1e-6), axis caps held: PASS")


# ------------------------------------------------- 4. scenario safety suite


def _trace_arrays(report):
    """Per-robot tick arrays (t, x, y) parsed from the trace rows."""
    cols = {}
    for row in report.trace_rows:
        p = row.split()
        cols.setdefault(int(p[1]), []).append(
            (float(p[0]), float(p[2]), float(p[3])))
    out = {}
    for rid, rows in cols.items():
        arr = np.asarray(rows)
        out[rid] = (arr[:, 0], arr[:, 1], arr[:, 2])
    return out


def _fine_clearance_floor(scenario, report, subdiv=10):
    """Min rim clearance over the run, re-sampled at dt/subdiv.

    Positions are linearly interpolated between ticks (the plant holds
    velocity constant inside a tick, so this is the true path). Distances
    are recomputed here from the raw shape definitions rather than through
    the library geometry helpers.
    """
    tracks = _trace_arrays(report)
    ids = sorted(tracks)
    t_tick = tracks[ids[0]][0]
    frac = np.arange(subdiv) / subdiv
    t_fine = (t_tick[:-1, None] + np.diff(t_tick)[:, None] * frac).ravel()
    t_fine = np.append(t_fine, t_tick[-1])

    def interp(values):
        fine = (values[:-1, None]
                + np.diff(values)[:, None] * frac).ravel()
        return np.append(fine, values[-1])

    pos = {rid: (interp(x), interp(y)) for rid, (_, x, y) in tracks.items()}

    floor = np.inf
    for rid in ids:
        px, py = pos[rid]
        for ob in scenario.obstacles:
            if isinstance(ob, KeepOutDisc):
                continue  # rule zone, not a physical object
            if isinstance(ob, StaticDisc):
                d = np.hypot(px - ob.center.x, py - ob.center.y) - ob.radius
            elif isinstance(ob, MovingDisc):
                adv = np.minimum(t_fine, ob.horizon)
                cx = ob.center.x + ob.velocity.x * adv
                cy = ob.center.y + ob.velocity.y * adv
                d = np.hypot(px - cx, py - cy) - ob.radius
            elif isinstance(ob, Rect):
                gx = np.maximum(np.maximum(ob.lo.x - px, px - ob.hi.x), 0.0)
                gy = np.maximum(np.maximum(ob.lo.y - py, py - ob.hi.y), 0.0)
                outside = np.hypot(gx, gy)
                depth = np.minimum(np.minimum(px - ob.lo.x, ob.hi.x - px),
                                   np.minimum(py - ob.lo.y, ob.hi.y - py))
                d = np.where(outside > 0.0, outside, -depth)
            else:
                raise AssertionError(f"unexpected obstacle {ob!r}")
            floor = min(floor, float(d.min()) - ROBOT_RADIUS)
        for other in ids:
            if other <= rid:
                continue
            qx, qy = pos[other]
            d = np.hypot(px - qx, py - qy) - 2.0 * ROBOT_RADIUS
            floor = min(floor, float(d.min()))
    return floor


def test_scenario_suite_completes_clean():
    paths = sorted(glob.glob(os.path.join(SCENARIO_DIR, "*.yaml")))
    assert len(paths) == 20
    t0 = time.perf_counter()
    worst_floor = np.inf
    for path in paths:
        scenario = load_scenario(path)
        report = run(scenario)
        name = scenario.name
        assert report.fouls_total == 0, f"{name}: fouls {report.foul_events}"
        for robot in report.robots:
            assert robot.completed_s is not None, \
                f"{name}: robot {robot.id} never completed " \
                f"(final distance {robot.final_distance_m:.3f})"
            if math.isfinite(robot.min_clearance_m):
                assert robot.min_clearance_m >= 0.0, \
                    f"{name}: robot {robot.id} clearance " \
                    f"{robot.min_clearance_m:.4f}"
        dt_fine = report.dt_s / 10.0
        v_cap = max(r.limits.v_max for r in scenario.robots)
        floor = _fine_clearance_floor(scenario, report)
        if math.isfinite(floor):
            worst_floor = min(worst_floor, floor)
            assert floor >= -v_cap * dt_fine, \
                f"{name}: fine-resampled clearance {floor:.5f}"
    elapsed = time.perf_counter() - t0
    note(f"safety suite, 20 scenarios: zero fouls, all robots completed, "
         f"fine-resampled clearance floor {worst_floor:.4f} m "
         f"in {elapsed:.1f} s: PASS")


# ------------------------------------------------- 5. latency compensation


def test_latency_compensation_keeps_pace():
    scenario = load_scenario(os.path.join(SCENARIO_DIR,
                                          "01_empty_drive.yaml"))
    assert scenario.vision.latency_s == 0.1

    delayed = run(scenario)
    instant = run(dataclasses.replace(
        scenario, vision=VisionConfig(rate_hz=60.0, latency_s=0.0)))

    t_delayed = delayed.robots[0].completed_s
    t_instant = instant.robots[0].completed_s
    assert t_delayed is not None and t_instant is not None
    assert abs(t_delayed - t_instant) <= 0.10 * t_instant, \
        f"{t_delayed:.3f} s with latency vs {t_instant:.3f} s without"

    err_delayed = delayed.robots[0].max_estimator_error_m
    err_instant = instant.robots[0].max_estimator_error_m
    assert err_delayed < 0.01, f"estimator error {err_delayed:.4f} m"
    assert err_instant < 0.01, f"estimator error {err_instant:.4f} m"
    note(f"latency compensation: {t_delayed:.3f} s at 100 ms latency vs "
         f"{t_instant:.3f} s instant (within 10%), worst estimator error "
         f"{max(err_delayed, err_instant) * 100:.3f} cm (< 1): PASS")


# ------------------------------------------------- 6. referee parser


def _all_previous_leaves():
    yield None
    yield Halt()
    for reason in FormationReason:
        yield DynamicFormation(reason=reason)
    for play in PlannedPlay:
        yield PlannedTactic(play=play)
    for mode in TacticMode:
        yield GameTactic(mode=mode)


def test_referee_parser_totality_and_golden_timeline():
    families = (Halt, DynamicFormation, PlannedTactic, GameTactic)
    count = 0
    halts = 0
    for cmd, stage, ball, prev in itertools.product(
            Command, Stage, (False, True), _all_previous_leaves()):
        leaf = parse(RefereeInput(command=cmd, stage=stage,
                                  ball_moved=ball), prev)
        assert isinstance(leaf, families)
        if cmd is Command.HALT:
            assert leaf == Halt()
            halts += 1
        count += 1
    assert count == 14 * 10 * 2 * 15

    with open(os.path.join(HERE, "data", "referee_log.txt"),
              encoding="utf-8") as fp:
        timeline = replay_log(fp)
    got = "".join(f"{t:.3f} {leaf.tag()}\n" for t, leaf in timeline)
    with open(os.path.join(HERE, "data", "referee_timeline.txt"),
              encoding="utf-8") as fp:
        golden = fp.read()
    assert got == golden
    note(f"referee parser: {count} product inputs each gave one leaf, "
         f"Halt dominated all {halts} HALT inputs, golden timeline of "
         f"{len(timeline)} transitions matched: PASS")


# ------------------------------------------------- 7. odometry round trip


def test_odometry_round_trip_and_symmetry():
    cfg = WheelConfig()
    rng = random.Random(4242)
    worst = 0.0
    for _ in range(10_000):
        twist = (rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0),
                 rng.uniform(-12.0, 12.0))
        back = cfg.twist_from_wheels(cfg.wheel_speeds_for(*twist))
        worst = max(worst, max(abs(b - t) for b, t in zip(back, twist)))
    assert worst <= 1e-9, f"worst round-trip error {worst:.3e}"

    worst_drift = 0.0
    for speed in np.linspace(-20.0, 20.0, 41):
        vx, vy, _ = cfg.twist_from_wheels((speed,) * 4)
        worst_drift = max(worst_drift, abs(vx), abs(vy))
    assert worst_drift <= 1e-12, f"translation drift {worst_drift:.3e}"
    note(f"odometry: 10000 round trips (worst {worst:.1e} <= 1e-9), "
         f"equal-wheel translation {worst_drift:.1e} (<= 1e-12): PASS")


# ------------------------------------------------- 8. determinism


def test_same_seed_runs_are_byte_identical():
    checked = 0
    for name in ("02_head_on_swap.yaml", "13_moving_swarm.yaml"):
        path = os.path.join(SCENARIO_DIR, name)
        first = run(load_scenario(path))
        second = run(load_scenario(path))
        assert format_report(first) == format_report(second)
        assert format_trace(first) == format_trace(second)
        checked += 1
    note(f"determinism: {checked} scenarios re-run seed-identical, report "
         f"and trace byte-identical: PASS")
