"""Command line front end.

Subcommands:
  run <scenario.yaml>   simulate a scenario, print or write report/trace
  bench                 planner latency benchmark (median/p95/p99)
  parse-ref <log>       referee log -> leaf timeline
  replay <command-log>  integrate a command log from a start pose

Environment overrides (applied on top of scenario values and defaults):
  SSLM_V_MAX, SSLM_A_MAX, SSLM_OMEGA_MAX, SSLM_ALPHA_MAX  motion limits
  SSLM_K_OMEGA, SSLM_D_SLOW, SSLM_K_P, SSLM_K_RADIAL      navigation gains
  SSLM_CHECK_DT                                            collision step
  SSLM_PARALLEL=1                            per-robot stages on threads
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
import time
from typing import List, Optional

import numpy as np

from .. import navigation
from ..estimator import CommandLog, advance_pose
from ..planner import PlanRequest, SearchConfig, plan
from ..refparser import replay_log
from ..worldmodel import (MotionLimits, MovingDisc, Rect, RobotState,
                          StaticDisc, KeepOutDisc, Vec2, inflate)
from .scenario import Scenario, ScenarioError, load_scenario
from .sim import format_report, format_trace, run


def _env_float(name: str) -> Optional[float]:
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return None
    try:
        return float(raw)
    except ValueError:
        raise SystemExit(f"{name}: expected a number, got {raw!r}")


def _env_limits(base: MotionLimits) -> MotionLimits:
    v = _env_float("SSLM_V_MAX")
    a = _env_float("SSLM_A_MAX")
    om = _env_float("SSLM_OMEGA_MAX")
    al = _env_float("SSLM_ALPHA_MAX")
    if v is None and a is None and om is None and al is None:
        return base
    return MotionLimits(
        v if v is not None else base.v_max,
        a if a is not None else base.a_max,
        om if om is not None else base.omega_max,
        al if al is not None else base.alpha_max)


def _env_gains() -> navigation.NavGains:
    base = navigation.DEFAULT_GAINS
    k_om = _env_float("SSLM_K_OMEGA")
    d_slow = _env_float("SSLM_D_SLOW")
    k_p = _env_float("SSLM_K_P")
    k_rad = _env_float("SSLM_K_RADIAL")
    return navigation.NavGains(
        k_om if k_om is not None else base.k_omega,
        d_slow if d_slow is not None else base.d_slow,
        k_p if k_p is not None else base.k_p,
        k_rad if k_rad is not None else base.k_radial)


def _apply_env(scenario: Scenario) -> Scenario:
    robots = tuple(
        dataclasses.replace(r, limits=_env_limits(r.limits))
        for r in scenario.robots)
    return dataclasses.replace(scenario, robots=robots)


def _search_config(seed: int) -> SearchConfig:
    check_dt = _env_float("SSLM_CHECK_DT")
    if check_dt is None:
        return SearchConfig(seed=seed)
    return SearchConfig(seed=seed, check_dt=check_dt)


def _cmd_run(args) -> int:
    try:
        scenario = load_scenario(args.scenario)
    except (ScenarioError, OSError) as e:
        print(f"scenario error: {e}", file=sys.stderr)
        return 2
    if args.seed is not None:
        scenario = dataclasses.replace(scenario, seed=args.seed)
    scenario = _apply_env(scenario)
    parallel = args.parallel or os.environ.get("SSLM_PARALLEL") == "1"
    report = run(scenario,
                 search=_search_config(scenario.seed),
                 gains=_env_gains(),
                 parallel=parallel)
    text = format_report(report, include_timing=args.timing)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fp:
            fp.write(text)
    else:
        sys.stdout.write(text)
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as fp:
            fp.write(format_trace(report))
    return 1 if report.fouls_total else 0


def bench_scene(n_obstacles: int, rng: np.random.Generator):
    """A mixed, solvable obstacle field for latency benchmarking."""
    obstacles = []
    n_moving = min(3, n_obstacles // 5)
    n_static = n_obstacles - n_moving - (2 if n_obstacles >= 10 else 0)
    for _ in range(n_static):
        obstacles.append(StaticDisc(
            Vec2(rng.uniform(-3.0, 3.0), rng.uniform(-2.0, 2.0)), 0.09))
    for _ in range(n_moving):
        obstacles.append(MovingDisc(
            Vec2(rng.uniform(-3.0, 3.0), rng.uniform(-2.0, 2.0)), 0.09,
            Vec2(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)), 1.0))
    if n_obstacles >= 10:
        obstacles.append(Rect(Vec2(-1.0, -2.8), Vec2(-0.6, -1.2)))
        obstacles.append(KeepOutDisc(Vec2(0.0, 1.8), 0.4, True))
    return tuple(inflate(ob, 0.11) for ob in obstacles[:n_obstacles])


def _cmd_bench(args) -> int:
    rng = np.random.default_rng(args.seed)
    obstacles = bench_scene(args.obstacles, rng)
    limits = MotionLimits(2.0, 3.0, 10.0, 30.0)
    a = Vec2(-4.0, -2.5)
    b = Vec2(4.0, 2.5)
    state = RobotState(a, Vec2(0.0, 0.0), 0.0)
    target = b

    # warm-up excluded: the first call may trigger kernel compilation
    prev = plan(PlanRequest(start=state, target=target, limits=limits,
                            obstacles=obstacles))
    samples: List[float] = []
    control_dt = 1.0 / 60.0
    for _ in range(args.iters):
        req = PlanRequest(start=state, target=target, limits=limits,
                          obstacles=obstacles, previous=prev)
        t0 = time.perf_counter()
        prev = plan(req)
        samples.append((time.perf_counter() - t0) * 1e3)
        # track the plan like a 60 Hz control loop would
        pos, vel, _ = prev.trajectory.sample(control_dt)
        state = RobotState(pos, vel, 0.0)
        if pos.dist(target) < 0.1:
            target = a if target is b else b
            prev = None
    arr = np.asarray(samples)
    print(f"obstacles {args.obstacles}")
    print(f"iterations {args.iters}")
    print(f"median_ms {np.median(arr):.4f}")
    print(f"p95_ms {np.percentile(arr, 95):.4f}")
    print(f"p99_ms {np.percentile(arr, 99):.4f}")
    print(f"max_ms {arr.max():.4f}")
    return 0


def _cmd_parse_ref(args) -> int:
    try:
        with open(args.log, "r", encoding="utf-8") as fp:
            timeline = replay_log(fp)
    except OSError as e:
        print(f"log error: {e}", file=sys.stderr)
        return 2
    for t, leaf in timeline:
        print(f"{t:.3f} {leaf.tag()}")
    return 0


def _cmd_replay(args) -> int:
    try:
        with open(args.log, "r", encoding="utf-8") as fp:
            log = CommandLog.load(fp, capacity=1_000_000)
    except OSError as e:
        print(f"log error: {e}", file=sys.stderr)
        return 2
    entries = log.snapshot()
    x, y, heading = args.x, args.y, args.heading
    print(f"{entries[0].t_sent if entries else 0.0:.3f} "
          f"{x:.6f} {y:.6f} {heading:.6f}")
    for i, e in enumerate(entries):
        t_next = entries[i + 1].t_sent if i + 1 < len(entries) \
            else e.t_sent + args.tail
        x, y, heading = advance_pose(x, y, heading, e.vx, e.vy, e.omega,
                                     t_next - e.t_sent)
        print(f"{t_next:.3f} {x:.6f} {y:.6f} {heading:.6f}")
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="sslmotion",
        description="trajectory planning sandbox: simulate, benchmark, "
                    "inspect")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate a scenario file")
    p_run.add_argument("scenario")
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--report", help="write report here (default stdout)")
    p_run.add_argument("--trace", help="write per-tick trace here")
    p_run.add_argument("--timing", action="store_true",
                       help="append wall-clock planner stats (breaks "
                            "byte-for-byte determinism)")
    p_run.add_argument("--parallel", action="store_true",
                       help="run per-robot control stages on threads")
    p_run.set_defaults(func=_cmd_run)

    p_bench = sub.add_parser("bench", help="planner latency benchmark")
    p_bench.add_argument("--obstacles", type=int, default=15)
    p_bench.add_argument("--iters", type=int, default=10_000)
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.set_defaults(func=_cmd_bench)

    p_ref = sub.add_parser("parse-ref", help="referee log to leaf timeline")
    p_ref.add_argument("log")
    p_ref.set_defaults(func=_cmd_parse_ref)

    p_rep = sub.add_parser("replay", help="integrate a command log")
    p_rep.add_argument("log")
    p_rep.add_argument("--x", type=float, default=0.0)
    p_rep.add_argument("--y", type=float, default=0.0)
    p_rep.add_argument("--heading", type=float, default=0.0)
    p_rep.add_argument("--tail", type=float, default=0.0,
                       help="seconds to hold the last command")
    p_rep.set_defaults(func=_cmd_replay)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
