"""Fixed-step closed-loop simulator.

Each tick runs the full pipeline: referee leaf -> constraints -> latency
compensated state estimate -> planner (at vision rate) -> trajectory
tracking command (at sim rate) -> plant integration. The plant is a
first-order velocity slew with an acceleration clamp; there is no wheel or
mass model. Everything is deterministic for a fixed scenario and seed:
reports and traces compare byte for byte across runs.

Robots in a scenario are all on our team; opponents are modeled as
obstacles. Vision frames carry every robot's true state, are captured at
the configured rate, and become visible to controllers only after the
configured latency (the t = 0 frame seeds the controllers, standing in
for a known starting lineup).
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple

from .. import navigation
from ..estimator import CommandLog, VisionFrame, predict_current_state
from ..navigation import NavGains, VelocityCommand, follow_trajectory
from ..planner import (INFLATION_MARGIN, PlanRequest, PlanResult,
                       SearchConfig, plan)
from ..refparser import (DynamicFormation, GameConstraints, GameStateLeaf,
                         GameTactic, Halt, PlannedTactic, TacticMode,
                         constraints_for, parse)
from ..worldmodel import (ROBOT_RADIUS, KeepOutDisc, MovingDisc, Obstacle,
                          RobotState, Vec2, distance_to_obstacle, inflate)
from .scenario import RobotSpec, Scenario

SIM_DT = 0.005  # s, 200 Hz plant and control rate
COMPLETION_DIST = 0.05  # m
COMPLETION_SPEED = 0.05  # m/s
CRASH_SPEED = 1.5  # m/s closing speed above which contact is a crash
FOUL_DEBOUNCE = 1.0  # s, minimum spacing of repeat events per offender
DEFENSE_MARGIN = 0.2  # m, keep this far from the opponent defense area
ANCHOR_POS = 0.03  # m, estimate must agree this closely to anchor a replan
ANCHOR_VEL = 0.15  # m/s, same gate for the velocity component

FOUL_CRASH = "bot_crash_unique"
FOUL_ATTACKER = "attacker_too_close_to_defense_area"
FOUL_DEFENDER = "defender_too_close_to_kick_point"
FOUL_NAMES = (FOUL_CRASH, FOUL_ATTACKER, FOUL_DEFENDER)


def plant_step(state: RobotState, cmd: VelocityCommand, limits,
               dt: float = SIM_DT) -> RobotState:
    """Advance the plant one step: velocity slews toward the command.

    The commanded body velocity is rotated to the world frame at the
    current heading, the velocity change is clamped to a_max*dt, and the
    angular rate change to alpha_max*dt; position and heading integrate
    the new rates (semi-implicit Euler).
    """
    target = Vec2(cmd.vx, cmd.vy).rotated(state.heading)
    speed = target.norm()
    if speed > limits.v_max:
        target = target * (limits.v_max / speed)
    dv = target - state.velocity
    dv_norm = dv.norm()
    max_dv = limits.a_max * dt
    if dv_norm > max_dv:
        dv = dv * (max_dv / dv_norm)
    v_new = state.velocity + dv

    omega_target = max(-limits.omega_max, min(limits.omega_max, cmd.omega))
    domega = omega_target - state.angular_velocity
    max_domega = limits.alpha_max * dt
    if domega > max_domega:
        domega = max_domega
    elif domega < -max_domega:
        domega = -max_domega
    omega_new = state.angular_velocity + domega

    return RobotState(state.position + v_new * dt, v_new,
                      state.heading + omega_new * dt, omega_new)


# --- fouls --------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class FoulEvent:
    t: float
    kind: str
    robot: int  # offending robot id (lower id of the pair for crashes)


class FoulDetector:
    """Edge-triggered foul events with a per-offender debounce window.

    A violation raises one event when it starts; the same offender cannot
    raise another event of the same kind until the condition has cleared
    and the debounce window has passed.
    """

    def __init__(self, scenario: Scenario):
        self._scenario = scenario
        self._their_rect = scenario.field.their_defense_area()
        self._active: Dict[Tuple[str, int, int], bool] = {}
        self._last_event: Dict[Tuple[str, int, int], float] = {}

    def _edge(self, key: Tuple[str, int, int], violating: bool,
              t: float) -> bool:
        was = self._active.get(key, False)
        self._active[key] = violating
        if not violating or was:
            return False
        if t - self._last_event.get(key, -math.inf) < FOUL_DEBOUNCE:
            return False
        self._last_event[key] = t
        return True

    def step(self, t: float, states: Dict[int, RobotState],
             leaf: GameStateLeaf, constraints: GameConstraints,
             ) -> List[FoulEvent]:
        events: List[FoulEvent] = []
        specs = {r.id: r for r in self._scenario.robots}
        ids = sorted(states)

        for a in range(len(ids)):
            for b in range(a + 1, len(ids)):
                i, j = ids[a], ids[b]
                si, sj = states[i], states[j]
                rel = sj.position - si.position
                dist = rel.norm()
                overlap = dist < 2.0 * ROBOT_RADIUS
                closing = 0.0
                if dist > 1e-9:
                    closing = -rel.dot(sj.velocity - si.velocity) / dist
                if self._edge((FOUL_CRASH, i, j),
                              overlap and closing > CRASH_SPEED, t):
                    events.append(FoulEvent(t, FOUL_CRASH, i))

        in_play = isinstance(leaf, (PlannedTactic, GameTactic))
        for i in ids:
            spec = specs[i]
            near = False
            if in_play and not spec.goalkeeper:
                d = distance_to_obstacle(states[i].position, self._their_rect)
                near = d - ROBOT_RADIUS < DEFENSE_MARGIN
            if self._edge((FOUL_ATTACKER, i, -1), near, t):
                events.append(FoulEvent(t, FOUL_ATTACKER, i))

        keepout = constraints.ball_keepout
        for i in ids:
            breach = (isinstance(leaf, DynamicFormation)
                      and keepout is not None
                      and states[i].position.dist(self._scenario.ball)
                      < keepout)
            if self._edge((FOUL_DEFENDER, i, -1), breach, t):
                events.append(FoulEvent(t, FOUL_DEFENDER, i))
        return events


# --- per-robot runtime --------------------------------------------------------


@dataclass(slots=True)
class _Snapshot:
    t_capture: float
    states: Dict[int, RobotState]


@dataclass(slots=True)
class PlanRecord:
    t: float
    result: PlanResult
    obstacles: Tuple[Obstacle, ...]
    v_max: float


@dataclass(slots=True)
class _RobotRuntime:
    spec: RobotSpec
    truth: RobotState
    cfg: SearchConfig = SearchConfig()
    cmd: VelocityCommand = VelocityCommand(0.0, 0.0, 0.0)
    cmd_log: CommandLog = field(default_factory=CommandLog)
    frame: Optional[_Snapshot] = None
    plan: Optional[PlanResult] = None
    plan_t0: float = 0.0
    next_plan_t: float = 0.0
    completed_at: Optional[float] = None
    min_clearance: float = math.inf
    max_est_err: float = 0.0
    fouls: Dict[str, int] = field(
        default_factory=lambda: {k: 0 for k in FOUL_NAMES})
    plan_records: List[PlanRecord] = field(default_factory=list)


@dataclass(slots=True)
class RobotReport:
    id: int
    completed_s: Optional[float]
    final_distance_m: float
    min_clearance_m: float
    max_estimator_error_m: float
    fouls: Dict[str, int]


@dataclass(slots=True)
class SimReport:
    scenario: str
    seed: int
    duration_s: float
    dt_s: float
    ticks: int
    robots: List[RobotReport]
    fouls_total: int
    foul_events: List[FoulEvent]
    planner_ms: List[float]  # wall-clock samples; excluded from reports
    trace_rows: List[str]
    plans: Dict[int, List[PlanRecord]]


def _planner_obstacles(rt: _RobotRuntime, scenario: Scenario, t: float,
                       constraints: GameConstraints,
                       ) -> Tuple[Obstacle, ...]:
    margin = ROBOT_RADIUS + INFLATION_MARGIN
    obs: List[Obstacle] = []
    for ob in scenario.obstacles:
        if isinstance(ob, MovingDisc):
            # Scenario movers are authored at t=0; re-seat them at the
            # current sim time so the planner sees where they are now.
            gone = min(t, ob.horizon)
            ob = MovingDisc(ob.center + ob.velocity * gone, ob.radius,
                            ob.velocity if t < ob.horizon else Vec2(0.0, 0.0),
                            max(ob.horizon - t, 0.0))
        obs.append(inflate(ob, margin))
    if rt.frame is not None:
        age = t - rt.frame.t_capture
        for rid, st in rt.frame.states.items():
            if rid == rt.spec.id:
                continue
            center = st.position + st.velocity * age
            obs.append(inflate(
                MovingDisc(center, ROBOT_RADIUS, st.velocity, 1.0), margin))
    if scenario.defense_areas and constraints.defense_keepout_active:
        their = scenario.field.their_defense_area()
        obs.append(inflate(their, margin + DEFENSE_MARGIN))
        if not rt.spec.goalkeeper:
            obs.append(inflate(scenario.field.our_defense_area(), margin))
    if constraints.ball_keepout is not None:
        obs.append(inflate(
            KeepOutDisc(scenario.ball, constraints.ball_keepout, True),
            margin))
    return tuple(obs)


def _physical_clearance(rt: _RobotRuntime, states: Dict[int, RobotState],
                        scenario: Scenario, t: float) -> float:
    """Ground-truth clearance to tangible obstacles and other robots."""
    pos = rt.truth.position
    best = math.inf
    for ob in scenario.obstacles:
        if isinstance(ob, KeepOutDisc):
            continue  # rule zone, not a physical object
        d = distance_to_obstacle(pos, ob, t) - ROBOT_RADIUS
        if d < best:
            best = d
    for rid, st in states.items():
        if rid == rt.spec.id:
            continue
        d = pos.dist(st.position) - 2.0 * ROBOT_RADIUS
        if d < best:
            best = d
    return best


def _control(rt: _RobotRuntime, scenario: Scenario, t: float,
             leaf: GameStateLeaf, constraints: GameConstraints,
             gains: NavGains, record_plans: bool,
             planner_ms: Optional[List[float]]) -> None:
    """One robot's control stage: estimate, replan if due, command."""
    spec = rt.spec
    snap = rt.frame
    own = snap.states[spec.id]
    est = predict_current_state(
        VisionFrame(snap.t_capture, own.position, own.heading, own.velocity),
        rt.cmd_log, t)
    err = est.position.dist(rt.truth.position)
    if err > rt.max_est_err:
        rt.max_est_err = err

    if isinstance(leaf, Halt):
        rt.plan = None
        rt.next_plan_t = t
        rt.cmd = VelocityCommand(0.0, 0.0, 0.0)
        rt.cmd_log.record(t, 0.0, 0.0, 0.0)
        return

    if t >= rt.next_plan_t - 1e-9:
        target = scenario.field.clamp_target(spec.target)
        obstacles = _planner_obstacles(rt, scenario, t, constraints)
        # Replan from the committed reference while the estimate confirms
        # we are on it; the plant holds each command for a full control
        # period, so its sampled velocity sits half a period off the
        # profile and replanning from it would shave that off every
        # planning cycle. Any real divergence breaks the gate and the
        # estimate takes over.
        start = est
        if rt.plan is not None:
            ref_p, ref_v, _ = rt.plan.trajectory.sample(t - rt.plan_t0)
            if (ref_p.dist(est.position) < ANCHOR_POS
                    and ref_v.dist(est.velocity) < ANCHOR_VEL):
                start = RobotState(ref_p, ref_v, est.heading,
                                   est.angular_velocity)
        req = PlanRequest(start=start, target=target, limits=spec.limits,
                          obstacles=obstacles, previous=rt.plan,
                          constraints=constraints)
        t0 = time.perf_counter()
        rt.plan = plan(req, rt.cfg)
        if planner_ms is not None:
            planner_ms.append((time.perf_counter() - t0) * 1e3)
        rt.plan_t0 = t
        rt.next_plan_t += 1.0 / scenario.vision.rate_hz
        if rt.next_plan_t <= t:
            rt.next_plan_t = t + 1.0 / scenario.vision.rate_hz
        if record_plans:
            rt.plan_records.append(PlanRecord(
                t, rt.plan, obstacles,
                min(spec.limits.v_max, constraints.speed_cap)
                if constraints.speed_cap is not None else spec.limits.v_max))

    if rt.plan is None:
        cmd = VelocityCommand(0.0, 0.0, 0.0)
    else:
        cmd = follow_trajectory(est, rt.plan.trajectory, t - rt.plan_t0,
                                spec.limits, spec.target_heading, gains,
                                lookahead=0.5 * SIM_DT)
    cap = constraints.speed_cap
    if cap is not None:
        speed = math.hypot(cmd.vx, cmd.vy)
        if speed > cap > 0.0:
            k = cap / speed
            cmd = VelocityCommand(cmd.vx * k, cmd.vy * k, cmd.omega)
    rt.cmd = cmd
    rt.cmd_log.record(t, cmd.vx, cmd.vy, cmd.omega)


def run(scenario: Scenario, *, search: Optional[SearchConfig] = None,
        gains: NavGains = navigation.DEFAULT_GAINS,
        record_plans: bool = False, parallel: bool = False,
        collect_timing: bool = True) -> SimReport:
    """Simulate a scenario to completion and aggregate the report."""
    cfg = search if search is not None else SearchConfig(seed=scenario.seed)
    # Decorrelate the robots' candidate jitter; identical streams make
    # near-symmetric opponents pick the same dodge side.
    runtimes = [
        _RobotRuntime(spec=r, truth=r.start,
                      cfg=replace(cfg, seed=cfg.seed + r.id))
        for r in scenario.robots]
    ticks = int(round(scenario.duration_s / SIM_DT))
    detector = FoulDetector(scenario)
    foul_events: List[FoulEvent] = []
    planner_ms: Optional[List[float]] = [] if collect_timing else None
    trace_rows: List[str] = []

    leaf: GameStateLeaf = GameTactic(TacticMode.NORMAL)
    constraints = constraints_for(leaf)
    ref_idx = 0

    frame_period = 1.0 / scenario.vision.rate_hz
    next_capture = 0.0
    pending: List[Tuple[float, _Snapshot]] = []
    boot = _Snapshot(0.0, {rt.spec.id: rt.truth for rt in runtimes})
    for rt in runtimes:
        rt.frame = boot

    executor = ThreadPoolExecutor(max_workers=len(runtimes)) \
        if parallel and len(runtimes) > 1 else None
    try:
        for k in range(ticks):
            t = k * SIM_DT

            while (ref_idx < len(scenario.referee)
                   and scenario.referee[ref_idx].t <= t + 1e-9):
                leaf = parse(scenario.referee[ref_idx].input, previous=leaf)
                constraints = constraints_for(leaf)
                ref_idx += 1

            if t >= next_capture - 1e-9:
                snap = _Snapshot(t, {rt.spec.id: rt.truth
                                     for rt in runtimes})
                pending.append((t + scenario.vision.latency_s, snap))
                next_capture += frame_period
            while pending and pending[0][0] <= t + 1e-9:
                _, snap = pending.pop(0)
                for rt in runtimes:
                    rt.frame = snap

            states = {rt.spec.id: rt.truth for rt in runtimes}

            if executor is not None:
                list(executor.map(
                    lambda rt: _control(rt, scenario, t, leaf, constraints,
                                        gains, record_plans, planner_ms),
                    runtimes))
            else:
                for rt in runtimes:
                    _control(rt, scenario, t, leaf, constraints, gains,
                             record_plans, planner_ms)

            for ev in detector.step(t, states, leaf, constraints):
                foul_events.append(ev)
                for rt in runtimes:
                    if rt.spec.id == ev.robot:
                        rt.fouls[ev.kind] += 1

            for rt in runtimes:
                c = _physical_clearance(rt, states, scenario, t)
                if c < rt.min_clearance:
                    rt.min_clearance = c
                if rt.completed_at is None:
                    dist = rt.truth.position.dist(
                        scenario.field.clamp_target(rt.spec.target))
                    if (dist < COMPLETION_DIST
                            and rt.truth.velocity.norm() < COMPLETION_SPEED):
                        rt.completed_at = t
                s, cmd = rt.truth, rt.cmd
                trace_rows.append(
                    f"{t:.3f} {rt.spec.id} {s.position.x:.6f} "
                    f"{s.position.y:.6f} {s.heading:.6f} {s.velocity.x:.6f} "
                    f"{s.velocity.y:.6f} {s.angular_velocity:.6f} "
                    f"{cmd.vx:.6f} {cmd.vy:.6f} {cmd.omega:.6f} {leaf.tag()}")

            for rt in runtimes:
                rt.truth = plant_step(rt.truth, rt.cmd, rt.spec.limits,
                                      SIM_DT)
    finally:
        if executor is not None:
            executor.shutdown(wait=False)

    robots = []
    for rt in runtimes:
        final_dist = rt.truth.position.dist(
            scenario.field.clamp_target(rt.spec.target))
        robots.append(RobotReport(
            id=rt.spec.id,
            completed_s=rt.completed_at,
            final_distance_m=final_dist,
            min_clearance_m=rt.min_clearance,
            max_estimator_error_m=rt.max_est_err,
            fouls=dict(rt.fouls)))
    return SimReport(
        scenario=scenario.name,
        seed=scenario.seed,
        duration_s=scenario.duration_s,
        dt_s=SIM_DT,
        ticks=ticks,
        robots=robots,
        fouls_total=len(foul_events),
        foul_events=foul_events,
        planner_ms=planner_ms if planner_ms is not None else [],
        trace_rows=trace_rows,
        plans={rt.spec.id: rt.plan_records for rt in runtimes}
        if record_plans else {})


def _percentile(samples: List[float], q: float) -> float:
    if not samples:
        return 0.0
    ordered = sorted(samples)
    idx = q / 100.0 * (len(ordered) - 1)
    lo = int(math.floor(idx))
    hi = int(math.ceil(idx))
    if lo == hi:
        return ordered[lo]
    return ordered[lo] + (ordered[hi] - ordered[lo]) * (idx - lo)


def format_report(report: SimReport, include_timing: bool = False) -> str:
    """Structured text report; deterministic unless timing is included.

    Wall-clock planner stats vary run to run, so they are opt-in and are
    left out of the byte-for-byte determinism contract.
    """
    lines = [
        f"scenario {report.scenario}",
        f"seed {report.seed}",
        f"duration_s {report.duration_s:.6f}",
        f"dt_s {report.dt_s:.6f}",
        f"ticks {report.ticks}",
        f"robots {len(report.robots)}",
    ]
    completed = 0
    for r in report.robots:
        lines.append(f"robot {r.id}")
        if r.completed_s is not None:
            completed += 1
            lines.append(f"  completed_s {r.completed_s:.6f}")
        else:
            lines.append("  completed_s none")
        lines.append(f"  final_distance_m {r.final_distance_m:.6f}")
        if math.isfinite(r.min_clearance_m):
            lines.append(f"  min_clearance_m {r.min_clearance_m:.6f}")
        else:
            lines.append("  min_clearance_m none")
        lines.append(
            f"  max_estimator_error_m {r.max_estimator_error_m:.6f}")
        lines.append("  fouls " + " ".join(
            f"{name}={r.fouls[name]}" for name in FOUL_NAMES))
    lines.append(f"fouls_total {report.fouls_total}")
    lines.append(f"completed {completed}/{len(report.robots)}")
    if include_timing and report.planner_ms:
        lines.append(
            "planner_ms"
            f" median={_percentile(report.planner_ms, 50):.3f}"
            f" p95={_percentile(report.planner_ms, 95):.3f}"
            f" p99={_percentile(report.planner_ms, 99):.3f}"
            f" samples={len(report.planner_ms)}")
    return "\n".join(lines) + "\n"


def format_trace(report: SimReport) -> str:
    """One line per robot per tick, columnar, for external plotting."""
    header = ("# t id x y heading vx vy omega "
              "cmd_vx cmd_vy cmd_omega leaf")
    return "\n".join([header] + report.trace_rows) + "\n"
