"""Obstacle-aware trajectory selection.

The search scores a small, fixed family of candidates: the direct
trajectory, the previous tick's intermediate point (with jittered
neighbors once it goes stale), a constellation of via points ringed around
the robot, and a full-stop recovery that brakes straight to rest before
replanning. Score is total time plus a penalty proportional to how early
the trajectory collides; the lowest score wins, with ties broken by
evaluation order. A clean direct trajectory short-circuits everything.

Callers hand in obstacles already inflated by the robot radius plus margin
(point-robot checks thereafter) and targets already clamped to the field.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import _kernels as K
from .refparser import GameConstraints
from .trajectory import (SYNC_ITERATIONS, SYNC_TOLERANCE, Trajectory2D,
                         profile_from_table, table_from_profile)
from .worldmodel import (KeepOutDisc, MotionLimits, MovingDisc, Obstacle,
                         Rect, RobotState, StaticDisc, Vec2)

INFLATION_MARGIN = 0.02  # m, safety margin on top of the robot radius


@dataclass(frozen=True, slots=True)
class SearchConfig:
    constellation_radii: Tuple[float, ...] = (0.3, 0.7, 1.2, 2.0)  # m
    constellation_angles: int = 16
    warm_start_count: int = 8
    warm_start_jitter: float = 0.1  # m
    check_dt: float = 0.025  # s, collision sampling step
    collision_penalty: float = 5.0  # score per second of collision shortfall
    max_candidates: int = 128
    seed: int = 0

    def __post_init__(self):
        if self.check_dt <= 0.0:
            raise ValueError("check_dt must be > 0")
        if self.collision_penalty < 0.0:
            raise ValueError("collision_penalty must be >= 0")
        if self.max_candidates < 1:
            raise ValueError("max_candidates must be >= 1")


DEFAULT_SEARCH = SearchConfig()


@dataclass(frozen=True, slots=True)
class PlanResult:
    trajectory: Trajectory2D
    intermediate: Optional[Vec2]
    collision_time: Optional[float]  # s, None when collision-free
    total_time: float  # s
    score: float
    candidates_evaluated: int


@dataclass(frozen=True, slots=True)
class PlanRequest:
    start: RobotState
    target: Vec2
    limits: MotionLimits
    obstacles: Tuple[Obstacle, ...] = ()
    previous: Optional[PlanResult] = None
    constraints: Optional[GameConstraints] = None


def encode_obstacles(obstacles: Sequence[Obstacle]) -> np.ndarray:
    """Pack obstacles into the (n, 8) float table the kernels consume."""
    out = np.zeros((len(obstacles), 8))
    for i, ob in enumerate(obstacles):
        if isinstance(ob, StaticDisc):
            out[i, 0] = 0.0
            out[i, 1] = ob.center.x
            out[i, 2] = ob.center.y
            out[i, 3] = ob.radius
        elif isinstance(ob, MovingDisc):
            out[i, 0] = 1.0
            out[i, 1] = ob.center.x
            out[i, 2] = ob.center.y
            out[i, 3] = ob.radius
            out[i, 4] = ob.velocity.x
            out[i, 5] = ob.velocity.y
            out[i, 6] = ob.horizon
        elif isinstance(ob, Rect):
            out[i, 0] = 2.0
            out[i, 1] = ob.lo.x
            out[i, 2] = ob.lo.y
            out[i, 3] = ob.hi.x
            out[i, 4] = ob.hi.y
        elif isinstance(ob, KeepOutDisc):
            out[i, 0] = 3.0
            out[i, 1] = ob.center.x
            out[i, 2] = ob.center.y
            out[i, 3] = ob.radius
            out[i, 4] = 1.0 if ob.active else 0.0
        else:
            raise TypeError(f"unknown obstacle type {type(ob).__name__}")
    return out


def first_collision(traj: Trajectory2D, obstacles: Sequence[Obstacle],
                    check_dt: float = DEFAULT_SEARCH.check_dt,
                    ) -> Optional[Tuple[float, int]]:
    """Earliest sampled (time, obstacle index) in collision, or None.

    Samples t = 0, check_dt, 2*check_dt, ... plus the exact end time, and
    evaluates moving obstacles at the same trajectory time.
    """
    if check_dt <= 0.0:
        raise ValueError("check_dt must be > 0")
    obs = encode_obstacles(obstacles)
    tabx, nx = table_from_profile(traj.x)
    taby, ny = table_from_profile(traj.y)
    t, idx = K.first_hit(tabx, nx, traj.x.target, taby, ny, traj.y.target,
                         traj.total_time, obs, check_dt)
    if t == K.CLEAN:
        return None
    return t, int(idx)


# --- internals ---------------------------------------------------------------


@dataclass(slots=True)
class _Candidate:
    order: int  # tie-break rank, mirrors evaluation order
    score: float
    total: float
    t_col: float  # K.CLEAN when collision-free
    via: Optional[Tuple[float, float]]  # via point, None for direct/reset
    is_reset: bool = False


class _Search:
    """One plan() invocation; owns the scratch tables and the RNG."""

    def __init__(self, req: PlanRequest, cfg: SearchConfig):
        v_max = req.limits.v_max
        cap = req.constraints.speed_cap if req.constraints else None
        if cap is not None:
            if cap <= 0.0:
                raise ValueError(
                    "speed cap leaves no motion budget; halted robots "
                    "should not be planned for")
            v_max = min(v_max, cap)
        self.args = (req.start.position.x, req.start.position.y,
                     req.start.velocity.x, req.start.velocity.y,
                     req.target.x, req.target.y,
                     v_max, req.limits.a_max,
                     SYNC_TOLERANCE, SYNC_ITERATIONS)
        self.cfg = cfg
        self.obs = encode_obstacles(req.obstacles)
        self.tabx = np.empty((8, 4))
        self.taby = np.empty((8, 4))
        self.evaluated = 0

    def score_current(self) -> Tuple[float, float, float]:
        tx, ty = self.args[4], self.args[5]
        score, t_col, _ = K.score_tables(
            self.tabx, self.nx, self.taby, self.ny, self.total, tx, ty,
            self.obs, self.cfg.check_dt, self.cfg.collision_penalty)
        return score, self.total, t_col

    def eval_direct(self) -> Tuple[float, float, float]:
        self.nx, self.ny, self.total, self.alpha = K.build_direct(
            *self.args, self.tabx, self.taby)
        self.evaluated += 1
        return self.score_current()

    def eval_reset(self) -> Tuple[float, float, float]:
        self.nx, self.ny, self.total, self.alpha = K.build_reset(
            *self.args, self.tabx, self.taby)
        self.evaluated += 1
        return self.score_current()

    def eval_via_batch(self, pts: np.ndarray,
                       best: float = math.inf) -> np.ndarray:
        out = np.empty((pts.shape[0], 4))
        a = self.args
        K.eval_via_batch(a[0], a[1], a[2], a[3], a[4], a[5], a[6], a[7],
                         a[8], a[9], self.cfg.check_dt,
                         self.cfg.collision_penalty, best, pts, self.obs,
                         out)
        self.evaluated += pts.shape[0]
        return out

    def rebuild(self, cand: _Candidate) -> Trajectory2D:
        """Reconstruct the chosen candidate's trajectory, same float path."""
        if cand.via is not None:
            a = self.args
            nx, ny, total, _, alpha = K.build_via(
                a[0], a[1], a[2], a[3], cand.via[0], cand.via[1], a[4], a[5],
                a[6], a[7], a[8], a[9], self.cfg.check_dt,
                self.tabx, self.taby)
        elif cand.is_reset:
            nx, ny, total, alpha = K.build_reset(*self.args,
                                                 self.tabx, self.taby)
        else:
            nx, ny, total, alpha = K.build_direct(*self.args,
                                                  self.tabx, self.taby)
        return Trajectory2D(
            profile_from_table(self.tabx, nx, self.args[4]),
            profile_from_table(self.taby, ny, self.args[5]),
            alpha, total)

    def result(self, cand: _Candidate) -> PlanResult:
        traj = self.rebuild(cand)
        clean = cand.t_col == K.CLEAN
        return PlanResult(
            trajectory=traj,
            intermediate=(Vec2(cand.via[0], cand.via[1])
                          if cand.via is not None else None),
            collision_time=None if clean else cand.t_col,
            total_time=cand.total,
            score=cand.score,
            candidates_evaluated=self.evaluated)


def _constellation_points(center: Vec2, cfg: SearchConfig) -> List[Tuple[float, float]]:
    pts = []
    for r in cfg.constellation_radii:
        for k in range(cfg.constellation_angles):
            ang = 2.0 * math.pi * k / cfg.constellation_angles
            pts.append((center.x + r * math.cos(ang),
                        center.y + r * math.sin(ang)))
    return pts


def plan(req: PlanRequest, cfg: SearchConfig = DEFAULT_SEARCH) -> PlanResult:
    """Pick the lowest-scoring candidate trajectory to the target.

    Stages, in tie-break order: direct (returned outright when clean), the
    previous intermediate (reused while it stays collision-free, skipping
    the wider search), its jittered neighbors once stale, the constellation
    ring, and the full-stop reset. The same request, config and seed always
    produce the same result. If every candidate is already in collision at
    t = 0 the reset candidate is returned, flagged with its collision time,
    so the caller can keep commanding the safest available motion.
    """
    search = _Search(req, cfg)
    cands: List[_Candidate] = []

    score, total, t_col = search.eval_direct()
    if t_col == K.CLEAN:
        return search.result(_Candidate(0, score, total, t_col, None))
    cands.append(_Candidate(0, score, total, t_col, None))
    best_score = score

    # the previous intermediate always gets a full sweep: its cleanliness,
    # not just its score, decides whether the wide search runs at all
    prev_pt = req.previous.intermediate if req.previous is not None else None
    prev_clean = False
    if prev_pt is not None:
        out = search.eval_via_batch(np.array([[prev_pt.x, prev_pt.y]]))
        cands.append(_Candidate(1, out[0, 0], out[0, 1], out[0, 2],
                                (prev_pt.x, prev_pt.y)))
        best_score = min(best_score, out[0, 0])
        prev_clean = out[0, 2] == K.CLEAN
        if not prev_clean:
            rng = np.random.default_rng(cfg.seed)
            jit = np.empty((cfg.warm_start_count, 2))
            for i in range(cfg.warm_start_count):
                ang = rng.uniform(0.0, 2.0 * math.pi)
                rad = cfg.warm_start_jitter * math.sqrt(rng.uniform())
                jit[i, 0] = prev_pt.x + rad * math.cos(ang)
                jit[i, 1] = prev_pt.y + rad * math.sin(ang)
            out = search.eval_via_batch(jit, best_score)
            for i in range(cfg.warm_start_count):
                cands.append(_Candidate(2 + i, out[i, 0], out[i, 1],
                                        out[i, 2], (jit[i, 0], jit[i, 1])))
            best_score = min(best_score, out[:, 0].min())

    if not prev_clean:
        pts = _constellation_points(req.start.position, cfg)
        budget = cfg.max_candidates - search.evaluated - 1  # reset still due
        if budget < len(pts):
            pts = pts[:max(budget, 0)]
        if pts:
            arr = np.array(pts)
            out = search.eval_via_batch(arr, best_score)
            base = len(cands)
            for i in range(arr.shape[0]):
                cands.append(_Candidate(base + i, out[i, 0], out[i, 1],
                                        out[i, 2], pts[i]))

    score, total, t_col = search.eval_reset()
    reset_cand = _Candidate(10_000, score, total, t_col, None, is_reset=True)
    cands.append(reset_cand)

    # a hit on the very first sample means the start itself is inside an
    # obstacle, which no candidate can escape; skipped candidates shared
    # that same t = 0 sample, so the swept ones decide
    if all(c.t_col == 0.0 for c in cands if c.t_col != K.SKIPPED):
        return search.result(reset_cand)
    best = min(cands, key=lambda c: (c.score, c.order))
    return search.result(best)


def plan_via(req: PlanRequest, point: Vec2,
             cfg: SearchConfig = DEFAULT_SEARCH) -> PlanResult:
    """Score a single via candidate; same arithmetic as the search stages."""
    search = _Search(req, cfg)
    out = search.eval_via_batch(np.array([[point.x, point.y]]))
    cand = _Candidate(0, out[0, 0], out[0, 1], out[0, 2], (point.x, point.y))
    return search.result(cand)


def reset_candidate(req: PlanRequest,
                    cfg: SearchConfig = DEFAULT_SEARCH) -> PlanResult:
    """The full-stop recovery plan: brake to rest, then replan from rest."""
    search = _Search(req, cfg)
    score, total, t_col = search.eval_reset()
    return search.result(_Candidate(0, score, total, t_col, None,
                                    is_reset=True))
