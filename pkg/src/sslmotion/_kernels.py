"""Compiled numeric core shared by the trajectory and planner modules.

Everything here works on plain floats and small float64 arrays so the whole
candidate search runs as one compiled call; the public modules wrap these in
value types. Set SSLM_NO_JIT=1 to run the same code uncompiled (slow, for
debugging).

Table convention: a 1D motion profile is a (n, 4) float64 table, one row per
constant-acceleration segment: (t_end, x0, v0, a). t_end is relative to the
profile start, x0/v0 are the state at the segment start. A profile always
ends at rest.

Obstacle encoding: (n, 8) float64 rows, kind in column 0:
  0 static disc:  (0, cx, cy, r, -, -, -, -)
  1 moving disc:  (1, cx, cy, r, vx, vy, horizon, -)
  2 rect:         (2, lo_x, lo_y, hi_x, hi_y, -, -, -)
  3 keep-out disc:(3, cx, cy, r, active, -, -, -)
"""

from __future__ import annotations

import math
import os

import numpy as np

if os.environ.get("SSLM_NO_JIT"):
    def njit(func=None, **kwargs):
        if func is not None:
            return func
        return lambda f: f
else:
    from numba import njit as _numba_njit

    def njit(func=None, **kwargs):
        if func is not None:
            return _numba_njit(cache=True)(func)
        return _numba_njit(cache=True, **kwargs)


CLEAN = -1.0  # collision-time value meaning "no collision found"
SKIPPED = -2.0  # collision-time value meaning "sweep skipped, candidate dead"


# --- 1D time-optimal profiles ----------------------------------------------


@njit
def solve_total_1d(d: float, v0: float, v_max: float, a_max: float) -> float:
    """Duration of the time-optimal 1D profile covering `d` ending at rest.

    Same branch structure as fill_profile_1d, without building segments.
    """
    if d == 0.0 and v0 == 0.0:
        return 0.0
    if v_max <= 0.0 or a_max <= 0.0:
        # zero-budget axis; callers only hit this when the axis has no work
        return 0.0
    s_stop = v0 * abs(v0) / (2.0 * a_max)
    if s_stop > d:
        d = -d
        v0 = -v0
    vp2 = a_max * d + 0.5 * v0 * v0
    vp = math.sqrt(vp2) if vp2 > 0.0 else 0.0
    if vp <= v_max:
        return (vp - v0) / a_max + vp / a_max
    a1 = a_max if v0 <= v_max else -a_max
    t1 = (v_max - v0) / a1
    d1 = (v_max * v_max - v0 * v0) / (2.0 * a1)
    d3 = v_max * v_max / (2.0 * a_max)
    t2 = (d - d1 - d3) / v_max
    if t2 < 0.0:
        t2 = 0.0
    return t1 + t2 + v_max / a_max


@njit
def fill_profile_1d(d: float, v0: float, v_max: float, a_max: float,
                    out: np.ndarray) -> int:
    """Fill `out` (>= 3 rows) with the time-optimal profile, x0 relative.

    Returns the segment count. The profile brakes first when the stopping
    point already overshoots the target (handled by the mirrored branch),
    then accelerates, cruises if v_max is reached, and decelerates to rest.
    """
    if d == 0.0 and v0 == 0.0:
        return 0
    if v_max <= 0.0 or a_max <= 0.0:
        return 0
    s_stop = v0 * abs(v0) / (2.0 * a_max)
    mirror = False
    if s_stop > d:
        mirror = True
        d = -d
        v0 = -v0
    vp2 = a_max * d + 0.5 * v0 * v0
    vp = math.sqrt(vp2) if vp2 > 0.0 else 0.0
    n = 0
    t = 0.0
    x = 0.0
    if vp <= v_max:
        t1 = (vp - v0) / a_max
        t2 = vp / a_max
        if t1 > 0.0:
            t += t1
            out[n, 0] = t
            out[n, 1] = x
            out[n, 2] = v0
            out[n, 3] = a_max
            x += v0 * t1 + 0.5 * a_max * t1 * t1
            n += 1
        if t2 > 0.0:
            t += t2
            out[n, 0] = t
            out[n, 1] = x
            out[n, 2] = vp
            out[n, 3] = -a_max
            n += 1
    else:
        a1 = a_max if v0 <= v_max else -a_max
        t1 = (v_max - v0) / a1
        d1 = (v_max * v_max - v0 * v0) / (2.0 * a1)
        t3 = v_max / a_max
        d3 = v_max * v_max / (2.0 * a_max)
        t2 = (d - d1 - d3) / v_max
        if t2 < 0.0:
            t2 = 0.0
        if t1 > 0.0:
            t += t1
            out[n, 0] = t
            out[n, 1] = x
            out[n, 2] = v0
            out[n, 3] = a1
            x += d1
            n += 1
        if t2 > 0.0:
            t += t2
            out[n, 0] = t
            out[n, 1] = x
            out[n, 2] = v_max
            out[n, 3] = 0.0
            x += t2 * v_max
            n += 1
        t += t3
        out[n, 0] = t
        out[n, 1] = x
        out[n, 2] = v_max
        out[n, 3] = -a_max
        n += 1
    if mirror:
        for i in range(n):
            out[i, 1] = -out[i, 1]
            out[i, 2] = -out[i, 2]
            out[i, 3] = -out[i, 3]
    return n


@njit
def sample_table(tab: np.ndarray, n: int, end_x: float, t: float):
    """Evaluate (x, v, a) of a profile table; past the end holds (end_x, 0, 0)."""
    if n == 0 or t >= tab[n - 1, 0]:
        return end_x, 0.0, 0.0
    if t < 0.0:
        t = 0.0
    i = 0
    t_start = 0.0
    while i < n - 1 and t >= tab[i, 0]:
        t_start = tab[i, 0]
        i += 1
    tau = t - t_start
    v0 = tab[i, 2]
    a = tab[i, 3]
    return tab[i, 1] + v0 * tau + 0.5 * a * tau * tau, v0 + a * tau, a


# --- 2D synchronization -----------------------------------------------------

SYNC_TOL = 1e-3  # s, acceptable |Tx - Ty| after synchronization
SYNC_ITERS = 40
_WORK_EPS = 1e-9  # below this displacement/velocity an axis has no work


@njit
def sync_alpha(dx: float, dy: float, vx0: float, vy0: float,
               v_max: float, a_max: float, tol: float, iters: int) -> float:
    """Axis split angle equalizing the two 1D durations.

    x gets (v_max cos a, a_max cos a), y the sin a share. Growing alpha
    starves x and feeds y, so Tx grows and Ty shrinks: bisect on Tx - Ty.
    Degenerate axes take the whole budget (alpha 0 or pi/2). Ties and
    budget exhaustion resolve toward the smallest alpha seen.
    """
    need_x = abs(dx) > _WORK_EPS or abs(vx0) > _WORK_EPS
    need_y = abs(dy) > _WORK_EPS or abs(vy0) > _WORK_EPS
    if not need_x and not need_y:
        return 0.25 * math.pi
    if not need_y:
        return 0.0
    if not need_x:
        return 0.5 * math.pi
    lo = 0.0
    hi = 0.5 * math.pi
    best = 0.25 * math.pi
    best_err = 1.0e300
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        c = math.cos(mid)
        s = math.sin(mid)
        tx = solve_total_1d(dx, vx0, v_max * c, a_max * c)
        ty = solve_total_1d(dy, vy0, v_max * s, a_max * s)
        err = abs(tx - ty)
        if err < best_err or (err == best_err and mid < best):
            best = mid
            best_err = err
        if err <= tol:
            return mid
        if tx > ty:
            hi = mid
        else:
            lo = mid
    return best


@njit
def build_direct(sx: float, sy: float, svx: float, svy: float,
                 tx: float, ty: float, v_max: float, a_max: float,
                 tol: float, iters: int,
                 tabx: np.ndarray, taby: np.ndarray):
    """Synchronized two-axis profile start -> target (at rest), absolute x0.

    Returns (nx, ny, total_time, alpha).
    """
    dx = tx - sx
    dy = ty - sy
    alpha = sync_alpha(dx, dy, svx, svy, v_max, a_max, tol, iters)
    c = math.cos(alpha)
    s = math.sin(alpha)
    nx = fill_profile_1d(dx, svx, v_max * c, a_max * c, tabx)
    ny = fill_profile_1d(dy, svy, v_max * s, a_max * s, taby)
    for i in range(nx):
        tabx[i, 1] += sx
    for i in range(ny):
        taby[i, 1] += sy
    totx = tabx[nx - 1, 0] if nx > 0 else 0.0
    toty = taby[ny - 1, 0] if ny > 0 else 0.0
    total = totx if totx > toty else toty
    return nx, ny, total, alpha


@njit
def build_via(sx: float, sy: float, svx: float, svy: float,
              px: float, py: float, tx: float, ty: float,
              v_max: float, a_max: float, tol: float, iters: int,
              check_dt: float, tabx: np.ndarray, taby: np.ndarray):
    """Two-leg profile start -> (via px,py) -> target, absolute x0.

    The first leg heads for the via point but is abandoned at the last
    check-grid time strictly before its end, so the hand-off keeps the
    sampled nonzero velocity; the second leg replans from that state to the
    target. Returns (nx, ny, total_time, t_switch, alpha2). tabx/taby need
    >= 7 rows.
    """
    l1x = np.empty((3, 4))
    l1y = np.empty((3, 4))
    n1x, n1y, t1, _ = build_direct(sx, sy, svx, svy, px, py,
                                   v_max, a_max, tol, iters, l1x, l1y)
    t_star = 0.0
    if t1 > check_dt:
        t_star = math.floor((t1 - 1e-12) / check_dt) * check_dt
    if t_star <= 0.0:
        nx, ny, total, alpha = build_direct(sx, sy, svx, svy, tx, ty,
                                            v_max, a_max, tol, iters,
                                            tabx, taby)
        return nx, ny, total, 0.0, alpha

    x_s, vx_s, _ = sample_table(l1x, n1x, px, t_star)
    y_s, vy_s, _ = sample_table(l1y, n1y, py, t_star)

    l2x = np.empty((3, 4))
    l2y = np.empty((3, 4))
    n2x, n2y, t2, alpha2 = build_direct(x_s, y_s, vx_s, vy_s, tx, ty,
                                        v_max, a_max, tol, iters, l2x, l2y)

    nx = _chain_axis(l1x, n1x, px, l2x, n2x, t_star, tabx)
    ny = _chain_axis(l1y, n1y, py, l2y, n2y, t_star, taby)
    return nx, ny, t_star + t2, t_star, alpha2


@njit
def _chain_axis(leg1: np.ndarray, n1: int, leg1_end_x: float,
                leg2: np.ndarray, n2: int, t_star: float,
                out: np.ndarray) -> int:
    """Clip leg1 at t_star, append leg2 shifted by t_star."""
    n = 0
    for i in range(n1):
        if (leg1[i - 1, 0] if i > 0 else 0.0) >= t_star:
            break
        t_end = leg1[i, 0]
        out[n, 0] = t_end if t_end < t_star else t_star
        out[n, 1] = leg1[i, 1]
        out[n, 2] = leg1[i, 2]
        out[n, 3] = leg1[i, 3]
        n += 1
    if n == 0 or out[n - 1, 0] < t_star:
        # axis finished before t_star: hold at its endpoint until the switch
        out[n, 0] = t_star
        out[n, 1] = leg1_end_x
        out[n, 2] = 0.0
        out[n, 3] = 0.0
        n += 1
    for i in range(n2):
        out[n, 0] = t_star + leg2[i, 0]
        out[n, 1] = leg2[i, 1]
        out[n, 2] = leg2[i, 2]
        out[n, 3] = leg2[i, 3]
        n += 1
    return n


@njit
def build_reset(sx: float, sy: float, svx: float, svy: float,
                tx: float, ty: float, v_max: float, a_max: float,
                tol: float, iters: int,
                tabx: np.ndarray, taby: np.ndarray):
    """Full-stop recovery: straight-line brake at a_max, then rest-to-rest.

    Returns (nx, ny, total_time, alpha). At rest this is exactly the direct
    plan. tabx/taby need >= 4 rows.
    """
    speed = math.hypot(svx, svy)
    if speed <= _WORK_EPS:
        return build_direct(sx, sy, svx, svy, tx, ty, v_max, a_max,
                            tol, iters, tabx, taby)
    t_b = speed / a_max
    bx = sx + 0.5 * svx * t_b
    by = sy + 0.5 * svy * t_b

    l2x = np.empty((3, 4))
    l2y = np.empty((3, 4))
    n2x, n2y, t2, alpha = build_direct(bx, by, 0.0, 0.0, tx, ty,
                                       v_max, a_max, tol, iters, l2x, l2y)
    tabx[0, 0] = t_b
    tabx[0, 1] = sx
    tabx[0, 2] = svx
    tabx[0, 3] = -svx / t_b
    taby[0, 0] = t_b
    taby[0, 1] = sy
    taby[0, 2] = svy
    taby[0, 3] = -svy / t_b
    for i in range(n2x):
        tabx[1 + i, 0] = t_b + l2x[i, 0]
        tabx[1 + i, 1] = l2x[i, 1]
        tabx[1 + i, 2] = l2x[i, 2]
        tabx[1 + i, 3] = l2x[i, 3]
    for i in range(n2y):
        taby[1 + i, 0] = t_b + l2y[i, 0]
        taby[1 + i, 1] = l2y[i, 1]
        taby[1 + i, 2] = l2y[i, 2]
        taby[1 + i, 3] = l2y[i, 3]
    return 1 + n2x, 1 + n2y, t_b + t2, alpha


# --- collision checking -----------------------------------------------------


@njit
def signed_distance(px: float, py: float, t: float,
                    obs: np.ndarray, i: int) -> float:
    """Signed clearance of point (px, py) to encoded obstacle row i at time t."""
    kind = obs[i, 0]
    if kind == 0.0:
        return math.hypot(px - obs[i, 1], py - obs[i, 2]) - obs[i, 3]
    if kind == 1.0:
        dt = t
        if dt < 0.0:
            dt = 0.0
        if dt > obs[i, 6]:
            dt = obs[i, 6]
        cx = obs[i, 1] + obs[i, 4] * dt
        cy = obs[i, 2] + obs[i, 5] * dt
        return math.hypot(px - cx, py - cy) - obs[i, 3]
    if kind == 2.0:
        dx = obs[i, 1] - px
        if px - obs[i, 3] > dx:
            dx = px - obs[i, 3]
        dy = obs[i, 2] - py
        if py - obs[i, 4] > dy:
            dy = py - obs[i, 4]
        if dx > 0.0 or dy > 0.0:
            if dx < 0.0:
                dx = 0.0
            if dy < 0.0:
                dy = 0.0
            return math.hypot(dx, dy)
        return dx if dx > dy else dy  # both <= 0: nearest-face distance
    if kind == 3.0:
        if obs[i, 4] == 0.0:
            return 1.0e18
        return math.hypot(px - obs[i, 1], py - obs[i, 2]) - obs[i, 3]
    return 1.0e18


@njit
def _axis_extent(tab: np.ndarray, n: int, end_x: float):
    """Position range [lo, hi] covered by one axis profile."""
    lo = end_x
    hi = end_x
    t_prev = 0.0
    for i in range(n):
        x0 = tab[i, 1]
        v0 = tab[i, 2]
        a = tab[i, 3]
        if x0 < lo:
            lo = x0
        if x0 > hi:
            hi = x0
        if a != 0.0:
            tau = -v0 / a
            if 0.0 < tau < tab[i, 0] - t_prev:
                xv = x0 + 0.5 * v0 * tau  # vertex of the parabola
                if xv < lo:
                    lo = xv
                if xv > hi:
                    hi = xv
        t_prev = tab[i, 0]
    return lo, hi


@njit
def _hit_at(px: float, py: float, t: float, obs: np.ndarray, i: int) -> bool:
    """Whether the point is strictly inside obstacle row i at time t.

    Agrees exactly with signed_distance(...) < 0, without the sqrt.
    """
    kind = obs[i, 0]
    if kind == 0.0:
        dx = px - obs[i, 1]
        dy = py - obs[i, 2]
        return dx * dx + dy * dy < obs[i, 3] * obs[i, 3]
    if kind == 1.0:
        dt = t
        if dt < 0.0:
            dt = 0.0
        if dt > obs[i, 6]:
            dt = obs[i, 6]
        dx = px - (obs[i, 1] + obs[i, 4] * dt)
        dy = py - (obs[i, 2] + obs[i, 5] * dt)
        return dx * dx + dy * dy < obs[i, 3] * obs[i, 3]
    if kind == 2.0:
        return (obs[i, 1] < px < obs[i, 3]) and (obs[i, 2] < py < obs[i, 4])
    if kind == 3.0:
        if obs[i, 4] == 0.0:
            return False
        dx = px - obs[i, 1]
        dy = py - obs[i, 2]
        return dx * dx + dy * dy < obs[i, 3] * obs[i, 3]
    return False


@njit
def _reachable(obs: np.ndarray, i: int, total: float,
               lox: float, hix: float, loy: float, hiy: float) -> bool:
    """Whether obstacle row i can touch the given position bbox within total."""
    kind = obs[i, 0]
    if kind == 0.0 or kind == 3.0:
        if kind == 3.0 and obs[i, 4] == 0.0:
            return False
        r = obs[i, 3]
        return (obs[i, 1] + r > lox and obs[i, 1] - r < hix
                and obs[i, 2] + r > loy and obs[i, 2] - r < hiy)
    if kind == 1.0:
        h = total if total < obs[i, 6] else obs[i, 6]
        r = obs[i, 3]
        mx = obs[i, 4] * h
        my = obs[i, 5] * h
        ox_lo = obs[i, 1] + (mx if mx < 0.0 else 0.0) - r
        ox_hi = obs[i, 1] + (mx if mx > 0.0 else 0.0) + r
        oy_lo = obs[i, 2] + (my if my < 0.0 else 0.0) - r
        oy_hi = obs[i, 2] + (my if my > 0.0 else 0.0) + r
        return ox_hi > lox and ox_lo < hix and oy_hi > loy and oy_lo < hiy
    if kind == 2.0:
        return (obs[i, 3] > lox and obs[i, 1] < hix
                and obs[i, 4] > loy and obs[i, 2] < hiy)
    return False


@njit
def first_hit(tabx: np.ndarray, nx: int, end_x: float,
              taby: np.ndarray, ny: int, end_y: float,
              total: float, obs: np.ndarray, check_dt: float):
    """Earliest sampled time with negative clearance.

    Samples t = 0, dt, 2dt, ... plus the exact end time. Returns
    (time, obstacle_index) or (CLEAN, -1). Obstacles that cannot touch the
    trajectory's position bounds are skipped wholesale.
    """
    n_obs = obs.shape[0]
    if n_obs == 0:
        return CLEAN, -1
    lox, hix = _axis_extent(tabx, nx, end_x)
    loy, hiy = _axis_extent(taby, ny, end_y)
    live = np.empty(n_obs, np.int64)
    m = 0
    for i in range(n_obs):
        if _reachable(obs, i, total, lox, hix, loy, hiy):
            live[m] = i
            m += 1
    if m == 0:
        return CLEAN, -1
    k = 0
    t = 0.0
    while True:
        x, _, _ = sample_table(tabx, nx, end_x, t)
        y, _, _ = sample_table(taby, ny, end_y, t)
        for j in range(m):
            if _hit_at(x, y, t, obs, live[j]):
                return t, live[j]
        if t >= total:
            return CLEAN, -1
        k += 1
        t = k * check_dt
        if t > total:
            t = total


@njit
def score_tables(tabx: np.ndarray, nx: int, taby: np.ndarray, ny: int,
                 total: float, end_x: float, end_y: float,
                 obs: np.ndarray, check_dt: float, penalty: float):
    """(score, collision_time, obstacle_index); time plus a shortfall penalty."""
    t_col, idx = first_hit(tabx, nx, end_x, taby, ny, end_y,
                           total, obs, check_dt)
    if t_col >= 0.0:
        return total + penalty * (total - t_col), t_col, idx
    return total, CLEAN, -1


@njit
def eval_via_batch(sx: float, sy: float, svx: float, svy: float,
                   tx: float, ty: float, v_max: float, a_max: float,
                   tol: float, iters: int, check_dt: float, penalty: float,
                   best0: float, pts: np.ndarray, obs: np.ndarray,
                   out: np.ndarray) -> None:
    """Score every via candidate in pts (m, 2) into out (m, 4).

    out rows: (score, total_time, collision_time, obstacle_index).
    Candidates whose bare duration already reaches the best score seen so
    far (best0, updated as the batch runs) cannot win regardless of what
    the sweep would find, so their sweep is skipped; they are reported with
    score = total and collision_time = SKIPPED. Pass best0 = inf to force a
    full sweep of every candidate.
    """
    tabx = np.empty((8, 4))
    taby = np.empty((8, 4))
    best = best0
    for j in range(pts.shape[0]):
        nx, ny, total, _, _ = build_via(sx, sy, svx, svy,
                                        pts[j, 0], pts[j, 1], tx, ty,
                                        v_max, a_max, tol, iters, check_dt,
                                        tabx, taby)
        if total >= best:
            out[j, 0] = total
            out[j, 1] = total
            out[j, 2] = SKIPPED
            out[j, 3] = -1.0
            continue
        score, t_col, idx = score_tables(tabx, nx, taby, ny, total, tx, ty,
                                         obs, check_dt, penalty)
        out[j, 0] = score
        out[j, 1] = total
        out[j, 2] = t_col
        out[j, 3] = idx
        if score < best:
            best = score
