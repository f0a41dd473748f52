"""Compiled inner loops for the event-driven disk dynamics.

Every simulation path (the per-operation API in :mod:`billiard_corr.dynamics`
and the batch runner used by the ensemble) goes through the functions in this
module, so that a single set of floating-point operations defines a
trajectory.

State layout: ``pos`` and ``vel`` are ``(n, 2)`` float64 arrays, ``radii`` is
``(n,)``.  Walls are coded 0=left, 1=right, 2=bottom, 3=top.
"""

import math

import numpy as np
from numba import njit

CONTACT_TOL = 1e-9
TIME_TOL = 1e-9

KIND_NONE = 0
KIND_PAIR = 1
KIND_WALL = 2

STATUS_OK = 0
STATUS_OVERLAP = 1
STATUS_ESCAPE = 2
STATUS_MAX_EVENTS = 3
STATUS_NONFINITE = 4

WALL_LEFT = 0
WALL_RIGHT = 1
WALL_BOTTOM = 2
WALL_TOP = 3


@njit(cache=True, nogil=True)
def pair_time(x1, y1, vx1, vy1, x2, y2, vx2, vy2, sigma):
    """Time until two disks touch while approaching, ``inf`` if never.

    Returns 0.0 when the pair is already at (or marginally inside) contact
    and still approaching.
    """
    dx = x1 - x2
    dy = y1 - y2
    dvx = vx1 - vx2
    dvy = vy1 - vy2
    b = dx * dvx + dy * dvy
    if b >= 0.0:
        return math.inf
    a = dvx * dvx + dvy * dvy
    c = dx * dx + dy * dy - sigma * sigma
    disc = b * b - a * c
    if disc <= 0.0:
        return math.inf
    if c <= 0.0:
        return 0.0
    # small root of a*t^2 + 2*b*t + c without cancellation
    return c / (-b + math.sqrt(disc))


@njit(cache=True, nogil=True)
def wall_time(x, y, vx, vy, r, width, height):
    """Earliest wall contact as ``(tau, wall)``; ``(inf, -1)`` if stationary."""
    best = math.inf
    wall = -1
    if vx < 0.0:
        t = (x - r) / -vx
        if t < 0.0:
            t = 0.0
        best = t
        wall = WALL_LEFT
    elif vx > 0.0:
        t = (width - r - x) / vx
        if t < 0.0:
            t = 0.0
        best = t
        wall = WALL_RIGHT
    if vy < 0.0:
        t = (y - r) / -vy
        if t < 0.0:
            t = 0.0
        if t < best:
            best = t
            wall = WALL_BOTTOM
    elif vy > 0.0:
        t = (height - r - y) / vy
        if t < 0.0:
            t = 0.0
        if t < best:
            best = t
            wall = WALL_TOP
    return best, wall


@njit(cache=True, nogil=True)
def collide(x1, y1, vx1, vy1, x2, y2, vx2, vy2):
    """Post-collision velocities of two equal-mass disks."""
    dx = x1 - x2
    dy = y1 - y2
    k = ((vx1 - vx2) * dx + (vy1 - vy2) * dy) / (dx * dx + dy * dy)
    return vx1 - k * dx, vy1 - k * dy, vx2 + k * dx, vy2 + k * dy


@njit(cache=True, nogil=True)
def reflect(vx, vy, wall):
    if wall == WALL_LEFT or wall == WALL_RIGHT:
        return -vx, vy
    return vx, -vy


@njit(cache=True, nogil=True)
def next_event(pos, vel, radii, width, height):
    """Select the next event by the deterministic priority rules.

    Returns ``(tau, kind, i, j)`` where ``j`` is the partner disk for a pair
    event or the wall code for a wall event.  Among candidates within
    ``TIME_TOL`` of the earliest one, pairs beat walls, then lowest indices
    win, then wall order.
    """
    n = pos.shape[0]
    npairs = n * (n - 1) // 2
    ptimes = np.empty(npairs)
    wtimes = np.empty(n)
    wcodes = np.empty(n, dtype=np.int64)
    tmin = math.inf
    k = 0
    for i in range(n):
        for j in range(i + 1, n):
            t = pair_time(pos[i, 0], pos[i, 1], vel[i, 0], vel[i, 1],
                          pos[j, 0], pos[j, 1], vel[j, 0], vel[j, 1],
                          radii[i] + radii[j])
            ptimes[k] = t
            if t < tmin:
                tmin = t
            k += 1
    for i in range(n):
        t, w = wall_time(pos[i, 0], pos[i, 1], vel[i, 0], vel[i, 1],
                         radii[i], width, height)
        wtimes[i] = t
        wcodes[i] = w
        if t < tmin:
            tmin = t
    if tmin == math.inf:
        return math.inf, KIND_NONE, -1, -1
    cutoff = tmin + TIME_TOL
    k = 0
    for i in range(n):
        for j in range(i + 1, n):
            if ptimes[k] <= cutoff:
                return tmin, KIND_PAIR, i, j
            k += 1
    for i in range(n):
        if wtimes[i] <= cutoff:
            return tmin, KIND_WALL, i, wcodes[i]
    return math.inf, KIND_NONE, -1, -1


@njit(cache=True, nogil=True)
def check_state(pos, radii, width, height):
    """Status code for the overlap and containment invariants."""
    n = pos.shape[0]
    for i in range(n):
        r = radii[i]
        x = pos[i, 0]
        y = pos[i, 1]
        if not (math.isfinite(x) and math.isfinite(y)):
            return STATUS_NONFINITE
        if (x < r - CONTACT_TOL or x > width - r + CONTACT_TOL
                or y < r - CONTACT_TOL or y > height - r + CONTACT_TOL):
            return STATUS_ESCAPE
    for i in range(n):
        for j in range(i + 1, n):
            dx = pos[i, 0] - pos[j, 0]
            dy = pos[i, 1] - pos[j, 1]
            if math.sqrt(dx * dx + dy * dy) - radii[i] - radii[j] < -CONTACT_TOL:
                return STATUS_OVERLAP
    return STATUS_OK


@njit(cache=True, nogil=True)
def advance(pos, vel, dt):
    for i in range(pos.shape[0]):
        pos[i, 0] += vel[i, 0] * dt
        pos[i, 1] += vel[i, 1] * dt


@njit(cache=True, nogil=True)
def apply_event(pos, vel, kind, i, j):
    if kind == KIND_PAIR:
        v1x, v1y, v2x, v2y = collide(pos[i, 0], pos[i, 1], vel[i, 0], vel[i, 1],
                                     pos[j, 0], pos[j, 1], vel[j, 0], vel[j, 1])
        vel[i, 0] = v1x
        vel[i, 1] = v1y
        vel[j, 0] = v2x
        vel[j, 1] = v2y
    elif kind == KIND_WALL:
        vx, vy = reflect(vel[i, 0], vel[i, 1], j)
        vel[i, 0] = vx
        vel[i, 1] = vy


@njit(cache=True, nogil=True)
def step(pos, vel, radii, width, height, t, horizon):
    """Advance in place to the next event or to ``horizon``.

    Returns ``(t_new, kind, i, j, status)``.  ``kind`` is ``KIND_NONE`` when
    the horizon was reached first.
    """
    tau, kind, i, j = next_event(pos, vel, radii, width, height)
    if kind == KIND_NONE or t + tau > horizon:
        advance(pos, vel, horizon - t)
        return horizon, KIND_NONE, -1, -1, STATUS_OK
    advance(pos, vel, tau)
    apply_event(pos, vel, kind, i, j)
    status = check_state(pos, radii, width, height)
    return t + tau, kind, i, j, status


@njit(cache=True, nogil=True)
def segment_hits_rect(ax, ay, bx, by, xmin, ymin, xmax, ymax):
    """Closed segment vs closed axis-aligned rectangle (Liang-Barsky)."""
    t0 = 0.0
    t1 = 1.0
    dx = bx - ax
    dy = by - ay
    for side in range(4):
        if side == 0:
            p = -dx
            q = ax - xmin
        elif side == 1:
            p = dx
            q = xmax - ax
        elif side == 2:
            p = -dy
            q = ay - ymin
        else:
            p = dy
            q = ymax - ay
        if p == 0.0:
            if q < 0.0:
                return False
        else:
            r = q / p
            if p < 0.0:
                if r > t1:
                    return False
                if r > t0:
                    t0 = r
            else:
                if r < t0:
                    return False
                if r < t1:
                    t1 = r
    return True


@njit(cache=True, nogil=True)
def _latch_regions(flags, pos0, pos1, t0, t1, ev_disk, ev_rect, ev_window):
    span = t1 - t0
    for k in range(ev_disk.shape[0]):
        if flags[k]:
            continue
        lo = max(t0, ev_window[k, 0])
        hi = min(t1, ev_window[k, 1])
        if lo > hi:
            continue
        d = ev_disk[k]
        if span > 0.0:
            a = (lo - t0) / span
            b = (hi - t0) / span
        else:
            a = 0.0
            b = 0.0
        ax = pos0[d, 0] + (pos1[d, 0] - pos0[d, 0]) * a
        ay = pos0[d, 1] + (pos1[d, 1] - pos0[d, 1]) * a
        bx = pos0[d, 0] + (pos1[d, 0] - pos0[d, 0]) * b
        by = pos0[d, 1] + (pos1[d, 1] - pos0[d, 1]) * b
        if segment_hits_rect(ax, ay, bx, by, ev_rect[k, 0], ev_rect[k, 1],
                             ev_rect[k, 2], ev_rect[k, 3]):
            flags[k] = True


@njit(cache=True, nogil=True)
def run_one(pos, vel, radii, width, height, horizon, ev_disk, ev_rect,
            ev_window, flags, max_events):
    """Simulate one table from t=0 to ``horizon``, latching region flags.

    ``pos``/``vel`` are modified in place; ``ev_rect`` rows are
    ``(xmin, ymin, xmax, ymax)``.  Returns ``(collisions, status)``.
    """
    t = 0.0
    count = 0
    prev = pos.copy()
    while t < horizon:
        prev[:, :] = pos
        t_prev = t
        t, kind, i, j, status = step(pos, vel, radii, width, height, t, horizon)
        # the flight segment ends before the event changes velocities, so
        # the positions at t are valid segment endpoints either way
        _latch_regions(flags, prev, pos, t_prev, t, ev_disk, ev_rect, ev_window)
        if kind == KIND_NONE:
            break
        count += 1
        if status != STATUS_OK:
            return count, status
        if count >= max_events:
            return count, STATUS_MAX_EVENTS
    if horizon <= 0.0:
        _latch_regions(flags, pos, pos, 0.0, 0.0, ev_disk, ev_rect, ev_window)
    return count, STATUS_OK


@njit(cache=True, nogil=True)
def run_batch(pos, vel, radii, width, height, horizon, ev_disk, ev_rect,
              ev_window, max_events, flags, counts, status):
    """Run ``run_one`` over the leading axis of ``pos``/``vel``.

    Stops at the first failing trial so the caller can report it.
    """
    for m in range(pos.shape[0]):
        c, s = run_one(pos[m], vel[m], radii, width, height, horizon, ev_disk,
                       ev_rect, ev_window, flags[m], max_events)
        counts[m] = c
        status[m] = s
        if s != STATUS_OK:
            return m
    return -1
