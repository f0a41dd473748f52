import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from billiard_corr import _kernels as K
from billiard_corr.dynamics import (
    CollisionEvent,
    Disk,
    TableGeometry,
    TableState,
    Vec2,
    Wall,
    positions_at,
    reflect_off_wall,
    resolve_disk_collision,
    simulate,
    step_to_next_event,
    time_to_disk_contact,
    time_to_wall_contact,
)
from billiard_corr.exceptions import ConsistencyError, ContractError
from billiard_corr.rng import RandomStream
from billiard_corr.scenario import builtin_scenario, sample_initial_state

from conftest import make_state


def contact_pair(rng, speed=30.0):
    """Random touching, approaching pair of radius-20 disks."""
    while True:
        x2 = rng.uniform(100, 500, 2)
        a = rng.uniform(0, 2 * math.pi)
        x1 = x2 + 40.0 * np.array([math.cos(a), math.sin(a)])
        v1, v2 = rng.uniform(-speed, speed, (2, 2))
        if np.dot(v1 - v2, x1 - x2) < 0:
            return Disk(0, x1, v1, 20.0), Disk(1, x2, v2, 20.0)


# --- resolve_disk_collision ------------------------------------------------

def test_head_on_equal_speed_exchanges_velocities():
    v1, v2 = resolve_disk_collision(Disk(0, (100, 50), (5, 0), 20), Disk(1, (140, 50), (-5, 0), 20))
    assert v1 == (-5, 0) and v2 == (5, 0)


def test_central_hit_on_resting_ball():
    v1, v2 = resolve_disk_collision(Disk(0, (100, 50), (7, 0), 20), Disk(1, (140, 50), (0, 0), 20))
    assert v1 == (0, 0) and v2 == (7, 0)


def conservation_oracle(d1, d2, w1, w2):
    """Independent check: momentum, energy, tangential parts, separation."""
    x1, x2 = np.array(d1.center), np.array(d2.center)
    v1, v2 = np.array(d1.velocity), np.array(d2.velocity)
    w1, w2 = np.array(w1), np.array(w2)
    n = (x1 - x2) / np.linalg.norm(x1 - x2)
    t = np.array([-n[1], n[0]])
    scale = max(1.0, np.abs(np.concatenate([v1, v2])).max())
    assert np.allclose(w1 + w2, v1 + v2, rtol=0, atol=1e-12 * scale)
    e0 = v1 @ v1 + v2 @ v2
    assert abs((w1 @ w1 + w2 @ w2) - e0) <= 1e-12 * max(e0, 1.0)
    assert abs(w1 @ t - v1 @ t) <= 1e-12 * scale
    assert abs(w2 @ t - v2 @ t) <= 1e-12 * scale
    assert (w1 - w2) @ (x1 - x2) >= -1e-12 * scale


def test_collision_law_against_conservation_oracle():
    rng = np.random.default_rng(7)
    for _ in range(10_000):
        d1, d2 = contact_pair(rng)
        conservation_oracle(d1, d2, *resolve_disk_collision(d1, d2))


def test_collision_matches_vector_formula():
    rng = np.random.default_rng(8)
    for _ in range(200):
        d1, d2 = contact_pair(rng)
        x1, x2 = np.array(d1.center), np.array(d2.center)
        v1, v2 = np.array(d1.velocity), np.array(d2.velocity)
        d = x1 - x2
        e1 = v1 - (v1 - v2) @ d / (d @ d) * d
        e2 = v2 - (v2 - v1) @ (-d) / (d @ d) * (-d)
        w1, w2 = resolve_disk_collision(d1, d2)
        assert np.allclose(w1, e1, atol=1e-12) and np.allclose(w2, e2, atol=1e-12)


@settings(max_examples=300, deadline=None)
@given(st.floats(0, 2 * math.pi), st.lists(st.floats(-50, 50), min_size=4, max_size=4),
       st.floats(10, 40))
def test_collision_conserves_property(angle, vs, r):
    x2 = np.array([300.0, 150.0])
    x1 = x2 + 2 * r * np.array([math.cos(angle), math.sin(angle)])
    d1, d2 = Disk(0, x1, vs[:2], r), Disk(1, x2, vs[2:], r)
    if (d1.velocity - d2.velocity).dot(d1.center - d2.center) >= 0:
        return
    conservation_oracle(d1, d2, *resolve_disk_collision(d1, d2))


def test_collision_rejects_gap_and_receding():
    with pytest.raises(ContractError, match="0 and 1"):
        resolve_disk_collision(Disk(0, (100, 50), (5, 0), 20), Disk(1, (150, 50), (0, 0), 20))
    with pytest.raises(ContractError, match="not approaching"):
        resolve_disk_collision(Disk(0, (100, 50), (-5, 0), 20), Disk(1, (140, 50), (0, 0), 20))


# --- time_to_disk_contact --------------------------------------------------

def test_contact_time_head_on():
    d1 = Disk(0, (100, 100), (3, 0), 20)
    d2 = Disk(1, (200, 100), (-2, 0), 20)
    assert time_to_disk_contact(d1, d2) == pytest.approx(60 / 5, abs=1e-12)


def test_contact_time_none_for_equal_velocities():
    assert time_to_disk_contact(Disk(0, (100, 100), (3, 1), 20), Disk(1, (200, 100), (3, 1), 20)) is None


def test_contact_time_none_when_receding_or_missing():
    assert time_to_disk_contact(Disk(0, (100, 100), (-3, 0), 20), Disk(1, (200, 100), (0, 0), 20)) is None
    assert time_to_disk_contact(Disk(0, (100, 100), (3, 0), 20), Disk(1, (200, 150), (0, 0), 20)) is None


def _gap(d1, d2, t):
    dx = (d1.center.x - d2.center.x) + (d1.velocity.x - d2.velocity.x) * t
    dy = (d1.center.y - d2.center.y) + (d1.velocity.y - d2.velocity.y) * t
    return math.hypot(dx, dy) - d1.radius - d2.radius


def bracket_root(d1, d2, t_max=100.0, step=1e-3):
    """First zero of the gap function: dense scan, then bisection."""
    ts = np.arange(0.0, t_max + step, step)
    dx = (d1.center.x - d2.center.x) + (d1.velocity.x - d2.velocity.x) * ts
    dy = (d1.center.y - d2.center.y) + (d1.velocity.y - d2.velocity.y) * ts
    gaps = np.hypot(dx, dy) - d1.radius - d2.radius
    below = np.nonzero(gaps <= 0)[0]
    if below.size == 0:
        return None
    if below[0] == 0:
        return 0.0
    lo, hi = ts[below[0] - 1], ts[below[0]]
    while hi - lo > 1e-12:
        mid = 0.5 * (lo + hi)
        lo, hi = (lo, mid) if _gap(d1, d2, mid) <= 0 else (mid, hi)
    return hi


def _min_gap(d1, d2, t_max=100.0):
    ts = np.linspace(0.0, t_max, 10**6 + 1)
    dx = (d1.center.x - d2.center.x) + (d1.velocity.x - d2.velocity.x) * ts
    dy = (d1.center.y - d2.center.y) + (d1.velocity.y - d2.velocity.y) * ts
    return float(np.min(np.hypot(dx, dy) - d1.radius - d2.radius))


def test_contact_time_against_bisection_oracle():
    rng = np.random.default_rng(11)
    checked = 0
    while checked < 300:
        x1 = rng.uniform(0, 200, 2)
        x2 = rng.uniform(0, 200, 2)
        if np.linalg.norm(x1 - x2) < 40:
            continue
        d1 = Disk(0, x1, rng.uniform(-5, 5, 2), 20.0)
        d2 = Disk(1, x2, rng.uniform(-5, 5, 2), 20.0)
        tau = time_to_disk_contact(d1, d2)
        if tau is not None and tau > 100:
            continue
        oracle = bracket_root(d1, d2)
        if tau is None:
            # a grazing pass may dip below zero for less than the scan step
            assert oracle is None or _min_gap(d1, d2) > -1e-6
        else:
            assert oracle is not None
            assert tau == pytest.approx(oracle, abs=1e-6)
        checked += 1


# --- walls -----------------------------------------------------------------

def test_wall_time_example(table):
    assert time_to_wall_contact(Disk(0, (300, 150), (20, 0), 20), table) == (14.0, Wall.RIGHT)


def test_wall_time_stationary(table):
    assert time_to_wall_contact(Disk(0, (300, 150), (0, 0), 20), table) is None


def test_wall_time_diagonal_picks_earliest_axis(table):
    # x needs (580-300)/20 = 14, y needs (280-150)/20 = 6.5
    assert time_to_wall_contact(Disk(0, (300, 150), (20, 20), 20), table) == (6.5, Wall.TOP)
    assert time_to_wall_contact(Disk(0, (300, 150), (-20, -20), 20), table) == (6.5, Wall.BOTTOM)


def test_wall_time_corner_tie_uses_wall_order(table):
    assert time_to_wall_contact(Disk(0, (540, 240), (20, 20), 20), table) == (2.0, Wall.RIGHT)
    assert time_to_wall_contact(Disk(0, (60, 60), (-20, -20), 20), table) == (2.0, Wall.LEFT)


@pytest.mark.parametrize("v,wall,expected", [
    ((-3, 5), Wall.LEFT, (3, 5)),
    ((0, -7), Wall.BOTTOM, (0, 7)),
    ((4, 1), Wall.RIGHT, (-4, 1)),
    ((4, 1), Wall.TOP, (4, -1)),
])
def test_reflect_examples(v, wall, expected):
    assert reflect_off_wall(v, wall) == expected


@given(st.floats(-1e6, 1e6).filter(lambda f: f != 0), st.floats(-1e6, 1e6).filter(lambda f: f != 0),
       st.sampled_from(list(Wall)))
def test_reflect_preserves_speed_exactly(vx, vy, wall):
    w = reflect_off_wall((vx, vy), wall)
    assert w.x ** 2 + w.y ** 2 == vx ** 2 + vy ** 2
    assert abs(w.x) == abs(vx) and abs(w.y) == abs(vy)


def test_reflect_requires_normal_component():
    with pytest.raises(ContractError):
        reflect_off_wall((0, 3), Wall.LEFT)


# --- step_to_next_event ----------------------------------------------------

def test_step_two_disks_head_on(table):
    state = make_state((200, 150, 10, 0), (300, 150, -10, 0))
    tau = time_to_disk_contact(*state.disks)
    new, event = step_to_next_event(state, table, 100.0)
    assert event == CollisionEvent(tau, "disk-disk", 0, 1)
    assert new.time == tau and new.collision_count == 1
    moved = [Disk(d.id, d.center + (d.velocity.x * tau, d.velocity.y * tau), d.velocity, d.radius)
             for d in state.disks]
    v1, v2 = resolve_disk_collision(*moved)
    assert new.disks[0].velocity == v1 and new.disks[1].velocity == v2


def test_step_free_flight_to_horizon(table):
    state = make_state((300, 150, 3, -2))
    new, event = step_to_next_event(state, table, 5.0)
    assert event is None
    assert new.time == 5.0 and new.collision_count == 0
    assert new.disks[0].center == pytest.approx((315, 140), abs=1e-12)


def test_step_wall_event(table):
    new, event = step_to_next_event(make_state((300, 150, 20, 0)), table, 100.0)
    assert event.kind == "disk-wall" and event.wall is Wall.RIGHT and event.time == 14.0
    assert new.disks[0].velocity == (-20, 0)


def test_simultaneous_events_pair_before_wall(table):
    # disk 0 reaches the left wall and disks 1, 2 collide, both at t = 1
    state = make_state((30, 150, -10, 0), (200, 150, 10, 0), (260, 150, -10, 0))
    _, first = step_to_next_event(state, table, 10.0)
    assert first.kind == "disk-disk" and (first.i, first.j) == (1, 2)


def test_simultaneous_pairs_lowest_index_first(table):
    state = make_state((100, 150, 10, 0), (160, 150, -10, 0), (300, 150, 10, 0), (360, 150, -10, 0))
    s1, e1 = step_to_next_event(state, table, 10.0)
    s2, e2 = step_to_next_event(s1, table, 10.0)
    assert (e1.i, e1.j) == (0, 1) and (e2.i, e2.j) == (2, 3)
    assert e2.time == e1.time


def test_step_rejects_overlapping_result(table):
    # hand-built overlapping state: the scheduler must not hide it
    state = make_state((300, 150, 0, 0), (310, 150, 0, 0), (100, 150, -5, 0))
    with pytest.raises(ConsistencyError):
        step_to_next_event(state, table, 100.0)


def test_step_past_horizon_is_contract_error(table):
    with pytest.raises(ContractError):
        step_to_next_event(make_state((300, 150, 1, 0), time=5.0), table, 4.0)


def _event_log(state, geom, horizon):
    return [(s.time, e, tuple(s.disks)) for s, e in simulate(state, geom, horizon)]


def test_replay_is_bit_identical():
    cfg = builtin_scenario("basic")
    s0 = sample_initial_state(cfg, RandomStream(123, 4))
    a = _event_log(s0, cfg.geometry, 300.0)
    b = _event_log(sample_initial_state(cfg, RandomStream(123, 4)), cfg.geometry, 300.0)
    assert len(a) > 50
    assert a == b


# --- invariants along trajectories -----------------------------------------

def _energy(vel):
    return float(np.sum(vel * vel))


def test_invariants_over_ten_thousand_events():
    cfg = builtin_scenario("brownian")
    state = sample_initial_state(cfg, RandomStream(5, 0))
    geom = cfg.geometry
    pos, vel, radii = state.to_arrays()
    e0 = _energy(vel)
    t, events = 0.0, 0
    while events < 10_000:
        p_before = vel.sum(axis=0)
        e_before = _energy(vel)
        t_new, kind, i, j, status = K.step(pos, vel, radii, geom.width, geom.height, t, 1e9)
        assert status == K.STATUS_OK
        assert t_new >= t
        t = t_new
        events += 1
        assert abs(_energy(vel) - e_before) <= 1e-12 * e_before
        if kind == K.KIND_PAIR:
            assert np.allclose(vel.sum(axis=0), p_before, rtol=0, atol=1e-12)
        gaps = [np.hypot(*(pos[a] - pos[b])) - radii[a] - radii[b]
                for a in range(len(radii)) for b in range(a + 1, len(radii))]
        assert min(gaps) >= -1e-9
    assert abs(_energy(vel) - e0) <= 1e-9 * e0


def test_state_validate_flags_overlap(table):
    with pytest.raises(ContractError, match="0 and 1"):
        make_state((300, 150, 0, 0), (320, 150, 0, 0)).validate(table)
    with pytest.raises(ContractError, match="outside"):
        make_state((10, 150, 0, 0)).validate(table)


def test_vec_and_disk_reject_nonfinite():
    with pytest.raises(ContractError):
        Disk(0, (math.nan, 1), (0, 0), 1)
    with pytest.raises(ContractError):
        Disk(0, (1, 1), (0, 0), 0)
    with pytest.raises(ContractError):
        TableGeometry(0, 10)


def test_chaos_sensitivity():
    cfg = builtin_scenario("basic")
    base = sample_initial_state(cfg, RandomStream(0, 0))
    cue = base.disks[0]
    shifted = TableState(0.0, (Disk(0, (cue.center.x, cue.center.y + 1e-6), cue.velocity, cue.radius),)
                         + base.disks[1:])
    times = np.arange(0.0, 500.0, 0.5)
    a = positions_at(base, cfg.geometry, times)
    b = positions_at(shifted, cfg.geometry, times)
    sep = np.linalg.norm(a - b, axis=2).max(axis=1)
    assert sep[0] == pytest.approx(1e-6)
    assert sep.max() > 20.0


def test_positions_at_matches_free_flight(table):
    out = positions_at(make_state((300, 150, 2, 1)), table, [0.0, 1.0, 10.0])
    np.testing.assert_allclose(out[:, 0], [[300, 150], [302, 151], [320, 160]], atol=1e-12)
