"""Scheduler arithmetic and driving behavior, with brute-force oracles."""

from __future__ import annotations

import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from resamplelab.core import ConfigurationError, log_base
from resamplelab.schedulers import (
    GreedyAggregationScheduler,
    LandmarkScheduler,
    ProactiveScheduler,
    gta_budget,
    landmark_census,
    landmark_next,
    landmark_sequence,
    landmark_size_bound,
    landmark_window_unique,
    landmarks,
    make_scheduler,
    trailing_zeros,
)


def brute_landmark_next(t_prev, i):
    lo, hi = t_prev + 2 ** i, t_prev + 2 ** (i + 1)
    best, best_z = None, -1
    for t in range(lo, hi + 1):
        z = trailing_zeros(t)
        if z > best_z:
            best, best_z = t, z
    return best


def test_trailing_zeros_examples():
    assert trailing_zeros(8) == 3
    assert trailing_zeros(1) == 0
    assert trailing_zeros(12) == 2
    with pytest.raises(ConfigurationError):
        trailing_zeros(0)


def test_landmark_next_examples_match_brute_force():
    assert landmark_next(5, 1) == brute_landmark_next(5, 1) == 8
    assert landmark_next(6, 2) == brute_landmark_next(6, 2) == 12
    assert landmark_next(8, 3) == brute_landmark_next(8, 3) == 16


@given(st.integers(min_value=1, max_value=2 ** 14), st.integers(min_value=1, max_value=10))
@settings(max_examples=300, deadline=None)
def test_landmark_next_matches_brute_force(t_prev, i):
    assert landmark_next(t_prev, i) == brute_landmark_next(t_prev, i)


@given(st.integers(min_value=1, max_value=2 ** 12), st.integers(min_value=1, max_value=12))
@settings(max_examples=300, deadline=None)
def test_landmark_window_bounds_and_uniqueness(t_prev, i):
    nxt = landmark_next(t_prev, i)
    assert 2 ** i <= nxt - t_prev <= 2 ** (i + 1)
    assert landmark_window_unique(t_prev, i)


def test_landmark_sequence_examples():
    assert landmark_sequence(5, 64) == [8, 16, 32, 64]
    assert landmark_sequence(1, 2) == []


def test_landmark_sequence_length_bound():
    for horizon in (16, 64, 256, 1024):
        for t0 in range(1, horizon + 1):
            assert len(landmark_sequence(t0, horizon)) <= math.log2(horizon) + 1


def test_landmarks_base_cases():
    assert landmarks(1) == {1}
    assert landmarks(3) == {1, 2, 3}
    assert 5 not in landmarks(64)


def test_landmarks_census_agrees_with_direct_op():
    census = landmark_census(512)
    for T in (1, 2, 7, 33, 100, 256, 511, 512):
        direct = landmarks(T)
        assert len(direct) == int(census.sizes[T])
        assert all(census.contains(v, T) for v in direct)


def test_landmarks_size_bound_small_scale():
    for T in range(1, 600):
        assert len(landmarks(T)) <= landmark_size_bound(T)


def test_landmarks_contain_largest_power_of_two():
    for T in range(4, 600):
        p = 1 << (T.bit_length() - 1)
        assert p in landmarks(T)


# -- proactive ----------------------------------------------------------------


def test_proactive_schedule_and_truncation():
    s = ProactiveScheduler(horizon=20)
    s.on_adversarial_sample(1, 3)
    assert s.pending_for(1) == [4, 5, 7, 11, 19]
    s2 = ProactiveScheduler(horizon=10)
    s2.on_adversarial_sample(1, 10)
    assert s2.pending_for(1) == []


def test_proactive_reset_on_new_sample():
    s = ProactiveScheduler(horizon=20)
    s.on_adversarial_sample(1, 3)
    s.on_adversarial_sample(1, 4)
    assert s.pending_for(1) == [5, 6, 8, 12, 20]


def test_proactive_count_exact():
    horizon = 300
    for t0 in (1, 7, 100, 280):
        s = ProactiveScheduler(horizon)
        s.on_adversarial_sample(1, t0)
        fired = sum(1 for t in range(t0 + 1, horizon + 1) if s.collect(t, set()))
        assert fired == math.floor(math.log2(horizon - t0)) + 1


def test_proactive_no_reset_flag_keeps_schedule():
    s = ProactiveScheduler(horizon=40, no_reset_on_simultaneous=True)
    s.on_adversarial_sample(1, 3)
    # due at 7; a simultaneous forced sample leaves the 11, 19, 35 tail alone
    assert s.peek_due(7) == {1}
    s.on_adversarial_sample(1, 7, was_due=True)
    assert s.collect(7, {1}) == []
    assert s.pending_for(1) == [11, 19, 35]


def test_proactive_default_resets_even_when_due():
    s = ProactiveScheduler(horizon=40)
    s.on_adversarial_sample(1, 3)
    s.peek_due(7)
    s.on_adversarial_sample(1, 7, was_due=True)
    assert s.pending_for(1) == [8, 9, 11, 15, 23, 39]


# -- greedy temporal aggregation ----------------------------------------------


def test_gta_hand_simulation_example():
    g = GreedyAggregationScheduler([1, 2, 3, 4], alpha=2.0)
    g.on_adversarial_sample(1, 2)
    assert g.collect(2, {1}) == []
    assert g.group_sizes() == [1, 3]
    g.on_adversarial_sample(2, 3)
    events = g.collect(3, {2})
    assert sorted(set(events)) == [1, 2, 3, 4]
    assert g.groups[3] == {1, 2, 3, 4}


def test_gta_no_merge_outside_band():
    g = GreedyAggregationScheduler(list(range(13)), alpha=2.0)
    for u in range(4):
        g.on_adversarial_sample(u, 5)
    assert g.collect(5, set(range(4))) == []
    assert g.group_sizes() == [4, 9]


def test_gta_budget_formula():
    assert gta_budget(2, 1024, 0) == 0
    val = gta_budget(2, 1024, 100)
    assert val == pytest.approx(100 * (log_base(1024, 1.5) + 2 / math.log(1.5)))
    # alpha = 2 budget sits within one unit (per sample) of the plain form
    assert abs(gta_budget(2, 1024, 1) - (log_base(1024, 1.5) + 4)) <= 1


def test_gta_budget_and_group_count_on_traces():
    for seed in range(5):
        n, horizon = 64, 120
        rng = random.Random(seed)
        sched = GreedyAggregationScheduler(range(n), alpha=2.0)
        q = 0
        algo = 0
        for t in range(2, horizon + 1):
            objs = sorted({rng.randrange(n) for _ in range(rng.randrange(0, 4))})
            q += len(objs)
            for u in objs:
                sched.on_adversarial_sample(u, t)
            algo += len(sched.collect(t, set(objs)))
            assert sched.group_count() <= math.floor(math.log2(n)) + 1
        assert algo <= q * (log_base(n, 1.5) + 4)


def test_gta_coins_never_overdrawn():
    # The merge accounting takes one coin per algorithm sample; coins are
    # injected only by forced samples, so balances stay non-negative.
    rng = random.Random(3)
    n = 32
    sched = GreedyAggregationScheduler(range(n), alpha=2.0, track_coins=True)
    for t in range(2, 200):
        objs = sorted({rng.randrange(n) for _ in range(rng.randrange(0, 3))})
        for u in objs:
            sched.on_adversarial_sample(u, t)
        sched.collect(t, set(objs))
        assert all(c >= -1e-9 for c in sched.inst.coins.values())


def test_parameterized_gta_group_cap():
    for alpha in (1.5, 4.0, 8.0):
        n = 256
        rng = random.Random(11)
        sched = GreedyAggregationScheduler(range(n), alpha=alpha)
        cap = math.floor(log_base(n, alpha)) + 1
        q = 0
        algo = 0
        for t in range(2, 400):
            objs = sorted({rng.randrange(n) for _ in range(rng.randrange(0, 3))})
            q += len(objs)
            for u in objs:
                sched.on_adversarial_sample(u, t)
            algo += len(sched.collect(t, set(objs)))
            assert sched.group_count() <= cap
        assert algo <= gta_budget(alpha, n, q)


# -- landmark scheduler ---------------------------------------------------------


def test_landmark_fires_exactly_on_sequence():
    s = LandmarkScheduler(64)
    s.on_adversarial_sample(1, 5)
    fired = [t for t in range(6, 65) if s.collect(t, set())]
    assert fired == landmark_sequence(5, 64)


def test_two_objects_share_a_landmark():
    s = LandmarkScheduler(64)
    s.on_adversarial_sample(1, 5)
    s.on_adversarial_sample(2, 6)
    assert s.peek_due(8) == {1, 2}


def test_landmark_resample_count_bound():
    horizon = 2048
    s = LandmarkScheduler(horizon)
    s.on_adversarial_sample(1, 3)
    fired = sum(1 for t in range(4, horizon + 1) if s.collect(t, set()))
    assert fired <= math.log2(horizon) + 1


def test_landmark_origins_subset_of_landmarks():
    horizon = 200
    rng = random.Random(5)
    s = LandmarkScheduler(horizon)
    n = 12
    origin = {}
    sampled_once = set()
    for t in range(2, horizon + 1):
        forced = {rng.randrange(n)} if rng.random() < 0.25 else set()
        due = s.peek_due(t)
        for u in sorted(forced):
            s.on_adversarial_sample(u, t, was_due=u in due)
            origin[u] = t
            sampled_once.add(u)
        for u in s.collect(t, forced):
            origin[u] = t
    lm = landmarks(horizon)
    for u in sampled_once:
        assert origin[u] in lm


def test_make_scheduler_names():
    assert make_scheduler("none", [], 1).collect(1, set()) == []
    with pytest.raises(ConfigurationError):
        make_scheduler("bogus", [], 1)
