"""Framework tests: worlds, histories, determinism, load functions."""

from __future__ import annotations

import random
from itertools import product

import pytest

from resamplelab.core import (
    Adversary,
    ConfigurationError,
    LoadFunction,
    RandomSource,
    World,
    check_kway_splice_bound,
    check_splice_subadditivity,
    count_equal_load,
    derive_seed,
    evaluate_load,
    point_mass,
    uniform_over,
)
from resamplelab.schedulers import ProactiveScheduler, make_scheduler


class NullAdversary(Adversary):
    pass


class SampleAt(Adversary):
    """Samples a fixed object at a fixed round."""

    def __init__(self, obj, when):
        self.obj = obj
        self.when = when

    def pick_samples(self, history):
        return {self.obj} if len(history.rows) + 1 == self.when else set()


def binary_world(n, horizon, scheduler=None, seed=0):
    specs = {u: uniform_over(u, (0, 1)) for u in range(1, n + 1)}
    return World(specs, horizon, scheduler, seed=seed)


def test_initialization_stamps_origin_one():
    w = World({1: uniform_over(1, (0, 1))}, 1, seed=3)
    state = w.initialize()
    assert state.entries[1][1] == 1
    assert len(w.history) == 1


def test_proactive_schedule_after_adversarial_sample():
    sched = ProactiveScheduler(horizon=40)
    w = binary_world(4, 40, sched, seed=9)
    w.initialize()
    adv = SampleAt(3, 5)
    for t in range(2, 6):
        w.run_round(adv, t)
    assert w.state.entries[3][1] == 5
    assert sched.pending_for(3) == [6, 7, 9, 13, 21, 37]


def test_replay_reproduces_history_byte_for_byte():
    class Randomized(Adversary):
        def __init__(self, rng):
            self.rng = rng

        def next_distributions(self, history):
            if self.rng.random() < 0.3:
                return {1: uniform_over(1, (0, 1, 2))}
            return {}

        def pick_samples(self, history):
            return {self.rng.randrange(1, 4)} if self.rng.random() < 0.8 else set()

    def run(seed):
        specs = {u: uniform_over(u, (0, 1, 2)) for u in (1, 2, 3)}
        w = World(specs, 12, make_scheduler("proactive", [1, 2, 3], 12), seed=seed)
        adv = Randomized(w.adversary_stream())
        w.initialize()
        for t in range(2, 13):
            w.run_round(adv, t)
        return w.history.serialize()

    assert run(17) == run(17)
    assert run(17) != run(18)


def test_rounds_must_advance_by_one():
    w = binary_world(1, 5, seed=0)
    w.initialize()
    with pytest.raises(ConfigurationError):
        w.run_round(NullAdversary(), 3)


def test_unknown_object_rejected():
    w = binary_world(2, 5, seed=0)
    w.initialize()

    class Bad(Adversary):
        def next_distributions(self, history):
            return {9: uniform_over(9, (0, 1))}

    with pytest.raises(ConfigurationError):
        w.run_round(Bad(), 2)


def test_static_sample_point_masses():
    w = World({u: point_mass(u, "v") for u in (1, 2, 3)}, 2, seed=0)
    w.initialize()
    assert w.static_sample(random.Random(0)) == ["v", "v", "v"]


def test_static_sample_product_frequencies():
    w = binary_world(2, 2, seed=1)
    w.initialize()
    rng = RandomSource(1, 2).rng
    hits = sum(1 for _ in range(100_000) if w.static_sample(rng) == [0, 0])
    assert abs(hits / 100_000 - 0.25) <= 0.01


def test_static_sample_does_not_touch_origins():
    w = binary_world(3, 2, seed=2)
    w.initialize()
    before = dict(w.state.entries)
    w.static_sample(random.Random(5))
    assert w.state.entries == before


def test_origin_equals_last_sampling_round():
    sched = ProactiveScheduler(horizon=30)
    w = binary_world(3, 30, sched, seed=4)
    w.initialize()
    adv = SampleAt(2, 4)
    last_sampled = {1: 1, 2: 1, 3: 1}
    for t in range(2, 31):
        w.run_round(adv, t)
        row = w.history.rows[-1]
        for u in row.sampled:
            last_sampled[u] = t
        assert {u: o for u, (_, o) in w.state.entries.items()} == last_sampled


def test_count_load_all_equal():
    f = count_equal_load("G")
    w = World({u: point_mass(u, "G") for u in range(1, 6)}, 1, seed=0)
    state = w.initialize()
    assert evaluate_load(f, state) == 5


def test_splice_of_two_vectors_bounded():
    f = count_equal_load(1)
    x = (1, 1, 0, 0)
    y = (0, 1, 1, 1)
    for picks in product((0, 1), repeat=4):
        z = tuple((x, y)[p][i] for i, p in enumerate(picks))
        assert f.evaluate(z) <= f.evaluate(x) + f.evaluate(y)


def test_kway_splice_exhaustive_binary():
    # Every splice of k=3 binary vectors of length 4 stays within k * max load.
    f = count_equal_load(1)
    rng = random.Random(0)
    for _ in range(20):
        vecs = [tuple(rng.randrange(2) for _ in range(4)) for _ in range(3)]
        check_kway_splice_bound(f, vecs)


def weighted_indicator_load(targets, weights) -> LoadFunction:
    def fn(vs):
        return sum(w for v, t, w in zip(vs, targets, weights) if v == t)

    return LoadFunction("weighted_indicator", fn)


def edge_count_load(edge) -> LoadFunction:
    return LoadFunction(
        f"edge_count({edge})", lambda vs: float(sum(1 for v in vs for e in v if e == edge))
    )


def test_registered_loads_splice_subadditive():
    rng = random.Random(1)
    targets = [rng.randrange(3) for _ in range(6)]
    weights = [rng.random() for _ in range(6)]
    cases = [
        (count_equal_load(2), lambda r: tuple(r.randrange(3) for _ in range(6))),
        (weighted_indicator_load(targets, weights),
         lambda r: tuple(r.randrange(3) for _ in range(6))),
        (edge_count_load((0, 1)),
         lambda r: tuple(
             tuple(sorted((r.randrange(4), 3))) for _ in range(6)
         )),
    ]
    for f, gen in cases:
        assert check_splice_subadditivity(f, gen, rng, trials=1000) is None


def test_random_source_streams_are_stable_and_distinct():
    a1 = RandomSource(7, 0).rng.random()
    a2 = RandomSource(7, 0).rng.random()
    b = RandomSource(7, 1).rng.random()
    assert a1 == a2
    assert a1 != b
    assert derive_seed(7, "trial", 0) == derive_seed(7, "trial", 0)
    assert derive_seed(7, "trial", 0) != derive_seed(7, "trial", 1)


def test_support_probabilities_validated():
    with pytest.raises(ConfigurationError):
        from resamplelab.core import DistributionSpec

        DistributionSpec(1, lambda rng: 0, support=((0, 0.5), (1, 0.6)))
