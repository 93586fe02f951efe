"""General framework: objects, time, distributions, and the adversary loop.

A world holds ``n`` objects, indexed ``1..n``, each carrying a current value
drawn from a per-object distribution over a common universe.  Time advances in
discrete rounds.  Round 1 initializes every object.  In each later round the
adversary first installs new distributions and forces a set of objects to be
resampled; the resampling scheduler then resamples the objects it has due.
An object's *origin* is the last round in which it was sampled by either
side.  The *joint realization* is the vector of current values together with
their origins; the *static distribution* at a round is the product of the
per-object distributions currently installed.

All randomness flows through named streams derived from a single run seed, so
a (seed, config) pair fully determines the history.
"""

from __future__ import annotations

import hashlib
import math
import random
from dataclasses import dataclass
from itertools import product
from typing import Callable, Iterable, Optional

import numpy as np

PROB_TOL = 1e-12

# Stream labels. One run seed fans out into independent substreams; keeping
# adversary randomness separate from value draws is what makes the table-game
# translation reproduce live histories.
STREAM_VALUES = 0
STREAM_ADVERSARY = 1
STREAM_AUDIT = 2
STREAM_ATTACK = 3


class SimulationError(Exception):
    """Base for all simulation-rule failures."""


class ConfigurationError(SimulationError):
    """Bad wiring: unknown object ids, malformed specs, invalid parameters."""


class EmptySupportError(SimulationError):
    """A forced resample found nothing to draw from."""


class SettingRuleError(SimulationError):
    """A setting's own rules were violated mid-run (exit code 3 family)."""


def derive_seed(seed: int, *labels) -> int:
    """Derive a 64-bit child seed from a root seed and a label path.

    SHA-256 over the canonical label tuple; stable across platforms and
    Python versions, unlike ``hash()``.
    """
    payload = repr((int(seed), tuple(labels))).encode()
    return int.from_bytes(hashlib.sha256(payload).digest()[:8], "big")


class RandomSource:
    """Seeded random stream: (seed, stream_id) fully determines the output."""

    def __init__(self, seed: int, stream_id=0) -> None:
        self.seed = int(seed)
        self.stream_id = stream_id
        self.rng = random.Random(derive_seed(seed, stream_id))

    def numpy(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(derive_seed(self.seed, self.stream_id, "np")))

    def child(self, *labels) -> "RandomSource":
        return RandomSource(derive_seed(self.seed, self.stream_id, *labels), 0)


@dataclass
class DistributionSpec:
    """Per-object sampling procedure, optionally with an enumerable support.

    ``sample`` takes a ``random.Random`` and returns a value.  When
    ``support`` is given as (value, probability) pairs it must describe the
    same law; probabilities are validated to be non-negative and sum to 1.
    """

    obj: int
    sample: Callable[[random.Random], object]
    support: Optional[tuple] = None
    label: str = ""

    def __post_init__(self):
        if self.support is not None:
            self.support = tuple(self.support)
            total = 0.0
            for _, p in self.support:
                if p < 0:
                    raise ConfigurationError(f"negative probability in support of object {self.obj}")
                total += p
            if abs(total - 1.0) > PROB_TOL:
                raise ConfigurationError(
                    f"support of object {self.obj} sums to {total!r}, not 1"
                )


def point_mass(obj: int, value) -> DistributionSpec:
    return DistributionSpec(obj, lambda rng, v=value: v, support=((value, 1.0),), label=f"point({value!r})")


def uniform_over(obj: int, values) -> DistributionSpec:
    vals = tuple(values)
    if not vals:
        raise EmptySupportError(f"uniform distribution for object {obj} has empty support")
    p = 1.0 / len(vals)
    return DistributionSpec(
        obj,
        lambda rng, vs=vals: vs[rng.randrange(len(vs))],
        support=tuple((v, p) for v in vals),
        label=f"uniform({len(vals)})",
    )


def categorical(obj: int, pairs) -> DistributionSpec:
    pairs = tuple(pairs)
    values = tuple(v for v, _ in pairs)
    weights = tuple(p for _, p in pairs)

    def sample(rng: random.Random):
        return rng.choices(values, weights=weights, k=1)[0]

    return DistributionSpec(obj, sample, support=pairs, label=f"categorical({len(pairs)})")


@dataclass
class JointState:
    """Current value and origin round for every object."""

    entries: dict  # obj -> (value, origin)

    def values_vector(self) -> list:
        return [self.entries[u][0] for u in sorted(self.entries)]

    def origins(self) -> dict:
        return {u: t for u, (_, t) in self.entries.items()}

    def copy(self) -> "JointState":
        return JointState(dict(self.entries))


@dataclass(frozen=True)
class HistoryRow:
    time: int
    dist_changes: tuple  # object ids (or tagged setting events) whose law changed
    sampled: tuple  # object ids resampled this round, ascending, deduplicated
    values: tuple  # realized values for `sampled`, same order


class History:
    """Append-only per-round log; row k describes round k."""

    def __init__(self) -> None:
        self.rows: list[HistoryRow] = []

    def append(self, row: HistoryRow) -> None:
        expected = len(self.rows) + 1
        if row.time != expected:
            raise ConfigurationError(f"history row for t={row.time}, expected t={expected}")
        self.rows.append(row)

    def __len__(self) -> int:
        return len(self.rows)

    def serialize(self) -> str:
        return "\n".join(
            repr((r.time, r.dist_changes, r.sampled, r.values)) for r in self.rows
        )


class Adversary:
    """Pair of functions: next distributions and next forced-sample set.

    Both must be deterministic given the history and the adversary's own
    seeded stream.  ``next_distributions`` returns only the specs that change
    this round.
    """

    def next_distributions(self, history: History) -> dict:
        return {}

    def pick_samples(self, history: History) -> Iterable[int]:
        return ()


class NullScheduler:
    """Scheduler that never resamples anything ("none")."""

    def peek_due(self, t: int) -> set:
        return set()

    def on_adversarial_sample(self, obj: int, t: int, was_due: bool = False) -> None:
        pass

    def collect(self, t: int, already: set) -> list:
        return []


class World:
    """Single-threaded simulation world over objects 1..n.

    Independent trials must use distinct seeds and separate World instances;
    nothing here is shared between trials.
    """

    def __init__(self, specs: dict, horizon: int, scheduler=None, seed: int = 0) -> None:
        n = len(specs)
        if set(specs) != set(range(1, n + 1)):
            raise ConfigurationError("object ids must be exactly 1..n")
        self.n = n
        self.horizon = horizon
        self.specs = dict(specs)
        self.scheduler = scheduler if scheduler is not None else NullScheduler()
        self.seed = seed
        self._values_rng = RandomSource(seed, STREAM_VALUES).rng
        self.history = History()
        self.state = JointState({})
        self.t = 0
        self.adversary_samples = 0
        self.algorithm_samples = 0

    def adversary_stream(self) -> random.Random:
        return RandomSource(self.seed, STREAM_ADVERSARY).rng

    def initialize(self) -> JointState:
        """Round 1: draw every object from its initial distribution.

        The initial draw stamps origin 1 but does not engage the scheduler;
        scheduler bookkeeping starts with the first forced resample.
        """
        if self.t != 0:
            raise ConfigurationError("world already initialized")
        self.t = 1
        sampled, values = [], []
        for u in range(1, self.n + 1):
            v = self.specs[u].sample(self._values_rng)
            self.state.entries[u] = (v, 1)
            sampled.append(u)
            values.append(v)
        self.history.append(HistoryRow(1, tuple(range(1, self.n + 1)), tuple(sampled), tuple(values)))
        return self.state

    def install(self, changes: dict) -> None:
        for u, spec in changes.items():
            if u not in self.specs:
                raise ConfigurationError(f"distribution supplied for unknown object {u}")
            if spec.obj != u:
                raise ConfigurationError(f"spec for object {spec.obj} installed under id {u}")
            self.specs[u] = spec

    def _draw(self, u: int, t: int) -> object:
        v = self.specs[u].sample(self._values_rng)
        self.state.entries[u] = (v, t)
        return v

    def run_round(self, adversary: Adversary, t: int) -> JointState:
        """Advance one round: adversary acts, then the scheduler resamples."""
        if t != self.t + 1:
            raise ConfigurationError(f"rounds must advance by 1 (at t={self.t}, got {t})")
        self.t = t
        changes = adversary.next_distributions(self.history)
        self.install(changes)
        forced = sorted(set(adversary.pick_samples(self.history)))
        for u in forced:
            if u not in self.specs:
                raise ConfigurationError(f"adversary sampled unknown object {u}")

        due_before = self.scheduler.peek_due(t)
        sampled_ids, values = [], []
        for u in forced:
            self.scheduler.on_adversarial_sample(u, t, was_due=u in due_before)
            values.append(self._draw(u, t))
            sampled_ids.append(u)
            self.adversary_samples += 1

        for u in self.scheduler.collect(t, set(forced)):
            v = self._draw(u, t)
            self.algorithm_samples += 1
            if u not in sampled_ids:
                sampled_ids.append(u)
                values.append(v)
            else:
                values[sampled_ids.index(u)] = v

        order = sorted(range(len(sampled_ids)), key=lambda i: sampled_ids[i])
        self.history.append(
            HistoryRow(
                t,
                tuple(sorted(changes)),
                tuple(sampled_ids[i] for i in order),
                tuple(values[i] for i in order),
            )
        )
        return self.state

    def static_sample(self, rng: random.Random) -> list:
        """One fresh simultaneous draw of all objects; world state untouched."""
        return [self.specs[u].sample(rng) for u in range(1, self.n + 1)]


def run_round(world: World, adversary: Adversary, scheduler, t: int) -> JointState:
    """Functional form of :meth:`World.run_round` with an explicit scheduler."""
    if scheduler is not None and scheduler is not world.scheduler:
        world.scheduler = scheduler
    return world.run_round(adversary, t)


def static_sample(world: World, rng: random.Random) -> list:
    return world.static_sample(rng)


@dataclass(frozen=True)
class LoadFunction:
    """Non-negative function on value vectors, subadditive under splicing."""

    name: str
    fn: Callable[[tuple], float]

    def evaluate(self, values) -> float:
        out = self.fn(tuple(values))
        if out < 0:
            raise ConfigurationError(f"load function {self.name} returned {out}")
        return out


def evaluate_load(f: LoadFunction, state: JointState) -> float:
    return f.evaluate(state.values_vector())


def count_equal_load(target) -> LoadFunction:
    return LoadFunction(
        f"count_eq({target!r})", lambda vs, tv=target: float(sum(1 for v in vs if v == tv))
    )


def check_splice_subadditivity(f: LoadFunction, make_vector, rng: random.Random, trials: int = 1000):
    """Randomized search for a splice violating f(z) <= f(x) + f(y).

    ``make_vector`` draws one random value vector.  Returns the first
    counterexample triple or None.
    """
    for _ in range(trials):
        x = make_vector(rng)
        y = make_vector(rng)
        z = tuple(x[i] if rng.random() < 0.5 else y[i] for i in range(len(x)))
        if f.evaluate(z) > f.evaluate(x) + f.evaluate(y) + 1e-9:
            return (x, y, z)
    return None


def check_kway_splice_bound(f: LoadFunction, vectors) -> float:
    """Exhaustively verify every splice of `vectors` has load <= k * max load.

    Returns the largest splice load seen.  Intended for tiny n and k where
    len(vectors) ** n is enumerable.
    """
    vectors = [tuple(v) for v in vectors]
    n = len(vectors[0])
    k = len(vectors)
    cap = k * max(f.evaluate(v) for v in vectors)
    worst = 0.0
    for picks in product(range(k), repeat=n):
        z = tuple(vectors[j][i] for i, j in enumerate(picks))
        val = f.evaluate(z)
        worst = max(worst, val)
        if val > cap + 1e-9:
            raise AssertionError(f"splice {z} has load {val} > {cap}")
    return worst


def harmonic(n: int) -> float:
    return sum(1.0 / k for k in range(1, n + 1))


def log_base(x: float, base: float) -> float:
    return math.log(x) / math.log(base)
