"""Resampling schedulers and their arithmetic.

Four schedulers share one driving interface:

* ``none`` -- never resamples (``core.NullScheduler``);
* ``proactive`` -- after a forced sample at t, resample at t + 2^i;
* ``gta`` -- greedy temporal aggregation: keep objects grouped by origin
  round and merge any two groups whose sizes are within a factor alpha,
  resampling both (alpha = 2 recovers the plain greedy rule);
* ``landmark`` -- exponential back-off like proactive, but each resample
  time is shifted into the nearby time step with the most trailing zeros,
  so resamples from different objects collapse onto few shared landmarks.

The driving protocol, used by worlds and the setting loops:

    due = scheduler.peek_due(t)                # scheduled for this round
    scheduler.on_adversarial_sample(u, t, was_due=u in due)   # per forced u
    for u in scheduler.collect(t, already=forced): draw(u)    # algorithm side

``collect`` may repeat an object (aggregation cascades sample a group more
than once in a round); every returned entry is one sample event.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from .core import ConfigurationError, log_base


def trailing_zeros(m: int) -> int:
    """Number of trailing zero bits of m >= 1."""
    if m <= 0:
        raise ConfigurationError(f"trailing_zeros needs m >= 1, got {m}")
    return (m & -m).bit_length() - 1


def _best_in_window(a: int, b: int) -> int:
    # Largest power of two dividing some value in [a, b]; ties cannot happen
    # because the window is shorter than 2^(k+1) for the winning k.
    for k in range(b.bit_length(), -1, -1):
        m = ((a + (1 << k) - 1) >> k) << k
        if m <= b:
            return m
    raise AssertionError("unreachable: k=0 always fits")


def landmark_next(t_prev: int, i: int) -> int:
    """Next resample time after t_prev for back-off index i.

    Returns the unique t in [t_prev + 2^i, t_prev + 2^(i+1)] maximizing
    trailing_zeros(t); the smallest such t would win a tie, but the window
    length makes the maximizer unique.
    """
    if t_prev < 1:
        raise ConfigurationError(f"t_prev must be >= 1, got {t_prev}")
    if i < 1:
        raise ConfigurationError(f"index must be >= 1, got {i}")
    return _best_in_window(t_prev + (1 << i), t_prev + (1 << (i + 1)))


def landmark_window_unique(t_prev: int, i: int) -> bool:
    """True iff the trailing-zeros maximizer in the (t_prev, i) window is unique."""
    a = t_prev + (1 << i)
    b = t_prev + (1 << (i + 1))
    best = _best_in_window(a, b)
    k = trailing_zeros(best)
    count = (b >> k) - ((a + (1 << k) - 1) >> k) + 1
    return count == 1


def landmark_sequence(t0: int, horizon: int) -> list[int]:
    """Resample times scheduled for a sample at t0, truncated at the horizon."""
    if not 1 <= t0 <= horizon:
        raise ConfigurationError(f"need 1 <= t0 <= horizon, got t0={t0}, horizon={horizon}")
    out = []
    prev, i = t0, 1
    while True:
        nxt = landmark_next(prev, i)
        if nxt > horizon:
            return out
        out.append(nxt)
        prev, i = nxt, i + 1


def landmarks(T: int) -> set[int]:
    """All origins reachable at time T: for each first-sample time t0 <= T,
    the last scheduled resample <= T, or t0 itself when none fired yet."""
    if T < 1:
        raise ConfigurationError(f"T must be >= 1, got {T}")
    out = set()
    for t0 in range(1, T + 1):
        prev, i = t0, 1
        last = t0
        while True:
            nxt = landmark_next(prev, i)
            if nxt > T:
                break
            last, prev, i = nxt, nxt, i + 1
        out.add(last)
    return out


@dataclass
class LandmarkCensus:
    """Exhaustive landmark statistics for every T up to t_max."""

    t_max: int
    sizes: np.ndarray  # sizes[T] = |landmarks(T)|, index 0 unused
    windows_in_range: bool  # every step obeys t_i - t_{i-1} in [2^i, 2^(i+1)]
    all_windows_unique: bool  # maximizer unique for every (t_prev <= t_max, i)
    max_end: np.ndarray  # value v reachable as an origin for T in [v, max_end[v]]

    def bound_ok(self) -> bool:
        ts = np.arange(1, self.t_max + 1)
        cap = 8 * (np.floor(np.log2(ts)).astype(np.int64) + 4)
        return bool(np.all(self.sizes[1:] <= cap))

    def contains(self, value: int, T: int) -> bool:
        return value <= T <= int(self.max_end[value])

    def pow2_ok(self) -> bool:
        """The largest power of two <= T is a landmark of T, for all T >= 4."""
        k = 2
        while (1 << k) <= self.t_max:
            v = 1 << k
            upper = min((v << 1) - 1, self.t_max)
            if int(self.max_end[v]) < upper:
                return False
            k += 1
        return True


def _landmark_next_vec(prev: np.ndarray, i: int, kmax: int) -> np.ndarray:
    a = prev + (1 << i)
    b = prev + (1 << (i + 1))
    res = a.copy()
    for k in range(kmax + 1):
        step = np.int64(1) << k
        m = ((a + step - 1) >> k) << k
        ok = m <= b
        res[ok] = m[ok]
    return res


def landmark_census(t_max: int) -> LandmarkCensus:
    """Compute |landmarks(T)| for all T <= t_max plus window sanity flags.

    A value v is a possible origin at time T iff some chain passes through v
    and stays there until T; each chain occupies v on a contiguous interval
    starting at v, so per-value bookkeeping reduces to the latest interval
    end, and the census is one difference-array sweep.
    """
    kmax = int(t_max * 4).bit_length() + 1
    prev = np.arange(1, t_max + 1, dtype=np.int64)
    alive = np.ones(t_max, dtype=bool)
    windows_ok = True
    # Each chain occupies its current value v on a contiguous T-interval that
    # starts at v, so per value only the latest interval end matters.
    max_end = np.zeros(t_max + 2, dtype=np.int64)
    i = 1
    while alive.any():
        cur = prev[alive]
        nxt = _landmark_next_vec(cur, i, kmax)
        gap = nxt - cur
        if gap.min() < (1 << i) or gap.max() > (1 << (i + 1)):
            windows_ok = False
        done = nxt > t_max
        end_t = np.where(done, t_max, nxt - 1)
        np.maximum.at(max_end, cur, end_t)
        new_prev = prev[alive].copy()
        new_prev[~done] = nxt[~done]
        prev[alive] = new_prev
        keep = alive.copy()
        keep[alive] = ~done
        alive = keep
        i += 1

    delta = np.zeros(t_max + 2, dtype=np.int64)
    vals = np.arange(1, t_max + 1)
    covered = max_end[1 : t_max + 1] >= vals  # every value covers itself
    np.add.at(delta, vals[covered], 1)
    np.add.at(delta, max_end[1 : t_max + 1][covered] + 1, -1)
    sizes = np.zeros(t_max + 1, dtype=np.int64)
    sizes[1:] = np.cumsum(delta)[1 : t_max + 1]

    unique = True
    for i in range(1, kmax):
        if (1 << i) > 4 * t_max:
            break
        tp = np.arange(1, t_max + 1, dtype=np.int64)
        a = tp + (np.int64(1) << i)
        b = tp + (np.int64(1) << (i + 1))
        best = _landmark_next_vec(tp, i, kmax)
        k = np.zeros_like(best)
        bb = best.copy()
        while np.any(bb % 2 == 0):
            even = bb % 2 == 0
            k[even] += 1
            bb[even] >>= 1
        count = (b >> k) - ((a + (np.int64(1) << k) - 1) >> k) + 1
        if np.any(count != 1):
            unique = False
            break
    return LandmarkCensus(t_max, sizes, windows_ok, unique, max_end)


def landmark_size_bound(T: int) -> int:
    return 8 * (int(math.floor(math.log2(T))) + 4)


# ---------------------------------------------------------------------------
# Proactive resampling
# ---------------------------------------------------------------------------


class ProactiveScheduler:
    """Resample at t + 2^i for every i >= 0 after a forced sample at t.

    A new forced sample replaces the pending schedule, except in the
    simultaneity case when ``no_reset_on_simultaneous`` is set: an object
    that is both scheduler-due and forced in the same round is sampled once
    and keeps its remaining schedule (used by the replay attack experiment;
    the default resets).
    """

    def __init__(self, horizon: int, no_reset_on_simultaneous: bool = False) -> None:
        self.horizon = horizon
        self.no_reset = no_reset_on_simultaneous
        self._heap: list[tuple[int, int, int]] = []  # (due, obj, epoch)
        self._epoch: dict[int, int] = {}
        self._due_round = -1
        self._due_set: set[int] = set()

    def pending_for(self, obj: int) -> list[int]:
        e = self._epoch.get(obj)
        return sorted(d for d, o, ep in self._heap if o == obj and ep == e)

    def _schedule(self, obj: int, t: int) -> None:
        e = self._epoch[obj]
        i = 0
        while t + (1 << i) <= self.horizon:
            heapq.heappush(self._heap, (t + (1 << i), obj, e))
            i += 1

    def _gather(self, t: int) -> set[int]:
        if self._due_round == t:
            return self._due_set
        due: set[int] = set()
        while self._heap and self._heap[0][0] <= t:
            _, obj, epoch = heapq.heappop(self._heap)
            if self._epoch.get(obj) == epoch:
                due.add(obj)
        self._due_round = t
        self._due_set = due
        return due

    def peek_due(self, t: int) -> set[int]:
        return set(self._gather(t))

    def on_adversarial_sample(self, obj: int, t: int, was_due: bool = False) -> None:
        if self.no_reset and was_due:
            return  # schedule continues from the original forced sample
        self._epoch[obj] = self._epoch.get(obj, 0) + 1
        self._schedule(obj, t)

    def collect(self, t: int, already: set) -> list[int]:
        return sorted(self._gather(t) - set(already))


# ---------------------------------------------------------------------------
# Greedy temporal aggregation (plain alpha=2 and parameterized)
# ---------------------------------------------------------------------------


def gta_budget(alpha: float, n: int, q: int) -> float:
    """Hard cap on algorithm sample events for q forced samples.

    q * (log_{1+1/alpha}(n) + 2 / ln(1+1/alpha)); the merge analysis charges
    each forced sample this many coins and every algorithm sample spends one.
    """
    if alpha < 1:
        raise ConfigurationError(f"alpha must be >= 1, got {alpha}")
    if n < 2:
        raise ConfigurationError(f"n must be >= 2, got {n}")
    if q == 0:
        return 0.0
    ratio = 1.0 + 1.0 / alpha
    return q * (log_base(n, ratio) + 2.0 / math.log(ratio))


@dataclass
class GtaInstrumentation:
    """Test-only coin and potential bookkeeping for the merge analysis."""

    coins: dict = field(default_factory=dict)
    min_potential_delta: float = 0.0


class GreedyAggregationScheduler:
    """Keep origin-time groups; merge any two groups within a factor alpha.

    Merged groups are stamped with the current round (their members are
    resampled now).  Merge order when several pairs qualify: repeatedly take
    the smallest qualifying pair in (size, origin) order; the sample budget
    holds for any order, this one is just deterministic.
    """

    def __init__(self, objects, alpha: float = 2.0, start_time: int = 1,
                 track_coins: bool = False) -> None:
        if alpha < 1:
            raise ConfigurationError(f"alpha must be >= 1, got {alpha}")
        objects = list(objects)
        self.alpha = float(alpha)
        self.n = len(objects)
        self.groups: dict[int, set[int]] = {start_time: set(objects)}
        self.group_of: dict[int, int] = {u: start_time for u in objects}
        self.track_coins = track_coins
        self.inst = GtaInstrumentation(coins={u: 0.0 for u in objects}) if track_coins else None
        self._ratio = 1.0 + 1.0 / self.alpha

    def group_sizes(self) -> list[int]:
        return sorted(len(g) for g in self.groups.values() if g)

    def group_count(self) -> int:
        return sum(1 for g in self.groups.values() if g)

    def potential(self, u: int) -> float:
        if self.inst is None:
            raise ConfigurationError("potential requires track_coins=True")
        size = len(self.groups[self.group_of[u]])
        return log_base(size, self._ratio) + self.inst.coins[u]

    def peek_due(self, t: int) -> set[int]:
        return set()

    def on_adversarial_sample(self, obj: int, t: int, was_due: bool = False) -> None:
        old = self.group_of[obj]
        if self.track_coins:
            k = len(self.groups[old])
            share = 2.0 / (math.log(self._ratio) * k)
            for member in self.groups[old]:
                self.inst.coins[member] += share
            self.inst.coins[obj] += log_base(self.n, self._ratio) if self.n >= 2 else 0.0
        self.groups[old].discard(obj)
        if not self.groups[old]:
            del self.groups[old]
        self.groups.setdefault(t, set()).add(obj)
        self.group_of[obj] = t

    def _find_merge(self):
        live = sorted(
            ((len(g), t) for t, g in self.groups.items() if g),
        )
        for (s1, t1), (s2, t2) in zip(live, live[1:]):
            if s2 <= self.alpha * s1:
                return t1, t2
        return None

    def collect(self, t: int, already: set) -> list[int]:
        events: list[int] = []
        while True:
            pair = self._find_merge()
            if pair is None:
                break
            t1, t2 = pair
            members = sorted(self.groups.pop(t1) | self.groups.pop(t2))
            events.extend(members)
            if self.track_coins:
                for u in members:
                    self.inst.coins[u] -= 1.0
            target = self.groups.setdefault(t, set())
            target.update(members)
            for u in members:
                self.group_of[u] = t
        return events

    def stabilize(self, t: int) -> list[int]:
        """Alias for :meth:`collect` when driven outside a world loop."""
        return self.collect(t, set())


# ---------------------------------------------------------------------------
# Landmark resampling
# ---------------------------------------------------------------------------


class LandmarkScheduler:
    """Back-off resampling snapped onto shared trailing-zero landmarks."""

    def __init__(self, horizon: int) -> None:
        self.horizon = horizon
        self._heap: list[tuple[int, int, int]] = []  # (due, obj, epoch)
        self._epoch: dict[int, int] = {}
        self._index: dict[int, int] = {}  # resamples since last forced sample
        self._last: dict[int, int] = {}
        self._due_round = -1
        self._due_set: set[int] = set()

    def state_of(self, obj: int) -> tuple[int, int]:
        return self._last.get(obj, 0), self._index.get(obj, 0)

    def on_adversarial_sample(self, obj: int, t: int, was_due: bool = False) -> None:
        self._epoch[obj] = self._epoch.get(obj, 0) + 1
        self._index[obj] = 0
        self._last[obj] = t
        nd = landmark_next(t, 1)
        if nd <= self.horizon:
            heapq.heappush(self._heap, (nd, obj, self._epoch[obj]))

    def _gather(self, t: int) -> set[int]:
        if self._due_round == t:
            return self._due_set
        due: set[int] = set()
        while self._heap and self._heap[0][0] <= t:
            _, obj, epoch = heapq.heappop(self._heap)
            if self._epoch.get(obj) != epoch:
                continue
            due.add(obj)
            self._index[obj] += 1
            self._last[obj] = t
            nd = landmark_next(t, self._index[obj] + 1)
            if nd <= self.horizon:
                heapq.heappush(self._heap, (nd, obj, epoch))
        self._due_round = t
        self._due_set = due
        return due

    def peek_due(self, t: int) -> set[int]:
        return set(self._gather(t))

    def collect(self, t: int, already: set) -> list[int]:
        return sorted(self._gather(t) - set(already))


SCHEDULER_NAMES = ("none", "proactive", "gta", "landmark")


def make_scheduler(name: str, objects, horizon: int, alpha: float = 2.0,
                   no_reset_on_simultaneous: bool = False):
    """Build a scheduler by config name."""
    from .core import NullScheduler

    if name == "none":
        return NullScheduler()
    if name == "proactive":
        return ProactiveScheduler(horizon, no_reset_on_simultaneous=no_reset_on_simultaneous)
    if name == "gta":
        return GreedyAggregationScheduler(objects, alpha=alpha)
    if name == "landmark":
        return LandmarkScheduler(horizon)
    raise ConfigurationError(f"unknown scheduler {name!r}; expected one of {SCHEDULER_NAMES}")
