"""Assignment settings: job-machine hypergraphs, balls and bins, participant groups.

Job-machine: jobs and machines form a bipartite hypergraph whose hyperedges
(routines) each contain exactly one job; a valid assignment picks one alive
routine per job.  The adversary deletes one machine per round; jobs whose
assigned routine died are forced resamples, and a resample picks a uniformly
random alive routine incident to the job.  Recourse accumulates the load of
each deleted machine.

Balls and bins: n balls over n bins.  Deleting a bin redistributes its balls
independently and uniformly over the remaining bins; recourse counts moves.

Participant groups: n participants over g groups, a beta fraction malicious.
A leave-rejoin resamples the participant's group under the configured join
rule (plain, k-cuckoo, or k-rotation).
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass

from .core import ConfigurationError, SettingRuleError
from .util import IndexedSet


class UnrecoverableJobError(SettingRuleError):
    """A job has no alive routine left; in-scope adversaries never cause this."""


# ---------------------------------------------------------------------------
# Job-machine hypergraph
# ---------------------------------------------------------------------------


class Hypergraph:
    """Bipartite job/machine hypergraph with machine deletion.

    Routines are (job, machines) pairs; a routine is alive iff all its
    machines are.  Machines die at most once and never revive, so per-job
    alive-routine sets only shrink.
    """

    def __init__(self, jobs, machines, routines) -> None:
        self.jobs = list(jobs)
        self.machine_alive: dict = {m: True for m in machines}
        if len(self.machine_alive) != len(list(machines)):
            raise ConfigurationError("duplicate machine ids")
        self.routines: list[tuple] = []  # (job, tuple of machines)
        self.job_routines: dict = {j: [] for j in self.jobs}
        self.machine_routines: dict = {m: [] for m in machines}
        for job, ms in routines:
            if job not in self.job_routines:
                raise ConfigurationError(f"routine references unknown job {job!r}")
            ms = tuple(ms)
            for m in ms:
                if m not in self.machine_alive:
                    raise ConfigurationError(f"routine references unknown machine {m!r}")
            idx = len(self.routines)
            self.routines.append((job, ms))
            self.job_routines[job].append(idx)
            for m in ms:
                self.machine_routines[m].append(idx)
        self._dead_machines_of: list[int] = [0] * len(self.routines)
        self.alive_routines: dict = {
            j: IndexedSet(self.job_routines[j]) for j in self.jobs
        }
        self.delta = max((len(r) for r in self.job_routines.values()), default=0)

    def routine_alive(self, idx: int) -> bool:
        return self._dead_machines_of[idx] == 0

    def alive_routine_count(self, j) -> int:
        return len(self.alive_routines[j])

    def kill_machine(self, x) -> list[int]:
        """Mark x dead; return indices of routines that died with it."""
        if not self.machine_alive.get(x, False):
            raise SettingRuleError(f"machine {x!r} is not alive")
        self.machine_alive[x] = False
        died = []
        for idx in self.machine_routines[x]:
            self._dead_machines_of[idx] += 1
            if self._dead_machines_of[idx] == 1:
                died.append(idx)
                job = self.routines[idx][0]
                self.alive_routines[job].discard(idx)
        return died


def hypergraph_from_json(doc) -> Hypergraph:
    """Build a hypergraph from {"jobs": [...], "machines": [...], "routines": [[job, [m...]], ...]}."""
    if isinstance(doc, str):
        doc = json.loads(doc)
    return Hypergraph(doc["jobs"], doc["machines"], [(j, ms) for j, ms in doc["routines"]])


def script_from_json(doc) -> list[tuple]:
    """Ordered adversary events, e.g. [["delete", "m3"], ["skip"]]."""
    if isinstance(doc, str):
        doc = json.loads(doc)
    return [tuple(ev) for ev in doc]


class JobMachineWorld:
    """Maintains a valid assignment under machine deletions and a scheduler."""

    def __init__(self, hypergraph: Hypergraph, scheduler, rng: random.Random) -> None:
        self.h = hypergraph
        self.scheduler = scheduler
        self.rng = rng
        self.assignment: dict = {}
        self.loads: dict = {}  # machine -> number of assigned routines containing it
        self.recourse = 0
        self.adversary_samples = 0
        self.algorithm_samples = 0
        self.machines_deleted = 0
        self.t = 1
        for j in sorted(self.h.jobs):
            self._assign(j, self._pick(j))

    def _pick(self, j) -> int:
        alive = self.h.alive_routines[j]
        if len(alive) == 0:
            raise UnrecoverableJobError(f"job {j!r} has no alive routine")
        return alive.choice(self.rng)

    def _assign(self, j, idx: int) -> None:
        old = self.assignment.get(j)
        if old is not None:
            for m in self.h.routines[old][1]:
                self.loads[m] -= 1
        self.assignment[j] = idx
        for m in self.h.routines[idx][1]:
            self.loads[m] = self.loads.get(m, 0) + 1

    def resample_job(self, j) -> int:
        """Assign j a uniformly random alive incident routine."""
        idx = self._pick(j)
        self._assign(j, idx)
        return idx

    def machine_load(self, x) -> int:
        return self.loads.get(x, 0)

    def target_load(self, x) -> float:
        """Expected load of x under a fresh simultaneous resample right now."""
        if not self.h.machine_alive.get(x, False):
            raise SettingRuleError(f"target_load of dead machine {x!r}")
        per_job: dict = {}
        for idx in self.h.machine_routines[x]:
            if self.h.routine_alive(idx):
                job = self.routines_job(idx)
                per_job[job] = per_job.get(job, 0) + 1
        total = 0.0
        for job, cnt in per_job.items():
            alive = self.h.alive_routine_count(job)
            if alive == 0:
                raise UnrecoverableJobError(f"job {job!r} has no alive routine")
            total += cnt / alive
        return total

    def routines_job(self, idx: int):
        return self.h.routines[idx][0]

    def delete_machine(self, x, t: int) -> list:
        """Delete machine x; forced-resample the jobs that were using it.

        Returns the forced job list.  Recourse grows by the load of x, the
        scheduler sees each forced job, and its own due samples follow.
        """
        self.t = t
        self.machines_deleted += 1
        due_before = self.scheduler.peek_due(t)
        load_before = self.machine_load(x)
        died = self.h.kill_machine(x)
        forced = sorted(
            self.h.routines[idx][0]
            for idx in died
            if self.assignment.get(self.h.routines[idx][0]) == idx
        )
        assert len(forced) == load_before
        self.recourse += len(forced)
        for j in forced:
            self.scheduler.on_adversarial_sample(j, t, was_due=j in due_before)
            self.resample_job(j)
            self.adversary_samples += 1
        self._run_scheduler(t, set(forced))
        return forced

    def skip_round(self, t: int) -> None:
        """Round with no structural action; scheduler dues still fire."""
        self.t = t
        self._run_scheduler(t, set())

    def _run_scheduler(self, t: int, already: set) -> None:
        for j in self.scheduler.collect(t, already):
            self.resample_job(j)
            self.algorithm_samples += 1

    def assignment_valid(self) -> bool:
        for j, idx in self.assignment.items():
            if not self.h.routine_alive(idx) or self.h.routines[idx][0] != j:
                return False
        return True


# ---------------------------------------------------------------------------
# Balls and bins
# ---------------------------------------------------------------------------


class BinsState:
    """n balls over bins; deleting a bin scatters its balls uniformly."""

    def __init__(self, n_balls: int, n_bins: int) -> None:
        if n_bins < 1:
            raise ConfigurationError("need at least one bin")
        self.alive = IndexedSet(range(n_bins))
        self.contents = [IndexedSet() for _ in range(n_bins)]
        self.bin_of = [0] * n_balls
        self.recourse_log: list[int] = []

    def seed_uniform(self, rng: random.Random) -> None:
        for ball in range(len(self.bin_of)):
            b = self.alive.choice(rng)
            self.bin_of[ball] = b
            self.contents[b].add(ball)

    def occupancy(self, b: int) -> int:
        return len(self.contents[b])

    def bins_delete(self, b: int, rng: random.Random) -> int:
        """Delete bin b; each of its balls moves to an independent uniform
        alive bin.  Returns the recourse (ball count moved)."""
        if b not in self.alive:
            raise SettingRuleError(f"bin {b} is not alive")
        if len(self.alive) < 2:
            raise SettingRuleError("refusing to delete the last bin")
        self.alive.discard(b)
        moved = self.contents[b].as_list()
        self.contents[b] = IndexedSet()
        for ball in moved:
            dest = self.alive.choice(rng)
            self.bin_of[ball] = dest
            self.contents[dest].add(ball)
        self.recourse_log.append(len(moved))
        return len(moved)

    def total_recourse(self) -> int:
        return sum(self.recourse_log)


def heaviest_bin(b: BinsState):
    """Alive bin with maximum occupancy; ties break to the lowest id."""
    if len(b.alive) < 2:
        raise SettingRuleError("need at least two alive bins")
    best, best_occ = None, -1
    for bin_id in sorted(b.alive):
        occ = b.occupancy(bin_id)
        if occ > best_occ:
            best, best_occ = bin_id, occ
    return best


# ---------------------------------------------------------------------------
# Participant-group assignment
# ---------------------------------------------------------------------------


@dataclass
class JoinRule:
    kind: str  # plain | cuckoo | rotation
    k: int = 1

    def __post_init__(self):
        if self.kind not in ("plain", "cuckoo", "rotation"):
            raise ConfigurationError(f"unknown join rule {self.kind!r}")
        if self.kind != "plain" and self.k < 1:
            raise ConfigurationError("k must be >= 1")


class GroupState:
    """Participants assigned to groups, with malicious flags and join rules."""

    def __init__(self, n: int, g: int, malicious_fraction: float, rule: JoinRule,
                 rng: random.Random) -> None:
        if g < 1 or n < 1:
            raise ConfigurationError("need n >= 1 participants and g >= 1 groups")
        self.n = n
        self.g = g
        self.rule = rule
        self.assignment = [0] * n
        self.members = [IndexedSet() for _ in range(g)]
        self.malicious = [p < int(malicious_fraction * n) for p in range(n)]
        self.malicious_count = [0] * g
        self.touched: set = set()  # groups whose composition changed since clear
        for p in range(n):
            grp = rng.randrange(g)
            self._place(p, grp)

    def _place(self, p: int, grp: int) -> None:
        old = self.assignment[p]
        if p in self.members[old]:
            self.members[old].discard(p)
            if self.malicious[p]:
                self.malicious_count[old] -= 1
            self.touched.add(old)
        self.assignment[p] = grp
        self.members[grp].add(p)
        if self.malicious[p]:
            self.malicious_count[grp] += 1
        self.touched.add(grp)

    def group_size(self, grp: int) -> int:
        return len(self.members[grp])

    def has_malicious_majority(self, grp: int) -> bool:
        size = self.group_size(grp)
        return size > 0 and self.malicious_count[grp] * 2 > size

    def group_size_bounds_ok(self) -> bool:
        # Guardrail metric only: sizes within [n/(1.5 g), 1.5 n/g].
        lo, hi = self.n / (1.5 * self.g), 1.5 * self.n / self.g
        return all(lo <= self.group_size(grp) <= hi for grp in range(self.g))

    def plain_join(self, p: int, rng: random.Random) -> set:
        self._place(p, rng.randrange(self.g))
        return {p}

    def cuckoo_join(self, p: int, k: int, rng: random.Random) -> set:
        """Place p uniformly, then kick k (or all other) members of that group
        to independent uniform groups."""
        grp = rng.randrange(self.g)
        self._place(p, grp)
        others = [q for q in self.members[grp].as_list() if q != p]
        kicked = rng.sample(others, min(k, len(others))) if others else []
        for q in kicked:
            self._place(q, rng.randrange(self.g))
        return {p, *kicked}

    def rotation_join(self, p: int, k: int, rng: random.Random) -> set:
        """Chain of k swaps: p takes a random participant's slot, that one
        takes the next victim's slot, and the last displaced participant is
        assigned a fresh uniform group.  Swap targets are drawn from the
        participants not yet involved in this chain."""
        affected = {p}
        current = p
        for _ in range(k):
            if len(affected) >= self.n:
                break
            while True:  # rejection sampling over the untouched participants
                victim = rng.randrange(self.n)
                if victim not in affected:
                    break
            self._place(current, self.assignment[victim])
            affected.add(victim)
            current = victim
        self._place(current, rng.randrange(self.g))
        return affected

    def resample(self, p: int, rng: random.Random) -> set:
        """Leave-rejoin of p under the configured rule (in-place, size stays n)."""
        if self.rule.kind == "plain":
            return self.plain_join(p, rng)
        if self.rule.kind == "cuckoo":
            return self.cuckoo_join(p, self.rule.k, rng)
        return self.rotation_join(p, self.rule.k, rng)


# ---------------------------------------------------------------------------
# Nested charging sum
# ---------------------------------------------------------------------------


def nested_charging_sum(chain) -> float:
    """Sum of |S_i| / |U_i| over a nested family U_1 >= U_2 >= ... with
    S_i subset of U_i and every element in at most two S_i."""
    chain = [(frozenset(u), frozenset(s)) for u, s in chain]
    counts: dict = {}
    prev = None
    total = 0.0
    for u, s in chain:
        if not u:
            raise ConfigurationError("empty U set in nested family")
        if prev is not None and not u.issubset(prev):
            raise ConfigurationError("family is not nested")
        if not s.issubset(u):
            raise ConfigurationError("S must be a subset of its U")
        for x in s:
            counts[x] = counts.get(x, 0) + 1
            if counts[x] > 2:
                raise ConfigurationError(f"element {x!r} appears in more than two S sets")
        total += len(s) / len(u)
        prev = u
    return total
