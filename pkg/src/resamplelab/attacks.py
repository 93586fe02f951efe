"""Adversary constructions: temporal selection, replay, gather, heaviest-bin.

Temporal selection schedules each object's one sample at the moment its bad
outcome is most likely, then erases the evidence, so the final joint
realization is far more loaded than any single fresh sample would be.  The
constructions here instantiate that template for random walks on a ternary
tree (direct, and replayed through proactive resampling) and for the
job-machine setting, plus the simpler group-setting attacks.

Every script is deterministic given its seed and acts one legal event per
round of its setting (job-machine: exactly one machine deletion per round;
tree attacks: edge deletions only).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .assignment import GroupState, Hypergraph, JobMachineWorld, heaviest_bin
from .core import ConfigurationError, RandomSource, SettingRuleError, STREAM_VALUES, derive_seed
from .graphs import DynGraph, WalkWorld, sample_walk
from .schedulers import make_scheduler

heaviest_bin_adversary = heaviest_bin


# ---------------------------------------------------------------------------
# Exact walk arithmetic on trees
# ---------------------------------------------------------------------------


def monotone_hit_probability(g: DynGraph, parent: dict, v, root, top) -> Fraction:
    """Probability that a walk from v climbs straight to the root and then
    crosses to `top`, in the current graph."""
    p = Fraction(1)
    u = v
    while u != root:
        p /= g.degree(u)
        u = parent[u]
    return p / g.degree(root)


def any_hit_static(g: DynGraph, parent: dict, root, top, sources) -> Fraction:
    """P(some source's walk monotone-hits) when all launch simultaneously."""
    miss = Fraction(1)
    for v in sources:
        miss *= 1 - monotone_hit_probability(g, parent, v, root, top)
    return 1 - miss


def is_monotone_hit(path, parent: dict, root, top) -> bool:
    """The walk's first steps follow the parent chain and then cross to top."""
    u = path[0]
    i = 0
    while u != root:
        i += 1
        if i >= len(path) or path[i] != parent[u]:
            return False
        u = path[i]
    return i + 1 < len(path) and path[i + 1] == top


# ---------------------------------------------------------------------------
# Five-vertex star: exact temporal-selection separation
# ---------------------------------------------------------------------------

STAR_TOP, STAR_CENTER, STAR_A, STAR_B, STAR_C = 0, 1, 2, 3, 4


def build_star() -> tuple[DynGraph, dict]:
    g = DynGraph()
    for leaf in (STAR_TOP, STAR_A, STAR_B, STAR_C):
        g.add_edge(STAR_CENTER, leaf)
    parent = {STAR_A: STAR_CENTER, STAR_B: STAR_CENTER, STAR_C: STAR_CENTER}
    return g, parent


def star_attack_exact() -> tuple[Fraction, Fraction]:
    """Exact hit probabilities on the 4-leaf star: simultaneous launches of
    a, b, c versus launch-observe-cut order.  Pure enumeration."""
    g, parent = build_star()
    sources = (STAR_A, STAR_B, STAR_C)
    static = any_hit_static(g, parent, STAR_CENTER, STAR_TOP, sources)

    g2, _ = build_star()
    miss = Fraction(1)
    for v in sources:
        p = monotone_hit_probability(g2, parent, v, STAR_CENTER, STAR_TOP)
        miss *= 1 - p
        g2.remove_edge(STAR_CENTER, v)  # applied on failure; all-fail path
    return static, 1 - miss


def star_attack_mc(trials: int, seed: int) -> tuple[float, float]:
    """Monte Carlo replay of both star strategies through the walk sampler."""
    rng = random.Random(derive_seed(seed, "star"))
    sources = (STAR_A, STAR_B, STAR_C)
    static_hits = 0
    g, parent = build_star()
    for _ in range(trials):
        if any(
            is_monotone_hit(sample_walk(g, v, 2, rng), parent, STAR_CENTER, STAR_TOP)
            for v in sources
        ):
            static_hits += 1
    adaptive_hits = 0
    for _ in range(trials):
        g2, _ = build_star()
        for v in sources:
            path = sample_walk(g2, v, 2, rng)
            if is_monotone_hit(path, parent, STAR_CENTER, STAR_TOP):
                adaptive_hits += 1
                break
            g2.remove_edge(STAR_CENTER, v)
        # one walk per vertex, launched at its own time; cuts between launches
    return static_hits / trials, adaptive_hits / trials


# ---------------------------------------------------------------------------
# Ternary-tree topology
# ---------------------------------------------------------------------------


@dataclass
class TernaryTree:
    """Complete ternary tree of depth h1 + h2; the root carries one extra
    edge to `top`, the congestion target."""

    h1: int
    h2: int
    parent: dict = field(default_factory=dict)
    children: dict = field(default_factory=dict)
    depth: dict = field(default_factory=dict)
    root: int = 0
    top: int = -1

    def __post_init__(self):
        h = self.h1 + self.h2
        self.depth[self.root] = 0
        self.children[self.root] = []
        frontier = [self.root]
        nxt = 1
        for d in range(1, h + 1):
            new_frontier = []
            for u in frontier:
                for _ in range(3):
                    v = nxt
                    nxt += 1
                    self.parent[v] = u
                    self.children[u].append(v)
                    self.children[v] = []
                    self.depth[v] = d
                new_frontier.extend(self.children[u])
            frontier = new_frontier
        self.n_tree = nxt

    def build_graph(self) -> DynGraph:
        g = DynGraph()
        g.add_edge(self.root, self.top)
        for v, u in self.parent.items():
            g.add_edge(v, u)
        return g

    def subtree_roots(self) -> list[int]:
        return [v for v, d in self.depth.items() if d == self.h1]

    def postorder(self, r: int) -> list[int]:
        out = []

        def rec(v):
            for c in self.children[v]:
                rec(c)
            out.append(v)

        rec(r)
        return out

    def leaves_of(self, r: int) -> list[int]:
        return [v for v in self.postorder(r) if not self.children[v]]

    def subtree_vertices(self, r: int) -> list[int]:
        return self.postorder(r)

    def ancestors_to(self, v: int, stop: int) -> list[int]:
        out = []
        while v != stop:
            out.append(v)
            v = self.parent[v]
        return out


def _cut_sequence_probability(tree: TernaryTree, g: DynGraph, launches,
                              cuts_after_failure) -> tuple[Fraction, list[Fraction]]:
    """Success probability of a launch-observe-cut schedule, exactly.

    ``launches`` lists vertices in firing order; ``cuts_after_failure(v)``
    yields the edges removed once v's walk failed.  All launch probabilities
    are evaluated on the all-fail path, whose graph states are deterministic,
    so P(no success) is the plain product of misses.
    """
    miss = Fraction(1)
    per_launch = []
    for v in launches:
        p = monotone_hit_probability(g, tree.parent, v, tree.root, tree.top)
        per_launch.append(p)
        miss *= 1 - p
        for (a, b) in cuts_after_failure(v):
            g.remove_edge(a, b)
    return 1 - miss, per_launch


def tree_attack_exact(h1: int, h2: int) -> dict:
    """Exact per-subtree probabilities for the direct attack: adaptive
    (recursive launch-and-cut over all subtree vertices) and static
    (simultaneous launches in the intact tree)."""
    tree = TernaryTree(h1, h2)
    r = tree.subtree_roots()[0]
    order = tree.postorder(r)
    g = tree.build_graph()
    static = any_hit_static(g, tree.parent, tree.root, tree.top, order)

    g2 = tree.build_graph()

    def cuts(v):
        if v == r:
            return []  # keep subtrees independent: the root spoke stays
        return [(v, tree.parent[v])]

    adaptive, _ = _cut_sequence_probability(tree, g2, order, cuts)
    return {"tree": tree, "subtree_root": r, "static": static, "adaptive": adaptive,
            "launch_order": order}


def build_tree_attack(h1: int, h2: int):
    """Direct temporal-selection attack on maintained walks: one walk per
    subtree vertex, each sampled once at its scheduled time; failed vertices
    are cut off bottom-up.  Returns (graph, script)."""
    if h1 < 1 or h2 < 1:
        raise ConfigurationError("h1 and h2 must be >= 1")
    if 3 ** (h1 + h2) > 100_000:
        raise ConfigurationError("tree too large for desk scale")
    tree = TernaryTree(h1, h2)
    return tree.build_graph(), TreeAttackScript(tree)


@dataclass
class TreeAttackScript:
    """Runs the direct attack in one-shot mode (walks sampled exactly once)."""

    tree: TernaryTree
    kind: str = "tree_direct"

    def run(self, seed: int) -> dict:
        tree = self.tree
        g = tree.build_graph()
        rng = RandomSource(seed, STREAM_VALUES).rng
        length = tree.h1 + tree.h2 + 1
        roots = tree.subtree_roots()
        orders = {r: tree.postorder(r) for r in roots}
        sources = [v for r in roots for v in orders[r]]
        world = WalkWorld(g, make_scheduler("none", sources, horizon=1), rng,
                          length=length, maintenance=False)
        world.init_walks([(v, 1) for v in sorted(sources)])

        success = {r: False for r in roots}
        pending_cuts: list = []
        t = 1
        max_launches = max(len(o) for o in orders.values())
        for i in range(max_launches):
            t += 1
            designated = []
            for r in roots:
                if not success[r] and i < len(orders[r]):
                    designated.append((orders[r][i], 1))
            world.step(t, deletions=pending_cuts, designated=designated)
            pending_cuts = []
            for label in designated:
                v = label[0]
                r = next(rr for rr in roots if v in orders[rr])
                path = world.walks[label].path
                if is_monotone_hit(path, tree.parent, tree.root, tree.top):
                    success[r] = True
                elif v != r:
                    pending_cuts.append((v, tree.parent[v]))
        if pending_cuts:
            t += 1
            world.step(t, deletions=pending_cuts)
        cong_e = world.congestion(tree.root, tree.top)
        return {
            "successes": sum(success.values()),
            "subtrees": len(roots),
            "congestion_e": cong_e,
        }


# ---------------------------------------------------------------------------
# Proactive replay of the tree attack
# ---------------------------------------------------------------------------


@dataclass
class ReplayPlan:
    tree: TernaryTree
    clique_size: int
    r_exp: int
    horizon: int
    leaves: dict  # subtree root -> leaf list in launch order
    cliques: dict  # leaf -> list of clique vertex ids
    keep_spoke: dict  # leaf -> the one clique vertex kept until the end
    b_path: list[int]
    trigger_round: dict  # leaf -> round of its forced early sample


def build_proactive_replay_attack(h1: int, h2: int, clique_size: int = 64):
    """Replay the tree attack through proactive resampling.

    Each leaf's walk is forced early and parks inside a private escape
    clique; after a quiet wait the exponential back-off resamples leaf i at
    exactly W + i, where the adversary has trimmed the tree to the state the
    direct attack would present.  One clique spoke per leaf survives so that
    post-failure trims never strand a forced resample on an isolated vertex.
    """
    if h1 < 1 or h2 < 1:
        raise ConfigurationError("h1 and h2 must be >= 1")
    if 3 ** (h1 + h2) > 100_000:
        raise ConfigurationError("tree too large for desk scale")
    if clique_size < 2:
        raise ConfigurationError("clique size must be >= 2")
    tree = TernaryTree(h1, h2)
    g = tree.build_graph()
    roots = tree.subtree_roots()
    leaves = {r: tree.leaves_of(r) for r in roots}
    per_subtree = len(leaves[roots[0]])

    next_id = tree.n_tree
    cliques: dict = {}
    keep_spoke: dict = {}
    for r in roots:
        for leaf in leaves[r]:
            members = list(range(next_id, next_id + clique_size))
            next_id += clique_size
            cliques[leaf] = members
            keep_spoke[leaf] = members[0]
            for i, a in enumerate(members):
                g.add_edge(leaf, a)
                for b in members[i + 1:]:
                    g.add_edge(a, b)

    # Triggers occupy rounds 2 .. 1+L; leaf i replays at (1+i) + 2^r. The
    # wait must outlast every pre-replay back-off sample and the horizon must
    # precede every post-replay one.
    r_exp = 1
    while (1 << (r_exp - 1)) <= per_subtree + 2:
        r_exp += 1
    horizon = (1 + per_subtree) + (1 << r_exp) + 2
    b_path = list(range(next_id, next_id + horizon + 1))
    for a, b in zip(b_path, b_path[1:]):
        g.add_edge(a, b)
    trigger_round = {}
    for r in roots:
        for i, leaf in enumerate(leaves[r], start=1):
            trigger_round[leaf] = 1 + i
    plan = ReplayPlan(tree, clique_size, r_exp, horizon, leaves, cliques,
                      keep_spoke, b_path, trigger_round)
    return g, ReplayAttackScript(plan)


def replay_static_baseline(h1: int, h2: int) -> Fraction:
    """Exact simultaneous-launch probability for one subtree's leaves in the
    comparison graph: intact tree plus the one surviving escape spoke per
    leaf (degree 2 at launch, exactly as at replay time)."""
    tree = TernaryTree(h1, h2)
    g = tree.build_graph()
    spare = tree.n_tree
    r = tree.subtree_roots()[0]
    leaves = tree.leaves_of(r)
    for leaf in leaves:
        g.add_edge(leaf, spare)
        spare += 1
    return any_hit_static(g, tree.parent, tree.root, tree.top, leaves)


def replay_adaptive_exact(h1: int, h2: int) -> Fraction:
    """Exact per-subtree success probability of the replayed schedule:
    leaf launches at degree 2, with failed leaves cut and exhausted internal
    vertices cut as if they had failed."""
    tree = TernaryTree(h1, h2)
    g = tree.build_graph()
    spare = tree.n_tree
    r = tree.subtree_roots()[0]
    leaves = tree.leaves_of(r)
    for leaf in leaves:
        g.add_edge(leaf, spare)
        spare += 1

    remaining = {v: len(tree.children[v]) for v in tree.subtree_vertices(r)}

    def cuts(leaf):
        out = [(leaf, tree.parent[leaf])]
        u = tree.parent[leaf]
        while True:
            remaining[u] -= 1
            if remaining[u] > 0 or u == r:
                break
            out.append((u, tree.parent[u]))
            u = tree.parent[u]
        return out

    adaptive, _ = _cut_sequence_probability(tree, g, leaves, cuts)
    return adaptive


@dataclass
class ReplayAttackScript:
    """Drives the replay attack round by round in maintenance mode."""

    plan: ReplayPlan
    kind: str = "tree_proactive_replay"

    _graph: DynGraph | None = None

    def _pristine_graph(self) -> DynGraph:
        # The clique gadgets make this graph expensive; build once and undo
        # each trial's deletions from the journal instead of rebuilding.
        if self._graph is None:
            g, _ = build_proactive_replay_attack(self.plan.tree.h1, self.plan.tree.h2,
                                                 self.plan.clique_size)
            self._graph = g
        return self._graph

    def run(self, seed: int) -> dict:
        plan = self.plan
        tree = plan.tree
        g = self._pristine_graph()
        g.journal = []
        try:
            return self._run_on(g, seed)
        finally:
            journal, g.journal = g.journal, None
            for u, v in reversed(journal):
                g.add_edge(u, v)

    def _run_on(self, g: DynGraph, seed: int) -> dict:
        plan = self.plan
        tree = plan.tree
        rng = RandomSource(seed, STREAM_VALUES).rng
        length = tree.h1 + tree.h2 + 1
        roots = tree.subtree_roots()
        all_leaves = [leaf for r in roots for leaf in plan.leaves[r]]
        scheduler = make_scheduler("proactive", all_leaves, horizon=plan.horizon,
                                   no_reset_on_simultaneous=True)
        world = WalkWorld(g, scheduler, rng, length=length, maintenance=True)
        world.init_walks([(v, 1) for v in sorted(all_leaves)])

        clique_ok = {leaf: set(plan.cliques[leaf]) | {leaf} for leaf in all_leaves}
        contained = 0
        early_samples = 0

        def track_containment(leaf):
            nonlocal contained, early_samples
            early_samples += 1
            if set(world.walks[(leaf, 1)].path) <= clique_ok[leaf]:
                contained += 1

        success = {r: False for r in roots}
        remaining = {}
        for r in roots:
            for v in tree.subtree_vertices(r):
                remaining[v] = len(tree.children[v])
        subtree_of = {leaf: r for r in roots for leaf in plan.leaves[r]}
        replay_round = {leaf: plan.trigger_round[leaf] + (1 << plan.r_exp)
                        for leaf in all_leaves}
        per_subtree = len(plan.leaves[roots[0]])
        pending_cuts: list = []
        b_cursor = 0

        for t in range(2, plan.horizon + 1):
            deletions = list(pending_cuts)
            pending_cuts = []
            designated = []
            trig = [leaf for leaf in all_leaves if plan.trigger_round[leaf] == t]
            for leaf in trig:
                designated.append((leaf, 1))
            firing = [leaf for leaf in all_leaves if replay_round[leaf] == t]
            for leaf in firing:
                if success[subtree_of[leaf]]:
                    continue  # latched; leave the clique alone
                for a in plan.cliques[leaf][1:]:
                    deletions.append((leaf, a))
            if not deletions and not designated and b_cursor + 1 < len(plan.b_path):
                deletions.append((plan.b_path[b_cursor], plan.b_path[b_cursor + 1]))
                b_cursor += 1
            world.step(t, deletions=deletions, designated=designated)

            for leaf in trig:
                track_containment(leaf)
            due_now = [leaf for leaf in all_leaves
                       if plan.trigger_round[leaf] < t < replay_round[leaf]
                       and world.walks[(leaf, 1)].origin == t]
            for leaf in due_now:
                track_containment(leaf)

            for leaf in firing:
                r = subtree_of[leaf]
                if success[r]:
                    continue
                walk = world.walks[(leaf, 1)]
                if walk.origin != t:
                    continue  # interference shifted this leaf's schedule
                if is_monotone_hit(walk.path, tree.parent, tree.root, tree.top):
                    success[r] = True
                else:
                    pending_cuts.append((leaf, tree.parent[leaf]))
                    u = tree.parent[leaf]
                    while True:
                        remaining[u] -= 1
                        if remaining[u] > 0 or u == r:
                            break
                        pending_cuts.append((u, tree.parent[u]))
                        u = tree.parent[u]

        cong_e = world.congestion(tree.root, tree.top)
        return {
            "successes": sum(success.values()),
            "subtrees": len(roots),
            "congestion_e": cong_e,
            "early_samples": early_samples,
            "contained_samples": contained,
            "replayed_leaves": per_subtree * len(roots),
        }


# ---------------------------------------------------------------------------
# Job-machine temporal selection
# ---------------------------------------------------------------------------


@dataclass
class JobMachinePlan:
    n: int
    m: int  # sqrt(n): group count and group size
    r_exp: int
    horizon: int
    actions: list  # per round t >= 2: ("trigger", j) | ("pretrim", j) | ("posttrim", j) | ("skip",)
    s_machine: str
    b_pool: list
    analytic_target: list  # expected fresh-sample load of S per round (index = round)
    window_round: dict  # job -> its back-off replay round


def build_jobmachine_attack(n: int):
    """Instance and script overloading one machine S with sqrt(n) jobs.

    Jobs sit in sqrt(n) groups.  Each job is triggered once (its assigned
    machine deleted); after a quiet wait of 2^r rounds the back-off replays
    the trigger pattern, and the adversary pretrims each group just before
    its replay window (leaving sqrt(n) routines, one containing S) and
    posttrims right after (killing unused S-routines).  Every round deletes
    exactly one machine; a pool of throwaway machines skips time.
    """
    m = round(n ** 0.5)
    if m * m != n or n < 16:
        raise ConfigurationError("n must be a perfect square >= 16")
    pretrim_len = n - 1 - m  # per job: alive routines n-1 after trigger -> m
    x_gap = m + m * pretrim_len  # posttrim block + next group's pretrim block
    cycle = m + x_gap

    r_exp = 1
    while (1 << (r_exp - 1)) <= (m - 1) * cycle + x_gap:
        r_exp += 1
    first_trigger = 2
    trigger = {}
    for grp in range(m):
        for pos in range(m):
            trigger[grp * m + pos] = first_trigger + grp * cycle + pos
    window = {j: t + (1 << r_exp) for j, t in trigger.items()}
    horizon = window[n - 1] + m  # last group's posttrim block ends the run

    actions: dict = {}
    for grp in range(m):
        jobs = list(range(grp * m, (grp + 1) * m))
        for j in jobs:
            actions[trigger[j]] = ("trigger", j)
        pre_start = window[jobs[0]] - m * pretrim_len
        t = pre_start
        for j in jobs:
            for _ in range(pretrim_len):
                actions[t] = ("pretrim", j)
                t += 1
        t = window[jobs[-1]] + 1
        for j in jobs:
            actions[t] = ("posttrim", j)
            t += 1
    schedule = [("init",)] * 2  # rounds 0 and 1 unused / initialization
    for t in range(2, horizon + 1):
        schedule.append(actions.get(t, ("skip",)))

    b_pool = [f"b{i}" for i in range(sum(1 for a in schedule if a[0] in ("skip", "posttrim")))]

    analytic = _analytic_target_trace(n, m, trigger, window, pretrim_len, horizon)
    plan = JobMachinePlan(n, m, r_exp, horizon, schedule, "S", b_pool, analytic, window)
    return _jobmachine_hypergraph(plan), JobMachineAttackScript(plan)


def _jobmachine_hypergraph(plan: JobMachinePlan) -> Hypergraph:
    n = plan.n
    jobs = list(range(n))
    machines = [f"a{j}_{i}" for j in range(n) for i in range(1, n + 1)]
    machines.append(plan.s_machine)
    machines.extend(plan.b_pool)
    routines = []
    for j in jobs:
        for i in range(1, n):
            routines.append((j, (f"a{j}_{i}",)))
        routines.append((j, (f"a{j}_{n}", plan.s_machine)))
    return Hypergraph(jobs, machines, routines)


def _analytic_target_trace(n, m, trigger, window, pretrim_len, horizon) -> list:
    """Expected fresh-sample load of S per round, over init assignment and
    window outcomes.  Piecewise per job: 1/n before its trigger; then
    (1-1/n)/alive while trimming down from n-1 to m; (1-1/n)/m while
    pretrimmed; (1-1/n)/m^2 once posttrimmed."""
    p_live = 1.0 - 1.0 / n
    pre_start = {}
    post_round = {}
    for grp in range(m):
        jobs = list(range(grp * m, (grp + 1) * m))
        start = window[jobs[0]] - m * pretrim_len
        for idx, j in enumerate(jobs):
            pre_start[j] = start + idx * pretrim_len
            post_round[j] = window[jobs[-1]] + 1 + idx
    trace = [0.0, 1.0]  # round 1: every job hits S with probability 1/n
    for t in range(2, horizon + 1):
        total = 0.0
        for j in range(n):
            if t < trigger[j]:
                total += 1.0 / n
            elif t < pre_start[j]:
                total += p_live / (n - 1)
            elif t < pre_start[j] + pretrim_len:
                deleted = t - pre_start[j]
                total += p_live / (n - 1 - deleted)
            elif t < post_round[j]:
                total += p_live / m
            else:
                total += p_live / (m * m)
        trace.append(total)
    return trace


@dataclass
class JobMachineAttackScript:
    plan: JobMachinePlan
    kind: str = "jobmachine_temporal_selection"

    def run(self, seed: int, scheduler_name: str = "proactive", alpha: float = 2.0) -> dict:
        plan = self.plan
        n, m = plan.n, plan.m
        h = _jobmachine_hypergraph(plan)
        rng = RandomSource(seed, STREAM_VALUES).rng
        scheduler = make_scheduler(scheduler_name, list(range(n)), horizon=plan.horizon,
                                   alpha=alpha)
        world = JobMachineWorld(h, scheduler, rng)

        s_routine = {j: h.job_routines[j][-1] for j in range(n)}  # the S-carrying routine
        trim_ptr = {j: 0 for j in range(n)}
        b_cursor = 0

        def machine_of(idx: int, j: int) -> str:
            ms = h.routines[idx][1]
            return ms[0] if len(ms) == 1 else f"a{j}_{n}"

        for t in range(2, plan.horizon + 1):
            action = plan.actions[t]
            kind = action[0]
            if kind == "trigger":
                j = action[1]
                world.delete_machine(machine_of(world.assignment[j], j), t)
            elif kind == "pretrim":
                j = action[1]
                target = None
                first_skipped = None
                pos = trim_ptr[j]
                cands = h.job_routines[j]
                while pos < len(cands) - 1:  # last entry is the S-routine
                    idx = cands[pos]
                    if h.routine_alive(idx):
                        if idx == world.assignment[j]:
                            if first_skipped is None:
                                first_skipped = pos
                        else:
                            target = idx
                            break
                    pos += 1
                if target is None:
                    raise SettingRuleError("pretrim found no deletable machine")
                trim_ptr[j] = first_skipped if first_skipped is not None else pos + 1
                world.delete_machine(machine_of(target, j), t)
            elif kind == "posttrim":
                j = action[1]
                assigned = world.assignment[j]
                if h.routine_alive(s_routine[j]) and assigned != s_routine[j]:
                    world.delete_machine(f"a{j}_{n}", t)
                else:
                    world.delete_machine(plan.b_pool[b_cursor], t)
                    b_cursor += 1
            else:
                world.delete_machine(plan.b_pool[b_cursor], t)
                b_cursor += 1

        load_s = world.machine_load(plan.s_machine)
        if world.machines_deleted != plan.horizon - 1:
            raise SettingRuleError("the script must delete exactly one machine per round")
        return {
            "final_load_S": load_s,
            "max_analytic_target": max(plan.analytic_target[1:]),
            "adversary_samples": world.adversary_samples,
            "algorithm_samples": world.algorithm_samples,
            "recourse": world.recourse,
        }


# ---------------------------------------------------------------------------
# Group-setting attacks
# ---------------------------------------------------------------------------


def resample_until_successful(gs: GroupState, participant: int, target_group: int,
                              budget: int, rng: random.Random) -> int:
    """Leave-rejoin the participant until it lands in the target group.
    Returns rounds used (0 if already there); stops at the budget."""
    if not gs.malicious[participant]:
        raise SettingRuleError("only malicious participants trigger resamples")
    rounds = 0
    while gs.assignment[participant] != target_group and rounds < budget:
        gs.resample(participant, rng)
        rounds += 1
    return rounds


def gather_attack(gs: GroupState, q_set, target_group: int, budget: int,
                  rng: random.Random) -> dict:
    """Rejoin one strayed member of Q per round until all of Q sits in the
    target group simultaneously, or the budget runs out."""
    q_list = sorted(q_set)
    trajectory = []
    for t in range(1, budget + 1):
        outside = [q for q in q_list if gs.assignment[q] != target_group]
        inside = len(q_list) - len(outside)
        trajectory.append(inside)
        if not outside:
            return {"success": True, "rounds": t - 1, "trajectory": trajectory}
        gs.resample(outside[0], rng)
    inside = sum(1 for q in q_list if gs.assignment[q] == target_group)
    trajectory.append(inside)
    return {"success": inside == len(q_list), "rounds": budget, "trajectory": trajectory}
