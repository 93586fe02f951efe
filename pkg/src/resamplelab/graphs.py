"""Dynamic graphs carrying random walks, PageRank walk stores, and palettes.

Walks are the sampled objects: walk (v, i) is the i-th walk rooted at v, and
its realization is the vertex path it traverses.  Deleting an edge
invalidates every walk traversing it; in maintenance mode those walks are
forced resamples of the same round, in one-shot mode they simply stop
counting (attack demonstrations sample each walk once).

Congestion of an edge counts traversals by currently valid walks, with
multiplicity.  An incremental per-edge map is kept in lockstep and audited
against a from-scratch recount.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from .core import ConfigurationError, SettingRuleError


class WalkTruncationError(SettingRuleError):
    """A walk reached a vertex with no outgoing edge; in-scope adversaries
    never isolate a live source."""


class DynGraph:
    """Mutable graph with deterministic neighbor iteration order.

    Adjacency uses insertion-ordered dicts so that seeded neighbor sampling
    is reproducible; plain sets would leak hash-table order into the draws.
    """

    def __init__(self, directed: bool = False) -> None:
        self.directed = directed
        self.adj: dict = {}  # v -> {u: None}
        self.revision = 0
        self.journal: list | None = None  # when set, records removed edges

    def add_vertex(self, v) -> None:
        self.adj.setdefault(v, {})

    @property
    def vertices(self):
        return self.adj.keys()

    def edge_key(self, u, v):
        if self.directed:
            return (u, v)
        return (u, v) if u <= v else (v, u)

    def add_edge(self, u, v) -> None:
        if u == v:
            raise ConfigurationError("self-loops are not allowed")
        self.add_vertex(u)
        self.add_vertex(v)
        self.adj[u][v] = None
        if not self.directed:
            self.adj[v][u] = None
        self.revision += 1

    def remove_edge(self, u, v) -> None:
        if not self.has_edge(u, v):
            raise SettingRuleError(f"edge {(u, v)} is not alive")
        del self.adj[u][v]
        if not self.directed:
            del self.adj[v][u]
        if self.journal is not None:
            self.journal.append((u, v))
        self.revision += 1

    def has_edge(self, u, v) -> bool:
        return u in self.adj and v in self.adj[u]

    def degree(self, v) -> int:
        return len(self.adj[v])

    def neighbors(self, v) -> list:
        return list(self.adj[v])

    def edges(self) -> list:
        out = []
        for u, nbrs in self.adj.items():
            for v in nbrs:
                if self.directed or u <= v:
                    out.append((u, v))
        return out

    def n_vertices(self) -> int:
        return len(self.adj)


def parse_edge_list(text: str) -> DynGraph:
    """Edge-list format: header "n m directed|undirected", then "u v" lines."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ConfigurationError("empty graph document")
    head = lines[0].split()
    if len(head) != 3 or head[2] not in ("directed", "undirected"):
        raise ConfigurationError(f"bad header {lines[0]!r}")
    n, m = int(head[0]), int(head[1])
    g = DynGraph(directed=head[2] == "directed")
    for v in range(n):
        g.add_vertex(v)
    body = lines[1:]
    if len(body) != m:
        raise ConfigurationError(f"header promises {m} edges, found {len(body)}")
    for ln in body:
        u, v = map(int, ln.split())
        g.add_edge(u, v)
    return g


def parse_update_script(text: str) -> list[tuple]:
    """Update scripts: lines "DEL u v", "INS u v", or "AUDIT"."""
    ops = []
    for ln in text.splitlines():
        ln = ln.strip()
        if not ln:
            continue
        parts = ln.split()
        if parts[0] == "AUDIT" and len(parts) == 1:
            ops.append(("AUDIT",))
        elif parts[0] in ("DEL", "INS") and len(parts) == 3:
            ops.append((parts[0], int(parts[1]), int(parts[2])))
        else:
            raise ConfigurationError(f"bad update line {ln!r}")
    return ops


def apply_update_script(world: "WalkWorld", ops, start_t: int = 2) -> list[dict]:
    """Drive a walk world with parsed update ops, one round per edit line.

    AUDIT lines run the validity/recount audit at the current round and
    append a row with the time and maximum congestion.
    """
    audits = []
    t = start_t - 1
    for op in ops:
        if op[0] == "AUDIT":
            world.audit()
            audits.append({"time": t, "max_congestion": world.max_congestion()})
            continue
        t += 1
        if op[0] == "DEL":
            world.step(t, deletions=[(op[1], op[2])])
        else:
            world.step(t, insertions=[(op[1], op[2])])
    return audits


@dataclass
class Walk:
    label: tuple  # (source, index)
    path: tuple  # vertex sequence, length = edges + 1
    origin: int
    valid: bool = True

    def edge_keys(self, g: DynGraph) -> list:
        return [g.edge_key(self.path[i], self.path[i + 1]) for i in range(len(self.path) - 1)]


def sample_walk(g: DynGraph, v, length: int, rng: random.Random,
                dangling_jump: bool = False) -> tuple:
    """Uniform-neighbor walk of `length` edges starting at v.

    With ``dangling_jump`` a vertex without outgoing edges teleports to a
    uniform vertex (PageRank convention); otherwise it is an error.
    """
    if v not in g.adj:
        raise ConfigurationError(f"unknown vertex {v!r}")
    path = [v]
    cur = v
    for _ in range(length):
        nbrs = g.adj[cur]
        if not nbrs:
            if not dangling_jump:
                raise WalkTruncationError(f"vertex {cur!r} has no outgoing edge")
            allv = list(g.adj)
            cur = allv[rng.randrange(len(allv))]
        else:
            keys = list(nbrs)
            cur = keys[rng.randrange(len(keys))]
        path.append(cur)
    return tuple(path)


def geometric_length(lam: float, rng: random.Random) -> int:
    """Edge count distributed Geom(lam) on {0, 1, 2, ...}."""
    m = 0
    while rng.random() >= lam:
        m += 1
    return m


class WalkWorld:
    """A collection of maintained walks over a dynamic graph.

    ``maintenance`` controls what an edge deletion does to walks traversing
    it: resample them this round (the maintained-walks setting) or just
    invalidate them (one-shot attack demonstrations).
    """

    def __init__(self, g: DynGraph, scheduler, rng: random.Random, *,
                 length=None, geom_lambda: float = 0.0, maintenance: bool = True,
                 track_visits: bool = False) -> None:
        if (length is None) == (geom_lambda <= 0.0):
            raise ConfigurationError("exactly one of length / geom_lambda required")
        self.g = g
        self.scheduler = scheduler
        self.rng = rng
        self.length = length
        self.geom_lambda = geom_lambda
        self.maintenance = maintenance
        self.k_per_source: dict = {}
        self.walks: dict = {}  # label -> Walk
        self.edge_walks: dict = {}  # edge key -> {label: multiplicity}
        self.cong: dict = {}  # edge key -> traversal count over valid walks
        self.visits: dict = {} if track_visits else None
        self.t = 1
        self.adversary_samples = 0
        self.algorithm_samples = 0

    # -- walk bookkeeping ---------------------------------------------------

    def _register(self, walk: Walk) -> None:
        for e in walk.edge_keys(self.g):
            bucket = self.edge_walks.setdefault(e, {})
            bucket[walk.label] = bucket.get(walk.label, 0) + 1
            self.cong[e] = self.cong.get(e, 0) + 1
        if self.visits is not None:
            for v in walk.path:
                self.visits[v] = self.visits.get(v, 0) + 1

    def _unregister(self, walk: Walk) -> None:
        for e in walk.edge_keys(self.g):
            bucket = self.edge_walks.get(e)
            if bucket and walk.label in bucket:
                bucket[walk.label] -= 1
                if bucket[walk.label] == 0:
                    del bucket[walk.label]
                if not bucket:
                    del self.edge_walks[e]
                self.cong[e] = self.cong.get(e, 0) - 1
                if self.cong[e] == 0:
                    del self.cong[e]
        if self.visits is not None:
            for v in walk.path:
                self.visits[v] -= 1

    def _draw_path(self, source) -> tuple:
        if self.length is not None:
            return sample_walk(self.g, source, self.length, self.rng)
        m = geometric_length(self.geom_lambda, self.rng)
        return sample_walk(self.g, source, m, self.rng, dangling_jump=True)

    def sample_one(self, label, t: int) -> Walk:
        old = self.walks.get(label)
        if old is not None and old.valid:
            self._unregister(old)
        walk = Walk(label, self._draw_path(label[0]), t)
        self.walks[label] = walk
        self._register(walk)
        return walk

    def init_walks(self, sources, t: int = 1) -> None:
        """Sample k walks per (vertex, k) source entry; origins stamp t."""
        self.t = t
        for v, k in sources:
            self.k_per_source[v] = k
            for i in range(1, k + 1):
                self.sample_one((v, i), t)

    # -- graph dynamics -----------------------------------------------------

    def insert_edge(self, u, v) -> None:
        self.g.add_edge(u, v)  # insertions never invalidate walks

    def delete_edge(self, u, v) -> list:
        """Delete the edge and invalidate walks traversing it; returns their
        labels (ascending)."""
        e = self.g.edge_key(u, v)
        self.g.remove_edge(u, v)
        labels = sorted(self.edge_walks.get(e, {}))
        for label in labels:
            walk = self.walks[label]
            self._unregister(walk)
            walk.valid = False
        return labels

    def step(self, t: int, *, deletions=(), insertions=(), designated=()) -> dict:
        """One round: adversary edits edges and may designate extra walks to
        resample; forced walks and scheduler dues are then redrawn."""
        self.t = t
        due_before = self.scheduler.peek_due(t)
        forced: set = set(designated)
        for u, v in insertions:
            self.insert_edge(u, v)
        for u, v in deletions:
            forced.update(self.delete_edge(u, v))
        forced_sorted = sorted(forced)
        if self.maintenance:
            for label in forced_sorted:
                self.scheduler.on_adversarial_sample(label, t, was_due=label in due_before)
                self.sample_one(label, t)
                self.adversary_samples += 1
        else:
            for label in sorted(set(designated)):
                self.scheduler.on_adversarial_sample(label, t, was_due=label in due_before)
                self.sample_one(label, t)
                self.adversary_samples += 1
        algo = []
        for label in self.scheduler.collect(t, set(forced_sorted) if self.maintenance else set(designated)):
            self.sample_one(label, t)
            self.algorithm_samples += 1
            algo.append(label)
        return {"forced": forced_sorted, "algorithm": algo}

    # -- metrics and audits ---------------------------------------------------

    def congestion(self, u, v=None) -> int:
        e = (u if v is None else self.g.edge_key(u, v))
        return self.cong.get(e, 0)

    def max_congestion(self) -> int:
        return max(self.cong.values(), default=0)

    def recount_congestion(self) -> dict:
        fresh: dict = {}
        for walk in self.walks.values():
            if not walk.valid:
                continue
            for e in walk.edge_keys(self.g):
                fresh[e] = fresh.get(e, 0) + 1
        return fresh

    def audit(self) -> None:
        """Walk validity plus incremental-vs-recount congestion equality."""
        for walk in self.walks.values():
            if walk.valid:
                for i in range(len(walk.path) - 1):
                    if not self.g.has_edge(walk.path[i], walk.path[i + 1]):
                        raise SettingRuleError(
                            f"walk {walk.label} survived over a dead edge"
                        )
        if self.recount_congestion() != self.cong:
            raise SettingRuleError("incremental congestion map diverged from recount")

    def estimate_pagerank(self, v) -> float:
        if self.visits is None:
            raise ConfigurationError("world was not built with track_visits")
        n = self.g.n_vertices()
        k_total = sum(self.k_per_source.values())
        if n == 0 or k_total == 0:
            raise ConfigurationError("empty store")
        k = k_total / n  # uniform k per node in all supported configs
        return self.visits.get(v, 0) / (n * k / self.geom_lambda)


def make_pagerank_store(g: DynGraph, k: int, lam: float, scheduler,
                        rng: random.Random) -> WalkWorld:
    """k geometric-length walks from every node; visit counters on."""
    if not 0.0 < lam < 1.0:
        raise ConfigurationError("lambda must lie in (0, 1)")
    world = WalkWorld(g, scheduler, rng, geom_lambda=lam, maintenance=True,
                      track_visits=True)
    world.init_walks([(v, k) for v in sorted(g.vertices)])
    return world


def pagerank_estimate(store: WalkWorld, v) -> float:
    return store.estimate_pagerank(v)


def pagerank_oracle(g: DynGraph, lam: float, tol: float = 1e-12,
                    max_iters: int = 100_000) -> dict:
    """Stationary distribution of the jump-lambda walk by power iteration.

    With probability lam jump to a uniform node, else move to a uniform
    out-neighbor; dangling nodes jump uniformly.  Converges to L1 residual
    <= tol or raises.
    """
    nodes = sorted(g.vertices)
    n = len(nodes)
    if n == 0:
        raise ConfigurationError("empty graph")
    index = {v: i for i, v in enumerate(nodes)}
    out = [[index[u] for u in g.adj[v]] for v in nodes]
    x = [1.0 / n] * n
    for _ in range(max_iters):
        nxt = [lam / n] * n
        for i, targets in enumerate(out):
            if targets:
                share = (1.0 - lam) * x[i] / len(targets)
                for j in targets:
                    nxt[j] += share
            else:
                share = (1.0 - lam) * x[i] / n
                for j in range(n):
                    nxt[j] += share
        resid = sum(abs(a - b) for a, b in zip(nxt, x))
        x = nxt
        if resid <= tol:
            total = sum(x)
            if abs(total - 1.0) > max(tol, 1e-9):
                raise SettingRuleError(f"oracle mass drifted to {total!r}")
            return {v: x[index[v]] for v in nodes}
    raise SettingRuleError("power iteration did not converge")


# ---------------------------------------------------------------------------
# Palette maintenance
# ---------------------------------------------------------------------------


@dataclass
class PaletteParams:
    n: int
    delta: int
    epsilon: float
    mode: str = "general"  # or "triangle_free"
    gamma: float = 0.5
    width_c: int = 4  # triangle-free range width constant
    list_c: int = 8  # palette size constant

    def range_width(self) -> int:
        if self.mode == "general":
            return self.delta + 1
        w = self.width_c * self.delta / (self.gamma * math.log(max(self.delta, 2)))
        return max(1, math.ceil(w))

    def palette_size(self) -> int:
        if self.mode == "general":
            size = math.ceil(self.list_c * math.log2(max(self.n, 2)))
        else:
            size = math.ceil(self.list_c * (self.delta ** self.gamma + math.sqrt(math.log2(max(self.n, 2)))))
        return min(size, self.range_width())


class PaletteState:
    """Per-vertex color lists drawn from disjoint per-batch ranges.

    All vertices resampled in the same round share one fresh color range;
    ranges are consecutive disjoint integer intervals, so vertices from
    different batches can never conflict.
    """

    def __init__(self, params: PaletteParams) -> None:
        self.params = params
        self.ranges: dict = {}  # batch time -> (start, width)
        self._next_start = 0
        self.palettes: dict = {}  # vertex -> (batch time, tuple of colors)
        self.resample_events = 0

    def _range_for(self, t: int) -> tuple:
        if t not in self.ranges:
            width = self.params.range_width()
            self.ranges[t] = (self._next_start, width)
            self._next_start += width
        return self.ranges[t]

    def palette_resample(self, batch, t: int, rng: random.Random) -> None:
        """Draw fresh color lists for every vertex in the batch from the
        round's range (one sampling event per listed vertex)."""
        start, width = self._range_for(t)
        size = self.params.palette_size()
        for v in batch:
            colors = tuple(start + c for c in rng.sample(range(width), size))
            self.palettes[v] = (t, colors)
            self.resample_events += 1

    def batch_of(self, v) -> int:
        return self.palettes[v][0]

    def palette_of(self, v) -> tuple:
        return self.palettes[v][1]

    def ranges_in_use(self) -> set:
        return {t for t, _ in self.palettes.values()}

    def colors_in_use(self) -> set:
        out: set = set()
        for _, colors in self.palettes.values():
            out.update(colors)
        return out


@dataclass
class ColoringResult:
    status: str  # "colorable" | "uncolorable" | "indeterminate"
    coloring: dict | None = None
    nodes_explored: int = 0


def list_colorable(g: DynGraph, palettes: dict, node_budget: int = 10_000_000) -> ColoringResult:
    """Exact list-coloring by backtracking with forward checking.

    Vertices are tried in descending-degree order; domains shrink as
    neighbors get colored and an empty domain prunes the branch.  Exceeding
    the node budget yields "indeterminate", reported distinctly from a
    proven "uncolorable".
    """
    verts = sorted(palettes, key=lambda v: (-g.degree(v) if v in g.adj else 0, v))
    for v in verts:
        if v in g.adj:
            for u in g.adj[v]:
                if u not in palettes:
                    raise ConfigurationError(f"vertex {u!r} has no palette")
    domains = {v: set(palettes[v]) for v in verts}
    order_pos = {v: i for i, v in enumerate(verts)}
    coloring: dict = {}
    explored = 0

    def assign(i: int) -> str:
        nonlocal explored
        if i == len(verts):
            return "colorable"
        v = verts[i]
        for color in sorted(domains[v]):
            explored += 1
            if explored > node_budget:
                return "indeterminate"
            removed = []
            ok = True
            if v in g.adj:
                for u in g.adj[v]:
                    if u in domains and order_pos[u] > i and color in domains[u]:
                        domains[u].discard(color)
                        removed.append(u)
                        if not domains[u]:
                            ok = False
            if ok:
                coloring[v] = color
                res = assign(i + 1)
                if res != "uncolorable":
                    return res
                del coloring[v]
            for u in removed:
                domains[u].add(color)
        return "uncolorable"

    status = assign(0)
    if status == "colorable":
        return ColoringResult("colorable", dict(coloring), explored)
    return ColoringResult(status, None, explored)


class PaletteWorld:
    """Palette maintenance under edge updates with an aggregation scheduler.

    Inserting an edge adversarially resamples both endpoint palettes;
    deletions change the graph only.  Every palette resampled in a round,
    forced or scheduled, draws from that round's fresh range.
    """

    def __init__(self, g: DynGraph, params: PaletteParams, scheduler,
                 rng: random.Random) -> None:
        self.g = g
        self.params = params
        self.scheduler = scheduler
        self.rng = rng
        self.state = PaletteState(params)
        self.adversary_samples = 0
        self.algorithm_samples = 0
        self.t = 1
        allv = sorted(g.vertices)
        self.state.palette_resample(allv, 1, rng)

    def step(self, t: int, *, insertions=(), deletions=()) -> None:
        self.t = t
        due_before = self.scheduler.peek_due(t)
        forced: list = []
        seen = set()
        for u, v in deletions:
            self.g.remove_edge(u, v)
        for u, v in insertions:
            self.g.add_edge(u, v)
            if max(self.g.degree(u), self.g.degree(v)) > self.params.delta:
                raise SettingRuleError("insertion exceeded the degree bound")
            for w in (u, v):
                if w not in seen:
                    seen.add(w)
                    forced.append(w)
        forced.sort()
        for v in forced:
            self.scheduler.on_adversarial_sample(v, t, was_due=v in due_before)
        algo = self.scheduler.collect(t, set(forced))
        self.adversary_samples += len(forced)
        self.algorithm_samples += len(algo)
        batch = forced + algo
        if batch:
            self.state.palette_resample(batch, t, self.rng)

    def check_batches_colorable(self, node_budget: int = 10_000_000) -> list[ColoringResult]:
        """Exact list-coloring per batch; cross-batch edges use disjoint
        ranges so the check decomposes."""
        by_batch: dict = {}
        for v, (bt, _) in self.state.palettes.items():
            by_batch.setdefault(bt, []).append(v)
        results = []
        for bt in sorted(by_batch):
            members = set(by_batch[bt])
            sub = DynGraph()
            for v in members:
                sub.add_vertex(v)
            for v in members:
                for u in self.g.adj.get(v, {}):
                    if u in members and (self.g.directed or v <= u):
                        sub.add_edge(v, u)
            pal = {v: self.state.palette_of(v) for v in members}
            results.append(list_colorable(sub, pal, node_budget))
        return results
