"""Dynamic graphs: walk sampling oracles, congestion audits, palettes, PageRank."""

from __future__ import annotations

import math
import random
from collections import Counter
from fractions import Fraction

import pytest

from resamplelab.core import RandomSource, SettingRuleError
from resamplelab.graphs import (
    DynGraph,
    PaletteParams,
    PaletteWorld,
    WalkTruncationError,
    WalkWorld,
    geometric_length,
    list_colorable,
    make_pagerank_store,
    pagerank_oracle,
    parse_edge_list,
    parse_update_script,
    sample_walk,
)
from resamplelab.schedulers import GreedyAggregationScheduler, make_scheduler


def path_graph():
    g = DynGraph()
    g.add_edge("a", "b")
    return g


def star4():
    g = DynGraph()
    for leaf in range(1, 5):
        g.add_edge(0, leaf)
    return g


def test_walk_on_single_edge_is_forced():
    g = path_graph()
    assert sample_walk(g, "a", 1, random.Random(0)) == ("a", "b")


def test_walk_step_frequencies_uniform():
    g = star4()
    rng = random.Random(1)
    counts = Counter(sample_walk(g, 0, 1, rng)[1] for _ in range(10_000))
    for leaf in range(1, 5):
        assert abs(counts[leaf] / 10_000 - 0.25) <= 0.02


def test_specific_walk_probability_matches_degree_product():
    # 5-vertex house-shaped graph; P(path) = 1/(deg(v0) * deg(v1)).
    g = DynGraph()
    edges = [(0, 1), (0, 2), (1, 2), (2, 3), (3, 4), (1, 4)]
    for u, v in edges:
        g.add_edge(u, v)
    target = (0, 1, 2)
    exact = Fraction(1, g.degree(0)) * Fraction(1, g.degree(1))
    rng = random.Random(2)
    hits = sum(1 for _ in range(40_000) if sample_walk(g, 0, 2, rng) == target)
    assert abs(hits / 40_000 - float(exact)) <= 0.01
    # enumeration over all length-2 paths sums to 1
    total = Fraction(0)
    for n1 in g.adj[0]:
        for n2 in g.adj[n1]:
            total += Fraction(1, g.degree(0)) * Fraction(1, g.degree(n1))
    assert total == 1


def test_isolated_vertex_is_an_error():
    g = DynGraph()
    g.add_vertex(7)
    with pytest.raises(WalkTruncationError):
        sample_walk(g, 7, 1, random.Random(0))


def test_geometric_length_distribution():
    rng = random.Random(3)
    lam = 0.25
    draws = [geometric_length(lam, rng) for _ in range(20_000)]
    assert abs(sum(1 for d in draws if d == 0) / 20_000 - lam) <= 0.01
    assert abs(sum(draws) / 20_000 - (1 - lam) / lam) <= 0.1


def walk_world(g, scheduler_name="none", horizon=10, length=2, seed=0, **kw):
    return WalkWorld(g, make_scheduler(scheduler_name, [], horizon),
                     RandomSource(seed, 0).rng, length=length, **kw)


def test_congestion_counts_and_delete_invalidates():
    g = star4()
    w = walk_world(g, length=1)
    w.init_walks([(1, 1), (2, 1)])
    assert w.congestion(0, 1) == 1  # leaf walks go to the center
    labels = w.delete_edge(1, 0)
    assert labels == [(1, 1)]
    assert w.congestion(0, 1) == 0
    assert not w.walks[(1, 1)].valid
    w.audit()


def test_deleting_uncongested_edge_returns_nothing():
    g = star4()
    w = walk_world(g, length=1)
    w.init_walks([(1, 1)])
    assert w.delete_edge(3, 0) == []


def test_maintenance_resamples_broken_walks_same_round():
    g = star4()
    g.add_edge(1, 5)
    w = walk_world(g, length=1, horizon=10)
    w.init_walks([(1, 1)])
    out = w.step(2, deletions=[(1, w.walks[(1, 1)].path[1])])
    assert out["forced"] == [(1, 1)]
    assert w.walks[(1, 1)].valid and w.walks[(1, 1)].origin == 2
    w.audit()


def test_insertions_never_invalidate():
    g = star4()
    w = walk_world(g, length=2)
    w.init_walks([(1, 1)])
    before = w.walks[(1, 1)].path
    w.step(2, insertions=[(2, 3)])
    assert w.walks[(1, 1)].path == before
    w.audit()


def test_congestion_recount_matches_incremental():
    g = star4()
    g.add_edge(1, 2)
    g.add_edge(3, 4)
    w = walk_world(g, length=3, seed=5)
    w.init_walks([(v, 2) for v in range(5)])
    assert w.recount_congestion() == w.cong
    w.step(2, deletions=[(1, 2)])
    assert w.recount_congestion() == w.cong
    w.audit()


def test_walk_validity_audit_catches_corruption():
    g = star4()
    w = walk_world(g, length=1)
    w.init_walks([(1, 1)])
    g.adj[1].pop(0), g.adj[0].pop(1)  # bypass delete_edge bookkeeping
    with pytest.raises(SettingRuleError):
        w.audit()


# -- PageRank -------------------------------------------------------------------


def test_pagerank_estimate_formula():
    g = DynGraph(directed=True)
    for v in range(5):
        g.add_vertex(v)
    for v in range(5):
        g.add_edge(v, (v + 1) % 5)
    w = make_pagerank_store(g, 4, 0.2, make_scheduler("none", [], 1),
                            RandomSource(0, 0).rng)
    w.visits = {0: 10}
    assert w.estimate_pagerank(0) == pytest.approx(10 / (5 * 4 / 0.2))


def test_pagerank_oracle_symmetry_cases():
    g1 = DynGraph(directed=True)
    g1.add_vertex(0)
    assert pagerank_oracle(g1, 0.2) == {0: pytest.approx(1.0)}
    g2 = DynGraph(directed=True)
    g2.add_edge(0, 1)
    g2.add_edge(1, 0)
    pr = pagerank_oracle(g2, 0.3)
    assert pr[0] == pytest.approx(0.5)
    g3 = DynGraph(directed=True)
    for v in range(3):
        g3.add_edge(v, (v + 1) % 3)
    pr3 = pagerank_oracle(g3, 0.15)
    for v in range(3):
        assert pr3[v] == pytest.approx(1 / 3)


def test_pagerank_directed_cycle_estimator():
    n, k, lam = 8, 60, 0.25
    g = DynGraph(directed=True)
    for v in range(n):
        g.add_vertex(v)
    for v in range(n):
        g.add_edge(v, (v + 1) % n)
    w = make_pagerank_store(g, k, lam, make_scheduler("none", [], 1),
                            RandomSource(3, 0).rng)
    for v in range(n):
        assert w.estimate_pagerank(v) == pytest.approx(1 / n, rel=0.2)


def test_pagerank_estimator_tracks_oracle_on_hub_graph():
    n, lam = 30, 0.2
    rng = random.Random(4)
    g = DynGraph(directed=True)
    for v in range(n):
        g.add_vertex(v)
    for v in range(n):
        targets = {0} if v else {1}
        while len(targets) < 3:
            u = rng.randrange(n)
            if u != v:
                targets.add(u)
        for u in sorted(targets):
            g.add_edge(v, u)
    oracle = pagerank_oracle(g, lam)
    w = make_pagerank_store(g, 400, lam, make_scheduler("none", [], 1),
                            RandomSource(5, 0).rng)
    for v in range(n):
        if oracle[v] >= 2 / n:
            assert abs(w.estimate_pagerank(v) - oracle[v]) / oracle[v] <= 0.2


# -- palettes and list coloring ---------------------------------------------------


def test_list_colorable_empty_graph():
    g = DynGraph()
    res = list_colorable(g, {})
    assert res.status == "colorable"


def test_triangle_with_singleton_palettes_uncolorable():
    g = DynGraph()
    g.add_edge(0, 1)
    g.add_edge(1, 2)
    g.add_edge(0, 2)
    res = list_colorable(g, {0: (1,), 1: (1,), 2: (1,)})
    assert res.status == "uncolorable"


def test_list_coloring_budget_indeterminate():
    g = DynGraph()
    g.add_edge(0, 1)
    res = list_colorable(g, {0: (1, 2), 1: (1, 2)}, node_budget=0)
    assert res.status == "indeterminate"
    assert res.coloring is None


def test_list_coloring_proper_witness():
    g = DynGraph()
    edges = [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)]
    for u, v in edges:
        g.add_edge(u, v)
    palettes = {v: (0, 1, 2) for v in range(4)}
    res = list_colorable(g, palettes)
    assert res.status == "colorable"
    for u, v in edges:
        assert res.coloring[u] != res.coloring[v]
    for v, c in res.coloring.items():
        assert c in palettes[v]


def palette_world(n=30, delta=6, eps=0.5, seed=0):
    g = DynGraph()
    for v in range(n):
        g.add_vertex(v)
    params = PaletteParams(n=n, delta=delta, epsilon=eps)
    sched = GreedyAggregationScheduler(range(n), alpha=n ** eps)
    return PaletteWorld(g, params, sched, RandomSource(seed, 0).rng)


def test_initial_batch_uses_one_range():
    w = palette_world()
    assert w.state.ranges_in_use() == {1}
    assert len(w.state.colors_in_use()) <= w.params.range_width()


def test_ranges_disjoint_and_bounded_under_churn():
    w = palette_world(n=40, delta=8, eps=0.5, seed=2)
    adv = random.Random(3)
    cap = math.ceil(1 / 0.5) + 1
    for t in range(2, 120):
        ins = []
        for _ in range(10):
            u, v = adv.randrange(40), adv.randrange(40)
            if u != v and not w.g.has_edge(u, v) and w.g.degree(u) < 8 and w.g.degree(v) < 8:
                ins.append((u, v))
                break
        w.step(t, insertions=ins)
        in_use = w.state.ranges_in_use()
        assert len(in_use) <= cap
        spans = sorted(w.state.ranges[b] for b in in_use)
        for (s1, w1), (s2, _) in zip(spans, spans[1:]):
            assert s1 + w1 <= s2
        assert len(w.state.colors_in_use()) <= (w.params.delta + 1) * cap


def test_batches_colorable_and_decomposed():
    w = palette_world(n=40, delta=8, eps=0.5, seed=4)
    adv = random.Random(5)
    for t in range(2, 80):
        ins = []
        u, v = adv.randrange(40), adv.randrange(40)
        if u != v and not w.g.has_edge(u, v) and w.g.degree(u) < 8 and w.g.degree(v) < 8:
            ins.append((u, v))
        w.step(t, insertions=ins)
    results = w.check_batches_colorable()
    assert results and all(r.status == "colorable" for r in results)
    # cross-batch neighbors can never share a palette color
    for v in range(40):
        bv = w.state.batch_of(v)
        for u in w.g.adj[v]:
            if w.state.batch_of(u) != bv:
                assert not set(w.state.palette_of(u)) & set(w.state.palette_of(v))


def test_triangle_free_mode_width():
    p = PaletteParams(n=100, delta=32, epsilon=0.5, mode="triangle_free", gamma=0.5)
    assert p.range_width() == math.ceil(4 * 32 / (0.5 * math.log(32)))
    assert p.palette_size() <= p.range_width()


def test_degree_cap_enforced():
    w = palette_world(n=5, delta=1, eps=0.5, seed=6)
    w.step(2, insertions=[(0, 1)])
    with pytest.raises(SettingRuleError):
        w.step(3, insertions=[(0, 2)])


# -- text formats ----------------------------------------------------------------


def test_edge_list_and_update_script_formats():
    g = parse_edge_list("3 2 undirected\n0 1\n1 2\n")
    assert g.has_edge(0, 1) and g.has_edge(2, 1) and not g.directed
    ops = parse_update_script("DEL 0 1\nINS 0 2\nAUDIT\n")
    assert ops == [("DEL", 0, 1), ("INS", 0, 2), ("AUDIT",)]
    with pytest.raises(Exception):
        parse_edge_list("3 5 undirected\n0 1\n")
