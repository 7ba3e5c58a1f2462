"""Network construction and routing: worked examples, all-pairs oracle,
conservation, determinism, vertical-link monotonicity."""

from __future__ import annotations

import math
import random

import pytest

from meshstack.errors import UnreachableError
from meshstack.model import Component, CoreGraph, Flow, VerticalLink
from meshstack.netgraph import build_network, route_all, shortest_path

from conftest import make_fp


def test_single_edge_flow():
    fp = make_fp(0, [["a", "b"]], [6.0, 6.0], [6.0])
    net = build_network([fp])
    cg = CoreGraph(components=(Component("a", "CPU"), Component("b", "CPU")),
                   flows=(Flow("a", "b", 10.0),))
    te = route_all(net, cg, link_capacity=100.0)
    assert te.bw_times_distance == pytest.approx(60.0)
    assert te.loads[((0, 0, 0), (0, 0, 1))] == pytest.approx(10.0)
    assert te.max_link_load == pytest.approx(10.0)
    assert te.peak_penalty == 0.0


def test_peak_penalty_arithmetic():
    fp = make_fp(0, [["a", "b"]], [6.0, 6.0], [6.0])
    net = build_network([fp])
    cg = CoreGraph(components=(Component("a", "CPU"), Component("b", "CPU")),
                   flows=(Flow("a", "b", 60.0), Flow("a", "b", 60.0)))
    te = route_all(net, cg, link_capacity=100.0)
    assert te.loads[((0, 0, 0), (0, 0, 1))] == pytest.approx(120.0)
    assert te.peak_penalty == pytest.approx(20.0)
    assert te.max_link_load == pytest.approx(120.0)


def test_links_span_empty_cells():
    fp = make_fp(0, [["a", None, "b"]], [4.0, 4.0, 4.0], [4.0])
    net = build_network([fp])
    result = shortest_path(net, (0, 0, 0), (0, 0, 2))
    assert result is not None
    dist, hops, path = result
    assert hops == 1                       # one link, spanning the hole
    assert dist == pytest.approx(8.0)      # center-to-center distance


def test_unreachable_names_flow():
    fps = [make_fp(0, [["a"]], [6.0], [6.0]), make_fp(1, [["b"]], [6.0], [6.0])]
    net = build_network(fps)  # no vertical links
    cg = CoreGraph(components=(Component("a", "CPU"), Component("b", "CPU")),
                   flows=(Flow("a", "b", 1.0),))
    with pytest.raises(UnreachableError) as err:
        route_all(net, cg, 100.0)
    assert "a" in str(err.value) and "b" in str(err.value)


def random_network(rng):
    """Two random 3x3 layers plus random vertical links."""
    fps = []
    comps = []
    for layer in range(2):
        cells = [[None] * 3 for _ in range(3)]
        n = rng.randint(3, 9)
        spots = rng.sample([(r, c) for r in range(3) for c in range(3)], n)
        for k, (r, c) in enumerate(spots):
            cid = f"l{layer}n{k}"
            cells[r][c] = cid
            comps.append(Component(cid, "CPU"))
        widths = [rng.uniform(2.0, 8.0) for _ in range(3)]
        heights = [rng.uniform(2.0, 8.0) for _ in range(3)]
        fps.append(make_fp(layer, cells, widths, heights))
    pairs = [(l, u) for _cell, l in [((r, c), (0, r, c)) for (r, c), _ in fps[0].occupied_cells()]
             for u in [(1, r2, c2) for (r2, c2), _ in fps[1].occupied_cells()]]
    vlinks = []
    for lower, upper in rng.sample(pairs, min(len(pairs), rng.randint(0, 4))):
        vlinks.append(VerticalLink(lower=lower, upper=upper, rd_length=0.0))
    return fps, comps, vlinks


def floyd_warshall(net):
    nodes = list(net.nodes)
    idx = {n: i for i, n in enumerate(nodes)}
    n = len(nodes)
    dist = [[math.inf] * n for _ in range(n)]
    for i in range(n):
        dist[i][i] = 0.0
    for a in nodes:
        for b, length in net.adjacency[a]:
            dist[idx[a]][idx[b]] = min(dist[idx[a]][idx[b]], length)
    for k in range(n):
        for i in range(n):
            dik = dist[i][k]
            if dik == math.inf:
                continue
            for j in range(n):
                alt = dik + dist[k][j]
                if alt < dist[i][j]:
                    dist[i][j] = alt
    return idx, dist


def test_paths_match_floyd_warshall_oracle():
    rng = random.Random(321)
    for _ in range(50):
        fps, comps, vlinks = random_network(rng)
        net = build_network(fps, vlinks)
        idx, dist = floyd_warshall(net)
        ids = [c.id for c in comps]
        for _ in range(6):
            a, b = rng.sample(ids, 2)
            na, nb = net.component_router[a], net.component_router[b]
            expected = dist[idx[na]][idx[nb]]
            got = shortest_path(net, na, nb)
            if expected == math.inf:
                assert got is None
            else:
                assert got is not None
                assert got[0] == pytest.approx(expected, abs=1e-9)


def test_load_conservation_and_determinism():
    rng = random.Random(654)
    for _ in range(30):
        fps, comps, vlinks = random_network(rng)
        net = build_network(fps, vlinks)
        idx, dist = floyd_warshall(net)
        ids = [c.id for c in comps]
        flows = []
        for _ in range(8):
            a, b = rng.sample(ids, 2)
            if dist[idx[net.component_router[a]]][idx[net.component_router[b]]] < math.inf:
                flows.append(Flow(a, b, rng.uniform(1.0, 20.0)))
        cg = CoreGraph(components=tuple(comps), flows=tuple(flows))
        te1 = route_all(net, cg, 100.0)
        te2 = route_all(net, cg, 100.0)
        assert te1.loads == te2.loads
        assert te1.bw_times_distance == te2.bw_times_distance
        # sum of link loads == sum over flows of bandwidth * hop count
        assert sum(te1.loads.values()) == pytest.approx(te1.bw_times_hops, rel=1e-12)


def test_removing_vlink_never_shortens_paths():
    rng = random.Random(987)
    checked = 0
    while checked < 20:
        fps, comps, vlinks = random_network(rng)
        if not vlinks:
            continue
        full = build_network(fps, vlinks)
        reduced = build_network(fps, vlinks[:-1])
        idx_f, dist_f = floyd_warshall(full)
        idx_r, dist_r = floyd_warshall(reduced)
        for a in full.nodes:
            for b in full.nodes:
                if dist_r[idx_r[a]][idx_r[b]] < math.inf:
                    assert (dist_r[idx_r[a]][idx_r[b]]
                            >= dist_f[idx_f[a]][idx_f[b]] - 1e-9)
        checked += 1


def test_tie_break_prefers_fewer_hops_then_lex():
    # square of equal link lengths: two equal-length routes from corner to corner
    fp = make_fp(0, [["a", "b"], ["c", "d"]], [4.0, 4.0], [4.0, 4.0])
    net = build_network([fp])
    dist, hops, path = shortest_path(net, (0, 0, 0), (0, 1, 1))
    assert dist == pytest.approx(8.0)
    assert hops == 2
    # lexicographically smallest node sequence: via (0,0,1)
    assert path == ((0, 0, 0), (0, 0, 1), (0, 1, 1))
