"""Adjacency models: static meshes and the moving-node arena."""

import math
import random

import pytest

from debhsim.topology import (GeometricTopology, StaticTopology,
                              UnknownNodeError, bfs_hops)


def _geo(seed=1, mobile=True, **kw):
    params = dict(nodes=range(1, 11), arena=(500.0, 500.0), range_m=150.0,
                  min_speed=2.0, max_speed=20.0, pause_s=5.0)
    params.update(kw)
    return GeometricTopology(rng=random.Random(seed), mobile=mobile, **params)


def test_static_links_are_symmetric():
    topo = StaticTopology([1, 2, 3], [(1, 2)])
    assert topo.has_link(1, 2)
    assert topo.has_link(2, 1)
    assert not topo.has_link(1, 3)


def test_static_neighbors_are_sorted():
    topo = StaticTopology([1, 2, 3, 4], [(2, 4), (2, 1), (2, 3)])
    assert topo.neighbors(2) == [1, 3, 4]


def test_static_rejects_unknown_edge_endpoint():
    with pytest.raises(UnknownNodeError):
        StaticTopology([1, 2], [(1, 9)])


def test_static_rejects_self_edge():
    with pytest.raises(ValueError):
        StaticTopology([1, 2], [(1, 1)])


def test_static_rejects_unknown_node_queries():
    topo = StaticTopology([1, 2], [(1, 2)])
    with pytest.raises(UnknownNodeError):
        topo.neighbors(9)
    with pytest.raises(UnknownNodeError):
        topo.has_link(1, 9)


def test_static_nodes_never_move():
    topo = StaticTopology([1, 2], [(1, 2)])
    assert topo.step(1, 0.0, random.Random(0)) is None


def test_bfs_hops_on_a_line():
    topo = StaticTopology([1, 2, 3, 4], [(1, 2), (2, 3), (3, 4)])
    assert bfs_hops(topo, 1) == {1: 0, 2: 1, 3: 2, 4: 3}


def test_bfs_hops_skips_unreachable_nodes():
    topo = StaticTopology([1, 2, 3], [(1, 2)])
    assert bfs_hops(topo, 1) == {1: 0, 2: 1}


def test_positions_stay_inside_the_arena():
    topo = _geo()
    rng = random.Random(5)
    # Drive each node through several legs and sample along the way.
    for node in topo.nodes:
        t = 0.0
        for _ in range(20):
            for probe in (t, t + 0.5):
                x, y = topo.position(node, probe)
                assert 0.0 <= x <= 500.0
                assert 0.0 <= y <= 500.0
            nxt = topo.step(node, t, rng)
            assert nxt is not None
            t = max(nxt, t + 1e-9)


def test_leg_speed_stays_in_the_configured_band():
    topo = _geo()
    for node in topo.nodes:
        assert 2.0 <= topo._kin[node].speed <= 20.0


def test_travel_then_pause_then_new_leg():
    topo = _geo(seed=3)
    rng = random.Random(3)
    node = topo.nodes[0]
    k = topo._kin[node]
    arrive = k.arrive_time
    waypoint = k.waypoint
    # Arrival starts the pause and freezes the position.
    pause_end = topo.step(node, arrive, rng)
    assert pause_end == pytest.approx(arrive + 5.0)
    assert topo.position(node, arrive + 2.0) == waypoint
    # Pause end starts a fresh leg from the same spot.
    next_arrive = topo.step(node, pause_end, rng)
    assert next_arrive > pause_end
    assert topo._kin[node].start_pos == waypoint


def test_position_interpolates_linearly_along_a_leg():
    topo = _geo(seed=7)
    node = topo.nodes[0]
    k = topo._kin[node]
    mid = (k.leg_start + k.arrive_time) / 2.0
    x, y = topo.position(node, mid)
    assert x == pytest.approx((k.start_pos[0] + k.waypoint[0]) / 2.0)
    assert y == pytest.approx((k.start_pos[1] + k.waypoint[1]) / 2.0)


def test_geometric_links_are_symmetric_and_range_bound():
    topo = _geo(seed=9)
    for t in (0.0, 12.5, 40.0):
        for u in topo.nodes:
            for v in topo.nodes:
                if u == v:
                    continue
                assert topo.has_link(u, v, t) == topo.has_link(v, u, t)
                dist = math.dist(topo.position(u, t), topo.position(v, t))
                assert topo.has_link(u, v, t) == (dist <= 150.0)


def test_geometric_neighbors_match_has_link():
    topo = _geo(seed=11)
    for u in topo.nodes:
        listed = topo.neighbors(u, 3.0)
        assert listed == [v for v in topo.nodes
                          if v != u and topo.has_link(u, v, 3.0)]


def test_same_seed_pins_the_layout():
    a, b = _geo(seed=4), _geo(seed=4)
    c = _geo(seed=5)
    positions = lambda topo: [topo.position(n, 0.0) for n in topo.nodes]
    assert positions(a) == positions(b)
    assert positions(a) != positions(c)


def test_immobile_arena_keeps_positions_fixed():
    topo = _geo(seed=2, mobile=False)
    node = topo.nodes[0]
    assert topo.step(node, 0.0, random.Random(0)) is None
    assert topo.position(node, 0.0) == topo.position(node, 100.0)


def test_geometric_rejects_unknown_node():
    topo = _geo()
    with pytest.raises(UnknownNodeError):
        topo.position(99, 0.0)
    with pytest.raises(UnknownNodeError):
        topo.has_link(1, 99, 0.0)
