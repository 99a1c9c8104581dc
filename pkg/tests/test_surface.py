import math

import numpy as np
import pytest

from conftest import hexagon
from hypdiam import lattice as lat
from hypdiam.config import trial_seed
from hypdiam.errors import DisconnectedSurfaceError, InputRangeError
from hypdiam.pantsgraph import PantsGraph, is_connected, sample_configuration_model
from hypdiam.surface import (
    assemble_surface,
    bavard_bound,
    cover_walk_nodes,
    default_rcap,
    diameter_estimate,
    ell_policy,
    midpoint_distances_from,
    thickness_upper_bound,
)

TRIPLE_EDGE = np.array([3, 4, 5, 0, 1, 2])


def test_assemble_euler_and_fields(hex6):
    g = PantsGraph(genus=2, matching=TRIPLE_EDGE)
    s = assemble_surface(g, hex6)
    assert s.genus == 2 and s.ell == 6.0 and s.ribbon == "identity"


def test_ell_policy():
    assert ell_policy(1024) == pytest.approx(4.0 * math.log(math.log(1024)), abs=1e-12)
    assert ell_policy(1024) == pytest.approx(7.7444, abs=2e-3)
    assert ell_policy(2) == 1.0
    assert ell_policy(15) >= 1.0


def test_triple_edge_first_hit(hex6):
    s = assemble_surface(PantsGraph(genus=2, matching=TRIPLE_EDGE), hex6)
    res = midpoint_distances_from(s, 0, rcap=10.0)
    assert res.distances[0] == 0.0
    assert res.distances[1] == pytest.approx(2.0 * hex6.c_ell, abs=1e-10)
    rep = diameter_estimate(s, rcap=10.0)
    assert rep.midpoint_diameter == pytest.approx(2.0 * hex6.c_ell, abs=1e-10)
    assert rep.padded_diameter == rep.midpoint_diameter + 2.0 * hex6.pants_radius


def test_loop_at_base_keeps_zero(hex6):
    # half-edges 0,1 of vertex 0 matched to each other
    g = PantsGraph(genus=2, matching=np.array([1, 0, 5, 4, 3, 2]))
    s = assemble_surface(g, hex6)
    res = midpoint_distances_from(s, 0, rcap=10.0)
    assert res.distances[0] == 0.0
    nodes = cover_walk_nodes(s, 0, 2)
    nontrivial = [n for n in nodes if n.covered_vertex == 0 and n.word]
    assert any(abs(n.dist - 2.0 * hex6.c_ell) < 1e-9 for n in nontrivial)


@pytest.mark.parametrize("genus,ell", [(2, 3.0), (2, 6.0), (3, 3.0), (3, 6.0)])
def test_first_hit_matches_bruteforce(genus, ell):
    h = hexagon(ell)
    hits = 0
    for i in range(5):
        g = sample_configuration_model(genus, trial_seed(1000 + genus, genus, i))
        s = assemble_surface(g, h)
        bf = {}
        for nd in cover_walk_nodes(s, 0, 8):
            bf[nd.covered_vertex] = min(bf.get(nd.covered_vertex, math.inf), nd.dist)
        res = midpoint_distances_from(s, 0, rcap=14.0)
        for w, d in bf.items():
            assert res.reached[w]
            assert res.distances[w] <= d + 1e-12
            assert res.distances[w] == pytest.approx(d, abs=1e-9)
        hits += 1
    assert hits == 5


def test_cover_walk_nodes_share_crossed_side(hex6):
    g = sample_configuration_model(3, 99)
    s = assemble_surface(g, hex6)
    for nd in cover_walk_nodes(s, 0, 3):
        if not nd.word:
            continue
        gidx = nd.word[-1]
        seg = hex6.sides[2 * gidx]
        parent_m = nd.isometry @ hex6.reflection_mats[gidx]
        for endpoint in (seg.a.vec, seg.b.vec):
            a = nd.isometry @ endpoint
            b = parent_m @ endpoint
            assert np.abs(a - b).max() < 1e-8 * max(1.0, abs(a[0]))


def test_lift_count_matches_census(hex6):
    g = sample_configuration_model(3, 4)
    s = assemble_surface(g, hex6)
    nodes = cover_walk_nodes(s, 0, 9)
    for r in (2.0, 3.5, 4.7):
        walk_count = sum(1 for n in nodes if n.dist <= r + 1e-12)
        assert walk_count == lat.enumerate_ball(6.0, r, hexa=hex6).count


def test_midpoint_distance_symmetry(hex6):
    g = sample_configuration_model(12, 21)
    if not is_connected(g):
        pytest.skip("disconnected sample")
    s = assemble_surface(g, hex6)
    rng = np.random.default_rng(0)
    rows = {v: midpoint_distances_from(s, v, rcap=16.0) for v in range(6)}
    for _ in range(10):
        v, w = rng.integers(6), rng.integers(s.graph.num_vertices)
        if rows[v].reached[w] and w < 6:
            assert rows[v].distances[w] == pytest.approx(
                rows[w].distances[v], abs=1e-8
            )


def test_monotone_in_rcap(hex6):
    g = sample_configuration_model(8, 3)
    if not is_connected(g):
        pytest.skip("disconnected sample")
    s = assemble_surface(g, hex6)
    lo = midpoint_distances_from(s, 0, rcap=6.0)
    hi = midpoint_distances_from(s, 0, rcap=14.0)
    for w in range(s.graph.num_vertices):
        if lo.reached[w]:
            assert hi.reached[w]
            assert hi.distances[w] <= lo.distances[w] + 1e-12


def test_relabeling_permutes_distances(hex6):
    g = sample_configuration_model(3, 5)
    s = assemble_surface(g, hex6)
    base = np.array(
        [midpoint_distances_from(s, v, rcap=12.0).distances for v in range(4)]
    )
    rng = np.random.default_rng(8)
    perm = rng.permutation(4)
    m = g.matching
    relabeled = np.empty_like(m)
    for h in range(len(m)):
        v, j = h // 3, h % 3
        h2 = m[h]
        relabeled[3 * perm[v] + j] = 3 * perm[h2 // 3] + (h2 % 3)
    g2 = PantsGraph(genus=3, matching=relabeled)
    s2 = assemble_surface(g2, hex6)
    for v in range(4):
        d2 = midpoint_distances_from(s2, int(perm[v]), rcap=12.0).distances
        assert np.allclose(d2[perm], base[v], atol=1e-9)


def test_disconnected_raises(hex6):
    g = PantsGraph(genus=3, matching=np.array([3, 4, 5, 0, 1, 2, 9, 10, 11, 6, 7, 8]))
    s = assemble_surface(g, hex6)
    with pytest.raises(DisconnectedSurfaceError):
        diameter_estimate(s, rcap=8.0)


def test_diameter_report_fields(hex6):
    g = sample_configuration_model(8, 2)
    if not is_connected(g):
        pytest.skip("disconnected sample")
    s = assemble_surface(g, hex6)
    rep = diameter_estimate(s)
    assert rep.padded_diameter >= rep.midpoint_diameter >= 0.0
    assert rep.padded_diameter >= rep.bavard
    assert len(rep.eccentricities) == s.graph.num_vertices
    assert rep.midpoint_diameter == pytest.approx(float(np.max(rep.eccentricities)))


def test_default_rcap_clamped():
    assert default_rcap(2048) == 30.0
    assert default_rcap(8) == pytest.approx(
        math.log(8) + 25 * math.log(math.log(8)) + 8.0
    )


def test_bavard_values_and_asymptote():
    assert bavard_bound(2) == pytest.approx(
        math.acosh(1.0 / (math.sqrt(3.0) * math.tan(math.pi / 18.0))), abs=1e-12
    )
    assert bavard_bound(2) == pytest.approx(1.8551, abs=1e-4)
    # the formula's true large-g expansion is log g + log(8*sqrt(3)/pi)
    gap = bavard_bound(10**6) - (math.log(10**6) + math.log(8.0 * math.sqrt(3.0) / math.pi))
    assert abs(gap) <= 1e-3
    vals = [bavard_bound(g) for g in range(2, 10_001, 97)]
    assert all(a < b for a, b in zip(vals, vals[1:]))


def test_thickness_upper_bound():
    assert thickness_upper_bound(5, 0.0) == 0.0
    g = 7
    d = math.acosh(2.0 * (g - 1) + 1.0)
    assert thickness_upper_bound(g, d) == pytest.approx(1.0, abs=1e-12)
    g = 10**6
    d = math.log(g) + 25.0 * math.log(math.log(g))
    ratio = thickness_upper_bound(g, d) / (math.log(g) ** 25)
    assert 0.0 < ratio <= 1.0
    with pytest.raises(InputRangeError):
        thickness_upper_bound(1, 1.0)
