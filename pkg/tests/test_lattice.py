import math

import numpy as np
import pytest

from conftest import hexagon
from hypdiam import lattice as lat
from hypdiam.errors import BudgetExceededError, EstimationError, InputRangeError

import _oracles as orc


def test_ball_radius_zero_is_root_only():
    for ell in (2.0, 6.0):
        assert lat.enumerate_ball(ell, 0.0, hexa=hexagon(ell)).count == 1


def test_ball_at_2c_counts_root_plus_neighbors(hex6):
    c = hex6.c_ell
    cen = lat.enumerate_ball(6.0, 2.0 * c, hexa=hex6)
    assert cen.count == 4
    # brute-force cross-check
    bf, cert = orc.brute_force_ball_count(hex6, 2.0 * c, 6)
    assert bf == 4 and cert > 2.0 * c


def test_count_lower_bound_words(hex6):
    c = hex6.c_ell
    for r in (3.0, 6.0, 9.0):
        k = math.floor(r / (2.0 * c))
        n = lat.enumerate_ball(6.0, r, hexa=hex6).count
        assert n >= 3 * 2**k - 2


@pytest.mark.parametrize("ell", [2.0, 4.0, 6.0])
def test_pruned_equals_bruteforce(ell):
    h = hexagon(ell)
    for r in (3.0, 5.0, 8.0):
        depth = math.ceil(1.5 * r / (2.0 * h.c_ell)) + 3
        bf = cert = None
        for extra in range(0, 9, 2):
            bf, cert = orc.brute_force_ball_count(h, r, depth + extra)
            if cert > r:
                break
        assert cert > r, "brute force could not certify completeness"
        assert lat.enumerate_ball(ell, r, hexa=h).count == bf


def test_shell_contains_root_for_small_radius(hex6):
    c = hex6.c_ell
    for r in (1e-3, c, 2.0 * c):
        assert lat.enumerate_ball(6.0, r, hexa=hex6).shell_count >= 1


def test_shell_just_past_2c_vs_bruteforce(hex6):
    c = hex6.c_ell
    r = 2.0 * c + 1e-6
    cen = lat.enumerate_ball(6.0, r, hexa=hex6)
    # the three neighbors sit at exactly 2c; the root falls outside the
    # half-open window [r - 2c, r)
    assert cen.shell_count == 3
    words = orc.brute_force_points(hex6, 6)
    dists = [d for _, _, d in words]
    bf_shell = sum(1 for d in dists if r - 2.0 * c <= d < r)
    assert cen.shell_count == bf_shell


def test_sandwich_on_grid(hex6):
    tree = lat.build_orbit_tree(hex6, 12.0)
    r = 2.0 * hex6.c_ell + 0.1
    while r <= 12.0:
        s, n = tree.count_shell(r), tree.count_ball(r)
        assert s <= n <= 2 * s
        r += 0.5


def test_counting_report_all_ok():
    rep = lat.verify_counting_bounds(6.0, 12.0, 0.5, hexa=hexagon(6.0))
    assert rep.all_ok
    assert rep.submult_ok and rep.ancestor_ok and rep.sandwich_ok and rep.area_ok


def test_submult_trivial_cases(hex6):
    tree = lat.build_orbit_tree(hex6, 6.0)
    const = (20.0 / 3.0) * math.exp(8.0 * hex6.c_ell + 6.0)
    assert tree.count_ball(0.0) <= const  # N(0) <= const * 1 * 1
    t = 2.0 * hex6.c_ell
    assert tree.count_ball(t) <= 5.0 * math.exp(t)


def test_monotone_census(hex6):
    tree = lat.build_orbit_tree(hex6, 10.0)
    counts = [tree.count_ball(r) for r in np.arange(0.0, 10.0, 0.25)]
    assert all(a <= b for a, b in zip(counts, counts[1:]))
    assert np.all(tree.side_dist[1:] >= tree.side_dist[tree.parent[1:]] - 1e-12)


def test_orbit_points_unique(hex6):
    tree = lat.build_orbit_tree(hex6, 10.0, store_points=True)
    keys = {tuple(np.round(p / 1e-9).astype(np.int64)) for p in tree.points}
    assert len(keys) == len(tree)


def test_each_node_2c_from_parent(hex6):
    tree = lat.build_orbit_tree(hex6, 8.0, store_points=True)
    pts = tree.points
    par = tree.parent[1:]
    d = np.arccosh(
        np.maximum(
            pts[1:, 0] * pts[par, 0] - pts[1:, 1] * pts[par, 1] - pts[1:, 2] * pts[par, 2],
            1.0,
        )
    )
    err = np.abs(d - 2.0 * hex6.c_ell)
    # reading a short distance off far-out coordinates costs x0^2 * eps
    tol = np.maximum(1e-8, 3e-15 * pts[1:, 0] ** 2)
    assert np.all(err <= tol)
    near = pts[1:, 0] < 100.0
    assert err[near].max() < 1e-8


def test_node_stream_sorted_and_structured(hex6):
    tree = lat.build_orbit_tree(hex6, 4.0)
    nodes = lat.node_stream(tree)
    sds = [n.side_distance for n in nodes]
    assert all(a <= b + 1e-12 for a, b in zip(sds, sds[1:]))
    for n in nodes:
        if n.parent is not None:
            assert n.word_last != n.parent.word_last
            assert n.side_distance >= n.parent.side_distance - 1e-12


def test_radius_cap_and_budget(hex6):
    with pytest.raises(InputRangeError):
        lat.build_orbit_tree(hex6, 31.0)
    with pytest.raises(BudgetExceededError) as exc:
        lat.build_orbit_tree(hex6, 12.0, node_budget=100)
    assert exc.value.partial is not None
    assert len(exc.value.partial.parent) <= 100


def test_delta_estimate_bracket_and_monotone():
    rates = []
    for ell in (4.0, 6.0, 8.0):
        de = lat.delta_estimate(ell, 12.0, hexa=hexagon(ell))
        assert de.raw_rate <= de.certified_upper
        rates.append(de.raw_rate)
    assert rates[0] < rates[1] < rates[2]


def test_delta_estimate_needs_two_shells(hex6):
    with pytest.raises(EstimationError):
        lat.delta_estimate(6.0, 0.5, hexa=hex6)


def test_speedcv_correction_dominates_smaller_radii(hex6):
    # raw(SMALL R) + correction/R >= raw(R_max): the corrected sequence
    # really is a one-sided bracket
    tree = lat.build_orbit_tree(hex6, 12.0)
    corr = math.log(20.0 / 3.0) + 8.0 * hex6.c_ell + 6.0
    raw_max = math.log(tree.count_ball(12.0)) / 12.0
    for r in (4.0, 6.0, 8.0, 10.0):
        n = tree.count_ball(r)
        assert (math.log(n) + corr) / r >= raw_max


def test_histogram_buckets(hex6):
    cen = lat.enumerate_ball(6.0, 5.0, hexa=hex6)
    assert sum(c for _, c in cen.histogram) == cen.count
    assert cen.histogram[0][1] == 1  # the root alone in the first bucket
