import math

import numpy as np
import pytest
from scipy import stats

from hypdiam.config import trial_seed
from hypdiam.errors import InputRangeError
from hypdiam.pantsgraph import (
    PantsGraph,
    graph_diameter,
    is_connected,
    sample_configuration_model,
)


def test_matching_is_involution():
    for seed in range(20):
        g = sample_configuration_model(5, seed)
        m = g.matching
        assert np.all(m[m] == np.arange(len(m)))
        assert np.all(m != np.arange(len(m)))


def test_degree_three_with_loops_counted_twice():
    g = sample_configuration_model(4, 9)
    deg = np.zeros(g.num_vertices, dtype=int)
    for h in range(g.num_half_edges):
        deg[h // 3] += 1
    assert np.all(deg == 3)


def test_determinism_and_seed_sensitivity():
    a = sample_configuration_model(6, 123).matching
    b = sample_configuration_model(6, 123).matching
    c = sample_configuration_model(6, 124).matching
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_invalid_matchings_rejected():
    with pytest.raises(InputRangeError):
        PantsGraph(genus=2, matching=np.arange(6))  # fixed points
    with pytest.raises(InputRangeError):
        PantsGraph(genus=1, matching=np.array([1, 0]))


DISCONNECTED_G3 = np.array([3, 4, 5, 0, 1, 2, 9, 10, 11, 6, 7, 8])


def test_connectivity_examples():
    # a vertex has three half-edges, so it cannot isolate itself by
    # self-matchings alone; the smallest disconnected instance is two
    # triple-edge pairs at genus 3
    g = PantsGraph(genus=3, matching=DISCONNECTED_G3)
    assert not is_connected(g)
    g2 = PantsGraph(genus=2, matching=np.array([3, 4, 5, 0, 1, 2]))
    assert is_connected(g2)


def test_connectivity_fraction_at_g64():
    ok = sum(
        is_connected(sample_configuration_model(64, trial_seed(5, 64, i)))
        for i in range(100)
    )
    assert ok >= 90


def test_graph_diameter_examples():
    assert graph_diameter(PantsGraph(genus=2, matching=np.array([3, 4, 5, 0, 1, 2]))) == 1
    assert graph_diameter(PantsGraph(genus=3, matching=DISCONNECTED_G3)) == math.inf


def test_graph_diameter_log_scaling():
    for g in (33, 65):
        n = 2 * g - 2
        diams = []
        for i in range(30):
            gr = sample_configuration_model(g, trial_seed(77, g, i))
            if is_connected(gr):
                diams.append(graph_diameter(gr))
        med = float(np.median(diams))
        assert math.log2(n) - 2.0 <= med <= 3.0 * math.log2(n)


def test_uniformity_chi_square_g2():
    counts = {}
    trials = 15_000
    for i in range(trials):
        g = sample_configuration_model(2, trial_seed(31337, 2, i))
        key = tuple(g.matching)
        counts[key] = counts.get(key, 0) + 1
    assert len(counts) == 15
    freqs = list(counts.values())
    chi2, p = stats.chisquare(freqs)
    assert p > 1e-3
    expected = trials / 15
    sd = math.sqrt(trials * (1 / 15) * (14 / 15))
    assert all(abs(f - expected) <= 4.0 * sd for f in freqs)
