"""Unpruned reduced-word enumeration, the verify suite's reference route.

Kept deliberately independent of the level-batched pruned enumerator:
plain recursion over explicit matrices, counting distances directly.
"""

import math

import numpy as np

from . import hyperboloid as hb


def brute_force_ball_count(hexa, radius, max_depth, tie_eps=1e-12):
    """Count orbit points within `radius` over all reduced words to
    max_depth; the second return value certifies completeness when it
    exceeds the radius (minimum separating-side distance at the deepest
    layer, below which no deeper orbit point can come back).
    """
    refl = hexa.reflection_mats
    count = 1
    frontier = [(np.eye(3), -1)]
    min_frontier_side = math.inf
    for _ in range(max_depth):
        nxt = []
        min_side = math.inf
        for m, last in frontier:
            for g in range(3):
                if g == last:
                    continue
                m2 = m @ refl[g]
                if math.acosh(max(m2[0, 0], 1.0)) <= radius + tie_eps:
                    count += 1
                seg = hexa.sides[2 * g]
                side = float(
                    hb._dist_to_segment(
                        hb.ORIGIN_VEC, m @ seg.a.vec, m @ seg.b.vec, m @ seg.carrier
                    )
                )
                min_side = min(min_side, side)
                nxt.append((m2, g))
        frontier = nxt
        min_frontier_side = min_side
    return count, min_frontier_side
