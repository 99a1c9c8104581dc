"""Experiment orchestration: sweeps, verification suites, CSV rendering.

Every trial is a pure function of (genus, trial index, root seed), so
sweeps are reproducible byte-for-byte at any worker count; rows are
ordered by (genus, trial), never by completion time.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from . import hyperboloid as hb
from . import lattice as lat
from . import peeling, pantsgraph, surface
from .config import ExperimentConfig, trial_seed
from .errors import HypdiamError
from .hexagon import build_hexagon


# ---------------------------------------------------------------------------
# CSV rendering
# ---------------------------------------------------------------------------


def fmt_value(v):
    """12-significant-digit floats; lowercase booleans; blanks for missing."""
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if math.isnan(v):
            return "nan"
        return format(v, ".12g")
    return str(v)


def render_csv(command: str, config: dict, seed, columns, rows) -> str:
    """CSV text with a self-describing JSON header line.

    The worker count is execution detail, not experiment identity, and
    output bytes must not depend on it; it is dropped from the echo.
    """
    config = {k: v for k, v in config.items() if k != "threads"}
    header = {
        "command": command,
        "version": __version__,
        "seed": seed,
        "config": config,
    }
    out = [json.dumps(header, sort_keys=True, separators=(",", ":"))]
    out.append(",".join(columns))
    for row in rows:
        out.append(",".join(fmt_value(row.get(c)) for c in columns))
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# per-command row producers (shared by the service endpoints)
# ---------------------------------------------------------------------------


def hexagon_payload(ell: float) -> dict:
    h = build_hexagon(ell)
    return {
        "ell": h.ell,
        "s": h.s,
        "t": h.t,
        "c_ell": h.c_ell,
        "c_prime": h.c_prime,
        "rho": h.rho,
        "pants_radius": h.pants_radius,
        "seam_length": h.seam_length,
    }


LATTICE_COLUMNS = ["R", "N", "shell", "raw_rate", "certified_upper", "submult_ok", "area_ok"]


def lattice_rows(ell: float, radius: float, grid_step: float = None,
                 node_budget: int = lat.DEFAULT_NODE_BUDGET) -> list:
    """One row per grid radius (single row at `radius` without a step)."""
    hexa = build_hexagon(ell)
    tree = lat.build_orbit_tree(hexa, radius, node_budget)
    if grid_step:
        radii = []
        k = 1
        while k * grid_step + lat.GRID_OFFSET <= radius:
            radii.append(k * grid_step + lat.GRID_OFFSET)
            k += 1
        if not radii:
            radii = [radius]
    else:
        radii = [radius]
    corr = math.log(20.0 / 3.0) + 8.0 * hexa.c_ell + hexa.ell
    mult_const = (20.0 / 3.0) * math.exp(8.0 * hexa.c_ell + hexa.ell)
    rows = []
    best_upper = math.inf
    for i, r in enumerate(radii):
        n = tree.count_ball(r)
        raw = math.log(n) / r if n >= 1 and r > 0 else None
        if n > 1:
            best_upper = min(best_upper, (math.log(n) + corr) / r)
        upper = best_upper if math.isfinite(best_upper) else None
        submult_ok = True
        for rj in radii[: i + 1]:
            rem = r - rj
            if rem < 0:
                break
            if n > mult_const * tree.count_ball(rj) * tree.count_ball(rem):
                submult_ok = False
                break
        rows.append(
            {
                "R": r,
                "N": n,
                "shell": tree.count_shell(r),
                "raw_rate": raw,
                "certified_upper": upper,
                "submult_ok": submult_ok,
                "area_ok": n <= 5.0 * math.exp(r),
            }
        )
    return rows


GRAPH_COLUMNS = ["trial", "connected", "graph_diameter"]


def graph_rows(genus: int, trials: int, seed: int) -> list:
    rows = []
    for i in range(trials):
        g = pantsgraph.sample_configuration_model(genus, trial_seed(seed, genus, i))
        connected = pantsgraph.is_connected(g)
        diam = pantsgraph.graph_diameter(g) if connected else math.inf
        rows.append({"trial": i, "connected": connected, "graph_diameter": diam})
    return rows


SURFACE_COLUMNS = [
    "trial", "connected", "midpoint_diam", "padded_diam", "bavard",
    "theorem_budget", "nodes_expanded", "wall_ms",
]


def _resolve_ell(ell, genus):
    if ell in (None, "auto"):
        return surface.ell_policy(genus)
    return float(ell)


def surface_trial(genus: int, trial: int, seed: int, ell, rcap, timings: bool) -> dict:
    """One surface trial; never raises, errors land in the row."""
    ell_val = _resolve_ell(ell, genus)
    row = {
        "trial": trial, "connected": None, "midpoint_diam": None,
        "padded_diam": None, "bavard": surface.bavard_bound(genus),
        "theorem_budget": math.log(genus) + 25.0 * math.log(math.log(genus)),
        "nodes_expanded": None, "wall_ms": 0, "error": "",
        "genus": genus, "ell": ell_val,
        "seed": trial_seed(seed, genus, trial), "budget_gap": None,
    }
    t0 = time.perf_counter()
    try:
        graph = pantsgraph.sample_configuration_model(genus, row["seed"])
        row["connected"] = pantsgraph.is_connected(graph)
        if not row["connected"]:
            return row
        s = surface.assemble_surface(graph, ell_val)
        rep = surface.diameter_estimate(s, rcap)
        row["midpoint_diam"] = rep.midpoint_diameter
        row["padded_diam"] = rep.padded_diameter
        row["nodes_expanded"] = rep.nodes_expanded
        row["budget_gap"] = rep.padded_diameter - row["theorem_budget"]
    except HypdiamError as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
    if timings:
        row["wall_ms"] = int(1000 * (time.perf_counter() - t0))
    return row


def surface_rows(genus, trials, seed, ell="auto", rcap=None, threads=1, timings=False):
    return _run_trials(surface_trial, genus, trials, seed,
                       (ell, rcap, timings), threads)


PEEL_COLUMNS = [
    "trial", "bad_phase1", "bad_phase2", "R_6k", "R_tau1", "R_tau2",
    "closed_early", "audit_pass", "audit_slack_min",
]


def peel_trial(genus, trial, seed, ell, epsilon, k, timings) -> dict:
    ell_val = _resolve_ell(ell, genus)
    row = {
        "trial": trial, "bad_phase1": None, "bad_phase2": None, "R_6k": None,
        "R_tau1": None, "R_tau2": None, "closed_early": None,
        "audit_pass": "", "audit_slack_min": None, "error": "",
        "genus": genus, "ell": ell_val, "wall_ms": 0,
        "seed": trial_seed(seed, genus, trial),
    }
    t0 = time.perf_counter()
    try:
        trace = peeling.explore(genus, row["seed"], ell=ell_val, epsilon=epsilon, k=k)
        row["bad_phase1"] = trace.bad_phase1
        row["bad_phase2"] = trace.bad_phase2
        row["R_6k"] = trace.r_at(6 * k)
        row["R_tau1"] = trace.r_at(trace.tau1)
        row["R_tau2"] = trace.r_at(trace.tau2)
        row["closed_early"] = trace.closed_early
        audit = peeling.audit_inequalities(trace, _peel_census(ell_val))
        if audit.skipped:
            row["audit_pass"] = "skipped"
        else:
            row["audit_pass"] = "true" if audit.all_ok else "false"
            row["audit_slack_min"] = audit.min_slack
    except HypdiamError as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
    if timings:
        row["wall_ms"] = int(1000 * (time.perf_counter() - t0))
    return row


_PEEL_CENSUS = {}


def _peel_census(ell_val):
    key = round(ell_val, 12)
    if key not in _PEEL_CENSUS:
        _PEEL_CENSUS.clear()
        _PEEL_CENSUS[key] = peeling.CensusCache(ell_val)
    return _PEEL_CENSUS[key]


def peel_rows(genus, trials, seed, ell="auto", epsilon=0.4, k=3, threads=1,
              timings=False):
    return _run_trials(peel_trial, genus, trials, seed,
                       (ell, epsilon, k, timings), threads)


# ---------------------------------------------------------------------------
# parallel trial scheduling (deterministic output order)
# ---------------------------------------------------------------------------


def _chunk(fn, genus, lo, hi, seed, extra):
    return [fn(genus, i, seed, *extra) for i in range(lo, hi)]


def _run_trials(fn, genus, trials, seed, extra, threads):
    if threads <= 1:
        return _chunk(fn, genus, 0, trials, seed, extra)
    bounds = np.linspace(0, trials, min(threads, trials) + 1).astype(int)
    with ProcessPoolExecutor(max_workers=threads) as pool:
        futures = [
            pool.submit(_chunk, fn, genus, int(lo), int(hi), seed, extra)
            for lo, hi in zip(bounds[:-1], bounds[1:])
            if hi > lo
        ]
        rows = []
        for f in futures:
            rows.extend(f.result())
    return rows


# ---------------------------------------------------------------------------
# the scaling sweep
# ---------------------------------------------------------------------------


SWEEP_COLUMNS = [
    "genus", "ell", "trial", "seed", "connected", "midpoint_diam",
    "padded_diam", "bavard", "theorem_budget", "budget_gap", "wall_ms", "error",
]


@dataclass
class SweepSummary:
    medians: dict
    slope: float
    intercept: float
    budget_fractions: dict  # genus -> {C0: fraction among connected trials}
    connected_fraction: dict

    def as_dict(self):
        return {
            "medians": {str(g): m for g, m in self.medians.items()},
            "slope": self.slope,
            "intercept": self.intercept,
            "budget_fractions": {
                str(g): {str(c0): f for c0, f in d.items()}
                for g, d in self.budget_fractions.items()
            },
            "connected_fraction": {str(g): f for g, f in self.connected_fraction.items()},
        }


@dataclass
class SweepResult:
    rows: list
    summary: SweepSummary
    config: dict = field(default_factory=dict)


def run_scaling_sweep(cfg: ExperimentConfig) -> SweepResult:
    """Diameter trials across the genus list, with a regression summary."""
    rows = []
    for g in sorted(cfg.genus):
        rows.extend(
            surface_rows(
                g, cfg.trials, cfg.seed, ell=cfg.ell, rcap=cfg.rcap,
                threads=cfg.threads, timings=cfg.timings,
            )
        )
    medians = {}
    budget_fractions = {}
    connected_fraction = {}
    for g in sorted(cfg.genus):
        sub = [r for r in rows if r["genus"] == g]
        good = [r["padded_diam"] for r in sub if r["padded_diam"] is not None]
        connected_fraction[g] = (
            sum(1 for r in sub if r["connected"]) / len(sub) if sub else 0.0
        )
        if good:
            medians[g] = float(np.median(good))
            budget = math.log(g) + 25.0 * math.log(math.log(g))
            budget_fractions[g] = {
                c0: sum(1 for p in good if p <= budget + c0) / len(good)
                for c0 in (5, 10, 15)
            }
    slope = intercept = math.nan
    if len(medians) >= 2:
        xs = np.log(np.array(sorted(medians.keys()), dtype=float))
        ys = np.array([medians[g] for g in sorted(medians.keys())])
        a = np.vstack([xs, np.ones_like(xs)]).T
        (slope, intercept), *_ = np.linalg.lstsq(a, ys, rcond=None)
    return SweepResult(
        rows=rows,
        summary=SweepSummary(
            medians=medians,
            slope=float(slope),
            intercept=float(intercept),
            budget_fractions=budget_fractions,
            connected_fraction=connected_fraction,
        ),
        config=cfg.model_dump(),
    )


# ---------------------------------------------------------------------------
# verification suites
# ---------------------------------------------------------------------------


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class VerifyReport:
    suite: str
    checks: list

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def as_dict(self):
        return {
            "suite": self.suite,
            "passed": self.passed,
            "checks": [
                {"name": c.name, "passed": c.passed, "detail": c.detail}
                for c in self.checks
            ],
        }


def _geometry_checks():
    checks = []
    grid = [1.0, 2.0, 4.0, 6.0, 8.0, 12.0, 16.0, 24.0, 40.0]
    worst = 0.0
    margin_ok = True
    for ell in grid:
        h = build_hexagon(ell)
        c = math.cosh(h.s)
        worst = max(worst, abs(math.cosh(h.t) * (c - 1.0) / c - 1.0))
        if min(h.c_ell, h.c_prime) <= 0.5 * math.log(3.0):
            margin_ok = False
    checks.append(CheckResult("hexagon_identity_grid", worst <= 1e-8, f"worst {worst:.2e}"))
    checks.append(CheckResult("inscribed_disk_margin", margin_ok))

    reg = build_hexagon(2.0 * math.acosh(2.0))
    ok = (
        abs(reg.t - math.acosh(2.0)) <= 1e-9
        and abs(reg.c_ell - math.acosh(math.sqrt(2.0))) <= 1e-9
        and abs(reg.rho - math.acosh(math.sqrt(3.0))) <= 1e-8
    )
    checks.append(CheckResult("regular_hexagon_values", ok))

    ratios = []
    for ell in (8.0, 12.0, 16.0, 20.0):
        h = build_hexagon(ell)
        ratios.append(h.seam_length / (4.0 * math.exp(-ell / 4.0)))
    seam_ok = (
        abs(ratios[1] - 1.0) <= 0.05
        and abs(ratios[3] - 1.0) <= 0.01
        and all(ratios[i] > ratios[i + 1] >= 1.0 for i in range(3))
    )
    checks.append(CheckResult("seam_asymptotics", seam_ok, f"ratios {ratios}"))

    h6 = build_hexagon(6.0)
    rng = np.random.default_rng(20240817)
    worst_iso = worst_tri = 0.0
    for _ in range(200):
        pts = []
        for _ in range(3):
            r, th = rng.uniform(0, 3), rng.uniform(0, 2 * math.pi)
            pts.append(
                np.array([math.cosh(r), math.sinh(r) * math.cos(th), math.sinh(r) * math.sin(th)])
            )
        m = h6.reflection_mats[int(rng.integers(3))] @ hb._rotation(rng.uniform(0, 2 * math.pi))
        d1 = hb._dist(pts[0], pts[1])
        d2 = hb._dist(hb.normalize_point(m @ pts[0]), hb.normalize_point(m @ pts[1]))
        worst_iso = max(worst_iso, abs(d1 - d2))
        tri = hb._dist(pts[0], pts[1]) + hb._dist(pts[1], pts[2]) - hb._dist(pts[0], pts[2])
        worst_tri = max(worst_tri, -tri)
    checks.append(CheckResult("isometry_invariance", worst_iso <= 1e-8, f"worst {worst_iso:.2e}"))
    checks.append(CheckResult("triangle_inequality", worst_tri <= 1e-8, f"worst {worst_tri:.2e}"))

    p = np.array([math.cosh(1.3), math.sinh(1.3), 0.0])
    worst_drift = 0.0
    for i in range(10_000):
        if i % 4 == 3:
            # recentering translation keeps coordinates bounded so the
            # constraint drift itself stays measurable over the chain
            m = hb._to_origin(p)
        else:
            m = h6.reflection_mats[i % 3]
        p = hb.normalize_point(m @ p)
        worst_drift = max(worst_drift, abs(hb.lorentz_dot(p, p) - 1.0))
    checks.append(
        CheckResult("renormalization_drift", worst_drift < 1e-7, f"drift {worst_drift:.2e}")
    )

    area = _hexagon_area(h6)
    checks.append(
        CheckResult("hexagon_area_pi", abs(area - math.pi) <= 1e-8, f"area {area!r}")
    )

    pr_ok = True
    for ell in (2.0, 6.0, 12.0):
        h = build_hexagon(ell)
        if not (h.rho <= h.pants_radius <= 3.0 * h.rho + 1e-12):
            pr_ok = False
    checks.append(CheckResult("pants_radius_contract", pr_ok))
    return checks


def _hexagon_area(hexa):
    """Gauss-Bonnet over the center fan: sum of (pi - angle sum)."""
    verts = [p.vec for p in hexa.vertices]
    o = hexa.center.vec
    total = 0.0
    for i in range(6):
        a, b = verts[i], verts[(i + 1) % 6]
        total += math.pi - (
            _angle(o, a, b) + _angle(a, b, o) + _angle(b, o, a)
        )
    return total


def _angle(v, p, q):
    t = hb._to_origin(v)
    p2, q2 = t @ p, t @ q
    d = abs(math.atan2(p2[2], p2[1]) - math.atan2(q2[2], q2[1])) % (2 * math.pi)
    return min(d, 2 * math.pi - d)


def _counting_checks():
    from ._bruteforce import brute_force_ball_count

    checks = []
    ok = True
    detail = []
    for ell in (2.0, 4.0, 6.0):
        h = build_hexagon(ell)
        for r in (3.0, 5.0, 8.0):
            depth = math.ceil(1.5 * r / (2.0 * h.c_ell)) + 3
            bf = None
            for extra in range(0, 9, 2):
                bf, cert = brute_force_ball_count(h, r, depth + extra)
                if cert > r:
                    break
            pruned = lat.enumerate_ball(ell, r, hexa=h).count
            if bf != pruned or cert <= r:
                ok = False
                detail.append(f"ell={ell} R={r}: {pruned} vs {bf}")
    checks.append(CheckResult("bruteforce_equivalence", ok, "; ".join(detail)))

    rep = lat.verify_counting_bounds(6.0, 12.0, 0.5)
    checks.append(CheckResult("submultiplicativity", rep.submult_ok))
    checks.append(CheckResult("ancestor_in_shell", rep.ancestor_ok))
    checks.append(CheckResult("shell_sandwich", rep.sandwich_ok))
    checks.append(CheckResult("area_bound", rep.area_ok))

    h6 = build_hexagon(6.0)
    tree = lat.build_orbit_tree(h6, 10.0, store_points=True)
    keys = set()
    dup = False
    for pt in tree.points:
        key = tuple(np.round(pt / 1e-9).astype(np.int64))
        if key in keys:
            dup = True
            break
        keys.add(key)
    checks.append(CheckResult("orbit_points_unique", not dup))
    mono = bool(np.all(tree.side_dist[1:] >= tree.side_dist[tree.parent[1:]] - 1e-12))
    checks.append(CheckResult("side_distance_monotone", mono))

    rates = []
    bracket_ok = True
    for ell in (4.0, 6.0, 8.0):
        de = lat.delta_estimate(ell, 12.0)
        rates.append(de.raw_rate)
        if de.raw_rate > de.certified_upper:
            bracket_ok = False
    checks.append(CheckResult("growth_bracket", bracket_ok, f"raw rates {rates}"))
    checks.append(
        CheckResult("growth_monotone_in_ell", rates[0] < rates[1] < rates[2], f"{rates}")
    )
    return checks


def _peeling_checks():
    from scipy import stats

    checks = []
    # exact uniformity of the sampler over the 15 matchings at g = 2
    counts = {}
    trials = 3000
    for i in range(trials):
        g = pantsgraph.sample_configuration_model(2, trial_seed(424242, 2, i))
        counts[tuple(g.matching)] = counts.get(tuple(g.matching), 0) + 1
    freqs = list(counts.values()) + [0] * (15 - len(counts))
    chi2, p = stats.chisquare(freqs)
    checks.append(
        CheckResult("configuration_model_uniformity", p > 1e-3, f"chi2 p={p:.4f}")
    )

    # the exploration's final matching marginal at g = 3 matches the
    # configuration model (isomorphism-class histogram)
    iso_expected = _matching_class_distribution(3)
    cls_counts = {}
    trials = 2000
    h = build_hexagon(4.0)
    for i in range(trials):
        tr = peeling.explore(3, trial_seed(3131, 3, i), hexa=h)
        key = _matching_class(tr.final_graph.matching, 3)
        cls_counts[key] = cls_counts.get(key, 0) + 1
    obs, exp = [], []
    for key, frac in iso_expected.items():
        obs.append(cls_counts.get(key, 0))
        exp.append(frac * trials)
    chi2, p = stats.chisquare(obs, exp)
    checks.append(
        CheckResult("exploration_marginal_uniform", p > 1e-3, f"chi2 p={p:.4f}")
    )

    # step-1 bad flag matches partner membership, and the R_6k bound holds
    bad_ok = True
    r6k_ok = True
    count_ok = True
    h = build_hexagon(5.0)
    for i in range(200):
        tr = peeling.explore(8, trial_seed(99, 8, i), hexa=h)
        first = tr.steps[0]
        in_base = first.partner_cuff // 3 == tr.base_vertex
        if first.was_bad != in_base:
            bad_ok = False
        if all(not s.was_bad for s in tr.steps[: 6 * tr.k]):
            if tr.r_at(6 * tr.k) > (12 * tr.k + 1) * h.c_ell + 1e-9:
                r6k_ok = False
        # on an all-good prefix the base component is a tree of pants with
        # t + 3 boundary cuffs after t steps
        boundary = 3
        for s in tr.steps[:-1]:
            if s.was_bad or s.step_type != "normal":
                break
            boundary += 1
            if boundary != s.step + 3:
                count_ok = False
                break
    checks.append(CheckResult("step1_bad_flag", bad_ok))
    checks.append(CheckResult("r6k_growth_bound", r6k_ok))
    checks.append(CheckResult("tree_boundary_count", count_ok))

    # exploration-final graphs vs direct sampler: two-sample KS on diameters
    d1, d2 = [], []
    h = build_hexagon(5.0)
    for i in range(120):
        tr = peeling.explore(32, trial_seed(777, 32, i), hexa=h)
        if pantsgraph.is_connected(tr.final_graph):
            d1.append(pantsgraph.graph_diameter(tr.final_graph))
        gg = pantsgraph.sample_configuration_model(32, trial_seed(778, 32, i))
        if pantsgraph.is_connected(gg):
            d2.append(pantsgraph.graph_diameter(gg))
    ks = stats.ks_2samp(d1, d2)
    checks.append(
        CheckResult("exploration_vs_sampler_ks", ks.pvalue > 1e-3, f"p={ks.pvalue:.4f}")
    )
    return checks


def _matching_class(matching, g):
    """Canonical form of the multigraph under vertex relabeling."""
    n = 2 * g - 2
    best = None
    import itertools

    edges0 = []
    seen = set()
    for h in range(6 * g - 6):
        if h in seen:
            continue
        h2 = int(matching[h])
        seen.add(h)
        seen.add(h2)
        edges0.append((h // 3, h2 // 3))
    for perm in itertools.permutations(range(n)):
        edges = sorted(tuple(sorted((perm[a], perm[b]))) for a, b in edges0)
        key = tuple(edges)
        if best is None or key < best:
            best = key
    return best


def _matching_class_distribution(g):
    """Exact configuration-model distribution over isomorphism classes."""
    half = 6 * g - 6
    classes = {}

    def rec(matching, free):
        if not free:
            key = _matching_class(np.array(matching), g)
            classes[key] = classes.get(key, 0) + 1
            return
        a = free[0]
        for b in free[1:]:
            m2 = list(matching)
            m2[a], m2[b] = b, a
            rec(m2, [x for x in free[1:] if x != b])

    rec([-1] * half, list(range(half)))
    total = sum(classes.values())
    return {k: v / total for k, v in classes.items()}


def run_verification_suites(selector: str = "all") -> list:
    """Execute the named invariant batteries; returns VerifyReports."""
    suites = {
        "geometry": _geometry_checks,
        "counting": _counting_checks,
        "peeling": _peeling_checks,
    }
    if selector != "all" and selector not in suites:
        raise HypdiamError(f"unknown suite {selector!r}; pick from {sorted(suites)} or 'all'")
    names = list(suites) if selector == "all" else [selector]
    return [VerifyReport(suite=n, checks=suites[n]()) for n in names]
