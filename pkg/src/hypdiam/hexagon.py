"""Right-angled hexagons with three alternating long sides of length ell/2.

The hexagon is built by explicitly closing a chain of geodesic segments
meeting at right angles.  Only one third of the perimeter is walked
(half long side, short side, half long side); the three-fold symmetry
then closes the figure.  The walk is carried as an accumulated Lorentz
matrix so intermediate coordinates only ever enter multiplicatively,
which keeps relative precision at large ell where naive pointwise
renormalization loses 8+ digits.

The unknown short-side length t is found by bisection on a closure
residual and then validated against the independent identity
cosh(t) = cosh(ell/2) / (cosh(ell/2) - 1), so the construction checks
itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import hyperboloid as hb
from .errors import ClosingError, InputRangeError
from .hyperboloid import (
    GeodesicSegment,
    Isometry,
    Point,
    J,
    lorentz_dot,
    normalize_point,
    normalize_spacelike,
)

ELL_MIN = 0.1
ELL_MAX = 60.0

_E0 = np.array([1.0, 0.0, 0.0])
_U0 = np.array([0.0, 1.0, 0.0])

# the naive six-side walk accumulates form error ~ e^{1.4 ell} * eps, so
# its closure residual is only meaningful below this ell; beyond it the
# equivalent conditioned checks (side lengths, local-frame right angles,
# center equidistance, three-fold symmetry) carry the validation alone
_FULL_CHAIN_CHECK_MAX_ELL = 14.0


@dataclass(frozen=True)
class HexagonGeometry:
    """A right-angled hexagon with its derived constants.

    Sides alternate long (length ell/2, the cuff halves) and short
    (length t, the seams), listed s0, t0, s1, t1, s2, t2 counterclockwise.
    The center sits at (1,0,0) with a three-fold rotational symmetry.
    """

    ell: float
    s: float
    t: float
    c_ell: float
    c_prime: float
    rho: float
    pants_radius: float
    center: Point
    vertices: tuple
    sides: tuple
    reflections: tuple
    # flat arrays for the enumeration hot paths
    s_endpoints: np.ndarray = field(repr=False, default=None)  # (3, 2, 3)
    s_normals: np.ndarray = field(repr=False, default=None)  # (3, 3)
    t_normals: np.ndarray = field(repr=False, default=None)  # (3, 3)
    reflection_mats: np.ndarray = field(repr=False, default=None)  # (3, 3, 3)

    @property
    def seam_length(self):
        return 2.0 * self.t


def _tx(d, dtype=float):
    d = np.asarray(d, dtype=dtype)
    c, s = np.cosh(d), np.sinh(d)
    m = np.eye(3, dtype=dtype)
    m[0, 0] = m[1, 1] = c
    m[0, 1] = m[1, 0] = s
    return m


def _rot(theta, dtype=float):
    theta = np.asarray(theta, dtype=dtype)
    c, s = np.cos(theta), np.sin(theta)
    m = np.eye(3, dtype=dtype)
    m[1, 1] = m[2, 2] = c
    m[1, 2] = -s
    m[2, 1] = s
    return m


# the chain walk runs in extended precision where the platform has it;
# its end state cancels through cosh(ell/4)^2-sized products, and the
# inscribed-disk margin at ell = 40 is only ~2e-9
_WALK_DT = np.longdouble
_TURN = _rot(np.pi / 2.0)


def _walk_third(s, t):
    """Walk half-s, t, half-s with right-angle turns; matrices only.

    Returns (V1, V2, end_matrix): the two visited vertices and the full
    accumulated isometry of the walk frame, in extended precision.
    """
    dt = _WALK_DT
    turn = _rot(np.pi / 2.0, dtype=dt)
    w = _tx(0.5 * s, dtype=dt)
    v1 = w[:, 0].copy()
    w = w @ turn @ _tx(t, dtype=dt)
    v2 = w[:, 0].copy()
    w = w @ turn @ _tx(0.5 * s, dtype=dt)
    return v1, v2, w


def _axes_isometry(s, t):
    """Composition of reflections in the two symmetry axes met by the walk.

    The axis through the starting side midpoint perpendicular to that
    side has normal vector u0; likewise the end state's direction is the
    normal of the axis through the final midpoint.  At closure their
    composition is the rotation by 2*pi/3 about the hexagon center.
    """
    _, _, w = _walk_third(s, t)
    u_end = w[:, 1]
    # far-off scan points can shred the norm below; callers treat nan
    # residuals as out-of-bracket
    with np.errstate(invalid="ignore", divide="ignore"):
        n = u_end / np.sqrt(-lorentz_dot(u_end, u_end))
        refl = np.eye(3, dtype=n.dtype) + 2.0 * np.outer(n, np.asarray(J, dtype=n.dtype) @ n)
        g = refl @ hb._reflection(_U0).astype(n.dtype)
    return g, u_end


def _trace_residual(s, t):
    g, _ = _axes_isometry(s, t)
    return float(np.trace(g))


def _fixed_point(g):
    """Timelike fixed point of an elliptic Lorentz matrix, or None."""
    g = np.asarray(g, dtype=float)
    if not np.all(np.isfinite(g)):
        return None
    w, vecs = np.linalg.eig(g)
    idx = int(np.argmin(np.abs(w - 1.0)))
    v = np.real(vecs[:, idx])
    q = lorentz_dot(v, v)
    if q <= 0:
        return None
    return normalize_point(v)


def _angle_residual(s, t):
    """Angle between the two symmetry axes at their crossing, minus pi/3.

    Evaluated in a frame centered at the crossing point, where both axis
    normals are O(1); this is far better conditioned than the trace when
    the walk excursion is large.  Returns None when the axes fail to
    cross (chain badly open).
    """
    g, u_end = _axes_isometry(s, t)
    o = _fixed_point(g)
    if o is None:
        return None
    to_o = hb._to_origin(o)
    n0 = to_o @ _U0
    n1 = to_o @ np.asarray(u_end, dtype=float)
    n0 = normalize_spacelike(n0)
    n1 = normalize_spacelike(n1)
    cosphi = np.clip(-lorentz_dot(n0, n1), -1.0, 1.0)
    phi = math.acos(cosphi)
    if phi > math.pi / 2.0:
        phi = math.pi - phi
    return phi - math.pi / 3.0


def _solve_t(s):
    """Find the short-side length closing the chain, by bisection."""
    grid = np.geomspace(1e-9, 80.0, 800)
    vals = [_trace_residual(s, g) for g in grid]
    lo = hi = None
    for i in range(len(grid) - 1):
        if vals[i] > 0.0 and vals[i + 1] < 0.0:  # nan compares false
            lo, hi = float(grid[i]), float(grid[i + 1])
            break
    if lo is None:
        raise ClosingError(f"no closing bracket found for s={s}")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _trace_residual(s, mid) > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * max(1.0, mid):
            break
    t = 0.5 * (lo + hi)

    # refine by bisecting the locally-framed axis angle, which stays
    # conditioned when the trace has cancelled through huge entries;
    # bracket around the trace solution and bisect to the double limit
    a = t * (1.0 - 1e-4) if t > 1e-3 else t * 0.5
    b = t * (1.0 + 1e-4) if t > 1e-3 else t * 2.0
    fa = _angle_residual(s, a)
    fb = _angle_residual(s, b)
    grow = 0
    while fa is not None and fb is not None and fa * fb > 0.0 and grow < 20:
        a *= 0.98
        b *= 1.02
        fa = _angle_residual(s, a)
        fb = _angle_residual(s, b)
        grow += 1
    if fa is not None and fb is not None and fa * fb < 0.0:
        for _ in range(120):
            mid = 0.5 * (a + b)
            fm = _angle_residual(s, mid)
            if fm is None or fm == 0.0:
                break
            if (fm > 0.0) == (fa > 0.0):
                a, fa = mid, fm
            else:
                b, fb = mid, fm
            if b - a <= 1e-16 * max(1.0, mid):
                break
        t = 0.5 * (a + b)
    return t


def _stable_arccosh1p(u):
    """arccosh(1 + u) for u >= 0 without cancellation."""
    return math.log1p(u + math.sqrt(u * (2.0 + u)))


def _atanh_tanh_cosh(a, b):
    """atanh(tanh(a) * cosh(b)), stable when the product crowds 1.

    1 - tanh(a)cosh(b) = u1 - u2 + u1*u2 with u1 = 1 - tanh(a) and
    u2 = cosh(b) - 1, both evaluated cancellation-free; their difference
    loses at most a couple of bits on this hexagon's parameter family.
    """
    u1 = 2.0 / (math.expm1(2.0 * a) + 2.0)
    u2 = 2.0 * math.sinh(0.5 * b) ** 2
    one_minus = u1 - u2 + u1 * u2
    if one_minus <= 0.0:
        raise ClosingError(f"tanh({a})*cosh({b}) >= 1; degenerate hexagon data")
    return 0.5 * (math.log(2.0 - one_minus) - math.log(one_minus))


def _local_angle(v, a, b):
    """Interior angle at v between the segments toward a and b."""
    t = hb._to_origin(v)
    a2 = t @ a
    b2 = t @ b
    ang_a = math.atan2(a2[2], a2[1])
    ang_b = math.atan2(b2[2], b2[1])
    d = abs(ang_a - ang_b) % (2.0 * math.pi)
    return min(d, 2.0 * math.pi - d)


def _geodesic_normal_local(a, b):
    """Carrier normal of the geodesic through a and b, via a local frame.

    Conditioned even when a and b are mutually close but far from the
    coordinate origin (the t-sides at large ell).
    """
    t = hb._to_origin(a)
    b2 = t @ b
    w = hb.lcross(_E0, b2)
    w = normalize_spacelike(w)
    t_inv = J @ t.T @ J
    return normalize_spacelike(t_inv @ w)


def _segment_max_from(q, tri):
    """max over a geodesic triangle of distance to q = max over its corners."""
    return float(np.max(np.arccosh(np.maximum(tri @ (J @ q), 1.0))))


def _pants_radius_bound(rho, vertices, t_normals, levels=4):
    """Certified upper bound on the distance from the hexagon center to
    any point of the doubled-hexagon pants.

    Front copy: bounded by the circumradius.  Mirror copy: for x in the
    mirror, d(center, x) <= d(q_tau, x') for any seam tau, where x' is
    the front preimage and q_tau the reflected center (the straightened
    path crosses seam tau once; the union of the hexagon with one mirror
    is convex).  Distance to q_tau is convex, so its max over a geodesic
    triangle sits at a corner; subdividing the hexagon into triangles
    and taking, per cell, the best seam gives a certified bound on the
    max-min, hence on the true mirror radius.
    """
    qs = [hb._reflection(n) @ _E0 for n in t_normals]
    center = _E0.copy()
    tris = []
    for i in range(6):
        tris.append(np.array([center, vertices[i], vertices[(i + 1) % 6]]))
    for _ in range(levels):
        finer = []
        for tri in tris:
            m01 = normalize_point(tri[0] + tri[1])
            m12 = normalize_point(tri[1] + tri[2])
            m20 = normalize_point(tri[2] + tri[0])
            finer.append(np.array([tri[0], m01, m20]))
            finer.append(np.array([tri[1], m12, m01]))
            finer.append(np.array([tri[2], m20, m12]))
            finer.append(np.array([m01, m12, m20]))
        tris = finer
    back = 0.0
    for tri in tris:
        cell = min(_segment_max_from(q, tri) for q in qs)
        back = max(back, cell)
    return max(rho, back)


def _full_chain_closure(s, t):
    """Residual of the naive six-side walk; meaningful for moderate ell."""
    w = np.eye(3)
    for i in range(6):
        w = w @ _tx(s if i % 2 == 0 else t) @ _TURN
    p = w[:, 0]
    return float(np.linalg.norm(p - _E0) + np.linalg.norm(w[:, 1] - _U0))


def build_hexagon(ell: float) -> HexagonGeometry:
    """Construct the hexagon for cuff length ell; all constants derived."""
    ell = float(ell)
    if not (ELL_MIN <= ell <= ELL_MAX) or not math.isfinite(ell):
        raise InputRangeError(f"ell={ell} outside supported range [{ELL_MIN}, {ELL_MAX}]")
    s = 0.5 * ell
    t = _solve_t(s)

    # independent identity check: the chain solution must satisfy
    # cosh(t) * (cosh(s) - 1) = cosh(s)
    c = math.cosh(s)
    t_ref = _stable_arccosh1p(1.0 / (c - 1.0))
    if abs(t - t_ref) > 1e-9 * t + 1e-15:
        raise ClosingError(
            f"chain-closed t={t!r} disagrees with the hexagon identity ({t_ref!r})"
        )

    g, u_end = _axes_isometry(s, t)
    o = _fixed_point(g)
    if o is None:
        raise ClosingError("symmetry axes do not cross; chain did not close")

    v1_raw, v2_raw, _ = _walk_third(s, t)
    v1_raw = np.asarray(v1_raw, dtype=float)
    v2_raw = np.asarray(v2_raw, dtype=float)
    p0_raw = _E0

    # center-to-side distances: c_ell measured on the walked model (the
    # first side's carrier is exactly the x2=0 geodesic); both are also
    # reproduced from the right-triangle relations, which stay conditioned
    # when the hexagon is long and thin
    c_ell = float(math.asinh(abs(lorentz_dot(o, np.array([0.0, 0.0, 1.0])))))
    c_ell_alg = _atanh_tanh_cosh(0.5 * t, 0.5 * s)
    if abs(c_ell - c_ell_alg) > 1e-9 * max(1.0, c_ell):
        raise ClosingError(
            f"measured c_ell={c_ell} disagrees with triangle relations ({c_ell_alg})"
        )
    c_prime = _atanh_tanh_cosh(0.5 * s, 0.5 * t)
    if 2.0 * max(s, t) <= 28.0:
        # direct model measurement, where the short-side carrier is
        # numerically recoverable from the walked vertices
        n_t_raw = _geodesic_normal_local(v1_raw, v2_raw)
        c_prime_meas = float(math.asinh(abs(lorentz_dot(o, n_t_raw))))
        if abs(c_prime - c_prime_meas) > 1e-9 * max(1.0, c_prime):
            raise ClosingError(
                f"measured c_prime={c_prime_meas} disagrees with {c_prime}"
            )
    rho = float(np.arccosh(max(lorentz_dot(o, v1_raw), 1.0)))

    if min(c_ell, c_prime) <= 0.5 * math.log(3.0):
        raise ClosingError("inscribed-disk bound violated; construction inconsistent")

    # canonical frame: center at the origin, side-0 foot on the +x axis,
    # counterclockwise labels
    k = hb._to_origin(o)
    p0_c = normalize_point(k @ p0_raw)
    k = _rot(-math.atan2(p0_c[2], p0_c[1])) @ k
    v1_c = hb.normalize_point_precise(k @ v1_raw)
    if math.atan2(v1_c[2], v1_c[1]) < 0.0:
        k = np.diag([1.0, 1.0, -1.0]) @ k
        v1_c = hb.normalize_point_precise(k @ v1_raw)
    v2_c = hb.normalize_point_precise(k @ v2_raw)

    # six vertices from the two walked ones and the exact 2pi/3 rotation;
    # v1 sits at angle +alpha (end of side s0), v2 at 2pi/3 - alpha, so
    # counterclockwise from -alpha the ring is r^2 v2, v1, v2, r v1, r v2, r^2 v1
    rot3 = _rot(2.0 * math.pi / 3.0)
    r_v1, r_v2 = rot3 @ v1_c, rot3 @ v2_c
    rr_v1, rr_v2 = rot3 @ r_v1, rot3 @ r_v2
    vertices = [
        hb.normalize_point_precise(v) for v in (rr_v2, v1_c, v2_c, r_v1, r_v2, rr_v1)
    ]

    # side normals: formula carriers for the long sides (drives the
    # reflections), locally-derived carriers for the short sides
    sh, ch = math.sinh(c_ell), math.cosh(c_ell)
    s_normals = np.array(
        [
            [sh, ch * math.cos(th), ch * math.sin(th)]
            for th in (0.0, 2.0 * math.pi / 3.0, 4.0 * math.pi / 3.0)
        ]
    )
    shp, chp = math.sinh(c_prime), math.cosh(c_prime)
    t_normals = np.array(
        [
            [shp, chp * math.cos(th), chp * math.sin(th)]
            for th in (math.pi / 3.0, math.pi, 5.0 * math.pi / 3.0)
        ]
    )

    points = [Point(v) for v in vertices]
    sides = []
    for i in range(3):
        sides.append(GeodesicSegment(points[2 * i], points[2 * i + 1], s_normals[i]))
        sides.append(
            GeodesicSegment(points[2 * i + 1], points[(2 * i + 2) % 6], t_normals[i])
        )
    reflections = tuple(Isometry(hb._reflection(n)) for n in s_normals)

    hexa = HexagonGeometry(
        ell=ell,
        s=s,
        t=float(t),
        c_ell=c_ell,
        c_prime=c_prime,
        rho=rho,
        pants_radius=_pants_radius_bound(rho, vertices, t_normals),
        center=Point(_E0.copy()),
        vertices=tuple(points),
        sides=tuple(sides),
        reflections=reflections,
        s_endpoints=np.array(
            [[vertices[2 * i], vertices[2 * i + 1]] for i in range(3)]
        ),
        s_normals=s_normals,
        t_normals=t_normals,
        reflection_mats=np.array([r.m for r in reflections]),
    )
    _validate(hexa)
    return hexa


def _validate(hexa: HexagonGeometry):
    verts = [p.vec for p in hexa.vertices]
    # interior angles: adjacent sides both pass through the shared vertex
    # (endpoint-on-carrier is checked by the segments), so the angle is
    # right iff the carrier normals are Lorentz-orthogonal
    for i in range(6):
        na = hexa.sides[i].carrier
        nb = hexa.sides[(i + 1) % 6].carrier
        cosang = abs(lorentz_dot(na, nb))
        if cosang > 1e-8 * max(1.0, float(np.max(np.abs(na))) * float(np.max(np.abs(nb)))):
            raise ClosingError(f"sides {i},{i+1} meet at cos(angle)={cosang}, not pi/2")
    # side lengths; vertex coordinates at scale x0 bound what doubles can
    # certify to ~ x0^2 eps (and distances additionally pay 1/sinh(d)),
    # so the 1e-9 figure applies verbatim only while x0 is moderate
    scale = max(p.x0 for p in hexa.vertices)
    for i in range(3):
        ls = hexa.sides[2 * i].length
        lt = hexa.sides[2 * i + 1].length
        tol_s = max(1e-9 * max(1.0, hexa.s), 3e-15 * scale * scale)
        tol_t = max(
            1e-9 * max(1.0, hexa.t),
            3e-15 * scale * scale,
            1e-14 * scale * scale / math.sinh(hexa.t),
        )
        if abs(ls - hexa.s) > tol_s:
            raise ClosingError(f"long side {i} has length {ls}, expected {hexa.s}")
        if abs(lt - hexa.t) > tol_t:
            raise ClosingError(f"short side {i} has length {lt}, expected {hexa.t}")
    # equidistance of the center from each side family
    o = hexa.center.vec
    for n in hexa.s_normals:
        if abs(math.asinh(abs(lorentz_dot(o, n))) - hexa.c_ell) > 1e-9:
            raise ClosingError("center is not equidistant from the long sides")
    for n in hexa.t_normals:
        if abs(math.asinh(abs(lorentz_dot(o, n))) - hexa.c_prime) > 1e-9:
            raise ClosingError("center is not equidistant from the short sides")
    # three-fold symmetry: rotating the vertex ring by two slots is exact;
    # float64 transport leaves relative vertex noise ~ x0^2 eps, so the
    # coordinatewise tolerance grows like x0^3
    rot3 = _rot(2.0 * math.pi / 3.0)
    sym_tol = max(1e-8, 5e-16 * scale**3)
    for i in range(6):
        img = hb.normalize_point_precise(rot3 @ verts[i])
        if float(np.max(np.abs(img - verts[(i + 2) % 6]))) > sym_tol:
            raise ClosingError("vertex ring is not three-fold symmetric")
    # six-side chain closure, where doubles can resolve it (the noise
    # floor of the naive walk grows with the longer side family)
    if 2.0 * max(hexa.s, hexa.t) <= _FULL_CHAIN_CHECK_MAX_ELL:
        resid = _full_chain_closure(hexa.s, hexa.t)
        if resid > 1e-8:
            raise ClosingError(f"six-side chain closure residual {resid} exceeds 1e-8")


# ---------------------------------------------------------------------------
# operations on a built hexagon
# ---------------------------------------------------------------------------


def seam_length(hexa: HexagonGeometry) -> float:
    """Length of the shortest closed geodesic of the doubled hexagon (2t)."""
    return hexa.seam_length


def circumradius(hexa: HexagonGeometry) -> float:
    """Max distance from the center to the hexagon (attained at vertices)."""
    return hexa.rho


def pants_radius(hexa: HexagonGeometry) -> float:
    """Upper bound on the distance from the pants midpoint to any pants point."""
    return hexa.pants_radius
