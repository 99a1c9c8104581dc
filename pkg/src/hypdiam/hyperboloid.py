"""Hyperbolic plane geometry in the hyperboloid model.

Points live on the upper sheet of x0^2 - x1^2 - x2^2 = 1; isometries are
3x3 matrices preserving the Lorentz form J = diag(1,-1,-1).  Geodesics are
encoded by unit spacelike normal vectors n with <n,n> = -1; the geodesic
is the set of points Lorentz-orthogonal to n.

Everything here is pure and allocation-light.  The ``_*`` helpers accept
numpy arrays (batched in the leading axes) and are used directly by the
enumeration hot paths; the dataclass layer on top gives validated,
immutable values for the public API.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputRangeError

J = np.diag([1.0, -1.0, -1.0])
ORIGIN_VEC = np.array([1.0, 0.0, 0.0])

# cosh overflows near 710 but precision degrades long before; every
# experiment in this package keeps radii <= 30, so reject early.
MAX_DISTANCE = 40.0

_POINT_TOL = 1e-9
_FORM_TOL = 1e-9


def lorentz_dot(x, y):
    """Lorentz pairing <x,y> = x0*y0 - x1*y1 - x2*y2 (batched on leading axes)."""
    return x[..., 0] * y[..., 0] - x[..., 1] * y[..., 1] - x[..., 2] * y[..., 2]


def normalize_point(x):
    """Rescale onto the hyperboloid sheet; used after every isometry application."""
    q = lorentz_dot(x, x)
    out = x / np.sqrt(np.abs(q))[..., None]
    # the upper sheet has x0 >= 1
    return np.where(out[..., 0:1] < 0, -out, out)


def normalize_point_precise(x):
    """Like normalize_point but with the form evaluated in extended precision.

    At coordinate scale X the double-precision form carries X^2 * eps of
    noise, which rescales the point and shifts subsequently measured
    distances by ~X^2 * eps; construction-time points go through this
    variant instead.
    """
    xl = np.asarray(x, dtype=np.longdouble)
    q = xl[..., 0] * xl[..., 0] - xl[..., 1] * xl[..., 1] - xl[..., 2] * xl[..., 2]
    out = np.asarray(xl / np.sqrt(np.abs(q))[..., None], dtype=float)
    return np.where(out[..., 0:1] < 0, -out, out)


def normalize_spacelike(n):
    """Rescale a spacelike vector to <n,n> = -1."""
    q = -lorentz_dot(n, n)
    return n / np.sqrt(q)[..., None]


def lcross(a, b):
    """Lorentz cross product: <lcross(a,b), c> = det[a, b, c]."""
    return J @ np.cross(a, b)


def _dist(p, q):
    """arccosh of the clamped pairing; batched."""
    return np.arccosh(np.maximum(lorentz_dot(p, q), 1.0))


def _dist_to_geodesic(p, n):
    """Distance from point p to the geodesic with unit spacelike normal n."""
    return np.arcsinh(np.abs(lorentz_dot(p, n)))


def _foot_on_geodesic(p, n):
    """Perpendicular foot of p on the geodesic with normal n."""
    # p + <p,n> n is Lorentz-orthogonal to n; renormalize to the sheet
    f = p + lorentz_dot(p, n)[..., None] * n
    return normalize_point(f)


def _dist_to_segment(p, a, b, n):
    """Distance from p to the geodesic segment [a, b] with carrier normal n.

    Returns the perpendicular-foot distance when the foot lies between a
    and b on the carrier, else the nearer endpoint distance.  Batched on
    the leading axes of all four arguments.
    """
    da = _dist(p, a)
    db = _dist(p, b)
    f = _foot_on_geodesic(p, n)
    dab = _dist(a, b)
    inside = (_dist(a, f) + _dist(f, b)) <= dab + 1e-9
    dfoot = _dist(p, f)
    return np.where(inside, dfoot, np.minimum(da, db))


def _reflection(n):
    """Lorentz reflection fixing the geodesic with unit spacelike normal n."""
    return np.eye(3) + 2.0 * np.outer(n, J @ n)


def _translation_x(d):
    """Translation by distance d along the geodesic x2 = 0 through the origin."""
    c, s = np.cosh(d), np.sinh(d)
    return np.array([[c, s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def _rotation(theta):
    """Rotation by theta about the origin (1,0,0)."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def _to_origin(p):
    """Isometry (pure translation) mapping point p to the origin."""
    d = float(np.arccosh(max(p[0], 1.0)))
    if d < 1e-15:
        return np.eye(3)
    theta = float(np.arctan2(p[2], p[1]))
    rot = _rotation(theta)
    return rot @ _translation_x(-d) @ rot.T


def _is_lorentz(m, tol=_FORM_TOL):
    return float(np.max(np.abs(m.T @ J @ m - J))) <= tol


# ---------------------------------------------------------------------------
# validated value types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Point:
    """A point on the upper hyperboloid sheet."""

    vec: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vec, dtype=float)
        object.__setattr__(self, "vec", v)
        if v.shape != (3,):
            raise InputRangeError(f"point must have 3 coordinates, got {v.shape}")
        # evaluating the form at coordinates of size x0 carries x0^2 * eps
        # of roundoff, so the tolerance must scale with it
        tol = max(_POINT_TOL, 1e-13 * v[0] * v[0])
        if abs(lorentz_dot(v, v) - 1.0) > tol or v[0] < 1.0 - _POINT_TOL:
            raise InputRangeError(f"not a hyperboloid point: {v}")

    @property
    def x0(self):
        return float(self.vec[0])

    @property
    def x1(self):
        return float(self.vec[1])

    @property
    def x2(self):
        return float(self.vec[2])


ORIGIN = Point(ORIGIN_VEC.copy())


@dataclass(frozen=True)
class Isometry:
    """A Lorentz matrix; reflections have determinant -1."""

    m: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.m, dtype=float)
        object.__setattr__(self, "m", m)
        if m.shape != (3, 3):
            raise InputRangeError("isometry must be a 3x3 matrix")
        scale = float(np.max(np.abs(m)))
        if not _is_lorentz(m, tol=max(_FORM_TOL, 1e-13 * scale * scale)):
            raise InputRangeError("matrix does not preserve the Lorentz form")

    @property
    def det(self):
        return float(np.linalg.det(self.m))

    def __matmul__(self, other: "Isometry") -> "Isometry":
        return Isometry(self.m @ other.m)

    def apply(self, p: Point) -> Point:
        return Point(normalize_point(self.m @ p.vec))


@dataclass(frozen=True)
class GeodesicSegment:
    """A geodesic segment with its carrier normal vector."""

    a: Point
    b: Point
    carrier: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.carrier is None:
            object.__setattr__(self, "carrier", geodesic_through(self.a, self.b))
        n = np.asarray(self.carrier, dtype=float)
        object.__setattr__(self, "carrier", n)
        nscale = float(np.max(np.abs(n)))
        if abs(lorentz_dot(n, n) + 1.0) > max(1e-8, 1e-13 * nscale * nscale):
            raise InputRangeError("carrier is not a unit spacelike vector")
        for p in (self.a, self.b):
            if abs(lorentz_dot(p.vec, n)) > 1e-8 * max(1.0, p.x0 * nscale):
                raise InputRangeError("segment endpoint does not lie on carrier")

    @property
    def length(self):
        return float(_dist(self.a.vec, self.b.vec))


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------


def distance(p: Point, q: Point) -> float:
    """Hyperbolic distance, symmetric and zero iff p == q up to roundoff."""
    return float(_dist(p.vec, q.vec))


def geodesic_through(p: Point, q: Point) -> np.ndarray:
    """Unit spacelike normal of the geodesic through two distinct points."""
    n = lcross(p.vec, q.vec)
    q2 = -lorentz_dot(n, n)
    if q2 <= 0:
        raise InputRangeError("points are too close to span a geodesic")
    return n / np.sqrt(q2)


def reflection_in_geodesic(carrier) -> Isometry:
    """Reflection in the geodesic with the given unit spacelike normal."""
    n = np.asarray(carrier, dtype=float)
    if n.shape != (3,) or abs(lorentz_dot(n, n) + 1.0) > 1e-8:
        raise InputRangeError("carrier must satisfy <n,n> = -1")
    return Isometry(_reflection(n))


def distance_point_to_segment(p: Point, seg: GeodesicSegment) -> float:
    """Min distance from p to any point of the segment."""
    if distance(seg.a, seg.b) < 1e-12:
        return distance(p, seg.a)
    return float(_dist_to_segment(p.vec, seg.a.vec, seg.b.vec, seg.carrier))


def translation_along_x(d: float) -> Isometry:
    if abs(d) > MAX_DISTANCE:
        raise InputRangeError(f"translation length {d} exceeds the cap {MAX_DISTANCE}")
    return Isometry(_translation_x(d))


def rotation_about_origin(theta: float) -> Isometry:
    return Isometry(_rotation(theta))
