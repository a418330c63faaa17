"""Planar primitives with robust predicates.

Points, disks, axis-aligned boxes and Euclidean balls, plus the three
geometric tests everything else is built on: circumscribed disks of
triangles, membership in a disk, and emptiness of the two half-disks
spanned by a segment's diametral disk.

Orientation and in-circle tests are evaluated with floating point first
and fall back to exact rational arithmetic whenever the floating-point
result is smaller than a computed forward error bound, so a sign is never
reported unless it is certain.  Ties (exactly cocircular or exactly
collinear configurations) are therefore detected exactly, never by an
epsilon threshold.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Optional, Tuple

__all__ = [
    "Point2",
    "Disk",
    "AxisBox",
    "Ball",
    "HalfDiskStatus",
    "DegenerateTriangle",
    "orient_sign",
    "incircle_sign",
    "circumdisk",
    "in_disk",
    "empty_half_disk",
]

# Half-ulp of 1.0; error-bound coefficients follow the standard adaptive
# predicate analysis for expressions of the form (a-b)(c-d) +/- (e-f)(g-h).
_EPS = sys.float_info.epsilon / 2.0
_ORIENT_BOUND = (3.0 + 16.0 * _EPS) * _EPS
_INCIRCLE_BOUND = (10.0 + 96.0 * _EPS) * _EPS


class DegenerateTriangle(ValueError):
    """Raised when a triple of points is collinear or not pairwise distinct."""


class HalfDiskStatus(Enum):
    """Emptiness classification of the two half-disks over a segment."""

    UPPER_EMPTY = "UpperEmpty"
    LOWER_EMPTY = "LowerEmpty"
    BOTH = "Both"
    NEITHER = "Neither"


@dataclass(frozen=True, slots=True)
class Point2:
    """Immutable planar point with finite coordinates."""

    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite coordinates ({self.x}, {self.y})")


@dataclass(frozen=True, slots=True)
class Disk:
    """Closed disk; ``support`` retains the defining triple of a circumdisk.

    When ``support`` is present, membership queries go through the exact
    four-point in-circle determinant instead of a distance comparison.
    """

    center: Point2
    radius: float
    support: Optional[Tuple[Point2, Point2, Point2]] = None

    def __post_init__(self) -> None:
        if not (self.radius >= 0.0 and math.isfinite(self.radius)):
            raise ValueError(f"radius must be finite and >= 0, got {self.radius}")


@dataclass(frozen=True, slots=True)
class AxisBox:
    """Axis-aligned square box: center + [-side/2, side/2]^2."""

    center: Point2
    side: float

    def __post_init__(self) -> None:
        if not (self.side > 0.0 and math.isfinite(self.side)):
            raise ValueError(f"side must be finite and > 0, got {self.side}")

    @property
    def xmin(self) -> float:
        return self.center.x - self.side / 2.0

    @property
    def xmax(self) -> float:
        return self.center.x + self.side / 2.0

    @property
    def ymin(self) -> float:
        return self.center.y - self.side / 2.0

    @property
    def ymax(self) -> float:
        return self.center.y + self.side / 2.0

    def contains(self, p: Point2) -> bool:
        return self.xmin <= p.x <= self.xmax and self.ymin <= p.y <= self.ymax


@dataclass(frozen=True, slots=True)
class Ball:
    """Closed Euclidean disk used for trace extraction."""

    center: Point2
    radius: float

    def __post_init__(self) -> None:
        if not (self.radius > 0.0 and math.isfinite(self.radius)):
            raise ValueError(f"radius must be finite and > 0, got {self.radius}")

    def contains(self, x: float, y: float) -> bool:
        return (x - self.center.x) ** 2 + (y - self.center.y) ** 2 <= self.radius**2


def _sign(v) -> int:
    return int(v > 0) - int(v < 0)


def _orient_exact(ax, ay, bx, by, cx, cy) -> int:
    F = Fraction
    det = (F(ax) - F(cx)) * (F(by) - F(cy)) - (F(ay) - F(cy)) * (F(bx) - F(cx))
    return _sign(det)


def orient_sign(ax: float, ay: float, bx: float, by: float, cx: float, cy: float) -> int:
    """Sign of the orientation determinant of (a, b, c).

    +1 when c lies strictly left of the directed line a -> b, -1 when
    strictly right, 0 when exactly collinear.  Exact: the floating result
    is trusted only above its forward error bound.
    """
    detleft = (ax - cx) * (by - cy)
    detright = (ay - cy) * (bx - cx)
    det = detleft - detright
    if detleft > 0.0:
        if detright <= 0.0:
            return _sign(det)
        detsum = detleft + detright
    elif detleft < 0.0:
        if detright >= 0.0:
            return _sign(det)
        detsum = -detleft - detright
    else:
        return _sign(-detright)
    if det >= _ORIENT_BOUND * detsum or -det >= _ORIENT_BOUND * detsum:
        return _sign(det)
    return _orient_exact(ax, ay, bx, by, cx, cy)


def _incircle_exact(ax, ay, bx, by, cx, cy, dx, dy) -> int:
    F = Fraction
    adx = F(ax) - F(dx)
    ady = F(ay) - F(dy)
    bdx = F(bx) - F(dx)
    bdy = F(by) - F(dy)
    cdx = F(cx) - F(dx)
    cdy = F(cy) - F(dy)
    det = (
        (adx * adx + ady * ady) * (bdx * cdy - cdx * bdy)
        + (bdx * bdx + bdy * bdy) * (cdx * ady - adx * cdy)
        + (cdx * cdx + cdy * cdy) * (adx * bdy - bdx * ady)
    )
    return _sign(det)


def incircle_sign(
    ax: float, ay: float, bx: float, by: float, cx: float, cy: float, dx: float, dy: float
) -> int:
    """Sign of the 4-point in-circle determinant.

    For (a, b, c) in counterclockwise order: +1 when d is strictly inside
    their circumcircle, -1 when strictly outside, 0 when exactly
    cocircular.  For clockwise (a, b, c) the sign is flipped.
    """
    adx = ax - dx
    ady = ay - dy
    bdx = bx - dx
    bdy = by - dy
    cdx = cx - dx
    cdy = cy - dy

    bdxcdy = bdx * cdy
    cdxbdy = cdx * bdy
    alift = adx * adx + ady * ady

    cdxady = cdx * ady
    adxcdy = adx * cdy
    blift = bdx * bdx + bdy * bdy

    adxbdy = adx * bdy
    bdxady = bdx * ady
    clift = cdx * cdx + cdy * cdy

    det = (
        alift * (bdxcdy - cdxbdy)
        + blift * (cdxady - adxcdy)
        + clift * (adxbdy - bdxady)
    )
    permanent = (
        (abs(bdxcdy) + abs(cdxbdy)) * alift
        + (abs(cdxady) + abs(adxcdy)) * blift
        + (abs(adxbdy) + abs(bdxady)) * clift
    )
    errbound = _INCIRCLE_BOUND * permanent
    if det > errbound or -det > errbound:
        return _sign(det)
    return _incircle_exact(ax, ay, bx, by, cx, cy, dx, dy)


def circumdisk(a: Point2, b: Point2, c: Point2) -> Disk:
    """Circumscribed disk of triangle (a, b, c).

    Permutation-invariant: the three points are put in lexicographic order
    before any arithmetic, so every ordering of the same triple yields the
    bitwise-identical disk.  The defining triple is retained in ``support``
    for exact membership tests.
    """
    p, q, s = sorted(((a.x, a.y), (b.x, b.y), (c.x, c.y)))
    if orient_sign(p[0], p[1], q[0], q[1], s[0], s[1]) == 0:
        raise DegenerateTriangle(f"collinear or coincident points {a}, {b}, {c}")
    # Translate so p is the origin: classic stable circumcenter formula.
    qx, qy = q[0] - p[0], q[1] - p[1]
    sx, sy = s[0] - p[0], s[1] - p[1]
    d = 2.0 * (qx * sy - qy * sx)
    q2 = qx * qx + qy * qy
    s2 = sx * sx + sy * sy
    ux = (sy * q2 - qy * s2) / d
    uy = (qx * s2 - sx * q2) / d
    return Disk(
        center=Point2(p[0] + ux, p[1] + uy),
        radius=math.hypot(ux, uy),
        support=(Point2(*p), Point2(*q), Point2(*s)),
    )


def in_disk(p: Point2, d: Disk, strict: bool) -> bool:
    """Membership of p in the disk, strict or closed.

    A disk carrying its support triple is tested through the exact
    four-point in-circle determinant (orientation-corrected); a bare disk
    falls back to a distance comparison against the stored radius.
    """
    if d.support is not None:
        a, b, c = d.support
        orient = orient_sign(a.x, a.y, b.x, b.y, c.x, c.y)
        inc = incircle_sign(a.x, a.y, b.x, b.y, c.x, c.y, p.x, p.y) * orient
        return inc > 0 if strict else inc >= 0
    dist = math.hypot(p.x - d.center.x, p.y - d.center.y)
    return dist < d.radius if strict else dist <= d.radius


def _diametral_dot_sign(xx, xy, yx, yy, zx, zy) -> int:
    """Sign of (x - z).(y - z): <= 0 iff z is in the closed diametral disk of [x, y]."""
    t1 = (xx - zx) * (yx - zx)
    t2 = (xy - zy) * (yy - zy)
    dot = t1 + t2
    mag = abs(t1) + abs(t2)
    if dot >= _ORIENT_BOUND * mag or -dot >= _ORIENT_BOUND * mag:
        return _sign(dot)
    F = Fraction
    exact = (F(xx) - F(zx)) * (F(yx) - F(zx)) + (F(xy) - F(zy)) * (F(yy) - F(zy))
    return _sign(exact)


def empty_half_disk(x: Point2, y: Point2, pts: Iterable[Point2]) -> HalfDiskStatus:
    """Classify emptiness of the two half-disks of the diametral disk of [x, y].

    The disk of diameter [x, y] is split by the line through x and y; the
    upper half is the side where the orientation determinant of (x, y, z)
    is >= 0.  Membership is closed (boundary points occupy), and a point
    exactly on the splitting line occupies both halves.
    """
    if x == y:
        raise ValueError("segment endpoints must be distinct")
    upper_occupied = False
    lower_occupied = False
    for z in pts:
        if _diametral_dot_sign(x.x, x.y, y.x, y.y, z.x, z.y) > 0:
            continue
        side = orient_sign(x.x, x.y, y.x, y.y, z.x, z.y)
        if side >= 0:
            upper_occupied = True
        if side <= 0:
            lower_occupied = True
        if upper_occupied and lower_occupied:
            return HalfDiskStatus.NEITHER
    if upper_occupied:
        return HalfDiskStatus.LOWER_EMPTY
    if lower_occupied:
        return HalfDiskStatus.UPPER_EMPTY
    return HalfDiskStatus.BOTH
