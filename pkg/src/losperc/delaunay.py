"""Deterministic incremental Delaunay triangulation and derived queries.

Bowyer-Watson insertion over a ghost-vertex boundary (hull edges face
"infinite" ghost triangles, so no finite super-triangle ever distorts the
result).  Points are inserted in a canonical order (Morton code of
quantized coordinates, then lexicographic), which makes the output a pure
function of the input point multiset: feeding the same points in any
order produces the identical structure.

Predicates run through floating-point filters with exact rational
fallback, so empty-circumcircle decisions and collinearity are never
epsilon-based.  An exactly cocircular insertion does not flip the
existing diagonal (strict-conflict rule), giving a unique, reproducible
triangulation even on tie configurations.

On top of the triangulation: counterclockwise ranking of edges around a
vertex (the rank is the mark index used by the connection model),
stabilization radii of axis boxes (how far circumdisks of overlapping
triangles protrude), edge traces inside Euclidean balls, and clipped
total edge length in a region.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .geometry import (
    AxisBox,
    Ball,
    Disk,
    Point2,
    _incircle_exact,
    _orient_exact,
    _EPS,
    circumdisk,
    orient_sign,
)

__all__ = [
    "EdgeKey",
    "TraceGraph",
    "Triangulation",
    "TooFewPoints",
    "AllCollinear",
    "DuplicatePoint",
    "build",
    "build_xy",
    "incident_edges_ccw",
    "stabilization_radius",
    "trace_in_ball",
    "total_edge_length",
    "dump_csv",
]

_ORIENT_BOUND = (3.0 + 16.0 * _EPS) * _EPS
_INCIRCLE_BOUND = (10.0 + 96.0 * _EPS) * _EPS

_GHOST = -1


class TooFewPoints(ValueError):
    """Raised when fewer than three points are supplied."""


class AllCollinear(ValueError):
    """Raised when every input point lies on one line."""


class DuplicatePoint(ValueError):
    """Raised when the input contains coincident points."""


@dataclass(frozen=True, slots=True)
class EdgeKey:
    """Undirected edge between vertex indices u < v, with its length."""

    u: int
    v: int
    length: float

    def __post_init__(self) -> None:
        if not self.u < self.v:
            raise ValueError(f"edge indices must satisfy u < v, got ({self.u}, {self.v})")

    @property
    def pair(self) -> Tuple[int, int]:
        return (self.u, self.v)


@dataclass(frozen=True, slots=True)
class TraceGraph:
    """Edges with at least one endpoint inside a ball.

    ``vertices`` lists the vertex indices inside the ball; ``edges`` may
    additionally reference outside endpoints (outer edges).
    """

    vertices: Tuple[int, ...]
    edges: Tuple[EdgeKey, ...]

    def node_set(self) -> frozenset:
        nodes = set(self.vertices)
        for e in self.edges:
            nodes.add(e.u)
            nodes.add(e.v)
        return frozenset(nodes)


@dataclass(eq=False)
class Triangulation:
    """Finished triangulation; immutable by convention, shareable across readers.

    ``vertices`` are stored in the canonical insertion order (a pure
    function of the point multiset).  ``triangles`` are counterclockwise
    vertex triples; ``neighbors[i][k]`` is the triangle across the edge
    opposite vertex ``triangles[i][k]`` (-1 on the hull).  ``hull`` is the
    counterclockwise boundary vertex cycle, collinear boundary vertices
    included.
    """

    vertices: Tuple[Point2, ...]
    triangles: Tuple[Tuple[int, int, int], ...]
    neighbors: Tuple[Tuple[int, int, int], ...]
    hull: Tuple[int, ...]
    edges: Tuple[EdgeKey, ...]
    _xy: np.ndarray = field(repr=False)
    _adj: Optional[Dict[int, List[int]]] = field(default=None, repr=False)
    _edge_map: Optional[Dict[Tuple[int, int], EdgeKey]] = field(default=None, repr=False)

    @property
    def xy(self) -> np.ndarray:
        """(n, 2) float array of vertex coordinates (canonical order)."""
        return self._xy

    def edge_lookup(self) -> Dict[Tuple[int, int], EdgeKey]:
        if self._edge_map is None:
            self._edge_map = {e.pair: e for e in self.edges}
        return self._edge_map

    def adjacency(self) -> Dict[int, List[int]]:
        if self._adj is None:
            adj: Dict[int, List[int]] = {i: [] for i in range(len(self.vertices))}
            for e in self.edges:
                adj[e.u].append(e.v)
                adj[e.v].append(e.u)
            self._adj = adj
        return self._adj

    def circumdisk_of(self, tri_index: int) -> Disk:
        a, b, c = self.triangles[tri_index]
        return circumdisk(self.vertices[a], self.vertices[b], self.vertices[c])


def _part1by1(n: np.ndarray) -> np.ndarray:
    n = n.astype(np.uint64)
    n = (n | (n << np.uint64(16))) & np.uint64(0x0000FFFF0000FFFF)
    n = (n | (n << np.uint64(8))) & np.uint64(0x00FF00FF00FF00FF)
    n = (n | (n << np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
    n = (n | (n << np.uint64(2))) & np.uint64(0x3333333333333333)
    n = (n | (n << np.uint64(1))) & np.uint64(0x5555555555555555)
    return n


def _canonical_order(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Morton-code ordering of the points; pure function of the multiset."""
    xmin, xmax = float(x.min()), float(x.max())
    ymin, ymax = float(y.min()), float(y.max())
    sx = (xmax - xmin) or 1.0
    sy = (ymax - ymin) or 1.0
    grid = (1 << 21) - 1
    xi = np.minimum((((x - xmin) / sx) * grid).astype(np.uint64), grid)
    yi = np.minimum((((y - ymin) / sy) * grid).astype(np.uint64), grid)
    z = (_part1by1(yi) << np.uint64(1)) | _part1by1(xi)
    return np.lexsort((y, x, z))


class _Builder:
    """Bowyer-Watson state: flat triangle tables with a ghost boundary."""

    def __init__(self, px: List[float], py: List[float]):
        self.px = px
        self.py = py
        self.tv: List[List[int]] = []   # vertex triples; ghost has -1 in slot 2
        self.tn: List[List[int]] = []   # neighbor triangle ids per opposite slot
        self.alive: List[bool] = []
        self.free: List[int] = []
        self.hint = 0

    # -- low-level predicates (filtered float, exact fallback) ------------

    def _orient(self, i: int, j: int, kx: float, ky: float) -> int:
        px, py = self.px, self.py
        ax, ay, bx, by = px[i], py[i], px[j], py[j]
        detleft = (ax - kx) * (by - ky)
        detright = (ay - ky) * (bx - kx)
        det = detleft - detright
        if detleft > 0.0:
            if detright <= 0.0:
                return 1 if det > 0.0 else (0 if det == 0.0 else -1)
            detsum = detleft + detright
        elif detleft < 0.0:
            if detright >= 0.0:
                return 1 if det > 0.0 else (0 if det == 0.0 else -1)
            detsum = -detleft - detright
        else:
            return 1 if detright < 0.0 else (0 if detright == 0.0 else -1)
        if det >= _ORIENT_BOUND * detsum or -det >= _ORIENT_BOUND * detsum:
            return 1 if det > 0.0 else -1
        return _orient_exact(ax, ay, bx, by, kx, ky)

    def _incircle(self, t: int, dx: float, dy: float) -> int:
        a, b, c = self.tv[t]
        px, py = self.px, self.py
        adx = px[a] - dx
        ady = py[a] - dy
        bdx = px[b] - dx
        bdy = py[b] - dy
        cdx = px[c] - dx
        cdy = py[c] - dy
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
            return 1 if det > 0.0 else -1
        return _incircle_exact(
            px[a], py[a], px[b], py[b], px[c], py[c], dx, dy
        )

    def _conflict(self, t: int, x: float, y: float) -> bool:
        tv = self.tv[t]
        if tv[2] == _GHOST:
            g0, g1 = tv[0], tv[1]
            s = self._orient(g0, g1, x, y)
            if s > 0:
                return True
            if s < 0:
                return False
            # exactly on the hull line: conflict iff strictly inside the segment
            px, py = self.px, self.py
            x0, y0, x1, y1 = px[g0], py[g0], px[g1], py[g1]
            if abs(x1 - x0) >= abs(y1 - y0):
                lo, hi = (x0, x1) if x0 < x1 else (x1, x0)
                return lo < x < hi
            lo, hi = (y0, y1) if y0 < y1 else (y1, y0)
            return lo < y < hi
        return self._incircle(t, x, y) > 0

    # -- triangle bookkeeping ---------------------------------------------

    def _new_tri(self, a: int, b: int, c: int) -> int:
        if self.free:
            t = self.free.pop()
            self.tv[t][0] = a
            self.tv[t][1] = b
            self.tv[t][2] = c
            self.tn[t][0] = -2
            self.tn[t][1] = -2
            self.tn[t][2] = -2
            self.alive[t] = True
            return t
        self.tv.append([a, b, c])
        self.tn.append([-2, -2, -2])
        self.alive.append(True)
        return len(self.tv) - 1

    def seed(self, i0: int, i1: int, i2: int) -> None:
        if self._orient(i0, i1, self.px[i2], self.py[i2]) < 0:
            i1, i2 = i2, i1
        t = self._new_tri(i0, i1, i2)
        gab = self._new_tri(i1, i0, _GHOST)
        gbc = self._new_tri(i2, i1, _GHOST)
        gca = self._new_tri(i0, i2, _GHOST)
        self.tn[t][:] = [gbc, gca, gab]
        for g, fin in ((gab, t), (gbc, t), (gca, t)):
            self.tn[g][2] = fin
        # ghost (g0, g1): slot0 edge (g1,-1) meets the ghost whose g0 == our g1
        ghosts = {self.tv[g][0]: g for g in (gab, gbc, gca)}
        for g in (gab, gbc, gca):
            nxt = ghosts[self.tv[g][1]]
            self.tn[g][0] = nxt
            self.tn[nxt][1] = g

    # -- point location -----------------------------------------------------

    def _locate(self, x: float, y: float) -> int:
        t = self.hint
        if not self.alive[t]:
            t = next(i for i in range(len(self.tv)) if self.alive[i])
        steps = 0
        limit = 4 * len(self.tv) + 64
        prev = -3
        while True:
            tv = self.tv[t]
            if tv[2] == _GHOST:
                if self._conflict(t, x, y):
                    return t
                break
            a, b, c = tv
            tn = self.tn[t]
            moved = False
            for (i, j, slot) in ((a, b, 2), (b, c, 0), (c, a, 1)):
                nb = tn[slot]
                if nb == prev:
                    continue
                if self._orient(i, j, x, y) < 0:
                    prev = t
                    t = nb
                    moved = True
                    break
            if not moved:
                return t
            steps += 1
            if steps > limit:
                break
        # rare fallback: exhaustive scan for any conflicting triangle
        for i in range(len(self.tv)):
            if self.alive[i] and self._conflict(i, x, y):
                return i
        raise RuntimeError("no conflicting triangle found for insertion")

    # -- insertion ----------------------------------------------------------

    def insert(self, pid: int) -> None:
        x, y = self.px[pid], self.py[pid]
        t0 = self._locate(x, y)
        if not self._conflict(t0, x, y):
            # located in a closed triangle whose circumdisk does not strictly
            # contain the point: exactly cocircular tie or boundary contact;
            # scan for a strict conflict elsewhere
            t0 = -1
            for i in range(len(self.tv)):
                if self.alive[i] and self._conflict(i, x, y):
                    t0 = i
                    break
            if t0 < 0:
                raise RuntimeError(f"point {pid} conflicts with no triangle")
        in_cav = {t0}
        cav = [t0]
        stack = [t0]
        while stack:
            t = stack.pop()
            for nb in self.tn[t]:
                if nb >= 0 and nb not in in_cav and self.alive[nb]:
                    if self._conflict(nb, x, y):
                        in_cav.add(nb)
                        cav.append(nb)
                        stack.append(nb)
        boundary: List[Tuple[int, int, int]] = []
        for t in cav:
            tv = self.tv[t]
            tn = self.tn[t]
            for (i, j, slot) in ((tv[1], tv[2], 0), (tv[2], tv[0], 1), (tv[0], tv[1], 2)):
                nb = tn[slot]
                if nb not in in_cav:
                    boundary.append((i, j, nb))
        for t in cav:
            self.alive[t] = False
            self.free.append(t)
        by_first: Dict[int, int] = {}
        by_second: Dict[int, int] = {}
        made: List[Tuple[int, int, int, int]] = []
        for (ex, ey, out) in boundary:
            nt = self._new_tri(ex, ey, pid)
            by_first[ex] = nt
            by_second[ey] = nt
            made.append((nt, ex, ey, out))
        for (nt, ex, ey, out) in made:
            tn = self.tn[nt]
            tn[2] = out
            tn[0] = by_first[ey]
            tn[1] = by_second[ex]
            if out >= 0:
                otv = self.tv[out]
                otn = self.tn[out]
                for slot in range(3):
                    i, j = otv[(slot + 1) % 3], otv[(slot + 2) % 3]
                    if i == ey and j == ex:
                        otn[slot] = nt
                        break
        # normalize any new triangle carrying the ghost vertex off slot 2
        for (nt, ex, ey, out) in made:
            tv = self.tv[nt]
            tn = self.tn[nt]
            if tv[0] == _GHOST:
                tv[0], tv[1], tv[2] = tv[1], tv[2], tv[0]
                tn[0], tn[1], tn[2] = tn[1], tn[2], tn[0]
            elif tv[1] == _GHOST:
                tv[0], tv[1], tv[2] = tv[2], tv[0], tv[1]
                tn[0], tn[1], tn[2] = tn[2], tn[0], tn[1]
            else:
                self.hint = nt


def build_xy(x: Sequence[float], y: Sequence[float]) -> Triangulation:
    """Triangulate points given as coordinate arrays.

    Fast-path equivalent of :func:`build`; see there for the contract.
    """
    xa = np.ascontiguousarray(x, dtype=np.float64)
    ya = np.ascontiguousarray(y, dtype=np.float64)
    n = xa.shape[0]
    if n < 3:
        raise TooFewPoints(f"need at least 3 points, got {n}")
    if not (np.isfinite(xa).all() and np.isfinite(ya).all()):
        raise ValueError("non-finite coordinates in input")
    order = _canonical_order(xa, ya)
    px = xa[order].tolist()
    py = ya[order].tolist()
    seen = {}
    for i, (vx, vy) in enumerate(zip(px, py)):
        if (vx, vy) in seen:
            raise DuplicatePoint(f"coincident input points at ({vx}, {vy})")
        seen[(vx, vy)] = i

    bld = _Builder(px, py)
    i2 = -1
    for k in range(2, n):
        if orient_sign(px[0], py[0], px[1], py[1], px[k], py[k]) != 0:
            i2 = k
            break
    if i2 < 0:
        raise AllCollinear("all input points lie on one line")
    bld.seed(0, 1, i2)
    for pid in range(2, n):
        if pid != i2:
            bld.insert(pid)

    # harvest finite triangles, remap ids
    tv, tn, alive = bld.tv, bld.tn, bld.alive
    fin_ids = [t for t in range(len(tv)) if alive[t] and tv[t][2] != _GHOST]
    remap = {t: i for i, t in enumerate(fin_ids)}
    triangles = tuple(tuple(tv[t]) for t in fin_ids)
    neighbors = tuple(
        tuple(remap.get(nb, -1) if nb >= 0 else -1 for nb in tn[t]) for t in fin_ids
    )
    edge_pairs = set()
    for (a, b, c) in triangles:
        edge_pairs.add((a, b) if a < b else (b, a))
        edge_pairs.add((b, c) if b < c else (c, b))
        edge_pairs.add((a, c) if a < c else (c, a))
    edges = tuple(
        EdgeKey(u, v, math.hypot(px[u] - px[v], py[u] - py[v]))
        for (u, v) in sorted(edge_pairs)
    )
    nxt = {}
    for t in range(len(tv)):
        if alive[t] and tv[t][2] == _GHOST:
            g0, g1 = tv[t][0], tv[t][1]
            nxt[g1] = g0  # interior-left hull edge is (g1, g0)
    start = min(nxt)
    hull = [start]
    cur = nxt[start]
    while cur != start:
        hull.append(cur)
        cur = nxt[cur]
    vertices = tuple(Point2(vx, vy) for vx, vy in zip(px, py))
    return Triangulation(
        vertices=vertices,
        triangles=triangles,
        neighbors=neighbors,
        hull=tuple(hull),
        edges=edges,
        _xy=np.column_stack([px, py]),
    )


def build(points: Sequence[Point2]) -> Triangulation:
    """Delaunay triangulation of the given points.

    Requires at least three points, not all collinear, no duplicates.
    The result satisfies the empty-circumcircle property (no vertex
    strictly inside any triangle's circumdisk) and does not depend on the
    input ordering.
    """
    if len(points) < 3:
        raise TooFewPoints(f"need at least 3 points, got {len(points)}")
    return build_xy([p.x for p in points], [p.y for p in points])


def incident_edges_ccw(t: Triangulation, v: int) -> List[EdgeKey]:
    """Edges incident to vertex v, counterclockwise from due east.

    Sorted by angle in [0, 2*pi) measured from the horizontal semi-line
    starting at v (a neighbor exactly due east comes first).  The 1-based
    position in this list is the rank used to key the per-edge marks of v.
    """
    if not (0 <= v < len(t.vertices)):
        raise IndexError(f"vertex index {v} out of range")
    base = t.vertices[v]
    ranked = []
    for w in t.adjacency()[v]:
        q = t.vertices[w]
        ang = math.atan2(q.y - base.y, q.x - base.x)
        if ang < 0.0:
            ang += 2.0 * math.pi
        ranked.append((ang, w))
    ranked.sort()
    lookup = t.edge_lookup()
    return [lookup[(v, w) if v < w else (w, v)] for _, w in ranked]


def _seg_seg_intersect(p1, p2, p3, p4) -> bool:
    d1 = orient_sign(p3[0], p3[1], p4[0], p4[1], p1[0], p1[1])
    d2 = orient_sign(p3[0], p3[1], p4[0], p4[1], p2[0], p2[1])
    d3 = orient_sign(p1[0], p1[1], p2[0], p2[1], p3[0], p3[1])
    d4 = orient_sign(p1[0], p1[1], p2[0], p2[1], p4[0], p4[1])
    if ((d1 > 0) != (d2 > 0) or d1 == 0 or d2 == 0) and (
        (d3 > 0) != (d4 > 0) or d3 == 0 or d4 == 0
    ):
        def on(a, b, c):
            return (
                orient_sign(a[0], a[1], b[0], b[1], c[0], c[1]) == 0
                and min(a[0], b[0]) <= c[0] <= max(a[0], b[0])
                and min(a[1], b[1]) <= c[1] <= max(a[1], b[1])
            )

        if d1 == 0 or d2 == 0 or d3 == 0 or d4 == 0:
            return on(p3, p4, p1) or on(p3, p4, p2) or on(p1, p2, p3) or on(p1, p2, p4)
        return True
    return False


def _point_in_tri(px, py, a, b, c) -> bool:
    s1 = orient_sign(a[0], a[1], b[0], b[1], px, py)
    s2 = orient_sign(b[0], b[1], c[0], c[1], px, py)
    s3 = orient_sign(c[0], c[1], a[0], a[1], px, py)
    return (s1 >= 0 and s2 >= 0 and s3 >= 0) or (s1 <= 0 and s2 <= 0 and s3 <= 0)


def _tri_box_overlap(a, b, c, box: AxisBox) -> bool:
    xs = (a[0], b[0], c[0])
    ys = (a[1], b[1], c[1])
    if max(xs) < box.xmin or min(xs) > box.xmax:
        return False
    if max(ys) < box.ymin or min(ys) > box.ymax:
        return False
    for (vx, vy) in zip(xs, ys):
        if box.xmin <= vx <= box.xmax and box.ymin <= vy <= box.ymax:
            return True
    corners = (
        (box.xmin, box.ymin),
        (box.xmax, box.ymin),
        (box.xmax, box.ymax),
        (box.xmin, box.ymax),
    )
    for (cx, cy) in corners:
        if _point_in_tri(cx, cy, a, b, c):
            return True
    box_edges = (
        (corners[0], corners[1]),
        (corners[1], corners[2]),
        (corners[2], corners[3]),
        (corners[3], corners[0]),
    )
    for (p1, p2) in ((a, b), (b, c), (c, a)):
        for (q1, q2) in box_edges:
            if _seg_seg_intersect(p1, p2, q1, q2):
                return True
    return False


def stabilization_radius(t: Triangulation, box: AxisBox) -> float:
    """Smallest rho with box (+) B(0, rho) covering every circumdisk of a
    triangle overlapping the box.

    Exhaustive scan over triangles that intersect the box (closed
    intersection).  The caller is responsible for having triangulated a
    window large enough that those triangles are final.
    """
    half = box.side / 2.0
    need = 0.0
    for i, (a, b, c) in enumerate(t.triangles):
        pa = (t.vertices[a].x, t.vertices[a].y)
        pb = (t.vertices[b].x, t.vertices[b].y)
        pc = (t.vertices[c].x, t.vertices[c].y)
        if not _tri_box_overlap(pa, pb, pc, box):
            continue
        d = t.circumdisk_of(i)
        px = abs(d.center.x - box.center.x) - half
        py = abs(d.center.y - box.center.y) - half
        if px > 0.0 or py > 0.0:
            s = math.hypot(max(px, 0.0), max(py, 0.0))
        else:
            s = max(px, py)
        need = max(need, d.radius + s)
    return need


def trace_in_ball(t: Triangulation, ball: Ball) -> TraceGraph:
    """Subgraph of edges having at least one endpoint in the closed ball."""
    xy = t.xy
    dx = xy[:, 0] - ball.center.x
    dy = xy[:, 1] - ball.center.y
    inside = (dx * dx + dy * dy) <= ball.radius**2
    verts = tuple(int(i) for i in np.flatnonzero(inside))
    edges = tuple(e for e in t.edges if inside[e.u] or inside[e.v])
    return TraceGraph(vertices=verts, edges=edges)


def _clipped_length(x0, y0, x1, y1, box: AxisBox) -> float:
    dx = x1 - x0
    dy = y1 - y0
    t0, t1 = 0.0, 1.0
    for p, q in (
        (-dx, x0 - box.xmin),
        (dx, box.xmax - x0),
        (-dy, y0 - box.ymin),
        (dy, box.ymax - y0),
    ):
        if p == 0.0:
            if q < 0.0:
                return 0.0
            continue
        r = q / p
        if p < 0.0:
            if r > t1:
                return 0.0
            if r > t0:
                t0 = r
        else:
            if r < t0:
                return 0.0
            if r < t1:
                t1 = r
    if t1 <= t0:
        return 0.0
    return (t1 - t0) * math.hypot(dx, dy)


def total_edge_length(t: Triangulation, region: AxisBox) -> float:
    """Total length of (edge intersect region) over all edges."""
    total = 0.0
    for e in t.edges:
        p, q = t.vertices[e.u], t.vertices[e.v]
        total += _clipped_length(p.x, p.y, q.x, q.y, region)
    return total


def dump_csv(t: Triangulation, vertices_path, edges_path) -> None:
    """Write vertex and edge tables as CSV for inspection."""
    with open(vertices_path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["index", "x", "y"])
        for i, p in enumerate(t.vertices):
            w.writerow([i, repr(p.x), repr(p.y)])
    with open(edges_path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["u", "v", "length"])
        for e in t.edges:
            w.writerow([e.u, e.v, repr(e.length)])
