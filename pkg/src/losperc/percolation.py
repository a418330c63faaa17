"""Cluster analysis and percolation-event detection.

Components are computed with union-find over graph nodes; every component
carries the union of its connection segments (its geometric realization),
so crossing, arm and spanning events are decided against segments, not
node positions: a single long street can realize a crossing on its own.
A second, box-restricted labeling clips the realization to a box and
severs any connectivity running through material outside it.

Surrounding cycles are detected at street level with a cut-ray double
cover: streets crossing the reference ray flip the sheet, and a cycle of
nonzero winding exists iff some crossroad reaches its own twin copy.

Pivotal edges of the Bernoulli-edge graph are found in closed form from
one labeling pass: absent candidates merge two components (plus their own
segment), present candidates are analyzed with bridge detection and
per-subtree side-touch aggregation, so no per-candidate relabeling runs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Set, Tuple

import numpy as np

from .delaunay import EdgeKey, Triangulation, stabilization_radius
from .geometry import AxisBox, Point2, orient_sign
from .model import ConnectivityGraph, StreetGraph, street_status

__all__ = [
    "ClusterLabeling",
    "CrossingEvent",
    "GoodSiteField",
    "WindowTooSmall",
    "components",
    "components_street",
    "components_in_box",
    "crosses_box",
    "arm_event",
    "surrounding_cycle",
    "n_good",
    "good_site_field",
    "spanning_cluster_count",
    "pivotal_edges",
    "pivotal_edges_street",
    "pivotal_edges_annulus",
]

Seg = Tuple[Tuple[float, float], Tuple[float, float]]


class WindowTooSmall(ValueError):
    """Raised when the sampled window cannot certify a stabilization check."""


class _UnionFind:
    __slots__ = ("parent", "rank")

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n

    def find(self, i: int) -> int:
        parent = self.parent
        root = i
        while parent[root] != root:
            root = parent[root]
        while parent[i] != root:
            parent[i], i = root, parent[i]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1


@dataclass(eq=False)
class ClusterLabeling:
    """Union-find closure of a graph plus per-component segment lists."""

    n_nodes: int
    _uf: _UnionFind
    segments: List[Tuple[int, int, Seg]]  # (node a, node b, planar segment)

    def root(self, i: int) -> int:
        return self._uf.find(i)

    def same_component(self, i: int, j: int) -> bool:
        return self._uf.find(i) == self._uf.find(j)

    @property
    def n_components(self) -> int:
        return len({self._uf.find(i) for i in range(self.n_nodes)})

    def component_segments(self) -> Dict[int, List[Seg]]:
        by_root: Dict[int, List[Seg]] = {}
        for a, _b, seg in self.segments:
            by_root.setdefault(self._uf.find(a), []).append(seg)
        return by_root


def components(g: ConnectivityGraph) -> ClusterLabeling:
    """Label the point-level connectivity graph."""
    uf = _UnionFind(len(g.nodes))
    segs: List[Tuple[int, int, Seg]] = []
    for (a, b), (p1, p2, _street) in g.segments.items():
        uf.union(a, b)
        segs.append((a, b, (p1, p2)))
    return ClusterLabeling(n_nodes=len(g.nodes), _uf=uf, segments=segs)


def components_street(sg: StreetGraph, t: Triangulation) -> ClusterLabeling:
    """Label a street-level graph; realizations are whole street segments."""
    index = {v: i for i, v in enumerate(sg.open_vertices)}
    uf = _UnionFind(len(index))
    segs: List[Tuple[int, int, Seg]] = []
    for e in sg.edges:
        a, b = index[e.u], index[e.v]
        uf.union(a, b)
        pu, pv = t.vertices[e.u], t.vertices[e.v]
        segs.append((a, b, ((pu.x, pu.y), (pv.x, pv.y))))
    return ClusterLabeling(n_nodes=len(index), _uf=uf, segments=segs)


def _box_clip_params(x1, y1, x2, y2, box: AxisBox) -> Optional[Tuple[float, float]]:
    """Liang-Barsky: parameter range of segment (p1, p2) inside the closed box."""
    t0, t1 = 0.0, 1.0
    dx, dy = x2 - x1, y2 - y1
    for p, q in (
        (-dx, x1 - box.xmin),
        (dx, box.xmax - x1),
        (-dy, y1 - box.ymin),
        (dy, box.ymax - y1),
    ):
        if p == 0.0:
            if q < 0.0:
                return None
            continue
        r = q / p
        if p < 0.0:
            if r > t1:
                return None
            if r > t0:
                t0 = r
        else:
            if r < t0:
                return None
            if r < t1:
                t1 = r
    return t0, t1


def _node_street_coord(g: ConnectivityGraph, node: int, pair, length: float) -> float:
    key = g.nodes[node]
    if key[0] == "crossroad":
        return 0.0 if key[1] == pair[0] else length
    return g.users_by_edge[pair][key[2]].offset


def components_in_box(g: ConnectivityGraph, box: AxisBox) -> ClusterLabeling:
    """Label the part of the realization inside the closed box.

    The realization is the union of connection segments; this labeling
    describes the connectivity of its intersection with the box.  Per
    street the clipped connection chords merge into maximal runs, and
    runs on different streets glue exactly where they share a crossroad
    point.  Connectivity through material outside the box is severed, so
    crossing and spanning events read from this labeling are decided by
    in-box paths alone.

    Point-set and graph connectivity coincide here: reaches are additive,
    so a device lying inside another pair's chord always connects to one
    of its endpoints, and overlapping chords on a street never belong to
    distinct components.
    """
    lookup = g.t.edge_lookup()
    chords: Dict[Tuple[int, int], List[Tuple[float, float]]] = {}
    for (a, b), (_p1, _p2, pair) in g.segments.items():
        length = lookup[pair].length
        sa = _node_street_coord(g, a, pair, length)
        sb = _node_street_coord(g, b, pair, length)
        chords.setdefault(pair, []).append((sa, sb) if sa <= sb else (sb, sa))

    uf_runs: List[Tuple[Tuple[int, int], float, float]] = []
    runs_at_vertex: Dict[int, List[int]] = {}
    for pair, intervals in chords.items():
        e = lookup[pair]
        pu, pv = g.t.vertices[pair[0]], g.t.vertices[pair[1]]
        clip = _box_clip_params(pu.x, pu.y, pv.x, pv.y, box)
        if clip is None:
            continue
        c0, c1 = clip[0] * e.length, clip[1] * e.length
        clipped = sorted(
            (max(lo, c0), min(hi, c1)) for lo, hi in intervals if lo <= c1 and hi >= c0
        )
        if not clipped:
            continue
        merged: List[Tuple[float, float]] = [clipped[0]]
        for lo, hi in clipped[1:]:
            if lo <= merged[-1][1]:
                if hi > merged[-1][1]:
                    merged[-1] = (merged[-1][0], hi)
            else:
                merged.append((lo, hi))
        base = len(uf_runs)
        uf_runs.extend((pair, lo, hi) for lo, hi in merged)
        if merged[0][0] <= 0.0:
            runs_at_vertex.setdefault(pair[0], []).append(base)
        if merged[-1][1] >= e.length:
            runs_at_vertex.setdefault(pair[1], []).append(base + len(merged) - 1)

    uf = _UnionFind(len(uf_runs))
    for ids in runs_at_vertex.values():
        for other in ids[1:]:
            uf.union(ids[0], other)

    # reconstruction rounding may land a wall-clipped endpoint a few ulp off
    # the wall; snap so exact side-touch predicates see the clip
    snap = 1e-10 * (1.0 + box.side)

    def _pin(v: float, lo: float, hi: float) -> float:
        if abs(v - lo) <= snap:
            return lo
        if abs(v - hi) <= snap:
            return hi
        return min(max(v, lo), hi)

    segs: List[Tuple[int, int, Seg]] = []
    for i, (pair, lo, hi) in enumerate(uf_runs):
        e = lookup[pair]
        pu, pv = g.t.vertices[pair[0]], g.t.vertices[pair[1]]
        ux, uy = (pv.x - pu.x) / e.length, (pv.y - pu.y) / e.length
        segs.append((
            i,
            i,
            (
                (_pin(pu.x + lo * ux, box.xmin, box.xmax), _pin(pu.y + lo * uy, box.ymin, box.ymax)),
                (_pin(pu.x + hi * ux, box.xmin, box.xmax), _pin(pu.y + hi * uy, box.ymin, box.ymax)),
            ),
        ))
    return ClusterLabeling(n_nodes=len(uf_runs), _uf=uf, segments=segs)


# ---------------------------------------------------------------------------
# segment vs box-side predicates


def _segs_cross(a1, a2, b1, b2) -> bool:
    """Closed segment intersection, robust orientation tests."""
    d1 = orient_sign(*b1, *b2, *a1)
    d2 = orient_sign(*b1, *b2, *a2)
    d3 = orient_sign(*a1, *a2, *b1)
    d4 = orient_sign(*a1, *a2, *b2)
    if d1 * d2 < 0 and d3 * d4 < 0:
        return True

    def on(px, qx, rx, py, qy, ry):
        return min(px, rx) <= qx <= max(px, rx) and min(py, ry) <= qy <= max(py, ry)

    if d1 == 0 and on(b1[0], a1[0], b2[0], b1[1], a1[1], b2[1]):
        return True
    if d2 == 0 and on(b1[0], a2[0], b2[0], b1[1], a2[1], b2[1]):
        return True
    if d3 == 0 and on(a1[0], b1[0], a2[0], a1[1], b1[1], a2[1]):
        return True
    if d4 == 0 and on(a1[0], b2[0], a2[0], a1[1], b2[1], a2[1]):
        return True
    return False


def _box_sides(box: AxisBox) -> Dict[str, Tuple[Tuple[float, float], Tuple[float, float]]]:
    x0, x1, y0, y1 = box.xmin, box.xmax, box.ymin, box.ymax
    return {
        "left": ((x0, y0), (x0, y1)),
        "right": ((x1, y0), (x1, y1)),
        "bottom": ((x0, y0), (x1, y0)),
        "top": ((x0, y1), (x1, y1)),
    }


def _side_touches(seg: Seg, sides) -> Tuple[bool, ...]:
    p1, p2 = seg
    return tuple(_segs_cross(p1, p2, s1, s2) for (s1, s2) in sides)


def crosses_box(
    labeling: ClusterLabeling, g, box: AxisBox, axis: str = "x"
) -> bool:
    """True iff one component's realization meets both opposite box sides."""
    if axis not in ("x", "y"):
        raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")
    sides = _box_sides(box)
    pair = (sides["left"], sides["right"]) if axis == "x" else (
        sides["bottom"],
        sides["top"],
    )
    touch: Dict[int, List[bool]] = {}
    for a, _b, seg in labeling.segments:
        t1, t2 = _side_touches(seg, pair)
        if not (t1 or t2):
            continue
        root = labeling.root(a)
        flags = touch.setdefault(root, [False, False])
        flags[0] |= t1
        flags[1] |= t2
        if flags[0] and flags[1]:
            return True
    return False


def _square_boundary_touch(seg: Seg, center: Point2, radius: float) -> bool:
    box = AxisBox(center=center, side=2.0 * radius)
    return any(_side_touches(seg, list(_box_sides(box).values())))


def arm_event(
    labeling: ClusterLabeling, g, alpha: float, beta: float, center: Point2
) -> bool:
    """True iff one component meets both square boundaries S_alpha, S_beta."""
    if not alpha < beta:
        raise ValueError(f"alpha must be < beta, got {alpha} >= {beta}")
    touch: Dict[int, List[bool]] = {}
    for a, _b, seg in labeling.segments:
        t1 = _square_boundary_touch(seg, center, alpha)
        t2 = _square_boundary_touch(seg, center, beta)
        if not (t1 or t2):
            continue
        root = labeling.root(a)
        flags = touch.setdefault(root, [False, False])
        flags[0] |= t1
        flags[1] |= t2
        if flags[0] and flags[1]:
            return True
    return False


def spanning_cluster_count(labeling: ClusterLabeling, g, box: AxisBox) -> int:
    """Number of components whose realization touches all four box sides."""
    sides = list(_box_sides(box).values())
    touch: Dict[int, List[bool]] = {}
    for a, _b, seg in labeling.segments:
        hits = _side_touches(seg, sides)
        if not any(hits):
            continue
        root = labeling.root(a)
        flags = touch.setdefault(root, [False] * 4)
        for k in range(4):
            flags[k] |= hits[k]
    return sum(all(flags) for flags in touch.values())


# ---------------------------------------------------------------------------
# surrounding cycles and n-good sites


def _segment_in_open_box(seg: Seg, box: AxisBox) -> bool:
    """True iff the segment has a point strictly inside the box."""
    (x1, y1), (x2, y2) = seg
    t0, t1 = 0.0, 1.0
    dx, dy = x2 - x1, y2 - y1
    for p, q in (
        (-dx, x1 - box.xmin),
        (dx, box.xmax - x1),
        (-dy, y1 - box.ymin),
        (dy, box.ymax - y1),
    ):
        if p == 0.0:
            if q < 0.0:
                return False
        else:
            trat = q / p
            if p < 0.0:
                t0 = max(t0, trat)
            else:
                t1 = min(t1, trat)
            if t0 > t1:
                return False
    if t0 > t1:
        return False
    xm = x1 + 0.5 * (t0 + t1) * dx
    ym = y1 + 0.5 * (t0 + t1) * dy
    return (
        box.xmin < xm < box.xmax
        and box.ymin < ym < box.ymax
    )


def _ray_parity(seg: Seg, origin: Tuple[float, float]) -> int:
    """1 if the segment crosses the +x ray from origin (half-open rule)."""
    (x1, y1), (x2, y2) = seg
    ox, oy = origin
    above1, above2 = y1 > oy, y2 > oy
    if above1 == above2:
        return 0
    xint = x1 + (oy - y1) * (x2 - x1) / (y2 - y1)
    return 1 if xint > ox else 0


def _linked_streets(g: ConnectivityGraph, edges: Iterable[EdgeKey]) -> List[EdgeKey]:
    out = []
    for e in edges:
        if not (g.open_mask[e.u] and g.open_mask[e.v]):
            continue
        if street_status(g, e).endpoints_linked:
            out.append(e)
    return out


def surrounding_cycle(g: ConnectivityGraph, n: float, z: Tuple[int, int]) -> bool:
    """Street-level cycle of nonzero winding around n*z, inside the box of
    half-side 3n and avoiding the interior of the box of half-side n.

    Cut-ray detection: streets crossing the +x ray from the center flip
    between the two sheets of a double cover; a surrounding cycle exists
    iff some crossroad connects to its own copy on the other sheet.
    """
    cx, cy = n * z[0], n * z[1]
    center = Point2(cx, cy)
    outer = AxisBox(center=center, side=6.0 * n)
    inner = AxisBox(center=center, side=2.0 * n)
    t = g.t
    candidates = []
    for e in t.edges:
        pu, pv = t.vertices[e.u], t.vertices[e.v]
        if not (outer.contains(pu) and outer.contains(pv)):
            continue
        seg = ((pu.x, pu.y), (pv.x, pv.y))
        if _segment_in_open_box(seg, inner):
            continue
        candidates.append((e, seg))
    linked = {
        e.pair for e in _linked_streets(g, (e for e, _ in candidates))
    }
    verts = sorted({v for e, _ in candidates for v in e.pair})
    index = {v: i for i, v in enumerate(verts)}
    uf = _UnionFind(2 * len(verts))
    for e, seg in candidates:
        if e.pair not in linked:
            continue
        a, b = index[e.u], index[e.v]
        flip = _ray_parity(seg, (cx, cy))
        uf.union(2 * a, 2 * b + flip)
        uf.union(2 * a + 1, 2 * b + (flip ^ 1))
    return any(uf.find(2 * i) == uf.find(2 * i + 1) for i in range(len(verts)))


def n_good(
    t: Triangulation,
    g: ConnectivityGraph,
    z: Tuple[int, int],
    n: float,
    window: Optional[AxisBox] = None,
) -> bool:
    """Stabilization radius of the 3n-box below n, plus a surrounding cycle.

    The certifying window defaults to the bounding box of the sampled
    points; the 3n-box inflated by the computed radius must fit inside it.
    """
    cx, cy = n * z[0], n * z[1]
    outer = AxisBox(center=Point2(cx, cy), side=6.0 * n)
    if window is None:
        xy = t.xy
        xmin, xmax = float(np.min(xy[:, 0])), float(np.max(xy[:, 0]))
        ymin, ymax = float(np.min(xy[:, 1])), float(np.max(xy[:, 1]))
    else:
        xmin, xmax, ymin, ymax = window.xmin, window.xmax, window.ymin, window.ymax
    if (
        outer.xmin < xmin
        or outer.xmax > xmax
        or outer.ymin < ymin
        or outer.ymax > ymax
    ):
        raise WindowTooSmall(
            f"3n-box around z={z} with n={n} leaves the sampled window"
        )
    rad = stabilization_radius(t, outer)
    if (
        outer.xmin - rad < xmin
        or outer.xmax + rad > xmax
        or outer.ymin - rad < ymin
        or outer.ymax + rad > ymax
    ):
        raise WindowTooSmall(
            f"stabilization radius {rad:.3f} of the 3n-box is not certified "
            f"by the sampled window"
        )
    if not rad < n:
        return False
    return surrounding_cycle(g, n, z)


@dataclass(frozen=True)
class GoodSiteField:
    """Boolean field of n-good sites over an integer grid window."""

    n: float
    z_origin: Tuple[int, int]
    values: np.ndarray  # bool, shape (nx, ny)

    def at(self, zx: int, zy: int) -> bool:
        ix, iy = zx - self.z_origin[0], zy - self.z_origin[1]
        return bool(self.values[ix, iy])


def good_site_field(
    t: Triangulation,
    g: ConnectivityGraph,
    n: float,
    z_range: Tuple[int, int, int, int],
    window: Optional[AxisBox] = None,
) -> GoodSiteField:
    """Evaluate n_good over the inclusive grid [zx0..zx1] x [zy0..zy1]."""
    zx0, zx1, zy0, zy1 = z_range
    values = np.zeros((zx1 - zx0 + 1, zy1 - zy0 + 1), dtype=bool)
    for ix, zx in enumerate(range(zx0, zx1 + 1)):
        for iy, zy in enumerate(range(zy0, zy1 + 1)):
            values[ix, iy] = n_good(t, g, (zx, zy), n, window=window)
    return GoodSiteField(n=n, z_origin=(zx0, zy0), values=values)


# ---------------------------------------------------------------------------
# pivotal edges of the Bernoulli-edge graph


@dataclass(frozen=True)
class CrossingEvent:
    """Left-right (axis='x') or bottom-top (axis='y') crossing of a box."""

    box: AxisBox
    axis: str = "x"

    def __post_init__(self):
        if self.axis not in ("x", "y"):
            raise ValueError(f"axis must be 'x' or 'y', got {self.axis!r}")

    def sides(self):
        sides = _box_sides(self.box)
        if self.axis == "x":
            return sides["left"], sides["right"]
        return sides["bottom"], sides["top"]


def _street_seg(t: Triangulation, e: EdgeKey) -> Seg:
    pu, pv = t.vertices[e.u], t.vertices[e.v]
    return ((pu.x, pu.y), (pv.x, pv.y))


def _seg_touches_box(seg: Seg, box: AxisBox) -> bool:
    p1, p2 = seg
    if box.contains(Point2(*p1)) or box.contains(Point2(*p2)):
        return True
    return any(_side_touches(seg, list(_box_sides(box).values())))


def pivotal_edges(
    t: Triangulation,
    params,
    p_table,
    seed: int,
    event: CrossingEvent,
) -> List[EdgeKey]:
    """Pivotal streets of the Bernoulli-edge graph for a crossing event.

    An edge is pivotal iff the event holds with it forced open and fails
    with it forced closed.  Candidates are streets intersecting the event
    box whose endpoints are both open (an edge with a closed endpoint can
    never open, so forcing changes nothing for it).
    """
    from .model import build_bernoulli_edges

    sg = build_bernoulli_edges(t, params, p_table, seed)
    return pivotal_edges_street(sg, t, event)


def pivotal_edges_street(
    sg: StreetGraph, t: Triangulation, event: CrossingEvent
) -> List[EdgeKey]:
    """Pivotal-edge analysis on an explicit street-level graph."""
    open_set = set(sg.open_vertices)
    kept = {e.pair for e in sg.edges}
    side1, side2 = event.sides()

    candidates: List[EdgeKey] = []
    for e in t.edges:
        if e.u not in open_set or e.v not in open_set:
            continue
        if _seg_touches_box(_street_seg(t, e), event.box):
            candidates.append(e)

    index = {v: i for i, v in enumerate(sg.open_vertices)}
    uf = _UnionFind(len(index))
    edge_touch: Dict[Tuple[int, int], Tuple[bool, bool]] = {}
    for e in sg.edges:
        uf.union(index[e.u], index[e.v])
    for e in t.edges:
        if e.u in open_set and e.v in open_set:
            seg = _street_seg(t, e)
            edge_touch[e.pair] = (
                _segs_cross(seg[0], seg[1], *side1),
                _segs_cross(seg[0], seg[1], *side2),
            )

    touch: Dict[int, List[bool]] = {}
    for e in sg.edges:
        t1, t2 = edge_touch[e.pair]
        if t1 or t2:
            root = uf.find(index[e.u])
            flags = touch.setdefault(root, [False, False])
            flags[0] |= t1
            flags[1] |= t2
    crossing_roots = [root for root, f in touch.items() if f[0] and f[1]]

    if not crossing_roots:
        out = []
        for e in candidates:
            if e.pair in kept:
                continue
            ru, rv = uf.find(index[e.u]), uf.find(index[e.v])
            t1, t2 = edge_touch[e.pair]
            f1 = t1 or touch.get(ru, [False, False])[0] or touch.get(rv, [False, False])[0]
            f2 = t2 or touch.get(ru, [False, False])[1] or touch.get(rv, [False, False])[1]
            if f1 and f2:
                out.append(e)
        return sorted(out, key=lambda e: e.pair)

    if len(crossing_roots) > 1:
        return []

    star = crossing_roots[0]
    cand_kept = [
        e for e in candidates if e.pair in kept and uf.find(index[e.u]) == star
    ]
    if not cand_kept:
        return []
    comp_edges = [e for e in sg.edges if uf.find(index[e.u]) == star]
    return sorted(
        _pivotal_in_crossing_component(comp_edges, set(c.pair for c in cand_kept),
                                       edge_touch),
        key=lambda e: e.pair,
    )


def pivotal_edges_annulus(
    sg: StreetGraph,
    t: Triangulation,
    alpha: float,
    beta: float,
    center: Point2 = Point2(0.0, 0.0),
) -> List[EdgeKey]:
    """Pivotal streets for the two-boundary event S_alpha <-> S_beta.

    Same replay semantics as :func:`pivotal_edges_street`, with the event
    "one component touches both square boundaries of radii alpha and beta".
    A far-away street can join two half-crossing components, so no box
    locality filter applies: every open-open street is a candidate.
    """
    if not alpha < beta:
        raise ValueError(f"alpha must be < beta, got {alpha} >= {beta}")
    open_set = set(sg.open_vertices)
    kept = {e.pair for e in sg.edges}

    candidates: List[EdgeKey] = [
        e for e in t.edges if e.u in open_set and e.v in open_set
    ]
    edge_touch: Dict[Tuple[int, int], Tuple[bool, bool]] = {}
    for e in candidates:
        seg = _street_seg(t, e)
        edge_touch[e.pair] = (
            _square_boundary_touch(seg, center, alpha),
            _square_boundary_touch(seg, center, beta),
        )

    index = {v: i for i, v in enumerate(sg.open_vertices)}
    uf = _UnionFind(len(index))
    for e in sg.edges:
        uf.union(index[e.u], index[e.v])

    touch: Dict[int, List[bool]] = {}
    for e in sg.edges:
        t1, t2 = edge_touch[e.pair]
        if t1 or t2:
            root = uf.find(index[e.u])
            flags = touch.setdefault(root, [False, False])
            flags[0] |= t1
            flags[1] |= t2
    crossing_roots = [root for root, f in touch.items() if f[0] and f[1]]

    if not crossing_roots:
        out = []
        for e in candidates:
            if e.pair in kept:
                continue
            ru, rv = uf.find(index[e.u]), uf.find(index[e.v])
            t1, t2 = edge_touch[e.pair]
            f1 = t1 or touch.get(ru, [False, False])[0] or touch.get(rv, [False, False])[0]
            f2 = t2 or touch.get(ru, [False, False])[1] or touch.get(rv, [False, False])[1]
            if f1 and f2:
                out.append(e)
        return sorted(out, key=lambda e: e.pair)

    if len(crossing_roots) > 1:
        return []

    star = crossing_roots[0]
    cand_kept = [
        e for e in candidates if e.pair in kept and uf.find(index[e.u]) == star
    ]
    if not cand_kept:
        return []
    comp_edges = [e for e in sg.edges if uf.find(index[e.u]) == star]
    return sorted(
        _pivotal_in_crossing_component(comp_edges, set(c.pair for c in cand_kept),
                                       edge_touch),
        key=lambda e: e.pair,
    )


def _pivotal_in_crossing_component(
    comp_edges: List[EdgeKey],
    candidate_pairs: Set[Tuple[int, int]],
    edge_touch: Dict[Tuple[int, int], Tuple[bool, bool]],
) -> List[EdgeKey]:
    """Kept candidates whose forced closure breaks the unique crossing.

    Bridge edges split the component in two; the event survives iff either
    part still touches both sides.  Non-bridge edges only withdraw their
    own segment, so the event survives unless that segment was the sole
    contact with a side.  Side-touch totals per DFS subtree give both
    answers in one pass.
    """
    adj: Dict[int, List[Tuple[int, EdgeKey]]] = {}
    for e in comp_edges:
        adj.setdefault(e.u, []).append((e.v, e))
        adj.setdefault(e.v, []).append((e.u, e))

    cnt1 = sum(edge_touch[e.pair][0] for e in comp_edges)
    cnt2 = sum(edge_touch[e.pair][1] for e in comp_edges)

    disc: Dict[int, int] = {}
    low: Dict[int, int] = {}
    sub1: Dict[int, int] = {}  # side-touch totals of edges assigned to subtree
    sub2: Dict[int, int] = {}
    parent_edge: Dict[int, Optional[EdgeKey]] = {}
    bridges: Set[Tuple[int, int]] = set()
    counter = 0
    for start in adj:
        if start in disc:
            continue
        stack: List[Tuple[int, Optional[EdgeKey], int]] = [(start, None, 0)]
        parent_edge[start] = None
        order: List[int] = []
        while stack:
            v, pedge, it = stack.pop()
            if it == 0:
                if v in disc:
                    continue
                disc[v] = low[v] = counter
                counter += 1
                sub1[v] = sub2[v] = 0
                order.append(v)
            advanced = False
            neigh = adj[v]
            while it < len(neigh):
                w, e = neigh[it]
                it += 1
                if e is pedge:
                    continue
                if w not in disc:
                    stack.append((v, pedge, it))
                    stack.append((w, e, 0))
                    parent_edge[w] = e
                    advanced = True
                    break
                else:
                    low[v] = min(low[v], disc[w])
                    # assign back edge to its deeper endpoint exactly once
                    if disc[w] < disc[v]:
                        t1, t2 = edge_touch[e.pair]
                        sub1[v] += t1
                        sub2[v] += t2
            if not advanced:
                pe = parent_edge.get(v)
                if pe is not None:
                    t1, t2 = edge_touch[pe.pair]
                    sub1[v] += t1
                    sub2[v] += t2
                    par = pe.u if pe.v == v else pe.v
                    low[par] = min(low[par], low[v])
                    sub1[par] += sub1[v]
                    sub2[par] += sub2[v]
                    if low[v] > disc[par]:
                        bridges.add(pe.pair)

    child_of: Dict[Tuple[int, int], int] = {}
    for v, pe in parent_edge.items():
        if pe is not None:
            child_of[pe.pair] = v

    out = []
    for e in comp_edges:
        if e.pair not in candidate_pairs:
            continue
        t1, t2 = edge_touch[e.pair]
        if e.pair in bridges:
            c = child_of[e.pair]
            a1, a2 = sub1[c] - t1, sub2[c] - t2
            b1, b2 = cnt1 - sub1[c], cnt2 - sub2[c]
            survives = (a1 > 0 and a2 > 0) or (b1 > 0 and b2 > 0)
        else:
            survives = (cnt1 - t1 > 0) and (cnt2 - t2 > 0)
        if not survives:
            out.append(e)
    return out
