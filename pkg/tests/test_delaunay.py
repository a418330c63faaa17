"""Triangulation against brute-force oracles: edge sets, Euler counts,
hulls, angular ranking, stabilization radii, traces, edge-length measure."""

import math
from fractions import Fraction

import numpy as np
import pytest

from losperc.delaunay import (
    AllCollinear,
    DuplicatePoint,
    EdgeKey,
    TooFewPoints,
    build,
    build_xy,
    dump_csv,
    incident_edges_ccw,
    stabilization_radius,
    total_edge_length,
    trace_in_ball,
)
from losperc.geometry import (
    AxisBox,
    Ball,
    HalfDiskStatus,
    Point2,
    circumdisk,
    empty_half_disk,
    in_disk,
    orient_sign,
)


# ---------------------------------------------------------------------------
# oracles


def edge_pair_delaunay_exact(pts, i, j):
    """Exact test: does an empty open disk through pts[i], pts[j] exist?

    Disks through the pair are parametrized by the center's exact rational
    offset t along the perpendicular bisector; each other point forbids an
    open half-line of t.  The edge exists iff the forbidden set leaves a
    gap.  Pure rational arithmetic throughout.
    """
    F = Fraction
    x, y = pts[i], pts[j]
    xf = (F(x[0]), F(x[1]))
    yf = (F(y[0]), F(y[1]))
    dx, dy = yf[0] - xf[0], yf[1] - xf[1]
    mx, my = (xf[0] + yf[0]) / 2, (xf[1] + yf[1]) / 2
    nx, ny = -dy, dx
    lower = []  # strictly inside iff t > a
    upper = []  # strictly inside iff t < a
    for k, z in enumerate(pts):
        if k == i or k == j:
            continue
        zf = (F(z[0]), F(z[1]))
        lhs = (
            zf[0] * zf[0]
            + zf[1] * zf[1]
            - xf[0] * xf[0]
            - xf[1] * xf[1]
            - 2 * ((zf[0] - xf[0]) * mx + (zf[1] - xf[1]) * my)
        )
        coef = 2 * ((zf[0] - xf[0]) * nx + (zf[1] - xf[1]) * ny)
        if coef > 0:
            lower.append(lhs / coef)
        elif coef < 0:
            upper.append(lhs / coef)
        elif lhs < 0:
            return False  # inside every disk through the pair
    lo = min(lower) if lower else None
    hi = max(upper) if upper else None
    if lo is None or hi is None:
        return True
    return hi <= lo


def delaunay_edges_oracle(pts):
    n = len(pts)
    return {
        (i, j)
        for i in range(n)
        for j in range(i + 1, n)
        if edge_pair_delaunay_exact(pts, i, j)
    }


def convex_hull_with_collinear(pts):
    """Andrew chain keeping collinear boundary points; CCW cycle of indices."""
    idx = sorted(range(len(pts)), key=lambda k: pts[k])
    def half(seq):
        out = []
        for k in seq:
            while len(out) >= 2:
                a, b = pts[out[-2]], pts[out[-1]]
                if orient_sign(a[0], a[1], b[0], b[1], pts[k][0], pts[k][1]) < 0:
                    out.pop()
                else:
                    break
            out.append(k)
        return out
    lower = half(idx)
    upper = half(idx[::-1])
    return lower[:-1] + upper[:-1]


def bfs_connected(nodes, edge_pairs):
    if not nodes:
        return True
    adj = {v: [] for v in nodes}
    for (u, v) in edge_pairs:
        adj[u].append(v)
        adj[v].append(u)
    seen = {next(iter(nodes))}
    stack = list(seen)
    while stack:
        u = stack.pop()
        for w in adj[u]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == len(nodes)


def fuzz_point_set(rng, kind=None):
    kind = kind if kind is not None else rng.integers(0, 5)
    if kind == 0:
        n = int(rng.integers(3, 120))
        return rng.uniform(0, 20, size=(n, 2))
    if kind == 1:
        k, m = int(rng.integers(2, 7)), int(rng.integers(2, 7))
        g = np.stack(np.meshgrid(np.arange(k), np.arange(m)), -1).reshape(-1, 2)
        return g.astype(float)
    if kind == 2:
        n = int(rng.integers(4, 40))
        ang = rng.uniform(0, 2 * math.pi, n)
        return np.column_stack([np.cos(ang), np.sin(ang)]) * 7.0
    if kind == 3:
        n = int(rng.integers(3, 30))
        line = np.column_stack([np.arange(n, dtype=float), np.arange(n, dtype=float)])
        off = rng.uniform(1, 5, size=(2, 2)) + np.array([0.0, 8.0])
        return np.vstack([line, off])
    n = int(rng.integers(5, 80))
    return rng.normal(scale=3.0, size=(n, 2)) + rng.uniform(-10, 10, 2)


def dedupe(arr):
    seen, keep = set(), []
    for row in arr:
        key = (float(row[0]), float(row[1]))
        if key not in seen:
            seen.add(key)
            keep.append(key)
    return np.array(keep)


# ---------------------------------------------------------------------------
# build


class TestBuild:
    def test_three_points(self):
        t = build([Point2(0, 0), Point2(1, 0), Point2(0, 1)])
        assert len(t.triangles) == 1
        assert len(t.edges) == 3

    def test_diagonal_choice_empty_circumcircle(self):
        pts = [Point2(0, 0), Point2(1, 0), Point2(0, 1), Point2(0.9, 0.9)]
        t = build(pts)
        pairs = {e.pair for e in t.edges}
        # both diagonal candidates, checked brute force
        for diag, other in (((0, 3), (1, 2)), ((1, 2), (0, 3))):
            if diag in pairs:
                a, b = diag
                c, d = other
                for tri in ((a, b, c), (a, b, d)):
                    disk = circumdisk(*(pts[k] for k in tri))
                    inside = [
                        k for k in range(4) if k not in tri and in_disk(pts[k], disk, True)
                    ]
                    assert inside == []

    def test_errors(self):
        with pytest.raises(TooFewPoints):
            build([Point2(0, 0), Point2(1, 0)])
        with pytest.raises(AllCollinear):
            build([Point2(0, 0), Point2(1, 1), Point2(2, 2), Point2(3, 3)])
        with pytest.raises(DuplicatePoint):
            build([Point2(0, 0), Point2(1, 0), Point2(0, 1), Point2(1, 0)])

    def test_edge_set_matches_exact_oracle(self):
        rng = np.random.default_rng(101)
        for trial in range(60):
            n = int(rng.integers(3, 61))
            pts = dedupe(rng.uniform(0, 10, size=(n, 2)))
            if len(pts) < 3:
                continue
            t = build_xy(pts[:, 0], pts[:, 1])
            coords = [(p.x, p.y) for p in t.vertices]
            got = {e.pair for e in t.edges}
            want = delaunay_edges_oracle(coords)
            assert got == want, f"trial {trial}"

    def test_edge_set_matches_oracle_on_ties(self):
        # integer grid: many exactly cocircular quadruples; the oracle's
        # open-disk criterion accepts either diagonal, so check containment
        g = np.stack(np.meshgrid(np.arange(4.0), np.arange(4.0)), -1).reshape(-1, 2)
        t = build_xy(g[:, 0], g[:, 1])
        coords = [(p.x, p.y) for p in t.vertices]
        got = {e.pair for e in t.edges}
        want = delaunay_edges_oracle(coords)
        assert got <= want

    def test_euler_and_hull_fuzz(self):
        rng = np.random.default_rng(202)
        for trial in range(250):
            pts = dedupe(fuzz_point_set(rng))
            if len(pts) < 3:
                continue
            try:
                t = build_xy(pts[:, 0], pts[:, 1])
            except AllCollinear:
                continue
            n = len(t.vertices)
            h = len(t.hull)
            assert len(t.triangles) == 2 * n - 2 - h, f"trial {trial}"
            assert len(t.edges) == 3 * n - 3 - h, f"trial {trial}"
            coords = [(p.x, p.y) for p in t.vertices]
            want_hull = convex_hull_with_collinear(coords)
            assert len(want_hull) == h
            k = t.hull.index(want_hull[0])
            rotated = t.hull[k:] + t.hull[:k]
            assert list(rotated) == want_hull

    def test_empty_circumcircle_invariant(self):
        rng = np.random.default_rng(303)
        for _ in range(25):
            pts = dedupe(rng.uniform(0, 10, size=(int(rng.integers(4, 50)), 2)))
            if len(pts) < 3:
                continue
            t = build_xy(pts[:, 0], pts[:, 1])
            for k in range(len(t.triangles)):
                disk = t.circumdisk_of(k)
                tri = set(t.triangles[k])
                for v in range(len(t.vertices)):
                    if v not in tri:
                        assert not in_disk(t.vertices[v], disk, strict=True)

    def test_neighbor_symmetry(self):
        rng = np.random.default_rng(404)
        pts = rng.uniform(0, 10, size=(200, 2))
        t = build_xy(pts[:, 0], pts[:, 1])
        for i, nbrs in enumerate(t.neighbors):
            for nb in nbrs:
                if nb >= 0:
                    assert i in t.neighbors[nb]

    def test_determinism_under_permutation(self):
        rng = np.random.default_rng(505)
        pts = rng.uniform(0, 10, size=(80, 2))
        t_ref = build_xy(pts[:, 0], pts[:, 1])
        for _ in range(5):
            perm = rng.permutation(len(pts))
            t2 = build_xy(pts[perm, 0], pts[perm, 1])
            assert t2.triangles == t_ref.triangles
            assert t2.hull == t_ref.hull
            assert [e.pair for e in t2.edges] == [e.pair for e in t_ref.edges]

    def test_half_disk_necessity(self):
        rng = np.random.default_rng(606)
        for _ in range(30):
            pts = dedupe(rng.uniform(0, 8, size=(int(rng.integers(4, 40)), 2)))
            if len(pts) < 3:
                continue
            t = build_xy(pts[:, 0], pts[:, 1])
            for e in t.edges:
                x, y = t.vertices[e.u], t.vertices[e.v]
                others = [
                    t.vertices[k] for k in range(len(t.vertices)) if k not in (e.u, e.v)
                ]
                assert empty_half_disk(x, y, others) is not HalfDiskStatus.NEITHER


# ---------------------------------------------------------------------------
# incident edge ranking


class TestIncidentEdges:
    @staticmethod
    def star(angles_deg):
        pts = [Point2(0.0, 0.0)]
        for a in angles_deg:
            r = math.radians(a)
            pts.append(Point2(math.cos(r), math.sin(r)))
        return build(pts), pts

    def test_three_angles_ranked(self):
        t, pts = self.star([10, 100, 350])
        center = next(
            i for i, p in enumerate(t.vertices) if (p.x, p.y) == (0.0, 0.0)
        )
        ranked = incident_edges_ccw(t, center)
        angles = []
        for e in ranked:
            w = e.v if e.u == center else e.u
            q = t.vertices[w]
            a = math.degrees(math.atan2(q.y, q.x)) % 360
            angles.append(round(a))
        assert angles == [10, 100, 350]

    def test_angle_zero_is_rank_one(self):
        t, _ = self.star([0, 90, 225])
        center = next(
            i for i, p in enumerate(t.vertices) if (p.x, p.y) == (0.0, 0.0)
        )
        ranked = incident_edges_ccw(t, center)
        first = ranked[0]
        w = first.v if first.u == center else first.u
        assert t.vertices[w].y == 0.0 and t.vertices[w].x > 0

    def test_matches_atan2_oracle(self):
        rng = np.random.default_rng(707)
        pts = rng.uniform(0, 10, size=(150, 2))
        t = build_xy(pts[:, 0], pts[:, 1])
        for v in map(int, rng.integers(0, 150, size=20)):
            ranked = incident_edges_ccw(t, v)
            nbrs = [e.v if e.u == v else e.u for e in ranked]
            assert sorted(nbrs) == sorted(t.adjacency()[v])
            base = t.vertices[v]
            def key(w):
                q = t.vertices[w]
                return math.atan2(q.y - base.y, q.x - base.x) % (2 * math.pi)
            assert nbrs == sorted(nbrs, key=key)


# ---------------------------------------------------------------------------
# stabilization radius


class TestStabilizationRadius:
    def test_all_inside_box(self):
        t = build([Point2(0, 0), Point2(1, 0), Point2(0, 1)])
        assert stabilization_radius(t, AxisBox(Point2(0.5, 0.5), 4.0)) == 0.0

    def test_single_triangle_protrusion(self):
        t = build([Point2(0, 0), Point2(1, 0), Point2(0, 1)])
        # circumdisk: center (0.5, 0.5), radius sqrt(2)/2; box side 1 at center
        got = stabilization_radius(t, AxisBox(Point2(0.5, 0.5), 1.0))
        assert got == pytest.approx(math.sqrt(2) / 2 - 0.5, rel=1e-12)

    def test_fuzz_sufficiency_and_tightness(self):
        rng = np.random.default_rng(808)
        dirs = np.exp(1j * np.linspace(0, 2 * math.pi, 4096, endpoint=False))
        dx, dy = dirs.real, dirs.imag
        for _ in range(40):
            pts = rng.uniform(0, 20, size=(int(rng.integers(20, 120)), 2))
            t = build_xy(pts[:, 0], pts[:, 1])
            box = AxisBox(Point2(*rng.uniform(6, 14, 2)), float(rng.uniform(1, 6)))
            rho = stabilization_radius(t, box)
            hx = box.side / 2
            worst = -math.inf
            from losperc.delaunay import _tri_box_overlap
            for i, (a, b, c) in enumerate(t.triangles):
                pa, pb, pc = (
                    (t.vertices[k].x, t.vertices[k].y) for k in (a, b, c)
                )
                if not _tri_box_overlap(pa, pb, pc, box):
                    continue
                d = t.circumdisk_of(i)
                # support-function gap in 4096 directions
                sup = (
                    (d.center.x - box.center.x) * dx
                    + (d.center.y - box.center.y) * dy
                    + d.radius
                    - hx * (np.abs(dx) + np.abs(dy))
                )
                worst = max(worst, float(sup.max()))
            worst = max(worst, 0.0)
            assert worst <= rho + 1e-9
            if rho > 0:
                assert worst > rho - 1e-3


# ---------------------------------------------------------------------------
# trace in ball


class TestTrace:
    def test_whole_triangulation(self):
        rng = np.random.default_rng(909)
        pts = rng.uniform(0, 10, size=(50, 2))
        t = build_xy(pts[:, 0], pts[:, 1])
        tr = trace_in_ball(t, Ball(Point2(5, 5), 100.0))
        assert len(tr.edges) == len(t.edges)
        assert bfs_connected(tr.node_set(), [e.pair for e in tr.edges])

    def test_two_vertex_ball_connected(self):
        rng = np.random.default_rng(1010)
        found = 0
        while found < 20:
            pts = rng.uniform(0, 10, size=(40, 2))
            t = build_xy(pts[:, 0], pts[:, 1])
            i, j = rng.integers(0, 40, 2)
            if i == j:
                continue
            p, q = t.vertices[int(i)], t.vertices[int(j)]
            c = Point2((p.x + q.x) / 2, (p.y + q.y) / 2)
            r = math.hypot(p.x - q.x, p.y - q.y) / 2 + 1e-9
            tr = trace_in_ball(t, Ball(c, r))
            inside = tr.vertices
            if len(inside) < 2:
                continue
            assert bfs_connected(tr.node_set(), [e.pair for e in tr.edges])
            found += 1

    def test_random_traces_connected(self):
        rng = np.random.default_rng(1111)
        for _ in range(300):
            pts = rng.uniform(0, 15, size=(int(rng.integers(5, 100)), 2))
            t = build_xy(pts[:, 0], pts[:, 1])
            anchor = pts[int(rng.integers(0, len(pts)))]
            r = float(rng.uniform(0.5, 8.0))
            off = rng.uniform(-r, r, 2) * 0.7
            tr = trace_in_ball(t, Ball(Point2(*(anchor + off)), r))
            assert bfs_connected(tr.node_set(), [e.pair for e in tr.edges])


# ---------------------------------------------------------------------------
# edge length measure


class TestEdgeLength:
    def test_disjoint_region(self):
        t = build([Point2(0, 0), Point2(1, 0), Point2(0, 1)])
        assert total_edge_length(t, AxisBox(Point2(50, 50), 2.0)) == 0.0

    def test_single_edge_inside(self):
        t = build([Point2(0, 0), Point2(1, 0), Point2(0, 1)])
        region = AxisBox(Point2(0.5, 0.0), 1.0)
        # edges: (0,0)-(1,0) fully inside (length 1); the others clipped
        total = total_edge_length(t, region)
        hand = 1.0 + 0.5 + math.hypot(0.5, 0.5)
        assert total == pytest.approx(hand, rel=1e-12)

    def test_mean_length_density(self):
        rng = np.random.default_rng(1212)
        side, margin, reps = 30.0, 6.0, 50
        region = AxisBox(Point2(side / 2, side / 2), side)
        vals = []
        for _ in range(reps):
            big = side + 2 * margin
            n = rng.poisson(big * big)
            pts = rng.uniform(-margin, side + margin, size=(n, 2))
            t = build_xy(pts[:, 0], pts[:, 1])
            vals.append(total_edge_length(t, region) / (side * side))
        mean = float(np.mean(vals))
        assert abs(mean - 32 / (3 * math.pi)) / (32 / (3 * math.pi)) < 0.02


def test_dump_csv(tmp_path):
    t = build([Point2(0, 0), Point2(1, 0), Point2(0, 1)])
    vp, ep = tmp_path / "v.csv", tmp_path / "e.csv"
    dump_csv(t, vp, ep)
    assert vp.read_text().startswith("index,x,y")
    lines = ep.read_text().strip().splitlines()
    assert lines[0] == "u,v,length"
    assert len(lines) == 1 + len(t.edges)
