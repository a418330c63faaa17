"""Marked-process sampling and the three graph representations.

The model lives on a Delaunay triangulation whose vertices are crossroads
and whose edges are streets.  Each crossroad carries a uniform mark (open
iff the mark is below the occupation probability p) plus one Exp(1) range
mark per incident street, keyed by the street's counterclockwise rank.
Street users form a linear Poisson process of intensity lambda along each
street and carry their own Exp(1) range marks.  Two devices connect only
along a shared street (line of sight): users when their distance is at
most the sum of their half-ranges (r/2 scale), a crossroad participating
with its per-street range at the r'/2 scale (r' = 2r by default), and
closed crossroads never connect.

Built representations:

* the point-level connectivity graph (open crossroads and users, with
  every connecting pair and its geometric segment);
* the street-pruned graph (open crossroads; a street survives iff its
  whole segment is covered by the connection ranges);
* the Bernoulli-edge graph (streets open independently with the exact
  1-D coverage probability of their length, given open endpoints).

All randomness is derived from a 64-bit master seed through keyed hashing
and counter-based generators: marks are reproducible, independent of the
model parameters, and identical across parameter sweeps, which makes the
monotone couplings in (p, lambda, r) exact rather than distributional.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from hashlib import blake2b
from struct import pack
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .delaunay import EdgeKey, Triangulation, incident_edges_ccw
from .geometry import AxisBox, Point2

__all__ = [
    "ModelParams",
    "MarkedVertex",
    "StreetUser",
    "ConnectivityGraph",
    "StreetGraph",
    "StreetStatus",
    "StarGrain",
    "LambdaExceedsMaster",
    "MissingCoverageValue",
    "MarkGenerator",
    "sample_ppp",
    "sample_cox",
    "filter_users",
    "connect",
    "build_graph",
    "street_status",
    "build_pruned",
    "build_bernoulli_edges",
    "star_grain",
    "dump_graph_csv",
]

_QUANT = float(1 << 32)
_TWO53 = float(1 << 53)


class LambdaExceedsMaster(ValueError):
    """Raised when a query intensity exceeds the declared master intensity."""


class MissingCoverageValue(KeyError):
    """Raised when the coverage lookup cannot produce p(length)."""


@dataclass(frozen=True, slots=True)
class ModelParams:
    """Model parameters: crossroad probability p, user intensity lam,
    user range scale r (may be math.inf), crossroad range scale r_prime
    (default 2r, must be >= 2r)."""

    p: float
    lam: float
    r: float
    r_prime: Optional[float] = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must be in [0, 1], got {self.p}")
        if not (self.lam >= 0.0 and math.isfinite(self.lam)):
            raise ValueError(f"lam must be finite and >= 0, got {self.lam}")
        if not self.r > 0.0:
            raise ValueError(f"r must be > 0 (or inf), got {self.r}")
        rp = self.r_prime
        if rp is None:
            rp = math.inf if math.isinf(self.r) else 2.0 * self.r
            object.__setattr__(self, "r_prime", rp)
        if not rp >= 2.0 * self.r:
            raise ValueError(f"r_prime must be >= 2r, got {rp} < {2 * self.r}")

    def user_reach(self, e_mark: float) -> float:
        return math.inf if math.isinf(self.r) else 0.5 * self.r * e_mark

    def crossroad_reach(self, e_mark: float) -> float:
        return math.inf if math.isinf(self.r_prime) else 0.5 * self.r_prime * e_mark


def _quantize(x: float) -> int:
    return int(round(x * _QUANT))


class MarkGenerator:
    """Counter-based keyed mark source: every value is a pure function of
    (master seed, quantized coordinates, stream tag, rank)."""

    __slots__ = ("seed", "_key")

    def __init__(self, seed: int):
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self._key = self.seed.to_bytes(8, "little")

    def _uniform(self, msg: bytes) -> float:
        digest = blake2b(msg, digest_size=8, key=self._key).digest()
        return (int.from_bytes(digest, "little") >> 11) / _TWO53

    def vertex_uniform(self, x: float, y: float) -> float:
        return self._uniform(pack("<qqB", _quantize(x), _quantize(y), 0x56))

    def vertex_exp(self, x: float, y: float, rank: int) -> float:
        u = self._uniform(pack("<qqBI", _quantize(x), _quantize(y), 0x45, rank))
        return -math.log1p(-u)

    def edge_uniform(self, x1: float, y1: float, x2: float, y2: float) -> float:
        a = (_quantize(x1), _quantize(y1))
        b = (_quantize(x2), _quantize(y2))
        lo, hi = (a, b) if a <= b else (b, a)
        return self._uniform(pack("<qqqqB", lo[0], lo[1], hi[0], hi[1], 0x42))

    def stream_key(self, *parts: int) -> int:
        msg = b"".join(pack("<q", int(p)) for p in parts)
        digest = blake2b(msg, digest_size=16, key=self._key).digest()
        return int.from_bytes(digest, "little")


@dataclass(eq=False)
class MarkedVertex:
    """Crossroad with its occupation mark and per-rank range marks."""

    vertex: int
    V: float
    _gen: MarkGenerator = field(repr=False)
    _x: float = field(repr=False)
    _y: float = field(repr=False)
    _exp_cache: Dict[int, float] = field(default_factory=dict, repr=False)

    def is_open(self, p: float) -> bool:
        return self.V < p

    def exp_mark(self, rank: int) -> float:
        got = self._exp_cache.get(rank)
        if got is None:
            got = self._gen.vertex_exp(self._x, self._y, rank)
            self._exp_cache[rank] = got
        return got


@dataclass(frozen=True, slots=True)
class StreetUser:
    """User on a street: offset from the lower-index endpoint, Exp(1) range
    mark E, and the uniform thinning mark of the intensity coupling."""

    edge: EdgeKey
    offset: float
    E: float
    master_u: float


@dataclass(frozen=True, slots=True)
class StreetStatus:
    endpoints_linked: bool
    fully_covered: bool


@dataclass(frozen=True, slots=True)
class StarGrain:
    """Star-shaped grain around a crossroad: spoke endpoints in ccw order."""

    center: int
    polygon: Tuple[Point2, ...]


@dataclass(frozen=True, slots=True)
class StreetGraph:
    """Street-level graph: open crossroads and surviving whole streets."""

    open_vertices: Tuple[int, ...]
    edges: Tuple[EdgeKey, ...]

    def adjacency(self) -> Dict[int, List[int]]:
        adj: Dict[int, List[int]] = {v: [] for v in self.open_vertices}
        for e in self.edges:
            adj[e.u].append(e.v)
            adj[e.v].append(e.u)
        return adj


def sample_ppp(window: AxisBox, intensity: float, seed: int) -> List[Point2]:
    """Homogeneous Poisson sample on the window; reproducible per seed."""
    if not intensity > 0.0:
        raise ValueError(f"intensity must be > 0, got {intensity}")
    x, y = sample_ppp_xy(window, intensity, seed)
    return [Point2(float(a), float(b)) for a, b in zip(x, y)]


def sample_ppp_xy(
    window: AxisBox, intensity: float, seed: int
) -> Tuple[np.ndarray, np.ndarray]:
    gen = MarkGenerator(seed)
    rng = np.random.Generator(np.random.Philox(key=gen.stream_key(0x505050)))
    area = window.side * window.side
    n = int(rng.poisson(intensity * area))
    xs = rng.uniform(window.xmin, window.xmax, n)
    ys = rng.uniform(window.ymin, window.ymax, n)
    return xs, ys


def sample_cox(edge: EdgeKey, lambda_max: float, seed: int) -> List[StreetUser]:
    """Master user list on one street at intensity lambda_max, sorted by
    offset; lower intensities are obtained by thinning on master_u."""
    if lambda_max < 0.0:
        raise ValueError(f"lambda_max must be >= 0, got {lambda_max}")
    if lambda_max == 0.0:
        return []
    gen = MarkGenerator(seed)
    rng = np.random.Generator(
        np.random.Philox(key=gen.stream_key(0xC0C0, edge.u, edge.v))
    )
    n = int(rng.poisson(lambda_max * edge.length))
    offsets = np.sort(rng.uniform(0.0, edge.length, n))
    e_marks = rng.exponential(1.0, n)
    master = rng.uniform(0.0, 1.0, n)
    return [
        StreetUser(edge=edge, offset=float(o), E=float(e), master_u=float(m))
        for o, e, m in zip(offsets, e_marks, master)
    ]


def filter_users(
    users: Sequence[StreetUser], lam: float, lambda_max: float
) -> List[StreetUser]:
    """Thin a master list down to intensity lam (exact coupling)."""
    if lam > lambda_max:
        raise LambdaExceedsMaster(f"lam {lam} exceeds lambda_max {lambda_max}")
    if lam == 0.0:
        return []
    frac = lam / lambda_max
    return [u for u in users if u.master_u < frac]


# ---------------------------------------------------------------------------
# connectivity graph


class ConnectivityGraph:
    """Point-level connectivity graph of open crossroads and street users.

    Nodes are tagged ("crossroad", vertex) or ("user", edge_pair, k); the
    adjacency holds exactly the pairs allowed by the connection rules, and
    ``segments`` maps each adjacent pair to its planar segment.
    """

    def __init__(
        self,
        t: Triangulation,
        params: ModelParams,
        seed: int,
        lambda_max: Optional[float] = None,
    ):
        self.t = t
        self.params = params
        self.seed = int(seed)
        self.lambda_max = params.lam if lambda_max is None else float(lambda_max)
        if params.lam > self.lambda_max:
            raise LambdaExceedsMaster(
                f"lam {params.lam} exceeds lambda_max {self.lambda_max}"
            )
        gen = MarkGenerator(seed)
        self.gen = gen
        self.marked: List[MarkedVertex] = [
            MarkedVertex(
                vertex=i,
                V=gen.vertex_uniform(p.x, p.y),
                _gen=gen,
                _x=p.x,
                _y=p.y,
            )
            for i, p in enumerate(t.vertices)
        ]
        self.open_mask = np.array([m.V < params.p for m in self.marked], dtype=bool)
        self._ranks: Dict[int, Dict[Tuple[int, int], int]] = {}
        self.users_by_edge: Dict[Tuple[int, int], List[StreetUser]] = {}
        self._sample_users()
        self._assemble()

    # -- marks ---------------------------------------------------------------

    def rank_of(self, v: int, pair: Tuple[int, int]) -> int:
        table = self._ranks.get(v)
        if table is None:
            table = {
                e.pair: i + 1 for i, e in enumerate(incident_edges_ccw(self.t, v))
            }
            self._ranks[v] = table
        return table[pair]

    def crossroad_reach(self, v: int, pair: Tuple[int, int]) -> float:
        e_mark = self.marked[v].exp_mark(self.rank_of(v, pair))
        return self.params.crossroad_reach(e_mark)

    # -- sampling -------------------------------------------------------------

    def _sample_users(self) -> None:
        lam, lam_max = self.params.lam, self.lambda_max
        edges = self.t.edges
        for e in edges:
            self.users_by_edge[e.pair] = []
        if lam_max <= 0.0 or lam <= 0.0 or not edges:
            return
        rng = np.random.Generator(
            np.random.Philox(key=self.gen.stream_key(0xC0C1))
        )
        lengths = np.array([e.length for e in edges])
        counts = rng.poisson(lam_max * lengths)
        total = int(counts.sum())
        offs = rng.uniform(0.0, 1.0, total)
        e_marks = rng.exponential(1.0, total)
        master = rng.uniform(0.0, 1.0, total)
        frac = lam / lam_max
        pos = 0
        for e, cnt in zip(edges, counts):
            users = []
            for k in range(pos, pos + int(cnt)):
                if master[k] < frac:
                    users.append(
                        StreetUser(
                            edge=e,
                            offset=float(offs[k] * e.length),
                            E=float(e_marks[k]),
                            master_u=float(master[k]),
                        )
                    )
            pos += int(cnt)
            users.sort(key=lambda u: u.offset)
            self.users_by_edge[e.pair] = users

    # -- assembly ---------------------------------------------------------------

    def _assemble(self) -> None:
        t, params = self.t, self.params
        nodes: List[tuple] = []
        node_id: Dict[tuple, int] = {}
        positions: List[Tuple[float, float]] = []
        for v in np.flatnonzero(self.open_mask):
            v = int(v)
            key = ("crossroad", v)
            node_id[key] = len(nodes)
            nodes.append(key)
            p = t.vertices[v]
            positions.append((p.x, p.y))
        for e in t.edges:
            users = self.users_by_edge[e.pair]
            pu, pv = t.vertices[e.u], t.vertices[e.v]
            ux, uy = (pv.x - pu.x) / e.length, (pv.y - pu.y) / e.length
            for k, usr in enumerate(users):
                key = ("user", e.pair, k)
                node_id[key] = len(nodes)
                nodes.append(key)
                positions.append((pu.x + usr.offset * ux, pu.y + usr.offset * uy))
        self.nodes: Tuple[tuple, ...] = tuple(nodes)
        self.node_id = node_id
        self.positions = np.array(positions) if positions else np.empty((0, 2))
        self.adjacency: List[List[int]] = [[] for _ in nodes]
        self.segments: Dict[
            Tuple[int, int], Tuple[Tuple[float, float], Tuple[float, float], Tuple[int, int]]
        ] = {}
        for e in t.edges:
            self._sweep_street(e)

    def _street_items(self, e: EdgeKey) -> List[Tuple[float, float, int]]:
        """(position, reach, node id) of every participant on street e."""
        items: List[Tuple[float, float, int]] = []
        if self.open_mask[e.u]:
            items.append((0.0, self.crossroad_reach(e.u, e.pair), self.node_id[("crossroad", e.u)]))
        if self.open_mask[e.v]:
            items.append(
                (e.length, self.crossroad_reach(e.v, e.pair), self.node_id[("crossroad", e.v)])
            )
        for k, usr in enumerate(self.users_by_edge[e.pair]):
            items.append(
                (usr.offset, self.params.user_reach(usr.E), self.node_id[("user", e.pair, k)])
            )
        return items

    def _sweep_street(self, e: EdgeKey) -> None:
        items = self._street_items(e)
        if len(items) < 2:
            return
        intervals = sorted(
            ((pos - reach, pos + reach, nid) for (pos, reach, nid) in items),
            key=lambda it: (it[0], it[1], it[2]),
        )
        active: List[Tuple[float, int]] = []
        for left, right, nid in intervals:
            active = [a for a in active if a[0] >= left]
            for _, other in active:
                self._add_pair(other, nid, e.pair)
            active.append((right, nid))

    def _add_pair(self, i: int, j: int, street: Tuple[int, int]) -> None:
        a, b = (i, j) if i < j else (j, i)
        self.adjacency[a].append(b)
        self.adjacency[b].append(a)
        p1 = (float(self.positions[a][0]), float(self.positions[a][1]))
        p2 = (float(self.positions[b][0]), float(self.positions[b][1]))
        self.segments[(a, b)] = (p1, p2, street)


def connect(u: tuple, v: tuple, g: ConnectivityGraph) -> bool:
    """Direct single-pair evaluation of the connection rules.

    Nodes are the graph's tagged keys.  Distinct streets (or any closed
    crossroad) give false; otherwise the rule for the pair kind applies.
    Used as the reference semantics; the assembled adjacency must agree.
    """
    params = g.params
    if u == v:
        return False
    ku, kv = u[0], v[0]
    if ku == "crossroad" and kv == "crossroad":
        a, b = u[1], v[1]
        if not (g.open_mask[a] and g.open_mask[b]):
            return False
        pair = (a, b) if a < b else (b, a)
        lookup = g.t.edge_lookup()
        if pair not in lookup:
            return False
        e = lookup[pair]
        return e.length <= g.crossroad_reach(a, pair) + g.crossroad_reach(b, pair)
    if ku == "user" and kv == "user":
        if u[1] != v[1]:
            return False
        ua = g.users_by_edge[u[1]][u[2]]
        ub = g.users_by_edge[v[1]][v[2]]
        return abs(ua.offset - ub.offset) <= params.user_reach(ua.E) + params.user_reach(
            ub.E
        )
    if ku == "user":
        u, v = v, u  # crossroad first
    cross, pair = u[1], v[1]
    if cross not in pair or not g.open_mask[cross]:
        return False
    usr = g.users_by_edge[pair][v[2]]
    dist = usr.offset if cross == pair[0] else usr.edge.length - usr.offset
    return dist <= g.crossroad_reach(cross, pair) + params.user_reach(usr.E)


def build_graph(
    t: Triangulation,
    params: ModelParams,
    seed: int,
    lambda_max: Optional[float] = None,
) -> ConnectivityGraph:
    """Connectivity graph of the model on triangulation t.

    All marks derive from the seed alone; ``lambda_max`` (default
    params.lam) declares the master intensity of the thinning coupling so
    that sweeps over lam share one user population.
    """
    return ConnectivityGraph(t, params, seed, lambda_max)


# ---------------------------------------------------------------------------
# street-level status and graphs


def _street_nodes(
    g: ConnectivityGraph, e: EdgeKey
) -> Tuple[List[Tuple[float, float]], bool, bool]:
    """(position, reach) items of e, plus openness of both endpoints."""
    open_u = bool(g.open_mask[e.u])
    open_v = bool(g.open_mask[e.v])
    items = [
        (usr.offset, g.params.user_reach(usr.E)) for usr in g.users_by_edge[e.pair]
    ]
    if open_u:
        items.append((0.0, g.crossroad_reach(e.u, e.pair)))
    if open_v:
        items.append((e.length, g.crossroad_reach(e.v, e.pair)))
    return items, open_u, open_v


def street_status(g: ConnectivityGraph, e: Union[EdgeKey, Tuple[int, int]]) -> StreetStatus:
    """Endpoint linkage and full coverage of one street.

    endpoints_linked follows the chain-of-overlapping-intervals route;
    fully_covered independently checks that the union of reach intervals
    covers [0, length].  Both are false when either endpoint is closed.
    """
    if not isinstance(e, EdgeKey):
        e = g.t.edge_lookup()[tuple(e)]
    items, open_u, open_v = _street_nodes(g, e)
    if not (open_u and open_v):
        return StreetStatus(endpoints_linked=False, fully_covered=False)

    # route A: sweep components of the interval-overlap graph
    intervals = sorted((pos - reach, pos + reach, pos) for (pos, reach) in items)
    linked = _endpoints_same_component(intervals, e.length)

    # route B: union of clipped reach intervals covers [0, length]
    covered = _covers_interval(
        [(max(0.0, pos - reach), min(e.length, pos + reach)) for (pos, reach) in items],
        e.length,
    )
    return StreetStatus(endpoints_linked=linked, fully_covered=covered)


def _endpoints_same_component(
    intervals: List[Tuple[float, float, float]], length: float
) -> bool:
    comp = -1
    comp_of_start = comp_of_end = None
    reach_max = -math.inf
    for left, right, pos in intervals:
        if left > reach_max:
            comp += 1
            reach_max = right
        else:
            reach_max = max(reach_max, right)
        if pos == 0.0 and comp_of_start is None:
            comp_of_start = comp
        if pos == length:
            comp_of_end = comp
    return comp_of_start is not None and comp_of_start == comp_of_end


def _covers_interval(spans: List[Tuple[float, float]], length: float) -> bool:
    spans = sorted(s for s in spans if s[1] >= s[0])
    reach = 0.0
    for left, right in spans:
        if left > reach:
            return False
        reach = max(reach, right)
        if reach >= length:
            return True
    return reach >= length


def build_pruned(g: ConnectivityGraph) -> StreetGraph:
    """Street-pruned graph: open crossroads, streets entirely covered."""
    open_vertices = tuple(int(v) for v in np.flatnonzero(g.open_mask))
    kept = tuple(
        e
        for e in g.t.edges
        if g.open_mask[e.u]
        and g.open_mask[e.v]
        and street_status(g, e).fully_covered
    )
    return StreetGraph(open_vertices=open_vertices, edges=kept)


def build_bernoulli_edges(
    t: Triangulation,
    params: ModelParams,
    p_table: Union[Callable[[float], float], object],
    seed: int,
) -> StreetGraph:
    """Street-level graph with independent edge coverage coin flips.

    An edge opens iff both endpoints are open and its per-edge uniform is
    at most p(length); the uniform is a pure function of (seed, edge), so
    the graph is reproducible and couples across parameter changes.
    """
    lookup = p_table if callable(p_table) else getattr(p_table, "lookup", None)
    if lookup is None:
        raise MissingCoverageValue("p_table is neither callable nor has .lookup")
    gen = MarkGenerator(seed)
    open_mask = [
        gen.vertex_uniform(pt.x, pt.y) < params.p for pt in t.vertices
    ]
    kept = []
    for e in t.edges:
        if not (open_mask[e.u] and open_mask[e.v]):
            continue
        try:
            pe = lookup(e.length)
        except Exception as exc:
            raise MissingCoverageValue(
                f"no coverage value for length {e.length}"
            ) from exc
        if pe is None or (isinstance(pe, float) and math.isnan(pe)):
            raise MissingCoverageValue(f"no coverage value for length {e.length}")
        pu, pv = t.vertices[e.u], t.vertices[e.v]
        u_e = gen.edge_uniform(pu.x, pu.y, pv.x, pv.y)
        if u_e <= pe:
            kept.append(e)
    open_vertices = tuple(i for i, o in enumerate(open_mask) if o)
    return StreetGraph(open_vertices=open_vertices, edges=tuple(kept))


def star_grain(t: Triangulation, v: int, r: float, marks: MarkedVertex) -> StarGrain:
    """Star-shaped grain at vertex v: spokes of length (r/2) * exp mark
    toward each neighbor in ccw order, truncated at the neighbor."""
    ranked = incident_edges_ccw(t, v)
    if len(ranked) < 3:
        raise ValueError(f"vertex {v} has degree {len(ranked)} < 3")
    base = t.vertices[v]
    poly = []
    for rank, e in enumerate(ranked, start=1):
        w = e.v if e.u == v else e.u
        q = t.vertices[w]
        spoke = math.inf if math.isinf(r) else 0.5 * r * marks.exp_mark(rank)
        dist = min(spoke, e.length)
        ux, uy = (q.x - base.x) / e.length, (q.y - base.y) / e.length
        poly.append(Point2(base.x + dist * ux, base.y + dist * uy))
    return StarGrain(center=v, polygon=tuple(poly))


def dump_graph_csv(g: ConnectivityGraph, nodes_path, edges_path) -> None:
    """Write node and adjacency tables as CSV for inspection."""
    with open(nodes_path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["id", "kind", "x", "y"])
        for i, node in enumerate(g.nodes):
            w.writerow([i, node[0], repr(float(g.positions[i][0])), repr(float(g.positions[i][1]))])
    with open(edges_path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["a", "b"])
        for (a, b) in sorted(g.segments):
            w.writerow([a, b])
