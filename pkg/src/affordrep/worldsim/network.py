"""Road networks: procedurally generated grid towns with lanes, connectors,
traffic lights, and crosswalks.

Maps are stable artifacts: each town id has a baked generation seed, so
`generate_map` is bit-reproducible.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from ..config import SimParams
from .geometry import (bezier_points, cumulative_lengths, heading_vec,
                       polyline_point, right_normal, segment_index, wrap_angle)


class UnknownMapError(ValueError):
    pass


@dataclass
class Lane:
    lane_id: int
    points: np.ndarray            # [P, 2] float64 centerline
    width: float
    kind: str                     # "road" | "connector"
    turn: str | None = None       # connectors: left | right | straight
    successors: list = field(default_factory=list)
    edge_id: int | None = None    # road lanes: owning edge
    # derived
    cum_s: np.ndarray = None
    length: float = 0.0
    seg_headings: np.ndarray = None

    def finalize(self):
        self.points = np.asarray(self.points, dtype=np.float64)
        if len(self.points) < 2:
            raise ValueError(f"lane {self.lane_id}: needs >= 2 points")
        self.cum_s = cumulative_lengths(self.points)
        if np.any(np.diff(self.cum_s) <= 0.0):
            raise ValueError(f"lane {self.lane_id}: zero-length segment")
        self.length = float(self.cum_s[-1])
        seg = np.diff(self.points, axis=0)
        self.seg_headings = np.arctan2(seg[:, 1], seg[:, 0])
        return self

    def point_at(self, s: float) -> np.ndarray:
        return polyline_point(self.points, self.cum_s, s)

    def heading_at(self, s: float) -> float:
        return float(self.seg_headings[segment_index(self.cum_s, s)])


@dataclass
class Edge:
    """Undirected road segment between two junction discs (pedestrian frame)."""
    edge_id: int
    node_u: int
    node_v: int
    p0: np.ndarray     # trimmed endpoint near node_u
    p1: np.ndarray
    lane_fwd: int
    lane_bwd: int
    crosswalk_s: float | None = None   # along the axis from p0

    def __post_init__(self):
        self.p0 = np.asarray(self.p0, dtype=np.float64)
        self.p1 = np.asarray(self.p1, dtype=np.float64)
        d = self.p1 - self.p0
        self.length = float(np.hypot(*d))
        self.dir = d / self.length
        self.normal = np.array([self.dir[1], -self.dir[0]])  # right of p0->p1


@dataclass
class Intersection:
    node_id: int
    center: np.ndarray
    radius: float
    incoming: list          # road lane ids ending here
    outgoing: list          # road lane ids starting here
    connectors: list        # connector lane ids through this node
    signalized: bool = False


@dataclass
class TrafficLight:
    light_id: int
    lane_id: int            # controlled incoming road lane
    stop_s: float           # stop-line arclength on that lane
    pos: np.ndarray
    green: float
    red: float
    offset: float

    @property
    def cycle(self) -> float:
        return self.green + self.red

    def is_red(self, clock: float) -> bool:
        return math.fmod(clock + self.offset, self.cycle) >= self.green


@dataclass
class Crosswalk:
    lane_id: int
    s: float
    edge_id: int


class RoadNetwork:
    def __init__(self, map_id: str, lanes, edges, intersections, lights,
                 crosswalks, params: SimParams):
        self.map_id = map_id
        self.lanes = lanes            # list[Lane], index == lane_id
        self.edges = edges
        self.intersections = intersections
        self.lights = lights
        self.crosswalks = crosswalks
        self.params = params
        self._validate()
        self._build_segment_arrays()
        pts = np.concatenate([l.points for l in lanes])
        self.bounds = (pts.min(axis=0) - 15.0, pts.max(axis=0) + 15.0)
        self.lights_by_lane = {lt.lane_id: lt for lt in lights}
        self.crosswalks_by_lane = {}
        for cw in crosswalks:
            self.crosswalks_by_lane.setdefault(cw.lane_id, []).append(cw)
        self.junction_of_lane = {}
        for inter in intersections:
            for cid in inter.connectors:
                self.junction_of_lane[cid] = inter

    def _validate(self):
        n = len(self.lanes)
        for lane in self.lanes:
            for s in lane.successors:
                if not 0 <= s < n:
                    raise ValueError(f"lane {lane.lane_id}: bad successor {s}")
            if lane.kind == "connector" and lane.turn not in ("left", "right", "straight"):
                raise ValueError(f"connector {lane.lane_id}: missing turn label")
        for lt in self.lights:
            if not 0.0 < lt.stop_s <= self.lanes[lt.lane_id].length:
                raise ValueError(f"light {lt.light_id}: stop line outside lane")

    def _build_segment_arrays(self):
        p0, vec, s0, lane_ids = [], [], [], []
        for lane in self.lanes:
            p0.append(lane.points[:-1])
            vec.append(np.diff(lane.points, axis=0))
            s0.append(lane.cum_s[:-1])
            lane_ids.append(np.full(len(lane.points) - 1, lane.lane_id))
        self.seg_p0 = np.concatenate(p0)
        self.seg_vec = np.concatenate(vec)
        self.seg_len = np.hypot(self.seg_vec[:, 0], self.seg_vec[:, 1])
        self.seg_s0 = np.concatenate(s0)
        self.seg_lane = np.concatenate(lane_ids)
        self.seg_heading = np.arctan2(self.seg_vec[:, 1], self.seg_vec[:, 0])
        self._inv_len2 = 1.0 / (self.seg_len ** 2)
        self.junction_centers = np.array([i.center for i in self.intersections])
        self.junction_radii = np.array([i.radius for i in self.intersections])

    # -- geometric queries -------------------------------------------------

    def project_all(self, p):
        """Per-segment projection of a point: (t, dist2, s, lateral sign)."""
        rel = np.asarray(p, dtype=float) - self.seg_p0
        t = np.clip((rel * self.seg_vec).sum(axis=1) * self._inv_len2, 0.0, 1.0)
        closest = self.seg_p0 + t[:, None] * self.seg_vec
        diff = np.asarray(p, dtype=float) - closest
        dist2 = (diff * diff).sum(axis=1)
        cross = self.seg_vec[:, 0] * diff[:, 1] - self.seg_vec[:, 1] * diff[:, 0]
        return t, dist2, cross

    def min_lane_distance(self, p) -> float:
        _, dist2, _ = self.project_all(p)
        return float(np.sqrt(dist2.min()))

    def in_junction(self, p) -> bool:
        d = self.junction_centers - np.asarray(p, dtype=float)
        return bool(np.any((d * d).sum(axis=1) <= self.junction_radii ** 2))

    def is_offroad(self, p) -> bool:
        margin = 0.5 * self.params.lane_width + self.params.offroad_margin
        if self.min_lane_distance(p) <= margin:
            return False
        return not self.in_junction(p)

    def default_successor(self, lane_id: int) -> int | None:
        succ = self.lanes[lane_id].successors
        return min(succ) if succ else None


def _grid_graph(nx_, ny_, spacing):
    nodes = {}
    for j in range(ny_):
        for i in range(nx_):
            nodes[j * nx_ + i] = np.array([i * spacing, j * spacing])
    edges = []
    for j in range(ny_):
        for i in range(nx_):
            n = j * nx_ + i
            if i + 1 < nx_:
                edges.append((n, n + 1))
            if j + 1 < ny_:
                edges.append((n, n + nx_))
    return nodes, edges


def _connected(nodes, edges) -> bool:
    adj = {n: [] for n in nodes}
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    seen, stack = set(), [next(iter(nodes))]
    while stack:
        n = stack.pop()
        if n in seen:
            continue
        seen.add(n)
        stack.extend(adj[n])
    return len(seen) == len(nodes)


def generate_map(map_id: str, seed: int | None = None,
                 params: SimParams | None = None) -> RoadNetwork:
    """Deterministic town builder. The per-map seed is a baked constant."""
    params = params or SimParams()
    if map_id not in params.map_seeds:
        raise UnknownMapError(f"unknown map_id {map_id!r}")
    if seed is None:
        seed = params.map_seeds[map_id]
    rng = np.random.default_rng(seed)
    nx_, ny_ = params.map_grid[map_id]
    spacing = params.map_spacing[map_id]
    rj = params.junction_radius
    w = params.lane_width
    half = 0.5 * w

    nodes, edges = _grid_graph(nx_, ny_, spacing)
    # carve topology: drop a few edges, keeping connectivity and degree >= 2
    n_drop = 3 if map_id == "townA" else 2
    order = rng.permutation(len(edges))
    dropped = 0
    for k in order:
        if dropped >= n_drop:
            break
        cand = [e for idx, e in enumerate(edges) if idx != k]
        deg = {n: 0 for n in nodes}
        for u, v in cand:
            deg[u] += 1
            deg[v] += 1
        if min(deg.values()) >= 2 and _connected(nodes, cand):
            edges = cand
            dropped += 1
            order = [i if i < k else i - 1 for i in order]

    lanes: list[Lane] = []
    edge_objs: list[Edge] = []

    def add_lane(points, kind, turn=None, edge_id=None) -> int:
        lane = Lane(len(lanes), np.asarray(points, float), w, kind, turn,
                    edge_id=edge_id)
        lanes.append(lane.finalize())
        return lane.lane_id

    for eid, (u, v) in enumerate(edges):
        pu, pv = nodes[u], nodes[v]
        d = (pv - pu) / np.hypot(*(pv - pu))
        r = np.array([d[1], -d[0]])
        a, b = pu + d * rj, pv - d * rj
        fwd = add_lane([a + r * half, b + r * half], "road", edge_id=eid)
        bwd = add_lane([b - r * half, a - r * half], "road", edge_id=eid)
        edge_objs.append(Edge(eid, u, v, a, b, fwd, bwd))

    # connectors per node
    incoming = {n: [] for n in nodes}
    outgoing = {n: [] for n in nodes}
    for e in edge_objs:
        incoming[e.node_v].append(e.lane_fwd)
        outgoing[e.node_v].append(e.lane_bwd)
        incoming[e.node_u].append(e.lane_bwd)
        outgoing[e.node_u].append(e.lane_fwd)

    intersections = []
    for n, center in nodes.items():
        conn_ids = []
        for li in sorted(incoming[n]):
            for lo in sorted(outgoing[n]):
                if lanes[li].edge_id == lanes[lo].edge_id:
                    continue  # no U-turns
                a = lanes[li].points[-1]
                b = lanes[lo].points[0]
                ha = lanes[li].seg_headings[-1]
                hb = lanes[lo].seg_headings[0]
                delta = wrap_angle(hb - ha)
                if abs(delta) < 0.25 * math.pi:
                    turn = "straight"
                elif delta > 0:
                    turn = "left"
                else:
                    turn = "right"
                chord = float(np.hypot(*(b - a)))
                k = chord / 3.0 if turn == "straight" else 0.5523 * chord / math.sqrt(2.0)
                pts = bezier_points(a, a + heading_vec(ha) * k,
                                    b - heading_vec(hb) * k, b, 9)
                cid = add_lane(pts, "connector", turn=turn)
                lanes[li].successors.append(cid)
                lanes[cid].successors.append(lo)
                conn_ids.append(cid)
        degree = len({e.edge_id for e in edge_objs if n in (e.node_u, e.node_v)})
        intersections.append(Intersection(
            n, center, rj + half + 0.5, sorted(incoming[n]),
            sorted(outgoing[n]), conn_ids, signalized=degree >= 3))

    # traffic lights at signalized nodes, grouped by approach axis
    lights = []
    for inter in intersections:
        if not inter.signalized:
            continue
        for li in inter.incoming:
            lane = lanes[li]
            h = lane.seg_headings[-1]
            ew = abs(math.cos(h)) > 0.7
            stop_s = lane.length - 1.0
            g, r_, off = ((params.light_red, params.light_green, params.light_green)
                          if ew else (params.light_green, params.light_red, 0.0))
            lights.append(TrafficLight(len(lights), li, stop_s,
                                       lane.point_at(stop_s), g, r_, off))

    # crosswalks on a seeded subset of edges, mid-segment
    crosswalks = []
    n_cw = max(2, int(round(0.4 * len(edge_objs))))
    cw_edges = sorted(rng.choice(len(edge_objs), size=n_cw, replace=False).tolist())
    for eid in cw_edges:
        e = edge_objs[eid]
        e.crosswalk_s = 0.5 * e.length
        for lid in (e.lane_fwd, e.lane_bwd):
            crosswalks.append(Crosswalk(lid, 0.5 * lanes[lid].length, eid))

    return RoadNetwork(map_id, lanes, edge_objs, intersections, lights,
                       crosswalks, params)


def shortest_lane_path(network: RoadNetwork, start: int, goal: int):
    """Dijkstra over the directed lane graph; returns lane-id sequence or None."""
    dist = {start: 0.0}
    prev = {}
    heap = [(0.0, start)]
    while heap:
        d, u = heapq.heappop(heap)
        if u == goal:
            break
        if d > dist.get(u, math.inf):
            continue
        for s in network.lanes[u].successors:
            nd = d + network.lanes[s].length
            if nd < dist.get(s, math.inf):
                dist[s] = nd
                prev[s] = u
                heapq.heappush(heap, (nd, s))
    if goal not in dist:
        return None
    path = [goal]
    while path[-1] != start:
        path.append(prev[path[-1]])
    return path[::-1]


def route_arc_length(network: RoadNetwork, route) -> float:
    return float(sum(network.lanes[l].length for l in route))


def generate_route_table(network: RoadNetwork, n_routes: int, min_dist: float,
                         seed: int = 0) -> list:
    """Seeded start/goal sampling; routes are road-lane to road-lane paths."""
    rng = np.random.default_rng(seed)
    road_ids = [l.lane_id for l in network.lanes if l.kind == "road"]
    routes = []
    attempts = 0
    while len(routes) < n_routes and attempts < 20000:
        attempts += 1
        a, b = rng.choice(road_ids, size=2, replace=False)
        path = shortest_lane_path(network, int(a), int(b))
        if path is None:
            continue
        if route_arc_length(network, path) < min_dist:
            continue
        routes.append([int(x) for x in path])
    if len(routes) < n_routes:
        raise RuntimeError(f"only found {len(routes)} routes >= {min_dist} m")
    return routes
