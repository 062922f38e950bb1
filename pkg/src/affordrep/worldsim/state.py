"""World state and scenario spawning."""
from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass

import numpy as np

from ..config import SimParams
from .network import RoadNetwork
from .routes import load_route_table


@dataclass
class VehicleAgent:
    lane_id: int
    s: float
    speed: float
    target_speed: float

    def pose(self, network):
        lane = network.lanes[self.lane_id]
        p = lane.point_at(self.s)
        return p, lane.heading_at(self.s)


@dataclass
class PedAgent:
    edge_id: int
    s: float            # along the edge axis from p0
    lateral: float      # signed offset along the edge right-normal
    walk_dir: int       # +1 toward p1
    crossing: int = 0   # 0 idle, else sign of lateral motion
    target_lateral: float = 0.0

    def position(self, network):
        e = network.edges[self.edge_id]
        return e.p0 + e.dir * self.s + e.normal * self.lateral


class WorldState:
    """Full simulator state; mutated only through sim.step()."""

    def __init__(self, network: RoadNetwork, ego, vehicles, pedestrians,
                 light_clock, rng, condition_id, density, route_lanes,
                 goal_xy, route_index, spawn_seed):
        self.network = network
        self.ego = np.asarray(ego, dtype=np.float64)  # x, y, heading, speed
        self.vehicles = vehicles
        self.pedestrians = pedestrians
        self.light_clock = np.asarray(light_clock, dtype=np.float64)
        self.sim_time = 0.0
        self.rng = rng
        self.condition_id = int(condition_id)
        self.density = density
        self.route_lanes = list(route_lanes)
        self.goal_xy = np.asarray(goal_xy, dtype=np.float64)
        self.route_index = int(route_index)
        self.spawn_seed = int(spawn_seed)

    @property
    def ego_pos(self):
        return self.ego[:2]

    @property
    def ego_heading(self) -> float:
        return float(self.ego[2])

    @property
    def ego_speed(self) -> float:
        return float(self.ego[3])

    def copy(self) -> "WorldState":
        dup = WorldState(
            self.network, self.ego.copy(),
            [copy.copy(v) for v in self.vehicles],
            [copy.copy(p) for p in self.pedestrians],
            self.light_clock.copy(), copy.deepcopy(self.rng),
            self.condition_id, self.density, list(self.route_lanes),
            self.goal_xy.copy(), self.route_index, self.spawn_seed)
        dup.sim_time = self.sim_time
        return dup

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(self.ego.tobytes())
        for v in self.vehicles:
            h.update(np.array([v.lane_id, v.s, v.speed, v.target_speed]).tobytes())
        for p in self.pedestrians:
            h.update(np.array([p.edge_id, p.s, p.lateral, p.walk_dir,
                               p.crossing, p.target_lateral]).tobytes())
        h.update(self.light_clock.tobytes())
        h.update(np.float64(self.sim_time).tobytes())
        h.update(json.dumps(self.rng.bit_generator.state, sort_keys=True).encode())
        return h.hexdigest()


def _vehicle_positions(network, vehicles):
    return [v.pose(network)[0] for v in vehicles]


def spawn_scenario(network: RoadNetwork, density: str, route_index: int,
                   condition_id: int, seed: int,
                   params: SimParams | None = None,
                   routes=None) -> WorldState:
    """Deterministic scenario setup: ego at the route start, seeded agents."""
    params = params or network.params
    if density not in params.density_counts:
        raise ValueError(f"unknown density {density!r}")
    if routes is None:
        routes = load_route_table(network.map_id, params)
    if not 0 <= route_index < len(routes):
        raise IndexError(f"route_index {route_index} out of range "
                         f"(0..{len(routes) - 1})")
    route = routes[route_index]
    rng = np.random.default_rng(seed)

    start_lane = network.lanes[route[0]]
    s0 = min(2.0, 0.5 * start_lane.length)
    pos = start_lane.point_at(s0)
    heading = start_lane.heading_at(s0)
    ego = np.array([pos[0], pos[1], heading, 0.0])

    goal_lane = network.lanes[route[-1]]
    goal_xy = goal_lane.point_at(max(goal_lane.length - 3.0, 0.0))

    n_veh, n_ped = params.density_counts[density]
    road_ids = [l.lane_id for l in network.lanes if l.kind == "road"]

    vehicles = []
    placed = []
    attempts = 0
    while len(vehicles) < n_veh and attempts < 400 * max(n_veh, 1):
        attempts += 1
        lane_id = int(road_ids[rng.integers(len(road_ids))])
        lane = network.lanes[lane_id]
        if lane.length < 10.0:
            continue
        s = float(rng.uniform(3.0, lane.length - 3.0))
        p = lane.point_at(s)
        if np.hypot(*(p - pos)) < 15.0:
            continue
        if any(v.lane_id == lane_id and abs(v.s - s) < 8.0 for v in vehicles):
            continue
        if any(np.hypot(*(p - q)) < 5.0 for q in placed):
            continue
        target = float(rng.uniform(*params.agent_speed_range))
        vehicles.append(VehicleAgent(lane_id, s, target, target))
        placed.append(p)

    sidewalk = params.lane_width + 1.0
    pedestrians = []
    for _ in range(n_ped):
        edge_id = int(rng.integers(len(network.edges)))
        e = network.edges[edge_id]
        s = float(rng.uniform(1.0, max(e.length - 1.0, 1.5)))
        side = 1.0 if rng.random() < 0.5 else -1.0
        walk_dir = 1 if rng.random() < 0.5 else -1
        pedestrians.append(PedAgent(edge_id, s, side * sidewalk, walk_dir))

    light_clock = np.zeros(len(network.lights))
    return WorldState(network, ego, vehicles, pedestrians, light_clock, rng,
                      condition_id, density, route, goal_xy, route_index, seed)
