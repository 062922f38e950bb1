"""Route tables (shipped JSON fixtures) and route-following command logic."""
from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

import numpy as np

from ..config import SimParams
from ..types import one_hot_command
from .localize import OffRoadError, lane_localize
from .network import RoadNetwork, generate_route_table

_ROUTE_CACHE: dict = {}


def fixture_path(map_id: str) -> Path:
    pkg = resources.files("affordrep.worldsim") / "fixtures" / f"routes_{map_id}.json"
    return Path(str(pkg))


def load_route_table(map_id: str, params: SimParams | None = None) -> list:
    """Routes for a town, loaded from the packaged fixture."""
    if map_id in _ROUTE_CACHE:
        return _ROUTE_CACHE[map_id]
    path = fixture_path(map_id)
    data = json.loads(path.read_text())
    if data["map_id"] != map_id:
        raise ValueError(f"fixture {path} is for {data['map_id']}, not {map_id}")
    routes = [list(map(int, r)) for r in data["routes"]]
    _ROUTE_CACHE[map_id] = routes
    return routes


def build_route_table(network: RoadNetwork, params: SimParams | None = None) -> dict:
    """Regenerate the route table for a town (used to write fixtures)."""
    params = params or network.params
    routes = generate_route_table(
        network, params.routes_per_town,
        params.route_min_dist[network.map_id],
        seed=params.map_seeds[network.map_id] + 1000)
    return {"map_id": network.map_id, "min_dist": params.route_min_dist[network.map_id],
            "routes": routes}


def write_route_fixture(network: RoadNetwork, out_path=None) -> Path:
    table = build_route_table(network)
    path = Path(out_path) if out_path else fixture_path(network.map_id)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(table, indent=1, sort_keys=True) + "\n")
    return path


class RoutePlan:
    """Mutable progress along a spawned route; feeds next_command."""

    def __init__(self, network: RoadNetwork, route_lanes, command_range=None):
        self.network = network
        self.lanes = list(route_lanes)
        self.index = {lane: i for i, lane in enumerate(self.lanes)}
        self.progress = 0
        self.replans = 0
        self.command_range = command_range or network.params.command_range

    def locate(self, state):
        """Advance progress to the ego's current route lane; re-plan if off it."""
        try:
            fix = lane_localize(state.ego[:3], self.network)
        except OffRoadError:
            return None
        if fix.lane_id in self.index:
            i = self.index[fix.lane_id]
            if i >= self.progress:
                self.progress = i
            else:
                # fell back onto an earlier route lane: treat as current
                self.progress = i
            return fix
        # off the planned lanes: re-localize against route lanes only
        try:
            fix_r = lane_localize(state.ego[:3], self.network,
                                  lane_subset=self.lanes)
        except OffRoadError:
            return fix
        self.progress = self.index[fix_r.lane_id]
        self.replans += 1
        return fix_r


def next_command(state, plan: RoutePlan) -> np.ndarray:
    """One-hot command: the planned turn within command_range of the next
    connector on the route, the connector's own label while traversing it,
    otherwise continue.
    """
    fix = plan.locate(state)
    if fix is None:
        return one_hot_command("continue")
    net = plan.network
    cur = plan.lanes[plan.progress]
    cur_lane = net.lanes[cur]
    if cur_lane.kind == "connector":
        return one_hot_command(cur_lane.turn)
    dist = cur_lane.length - fix.s if fix.lane_id == cur else 0.0
    for j in range(plan.progress + 1, len(plan.lanes)):
        lane = net.lanes[plan.lanes[j]]
        if lane.kind == "connector":
            if dist <= plan.command_range:
                return one_hot_command(lane.turn)
            return one_hot_command("continue")
        dist += lane.length
        if dist > plan.command_range:
            break
    return one_hot_command("continue")
