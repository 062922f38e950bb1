"""Deterministic 2D top-down driving world."""
from .affordances import affordances_at, compute_affordances, corridor_chain, corridor_samples
from .localize import LaneFix, OffRoadError, lane_localize
from .network import RoadNetwork, UnknownMapError, generate_map, generate_route_table
from .render import camera_pose, render_observation, static_layer
from .routes import RoutePlan, build_route_table, load_route_table, next_command, write_route_fixture
from .sim import EVENT_BITS, StepEvents, step
from .state import PedAgent, VehicleAgent, WorldState, spawn_scenario

__all__ = [
    "EVENT_BITS", "LaneFix", "OffRoadError", "PedAgent", "RoadNetwork",
    "RoutePlan", "StepEvents", "UnknownMapError", "VehicleAgent", "WorldState",
    "affordances_at", "build_route_table", "camera_pose", "compute_affordances",
    "corridor_chain", "corridor_samples", "generate_map", "generate_route_table",
    "lane_localize", "load_route_table", "next_command", "render_observation",
    "spawn_scenario", "static_layer", "step",
]
