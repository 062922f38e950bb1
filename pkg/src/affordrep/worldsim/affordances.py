"""Ground-truth affordances from a world state.

Hazard semantics (normative): the forward corridor is the ego lane's
centerline from the ego's arclength onward, chained into the route successor
(or the lowest-id successor off-route), truncated at 10 m of arc. The
corridor is sampled every 0.05 m (endpoints included); a pedestrian is a
hazard iff any sample point lies within half a lane width plus the pedestrian
radius of its center, a vehicle iff any sample point is within half a lane
width of its footprint rectangle. A red light is a hazard iff its stop line
is strictly ahead on the corridor within 10 m of arc.
"""
from __future__ import annotations

import math

import numpy as np

from ..types import Affordances
from .geometry import points_rect_distance, polyline_points
from .localize import OffRoadError, lane_localize
from .state import WorldState


def route_successor(route_lanes, lane_id):
    """Next lane on the route after lane_id, else None."""
    try:
        i = route_lanes.index(lane_id)
    except ValueError:
        return None
    return route_lanes[i + 1] if i + 1 < len(route_lanes) else None


def corridor_chain(network, route_lanes, lane_id, s0, reach):
    """[(lane_id, s_start, s_end, arc_offset)] covering reach meters ahead."""
    chain = []
    remaining = float(reach)
    cur = int(lane_id)
    s = float(s0)
    off = 0.0
    visited = set()
    while remaining > 1e-12 and cur is not None and cur not in visited:
        visited.add(cur)
        lane = network.lanes[cur]
        take = min(remaining, lane.length - s)
        if take > 1e-12:
            chain.append((cur, s, s + take, off))
            off += take
            remaining -= take
        if remaining <= 1e-12:
            break
        nxt = route_successor(route_lanes, cur)
        if nxt is None:
            nxt = network.default_successor(cur)
        cur = nxt
        s = 0.0
    return chain


def corridor_samples(network, chain, step):
    """Sample points every `step` of arc per chain element, endpoints included."""
    pts = []
    for lane_id, s_a, s_b, _ in chain:
        lane = network.lanes[lane_id]
        n = int(math.floor((s_b - s_a) / step + 1e-9))
        svals = s_a + step * np.arange(n + 1)
        if svals[-1] < s_b - 1e-9:
            svals = np.append(svals, s_b)
        pts.append(polyline_points(lane.points, lane.cum_s, svals))
    if not pts:
        return np.zeros((0, 2))
    return np.concatenate(pts)


def navigation_fix(state: WorldState, pose):
    """Localize against the lane being navigated: the nearest route lane when
    the pose is on the planned route (this is what disambiguates psi inside
    junctions, where connectors to every exit share their start point), else
    the nearest lane overall."""
    net = state.network
    if state.route_lanes:
        try:
            return lane_localize(pose, net, lane_subset=state.route_lanes)
        except OffRoadError:
            pass
    return lane_localize(pose, net)


def affordances_at(state: WorldState, pose) -> Affordances:
    """Affordances for an arbitrary pose in the current world state."""
    net = state.network
    p = net.params
    fix = navigation_fix(state, pose)
    reach = p.hazard_range
    half_w = 0.5 * p.lane_width

    chain = corridor_chain(net, state.route_lanes, fix.lane_id, fix.s, reach)
    samples = corridor_samples(net, chain, p.corridor_step)
    origin = np.asarray(pose[:2], dtype=float)

    hp = 0.0
    for ped in state.pedestrians:
        pos = ped.position(net)
        if np.hypot(*(pos - origin)) > reach + half_w + p.ped_radius + 1.0:
            continue
        d2 = ((samples - pos) ** 2).sum(axis=1)
        if np.any(d2 <= (half_w + p.ped_radius) ** 2):
            hp = 1.0
            break

    hv = 0.0
    for v in state.vehicles:
        pos, heading = v.pose(net)
        guard = reach + half_w + 0.5 * math.hypot(p.vehicle_length, p.vehicle_width) + 1.0
        if np.hypot(*(pos - origin)) > guard:
            continue
        d = points_rect_distance(samples, pos, heading,
                                 p.vehicle_length, p.vehicle_width)
        if np.any(d <= half_w):
            hv = 1.0
            break

    hr = 0.0
    for lane_id, s_a, s_b, off in chain:
        lt = net.lights_by_lane.get(lane_id)
        if lt is None:
            continue
        if s_a < lt.stop_s <= s_b:
            if lt.is_red(float(state.light_clock[lt.light_id])):
                hr = 1.0
            break

    return Affordances(hp, hv, hr, fix.psi)


def compute_affordances(state: WorldState) -> Affordances:
    return affordances_at(state, state.ego[:3])
