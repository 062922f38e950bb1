"""Single-step world dynamics: ego kinematics, agent behavior, lights, events.

Update order per step (documented; determinism depends on it):
  1. traffic lights (actuated green hold, then clock advance)
  2. ego kinematic bicycle
  3. vehicle agents (lane following, red lights, leaders, pedestrians, ego)
  4. pedestrians (patrol sidewalks, seeded crosswalk crossings)
  5. events (collision, off-road, stop-line crossings, goal)
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..types import Action
from .geometry import heading_vec, rect_corners, rects_overlap, wrap_angle
from .localize import OffRoadError, lane_localize
from .state import WorldState

EVENT_BITS = {
    "collision": 1,
    "red_light_crossing": 2,
    "goal_reached": 4,
    "offroad": 8,
    "stop_line_crossed": 16,
}

GATE_RADIUS = 15.0  # agents hold at junction entries while the ego is this close


@dataclass
class StepEvents:
    collision: bool = False
    offroad: bool = False
    red_light_crossing: bool = False
    stop_line_crossed: bool = False
    goal_reached: bool = False

    def bits(self) -> int:
        b = 0
        for name, bit in EVENT_BITS.items():
            if getattr(self, name):
                b |= bit
        return b

    @property
    def failed(self) -> bool:
        return self.collision or self.offroad


def _safe_fix(state):
    try:
        return lane_localize(state.ego[:3], state.network)
    except OffRoadError:
        return None


def _update_lights(state: WorldState, dt: float, ego_fix):
    net = state.network
    if not net.lights:
        return
    hold_w = net.params.light_hold_window
    lane_veh = {}
    for v in state.vehicles:
        lane_veh.setdefault(v.lane_id, []).append(v)
    for lt in net.lights:
        clock = float(state.light_clock[lt.light_id])
        if not lt.is_red(clock) and lt.is_red(clock + dt):
            # actuated hold: defer the red onset while a moving vehicle is
            # about to cross the line (green clearance; avoids onset races)
            held = False
            for v in lane_veh.get(lt.lane_id, ()):
                if v.speed > 0.5 and lt.stop_s - hold_w <= v.s <= lt.stop_s:
                    held = True
                    break
            if not held and ego_fix is not None and ego_fix.lane_id == lt.lane_id \
                    and state.ego_speed > 0.5 \
                    and lt.stop_s - hold_w <= ego_fix.s <= lt.stop_s:
                held = True
            if held:
                continue
        state.light_clock[lt.light_id] = clock + dt


def _move_ego(state: WorldState, action: Action, dt: float):
    p = state.network.params
    x, y, heading, speed = state.ego
    acc = (p.k_throttle * action.throttle - p.k_brake * action.brake
           - p.k_drag * speed)
    speed = max(0.0, speed + dt * acc)
    heading = wrap_angle(heading + dt * (speed / p.wheelbase)
                         * math.tan(action.steer * p.max_steer))
    x += dt * speed * math.cos(heading)
    y += dt * speed * math.sin(heading)
    state.ego[:] = (x, y, heading, speed)


def _ped_lane_frame(net, ped, lane_id):
    """Pedestrian coordinates in a road lane's frame: (s_on_lane, offset)."""
    e = net.edges[ped.edge_id]
    if lane_id == e.lane_fwd:
        return ped.s, ped.lateral - 0.5 * net.params.lane_width
    return e.length - ped.s, -(ped.lateral + 0.5 * net.params.lane_width)


def _vehicle_obstacle_gap(state: WorldState, v, lane_peds, ego_near):
    """Smallest forward gap to any obstacle on this vehicle's path."""
    net = state.network
    p = net.params
    lane = net.lanes[v.lane_id]
    look = v.speed ** 2 / (2.0 * p.agent_brake) + p.agent_gap + 12.0
    half_len = 0.5 * p.vehicle_length
    gap = math.inf

    chain = [v.lane_id]
    if look - (lane.length - v.s) > 0.0:
        nxt = net.default_successor(v.lane_id)
        if nxt is not None:
            chain.append(nxt)

    for lane_id in chain:
        cl = net.lanes[lane_id]
        # arc distance from v to arclength s on this chain lane
        off = -v.s if lane_id == v.lane_id else lane.length - v.s
        # leading vehicles
        for u in state.vehicles:
            if u is v or u.lane_id != lane_id:
                continue
            ds = off + u.s
            if ds > 0.0:
                gap = min(gap, ds - p.vehicle_length)
        # red light stop line
        lt = net.lights_by_lane.get(lane_id)
        if lt is not None and lt.is_red(float(state.light_clock[lt.light_id])):
            stop_gap = off + lt.stop_s - half_len
            if stop_gap > 0.0:
                # run through only when stopping is physically impossible
                if stop_gap >= v.speed ** 2 / (2.0 * p.agent_brake) - 0.5:
                    gap = min(gap, stop_gap)
        # crossing pedestrians (road lanes carry sidewalks)
        if cl.kind == "road":
            half_w = 0.5 * p.lane_width
            for ped in lane_peds.get(lane_id, ()):
                s_l, off_l = _ped_lane_frame(net, ped, lane_id)
                margin = 1.5 if ped.crossing else 0.0
                if abs(off_l) < half_w + p.ped_radius + margin:
                    ds = off + s_l
                    if ds > 0.0:
                        gap = min(gap, ds - half_len - p.ped_radius)
        # ego blocking this lane; inside junctions agents keep right of way
        # (the ego's own hazard braking yields to them), so the check applies
        # to road lanes only — this breaks mutual-wait deadlocks
        if ego_near and cl.kind == "road":
            s_e, dist2 = _project_lane(net, cl, state.ego_pos)
            if math.sqrt(dist2) < 0.5 * p.lane_width + 0.5 * p.ego_width:
                ds = off + s_e
                if ds > 0.0:
                    gap = min(gap, ds - half_len - 0.5 * p.ego_length)
        # junction gate: brake toward the entry while a moving ego is near the
        # junction; a stopped ego releases the gate (its hazard braking yields
        # to crossing agents), which rules out mutual waits
        if cl.kind == "road" and lane_id == v.lane_id \
                and state.ego_speed > 0.3:
            nxt = net.default_successor(lane_id)
            if nxt is not None:
                inter = net.junction_of_lane.get(nxt)
                if inter is not None and np.hypot(
                        *(state.ego_pos - inter.center)) < GATE_RADIUS:
                    gap = min(gap, lane.length - GATE_HOLD_BACK - v.s)
    return gap


def _project_lane(net, lane, point):
    """(s, dist2) of a point projected on one lane; None when degenerate."""
    rel = np.asarray(point, dtype=float) - lane.points[:-1]
    seg = np.diff(lane.points, axis=0)
    seg_len2 = (seg * seg).sum(axis=1)
    t = np.clip((rel * seg).sum(axis=1) / seg_len2, 0.0, 1.0)
    closest = lane.points[:-1] + t[:, None] * seg
    d2 = ((np.asarray(point, dtype=float) - closest) ** 2).sum(axis=1)
    i = int(np.argmin(d2))
    s = float(lane.cum_s[i] + t[i] * math.sqrt(seg_len2[i]))
    return s, float(d2[i])


def _move_vehicles(state: WorldState, dt: float):
    net = state.network
    p = net.params
    lane_peds = {}
    for ped in state.pedestrians:
        e = net.edges[ped.edge_id]
        lane_peds.setdefault(e.lane_fwd, []).append(ped)
        lane_peds.setdefault(e.lane_bwd, []).append(ped)
    for v in state.vehicles:
        pos, _ = v.pose(net)
        ego_near = bool(np.hypot(*(state.ego_pos - pos)) < 45.0)
        gap = _vehicle_obstacle_gap(state, v, lane_peds, ego_near)
        need = v.speed ** 2 / (2.0 * p.agent_brake) + p.agent_gap
        if gap < need:
            v.speed = max(0.0, v.speed - p.agent_brake * dt)
        elif gap > need + 4.0 and v.speed < v.target_speed:
            v.speed = min(v.target_speed, v.speed + p.agent_accel * dt)
        v.s += v.speed * dt
        lane = net.lanes[v.lane_id]
        while v.s > lane.length:
            succ = lane.successors
            if not succ:
                v.s = lane.length
                v.speed = 0.0
                break
            if len(succ) == 1:
                nxt = succ[0]
            else:
                weights = np.array([3.0 if net.lanes[s].turn == "straight" else 1.0
                                    for s in succ])
                nxt = succ[int(state.rng.choice(len(succ), p=weights / weights.sum()))]
            if lane.kind == "road":
                inter = net.junction_of_lane.get(nxt)
                if inter is not None and np.hypot(
                        *(state.ego_pos - inter.center)) < GATE_RADIUS:
                    v.s = lane.length   # hold at the entry until the ego clears
                    v.speed = 0.0
                    break
            v.s -= lane.length
            v.lane_id = nxt
            lane = net.lanes[nxt]


def _traffic_near_crossing(state: WorldState, edge, s_cross) -> bool:
    net = state.network
    p = net.params
    for lane_id in (edge.lane_fwd, edge.lane_bwd):
        lane = net.lanes[lane_id]
        s_on = s_cross if lane_id == edge.lane_fwd else edge.length - s_cross
        for v in state.vehicles:
            if v.lane_id == lane_id and v.speed > 0.3 \
                    and 0.0 < s_on - v.s < p.ped_safe_gap:
                return True
    cross_pt = edge.p0 + edge.dir * s_cross
    if np.hypot(*(state.ego_pos - cross_pt)) < p.ped_safe_gap \
            and state.ego_speed > 0.3:
        return True
    return False


def _ped_step_blocked(state, ped, new_lateral) -> bool:
    """Crossing pedestrians wait instead of walking into a footprint."""
    net = state.network
    p = net.params
    e = net.edges[ped.edge_id]
    pos = e.p0 + e.dir * ped.s + e.normal * new_lateral
    clearance = p.ped_radius + 0.4
    if np.hypot(*(pos - state.ego_pos)) < 6.0:
        from .geometry import point_rect_distance
        if point_rect_distance(pos, state.ego_pos, state.ego_heading,
                               p.ego_length, p.ego_width) <= clearance:
            return True
    for v in state.vehicles:
        vpos, vh = v.pose(net)
        if np.hypot(*(pos - vpos)) < 6.0:
            from .geometry import point_rect_distance
            if point_rect_distance(pos, vpos, vh, p.vehicle_length,
                                   p.vehicle_width) <= clearance:
                return True
    return False


def _move_pedestrians(state: WorldState, dt: float):
    net = state.network
    p = net.params
    sidewalk = p.lane_width + 1.0
    for ped in state.pedestrians:
        e = net.edges[ped.edge_id]
        if ped.crossing != 0:
            new_lateral = ped.lateral + ped.crossing * p.ped_cross_speed * dt
            if _ped_step_blocked(state, ped, new_lateral):
                continue
            ped.lateral = new_lateral
            if (ped.crossing > 0 and ped.lateral >= ped.target_lateral) or \
                    (ped.crossing < 0 and ped.lateral <= ped.target_lateral):
                ped.lateral = ped.target_lateral
                ped.crossing = 0
            continue
        ped.s += ped.walk_dir * p.ped_walk_speed * dt
        if ped.s < 1.0:
            ped.s = 1.0
            ped.walk_dir = 1
        elif ped.s > e.length - 1.0:
            ped.s = e.length - 1.0
            ped.walk_dir = -1
        if e.crosswalk_s is not None and abs(ped.s - e.crosswalk_s) < 0.6:
            u = float(state.rng.random())
            if u < p.ped_cross_prob and not _traffic_near_crossing(state, e, ped.s):
                ped.target_lateral = -math.copysign(sidewalk, ped.lateral)
                ped.crossing = 1 if ped.target_lateral > ped.lateral else -1


def _check_events(state: WorldState, prev_fix, prev_ego, events: StepEvents):
    net = state.network
    p = net.params
    ego_rect = rect_corners(state.ego_pos, state.ego_heading,
                            p.ego_length, p.ego_width)
    half_diag = 0.5 * math.hypot(p.ego_length, p.ego_width)
    for v in state.vehicles:
        pos, h = v.pose(net)
        if np.hypot(*(pos - state.ego_pos)) > half_diag + 0.5 * math.hypot(
                p.vehicle_length, p.vehicle_width) + 0.2:
            continue
        if rects_overlap(ego_rect, rect_corners(pos, h, p.vehicle_length,
                                                p.vehicle_width)):
            events.collision = True
            break
    if not events.collision:
        from .geometry import point_rect_distance
        for ped in state.pedestrians:
            pos = ped.position(net)
            if np.hypot(*(pos - state.ego_pos)) > half_diag + p.ped_radius + 0.2:
                continue
            if point_rect_distance(pos, state.ego_pos, state.ego_heading,
                                   p.ego_length, p.ego_width) <= p.ped_radius:
                events.collision = True
                break

    if net.is_offroad(state.ego_pos):
        events.offroad = True

    new_fix = _safe_fix(state)
    if prev_fix is not None:
        lt = net.lights_by_lane.get(prev_fix.lane_id)
        if lt is not None:
            crossed = False
            if new_fix is not None and new_fix.lane_id == prev_fix.lane_id:
                crossed = prev_fix.s < lt.stop_s <= new_fix.s
            elif new_fix is not None and \
                    new_fix.lane_id in net.lanes[prev_fix.lane_id].successors:
                crossed = prev_fix.s < lt.stop_s
            if crossed:
                events.stop_line_crossed = True
                if lt.is_red(float(state.light_clock[lt.light_id])):
                    events.red_light_crossing = True

    if np.hypot(*(state.ego_pos - state.goal_xy)) <= p.goal_radius:
        # routes may loop back near their spawn: require actual route progress
        if not state.route_lanes:
            events.goal_reached = True
        else:
            try:
                fr = lane_localize(state.ego[:3], net,
                                   lane_subset=state.route_lanes)
                if state.route_lanes.index(fr.lane_id) >= len(state.route_lanes) - 2:
                    events.goal_reached = True
            except OffRoadError:
                pass
    return new_fix


def step(state: WorldState, action: Action, dt: float):
    """Advance the world by dt under an ego action. Mutates state in place
    and returns (state, StepEvents).
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    if not isinstance(action, Action):
        action = Action(*action)
    events = StepEvents()
    prev_fix = _safe_fix(state)
    prev_ego = state.ego.copy()
    _update_lights(state, dt, prev_fix)
    _move_ego(state, action, dt)
    _move_vehicles(state, dt)
    _move_pedestrians(state, dt)
    _check_events(state, prev_fix, prev_ego, events)
    state.sim_time += dt
    return state, events
