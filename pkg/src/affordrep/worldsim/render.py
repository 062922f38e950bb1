"""Ego-centric bird's-eye raster observations.

Channel 0: drivable area and lane-centerline markings, sampled from a static
per-map layer (0.25 m cells). Channel 1: dynamic agent occupancy (pixel
centers covered by footprints; the ego itself is not drawn). Channel 2:
traffic-light state painted along stop lines (red bright, green dim).

The ego sits at a fixed anchor pixel facing up. condition_id selects a
channel-0 palette and a fixed image-space noise pattern; geometry never
changes with condition. Pedestrian footprints are inflated to 0.45 m for
painting only, so they always cover at least one pixel.
"""
from __future__ import annotations

import math

import numpy as np

from ..types import Observation
from .geometry import heading_vec, right_normal
from .routes import RoutePlan, next_command
from .state import WorldState

# per-condition (drivable, marking, noise amplitude)
PALETTES = {
    0: (0.50, 1.00, 0.00),
    1: (0.45, 0.90, 0.03),
    2: (0.55, 0.95, 0.03),
    3: (0.40, 0.85, 0.03),
}
GREEN_LIGHT_VALUE = 0.4
RED_LIGHT_VALUE = 1.0
STOPLINE_HALF_THICKNESS = 0.3
PED_PAINT_RADIUS = 0.45

_noise_cache: dict = {}
_pixel_cache: dict = {}


def _noise_pattern(condition_id: int, size: int) -> np.ndarray:
    key = (condition_id, size)
    if key not in _noise_cache:
        rng = np.random.default_rng(1000 + condition_id)
        _noise_cache[key] = rng.uniform(-1.0, 1.0, size=(size, size))
    return _noise_cache[key]


def _pixel_offsets(params):
    """(forward, lateral) offsets of every pixel center, shape [S, S, 2]."""
    key = (params.raster_size, params.raster_res, params.anchor_row, params.anchor_col)
    if key not in _pixel_cache:
        size, res = params.raster_size, params.raster_res
        rows = np.arange(size)[:, None]
        cols = np.arange(size)[None, :]
        fwd = (params.anchor_row - rows) * res * np.ones((1, size))
        lat = (cols - params.anchor_col) * res * np.ones((size, 1))
        _pixel_cache[key] = np.stack([fwd, lat], axis=-1)
    return _pixel_cache[key]


def static_layer(network):
    """Lazy per-map code grid: 0 background, 1 drivable, 2 marking."""
    cached = network.__dict__.get("_static_layer")
    if cached is not None:
        return cached
    p = network.params
    res = p.global_res
    lo, hi = network.bounds
    nx = int(math.ceil((hi[0] - lo[0]) / res)) + 1
    ny = int(math.ceil((hi[1] - lo[1]) / res)) + 1
    dist = np.full((ny, nx), np.inf)

    def window(x0, y0, x1, y1, pad):
        ix0 = max(int((x0 - pad - lo[0]) / res), 0)
        iy0 = max(int((y0 - pad - lo[1]) / res), 0)
        ix1 = min(int((x1 + pad - lo[0]) / res) + 1, nx)
        iy1 = min(int((y1 + pad - lo[1]) / res) + 1, ny)
        xs = lo[0] + (np.arange(ix0, ix1) + 0.5) * res
        ys = lo[1] + (np.arange(iy0, iy1) + 0.5) * res
        return (slice(iy0, iy1), slice(ix0, ix1)), xs[None, :], ys[:, None]

    pad = 0.5 * p.lane_width + res
    for a, vec, ln in zip(network.seg_p0, network.seg_vec, network.seg_len):
        b = a + vec
        sl, xs, ys = window(min(a[0], b[0]), min(a[1], b[1]),
                            max(a[0], b[0]), max(a[1], b[1]), pad)
        relx = xs - a[0]
        rely = ys - a[1]
        t = np.clip((relx * vec[0] + rely * vec[1]) / (ln * ln), 0.0, 1.0)
        dx = relx - t * vec[0]
        dy = rely - t * vec[1]
        d = np.sqrt(dx * dx + dy * dy)
        dist[sl] = np.minimum(dist[sl], d)

    codes = np.zeros((ny, nx), dtype=np.uint8)
    codes[dist <= 0.5 * p.lane_width] = 1
    for inter in network.intersections:
        sl, xs, ys = window(inter.center[0], inter.center[1],
                            inter.center[0], inter.center[1], inter.radius + res)
        d2 = (xs - inter.center[0]) ** 2 + (ys - inter.center[1]) ** 2
        codes[sl][d2 <= inter.radius ** 2] = np.maximum(
            codes[sl][d2 <= inter.radius ** 2], 1)
    codes[dist <= 0.15] = 2

    layer = {"codes": codes, "origin": lo.copy(), "res": res,
             "shape": (ny, nx)}
    network.__dict__["_static_layer"] = layer
    return layer


def camera_pose(state: WorldState, camera: str) -> np.ndarray:
    p = state.network.params
    if camera == "center":
        return state.ego[:3].copy()
    shift = {"left": -p.camera_shift, "right": p.camera_shift}[camera]
    r = right_normal(state.ego_heading)
    pose = state.ego[:3].copy()
    pose[:2] = pose[:2] + shift * r
    return pose


def _world_coords(params, cam_pose):
    offs = _pixel_offsets(params)
    d = heading_vec(float(cam_pose[2]))
    r = right_normal(float(cam_pose[2]))
    return (cam_pose[:2] + offs[..., 0:1] * d + offs[..., 1:2] * r)


def _paint_region(world, cam_pose, params, predicate, channel, value):
    """Set channel pixels whose world centers satisfy predicate (vectorized
    over a bounding window in image coordinates around the object)."""
    channel[predicate(world)] = value


def _image_window(world, cam_pose, params, center, radius):
    """Slice of the image grid that can contain a world disc (bbox in image)."""
    d = heading_vec(float(cam_pose[2]))
    r = right_normal(float(cam_pose[2]))
    rel = np.asarray(center, dtype=float) - cam_pose[:2]
    f = float(rel @ d)
    l = float(rel @ r)
    res = params.raster_res
    row_c = params.anchor_row - f / res
    col_c = params.anchor_col + l / res
    pr = radius / res + 1.0
    r0 = max(int(math.floor(row_c - pr)), 0)
    r1 = min(int(math.ceil(row_c + pr)) + 1, params.raster_size)
    c0 = max(int(math.floor(col_c - pr)), 0)
    c1 = min(int(math.ceil(col_c + pr)) + 1, params.raster_size)
    if r0 >= r1 or c0 >= c1:
        return None
    return slice(r0, r1), slice(c0, c1)


def render_observation(state: WorldState, camera: str,
                       route_plan: RoutePlan) -> Observation:
    net = state.network
    p = net.params
    size = p.raster_size
    cam = camera_pose(state, camera)
    world = _world_coords(p, cam)

    layer = static_layer(net)
    res_g = layer["res"]
    origin = layer["origin"]
    ix = np.floor((world[..., 0] - origin[0]) / res_g).astype(np.int64)
    iy = np.floor((world[..., 1] - origin[1]) / res_g).astype(np.int64)
    ny, nx = layer["shape"]
    valid = (ix >= 0) & (ix < nx) & (iy >= 0) & (iy < ny)
    codes = np.zeros((size, size), dtype=np.uint8)
    codes[valid] = layer["codes"][iy[valid], ix[valid]]

    drv, mark, noise_amp = PALETTES[state.condition_id % len(PALETTES)]
    lut = np.array([0.0, drv, mark])
    ch0 = lut[codes]
    if noise_amp > 0.0:
        ch0 = np.clip(ch0 + noise_amp * _noise_pattern(state.condition_id, size),
                      0.0, 1.0)

    view_radius = p.raster_res * math.hypot(size, size) * 0.75 + 3.0
    ch1 = np.zeros((size, size))
    for v in state.vehicles:
        pos, heading = v.pose(net)
        if np.hypot(*(pos - cam[:2])) > view_radius:
            continue
        win = _image_window(world, cam, p, pos,
                            0.5 * math.hypot(p.vehicle_length, p.vehicle_width))
        if win is None:
            continue
        pts = world[win]
        d = heading_vec(heading)
        r = right_normal(heading)
        rel = pts - pos
        inside = (np.abs(rel @ d) <= 0.5 * p.vehicle_length) & \
                 (np.abs(rel @ r) <= 0.5 * p.vehicle_width)
        ch1[win][inside] = 1.0
    for ped in state.pedestrians:
        pos = ped.position(net)
        if np.hypot(*(pos - cam[:2])) > view_radius:
            continue
        win = _image_window(world, cam, p, pos, PED_PAINT_RADIUS)
        if win is None:
            continue
        pts = world[win]
        d2 = ((pts - pos) ** 2).sum(axis=-1)
        ch1[win][d2 <= PED_PAINT_RADIUS ** 2] = 1.0

    ch2 = np.zeros((size, size))
    for lt in net.lights:
        if np.hypot(*(lt.pos - cam[:2])) > view_radius:
            continue
        lane = net.lanes[lt.lane_id]
        h = lane.heading_at(lt.stop_s)
        r = right_normal(h)
        half_w = 0.5 * p.lane_width
        win = _image_window(world, cam, p, lt.pos,
                            half_w + STOPLINE_HALF_THICKNESS)
        if win is None:
            continue
        pts = world[win]
        rel = pts - lt.pos
        along = rel @ r
        across = rel @ heading_vec(h)
        inside = (np.abs(along) <= half_w) & \
                 (np.abs(across) <= STOPLINE_HALF_THICKNESS)
        value = RED_LIGHT_VALUE if lt.is_red(
            float(state.light_clock[lt.light_id])) else GREEN_LIGHT_VALUE
        ch2[win][inside] = value

    image = np.stack([ch0, ch1, ch2]).astype(np.float32)
    command = next_command(state, route_plan)
    return Observation(image=image, speed=state.ego_speed, command=command)
