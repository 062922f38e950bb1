"""Planar geometry helpers shared across the simulator."""
from __future__ import annotations

import math

import numpy as np

TWO_PI = 2.0 * math.pi


def wrap_angle(a: float) -> float:
    """Wrap to [-pi, pi]."""
    w = math.fmod(a + math.pi, TWO_PI)
    if w < 0.0:
        w += TWO_PI
    return w - math.pi


def wrap_angles(a: np.ndarray) -> np.ndarray:
    return np.mod(a + np.pi, TWO_PI) - np.pi


def heading_vec(h: float) -> np.ndarray:
    return np.array([math.cos(h), math.sin(h)])


def right_normal(h: float) -> np.ndarray:
    # right-hand side of a heading in an x-east / y-north frame
    return np.array([math.sin(h), -math.cos(h)])


def cumulative_lengths(points: np.ndarray) -> np.ndarray:
    seg = np.diff(points, axis=0)
    return np.concatenate([[0.0], np.cumsum(np.hypot(seg[:, 0], seg[:, 1]))])


def polyline_point(points: np.ndarray, cum_s: np.ndarray, s: float) -> np.ndarray:
    """Point at arclength s (clamped to the polyline extent)."""
    x = np.interp(s, cum_s, points[:, 0])
    y = np.interp(s, cum_s, points[:, 1])
    return np.array([x, y])


def polyline_points(points: np.ndarray, cum_s: np.ndarray, s: np.ndarray) -> np.ndarray:
    x = np.interp(s, cum_s, points[:, 0])
    y = np.interp(s, cum_s, points[:, 1])
    return np.stack([x, y], axis=1)


def segment_index(cum_s: np.ndarray, s: float) -> int:
    i = int(np.searchsorted(cum_s, s, side="right")) - 1
    return min(max(i, 0), len(cum_s) - 2)


def rect_corners(center, heading: float, length: float, width: float) -> np.ndarray:
    """Corners of an oriented rectangle, CCW."""
    d = heading_vec(heading)
    r = right_normal(heading)
    hl, hw = 0.5 * length, 0.5 * width
    c = np.asarray(center, dtype=float)
    return np.array([
        c + hl * d + hw * r,
        c + hl * d - hw * r,
        c - hl * d - hw * r,
        c - hl * d + hw * r,
    ])


def rects_overlap(corners_a: np.ndarray, corners_b: np.ndarray) -> bool:
    """Separating-axis test for two convex quads."""
    for quad in (corners_a, corners_b):
        for i in range(4):
            edge = quad[(i + 1) % 4] - quad[i]
            axis = np.array([-edge[1], edge[0]])
            pa = corners_a @ axis
            pb = corners_b @ axis
            if pa.max() < pb.min() or pb.max() < pa.min():
                return False
    return True


def point_rect_distance(p, center, heading: float, length: float, width: float) -> float:
    """Distance from a point to an oriented rectangle (0 inside)."""
    d = heading_vec(heading)
    r = right_normal(heading)
    rel = np.asarray(p, dtype=float) - np.asarray(center, dtype=float)
    u = abs(float(rel @ d)) - 0.5 * length
    v = abs(float(rel @ r)) - 0.5 * width
    du = u if u > 0.0 else 0.0
    dv = v if v > 0.0 else 0.0
    return math.sqrt(du * du + dv * dv)


def points_rect_distance(pts: np.ndarray, center, heading: float,
                         length: float, width: float) -> np.ndarray:
    """Vectorized point_rect_distance over [N, 2] points."""
    d = heading_vec(heading)
    r = right_normal(heading)
    rel = pts - np.asarray(center, dtype=float)
    u = np.abs(rel @ d) - 0.5 * length
    v = np.abs(rel @ r) - 0.5 * width
    du = np.maximum(u, 0.0)
    dv = np.maximum(v, 0.0)
    return np.sqrt(du * du + dv * dv)


def dist_point_segment(p, a, b) -> float:
    ab = np.asarray(b, dtype=float) - np.asarray(a, dtype=float)
    ap = np.asarray(p, dtype=float) - np.asarray(a, dtype=float)
    denom = float(ab @ ab)
    t = 0.0 if denom == 0.0 else float(ap @ ab) / denom
    t = min(max(t, 0.0), 1.0)
    closest = np.asarray(a, dtype=float) + t * ab
    return float(np.hypot(*(np.asarray(p, dtype=float) - closest)))


def bezier_points(p0, p1, p2, p3, n: int) -> np.ndarray:
    """Cubic Bezier sampled at n points (inclusive of endpoints)."""
    t = np.linspace(0.0, 1.0, n)[:, None]
    p0, p1, p2, p3 = (np.asarray(p, dtype=float) for p in (p0, p1, p2, p3))
    return ((1 - t) ** 3 * p0 + 3 * (1 - t) ** 2 * t * p1
            + 3 * (1 - t) * t ** 2 * p2 + t ** 3 * p3)
