"""Lane-frame localization of free poses."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import wrap_angle
from .network import RoadNetwork


class OffRoadError(Exception):
    """Pose farther than two lane widths from every lane."""


@dataclass(frozen=True)
class LaneFix:
    lane_id: int
    s: float
    lateral: float    # signed, left of lane direction positive
    psi: float        # wrap(heading - lane tangent)


def lane_localize(pose, network: RoadNetwork, lane_subset=None) -> LaneFix:
    """Nearest lane by perpendicular distance, preferring lanes whose tangent
    is within pi/2 of the pose heading. Ties break by distance, then lowest
    lane id. Raises OffRoadError beyond 2 lane widths.
    """
    x, y, heading = float(pose[0]), float(pose[1]), float(pose[2])
    p = np.array([x, y])
    t, dist2, cross = network.project_all(p)
    hdiff = np.abs((network.seg_heading - heading + math.pi) % (2 * math.pi) - math.pi)
    compatible = hdiff < 0.5 * math.pi
    if lane_subset is not None:
        mask = np.isin(network.seg_lane, np.asarray(list(lane_subset)))
        if not mask.any():
            raise OffRoadError("no candidate lanes in subset")
        dist2 = np.where(mask, dist2, np.inf)
    limit = (2.0 * network.params.lane_width) ** 2

    best = None  # (incompatible, dist2, lane_id, seg_idx)
    for use_compat in (True, False):
        d2 = np.where(compatible, dist2, np.inf) if use_compat else dist2
        i = int(np.argmin(d2))
        if math.isfinite(d2[i]) and d2[i] <= limit:
            best = i
            break
    if best is None:
        raise OffRoadError(f"pose ({x:.1f}, {y:.1f}) beyond 2 lane widths of every lane")

    lane = network.lanes[int(network.seg_lane[best])]
    s = float(network.seg_s0[best] + t[best] * network.seg_len[best])
    lateral = math.copysign(math.sqrt(float(dist2[best])), float(cross[best])) \
        if dist2[best] > 0.0 else 0.0
    psi = wrap_angle(heading - float(network.seg_heading[best]))
    return LaneFix(lane.lane_id, s, lateral, psi)
