"""Experiment configuration: one JSON document driving every pipeline stage.

Schema (all keys optional, defaults below):

  sim        — map seeds, kinematics constants, agent counts, raster spec
  collect    — policy kind, duration, cameras, densities, conditions, seed
  weak       — D^l fraction, target heading sigma, seed
  pretrain   — method, iterations, batch, lr, seeds
  affordance — probe/finetune mode, iterations, seeds
  controller — PID gains (or "tune"), target speed, hazard threshold
  eval       — towns, densities, conditions, driving seeds, step cap
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field, fields
from pathlib import Path


class ConfigError(Exception):
    """Schema violation; carries the offending field path."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass
class SimParams:
    dt: float = 0.05  # 20 fps
    # kinematic bicycle (documented invented constants)
    k_throttle: float = 3.0   # m/s^2 at full throttle
    k_brake: float = 8.0      # m/s^2 at full brake
    k_drag: float = 0.05      # 1/s speed decay
    wheelbase: float = 2.5    # m
    max_steer: float = 0.5    # rad at |steer| = 1
    # geometry
    lane_width: float = 4.0
    junction_radius: float = 8.0
    ego_length: float = 4.2
    ego_width: float = 1.8
    vehicle_length: float = 4.2
    vehicle_width: float = 1.8
    ped_radius: float = 0.35
    offroad_margin: float = 0.8   # extra slack beyond half lane width
    goal_radius: float = 5.0
    # affordances
    hazard_range: float = 10.0
    corridor_step: float = 0.05
    # raster
    raster_size: int = 64
    raster_res: float = 0.5       # m per pixel
    anchor_col: float = 31.5      # ego pixel (facing up)
    anchor_row: float = 47.5
    camera_shift: float = 1.0     # lateral offset of left/right cameras, m
    global_res: float = 0.25      # static-layer rasterization, m per cell
    # commands
    command_range: float = 20.0   # emit turn command within this arc distance
    # traffic lights (two alternating groups per junction)
    light_green: float = 12.0
    light_red: float = 8.0
    light_hold_window: float = 3.0  # actuated hold: green persists while a
                                    # moving vehicle is this close to the line
    # agent behavior
    density_counts: dict = field(default_factory=lambda: {
        "empty": [0, 0], "regular": [8, 12], "dense": [20, 40]})
    agent_speed_range: tuple = (4.0, 7.0)
    agent_accel: float = 2.0
    agent_brake: float = 6.0
    agent_gap: float = 5.0        # standstill gap to leader, m
    ped_walk_speed: float = 1.0
    ped_cross_speed: float = 1.2
    ped_cross_prob: float = 0.02  # per step at a crosswalk approach
    ped_safe_gap: float = 12.0    # do not start crossing with traffic closer
    # maps (baked seeds make towns stable artifacts)
    map_seeds: dict = field(default_factory=lambda: {"townA": 11, "townB": 29})
    map_grid: dict = field(default_factory=lambda: {"townA": [4, 4], "townB": [3, 4]})
    map_spacing: dict = field(default_factory=lambda: {"townA": 50.0, "townB": 45.0})
    route_min_dist: dict = field(default_factory=lambda: {"townA": 300.0, "townB": 150.0})
    routes_per_town: int = 25


@dataclass
class CollectParams:
    policy: str = "expert"                 # expert | random
    duration_steps: int = 40000
    cameras: list = field(default_factory=lambda: ["center", "left", "right"])
    densities: list = field(default_factory=lambda: ["regular", "dense"])
    conditions: list = field(default_factory=lambda: [0, 1, 2, 3])
    map_id: str = "townA"
    seed: int = 0
    episode_cap: int = 2000


@dataclass
class WeakParams:
    fraction: float = 0.01
    sigma_target: float = 0.06   # rad
    window: int = 40             # contiguous frames per sub-sequence
    seed: int = 0


@dataclass
class TrainParams:
    """ADAM schedule shared by encoder pre-training and affordance heads."""

    lr0: float = 2e-4
    batch_size: int = 64
    iterations: int = 20000
    lambda_v: float = 0.05     # speed-branch weight in the BC loss
    lambda_fwd: float = 1.0    # forward-term weight
    lambda_psi: float = 1.0    # psi weight in the affordance loss
    d_z: int = 128
    conv_channels: tuple = (16, 32, 64)


@dataclass
class PretrainParams:
    method: str = "bc"         # bc | inverse | forward | contrastive | none
    seeds: list = field(default_factory=lambda: [0, 1, 2])
    train: TrainParams = field(default_factory=TrainParams)


@dataclass
class AffordanceParams:
    mode: str = "linear"       # linear | mlp3
    seeds: list = field(default_factory=lambda: [0, 1, 2])
    train: TrainParams = field(default_factory=lambda: TrainParams(iterations=4000))


@dataclass
class ControllerParams:
    # steering PID (frozen by tune_gains on townA dense, GT affordances)
    steer_kp: float = 16.0
    steer_ki: float = 2.0
    steer_kd: float = 0.4
    # speed PID
    speed_kp: float = 0.5
    speed_ki: float = 0.15
    speed_kd: float = 0.0
    v_target: float = 20.0 / 3.6   # 20 km/h
    hazard_threshold: float = 0.5
    integral_max: float = 2.0


@dataclass
class EvalParams:
    towns: list = field(default_factory=lambda: ["townA", "townB"])
    densities: list = field(default_factory=lambda: ["empty", "regular", "dense"])
    conditions: list = field(default_factory=lambda: [0])
    seeds: list = field(default_factory=lambda: [0, 1, 2])
    step_cap: int = 3000


@dataclass
class RandomPolicyParams:
    steer_walk_std: float = 0.15
    p_go_to_stop: float = 0.05
    p_stop_to_go: float = 0.20
    throttle_go: float = 0.5
    brake_stop: float = 0.4


@dataclass
class ExperimentConfig:
    sim: SimParams = field(default_factory=SimParams)
    collect: CollectParams = field(default_factory=CollectParams)
    weak: WeakParams = field(default_factory=WeakParams)
    pretrain: PretrainParams = field(default_factory=PretrainParams)
    affordance: AffordanceParams = field(default_factory=AffordanceParams)
    controller: ControllerParams = field(default_factory=ControllerParams)
    eval: EvalParams = field(default_factory=EvalParams)
    random_policy: RandomPolicyParams = field(default_factory=RandomPolicyParams)


_SECTION_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}
_VALID_METHODS = ("bc", "inverse", "forward", "contrastive", "none")
_VALID_POLICIES = ("expert", "random")
_VALID_MODES = ("linear", "mlp3")
_VALID_DENSITIES = ("empty", "regular", "dense")
_VALID_CAMERAS = ("center", "left", "right")


def _build(cls, data, path):
    known = {f.name: f for f in fields(cls)}
    kwargs = {}
    for key, value in data.items():
        if key not in known:
            raise ConfigError(f"{path}.{key}", "unknown field")
        f = known[key]
        if dataclasses.is_dataclass(f.default_factory()) if f.default_factory is not dataclasses.MISSING else False:
            kwargs[key] = _build(type(f.default_factory()), value, f"{path}.{key}")
        else:
            kwargs[key] = value
    return cls(**kwargs)


def load_config(source) -> ExperimentConfig:
    """Build an ExperimentConfig from a dict, JSON string, or file path."""
    if isinstance(source, ExperimentConfig):
        return validate_config(source)
    if isinstance(source, (str, Path)) and Path(source).exists():
        data = json.loads(Path(source).read_text())
    elif isinstance(source, str):
        data = json.loads(source)
    else:
        data = dict(source)
    cfg = ExperimentConfig()
    for section, value in data.items():
        if section not in _SECTION_TYPES:
            raise ConfigError(section, "unknown section")
        if not isinstance(value, dict):
            raise ConfigError(section, "section must be an object")
        current = getattr(cfg, section)
        sub = _build(type(current), value, section)
        setattr(cfg, section, sub)
    return validate_config(cfg)


def validate_config(cfg: ExperimentConfig) -> ExperimentConfig:
    if cfg.pretrain.method not in _VALID_METHODS:
        raise ConfigError("pretrain.method", f"must be one of {_VALID_METHODS}")
    if cfg.collect.policy not in _VALID_POLICIES:
        raise ConfigError("collect.policy", f"must be one of {_VALID_POLICIES}")
    if cfg.affordance.mode not in _VALID_MODES:
        raise ConfigError("affordance.mode", f"must be one of {_VALID_MODES}")
    if cfg.collect.map_id not in cfg.sim.map_seeds:
        raise ConfigError("collect.map_id", f"unknown map {cfg.collect.map_id!r}")
    for i, d in enumerate(cfg.collect.densities):
        if d not in _VALID_DENSITIES:
            raise ConfigError(f"collect.densities[{i}]", f"must be one of {_VALID_DENSITIES}")
    for i, c in enumerate(cfg.collect.cameras):
        if c not in _VALID_CAMERAS:
            raise ConfigError(f"collect.cameras[{i}]", f"must be one of {_VALID_CAMERAS}")
    if not 0.0 < cfg.weak.fraction <= 1.0:
        raise ConfigError("weak.fraction", "must be in (0, 1]")
    if cfg.pretrain.train.iterations <= 0:
        raise ConfigError("pretrain.train.iterations", "must be positive")
    if not 0.0 < cfg.controller.hazard_threshold < 1.0:
        raise ConfigError("controller.hazard_threshold", "must be in (0, 1)")
    if cfg.controller.integral_max <= 0:
        raise ConfigError("controller.integral_max", "must be positive")
    if cfg.collect.duration_steps <= 0:
        raise ConfigError("collect.duration_steps", "must be positive")
    return cfg


def config_to_dict(cfg: ExperimentConfig) -> dict:
    return dataclasses.asdict(cfg)


def dump_config(cfg: ExperimentConfig) -> str:
    return json.dumps(config_to_dict(cfg), indent=2, sort_keys=True)


def config_hash(cfg: ExperimentConfig) -> str:
    canon = json.dumps(config_to_dict(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def file_hash(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()
