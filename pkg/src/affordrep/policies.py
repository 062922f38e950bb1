"""Driving policies used for data collection: the GT-affordance expert
(the tuned PID controller on ground truth) and a random-roaming policy.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import ControllerParams, RandomPolicyParams
from .controller import PIDState, control
from .types import Action


@dataclass
class PolicyConfig:
    kind: str = "expert"               # expert | random
    seed: int = 0
    gains: ControllerParams = field(default_factory=ControllerParams)
    random: RandomPolicyParams = field(default_factory=RandomPolicyParams)


def expert_action(gt_affordances, speed, command, gains, pid_state, dt):
    """The expert is exactly the GT-affordance PID driver; the command is
    accepted for interface parity but steering needs only psi."""
    return control(gt_affordances, speed, gains, pid_state, dt)


@dataclass
class RandomPolicyState:
    steer: float = 0.0
    mode: str = "go"    # go | stop


def random_action(policy_state: RandomPolicyState, rng,
                  params: RandomPolicyParams | None = None):
    """Clamped steering random walk plus a two-state go/stop Markov chain.
    Throttle and brake are never jointly positive. Draw order: steer noise,
    then the mode transition."""
    params = params or RandomPolicyParams()
    steer = float(np.clip(policy_state.steer
                          + rng.normal(0.0, params.steer_walk_std), -1.0, 1.0))
    u = float(rng.random())
    mode = policy_state.mode
    if mode == "go":
        if u < params.p_go_to_stop:
            mode = "stop"
    else:
        if u < params.p_stop_to_go:
            mode = "go"
    if mode == "go":
        action = Action(steer, params.throttle_go, 0.0)
    else:
        action = Action(steer, 0.0, params.brake_stop)
    return action, RandomPolicyState(steer, mode)


class ExpertDriver:
    """Stateful convenience wrapper around control(); one per episode worker."""

    def __init__(self, gains: ControllerParams, dt: float):
        self.gains = gains
        self.dt = dt
        self.pid = PIDState()

    def reset(self):
        self.pid = PIDState()

    def act(self, affordances, speed, command) -> Action:
        action, self.pid = expert_action(affordances, speed, command,
                                         self.gains, self.pid, self.dt)
        return action

    def peek(self, affordances, speed, command) -> Action:
        """Action from the current PID history without consuming it (used to
        label lateral-camera views from shifted poses)."""
        action, _ = expert_action(affordances, speed, command,
                                  self.gains, PIDState(**vars(self.pid)), self.dt)
        return action


class RandomDriver:
    def __init__(self, params: RandomPolicyParams, seed: int):
        self.params = params
        self.seed = seed
        self.rng = np.random.default_rng(seed)
        self.state = RandomPolicyState()

    def reset(self, episode_index: int = 0):
        self.rng = np.random.default_rng(
            np.random.SeedSequence((self.seed, episode_index)))
        self.state = RandomPolicyState()

    def act(self) -> Action:
        action, self.state = random_action(self.state, self.rng, self.params)
        return action
