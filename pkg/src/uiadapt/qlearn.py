"""Tabular Q-learning over (domain, config, action).

The table is tiny (2 x 120 x 15), so a dense array with visit counts is the
whole agent. Exploration is epsilon-greedy with a linear decay schedule; the
TD update is the standard one-step rule, bootstrapping through episode ends:
adaptation is a continuing process and the fixed horizon only chops the
stream into training windows, so the target is always r + gamma * max Q(s').
With a discount below one and bounded rewards, every entry stays within
r_max / (1 - gamma), which the trainer asserts every thousand steps.

Transitions and the usual reward providers are deterministic, so alpha = 1.0
turns the update into asynchronous value iteration and converges fastest;
keep alpha well below one only when the reward signal is noisy.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from .env import AdaptEnv, EpisodeConfig, RewardProvider
from .ui import (
    ACTION_COUNT,
    ACTIONS,
    CONFIG_COUNT,
    AdaptationAction,
    Domain,
    DOMAINS,
    UiConfig,
    config_index,
    domain_index,
)


@dataclass(frozen=True)
class QConfig:
    alpha: float = 0.1
    gamma: float = 0.95
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05
    epsilon_decay_steps: int = 20_000
    episodes: int = 6_250
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError("alpha must lie in (0, 1]")
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError("gamma must lie in [0, 1)")
        if self.epsilon_decay_steps < 1:
            raise ValueError("epsilon_decay_steps must be >= 1")
        if self.episodes < 0:
            raise ValueError("episodes must be >= 0")


@dataclass
class QTable:
    values: np.ndarray  # (domains, configs, actions) float64
    visits: np.ndarray  # same shape, int64

    @classmethod
    def zeros(cls) -> "QTable":
        shape = (len(DOMAINS), CONFIG_COUNT, ACTION_COUNT)
        return cls(values=np.zeros(shape), visits=np.zeros(shape, dtype=np.int64))

    def __post_init__(self) -> None:
        shape = (len(DOMAINS), CONFIG_COUNT, ACTION_COUNT)
        if self.values.shape != shape or self.visits.shape != shape:
            raise ValueError(f"table arrays must have shape {shape}")


def epsilon_at(step: int, cfg: QConfig) -> float:
    frac = min(1.0, step / cfg.epsilon_decay_steps)
    return cfg.epsilon_start + frac * (cfg.epsilon_end - cfg.epsilon_start)


def q_policy(q: QTable, domain: Domain, config: UiConfig) -> AdaptationAction:
    """Greedy action; ties resolve to the lowest action index (argmax order)."""
    row = q.values[domain_index(domain), config_index(config)]
    return ACTIONS[int(np.argmax(row))]


def q_train(
    episode_cfgs: Sequence[EpisodeConfig],
    rp: RewardProvider,
    cfg: QConfig = QConfig(),
) -> QTable:
    """Train one table over the given episode configs, cycled round-robin."""
    if not episode_cfgs:
        raise ValueError("need at least one episode config")
    table = QTable.zeros()
    rng = np.random.default_rng(cfg.seed)
    envs = [AdaptEnv(ec, rp) for ec in episode_cfgs]
    dom = [domain_index(ec.domain) for ec in episode_cfgs]
    step = 0
    r_max = 0.0
    for episode in range(cfg.episodes):
        which = episode % len(envs)
        env, d = envs[which], dom[which]
        state = env.reset()
        done = False
        while not done:
            si = config_index(state)
            if rng.random() < epsilon_at(step, cfg):
                ai = int(rng.integers(ACTION_COUNT))
            else:
                ai = int(np.argmax(table.values[d, si]))
            outcome = env.step(ACTIONS[ai])
            ni = config_index(outcome.next_state)
            target = outcome.reward + cfg.gamma * float(np.max(table.values[d, ni]))
            table.values[d, si, ai] += cfg.alpha * (target - table.values[d, si, ai])
            table.visits[d, si, ai] += 1
            r_max = max(r_max, abs(outcome.reward))
            state = outcome.next_state
            done = outcome.done
            step += 1
            if step % 1000 == 0:
                bound = r_max / (1.0 - cfg.gamma) + 1e-9
                assert float(np.max(np.abs(table.values))) <= bound, "Q-value bound violated"
    return table


# --- Persistence ---------------------------------------------------------------

AGENT_FORMAT_VERSION = 1


def qtable_to_json(q: QTable) -> dict[str, Any]:
    return {
        "version": AGENT_FORMAT_VERSION,
        "kind": "q",
        "values": q.values.tolist(),
        "visits": q.visits.tolist(),
    }


def qtable_from_json(obj: Mapping[str, Any]) -> QTable:
    if obj.get("version") != AGENT_FORMAT_VERSION:
        raise ValueError(f"unsupported agent format version {obj.get('version')!r}")
    if obj.get("kind") != "q":
        raise ValueError("not a Q-table agent file")
    return QTable(
        values=np.asarray(obj["values"], dtype=np.float64),
        visits=np.asarray(obj["visits"], dtype=np.int64),
    )


def save_qtable(q: QTable, path: str | Path) -> None:
    Path(path).write_text(json.dumps(qtable_to_json(q)), encoding="utf-8")


def load_qtable(path: str | Path) -> QTable:
    return qtable_from_json(json.loads(Path(path).read_text(encoding="utf-8")))
