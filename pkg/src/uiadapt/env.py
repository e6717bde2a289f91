"""Fixed-horizon adaptation MDP and the offline clip corpus generator.

An episode starts from the factory default (or a uniformly random config),
runs for `horizon` steps, and hands each (state, action, context) triple to a
pluggable reward provider. Short trajectory segments ("clips") are recorded
offline for pairwise human comparison; a clip is eight steps at a 500 ms
render hint, about four seconds on screen.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Iterable, Mapping, Sequence

import numpy as np

from .ui import (
    ACTIONS,
    ALL_CONFIGS,
    DEFAULT_CONFIG,
    AdaptationAction,
    ContextModel,
    Domain,
    UiConfig,
    action_from_json,
    action_to_json,
    apply_action,
    config_from_json,
    config_to_json,
    default_context,
)

# reward = rp(state_before, action, context); semantics are provider-defined
# (the persona-backed provider scores the post-action state).
RewardProvider = Callable[[UiConfig, AdaptationAction, ContextModel], float]


class StartMode(str, Enum):
    FIXED_DEFAULT = "fixed_default"
    UNIFORM_RANDOM = "uniform_random"


@dataclass(frozen=True)
class EpisodeConfig:
    domain: Domain
    horizon: int = 8
    start: StartMode = StartMode.FIXED_DEFAULT
    seed: int = 0
    context: ContextModel = field(default_factory=default_context)

    def __post_init__(self) -> None:
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")


@dataclass(frozen=True)
class StepOutcome:
    next_state: UiConfig
    reward: float
    done: bool


class EpisodeExhausted(RuntimeError):
    pass


class AdaptEnv:
    """Episodic environment over the 120-config space.

    reset() draws the start state (a fresh env with the same seed reproduces
    the same start sequence across repeated resets); step() applies the action,
    collects the provider's reward, and flags done after `horizon` steps.
    """

    def __init__(self, cfg: EpisodeConfig, reward_provider: RewardProvider) -> None:
        self.cfg = cfg
        self.reward_provider = reward_provider
        self._rng = np.random.default_rng(cfg.seed)
        self._state: UiConfig | None = None
        self._t = 0
        self._done = True

    @property
    def state(self) -> UiConfig:
        if self._state is None:
            raise RuntimeError("episode not started")
        return self._state

    def reset(self) -> UiConfig:
        if self.cfg.start is StartMode.FIXED_DEFAULT:
            self._state = DEFAULT_CONFIG
        else:
            self._state = ALL_CONFIGS[int(self._rng.integers(len(ALL_CONFIGS)))]
        self._t = 0
        self._done = False
        return self._state

    def step(self, action: AdaptationAction) -> StepOutcome:
        if self._state is None:
            raise RuntimeError("episode not started")
        if self._done:
            raise EpisodeExhausted("episode exhausted")
        reward = float(self.reward_provider(self._state, action, self.cfg.context))
        self._state = apply_action(self._state, action)
        self._t += 1
        self._done = self._t >= self.cfg.horizon
        return StepOutcome(next_state=self._state, reward=reward, done=self._done)


# --- Clip corpus ------------------------------------------------------------

CLIP_LENGTH = 8
RENDER_HINT_MS_PER_STEP = 500


@dataclass(frozen=True)
class ClipStep:
    state: UiConfig
    action: AdaptationAction


@dataclass(frozen=True)
class ClipSegment:
    """A recorded eight-step trajectory snippet shown to humans for comparison."""

    id: str
    domain: Domain
    steps: tuple[ClipStep, ...]
    render_hint_ms_per_step: int = RENDER_HINT_MS_PER_STEP

    def __post_init__(self) -> None:
        if len(self.steps) != CLIP_LENGTH:
            raise ValueError(f"clip must have exactly {CLIP_LENGTH} steps")
        if self.render_hint_ms_per_step <= 0:
            raise ValueError("render_hint_ms_per_step must be positive")
        for i in range(len(self.steps) - 1):
            expected = apply_action(self.steps[i].state, self.steps[i].action)
            if self.steps[i + 1].state != expected:
                raise ValueError(f"clip {self.id}: step {i + 1} state breaks the trajectory")

    def states(self) -> tuple[UiConfig, ...]:
        return tuple(s.state for s in self.steps)


class ClipPolicy(str, Enum):
    UNIFORM_RANDOM = "uniform_random"
    SCRIPTED_SWEEP = "scripted_sweep"


def generate_clips(
    n_per_domain: int,
    policy: ClipPolicy = ClipPolicy.UNIFORM_RANDOM,
    seed: int = 0,
) -> list[ClipSegment]:
    """Deterministically generate n clips per domain (ids "<domain>-NNN").

    UniformRandom draws every action (including no-op) uniformly. ScriptedSweep
    cycles a seeded permutation of the 14 assignment actions across the domain's
    step slots, so every assignment appears in some clip whenever
    8 * n_per_domain >= 14 (i.e. n_per_domain >= 2).
    """
    if n_per_domain < 1:
        raise ValueError("n_per_domain must be >= 1")
    rng = np.random.default_rng(seed)
    assigns = [a for a in ACTIONS if not a.is_noop]
    clips: list[ClipSegment] = []
    for domain in Domain:
        sweep = [assigns[i] for i in rng.permutation(len(assigns))]
        for i in range(n_per_domain):
            state = ALL_CONFIGS[int(rng.integers(len(ALL_CONFIGS)))]
            steps: list[ClipStep] = []
            for k in range(CLIP_LENGTH):
                if policy is ClipPolicy.SCRIPTED_SWEEP:
                    action = sweep[(i * CLIP_LENGTH + k) % len(sweep)]
                else:
                    action = ACTIONS[int(rng.integers(len(ACTIONS)))]
                steps.append(ClipStep(state=state, action=action))
                state = apply_action(state, action)
            clips.append(ClipSegment(id=f"{domain.value}-{i:03d}", domain=domain, steps=tuple(steps)))
    return clips


def clip_to_json(clip: ClipSegment) -> dict[str, Any]:
    return {
        "id": clip.id,
        "domain": clip.domain.value,
        "steps": [
            {"state": config_to_json(s.state), "action": action_to_json(s.action)}
            for s in clip.steps
        ],
        "render_hint_ms_per_step": clip.render_hint_ms_per_step,
    }


def clip_from_json(obj: Mapping[str, Any]) -> ClipSegment:
    return ClipSegment(
        id=str(obj["id"]),
        domain=Domain(obj["domain"]),
        steps=tuple(
            ClipStep(state=config_from_json(s["state"]), action=action_from_json(s["action"]))
            for s in obj["steps"]
        ),
        render_hint_ms_per_step=int(obj.get("render_hint_ms_per_step", RENDER_HINT_MS_PER_STEP)),
    )


def write_corpus(clips: Iterable[ClipSegment], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for clip in clips:
            fh.write(json.dumps(clip_to_json(clip)) + "\n")


def read_corpus(path: str | Path) -> list[ClipSegment]:
    clips = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                clips.append(clip_from_json(json.loads(line)))
    ids = [c.id for c in clips]
    if len(set(ids)) != len(ids):
        raise ValueError("corpus contains duplicate clip ids")
    return clips
