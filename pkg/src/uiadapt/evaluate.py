"""Greedy-policy evaluation over seeded episodes.

A policy here is any callable (domain, config) -> action; adapters wrap the
Q-table, the actor-critic net, the UCT planner, and a scripted oracle that
walks straight toward a persona's preferred configuration (highest-weight
mismatch first).
"""

from __future__ import annotations

import io
import csv
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .actor_critic import ACModel, ActMode, ac_act
from .env import AdaptEnv, EpisodeConfig, RewardProvider
from .mcts import MctsConfig, mcts_plan
from .personas import Persona, preferred_config
from .qlearn import QTable, q_policy
from .ui import (
    ATTRIBUTES,
    AdaptationAction,
    ContextModel,
    Domain,
    UiConfig,
    config_slug,
    default_context,
    encode_state,
)

PolicyFn = Callable[[Domain, UiConfig], AdaptationAction]


def q_policy_fn(table: QTable) -> PolicyFn:
    return lambda domain, config: q_policy(table, domain, config)


def ac_policy_fn(model: ACModel) -> PolicyFn:
    def policy(domain: Domain, config: UiConfig) -> AdaptationAction:
        return ac_act(model, encode_state(config, domain), ActMode.GREEDY)

    return policy


def mcts_policy_fn(
    rp: RewardProvider, cfg: MctsConfig = MctsConfig(), ctx: Optional[ContextModel] = None
) -> PolicyFn:
    return lambda domain, config: mcts_plan(config, domain, rp, cfg, ctx=ctx)


def noop_policy_fn() -> PolicyFn:
    """The non-adaptive technique: never changes anything."""
    return lambda domain, config: AdaptationAction.noop()


def oracle_policy_fn(persona: Persona, ctx: Optional[ContextModel] = None) -> PolicyFn:
    """Scripted optimum-seeker: fixes the highest-weight mismatched attribute."""

    def policy(domain: Domain, config: UiConfig) -> AdaptationAction:
        context = ctx if ctx is not None else default_context()
        pref = preferred_config(persona, domain, context)
        best: Optional[AdaptationAction] = None
        best_w = -1.0
        for w, attr in zip(persona.weights, ATTRIBUTES):
            if config.get(attr) != pref.get(attr) and w > best_w:
                best = AdaptationAction.assign(attr, pref.get(attr))
                best_w = w
        return best if best is not None else AdaptationAction.noop()

    return policy


@dataclass(frozen=True)
class EpisodeRecord:
    index: int
    ret: float
    steps_to_optimal: int
    final_config: UiConfig


@dataclass(frozen=True)
class EvalMetrics:
    mean_return: float
    mean_steps_to_optimal: float
    final_config_match_rate: float
    episodes: tuple[EpisodeRecord, ...]


def evaluate(
    policy: PolicyFn,
    episode_cfg: EpisodeConfig,
    rp: RewardProvider,
    target: UiConfig,
    n_episodes: int = 20,
    seed: int = 0,
) -> EvalMetrics:
    """Roll the policy for n episodes; steps_to_optimal is the first step index
    at which the state equals `target` (0 when starting there, horizon+1 when
    never reached)."""
    if n_episodes < 1:
        raise ValueError("n_episodes must be >= 1")
    env = AdaptEnv(EpisodeConfig(
        domain=episode_cfg.domain,
        horizon=episode_cfg.horizon,
        start=episode_cfg.start,
        seed=seed,
        context=episode_cfg.context,
    ), rp)
    records = []
    for i in range(n_episodes):
        state = env.reset()
        reached = state == target
        steps_to = 0 if reached else episode_cfg.horizon + 1
        total = 0.0
        for t in range(1, episode_cfg.horizon + 1):
            outcome = env.step(policy(episode_cfg.domain, state))
            state = outcome.next_state
            total += outcome.reward
            if not reached and state == target:
                reached = True
                steps_to = t
        records.append(EpisodeRecord(i, total, steps_to, state))
    n = len(records)
    return EvalMetrics(
        mean_return=sum(r.ret for r in records) / n,
        mean_steps_to_optimal=sum(r.steps_to_optimal for r in records) / n,
        final_config_match_rate=sum(1 for r in records if r.final_config == target) / n,
        episodes=tuple(records),
    )


def metrics_to_csv(metrics: EvalMetrics) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["episode", "return", "steps_to_optimal", "final_config"])
    for r in metrics.episodes:
        writer.writerow([r.index, f"{r.ret:.10g}", r.steps_to_optimal, config_slug(r.final_config)])
    return buf.getvalue()
