"""UCT planning over the adaptation space.

The planner builds a lookahead tree from the root configuration: selection
follows the UCT score mean + c * sqrt(ln N_parent / N_child), unexpanded
actions are tried in index order, rollouts pick uniformly random actions down
to max_depth, and a simulation's total (undiscounted) reward is backed up as a
running mean along its path. The recommended move is the most-visited root
action, ties to the lowest index. A fresh seeded generator per call makes
repeated calls identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .env import RewardProvider
from .ui import ACTIONS, AdaptationAction, ContextModel, Domain, UiConfig, apply_action, default_context


@dataclass(frozen=True)
class MctsConfig:
    simulations: int = 200
    uct_c: float = 1.414
    max_depth: int = 8
    seed: int = 0

    def __post_init__(self) -> None:
        if self.simulations < 1 or self.max_depth < 1:
            raise ValueError("simulations and max_depth must be >= 1")
        if self.uct_c < 0:
            raise ValueError("uct_c must be >= 0")


class _TreeNode:
    __slots__ = ("state", "depth", "children", "visits", "total", "next_untried")

    def __init__(self, state: UiConfig, depth: int) -> None:
        self.state = state
        self.depth = depth
        self.children: dict[int, _TreeNode] = {}
        self.visits = 0
        self.total = 0.0
        self.next_untried = 0


def mcts_plan(
    root: UiConfig,
    domain: Domain,
    rp: RewardProvider,
    cfg: MctsConfig = MctsConfig(),
    ctx: Optional[ContextModel] = None,
    actions: Sequence[AdaptationAction] = ACTIONS,
) -> AdaptationAction:
    """Plan one move from `root`. `actions` restricts the move set (handy for
    small exhaustive cross-checks); rewards come from rp on (state, action)."""
    context = ctx if ctx is not None else default_context()
    rng = np.random.default_rng(cfg.seed)
    root_node = _TreeNode(root, 0)

    for _ in range(cfg.simulations):
        node = root_node
        path = [node]
        total_reward = 0.0

        # Selection: follow UCT while fully expanded; expand one untried action.
        while node.depth < cfg.max_depth:
            if node.next_untried < len(actions):
                ai = node.next_untried
                node.next_untried += 1
                reward = float(rp(node.state, actions[ai], context))
                child = _TreeNode(apply_action(node.state, actions[ai]), node.depth + 1)
                node.children[ai] = child
                total_reward += reward
                node = child
                path.append(node)
                break
            best_ai = -1
            best_score = -math.inf
            log_n = math.log(node.visits)
            for ai, child in node.children.items():
                score = child.total / child.visits + cfg.uct_c * math.sqrt(log_n / child.visits)
                if score > best_score:
                    best_score = score
                    best_ai = ai
            reward = float(rp(node.state, actions[best_ai], context))
            total_reward += reward
            node = node.children[best_ai]
            path.append(node)

        # Rollout: uniform-random actions to the depth horizon.
        state = node.state
        for depth in range(node.depth, cfg.max_depth):
            action = actions[int(rng.integers(len(actions)))]
            total_reward += float(rp(state, action, context))
            state = apply_action(state, action)

        for visited in path:
            visited.visits += 1
            visited.total += total_reward

    best_ai = 0
    best_visits = -1
    for ai in sorted(root_node.children):
        child = root_node.children[ai]
        if child.visits > best_visits:
            best_visits = child.visits
            best_ai = ai
    return actions[best_ai]
