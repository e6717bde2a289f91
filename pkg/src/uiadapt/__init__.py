"""Per-user reinforcement learning of UI adaptation policies from pairwise
human feedback: clip recording, active ranking, preference-model training,
dual-source rewards, tabular/actor-critic/UCT policies, a crossover study
harness, and an HTTP service tying the loop together."""

__version__ = "0.1.0"
