"""Synchronous batched advantage actor-critic.

A shared two-layer trunk feeds a 15-way policy head and a scalar value head.
Workers each own an environment and collect fixed-length n-step segments under
the current parameters; segments are batched (in worker-index order) into one
SGD update per round. With several workers the collection runs on threads
(parameters are only read during collection and written once per round after
joining); with a single worker the whole loop is bit-deterministic for a seed.

Per transition with n-step return G and advantage A = G - V(s) (A held
constant for the policy term):

    loss = mean[-log pi(a|s) * A] + value_coef * mean[(G - V(s))^2]
           - entropy_coef * mean[H(pi(.|s))]

Returns bootstrap through episode ends: the horizon only chops a continuing
adaptation stream into training windows, so G always continues with gamma * V
of the successor state. The default learning rate is conservative; with
one-hot state inputs and a deterministic reward signal, 1e-2 converges far
faster and is what the service passes.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from . import nn
from .env import AdaptEnv, EpisodeConfig, RewardProvider
from .ui import (
    ACTION_COUNT,
    ACTIONS,
    STATE_DIM,
    AdaptationAction,
    Domain,
    encode_state,
)

TRUNK_SIZES = (STATE_DIM, 64, 64)


class ActMode(str, Enum):
    SAMPLE = "sample"
    GREEDY = "greedy"


@dataclass(frozen=True)
class ACConfig:
    workers: int = 4
    n_step: int = 5
    gamma: float = 0.95
    entropy_coef: float = 0.01
    value_coef: float = 0.5
    learning_rate: float = 3e-4
    total_steps: int = 1_000_000
    seed: int = 0

    def __post_init__(self) -> None:
        if self.workers < 1 or self.n_step < 1:
            raise ValueError("workers and n_step must be >= 1")
        if self.total_steps < 0:
            raise ValueError("total_steps must be >= 0")
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError("gamma must lie in [0, 1)")
        if self.entropy_coef < 0.0 or self.value_coef < 0.0:
            raise ValueError("entropy_coef and value_coef must be >= 0")
        if self.learning_rate <= 0.0:
            raise ValueError("learning_rate must be positive")


@dataclass
class ACModel:
    """Trunk weights w1/w2 (leaky-rectifier), linear policy and value heads."""

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    w_pi: np.ndarray
    b_pi: np.ndarray
    w_v: np.ndarray
    b_v: np.ndarray
    seed: int = 0

    @classmethod
    def init(cls, seed: int = 0) -> "ACModel":
        rng = np.random.default_rng(seed)
        d0, d1, d2 = TRUNK_SIZES
        return cls(
            w1=nn.he_init(rng, d0, d1),
            b1=np.zeros(d1),
            w2=nn.he_init(rng, d1, d2),
            b2=np.zeros(d2),
            w_pi=nn.xavier_init(rng, d2, ACTION_COUNT),
            b_pi=np.zeros(ACTION_COUNT),
            w_v=nn.xavier_init(rng, d2, 1),
            b_v=np.zeros(1),
            seed=seed,
        )

    def _params(self) -> list[np.ndarray]:
        return [self.w1, self.b1, self.w2, self.b2, self.w_pi, self.b_pi, self.w_v, self.b_v]

    def copy(self) -> "ACModel":
        arrays = [a.copy() for a in self._params()]
        return ACModel(*arrays, seed=self.seed)

    def forward(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(n, 16) -> logits (n, 15), values (n,)."""
        h1 = nn.leaky_relu(x @ self.w1 + self.b1)
        h2 = nn.leaky_relu(h1 @ self.w2 + self.b2)
        return h2 @ self.w_pi + self.b_pi, (h2 @ self.w_v + self.b_v)[:, 0]

    def flat_params(self) -> np.ndarray:
        return np.concatenate([a.ravel() for a in self._params()])

    def set_flat_params(self, flat: np.ndarray) -> None:
        offset = 0
        for arr in self._params():
            n = arr.size
            arr[...] = flat[offset : offset + n].reshape(arr.shape)
            offset += n
        if offset != flat.size:
            raise ValueError("flat parameter vector has the wrong length")


def ac_act(
    m: ACModel,
    x: np.ndarray,
    mode: ActMode = ActMode.GREEDY,
    rng: np.random.Generator | None = None,
) -> AdaptationAction:
    """Action for one encoded state; Greedy breaks ties at the lowest index."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (STATE_DIM,):
        raise ValueError(f"input must have shape ({STATE_DIM},)")
    logits, _ = m.forward(x[None, :])
    if mode is ActMode.GREEDY:
        return ACTIONS[int(np.argmax(logits[0]))]
    if rng is None:
        raise ValueError("Sample mode needs an rng")
    p = nn.softmax(logits)[0]
    return ACTIONS[int(rng.choice(ACTION_COUNT, p=p))]


@dataclass
class ACBatch:
    """Frozen transition batch: states X, action indices a, n-step returns g,
    and the advantages adv used for the policy term."""

    x: np.ndarray
    a: np.ndarray
    g: np.ndarray
    adv: np.ndarray


def ac_loss_and_grads(
    m: ACModel, batch: ACBatch, cfg: ACConfig
) -> tuple[float, list[np.ndarray]]:
    """Combined loss on a frozen batch and gradients for every parameter.

    The advantages in the batch are treated as constants; only the value-error
    term differentiates through V.
    """
    x, a, g, adv = batch.x, batch.a, batch.g, batch.adv
    n = len(x)
    z1 = x @ m.w1 + m.b1
    h1 = nn.leaky_relu(z1)
    z2 = h1 @ m.w2 + m.b2
    h2 = nn.leaky_relu(z2)
    logits = h2 @ m.w_pi + m.b_pi
    v = (h2 @ m.w_v + m.b_v)[:, 0]

    logp = nn.log_softmax(logits)
    p = np.exp(logp)
    entropy = -np.sum(p * logp, axis=1)
    onehot = np.zeros_like(p)
    onehot[np.arange(n), a] = 1.0
    value_err = g - v

    loss = float(
        np.mean(-logp[np.arange(n), a] * adv)
        + cfg.value_coef * np.mean(value_err**2)
        - cfg.entropy_coef * np.mean(entropy)
    )

    # d/dlogits of the policy term is adv*(p - onehot)/n; of the entropy bonus,
    # entropy_coef * p * (logp + H) / n.
    dlogits = (adv[:, None] * (p - onehot)) / n
    dlogits += cfg.entropy_coef * p * (logp + entropy[:, None]) / n
    dv = (-2.0 * cfg.value_coef * value_err / n)[:, None]

    dw_pi = h2.T @ dlogits
    db_pi = dlogits.sum(axis=0)
    dw_v = h2.T @ dv
    db_v = dv.sum(axis=0)
    dh2 = dlogits @ m.w_pi.T + dv @ m.w_v.T
    dz2 = dh2 * nn.leaky_relu_grad(z2)
    dw2 = h1.T @ dz2
    db2 = dz2.sum(axis=0)
    dh1 = dz2 @ m.w2.T
    dz1 = dh1 * nn.leaky_relu_grad(z1)
    dw1 = x.T @ dz1
    db1 = dz1.sum(axis=0)
    return loss, [dw1, db1, dw2, db2, dw_pi, db_pi, dw_v, db_v]


def ac_loss(m: ACModel, batch: ACBatch, cfg: ACConfig) -> float:
    return ac_loss_and_grads(m, batch, cfg)[0]


def ac_grad_check(
    m: ACModel,
    batch: ACBatch,
    cfg: ACConfig = ACConfig(),
    n_coords: int = 100,
    h: float = 1e-5,
    seed: int = 0,
) -> float:
    """Max relative error of the analytic gradient vs central differences."""
    model = m.copy()
    _, grads = ac_loss_and_grads(model, batch, cfg)
    analytic = np.concatenate([g.ravel() for g in grads])
    rng = np.random.default_rng(seed)
    flat = model.flat_params()
    coords = rng.choice(flat.size, size=min(n_coords, flat.size), replace=False)
    worst = 0.0
    for c in coords:
        orig = flat[c]
        flat[c] = orig + h
        model.set_flat_params(flat)
        hi = ac_loss(model, batch, cfg)
        flat[c] = orig - h
        model.set_flat_params(flat)
        lo = ac_loss(model, batch, cfg)
        flat[c] = orig
        model.set_flat_params(flat)
        fd = (hi - lo) / (2.0 * h)
        rel = abs(analytic[c] - fd) / max(abs(analytic[c]), abs(fd), 1e-8)
        worst = max(worst, rel)
    return worst


class _Worker:
    """Owns one environment and a private rng; collects n-step segments."""

    def __init__(self, env: AdaptEnv, domain: Domain, rng: np.random.Generator) -> None:
        self.env = env
        self.domain = domain
        self.rng = rng
        self.state = env.reset()

    def collect(self, m: ACModel, n_step: int) -> list[tuple[np.ndarray, int, float, bool, np.ndarray]]:
        out = []
        for _ in range(n_step):
            x = encode_state(self.state, self.domain)
            logits, _ = m.forward(x[None, :])
            p = nn.softmax(logits)[0]
            ai = int(self.rng.choice(ACTION_COUNT, p=p))
            outcome = self.env.step(ACTIONS[ai])
            x_next = encode_state(outcome.next_state, self.domain)
            out.append((x, ai, outcome.reward, outcome.done, x_next))
            self.state = self.env.reset() if outcome.done else outcome.next_state
        return out


def _segment_returns(
    m: ACModel,
    segment: list[tuple[np.ndarray, int, float, bool, np.ndarray]],
    gamma: float,
) -> np.ndarray:
    """n-step returns, bootstrapping through episode ends.

    Episodes here only ever end by hitting the horizon, which chops a
    continuing adaptation stream into training windows, so the return after
    the segment's last transition (and after any mid-segment episode end) is
    estimated by V at the successor state rather than zero.
    """
    n = len(segment)
    g = np.zeros(n)
    for i in reversed(range(n)):
        _, _, reward, done, x_next = segment[i]
        if i == n - 1 or done:
            boot = float(m.forward(x_next[None, :])[1][0])
            g[i] = reward + gamma * boot
        else:
            g[i] = reward + gamma * g[i + 1]
    return g


def ac_train(
    env_factory: Callable[[int], EpisodeConfig],
    rp: RewardProvider,
    cfg: ACConfig = ACConfig(),
) -> ACModel:
    """Train until at least total_steps environment steps have been consumed."""
    model = ACModel.init(cfg.seed)
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.workers)
    workers = []
    domains = []
    for i in range(cfg.workers):
        ec = env_factory(i)
        domains.append(ec.domain)
        workers.append(_Worker(AdaptEnv(ec, rp), ec.domain, np.random.default_rng(seeds[i])))

    steps = 0
    pool = ThreadPoolExecutor(max_workers=cfg.workers) if cfg.workers > 1 else None
    try:
        while steps < cfg.total_steps:
            if pool is not None:
                segments = list(pool.map(lambda w: w.collect(model, cfg.n_step), workers))
            else:
                segments = [w.collect(model, cfg.n_step) for w in workers]
            xs, acts, rets = [], [], []
            for seg in segments:
                g = _segment_returns(model, seg, cfg.gamma)
                xs.extend(s[0] for s in seg)
                acts.extend(s[1] for s in seg)
                rets.extend(g)
            x = np.stack(xs)
            a = np.asarray(acts, dtype=np.int64)
            g = np.asarray(rets)
            _, v = model.forward(x)
            batch = ACBatch(x=x, a=a, g=g, adv=g - v)
            _, grads = ac_loss_and_grads(model, batch, cfg)
            for param, grad in zip(model._params(), grads):
                param -= cfg.learning_rate * grad
            steps += cfg.n_step * cfg.workers
    finally:
        if pool is not None:
            pool.shutdown()
    return model


# --- Persistence ---------------------------------------------------------------

AGENT_FORMAT_VERSION = 1

_FIELDS = ("w1", "b1", "w2", "b2", "w_pi", "b_pi", "w_v", "b_v")


def ac_to_json(m: ACModel) -> dict[str, Any]:
    out: dict[str, Any] = {"version": AGENT_FORMAT_VERSION, "kind": "ac", "seed": m.seed}
    for name in _FIELDS:
        out[name] = getattr(m, name).tolist()
    return out


def ac_from_json(obj: Mapping[str, Any]) -> ACModel:
    if obj.get("version") != AGENT_FORMAT_VERSION:
        raise ValueError(f"unsupported agent format version {obj.get('version')!r}")
    if obj.get("kind") != "ac":
        raise ValueError("not an actor-critic agent file")
    arrays = [np.asarray(obj[name], dtype=np.float64) for name in _FIELDS]
    return ACModel(*arrays, seed=int(obj.get("seed", 0)))


def save_ac(m: ACModel, path: str | Path) -> None:
    Path(path).write_text(json.dumps(ac_to_json(m)), encoding="utf-8")


def load_ac(path: str | Path) -> ACModel:
    return ac_from_json(json.loads(Path(path).read_text(encoding="utf-8")))
