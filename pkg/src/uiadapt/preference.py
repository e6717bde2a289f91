"""Learned preference model over clips, plus the dual-source reward combiner.

A small MLP maps the 16-dim state encoding to a scalar per-step reward; a
clip's return is the sum over its eight states. Pairwise judgments train the
net under the cross-entropy objective

    J(theta) = -(1/N) * sum_i [mu1_i * log p(a_i > b_i) + mu2_i * log p(b_i > a_i)]
               + l2 * ||theta||^2,

where p(a > b) = exp(Ra) / (exp(Ra) + exp(Rb)) is computed shift-stabilized.
Training is plain seeded mini-batch SGD; backprop is hand-rolled and checked
against central finite differences.

combined_reward() blends a baseline engagement source with the learned model,
standardizing each source by its own running mean/std (updated first, applied
second; a source passes through raw until it has two samples or while its
variance is zero).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Mapping, Optional, Sequence

import numpy as np

from . import nn
from .env import ClipSegment, RewardProvider
from .ranking import PreferencePair
from .ui import (
    ALL_CONFIGS,
    STATE_DIM,
    AdaptationAction,
    ContextModel,
    Domain,
    UiConfig,
    apply_action,
    default_context,
    encode_state,
)

DEFAULT_LAYER_SIZES = (STATE_DIM, 64, 64, 1)


class Activation(str, Enum):
    LEAKY_RELU = "leaky_relu"
    TANH = "tanh"


_ACT = {
    Activation.LEAKY_RELU: (nn.leaky_relu, nn.leaky_relu_grad),
    Activation.TANH: (nn.tanh, nn.tanh_grad),
}


@dataclass
class Mlp:
    """Fully-connected scalar-output net. Hidden layers use the configured
    activation; the output layer is linear."""

    layer_sizes: tuple[int, ...]
    activation: Activation
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    seed: int = 0

    @classmethod
    def init(
        cls,
        seed: int = 0,
        layer_sizes: Sequence[int] = DEFAULT_LAYER_SIZES,
        activation: Activation = Activation.LEAKY_RELU,
    ) -> "Mlp":
        sizes = tuple(int(s) for s in layer_sizes)
        if len(sizes) < 2 or sizes[-1] != 1:
            raise ValueError("layer_sizes must end in a single output unit")
        rng = np.random.default_rng(seed)
        init = nn.he_init if activation is Activation.LEAKY_RELU else nn.xavier_init
        weights = [init(rng, sizes[i], sizes[i + 1]) for i in range(len(sizes) - 1)]
        biases = [np.zeros(sizes[i + 1]) for i in range(len(sizes) - 1)]
        return cls(sizes, activation, weights, biases, seed)

    @classmethod
    def zeros(
        cls,
        layer_sizes: Sequence[int] = DEFAULT_LAYER_SIZES,
        activation: Activation = Activation.LEAKY_RELU,
    ) -> "Mlp":
        sizes = tuple(int(s) for s in layer_sizes)
        weights = [np.zeros((sizes[i], sizes[i + 1])) for i in range(len(sizes) - 1)]
        biases = [np.zeros(sizes[i + 1]) for i in range(len(sizes) - 1)]
        return cls(sizes, activation, weights, biases, 0)

    def copy(self) -> "Mlp":
        return Mlp(
            self.layer_sizes,
            self.activation,
            [w.copy() for w in self.weights],
            [b.copy() for b in self.biases],
            self.seed,
        )

    def forward_batch(self, x: np.ndarray) -> np.ndarray:
        """(n, in_dim) -> (n,) scalar outputs."""
        act, _ = _ACT[self.activation]
        h = x
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            h = h @ w + b
            if i < last:
                h = act(h)
        return h[:, 0]

    def _forward_cached(self, x: np.ndarray) -> tuple[np.ndarray, list[np.ndarray], list[np.ndarray]]:
        act, _ = _ACT[self.activation]
        pre: list[np.ndarray] = []
        post: list[np.ndarray] = [x]
        h = x
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = h @ w + b
            pre.append(z)
            h = act(z) if i < last else z
            post.append(h)
        return h[:, 0], pre, post

    def backward(
        self, x: np.ndarray, dout: np.ndarray
    ) -> tuple[list[np.ndarray], list[np.ndarray]]:
        """Gradients of sum_i dout_i * f(x_i) w.r.t. weights and biases."""
        _, act_grad = _ACT[self.activation]
        _, pre, post = self._forward_cached(x)
        grads_w = [np.zeros_like(w) for w in self.weights]
        grads_b = [np.zeros_like(b) for b in self.biases]
        delta = dout[:, None]  # gradient at the linear output layer
        for i in reversed(range(len(self.weights))):
            grads_w[i] = post[i].T @ delta
            grads_b[i] = delta.sum(axis=0)
            if i > 0:
                delta = (delta @ self.weights[i].T) * act_grad(pre[i - 1])
        return grads_w, grads_b

    # -- flat parameter view (serialization, finite differences) -----------

    def flat_params(self) -> np.ndarray:
        return np.concatenate([a.ravel() for a in self.weights + self.biases])

    def set_flat_params(self, flat: np.ndarray) -> None:
        offset = 0
        for arr in self.weights + self.biases:
            n = arr.size
            arr[...] = flat[offset : offset + n].reshape(arr.shape)
            offset += n
        if offset != flat.size:
            raise ValueError("flat parameter vector has the wrong length")

    @property
    def param_count(self) -> int:
        return int(sum(a.size for a in self.weights + self.biases))


def predict_step_reward(m: Mlp, x: np.ndarray) -> float:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (m.layer_sizes[0],):
        raise ValueError(f"input must have shape ({m.layer_sizes[0]},)")
    return float(m.forward_batch(x[None, :])[0])


def clip_encoding(clip: ClipSegment) -> np.ndarray:
    """(clip_len, 16) matrix of the clip's per-step state encodings."""
    return np.stack([encode_state(s, clip.domain) for s in clip.states()])


def clip_return(m: Mlp, clip: ClipSegment) -> float:
    return float(m.forward_batch(clip_encoding(clip)).sum())


def pref_probability_from_returns(ra: float, rb: float) -> float:
    m = max(ra, rb)
    ea = math.exp(ra - m)
    eb = math.exp(rb - m)
    return ea / (ea + eb)


def pref_probability(m: Mlp, a: ClipSegment, b: ClipSegment) -> float:
    """P(a preferred over b) under the current model; shift-stabilized."""
    return pref_probability_from_returns(clip_return(m, a), clip_return(m, b))


# --- Training ----------------------------------------------------------------


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-3
    epochs: int = 200
    batch_size: int = 16
    l2: float = 1e-4
    val_fraction: float = 0.1
    seed: int = 0

    def __post_init__(self) -> None:
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")
        if not 0.0 <= self.val_fraction < 1.0:
            raise ValueError("val_fraction must lie in [0, 1)")


@dataclass
class LossCurve:
    train: list[float] = field(default_factory=list)
    val: list[Optional[float]] = field(default_factory=list)

    def to_csv(self) -> str:
        lines = ["epoch,train_loss,val_loss"]
        for i, (tr, va) in enumerate(zip(self.train, self.val)):
            lines.append(f"{i},{tr:.10g},{'' if va is None else format(va, '.10g')}")
        return "\n".join(lines) + "\n"


def _resolve_pairs(
    pairs: Sequence[PreferencePair], corpus: Mapping[str, ClipSegment]
) -> tuple[list[np.ndarray], list[np.ndarray], np.ndarray]:
    xs_a, xs_b, mus = [], [], []
    for pair in pairs:
        for cid in (pair.first, pair.second):
            if cid not in corpus:
                raise ValueError(f"unknown clip id {cid!r}")
        xs_a.append(clip_encoding(corpus[pair.first]))
        xs_b.append(clip_encoding(corpus[pair.second]))
        mus.append(pair.mu[0])
    return xs_a, xs_b, np.asarray(mus, dtype=np.float64)


def _pair_ce_and_grad(
    m: Mlp,
    xs_a: Sequence[np.ndarray],
    xs_b: Sequence[np.ndarray],
    mu1: np.ndarray,
    idx: np.ndarray,
) -> tuple[float, list[np.ndarray], list[np.ndarray]]:
    """Mean cross-entropy over the indexed pairs and its parameter gradient."""
    k = len(xs_a[0])  # steps per clip
    stack_a = np.concatenate([xs_a[i] for i in idx])
    stack_b = np.concatenate([xs_b[i] for i in idx])
    ra = m.forward_batch(stack_a).reshape(len(idx), k).sum(axis=1)
    rb = m.forward_batch(stack_b).reshape(len(idx), k).sum(axis=1)
    d = ra - rb
    # log p(a>b) = -softplus(-d), log p(b>a) = -softplus(d)
    softplus = np.logaddexp(0.0, -d)
    mu = mu1[idx]
    ce = float(np.mean(mu * softplus + (1.0 - mu) * np.logaddexp(0.0, d)))
    p = 1.0 / (1.0 + np.exp(-np.clip(d, -500, 500)))
    g = (p - mu) / len(idx)  # d(mean ce)/d(ra); d/d(rb) is the negative
    dout = np.concatenate([np.repeat(g, k), np.repeat(-g, k)])
    grads_w, grads_b = m.backward(np.concatenate([stack_a, stack_b]), dout)
    return ce, grads_w, grads_b


def _objective(m: Mlp, xs_a, xs_b, mu1, idx, l2: float) -> float:
    k = len(xs_a[0])
    stack_a = np.concatenate([xs_a[i] for i in idx])
    stack_b = np.concatenate([xs_b[i] for i in idx])
    ra = m.forward_batch(stack_a).reshape(len(idx), k).sum(axis=1)
    rb = m.forward_batch(stack_b).reshape(len(idx), k).sum(axis=1)
    d = ra - rb
    mu = mu1[idx]
    ce = float(np.mean(mu * np.logaddexp(0.0, -d) + (1.0 - mu) * np.logaddexp(0.0, d)))
    if l2 > 0:
        ce += l2 * float(np.sum(m.flat_params() ** 2))
    return ce


def train(
    m: Mlp,
    pairs: Sequence[PreferencePair],
    corpus: Mapping[str, ClipSegment],
    cfg: TrainConfig = TrainConfig(),
) -> tuple[Mlp, LossCurve]:
    """Train a copy of m on the pairs; returns (model, per-epoch loss curve).

    train entries include the l2 term (the optimized objective on the training
    split); val entries are the bare cross-entropy on the held-out split, None
    when val_fraction rounds to zero pairs.
    """
    if not pairs:
        raise ValueError("no preference pairs")
    xs_a, xs_b, mu1 = _resolve_pairs(pairs, corpus)
    rng = np.random.default_rng(cfg.seed)
    perm = rng.permutation(len(pairs))
    n_val = int(len(pairs) * cfg.val_fraction)
    val_idx = perm[:n_val]
    train_idx = perm[n_val:]
    if len(train_idx) == 0:
        raise ValueError("no training pairs left after validation split")

    model = m.copy()
    curve = LossCurve()
    for _ in range(cfg.epochs):
        order = train_idx[rng.permutation(len(train_idx))]
        for start in range(0, len(order), cfg.batch_size):
            batch = order[start : start + cfg.batch_size]
            _, grads_w, grads_b = _pair_ce_and_grad(model, xs_a, xs_b, mu1, batch)
            for w, gw in zip(model.weights, grads_w):
                w -= cfg.learning_rate * (gw + 2.0 * cfg.l2 * w)
            for b, gb in zip(model.biases, grads_b):
                b -= cfg.learning_rate * (gb + 2.0 * cfg.l2 * b)
        curve.train.append(_objective(model, xs_a, xs_b, mu1, train_idx, cfg.l2))
        curve.val.append(
            _objective(model, xs_a, xs_b, mu1, val_idx, 0.0) if len(val_idx) else None
        )
    return model, curve


def grad_check(
    m: Mlp,
    pairs: Sequence[PreferencePair],
    corpus: Mapping[str, ClipSegment],
    l2: float = 0.0,
    n_coords: int = 100,
    h: float = 1e-5,
    seed: int = 0,
) -> float:
    """Max relative error between backprop and central finite differences,
    over n_coords randomly chosen parameters of the full-sample objective."""
    if not pairs:
        raise ValueError("no preference pairs")
    xs_a, xs_b, mu1 = _resolve_pairs(pairs, corpus)
    idx = np.arange(len(pairs))
    model = m.copy()

    _, grads_w, grads_b = _pair_ce_and_grad(model, xs_a, xs_b, mu1, idx)
    analytic = np.concatenate([g.ravel() for g in grads_w + grads_b])
    analytic = analytic + 2.0 * l2 * model.flat_params()

    rng = np.random.default_rng(seed)
    coords = rng.choice(model.param_count, size=min(n_coords, model.param_count), replace=False)
    flat = model.flat_params()
    worst = 0.0
    for c in coords:
        orig = flat[c]
        flat[c] = orig + h
        model.set_flat_params(flat)
        hi = _objective(model, xs_a, xs_b, mu1, idx, l2)
        flat[c] = orig - h
        model.set_flat_params(flat)
        lo = _objective(model, xs_a, xs_b, mu1, idx, l2)
        flat[c] = orig
        model.set_flat_params(flat)
        fd = (hi - lo) / (2.0 * h)
        rel = abs(analytic[c] - fd) / max(abs(analytic[c]), abs(fd), 1e-8)
        worst = max(worst, rel)
    return worst


# --- Model persistence --------------------------------------------------------

MODEL_FORMAT_VERSION = 1


def model_to_json(m: Mlp) -> dict[str, Any]:
    return {
        "version": MODEL_FORMAT_VERSION,
        "layer_sizes": list(m.layer_sizes),
        "activation": m.activation.value,
        "weights": [w.tolist() for w in m.weights],
        "biases": [b.tolist() for b in m.biases],
        "seed": m.seed,
    }


def model_from_json(obj: Mapping[str, Any]) -> Mlp:
    if obj.get("version") != MODEL_FORMAT_VERSION:
        raise ValueError(f"unsupported model format version {obj.get('version')!r}")
    return Mlp(
        layer_sizes=tuple(obj["layer_sizes"]),
        activation=Activation(obj["activation"]),
        weights=[np.asarray(w, dtype=np.float64) for w in obj["weights"]],
        biases=[np.asarray(b, dtype=np.float64) for b in obj["biases"]],
        seed=int(obj.get("seed", 0)),
    )


def save_model(m: Mlp, path: str | Path) -> None:
    Path(path).write_text(json.dumps(model_to_json(m)), encoding="utf-8")


def load_model(path: str | Path) -> Mlp:
    return model_from_json(json.loads(Path(path).read_text(encoding="utf-8")))


# --- Dual-source reward combiner ----------------------------------------------


@dataclass
class RunningStat:
    """Welford accumulator; standardize() is identity until it has two samples
    (or while the variance is zero)."""

    count: int = 0
    mean: float = 0.0
    m2: float = 0.0

    def update(self, v: float) -> None:
        self.count += 1
        delta = v - self.mean
        self.mean += delta / self.count
        self.m2 += delta * (v - self.mean)

    @property
    def variance(self) -> float:
        return self.m2 / (self.count - 1) if self.count >= 2 else 0.0

    def standardize(self, v: float) -> float:
        var = self.variance
        if self.count < 2 or var <= 0.0:
            return v
        return (v - self.mean) / math.sqrt(var)


@dataclass
class DualRewardConfig:
    beta: float = 0.5
    hci_stats: RunningStat = field(default_factory=RunningStat)
    hf_stats: RunningStat = field(default_factory=RunningStat)

    def __post_init__(self) -> None:
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError("beta must lie in [0, 1]")


def combined_reward(hci: float, hf: float, cfg: DualRewardConfig, update_stats: bool = True) -> float:
    """r = (1 - beta) * z(hci) + beta * z(hf), each source by its own stats.

    When update_stats, both accumulators absorb the sample before standardizing.
    """
    if update_stats:
        cfg.hci_stats.update(hci)
        cfg.hf_stats.update(hf)
    return (1.0 - cfg.beta) * cfg.hci_stats.standardize(hci) + cfg.beta * cfg.hf_stats.standardize(hf)


def model_step_reward_provider(m: Mlp, domain: Domain) -> RewardProvider:
    """Reward provider scoring the post-action state with the learned model."""

    def rp(state: UiConfig, action, ctx: ContextModel) -> float:
        return predict_step_reward(m, encode_state(apply_action(state, action), domain))

    return rp


def dual_reward_provider(
    base: RewardProvider,
    m: Mlp,
    domain: Domain,
    cfg: DualRewardConfig,
    update_stats: bool = True,
    warmup: bool = True,
    warmup_ctx: Optional[ContextModel] = None,
) -> RewardProvider:
    """Blend a baseline engagement provider with the learned model's score.

    With warmup, both accumulators absorb one sample per reachable config
    before the provider is handed out, so the standardization is already
    steady at the first training step instead of drifting while the counts
    grow. Skip it when the combiner should adapt from scratch.
    """
    hf = model_step_reward_provider(m, domain)
    if warmup:
        ctx0 = warmup_ctx if warmup_ctx is not None else default_context()
        noop = AdaptationAction.noop()
        for config in ALL_CONFIGS:
            combined_reward(base(config, noop, ctx0), hf(config, noop, ctx0), cfg, update_stats=True)

    def rp(state: UiConfig, action, ctx: ContextModel) -> float:
        return combined_reward(base(state, action, ctx), hf(state, action, ctx), cfg, update_stats)

    return rp
