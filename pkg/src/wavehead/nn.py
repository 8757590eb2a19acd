"""Minimal dense-network toolkit: MLPs, binary loss, Adam, gradient oracle.

Everything is plain numpy in 64-bit precision.  Forward/backward/oracle are
pure functions; the optimizer consumes and returns its state.  No autograd:
the fixed MLP topology makes hand-rolled reverse mode short and exact, and
``finite_diff_grad`` provides the independent check.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import erf

from .errors import ConfigError, DataError, ShapeError

ACTIVATIONS = ("identity", "gelu")

_INV_SQRT2 = 1.0 / math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


@dataclass
class Layer:
    w: np.ndarray  # (out, in)
    b: np.ndarray  # (out,)
    act: str = "identity"


@dataclass
class MlpParams:
    """Ordered affine+activation layers; consecutive dims must chain."""

    layers: list[Layer] = field(default_factory=list)

    @property
    def in_dim(self) -> int:
        return self.layers[0].w.shape[1]

    @property
    def out_dim(self) -> int:
        return self.layers[-1].w.shape[0]

    def copy(self) -> "MlpParams":
        return MlpParams(
            [Layer(l.w.copy(), l.b.copy(), l.act) for l in self.layers]
        )


# Gradients mirror the parameter shapes: one (dw, db) pair per layer.
Gradients = list[tuple[np.ndarray, np.ndarray]]


@dataclass
class OptimizerState:
    """Adam accumulators plus hyperparameters; shapes mirror the params."""

    lr: float = 2e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    weight_decay: float = 0.0
    step: int = 0
    m: Gradients = field(default_factory=list)
    v: Gradients = field(default_factory=list)


def init_mlp(layer_sizes, activations=None, seed: int = 0) -> MlpParams:
    """Seeded fan-balanced uniform init: W ~ U(-s, s), s = sqrt(6/(in+out)), b = 0.

    ``activations`` defaults to gelu on hidden layers and identity on the
    output layer.
    """
    sizes = list(layer_sizes)
    if len(sizes) < 2:
        raise ConfigError(f"need at least input and output sizes, got {sizes}")
    if any(int(s) <= 0 for s in sizes):
        raise ConfigError(f"layer sizes must be positive, got {sizes}")
    n_layers = len(sizes) - 1
    if activations is None:
        activations = ["gelu"] * (n_layers - 1) + ["identity"]
    if len(activations) != n_layers:
        raise ConfigError(
            f"{n_layers} layers but {len(activations)} activation tags"
        )
    for act in activations:
        if act not in ACTIVATIONS:
            raise ConfigError(f"unknown activation {act!r}")
    rng = np.random.default_rng(seed)
    layers = []
    for fan_in, fan_out, act in zip(sizes[:-1], sizes[1:], activations):
        scale = math.sqrt(6.0 / (fan_in + fan_out))
        w = rng.uniform(-scale, scale, size=(fan_out, fan_in))
        layers.append(Layer(w=w, b=np.zeros(fan_out), act=act))
    return MlpParams(layers)


def gelu(x: np.ndarray) -> np.ndarray:
    return 0.5 * x * (1.0 + erf(x * _INV_SQRT2))


def gelu_grad(x: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + erf(x * _INV_SQRT2)) + x * _INV_SQRT_2PI * np.exp(
        -0.5 * x * x
    )


def _activate(z, act):
    if act == "gelu":
        return gelu(z)
    return z


def mlp_forward(p: MlpParams, batch: np.ndarray) -> np.ndarray:
    """Row-wise forward pass; batch (B, in_dim) -> (B, out_dim)."""
    out, _ = forward_cached(p, batch)
    return out


def forward_cached(p, batch, dropout: float = 0.0, rng=None):
    """Forward pass keeping per-layer caches for backward.

    With dropout > 0 an inverted-dropout mask (drawn from ``rng``) is
    applied after each hidden activation; inference paths leave it at 0.
    """
    a = np.asarray(batch)
    if a.ndim != 2:
        raise ShapeError(f"expected (B, d) batch, got shape {a.shape}")
    if a.shape[1] != p.in_dim:
        raise ShapeError(
            f"batch width {a.shape[1]} != first layer input {p.in_dim}"
        )
    if dropout > 0.0 and rng is None:
        raise ConfigError("dropout > 0 requires an rng")
    caches = []
    last = len(p.layers) - 1
    for i, layer in enumerate(p.layers):
        z = a @ layer.w.T + layer.b
        h = _activate(z, layer.act)
        mask = None
        if dropout > 0.0 and i < last:
            mask = (rng.random(h.shape) >= dropout) / (1.0 - dropout)
            h = h * mask
        caches.append((a, z, mask))
        a = h
    return a, caches


def mlp_backward(p, batch, grad_out, caches=None):
    """Exact reverse-mode gradients of a scalar loss.

    ``grad_out`` is d(loss)/d(output), shape (B, out_dim).  Returns
    (per-layer Gradients, d(loss)/d(batch)); reuse ``caches`` from
    forward_cached when available (dropout masks live there).
    """
    if caches is None:
        _, caches = forward_cached(p, batch)
    delta = np.asarray(grad_out)
    if delta.shape != (np.asarray(batch).shape[0], p.out_dim):
        raise ShapeError(
            f"grad_out shape {delta.shape} does not match output "
            f"({np.asarray(batch).shape[0]}, {p.out_dim})"
        )
    grads: Gradients = [None] * len(p.layers)
    for i in range(len(p.layers) - 1, -1, -1):
        a, z, mask = caches[i]
        if mask is not None:
            delta = delta * mask
        if p.layers[i].act == "gelu":
            delta = delta * gelu_grad(z)
        grads[i] = (delta.T @ a, delta.sum(axis=0))
        if i > 0:
            delta = delta @ p.layers[i].w
    grad_in = delta @ p.layers[0].w
    return grads, grad_in


def bce_with_logits(logits, labels) -> float:
    """Mean binary cross-entropy on raw logits, numerically stable.

    With y in {-1, +1} mapped from {0, 1} labels, the per-sample loss is
    log(1 + exp(-y * logit)).
    """
    loss, _ = bce_with_logits_grad(logits, labels)
    return loss


def bce_with_logits_grad(logits, labels):
    """Return (loss, d loss / d logits)."""
    z = np.asarray(logits, dtype=np.float64)
    y01 = np.asarray(labels)
    if z.shape != y01.shape:
        raise ShapeError(f"logits shape {z.shape} != labels shape {y01.shape}")
    if not np.isin(y01, (0, 1)).all():
        raise DataError(f"labels must be 0 or 1, got {np.unique(y01)}")
    y = 2.0 * y01 - 1.0
    t = y * z
    # softplus(-t) = max(-t, 0) + log1p(exp(-|t|))
    loss = float(np.mean(np.maximum(-t, 0.0) + np.log1p(np.exp(-np.abs(t)))))
    sigma = 0.5 * (1.0 + np.tanh(0.5 * z))  # logistic(z), stable
    dlogits = (sigma - y01) / z.shape[0]
    return loss, dlogits


def finite_diff_grad(p: MlpParams, loss_fn, h: float = 1e-5) -> Gradients:
    """Central-difference gradient oracle: (loss(t+h) - loss(t-h)) / 2h.

    ``loss_fn`` maps MlpParams to a scalar; every weight and bias entry
    is perturbed in turn.  Independent of mlp_backward by construction.
    """
    if h <= 0:
        raise ConfigError(f"step must be positive, got {h}")
    q = p.copy()
    grads: Gradients = []
    for layer in q.layers:
        pair = []
        for arr in (layer.w, layer.b):
            g = np.zeros_like(arr)
            flat, gflat = arr.reshape(-1), g.reshape(-1)
            for j in range(flat.size):
                orig = flat[j]
                flat[j] = orig + h
                up = loss_fn(q)
                flat[j] = orig - h
                down = loss_fn(q)
                flat[j] = orig
                gflat[j] = (up - down) / (2.0 * h)
            pair.append(g)
        grads.append((pair[0], pair[1]))
    return grads


def init_optimizer(p: MlpParams, lr=2e-4, beta1=0.9, beta2=0.999, eps=1e-8,
                   weight_decay=0.0) -> OptimizerState:
    zeros = [
        (np.zeros_like(l.w), np.zeros_like(l.b)) for l in p.layers
    ]
    return OptimizerState(
        lr=lr, beta1=beta1, beta2=beta2, eps=eps, weight_decay=weight_decay,
        step=0, m=zeros, v=[(w.copy(), b.copy()) for w, b in zeros],
    )


def adam_step(p: MlpParams, grads: Gradients, st: OptimizerState):
    """One bias-corrected adaptive-moment update; returns new (params, state).

    Weight decay (when nonzero) is decoupled and applied to weights only.
    """
    if len(grads) != len(p.layers) or len(st.m) != len(p.layers):
        raise ShapeError(
            f"{len(p.layers)} layers vs {len(grads)} gradient pairs, "
            f"{len(st.m)} moment pairs"
        )
    step = st.step + 1
    c1 = 1.0 - st.beta1 ** step
    c2 = 1.0 - st.beta2 ** step
    new_layers, new_m, new_v = [], [], []
    for layer, (gw, gb), (mw, mb), (vw, vb) in zip(p.layers, grads, st.m, st.v):
        if gw.shape != layer.w.shape or gb.shape != layer.b.shape:
            raise ShapeError(
                f"gradient shapes {gw.shape}/{gb.shape} do not mirror "
                f"parameters {layer.w.shape}/{layer.b.shape}"
            )
        mw2 = st.beta1 * mw + (1.0 - st.beta1) * gw
        mb2 = st.beta1 * mb + (1.0 - st.beta1) * gb
        vw2 = st.beta2 * vw + (1.0 - st.beta2) * gw * gw
        vb2 = st.beta2 * vb + (1.0 - st.beta2) * gb * gb
        w = layer.w - st.lr * (mw2 / c1) / (np.sqrt(vw2 / c2) + st.eps)
        b = layer.b - st.lr * (mb2 / c1) / (np.sqrt(vb2 / c2) + st.eps)
        if st.weight_decay:
            w = w - st.lr * st.weight_decay * layer.w
        new_layers.append(Layer(w=w, b=b, act=layer.act))
        new_m.append((mw2, mb2))
        new_v.append((vw2, vb2))
    return MlpParams(new_layers), replace(st, step=step, m=new_m, v=new_v)
