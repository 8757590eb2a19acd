"""Classification heads over frozen-encoder embeddings.

The wavelet head splits each embedding into low/high frequency bands,
refines the low band with an MLP while passing the high band through
unchanged, reconstructs the vector, and classifies it with a second MLP.
The baseline head applies the same classifier MLP directly to the raw
embedding, so the wavelet path is the only ablation variable.

Encoders are consumed as a black box: training touches embeddings and head
parameters only.  Scores are raw logits, higher = more likely fake.
"""

from dataclasses import dataclass

import numpy as np

from . import data as data_mod
from .errors import ConfigError, DataError, ShapeError
from .nn import (
    MlpParams,
    adam_step,
    bce_with_logits_grad,
    forward_cached,
    init_mlp,
    init_optimizer,
    mlp_backward,
)
from .wavelet import FilterBank, Subbands1D, dwt1d, idwt1d, make_filter_bank

REFERENCE_ENCODER = "clip-vit-l14"
REFERENCE_DIM = 768


@dataclass(frozen=True)
class EncoderContract:
    """Embedding-side contract of the frozen upstream encoder."""

    d: int
    provenance: str = "unspecified"

    def validate(self) -> None:
        if self.d <= 0 or self.d % 2 != 0:
            raise ShapeError(f"embedding dimension must be positive even, got {self.d}")
        if self.provenance == REFERENCE_ENCODER and self.d != REFERENCE_DIM:
            raise ShapeError(
                f"{REFERENCE_ENCODER} produces {REFERENCE_DIM}-d embeddings, got d={self.d}"
            )


@dataclass
class WaveletHeadParams:
    """low_mlp refines the (d/2)-wide low band; cls_mlp maps d -> 1 logit."""

    low_mlp: MlpParams
    cls_mlp: MlpParams
    fb: FilterBank

    @property
    def d(self) -> int:
        return self.cls_mlp.in_dim

    def validate(self) -> None:
        half = self.d // 2
        if self.d % 2 != 0:
            raise ShapeError(f"embedding dim must be even, got {self.d}")
        if self.low_mlp.in_dim != half or self.low_mlp.out_dim != half:
            raise ShapeError(
                f"low band MLP must map {half}->{half}, got "
                f"{self.low_mlp.in_dim}->{self.low_mlp.out_dim}"
            )
        if self.cls_mlp.out_dim != 1:
            raise ShapeError(
                f"classifier must emit one logit, got {self.cls_mlp.out_dim}"
            )


@dataclass
class BaselineHeadParams:
    """Plain comparator: the classifier MLP on raw embeddings."""

    cls_mlp: MlpParams

    @property
    def d(self) -> int:
        return self.cls_mlp.in_dim

    def validate(self) -> None:
        if self.cls_mlp.out_dim != 1:
            raise ShapeError(
                f"classifier must emit one logit, got {self.cls_mlp.out_dim}"
            )


@dataclass(frozen=True)
class TrainOptions:
    """Optimization knobs for head_train; every default is recorded upstream."""

    seed: int = 0
    epochs: int = 10
    batch_size: int = 64
    lr: float = 2e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    weight_decay: float = 0.0
    dropout: float = 0.0


def make_wavelet_head(d, low_hidden=None, cls_hidden=256, family="haar",
                      seed=0) -> WaveletHeadParams:
    """Default topology: low d/2 -> d/2 -> d/2 (gelu hidden), cls d -> cls_hidden -> 1."""
    EncoderContract(d=d).validate()
    half = d // 2
    if low_hidden is None or low_hidden == 0:
        low_hidden = half
    s_low, s_cls = _child_seeds(seed)
    low = init_mlp([half, low_hidden, half], seed=s_low)
    cls = init_mlp([d, cls_hidden, 1], seed=s_cls)
    p = WaveletHeadParams(low_mlp=low, cls_mlp=cls, fb=make_filter_bank(family))
    p.validate()
    return p


def make_baseline_head(d, cls_hidden=256, seed=0) -> BaselineHeadParams:
    """Same classifier topology and seed stream as the wavelet head's cls_mlp."""
    EncoderContract(d=d).validate()
    _, s_cls = _child_seeds(seed)
    p = BaselineHeadParams(cls_mlp=init_mlp([d, cls_hidden, 1], seed=s_cls))
    p.validate()
    return p


def identity_low_mlp(d: int) -> MlpParams:
    """Exact-identity low band MLP: collapses the wavelet head onto the baseline."""
    half = d // 2
    from .nn import Layer

    return MlpParams([Layer(w=np.eye(half), b=np.zeros(half), act="identity")])


def _child_seeds(seed: int) -> tuple[int, int]:
    state = np.random.SeedSequence(seed).generate_state(2)
    return int(state[0]), int(state[1])


def head_forward(p, Z: np.ndarray) -> np.ndarray:
    """Logits for a batch of embeddings, shape (B, d) -> (B,)."""
    logits, _ = _forward_train(p, Z, dropout=0.0, rng=None)
    return logits


baseline_forward = head_forward


def _forward_train(p, Z, dropout, rng):
    Z = np.asarray(Z, dtype=np.float64)
    if Z.ndim != 2:
        raise ShapeError(f"expected (B, d) batch, got shape {Z.shape}")
    if Z.shape[1] != p.d:
        raise ShapeError(f"batch width {Z.shape[1]} != head dimension {p.d}")
    if isinstance(p, WaveletHeadParams):
        bands = dwt1d(p.fb, Z)
        refined, low_cache = forward_cached(p.low_mlp, bands.low, dropout, rng)
        z_new = idwt1d(p.fb, Subbands1D(low=refined, high=bands.high))
        out, cls_cache = forward_cached(p.cls_mlp, z_new, dropout, rng)
        cache = (bands.low, low_cache, z_new, cls_cache)
    else:
        out, cls_cache = forward_cached(p.cls_mlp, Z, dropout, rng)
        cache = (Z, cls_cache)
    return out[:, 0], cache


def _backward_train(p, cache, dlogits):
    """Gradients for all head layers, ordered low_mlp then cls_mlp."""
    dout = dlogits[:, None]
    if isinstance(p, WaveletHeadParams):
        low_in, low_cache, z_new, cls_cache = cache
        cls_grads, d_znew = mlp_backward(p.cls_mlp, z_new, dout, cls_cache)
        # IDWT is linear; the adjoint of its low branch is the DWT low band
        d_refined = dwt1d(p.fb, d_znew).low
        low_grads, _ = mlp_backward(p.low_mlp, low_in, d_refined, low_cache)
        return low_grads + cls_grads
    batch, cls_cache = cache
    cls_grads, _ = mlp_backward(p.cls_mlp, batch, dout, cls_cache)
    return cls_grads


def _all_layers(p) -> MlpParams:
    if isinstance(p, WaveletHeadParams):
        return MlpParams(p.low_mlp.layers + p.cls_mlp.layers)
    return MlpParams(p.cls_mlp.layers)


def _with_layers(p, layers):
    if isinstance(p, WaveletHeadParams):
        k = len(p.low_mlp.layers)
        return WaveletHeadParams(
            low_mlp=MlpParams(layers[:k]), cls_mlp=MlpParams(layers[k:]), fb=p.fb
        )
    return BaselineHeadParams(cls_mlp=MlpParams(layers))


def head_train(p, ds: data_mod.EmbeddingDataset, opts: TrainOptions):
    """Mini-batch optimization of the binary loss over shuffled epochs.

    Returns (trained params, per-epoch mean loss trace, final optimizer
    state).  The dataset is never modified; only head parameters change.
    """
    ds.validate()
    if ds.n == 0:
        raise DataError("cannot train on an empty dataset")
    n_real, n_fake = ds.class_counts()
    if n_real == 0 or n_fake == 0:
        raise DataError(
            f"training set must contain both classes, got {n_real} real / {n_fake} fake"
        )
    if ds.d != p.d:
        raise ShapeError(f"dataset dimension {ds.d} != head dimension {p.d}")
    if opts.epochs < 1:
        raise ConfigError(f"epochs must be >= 1, got {opts.epochs}")
    if not 0.0 <= opts.dropout < 1.0:
        raise ConfigError(f"dropout must be in [0, 1), got {opts.dropout}")

    # independent deterministic streams for epoch shuffles and dropout
    states = np.random.SeedSequence([opts.seed, 0xB47C]).generate_state(opts.epochs + 1)
    drop_rng = np.random.default_rng(int(states[-1])) if opts.dropout > 0 else None

    params = p
    opt = init_optimizer(
        _all_layers(params),
        lr=opts.lr,
        beta1=opts.beta1,
        beta2=opts.beta2,
        eps=opts.eps,
        weight_decay=opts.weight_decay,
    )
    trace = []
    for epoch in range(opts.epochs):
        total = 0.0
        for idx in data_mod.batches(ds, opts.batch_size, int(states[epoch])):
            X = ds.embeddings[idx].astype(np.float64)
            y = ds.labels[idx].astype(np.float64)
            logits, cache = _forward_train(params, X, opts.dropout, drop_rng)
            loss, dlogits = bce_with_logits_grad(logits, y)
            grads = _backward_train(params, cache, dlogits)
            flat, opt = adam_step(_all_layers(params), grads, opt)
            params = _with_layers(params, flat.layers)
            total += loss * len(idx)
        trace.append(total / ds.n)
    return params, trace, opt


baseline_train = head_train


def head_scores(p, ds: data_mod.EmbeddingDataset, chunk: int = 2048) -> np.ndarray:
    """Raw logits as fake-scores, aligned to dataset row order."""
    if ds.d != p.d:
        raise ShapeError(f"dataset dimension {ds.d} != head dimension {p.d}")
    out = np.empty(ds.n, dtype=np.float64)
    for start in range(0, ds.n, chunk):
        stop = min(start + chunk, ds.n)
        out[start:stop] = head_forward(
            p, ds.embeddings[start:stop].astype(np.float64)
        )
    return out


baseline_scores = head_scores
