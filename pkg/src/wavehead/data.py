"""Embedding datasets: the WEMB v1 file format, splits, batches, synthetics.

WEMB v1 layout (all little-endian, no padding, trailing bytes rejected):

    magic 'WEMB' | version u16 = 1 | flags u16 = 0 | N u64 | d u32
    | tag table: count u32, then count x (len u32 + UTF-8 bytes)
    | N records: id (len u32 + UTF-8) | tag index u32 | label u8 | d x f32

Embeddings are stored as 32-bit floats (the encoder's output precision) and
kept as float32 in-core, so write/read is the identity bit for bit; heads
promote to float64 at compute time.
"""

from dataclasses import dataclass

import numpy as np

from ._binio import Reader, Writer
from .errors import ConfigError, DataError, FormatError

MAGIC = b"WEMB"
VERSION = 1

LABEL_REAL = 0
LABEL_FAKE = 1


@dataclass
class EmbeddingDataset:
    """N frame-level rows of (embedding, label, source tag, id).

    ``source`` tags conventionally carry ``video_id/frame_idx`` so scores
    can be pooled per video downstream.
    """

    d: int
    embeddings: np.ndarray  # (N, d) float32
    labels: np.ndarray      # (N,) uint8, 0 = real, 1 = fake
    sources: list[str]
    ids: list[str]

    @property
    def n(self) -> int:
        return self.embeddings.shape[0]

    def validate(self) -> None:
        emb = self.embeddings
        if emb.ndim != 2 or emb.shape[1] != self.d:
            raise DataError(
                f"embeddings shape {emb.shape} does not match d={self.d}"
            )
        n = emb.shape[0]
        if len(self.labels) != n or len(self.sources) != n or len(self.ids) != n:
            raise DataError(
                f"row count mismatch: {n} embeddings, {len(self.labels)} labels, "
                f"{len(self.sources)} sources, {len(self.ids)} ids"
            )
        if n and not np.isfinite(emb).all():
            raise DataError("embeddings contain non-finite values")
        if n and not np.isin(self.labels, (LABEL_REAL, LABEL_FAKE)).all():
            raise DataError(
                f"labels must be 0/1, got values {sorted(set(self.labels.tolist()))}"
            )
        if len(set(self.ids)) != n:
            raise DataError("record ids are not unique")

    def take(self, idx: np.ndarray) -> "EmbeddingDataset":
        return EmbeddingDataset(
            d=self.d,
            embeddings=self.embeddings[idx].copy(),
            labels=self.labels[idx].copy(),
            sources=[self.sources[i] for i in idx],
            ids=[self.ids[i] for i in idx],
        )

    def class_counts(self) -> tuple[int, int]:
        fake = int(self.labels.sum())
        return self.n - fake, fake


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float
    seed: int
    stratified: bool = True


def write_embeddings(path, ds: EmbeddingDataset) -> None:
    """Serialize to WEMB v1. The dataset is validated first."""
    ds.validate()
    w = Writer()
    w.raw(MAGIC)
    w.u16(VERSION)
    w.u16(0)  # flags
    w.u64(ds.n)
    w.u32(ds.d)
    table: dict[str, int] = {}
    for tag in ds.sources:
        if tag not in table:
            table[tag] = len(table)
    w.u32(len(table))
    for tag in table:
        w.string(tag)
    for i in range(ds.n):
        w.string(ds.ids[i])
        w.u32(table[ds.sources[i]])
        w.u8(int(ds.labels[i]))
        w.f32_array(ds.embeddings[i])
    with open(path, "wb") as fh:
        fh.write(w.getvalue())


def read_embeddings(path) -> EmbeddingDataset:
    """Parse a WEMB v1 file, rejecting every malformed field with a typed error."""
    with open(path, "rb") as fh:
        data = fh.read()
    r = Reader(data)
    magic = r.take(4, "magic")
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {MAGIC!r}", offset=0)
    version = r.u16("version")
    if version != VERSION:
        raise FormatError(f"unsupported version {version}", offset=4)
    flags = r.u16("flags")
    if flags != 0:
        raise FormatError(f"unsupported flags 0x{flags:04x}", offset=6)
    n = r.u64("record count")
    d = r.u32("embedding dimension")
    if d == 0:
        raise FormatError("embedding dimension is zero", offset=16)
    tag_count = r.u32("tag count")
    tags = [r.string(f"tag {i}") for i in range(tag_count)]
    # reject impossible headers before allocating: every record needs at
    # least an empty id (4), a tag index (4), a label (1) and d floats
    min_record = 4 + 4 + 1 + 4 * d
    remaining = len(data) - r.pos
    if n * min_record > remaining:
        raise FormatError(
            f"header claims {n} records of >= {min_record} bytes but only "
            f"{remaining} bytes remain",
            offset=r.pos,
        )
    emb = np.empty((n, d), dtype=np.float32)
    labels = np.empty(n, dtype=np.uint8)
    sources: list[str] = []
    ids: list[str] = []
    seen: set[str] = set()
    for i in range(n):
        rid = r.string(f"record {i} id")
        if rid in seen:
            raise FormatError(f"duplicate id {rid!r} in record {i}", offset=r.pos)
        seen.add(rid)
        tag_idx = r.u32(f"record {i} tag index")
        if tag_idx >= tag_count:
            raise FormatError(
                f"record {i} tag index {tag_idx} out of range "
                f"(table has {tag_count})",
                offset=r.pos - 4,
            )
        label_pos = r.pos
        label = r.u8(f"record {i} label")
        if label not in (LABEL_REAL, LABEL_FAKE):
            raise FormatError(
                f"record {i} label {label} is not 0/1", offset=label_pos
            )
        vec_pos = r.pos
        vec = r.f32_array(d, f"record {i} embedding")
        if not np.isfinite(vec).all():
            raise FormatError(
                f"record {i} embedding has non-finite values", offset=vec_pos
            )
        emb[i] = vec
        labels[i] = label
        sources.append(tags[tag_idx])
        ids.append(rid)
    r.expect_eof()
    ds = EmbeddingDataset(d=d, embeddings=emb, labels=labels, sources=sources, ids=ids)
    ds.validate()
    return ds


def split(ds: EmbeddingDataset, spec: SplitSpec):
    """Deterministic disjoint/exhaustive (train, test) split.

    Stratified splits preserve the class ratio within one sample per class.
    """
    if not 0.0 < spec.train_fraction < 1.0:
        raise ConfigError(
            f"train fraction must be in (0, 1), got {spec.train_fraction}"
        )
    if ds.n < 2:
        raise DataError(f"cannot split {ds.n} rows")
    rng = np.random.default_rng(spec.seed)
    if spec.stratified:
        n_real, n_fake = ds.class_counts()
        if n_real == 0 or n_fake == 0:
            raise DataError("stratified split requires both classes present")
        train_idx = []
        for cls in (LABEL_REAL, LABEL_FAKE):
            rows = np.flatnonzero(ds.labels == cls)
            rows = rng.permutation(rows)
            k = int(round(spec.train_fraction * len(rows)))
            train_idx.append(rows[:k])
        train_mask = np.zeros(ds.n, dtype=bool)
        train_mask[np.concatenate(train_idx)] = True
    else:
        perm = rng.permutation(ds.n)
        k = int(round(spec.train_fraction * ds.n))
        train_mask = np.zeros(ds.n, dtype=bool)
        train_mask[perm[:k]] = True
    train = ds.take(np.flatnonzero(train_mask))
    test = ds.take(np.flatnonzero(~train_mask))
    if train.n == 0 or test.n == 0:
        raise ConfigError(
            f"degenerate split: {train.n} train / {test.n} test rows"
        )
    if spec.stratified:
        for part, name in ((train, "train"), (test, "test")):
            a, b = part.class_counts()
            if a == 0 or b == 0:
                raise ConfigError(f"stratified {name} split lost a class")
    return train, test


def batches(ds: EmbeddingDataset, batch_size: int, shuffle_seed: int):
    """Shuffled index batches covering every row exactly once.

    The last batch may be short.  Deterministic for a given seed.
    """
    if batch_size < 1:
        raise ConfigError(f"batch size must be >= 1, got {batch_size}")
    perm = np.random.default_rng(shuffle_seed).permutation(ds.n)
    return [perm[i : i + batch_size] for i in range(0, ds.n, batch_size)]


def make_synthetic(n_per_class: int, d: int, separation: float, seed: int) -> EmbeddingDataset:
    """Two spherical-Gaussian classes displaced +-(separation/2) along a seeded unit direction.

    separation 0 makes the classes indistinguishable (Bayes AUC 0.5);
    separation 8 in high dimension is linearly separable with margin.
    """
    if n_per_class < 1:
        raise ConfigError(f"n_per_class must be >= 1, got {n_per_class}")
    if d % 2 != 0 or d < 2:
        raise ConfigError(f"dimension must be positive and even, got {d}")
    if separation < 0:
        raise ConfigError(f"separation must be >= 0, got {separation}")
    rng = np.random.default_rng(seed)
    u = rng.normal(size=d)
    u /= np.linalg.norm(u)
    emb = np.empty((2 * n_per_class, d), dtype=np.float32)
    labels = np.empty(2 * n_per_class, dtype=np.uint8)
    sources: list[str] = []
    ids: list[str] = []
    frames_per_video = 4
    for cls in (LABEL_REAL, LABEL_FAKE):
        sign = -1.0 if cls == LABEL_REAL else 1.0
        center = sign * (separation / 2.0) * u
        rows = rng.normal(size=(n_per_class, d)) + center
        lo = cls * n_per_class
        emb[lo : lo + n_per_class] = rows.astype(np.float32)
        labels[lo : lo + n_per_class] = cls
        tag = "real" if cls == LABEL_REAL else "fake"
        for i in range(n_per_class):
            sources.append(f"{tag}-v{i // frames_per_video:05d}/{i % frames_per_video}")
            ids.append(f"{tag}-{i:06d}")
    return EmbeddingDataset(d=d, embeddings=emb, labels=labels, sources=sources, ids=ids)
