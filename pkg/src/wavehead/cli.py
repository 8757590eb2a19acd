"""Command-line harness: train heads, evaluate embedding files, inspect
transforms, generate synthetic data.

Commands: ``train``, ``eval``, ``transform``, ``synth``.  Every tunable
hyperparameter lives in a flat ``key = value`` config (defaults below),
is echoed into the checkpoint, and reappears as comment lines in every
eval CSV, so each reported number carries the exact configuration that
produced it.

Exit codes: 0 ok, 2 config, 3 data/parse, 4 shape/dim, 5 I/O.  Every error
path prints a single machine-parsable ``error: <class>: <reason>`` line.
"""

import argparse
import hashlib
import os
import sys
import time
from dataclasses import dataclass, fields, replace

import numpy as np

from . import checkpoint, data, metrics
from .errors import ConfigError, DataError, ShapeError, WaveheadError
from .head import (
    EncoderContract,
    TrainOptions,
    head_scores,
    head_train,
    make_baseline_head,
    make_wavelet_head,
)
from .wavelet import dwt1d, make_filter_bank

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_SHAPE = 4
EXIT_IO = 5

CONFIG_ENV = "WAVEHEAD_CONFIG"

# Published cross-dataset reference targets (AUC, EER or None) used for
# informational deltas when an eval file is named after a known benchmark.
REFERENCE_TARGETS = {
    "cdfv1": (0.756, None),
    "cdfv2": (0.759, None),
    "fsh": (0.732, None),
    "ddpm": (0.897, 0.190),
    "ddim": (0.886, 0.197),
    "ldm": (0.897, 0.190),
}

HEAD_TYPES = ("wavelet", "baseline")
POOLINGS = ("frame", "video")


@dataclass
class TrainConfig:
    """Flat, exhaustively-defaulted training configuration."""

    seed: int = 0
    epochs: int = 10
    batch_size: int = 64
    lr: float = 2e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    weight_decay: float = 0.0
    dropout: float = 0.0
    family: str = "haar"
    head: str = "wavelet"
    low_hidden: int = 0  # 0 selects d/2
    cls_hidden: int = 256
    pooling: str = "frame"
    encoder: str = "unspecified"
    train_path: str = ""
    checkpoint_out: str = ""
    trace_out: str = ""

    def validate(self) -> None:
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.lr < 0:
            raise ConfigError(f"lr must be >= 0, got {self.lr}")
        if not (0.0 <= self.beta1 < 1.0 and 0.0 <= self.beta2 < 1.0):
            raise ConfigError(
                f"betas must be in [0, 1), got {self.beta1}, {self.beta2}"
            )
        if self.eps <= 0:
            raise ConfigError(f"eps must be > 0, got {self.eps}")
        if self.weight_decay < 0:
            raise ConfigError(f"weight_decay must be >= 0, got {self.weight_decay}")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError(f"dropout must be in [0, 1), got {self.dropout}")
        if self.head not in HEAD_TYPES:
            raise ConfigError(f"head must be one of {HEAD_TYPES}, got {self.head!r}")
        if self.pooling not in POOLINGS:
            raise ConfigError(
                f"pooling must be one of {POOLINGS}, got {self.pooling!r}"
            )
        if self.low_hidden < 0 or self.cls_hidden < 1:
            raise ConfigError(
                f"invalid MLP widths: low_hidden={self.low_hidden}, "
                f"cls_hidden={self.cls_hidden}"
            )
        make_filter_bank(self.family)  # raises ConfigError on unknown family

    def to_text(self) -> str:
        lines = [f"{f.name} = {getattr(self, f.name)!r}" for f in fields(self)]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "TrainConfig":
        known = {f.name: f.type for f in fields(cls)}
        values = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"config line {lineno} is not 'key = value': {raw!r}")
            key, _, val = line.partition("=")
            key = key.strip()
            val = val.strip()
            if key not in known:
                raise ConfigError(f"unknown config key {key!r} (line {lineno})")
            values[key] = _coerce(key, val, known[key], lineno)
        return cls(**values)


def _coerce(key, val, typ, lineno):
    if val.startswith(("'", '"')) and val.endswith(val[0]) and len(val) >= 2:
        val = val[1:-1]
    try:
        if typ in (int, "int"):
            return int(val)
        if typ in (float, "float"):
            return float(val)
    except ValueError:
        raise ConfigError(
            f"config key {key!r} expects {typ}, got {val!r} (line {lineno})"
        )
    return val


def _fail(category: str, exc: BaseException, code: int) -> int:
    print(f"error: {category}: {exc}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        return _fail("config", exc, EXIT_CONFIG)
    except DataError as exc:  # includes FormatError, UndefinedMetricError
        return _fail("data", exc, EXIT_DATA)
    except ShapeError as exc:
        return _fail("shape", exc, EXIT_SHAPE)
    except OSError as exc:
        return _fail("io", exc, EXIT_IO)
    except WaveheadError as exc:  # pragma: no cover - safety net
        return _fail("error", exc, EXIT_DATA)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wavehead",
        description="Train and evaluate wavelet classification heads on embedding files.",
    )
    sub = parser.add_subparsers(required=True, metavar="command")

    p_train = sub.add_parser("train", help="train a head on a WEMB file")
    p_train.add_argument("--config", help=f"flat config file (default ${CONFIG_ENV})")
    p_train.add_argument("--train", dest="train_path", help="training WEMB file")
    p_train.add_argument("--out", dest="checkpoint_out", help="checkpoint output path")
    p_train.add_argument("--trace", dest="trace_out", help="loss trace CSV output path")
    p_train.add_argument("--save-optimizer", action="store_true",
                         help="store optimizer state in the checkpoint")
    for name, typ in (
        ("seed", int), ("epochs", int), ("batch-size", int), ("lr", float),
        ("beta1", float), ("beta2", float), ("eps", float),
        ("weight-decay", float), ("dropout", float), ("family", str),
        ("head", str), ("low-hidden", int), ("cls-hidden", int),
        ("pooling", str), ("encoder", str),
    ):
        p_train.add_argument(f"--{name}", type=typ, default=None,
                             dest=name.replace("-", "_"))
    p_train.set_defaults(func=cmd_train)

    p_eval = sub.add_parser("eval", help="evaluate a checkpoint on WEMB files")
    p_eval.add_argument("--checkpoint", required=True)
    p_eval.add_argument("--out-csv", required=True, help="full-precision CSV report")
    p_eval.add_argument("--out-table", help="aligned text table (default: stdout)")
    p_eval.add_argument("inputs", nargs="+", help="WEMB files to evaluate")
    p_eval.set_defaults(func=cmd_eval)

    p_tr = sub.add_parser("transform", help="per-row subband energy report")
    p_tr.add_argument("--input", required=True, help="WEMB file")
    p_tr.add_argument("--family", default="haar")
    p_tr.add_argument("--out-csv", help="per-row energies CSV")
    p_tr.set_defaults(func=cmd_transform)

    p_sy = sub.add_parser("synth", help="generate a synthetic WEMB file")
    p_sy.add_argument("--n-per-class", type=int, required=True)
    p_sy.add_argument("--dim", type=int, default=768)
    p_sy.add_argument("--separation", type=float, default=8.0)
    p_sy.add_argument("--seed", type=int, default=0)
    p_sy.add_argument("--out", required=True)
    p_sy.add_argument("--holdout", type=float, default=0.0,
                      help="held-out fraction written to --holdout-out")
    p_sy.add_argument("--holdout-out")
    p_sy.add_argument("--holdout-seed", type=int, default=0)
    p_sy.set_defaults(func=cmd_synth)

    return parser


# ---------------------------------------------------------------------------
# train

def _resolve_config(args) -> TrainConfig:
    cfg = TrainConfig()
    path = args.config or os.environ.get(CONFIG_ENV)
    if path:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = TrainConfig.from_text(fh.read())
    overrides = {}
    for f in fields(TrainConfig):
        val = getattr(args, f.name, None)
        if val is not None:
            overrides[f.name] = val
    cfg = replace(cfg, **overrides)
    cfg.validate()
    return cfg


def cmd_train(args) -> int:
    cfg = _resolve_config(args)
    if not cfg.train_path:
        raise ConfigError("no training file given (--train or config train_path)")
    if not cfg.checkpoint_out:
        raise ConfigError("no checkpoint output given (--out or config checkpoint_out)")
    ds = data.read_embeddings(cfg.train_path)
    EncoderContract(d=ds.d, provenance=cfg.encoder).validate()
    if cfg.head == "wavelet":
        params = make_wavelet_head(
            ds.d, low_hidden=cfg.low_hidden, cls_hidden=cfg.cls_hidden,
            family=cfg.family, seed=cfg.seed,
        )
    else:
        params = make_baseline_head(ds.d, cls_hidden=cfg.cls_hidden, seed=cfg.seed)
    opts = TrainOptions(
        seed=cfg.seed, epochs=cfg.epochs, batch_size=cfg.batch_size, lr=cfg.lr,
        beta1=cfg.beta1, beta2=cfg.beta2, eps=cfg.eps,
        weight_decay=cfg.weight_decay, dropout=cfg.dropout,
    )
    t0 = time.perf_counter()
    params, trace, opt_state = head_train(params, ds, opts)
    elapsed = time.perf_counter() - t0

    if not args.save_optimizer:
        opt_state = None
    _write_atomic(cfg.checkpoint_out,
                  lambda tmp: checkpoint.save_head(tmp, params, cfg.to_text(), opt_state))
    if cfg.trace_out:
        text = "epoch,loss\n" + "".join(
            f"{i},{loss!r}\n" for i, loss in enumerate(trace)
        )
        _write_atomic(cfg.trace_out, lambda tmp: _write_text(tmp, text))
    print(
        f"trained {cfg.head} head on {ds.n} rows (d={ds.d}) for {cfg.epochs} epochs "
        f"in {elapsed:.1f}s; final loss {trace[-1]:.6f}; checkpoint {cfg.checkpoint_out}"
    )
    return EXIT_OK


def _write_text(path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _write_atomic(path, writer) -> None:
    tmp = f"{path}.tmp"
    try:
        writer(tmp)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# eval

@dataclass
class EvalRow:
    name: str
    n: int
    n_pos: int
    n_neg: int
    auc: float
    eer: float
    video_n: int | None = None
    video_auc: float | None = None
    video_eer: float | None = None


@dataclass
class EvalReport:
    rows: list
    average: EvalRow
    fingerprint: str
    config_echo: str
    wall_clock: float


def _video_pool(scores, ds):
    """Mean score per video id (source tag prefix before the last '/')."""
    if not all("/" in s for s in ds.sources):
        return None
    groups: dict[str, list[int]] = {}
    for i, src in enumerate(ds.sources):
        groups.setdefault(src.rsplit("/", 1)[0], []).append(i)
    v_scores, v_labels = [], []
    for vid, rows in groups.items():
        labels = {int(ds.labels[i]) for i in rows}
        if len(labels) != 1:
            raise DataError(f"video {vid!r} mixes real and fake frames")
        v_scores.append(float(np.mean([scores[i] for i in rows])))
        v_labels.append(labels.pop())
    return np.asarray(v_scores), np.asarray(v_labels)


def cmd_eval(args) -> int:
    t0 = time.perf_counter()
    params, config_echo, _ = checkpoint.load_head(args.checkpoint)
    with open(args.checkpoint, "rb") as fh:
        fingerprint = hashlib.sha256(fh.read()).hexdigest()[:16]
    rows = []
    for path in args.inputs:
        ds = data.read_embeddings(path)
        if ds.d != params.d:
            raise ShapeError(
                f"{path}: embedding dimension {ds.d} != checkpoint dimension {params.d}"
            )
        try:
            scores = head_scores(params, ds)
            rep = metrics.roc_curve(scores, ds.labels.astype(np.int64))
        except DataError as exc:
            raise DataError(f"{path}: {exc}")
        name = os.path.splitext(os.path.basename(path))[0]
        row = EvalRow(
            name=name, n=ds.n, n_pos=rep.n_pos, n_neg=rep.n_neg,
            auc=rep.auc, eer=rep.eer,
        )
        pooled = _video_pool(scores, ds)
        if pooled is not None:
            v_scores, v_labels = pooled
            if v_labels.min() != v_labels.max():
                v_rep = metrics.roc_curve(v_scores, v_labels)
                row.video_n = len(v_scores)
                row.video_auc = v_rep.auc
                row.video_eer = v_rep.eer
        rows.append(row)
    avg = EvalRow(
        name="average",
        n=sum(r.n for r in rows),
        n_pos=sum(r.n_pos for r in rows),
        n_neg=sum(r.n_neg for r in rows),
        auc=float(np.mean([r.auc for r in rows])),
        eer=float(np.mean([r.eer for r in rows])),
    )
    if all(r.video_auc is not None for r in rows):
        avg.video_n = sum(r.video_n for r in rows)
        avg.video_auc = float(np.mean([r.video_auc for r in rows]))
        avg.video_eer = float(np.mean([r.video_eer for r in rows]))
    report = EvalReport(
        rows=rows, average=avg, fingerprint=fingerprint,
        config_echo=config_echo, wall_clock=time.perf_counter() - t0,
    )
    _write_atomic(args.out_csv, lambda tmp: _write_text(tmp, _report_csv(report)))
    table = _report_table(report)
    if args.out_table:
        _write_atomic(args.out_table, lambda tmp: _write_text(tmp, table))
    else:
        print(table, end="")
    print(f"evaluated {len(rows)} file(s) in {report.wall_clock:.2f}s; csv {args.out_csv}")
    return EXIT_OK


def _fmt_opt(v) -> str:
    return "" if v is None else repr(v)


def _report_csv(report: EvalReport) -> str:
    lines = [f"# fingerprint = {report.fingerprint}"]
    for raw in report.config_echo.strip().splitlines():
        if raw.strip():
            lines.append(f"# config: {raw}")
    lines.append("dataset,rows,pos,neg,auc,eer,video_rows,video_auc,video_eer")
    for r in report.rows + [report.average]:
        lines.append(
            f"{r.name},{r.n},{r.n_pos},{r.n_neg},{r.auc!r},{r.eer!r},"
            f"{_fmt_opt(r.video_n)},{_fmt_opt(r.video_auc)},{_fmt_opt(r.video_eer)}"
        )
    return "\n".join(lines) + "\n"


def _report_table(report: EvalReport) -> str:
    headers = ["dataset", "rows", "auc", "eer", "v.auc", "v.eer", "ref.auc", "delta"]
    body = []
    for r in report.rows + [report.average]:
        ref = REFERENCE_TARGETS.get(r.name.lower())
        ref_auc = f"{ref[0]:.3f}" if ref else ""
        delta = f"{r.auc - ref[0]:+.3f}" if ref else ""
        body.append([
            r.name, str(r.n), f"{r.auc:.3f}", f"{r.eer:.3f}",
            "" if r.video_auc is None else f"{r.video_auc:.3f}",
            "" if r.video_eer is None else f"{r.video_eer:.3f}",
            ref_auc, delta,
        ])
    widths = [
        max(len(headers[c]), *(len(row[c]) for row in body))
        for c in range(len(headers))
    ]
    def fmt(row):
        return "  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip()
    sep = "  ".join("-" * w for w in widths)
    return "\n".join([fmt(headers), sep] + [fmt(row) for row in body]) + "\n"


# ---------------------------------------------------------------------------
# transform

def cmd_transform(args) -> int:
    fb = make_filter_bank(args.family)
    ds = data.read_embeddings(args.input)
    if ds.d % 2 != 0:
        raise ShapeError(f"{args.input}: dimension {ds.d} is odd")
    X = ds.embeddings.astype(np.float64)
    bands = dwt1d(fb, X)
    low_e = (bands.low ** 2).sum(axis=1)
    high_e = (bands.high ** 2).sum(axis=1)
    total_e = (X ** 2).sum(axis=1)
    abs_res = np.abs(low_e + high_e - total_e)
    rel_res = abs_res / np.maximum(total_e, 1.0)
    if args.out_csv:
        cols = [a.tolist() for a in (low_e, high_e, total_e, abs_res, rel_res)]
        lines = ["id,low_energy,high_energy,total_energy,abs_residual,rel_residual"]
        for i in range(ds.n):
            lines.append(
                f"{ds.ids[i]}," + ",".join(repr(col[i]) for col in cols)
            )
        _write_atomic(args.out_csv, lambda tmp: _write_text(tmp, "\n".join(lines) + "\n"))
    max_rel = float(rel_res.max()) if ds.n else 0.0
    print(
        f"{args.input}: {ds.n} rows, d={ds.d}, family={fb.family}, "
        f"max energy residual {max_rel:.3e}"
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# synth

def cmd_synth(args) -> int:
    if args.holdout and not args.holdout_out:
        raise ConfigError("--holdout requires --holdout-out")
    if args.holdout_out and not args.holdout:
        raise ConfigError("--holdout-out requires --holdout > 0")
    ds = data.make_synthetic(args.n_per_class, args.dim, args.separation, args.seed)
    if args.holdout:
        spec = data.SplitSpec(
            train_fraction=1.0 - args.holdout, seed=args.holdout_seed, stratified=True
        )
        train, test = data.split(ds, spec)
        data.write_embeddings(args.out, train)
        data.write_embeddings(args.holdout_out, test)
        print(
            f"wrote {train.n} rows to {args.out} and {test.n} held-out rows "
            f"to {args.holdout_out} (d={args.dim}, separation={args.separation})"
        )
    else:
        data.write_embeddings(args.out, ds)
        print(f"wrote {ds.n} rows to {args.out} (d={args.dim}, separation={args.separation})")
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
