"""Command line: enumerate labeled images, encode, write one WEMB file.

Inputs are either a manifest CSV with columns ``id,path,label,source``
(paths relative to the manifest) or a directory containing ``real/`` and
``fake/`` image folders.  Output embeddings are 768-d float32; the file
records the exact encoder + preprocessing in tag-table entry 0.
"""

import argparse
import csv
import os
import sys
from dataclasses import dataclass

import numpy as np
from PIL import Image, UnidentifiedImageError

from .encoders import EMBED_DIM, EncoderError, make_encoder
from .wemb import WembWriteError, write_wemb

IMAGE_EXTENSIONS = (".png", ".jpg", ".jpeg", ".bmp", ".webp")

LABEL_DIRS = {"real": 0, "fake": 1}


@dataclass
class ManifestRow:
    id: str
    path: str
    label: int
    source: str


class ManifestError(ValueError):
    pass


def read_manifest(path) -> list[ManifestRow]:
    base = os.path.dirname(os.path.abspath(path))
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        required = {"id", "path", "label", "source"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise ManifestError(
                f"manifest needs columns id,path,label,source; got {reader.fieldnames}"
            )
        for lineno, rec in enumerate(reader, 2):
            if rec["label"] not in ("0", "1"):
                raise ManifestError(
                    f"line {lineno}: label must be 0 or 1, got {rec['label']!r}"
                )
            rows.append(
                ManifestRow(
                    id=rec["id"],
                    path=os.path.join(base, rec["path"]),
                    label=int(rec["label"]),
                    source=rec["source"],
                )
            )
    ids = [r.id for r in rows]
    if len(set(ids)) != len(ids):
        raise ManifestError("manifest ids are not unique")
    if not rows:
        raise ManifestError("manifest lists no images")
    return rows


def scan_directory(root) -> list[ManifestRow]:
    rows = []
    for dirname, label in sorted(LABEL_DIRS.items()):
        folder = os.path.join(root, dirname)
        if not os.path.isdir(folder):
            continue
        for fname in sorted(os.listdir(folder)):
            if not fname.lower().endswith(IMAGE_EXTENSIONS):
                continue
            stem = os.path.splitext(fname)[0]
            rows.append(
                ManifestRow(
                    id=f"{dirname}/{fname}",
                    path=os.path.join(folder, fname),
                    label=label,
                    source=f"{dirname}/{stem}",
                )
            )
    if not rows:
        raise ManifestError(
            f"no images found under {root!r} (expected real/ and fake/ folders)"
        )
    return rows


def export(rows, encoder, out_path, batch_size: int = 16,
           on_error: str = "abort", l2_normalize: bool = False) -> int:
    """Encode every readable image and write the WEMB file. Returns row count."""
    records = []
    pending: list[tuple[ManifestRow, Image.Image]] = []

    def flush():
        if not pending:
            return
        vecs = encoder.encode([img for _, img in pending])
        if vecs.shape != (len(pending), EMBED_DIM):
            raise EncoderError(
                f"encoder returned shape {vecs.shape}, expected "
                f"({len(pending)}, {EMBED_DIM})"
            )
        if l2_normalize:
            vecs = vecs / np.linalg.norm(vecs, axis=1, keepdims=True)
        for (row, img), vec in zip(pending, vecs):
            img.close()
            records.append((row.id, row.source, row.label, vec))
        pending.clear()

    for row in rows:
        try:
            img = Image.open(row.path)
            img.load()
        except (OSError, UnidentifiedImageError) as exc:
            if on_error == "skip":
                print(f"skipping {row.path}: {exc}", file=sys.stderr)
                continue
            raise
        pending.append((row, img))
        if len(pending) >= batch_size:
            flush()
    flush()
    if not records:
        raise ManifestError("no images could be read")
    preprocessing = encoder.preprocessing + (";l2norm" if l2_normalize else "")
    write_wemb(out_path, records, EMBED_DIM, preprocessing)
    return len(records)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="encoder-export",
        description="Run a frozen image encoder over labeled face crops "
                    "and write a WEMB v1 embedding file.",
    )
    src = ap.add_mutually_exclusive_group(required=True)
    src.add_argument("--manifest", help="CSV with columns id,path,label,source")
    src.add_argument("--input-dir", help="directory with real/ and fake/ image folders")
    ap.add_argument("--out", required=True, help="output WEMB path")
    ap.add_argument("--encoder", default="clip-vit-l14",
                    help="clip-vit-l14 (needs --weights) or pixel-projection-768")
    ap.add_argument("--weights", default="",
                    help="local checkpoint directory for the clip encoder")
    ap.add_argument("--device", default="cpu")
    ap.add_argument("--batch-size", type=int, default=16)
    ap.add_argument("--seed", type=int, default=0,
                    help="projection seed for pixel-projection-768")
    ap.add_argument("--on-error", choices=("abort", "skip"), default="abort",
                    help="what to do with unreadable images")
    ap.add_argument("--l2-normalize", action="store_true",
                    help="L2-normalize embeddings before writing (default off)")
    args = ap.parse_args(argv)

    try:
        rows = (
            read_manifest(args.manifest)
            if args.manifest
            else scan_directory(args.input_dir)
        )
        encoder = make_encoder(
            args.encoder, weights=args.weights, device=args.device, seed=args.seed
        )
        n = export(
            rows, encoder, args.out, batch_size=args.batch_size,
            on_error=args.on_error, l2_normalize=args.l2_normalize,
        )
    except (ManifestError, WembWriteError) as exc:
        print(f"error: data: {exc}", file=sys.stderr)
        return 3
    except EncoderError as exc:
        print(f"error: config: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: io: {exc}", file=sys.stderr)
        return 5
    n_fake = sum(r.label for r in rows)
    print(
        f"wrote {n} embeddings (d={EMBED_DIM}) to {args.out} "
        f"with {encoder.name}; manifest had {len(rows) - n_fake} real / {n_fake} fake"
    )
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
