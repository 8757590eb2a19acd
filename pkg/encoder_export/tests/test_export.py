import os
import subprocess
import sys

import numpy as np
import pytest
from PIL import Image

from encoder_export import cli
from encoder_export.encoders import PixelProjectionEncoder, make_encoder

CLIP_WEIGHTS = os.environ.get("ENCODER_EXPORT_CLIP_WEIGHTS", "")


def make_images(root, n_per_class=10, size=(256, 256), seed=0):
    """Labeled folder of synthetic face-crop-sized PNGs."""
    rng = np.random.default_rng(seed)
    for cls in ("real", "fake"):
        folder = root / cls
        folder.mkdir(parents=True)
        for i in range(n_per_class):
            pixels = rng.integers(0, 256, size=(*size, 3), dtype=np.uint8)
            Image.fromarray(pixels).save(folder / f"img{i:03d}.png")
    return root


def run_export(argv):
    return cli.main(argv)


def run_primary(argv, cwd=None):
    return subprocess.run(
        [sys.executable, "-m", "wavehead", *argv],
        capture_output=True, text=True, cwd=cwd,
    )


class TestDirectoryExport:
    def test_twenty_image_folder_counts(self, tmp_path):
        images = make_images(tmp_path / "imgs")
        out = tmp_path / "out.wemb"
        assert run_export(["--input-dir", str(images), "--out", str(out),
                           "--encoder", "pixel-projection-768"]) == 0

        from wavehead.data import read_embeddings

        ds = read_embeddings(out)
        assert ds.d == 768
        assert ds.n == 20
        n_real, n_fake = ds.class_counts()
        assert (n_real, n_fake) == (10, 10)
        assert all("/" in s for s in ds.sources)

    def test_single_image_contract(self, tmp_path):
        images = make_images(tmp_path / "imgs", n_per_class=1)
        (images / "fake" / "img000.png").unlink()
        (images / "fake").rmdir()
        out = tmp_path / "one.wemb"
        assert run_export(["--input-dir", str(images), "--out", str(out),
                           "--encoder", "pixel-projection-768"]) == 0

        from wavehead.data import read_embeddings

        ds = read_embeddings(out)
        assert ds.n == 1 and ds.d == 768

    def test_rerun_bitwise_identical(self, tmp_path):
        images = make_images(tmp_path / "imgs")
        a, b = tmp_path / "a.wemb", tmp_path / "b.wemb"
        for out in (a, b):
            assert run_export(["--input-dir", str(images), "--out", str(out),
                               "--encoder", "pixel-projection-768"]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_preprocessing_recorded_in_tag_table(self, tmp_path):
        images = make_images(tmp_path / "imgs", n_per_class=2)
        out = tmp_path / "out.wemb"
        assert run_export(["--input-dir", str(images), "--out", str(out),
                           "--encoder", "pixel-projection-768"]) == 0
        blob = out.read_bytes()
        assert b"encoder=pixel-projection-768" in blob
        assert b"resize=32x32-bilinear" in blob

    def test_empty_directory_is_data_error(self, tmp_path, capsys):
        (tmp_path / "imgs").mkdir()
        code = run_export(["--input-dir", str(tmp_path / "imgs"),
                           "--out", str(tmp_path / "x.wemb"),
                           "--encoder", "pixel-projection-768"])
        assert code == 3
        assert "error: data:" in capsys.readouterr().err

    def test_l2_normalize_flag(self, tmp_path):
        images = make_images(tmp_path / "imgs", n_per_class=3)
        out = tmp_path / "norm.wemb"
        assert run_export(["--input-dir", str(images), "--out", str(out),
                           "--encoder", "pixel-projection-768",
                           "--l2-normalize"]) == 0

        from wavehead.data import read_embeddings

        ds = read_embeddings(out)
        norms = np.linalg.norm(ds.embeddings.astype(np.float64), axis=1)
        np.testing.assert_allclose(norms, 1.0, atol=1e-6)
        assert b";l2norm" in out.read_bytes()


class TestManifestExport:
    def _manifest(self, tmp_path, rows):
        images = make_images(tmp_path / "imgs", n_per_class=3)
        lines = ["id,path,label,source"] + rows
        mf = tmp_path / "manifest.csv"
        mf.write_text("\n".join(lines) + "\n")
        return mf

    def test_manifest_paths_relative_to_manifest(self, tmp_path):
        mf = self._manifest(tmp_path, [
            "a,imgs/real/img000.png,0,vid0/0",
            "b,imgs/real/img001.png,0,vid0/1",
            "c,imgs/fake/img000.png,1,vid1/0",
        ])
        out = tmp_path / "m.wemb"
        assert run_export(["--manifest", str(mf), "--out", str(out),
                           "--encoder", "pixel-projection-768"]) == 0

        from wavehead.data import read_embeddings

        ds = read_embeddings(out)
        assert ds.ids == ["a", "b", "c"]
        assert ds.sources == ["vid0/0", "vid0/1", "vid1/0"]
        assert ds.labels.tolist() == [0, 0, 1]

    def test_bad_label_rejected(self, tmp_path, capsys):
        mf = self._manifest(tmp_path, ["a,imgs/real/img000.png,2,v/0"])
        code = run_export(["--manifest", str(mf), "--out", str(tmp_path / "x.wemb"),
                           "--encoder", "pixel-projection-768"])
        assert code == 3

    def test_duplicate_ids_rejected(self, tmp_path):
        mf = self._manifest(tmp_path, [
            "a,imgs/real/img000.png,0,v/0",
            "a,imgs/real/img001.png,0,v/1",
        ])
        code = run_export(["--manifest", str(mf), "--out", str(tmp_path / "x.wemb"),
                           "--encoder", "pixel-projection-768"])
        assert code == 3

    def test_unreadable_image_abort_vs_skip(self, tmp_path, capsys):
        mf = self._manifest(tmp_path, [
            "a,imgs/real/img000.png,0,v/0",
            "bad,imgs/real/missing.png,0,v/1",
            "c,imgs/fake/img000.png,1,v/2",
        ])
        out = tmp_path / "x.wemb"
        assert run_export(["--manifest", str(mf), "--out", str(out),
                           "--encoder", "pixel-projection-768"]) == 5
        assert not out.exists()
        assert run_export(["--manifest", str(mf), "--out", str(out),
                           "--encoder", "pixel-projection-768",
                           "--on-error", "skip"]) == 0

        from wavehead.data import read_embeddings

        assert read_embeddings(out).ids == ["a", "c"]


class TestEncoders:
    def test_unknown_encoder_is_config_error(self, tmp_path, capsys):
        images = make_images(tmp_path / "imgs", n_per_class=1)
        code = run_export(["--input-dir", str(images),
                           "--out", str(tmp_path / "x.wemb"),
                           "--encoder", "mystery-net"])
        assert code == 2

    def test_clip_without_weights_is_config_error(self, tmp_path, capsys):
        images = make_images(tmp_path / "imgs", n_per_class=1)
        code = run_export(["--input-dir", str(images),
                           "--out", str(tmp_path / "x.wemb")])
        assert code == 2
        assert "weights" in capsys.readouterr().err

    def test_projection_encoder_is_deterministic(self, tmp_path):
        img = Image.fromarray(
            np.random.default_rng(5).integers(0, 256, (64, 64, 3), dtype=np.uint8)
        )
        a = PixelProjectionEncoder(seed=0).encode([img])
        b = PixelProjectionEncoder(seed=0).encode([img])
        assert np.array_equal(a, b)
        c = PixelProjectionEncoder(seed=1).encode([img])
        assert not np.array_equal(a, c)

    @pytest.mark.skipif(not CLIP_WEIGHTS, reason="no local clip checkpoint")
    def test_clip_backend_from_local_weights(self, tmp_path):
        images = make_images(tmp_path / "imgs", n_per_class=1)
        out = tmp_path / "clip.wemb"
        assert run_export(["--input-dir", str(images), "--out", str(out),
                           "--encoder", "clip-vit-l14",
                           "--weights", CLIP_WEIGHTS]) == 0

        from wavehead.data import read_embeddings

        assert read_embeddings(out).d == 768


class TestBoundaryIntegration:
    def test_export_feeds_primary_eval_end_to_end(self, tmp_path):
        # 20-image labeled folder -> export -> primary train/eval, exit 0
        images = make_images(tmp_path / "imgs", n_per_class=10)
        exported = tmp_path / "exported.wemb"
        assert run_export(["--input-dir", str(images), "--out", str(exported),
                           "--encoder", "pixel-projection-768"]) == 0

        synth = run_primary(["synth", "--n-per-class", "50", "--dim", "768",
                             "--separation", "4", "--seed", "1",
                             "--out", str(tmp_path / "train.wemb")])
        assert synth.returncode == 0, synth.stderr
        train = run_primary(["train", "--train", str(tmp_path / "train.wemb"),
                             "--out", str(tmp_path / "head.wchk"),
                             "--epochs", "1", "--seed", "1"])
        assert train.returncode == 0, train.stderr
        evaled = run_primary(["eval", "--checkpoint", str(tmp_path / "head.wchk"),
                              "--out-csv", str(tmp_path / "report.csv"),
                              str(exported)])
        assert evaled.returncode == 0, evaled.stderr
        report = (tmp_path / "report.csv").read_text()
        assert "exported," in report

    def test_exported_file_passes_primary_transform(self, tmp_path):
        images = make_images(tmp_path / "imgs", n_per_class=3)
        exported = tmp_path / "exported.wemb"
        assert run_export(["--input-dir", str(images), "--out", str(exported),
                           "--encoder", "pixel-projection-768"]) == 0
        result = run_primary(["transform", "--input", str(exported)])
        assert result.returncode == 0, result.stderr
        assert "max energy residual" in result.stdout
