"""Frozen image encoders producing 768-d float32 embeddings.

Two backends:

* ``clip-vit-l14``: the reference CLIP-pretrained ViT-L/14 vision tower,
  loaded from a local transformers checkpoint directory (``--weights``).
  The projected image embedding is taken as-is (768-d, pre-normalization).
* ``pixel-projection-768``: a dependency-free deterministic stand-in
  (seeded linear projection of downsampled pixels) for wiring tests and
  offline environments; it is not a learned feature extractor.

Every backend is deterministic for fixed weights and preprocessing, and
exposes ``dim``, ``preprocessing`` and ``encode(images) -> (B, dim)``.
"""

import numpy as np
from PIL import Image

EMBED_DIM = 768


class EncoderError(RuntimeError):
    pass


class PixelProjectionEncoder:
    """Seeded fixed linear projection of 32x32 RGB pixels to 768-d."""

    name = "pixel-projection-768"
    dim = EMBED_DIM

    def __init__(self, seed: int = 0):
        rng = np.random.default_rng(seed)
        flat = 32 * 32 * 3
        self._w = (rng.standard_normal((self.dim, flat)) / np.sqrt(flat)).astype(
            np.float32
        )
        self.preprocessing = (
            f"encoder={self.name};seed={seed};"
            "resize=32x32-bilinear;scale=1/255;center=0.5"
        )

    def encode(self, images: list[Image.Image]) -> np.ndarray:
        batch = np.stack([self._pixels(img) for img in images])
        return np.tanh(batch @ self._w.T)

    def _pixels(self, img: Image.Image) -> np.ndarray:
        small = img.convert("RGB").resize((32, 32), Image.BILINEAR)
        arr = np.asarray(small, dtype=np.float32) / 255.0 - 0.5
        return arr.reshape(-1)


class ClipVitL14Encoder:
    """CLIP-pretrained ViT-L/14 image tower from a local checkpoint."""

    name = "clip-vit-l14"
    dim = EMBED_DIM

    def __init__(self, weights: str, device: str = "cpu"):
        if not weights:
            raise EncoderError(
                "clip-vit-l14 needs --weights pointing at a local "
                "transformers checkpoint directory"
            )
        try:
            import torch
            from transformers import CLIPImageProcessor, CLIPVisionModelWithProjection
        except ImportError as exc:
            raise EncoderError(f"clip backend needs torch+transformers: {exc}")
        self._torch = torch
        self._model = (
            CLIPVisionModelWithProjection.from_pretrained(weights)
            .to(device)
            .eval()
        )
        for param in self._model.parameters():
            param.requires_grad_(False)
        self._proc = CLIPImageProcessor.from_pretrained(weights)
        self._device = device
        if self._model.config.projection_dim != self.dim:
            raise EncoderError(
                f"checkpoint projects to {self._model.config.projection_dim} "
                f"dims, expected {self.dim}"
            )
        size = self._proc.crop_size
        self.preprocessing = (
            f"encoder={self.name};weights={weights};"
            f"proc=clip-canonical-{size['height']}x{size['width']};no-l2norm"
        )

    def encode(self, images: list[Image.Image]) -> np.ndarray:
        rgb = [img.convert("RGB") for img in images]
        inputs = self._proc(images=rgb, return_tensors="pt").to(self._device)
        with self._torch.no_grad():
            out = self._model(**inputs).image_embeds
        return out.cpu().numpy().astype(np.float32)


def make_encoder(name: str, weights: str = "", device: str = "cpu", seed: int = 0):
    if name == PixelProjectionEncoder.name:
        return PixelProjectionEncoder(seed=seed)
    if name == ClipVitL14Encoder.name:
        return ClipVitL14Encoder(weights=weights, device=device)
    raise EncoderError(
        f"unknown encoder {name!r}; supported: "
        f"{ClipVitL14Encoder.name}, {PixelProjectionEncoder.name}"
    )
