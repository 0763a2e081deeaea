"""CLIP-backed encoder: global embeddings for images and text, plus an
attention heatmap derived from the vision transformer.

The model is loaded with eager attention so per-layer weights are
available, pinned to eval mode, and run under no_grad, which makes
repeated encodes of the same bytes bitwise identical. Batch requests are
served as serial single-image encodes for the same reason: a batched
forward pass could differ from a serial one in the low-order bits.
"""

import io
from dataclasses import dataclass

import numpy as np
import torch
from PIL import Image, UnidentifiedImageError

from .attention import DERIVATIONS, to_heatmap
from .config import BridgeConfig


class BridgeError(RuntimeError):
    """Model-load or per-request failure (undecodable image, empty text)."""


@dataclass(frozen=True)
class BridgeInfo:
    """Static descriptor served on /info."""

    dim: int
    input_resolution: int
    attention_grid: tuple[int, int]
    name: str


def _unit(vec: np.ndarray) -> np.ndarray:
    norm = float(np.linalg.norm(vec))
    if norm <= 1e-12:
        raise BridgeError("degenerate zero-norm embedding")
    return vec / norm


class ClipBridge:
    """Loads a dual encoder with transformers and answers protocol calls."""

    def __init__(self, config: BridgeConfig):
        from transformers import AutoImageProcessor, AutoTokenizer, CLIPModel

        self.config = config
        try:
            self.model = CLIPModel.from_pretrained(config.model, attn_implementation="eager")
            self.tokenizer = AutoTokenizer.from_pretrained(config.model)
            self.processor = AutoImageProcessor.from_pretrained(config.model)
        except Exception as exc:
            raise BridgeError(f"cannot load model {config.model!r}: {exc}") from exc
        self.model.to(config.device)
        self.model.eval()
        self._derive = DERIVATIONS[config.attention]

        vision = self.model.config.vision_config
        side = vision.image_size // vision.patch_size
        self._info = BridgeInfo(
            dim=int(self.model.config.projection_dim),
            input_resolution=int(vision.image_size),
            attention_grid=(side, side),
            name=config.model,
        )

    def info(self) -> BridgeInfo:
        return self._info

    def decode(self, raw: bytes) -> Image.Image:
        """Image bytes (PNG/JPEG) -> RGB PIL image."""
        try:
            image = Image.open(io.BytesIO(raw))
            image.load()
        except (UnidentifiedImageError, OSError) as exc:
            raise BridgeError(f"undecodable image bytes: {exc}") from exc
        return image.convert("RGB")

    def encode_image(self, image: Image.Image, want_attention: bool = False):
        """-> (unit-norm embedding, heatmap or None). The embedding does not
        depend on whether attention was requested."""
        pixels = self.processor(images=image, return_tensors="pt")["pixel_values"]
        pixels = pixels.to(self.config.device)
        with torch.no_grad():
            out = self.model.vision_model(pixel_values=pixels, output_attentions=want_attention)
            embeds = self.model.visual_projection(out.pooler_output)
        embedding = _unit(embeds[0].cpu().numpy().astype(np.float64))
        heatmap = None
        if want_attention:
            layers = [a[0].cpu().numpy().astype(np.float64) for a in out.attentions]
            rows, cols = self._info.attention_grid
            heatmap = to_heatmap(self._derive(layers), rows, cols)
        return embedding, heatmap

    def encode_image_bytes(self, raw: bytes, want_attention: bool = False):
        return self.encode_image(self.decode(raw), want_attention)

    def encode_text(self, text: str) -> np.ndarray:
        if not text:
            raise BridgeError("empty query text")
        enc = self.tokenizer([text], return_tensors="pt", truncation=True)
        with torch.no_grad():
            pooled = self.model.text_model(
                input_ids=enc["input_ids"].to(self.config.device),
                attention_mask=enc.get("attention_mask"),
            ).pooler_output
            embeds = self.model.text_projection(pooled)
        return _unit(embeds[0].cpu().numpy().astype(np.float64))
