"""Encoder gateway: wire protocol, protocol client, and the test encoder.

The engine talks to encoders through one small surface: `info()`,
`encode_image()`, `encode_text()`, plus a batched `encode_images()` with a
serial fallback. Remote encoders speak HTTP+JSON:

    GET  /info               -> {name, dim, input_resolution,
                                 attention_rows, attention_cols}
    POST /encode_image       -> {embedding, attention?} for
                                {image_b64, want_attention}
    POST /encode_image_batch -> {results: [...]} (optional; 404 means use
                                serial calls)
    POST /encode_text        -> {embedding} for {text}

The selector "builtin:test" (also the TZR_ENCODER_URL default) picks the
in-process test encoder, a fully deterministic stand-in for a
vision-language model: image embeddings are hue-bucket histograms of
saturated pixels, so bright unsaturated clutter attracts attention while
dim saturated content carries the searchable signal - the exact imbalance
the low-attention pipeline targets.
"""

import base64
import hashlib
import os
import re
import threading
from dataclasses import dataclass

import cv2
import numpy as np

from .core import AttentionMap, Embedding, l2_normalize

TEST_ENCODER_SELECTOR = "builtin:test"
ENCODER_URL_ENV = "TZR_ENCODER_URL"


class EncoderError(RuntimeError):
    """Transport, decode, or protocol failure while talking to an encoder."""


@dataclass(frozen=True)
class EncoderInfo:
    """Static capabilities an encoder advertises."""

    dim: int
    input_resolution: int
    attention_grid: tuple[int, int]  # (rows, cols) of the native heatmap
    name: str

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError("encoder dim must be >= 2")
        if self.input_resolution < 16:
            raise ValueError("input_resolution must be >= 16")


@dataclass(frozen=True)
class EncodeImageResult:
    """Embedding plus, when requested, the native-grid attention map."""

    embedding: Embedding
    attention: AttentionMap | None = None


class EncoderClient:
    """Base surface; subclasses implement info/encode_image/encode_text."""

    def info(self) -> EncoderInfo:
        raise NotImplementedError

    def encode_image(self, image: np.ndarray, want_attention: bool = False) -> EncodeImageResult:
        raise NotImplementedError

    def encode_text(self, text: str) -> Embedding:
        raise NotImplementedError

    def encode_images(self, images, want_attention: bool = False) -> list[EncodeImageResult]:
        """Batch encode; the default just loops."""
        return [self.encode_image(img, want_attention) for img in images]


# --- image byte codecs used on the wire and for thumbnails ---


def encode_png_b64(image: np.ndarray) -> str:
    """RGB uint8 array -> base64 PNG string."""
    ok, buf = cv2.imencode(".png", cv2.cvtColor(image, cv2.COLOR_RGB2BGR))
    if not ok:
        raise EncoderError("PNG encoding failed")
    return base64.b64encode(buf.tobytes()).decode("ascii")


def decode_image_b64(data: str) -> np.ndarray:
    """base64 PNG/JPEG string -> RGB uint8 array."""
    try:
        raw = base64.b64decode(data, validate=True)
    except Exception as exc:
        raise EncoderError(f"invalid base64 image: {exc}") from exc
    img = cv2.imdecode(np.frombuffer(raw, dtype=np.uint8), cv2.IMREAD_COLOR)
    if img is None:
        raise EncoderError("undecodable image bytes")
    return cv2.cvtColor(img, cv2.COLOR_BGR2RGB)


# --- deterministic test encoder ---


def hash_to_sphere(data: bytes, dim: int = 16) -> Embedding:
    """Deterministic unit vector from a byte digest (stable across runs)."""
    digest = hashlib.blake2b(data, digest_size=8).digest()
    rng = np.random.default_rng(int.from_bytes(digest, "little"))
    return l2_normalize(rng.standard_normal(dim))


def _rgb_to_hue_sat(rgb: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized RGB [0,1] -> (hue in [0,1), saturation in [0,1])."""
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    maxc = np.maximum(np.maximum(r, g), b)
    minc = np.minimum(np.minimum(r, g), b)
    delta = maxc - minc
    sat = np.where(maxc > 0, delta / np.where(maxc > 0, maxc, 1.0), 0.0)

    hue = np.zeros_like(maxc)
    nz = delta > 0
    safe = np.where(nz, delta, 1.0)
    r_max = nz & (maxc == r)
    g_max = nz & ~r_max & (maxc == g)
    b_max = nz & ~r_max & ~g_max
    hue = np.where(r_max, ((g - b) / safe) % 6.0, hue)
    hue = np.where(g_max, (b - r) / safe + 2.0, hue)
    hue = np.where(b_max, (r - g) / safe + 4.0, hue)
    return (hue / 6.0) % 1.0, sat


def hue_bucket_color(bucket: int, saturation: float = 1.0, value: float = 1.0) -> tuple[int, int, int]:
    """RGB uint8 triple at the center of one of the 16 hue buckets."""
    if not 0 <= bucket < 16:
        raise ValueError("bucket must be in [0, 16)")
    h = (bucket + 0.5) / 16.0 * 6.0
    c = value * saturation
    x = c * (1.0 - abs(h % 2.0 - 1.0))
    m = value - c
    sector = int(h)
    rgb = [(c, x, 0), (x, c, 0), (0, c, x), (0, x, c), (x, 0, c), (c, 0, x)][sector]
    return tuple(int(round((ch + m) * 255)) for ch in rgb)


class TestEncoder(EncoderClient):
    """Deterministic in-process encoder (D=16) for tests and demos.

    Image embedding: L2-normalized 16-bin hue-bucket histogram of pixels
    with saturation > 0.5; an image with no saturated pixels maps to the
    hash-to-sphere vector of its byte digest. Text "color:i" (0..15) maps
    to basis vector e_i; any other text maps to a seeded hash-to-sphere
    vector. Attention is a 16x16 grid of per-cell mean luminance, min-max
    normalized (constant images come back as all 0.5).
    """

    DIM = 16
    RESOLUTION = 224
    GRID = (16, 16)
    SATURATION_THRESHOLD = 0.5

    _TEXT_RE = re.compile(r"color:(\d{1,2})\Z")

    def info(self) -> EncoderInfo:
        return EncoderInfo(
            dim=self.DIM,
            input_resolution=self.RESOLUTION,
            attention_grid=self.GRID,
            name=TEST_ENCODER_SELECTOR,
        )

    def encode_image(self, image: np.ndarray, want_attention: bool = False) -> EncodeImageResult:
        image = np.asarray(image)
        if image.ndim != 3 or image.shape[2] != 3 or image.size == 0:
            raise EncoderError("expected a nonempty (H, W, 3) RGB image")
        rgb = image.astype(np.float64) / 255.0
        hue, sat = _rgb_to_hue_sat(rgb)
        saturated = sat > self.SATURATION_THRESHOLD
        if saturated.any():
            buckets = np.minimum((hue[saturated] * self.DIM).astype(np.intp), self.DIM - 1)
            hist = np.bincount(buckets, minlength=self.DIM).astype(np.float64)
            embedding = l2_normalize(hist)
        else:
            embedding = hash_to_sphere(image.tobytes(), self.DIM)

        attention = self._attention(rgb) if want_attention else None
        return EncodeImageResult(embedding=embedding, attention=attention)

    def _attention(self, rgb: np.ndarray) -> AttentionMap:
        luma = 0.299 * rgb[..., 0] + 0.587 * rgb[..., 1] + 0.114 * rgb[..., 2]
        rows, cols = self.GRID
        h, w = luma.shape
        if h < rows or w < cols:
            # Tiny inputs: resample so every grid cell has a value.
            from .imageops import bilinear_resize

            cells = bilinear_resize(luma, rows, cols)
        else:
            ys = [h * i // rows for i in range(rows + 1)]
            xs = [w * j // cols for j in range(cols + 1)]
            cells = np.empty((rows, cols), dtype=np.float64)
            for i in range(rows):
                for j in range(cols):
                    cells[i, j] = luma[ys[i] : ys[i + 1], xs[j] : xs[j + 1]].mean()
        lo, hi = float(cells.min()), float(cells.max())
        if hi - lo <= 0.0:
            return AttentionMap(np.full((rows, cols), 0.5))
        return AttentionMap((cells - lo) / (hi - lo))

    def encode_text(self, text: str) -> Embedding:
        if not text:
            raise EncoderError("empty query text")
        m = self._TEXT_RE.fullmatch(text)
        if m and 0 <= int(m.group(1)) < self.DIM:
            basis = np.zeros(self.DIM)
            basis[int(m.group(1))] = 1.0
            return l2_normalize(basis)
        return hash_to_sphere(b"text:" + text.encode("utf-8"), self.DIM)


# --- HTTP protocol client ---


class HttpEncoderClient(EncoderClient):
    """Client for the HTTP+JSON encoder protocol.

    Concurrent use is safe; an in-flight cap (default 4) bounds pressure on
    the remote model. A 404 on the batch endpoint permanently falls back to
    serial calls.
    """

    def __init__(self, base_url: str, max_inflight: int = 4, client=None, timeout: float = 60.0):
        import httpx

        self._client = client or httpx.Client(base_url=base_url, timeout=timeout)
        self._sem = threading.Semaphore(max_inflight)
        self._info: EncoderInfo | None = None
        self._batch_supported: bool | None = None

    def _request(self, method: str, path: str, **kwargs):
        with self._sem:
            try:
                resp = self._client.request(method, path, **kwargs)
            except Exception as exc:
                raise EncoderError(f"encoder transport failure on {path}: {exc}") from exc
        if resp.status_code != 200:
            raise EncoderError(f"encoder returned {resp.status_code} on {path}: {resp.text[:200]}")
        return resp.json()

    def info(self) -> EncoderInfo:
        if self._info is None:
            payload = self._request("GET", "/info")
            try:
                self._info = EncoderInfo(
                    dim=int(payload["dim"]),
                    input_resolution=int(payload["input_resolution"]),
                    attention_grid=(int(payload["attention_rows"]), int(payload["attention_cols"])),
                    name=str(payload.get("name", "remote")),
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise EncoderError(f"malformed /info payload: {exc}") from exc
        return self._info

    def _parse_result(self, payload: dict, want_attention: bool) -> EncodeImageResult:
        embedding = self._parse_embedding(payload)
        attention = None
        if want_attention:
            att = payload.get("attention")
            if att is None:
                raise EncoderError("attention requested but missing from response")
            values = np.asarray(att["values"], dtype=np.float64).reshape(
                int(att["rows"]), int(att["cols"])
            )
            attention = AttentionMap(values)
        return EncodeImageResult(embedding=embedding, attention=attention)

    def _parse_embedding(self, payload: dict) -> Embedding:
        try:
            vec = np.asarray(payload["embedding"], dtype=np.float64)
        except (KeyError, TypeError, ValueError) as exc:
            raise EncoderError(f"malformed embedding payload: {exc}") from exc
        dim = self.info().dim
        if vec.ndim != 1 or vec.size != dim:
            raise EncoderError(f"embedding has {vec.size} dims, expected {dim}")
        return l2_normalize(vec)

    def encode_image(self, image: np.ndarray, want_attention: bool = False) -> EncodeImageResult:
        payload = self._request(
            "POST",
            "/encode_image",
            json={"image_b64": encode_png_b64(image), "want_attention": want_attention},
        )
        return self._parse_result(payload, want_attention)

    def encode_images(self, images, want_attention: bool = False) -> list[EncodeImageResult]:
        images = list(images)
        if not images:
            return []
        if self._batch_supported is not False:
            with self._sem:
                try:
                    resp = self._client.request(
                        "POST",
                        "/encode_image_batch",
                        json={
                            "images_b64": [encode_png_b64(img) for img in images],
                            "want_attention": want_attention,
                        },
                    )
                except Exception as exc:
                    raise EncoderError(f"encoder transport failure on batch: {exc}") from exc
            if resp.status_code == 404:
                self._batch_supported = False
            elif resp.status_code != 200:
                raise EncoderError(f"encoder returned {resp.status_code} on batch")
            else:
                self._batch_supported = True
                results = resp.json().get("results", [])
                if len(results) != len(images):
                    raise EncoderError("batch response length mismatch")
                return [self._parse_result(r, want_attention) for r in results]
        return [self.encode_image(img, want_attention) for img in images]

    def encode_text(self, text: str) -> Embedding:
        if not text:
            raise EncoderError("empty query text")
        payload = self._request("POST", "/encode_text", json={"text": text})
        return self._parse_embedding(payload)


def resolve_encoder(selector: str | None = None, **client_kwargs) -> EncoderClient:
    """Turn a selector into a live encoder client.

    None falls back to the TZR_ENCODER_URL environment variable, then to
    the built-in test encoder. "builtin:test" names the test encoder;
    anything else is treated as a remote base URL.
    """
    selector = selector or os.environ.get(ENCODER_URL_ENV) or TEST_ENCODER_SELECTOR
    if selector == TEST_ENCODER_SELECTOR:
        return TestEncoder()
    return HttpEncoderClient(selector, **client_kwargs)


def build_encoder_app(encoder: EncoderClient, with_batch: bool = True):
    """Expose any in-process encoder over the wire protocol (FastAPI app).

    Lets the HTTP client be exercised end-to-end against the test encoder
    and doubles as a reference for protocol implementations.
    """
    from fastapi import FastAPI, HTTPException
    from pydantic import BaseModel

    class ImageRequest(BaseModel):
        image_b64: str
        want_attention: bool = False

    class BatchRequest(BaseModel):
        images_b64: list[str]
        want_attention: bool = False

    class TextRequest(BaseModel):
        text: str

    app = FastAPI(title="tzr-encoder")

    def result_json(res: EncodeImageResult) -> dict:
        out = {"embedding": [float(x) for x in res.embedding]}
        if res.attention is not None:
            out["attention"] = {
                "rows": res.attention.height,
                "cols": res.attention.width,
                "values": [float(v) for v in res.attention.values.ravel()],
            }
        return out

    @app.get("/info")
    def info():
        meta = encoder.info()
        return {
            "name": meta.name,
            "dim": meta.dim,
            "input_resolution": meta.input_resolution,
            "attention_rows": meta.attention_grid[0],
            "attention_cols": meta.attention_grid[1],
        }

    @app.post("/encode_image")
    def encode_image(req: ImageRequest):
        try:
            image = decode_image_b64(req.image_b64)
            return result_json(encoder.encode_image(image, want_attention=req.want_attention))
        except EncoderError as exc:
            raise HTTPException(status_code=400, detail=str(exc))

    @app.post("/encode_text")
    def encode_text(req: TextRequest):
        try:
            return {"embedding": [float(x) for x in encoder.encode_text(req.text)]}
        except EncoderError as exc:
            raise HTTPException(status_code=400, detail=str(exc))

    if with_batch:

        @app.post("/encode_image_batch")
        def encode_image_batch(req: BatchRequest):
            try:
                images = [decode_image_b64(b) for b in req.images_b64]
                results = encoder.encode_images(images, want_attention=req.want_attention)
                return {"results": [result_json(r) for r in results]}
            except EncoderError as exc:
                raise HTTPException(status_code=400, detail=str(exc))

    return app
