"""HTTP service exposing the retrieval index and live frame analysis.

Endpoints (JSON throughout; thumbnails and overlays are base64 PNG):

  GET  /healthz                   liveness plus index size and dimension
  GET  /search?q=&k=&mode=        ranked frames for a text query
  GET  /frames/{id}               stored metadata plus a thumbnail
  GET  /frames/{id}/analysis      region boxes recorded at ingest time
  POST /analyze                   stage-by-stage pipeline run on one image
  POST /eval                      recall@K over posted query/relevant pairs

Search and eval read the index that was loaded at startup; /analyze is
stateless and recomputes everything from the posted image, so parameter
exploration never mutates ingested embeddings.
"""

from __future__ import annotations

from dataclasses import asdict
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field

from .core import FrameRef
from .encoders import (
    EncoderClient,
    EncoderError,
    decode_image_b64,
    encode_png_b64,
    resolve_encoder,
)
from .imageops import resize_image_u8
from .index import EvalPair, FrameRecord, RetrievalIndex, score_frame
from .ingest import EngineConfig, params_fingerprint
from .pipeline import PipelineParams, analyze_frame, binary_mask, lafm_pack

THUMBNAIL_SIDE = 256

SEARCH_MODES = ("full", "global_only")


class AnalyzeRequest(BaseModel):
    image_b64: str
    query: str | None = None
    params: dict | None = None


class EvalPairModel(BaseModel):
    query: str
    relevant: list[int] = Field(min_length=1)


class EvalRequest(BaseModel):
    pairs: list[EvalPairModel] = Field(min_length=1)
    k_values: list[int] = Field(default=[1, 5, 10])
    mode: str = "full"


def make_thumbnail_b64(image: np.ndarray, max_side: int = THUMBNAIL_SIDE) -> str:
    h, w = image.shape[:2]
    scale = max_side / max(h, w)
    if scale < 1.0:
        image = resize_image_u8(image, max(1, round(h * scale)), max(1, round(w * scale)))
    return encode_png_b64(image)


def load_frame_image(frame: FrameRef) -> np.ndarray | None:
    """Best-effort reload of a frame's pixels from its recorded source."""
    import cv2

    path = Path(frame.source_uri)
    if not path.exists():
        return None
    if frame.timestamp is None:
        img = cv2.imread(str(path), cv2.IMREAD_COLOR)
        return None if img is None else cv2.cvtColor(img, cv2.COLOR_BGR2RGB)

    cap = cv2.VideoCapture(str(path))
    if not cap.isOpened():
        return None
    try:
        video_fps = cap.get(cv2.CAP_PROP_FPS)
        n_frames = int(cap.get(cv2.CAP_PROP_FRAME_COUNT))
        if video_fps <= 0 or n_frames <= 0:
            return None
        idx = min(n_frames - 1, int(round(frame.timestamp * video_fps)))
        cap.set(cv2.CAP_PROP_POS_FRAMES, idx)
        ok, img = cap.read()
        return cv2.cvtColor(img, cv2.COLOR_BGR2RGB) if ok else None
    finally:
        cap.release()


def _gray_png_b64(values: np.ndarray) -> str:
    u8 = np.clip(np.rint(values * 255.0), 0, 255).astype(np.uint8)
    return encode_png_b64(np.repeat(u8[..., None], 3, axis=2))


def _mode_global_only(mode: str) -> bool:
    if mode not in SEARCH_MODES:
        raise HTTPException(status_code=400, detail=f"mode must be one of {SEARCH_MODES}")
    return mode == "global_only"


def analysis_payload(
    image: np.ndarray,
    params: PipelineParams,
    query: str | None,
    encoder: EncoderClient,
) -> dict:
    """Run the pipeline on one image and report every stage as JSON.

    Shared by POST /analyze and `tzr analyze`; raises EncoderError when the
    encoder is unreachable or misbehaves.
    """
    frame = FrameRef(frame_id=0, source_uri="analyze:adhoc")
    analysis = analyze_frame(image, frame, params, encoder)
    body = {
        "frame": {"width": image.shape[1], "height": image.shape[0]},
        "params": asdict(params),
        "params_fingerprint": params_fingerprint(params, "inverse_attention"),
        "heatmap_png_b64": _gray_png_b64(analysis.heatmap.values),
        "mask_png_b64": _gray_png_b64(
            binary_mask(analysis.heatmap, params.threshold).astype(np.float64)
        ),
        "candidates": [[b.x0, b.y0, b.x1, b.y1] for b in analysis.candidates],
        "regions": [[b.x0, b.y0, b.x1, b.y1] for b in analysis.regions],
        "member_counts": [len(g) for g in analysis.member_groups],
        "crops": [
            {
                "box": [b.x0, b.y0, b.x1, b.y1],
                "thumbnail_b64": make_thumbnail_b64(crop),
            }
            for b, crop in zip(analysis.regions, analysis.crops)
        ],
        "query": query,
        "global_cosine": None,
        "region_cosines": None,
        "best": None,
    }
    if query is not None:
        t = encoder.encode_text(query)
        record = lafm_pack(
            analysis.global_embedding,
            analysis.region_embeddings,
            analysis.regions,
            frame,
        )
        score, source = score_frame(t, record)
        g = record.embedding_matrix() @ t.astype(np.float64)
        body["global_cosine"] = float(np.clip(g[0], -1.0, 1.0))
        body["region_cosines"] = [float(v) for v in np.clip(g[1:], -1.0, 1.0)]
        body["best"] = {"source": source, "score": score}
    return body


def build_app(
    index: RetrievalIndex,
    encoder: EncoderClient,
    config: EngineConfig | None = None,
    frontend_dir: str | None = None,
) -> FastAPI:
    """Assemble the FastAPI app around a loaded index and an encoder."""
    config = config or EngineConfig()
    app = FastAPI(title="tzr", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    def embed_query(q: str) -> np.ndarray:
        try:
            return encoder.encode_text(q)
        except EncoderError as exc:
            raise HTTPException(status_code=502, detail=f"encoder failure: {exc}") from exc

    def require_record(frame_id: int) -> FrameRecord:
        record = index.get(frame_id)
        if record is None:
            raise HTTPException(status_code=404, detail=f"unknown frame {frame_id}")
        return record

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "frames": len(index), "dim": index.dim}

    @app.get("/search")
    def search(q: str, k: int = 10, mode: str = "full"):
        if not q.strip():
            # Caller error, not an upstream failure: reject before encoding.
            raise HTTPException(status_code=400, detail="empty query text")
        if k < 1:
            raise HTTPException(status_code=400, detail="k must be >= 1")
        global_only = _mode_global_only(mode)
        results = index.topk(embed_query(q), k, global_only=global_only)
        payload = []
        for r in results:
            record = index.get(r.frame_id)
            payload.append(
                {
                    "frame_id": r.frame_id,
                    "score": r.score,
                    "best_source": r.best_source,
                    "source_uri": record.frame.source_uri,
                    "timestamp": record.frame.timestamp,
                }
            )
        return {"query": q, "k": k, "mode": mode, "results": payload}

    @app.get("/frames/{frame_id}")
    def frame_meta(frame_id: int):
        record = require_record(frame_id)
        image = load_frame_image(record.frame)
        return {
            "frame_id": frame_id,
            "source_uri": record.frame.source_uri,
            "timestamp": record.frame.timestamp,
            "region_count": len(record.regions),
            "params_fingerprint": record.params_fingerprint,
            "width": None if image is None else image.shape[1],
            "height": None if image is None else image.shape[0],
            "thumbnail_b64": None if image is None else make_thumbnail_b64(image),
        }

    @app.get("/frames/{frame_id}/analysis")
    def frame_analysis(frame_id: int):
        record = require_record(frame_id)
        return {
            "frame_id": frame_id,
            "params_fingerprint": record.params_fingerprint,
            "regions": [[b.x0, b.y0, b.x1, b.y1] for _, b in record.regions],
        }

    @app.post("/analyze")
    def analyze(req: AnalyzeRequest):
        try:
            image = decode_image_b64(req.image_b64)
        except EncoderError as exc:
            # Decode failure is the caller's bad input, not an upstream 502.
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        try:
            params = config.params.with_overrides(**(req.params or {}))
        except (TypeError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=f"bad params: {exc}") from exc

        try:
            return analysis_payload(image, params, req.query, encoder)
        except EncoderError as exc:
            raise HTTPException(status_code=502, detail=str(exc)) from exc

    @app.post("/eval")
    def eval_pairs(req: EvalRequest):
        global_only = _mode_global_only(req.mode)
        if any(k < 1 for k in req.k_values) or not req.k_values:
            raise HTTPException(status_code=400, detail="k_values must be positive")
        if any(not p.query.strip() for p in req.pairs):
            raise HTTPException(status_code=400, detail="eval pair with empty query")
        pairs = [EvalPair(p.query, frozenset(p.relevant)) for p in req.pairs]
        try:
            recall = [
                {
                    "k": k,
                    "value": index.recall_at_k(
                        pairs, k, encoder.encode_text, global_only=global_only
                    ),
                }
                for k in sorted(set(req.k_values))
            ]
        except (KeyError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return {"pairs": len(pairs), "mode": req.mode, "recall": recall}

    if frontend_dir and Path(frontend_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/console", StaticFiles(directory=frontend_dir, html=True), name="console")

    return app


def serve(config: EngineConfig, frontend_dir: str | None = None) -> None:
    """Load the index, build the app, and block serving HTTP."""
    import uvicorn

    index = RetrievalIndex.load(config.index_path)
    encoder = resolve_encoder(config.encoder_url)
    app = build_app(index, encoder, config, frontend_dir=frontend_dir)
    host, _, port = config.http_bind.rpartition(":")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port), log_level="warning")
