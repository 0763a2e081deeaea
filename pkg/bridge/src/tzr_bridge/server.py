"""HTTP face of the bridge: the encoder wire protocol over FastAPI.

    GET  /info               -> {name, dim, input_resolution,
                                 attention_rows, attention_cols}
    POST /encode_image       -> {embedding, attention?} for
                                {image_b64, want_attention}
    POST /encode_image_batch -> {results: [...]}
    POST /encode_text        -> {embedding} for {text}

Malformed base64, undecodable bytes, and empty text come back as 400s
with a detail message; they are the caller's inputs, not model failures.
"""

import base64

import uvicorn
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from .config import BridgeConfig
from .model import BridgeError, ClipBridge


class ImageRequest(BaseModel):
    image_b64: str
    want_attention: bool = False


class BatchRequest(BaseModel):
    images_b64: list[str]
    want_attention: bool = False


class TextRequest(BaseModel):
    text: str


def _image_bytes(data: str) -> bytes:
    try:
        return base64.b64decode(data, validate=True)
    except Exception as exc:
        raise BridgeError(f"invalid base64 image: {exc}") from exc


def _result_json(embedding, heatmap) -> dict:
    out = {"embedding": [float(x) for x in embedding]}
    if heatmap is not None:
        out["attention"] = {
            "rows": heatmap.shape[0],
            "cols": heatmap.shape[1],
            "values": [float(v) for v in heatmap.ravel()],
        }
    return out


def build_app(bridge: ClipBridge) -> FastAPI:
    app = FastAPI(title="tzr-bridge")

    @app.get("/info")
    def info():
        meta = bridge.info()
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
            embedding, heatmap = bridge.encode_image_bytes(
                _image_bytes(req.image_b64), req.want_attention
            )
        except BridgeError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return _result_json(embedding, heatmap)

    @app.post("/encode_image_batch")
    def encode_image_batch(req: BatchRequest):
        try:
            results = [
                bridge.encode_image_bytes(_image_bytes(b), req.want_attention)
                for b in req.images_b64
            ]
        except BridgeError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return {"results": [_result_json(e, h) for e, h in results]}

    @app.post("/encode_text")
    def encode_text(req: TextRequest):
        try:
            embedding = bridge.encode_text(req.text)
        except BridgeError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return {"embedding": [float(x) for x in embedding]}

    return app


def serve(config: BridgeConfig) -> None:
    """Load the model, then bind and serve until interrupted."""
    bridge = ClipBridge(config)
    uvicorn.run(build_app(bridge), host=config.host, port=config.port)
