"""Frame sampling and corpus ingestion.

A source is either a directory of still images (every image, lexicographic
order, no timestamps) or a video file (frames sampled at a fixed rate,
nearest decoded frame per timestamp). Each sampled frame runs through the
mode-selected embedding path and lands in the retrieval index, which is
saved once at the end.

Ingestion is deterministic: a fixed source, fixed parameters, and a
deterministic encoder produce byte-identical index files.
"""

from __future__ import annotations

import hashlib
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import cv2
import numpy as np

from .core import FrameRef
from .encoders import EncoderClient
from .index import RetrievalIndex
from .pipeline import (
    MODES,
    PipelineParams,
    analyze_frame,
    grid_cells,
    grid_crops,
    lafm_pack,
)

IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg", ".bmp", ".webp", ".tif", ".tiff"}


class IngestError(RuntimeError):
    pass


@dataclass(frozen=True)
class IngestJob:
    """One ingestion run: source, sampling rate, pipeline setup, target."""

    source: str
    index_path: str
    params: PipelineParams = PipelineParams()
    mode: str = "inverse_attention"
    fps: float = 1.0
    encoder: str | None = None  # selector; None -> env var -> builtin:test

    def __post_init__(self):
        if self.fps <= 0:
            raise ValueError("fps must be > 0")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")


@dataclass
class IngestReport:
    frames_processed: int
    regions_histogram: dict[int, int]  # regions-per-frame -> frame count
    failures: list[tuple[int, str, str]]  # (frame_id, uri, message)
    index_path: str

    def summary(self) -> str:
        lines = [
            f"frames processed: {self.frames_processed}",
            f"failures: {len(self.failures)}",
            "regions per frame: "
            + ", ".join(f"{k}x{v}" for k, v in sorted(self.regions_histogram.items())),
            f"index: {self.index_path}",
        ]
        for fid, uri, msg in self.failures:
            lines.append(f"  failed frame {fid} ({uri}): {msg}")
        return "\n".join(lines)


def params_fingerprint(params: PipelineParams, mode: str) -> int:
    """Stable 64-bit fingerprint of the pipeline parameters and mode."""
    canon = "|".join(
        [
            mode,
            str(params.kernel),
            str(params.stride),
            repr(params.threshold),
            str(params.clusters),
            str(params.kmeans_seed),
            str(params.kmeans_max_iters),
            repr(params.kmeans_tol),
            str(params.grid_rows),
            str(params.grid_cols),
        ]
    )
    digest = hashlib.blake2b(canon.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def _read_image_rgb(path: Path) -> np.ndarray:
    img = cv2.imread(str(path), cv2.IMREAD_COLOR)
    if img is None:
        raise IngestError(f"undecodable image: {path}")
    return cv2.cvtColor(img, cv2.COLOR_BGR2RGB)


def sample_frames(source: str, fps: float = 1.0):
    """Yield (image RGB uint8, timestamp or None, source uri) per frame.

    Directories yield every image file in lexicographic order with no
    timestamp. Videos yield the decoded frame nearest to each timestamp
    {0, 1/fps, 2/fps, ...} up to and including the duration.
    """
    src = Path(source)
    if src.is_dir():
        files = sorted(
            p for p in src.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES
        )
        if not files:
            raise IngestError(f"no images found in {source}")
        for path in files:
            yield _read_image_rgb(path), None, str(path)
        return

    if not src.exists():
        raise IngestError(f"source does not exist: {source}")

    cap = cv2.VideoCapture(str(src))
    if not cap.isOpened():
        raise IngestError(f"undecodable video: {source}")
    try:
        video_fps = cap.get(cv2.CAP_PROP_FPS)
        n_frames = int(cap.get(cv2.CAP_PROP_FRAME_COUNT))
        if video_fps <= 0 or n_frames <= 0:
            raise IngestError(f"video reports no frames or fps: {source}")
        duration = n_frames / video_fps

        # Timestamps 0, 1/fps, ... <= duration; nearest frame per timestamp.
        wanted: list[tuple[int, float]] = []
        i = 0
        while True:
            t = i / fps
            if t > duration + 1e-9:
                break
            idx = min(n_frames - 1, int(round(t * video_fps)))
            wanted.append((idx, t))
            i += 1

        by_index: dict[int, list[float]] = {}
        for idx, t in wanted:
            by_index.setdefault(idx, []).append(t)

        frame_no = 0
        emitted = 0
        while emitted < len(wanted):
            ok, frame = cap.read()
            if not ok:
                break
            for t in by_index.get(frame_no, ()):
                yield cv2.cvtColor(frame, cv2.COLOR_BGR2RGB), t, str(src)
                emitted += 1
            frame_no += 1
        if emitted < len(wanted):
            raise IngestError(
                f"video ended early: decoded {frame_no} frames, needed index {wanted[-1][0]}"
            )
    finally:
        cap.release()


def build_record(image: np.ndarray, frame: FrameRef, params: PipelineParams, mode: str, encoder: EncoderClient):
    """Embed one frame under the given mode and pack its record."""
    fingerprint = params_fingerprint(params, mode)
    if mode == "inverse_attention":
        analysis = analyze_frame(image, frame, params, encoder)
        return lafm_pack(
            analysis.global_embedding,
            analysis.region_embeddings,
            analysis.regions,
            frame,
            fingerprint,
        )
    if mode == "grid":
        info = encoder.info()
        h, w = image.shape[:2]
        cells = grid_cells(w, h, params.grid_rows, params.grid_cols)
        crops = grid_crops(image, params.grid_rows, params.grid_cols, info.input_resolution)
        global_embedding = encoder.encode_image(image).embedding
        cell_embeddings = [r.embedding for r in encoder.encode_images(crops)]
        return lafm_pack(global_embedding, cell_embeddings, cells, frame, fingerprint)
    if mode == "global_only":
        return lafm_pack(encoder.encode_image(image).embedding, [], [], frame, fingerprint)
    raise ValueError(f"unknown mode {mode!r}")


def ingest(job: IngestJob, encoder: EncoderClient | None = None) -> IngestReport:
    """Run a full ingestion job and save the index.

    Per-frame failures are recorded and skipped; the job fails only when
    every frame fails (or the source yields nothing).
    """
    from .encoders import resolve_encoder

    encoder = encoder or resolve_encoder(job.encoder)
    index = RetrievalIndex(dim=encoder.info().dim)
    failures: list[tuple[int, str, str]] = []
    histogram: Counter = Counter()
    frame_id = 0

    for image, timestamp, uri in sample_frames(job.source, job.fps):
        frame = FrameRef(frame_id=frame_id, source_uri=uri, timestamp=timestamp)
        try:
            record = build_record(image, frame, job.params, job.mode, encoder)
            index.insert(record)
            histogram[len(record.regions)] += 1
        except Exception as exc:  # per-frame isolation
            failures.append((frame_id, uri, str(exc)))
        frame_id += 1

    if frame_id == 0 or len(index) == 0:
        raise IngestError(f"ingest produced no records ({len(failures)} failures)")

    index.save(job.index_path)
    return IngestReport(
        frames_processed=frame_id,
        regions_histogram=dict(histogram),
        failures=failures,
        index_path=str(job.index_path),
    )


@dataclass
class EngineConfig:
    """Operational configuration shared by the CLI and the HTTP service."""

    encoder_url: str | None = None
    index_path: str = "tzr.idx"
    http_bind: str = "127.0.0.1:8765"
    mode: str = "inverse_attention"
    fps: float = 1.0
    params: PipelineParams = field(default_factory=PipelineParams)
