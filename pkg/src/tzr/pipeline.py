"""Low-attention region pipeline: detect, cluster, crop, and package.

The stages, in order:

  1. detect  - slide a kernel over the image-resolution attention heatmap
               and keep windows whose mean attention falls below a
               threshold (candidate boxes).
  2. cluster - k-means the candidate box centers into a handful of merged
               regions (tight unions of cluster members).
  3. crop    - cut each merged region from the original frame and resize it
               to the encoder's input resolution.
  4. package - bundle the global embedding with the per-region embeddings
               into one retrievable frame record.

A grid-crop baseline (equal-cell partition of the frame) lives here too so
the three ingest modes share one module.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .core import AttentionMap, Box, Embedding, FrameRef, union_all
from .imageops import bilinear_resize, resize_image_u8
from .kmeans import kmeans

MODES = ("inverse_attention", "grid", "global_only")


@dataclass(frozen=True)
class PipelineParams:
    """Tunables for the low-attention pipeline and the grid baseline.

    `kernel` and `stride` are in image pixels; `threshold` applies to the
    window mean attention (strict less-than); `clusters` caps the number of
    merged regions.
    """

    kernel: int = 64
    stride: int = 32
    threshold: float = 0.4
    clusters: int = 5
    kmeans_seed: int = 42
    kmeans_max_iters: int = 100
    kmeans_tol: float = 1e-6
    grid_rows: int = 3
    grid_cols: int = 3

    def __post_init__(self):
        if not (0 < self.stride <= self.kernel):
            raise ValueError("require 0 < stride <= kernel")
        if not (0.0 <= self.threshold <= 1.0):
            raise ValueError("threshold must lie in [0, 1]")
        if self.clusters < 1:
            raise ValueError("clusters must be >= 1")
        if self.grid_rows < 1 or self.grid_cols < 1:
            raise ValueError("grid dims must be >= 1")

    def with_overrides(self, **kwargs) -> "PipelineParams":
        return replace(self, **kwargs)


@dataclass(frozen=True)
class FrameAnalysis:
    """Everything the pipeline derives from one frame.

    `regions`, `crops` and `region_embeddings` are parallel lists of length
    min(params.clusters, len(candidates)); `member_groups[i]` holds the
    candidate boxes merged into `regions[i]`.
    """

    frame: FrameRef
    heatmap: AttentionMap  # upsampled to image resolution
    candidates: list[Box]
    regions: list[Box]
    crops: list[np.ndarray]
    global_embedding: Embedding
    region_embeddings: list[Embedding]
    member_groups: list[list[Box]] = field(default_factory=list)


def upsample_heatmap(heatmap: AttentionMap, target_w: int, target_h: int) -> AttentionMap:
    """Bilinearly resample a heatmap to the given resolution.

    Values stay inside [0, 1]; interpolation of in-range data cannot
    escape the range beyond rounding, which is clipped away.
    """
    if target_w < 1 or target_h < 1:
        raise ValueError("target dims must be positive")
    out = bilinear_resize(heatmap.values, target_h, target_w)
    return AttentionMap(np.clip(out, 0.0, 1.0))


def _window_offsets(length: int, kernel: int, stride: int) -> list[int]:
    """Offsets {0, stride, 2*stride, ...} plus a final one flush with the
    far edge when the regular grid does not reach it."""
    offsets = list(range(0, length - kernel + 1, stride))
    if offsets[-1] != length - kernel:
        offsets.append(length - kernel)
    return offsets


def lard(heatmap: AttentionMap, params: PipelineParams) -> list[Box]:
    """Detect low-attention windows in an image-resolution heatmap.

    Enumerates kernel x kernel windows at stride offsets (plus a final
    offset flush with the right/bottom edge) and returns, in row-major
    window order, exactly those whose mean attention is strictly below
    params.threshold. An image smaller than the kernel in either axis is
    evaluated as one whole-image window.

    Window sums come from a float64 integral image.
    """
    h, w = heatmap.height, heatmap.width
    k, s, t = params.kernel, params.stride, params.threshold

    if w < k or h < k:
        if float(heatmap.values.mean()) < t:
            return [Box(0, 0, w, h)]
        return []

    xs = np.asarray(_window_offsets(w, k, s), dtype=np.intp)
    ys = np.asarray(_window_offsets(h, k, s), dtype=np.intp)

    ii = np.zeros((h + 1, w + 1), dtype=np.float64)
    ii[1:, 1:] = heatmap.values.cumsum(axis=0).cumsum(axis=1)

    ys_c = ys[:, None]
    xs_c = xs[None, :]
    sums = (
        ii[ys_c + k, xs_c + k]
        - ii[ys_c, xs_c + k]
        - ii[ys_c + k, xs_c]
        + ii[ys_c, xs_c]
    )
    means = sums / float(k * k)

    boxes = []
    hits = means < t
    for yi, y in enumerate(ys):
        for xi, x in enumerate(xs):
            if hits[yi, xi]:
                boxes.append(Box(int(x), int(y), int(x) + k, int(y) + k))
    return boxes


def binary_mask(heatmap: AttentionMap, threshold: float) -> np.ndarray:
    """Boolean low-attention mask (value < threshold), for display."""
    return heatmap.values < threshold


def cluster_candidates(
    candidates: list[Box],
    image_w: int,
    image_h: int,
    params: PipelineParams,
) -> list[list[Box]]:
    """Group candidate boxes into at most params.clusters coherent sets.

    k-means runs on box centers normalized to [0, 1]^2 by the image dims;
    k is clamped to the candidate count. Groups come back ordered by
    cluster centroid (y, then x). Every candidate lands in exactly one
    group.
    """
    if not candidates:
        return []
    k = min(params.clusters, len(candidates))
    centers = np.array(
        [(b.center[0] / image_w, b.center[1] / image_h) for b in candidates],
        dtype=np.float64,
    )
    result = kmeans(
        centers,
        k,
        seed=params.kmeans_seed,
        max_iters=params.kmeans_max_iters,
        tol=params.kmeans_tol,
    )
    groups = [[] for _ in range(k)]
    for box, cluster in zip(candidates, result.assignments):
        groups[int(cluster)].append(box)
    order = sorted(
        range(k),
        key=lambda c: (result.centroids[c][1], result.centroids[c][0]),
    )
    return [groups[c] for c in order]


def larc(
    candidates: list[Box],
    image_w: int,
    image_h: int,
    params: PipelineParams,
) -> list[Box]:
    """Merge candidate boxes into coherent regions.

    Each region is the tight union (coordinate-wise min/max) of one
    cluster's member boxes. Empty input yields empty output.
    """
    return [union_all(g) for g in cluster_candidates(candidates, image_w, image_h, params)]


def lace(region: Box, frame_image: np.ndarray, encoder_resolution: int) -> np.ndarray:
    """Crop a region from the frame and resize it for the encoder.

    The region is clamped to frame bounds first; the crop is stretched
    (aspect-distorting bilinear) to a square of side encoder_resolution.

    Raises:
        ValueError: when the region does not overlap the frame
            ("empty crop").
    """
    h, w = frame_image.shape[:2]
    clamped = region.clamp(w, h)
    crop = frame_image[clamped.y0 : clamped.y1, clamped.x0 : clamped.x1]
    return resize_image_u8(crop, encoder_resolution, encoder_resolution)


def grid_cells(frame_w: int, frame_h: int, rows: int, cols: int) -> list[Box]:
    """Equal-cell partition boxes, row-major; remainder pixels go to the
    last row/column."""
    cell_w = frame_w // cols
    cell_h = frame_h // rows
    if cell_w < 1 or cell_h < 1:
        raise ValueError("grid finer than the frame")
    cells = []
    for r in range(rows):
        y0 = r * cell_h
        y1 = frame_h if r == rows - 1 else (r + 1) * cell_h
        for c in range(cols):
            x0 = c * cell_w
            x1 = frame_w if c == cols - 1 else (c + 1) * cell_w
            cells.append(Box(x0, y0, x1, y1))
    return cells


def grid_crops(
    frame_image: np.ndarray,
    rows: int,
    cols: int,
    encoder_resolution: int,
) -> list[np.ndarray]:
    """Baseline: partition the frame into rows x cols equal cells and
    resize each with the same rule as region crops. Row-major order."""
    h, w = frame_image.shape[:2]
    return [lace(cell, frame_image, encoder_resolution) for cell in grid_cells(w, h, rows, cols)]


def lafm_pack(
    global_embedding: Embedding,
    region_embeddings,
    boxes,
    frame: FrameRef,
    params_fingerprint: int = 0,
):
    """Package the global embedding with region embeddings into one
    retrievable frame record.

    No averaging or projection happens here: the record keeps the set
    {global, regions...} with per-region box provenance, which is exactly
    what the max-cosine score consumes.

    Raises:
        ValueError: embedding dimension mismatch, or unequal
            embeddings/boxes lengths.
    """
    from .index import FrameRecord

    region_embeddings = list(region_embeddings)
    boxes = list(boxes)
    if len(region_embeddings) != len(boxes):
        raise ValueError(
            f"{len(region_embeddings)} region embeddings vs {len(boxes)} boxes"
        )
    return FrameRecord(
        frame=frame,
        global_embedding=global_embedding,
        regions=tuple(zip(region_embeddings, boxes)),
        params_fingerprint=params_fingerprint,
    )


def analyze_frame(
    frame_image: np.ndarray,
    frame: FrameRef,
    params: PipelineParams,
    encoder,
) -> FrameAnalysis:
    """Run the full low-attention pipeline on one frame.

    One encoder call yields the global embedding and the native-grid
    heatmap; the heatmap is upsampled to image resolution, candidate
    windows are detected and clustered, each merged region is cropped and
    re-encoded with the same encoder. Frames with no low-attention
    candidates are valid and come back with empty region lists.

    Encoder failures propagate, annotated with the frame identity.
    """
    from .encoders import EncoderError

    info = encoder.info()
    try:
        encoded = encoder.encode_image(frame_image, want_attention=True)
    except Exception as exc:
        raise EncoderError(
            f"frame {frame.frame_id} ({frame.source_uri}): {exc}"
        ) from exc

    h, w = frame_image.shape[:2]
    heat = upsample_heatmap(encoded.attention, w, h)
    candidates = lard(heat, params)
    groups = cluster_candidates(candidates, w, h, params)
    regions = [union_all(g) for g in groups]
    crops = [lace(r, frame_image, info.input_resolution) for r in regions]

    if crops:
        try:
            region_results = encoder.encode_images(crops, want_attention=False)
        except Exception as exc:
            raise EncoderError(
                f"frame {frame.frame_id} ({frame.source_uri}): {exc}"
            ) from exc
        region_embeddings = [r.embedding for r in region_results]
    else:
        region_embeddings = []

    return FrameAnalysis(
        frame=frame,
        heatmap=heat,
        candidates=candidates,
        regions=regions,
        crops=crops,
        global_embedding=encoded.embedding,
        region_embeddings=region_embeddings,
        member_groups=groups,
    )
