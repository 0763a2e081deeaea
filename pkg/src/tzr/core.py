"""Shared geometric and vector primitives.

Embeddings are plain numpy arrays: float32 for storage, L2-normalized once
at creation so cosine similarity reduces to a dot product. Accumulations
(dot products, means) run in float64. Pixel rectangles are half-open
intervals [x0, x1) x [y0, y1), which keeps area and union arithmetic free
of off-by-one ambiguity.

All types here are immutable after construction; operations are pure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# An embedding is a 1-D float32 unit vector. Its dimension is its length.
Embedding = np.ndarray


def l2_normalize(v) -> Embedding:
    """Scale a raw vector to unit Euclidean norm.

    Accepts any nonzero real sequence; returns float32. Norm computation
    happens in float64 before the final cast.

    Raises:
        ValueError: if the input is the zero vector ("degenerate embedding").
    """
    arr = np.asarray(v, dtype=np.float64).ravel()
    norm = float(np.linalg.norm(arr))
    if norm == 0.0 or not np.isfinite(norm):
        raise ValueError("degenerate embedding: zero or non-finite vector")
    return (arr / norm).astype(np.float32)


def cosine(a: Embedding, b: Embedding) -> float:
    """Cosine similarity of two unit-normalized embeddings.

    For unit vectors this is their dot product, accumulated in float64 and
    clamped to [-1, 1] against rounding.

    Raises:
        ValueError: on dimension mismatch.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    dot = float(np.dot(a.astype(np.float64), b.astype(np.float64)))
    return min(1.0, max(-1.0, dot))


@dataclass(frozen=True)
class AttentionMap:
    """Per-frame heatmap with values normalized to [0, 1].

    `values` is a row-major (height, width) float array; higher means more
    attended.
    """

    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 2 or arr.size == 0:
            raise ValueError("attention map must be a nonempty 2-D array")
        if float(arr.min()) < 0.0 or float(arr.max()) > 1.0 + 1e-9:
            raise ValueError("attention values must lie in [0, 1]")
        arr = np.clip(arr, 0.0, 1.0)
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True, order=True)
class Box:
    """Axis-aligned pixel rectangle, half-open: [x0, x1) x [y0, y1)."""

    x0: int
    y0: int
    x1: int
    y1: int

    def __post_init__(self):
        if not (self.x0 < self.x1 and self.y0 < self.y1):
            raise ValueError(f"empty box: {self!r}")

    @property
    def width(self) -> int:
        return self.x1 - self.x0

    @property
    def height(self) -> int:
        return self.y1 - self.y0

    @property
    def area(self) -> int:
        return self.width * self.height

    @property
    def center(self) -> tuple[float, float]:
        return ((self.x0 + self.x1) / 2.0, (self.y0 + self.y1) / 2.0)

    def clamp(self, frame_w: int, frame_h: int) -> "Box":
        """Intersect with the frame rectangle [0, frame_w) x [0, frame_h).

        Raises:
            ValueError: if the intersection is empty ("empty crop").
        """
        x0 = max(0, self.x0)
        y0 = max(0, self.y0)
        x1 = min(frame_w, self.x1)
        y1 = min(frame_h, self.y1)
        if x0 >= x1 or y0 >= y1:
            raise ValueError(f"empty crop: {self!r} outside {frame_w}x{frame_h} frame")
        return Box(x0, y0, x1, y1)

    def union(self, other: "Box") -> "Box":
        """Tight bounding box of two boxes (coordinate-wise min/max)."""
        return Box(
            min(self.x0, other.x0),
            min(self.y0, other.y0),
            max(self.x1, other.x1),
            max(self.y1, other.y1),
        )


def union_all(boxes) -> Box:
    """Tight bounding box of a nonempty box collection."""
    boxes = list(boxes)
    if not boxes:
        raise ValueError("union of zero boxes")
    out = boxes[0]
    for b in boxes[1:]:
        out = out.union(b)
    return out


@dataclass(frozen=True)
class FrameRef:
    """Identity of one retrievable frame.

    `timestamp` is seconds within the source video, or None for stills.
    """

    frame_id: int
    source_uri: str
    timestamp: float | None = None

    def __post_init__(self):
        if self.frame_id < 0:
            raise ValueError("frame_id must be nonnegative")
