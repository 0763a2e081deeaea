"""Synthetic crowded-scene corpus with planted low-attention objects.

Each generated frame mimics the failure mode the engine targets: bright,
busy clutter that dominates the encoder's attention, and one small, dim,
fully saturated square tucked into a dark corner. The square's hue bucket
is the frame's ground-truth label, so queries "color:i" have known
relevant sets and the three ingest modes can be compared head to head
without any real data or model.

Under the built-in test encoder:
  - the bright clutter drives attention, so the dark corner scores low and
    the pipeline crops it, recovering the square's hue almost perfectly;
  - the colored clutter speckles pollute the global hue histogram, so
    global-only retrieval ranks mostly by clutter noise.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import cv2
import numpy as np

from .core import Box
from .encoders import hue_bucket_color
from .index import EvalPair, save_eval_pairs

N_BUCKETS = 16


@dataclass(frozen=True)
class PlantedCorpus:
    directory: str
    pairs: tuple[EvalPair, ...]
    buckets: tuple[int, ...]  # frame_id -> hue bucket
    squares: tuple[Box, ...]  # frame_id -> planted square box
    frame_size: int


def _fill_noise_gray(rng, shape, lo: float, hi: float) -> np.ndarray:
    gray = rng.uniform(lo, hi, size=shape)
    return np.repeat((gray * 255.0).round().astype(np.uint8)[..., None], 3, axis=2)


def make_planted_frame(
    bucket: int,
    rng: np.random.Generator,
    frame_size: int = 512,
    square: int = 48,
    dark_extent: int = 160,
    clutter_blobs: int = 60,
    blob_side: tuple[int, int] = (28, 56),
) -> tuple[np.ndarray, Box]:
    """One frame: bright clutter, a dark corner, and the planted square.

    Returns the RGB image and the square's box. The dark corner is chosen
    at random among the four corners; clutter blobs never intrude on it.
    """
    size = frame_size
    img = _fill_noise_gray(rng, (size, size), 0.55, 0.95)

    corner = int(rng.integers(4))
    dx0 = 0 if corner % 2 == 0 else size - dark_extent
    dy0 = 0 if corner < 2 else size - dark_extent
    dark = Box(dx0, dy0, dx0 + dark_extent, dy0 + dark_extent)

    # Colorful clutter: bright, saturated speckles of random hue that pull
    # the global histogram away from the planted square's bucket.
    margin = 16
    keep_out = Box(
        max(0, dark.x0 - margin),
        max(0, dark.y0 - margin),
        min(size, dark.x1 + margin),
        min(size, dark.y1 + margin),
    )
    placed = 0
    attempts = 0
    while placed < clutter_blobs and attempts < clutter_blobs * 50:
        attempts += 1
        side = int(rng.integers(blob_side[0], blob_side[1] + 1))
        x = int(rng.integers(0, size - side + 1))
        y = int(rng.integers(0, size - side + 1))
        if not (x + side <= keep_out.x0 or x >= keep_out.x1 or y + side <= keep_out.y0 or y >= keep_out.y1):
            continue
        hue = int(rng.integers(N_BUCKETS))
        sat = float(rng.uniform(0.75, 1.0))
        val = float(rng.uniform(0.7, 0.95))
        img[y : y + side, x : x + side] = hue_bucket_color(hue, sat, val)
        placed += 1

    # Dark corner, then the dim fully saturated square inside it.
    img[dark.y0 : dark.y1, dark.x0 : dark.x1] = _fill_noise_gray(
        rng, (dark_extent, dark_extent), 0.03, 0.12
    )
    # Snap the square to the default detector stride so that one sliding
    # window contains it whole; any region merged from that window's group
    # then contains it too. Corner origins are already stride-aligned.
    pad = 8
    stride = 32
    choices = [
        off
        for off in range(0, dark_extent - square + 1, stride)
        if pad <= off and off + square <= dark_extent - pad
    ]
    sx = dark.x0 + int(rng.choice(choices))
    sy = dark.y0 + int(rng.choice(choices))
    square_box = Box(sx, sy, sx + square, sy + square)
    img[sy : sy + square, sx : sx + square] = hue_bucket_color(bucket, 1.0, 0.25)
    return img, square_box


def generate_planted_corpus(
    out_dir,
    n_frames: int = 100,
    frame_size: int = 512,
    square: int = 48,
    seed: int = 7,
    clutter_blobs: int = 60,
) -> PlantedCorpus:
    """Write a full benchmark corpus: PNG frames, eval pairs, truth file.

    Hue buckets rotate round-robin over frames, so with the defaults each
    bucket labels at most ceil(100/16) = 7 frames. Fully deterministic for
    a given seed.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)

    buckets = []
    squares = []
    for i in range(n_frames):
        bucket = i % N_BUCKETS
        image, square_box = make_planted_frame(
            bucket,
            rng,
            frame_size=frame_size,
            square=square,
            clutter_blobs=clutter_blobs,
        )
        cv2.imwrite(str(out / f"frame_{i:04d}.png"), cv2.cvtColor(image, cv2.COLOR_RGB2BGR))
        buckets.append(bucket)
        squares.append(square_box)

    pairs = []
    for bucket in sorted(set(buckets)):
        relevant = frozenset(i for i, b in enumerate(buckets) if b == bucket)
        pairs.append(EvalPair(query=f"color:{bucket}", relevant=relevant))
    save_eval_pairs(pairs, out / "pairs.jsonl")

    truth = {
        "frame_size": frame_size,
        "buckets": buckets,
        "squares": [[b.x0, b.y0, b.x1, b.y1] for b in squares],
    }
    with open(out / "truth.json", "w", encoding="utf-8") as fh:
        json.dump(truth, fh)

    return PlantedCorpus(
        directory=str(out),
        pairs=tuple(pairs),
        buckets=tuple(buckets),
        squares=tuple(squares),
        frame_size=frame_size,
    )
