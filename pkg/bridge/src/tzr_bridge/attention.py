"""Heatmap derivations from a ViT attention stack.

Both derivations take the per-layer attention tensors of one image,
shaped (heads, tokens, tokens) with the class token at index 0 and patch
tokens following in row-major grid order, and reduce them to one weight
per patch. `to_heatmap` then lays the weights out on the patch grid and
min-max normalizes them, emitting all 0.5 for a constant map so the
downstream threshold test stays meaningful.
"""

import numpy as np


def cls_attention_last_layer(layers) -> np.ndarray:
    """Final-layer class-token attention to each patch, averaged over heads."""
    last = np.asarray(layers[-1], dtype=np.float64)
    return last.mean(axis=0)[0, 1:]


def cls_attention_rollout(layers) -> np.ndarray:
    """Attention rollout: propagate head-averaged attention through every
    layer (identity-augmented and row-renormalized to keep the residual
    path), then read off the class-token row."""
    size = np.asarray(layers[0]).shape[-1]
    joint = np.eye(size)
    for layer in layers:
        mean = np.asarray(layer, dtype=np.float64).mean(axis=0)
        augmented = mean + np.eye(size)
        augmented /= augmented.sum(axis=-1, keepdims=True)
        joint = augmented @ joint
    return joint[0, 1:]


DERIVATIONS = {
    "last_layer_cls_mean_heads": cls_attention_last_layer,
    "rollout": cls_attention_rollout,
}


def to_heatmap(weights: np.ndarray, rows: int, cols: int) -> np.ndarray:
    """Patch weights -> (rows, cols) map, min-max normalized to [0, 1]."""
    grid = np.asarray(weights, dtype=np.float64).reshape(rows, cols)
    lo, hi = float(grid.min()), float(grid.max())
    if hi - lo <= 1e-12:
        return np.full((rows, cols), 0.5)
    return (grid - lo) / (hi - lo)
