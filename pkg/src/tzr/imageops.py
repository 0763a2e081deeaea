"""Image resampling primitives shared by the pipeline and the encoders.

One bilinear kernel serves both heatmap upsampling and crop resizing so the
geometry convention is identical everywhere: half-pixel sample centers with
edge clamping (the convention used by common image libraries). Images are
numpy arrays, (H, W) or (H, W, C), row-major.
"""

from __future__ import annotations

import numpy as np


def _axis_coords(src_len: int, dst_len: int):
    """Source sampling positions for one axis under half-pixel centers."""
    pos = (np.arange(dst_len, dtype=np.float64) + 0.5) * (src_len / dst_len) - 0.5
    pos = np.clip(pos, 0.0, src_len - 1.0)
    lo = np.floor(pos).astype(np.intp)
    hi = np.minimum(lo + 1, src_len - 1)
    frac = pos - lo
    return lo, hi, frac


def bilinear_resize(src: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Resize (H, W) or (H, W, C) data to (out_h, out_w[, C]) bilinearly.

    Interpolation runs in float64 regardless of input dtype; the caller
    decides the output dtype (e.g. rounding back to uint8 for pixels).
    """
    if out_h < 1 or out_w < 1:
        raise ValueError("target dims must be positive")
    src = np.asarray(src)
    if src.ndim not in (2, 3) or src.shape[0] < 1 or src.shape[1] < 1:
        raise ValueError("source must be a nonempty (H, W[, C]) array")
    h, w = src.shape[:2]
    data = src.astype(np.float64)

    y_lo, y_hi, wy = _axis_coords(h, out_h)
    x_lo, x_hi, wx = _axis_coords(w, out_w)
    if data.ndim == 3:
        wy = wy[:, None, None]
        wx = wx[None, :, None]
    else:
        wy = wy[:, None]
        wx = wx[None, :]

    top = data[y_lo][:, x_lo] * (1.0 - wx) + data[y_lo][:, x_hi] * wx
    bottom = data[y_hi][:, x_lo] * (1.0 - wx) + data[y_hi][:, x_hi] * wx
    return top * (1.0 - wy) + bottom * wy


def resize_image_u8(image: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Bilinear resize for uint8 pixel data, rounding back to uint8."""
    out = bilinear_resize(image, out_h, out_w)
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)
