"""Reference implementations of the pooling and gating math used by
attention-equipped speaker encoders: plain and attention-weighted
statistics pooling over frames, and squeeze-excitation channel gating.

These are numerical references for testing, not trainable layers.
"""

import numpy as np

from .errors import ShapeMismatchError, WeightMismatchError


def _as_frames(h) -> np.ndarray:
    arr = np.asarray(h, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"frame features must be T x D with T,D >= 1, got {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError("frame features contain NaN or Inf")
    return arr


def statistics_pooling(h) -> np.ndarray:
    """Concatenate per-dimension mean and population standard deviation."""
    arr = _as_frames(h)
    mean = arr.mean(axis=0)
    std = arr.std(axis=0)
    return np.concatenate([mean, std])


def attentive_statistics_pooling(h, w) -> np.ndarray:
    """Frame-weighted mean and standard deviation.

    w must be a simplex over the T frames (nonnegative, summing to 1).
    The weighted variance is clamped at zero before the square root.
    """
    arr = _as_frames(h)
    weights = np.asarray(w, dtype=np.float64)
    if weights.ndim != 1 or weights.shape[0] != arr.shape[0]:
        raise WeightMismatchError(
            f"need one weight per frame: {weights.shape} vs {arr.shape[0]} frames"
        )
    if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-9:
        raise WeightMismatchError("weights must be nonnegative and sum to 1")
    mean = weights @ arr
    second_moment = weights @ np.square(arr)
    std = np.sqrt(np.maximum(second_moment - np.square(mean), 0.0))
    return np.concatenate([mean, std])


def channel_means(channels) -> np.ndarray:
    """Squeeze step: global average of each channel's feature map."""
    arr = np.asarray(channels, dtype=np.float64)
    if arr.ndim < 1 or arr.shape[0] < 1:
        raise ShapeMismatchError(f"need at least one channel, got shape {arr.shape}")
    return arr.reshape(arr.shape[0], -1).mean(axis=1)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def se_block(channels, w1, w2) -> np.ndarray:
    """Squeeze-excitation gating: scale each channel by a sigmoid gate.

    w1 maps the C channel means to a C/r bottleneck (relu), w2 maps back
    to C gate logits. The reduction ratio r must divide C.
    """
    arr = np.asarray(channels, dtype=np.float64)
    w1 = np.asarray(w1, dtype=np.float64)
    w2 = np.asarray(w2, dtype=np.float64)
    squeezed = channel_means(arr)
    c = squeezed.shape[0]
    if w1.ndim != 2 or w2.ndim != 2 or w1.shape[1] != c or w2.shape[0] != c:
        raise ShapeMismatchError(
            f"weights {w1.shape} and {w2.shape} do not map {c} channels "
            f"through a bottleneck and back"
        )
    hidden = w1.shape[0]
    if w2.shape[1] != hidden or hidden < 1 or c % hidden != 0:
        raise ShapeMismatchError(
            f"bottleneck width {hidden} must divide the {c} channels"
        )
    gate = _sigmoid(w2 @ np.maximum(w1 @ squeezed, 0.0))
    return arr * gate.reshape((c,) + (1,) * (arr.ndim - 1))
