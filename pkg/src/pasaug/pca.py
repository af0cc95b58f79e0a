"""Principal component analysis of small embedding sets.

Components come from power iteration with deflation on the sample
covariance (1/(N-1) normalization), so no dense eigensolver is needed
for the cloud sizes this is meant for. Component signs are
canonicalized (largest-magnitude entry positive) to make output
deterministic.
"""

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import RankDeficientError

POWER_TOL = 1e-12
POWER_MAX_ITER = 10_000
_RANK_RTOL = 1e-12
_GAP_RTOL = 1e-9


@dataclass(frozen=True)
class EmbeddingSet:
    """N x D embedding matrix with one tag per row."""

    vectors: np.ndarray
    labels: tuple

    def __post_init__(self):
        arr = np.array(self.vectors, dtype=np.float64, copy=True)
        if arr.ndim != 2 or arr.shape[0] < 2 or arr.shape[1] < 2:
            raise ValueError(f"need an N x D matrix with N,D >= 2, got {arr.shape}")
        if not np.isfinite(arr).all():
            raise ValueError("embeddings contain NaN or Inf")
        labels = tuple(self.labels)
        if len(labels) != arr.shape[0]:
            raise ValueError(
                f"{len(labels)} labels for {arr.shape[0]} embeddings"
            )
        arr.flags.writeable = False
        object.__setattr__(self, "vectors", arr)
        object.__setattr__(self, "labels", labels)


@dataclass(frozen=True)
class PcaResult:
    """Projection (N x k), per-component explained-variance fractions,
    the components themselves (k x D), and a flag set when adjacent
    eigenvalues are too close to order reliably."""

    projection: np.ndarray
    explained_variance: np.ndarray
    components: np.ndarray
    degenerate_gap: bool


def _dominant_eigenpair(mat: np.ndarray, start: np.ndarray) -> tuple[float, np.ndarray]:
    v = start / np.linalg.norm(start)
    lam = 0.0
    for _ in range(POWER_MAX_ITER):
        w = mat @ v
        norm_w = np.linalg.norm(w)
        if norm_w == 0.0:
            return 0.0, v
        v = w / norm_w
        lam = float(v @ (mat @ v))
        residual = np.linalg.norm(mat @ v - lam * v)
        if residual <= POWER_TOL * max(abs(lam), 1e-300):
            break
    return lam, v


def _canonical_sign(v: np.ndarray) -> np.ndarray:
    return -v if v[int(np.argmax(np.abs(v)))] < 0 else v


def pca_project(e: EmbeddingSet, k: int) -> PcaResult:
    """Project the embeddings onto their top-k principal components.

    Data is mean-centered first; explained-variance fractions are each
    eigenvalue over the total variance, in descending order. Raises
    RankDeficientError when the data has fewer than k components with
    nonzero variance.
    """
    n, d = e.vectors.shape
    if not 1 <= k <= min(n - 1, d):
        raise ValueError(f"k must be in [1, {min(n - 1, d)}], got {k}")

    centered = e.vectors - e.vectors.mean(axis=0)
    cov = (centered.T @ centered) / (n - 1)
    total_variance = float(np.trace(cov))
    if total_variance <= 0.0:
        raise RankDeficientError("embeddings have zero total variance")

    rng = np.random.default_rng(0)
    eigvals = np.empty(k)
    components = np.empty((k, d))
    deflated = cov.copy()
    for j in range(k):
        lam, v = _dominant_eigenpair(deflated, rng.standard_normal(d))
        lam = max(lam, 0.0)
        reference = eigvals[0] if j > 0 else lam
        if lam <= 0.0 or lam <= _RANK_RTOL * reference:
            raise RankDeficientError(
                f"only {j} nonzero principal components exist, requested {k}"
            )
        eigvals[j] = lam
        components[j] = _canonical_sign(v)
        deflated = deflated - lam * np.outer(v, v)

    degenerate = any(
        eigvals[j] <= eigvals[j + 1] * (1.0 + _GAP_RTOL) for j in range(k - 1)
    )
    return PcaResult(
        projection=centered @ components.T,
        explained_variance=eigvals / total_variance,
        components=components,
        degenerate_gap=degenerate,
    )


def write_projection(coords: np.ndarray, labels, path) -> None:
    """CSV dump `label,pc1,...,pcK`, one row per embedding, RFC-4180 quoting."""
    coords = np.atleast_2d(np.asarray(coords, dtype=np.float64))
    labels = list(labels)
    if coords.shape[0] != len(labels):
        raise ValueError(
            f"{coords.shape[0]} coordinate rows for {len(labels)} labels"
        )
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["label"] + [f"pc{j + 1}" for j in range(coords.shape[1])])
        for label, row in zip(labels, coords):
            writer.writerow([label] + [f"{value:.17g}" for value in row])


def read_projection(path) -> tuple[list, np.ndarray]:
    """Parse a file written by write_projection; returns (labels, coords)."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][0] != "label":
        raise ValueError(f"{path}: missing projection header")
    labels = [row[0] for row in rows[1:]]
    coords = np.array([[float(v) for v in row[1:]] for row in rows[1:]])
    return labels, coords
