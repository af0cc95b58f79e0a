"""Trial scoring, equal error rate, and noisy test-set synthesis.

EER is computed by sweeping thresholds over the distinct scores:
FAR(t) is the fraction of nontarget trials scoring >= t, FRR(t) the
fraction of target trials scoring < t, and the crossing is linearly
interpolated between the two adjacent operating points where
FAR - FRR changes sign.
"""

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .audio import AudioBuffer, load_wav, loop_pad, sample_segment, save_wav
from .augment import apply_traditional, sample_stream, signal_power, snr_gain
from .errors import (
    DimensionMismatchError,
    EmptyCatalogError,
    MissingClassError,
    ZeroVectorError,
)

LABEL_TARGET = 1
LABEL_NONTARGET = 0


@dataclass(frozen=True)
class Trial:
    enroll_id: str
    test_id: str
    label: int

    def __post_init__(self):
        if not self.enroll_id or not self.test_id:
            raise ValueError("trial identifiers must be nonempty")
        if self.label not in (LABEL_TARGET, LABEL_NONTARGET):
            raise ValueError(f"label must be 1 (target) or 0, got {self.label}")


@dataclass(frozen=True)
class ScoredTrial:
    trial: Trial
    score: float

    def __post_init__(self):
        if not np.isfinite(self.score):
            raise ValueError(f"score must be finite, got {self.score}")


@dataclass(frozen=True)
class EerResult:
    eer: float
    threshold: float


def cosine_score(a, b) -> float:
    """Cosine similarity of two embeddings, in [-1, 1]."""
    va = np.asarray(a, dtype=np.float64)
    vb = np.asarray(b, dtype=np.float64)
    if va.shape != vb.shape or va.ndim != 1:
        raise DimensionMismatchError(f"shapes {va.shape} and {vb.shape} differ")
    na = np.linalg.norm(va)
    nb = np.linalg.norm(vb)
    if na == 0.0 or nb == 0.0:
        raise ZeroVectorError("cosine similarity undefined for zero vectors")
    return float(np.clip(np.dot(va, vb) / (na * nb), -1.0, 1.0))


def eer_from_scores(labels, scores) -> EerResult:
    """EER over parallel label (1=target, 0=nontarget) and score arrays."""
    labels = np.asarray(labels)
    scores = np.asarray(scores, dtype=np.float64)
    target = np.sort(scores[labels == LABEL_TARGET])
    nontarget = np.sort(scores[labels == LABEL_NONTARGET])
    if target.size == 0 or nontarget.size == 0:
        raise MissingClassError("need at least one target and one nontarget trial")

    thresholds = np.unique(scores)
    far = 1.0 - np.searchsorted(nontarget, thresholds, side="left") / nontarget.size
    frr = np.searchsorted(target, thresholds, side="left") / target.size
    # Sentinel above the top score: everything rejected.
    thresholds = np.append(thresholds, thresholds[-1])
    far = np.append(far, 0.0)
    frr = np.append(frr, 1.0)

    diff = far - frr
    j = int(np.nonzero(diff >= 0.0)[0][-1])
    if diff[j] == 0.0:
        return EerResult(eer=float(far[j]), threshold=float(thresholds[j]))
    t = diff[j] / (diff[j] - diff[j + 1])
    eer = far[j] + t * (far[j + 1] - far[j])
    threshold = thresholds[j] + t * (thresholds[j + 1] - thresholds[j])
    return EerResult(eer=float(eer), threshold=float(threshold))


def compute_eer(scored: Sequence[ScoredTrial]) -> EerResult:
    """EER of a scored trial set; see eer_from_scores for the estimator."""
    labels = [s.trial.label for s in scored]
    scores = [s.score for s in scored]
    return eer_from_scores(labels, scores)


def read_trials(path) -> list[Trial]:
    """Parse a trial list: `label enroll_path test_path` per line, label in {1,0}."""
    trials = []
    for line_no, line in enumerate(Path(path).read_text().splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ValueError(f"{path}:{line_no}: expected 3 fields, got {len(parts)}")
        trials.append(Trial(enroll_id=parts[1], test_id=parts[2], label=int(parts[0])))
    return trials


def read_scores(path) -> tuple[np.ndarray, np.ndarray]:
    """Parse a score file: `label score` per line; returns (labels, scores)."""
    labels, scores = [], []
    for line_no, line in enumerate(Path(path).read_text().splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"{path}:{line_no}: expected `label score`")
        labels.append(int(parts[0]))
        scores.append(float(parts[1]))
    return np.asarray(labels), np.asarray(scores, dtype=np.float64)


def synth_noisy_utterance(
    clean: AudioBuffer,
    noise_catalog: Sequence[AudioBuffer],
    snr_db: float,
    master_seed: int,
    index: int,
) -> tuple[AudioBuffer, dict]:
    """One full-duration noisy copy of `clean` at an exact SNR.

    The noise clip and its offset come from the per-index stream, so
    output `index` is reproducible in isolation.
    """
    if len(noise_catalog) == 0:
        raise EmptyCatalogError("noise catalog is empty")
    rng = sample_stream(master_seed, index)
    noise_id = int(rng.integers(0, len(noise_catalog)))
    usable = max(len(noise_catalog[noise_id]), len(clean))
    padded = loop_pad(noise_catalog[noise_id], usable)
    offset = int(rng.integers(0, usable - len(clean), endpoint=True))
    clip = sample_segment(padded, len(clean), offset)
    gain = snr_gain(signal_power(clean), signal_power(clip), snr_db)
    noisy = apply_traditional(clean, clip, snr_db)
    provenance = {
        "noise_id": noise_id,
        "noise_offset": offset,
        "noise_gain": gain,
        "snr_db": float(snr_db),
        "seed": master_seed,
        "index": index,
    }
    return noisy, provenance


def synth_testset(
    clean_paths: Sequence,
    noise_paths: Sequence,
    snr_grid: Sequence[float],
    seed: int,
    out_dir,
    jobs: int = 1,
) -> list:
    """Write one noisy WAV per (clean utterance, grid SNR) pair.

    Outputs land in out_dir as `<stem>.snr<value>.wav` with a
    `sidecar.jsonl` provenance record per file. Output index i maps to
    (utterance i // len(grid), grid[i % len(grid)]); randomness depends
    only on (seed, i), so any worker count gives identical files.
    """
    clean_paths = [Path(p) for p in clean_paths]
    noise_paths = [Path(p) for p in noise_paths]
    if not clean_paths:
        raise EmptyCatalogError("clean manifest is empty")
    if not noise_paths:
        raise EmptyCatalogError("noise manifest is empty")
    snr_grid = [float(s) for s in snr_grid]
    if not snr_grid:
        raise ValueError("SNR grid is empty")

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    catalog = [load_wav(p) for p in noise_paths]

    def one(index: int) -> tuple:
        clean_path = clean_paths[index // len(snr_grid)]
        snr_db = snr_grid[index % len(snr_grid)]
        clean = load_wav(clean_path)
        noisy, prov = synth_noisy_utterance(clean, catalog, snr_db, seed, index)
        out_path = out_dir / f"{clean_path.stem}.snr{snr_db:g}.wav"
        save_wav(noisy, out_path)
        record = {
            "input": str(clean_path),
            "noise": str(noise_paths[prov["noise_id"]]),
            "method": "traditional",
            "L_s": len(clean),
            "P_s": 0,
            "snr_db": prov["snr_db"],
            "noise_gain": prov["noise_gain"],
            "noise_offset": prov["noise_offset"],
            "speech_offset": 0,
            "seed": seed,
            "index": index,
        }
        return out_path, record

    total = len(clean_paths) * len(snr_grid)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(one, range(total)))
    else:
        results = [one(i) for i in range(total)]

    with open(out_dir / "sidecar.jsonl", "w", encoding="utf-8") as fh:
        for _, record in results:
            fh.write(json.dumps(record) + "\n")
    return [path for path, _ in results]
