"""Array-level bindings to the pasaug augmentation core for training loops.

Functions take plain 1-D float arrays plus a config mapping and return
arrays; placement records come back as plain dicts. Results are
bit-exact with the core (and therefore with the CLI) for the same
(master_seed, index).

Dtype contract: if every input array is float32 the outputs are cast to
float32, otherwise everything stays float64. float64 outputs are
returned as the core's read-only arrays without copying.
"""

from dataclasses import asdict

import numpy as np

import pasaug
from pasaug.errors import PasaugError

__all__ = [
    "BoundBatch",
    "apply_pas",
    "apply_traditional",
    "augment_batch",
    "log_mel",
    "version",
]

_PAS_KEYS = {
    "noise_len", "speech_len_min", "snr_min", "snr_max",
    "mix_probability", "master_seed",
}
_PAS_REQUIRED = {"noise_len", "speech_len_min", "snr_min", "snr_max"}
_MEL_KEYS = {
    "sample_rate", "fft_size", "win_length", "hop_length",
    "n_mels", "fmin", "fmax", "log_floor",
}
_DEFAULT_RATE = 16000


class BoundBatch:
    """Output arrays plus a parallel list of placement dicts (None for
    samples that were passed through unmixed)."""

    def __init__(self, samples, placements):
        self.samples = list(samples)
        self.placements = list(placements)

    def __len__(self) -> int:
        return len(self.samples)


def version() -> str:
    """Version of the core build these bindings delegate to."""
    return pasaug.__version__


def _all_float32(arrays) -> bool:
    arrays = list(arrays)
    return bool(arrays) and all(
        isinstance(a, np.ndarray) and a.dtype == np.float32 for a in arrays
    )


def _cast(arr: np.ndarray, to_float32: bool) -> np.ndarray:
    return arr.astype(np.float32) if to_float32 else arr

def _buffer(arr, sample_rate: int) -> pasaug.AudioBuffer:
    arr = np.asarray(arr)
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-D sample array, got shape {arr.shape}")
    return pasaug.AudioBuffer(arr, sample_rate)


def _pas_config(config) -> tuple[pasaug.PasConfig, int]:
    mapping = dict(config)
    sample_rate = int(mapping.pop("sample_rate", _DEFAULT_RATE))
    unknown = set(mapping) - _PAS_KEYS
    if unknown:
        raise ValueError(f"unknown config field(s): {', '.join(sorted(unknown))}")
    missing = _PAS_REQUIRED - set(mapping)
    if missing:
        raise ValueError(f"missing config field(s): {', '.join(sorted(missing))}")
    try:
        return pasaug.PasConfig(**mapping), sample_rate
    except (ValueError, TypeError) as exc:
        raise ValueError(str(exc)) from None


def _placement(mapping) -> pasaug.PasPlacement:
    try:
        return pasaug.PasPlacement(**dict(mapping))
    except (ValueError, TypeError) as exc:
        raise ValueError(str(exc)) from None


def apply_traditional(x, n, snr_db: float):
    """Full-duration additive noise at an exact SNR; returns the mixed array."""
    to_f32 = _all_float32([x, n])
    try:
        out = pasaug.apply_traditional(
            _buffer(x, _DEFAULT_RATE), _buffer(n, _DEFAULT_RATE), float(snr_db)
        )
    except PasaugError as exc:
        raise ValueError(str(exc)) from None
    return _cast(out.samples, to_f32)


def apply_pas(x, n, config, placement):
    """Partial-overlap mix with explicit draws; returns (samples, placement dict)."""
    to_f32 = _all_float32([x, n])
    cfg, sample_rate = _pas_config(config)
    try:
        out = pasaug.apply_pas(
            _buffer(x, sample_rate), _buffer(n, sample_rate), cfg,
            _placement(placement),
        )
    except PasaugError as exc:
        raise ValueError(str(exc)) from None
    return _cast(out.audio.samples, to_f32), asdict(out.placement)


def augment_batch(batch, noise, config, method: str = "pas") -> BoundBatch:
    """Apply the core batch augmentation to lists of 1-D arrays.

    Sample i is reproducible from (config['master_seed'], i) alone; the
    returned samples are bit-exact with the core and the CLI.
    """
    to_f32 = _all_float32(list(batch) + list(noise))
    cfg, sample_rate = _pas_config(config)
    buffers = [_buffer(x, sample_rate) for x in batch]
    catalog = [_buffer(n, sample_rate) for n in noise]
    try:
        out = pasaug.augment_batch(buffers, catalog, cfg, method)
    except PasaugError as exc:
        raise ValueError(str(exc)) from None
    return BoundBatch(
        samples=[_cast(s.audio.samples, to_f32) for s in out],
        placements=[
            None if s.placement is None else asdict(s.placement) for s in out
        ],
    )


def log_mel(samples, config=None):
    """Log-Mel feature matrix of one utterance; returns (n_frames, n_mels)."""
    mapping = dict(config) if config else {}
    unknown = set(mapping) - _MEL_KEYS
    if unknown:
        raise ValueError(f"unknown config field(s): {', '.join(sorted(unknown))}")
    try:
        cfg = pasaug.MelConfig(**mapping)
    except (ValueError, TypeError) as exc:
        raise ValueError(str(exc)) from None
    to_f32 = _all_float32([samples])
    try:
        spec = pasaug.log_mel(_buffer(samples, cfg.sample_rate), cfg)
    except PasaugError as exc:
        raise ValueError(str(exc)) from None
    return _cast(spec.data, to_f32)
