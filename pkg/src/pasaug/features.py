"""Log-Mel spectrogram extraction.

Front end: framed short-time power spectra (periodic Hamming window,
zero-padded FFT), triangular mel filters on the HTK scale, natural log
with a positive floor. No pre-emphasis, no frame centering, and no
output normalization; every knob lives in MelConfig.
"""

import struct
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from .audio import AudioBuffer
from .errors import TooShortError

LMEL_MAGIC = b"LMEL"


@dataclass(frozen=True)
class MelConfig:
    sample_rate: int = 16000
    fft_size: int = 1024
    win_length: int = 400
    hop_length: int = 160
    n_mels: int = 80
    fmin: float = 20.0
    fmax: float = 7600.0
    log_floor: float = 1e-10

    def __post_init__(self):
        if self.win_length > self.fft_size:
            raise ValueError(
                f"win_length ({self.win_length}) must be <= fft_size "
                f"({self.fft_size})"
            )
        if self.win_length < 1 or self.hop_length < 1:
            raise ValueError("win_length and hop_length must be >= 1")
        if not 0 <= self.fmin < self.fmax <= self.sample_rate / 2:
            raise ValueError(
                f"need 0 <= fmin ({self.fmin}) < fmax ({self.fmax}) "
                f"<= Nyquist ({self.sample_rate / 2})"
            )
        if self.n_mels < 1:
            raise ValueError(f"n_mels must be >= 1, got {self.n_mels}")
        if self.log_floor <= 0:
            raise ValueError(f"log_floor must be > 0, got {self.log_floor}")

    @property
    def n_bins(self) -> int:
        return self.fft_size // 2 + 1


@dataclass(frozen=True)
class MelSpectrogram:
    """n_frames x n_mels matrix of log mel energies plus its config."""

    data: np.ndarray
    config: MelConfig

    @property
    def n_frames(self) -> int:
        return self.data.shape[0]


def num_frames(n_samples: int, cfg: MelConfig) -> int:
    if n_samples < cfg.win_length:
        raise TooShortError(
            f"{n_samples} samples < one window of {cfg.win_length}"
        )
    return (n_samples - cfg.win_length) // cfg.hop_length + 1


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def _hamming_periodic(length: int) -> np.ndarray:
    k = np.arange(length, dtype=np.float64)
    return 0.54 - 0.46 * np.cos(2.0 * np.pi * k / length)


def stft_power(buf: AudioBuffer, cfg: MelConfig) -> np.ndarray:
    """Squared-magnitude one-sided spectra, one row per frame.

    Frame t covers samples [t*hop, t*hop + win); frames are windowed and
    zero-padded to fft_size.
    """
    n = num_frames(len(buf), cfg)
    frames = np.lib.stride_tricks.sliding_window_view(buf.samples, cfg.win_length)
    frames = frames[: (n - 1) * cfg.hop_length + 1 : cfg.hop_length]
    windowed = frames * _hamming_periodic(cfg.win_length)
    spectra = np.fft.rfft(windowed, n=cfg.fft_size, axis=1)
    return np.abs(spectra) ** 2


@lru_cache(maxsize=8)
def _filterbank_cached(cfg: MelConfig) -> np.ndarray:
    edges = mel_to_hz(
        np.linspace(hz_to_mel(cfg.fmin), hz_to_mel(cfg.fmax), cfg.n_mels + 2)
    )
    bin_freqs = np.arange(cfg.n_bins) * (cfg.sample_rate / cfg.fft_size)
    lower = edges[:-2, None]
    center = edges[1:-1, None]
    upper = edges[2:, None]
    rising = (bin_freqs - lower) / (center - lower)
    falling = (upper - bin_freqs) / (upper - center)
    fb = np.maximum(0.0, np.minimum(rising, falling))
    fb.flags.writeable = False
    return fb


def mel_filterbank(cfg: MelConfig) -> np.ndarray:
    """Triangular filters, n_mels x n_bins; rows peak at mel-spaced centers.

    The returned matrix is cached per config and read-only.
    """
    return _filterbank_cached(cfg)


def filter_centers_hz(cfg: MelConfig) -> np.ndarray:
    """Center frequency of each triangular filter in Hz."""
    edges = mel_to_hz(
        np.linspace(hz_to_mel(cfg.fmin), hz_to_mel(cfg.fmax), cfg.n_mels + 2)
    )
    return edges[1:-1]


def log_mel(buf: AudioBuffer, cfg: MelConfig | None = None) -> MelSpectrogram:
    """Natural-log mel energies, floored at cfg.log_floor before the log."""
    if cfg is None:
        cfg = MelConfig()
    power = stft_power(buf, cfg)
    energies = power @ mel_filterbank(cfg).T
    return MelSpectrogram(np.log(np.maximum(energies, cfg.log_floor)), cfg)


def write_features(spec: MelSpectrogram, path) -> None:
    """Binary matrix dump: 16-byte header (magic, n_frames, n_mels,
    reserved) then row-major little-endian float32."""
    n_frames, n_mels = spec.data.shape
    header = LMEL_MAGIC + struct.pack("<III", n_frames, n_mels, 0)
    payload = np.ascontiguousarray(spec.data, dtype="<f4").tobytes()
    Path(path).write_bytes(header + payload)


def read_features(path) -> np.ndarray:
    """Read a matrix written by write_features; returns float32 (n_frames, n_mels)."""
    raw = Path(path).read_bytes()
    if len(raw) < 16 or raw[:4] != LMEL_MAGIC:
        raise ValueError(f"{path}: not a feature matrix file")
    n_frames, n_mels, _ = struct.unpack_from("<III", raw, 4)
    expected = 16 + 4 * n_frames * n_mels
    if len(raw) != expected:
        raise ValueError(
            f"{path}: size {len(raw)} does not match header "
            f"({n_frames} x {n_mels})"
        )
    data = np.frombuffer(raw, dtype="<f4", offset=16)
    return data.reshape(n_frames, n_mels).copy()
