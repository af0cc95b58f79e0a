"""Mono PCM audio container, WAV I/O, and segment primitives.

Amplitudes are float64 in a nominal [-1, 1] range with the symmetric
int16 scaling 1/32768. Only 16-bit mono PCM WAV is accepted; anything
else is rejected rather than silently converted.
"""

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    CorruptHeaderError,
    OutOfRangeError,
    UnsupportedFormatError,
)

INT16_SCALE = 32768.0


@dataclass(frozen=True)
class AudioBuffer:
    """Immutable mono sample buffer plus its sample rate in Hz."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        arr = np.array(self.samples, dtype=np.float64, copy=True)
        if arr.ndim != 1:
            raise ValueError(f"samples must be 1-D, got shape {arr.shape}")
        if arr.size < 1:
            raise ValueError("samples must contain at least one value")
        if not np.isfinite(arr).all():
            raise ValueError("samples contain NaN or Inf")
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be > 0, got {self.sample_rate}")
        arr.flags.writeable = False
        object.__setattr__(self, "samples", arr)

    def __len__(self) -> int:
        return self.samples.shape[0]

    @property
    def duration(self) -> float:
        return len(self) / self.sample_rate


@dataclass(frozen=True)
class SegmentSpan:
    """Half-open-free span: `start` inclusive, `length` samples."""

    start: int
    length: int

    def __post_init__(self):
        if self.start < 0:
            raise ValueError(f"start must be >= 0, got {self.start}")
        if self.length < 1:
            raise ValueError(f"length must be >= 1, got {self.length}")

    @property
    def stop(self) -> int:
        return self.start + self.length

    def check_within(self, parent_length: int) -> None:
        if self.stop > parent_length:
            raise OutOfRangeError(
                f"span [{self.start}, {self.stop}) exceeds buffer of "
                f"{parent_length} samples"
            )


def load_wav(path) -> AudioBuffer:
    """Read a 16-bit mono PCM WAV file into an AudioBuffer.

    Integer samples are scaled by 1/32768. Extra chunks before `data`
    are skipped. Raises FileNotFoundError, CorruptHeaderError, or
    UnsupportedFormatError.
    """
    raw = Path(path).read_bytes()
    if len(raw) < 12 or raw[0:4] != b"RIFF" or raw[8:12] != b"WAVE":
        raise CorruptHeaderError(f"{path}: not a RIFF/WAVE file")

    fmt = None
    data = None
    pos = 12
    while pos + 8 <= len(raw):
        chunk_id = raw[pos : pos + 4]
        (chunk_size,) = struct.unpack_from("<I", raw, pos + 4)
        body_start = pos + 8
        if body_start + chunk_size > len(raw):
            raise CorruptHeaderError(f"{path}: truncated {chunk_id!r} chunk")
        if chunk_id == b"fmt ":
            if chunk_size < 16:
                raise CorruptHeaderError(f"{path}: fmt chunk too small")
            fmt = struct.unpack_from("<HHIIHH", raw, body_start)
        elif chunk_id == b"data":
            data = raw[body_start : body_start + chunk_size]
            break
        pos = body_start + chunk_size + (chunk_size & 1)

    if fmt is None or data is None:
        raise CorruptHeaderError(f"{path}: missing fmt or data chunk")

    audio_format, channels, sample_rate, _, _, bits = fmt
    if audio_format != 1:
        raise UnsupportedFormatError(
            f"{path}: format code {audio_format}, only PCM (1) supported"
        )
    if channels != 1:
        raise UnsupportedFormatError(f"{path}: {channels} channels, want mono")
    if bits != 16:
        raise UnsupportedFormatError(f"{path}: {bits}-bit samples, want 16")
    if sample_rate == 0:
        raise CorruptHeaderError(f"{path}: zero sample rate")

    ints = np.frombuffer(data[: len(data) - (len(data) % 2)], dtype="<i2")
    if ints.size == 0:
        raise CorruptHeaderError(f"{path}: empty data chunk")
    return AudioBuffer(ints.astype(np.float64) / INT16_SCALE, sample_rate)


def save_wav(buf: AudioBuffer, path) -> None:
    """Write a canonical 44-byte-header 16-bit mono PCM WAV file.

    Samples are clamped to [-1, 1] and quantized round-to-nearest.
    """
    clamped = np.clip(buf.samples, -1.0, 1.0)
    ints = np.clip(np.round(clamped * INT16_SCALE), -32768, 32767).astype("<i2")
    payload = ints.tobytes()
    header = b"RIFF" + struct.pack("<I", 36 + len(payload)) + b"WAVE"
    header += b"fmt " + struct.pack(
        "<IHHIIHH", 16, 1, 1, buf.sample_rate, buf.sample_rate * 2, 2, 16
    )
    header += b"data" + struct.pack("<I", len(payload))
    Path(path).write_bytes(header + payload)


def sample_segment(buf: AudioBuffer, length: int, start: int) -> AudioBuffer:
    """Copy `length` samples beginning at `start`; never aliases the source."""
    span = SegmentSpan(start, length)
    span.check_within(len(buf))
    return AudioBuffer(buf.samples[span.start : span.stop], buf.sample_rate)


def loop_pad(buf: AudioBuffer, length: int) -> AudioBuffer:
    """Repeat the buffer end-to-end and truncate to exactly `length` samples."""
    if length < 1:
        raise ValueError(f"length must be >= 1, got {length}")
    if length == len(buf):
        return buf
    reps = -(-length // len(buf))
    return AudioBuffer(np.tile(buf.samples, reps)[:length], buf.sample_rate)
