"""Shared corpus builders for the test suite.

All synthetic audio is generated from explicit seeds so every test is
reproducible; "speech" is a modulated harmonic tone, "noise" is scaled
Gaussian noise. Both have nonzero power everywhere.
"""

import numpy as np
import pytest

from pasaug.audio import AudioBuffer, save_wav


def synth_speech(n_samples: int, sample_rate: int = 16000, seed: int = 0) -> AudioBuffer:
    rng = np.random.default_rng(seed)
    t = np.arange(n_samples) / sample_rate
    f0 = rng.uniform(90.0, 260.0)
    sig = 0.35 * np.sin(2 * np.pi * f0 * t)
    sig += 0.18 * np.sin(2 * np.pi * 2.17 * f0 * t + rng.uniform(0, np.pi))
    sig *= 0.55 + 0.45 * np.sin(2 * np.pi * rng.uniform(1.0, 4.0) * t)
    sig += 0.01 * rng.standard_normal(n_samples)
    return AudioBuffer(np.clip(sig, -0.95, 0.95), sample_rate)


def synth_noise(n_samples: int, sample_rate: int = 16000, seed: int = 1) -> AudioBuffer:
    rng = np.random.default_rng(seed)
    return AudioBuffer(0.12 * rng.standard_normal(n_samples), sample_rate)


def write_corpus(
    directory,
    count: int,
    min_seconds: float = 1.5,
    max_seconds: float = 4.0,
    sample_rate: int = 16000,
    seed: int = 100,
    kind: str = "speech",
):
    """Write `count` WAVs plus a manifest; returns (manifest_path, wav_paths)."""
    directory.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    paths = []
    for i in range(count):
        seconds = rng.uniform(min_seconds, max_seconds)
        n = int(seconds * sample_rate)
        if kind == "speech":
            buf = synth_speech(n, sample_rate, seed=seed + 7 * i + 1)
        else:
            buf = synth_noise(n, sample_rate, seed=seed + 7 * i + 2)
        path = directory / f"{kind}{i:03d}.wav"
        save_wav(buf, path)
        paths.append(path)
    manifest = directory / "manifest.txt"
    manifest.write_text("".join(f"{p}\n" for p in paths), encoding="utf-8")
    return manifest, paths


@pytest.fixture
def speech_buffer() -> AudioBuffer:
    return synth_speech(60000, seed=11)


@pytest.fixture
def noise_buffer() -> AudioBuffer:
    return synth_noise(80000, seed=12)
