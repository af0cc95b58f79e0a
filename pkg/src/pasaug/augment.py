"""Partial additive speech (PAS) and full-duration additive-noise mixing.

PAS places a randomly sized speech segment at a random position inside a
fixed-length noise clip, so the output has noise-only regions on either
side of the speech. The traditional method covers the whole utterance
with noise. Both scale the noise to hit an exact target SNR, measured as
10*log10(speech power / noise power) over the region where both overlap.

All randomness comes from counter-based per-sample streams keyed by
(master_seed, sample index), so batch results are independent of
iteration order and worker count.
"""

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .audio import AudioBuffer, loop_pad, sample_segment
from .errors import (
    DegenerateSignalError,
    EmptyCatalogError,
    SampleRateMismatchError,
)

METHOD_PAS = "pas"
METHOD_TRADITIONAL = "traditional"
_METHODS = (METHOD_PAS, METHOD_TRADITIONAL)


@dataclass(frozen=True)
class PasConfig:
    """Mixing hyperparameters, all durations in samples.

    noise_len is the fixed output length, speech_len_min the shortest
    speech segment that may be placed inside it.
    """

    noise_len: int
    speech_len_min: int
    snr_min: float
    snr_max: float
    mix_probability: float = 0.75
    master_seed: int = 0

    def __post_init__(self):
        if not 1 <= self.speech_len_min <= self.noise_len:
            raise ValueError(
                f"speech_len_min must satisfy 1 <= speech_len_min "
                f"({self.speech_len_min}) <= noise_len ({self.noise_len})"
            )
        if self.snr_min > self.snr_max:
            raise ValueError(
                f"snr_min ({self.snr_min}) must be <= snr_max ({self.snr_max})"
            )
        if not 0.0 <= self.mix_probability <= 1.0:
            raise ValueError(
                f"mix_probability must be in [0, 1], got {self.mix_probability}"
            )
        if not 0 <= self.master_seed < 2**64:
            raise ValueError(
                f"master_seed must be a 64-bit unsigned integer, "
                f"got {self.master_seed}"
            )


@dataclass(frozen=True)
class PasPlacement:
    """Realized draws for one augmented utterance.

    noise_gain is None until the mix is actually applied; afterwards it
    records the linear multiplier that met the target SNR.
    """

    speech_len: int
    speech_pos: int
    snr_db: float
    noise_id: int
    noise_offset: int
    speech_offset: int
    noise_gain: float | None = None

    def __post_init__(self):
        if self.speech_len < 1:
            raise ValueError(f"speech_len must be >= 1, got {self.speech_len}")
        if self.speech_pos < 0:
            raise ValueError(f"speech_pos must be >= 0, got {self.speech_pos}")
        if self.noise_offset < 0 or self.speech_offset < 0:
            raise ValueError("offsets must be >= 0")
        if self.noise_gain is not None:
            if not (math.isfinite(self.noise_gain) and self.noise_gain > 0):
                raise ValueError(
                    f"noise_gain must be positive and finite, got {self.noise_gain}"
                )


@dataclass(frozen=True)
class AugmentedSample:
    """One output utterance: fixed-length audio plus its provenance.

    placement is None for a pass-through (unmixed) sample; crop_offset
    then records where the output was cropped from the padded source.
    """

    audio: AudioBuffer
    placement: PasPlacement | None
    crop_offset: int = 0


def sample_stream(master_seed: int, index: int) -> np.random.Generator:
    """Independent random stream for one sample, keyed by (seed, index).

    Philox is counter-based: distinct keys give statistically independent
    streams, so any sample's draws can be reproduced in isolation.
    """
    master_seed = int(master_seed)  # numpy ints would overflow the shift
    index = int(index)
    if not 0 <= master_seed < 2**64:
        raise ValueError(f"master_seed out of 64-bit range: {master_seed}")
    if not 0 <= index < 2**64:
        raise ValueError(f"index out of 64-bit range: {index}")
    return np.random.Generator(np.random.Philox(key=(master_seed << 64) | index))


def _mean_square(arr: np.ndarray) -> float:
    power = float(np.mean(np.square(arr)))
    if power == 0.0:
        raise DegenerateSignalError("signal has zero power")
    return power


def signal_power(buf: AudioBuffer) -> float:
    """Mean-square amplitude. Raises DegenerateSignalError on all-zero input."""
    return _mean_square(buf.samples)


def snr_gain(speech_power: float, noise_power: float, snr_db: float) -> float:
    """Linear gain g so that 10*log10(speech_power / (g^2 * noise_power)) == snr_db."""
    if speech_power <= 0.0 or noise_power <= 0.0:
        raise DegenerateSignalError("powers must be > 0 to set an SNR")
    return math.sqrt(speech_power / (noise_power * 10.0 ** (snr_db / 10.0)))


def apply_traditional(x: AudioBuffer, n: AudioBuffer, snr_db: float) -> AudioBuffer:
    """Add gain-scaled noise over the full duration of the speech.

    Noise power is measured over the first len(x) samples of n; callers
    loop-pad shorter noise first.
    """
    if x.sample_rate != n.sample_rate:
        raise SampleRateMismatchError(
            f"speech at {x.sample_rate} Hz, noise at {n.sample_rate} Hz"
        )
    noise = sample_segment(n, len(x), 0)
    gain = snr_gain(signal_power(x), signal_power(noise), snr_db)
    return AudioBuffer(x.samples + gain * noise.samples, x.sample_rate)


def apply_pas(
    x: AudioBuffer, n: AudioBuffer, cfg: PasConfig, draws: PasPlacement
) -> AugmentedSample:
    """Mix a speech segment into a noise clip at the drawn position and SNR.

    The output is exactly cfg.noise_len samples: gain-scaled noise with
    the speech segment summed in over [speech_pos, speech_pos + speech_len).
    The gain is set from the speech segment's power and the power of the
    noise slice it overlaps.
    """
    if x.sample_rate != n.sample_rate:
        raise SampleRateMismatchError(
            f"speech at {x.sample_rate} Hz, noise at {n.sample_rate} Hz"
        )
    _check_placement(cfg, draws)

    noise_seg = sample_segment(n, cfg.noise_len, draws.noise_offset)
    speech_seg = sample_segment(x, draws.speech_len, draws.speech_offset)
    lo = draws.speech_pos
    hi = draws.speech_pos + draws.speech_len
    overlap = noise_seg.samples[lo:hi]

    gain = snr_gain(signal_power(speech_seg), _mean_square(overlap), draws.snr_db)
    scaled = gain * noise_seg.samples
    mixed = scaled.copy()
    mixed[lo:hi] = speech_seg.samples + scaled[lo:hi]

    return AugmentedSample(
        audio=AudioBuffer(mixed, x.sample_rate),
        placement=replace(draws, noise_gain=gain),
        crop_offset=draws.speech_offset,
    )


def _check_placement(cfg: PasConfig, draws: PasPlacement) -> None:
    if not cfg.speech_len_min <= draws.speech_len <= cfg.noise_len:
        raise ValueError(
            f"speech_len {draws.speech_len} outside "
            f"[{cfg.speech_len_min}, {cfg.noise_len}]"
        )
    if not 0 <= draws.speech_pos <= cfg.noise_len - draws.speech_len:
        raise ValueError(
            f"speech_pos {draws.speech_pos} outside "
            f"[0, {cfg.noise_len - draws.speech_len}]"
        )
    if not cfg.snr_min <= draws.snr_db <= cfg.snr_max:
        raise ValueError(
            f"snr_db {draws.snr_db} outside [{cfg.snr_min}, {cfg.snr_max}]"
        )


def draw_placement(
    cfg: PasConfig,
    rng_stream: np.random.Generator,
    noise_catalog_size: int,
    x_len: int,
    n_len: int | Sequence[int],
) -> PasPlacement:
    """Draw one placement from a per-sample stream.

    Draw order is fixed (noise id, noise offset, speech length, speech
    offset, SNR, position) so identical streams yield identical
    placements. n_len is the usable length of each catalog entry, either
    one shared value or a per-entry sequence; callers guarantee every
    entry covers noise_len and the speech covers any drawn length.
    """
    noise_id = int(rng_stream.integers(0, noise_catalog_size))
    n_total = int(n_len if isinstance(n_len, (int, np.integer)) else n_len[noise_id])
    noise_offset = int(rng_stream.integers(0, n_total - cfg.noise_len, endpoint=True))
    speech_len = int(
        rng_stream.integers(cfg.speech_len_min, cfg.noise_len, endpoint=True)
    )
    speech_offset = int(
        rng_stream.integers(0, max(x_len - speech_len, 0), endpoint=True)
    )
    snr_db = float(rng_stream.uniform(cfg.snr_min, cfg.snr_max))
    speech_pos = int(
        rng_stream.integers(0, cfg.noise_len - speech_len, endpoint=True)
    )
    return PasPlacement(
        speech_len=speech_len,
        speech_pos=speech_pos,
        snr_db=snr_db,
        noise_id=noise_id,
        noise_offset=noise_offset,
        speech_offset=speech_offset,
    )


def augment_utterance(
    x: AudioBuffer,
    noise_catalog: Sequence[AudioBuffer],
    cfg: PasConfig,
    method: str,
    index: int,
) -> AugmentedSample:
    """Augment (or pass through) one utterance using its own stream.

    Speech and noise shorter than noise_len are loop-padded first. The
    traditional method runs through the same draw path with the speech
    length pinned to noise_len, which forces full overlap at position 0.
    """
    if method not in _METHODS:
        raise ValueError(f"method must be one of {_METHODS}, got {method!r}")
    rng = sample_stream(cfg.master_seed, index)
    x_padded = loop_pad(x, max(len(x), cfg.noise_len))

    if not rng.random() < cfg.mix_probability:
        offset = int(
            rng.integers(0, len(x_padded) - cfg.noise_len, endpoint=True)
        )
        return AugmentedSample(
            audio=sample_segment(x_padded, cfg.noise_len, offset),
            placement=None,
            crop_offset=offset,
        )

    eff_cfg = cfg
    if method == METHOD_TRADITIONAL:
        eff_cfg = replace(cfg, speech_len_min=cfg.noise_len)

    usable = [max(len(n), cfg.noise_len) for n in noise_catalog]
    draws = draw_placement(eff_cfg, rng, len(noise_catalog), len(x_padded), usable)
    noise = loop_pad(noise_catalog[draws.noise_id], usable[draws.noise_id])
    return apply_pas(x_padded, noise, eff_cfg, draws)


def augment_batch(
    batch: Sequence[AudioBuffer],
    noise_catalog: Sequence[AudioBuffer],
    cfg: PasConfig,
    method: str = METHOD_PAS,
) -> list[AugmentedSample]:
    """Augment each utterance independently with probability mix_probability.

    Sample i's randomness depends only on (cfg.master_seed, i), never on
    the other batch entries, so results are order-independent and safe
    to compute in parallel.
    """
    if len(batch) == 0:
        return []
    if len(noise_catalog) == 0:
        raise EmptyCatalogError("noise catalog is empty")
    return [
        augment_utterance(x, noise_catalog, cfg, method, i)
        for i, x in enumerate(batch)
    ]
