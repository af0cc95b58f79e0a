"""Mixing math, placement draws, and batch determinism tests."""

import math
from dataclasses import replace

import numpy as np
import pytest
from conftest import synth_noise, synth_speech

from pasaug.audio import AudioBuffer, sample_segment
from pasaug.augment import (
    METHOD_PAS,
    METHOD_TRADITIONAL,
    PasConfig,
    PasPlacement,
    apply_pas,
    apply_traditional,
    augment_batch,
    augment_utterance,
    draw_placement,
    sample_stream,
    signal_power,
    snr_gain,
)
from pasaug.errors import (
    DegenerateSignalError,
    EmptyCatalogError,
    SampleRateMismatchError,
)


def measured_snr_db(speech: np.ndarray, scaled_noise: np.ndarray) -> float:
    """Independent SNR oracle: re-measure both powers after scaling."""
    return 10.0 * math.log10(np.mean(speech**2) / np.mean(scaled_noise**2))


class TestSignalPower:
    def test_unit_square_wave(self):
        assert signal_power(AudioBuffer(np.array([1.0, -1.0, 1.0, -1.0]), 16000)) == 1.0

    def test_constant_signal(self):
        assert signal_power(AudioBuffer(np.array([0.5, 0.5]), 16000)) == 0.25

    def test_zero_power_guard(self):
        with pytest.raises(DegenerateSignalError):
            signal_power(AudioBuffer(np.zeros(10), 16000))


class TestSnrGain:
    def test_equal_power_identity(self):
        assert snr_gain(1.0, 1.0, 0.0) == 1.0

    def test_20db(self):
        assert snr_gain(1.0, 1.0, 20.0) == pytest.approx(0.1, rel=1e-15)

    def test_zero_power_rejected(self):
        with pytest.raises(DegenerateSignalError):
            snr_gain(0.0, 1.0, 5.0)
        with pytest.raises(DegenerateSignalError):
            snr_gain(1.0, 0.0, 5.0)

    def test_rescaled_noise_hits_requested_snr(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            speech = rng.standard_normal(int(rng.integers(100, 3000))) * rng.uniform(0.05, 0.8)
            noise = rng.standard_normal(speech.size) * rng.uniform(0.05, 0.8)
            snr = float(rng.uniform(0.0, 20.0))
            gain = snr_gain(float(np.mean(speech**2)), float(np.mean(noise**2)), snr)
            assert measured_snr_db(speech, gain * noise) == pytest.approx(snr, abs=1e-9)


class TestApplyTraditional:
    def test_zero_speech_has_no_snr(self, noise_buffer):
        silent = AudioBuffer(np.zeros(1000), 16000)
        with pytest.raises(DegenerateSignalError):
            apply_traditional(silent, noise_buffer, 10.0)

    def test_elementwise_additivity(self, speech_buffer, noise_buffer):
        out = apply_traditional(speech_buffer, noise_buffer, 7.5)
        x = speech_buffer.samples
        n = noise_buffer.samples[: len(speech_buffer)]
        gain = math.sqrt(np.mean(x**2) / (np.mean(n**2) * 10.0 ** (7.5 / 10.0)))
        assert np.array_equal(out.samples, x + gain * n)

    def test_tone_plus_white_noise_snr(self):
        sr = 16000
        t = np.arange(sr * 2) / sr
        tone = AudioBuffer(0.4 * np.sin(2 * np.pi * 1000.0 * t), sr)
        noise = synth_noise(sr * 2, sr, seed=5)
        out = apply_traditional(tone, noise, 10.0)
        gain = math.sqrt(
            np.mean(tone.samples**2)
            / (np.mean(noise.samples**2) * 10.0 ** (10.0 / 10.0))
        )
        addend = gain * noise.samples
        assert np.array_equal(out.samples, tone.samples + addend)
        assert measured_snr_db(tone.samples, addend) == pytest.approx(10.0, abs=1e-9)

    def test_sample_rate_mismatch(self, speech_buffer):
        noise = synth_noise(80000, sample_rate=8000, seed=2)
        with pytest.raises(SampleRateMismatchError):
            apply_traditional(speech_buffer, noise, 5.0)


class TestApplyPas:
    CFG = PasConfig(noise_len=4000, speech_len_min=1000, snr_min=0.0, snr_max=20.0)

    def test_full_overlap_matches_traditional_bitwise(self, speech_buffer, noise_buffer):
        cfg = replace(self.CFG, speech_len_min=self.CFG.noise_len)
        rng = np.random.default_rng(21)
        for _ in range(20):
            draws = PasPlacement(
                speech_len=cfg.noise_len,
                speech_pos=0,
                snr_db=float(rng.uniform(0, 20)),
                noise_id=0,
                noise_offset=int(rng.integers(0, len(noise_buffer) - cfg.noise_len)),
                speech_offset=int(rng.integers(0, len(speech_buffer) - cfg.noise_len)),
            )
            out = apply_pas(speech_buffer, noise_buffer, cfg, draws)
            x_seg = sample_segment(speech_buffer, cfg.noise_len, draws.speech_offset)
            n_seg = sample_segment(noise_buffer, cfg.noise_len, draws.noise_offset)
            reference = apply_traditional(x_seg, n_seg, draws.snr_db)
            assert np.array_equal(out.audio.samples, reference.samples)

    def test_concatenation_structure(self):
        cfg = PasConfig(noise_len=8, speech_len_min=4, snr_min=0.0, snr_max=20.0)
        x = AudioBuffer(np.array([0.5, -0.25, 0.125, 0.375]), 16000)
        n = AudioBuffer(np.array([0.25, -0.5, 0.125, 0.25, -0.125, 0.5, -0.25, 0.125]), 16000)
        draws = PasPlacement(
            speech_len=4, speech_pos=2, snr_db=6.0, noise_id=0,
            noise_offset=0, speech_offset=0,
        )
        out = apply_pas(x, n, cfg, draws)
        gain = out.placement.noise_gain
        overlap = n.samples[2:6]
        expected_gain = math.sqrt(
            np.mean(x.samples**2) / (np.mean(overlap**2) * 10.0 ** (6.0 / 10.0))
        )
        assert gain == expected_gain
        assert np.array_equal(out.audio.samples[:2], gain * n.samples[:2])
        assert np.array_equal(out.audio.samples[6:], gain * n.samples[6:])
        assert np.array_equal(out.audio.samples[2:6], x.samples + gain * overlap)

    def test_overlap_snr_exact(self, speech_buffer, noise_buffer):
        rng = np.random.default_rng(33)
        for _ in range(50):
            speech_len = int(rng.integers(self.CFG.speech_len_min, self.CFG.noise_len + 1))
            draws = PasPlacement(
                speech_len=speech_len,
                speech_pos=int(rng.integers(0, self.CFG.noise_len - speech_len + 1)),
                snr_db=float(rng.uniform(0, 20)),
                noise_id=0,
                noise_offset=int(rng.integers(0, len(noise_buffer) - self.CFG.noise_len)),
                speech_offset=int(rng.integers(0, len(speech_buffer) - speech_len)),
            )
            out = apply_pas(speech_buffer, noise_buffer, self.CFG, draws)
            gain = out.placement.noise_gain
            lo, hi = draws.speech_pos, draws.speech_pos + speech_len
            x_seg = speech_buffer.samples[
                draws.speech_offset : draws.speech_offset + speech_len
            ]
            n_seg = noise_buffer.samples[
                draws.noise_offset + lo : draws.noise_offset + hi
            ]
            assert measured_snr_db(x_seg, gain * n_seg) == pytest.approx(
                draws.snr_db, abs=1e-9
            )

    def test_noise_only_spans_are_pure(self, speech_buffer, noise_buffer):
        rng = np.random.default_rng(44)
        for _ in range(25):
            speech_len = int(rng.integers(1000, 4001))
            pos = int(rng.integers(0, self.CFG.noise_len - speech_len + 1))
            draws = PasPlacement(
                speech_len=speech_len, speech_pos=pos,
                snr_db=float(rng.uniform(0, 20)), noise_id=0,
                noise_offset=int(rng.integers(0, len(noise_buffer) - self.CFG.noise_len)),
                speech_offset=int(rng.integers(0, len(speech_buffer) - speech_len)),
            )
            out = apply_pas(speech_buffer, noise_buffer, self.CFG, draws)
            gain = out.placement.noise_gain
            scaled = gain * noise_buffer.samples[
                draws.noise_offset : draws.noise_offset + self.CFG.noise_len
            ]
            head = out.audio.samples[:pos] - scaled[:pos]
            tail = out.audio.samples[pos + speech_len :] - scaled[pos + speech_len :]
            assert not head.any() and not tail.any()
            x_seg = speech_buffer.samples[
                draws.speech_offset : draws.speech_offset + speech_len
            ]
            recovered = out.audio.samples[pos : pos + speech_len] - scaled[pos : pos + speech_len]
            assert np.max(np.abs(recovered - x_seg)) <= 1e-12

    def test_placement_validated_against_config(self, speech_buffer, noise_buffer):
        draws = PasPlacement(
            speech_len=500, speech_pos=0, snr_db=5.0, noise_id=0,
            noise_offset=0, speech_offset=0,
        )
        with pytest.raises(ValueError):
            apply_pas(speech_buffer, noise_buffer, self.CFG, draws)


class TestDrawPlacement:
    def test_single_point_distributions(self):
        cfg = PasConfig(noise_len=2000, speech_len_min=2000, snr_min=0, snr_max=20)
        for index in range(50):
            draws = draw_placement(cfg, sample_stream(9, index), 4, 3000, 2500)
            assert draws.speech_len == 2000
            assert draws.speech_pos == 0

    def test_determinism_per_seed_and_index(self):
        cfg = PasConfig(noise_len=2000, speech_len_min=500, snr_min=0, snr_max=20)
        for index in (0, 1, 17):
            a = draw_placement(cfg, sample_stream(123, index), 5, 4000, 6000)
            b = draw_placement(cfg, sample_stream(123, index), 5, 4000, 6000)
            assert a == b

    def test_law_of_large_numbers(self):
        cfg = PasConfig(
            noise_len=32000, speech_len_min=16000, snr_min=0, snr_max=20,
            master_seed=2024,
        )
        lengths = np.empty(100_000)
        hit_zero = hit_max = False
        for i in range(100_000):
            draws = draw_placement(cfg, sample_stream(cfg.master_seed, i), 3, 40000, 40000)
            lengths[i] = draws.speech_len
            hit_zero = hit_zero or draws.speech_pos == 0
            hit_max = hit_max or draws.speech_pos == cfg.noise_len - draws.speech_len
        assert abs(lengths.mean() - 24000.0) <= 240.0
        assert hit_zero and hit_max

    def test_bounds_always_valid(self):
        cfg = PasConfig(noise_len=1000, speech_len_min=100, snr_min=-3, snr_max=9)
        for i in range(500):
            draws = draw_placement(cfg, sample_stream(5, i), 7, 1500, 2000)
            assert cfg.speech_len_min <= draws.speech_len <= cfg.noise_len
            assert 0 <= draws.speech_pos <= cfg.noise_len - draws.speech_len
            assert cfg.snr_min <= draws.snr_db <= cfg.snr_max
            assert 0 <= draws.noise_id < 7
            assert 0 <= draws.noise_offset <= 2000 - cfg.noise_len
            assert 0 <= draws.speech_offset <= 1500 - draws.speech_len


class TestPasConfig:
    def test_speech_len_bounds(self):
        with pytest.raises(ValueError, match="speech_len_min"):
            PasConfig(noise_len=100, speech_len_min=101, snr_min=0, snr_max=20)
        with pytest.raises(ValueError, match="speech_len_min"):
            PasConfig(noise_len=100, speech_len_min=0, snr_min=0, snr_max=20)

    def test_snr_order(self):
        with pytest.raises(ValueError, match="snr_min"):
            PasConfig(noise_len=100, speech_len_min=10, snr_min=5, snr_max=4)

    def test_mix_probability_range(self):
        with pytest.raises(ValueError, match="mix_probability"):
            PasConfig(noise_len=100, speech_len_min=10, snr_min=0, snr_max=20,
                      mix_probability=1.5)


class TestAugmentBatch:
    def small_batch(self, count=12, sr=16000):
        return [synth_speech(int(1500 + 137 * i), sr, seed=50 + i) for i in range(count)]

    def small_catalog(self, count=3, sr=16000):
        return [synth_noise(int(2000 + 311 * i), sr, seed=80 + i) for i in range(count)]

    def test_mix_probability_zero_passes_through(self):
        cfg = PasConfig(noise_len=1200, speech_len_min=600, snr_min=0, snr_max=20,
                        mix_probability=0.0, master_seed=3)
        batch = self.small_batch()
        out = augment_batch(batch, self.small_catalog(), cfg, METHOD_PAS)
        for src, sample in zip(batch, out):
            assert sample.placement is None
            assert len(sample.audio) == 1200
            lo = sample.crop_offset
            assert np.array_equal(sample.audio.samples, src.samples[lo : lo + 1200])

    def test_traditional_forces_full_overlap(self):
        cfg = PasConfig(noise_len=1200, speech_len_min=600, snr_min=0, snr_max=20,
                        mix_probability=1.0, master_seed=4)
        out = augment_batch(self.small_batch(), self.small_catalog(), cfg,
                            METHOD_TRADITIONAL)
        for sample in out:
            assert sample.placement.speech_len == 1200
            assert sample.placement.speech_pos == 0

    def test_output_length_always_noise_len(self):
        cfg = PasConfig(noise_len=2500, speech_len_min=700, snr_min=0, snr_max=20,
                        mix_probability=0.6, master_seed=5)
        out = augment_batch(self.small_batch(), self.small_catalog(), cfg, METHOD_PAS)
        assert all(len(s.audio) == 2500 for s in out)

    def test_short_inputs_are_loop_padded(self):
        cfg = PasConfig(noise_len=5000, speech_len_min=600, snr_min=0, snr_max=20,
                        mix_probability=1.0, master_seed=6)
        short_speech = [synth_speech(800, seed=1)]
        short_noise = [synth_noise(900, seed=2)]
        out = augment_batch(short_speech, short_noise, cfg, METHOD_PAS)
        assert len(out[0].audio) == 5000

    def test_augmented_fraction(self):
        cfg = PasConfig(noise_len=16, speech_len_min=8, snr_min=0, snr_max=20,
                        mix_probability=0.75, master_seed=11)
        batch = [synth_speech(24, seed=9)] * 10_000
        catalog = [synth_noise(32, seed=10)]
        out = augment_batch(batch, catalog, cfg, METHOD_PAS)
        fraction = sum(s.placement is not None for s in out) / len(out)
        assert 0.73 <= fraction <= 0.77

    def test_empty_catalog(self):
        cfg = PasConfig(noise_len=100, speech_len_min=50, snr_min=0, snr_max=20)
        with pytest.raises(EmptyCatalogError):
            augment_batch(self.small_batch(2), [], cfg, METHOD_PAS)

    def test_empty_batch_is_vacuous(self):
        cfg = PasConfig(noise_len=100, speech_len_min=50, snr_min=0, snr_max=20)
        assert augment_batch([], [], cfg, METHOD_PAS) == []

    def test_order_independence(self):
        cfg = PasConfig(noise_len=1200, speech_len_min=600, snr_min=0, snr_max=20,
                        mix_probability=0.75, master_seed=77)
        batch = self.small_batch(8)
        catalog = self.small_catalog()
        from_batch = augment_batch(batch, catalog, cfg, METHOD_PAS)
        for index in reversed(range(len(batch))):
            alone = augment_utterance(batch[index], catalog, cfg, METHOD_PAS, index)
            assert np.array_equal(alone.audio.samples, from_batch[index].audio.samples)
            assert alone.placement == from_batch[index].placement

    def test_unknown_method_rejected(self):
        cfg = PasConfig(noise_len=100, speech_len_min=50, snr_min=0, snr_max=20)
        with pytest.raises(ValueError, match="method"):
            augment_utterance(synth_speech(200), self.small_catalog(1), cfg, "both", 0)


class TestSampleStream:
    def test_streams_disjoint_across_indices(self):
        a = sample_stream(1, 0).random(8)
        b = sample_stream(1, 1).random(8)
        assert not np.array_equal(a, b)

    def test_seed_bounds(self):
        with pytest.raises(ValueError):
            sample_stream(-1, 0)
        with pytest.raises(ValueError):
            sample_stream(0, 2**64)
