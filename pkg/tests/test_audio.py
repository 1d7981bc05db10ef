import math
import struct

import numpy as np
import pytest

from versealign.audio import (
    AudioBuffer,
    SpanOutOfRangeError,
    UnsupportedFormatError,
    WavParseError,
    cut_segment,
    load_wav,
    peak_normalize,
    save_wav,
    to_mono_16k,
)


def sine(freq, rate, seconds=1.0, amp=0.5):
    t = np.arange(int(rate * seconds)) / rate
    return amp * np.sin(2 * math.pi * freq * t)


class TestLoadWav:
    def test_silence_round_trip(self, tmp_path):
        path = tmp_path / "silence.wav"
        save_wav(path, AudioBuffer(np.zeros(16000), 16000))
        buf = load_wav(path)
        assert buf.sample_rate == 16000
        assert buf.channels == 1
        assert buf.samples.size == 16000
        assert np.all(buf.samples == 0.0)

    def test_int16_min_scales_to_exactly_minus_one(self, tmp_path):
        path = tmp_path / "min.wav"
        pcm = struct.pack("<h", -32768)
        header = b"RIFF" + struct.pack("<I", 36 + len(pcm)) + b"WAVE"
        header += b"fmt " + struct.pack("<IHHIIHH", 16, 1, 1, 16000, 32000, 2, 16)
        header += b"data" + struct.pack("<I", len(pcm))
        path.write_bytes(header + pcm)
        assert load_wav(path).samples[0] == -1.0

    def test_stereo_preserved(self, tmp_path):
        path = tmp_path / "stereo.wav"
        interleaved = np.zeros(200)
        interleaved[::2] = 0.25
        save_wav(path, AudioBuffer(interleaved, 8000, channels=2))
        buf = load_wav(path)
        assert buf.channels == 2
        assert buf.samples.size == 200

    def test_float32_supported(self, tmp_path):
        path = tmp_path / "f32.wav"
        pcm = np.array([0.5, -0.5], dtype="<f4").tobytes()
        header = b"RIFF" + struct.pack("<I", 36 + len(pcm)) + b"WAVE"
        header += b"fmt " + struct.pack("<IHHIIHH", 16, 3, 1, 16000, 64000, 4, 32)
        header += b"data" + struct.pack("<I", len(pcm))
        path.write_bytes(header + pcm)
        assert load_wav(path).samples.tolist() == [0.5, -0.5]

    def test_malformed_header_reports_offset(self, tmp_path):
        path = tmp_path / "bad.wav"
        path.write_bytes(b"JUNK" + b"\x00" * 40)
        with pytest.raises(WavParseError, match="byte 0"):
            load_wav(path)

    def test_mp3_rejected_with_hint(self, tmp_path):
        path = tmp_path / "audio.mp3"
        path.write_bytes(b"ID3" + b"\x00" * 64)
        with pytest.raises(UnsupportedFormatError, match="convert to WAV"):
            load_wav(path)

    def test_unsupported_encoding(self, tmp_path):
        path = tmp_path / "alaw.wav"
        header = b"RIFF" + struct.pack("<I", 36) + b"WAVE"
        header += b"fmt " + struct.pack("<IHHIIHH", 16, 6, 1, 8000, 8000, 1, 8)
        header += b"data" + struct.pack("<I", 0)
        path.write_bytes(header)
        with pytest.raises(UnsupportedFormatError):
            load_wav(path)


class TestToMono16k:
    def test_identity_on_mono_16k(self):
        buf = AudioBuffer(sine(100, 16000), 16000)
        assert to_mono_16k(buf) is buf

    def test_sine_resample_preserves_peak_frequency(self):
        buf = AudioBuffer(sine(440, 44100), 44100)
        out = to_mono_16k(buf)
        assert abs(out.samples.size - 16000) <= 1
        spectrum = np.abs(np.fft.rfft(out.samples))
        peak_hz = np.argmax(spectrum) * 16000 / out.samples.size
        assert abs(peak_hz - 440) <= 1.0

    def test_opposite_stereo_cancels(self):
        left = sine(200, 16000)
        interleaved = np.empty(2 * left.size)
        interleaved[::2] = left
        interleaved[1::2] = -left
        out = to_mono_16k(AudioBuffer(interleaved, 16000, channels=2))
        assert np.max(np.abs(out.samples)) < 1e-6

    def test_tone_energy_preserved(self):
        buf = AudioBuffer(sine(1000, 44100), 44100)
        out = to_mono_16k(buf)
        in_power = np.mean(buf.samples ** 2)
        out_power = np.mean(out.samples ** 2)
        assert abs(out_power - in_power) / in_power < 0.01

    def test_idempotent(self):
        buf = to_mono_16k(AudioBuffer(sine(300, 22050), 22050))
        again = to_mono_16k(buf)
        assert np.array_equal(again.samples, buf.samples)


class TestPeakNormalize:
    def test_scale_factor(self):
        buf = AudioBuffer(np.array([0.5, -0.25, 0.1]), 16000)
        out = peak_normalize(buf, -1.0)
        target = 10 ** (-1 / 20)
        assert np.max(np.abs(out.samples)) == pytest.approx(target, abs=1e-6)
        assert out.samples[0] == pytest.approx(0.89125, abs=1e-5)

    def test_all_zero_unchanged(self):
        buf = AudioBuffer(np.zeros(100), 16000)
        assert peak_normalize(buf) is buf

    def test_idempotent(self):
        buf = peak_normalize(AudioBuffer(sine(100, 16000), 16000))
        again = peak_normalize(buf)
        assert np.max(np.abs(again.samples - buf.samples)) < 1e-6


class TestCutSegment:
    def test_whole_buffer(self):
        buf = AudioBuffer(sine(100, 16000), 16000)
        out = cut_segment(buf, 0, 50, 0.02)
        assert np.array_equal(out.samples, buf.samples)

    def test_sample_arithmetic(self):
        buf = AudioBuffer(np.arange(16000) / 16000, 16000)
        out = cut_segment(buf, 2, 5, 0.02)
        assert np.array_equal(out.samples, buf.samples[640:1600])

    def test_adjacent_spans_concatenate(self):
        buf = AudioBuffer(np.random.default_rng(0).uniform(-1, 1, 16000), 16000)
        ab = cut_segment(buf, 3, 17, 0.02)
        a = cut_segment(buf, 3, 9, 0.02)
        b = cut_segment(buf, 9, 17, 0.02)
        assert np.array_equal(np.concatenate([a.samples, b.samples]), ab.samples)

    def test_partition_property(self):
        buf = AudioBuffer(np.random.default_rng(1).uniform(-1, 1, 8000), 16000)
        bounds = [0, 7, 13, 25]  # 25 frames * 0.02s = 0.5s = whole buffer
        pieces = [cut_segment(buf, a, b, 0.02).samples
                  for a, b in zip(bounds[:-1], bounds[1:])]
        assert np.array_equal(np.concatenate(pieces), buf.samples)

    def test_beyond_slack_raises(self):
        buf = AudioBuffer(np.zeros(1600), 16000)  # 0.1 s = 5 frames at 0.02
        cut_segment(buf, 0, 6, 0.02)  # one frame of slack is allowed
        with pytest.raises(SpanOutOfRangeError):
            cut_segment(buf, 0, 8, 0.02)

    def test_bad_span_raises(self):
        buf = AudioBuffer(np.zeros(1600), 16000)
        with pytest.raises(SpanOutOfRangeError):
            cut_segment(buf, 5, 5, 0.02)
