"""Waveform container, 16-bit PCM WAV I/O, framing arithmetic, seeded RNG.

Everything downstream trades in `Waveform` objects: float64 samples with a
nominal [-1, 1] range plus a sample rate.  Files on disk are always mono
16-bit PCM RIFF; quantization happens only at the file boundary.
"""

from __future__ import annotations

import wave
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

DEFAULT_SAMPLE_RATE = 16000
PCM_SCALE = 32768  # 16-bit full scale; quantization error is at most 2**-15


class AudioFormatError(ValueError):
    """Raised for WAV files that are not mono 16-bit PCM."""


@dataclass
class Waveform:
    samples: np.ndarray
    sample_rate: int = DEFAULT_SAMPLE_RATE

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1:
            raise ValueError(f"expected 1-D samples, got shape {self.samples.shape}")
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate

    def assert_finite(self, label: str = "waveform") -> "Waveform":
        if len(self.samples) and not np.all(np.isfinite(self.samples)):
            raise ValueError(f"{label} contains non-finite samples")
        return self


@dataclass(frozen=True)
class FrameSpec:
    """Analysis framing: window length and hop, both in samples."""

    frame_len: int = 40
    hop: int = 10

    def __post_init__(self):
        if not (0 < self.hop <= self.frame_len):
            raise ValueError(f"need 0 < hop <= frame_len, got {self}")


def frame_count(n_samples: int, spec: FrameSpec) -> int:
    """Number of complete frames in the unpadded interior of a signal.

    Zero when the signal is shorter than one frame; the padded count used by
    the encoder is `padded_frame_count`.
    """
    if n_samples < 0:
        raise ValueError("n_samples must be >= 0")
    if n_samples < spec.frame_len:
        return 0
    return (n_samples - spec.frame_len) // spec.hop + 1


def padded_frame_count(n_samples: int, spec: FrameSpec) -> int:
    """Frame count under the encoder's left-pad-to-hop-multiple policy."""
    if n_samples < 0:
        raise ValueError("n_samples must be >= 0")
    return -(-n_samples // spec.hop)


def read_wav(path) -> Waveform:
    """Read a mono 16-bit PCM WAV file into a float64 Waveform."""
    path = Path(path)
    try:
        with wave.open(str(path), "rb") as wf:
            n_channels = wf.getnchannels()
            sampwidth = wf.getsampwidth()
            comptype = wf.getcomptype()
            rate = wf.getframerate()
            n_frames = wf.getnframes()
            raw = wf.readframes(n_frames)
    except FileNotFoundError:
        raise
    except wave.Error as exc:
        raise AudioFormatError(f"{path}: not a readable WAV file ({exc})") from exc
    if comptype != "NONE":
        raise AudioFormatError(f"{path}: unsupported compression type {comptype!r}")
    if n_channels != 1:
        raise AudioFormatError(f"{path}: channel count != 1 (got {n_channels})")
    if sampwidth != 2:
        raise AudioFormatError(f"{path}: not 16-bit PCM (sample width {sampwidth})")
    ints = np.frombuffer(raw, dtype="<i2")
    return Waveform(ints.astype(np.float64) / PCM_SCALE, rate)


def write_wav(path, w: Waveform) -> None:
    """Write a Waveform as mono 16-bit PCM; samples are rounded then clipped."""
    w.assert_finite("write_wav input")
    ints = np.clip(np.round(w.samples * PCM_SCALE), -PCM_SCALE, PCM_SCALE - 1)
    data = ints.astype("<i2").tobytes()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(w.sample_rate)
        wf.writeframes(data)


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """Deterministic generator for (seed, stream...) key tuples.

    Philox is counter-based and produces the same stream on every platform,
    so dataset synthesis is bit-reproducible.  Workers must each derive
    their own generator via a distinct stream index, never share one.
    """
    return np.random.Generator(np.random.Philox(key=np.random.SeedSequence((seed, *stream))))


@dataclass
class Rng:
    """Named wrapper around the repo-wide Philox generator."""

    seed: int
    stream: tuple = field(default_factory=tuple)
    algorithm: str = "philox4x64"

    def generator(self) -> np.random.Generator:
        return make_rng(self.seed, *self.stream)
