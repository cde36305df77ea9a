"""WAV ingestion and the log-magnitude time-frequency frontend.

Audio enters as 16-bit PCM WAV, is normalized to [-1, 1] floats, and is
turned into a log-magnitude spectrogram: Hann-windowed frames, rFFT,
magnitude floored at ``LOG_FLOOR`` before the log so every cell stays
finite.
"""

from __future__ import annotations

import wave
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import BinaryIO, Union

import numpy as np

from .errors import ClipTooShort, CorruptHeader, EmptyAudio, UnsupportedFormat

TRAINING_SAMPLE_RATE = 16_000
LOG_FLOOR = 1e-10

# Default framing: 32 ms FFT window carrying a 25 ms Hann taper, advanced
# 10 ms per frame at 16 kHz.
DEFAULT_WINDOW_LEN = 512
DEFAULT_WIN_LENGTH = 400
DEFAULT_FRAME_HOP = 160

WavSource = Union[str, Path, BinaryIO]


@dataclass
class AudioClip:
    """Mono waveform: float64 amplitudes in [-1, 1] plus the sample rate."""

    samples: np.ndarray
    sample_rate: int
    id: str = ""

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


@dataclass
class Spectrogram:
    """Log-magnitude time-frequency map, one row per analysis frame."""

    frames: np.ndarray  # (T, window_len // 2 + 1)
    frame_hop: int
    window_len: int
    sample_rate: int
    win_length: int = 0

    @property
    def num_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def num_bins(self) -> int:
        return self.frames.shape[1]


def load_wav(source: WavSource, clip_id: str | None = None) -> AudioClip:
    """Read a 16-bit PCM WAV file (path or binary file object).

    Stereo files are downmixed by averaging the channels. Samples are
    normalized to [-1, 1] by dividing by 32768. A sample rate other than
    16 kHz is accepted with a warning, since models are trained at one rate.
    """
    if isinstance(source, (str, Path)):
        if clip_id is None:
            clip_id = Path(source).stem
        handle: WavSource = str(source)
    else:
        handle = source
    try:
        with wave.open(handle, "rb") as wf:
            comptype = wf.getcomptype()
            sampwidth = wf.getsampwidth()
            channels = wf.getnchannels()
            rate = wf.getframerate()
            nframes = wf.getnframes()
            raw = wf.readframes(nframes)
    except wave.Error as exc:
        if "unknown format" in str(exc):
            raise UnsupportedFormat(f"not a PCM WAV file: {exc}") from exc
        raise CorruptHeader(str(exc)) from exc
    except EOFError as exc:
        raise CorruptHeader("truncated WAV header") from exc

    if comptype != "NONE":
        raise UnsupportedFormat(f"compressed WAV ({comptype}) is not supported")
    if sampwidth != 2:
        raise UnsupportedFormat(f"expected 16-bit PCM, got {8 * sampwidth}-bit")
    if channels < 1:
        raise CorruptHeader("header declares zero channels")
    if rate <= 0:
        raise CorruptHeader(f"invalid sample rate {rate}")

    data = np.frombuffer(raw, dtype="<i2")
    if channels > 1:
        data = data[: (len(data) // channels) * channels].reshape(-1, channels)
        samples = data.mean(axis=1) / 32768.0
    else:
        samples = data.astype(np.float64) / 32768.0
    if samples.size == 0:
        raise EmptyAudio("WAV file contains no samples")

    if rate != TRAINING_SAMPLE_RATE:
        warnings.warn(
            f"sample rate {rate} Hz differs from the {TRAINING_SAMPLE_RATE} Hz "
            "rate the models are trained at",
            stacklevel=2,
        )
    return AudioClip(samples=samples, sample_rate=rate, id=clip_id or "")


def save_wav(clip: AudioClip, target: WavSource) -> None:
    """Write a clip as mono 16-bit PCM WAV."""
    ints = np.clip(np.rint(clip.samples * 32768.0), -32768, 32767).astype("<i2")
    handle = str(target) if isinstance(target, (str, Path)) else target
    with wave.open(handle, "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(clip.sample_rate)
        wf.writeframes(ints.tobytes())


def spectrogram(
    clip: AudioClip,
    window_len: int = DEFAULT_WINDOW_LEN,
    frame_hop: int = DEFAULT_FRAME_HOP,
    win_length: int | None = None,
) -> Spectrogram:
    """Log-magnitude spectrogram of ``clip``.

    ``window_len`` is the FFT size (power of two) and the number of samples
    each frame consumes; ``win_length`` is the Hann taper length, zero-padded
    up to ``window_len`` (defaults to the full window). Frame count is
    ``1 + (len(samples) - window_len) // frame_hop``; trailing samples that
    do not fill a window are dropped.
    """
    n = len(clip.samples)
    if window_len < 2 or window_len & (window_len - 1):
        raise ValueError(f"window_len must be a power of two, got {window_len}")
    if frame_hop < 1:
        raise ValueError(f"frame_hop must be >= 1, got {frame_hop}")
    if win_length is None:
        win_length = window_len
    if not 1 <= win_length <= window_len:
        raise ValueError(f"win_length must be in [1, {window_len}], got {win_length}")
    if n < window_len:
        raise ClipTooShort(f"clip has {n} samples, window needs {window_len}")

    window = np.zeros(window_len)
    window[:win_length] = np.hanning(win_length)

    num_frames = 1 + (n - window_len) // frame_hop
    idx = np.arange(num_frames)[:, None] * frame_hop + np.arange(window_len)[None, :]
    frames = clip.samples[idx] * window
    mags = np.abs(np.fft.rfft(frames, axis=1))
    cells = np.log(np.maximum(mags, LOG_FLOOR))
    return Spectrogram(
        frames=cells,
        frame_hop=frame_hop,
        window_len=window_len,
        sample_rate=clip.sample_rate,
        win_length=win_length,
    )


def normalize_features(spec: Spectrogram) -> Spectrogram:
    """Scale each frequency bin to zero mean, unit standard deviation.

    Population statistics across frames; bins with zero variance come out
    all-zero. Applying the operation twice changes nothing.
    """
    x = spec.frames
    mean = x.mean(axis=0)
    std = x.std(axis=0)
    out = np.where(std > 0.0, (x - mean) / np.where(std > 0.0, std, 1.0), 0.0)
    return Spectrogram(
        frames=out,
        frame_hop=spec.frame_hop,
        window_len=spec.window_len,
        sample_rate=spec.sample_rate,
        win_length=spec.win_length,
    )
