"""Deterministic waveform perturbations for enlarging a training set.

Four transform kinds, each reproducible from (clip, spec) alone:

* ``additive_noise`` — seeded uniform white noise scaled to an exact
  signal-to-noise ratio in dB (measured between the clean signal and the
  injected noise, before mixing).
* ``gain`` — amplitude scaling by ``10 ** (dB / 20)``.
* ``time_shift`` — circular rotation by a sample count.
* ``speed`` — linear-interpolation resample to ``round(len / ratio)``
  samples (no pitch preservation).

Outputs are always clipped to [-1, 1].
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .audio import AudioClip
from .errors import SpecOutOfRange

KINDS = ("additive_noise", "gain", "time_shift", "speed")


@dataclass(frozen=True)
class AugmentSpec:
    """One transform: kind, kind-specific magnitude, and the noise seed."""

    kind: str
    magnitude: float
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SpecOutOfRange(f"unknown augmentation kind {self.kind!r}")
        m = self.magnitude
        if self.kind == "additive_noise" and not 0.0 <= m <= 60.0:
            raise SpecOutOfRange(f"SNR must be in [0, 60] dB, got {m}")
        if self.kind == "gain" and not abs(m) <= 20.0:
            raise SpecOutOfRange(f"|gain| must be <= 20 dB, got {m}")
        if self.kind == "speed" and not 0.8 <= m <= 1.2:
            raise SpecOutOfRange(f"speed ratio must be in [0.8, 1.2], got {m}")


def augment(clip: AudioClip, spec: AugmentSpec) -> AudioClip:
    """Apply one AugmentSpec; bit-identical output for identical inputs."""
    x = np.asarray(clip.samples, dtype=np.float64)
    if spec.kind == "additive_noise":
        out = _add_noise(x, spec.magnitude, spec.seed)
    elif spec.kind == "gain":
        out = x * 10.0 ** (spec.magnitude / 20.0)
    elif spec.kind == "time_shift":
        shift = int(round(spec.magnitude))
        if abs(shift) >= len(x):
            raise SpecOutOfRange(
                f"|shift| must be < clip length {len(x)}, got {shift}"
            )
        out = np.roll(x, shift)
    elif spec.kind == "speed":
        out = _resample(x, spec.magnitude)
    else:  # pragma: no cover - rejected by AugmentSpec
        raise SpecOutOfRange(spec.kind)
    return replace(clip, samples=np.clip(out, -1.0, 1.0))


def _add_noise(x: np.ndarray, snr_db: float, seed: int) -> np.ndarray:
    noise = np.random.default_rng(seed).uniform(-1.0, 1.0, len(x))
    signal_power = float(np.mean(x**2))
    if signal_power == 0.0:
        return x.copy()  # SNR undefined for silence; leave it alone
    target_noise_power = signal_power / 10.0 ** (snr_db / 10.0)
    noise *= np.sqrt(target_noise_power / np.mean(noise**2))
    return x + noise


def _resample(x: np.ndarray, ratio: float) -> np.ndarray:
    new_len = int(round(len(x) / ratio))
    if new_len < 2:
        raise SpecOutOfRange(f"clip too short to resample at ratio {ratio}")
    positions = np.linspace(0.0, len(x) - 1.0, new_len)
    return np.interp(positions, np.arange(len(x)), x)


def expand_dataset(
    clips: list[AudioClip], specs: list[AugmentSpec]
) -> list[tuple[AudioClip, str | None]]:
    """Originals plus one perturbed copy per (clip, spec) pair.

    Returns ``len(clips) * (1 + len(specs))`` entries. Originals carry
    parent id ``None``; derived clips carry their parent's id and get a
    ``#augN`` id suffix so they can be regenerated from (parent, spec).
    """
    if not clips:
        raise ValueError("expand_dataset needs at least one clip")
    out: list[tuple[AudioClip, str | None]] = []
    for clip in clips:
        out.append((clip, None))
        for j, spec in enumerate(specs):
            derived = augment(clip, spec)
            out.append((replace(derived, id=f"{clip.id}#aug{j}"), clip.id))
    return out
