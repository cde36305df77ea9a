"""Alignment-path collapse, marginal path loss, and best-path decoding.

A frame posterior grid is a (T, V+1) row-stochastic array over an ordered
character alphabet with the blank symbol in the last column. The collapse
rule merges adjacent duplicate symbols and then deletes blanks, so a blank
is what separates a genuine double letter from a stretched one.

The loss of a target string is the negative log of the total probability
mass of every alignment path that collapses to it, computed with the
forward-backward recursion over the blank-interleaved target. Everything
runs in log space, so small path probabilities cannot underflow.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import LengthViolation

BLANK_CHAR = "_"

NEG_INF = float("-inf")


@dataclass
class PosteriorGrid:
    """Per-frame probabilities over alphabet + blank (blank is last)."""

    probs: np.ndarray  # (T, len(alphabet) + 1)
    alphabet: str

    def __post_init__(self):
        self.probs = np.asarray(self.probs, dtype=np.float64)
        if self.probs.ndim != 2 or self.probs.shape[1] != len(self.alphabet) + 1:
            raise ValueError(
                f"grid shape {self.probs.shape} does not match alphabet "
                f"of {len(self.alphabet)} symbols plus blank"
            )

    @property
    def num_frames(self) -> int:
        return self.probs.shape[0]

    @property
    def blank_index(self) -> int:
        return len(self.alphabet)

    def validate(self, tol: float = 1e-6) -> None:
        """Raise if any row is not a probability distribution."""
        if not np.all(np.isfinite(self.probs)):
            raise ValueError("grid contains non-finite entries")
        if np.any(self.probs < 0.0) or np.any(self.probs > 1.0):
            raise ValueError("grid entries outside [0, 1]")
        sums = self.probs.sum(axis=1)
        worst = float(np.max(np.abs(sums - 1.0))) if len(sums) else 0.0
        if worst > tol:
            raise ValueError(f"grid rows deviate from sum 1 by {worst:.3g}")


def grid_to_text(grid: PosteriorGrid) -> str:
    """Fixture dump: one frame per line, tab-separated probabilities."""
    lines = ["\t".join(repr(float(p)) for p in row) for row in grid.probs]
    return "\n".join(lines) + "\n"


def grid_from_text(text: str, alphabet: str) -> PosteriorGrid:
    rows = [
        [float(cell) for cell in line.split("\t")]
        for line in text.splitlines()
        if line.strip()
    ]
    return PosteriorGrid(np.array(rows, dtype=np.float64), alphabet)


def collapse(path: str, blank: str = BLANK_CHAR) -> str:
    """Merge adjacent duplicate symbols, then remove all blanks."""
    kept = []
    prev = None
    for ch in path:
        if ch != prev:
            kept.append(ch)
        prev = ch
    return "".join(ch for ch in kept if ch != blank)


def required_frames(target: str) -> int:
    """Frames needed to emit ``target``: its length plus one mandatory
    blank between each pair of adjacent repeated characters."""
    repeats = sum(1 for a, b in zip(target, target[1:]) if a == b)
    return len(target) + repeats


def _extended_target(target: str, alphabet: str, blank: int) -> np.ndarray:
    lookup = {ch: i for i, ch in enumerate(alphabet)}
    try:
        labels = [lookup[ch] for ch in target]
    except KeyError as exc:
        raise ValueError(f"target character {exc.args[0]!r} not in alphabet") from exc
    ext = np.full(2 * len(labels) + 1, blank, dtype=np.intp)
    ext[1::2] = labels
    return ext


def ctc_loss(grid: PosteriorGrid, target: str) -> tuple[float, np.ndarray]:
    """Loss and its gradient with respect to pre-softmax frame scores.

    Returns ``(-log P(target | grid), grad)`` where ``grad[t, k]`` is the
    derivative of the loss with respect to the logit that produced
    ``grid.probs[t, k]``: the posterior minus the normalized state
    occupancy summed over extended-target states carrying symbol ``k``.
    """
    if not target:
        raise ValueError("target must be non-empty for loss computation")
    probs = grid.probs
    T = probs.shape[0]
    blank = grid.blank_index
    ext = _extended_target(target, grid.alphabet, blank)
    S = len(ext)

    need = required_frames(target)
    if T < need:
        raise LengthViolation(
            f"target {target!r} needs at least {need} frames, grid has {T}"
        )

    with np.errstate(divide="ignore"):
        logp = np.log(probs)
    emit = logp[:, ext]  # (T, S)

    # A state may be entered from itself, its predecessor, or two back when
    # that hop does not skip a blank that separates equal labels.
    skip_ok = np.zeros(S, dtype=bool)
    skip_ok[2:] = (ext[2:] != blank) & (ext[2:] != ext[:-2])

    log_alpha = np.full((T, S), NEG_INF)
    log_alpha[0, 0] = emit[0, 0]
    if S > 1:
        log_alpha[0, 1] = emit[0, 1]
    for t in range(1, T):
        prev = log_alpha[t - 1]
        acc = prev.copy()
        acc[1:] = np.logaddexp(acc[1:], prev[:-1])
        acc[2:] = np.where(
            skip_ok[2:], np.logaddexp(acc[2:], prev[:-2]), acc[2:]
        )
        log_alpha[t] = emit[t] + acc

    if S > 1:
        log_total = np.logaddexp(log_alpha[T - 1, S - 1], log_alpha[T - 1, S - 2])
    else:
        log_total = log_alpha[T - 1, S - 1]
    if not np.isfinite(log_total):
        raise ValueError("target has zero path probability under this grid")

    # Suffix mass from each state, excluding the current frame's emission.
    log_beta = np.full((T, S), NEG_INF)
    log_beta[T - 1, S - 1] = 0.0
    if S > 1:
        log_beta[T - 1, S - 2] = 0.0
    for t in range(T - 2, -1, -1):
        nxt = log_beta[t + 1] + emit[t + 1]
        acc = nxt.copy()
        acc[:-1] = np.logaddexp(acc[:-1], nxt[1:])
        acc[:-2] = np.where(
            skip_ok[2:], np.logaddexp(acc[:-2], nxt[2:]), acc[:-2]
        )
        log_beta[t] = acc

    gamma = log_alpha + log_beta  # (T, S), log state occupancy (unnormalized)
    grad = probs.copy()
    for k in np.unique(ext):
        cols = gamma[:, ext == k]
        occupancy = np.logaddexp.reduce(cols, axis=1)
        grad[:, k] -= np.exp(occupancy - log_total)

    return float(-log_total), grad


def greedy_decode(grid: PosteriorGrid) -> tuple[str, str]:
    """Best-path decoding: collapse of the per-frame argmax path.

    Ties break toward the lowest alphabet index, with blank (last column)
    losing any tie. Returns ``(text, path)`` with the path rendered as one
    display character per frame, blank as ``_``.
    """
    idx = np.argmax(grid.probs, axis=1)
    symbols = grid.alphabet + BLANK_CHAR
    path = "".join(symbols[i] for i in idx)
    return collapse(path), path
