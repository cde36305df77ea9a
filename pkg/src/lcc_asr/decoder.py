"""Prefix beam search over frame posteriors with word-level LM fusion.

The search tracks collapsed prefixes, not raw paths: per frame each kept
prefix is extended by blank, by a repeat of its last symbol, or by a new
symbol, and prefixes whose collapsed text coincides are merged by
log-sum-exp of their acoustic mass. Acoustic mass is split into a
blank-ending and a non-blank-ending component so that a repeated character
after a blank can be told apart from a stretched one.

The language model contributes at word boundaries: whenever a space (or
the end of the utterance) completes a word, the hypothesis gains
``alpha * log P(word | previous words)`` plus a flat per-word bonus
``beta``. Ranking uses the combined score throughout, and ties break
lexicographically so decoding is fully deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .ctc import PosteriorGrid
from .lm import NGramModel

NEG_INF = float("-inf")


@dataclass(frozen=True)
class DecoderConfig:
    beam_width: int = 3
    lm_weight: float = 0.8  # alpha
    word_bonus: float = 1.0  # beta
    lexicon_constrained: bool = False

    def __post_init__(self):
        if self.beam_width < 1:
            raise ValueError(f"beam_width must be >= 1, got {self.beam_width}")
        if self.lm_weight < 0:
            raise ValueError(f"lm_weight must be >= 0, got {self.lm_weight}")


class _Prefix:
    """Mutable per-prefix state while scanning frames."""

    __slots__ = ("blank_mass", "symbol_mass", "lm_score", "word_count", "context", "dead")

    def __init__(self, lm_score, word_count, context, dead=False):
        self.blank_mass = NEG_INF  # log mass of paths ending in blank
        self.symbol_mass = NEG_INF  # log mass of paths ending in the last symbol
        self.lm_score = lm_score
        self.word_count = word_count
        self.context = context
        self.dead = dead  # lexicon-constrained and completed an OOV word

    def acoustic(self) -> float:
        return np.logaddexp(self.blank_mass, self.symbol_mass)


def beam_search(
    grid: PosteriorGrid,
    model: Optional[NGramModel] = None,
    cfg: DecoderConfig = DecoderConfig(),
) -> list[tuple[str, float]]:
    """Ranked (text, combined log-score) hypotheses for a posterior grid.

    Combined score = acoustic log mass + alpha * LM log probability of the
    completed words + beta * word count. With ``model=None`` the LM terms
    vanish and the result is the pure acoustic prefix search.
    """
    probs = grid.probs
    T = probs.shape[0]
    alphabet = grid.alphabet
    blank = grid.blank_index
    with np.errstate(divide="ignore"):
        logp = np.log(probs)

    start_ctx = model.start_context() if model is not None else ()
    root = _Prefix(lm_score=0.0, word_count=0, context=start_ctx)
    root.blank_mass = 0.0  # empty path, probability 1
    beams: dict[str, _Prefix] = {"": root}

    def child(next_beams: dict[str, _Prefix], text: str, parent: _Prefix, ch: str | None):
        """Fetch/create the prefix for ``text``; ch is the appended symbol."""
        entry = next_beams.get(text)
        if entry is not None:
            return entry
        if ch == " " and model is not None:
            # Appending the space completes the word spelled since the
            # previous space (if any; consecutive spaces complete nothing).
            word = text[:-1].rpartition(" ")[2]
            if word:
                dead = parent.dead
                if cfg.lexicon_constrained and word not in model._vocab_set:
                    dead = True
                tok = model.map_token(word)
                entry = _Prefix(
                    parent.lm_score + model.logprob(tok, parent.context),
                    parent.word_count + 1,
                    model.extend_context(parent.context, tok),
                    dead,
                )
            else:
                entry = _Prefix(parent.lm_score, parent.word_count, parent.context, parent.dead)
        else:
            entry = _Prefix(parent.lm_score, parent.word_count, parent.context, parent.dead)
        next_beams[text] = entry
        return entry

    def running_score(item: tuple[str, _Prefix]) -> float:
        text, p = item
        if p.dead:
            return NEG_INF
        return p.acoustic() + cfg.lm_weight * p.lm_score + cfg.word_bonus * p.word_count

    for t in range(T):
        next_beams: dict[str, _Prefix] = {}
        for text, p in beams.items():
            total = p.acoustic()
            # Path stays on blank: collapsed text unchanged.
            blank_lp = logp[t, blank]
            if blank_lp > NEG_INF:
                same = child(next_beams, text, p, None)
                same.blank_mass = np.logaddexp(same.blank_mass, blank_lp + total)
            last = text[-1] if text else None
            for ci, ch in enumerate(alphabet):
                lp = logp[t, ci]
                if lp == NEG_INF:
                    continue
                if ch == last:
                    # Stretching the final symbol keeps the text; repeating
                    # it is only possible from the blank-ending mass.
                    same = child(next_beams, text, p, None)
                    same.symbol_mass = np.logaddexp(same.symbol_mass, lp + p.symbol_mass)
                    if p.blank_mass > NEG_INF:
                        ext = child(next_beams, text + ch, p, ch)
                        ext.symbol_mass = np.logaddexp(ext.symbol_mass, lp + p.blank_mass)
                else:
                    ext = child(next_beams, text + ch, p, ch)
                    ext.symbol_mass = np.logaddexp(ext.symbol_mass, lp + total)
        ranked = sorted(next_beams.items(), key=lambda kv: (-running_score(kv), kv[0]))
        beams = dict(ranked[: cfg.beam_width])

    results = []
    for text, p in beams.items():
        if p.dead:
            continue
        lm_score = p.lm_score
        words = p.word_count
        pending = text.rpartition(" ")[2]
        if pending and model is not None:
            if cfg.lexicon_constrained and pending not in model._vocab_set:
                continue
            lm_score += model.logprob(model.map_token(pending), p.context)
            words += 1
        elif pending:
            words += 1
        combined = p.acoustic() + cfg.lm_weight * lm_score + cfg.word_bonus * words
        results.append((text, float(combined)))
    results.sort(key=lambda r: (-r[1], r[0]))
    return results


def rescore(
    nbest: list[tuple[str, float]],
    model: NGramModel,
    lm_weight: float,
    word_bonus: float,
) -> list[tuple[str, float]]:
    """Stable re-sort of (text, acoustic score) candidates by
    ``acoustic + lm_weight * lm_logprob(text) + word_bonus * word count``."""
    from .lm import lm_logprob

    if not nbest:
        raise ValueError("n-best list must be non-empty")
    scored = [
        (text, acoustic + lm_weight * lm_logprob(model, text) + word_bonus * len(text.split()))
        for text, acoustic in nbest
    ]
    return sorted(scored, key=lambda r: -r[1])
