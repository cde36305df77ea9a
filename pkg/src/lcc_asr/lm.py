"""Word n-gram language model with add-k smoothing and context backoff.

Probabilities follow

    P(w | context) = (count(context + w) + k) / (count(context) + k * (|V| + 1))

where ``count(context)`` is the number of times the context was followed by
an in-vocabulary word and the ``+1`` reserves mass for a single unknown
token. A context that was never followed by any word backs off to its
shortest suffix that was. Summed over the vocabulary plus the unknown
token, every conditional distribution is exactly normalized.

The sentence-end marker is scored with the same formula as an additional
event, so the probability of a whole sentence (used by ``lm_logprob`` and
n-best rescoring) always includes a termination term.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from math import log
from pathlib import Path
from typing import Iterable, Sequence

from .errors import CorruptCheckpoint, EmptyCorpus, VersionMismatch

START = "<s>"
END = "</s>"
UNK = "<unk>"

LM_FORMAT = "lcc-asr-ngram"
LM_VERSION = 1

Context = tuple[str, ...]


@dataclass
class NGramModel:
    """Immutable after build; safe to share across concurrent decodes."""

    order: int
    k_add: float
    vocab: tuple[str, ...]
    counts: dict[int, dict[Context, int]]
    _vocab_set: frozenset = field(init=False, repr=False)
    _continuations: dict[Context, int] = field(init=False, repr=False)

    def __post_init__(self):
        self._vocab_set = frozenset(self.vocab)
        cont: Counter = Counter()
        for k, grams in self.counts.items():
            for gram, c in grams.items():
                if gram[-1] in self._vocab_set:
                    cont[gram[:-1]] += c
        self._continuations = dict(cont)

    def start_context(self) -> Context:
        return (START,) * (self.order - 1)

    def extend_context(self, context: Context, token: str) -> Context:
        if self.order == 1:
            return ()
        return (context + (token,))[-(self.order - 1):]

    def map_token(self, word: str) -> str:
        return word if word in self._vocab_set else UNK

    def prob(self, token: str, context: Context = ()) -> float:
        """Smoothed P(token | context); token may be a word, UNK, or END."""
        ctx = tuple(context)
        if self.order == 1:
            ctx = ()
        else:
            ctx = ctx[-(self.order - 1):]
        while ctx and self._continuations.get(ctx, 0) == 0:
            ctx = ctx[1:]
        denom = self._continuations.get(ctx, 0) + self.k_add * (len(self.vocab) + 1)
        gram_counts = self.counts.get(len(ctx) + 1, {})
        num = gram_counts.get(ctx + (token,), 0) + self.k_add
        return num / denom

    def logprob(self, token: str, context: Context = ()) -> float:
        p = self.prob(token, context)
        return log(p) if p > 0.0 else float("-inf")

    def contexts(self) -> list[Context]:
        """Every stored context: counted grams shorter than the order,
        prefixes of counted k-grams, and the empty context."""
        seen = {(): None}
        for grams in self.counts.values():
            for gram in grams:
                seen.setdefault(gram[:-1], None)
                if len(gram) < self.order:
                    seen.setdefault(gram, None)
        return list(seen)

    def to_bytes(self) -> bytes:
        payload = {
            "format": LM_FORMAT,
            "version": LM_VERSION,
            "order": self.order,
            "k_add": self.k_add,
            "vocab": list(self.vocab),
            "counts": {
                str(k): sorted([list(g), c] for g, c in grams.items())
                for k, grams in sorted(self.counts.items())
            },
        }
        return json.dumps(payload, sort_keys=True, separators=(",", ":")).encode()


def tokenize(line: str) -> list[str]:
    """Whitespace-split uppercased words, the LM's training convention."""
    return line.upper().split()


def build_lm(corpus: Iterable[str], order: int = 3, k_add: float = 1.0) -> NGramModel:
    """Count all k-grams (k <= order) of the start/end-padded corpus lines."""
    if order < 1:
        raise ValueError(f"order must be >= 1, got {order}")
    if k_add < 0:
        raise ValueError(f"k_add must be >= 0, got {k_add}")
    sentences = [tokenize(line) for line in corpus]
    sentences = [s for s in sentences if s]
    if not sentences:
        raise EmptyCorpus("no non-empty lines in corpus")
    vocab = tuple(sorted({w for s in sentences for w in s}))
    counts: dict[int, dict[Context, int]] = {k: {} for k in range(1, order + 1)}
    for s in sentences:
        padded = [START] * (order - 1) + s + [END]
        for k in range(1, order + 1):
            grams = counts[k]
            for i in range(len(padded) - k + 1):
                gram = tuple(padded[i : i + k])
                grams[gram] = grams.get(gram, 0) + 1
    return NGramModel(order=order, k_add=k_add, vocab=vocab, counts=counts)


def lm_logprob(model: NGramModel, sentence: str | Sequence[str]) -> float:
    """Log probability of a sentence, including the end-of-sentence term.

    Unknown words are scored as the unknown token. An empty sentence is
    just ``log P(end | start)``.
    """
    words = tokenize(sentence) if isinstance(sentence, str) else [
        w.upper() for w in sentence
    ]
    ctx = model.start_context()
    total = 0.0
    for w in words:
        tok = model.map_token(w)
        total += model.logprob(tok, ctx)
        ctx = model.extend_context(ctx, tok)
    return total + model.logprob(END, ctx)


def lm_from_bytes(data: bytes) -> NGramModel:
    try:
        payload = json.loads(data.decode())
        fmt = payload["format"]
        version = payload["version"]
    except (ValueError, KeyError, UnicodeDecodeError) as exc:
        raise CorruptCheckpoint(f"unreadable LM file: {exc}") from exc
    if fmt != LM_FORMAT or version != LM_VERSION:
        raise VersionMismatch(
            f"expected {LM_FORMAT} v{LM_VERSION}, got {fmt!r} v{version!r}"
        )
    try:
        counts = {
            int(k): {tuple(gram): int(c) for gram, c in entries}
            for k, entries in payload["counts"].items()
        }
        model = NGramModel(
            order=int(payload["order"]),
            k_add=float(payload["k_add"]),
            vocab=tuple(payload["vocab"]),
            counts=counts,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptCheckpoint(f"malformed LM payload: {exc}") from exc
    return model


def save_lm(model: NGramModel, path: str | Path) -> None:
    Path(path).write_bytes(model.to_bytes())


def load_lm(path: str | Path) -> NGramModel:
    return lm_from_bytes(Path(path).read_bytes())
