"""Lexical diversity measures: Div-n, TTR, MTLD, and vocabulary stats."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import EmptyInputError
from .textnorm import tokenize

MTLD_DEFAULT_THRESHOLD = 0.72


def div_n(candidate_set: Sequence[str], n: int) -> float:
    """Distinct n-grams over total n-gram tokens across a caption set.

    Captions shorter than ``n`` contribute no n-grams; a set with no
    n-grams at all scores 0.
    """
    if not candidate_set:
        raise EmptyInputError("empty caption set")
    if n < 1:
        raise ValueError("n must be >= 1")
    distinct = set()
    total = 0
    for caption in candidate_set:
        tokens = tokenize(caption)
        for i in range(len(tokens) - n + 1):
            distinct.add(tuple(tokens[i:i + n]))
            total += 1
    return len(distinct) / total if total else 0.0


def ttr(tokens: Sequence[str]) -> float:
    """Type-token ratio: distinct tokens over total tokens."""
    if not tokens:
        raise EmptyInputError("empty text")
    return len(set(tokens)) / len(tokens)


def _mtld_directional(tokens: Sequence[str], threshold: float) -> float:
    factors = 0.0
    types: set = set()
    length = 0
    for token in tokens:
        types.add(token)
        length += 1
        if len(types) / length < threshold:
            factors += 1.0
            types = set()
            length = 0
    if length:  # partial factor: how far the running TTR has fallen
        factors += (1.0 - len(types) / length) / (1.0 - threshold)
    if factors == 0.0:
        # TTR never dropped: the whole text is one (incomplete) factor
        return float(len(tokens))
    return len(tokens) / factors


def mtld(tokens: Sequence[str], ttr_threshold: float = MTLD_DEFAULT_THRESHOLD) -> float:
    """Measure of textual lexical diversity.

    Counts maximal subsequences ("factors") whose running type-token ratio
    stays at or above the threshold, adds a proportional partial factor for
    the remainder, and averages the token-per-factor value over the forward
    and reversed passes.
    """
    if not tokens:
        raise EmptyInputError("empty text")
    if not 0.0 < ttr_threshold < 1.0:
        raise ValueError("ttr_threshold must be in (0, 1)")
    forward = _mtld_directional(tokens, ttr_threshold)
    backward = _mtld_directional(list(reversed(tokens)), ttr_threshold)
    return (forward + backward) / 2.0


@dataclass(frozen=True)
class VocabStats:
    distinct: int            # distinct tokens over all captions
    distinct_filtered: int   # same, after stopword removal
    uniq_per_caption: float  # mean distinct tokens per caption
    words_per_caption: float

    def to_json(self) -> dict:
        return {
            "distinct": self.distinct,
            "distinct_filtered": self.distinct_filtered,
            "uniq_per_caption": self.uniq_per_caption,
            "words_per_caption": self.words_per_caption,
        }


def vocab_stats(captions: Sequence[str],
                stopwords: Optional[frozenset[str]] = None) -> VocabStats:
    """Vocabulary summary of a caption list.

    Per-caption means are computed on the raw tokenization; captions that
    tokenize to nothing still count (as zeros) in the means.
    """
    if not captions:
        raise EmptyInputError("empty caption list")
    stopwords = stopwords or frozenset()
    all_tokens: set = set()
    uniq_sum = 0
    token_sum = 0
    for caption in captions:
        tokens = tokenize(caption)
        all_tokens.update(tokens)
        uniq_sum += len(set(tokens))
        token_sum += len(tokens)
    filtered = {t for t in all_tokens if t not in stopwords}
    n = len(captions)
    return VocabStats(
        distinct=len(all_tokens),
        distinct_filtered=len(filtered),
        uniq_per_caption=uniq_sum / n,
        words_per_caption=token_sum / n,
    )
