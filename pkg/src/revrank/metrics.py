"""Corpus overlap metrics: BLEU, NIST, ROUGE-L, CIDEr, mBLEU.

Each metric reports a corpus value plus per-item values, and (for BLEU and
NIST) exposes per-item sufficient statistics so the significance tests can
recompute corpus scores on resampled subsets without re-tokenizing.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .errors import EmptyCorpusError, MissingReferencesError
from .textnorm import tokenize

# NIST brevity exponent: penalty is 0.5 when the candidate/reference length
# ratio is 2/3.
_NIST_BETA = math.log(0.5) / math.log(1.5) ** 2

ROUGE_BETA = 1.2
CIDER_SIGMA = 6.0


@dataclass(frozen=True)
class CorpusItem:
    item_id: str
    candidate: Tuple[str, ...]
    references: Tuple[Tuple[str, ...], ...]


@dataclass(frozen=True)
class TokenizedCorpus:
    """Aligned candidate/reference token lists; one entry per item."""

    items: Tuple[CorpusItem, ...]

    def __post_init__(self):
        if not self.items:
            raise EmptyCorpusError("metric corpus is empty")
        for item in self.items:
            if not item.references:
                raise MissingReferencesError(f"item {item.item_id!r} has no references")

    def __len__(self) -> int:
        return len(self.items)

    @classmethod
    def from_text(cls, hypotheses: Mapping[str, str],
                  references: Mapping[str, Sequence[str]]) -> "TokenizedCorpus":
        """Tokenize raw strings; candidates without references raise."""
        items = []
        for item_id, hyp in hypotheses.items():
            refs = references.get(item_id)
            if not refs:
                raise MissingReferencesError(f"no references for {item_id!r}")
            items.append(CorpusItem(
                item_id=item_id,
                candidate=tuple(tokenize(hyp)),
                references=tuple(tuple(tokenize(r)) for r in refs),
            ))
        return cls(tuple(items))


@dataclass(frozen=True)
class MetricReport:
    name: str
    corpus_value: float
    per_item: Optional[Tuple[Tuple[str, float], ...]] = None
    params: Mapping[str, object] = field(default_factory=dict)

    def to_json(self) -> dict:
        obj = {"name": self.name, "corpus_value": self.corpus_value,
               "params": dict(self.params)}
        if self.per_item is not None:
            obj["per_item"] = [{"id": i, "value": v} for i, v in self.per_item]
        return obj


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


# --------------------------------------------------------------------------
# BLEU
# --------------------------------------------------------------------------

def _closest_ref_len(cand_len: int, ref_lens: Sequence[int]) -> int:
    # ties broken toward the shorter reference
    return min(ref_lens, key=lambda r: (abs(r - cand_len), r))


def bleu_item_stats(item: CorpusItem, max_n: int) -> List[int]:
    """[match_1..match_N, total_1..total_N, cand_len, closest_ref_len]."""
    matches, totals = [], []
    for n in range(1, max_n + 1):
        cand = _ngrams(item.candidate, n)
        total = sum(cand.values())
        match = 0
        if total:
            clip = Counter()
            for ref in item.references:
                ref_counts = _ngrams(ref, n)
                for gram in cand:
                    clip[gram] = max(clip[gram], ref_counts.get(gram, 0))
            match = sum(min(count, clip[gram]) for gram, count in cand.items())
        matches.append(match)
        totals.append(total)
    cand_len = len(item.candidate)
    ref_len = _closest_ref_len(cand_len, [len(r) for r in item.references])
    return matches + totals + [cand_len, ref_len]


def bleu_from_sums(sums: np.ndarray, max_n: int) -> np.ndarray:
    """Corpus BLEU from summed stats; works on one row or a (k, d) batch."""
    sums = np.atleast_2d(np.asarray(sums, dtype=np.float64))
    matches = sums[:, :max_n]
    totals = sums[:, max_n:2 * max_n]
    cand_len = sums[:, 2 * max_n]
    ref_len = sums[:, 2 * max_n + 1]
    with np.errstate(divide="ignore", invalid="ignore"):
        precisions = np.where(totals > 0, matches / np.maximum(totals, 1), 0.0)
        log_sum = np.where(
            (precisions > 0).all(axis=1),
            np.log(np.maximum(precisions, 1e-300)).sum(axis=1) / max_n,
            -np.inf,
        )
        ratio = np.where(cand_len > 0, ref_len / np.maximum(cand_len, 1), np.inf)
        bp = np.where(cand_len >= ref_len, 1.0, np.exp(1.0 - ratio))
    scores = np.where(np.isfinite(log_sum), np.exp(log_sum) * bp, 0.0)
    scores = np.where(cand_len > 0, scores, 0.0)
    return scores


def sentence_bleu(candidate: Sequence[str], references: Sequence[Sequence[str]],
                  max_n: int = 4) -> float:
    """Per-sentence BLEU with add-one smoothing on the n>1 precisions.

    The unigram precision stays unsmoothed so disjoint sentences score 0.
    """
    item = CorpusItem("", tuple(candidate), tuple(tuple(r) for r in references))
    stats = bleu_item_stats(item, max_n)
    matches, totals = stats[:max_n], stats[max_n:2 * max_n]
    cand_len, ref_len = stats[2 * max_n], stats[2 * max_n + 1]
    if cand_len == 0 or totals[0] == 0 or matches[0] == 0:
        return 0.0
    log_sum = math.log(matches[0] / totals[0])
    for n in range(1, max_n):
        log_sum += math.log((matches[n] + 1.0) / (totals[n] + 1.0))
    bp = 1.0 if cand_len >= ref_len else math.exp(1.0 - ref_len / cand_len)
    return math.exp(log_sum / max_n) * bp


def bleu(corpus: TokenizedCorpus, max_n: int = 4) -> MetricReport:
    """Corpus BLEU-N: clipped modified precisions, geometric mean, brevity.

    Per-item values use the smoothed sentence score (they feed the paired
    significance tests); the corpus value is unsmoothed.
    """
    if not 1 <= max_n:
        raise ValueError("max_n must be >= 1")
    stats = np.array([bleu_item_stats(item, max_n) for item in corpus.items],
                     dtype=np.int64)
    corpus_value = float(bleu_from_sums(stats.sum(axis=0), max_n)[0])
    per_item = tuple(
        (item.item_id, sentence_bleu(item.candidate, item.references, max_n))
        for item in corpus.items
    )
    return MetricReport("bleu", corpus_value, per_item,
                        params={"max_n": max_n, "per_item_smoothing": "add-one n>1",
                                "ref_len": "closest, ties shorter"})


# --------------------------------------------------------------------------
# NIST
# --------------------------------------------------------------------------

def nist_info_weights(corpus: TokenizedCorpus, max_n: int) -> Dict[tuple, float]:
    """Information weights from reference n-gram statistics.

    info(w1..wn) = log2(count(w1..wn-1) / count(w1..wn)), with the empty
    prefix count equal to the total reference token count.
    """
    counts: Counter = Counter()
    total_tokens = 0
    for item in corpus.items:
        for ref in item.references:
            total_tokens += len(ref)
            for n in range(1, max_n + 1):
                counts.update(_ngrams(ref, n))
    info: Dict[tuple, float] = {}
    for gram, count in counts.items():
        prefix = gram[:-1]
        prefix_count = total_tokens if not prefix else counts[prefix]
        if prefix_count > 0 and count > 0:
            info[gram] = math.log2(prefix_count / count)
    return info


def nist_item_stats(item: CorpusItem, info: Mapping[tuple, float],
                    max_n: int) -> List[float]:
    """[info_sum_1..N, total_1..N, cand_len, mean_ref_len]."""
    info_sums, totals = [], []
    for n in range(1, max_n + 1):
        cand = _ngrams(item.candidate, n)
        total = sum(cand.values())
        weighted = 0.0
        if total:
            clip = Counter()
            for ref in item.references:
                ref_counts = _ngrams(ref, n)
                for gram in cand:
                    clip[gram] = max(clip[gram], ref_counts.get(gram, 0))
            for gram, count in cand.items():
                matched = min(count, clip[gram])
                if matched:
                    weighted += matched * info.get(gram, 0.0)
        info_sums.append(weighted)
        totals.append(float(total))
    mean_ref_len = sum(len(r) for r in item.references) / len(item.references)
    return info_sums + totals + [float(len(item.candidate)), mean_ref_len]


def nist_from_sums(sums: np.ndarray, max_n: int) -> np.ndarray:
    sums = np.atleast_2d(np.asarray(sums, dtype=np.float64))
    info_sums = sums[:, :max_n]
    totals = sums[:, max_n:2 * max_n]
    cand_len = sums[:, 2 * max_n]
    ref_len = sums[:, 2 * max_n + 1]
    score = np.where(totals > 0, info_sums / np.maximum(totals, 1e-300), 0.0).sum(axis=1)
    ratio = np.minimum(1.0, np.where(ref_len > 0, cand_len / np.maximum(ref_len, 1e-300), 0.0))
    with np.errstate(divide="ignore"):
        log_ratio = np.where(ratio > 0, np.log(np.maximum(ratio, 1e-300)), -np.inf)
    brevity = np.where(ratio > 0, np.exp(_NIST_BETA * np.square(log_ratio)), 0.0)
    return score * brevity


def nist(corpus: TokenizedCorpus, max_n: int = 4) -> MetricReport:
    """NIST score: information-weighted co-occurrence with NIST brevity."""
    info = nist_info_weights(corpus, max_n)
    stats = np.array([nist_item_stats(item, info, max_n) for item in corpus.items],
                     dtype=np.float64)
    corpus_value = float(nist_from_sums(stats.sum(axis=0), max_n)[0])
    per_item = tuple(
        (item.item_id, float(nist_from_sums(stats[i], max_n)[0]))
        for i, item in enumerate(corpus.items)
    )
    return MetricReport("nist", corpus_value, per_item,
                        params={"max_n": max_n, "info_weights": "reference-derived"})


# --------------------------------------------------------------------------
# ROUGE-L
# --------------------------------------------------------------------------

def _lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for i in range(1, len(a) + 1):
        cur = [0] * (len(b) + 1)
        ai = a[i - 1]
        for j in range(1, len(b) + 1):
            if ai == b[j - 1]:
                cur[j] = prev[j - 1] + 1
            else:
                cur[j] = cur[j - 1] if cur[j - 1] >= prev[j] else prev[j]
        prev = cur
    return prev[len(b)]


def rouge_l_item(candidate: Sequence[str], references: Sequence[Sequence[str]],
                 beta: float = ROUGE_BETA) -> float:
    """LCS F-measure with max precision/recall over the references."""
    prec, rec = 0.0, 0.0
    for ref in references:
        lcs = _lcs_length(candidate, ref)
        if candidate:
            prec = max(prec, lcs / len(candidate))
        if ref:
            rec = max(rec, lcs / len(ref))
    denom = rec + beta * beta * prec
    if denom == 0.0:
        return 0.0
    return (1 + beta * beta) * prec * rec / denom


def rouge_l(corpus: TokenizedCorpus, beta: float = ROUGE_BETA) -> MetricReport:
    per_item = tuple(
        (item.item_id, rouge_l_item(item.candidate, item.references, beta))
        for item in corpus.items
    )
    corpus_value = sum(v for _, v in per_item) / len(per_item)
    return MetricReport("rouge_l", corpus_value, per_item, params={"beta": beta})


# --------------------------------------------------------------------------
# CIDEr
# --------------------------------------------------------------------------

def _tfidf_vector(counts: Counter, doc_freq: Mapping[tuple, int],
                  n_items: int) -> tuple[dict, float]:
    log_n = math.log(n_items)
    vec = {}
    norm_sq = 0.0
    for gram, count in counts.items():
        weight = count * (log_n - math.log(max(1.0, doc_freq.get(gram, 0))))
        vec[gram] = weight
        norm_sq += weight * weight
    return vec, math.sqrt(norm_sq)


def cider(corpus: TokenizedCorpus, max_n: int = 4,
          sigma: float = CIDER_SIGMA) -> MetricReport:
    """Consensus score: mean cosine of TF-IDF n-gram vectors (n = 1..max_n)
    against each reference, under a Gaussian length penalty, scaled by 10.

    Document frequencies come from this corpus's own reference sets, so at
    least two items are required for the IDF to distinguish anything.
    """
    if len(corpus) < 2:
        raise EmptyCorpusError("cider needs at least 2 items for IDF")
    doc_freq: list[Counter] = [Counter() for _ in range(max_n)]
    for item in corpus.items:
        for n in range(1, max_n + 1):
            seen = set()
            for ref in item.references:
                seen.update(_ngrams(ref, n).keys())
            doc_freq[n - 1].update(seen)
    n_items = len(corpus)

    per_item = []
    for item in corpus.items:
        acc = 0.0
        for n in range(1, max_n + 1):
            cand_vec, cand_norm = _tfidf_vector(
                _ngrams(item.candidate, n), doc_freq[n - 1], n_items)
            ref_acc = 0.0
            for ref in item.references:
                ref_vec, ref_norm = _tfidf_vector(
                    _ngrams(ref, n), doc_freq[n - 1], n_items)
                if cand_norm == 0.0 or ref_norm == 0.0:
                    continue
                dot = sum(w * ref_vec[g] for g, w in cand_vec.items() if g in ref_vec)
                delta = len(item.candidate) - len(ref)
                penalty = math.exp(-(delta * delta) / (2.0 * sigma * sigma))
                ref_acc += (dot / (cand_norm * ref_norm)) * penalty
            acc += ref_acc / len(item.references)
        per_item.append((item.item_id, 10.0 * acc / max_n))
    corpus_value = sum(v for _, v in per_item) / len(per_item)
    return MetricReport("cider", corpus_value, tuple(per_item),
                        params={"max_n": max_n, "sigma": sigma,
                                "idf": "evaluation references"})


# --------------------------------------------------------------------------
# mBLEU (diversity-flavoured: candidate(s) vs. the human references)
# --------------------------------------------------------------------------

def mbleu(candidate_sets: Mapping[str, Sequence[str]],
          references: Mapping[str, Sequence[str]],
          mode: str = "best5") -> MetricReport:
    """Mean BLEU-4 of selected candidates against the human references.

    ``best5`` scores up to the first five candidates per image, ``bestbeam``
    only the first.  Lower values indicate more diverse captions.
    """
    if mode not in ("best5", "bestbeam"):
        raise ValueError(f"unknown mbleu mode {mode!r}")
    take = 5 if mode == "best5" else 1
    per_item = []
    for image_id, candidates in candidate_sets.items():
        refs = references.get(image_id)
        if not refs:
            raise MissingReferencesError(f"no references for {image_id!r}")
        ref_tokens = [tokenize(r) for r in refs]
        selected = list(candidates)[:take]
        if not selected:
            raise EmptyCorpusError(f"no candidates for {image_id!r}")
        scores = [sentence_bleu(tokenize(c), ref_tokens, 4) for c in selected]
        per_item.append((image_id, sum(scores) / len(scores)))
    if not per_item:
        raise EmptyCorpusError("mbleu got no images")
    corpus_value = sum(v for _, v in per_item) / len(per_item)
    return MetricReport("mbleu", corpus_value, tuple(per_item), params={"mode": mode})
