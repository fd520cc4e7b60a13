"""Sources for the three revision inputs.

* candidate prior: mean (or product) of per-token LM probabilities,
* evidence prior: a built-in additive-smoothed unigram LM, or the detector
  confidences carried by the contexts themselves,
* similarity: a precomputed sentence-similarity store (JSONL) or static
  word embeddings in the classic ``token v1 ... vD`` text layout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from . import jsonio
from .errors import (
    DimensionMismatchError,
    DuplicateKeyError,
    EmptyCorpusError,
    EmptyInputError,
    EmptyTableError,
    MissingContextError,
    MissingLMError,
    MissingSimilarityError,
    OOVTokenError,
    ParseError,
)
from .revision import EPS, probability, similarity
from .textnorm import tokenize


@dataclass(frozen=True)
class EvidenceContext:
    """A visual-context label with its classifier confidence.

    ``lm_prob`` optionally carries a precomputed corpus prior for the label;
    when absent, informativeness in single-LM mode queries the unigram LM.
    """

    label: str
    confidence: float
    lm_prob: Optional[float] = None

    def __post_init__(self):
        if not self.label:
            raise ValueError("context label must be non-empty")
        object.__setattr__(self, "confidence", probability(self.confidence, exact=True))
        if self.lm_prob is not None:
            object.__setattr__(self, "lm_prob", probability(self.lm_prob))

    def to_json(self) -> dict:
        obj = {"label": self.label, "confidence": self.confidence}
        if self.lm_prob is not None:
            obj["lm_prob"] = self.lm_prob
        return obj

    @classmethod
    def from_json(cls, obj: Mapping) -> "EvidenceContext":
        return cls(
            label=str(obj["label"]),
            confidence=float(obj["confidence"]),
            lm_prob=float(obj["lm_prob"]) if "lm_prob" in obj else None,
        )


class UnigramLM:
    """Additive-smoothed unigram language model with a single OOV bucket.

    With smoothing constant ``k``:  P(t) = (count(t) + k) / (total + k (V+1))
    where V is the observed vocabulary size; the "+1" is the OOV bucket, so
    probabilities over vocabulary plus OOV sum to one.  With ``k == 0``
    unseen tokens raise :class:`OOVTokenError` unless ``oov_floor`` is set.
    """

    def __init__(self, counts: Mapping[str, int], smoothing: float = 1.0,
                 oov_floor: Optional[float] = None):
        if smoothing < 0:
            raise ValueError("smoothing must be >= 0")
        self.counts = dict(counts)
        self.total = sum(self.counts.values())
        self.smoothing = float(smoothing)
        self.oov_floor = oov_floor
        if self.total <= 0:
            raise EmptyCorpusError("unigram LM needs a non-empty corpus")

    @property
    def vocabulary_size(self) -> int:
        return len(self.counts)

    def probability(self, token: str) -> float:
        token = token.lower()
        count = self.counts.get(token)
        k = self.smoothing
        if count is None:
            if k == 0.0:
                if self.oov_floor is not None:
                    return self.oov_floor
                raise OOVTokenError(token)
            count = 0
        denom = self.total + k * (self.vocabulary_size + 1)
        return probability((count + k) / denom)

    def phrase_probability(self, label: str) -> float:
        """Probability of a (possibly multi-word) label: product over tokens."""
        tokens = tokenize(label)
        if not tokens:
            raise EmptyInputError(f"label {label!r} has no tokens")
        value = 1.0
        for token in tokens:
            value *= self.probability(token)
        return probability(value)


def build_unigram_lm(corpus_lines: Iterable[str], smoothing_k: float = 1.0,
                     oov_floor: Optional[float] = None) -> UnigramLM:
    """Count a line-oriented corpus into a unigram LM."""
    counts: dict[str, int] = {}
    for line in corpus_lines:
        for token in tokenize(line):
            counts[token] = counts.get(token, 0) + 1
    if not counts:
        raise EmptyCorpusError("corpus produced no tokens")
    return UnigramLM(counts, smoothing=smoothing_k, oov_floor=oov_floor)


def load_corpus(path) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return fh.readlines()


def context_informativeness(contexts: Sequence[EvidenceContext],
                            lm: Optional[UnigramLM] = None,
                            mode: str = "single-lm") -> float:
    """Evidence prior P(c) for a context set.

    ``single-lm``: corpus prior of the one (top) context label, so common
    labels revise weakly and rare ones strongly.  ``multi-mean``: arithmetic
    mean of the contexts' own values (their LM priors when present, else
    their detector confidences).
    """
    if not contexts:
        raise MissingContextError("no evidence contexts supplied")
    if mode == "single-lm":
        top = contexts[0]
        if top.lm_prob is not None:
            return top.lm_prob
        if lm is None:
            raise MissingLMError("single-lm informativeness needs a unigram LM")
        return lm.phrase_probability(top.label)
    if mode == "multi-mean":
        values = [c.lm_prob if c.lm_prob is not None else c.confidence for c in contexts]
        return probability(sum(values) / len(values))
    raise ValueError(f"unknown informativeness mode {mode!r}")


def hypothesis_prior(token_probs: Sequence[float], mode: str = "mean") -> float:
    """Candidate prior from per-token probabilities: their mean or product."""
    if len(token_probs) == 0:
        raise EmptyInputError("empty token probability list")
    probs = [probability(p) for p in token_probs]
    if mode == "mean":
        return probability(sum(probs) / len(probs))
    if mode == "product":
        return probability(math.prod(probs))
    raise ValueError(f"unknown prior mode {mode!r}")


class EmbeddingTable:
    """Static word vectors with case-folded lookup."""

    def __init__(self, vectors: Mapping[str, np.ndarray], dimension: int):
        if dimension <= 0:
            raise ValueError("dimension must be positive")
        self.dimension = dimension
        self.vectors: dict[str, np.ndarray] = {}
        for token, vec in vectors.items():
            arr = np.asarray(vec, dtype=np.float64)
            if arr.shape != (dimension,):
                raise ValueError(f"vector for {token!r} has shape {arr.shape}")
            self.vectors[token.lower()] = arr

    def __contains__(self, token: str) -> bool:
        return token.lower() in self.vectors

    def __len__(self) -> int:
        return len(self.vectors)

    def vector(self, token: str) -> Optional[np.ndarray]:
        return self.vectors.get(token.lower())

    def phrase_vector(self, label: str) -> Optional[np.ndarray]:
        """Mean of the word vectors of a multi-word label; None if all OOV."""
        parts = [self.vector(t) for t in tokenize(label)]
        known = [p for p in parts if p is not None]
        if not known:
            return None
        return np.mean(known, axis=0)


def load_embeddings(path, expected_dim: Optional[int] = None) -> EmbeddingTable:
    """Parse a ``token v1 ... vD`` text file; all rows must share one width."""
    vectors: dict[str, np.ndarray] = {}
    dim = expected_dim
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            token, values = parts[0], parts[1:]
            if not values:
                raise ParseError(path, line_no, "no vector components")
            if dim is None:
                dim = len(values)
            elif len(values) != dim:
                raise DimensionMismatchError(
                    path, line_no, f"expected {dim} components, got {len(values)}")
            try:
                vectors[token.lower()] = np.array([float(v) for v in values])
            except ValueError as exc:
                raise ParseError(path, line_no, f"bad float: {exc}") from exc
    if not vectors:
        raise EmptyTableError(f"{path}: no vectors loaded")
    return EmbeddingTable(vectors, dim)


def cosine_similarity(table: EmbeddingTable, a: str, b: str,
                      policy: str = "strict") -> float:
    """Cosine of two token vectors, clamped into [0, 1].

    ``strict`` raises on unknown tokens; ``lenient`` scores them 0.
    """
    va, vb = table.vector(a), table.vector(b)
    if va is None or vb is None:
        if policy == "lenient":
            return 0.0
        raise OOVTokenError(a if va is None else b)
    return _cosine(va, vb)


def _cosine(va: np.ndarray, vb: np.ndarray) -> float:
    na, nb = float(np.linalg.norm(va)), float(np.linalg.norm(vb))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return similarity(float(np.dot(va, vb)) / (na * nb))


class SimilarityStore:
    """Precomputed (image, candidate rank, context label) -> similarity map."""

    def __init__(self, entries: Mapping[tuple[str, int, str], float],
                 warnings: Optional[list[str]] = None):
        self.entries = dict(entries)
        self.warnings = list(warnings or [])

    def __len__(self) -> int:
        return len(self.entries)

    def get(self, image_id: str, candidate_rank: int, context_label: str) -> Optional[float]:
        return self.entries.get((image_id, candidate_rank, context_label))

    def lookup(self, image_id: str, candidate_rank: int, context_label: str) -> float:
        value = self.get(image_id, candidate_rank, context_label)
        if value is None:
            raise MissingSimilarityError(
                f"no similarity for ({image_id!r}, {candidate_rank}, {context_label!r})")
        return value

    def to_jsonl(self, path) -> None:
        """Canonical serialization: one record per key, sorted by key."""
        records = (
            {"image_id": i, "candidate_rank": r, "context": c, "sim": s}
            for (i, r, c), s in sorted(self.entries.items())
        )
        jsonio.write_jsonl(path, records)


def load_precomputed_similarities(path) -> SimilarityStore:
    """Read the similarity JSONL schema.

    Values are clamped into [0, 1].  Cosines in [-1, 0) are legal producer
    output meaning "unrelated" and clamp silently; anything outside [-1, 1]
    is suspicious and recorded as a warning.
    """
    entries: dict[tuple[str, int, str], float] = {}
    warnings: list[str] = []
    for line_no, obj in jsonio.read_jsonl(path):
        try:
            key = (str(obj["image_id"]), int(obj["candidate_rank"]), str(obj["context"]))
            raw = float(obj["sim"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(path, line_no, f"bad similarity record: {exc!r}") from exc
        if key[1] < 0:
            raise ParseError(path, line_no, "candidate_rank must be >= 0")
        if key in entries:
            raise DuplicateKeyError(f"{path}:{line_no}: duplicate key {key!r}")
        if not -1.0 <= raw <= 1.0:
            warnings.append(f"{path}:{line_no}: sim {raw} outside [-1, 1], clamped")
        entries[key] = similarity(raw)
    return SimilarityStore(entries, warnings)


def lookup_similarity(store: SimilarityStore, image_id: str, candidate_rank: int,
                      context_label: str) -> float:
    return store.lookup(image_id, candidate_rank, context_label)
