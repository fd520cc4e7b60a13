"""Build visual-context-enriched caption records.

Raw detector output is noisy: a confidence threshold removes objects that
are probably not in the image, and semantic alignment (max word-vector
cosine between the label and the caption's content tokens) orders what is
left so the most caption-relevant contexts come first.  Also hosts the
word-level helpers used by the negative-evidence variants: keyword
extraction from a caption and nearest-context retrieval in embedding space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence, Tuple

from .errors import EmptyInputError, OOVTokenError
from .providers import EmbeddingTable, _cosine
from .revision import probability, similarity
from .textnorm import content_tokens, default_stopwords, tokenize


@dataclass(frozen=True)
class RawDetection:
    image_id: str
    label: str
    confidence: float

    def __post_init__(self):
        object.__setattr__(self, "confidence", probability(self.confidence, exact=True))

    @classmethod
    def from_json(cls, obj: Mapping) -> "RawDetection":
        return cls(str(obj["image_id"]), str(obj["label"]), float(obj["confidence"]))


@dataclass(frozen=True)
class AlignedContext:
    label: str
    confidence: float
    align: float

    def to_json(self) -> dict:
        return {"label": self.label, "confidence": self.confidence, "align": self.align}


@dataclass(frozen=True)
class EnrichedRecord:
    """A caption with its top contexts, sorted by alignment score."""

    image_id: str
    caption: str
    contexts: Tuple[AlignedContext, ...]

    def to_json(self) -> dict:
        return {
            "image_id": self.image_id,
            "caption": self.caption,
            "contexts": [c.to_json() for c in self.contexts],
        }


def filter_by_threshold(detections: Sequence[RawDetection],
                        tau: float) -> list[RawDetection]:
    """Keep detections with confidence >= tau, order preserved (idempotent)."""
    if not 0.0 <= tau <= 1.0:
        raise ValueError("tau must be in [0, 1]")
    return [d for d in detections if d.confidence >= tau]


def _label_alignment(embeddings: EmbeddingTable, label: str,
                     caption_vecs: Sequence) -> float:
    vec = embeddings.phrase_vector(label)
    if vec is None or not caption_vecs:
        return 0.0
    return max(_cosine(vec, cv) for cv in caption_vecs)


def align_contexts(detections: Sequence[RawDetection], caption: str,
                   embeddings: EmbeddingTable, top_k: int = 3,
                   stopwords: Optional[frozenset] = None) -> EnrichedRecord:
    """Score detections against the caption and keep the top_k best aligned.

    A detection's score is the max cosine between its (possibly multi-word)
    label and any content token of the caption; unknown labels score 0 and
    sink to the bottom.  Ties keep the detector's input order.
    """
    if not caption:
        raise EmptyInputError("caption must be non-empty")
    stopwords = default_stopwords() if stopwords is None else stopwords
    tokens = content_tokens(tokenize(caption), stopwords)
    caption_vecs = [v for v in (embeddings.vector(t) for t in tokens) if v is not None]
    scored = [
        AlignedContext(d.label, d.confidence,
                       similarity(_label_alignment(embeddings, d.label, caption_vecs)))
        for d in detections
    ]
    scored.sort(key=lambda c: -c.align)
    image_id = detections[0].image_id if detections else ""
    return EnrichedRecord(image_id, caption, tuple(scored[:max(top_k, 0)]))


def closest_context(label: str, embeddings: EmbeddingTable) -> str:
    """Nearest other vocabulary entry by cosine; the query itself never wins."""
    query = embeddings.vector(label)
    if query is None:
        raise OOVTokenError(label)
    best_token, best_score = None, -math.inf
    for token, vec in embeddings.vectors.items():
        if token == label.lower():
            continue
        score = _cosine(query, vec)
        if score > best_score:
            best_token, best_score = token, score
    if best_token is None:
        raise EmptyInputError("embedding table has no other entries")
    return best_token


def build_idf(corpus_lines: Iterable[str]) -> dict[str, float]:
    """Smoothed inverse document frequency over a line-per-document corpus."""
    doc_freq: dict[str, int] = {}
    n_docs = 0
    for line in corpus_lines:
        tokens = set(tokenize(line))
        if not tokens:
            continue
        n_docs += 1
        for token in tokens:
            doc_freq[token] = doc_freq.get(token, 0) + 1
    return {t: math.log((1 + n_docs) / (1 + df)) + 1.0 for t, df in doc_freq.items()}


def extract_keywords(caption: str, k: int, idf: Optional[Mapping[str, float]] = None,
                     stopwords: Optional[frozenset] = None) -> list[str]:
    """Top-k caption content tokens ranked by TF-IDF.

    Tokens absent from the IDF table fall back to the table's max weight
    (rare-by-assumption); without a table, ranking is by term frequency.
    Ties are broken by first occurrence in the caption.
    """
    if k <= 0:
        return []
    stopwords = default_stopwords() if stopwords is None else stopwords
    tokens = content_tokens(tokenize(caption), stopwords)
    if not tokens:
        return []
    default_idf = max(idf.values()) if idf else 1.0
    first_pos: dict[str, int] = {}
    counts: dict[str, int] = {}
    for pos, token in enumerate(tokens):
        counts[token] = counts.get(token, 0) + 1
        first_pos.setdefault(token, pos)
    weight = {
        t: counts[t] * (idf.get(t, default_idf) if idf else 1.0)
        for t in counts
    }
    ordered = sorted(counts, key=lambda t: (-weight[t], first_pos[t]))
    return ordered[:k]
