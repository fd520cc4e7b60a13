"""Apply belief revision to n-best candidate lists.

One record = one image: its beam-search candidates plus the visual-context
labels detected in the image.  Each candidate's prior is revised by the
selected variant and the list is re-sorted by the revised score, ties broken
by the original beam rank.  Whenever no usable evidence exists (no contexts,
or the similarity source has no entry), the revision factor is the identity
and the candidate keeps its prior.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Mapping, Optional, Sequence, Tuple, Union

from .errors import ConfigError, EmptyInputError
from .providers import (
    EmbeddingTable,
    EvidenceContext,
    SimilarityStore,
    UnigramLM,
    _cosine,
    context_informativeness,
    hypothesis_prior,
)
from .revision import (
    FusionInputs,
    compute_alpha,
    fuse_two_contexts,
    probability,
    revise_negative,
    revise_positive,
    revise_sim_only,
)
from .textnorm import content_tokens, default_stopwords, tokenize

SimSource = Union[SimilarityStore, EmbeddingTable]

VARIANTS = ("positive", "negative", "sim-only", "joint", "two-context-fusion")
PRIOR_SOURCES = ("beam", "external-lm", "product-of-both")
INFORMATIVENESS_MODES = ("single-lm", "multi-mean")
CONTEXT_SELECTIONS = ("top1", "top3")
SIM_POOLS = ("max", "mean")


@dataclass(frozen=True)
class CandidateEntry:
    """One n-best hypothesis in original beam order."""

    rank: int
    text: str
    prior: float
    token_probs: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        if self.rank < 0:
            raise ValueError("rank must be >= 0")
        if not self.text:
            raise ValueError("candidate text must be non-empty")
        object.__setattr__(self, "prior", probability(self.prior))
        if self.token_probs is not None:
            object.__setattr__(self, "token_probs", tuple(float(p) for p in self.token_probs))

    def to_json(self) -> dict:
        obj = {"rank": self.rank, "text": self.text, "prior": self.prior}
        if self.token_probs is not None:
            obj["token_probs"] = list(self.token_probs)
        return obj

    @classmethod
    def from_json(cls, obj: Mapping) -> "CandidateEntry":
        return cls(
            rank=int(obj["rank"]),
            text=str(obj["text"]),
            prior=float(obj["prior"]),
            token_probs=tuple(float(p) for p in obj["token_probs"])
            if obj.get("token_probs") is not None else None,
        )


@dataclass(frozen=True)
class NBestRecord:
    image_id: str
    candidates: Tuple[CandidateEntry, ...]
    contexts: Tuple[EvidenceContext, ...] = ()

    def __post_init__(self):
        if not self.candidates:
            raise EmptyInputError(f"record {self.image_id!r} has no candidates")
        ranks = sorted(c.rank for c in self.candidates)
        if ranks != list(range(len(self.candidates))):
            raise ValueError(
                f"record {self.image_id!r}: ranks must be unique and contiguous from 0")
        object.__setattr__(
            self, "candidates", tuple(sorted(self.candidates, key=lambda c: c.rank)))

    def to_json(self) -> dict:
        return {
            "image_id": self.image_id,
            "candidates": [c.to_json() for c in self.candidates],
            "contexts": [c.to_json() for c in self.contexts],
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "NBestRecord":
        return cls(
            image_id=str(obj["image_id"]),
            candidates=tuple(CandidateEntry.from_json(c) for c in obj["candidates"]),
            contexts=tuple(EvidenceContext.from_json(c) for c in obj.get("contexts", [])),
        )


@dataclass(frozen=True)
class RerankConfig:
    """Variant and input-source selection for the pipeline.

    ``sim_pool`` controls how the similarities of multiple selected contexts
    enter the revision exponent: the max (default) or the mean.
    """

    variant: str = "positive"
    prior_source: str = "external-lm"
    lm_prior_mode: str = "mean"
    informativeness_mode: str = "single-lm"
    context_selection: str = "top1"
    sim_pool: str = "max"
    confidence_threshold: float = 0.2

    def __post_init__(self):
        checks = [
            (self.variant, VARIANTS, "variant"),
            (self.prior_source, PRIOR_SOURCES, "prior_source"),
            (self.lm_prior_mode, ("mean", "product"), "lm_prior_mode"),
            (self.informativeness_mode, INFORMATIVENESS_MODES, "informativeness_mode"),
            (self.context_selection, CONTEXT_SELECTIONS, "context_selection"),
            (self.sim_pool, SIM_POOLS, "sim_pool"),
        ]
        for value, allowed, name in checks:
            if value not in allowed:
                raise ConfigError(f"{name}={value!r} not in {allowed}")
        if not 0.0 <= self.confidence_threshold <= 1.0:
            raise ConfigError("confidence_threshold must be in [0, 1]")

    def to_json(self) -> dict:
        return {
            "variant": self.variant,
            "prior_source": self.prior_source,
            "lm_prior_mode": self.lm_prior_mode,
            "informativeness_mode": self.informativeness_mode,
            "context_selection": self.context_selection,
            "sim_pool": self.sim_pool,
            "confidence_threshold": self.confidence_threshold,
        }


@dataclass(frozen=True)
class ScoredCandidate:
    candidate: CandidateEntry
    revised: float
    alpha: float
    sim: float
    context: str

    def to_json(self) -> dict:
        return {
            "rank": self.candidate.rank,
            "revised": self.revised,
            "alpha": self.alpha,
            "sim": self.sim,
            "context": self.context,
        }


@dataclass(frozen=True)
class RankedList:
    """Candidates of one record sorted by revised score (a permutation)."""

    image_id: str
    entries: Tuple[ScoredCandidate, ...]

    def best(self) -> ScoredCandidate:
        return self.entries[0]

    def to_json(self) -> list:
        return [e.to_json() for e in self.entries]


def select_best(ranked: RankedList) -> CandidateEntry:
    """The top entry; on score ties the smaller original rank already won."""
    if not ranked.entries:
        raise EmptyInputError("empty ranked list")
    return ranked.entries[0].candidate


def _resolve_prior(candidate: CandidateEntry, config: RerankConfig) -> float:
    if config.prior_source == "beam":
        return candidate.prior
    if candidate.token_probs is None or len(candidate.token_probs) == 0:
        raise ConfigError(
            f"prior_source={config.prior_source!r} needs token_probs "
            f"(candidate rank {candidate.rank} has none)")
    lm_prior = hypothesis_prior(candidate.token_probs, config.lm_prior_mode)
    if config.prior_source == "external-lm":
        return lm_prior
    return probability(candidate.prior * lm_prior)  # product-of-both


def _word_level_sim(table: EmbeddingTable, caption_tokens: Sequence,
                    label: str) -> Optional[float]:
    """Max cosine between the label vector and any caption content token."""
    label_vec = table.phrase_vector(label)
    if label_vec is None:
        return None
    best = None
    for token in caption_tokens:
        vec = table.vector(token)
        if vec is None:
            continue
        value = _cosine(label_vec, vec)
        best = value if best is None else max(best, value)
    return best


def _context_sim(sims: Optional[SimSource], record: NBestRecord,
                 candidate: CandidateEntry, label: str) -> Optional[float]:
    if sims is None:
        return None
    if isinstance(sims, SimilarityStore):
        return sims.get(record.image_id, candidate.rank, label)
    tokens = content_tokens(tokenize(candidate.text), default_stopwords())
    return _word_level_sim(sims, tokens, label)


def _selected_contexts(record: NBestRecord, config: RerankConfig,
                       limit: Optional[int] = None) -> list[EvidenceContext]:
    kept = [c for c in record.contexts if c.confidence >= config.confidence_threshold]
    kept.sort(key=lambda c: -c.confidence)
    if limit is None:
        limit = 1 if config.context_selection == "top1" else 3
    return kept[:limit]


def _pool_sims(pairs: list[tuple[EvidenceContext, float]],
               pool: str) -> tuple[float, str]:
    if pool == "max":
        best = max(pairs, key=lambda p: p[1])
        return best[1], best[0].label
    mean = sum(s for _, s in pairs) / len(pairs)
    return mean, "+".join(c.label for c, _ in pairs)


def _single_channel_score(record: NBestRecord, candidate: CandidateEntry,
                          prior: float, contexts: list[EvidenceContext],
                          sims: Optional[SimSource], config: RerankConfig,
                          lm: Optional[UnigramLM],
                          direction: str) -> Optional[ScoredCandidate]:
    """Score one candidate through one similarity channel; None = back off."""
    pairs = []
    for context in contexts:
        value = _context_sim(sims, record, candidate, context.label)
        if value is not None:
            pairs.append((context, value))
    if not pairs:
        return None
    evidence_prob = context_informativeness(contexts, lm, config.informativeness_mode)
    sim, label = _pool_sims(pairs, config.sim_pool)
    alpha = compute_alpha(sim, evidence_prob)
    if direction == "positive":
        revised = revise_positive(prior, alpha)
    elif direction == "negative":
        revised = revise_negative(prior, alpha)
    else:
        revised = revise_sim_only(sim, evidence_prob)
    return ScoredCandidate(candidate, revised, alpha, sim, label)


def _backoff(candidate: CandidateEntry, prior: float) -> ScoredCandidate:
    return ScoredCandidate(candidate, prior, 1.0, 0.0, "")


def _score_candidate(record: NBestRecord, candidate: CandidateEntry,
                     contexts: list[EvidenceContext], sims: Optional[SimSource],
                     config: RerankConfig, lm: Optional[UnigramLM],
                     word_sims: Optional[EmbeddingTable]) -> ScoredCandidate:
    prior = _resolve_prior(candidate, config)
    if not contexts:
        return _backoff(candidate, prior)

    if config.variant in ("positive", "negative"):
        scored = _single_channel_score(
            record, candidate, prior, contexts, sims, config, lm, config.variant)
        return scored if scored is not None else _backoff(candidate, prior)

    if config.variant == "sim-only":
        scored = _single_channel_score(
            record, candidate, prior, contexts, sims, config, lm, "sim-only")
        return scored if scored is not None else _backoff(candidate, prior)

    if config.variant == "joint":
        sentence = _single_channel_score(
            record, candidate, prior, contexts, sims, config, lm, "positive")
        word = _single_channel_score(
            record, candidate, prior, contexts, word_sims, config, lm, "positive")
        if sentence is None and word is None:
            return _backoff(candidate, prior)
        # each missing channel contributes its unrevised prior as the factor;
        # the serialized alpha/sim/context describe the sentence channel
        factor_a = sentence.revised if sentence is not None else prior
        factor_b = word.revised if word is not None else prior
        shown = sentence if sentence is not None else _backoff(candidate, prior)
        return replace(shown, revised=factor_a * factor_b)

    return _score_fusion(record, candidate, prior, contexts, sims, config, lm, word_sims)


def _score_fusion(record: NBestRecord, candidate: CandidateEntry, prior: float,
                  contexts: list[EvidenceContext], sims: Optional[SimSource],
                  config: RerankConfig, lm: Optional[UnigramLM],
                  word_sims: Optional[EmbeddingTable]) -> ScoredCandidate:
    """Two-context fusion over the two most confident usable contexts."""
    pairs = []
    for context in contexts:
        value = _context_sim(sims, record, candidate, context.label)
        if value is not None:
            pairs.append((context, value))
    if not pairs:
        return _backoff(candidate, prior)

    def ctx_prob(context: EvidenceContext) -> float:
        return context_informativeness([context], lm, config.informativeness_mode)

    if len(pairs) == 1:
        # a single usable premise degrades to plain positive revision
        context, sim = pairs[0]
        evidence_prob = ctx_prob(context)
        alpha = compute_alpha(sim, evidence_prob)
        return ScoredCandidate(candidate, revise_positive(prior, alpha),
                               alpha, sim, context.label)

    (ctx1, sim1), (ctx2, sim2) = pairs[0], pairs[1]
    p1, p2 = ctx_prob(ctx1), ctx_prob(ctx2)
    alpha1 = compute_alpha(sim1, p1)
    alpha2 = compute_alpha(sim2, p2)
    cond1 = revise_positive(prior, alpha1)
    cond2 = revise_positive(prior, alpha2)
    label_sim = 0.0
    if word_sims is not None:
        v1 = word_sims.phrase_vector(ctx1.label)
        v2 = word_sims.phrase_vector(ctx2.label)
        if v1 is not None and v2 is not None:
            label_sim = _cosine(v1, v2)
    revised = fuse_two_contexts(FusionInputs(
        sim_w_c1=sim1, sim_w_c2=sim2, sim_c1_c2=label_sim,
        p_c1=p1, p_c2=p2, cond1=cond1, cond2=cond2))
    # report the dominant premise's exponent and similarity
    alpha, sim = (alpha1, sim1) if cond1 >= cond2 else (alpha2, sim2)
    return ScoredCandidate(candidate, revised, alpha, sim,
                           f"{ctx1.label}+{ctx2.label}")


def rerank_record(record: NBestRecord, sims: Optional[SimSource],
                  config: RerankConfig, *, lm: Optional[UnigramLM] = None,
                  word_sims: Optional[EmbeddingTable] = None) -> RankedList:
    """Revise every candidate of one record and sort by revised score.

    The output is always a permutation of the input candidates; ties keep
    the original beam order.
    """
    if config.variant == "joint" and word_sims is None:
        raise ConfigError("joint variant needs word embeddings (word_sims)")
    limit = 2 if config.variant == "two-context-fusion" else None
    contexts = _selected_contexts(record, config, limit)
    scored = [
        _score_candidate(record, candidate, contexts, sims, config, lm, word_sims)
        for candidate in record.candidates
    ]
    scored.sort(key=lambda e: (-e.revised, e.candidate.rank))
    return RankedList(record.image_id, tuple(scored))


def rerank_to_record(record: NBestRecord, ranked: RankedList) -> dict:
    """The JSONL output shape: the input record plus the scored ordering."""
    obj = record.to_json()
    obj["reranked"] = ranked.to_json()
    return obj
