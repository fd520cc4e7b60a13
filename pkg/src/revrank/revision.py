"""Belief-revision arithmetic.

A candidate hypothesis with prior probability ``p`` is revised against a
piece of evidence (here: a visual-context label) through a power law

    revised = p ** alpha,    alpha = ((1 - s) / (1 + s)) ** (1 - q)

where ``s`` is the similarity between hypothesis and evidence and ``q`` the
prior probability of the evidence itself.  ``alpha`` lies in [0, 1]: zero
similarity gives ``alpha = 1`` (no revision), perfect similarity gives
``alpha = 0`` (revision all the way to certainty), and evidence with
probability 1 carries no information so the exponent ``1 - q`` vanishes and
again nothing changes.

Negative evidence uses the mirrored form ``1 - (1 - p) ** alpha``, which
lowers the prior by the same degree the positive form raises it.

All functions here are pure scalar float maps; batch (ndarray) versions of
the hot ones live in :mod:`revrank.kernels`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

EPS = 1e-12


def _pow(base: float, exponent: float) -> float:
    """``base ** exponent`` with 0**0 defined as 1 (the no-revision limit)."""
    if base == 0.0 and exponent == 0.0:
        return 1.0
    return math.pow(base, exponent)


def probability(value: float, *, exact: bool = False) -> float:
    """Clamp a raw number into a usable probability.

    Default mode keeps values inside [EPS, 1-EPS] so later powers and logs
    never hit degenerate endpoints; ``exact=True`` admits hard 0 and 1 for
    callers that need the boundary identities to hold exactly.
    """
    if math.isnan(value):
        raise ValueError("probability is NaN")
    lo, hi = (0.0, 1.0) if exact else (EPS, 1.0 - EPS)
    return min(max(value, lo), hi)


def similarity(value: float) -> float:
    """Clamp a raw similarity (e.g. a cosine in [-1, 1]) into [0, 1].

    Negative cosines are treated as unrelated (0), not as evidence against.
    """
    if math.isnan(value):
        raise ValueError("similarity is NaN")
    return min(max(value, 0.0), 1.0)


def compute_alpha(sim: float, evidence_prob: float) -> float:
    """Revision exponent ``((1-s)/(1+s)) ** (1-q)``; always in [0, 1]."""
    base = (1.0 - sim) / (1.0 + sim)
    return _pow(base, 1.0 - evidence_prob)


def revise_positive(prior: float, alpha: float) -> float:
    """Raise the prior toward 1: ``prior ** alpha`` (alpha in [0, 1])."""
    return _pow(prior, alpha)


def revise_negative(prior: float, alpha: float) -> float:
    """Lower the prior toward 0: ``1 - (1 - prior) ** alpha``.

    ``alpha == 1`` short-circuits to the prior itself so the no-revision
    identity holds exactly (``1 - (1 - p)`` would reintroduce rounding).
    """
    if alpha == 1.0:
        return prior
    return 1.0 - _pow(1.0 - prior, alpha)


def revise_sim_only(sim: float, evidence_prob: float) -> float:
    """Similarity-only score ``sim ** q`` that ignores the candidate prior."""
    return _pow(sim, evidence_prob)


def joint_multiply(positive_score: float, negative_variant_score: float) -> float:
    """Combine two evidence channels by plain multiplication."""
    return positive_score * negative_variant_score


@dataclass(frozen=True)
class FusionInputs:
    """Everything needed to fuse two evidence contexts for one candidate.

    ``cond1``/``cond2`` are the already-revised conditionals of the candidate
    under each context alone; the remaining fields are raw similarities and
    evidence priors.  All values must lie in [0, 1].
    """

    sim_w_c1: float
    sim_w_c2: float
    sim_c1_c2: float
    p_c1: float
    p_c2: float
    cond1: float
    cond2: float

    def __post_init__(self):
        for name, value in self.__dict__.items():
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"FusionInputs.{name}={value!r} outside [0, 1]")


def compute_beta(inputs: FusionInputs) -> float:
    """Mixing weight for two-context fusion: the max of seven quantities.

    Because ``max(s, 1-s) >= 1/2`` the result is always at least 0.5, so the
    fused score always leans at least half on the stronger conditional.
    """
    return max(
        inputs.sim_w_c1,
        inputs.sim_w_c2,
        inputs.sim_c1_c2,
        1.0 - inputs.sim_w_c1,
        1.0 - inputs.sim_w_c2,
        inputs.p_c1,
        inputs.p_c2,
    )


def fuse_two_contexts(inputs: FusionInputs) -> float:
    """Fuse two single-context conditionals into one score.

    Returns ``beta * M + (1 - beta) * S`` where ``M`` is the stronger
    conditional and ``S`` their noisy-or union.  Since ``M <= S`` the result
    lands in [M, S], hence never below either input conditional: adding a
    second context can only strengthen the score.
    """
    beta = compute_beta(inputs)
    m = max(inputs.cond1, inputs.cond2)
    s = inputs.cond1 + inputs.cond2 - inputs.cond1 * inputs.cond2
    return beta * m + (1.0 - beta) * s
