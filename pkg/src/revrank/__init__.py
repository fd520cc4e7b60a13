"""revrank: belief-revision re-ranking of n-best caption lists.

A candidate caption's prior probability is revised against the visual
context detected in its image; the n-best list is re-sorted by the revised
scores.  The package also ships the evaluation stack used to measure the
effect: overlap metrics (BLEU, NIST, ROUGE-L, CIDEr, mBLEU), lexical
diversity (TTR, MTLD, Div-n, vocabulary stats) and paired significance
tests (approximate randomization, paired bootstrap).
"""

__version__ = "0.1.0"

from .revision import (  # noqa: F401
    EPS,
    FusionInputs,
    compute_alpha,
    compute_beta,
    fuse_two_contexts,
    joint_multiply,
    probability,
    revise_negative,
    revise_positive,
    revise_sim_only,
    similarity,
)
