"""Paired significance tests: approximate randomization and paired bootstrap.

Both tests recompute corpus metrics from per-item sufficient statistics, so
thousands of trials over thousands of items stay cheap.  Randomness comes
from a single seeded PCG64 generator; each test makes exactly one bulk draw
of shape (trials, items) in row-major order, so trial ``t`` owns row ``t``
of the stream and results are reproducible bit-for-bit across runs and
platforms.  The per-trial accumulation runs on the kernel backend selected
in :mod:`revrank.kernels`.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Mapping, Optional, Sequence, Tuple

import numpy as np

from . import kernels, metrics
from .errors import ConfigError, MisalignedInputsError

Reducer = Callable[[np.ndarray], np.ndarray]


def _mean_reducer(n_items: int) -> Reducer:
    def reduce(sums: np.ndarray) -> np.ndarray:
        sums = np.atleast_2d(sums)
        return sums[:, 0] / n_items

    return reduce


@dataclass(frozen=True)
class PairedScores:
    """Aligned per-item sufficient statistics for two systems.

    ``reducer`` maps summed statistic rows to corpus metric values and must
    be vectorized over rows.
    """

    metric: str
    ids: Tuple[str, ...]
    a_stats: np.ndarray
    b_stats: np.ndarray
    reducer: Reducer

    def __post_init__(self):
        if self.a_stats.shape != self.b_stats.shape:
            raise MisalignedInputsError("A/B statistic shapes differ")
        if len(self.ids) != self.a_stats.shape[0]:
            raise MisalignedInputsError("ids do not match statistics")
        if len(self.ids) == 0:
            raise MisalignedInputsError("no paired items")

    def __len__(self) -> int:
        return len(self.ids)

    def corpus_values(self) -> Tuple[float, float]:
        va = float(self.reducer(self.a_stats.sum(axis=0))[0])
        vb = float(self.reducer(self.b_stats.sum(axis=0))[0])
        return va, vb

    @classmethod
    def from_corpora(cls, metric: str, corpus_a: metrics.TokenizedCorpus,
                     corpus_b: metrics.TokenizedCorpus, max_n: int = 4) -> "PairedScores":
        """Build paired statistics for a named metric over aligned corpora."""
        ids_a = tuple(item.item_id for item in corpus_a.items)
        ids_b = tuple(item.item_id for item in corpus_b.items)
        if ids_a != ids_b:
            raise MisalignedInputsError("systems have different item ids")
        for item_a, item_b in zip(corpus_a.items, corpus_b.items):
            if item_a.references != item_b.references:
                raise MisalignedInputsError(
                    f"references differ for item {item_a.item_id!r}")

        if metric == "bleu":
            a = np.array([metrics.bleu_item_stats(i, max_n) for i in corpus_a.items],
                         dtype=np.float64)
            b = np.array([metrics.bleu_item_stats(i, max_n) for i in corpus_b.items],
                         dtype=np.float64)
            return cls(metric, ids_a, a, b,
                       lambda s: metrics.bleu_from_sums(s, max_n))
        if metric == "nist":
            # info weights come from the shared references: one table for both
            info = metrics.nist_info_weights(corpus_a, max_n)
            a = np.array([metrics.nist_item_stats(i, info, max_n) for i in corpus_a.items])
            b = np.array([metrics.nist_item_stats(i, info, max_n) for i in corpus_b.items])
            return cls(metric, ids_a, a, b,
                       lambda s: metrics.nist_from_sums(s, max_n))
        if metric in ("rouge_l", "cider"):
            # corpus value is a per-item mean, so the mean is the reducer;
            # cider keeps the full-corpus IDF fixed across resamples
            fn = metrics.rouge_l if metric == "rouge_l" else metrics.cider
            a = np.array([[v] for _, v in fn(corpus_a).per_item])
            b = np.array([[v] for _, v in fn(corpus_b).per_item])
            return cls(metric, ids_a, a, b, _mean_reducer(len(ids_a)))
        raise ConfigError(f"unknown paired metric {metric!r}")

    @classmethod
    def from_score_pairs(cls, items: Sequence[tuple[str, float, float]],
                         metric: str = "mean") -> "PairedScores":
        """Wrap precomputed per-item scores; the corpus metric is their mean."""
        ids = tuple(i for i, _, _ in items)
        a = np.array([[va] for _, va, _ in items], dtype=np.float64)
        b = np.array([[vb] for _, _, vb in items], dtype=np.float64)
        return cls(metric, ids, a, b, _mean_reducer(len(ids)))


@dataclass(frozen=True)
class SignificanceResult:
    metric: str
    test: str
    observed_delta: float
    p_value: float
    trials: int
    seed: int
    baseline_value: float
    new_value: float
    better_confidence: Optional[Tuple[float, float]] = None  # (baseline %, new %)
    baseline_resample_mean: Optional[float] = None
    new_resample_mean: Optional[float] = None
    elapsed_seconds: float = 0.0

    def to_json(self) -> dict:
        obj = {
            "metric": self.metric,
            "test": self.test,
            "observed_delta": self.observed_delta,
            "p_value": self.p_value,
            "trials": self.trials,
            "seed": self.seed,
            "baseline_value": self.baseline_value,
            "new_value": self.new_value,
        }
        if self.better_confidence is not None:
            obj["baseline_better_pct"] = self.better_confidence[0]
            obj["new_better_pct"] = self.better_confidence[1]
        if self.baseline_resample_mean is not None:
            obj["baseline_resample_mean"] = self.baseline_resample_mean
            obj["new_resample_mean"] = self.new_resample_mean
        return obj


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def approximate_randomization(paired: PairedScores, trials: int,
                              seed: int = 0) -> SignificanceResult:
    """Shuffle-based paired test (system labels swapped with probability 1/2).

    p = (#{trials with |resampled delta| >= |observed delta|} + 1) / (trials + 1),
    the add-one estimate, so a reported p is never exactly zero.
    """
    if trials < 1:
        raise ConfigError("trials must be >= 1")
    start = time.perf_counter()
    va, vb = paired.corpus_values()
    observed = vb - va
    masks = _rng(seed).integers(0, 2, size=(trials, len(paired)), dtype=np.uint8)
    sum_a, sum_b = kernels.swap_pair_sums(paired.a_stats, paired.b_stats, masks)
    deltas = paired.reducer(sum_b) - paired.reducer(sum_a)
    exceed = int(np.count_nonzero(np.abs(deltas) >= abs(observed)))
    p_value = (exceed + 1) / (trials + 1)
    return SignificanceResult(
        metric=paired.metric, test="approximate-randomization",
        observed_delta=observed, p_value=p_value, trials=trials, seed=seed,
        baseline_value=va, new_value=vb,
        elapsed_seconds=time.perf_counter() - start,
    )


def paired_bootstrap(paired: PairedScores, trials: int,
                     seed: int = 0) -> SignificanceResult:
    """Resample items with replacement; report win-rate confidence.

    Ties split evenly between the systems so the two percentages always sum
    to 100.  The reported p-value is the fraction of resamples in which the
    new system fails to win.
    """
    if trials < 1:
        raise ConfigError("trials must be >= 1")
    start = time.perf_counter()
    va, vb = paired.corpus_values()
    observed = vb - va
    n = len(paired)
    idx = _rng(seed).integers(0, n, size=(trials, n), dtype=np.int64)
    sums_a = kernels.gather_sums(paired.a_stats, idx)
    sums_b = kernels.gather_sums(paired.b_stats, idx)
    values_a = paired.reducer(sums_a)
    values_b = paired.reducer(sums_b)
    wins_new = np.count_nonzero(values_b > values_a)
    wins_base = np.count_nonzero(values_a > values_b)
    ties = trials - wins_new - wins_base
    new_pct = 100.0 * (wins_new + 0.5 * ties) / trials
    base_pct = 100.0 - new_pct
    return SignificanceResult(
        metric=paired.metric, test="paired-bootstrap",
        observed_delta=observed, p_value=1.0 - (wins_new + 0.5 * ties) / trials,
        trials=trials, seed=seed,
        baseline_value=va, new_value=vb,
        better_confidence=(base_pct, new_pct),
        baseline_resample_mean=float(values_a.mean()),
        new_resample_mean=float(values_b.mean()),
        elapsed_seconds=time.perf_counter() - start,
    )


def exhaustive_randomization_p(paired: PairedScores) -> float:
    """Exact randomization p over all 2^n swap patterns (small n only)."""
    n = len(paired)
    if n > 20:
        raise ConfigError("exhaustive enumeration is limited to n <= 20")
    va, vb = paired.corpus_values()
    observed = abs(vb - va)
    masks = ((np.arange(2 ** n)[:, None] >> np.arange(n)[None, :]) & 1).astype(np.uint8)
    sum_a, sum_b = kernels.swap_pair_sums(paired.a_stats, paired.b_stats, masks)
    deltas = paired.reducer(sum_b) - paired.reducer(sum_a)
    return float(np.count_nonzero(np.abs(deltas) >= observed)) / (2 ** n)
