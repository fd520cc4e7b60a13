"""Batch kernels with a compiled core and a numpy fallback.

The compiled extension (``revrank._ckernels``) is preferred when it built;
otherwise, or when the ``REVRANK_PURE_PYTHON`` environment variable is set
to a non-empty value, the numpy implementations below are used.  Both
backends take the same pre-generated random inputs, so the accumulator
results are backend-independent wherever the statistics are integral (exact
float64 sums).  The elementwise power maps may differ between backends by
an ulp (libm pow vs numpy's SIMD pow); boundary identities (alpha 0/1,
sim 0/1) are exact in both.  See ``benchmarks/bench_kernels.py`` for a
speed comparison.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from . import _ckernels
except ImportError:  # extension not built: numpy fallback only
    _ckernels = None

_GATHER_CHUNK = 1024


def _use_compiled() -> bool:
    return _ckernels is not None and not os.environ.get("REVRANK_PURE_PYTHON")


def backend_name() -> str:
    return "compiled" if _use_compiled() else "python"


def _as_f64(x) -> np.ndarray:
    return np.ascontiguousarray(x, dtype=np.float64)


def alpha_values(sims, probs) -> np.ndarray:
    """Vectorized revision exponent ((1-s)/(1+s)) ** (1-q)."""
    s, q = _as_f64(sims), _as_f64(probs)
    if _use_compiled():
        return _ckernels.alpha_values(s, q)
    return ((1.0 - s) / (1.0 + s)) ** (1.0 - q)


def positive_values(priors, alphas) -> np.ndarray:
    """Vectorized prior ** alpha."""
    p, a = _as_f64(priors), _as_f64(alphas)
    if _use_compiled():
        return _ckernels.positive_values(p, a)
    return p**a


def negative_values(priors, alphas) -> np.ndarray:
    """Vectorized 1 - (1 - prior) ** alpha; alpha == 1 returns prior exactly."""
    p, a = _as_f64(priors), _as_f64(alphas)
    if _use_compiled():
        return _ckernels.negative_values(p, a)
    return np.where(a == 1.0, p, 1.0 - (1.0 - p) ** a)


def sim_only_values(sims, probs) -> np.ndarray:
    """Vectorized sim ** q."""
    s, q = _as_f64(sims), _as_f64(probs)
    if _use_compiled():
        return _ckernels.sim_only_values(s, q)
    return s**q


def swap_pair_sums(a, b, masks) -> tuple[np.ndarray, np.ndarray]:
    """Per-trial sums of paired stats with masked rows swapped.

    ``a``/``b``: (items, dims) float64; ``masks``: (trials, items) uint8.
    Returns (trials, dims) sums for the pseudo-A and pseudo-B sides.
    """
    a, b = _as_f64(a), _as_f64(b)
    m = np.ascontiguousarray(masks, dtype=np.uint8)
    if _use_compiled():
        return _ckernels.swap_pair_sums(a, b, m)
    # sum(pseudo-A) = sum(a) + M @ (b - a); exact when the stats are integral
    mf = m.astype(np.float64)
    diff = b - a
    sa = a.sum(axis=0) + mf @ diff
    sb = b.sum(axis=0) - mf @ diff
    return sa, sb


def gather_sums(stats, idx) -> np.ndarray:
    """Per-trial sums of resampled rows: out[t] = sum_j stats[idx[t, j]]."""
    stats = _as_f64(stats)
    idx = np.ascontiguousarray(idx, dtype=np.int64)
    if _use_compiled():
        return _ckernels.gather_sums(stats, idx)
    if idx.size and (idx.min() < 0 or idx.max() >= stats.shape[0]):
        raise IndexError("resample index out of range")
    out = np.empty((idx.shape[0], stats.shape[1]), dtype=np.float64)
    for start in range(0, idx.shape[0], _GATHER_CHUNK):  # chunked to bound memory
        stop = min(start + _GATHER_CHUNK, idx.shape[0])
        out[start:stop] = stats[idx[start:stop]].sum(axis=1)
    return out
