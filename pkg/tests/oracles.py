"""Independent brute-force oracles used by the test suite.

These are straight-line implementations of the metric definitions, written
separately from the library (different algorithms where possible: recursive
LCS, explicit dict counting, direct formula evaluation).  Tests compare
library output against these; the oracles never import library code.
"""

import itertools
import math
from collections import Counter
from functools import lru_cache


def ngram_list(tokens, n):
    return [tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1)]


# --------------------------------------------------------------------------
# BLEU
# --------------------------------------------------------------------------

def clipped_matches(cand_tokens, ref_token_lists, n):
    cand = Counter(ngram_list(cand_tokens, n))
    matched = 0
    for gram, count in cand.items():
        best = max((Counter(ngram_list(r, n))[gram] for r in ref_token_lists),
                   default=0)
        matched += min(count, best)
    return matched, sum(cand.values())


def closest_ref_length(cand_len, ref_lens):
    best = None
    for r in sorted(ref_lens):
        if best is None or abs(r - cand_len) < abs(best - cand_len):
            best = r
    return best


def corpus_bleu(cands, refs_list, max_n=4):
    m = [0] * max_n
    t = [0] * max_n
    c_total, r_total = 0, 0
    for cand, refs in zip(cands, refs_list):
        for n in range(1, max_n + 1):
            match, total = clipped_matches(cand, refs, n)
            m[n - 1] += match
            t[n - 1] += total
        c_total += len(cand)
        r_total += closest_ref_length(len(cand), [len(r) for r in refs])
    if c_total == 0 or any(t[i] == 0 or m[i] == 0 for i in range(max_n)):
        return 0.0
    log_p = sum(math.log(m[i] / t[i]) for i in range(max_n)) / max_n
    bp = 1.0 if c_total >= r_total else math.exp(1.0 - r_total / c_total)
    return bp * math.exp(log_p)


def smoothed_sentence_bleu(cand, refs, max_n=4):
    if not cand:
        return 0.0
    m1, t1 = clipped_matches(cand, refs, 1)
    if m1 == 0 or t1 == 0:
        return 0.0
    log_p = math.log(m1 / t1)
    for n in range(2, max_n + 1):
        match, total = clipped_matches(cand, refs, n)
        log_p += math.log((match + 1) / (total + 1))
    r = closest_ref_length(len(cand), [len(x) for x in refs])
    bp = 1.0 if len(cand) >= r else math.exp(1.0 - r / len(cand))
    return bp * math.exp(log_p / max_n)


# --------------------------------------------------------------------------
# NIST
# --------------------------------------------------------------------------

def nist_info(refs_corpus, max_n):
    counts = Counter()
    total = 0
    for refs in refs_corpus:
        for ref in refs:
            total += len(ref)
            for n in range(1, max_n + 1):
                counts.update(ngram_list(ref, n))
    info = {}
    for gram in counts:
        denom = counts[gram]
        numer = total if len(gram) == 1 else counts[gram[:-1]]
        if numer > 0 and denom > 0:
            info[gram] = math.log(numer / denom, 2)
    return info


def corpus_nist(cands, refs_list, max_n=4):
    info = nist_info(refs_list, max_n)
    score = 0.0
    for n in range(1, max_n + 1):
        num = 0.0
        den = 0
        for cand, refs in zip(cands, refs_list):
            cand_counts = Counter(ngram_list(cand, n))
            den += sum(cand_counts.values())
            for gram, count in cand_counts.items():
                best = max((Counter(ngram_list(r, n))[gram] for r in refs), default=0)
                num += min(count, best) * info.get(gram, 0.0)
        if den:
            score += num / den
    c = sum(len(cand) for cand in cands)
    rbar = sum(sum(len(r) for r in refs) / len(refs) for refs in refs_list)
    if c == 0 or rbar == 0:
        return 0.0
    ratio = min(1.0, c / rbar)
    if ratio == 0.0:
        return 0.0
    beta = math.log(0.5) / math.log(1.5) ** 2
    return score * math.exp(beta * math.log(ratio) ** 2)


# --------------------------------------------------------------------------
# ROUGE-L (recursive LCS, memoized: deliberately not the DP used in-library)
# --------------------------------------------------------------------------

def lcs_recursive(a, b):
    a, b = tuple(a), tuple(b)

    @lru_cache(maxsize=None)
    def rec(i, j):
        if i == 0 or j == 0:
            return 0
        if a[i - 1] == b[j - 1]:
            return rec(i - 1, j - 1) + 1
        return max(rec(i - 1, j), rec(i, j - 1))

    return rec(len(a), len(b))


def rouge_l_item(cand, refs, beta=1.2):
    precs, recs = [0.0], [0.0]
    for ref in refs:
        lcs = lcs_recursive(cand, ref)
        if cand:
            precs.append(lcs / len(cand))
        if ref:
            recs.append(lcs / len(ref))
    p, r = max(precs), max(recs)
    if p == 0.0 and r == 0.0:
        return 0.0
    denom = r + beta * beta * p
    return (1 + beta * beta) * p * r / denom if denom else 0.0


def corpus_rouge_l(cands, refs_list, beta=1.2):
    values = [rouge_l_item(c, r, beta) for c, r in zip(cands, refs_list)]
    return sum(values) / len(values)


# --------------------------------------------------------------------------
# CIDEr
# --------------------------------------------------------------------------

def corpus_cider(cands, refs_list, max_n=4, sigma=6.0):
    n_items = len(cands)
    doc_freq = [Counter() for _ in range(max_n)]
    for refs in refs_list:
        for n in range(1, max_n + 1):
            grams = set()
            for ref in refs:
                grams.update(ngram_list(ref, n))
            for gram in grams:
                doc_freq[n - 1][gram] += 1

    def weights(tokens, n):
        counts = Counter(ngram_list(tokens, n))
        return {
            g: c * (math.log(n_items) - math.log(max(1.0, doc_freq[n - 1][g])))
            for g, c in counts.items()
        }

    per_item = []
    for cand, refs in zip(cands, refs_list):
        total = 0.0
        for n in range(1, max_n + 1):
            wc = weights(cand, n)
            norm_c = math.sqrt(sum(v * v for v in wc.values()))
            acc = 0.0
            for ref in refs:
                wr = weights(ref, n)
                norm_r = math.sqrt(sum(v * v for v in wr.values()))
                if norm_c == 0.0 or norm_r == 0.0:
                    continue
                dot = sum(v * wr.get(g, 0.0) for g, v in wc.items())
                penalty = math.exp(-((len(cand) - len(ref)) ** 2) / (2 * sigma * sigma))
                acc += dot / (norm_c * norm_r) * penalty
            total += acc / len(refs)
        per_item.append(10.0 * total / max_n)
    return sum(per_item) / len(per_item), per_item


# --------------------------------------------------------------------------
# Lexical diversity
# --------------------------------------------------------------------------

def mtld_oracle(tokens, threshold=0.72):
    def one_direction(seq):
        factors = 0.0
        segment = []
        for token in seq:
            segment.append(token)
            if len(set(segment)) / len(segment) < threshold:
                factors += 1.0
                segment = []
        if segment:
            ttr = len(set(segment)) / len(segment)
            factors += (1.0 - ttr) / (1.0 - threshold)
        if factors == 0.0:
            return float(len(seq))
        return len(seq) / factors

    return (one_direction(list(tokens)) + one_direction(list(reversed(tokens)))) / 2.0


# --------------------------------------------------------------------------
# Exhaustive approximate-randomization reference
# --------------------------------------------------------------------------

def exhaustive_ar_pvalue(values_a, values_b, corpus_fn):
    """Exact randomization p over all sign patterns.

    ``corpus_fn`` maps a list of per-item payloads to a corpus value;
    ``values_*`` are the aligned payload lists.
    """
    n = len(values_a)
    observed = abs(corpus_fn(values_b) - corpus_fn(values_a))
    hits = 0
    for pattern in itertools.product((0, 1), repeat=n):
        pa = [values_b[i] if bit else values_a[i] for i, bit in enumerate(pattern)]
        pb = [values_a[i] if bit else values_b[i] for i, bit in enumerate(pattern)]
        if abs(corpus_fn(pb) - corpus_fn(pa)) >= observed:
            hits += 1
    return hits / 2 ** n
