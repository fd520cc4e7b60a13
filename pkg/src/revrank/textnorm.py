"""Shared text normalization: one tokenizer for captions, corpora and labels.

Lowercase, split on Unicode whitespace, strip ASCII punctuation from token
edges, drop anything left empty.  Candidates and references must go through
the same function or n-gram overlap is meaningless.
"""

from __future__ import annotations

import string
from functools import lru_cache
from importlib import resources

_PUNCT = string.punctuation


def tokenize(text: str) -> list[str]:
    tokens = []
    for raw in text.lower().split():
        token = raw.strip(_PUNCT)
        if token:
            tokens.append(token)
    return tokens


def content_tokens(tokens: list[str], stopwords: frozenset[str]) -> list[str]:
    return [t for t in tokens if t not in stopwords]


@lru_cache(maxsize=1)
def default_stopwords() -> frozenset[str]:
    """Bundled English stopword list (one token per line)."""
    text = resources.files("revrank").joinpath("data/stopwords.txt").read_text("utf-8")
    return frozenset(line.strip() for line in text.splitlines() if line.strip())


def load_stopwords(path) -> frozenset[str]:
    with open(path, encoding="utf-8") as fh:
        return frozenset(line.strip().lower() for line in fh if line.strip())
