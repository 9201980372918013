"""Tokenization and normalization used by every similarity computation.

Pipeline: lowercase, strip punctuation (intra-word hyphens survive so
terms like "non-diabetic" stay one token), split on whitespace, then
optionally Porter-stem each token.
"""

from __future__ import annotations

import re

from .porter import stem

# Any character that is not a word character, whitespace, or hyphen.
_PUNCT_RE = re.compile(r"[^\w\s-]+")
# Hyphens not flanked by alphanumerics on both sides.
_HYPHEN_EDGE_RE = re.compile(r"(?<![0-9A-Za-z])-+|-+(?![0-9A-Za-z])")
_WS_RE = re.compile(r"\s+")


def tokenize(text: str, use_stemming: bool = True) -> list[str]:
    """Normalize ``text`` into a token list."""
    lowered = text.lower()
    stripped = _PUNCT_RE.sub(" ", lowered)
    stripped = _HYPHEN_EDGE_RE.sub(" ", stripped)
    tokens = stripped.split()
    if use_stemming:
        return [stem(tok) for tok in tokens]
    return tokens


def normalized_key(text: str, use_stemming: bool = True) -> str:
    """Canonical single-string form of ``text`` for exact-duplicate checks."""
    return " ".join(tokenize(text, use_stemming=use_stemming))


def collapse_whitespace(text: str) -> str:
    """Trim and collapse runs of whitespace to single spaces."""
    return _WS_RE.sub(" ", text).strip()
