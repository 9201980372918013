"""ROUGE-L F1 over normalized (optionally stemmed) token sequences."""

from __future__ import annotations

from typing import Sequence

from .textnorm import tokenize


def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    """Length of the longest common subsequence, O(len(a)*len(b))."""
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for tok_a in a:
        cur = [0]
        append = cur.append
        for j, tok_b in enumerate(b):
            if tok_a == tok_b:
                append(prev[j] + 1)
            else:
                left = cur[j]
                up = prev[j + 1]
                append(left if left >= up else up)
        prev = cur
    return prev[-1]


def rouge_l_from_tokens(candidate: Sequence[str], reference: Sequence[str]) -> float:
    """F1 of LCS-based precision and recall; 0 when either side is empty."""
    if not candidate or not reference:
        return 0.0
    lcs = lcs_length(candidate, reference)
    if lcs == 0:
        return 0.0
    precision = lcs / len(candidate)
    recall = lcs / len(reference)
    return 2 * precision * recall / (precision + recall)


def rouge_l_f1(candidate: str, reference: str, use_stemming: bool = True) -> float:
    """ROUGE-L F1 similarity of two texts in [0, 1]."""
    return rouge_l_from_tokens(
        tokenize(candidate, use_stemming=use_stemming),
        tokenize(reference, use_stemming=use_stemming),
    )
