"""One-to-one prediction/gold matching and precision-recall aggregation.

Matching is greedy by descending score: the highest-scoring remaining
(prediction, gold) pair at or above the threshold is selected until no
pair qualifies; ties break on (lower prediction index, lower gold
index). Leftover predictions become false positives, leftover golds
false negatives. An optimal-assignment mode (Hungarian, via scipy) is
available behind a flag for sensitivity analysis.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

from .rouge import rouge_l_f1
from .textnorm import collapse_whitespace

DEFAULT_MATCH_THRESHOLD = 0.55

TRUE_POSITIVE = "true_positive"
FALSE_POSITIVE = "false_positive"
FALSE_NEGATIVE = "false_negative"


@dataclass(frozen=True)
class MatchResult:
    """One row of the one-to-one assignment.

    ``score`` is the matched-pair similarity and is nonzero only on
    true-positive rows, so ``outcome == true_positive`` iff
    ``score >= threshold``. ``best_score`` keeps the best similarity the
    unmatched side saw, as a diagnostic (it may exceed the threshold when
    the counterpart was claimed by a stronger prediction).
    """

    pred_ref: str | None
    gold_ref: str | None
    score: float
    exact: bool
    outcome: str
    doc_ref: str | None = None
    best_score: float = 0.0


@dataclass(frozen=True)
class DocMetrics:
    doc_ref: str
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class MetricsReport:
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int
    threshold: float
    per_document: tuple[DocMetrics, ...] = ()


def _prf(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = (2 * precision * recall / (precision + recall)
          if precision + recall else 0.0)
    return precision, recall, f1


def _is_exact(a: str, b: str) -> bool:
    return collapse_whitespace(a).casefold() == collapse_whitespace(b).casefold()


def _passes(score: float, threshold: float, comparator: str) -> bool:
    if comparator == "gte":
        return score >= threshold
    if comparator == "gt":
        return score > threshold
    raise ValueError(f"unknown comparator {comparator!r}")


def match_one_to_one(
    preds: Sequence[tuple[str, str]],
    golds: Sequence[tuple[str, str]],
    threshold: float = DEFAULT_MATCH_THRESHOLD,
    use_stemming: bool = True,
    comparator: str = "gte",
    score_fn: Callable[[str, str], float] | None = None,
    mode: str = "greedy",
    doc_ref: str | None = None,
) -> list[MatchResult]:
    """Match ``preds`` against ``golds``, both sequences of (ref, text).

    ``score_fn`` defaults to stemmed ROUGE-L F1; injecting a different
    scorer is supported for property tests and sensitivity analysis.
    """
    if not 0 < threshold <= 1:
        raise ValueError("threshold must be in (0, 1]")
    if score_fn is None:
        score_fn = lambda c, r: rouge_l_f1(c, r, use_stemming=use_stemming)

    scores = [
        [score_fn(p_text, g_text) for _, g_text in golds]
        for _, p_text in preds
    ]
    if mode == "greedy":
        pairs = _greedy_pairs(scores, threshold, comparator)
    elif mode == "optimal":
        pairs = _optimal_pairs(scores, threshold, comparator)
    else:
        raise ValueError(f"unknown matching mode {mode!r}")

    matched_preds = {pi for pi, _ in pairs}
    matched_golds = {gi for _, gi in pairs}
    results = []
    for pi, gi in sorted(pairs):
        results.append(MatchResult(
            pred_ref=preds[pi][0],
            gold_ref=golds[gi][0],
            score=scores[pi][gi],
            exact=_is_exact(preds[pi][1], golds[gi][1]),
            outcome=TRUE_POSITIVE,
            doc_ref=doc_ref,
            best_score=scores[pi][gi],
        ))
    for pi, (ref, _) in enumerate(preds):
        if pi not in matched_preds:
            results.append(MatchResult(
                pred_ref=ref, gold_ref=None, score=0.0, exact=False,
                outcome=FALSE_POSITIVE, doc_ref=doc_ref,
                best_score=max(scores[pi], default=0.0),
            ))
    for gi, (ref, _) in enumerate(golds):
        if gi not in matched_golds:
            results.append(MatchResult(
                pred_ref=None, gold_ref=ref, score=0.0, exact=False,
                outcome=FALSE_NEGATIVE, doc_ref=doc_ref,
                best_score=max((row[gi] for row in scores), default=0.0),
            ))
    return results


def _greedy_pairs(scores, threshold, comparator) -> list[tuple[int, int]]:
    candidates = sorted(
        (
            (-scores[pi][gi], pi, gi)
            for pi in range(len(scores))
            for gi in range(len(scores[pi]))
            if _passes(scores[pi][gi], threshold, comparator)
        ),
    )
    used_p: set[int] = set()
    used_g: set[int] = set()
    pairs = []
    for _, pi, gi in candidates:
        if pi in used_p or gi in used_g:
            continue
        used_p.add(pi)
        used_g.add(gi)
        pairs.append((pi, gi))
    return pairs


def _optimal_pairs(scores, threshold, comparator) -> list[tuple[int, int]]:
    try:
        from scipy.optimize import linear_sum_assignment
    except ImportError as exc:  # pragma: no cover
        raise RuntimeError(
            "optimal matching requires scipy (install gapmine[assignment])"
        ) from exc
    import numpy as np

    if not scores or not scores[0]:
        return []
    cost = -np.asarray(scores)
    rows, cols = linear_sum_assignment(cost)
    return [
        (int(pi), int(gi))
        for pi, gi in zip(rows, cols)
        if _passes(scores[pi][gi], threshold, comparator)
    ]


def aggregate_prf(
    matches: Sequence[MatchResult],
    scope: str = "pooled",
    threshold: float = DEFAULT_MATCH_THRESHOLD,
) -> MetricsReport:
    """Aggregate match results into a metrics report.

    Pooled scope micro-averages: counts are summed before dividing.
    ``per_document`` scope additionally reports a per-doc breakdown
    (rows keyed by ``doc_ref``); overall numbers stay micro-averaged.
    """
    tp = sum(1 for m in matches if m.outcome == TRUE_POSITIVE)
    fp = sum(1 for m in matches if m.outcome == FALSE_POSITIVE)
    fn = sum(1 for m in matches if m.outcome == FALSE_NEGATIVE)
    precision, recall, f1 = _prf(tp, fp, fn)
    per_document: tuple[DocMetrics, ...] = ()
    if scope == "per_document":
        by_doc: dict[str, list[MatchResult]] = {}
        for m in matches:
            by_doc.setdefault(m.doc_ref or "", []).append(m)
        rows = []
        for doc_ref in sorted(by_doc):
            doc_matches = by_doc[doc_ref]
            dtp = sum(1 for m in doc_matches if m.outcome == TRUE_POSITIVE)
            dfp = sum(1 for m in doc_matches if m.outcome == FALSE_POSITIVE)
            dfn = sum(1 for m in doc_matches if m.outcome == FALSE_NEGATIVE)
            dp, dr, df1 = _prf(dtp, dfp, dfn)
            rows.append(DocMetrics(doc_ref, dtp, dfp, dfn, dp, dr, df1))
        per_document = tuple(rows)
    elif scope != "pooled":
        raise ValueError(f"unknown scope {scope!r}")
    return MetricsReport(precision=precision, recall=recall, f1=f1,
                         tp=tp, fp=fp, fn=fn, threshold=threshold,
                         per_document=per_document)
