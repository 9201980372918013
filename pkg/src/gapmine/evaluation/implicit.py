"""Scoring for the implicit-gap experiment.

A unit (masked paragraph) counts correct when any predicted claim and
any gold conclusion pass the bidirectional entailment threshold
(strict '>' by default). Warrant-against-premise entailment is
reported as a diagnostic per inference; strict mode additionally gates
correctness on the matching claim's warrant being grounded.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from ..corpus import GoldGap
from ..errors import DataError
from ..tabi import TabiInference, BUCKET_MORE, BUCKET_LEAST
from .entailment import (
    DEFAULT_ENTAILMENT_THRESHOLD,
    NliScorer,
    bidirectional_entailment,
)


@dataclass(frozen=True)
class ImplicitUnitResult:
    unit_ref: str
    model_id: str
    correct: bool
    match_bucket: str | None
    matched_claim: str | None
    matched_gold_ref: str | None
    best_score: float
    n_inferences: int
    n_more: int
    n_least: int
    warrant_grounded: tuple[bool, ...]

    def to_json(self) -> dict:
        return {
            "unit_ref": self.unit_ref,
            "model_id": self.model_id,
            "correct": self.correct,
            "match_bucket": self.match_bucket,
            "matched_claim": self.matched_claim,
            "matched_gold_ref": self.matched_gold_ref,
            "best_score": self.best_score,
            "n_inferences": self.n_inferences,
            "n_more": self.n_more,
            "n_least": self.n_least,
            "warrant_grounded": list(self.warrant_grounded),
        }


@dataclass(frozen=True)
class CalibrationReport:
    correct_more: int
    correct_least: int
    total_more: int
    total_least: int
    least_fraction_of_correct: float | None

    def to_json(self) -> dict:
        out = {
            "correct_more": self.correct_more,
            "correct_least": self.correct_least,
            "total_more": self.total_more,
            "total_least": self.total_least,
        }
        if self.least_fraction_of_correct is not None:
            out["least_fraction_of_correct"] = self.least_fraction_of_correct
        return out


def _passes(score: float, threshold: float, comparator: str) -> bool:
    if comparator == "gt":
        return score > threshold
    if comparator == "gte":
        return score >= threshold
    raise ValueError(f"unknown comparator {comparator!r}")


def score_implicit(
    inferences: Sequence[TabiInference],
    golds: Sequence[GoldGap],
    premise: str,
    scorer: NliScorer,
    threshold: float = DEFAULT_ENTAILMENT_THRESHOLD,
    comparator: str = "gt",
    combiner: str = "min",
    strict: bool = False,
    unit_ref: str = "",
    model_id: str = "",
) -> ImplicitUnitResult:
    """Score one unit's inferences against its masked gold conclusions."""
    if not golds:
        raise DataError(f"unit {unit_ref!r}: no gold conclusions to score against")
    if inferences:
        unit_ref = unit_ref or inferences[0].unit_ref
        model_id = model_id or inferences[0].model_id

    warrant_grounded = tuple(
        _passes(
            bidirectional_entailment(inf.warrant, premise, scorer, combiner),
            threshold, comparator,
        )
        for inf in inferences
    )

    best_score = 0.0
    match: tuple[int, GoldGap] | None = None
    for i, inf in enumerate(inferences):
        for gold in golds:
            score = bidirectional_entailment(inf.claim, gold.text, scorer, combiner)
            best_score = max(best_score, score)
            if match is None and _passes(score, threshold, comparator):
                if not strict or warrant_grounded[i]:
                    match = (i, gold)

    correct = match is not None
    return ImplicitUnitResult(
        unit_ref=unit_ref,
        model_id=model_id,
        correct=correct,
        match_bucket=inferences[match[0]].bucket if match else None,
        matched_claim=inferences[match[0]].claim if match else None,
        matched_gold_ref=match[1].gap_id if match else None,
        best_score=best_score,
        n_inferences=len(inferences),
        n_more=sum(1 for inf in inferences if inf.bucket == BUCKET_MORE),
        n_least=sum(1 for inf in inferences if inf.bucket == BUCKET_LEAST),
        warrant_grounded=warrant_grounded,
    )


def implicit_accuracy(unit_results: Sequence[ImplicitUnitResult]) -> tuple[int, float]:
    """(count_correct, accuracy); accuracy is 0 for empty input."""
    count = sum(1 for r in unit_results if r.correct)
    return count, (count / len(unit_results) if unit_results else 0.0)


def union_accuracy(
    per_model: Mapping[str, Sequence[ImplicitUnitResult]],
) -> tuple[int, float]:
    """'All models' pooling: a unit is correct if any model got it right.

    All models must cover the same unit set.
    """
    if not per_model:
        return 0, 0.0
    unit_sets = {
        model: frozenset(r.unit_ref for r in results)
        for model, results in per_model.items()
    }
    reference = next(iter(unit_sets.values()))
    for model, units in unit_sets.items():
        if units != reference:
            raise DataError(
                f"model {model!r} covers a different unit set than the others"
            )
    correct_units = set()
    for results in per_model.values():
        correct_units.update(r.unit_ref for r in results if r.correct)
    total = len(reference)
    return len(correct_units), (len(correct_units) / total if total else 0.0)


def calibration(unit_results: Sequence[ImplicitUnitResult]) -> CalibrationReport:
    """Partition correct units by the bucket their match came from."""
    correct_more = sum(
        1 for r in unit_results if r.correct and r.match_bucket == BUCKET_MORE
    )
    correct_least = sum(
        1 for r in unit_results if r.correct and r.match_bucket == BUCKET_LEAST
    )
    denominator = correct_more + correct_least
    return CalibrationReport(
        correct_more=correct_more,
        correct_least=correct_least,
        total_more=sum(r.n_more for r in unit_results),
        total_least=sum(r.n_least for r in unit_results),
        least_fraction_of_correct=(
            correct_least / denominator if denominator else None
        ),
    )
