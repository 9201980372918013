"""Clients for the external NLI entailment scorer.

Wire contract: HTTP POST with ``{"pairs": [{"premise", "hypothesis"}]}``,
response ``{"scores": [p, ...]}`` with one probability in [0, 1] per
pair, order-preserving. A deterministic table-backed mock ships for
tests and offline runs. Scores are cached by text-pair digest.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol, Sequence

import requests

from ..errors import MalformedScorerResponse, ServiceError, TransportError

DEFAULT_ENTAILMENT_THRESHOLD = 0.4


class NliScorer(Protocol):
    scorer_id: str

    def score_pairs(self, pairs: Sequence[tuple[str, str]]) -> list[float]:
        """Entailment probability premise -> hypothesis for each pair."""
        ...  # pragma: no cover


def _check_scores(raw, n_expected: int) -> list[float]:
    if not isinstance(raw, list) or len(raw) != n_expected:
        raise MalformedScorerResponse(
            f"scorer returned {len(raw) if isinstance(raw, list) else type(raw)} "
            f"scores for {n_expected} pairs"
        )
    scores = []
    for value in raw:
        if not isinstance(value, (int, float)) or not 0.0 <= value <= 1.0:
            raise MalformedScorerResponse(f"score out of range: {value!r}")
        scores.append(float(value))
    return scores


@dataclass
class HttpNliScorer:
    base_url: str
    path: str = "/score"
    timeout: float = 30.0
    max_attempts: int = 3
    backoff_base: float = 0.5
    scorer_id: str = "http"

    def score_pairs(self, pairs: Sequence[tuple[str, str]]) -> list[float]:
        payload = {"pairs": [{"premise": p, "hypothesis": h} for p, h in pairs]}
        url = self.base_url.rstrip("/") + self.path
        last_exc: Exception | None = None
        for attempt in range(1, self.max_attempts + 1):
            try:
                resp = requests.post(url, json=payload, timeout=self.timeout)
            except requests.RequestException as exc:
                last_exc = TransportError(f"scorer unreachable: {exc}")
            else:
                if resp.status_code == 200:
                    try:
                        body = resp.json()
                    except ValueError as exc:
                        raise MalformedScorerResponse(f"non-JSON scorer reply: {exc}")
                    return _check_scores(body.get("scores"), len(pairs))
                if resp.status_code in (429,) or resp.status_code >= 500:
                    last_exc = ServiceError(f"scorer HTTP {resp.status_code}")
                else:
                    raise ServiceError(
                        f"scorer HTTP {resp.status_code}: {resp.text[:500]}"
                    )
            if attempt < self.max_attempts:
                time.sleep(self.backoff_base * 2 ** (attempt - 1))
        raise last_exc  # type: ignore[misc]


@dataclass
class MockNliScorer:
    """Canned-table scorer: identical texts score 1.0 (when reflexive),
    known pairs come from the table (optionally symmetric), everything
    else gets the default."""

    table: dict[tuple[str, str], float] = field(default_factory=dict)
    reflexive: bool = True
    symmetric: bool = True
    default: float = 0.0
    scorer_id: str = "mock"

    def __post_init__(self):
        for value in self.table.values():
            _check_scores([value], 1)

    @classmethod
    def from_table_file(cls, path: str | Path, **kwargs) -> "MockNliScorer":
        """Load ``{"pairs": [{"premise", "hypothesis", "score"}]}``."""
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        table = {
            (row["premise"], row["hypothesis"]): float(row["score"])
            for row in data.get("pairs", [])
        }
        return cls(table=table, **kwargs)

    def score_pairs(self, pairs: Sequence[tuple[str, str]]) -> list[float]:
        out = []
        for premise, hypothesis in pairs:
            if self.reflexive and premise == hypothesis:
                out.append(1.0)
            elif (premise, hypothesis) in self.table:
                out.append(self.table[(premise, hypothesis)])
            elif self.symmetric and (hypothesis, premise) in self.table:
                out.append(self.table[(hypothesis, premise)])
            else:
                out.append(self.default)
        return _check_scores(out, len(pairs))


class CachingScorer:
    """Wraps a scorer with a digest-keyed JSON file cache."""

    def __init__(self, scorer: NliScorer, cache_dir: str | Path):
        self._scorer = scorer
        self._dir = Path(cache_dir)
        self._dir.mkdir(parents=True, exist_ok=True)
        self.scorer_id = scorer.scorer_id

    def _key(self, premise: str, hypothesis: str) -> Path:
        digest = hashlib.sha256(
            json.dumps([self.scorer_id, premise, hypothesis]).encode("utf-8")
        ).hexdigest()
        return self._dir / f"{digest}.json"

    def score_pairs(self, pairs: Sequence[tuple[str, str]]) -> list[float]:
        out: list[float | None] = [None] * len(pairs)
        missing: list[int] = []
        for i, (premise, hypothesis) in enumerate(pairs):
            path = self._key(premise, hypothesis)
            if path.exists():
                out[i] = _check_scores(
                    [json.loads(path.read_text(encoding="utf-8"))["score"]], 1
                )[0]
            else:
                missing.append(i)
        if missing:
            fresh = self._scorer.score_pairs([pairs[i] for i in missing])
            for i, score in zip(missing, fresh):
                path = self._key(*pairs[i])
                tmp = path.with_suffix(".tmp")
                tmp.write_text(json.dumps({"score": score}), encoding="utf-8")
                tmp.replace(path)
                out[i] = score
        return [float(s) for s in out]  # type: ignore[arg-type]


def entailment_score(premise: str, hypothesis: str, scorer: NliScorer) -> float:
    """Directional entailment probability for (premise -> hypothesis)."""
    if not premise.strip() or not hypothesis.strip():
        raise ValueError("premise and hypothesis must be non-empty")
    return scorer.score_pairs([(premise, hypothesis)])[0]


def bidirectional_entailment(
    a: str, b: str, scorer: NliScorer, combiner: str = "min"
) -> float:
    """Combine both entailment directions; min is the conservative default."""
    forward, backward = scorer.score_pairs([(a, b), (b, a)])
    if combiner == "min":
        return min(forward, backward)
    if combiner == "mean":
        return (forward + backward) / 2.0
    raise ValueError(f"unknown combiner {combiner!r}")
