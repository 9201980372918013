"""Claim-Grounds-Warrant-Bucket records and model-output parsing.

The output contract is a fenced JSON block holding one record or a list
of records with the fields ``claim``, ``grounds``, ``warrant``,
``bucket``. Smaller models drift from JSON, so a labeled-lines fallback
("Claim: ...", "Grounds: ...", "Warrant: ...", "Bucket: ...") is also
accepted. Parsing is total: malformed content yields diagnostics, never
exceptions, so batch runs proceed.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Sequence

from .errors import DataError
from .evaluation.textnorm import collapse_whitespace, tokenize
from .segmentation import split_sentences

BUCKET_MORE = "more_probable"
BUCKET_LEAST = "least_probable"
BUCKETS = (BUCKET_MORE, BUCKET_LEAST)

DEFAULT_GROUNDING_RATIO = 0.8


@dataclass(frozen=True)
class TabiInference:
    """One abductive inference: the implied gap plus its justification."""

    claim: str
    grounds: tuple[str, ...]
    warrant: str
    bucket: str
    unit_ref: str = ""
    model_id: str = ""

    def __post_init__(self):
        if not self.claim.strip():
            raise DataError("inference with empty claim")
        if not self.grounds or any(not g.strip() for g in self.grounds):
            raise DataError("inference needs at least one non-empty ground")
        if self.bucket not in BUCKETS:
            raise DataError(f"unknown bucket {self.bucket!r}")
        if len(split_sentences(self.warrant)) != 1:
            raise DataError("warrant must be exactly one sentence")

    def to_json(self) -> dict:
        return {
            "unit_ref": self.unit_ref,
            "model_id": self.model_id,
            "claim": self.claim,
            "grounds": list(self.grounds),
            "warrant": self.warrant,
            "bucket": self.bucket,
        }

    @classmethod
    def from_json(cls, row: dict) -> "TabiInference":
        return cls(
            claim=row["claim"],
            grounds=tuple(row["grounds"]),
            warrant=row["warrant"],
            bucket=row["bucket"],
            unit_ref=row.get("unit_ref", ""),
            model_id=row.get("model_id", ""),
        )


@dataclass(frozen=True)
class ExtractedStatement:
    """One explicit gap statement extracted by a model."""

    text: str
    unit_ref: str = ""
    model_id: str = ""
    matched_cues: tuple[str, ...] = ()
    category: str | None = None

    def __post_init__(self):
        if not self.text.strip():
            raise DataError("extracted statement with empty text")


@dataclass(frozen=True)
class FulltextGapPair:
    """Document-level inference: an implied gap plus a suggested
    future direction, optionally backed by a quote."""

    gap: str
    future_direction: str
    doc_ref: str = ""
    model_id: str = ""
    evidence: str | None = None

    def __post_init__(self):
        if not self.gap.strip() or not self.future_direction.strip():
            raise DataError("gap pair needs both gap and future_direction")


@dataclass(frozen=True)
class ParseDiagnostic:
    reason: str
    excerpt: str

    def to_json(self) -> dict:
        return {"reason": self.reason, "excerpt": self.excerpt}


@dataclass(frozen=True)
class TabiParseResult:
    inferences: tuple[TabiInference, ...]
    diagnostics: tuple[ParseDiagnostic, ...]


_FENCE_RE = re.compile(r"```(?:json)?\s*\n(.*?)```", re.DOTALL)
_LABEL_RE = re.compile(r"^\s*(claim|grounds|warrant|bucket)\s*:\s*(.*)$", re.IGNORECASE)
_BULLET_RE = re.compile(r"^\s*(?:[-*•]|\d+[.)])\s+(.*)$")


def _normalize_bucket(raw) -> str | None:
    if not isinstance(raw, str):
        return None
    key = re.sub(r"[\s-]+", "_", raw.strip().lower())
    if key in BUCKETS:
        return key
    if key in ("more", "most_probable", "probable", "high", "more_likely"):
        return BUCKET_MORE
    if key in ("least", "less_probable", "less_likely", "low", "unlikely"):
        return BUCKET_LEAST
    return None


def _excerpt(text: str, limit: int = 120) -> str:
    flat = collapse_whitespace(text)
    return flat[:limit] + ("..." if len(flat) > limit else "")


def _build_inference(record: dict, unit_ref: str, model_id: str,
                     diagnostics: list[ParseDiagnostic]) -> TabiInference | None:
    source = _excerpt(json.dumps(record, sort_keys=True))
    claim = record.get("claim")
    if not isinstance(claim, str) or not claim.strip():
        diagnostics.append(ParseDiagnostic("missing claim", source))
        return None
    grounds_raw = record.get("grounds")
    if isinstance(grounds_raw, str):
        grounds_raw = [grounds_raw]
    if not isinstance(grounds_raw, list) or not grounds_raw or \
            any(not isinstance(g, str) or not g.strip() for g in grounds_raw):
        diagnostics.append(ParseDiagnostic("missing grounds", source))
        return None
    warrant = record.get("warrant")
    if not isinstance(warrant, str) or not warrant.strip():
        diagnostics.append(ParseDiagnostic("missing warrant", source))
        return None
    if len(split_sentences(warrant)) != 1:
        diagnostics.append(ParseDiagnostic("warrant is not a single sentence", source))
        return None
    bucket = _normalize_bucket(record.get("bucket"))
    if bucket is None:
        diagnostics.append(ParseDiagnostic("missing or invalid bucket", source))
        return None
    return TabiInference(
        claim=collapse_whitespace(claim),
        grounds=tuple(collapse_whitespace(g) for g in grounds_raw),
        warrant=collapse_whitespace(warrant),
        bucket=bucket,
        unit_ref=unit_ref,
        model_id=model_id,
    )


def _labeled_blocks(raw: str) -> list[dict]:
    """Parse 'Claim:/Grounds:/Warrant:/Bucket:' runs; a new 'Claim:'
    starts a new record. Grounds may continue on bulleted lines."""
    blocks: list[dict] = []
    current: dict | None = None
    current_field: str | None = None
    for line in raw.splitlines():
        match = _LABEL_RE.match(line)
        if match:
            label = match.group(1).lower()
            value = match.group(2).strip()
            if label == "claim":
                current = {"claim": value, "grounds": []}
                blocks.append(current)
                current_field = "claim"
                continue
            if current is None:
                continue
            if label == "grounds":
                if value:
                    current["grounds"].append(value)
                current_field = "grounds"
            else:
                current[label] = value
                current_field = label
        elif current is not None and current_field == "grounds":
            bullet = _BULLET_RE.match(line)
            if bullet:
                current["grounds"].append(bullet.group(1).strip())
    for block in blocks:
        # Grounds entered inline may be ';'-separated.
        if len(block["grounds"]) == 1 and ";" in block["grounds"][0]:
            block["grounds"] = [
                g.strip() for g in block["grounds"][0].split(";") if g.strip()
            ]
    return blocks


def parse_tabi_output(raw: str, unit_ref: str = "", model_id: str = "") -> TabiParseResult:
    """Parse a completion into inferences plus diagnostics. Never raises."""
    diagnostics: list[ParseDiagnostic] = []
    inferences: list[TabiInference] = []

    if not raw or not raw.strip():
        return TabiParseResult((), (ParseDiagnostic("no parseable block", ""),))

    records: list[dict] = []
    parsed_any_json = False
    for fence in _FENCE_RE.finditer(raw):
        body = fence.group(1).strip()
        try:
            payload = json.loads(body)
        except json.JSONDecodeError:
            diagnostics.append(ParseDiagnostic("unparseable JSON block", _excerpt(body)))
            continue
        parsed_any_json = True
        items = payload if isinstance(payload, list) else [payload]
        for item in items:
            if isinstance(item, dict):
                records.append(item)
            else:
                diagnostics.append(
                    ParseDiagnostic("non-object record", _excerpt(json.dumps(item)))
                )

    if not parsed_any_json and not records:
        # Bare JSON without fences.
        stripped = raw.strip()
        if stripped.startswith(("[", "{")):
            try:
                payload = json.loads(stripped)
                items = payload if isinstance(payload, list) else [payload]
                records.extend(i for i in items if isinstance(i, dict))
                parsed_any_json = True
            except json.JSONDecodeError:
                pass

    if not records:
        labeled = _labeled_blocks(raw)
        records.extend(labeled)

    for record in records:
        inference = _build_inference(record, unit_ref, model_id, diagnostics)
        if inference is not None:
            inferences.append(inference)

    if not inferences and not diagnostics:
        diagnostics.append(ParseDiagnostic("no parseable block", _excerpt(raw)))
    return TabiParseResult(tuple(inferences), tuple(diagnostics))


def parse_statement_output(raw: str, unit_ref: str = "",
                           model_id: str = "") -> tuple[tuple[ExtractedStatement, ...],
                                                        tuple[ParseDiagnostic, ...]]:
    """Parse an explicit-extraction completion into statements.

    Accepts a fenced (or bare) JSON array of strings, or fallback
    bulleted/numbered lines. An empty array is a legal 'no gaps' reply.
    """
    diagnostics: list[ParseDiagnostic] = []
    if not raw or not raw.strip():
        return (), (ParseDiagnostic("no parseable block", ""),)

    texts: list[str] | None = None
    for fence in _FENCE_RE.finditer(raw):
        body = fence.group(1).strip()
        try:
            payload = json.loads(body)
        except json.JSONDecodeError:
            diagnostics.append(ParseDiagnostic("unparseable JSON block", _excerpt(body)))
            continue
        if isinstance(payload, dict):
            payload = payload.get("statements", payload.get("gaps"))
        if isinstance(payload, list) and all(isinstance(s, str) for s in payload):
            texts = payload
            break
        diagnostics.append(ParseDiagnostic("not a string array", _excerpt(body)))
    if texts is None:
        stripped = raw.strip()
        if stripped.startswith("["):
            try:
                payload = json.loads(stripped)
                if isinstance(payload, list) and all(isinstance(s, str) for s in payload):
                    texts = payload
            except json.JSONDecodeError:
                pass
    if texts is None:
        bullets = [m.group(1).strip() for m in
                   (_BULLET_RE.match(line) for line in raw.splitlines()) if m]
        if bullets:
            texts = bullets
    if texts is None:
        diagnostics.append(ParseDiagnostic("no parseable block", _excerpt(raw)))
        return (), tuple(diagnostics)

    statements = []
    for text in texts:
        flat = collapse_whitespace(text)
        if flat:
            statements.append(ExtractedStatement(
                text=flat, unit_ref=unit_ref, model_id=model_id,
            ))
    return tuple(statements), tuple(diagnostics)


def parse_fulltext_output(raw: str, doc_ref: str = "",
                          model_id: str = "") -> tuple[tuple[FulltextGapPair, ...],
                                                       tuple[ParseDiagnostic, ...]]:
    """Parse a document-level completion into (gap, future direction) pairs."""
    diagnostics: list[ParseDiagnostic] = []
    if not raw or not raw.strip():
        return (), (ParseDiagnostic("no parseable block", ""),)

    records: list[dict] = []
    for fence in _FENCE_RE.finditer(raw):
        body = fence.group(1).strip()
        try:
            payload = json.loads(body)
        except json.JSONDecodeError:
            diagnostics.append(ParseDiagnostic("unparseable JSON block", _excerpt(body)))
            continue
        items = payload if isinstance(payload, list) else [payload]
        records.extend(i for i in items if isinstance(i, dict))
    if not records:
        stripped = raw.strip()
        if stripped.startswith(("[", "{")):
            try:
                payload = json.loads(stripped)
                items = payload if isinstance(payload, list) else [payload]
                records.extend(i for i in items if isinstance(i, dict))
            except json.JSONDecodeError:
                pass

    pairs = []
    for record in records:
        gap = record.get("gap")
        direction = record.get("future_direction")
        if not isinstance(gap, str) or not gap.strip():
            diagnostics.append(ParseDiagnostic(
                "missing gap", _excerpt(json.dumps(record, sort_keys=True))))
            continue
        if not isinstance(direction, str) or not direction.strip():
            diagnostics.append(ParseDiagnostic(
                "missing future_direction", _excerpt(json.dumps(record, sort_keys=True))))
            continue
        evidence = record.get("evidence")
        pairs.append(FulltextGapPair(
            gap=collapse_whitespace(gap),
            future_direction=collapse_whitespace(direction),
            evidence=collapse_whitespace(evidence) if isinstance(evidence, str) and
            evidence.strip() else None,
            doc_ref=doc_ref,
            model_id=model_id,
        ))
    if not pairs and not diagnostics:
        diagnostics.append(ParseDiagnostic("no parseable block", _excerpt(raw)))
    return tuple(pairs), tuple(diagnostics)


# ---------------------------------------------------------------------------
# Grounds verification

GROUND_EXACT = "exact"
GROUND_FUZZY = "fuzzy"
GROUND_UNSUPPORTED = "unsupported"


@dataclass(frozen=True)
class GroundCheck:
    ground: str
    status: str
    overlap: float


@dataclass(frozen=True)
class GroundingReport:
    checks: tuple[GroundCheck, ...]
    grounded: bool

    def to_json(self) -> dict:
        return {
            "grounded": self.grounded,
            "checks": [
                {"ground": c.ground, "status": c.status, "overlap": c.overlap}
                for c in self.checks
            ],
        }


def _token_coverage(ground_tokens: list[str], premise_tokens: list[str]) -> float:
    """Fraction of ground tokens present in the premise (multiset)."""
    if not ground_tokens:
        return 0.0
    pool: dict[str, int] = {}
    for tok in premise_tokens:
        pool[tok] = pool.get(tok, 0) + 1
    hit = 0
    for tok in ground_tokens:
        if pool.get(tok, 0) > 0:
            pool[tok] -= 1
            hit += 1
    return hit / len(ground_tokens)


def verify_grounds(
    inference: TabiInference,
    premise: str,
    fuzzy_ratio: float = DEFAULT_GROUNDING_RATIO,
) -> GroundingReport:
    """Check each ground against the premise: exact normalized substring,
    fuzzy (token coverage >= ratio), or unsupported."""
    if not premise.strip():
        raise ValueError("premise must be non-empty")
    premise_flat = collapse_whitespace(premise)
    premise_tokens = tokenize(premise)
    checks = []
    for ground in inference.grounds:
        coverage = _token_coverage(tokenize(ground), premise_tokens)
        if collapse_whitespace(ground) in premise_flat:
            status = GROUND_EXACT
        elif coverage >= fuzzy_ratio:
            status = GROUND_FUZZY
        else:
            status = GROUND_UNSUPPORTED
        checks.append(GroundCheck(ground=ground, status=status, overlap=coverage))
    return GroundingReport(
        checks=tuple(checks),
        grounded=all(c.status != GROUND_UNSUPPORTED for c in checks),
    )


def bucket_partition(
    inferences: Sequence[TabiInference],
) -> tuple[list[TabiInference], list[TabiInference]]:
    """Split inferences into (more_probable, least_probable) lists."""
    more = [inf for inf in inferences if inf.bucket == BUCKET_MORE]
    least = [inf for inf in inferences if inf.bucket == BUCKET_LEAST]
    return more, least
