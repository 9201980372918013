"""Ignorance-cue dictionary: validation and five-way categorization.

A cue matches a statement when its stemmed token sequence occurs
contiguously in the stemmed statement tokens, so inflection and casing
differences do not break matches. Category classification is plurality
voting over matched cues with ties broken by the fixed category order.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from importlib.resources import files
from pathlib import Path

from ..errors import DataError
from .textnorm import tokenize

CATEGORIES = (
    "research_aim",
    "levels_of_evidence",
    "anomaly_curious_finding",
    "barrier",
    "future_opportunity",
)


@dataclass(frozen=True)
class CueMatch:
    cue: str
    category: str


@dataclass(frozen=True)
class CueDictionary:
    entries: tuple[tuple[str, str], ...]  # (cue, category)
    version_tag: str = "unversioned"

    def __post_init__(self):
        if not self.entries:
            raise DataError("cue dictionary is empty")
        seen: set[tuple[str, ...]] = set()
        for cue, category in self.entries:
            if not cue.strip():
                raise DataError("empty cue in dictionary")
            if category not in CATEGORIES:
                raise DataError(f"cue {cue!r}: unknown category {category!r}")
            key = tuple(tokenize(cue))
            if key in seen:
                raise DataError(f"cue {cue!r} duplicates another entry after stemming")
            seen.add(key)

    @classmethod
    def from_csv(cls, path: str | Path, version_tag: str | None = None) -> "CueDictionary":
        path = Path(path)
        with path.open("r", encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or \
                    [f.strip() for f in reader.fieldnames[:2]] != ["cue", "category"]:
                raise DataError(f"{path}: expected header 'cue,category'")
            entries = tuple(
                (row["cue"].strip(), row["category"].strip()) for row in reader
            )
        return cls(entries=entries, version_tag=version_tag or path.stem)


def default_dictionary() -> CueDictionary:
    """The dictionary bundled with the package."""
    resource = files("gapmine").joinpath("assets/cues_default.csv")
    with resource.open("r", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        entries = tuple((row["cue"].strip(), row["category"].strip()) for row in reader)
    return CueDictionary(entries=entries, version_tag="default/v1")


def _contains_subsequence(haystack: list[str], needle: list[str]) -> bool:
    if not needle or len(needle) > len(haystack):
        return False
    first = needle[0]
    limit = len(haystack) - len(needle) + 1
    for i in range(limit):
        if haystack[i] == first and haystack[i:i + len(needle)] == needle:
            return True
    return False


def cue_validate(statement: str, dictionary: CueDictionary) -> list[CueMatch]:
    """All dictionary cues whose stemmed tokens occur contiguously in the
    stemmed statement, in dictionary order."""
    tokens = tokenize(statement)
    matches = []
    for cue, category in dictionary.entries:
        if _contains_subsequence(tokens, tokenize(cue)):
            matches.append(CueMatch(cue=cue, category=category))
    return matches


def classify_category(statement: str, dictionary: CueDictionary) -> str | None:
    """Plurality category of the statement's matched cues, ties broken by
    the fixed category order; None when nothing matches."""
    matches = cue_validate(statement, dictionary)
    if not matches:
        return None
    counts = {cat: 0 for cat in CATEGORIES}
    for m in matches:
        counts[m.category] += 1
    return max(CATEGORIES, key=lambda cat: (counts[cat], -CATEGORIES.index(cat)))
