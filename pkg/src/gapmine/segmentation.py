"""Sentence segmentation and sentence-aligned chunking under a word budget.

The splitter is deliberately rule-based so runs are deterministic and
self-contained; any external segmenter can be plugged in instead, since
every consumer takes the splitter as a plain ``callable(text) -> list[str]``.

Chunking packs whole sentences greedily: a sentence joins the current
chunk only while the running word count stays within the budget,
otherwise it starts the next chunk. A single sentence longer than the
budget becomes its own oversize chunk (sentences are never split).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Sequence, TYPE_CHECKING

from .evaluation.textnorm import collapse_whitespace

if TYPE_CHECKING:  # pragma: no cover
    from .corpus import Section, Sentence

SentenceSplitter = Callable[[str], "list[str]"]

DEFAULT_CHUNK_BUDGET = 1000

# Tokens after which a period does not end a sentence. Lowercased,
# trailing period included. Biased toward biomedical prose.
_ABBREVIATIONS = frozenset({
    "fig.", "figs.", "eq.", "eqs.", "ref.", "refs.", "sec.", "tab.",
    "no.", "nos.", "vol.", "pp.", "p.", "ca.", "cf.", "vs.", "al.",
    "e.g.", "i.e.", "etc.", "resp.", "approx.", "dr.", "prof.", "mr.",
    "mrs.", "ms.", "st.", "inc.", "ltd.", "spp.", "sp.", "var.",
    "mol.", "biol.", "chem.", "med.", "sci.", "acad.", "natl.", "proc.",
})

# Candidate boundary: terminal punctuation, optional closing quotes or
# brackets, then whitespace.
_BOUNDARY_RE = re.compile(r"[.!?]+[\"'”’)\]]*\s+")
_INITIAL_RE = re.compile(r"[A-Za-z]\.")
_SPACED_DECIMAL_RE = re.compile(r"\d+\.")


def _last_token(text: str) -> str:
    parts = text.rsplit(None, 1)
    return parts[-1] if parts else ""


def split_sentences(text: str) -> list[str]:
    """Split ``text`` into sentences.

    Guards against splitting after known abbreviations, single-letter
    initials, and decimal digits. The whitespace-normalized join of the
    result equals the whitespace-normalized input; no sentence is empty.
    """
    sentences: list[str] = []
    start = 0
    for match in _BOUNDARY_RE.finditer(text):
        punct_end = match.start() + len(match.group(0).rstrip())
        before = text[start:punct_end]
        last = _last_token(before).lower()
        if last in _ABBREVIATIONS:
            continue
        if " ".join(before.split()[-2:]).lower() in _ABBREVIATIONS:
            continue
        if _INITIAL_RE.fullmatch(last):
            continue
        nxt = text[match.end():match.end() + 1]
        # Lowercase continuation: almost always an unlisted abbreviation.
        if nxt.islower():
            continue
        # Spaced decimal ("3. 5") never splits.
        if nxt.isdigit() and _SPACED_DECIMAL_RE.fullmatch(last):
            continue
        piece = before.strip()
        if piece:
            sentences.append(piece)
            start = match.end()
    tail = text[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences


def word_count(text: str) -> int:
    """Number of maximal non-whitespace runs."""
    return len(text.split())


@dataclass(frozen=True)
class Chunk:
    """A sentence-aligned slice of a section, at most ``budget`` words
    unless it holds exactly one oversize sentence."""

    chunk_id: str
    parent_id: str
    start: int
    end: int  # inclusive index into the parent's sentence sequence
    word_count: int
    ordinal: int

    def manifest_row(self) -> dict:
        return {
            "chunk_id": self.chunk_id,
            "parent_id": self.parent_id,
            "ordinal": self.ordinal,
            "start": self.start,
            "end": self.end,
            "word_count": self.word_count,
        }


def pack_spans(word_counts: Sequence[int], budget: int) -> list[tuple[int, int]]:
    """Greedy first-fit packing of sentence word counts into inclusive
    (start, end) spans. Core of :func:`chunk_sentences`, exposed for
    property testing."""
    if budget < 1:
        raise ValueError("budget must be >= 1")
    spans: list[tuple[int, int]] = []
    start = None
    running = 0
    for i, wc in enumerate(word_counts):
        if start is None:
            start, running = i, wc
        elif running + wc <= budget:
            running += wc
        else:
            spans.append((start, i - 1))
            start, running = i, wc
    if start is not None:
        spans.append((start, len(word_counts) - 1))
    return spans


def chunk_sentences(
    sentences: Sequence["Sentence"],
    parent_id: str,
    budget: int = DEFAULT_CHUNK_BUDGET,
) -> list[Chunk]:
    """Pack ``sentences`` (in order) into chunks for ``parent_id``."""
    spans = pack_spans([s.word_count for s in sentences], budget)
    chunks = []
    for ordinal, (start, end) in enumerate(spans):
        wc = sum(s.word_count for s in sentences[start:end + 1])
        chunks.append(Chunk(
            chunk_id=f"{parent_id}#c{ordinal}",
            parent_id=parent_id,
            start=start,
            end=end,
            word_count=wc,
            ordinal=ordinal,
        ))
    return chunks


def chunk_section(section: "Section", budget: int = DEFAULT_CHUNK_BUDGET) -> list[Chunk]:
    """Chunk a section's flattened sentence sequence."""
    return chunk_sentences(section.sentences, section.section_id, budget)


def chunk_text(sentences: Sequence["Sentence"], chunk: Chunk) -> str:
    """Reassemble the text covered by ``chunk``."""
    return collapse_whitespace(
        " ".join(s.text for s in sentences[chunk.start:chunk.end + 1])
    )
