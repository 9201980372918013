"""Corpus model: documents, sections, paragraphs, sentences, gold gaps.

Three interchange formats are supported:

* ``paragraph_jsonl`` — one JSON object per paragraph:
  ``{para_id, text | sentences[], gold_gaps[], masked_conclusions[], flags[]}``.
  Each record is wrapped in its own single-section document so that
  paragraph-level corpora still satisfy the document invariants.
* ``section_jsonl`` — one JSON object per section:
  ``{doc_id, section_id, heading, paragraphs[], gold_gaps[]}``; lines
  sharing a ``doc_id`` are grouped into one document.
* ``fulltext_dir`` — one UTF-8 text file per document with
  ``---SECTION: <heading>---`` delimiter lines; paragraphs split on
  blank lines.

A loaded corpus is immutable (frozen dataclasses, tuples throughout)
and safe to share across threads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterator

from .errors import DataError, DuplicateIdError, MalformedRecordError, MaskingError
from .evaluation.textnorm import collapse_whitespace
from .segmentation import SentenceSplitter, split_sentences

SCHEMA_VERSION = 1

KIND_EXPLICIT = "explicit"
KIND_IMPLICIT = "implicit"
GAP_KINDS = (KIND_EXPLICIT, KIND_IMPLICIT)

# Fixed order; also the tie-break order for category classification.
CATEGORIES = (
    "research_aim",
    "levels_of_evidence",
    "anomaly_curious_finding",
    "barrier",
    "future_opportunity",
)

FORMAT_PARAGRAPH = "paragraph_jsonl"
FORMAT_SECTION = "section_jsonl"
FORMAT_FULLTEXT = "fulltext_dir"
FORMATS = (FORMAT_PARAGRAPH, FORMAT_SECTION, FORMAT_FULLTEXT)


@dataclass(frozen=True)
class Sentence:
    sent_id: str
    text: str
    word_count: int

    @classmethod
    def make(cls, sent_id: str, text: str) -> "Sentence":
        return cls(sent_id=sent_id, text=text, word_count=len(text.split()))


@dataclass(frozen=True)
class GoldGap:
    """An annotated gap statement attached to a paragraph or section."""

    gap_id: str
    text: str
    kind: str
    unit_ref: str
    category: str | None = None
    flags: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind not in GAP_KINDS:
            raise DataError(f"gold gap {self.gap_id!r}: unknown kind {self.kind!r}")
        if self.category is not None and self.category not in CATEGORIES:
            raise DataError(
                f"gold gap {self.gap_id!r}: unknown category {self.category!r}"
            )
        if not self.text.strip():
            raise DataError(f"gold gap {self.gap_id!r}: empty text")


@dataclass(frozen=True)
class Paragraph:
    para_id: str
    sentences: tuple[Sentence, ...]
    gold_gaps: tuple[GoldGap, ...] = ()
    masked_conclusions: tuple[GoldGap, ...] = ()
    flags: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.sentences:
            raise DataError(f"paragraph {self.para_id!r}: no sentences")
        for gap in self.masked_conclusions:
            if gap.kind != KIND_IMPLICIT:
                raise DataError(
                    f"paragraph {self.para_id!r}: masked conclusion "
                    f"{gap.gap_id!r} must have kind 'implicit'"
                )

    @property
    def text(self) -> str:
        """Canonical text: single-space join of sentence texts."""
        return " ".join(s.text for s in self.sentences)


@dataclass(frozen=True)
class Section:
    section_id: str
    paragraphs: tuple[Paragraph, ...]
    heading: str | None = None
    gold_gaps: tuple[GoldGap, ...] = ()

    def __post_init__(self):
        if not self.paragraphs:
            raise DataError(f"section {self.section_id!r}: no paragraphs")

    @property
    def sentences(self) -> tuple[Sentence, ...]:
        return tuple(s for p in self.paragraphs for s in p.sentences)

    @property
    def text(self) -> str:
        return "\n\n".join(p.text for p in self.paragraphs)

    @property
    def all_gold_gaps(self) -> tuple[GoldGap, ...]:
        return self.gold_gaps + tuple(
            g for p in self.paragraphs for g in p.gold_gaps
        )


@dataclass(frozen=True)
class Document:
    doc_id: str
    sections: tuple[Section, ...]
    title: str | None = None
    source_tag: str = ""

    def __post_init__(self):
        if not self.doc_id:
            raise DataError("document with empty doc_id")
        if not self.sections:
            raise DataError(f"document {self.doc_id!r}: no sections")
        seen = set()
        for sec in self.sections:
            if sec.section_id in seen:
                raise DuplicateIdError(
                    f"document {self.doc_id!r}: duplicate section id "
                    f"{sec.section_id!r}"
                )
            seen.add(sec.section_id)

    @property
    def text(self) -> str:
        parts = []
        for sec in self.sections:
            if sec.heading:
                parts.append(sec.heading)
            parts.append(sec.text)
        return "\n\n".join(parts)


@dataclass(frozen=True)
class Corpus:
    documents: tuple[Document, ...]
    format_id: str = FORMAT_PARAGRAPH
    source: str = ""

    def __post_init__(self):
        seen = set()
        for doc in self.documents:
            if doc.doc_id in seen:
                raise DuplicateIdError(f"duplicate doc_id {doc.doc_id!r}")
            seen.add(doc.doc_id)

    def sections(self) -> Iterator[Section]:
        for doc in self.documents:
            yield from doc.sections

    def paragraphs(self) -> Iterator[Paragraph]:
        for sec in self.sections():
            yield from sec.paragraphs

    def gold_gaps(self) -> Iterator[GoldGap]:
        for sec in self.sections():
            yield from sec.gold_gaps
            for para in sec.paragraphs:
                yield from para.gold_gaps

    @property
    def n_documents(self) -> int:
        return len(self.documents)

    @property
    def n_paragraphs(self) -> int:
        return sum(1 for _ in self.paragraphs())

    @property
    def n_gold_gaps(self) -> int:
        return sum(1 for _ in self.gold_gaps())


@dataclass(frozen=True)
class FilterPolicy:
    """Declarative gold-gap exclusion: any gap carrying an excluded flag
    is dropped; structure and sentence content stay untouched."""

    exclude_flags: frozenset[str] = frozenset()

    def keeps(self, gap: GoldGap) -> bool:
        return not (set(gap.flags) & self.exclude_flags)


@dataclass(frozen=True)
class MaskedParagraph:
    """A paragraph with its trailing conclusion statements removed."""

    para_id: str
    premise_sentences: tuple[Sentence, ...]
    gold_conclusions: tuple[GoldGap, ...]

    @property
    def premise_text(self) -> str:
        return " ".join(s.text for s in self.premise_sentences)


# ---------------------------------------------------------------------------
# Loading


def load_corpus(
    path: str | Path,
    format_id: str,
    splitter: SentenceSplitter = split_sentences,
) -> Corpus:
    """Load and validate a corpus from ``path`` in the given format."""
    path = Path(path)
    if format_id not in FORMATS:
        raise DataError(f"unknown corpus format {format_id!r}")
    if not path.exists():
        raise DataError(f"corpus path does not exist: {path}")
    if format_id == FORMAT_PARAGRAPH:
        docs = _load_paragraph_jsonl(path, splitter)
    elif format_id == FORMAT_SECTION:
        docs = _load_section_jsonl(path, splitter)
    else:
        docs = _load_fulltext_dir(path, splitter)
    return Corpus(documents=tuple(docs), format_id=format_id, source=str(path))


def _iter_jsonl(path: Path) -> Iterator[tuple[int, dict]]:
    with path.open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedRecordError(path, line_no, "<json>", str(exc))
            if not isinstance(record, dict):
                raise MalformedRecordError(path, line_no, "<json>", "not an object")
            version = record.get("schema_version", SCHEMA_VERSION)
            if version != SCHEMA_VERSION:
                raise MalformedRecordError(
                    path, line_no, "schema_version",
                    f"unsupported version {version!r} (expected {SCHEMA_VERSION})",
                )
            yield line_no, record


def _parse_gap(raw, unit_ref: str, default_kind: str, path: Path, line_no: int,
               index: int, field_name: str) -> GoldGap:
    if isinstance(raw, str):
        raw = {"text": raw}
    if not isinstance(raw, dict):
        raise MalformedRecordError(path, line_no, field_name, "gap is not an object")
    text = raw.get("text", "")
    if not isinstance(text, str) or not text.strip():
        raise MalformedRecordError(path, line_no, f"{field_name}[{index}].text",
                                   "missing or empty")
    gap_id = str(raw.get("gap_id") or f"{unit_ref}/{field_name}/{index}")
    kind = raw.get("kind", default_kind)
    category = raw.get("category")
    flags = tuple(str(f) for f in raw.get("flags", []))
    try:
        return GoldGap(gap_id=gap_id, text=collapse_whitespace(text), kind=kind,
                       unit_ref=unit_ref, category=category, flags=flags)
    except DataError as exc:
        raise MalformedRecordError(path, line_no, f"{field_name}[{index}]", str(exc))


def _parse_sentences(record: dict, para_id: str, splitter: SentenceSplitter,
                     path: Path, line_no: int) -> tuple[Sentence, ...]:
    if "sentences" in record and record["sentences"]:
        out = []
        for i, raw in enumerate(record["sentences"]):
            if isinstance(raw, str):
                text, sent_id = raw, f"{para_id}/s{i}"
            elif isinstance(raw, dict):
                text = raw.get("text", "")
                sent_id = str(raw.get("sent_id") or f"{para_id}/s{i}")
            else:
                raise MalformedRecordError(path, line_no, f"sentences[{i}]",
                                           "not a string or object")
            text = collapse_whitespace(text)
            if not text:
                raise MalformedRecordError(path, line_no, f"sentences[{i}]",
                                           "empty sentence")
            out.append(Sentence.make(sent_id, text))
        return tuple(out)
    text = record.get("text", "")
    if not isinstance(text, str) or not text.strip():
        raise MalformedRecordError(path, line_no, "text",
                                   "record has neither text nor sentences")
    pieces = splitter(text)
    return tuple(
        Sentence.make(f"{para_id}/s{i}", collapse_whitespace(p))
        for i, p in enumerate(pieces)
    )


def _parse_paragraph(record: dict, splitter: SentenceSplitter, path: Path,
                     line_no: int) -> Paragraph:
    para_id = record.get("para_id")
    if not para_id or not isinstance(para_id, str):
        raise MalformedRecordError(path, line_no, "para_id", "missing or empty")
    sentences = _parse_sentences(record, para_id, splitter, path, line_no)
    golds = tuple(
        _parse_gap(g, para_id, KIND_EXPLICIT, path, line_no, i, "gold_gaps")
        for i, g in enumerate(record.get("gold_gaps", []))
    )
    masked = tuple(
        _parse_gap(g, para_id, KIND_IMPLICIT, path, line_no, i, "masked_conclusions")
        for i, g in enumerate(record.get("masked_conclusions", []))
    )
    flags = tuple(str(f) for f in record.get("flags", []))
    try:
        return Paragraph(para_id=para_id, sentences=sentences, gold_gaps=golds,
                         masked_conclusions=masked, flags=flags)
    except DataError as exc:
        raise MalformedRecordError(path, line_no, "para_id", str(exc))


def _load_paragraph_jsonl(path: Path, splitter: SentenceSplitter) -> list[Document]:
    docs = []
    seen: set[str] = set()
    for line_no, record in _iter_jsonl(path):
        para = _parse_paragraph(record, splitter, path, line_no)
        if para.para_id in seen:
            raise DuplicateIdError(
                f"{path}:{line_no}: duplicate para_id {para.para_id!r}"
            )
        seen.add(para.para_id)
        section = Section(section_id=para.para_id, paragraphs=(para,))
        docs.append(Document(doc_id=para.para_id, sections=(section,),
                             source_tag=FORMAT_PARAGRAPH))
    return docs


def _load_section_jsonl(path: Path, splitter: SentenceSplitter) -> list[Document]:
    by_doc: dict[str, list[Section]] = {}
    seen_sections: set[str] = set()
    for line_no, record in _iter_jsonl(path):
        doc_id = record.get("doc_id")
        section_id = record.get("section_id")
        if not doc_id or not isinstance(doc_id, str):
            raise MalformedRecordError(path, line_no, "doc_id", "missing or empty")
        if not section_id or not isinstance(section_id, str):
            raise MalformedRecordError(path, line_no, "section_id", "missing or empty")
        if section_id in seen_sections:
            raise DuplicateIdError(
                f"{path}:{line_no}: duplicate section_id {section_id!r}"
            )
        seen_sections.add(section_id)
        raw_paras = record.get("paragraphs", [])
        if not raw_paras:
            raise MalformedRecordError(path, line_no, "paragraphs", "empty")
        paragraphs = []
        for i, raw in enumerate(raw_paras):
            if isinstance(raw, str):
                raw = {"para_id": f"{section_id}/p{i}", "text": raw}
            if "para_id" not in raw:
                raw = {**raw, "para_id": f"{section_id}/p{i}"}
            paragraphs.append(_parse_paragraph(raw, splitter, path, line_no))
        golds = tuple(
            _parse_gap(g, section_id, KIND_EXPLICIT, path, line_no, i, "gold_gaps")
            for i, g in enumerate(record.get("gold_gaps", []))
        )
        section = Section(section_id=section_id, paragraphs=tuple(paragraphs),
                          heading=record.get("heading"), gold_gaps=golds)
        by_doc.setdefault(doc_id, []).append(section)
    return [
        Document(doc_id=doc_id, sections=tuple(sections),
                 source_tag=FORMAT_SECTION)
        for doc_id, sections in by_doc.items()
    ]


_SECTION_MARKER = "---SECTION:"


def _load_fulltext_dir(path: Path, splitter: SentenceSplitter) -> list[Document]:
    if not path.is_dir():
        raise DataError(f"fulltext_dir expects a directory: {path}")
    docs = []
    for file in sorted(path.glob("*.txt")):
        doc_id = file.stem
        sections = []
        heading: str | None = None
        buffer: list[str] = []

        def flush():
            body = "\n".join(buffer).strip()
            if not body:
                return
            sec_index = len(sections)
            section_id = f"{doc_id}/sec{sec_index}"
            paragraphs = []
            for j, block in enumerate(p for p in body.split("\n\n") if p.strip()):
                para_id = f"{section_id}/p{j}"
                pieces = splitter(collapse_whitespace(block))
                sentences = tuple(
                    Sentence.make(f"{para_id}/s{k}", collapse_whitespace(s))
                    for k, s in enumerate(pieces)
                )
                paragraphs.append(Paragraph(para_id=para_id, sentences=sentences))
            if paragraphs:
                sections.append(Section(section_id=section_id,
                                        paragraphs=tuple(paragraphs),
                                        heading=heading))

        for line in file.read_text(encoding="utf-8").splitlines():
            stripped = line.strip()
            if stripped.startswith(_SECTION_MARKER) and stripped.endswith("---"):
                flush()
                buffer = []
                heading = stripped[len(_SECTION_MARKER):-3].strip() or None
            else:
                buffer.append(line)
        flush()
        if not sections:
            raise DataError(f"{file}: no section content")
        docs.append(Document(doc_id=doc_id, sections=tuple(sections),
                             source_tag=FORMAT_FULLTEXT))
    return docs


# ---------------------------------------------------------------------------
# Saving (round-trip support)


def _gap_to_json(gap: GoldGap) -> dict:
    out: dict = {"gap_id": gap.gap_id, "text": gap.text, "kind": gap.kind}
    if gap.category is not None:
        out["category"] = gap.category
    if gap.flags:
        out["flags"] = list(gap.flags)
    return out


def _paragraph_to_json(para: Paragraph) -> dict:
    out: dict = {
        "schema_version": SCHEMA_VERSION,
        "para_id": para.para_id,
        "sentences": [{"sent_id": s.sent_id, "text": s.text} for s in para.sentences],
    }
    if para.gold_gaps:
        out["gold_gaps"] = [_gap_to_json(g) for g in para.gold_gaps]
    if para.masked_conclusions:
        out["masked_conclusions"] = [_gap_to_json(g) for g in para.masked_conclusions]
    if para.flags:
        out["flags"] = list(para.flags)
    return out


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    """Write ``corpus`` as JSON-lines in its native format.

    ``fulltext_dir`` corpora are written in section_jsonl form (the text
    files are a read-only ingestion format).
    """
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        if corpus.format_id == FORMAT_PARAGRAPH:
            for para in corpus.paragraphs():
                fh.write(json.dumps(_paragraph_to_json(para), sort_keys=True) + "\n")
        else:
            for doc in corpus.documents:
                for sec in doc.sections:
                    record = {
                        "schema_version": SCHEMA_VERSION,
                        "doc_id": doc.doc_id,
                        "section_id": sec.section_id,
                        "heading": sec.heading,
                        "paragraphs": [_paragraph_to_json(p) for p in sec.paragraphs],
                        "gold_gaps": [_gap_to_json(g) for g in sec.gold_gaps],
                    }
                    fh.write(json.dumps(record, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# Operations


def filter_gap_statements(corpus: Corpus, policy: FilterPolicy) -> Corpus:
    """Drop gold gaps flagged by ``policy``; everything else is unchanged."""
    new_docs = []
    for doc in corpus.documents:
        new_sections = []
        for sec in doc.sections:
            new_paras = tuple(
                replace(p, gold_gaps=tuple(g for g in p.gold_gaps if policy.keeps(g)))
                for p in sec.paragraphs
            )
            new_sections.append(replace(
                sec,
                paragraphs=new_paras,
                gold_gaps=tuple(g for g in sec.gold_gaps if policy.keeps(g)),
            ))
        new_docs.append(replace(doc, sections=tuple(new_sections)))
    return replace(corpus, documents=tuple(new_docs))


def mask_conclusions(paragraph: Paragraph) -> MaskedParagraph:
    """Remove the paragraph's trailing conclusion statements.

    Each masked conclusion must match a run of sentences at the current
    end of the paragraph (checked on whitespace-normalized text).
    Conclusions are matched last-to-first; the returned gold order is
    the paragraph's annotation order.
    """
    if not paragraph.masked_conclusions:
        raise MaskingError(
            f"paragraph {paragraph.para_id!r} has no masked conclusions"
        )
    remaining = list(paragraph.sentences)
    for gap in reversed(paragraph.masked_conclusions):
        target = collapse_whitespace(gap.text)
        matched = None
        for span in range(1, len(remaining) + 1):
            tail = " ".join(s.text for s in remaining[-span:])
            if collapse_whitespace(tail) == target:
                matched = span
                break
        if matched is None:
            raise MaskingError(
                f"paragraph {paragraph.para_id!r}: conclusion {gap.gap_id!r} "
                "not found at the end of the paragraph"
            )
        del remaining[-matched:]
    if not remaining:
        raise MaskingError(
            f"paragraph {paragraph.para_id!r}: masking leaves an empty premise"
        )
    return MaskedParagraph(
        para_id=paragraph.para_id,
        premise_sentences=tuple(remaining),
        gold_conclusions=paragraph.masked_conclusions,
    )
