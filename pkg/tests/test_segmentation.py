import json
import random

import pytest
from hypothesis import given, strategies as st

from gapmine.corpus import Paragraph, Section, Sentence
from gapmine.evaluation.textnorm import collapse_whitespace
from gapmine.segmentation import (
    Chunk,
    chunk_section,
    chunk_sentences,
    pack_spans,
    split_sentences,
    word_count,
)


def _section(word_counts, section_id="sec"):
    sentences = tuple(
        Sentence.make(f"{section_id}/s{i}", " ".join(["w"] * wc))
        for i, wc in enumerate(word_counts)
    )
    para = Paragraph(para_id=f"{section_id}/p0", sentences=sentences)
    return Section(section_id=section_id, paragraphs=(para,))


class TestSplitSentences:
    def test_empty_input(self):
        assert split_sentences("") == []

    def test_single_terminal_period(self):
        assert split_sentences("X remains unknown.") == ["X remains unknown."]

    def test_abbreviation_does_not_split(self):
        text = "Results differ. See Fig. 2 for details. More work is needed."
        assert split_sentences(text) == [
            "Results differ.",
            "See Fig. 2 for details.",
            "More work is needed.",
        ]

    def test_et_al_and_initials(self):
        text = "Smith et al. reported the effect. J. Doe disagreed."
        assert split_sentences(text) == [
            "Smith et al. reported the effect.", "J. Doe disagreed.",
        ]

    def test_decimal_not_split(self):
        text = "The rate was 3.5 per cent. It fell later."
        assert split_sentences(text) == [
            "The rate was 3.5 per cent.", "It fell later.",
        ]

    def test_question_and_exclamation(self):
        assert split_sentences("Why? Because! So there.") == [
            "Why?", "Because!", "So there.",
        ]

    @given(st.text(max_size=300))
    def test_content_preserving(self, text):
        pieces = split_sentences(text)
        assert all(p.strip() for p in pieces)
        assert collapse_whitespace(" ".join(pieces)) == collapse_whitespace(text)


class TestChunking:
    def test_single_under_budget_sentence(self):
        section = _section([10])
        chunks = chunk_section(section, budget=1000)
        assert len(chunks) == 1
        assert chunks[0].word_count == 10

    def test_greedy_packing_matches_hand_simulation(self):
        section = _section([600, 500, 900, 100])
        chunks = chunk_section(section, budget=1000)
        assert [(c.start, c.end, c.word_count) for c in chunks] == [
            (0, 0, 600), (1, 1, 500), (2, 3, 1000),
        ]

    def test_oversize_sentence_becomes_own_chunk(self):
        section = _section([1200])
        chunks = chunk_section(section, budget=1000)
        assert len(chunks) == 1
        assert chunks[0].word_count == 1200

    def test_oversize_in_middle_isolated(self):
        chunks = chunk_section(_section([100, 1200, 100]), budget=1000)
        assert [(c.start, c.end) for c in chunks] == [(0, 0), (1, 1), (2, 2)]

    def test_chunk_ids_and_ordinals(self):
        chunks = chunk_section(_section([600, 600]), budget=1000)
        assert [c.chunk_id for c in chunks] == ["sec#c0", "sec#c1"]
        assert [c.ordinal for c in chunks] == [0, 1]

    def test_budget_must_be_positive(self):
        with pytest.raises(ValueError):
            pack_spans([1, 2], 0)

    def test_word_count_equals_sentence_sum(self):
        section = _section([3, 4, 5])
        for chunk in chunk_section(section, budget=7):
            expected = sum(
                s.word_count for s in section.sentences[chunk.start:chunk.end + 1]
            )
            assert chunk.word_count == expected

    def test_manifest_row_shape(self):
        chunk = Chunk("s#c0", "s", 0, 1, 12, 0)
        row = chunk.manifest_row()
        assert json.dumps(row, sort_keys=True)
        assert set(row) == {"chunk_id", "parent_id", "ordinal", "start",
                            "end", "word_count"}

    @given(
        st.lists(st.integers(min_value=1, max_value=400), min_size=1,
                 max_size=40),
        st.integers(min_value=1, max_value=1200),
    )
    def test_partition_and_budget_properties(self, word_counts, budget):
        spans = pack_spans(word_counts, budget)
        covered = [i for start, end in spans for i in range(start, end + 1)]
        assert covered == list(range(len(word_counts)))
        for start, end in spans:
            if end > start:
                assert sum(word_counts[start:end + 1]) <= budget

    @given(
        st.lists(st.integers(min_value=1, max_value=400), min_size=1,
                 max_size=40),
        st.integers(min_value=1, max_value=800),
        st.integers(min_value=0, max_value=400),
    )
    def test_budget_monotonicity(self, word_counts, budget, bump):
        assert len(pack_spans(word_counts, budget + bump)) <= \
            len(pack_spans(word_counts, budget))

    def test_determinism_byte_identical_manifests(self):
        rng = random.Random(7)
        word_counts = [rng.randint(1, 300) for _ in range(30)]
        section = _section(word_counts)
        first = json.dumps([c.manifest_row() for c in chunk_section(section, 500)])
        second = json.dumps([c.manifest_row() for c in chunk_section(section, 500)])
        assert first == second


def test_word_count_counts_nonspace_runs():
    assert word_count("  a  b\tc\nd ") == 4
    assert word_count("") == 0


def test_chunk_sentences_standalone():
    sentences = tuple(Sentence.make(f"s{i}", "w " * n) for i, n in
                      enumerate([2, 2, 2]))
    chunks = chunk_sentences(sentences, "para-1", budget=4)
    assert [c.chunk_id for c in chunks] == ["para-1#c0", "para-1#c1"]
