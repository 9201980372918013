import pytest

from gapmine.errors import DataError
from gapmine.evaluation.cues import (
    CueDictionary,
    classify_category,
    cue_validate,
    default_dictionary,
)


def _dict(*entries, version="test"):
    return CueDictionary(entries=tuple(entries), version_tag=version)


class TestCueValidate:
    def test_table_example_remains_unknown(self):
        d = _dict(("remains unknown", "levels_of_evidence"))
        matches = cue_validate("X remains unknown.", d)
        assert [m.cue for m in matches] == ["remains unknown"]

    def test_absent_cue_no_match(self):
        d = _dict(("unknown", "levels_of_evidence"))
        assert cue_validate("results were conclusive", d) == []

    def test_inflection_and_extra_tokens_tolerated(self):
        d = _dict(("further research is needed", "future_opportunity"))
        matches = cue_validate("Further research is needed urgently.", d)
        assert len(matches) == 1
        # Inflected verb still matches through stemming.
        matches = cue_validate("further researches are needed", d)
        assert matches == []  # 'are' breaks contiguity; 'is' != 'are'

    def test_case_insensitive(self):
        d = _dict(("no randomized controlled trial", "levels_of_evidence"))
        sentence = "To date, NO Randomized Controlled Trial has evaluated it."
        assert len(cue_validate(sentence, d)) == 1

    def test_contiguity_required(self):
        d = _dict(("remains unknown", "levels_of_evidence"))
        assert cue_validate("remains largely unknown", d) == []

    def test_multiple_matches_reported_in_dictionary_order(self):
        d = _dict(("remains unknown", "levels_of_evidence"),
                  ("further research is needed", "future_opportunity"))
        text = "X remains unknown and further research is needed."
        assert [m.category for m in cue_validate(text, d)] == \
            ["levels_of_evidence", "future_opportunity"]


class TestDictionary:
    def test_empty_rejected(self):
        with pytest.raises(DataError):
            CueDictionary(entries=())

    def test_duplicate_after_stemming_rejected(self):
        with pytest.raises(DataError):
            _dict(("remains unknown", "levels_of_evidence"),
                  ("Remain unknown", "barrier"))

    def test_unknown_category_rejected(self):
        with pytest.raises(DataError):
            _dict(("x y", "mystery"))

    def test_from_csv(self, tmp_path):
        path = tmp_path / "cues.csv"
        path.write_text("cue,category\nremains unknown,levels_of_evidence\n")
        d = CueDictionary.from_csv(path)
        assert d.entries == (("remains unknown", "levels_of_evidence"),)
        assert d.version_tag == "cues"

    def test_from_csv_bad_header(self, tmp_path):
        path = tmp_path / "cues.csv"
        path.write_text("word,label\nx,barrier\n")
        with pytest.raises(DataError):
            CueDictionary.from_csv(path)

    def test_default_dictionary_has_fifty_entries(self):
        d = default_dictionary()
        assert len(d.entries) == 50
        categories = {c for _, c in d.entries}
        assert len(categories) == 5


class TestClassify:
    def test_plurality_wins(self):
        d = _dict(("hampered by", "barrier"),
                  ("not feasible", "barrier"),
                  ("open question", "research_aim"))
        text = "The assay was hampered by cost and not feasible at scale, " \
               "an open question."
        assert classify_category(text, d) == "barrier"

    def test_no_match_returns_none(self):
        d = _dict(("remains unknown", "levels_of_evidence"))
        assert classify_category("everything is settled", d) is None

    def test_tie_breaks_on_fixed_category_order(self):
        d = _dict(("open question", "research_aim"),
                  ("hampered by", "barrier"))
        text = "An open question hampered by access."
        assert classify_category(text, d) == "research_aim"
