import json

import pytest
from hypothesis import given, strategies as st

from gapmine.errors import DataError
from gapmine.tabi import (
    BUCKET_LEAST,
    BUCKET_MORE,
    GROUND_EXACT,
    GROUND_FUZZY,
    GROUND_UNSUPPORTED,
    TabiInference,
    bucket_partition,
    parse_fulltext_output,
    parse_statement_output,
    parse_tabi_output,
    verify_grounds,
)

GOLDEN = """Here is my analysis.

```json
[{"claim": "It is unknown whether E improves patient outcomes.",
  "grounds": ["Compound E improves biomarker F in mice",
              "Biomarker F correlates poorly with outcomes"],
  "warrant": "A mouse biomarker effect does not establish patient benefit.",
  "bucket": "more_probable"}]
```
"""


class TestParseTabi:
    def test_golden_fenced_json(self):
        result = parse_tabi_output(GOLDEN, unit_ref="p1", model_id="m1")
        assert len(result.inferences) == 1
        inference = result.inferences[0]
        assert inference.claim == \
            "It is unknown whether E improves patient outcomes."
        assert len(inference.grounds) == 2
        assert inference.bucket == BUCKET_MORE
        assert inference.unit_ref == "p1"
        assert inference.model_id == "m1"
        assert result.diagnostics == ()

    def test_two_valid_one_missing_warrant(self):
        records = [
            {"claim": "Claim one stands.", "grounds": ["ev a"],
             "warrant": "One sentence only.", "bucket": "more_probable"},
            {"claim": "Claim two stands.", "grounds": ["ev b"],
             "bucket": "least_probable"},
            {"claim": "Claim three stands.", "grounds": ["ev c"],
             "warrant": "Also one sentence.", "bucket": "least_probable"},
        ]
        raw = "```json\n" + json.dumps(records) + "\n```"
        result = parse_tabi_output(raw)
        assert len(result.inferences) == 2
        assert len(result.diagnostics) == 1
        assert result.diagnostics[0].reason == "missing warrant"

    def test_empty_string(self):
        result = parse_tabi_output("")
        assert result.inferences == ()
        assert result.diagnostics[0].reason == "no parseable block"

    def test_prose_only_yields_diagnostic(self):
        result = parse_tabi_output("I could not find anything of note.")
        assert result.inferences == ()
        assert len(result.diagnostics) == 1

    def test_labeled_lines_fallback(self):
        raw = (
            "Claim: The dosing ceiling remains unexplored.\n"
            "Grounds: trials stopped at 10mg; toxicity appeared at 50mg\n"
            "Warrant: The forty-fold gap between doses was never examined.\n"
            "Bucket: more probable\n"
            "\n"
            "Claim: Another mechanism could exist.\n"
            "Grounds:\n"
            "- the assay saturates early\n"
            "- the response is biphasic\n"
            "Warrant: A biphasic response suggests a second pathway.\n"
            "Bucket: least_probable\n"
        )
        result = parse_tabi_output(raw)
        assert len(result.inferences) == 2
        assert result.inferences[0].grounds == (
            "trials stopped at 10mg", "toxicity appeared at 50mg")
        assert result.inferences[0].bucket == BUCKET_MORE
        assert result.inferences[1].grounds == (
            "the assay saturates early", "the response is biphasic")
        assert result.inferences[1].bucket == BUCKET_LEAST

    def test_bare_json_without_fences(self):
        records = [{"claim": "Claim here.", "grounds": ["g"],
                    "warrant": "One sentence.", "bucket": "least_probable"}]
        result = parse_tabi_output(json.dumps(records))
        assert len(result.inferences) == 1

    def test_invalid_bucket_diagnostic(self):
        records = [{"claim": "c", "grounds": ["g"], "warrant": "One sentence.",
                    "bucket": "perhaps"}]
        result = parse_tabi_output("```json\n" + json.dumps(records) + "\n```")
        assert result.inferences == ()
        assert result.diagnostics[0].reason == "missing or invalid bucket"

    def test_multi_sentence_warrant_rejected(self):
        records = [{"claim": "c", "grounds": ["g"],
                    "warrant": "First sentence. Second sentence.",
                    "bucket": "more_probable"}]
        result = parse_tabi_output("```json\n" + json.dumps(records) + "\n```")
        assert result.inferences == ()
        assert "single sentence" in result.diagnostics[0].reason

    def test_verbatim_round_trip(self):
        result = parse_tabi_output(GOLDEN, unit_ref="p1", model_id="m1")
        row = result.inferences[0].to_json()
        assert TabiInference.from_json(row) == result.inferences[0]

    @given(st.text(max_size=300))
    def test_parse_totality(self, raw):
        result = parse_tabi_output(raw)
        if raw:
            assert len(result.inferences) + len(result.diagnostics) >= 1


class TestInferenceInvariants:
    def test_empty_claim_rejected(self):
        with pytest.raises(DataError):
            TabiInference(claim=" ", grounds=("g",), warrant="One sentence.",
                          bucket=BUCKET_MORE)

    def test_empty_grounds_rejected(self):
        with pytest.raises(DataError):
            TabiInference(claim="c", grounds=(), warrant="One sentence.",
                          bucket=BUCKET_MORE)

    def test_unknown_bucket_rejected(self):
        with pytest.raises(DataError):
            TabiInference(claim="c", grounds=("g",), warrant="One sentence.",
                          bucket="maybe")


class TestVerifyGrounds:
    PREMISE = ("Compound E improves biomarker F in mice. Biomarker F "
               "correlates poorly with clinical outcomes in humans.")

    def _inference(self, *grounds):
        return TabiInference(claim="claim text", grounds=tuple(grounds),
                             warrant="One sentence.", bucket=BUCKET_MORE)

    def test_verbatim_ground_is_exact(self):
        report = verify_grounds(
            self._inference("Compound E improves biomarker F in mice"),
            self.PREMISE)
        assert report.checks[0].status == GROUND_EXACT
        assert report.grounded

    def test_paraphrase_with_high_overlap_is_fuzzy(self):
        # 6 of 7 ground tokens appear in the premise (~0.86 >= 0.8), but
        # the ground is not a verbatim quote.
        report = verify_grounds(
            self._inference("compound E improves biomarker response in mice"),
            self.PREMISE)
        assert report.checks[0].status == GROUND_FUZZY
        assert report.checks[0].overlap == pytest.approx(6 / 7)
        assert report.grounded

    def test_foreign_text_unsupported(self):
        report = verify_grounds(
            self._inference("satellite telemetry confirmed the orbit"),
            self.PREMISE)
        assert report.checks[0].status == GROUND_UNSUPPORTED
        assert not report.grounded

    def test_mixed_grounds_overall_flag(self):
        report = verify_grounds(
            self._inference("Compound E improves biomarker F in mice",
                            "satellite telemetry confirmed the orbit"),
            self.PREMISE)
        assert [c.status for c in report.checks] == \
            [GROUND_EXACT, GROUND_UNSUPPORTED]
        assert not report.grounded

    def test_raising_ratio_never_rescues_unsupported(self):
        inference = self._inference("compound E improves some outcome")
        for low, high in [(0.2, 0.5), (0.5, 0.8), (0.8, 0.95)]:
            low_report = verify_grounds(inference, self.PREMISE, low)
            high_report = verify_grounds(inference, self.PREMISE, high)
            for lo, hi in zip(low_report.checks, high_report.checks):
                if lo.status == GROUND_UNSUPPORTED:
                    assert hi.status == GROUND_UNSUPPORTED

    def test_empty_premise_rejected(self):
        with pytest.raises(ValueError):
            verify_grounds(self._inference("g"), "  ")


class TestBucketPartition:
    def _inf(self, bucket):
        return TabiInference(claim="c", grounds=("g",),
                             warrant="One sentence.", bucket=bucket)

    def test_empty(self):
        assert bucket_partition([]) == ([], [])

    def test_mixed_partition(self):
        items = [self._inf(BUCKET_MORE), self._inf(BUCKET_MORE),
                 self._inf(BUCKET_LEAST), self._inf(BUCKET_MORE)]
        more, least = bucket_partition(items)
        assert (len(more), len(least)) == (3, 1)
        assert len(more) + len(least) == len(items)

    def test_all_least(self):
        items = [self._inf(BUCKET_LEAST)] * 3
        more, least = bucket_partition(items)
        assert more == []
        assert len(least) == 3


class TestParseStatements:
    def test_fenced_array(self):
        raw = '```json\n["Gap one stands.", "Gap two stands."]\n```'
        statements, diagnostics = parse_statement_output(raw, "u1", "m1")
        assert [s.text for s in statements] == \
            ["Gap one stands.", "Gap two stands."]
        assert diagnostics == ()

    def test_empty_array_is_legal_no_gaps(self):
        statements, diagnostics = parse_statement_output("```json\n[]\n```")
        assert statements == ()
        assert diagnostics == ()

    def test_bullet_fallback(self):
        raw = "- Gap one stands.\n* Gap two stands.\n1. Gap three stands."
        statements, _ = parse_statement_output(raw)
        assert len(statements) == 3

    def test_unparseable(self):
        statements, diagnostics = parse_statement_output("nothing usable here")
        assert statements == ()
        assert diagnostics[0].reason == "no parseable block"

    @given(st.text(max_size=200))
    def test_totality(self, raw):
        parse_statement_output(raw)


class TestParseFulltext:
    def test_pairs_parsed(self):
        records = [{"gap": "Gap text here.",
                    "future_direction": "Run the missing trial.",
                    "evidence": "quoted line"}]
        raw = "```json\n" + json.dumps(records) + "\n```"
        pairs, diagnostics = parse_fulltext_output(raw, "d1", "m1")
        assert pairs[0].gap == "Gap text here."
        assert pairs[0].future_direction == "Run the missing trial."
        assert pairs[0].evidence == "quoted line"
        assert diagnostics == ()

    def test_missing_direction_diagnostic(self):
        records = [{"gap": "Gap text here."}]
        raw = "```json\n" + json.dumps(records) + "\n```"
        pairs, diagnostics = parse_fulltext_output(raw)
        assert pairs == ()
        assert diagnostics[0].reason == "missing future_direction"
