import json

import pytest

from gapmine.errors import TemplateError
from gapmine.gateway.templates import (
    DEFAULT_TABI_SHOTS,
    Exemplar,
    PromptTemplate,
    default_shots_for,
    get_template,
    render_prompt,
)


def test_zero_shot_substitutes_context():
    template = PromptTemplate("t", "explicit_extraction", 0,
                              body="Look at:\n{context}\nDone.")
    rendered = render_prompt(template, "P")
    assert "Look at:\nP\nDone." == rendered
    assert "{context}" not in rendered


def test_builtin_tabi_renders_three_shots_in_order():
    template = get_template("tabi/v1")
    shots = default_shots_for(template)
    assert len(shots) == 3
    rendered = render_prompt(template, "The premise text goes here.", shots)
    positions = [rendered.index(s.input_text) for s in shots]
    assert positions == sorted(positions)
    assert positions[-1] < rendered.index("The premise text goes here.")
    for shot in shots:
        assert shot.output_text in rendered
    assert "{shots}" not in rendered and "{context}" not in rendered


def test_default_shots_cover_both_buckets():
    buckets = [b for shot in DEFAULT_TABI_SHOTS
               for b in ("more_probable", "least_probable")
               if f'"{b}"' in shot.output_text]
    assert "more_probable" in buckets
    assert "least_probable" in buckets


def test_missing_context_placeholder_is_unbound_error():
    template = PromptTemplate("t", "explicit_extraction", 0, body="No slot.")
    with pytest.raises(TemplateError, match="unbound placeholder"):
        render_prompt(template, "P")


def test_shot_count_mismatch():
    template = get_template("tabi/v1")
    with pytest.raises(TemplateError, match="expects 3 shots"):
        render_prompt(template, "P", ())


def test_shots_required_placeholder():
    template = PromptTemplate("t", "tabi_inference", 1, body="{context}")
    with pytest.raises(TemplateError, match="unbound placeholder"):
        render_prompt(template, "P", (Exemplar("in", "out"),))


def test_empty_context_rejected():
    template = get_template("explicit/v1")
    with pytest.raises(TemplateError):
        render_prompt(template, "   ")


def test_json_braces_in_body_survive():
    template = get_template("explicit/v1")
    rendered = render_prompt(template, "Some text.")
    assert "Some text." in rendered
    assert "```" in rendered  # output-contract fence untouched


def test_unknown_template_id():
    with pytest.raises(TemplateError):
        get_template("mystery/v9")


def test_template_from_file(tmp_path):
    path = tmp_path / "custom.json"
    path.write_text(json.dumps({
        "template_id": "custom/v1",
        "task_kind": "explicit_extraction",
        "shot_count": 0,
        "body": "Custom: {context}",
    }))
    template = get_template(str(path))
    assert render_prompt(template, "X") == "Custom: X"


def test_default_shot_counts_by_task():
    assert get_template("explicit/v1").shot_count == 0
    assert get_template("tabi/v1").shot_count == 3
    assert get_template("fulltext/v1").shot_count == 0
