import json
from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def explicit_config(tmp_path: Path) -> Path:
    """Config for the explicit-task fixture run: two mock models, shared
    cache under tmp."""
    config = {
        "corpus": {"path": str(FIXTURES / "explicit_paragraphs.jsonl"),
                   "format": "paragraph_jsonl"},
        "task": "explicit",
        "models": [
            {"model_id": "mock-a", "backend": "mock",
             "responses_file": str(FIXTURES / "mock_explicit_a.json")},
            {"model_id": "mock-b", "backend": "mock",
             "responses_file": str(FIXTURES / "mock_explicit_b.json")},
        ],
        "cue_dictionary": "default",
        "cache_dir": str(tmp_path / "cache"),
    }
    path = tmp_path / "explicit_config.json"
    path.write_text(json.dumps(config))
    return path


@pytest.fixture
def implicit_config(tmp_path: Path) -> Path:
    config = {
        "corpus": {"path": str(FIXTURES / "implicit_paragraphs.jsonl"),
                   "format": "paragraph_jsonl"},
        "task": "implicit_paragraph",
        "models": [
            {"model_id": "mock-tabi", "backend": "mock",
             "responses_file": str(FIXTURES / "mock_tabi.json")},
        ],
        "scorer": {"backend": "mock",
                   "table_file": str(FIXTURES / "scorer_table.json")},
        "cache_dir": str(tmp_path / "cache"),
    }
    path = tmp_path / "implicit_config.json"
    path.write_text(json.dumps(config))
    return path
