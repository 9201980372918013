"""Deterministic offline backend for tests and dry runs.

Responses come from a canned mapping. A key matches when it equals the
prompt or occurs as a substring of it; candidate keys are tried longest
first (ties lexicographic) so dispatch is deterministic. An optional
word-count context limit makes the backend reject oversized prompts the
way a real provider would.
"""

from __future__ import annotations

import json
from pathlib import Path

from ..errors import ContextLengthError, ProviderError
from .client import CompletionRequest


class MockBackend:
    def __init__(
        self,
        responses: dict[str, str] | None = None,
        default: str | None = None,
        context_limit_words: int | None = None,
    ):
        self.responses = dict(responses or {})
        self.default = default
        self.context_limit_words = context_limit_words

    @classmethod
    def from_file(cls, path: str | Path) -> "MockBackend":
        """Load ``{"responses": {...}, "default": ..., "context_limit_words": ...}``
        (or a bare mapping of key -> response)."""
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        if "responses" not in data:
            return cls(responses=data)
        return cls(
            responses=data.get("responses", {}),
            default=data.get("default"),
            context_limit_words=data.get("context_limit_words"),
        )

    def send(self, request: CompletionRequest) -> tuple[str, dict]:
        prompt = request.prompt
        if self.context_limit_words is not None and \
                len(prompt.split()) > self.context_limit_words:
            raise ContextLengthError(
                f"mock context_length_exceeded: prompt has {len(prompt.split())} "
                f"words, limit {self.context_limit_words}"
            )
        if prompt in self.responses:
            return self.responses[prompt], self._usage(prompt)
        for key in sorted(self.responses, key=lambda k: (-len(k), k)):
            if key and key in prompt:
                return self.responses[key], self._usage(prompt)
        if self.default is not None:
            return self.default, self._usage(prompt)
        raise ProviderError("mock backend has no response for this prompt")

    @staticmethod
    def _usage(prompt: str) -> dict:
        return {"prompt_words": len(prompt.split())}
