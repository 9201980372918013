"""Prompt templates and rendering.

Templates are versioned assets addressed by id ("explicit/v1"). A body
carries the named placeholders ``{context}``, ``{shots}``, and
``{instructions}``; substitution is literal string replacement, so JSON
braces elsewhere in the body are safe. Exemplars (shots) render in the
given order ahead of the context.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from ..errors import TemplateError

TASK_EXPLICIT = "explicit_extraction"
TASK_TABI = "tabi_inference"
TASK_FULLTEXT = "fulltext_inference"
TASK_KINDS = (TASK_EXPLICIT, TASK_TABI, TASK_FULLTEXT)

_PLACEHOLDER_RE = re.compile(r"\{(context|shots|instructions)\}")


@dataclass(frozen=True)
class Exemplar:
    """One in-context example: an input text and the expected answer."""

    input_text: str
    output_text: str


@dataclass(frozen=True)
class PromptTemplate:
    template_id: str
    task_kind: str
    shot_count: int
    body: str
    instructions: str = ""

    def __post_init__(self):
        if self.task_kind not in TASK_KINDS:
            raise TemplateError(f"unknown task kind {self.task_kind!r}")
        if self.shot_count < 0:
            raise TemplateError("shot_count must be >= 0")

    @classmethod
    def from_file(cls, path: str | Path) -> "PromptTemplate":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(
            template_id=data["template_id"],
            task_kind=data["task_kind"],
            shot_count=int(data.get("shot_count", 0)),
            body=data["body"],
            instructions=data.get("instructions", ""),
        )


def _render_shots(shots: Sequence[Exemplar]) -> str:
    blocks = []
    for i, shot in enumerate(shots, start=1):
        blocks.append(
            f"Example {i}:\nText:\n{shot.input_text}\nAnswer:\n{shot.output_text}"
        )
    return "\n\n".join(blocks)


def render_prompt(
    template: PromptTemplate,
    context: str,
    shots: Sequence[Exemplar] = (),
) -> str:
    """Substitute all placeholders; rejects mismatched shot counts and
    templates whose body cannot bind a required value."""
    if not context.strip():
        raise TemplateError("context must be non-empty")
    if len(shots) != template.shot_count:
        raise TemplateError(
            f"template {template.template_id!r} expects {template.shot_count} "
            f"shots, got {len(shots)}"
        )
    body = template.body
    if "{context}" not in body:
        raise TemplateError(
            f"unbound placeholder: template {template.template_id!r} has no "
            "{context}"
        )
    if template.shot_count > 0 and "{shots}" not in body:
        raise TemplateError(
            f"unbound placeholder: template {template.template_id!r} has no "
            "{shots}"
        )
    # str.replace substitutes every occurrence, so no marker written in
    # the body can survive; markers arriving inside the substituted
    # values are data, not placeholders.
    rendered = body.replace("{instructions}", template.instructions)
    rendered = rendered.replace("{shots}", _render_shots(shots))
    rendered = rendered.replace("{context}", context)
    return rendered


_EXPLICIT_BODY = """\
You are reviewing scientific text for statements of missing knowledge: \
declared uncertainty, limitations, contradictions, or absent evidence.

{instructions}

Text:
{context}

Reply with a fenced JSON array containing each such statement copied \
verbatim from the text, for example:
```json
["first statement", "second statement"]
```
Reply with [] inside the fence if there are none.
"""

_EXPLICIT_INSTRUCTIONS = (
    "Copy statements exactly as written; do not merge, shorten, or "
    "paraphrase them. Ignore background facts that are settled knowledge."
)

_TABI_BODY = """\
You are reading a passage whose concluding statement of a needed future \
direction has been removed. Infer what knowledge gap the removed \
conclusion most plausibly stated.

{instructions}

{shots}

Text:
{context}

Answer with a fenced JSON list of records, each with fields:
  "claim": the implied knowledge gap, one sentence.
  "grounds": a list of evidence spans quoted from the text.
  "warrant": one sentence explaining why the grounds imply the claim.
  "bucket": "more_probable" or "least_probable".
Give your strongest candidates first.
"""

_TABI_INSTRUCTIONS = (
    "Base every claim only on the passage. Quote grounds from the text. "
    "Use the bucket to mark how confident you are that the claim is the "
    "missing conclusion."
)

_FULLTEXT_BODY = """\
Read the full manuscript below and identify knowledge gaps that the \
evidence implies but the authors did not state.

{instructions}

Manuscript:
{context}

Answer with a fenced JSON list of records, each with fields:
  "gap": the implied knowledge gap.
  "future_direction": a concrete study or step that would address it.
  "evidence": a supporting quote from the manuscript.
"""

_FULLTEXT_INSTRUCTIONS = (
    "Prefer gaps that follow from the reported findings and their "
    "limitations. Keep each gap and direction to one or two sentences."
)

DEFAULT_TABI_SHOTS: tuple[Exemplar, ...] = (
    Exemplar(
        input_text=(
            "Compound E lowered biomarker F by 40% in murine models. "
            "Biomarker F correlates only weakly with clinical outcomes in "
            "humans. No human trials of compound E have been registered."
        ),
        output_text=(
            '```json\n[{"claim": "It is unknown whether compound E improves '
            'clinical outcomes in human patients.", "grounds": ["Compound E '
            'lowered biomarker F by 40% in murine models", "Biomarker F '
            'correlates only weakly with clinical outcomes in humans"], '
            '"warrant": "An effect on a weakly predictive biomarker in mice '
            'does not establish patient benefit.", "bucket": '
            '"more_probable"}]\n```'
        ),
    ),
    Exemplar(
        input_text=(
            "Cohort A showed a protective association between diet G and "
            "relapse. Cohort B, using a different dosing schedule, found no "
            "association. Neither study measured adherence directly."
        ),
        output_text=(
            '```json\n[{"claim": "It remains unresolved whether diet G '
            'protects against relapse when adherence is verified.", '
            '"grounds": ["Cohort A showed a protective association", '
            '"Cohort B, using a different dosing schedule, found no '
            'association", "Neither study measured adherence directly"], '
            '"warrant": "Conflicting cohort results without adherence data '
            'leave the protective effect unestablished.", "bucket": '
            '"more_probable"}, {"claim": "It is unclear whether the dosing '
            'schedule alone explains the divergent findings.", "grounds": '
            '["Cohort B, using a different dosing schedule, found no '
            'association"], "warrant": "A schedule difference is one '
            'candidate explanation but was not isolated experimentally.", '
            '"bucket": "least_probable"}]\n```'
        ),
    ),
    Exemplar(
        input_text=(
            "Receptor H is upregulated in early-stage tumors. Existing "
            "antagonists of receptor H cannot cross the blood-brain "
            "barrier."
        ),
        output_text=(
            '```json\n[{"claim": "Whether receptor H antagonism is effective '
            'against brain metastases remains untested.", "grounds": '
            '["Receptor H is upregulated in early-stage tumors", "Existing '
            'antagonists of receptor H cannot cross the blood-brain '
            'barrier"], "warrant": "A promising target stays unevaluated in '
            'the brain when no available compound reaches it.", "bucket": '
            '"more_probable"}]\n```'
        ),
    ),
)

_BUILTIN_TEMPLATES = {
    "explicit/v1": PromptTemplate(
        template_id="explicit/v1",
        task_kind=TASK_EXPLICIT,
        shot_count=0,
        body=_EXPLICIT_BODY,
        instructions=_EXPLICIT_INSTRUCTIONS,
    ),
    "tabi/v1": PromptTemplate(
        template_id="tabi/v1",
        task_kind=TASK_TABI,
        shot_count=3,
        body=_TABI_BODY,
        instructions=_TABI_INSTRUCTIONS,
    ),
    "fulltext/v1": PromptTemplate(
        template_id="fulltext/v1",
        task_kind=TASK_FULLTEXT,
        shot_count=0,
        body=_FULLTEXT_BODY,
        instructions=_FULLTEXT_INSTRUCTIONS,
    ),
}


def get_template(template_id: str) -> PromptTemplate:
    """Resolve a built-in template id, or load one from a JSON file path."""
    if template_id in _BUILTIN_TEMPLATES:
        return _BUILTIN_TEMPLATES[template_id]
    path = Path(template_id)
    if path.suffix == ".json" and path.exists():
        return PromptTemplate.from_file(path)
    raise TemplateError(f"unknown template {template_id!r}")


def default_shots_for(template: PromptTemplate) -> tuple[Exemplar, ...]:
    if template.task_kind == TASK_TABI and template.shot_count == 3:
        return DEFAULT_TABI_SHOTS
    return ()
