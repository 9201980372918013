"""Pipeline stages behind the CLI verbs.

A run directory is the unit of composition: ``extract`` fills it with
predictions plus a manifest, ``evaluate`` / ``agreement`` /
``export-review`` consume it. Prediction files contain no timestamps, so
re-running against a warm cache reproduces identical bytes; volatile
fields (attempts, cache hits, wall time) live only in the manifest.
"""

from __future__ import annotations

import hashlib
import json
import random
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import agreement as agreement_mod
from .config import (
    MODE_CHUNKED,
    ModelConfig,
    RunConfig,
    ScorerConfig,
    TASK_EXPLICIT,
    TASK_IMPLICIT_FULLTEXT,
    TASK_IMPLICIT_PARAGRAPH,
    Thresholds,
)
from .corpus import (
    Corpus,
    FilterPolicy,
    FORMAT_PARAGRAPH,
    FORMAT_SECTION,
    filter_gap_statements,
    load_corpus,
    mask_conclusions,
    save_corpus,
)
from .errors import ConfigError, DataError
from .evaluation.cues import CueDictionary, cue_validate, default_dictionary
from .evaluation.entailment import CachingScorer, HttpNliScorer, MockNliScorer
from .evaluation.implicit import (
    calibration,
    implicit_accuracy,
    score_implicit,
    union_accuracy,
)
from .evaluation.matching import aggregate_prf, match_one_to_one
from .gateway.client import CompletionRequest, HttpBackend, ServiceEndpoint, complete
from .gateway.cache import FileCache
from .gateway.manifest import ManifestWriter
from .gateway.mock import MockBackend
from .gateway.templates import default_shots_for, get_template, render_prompt
from .reports import figures as figs
from .reports.tables import (
    accuracy_csv_rows,
    fmt_pct,
    fmt_ratio,
    metrics_csv_rows,
    write_csv,
    write_json,
    write_jsonl,
)
from .segmentation import chunk_sentences, chunk_text
from .tabi import (
    TabiInference,
    parse_fulltext_output,
    parse_statement_output,
    parse_tabi_output,
    verify_grounds,
)

JUSTIFICATION_CODES = (
    "irrelevance", "misinterpretation", "outdated", "technological_limits",
    "budget_constraints", "other_group_relevance", "other",
)
GAP_VERDICTS = ("agree", "partial", "disagree")
DIRECTION_VERDICTS = ("agree", "disagree", "not_applicable")

BUNDLE_SCHEMA_VERSION = 1

_SAFE_RE = re.compile(r"[^A-Za-z0-9._-]+")


def _safe_name(identifier: str) -> str:
    digest = hashlib.sha1(identifier.encode("utf-8")).hexdigest()[:8]
    stem = _SAFE_RE.sub("_", identifier)[:80].strip("_") or "unit"
    return f"{stem}-{digest}"


@dataclass(frozen=True)
class Unit:
    """One completion target: a paragraph, section, chunk, or document."""

    unit_id: str
    parent_id: str
    context: str


def build_units(corpus: Corpus, config: RunConfig) -> tuple[list[Unit], list[dict]]:
    """Enumerate completion units for the task/context mode; also returns
    chunk-manifest rows when chunking applies."""
    units: list[Unit] = []
    chunk_rows: list[dict] = []

    if config.task == TASK_IMPLICIT_PARAGRAPH:
        for para in corpus.paragraphs():
            if not para.masked_conclusions:
                continue
            masked = mask_conclusions(para)
            units.append(Unit(para.para_id, para.para_id, masked.premise_text))
        if not units:
            raise DataError("no paragraphs with masked conclusions in corpus")
        return units, chunk_rows

    if config.task == TASK_IMPLICIT_FULLTEXT:
        for doc in corpus.documents:
            units.append(Unit(doc.doc_id, doc.doc_id, doc.text))
        return units, chunk_rows

    # Explicit task: base granularity follows the corpus format.
    if corpus.format_id == FORMAT_PARAGRAPH:
        bases = [(p.para_id, tuple(p.sentences), p.text)
                 for p in corpus.paragraphs()]
    elif corpus.format_id == FORMAT_SECTION:
        bases = [(s.section_id, s.sentences, s.text) for s in corpus.sections()]
    else:
        bases = [(d.doc_id,
                  tuple(s for sec in d.sections for s in sec.sentences),
                  d.text)
                 for d in corpus.documents]

    if config.context_mode == MODE_CHUNKED:
        for base_id, sentences, _ in bases:
            for chunk in chunk_sentences(sentences, base_id, config.chunk_budget):
                chunk_rows.append(chunk.manifest_row())
                units.append(Unit(chunk.chunk_id, base_id,
                                  chunk_text(sentences, chunk)))
    else:
        units = [Unit(base_id, base_id, text) for base_id, _, text in bases]
    return units, chunk_rows


def build_backend(model_cfg):
    if model_cfg.backend == "mock":
        return MockBackend.from_file(model_cfg.responses_file)
    endpoint = ServiceEndpoint(base_url=model_cfg.base_url, path=model_cfg.path,
                               api_key_env=model_cfg.api_key_env)
    return HttpBackend(endpoint)


def build_scorer(config: RunConfig):
    if config.scorer.backend == "mock":
        if config.scorer.table_file:
            scorer = MockNliScorer.from_table_file(
                config.scorer.table_file,
                reflexive=config.scorer.reflexive,
                symmetric=config.scorer.symmetric,
                default=config.scorer.default,
            )
        else:
            scorer = MockNliScorer(reflexive=config.scorer.reflexive,
                                   symmetric=config.scorer.symmetric,
                                   default=config.scorer.default)
    else:
        scorer = HttpNliScorer(base_url=config.scorer.base_url,
                               path=config.scorer.path)
    return CachingScorer(scorer, Path(config.cache_dir) / "nli")


def load_cue_dictionary(config: RunConfig) -> CueDictionary | None:
    if config.cue_dictionary is None:
        return None
    if config.cue_dictionary == "default":
        return default_dictionary()
    return CueDictionary.from_csv(config.cue_dictionary)


# ---------------------------------------------------------------------------
# ingest


def run_ingest(config: RunConfig, out_path: str | None = None,
               apply_filter: bool = False) -> dict:
    config.validate(for_extract=False)
    corpus = load_corpus(config.corpus_path, config.corpus_format)
    if apply_filter:
        corpus = filter_gap_statements(
            corpus, FilterPolicy(frozenset(config.filter_flags)))
    summary = {
        "documents": corpus.n_documents,
        "sections": sum(1 for _ in corpus.sections()),
        "paragraphs": corpus.n_paragraphs,
        "gold_gaps": corpus.n_gold_gaps,
        "masked_paragraphs": sum(
            1 for p in corpus.paragraphs() if p.masked_conclusions),
        "format": corpus.format_id,
    }
    if out_path:
        save_corpus(corpus, out_path)
        summary["written"] = str(out_path)
    return summary


# ---------------------------------------------------------------------------
# extract


def run_extract(config: RunConfig, run_dir: str | Path) -> dict:
    config.validate(for_extract=True)
    corpus = load_corpus(config.corpus_path, config.corpus_format)
    units, chunk_rows = build_units(corpus, config)
    units.sort(key=lambda u: u.unit_id)
    if config.sample is not None and config.sample < len(units):
        rng = random.Random(config.seed)
        units = sorted(rng.sample(units, config.sample), key=lambda u: u.unit_id)

    template = get_template(config.template_id_for_task())
    shots = default_shots_for(template)

    run_dir = Path(run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    write_json(run_dir / "config.resolved.json", config.to_json())
    write_json(run_dir / "meta.json", {
        "task": config.task,
        "context_mode": config.context_mode,
        "models": sorted(m.model_id for m in config.models),
        "n_units": len(units),
        "corpus_path": config.corpus_path,
        "corpus_format": config.corpus_format,
        "template_id": template.template_id,
        "seed": config.seed,
        "sample": config.sample,
    })
    if chunk_rows:
        write_jsonl(run_dir / "chunks.jsonl", chunk_rows)

    cache = FileCache(Path(config.cache_dir) / "completions")
    manifest = ManifestWriter(run_dir / "manifest.jsonl")
    n_files = 0
    for model_cfg in config.models:
        backend = build_backend(model_cfg)
        model_dir = run_dir / "predictions" / _safe_name(model_cfg.model_id)
        model_dir.mkdir(parents=True, exist_ok=True)

        def work(unit: Unit, model_id=model_cfg.model_id, backend=backend,
                 model_dir=model_dir) -> None:
            prompt = render_prompt(template, unit.context, shots)
            request = CompletionRequest(
                model_id=model_id,
                prompt=prompt,
                temperature=config.temperature,
                max_output_tokens=config.max_output_tokens,
                request_tag=unit.unit_id,
            )
            result = complete(request, backend, cache, manifest)
            payload: dict = {
                "task": config.task,
                "unit_ref": unit.unit_id,
                "parent_ref": unit.parent_id,
                "model_id": model_id,
                "context": unit.context,
                "cache_key": result.cache_key,
                "raw": result.text,
            }
            if config.task == TASK_EXPLICIT:
                statements, diagnostics = parse_statement_output(
                    result.text, unit.unit_id, model_id)
                payload["statements"] = [s.text for s in statements]
            elif config.task == TASK_IMPLICIT_PARAGRAPH:
                parsed = parse_tabi_output(result.text, unit.unit_id, model_id)
                payload["inferences"] = [i.to_json() for i in parsed.inferences]
                diagnostics = parsed.diagnostics
            else:
                pairs, diagnostics = parse_fulltext_output(
                    result.text, unit.unit_id, model_id)
                payload["pairs"] = [
                    {"gap": p.gap, "future_direction": p.future_direction,
                     "evidence": p.evidence} for p in pairs
                ]
            payload["diagnostics"] = [d.to_json() for d in diagnostics]
            write_json(model_dir / f"{_safe_name(unit.unit_id)}.json", payload)

        with ThreadPoolExecutor(max_workers=config.max_in_flight) as executor:
            list(executor.map(work, units))
        n_files += len(units)
    return {"run_dir": str(run_dir), "units": len(units),
            "models": len(config.models), "prediction_files": n_files}


# ---------------------------------------------------------------------------
# shared run-directory access


def _load_run(run_dir: str | Path) -> tuple[Path, dict, RunConfig]:
    run_dir = Path(run_dir)
    meta_path = run_dir / "meta.json"
    if not meta_path.exists():
        raise DataError(f"{run_dir} is not a run directory (missing meta.json)")
    meta = json.loads(meta_path.read_text(encoding="utf-8"))
    resolved = run_dir / "config.resolved.json"
    data = json.loads(resolved.read_text(encoding="utf-8"))
    config = RunConfig(
        corpus_path=data["corpus_path"],
        corpus_format=data["corpus_format"],
        task=data["task"],
        context_mode=data["context_mode"],
        chunk_budget=data["chunk_budget"],
        models=[ModelConfig(**m) for m in data["models"]],
        scorer=ScorerConfig(**data["scorer"]),
        thresholds=Thresholds(**data["thresholds"]),
        comparators=data["comparators"],
        entailment_combiner=data["entailment_combiner"],
        matching_mode=data["matching_mode"],
        templates=data["templates"],
        cue_dictionary=data["cue_dictionary"],
        filter_flags=data["filter_flags"],
        cache_dir=data["cache_dir"],
        output_dir=data.get("output_dir", "runs"),
        temperature=data["temperature"],
        max_output_tokens=data["max_output_tokens"],
        max_in_flight=data["max_in_flight"],
        seed=data["seed"],
        sample=data["sample"],
    )
    return run_dir, meta, config


def _load_predictions(run_dir: Path, meta: dict,
                      models: list[str] | None = None) -> dict[str, list[dict]]:
    """model_id -> prediction payloads sorted by unit_ref, optionally
    restricted to the given model ids."""
    out: dict[str, list[dict]] = {}
    predictions_dir = run_dir / "predictions"
    if not predictions_dir.exists():
        raise DataError(f"{run_dir}: no predictions directory")
    for model_dir in sorted(predictions_dir.iterdir()):
        payloads = []
        for file in sorted(model_dir.glob("*.json")):
            payloads.append(json.loads(file.read_text(encoding="utf-8")))
        if not payloads:
            continue
        payloads.sort(key=lambda p: p["unit_ref"])
        model_id = payloads[0]["model_id"]
        if models is not None and model_id not in models:
            continue
        out[model_id] = payloads
    if not out:
        raise DataError(f"{run_dir}: no prediction files found")
    return out


# ---------------------------------------------------------------------------
# evaluate


def run_evaluate(run_dirs, gold_path: str | None = None,
                 out_dir: str | Path | None = None,
                 figures: bool = True,
                 threshold_overrides: dict | None = None,
                 models: list[str] | None = None) -> dict:
    if isinstance(run_dirs, (str, Path)):
        run_dirs = [run_dirs]
    if not run_dirs:
        raise ConfigError("evaluate needs at least one run directory")
    loaded = [_load_run(rd) for rd in run_dirs]
    tasks = {meta["task"] for _, meta, _ in loaded}
    if len(tasks) != 1:
        raise DataError(f"run directories mix tasks: {sorted(tasks)}")
    task = tasks.pop()
    corpora = {(meta["corpus_path"], meta["corpus_format"])
               for _, meta, _ in loaded}
    if gold_path is None and len(corpora) != 1:
        raise DataError("run directories were extracted from different corpora")

    out_dir = Path(out_dir) if out_dir else loaded[0][0] / "reports"
    out_dir.mkdir(parents=True, exist_ok=True)

    if task == TASK_EXPLICIT:
        result = _evaluate_explicit(loaded, gold_path, out_dir, figures,
                                    threshold_overrides or {}, models)
    elif task == TASK_IMPLICIT_PARAGRAPH:
        result = _evaluate_implicit(loaded, gold_path, out_dir, figures,
                                    threshold_overrides or {}, models)
    else:
        result = _evaluate_fulltext_counts(loaded, out_dir)
    result["reports_dir"] = str(out_dir)
    return result


def _gold_units(corpus: Corpus, config: RunConfig) -> list[tuple[str, list]]:
    policy = FilterPolicy(frozenset(config.filter_flags))
    filtered = filter_gap_statements(corpus, policy)
    if filtered.format_id == FORMAT_SECTION:
        return [(sec.section_id, list(sec.all_gold_gaps))
                for sec in filtered.sections()]
    return [(para.para_id, list(para.gold_gaps))
            for para in filtered.paragraphs()]


def _evaluate_explicit(loaded, gold_path, out_dir: Path, figures: bool,
                       overrides: dict, models: list[str] | None = None) -> dict:
    metrics_by_model: dict[str, dict[str, dict]] = {}
    accuracy_by_model: dict[str, dict[str, dict]] = {}
    cue_rows = []
    match_rows = []
    seen_settings = set()

    for run_dir, meta, config in loaded:
        mode = meta["context_mode"]
        if mode in seen_settings:
            raise DataError(f"duplicate context_mode {mode!r} across run dirs")
        seen_settings.add(mode)
        threshold = overrides.get("match", config.thresholds.match)
        comparator = config.comparators.get("match", "gte")
        corpus = load_corpus(gold_path or config.corpus_path,
                             config.corpus_format)
        gold_units = _gold_units(corpus, config)
        total_golds = sum(len(golds) for _, golds in gold_units)
        dictionary = load_cue_dictionary(config)
        predictions = _load_predictions(run_dir, meta, models)

        matched_gold_union: set[str] = set()
        for model_id in sorted(predictions):
            by_parent: dict[str, list[str]] = {}
            for payload in predictions[model_id]:
                by_parent.setdefault(payload["parent_ref"], []).extend(
                    payload.get("statements", []))
            matches = []
            for unit_id, golds in gold_units:
                preds = [(f"{model_id}:{unit_id}#p{i}", text)
                         for i, text in enumerate(by_parent.get(unit_id, []))]
                gold_pairs = [(g.gap_id, g.text) for g in golds]
                matches.extend(match_one_to_one(
                    preds, gold_pairs, threshold=threshold,
                    comparator=comparator, mode=config.matching_mode,
                    doc_ref=unit_id,
                ))
            report = aggregate_prf(matches, scope="per_document",
                                   threshold=threshold)
            metrics_by_model.setdefault(model_id, {})[mode] = {
                "precision": report.precision,
                "recall": report.recall,
                "f1": report.f1,
                "tp": report.tp, "fp": report.fp, "fn": report.fn,
                "exact_matches": sum(1 for m in matches if m.exact),
                "per_document": [
                    {"doc_ref": d.doc_ref, "tp": d.tp, "fp": d.fp, "fn": d.fn,
                     "precision": d.precision, "recall": d.recall, "f1": d.f1}
                    for d in report.per_document
                ],
            }
            matched = {m.gold_ref for m in matches
                       if m.outcome == "true_positive"}
            matched_gold_union |= matched
            accuracy_by_model.setdefault(model_id, {})[mode] = {
                "correct": len(matched),
                "total": total_golds,
                "accuracy": len(matched) / total_golds if total_golds else 0.0,
            }
            for m in matches:
                match_rows.append({
                    "setting": mode, "model_id": model_id, "doc_ref": m.doc_ref,
                    "pred_ref": m.pred_ref, "gold_ref": m.gold_ref,
                    "score": round(m.score, 6),
                    "best_score": round(m.best_score, 6),
                    "exact": m.exact, "outcome": m.outcome,
                })
            if dictionary is not None:
                all_texts = [t for texts in by_parent.values() for t in texts]
                with_cue = sum(
                    1 for t in all_texts if cue_validate(t, dictionary))
                cue_rows.append({
                    "setting": mode, "model_id": model_id,
                    "n_predictions": len(all_texts), "n_with_cue": with_cue,
                    "fraction_with_cue": (with_cue / len(all_texts)
                                          if all_texts else 0.0),
                })
        if len(predictions) >= 2:
            accuracy_by_model.setdefault("all_models", {})[mode] = {
                "correct": len(matched_gold_union),
                "total": total_golds,
                "accuracy": (len(matched_gold_union) / total_golds
                             if total_golds else 0.0),
            }

    threshold_used = overrides.get("match", loaded[0][2].thresholds.match)
    write_json(out_dir / "metrics.json", {
        "task": TASK_EXPLICIT,
        "threshold": threshold_used,
        "comparator": loaded[0][2].comparators.get("match", "gte"),
        "matching_mode": loaded[0][2].matching_mode,
        "models": metrics_by_model,
    })
    header, rows = metrics_csv_rows(metrics_by_model)
    write_csv(out_dir / "metrics.csv", header, rows)
    write_json(out_dir / "accuracy.json", {
        "task": TASK_EXPLICIT,
        "unit_kind": "gold_statements",
        "models": accuracy_by_model,
    })
    header, rows = accuracy_csv_rows(accuracy_by_model)
    write_csv(out_dir / "accuracy.csv", header, rows)
    write_jsonl(out_dir / "matches.jsonl", match_rows)
    if cue_rows:
        write_json(out_dir / "cue_validation.json", {"rows": cue_rows})
        write_csv(
            out_dir / "cue_validation.csv",
            ["setting", "model_id", "n_predictions", "n_with_cue",
             "fraction_with_cue"],
            [[r["setting"], r["model_id"], r["n_predictions"], r["n_with_cue"],
              fmt_ratio(r["fraction_with_cue"])] for r in cue_rows],
        )
    if figures:
        for _, meta, _ in loaded:
            mode = meta["context_mode"]
            per_model = {m: metrics_by_model[m][mode]
                         for m in metrics_by_model if mode in metrics_by_model[m]}
            figs.metrics_figure(per_model, out_dir / f"metrics_{mode}.png")
            acc = {m: accuracy_by_model[m][mode]["accuracy"]
                   for m in accuracy_by_model if mode in accuracy_by_model[m]}
            figs.accuracy_figure(acc, out_dir / f"accuracy_{mode}.png")
    return {"task": TASK_EXPLICIT, "metrics": metrics_by_model,
            "accuracy": accuracy_by_model}


def _evaluate_implicit(loaded, gold_path, out_dir: Path, figures: bool,
                       overrides: dict, models: list[str] | None = None) -> dict:
    accuracy_by_model: dict[str, dict[str, dict]] = {}
    calibration_by_model: dict[str, dict[str, dict]] = {}
    grounding_by_model: dict[str, dict[str, dict]] = {}
    unit_rows = []

    for run_dir, meta, config in loaded:
        mode = meta["context_mode"]
        threshold = overrides.get("entailment", config.thresholds.entailment)
        grounding_ratio = overrides.get("grounding", config.thresholds.grounding)
        comparator = config.comparators.get("entailment", "gt")
        combiner = config.entailment_combiner
        corpus = load_corpus(gold_path or config.corpus_path,
                             config.corpus_format)
        masked_units = []
        for para in corpus.paragraphs():
            if para.masked_conclusions:
                masked_units.append((para.para_id, mask_conclusions(para)))
        if not masked_units:
            raise DataError("gold corpus has no masked conclusions")
        scorer = build_scorer(config)
        predictions = _load_predictions(run_dir, meta, models)

        per_model_results = {}
        for model_id in sorted(predictions):
            by_unit = {p["unit_ref"]: p for p in predictions[model_id]}
            results = []
            n_grounded = 0
            n_inferences = 0
            n_warrant = 0
            for unit_id, masked in masked_units:
                payload = by_unit.get(unit_id, {})
                inferences = [TabiInference.from_json(r)
                              for r in payload.get("inferences", [])]
                unit_result = score_implicit(
                    inferences, list(masked.gold_conclusions),
                    masked.premise_text, scorer, threshold=threshold,
                    comparator=comparator, combiner=combiner,
                    unit_ref=unit_id, model_id=model_id,
                )
                results.append(unit_result)
                for inference in inferences:
                    n_inferences += 1
                    if verify_grounds(inference, masked.premise_text,
                                      grounding_ratio).grounded:
                        n_grounded += 1
                n_warrant += sum(unit_result.warrant_grounded)
                unit_rows.append({"setting": mode, **unit_result.to_json()})
            per_model_results[model_id] = results
            correct, accuracy = implicit_accuracy(results)
            accuracy_by_model.setdefault(model_id, {})[mode] = {
                "correct": correct, "total": len(results), "accuracy": accuracy,
            }
            calibration_by_model.setdefault(model_id, {})[mode] = \
                calibration(results).to_json()
            grounding_by_model.setdefault(model_id, {})[mode] = {
                "n_inferences": n_inferences,
                "n_grounded": n_grounded,
                "fraction_grounded": (n_grounded / n_inferences
                                      if n_inferences else 0.0),
                "n_warrant_grounded": n_warrant,
                "fraction_warrant_grounded": (n_warrant / n_inferences
                                              if n_inferences else 0.0),
            }
        if len(per_model_results) >= 2:
            count, accuracy = union_accuracy(per_model_results)
            accuracy_by_model.setdefault("all_models", {})[mode] = {
                "correct": count, "total": len(masked_units),
                "accuracy": accuracy,
            }

    config0 = loaded[0][2]
    write_json(out_dir / "accuracy.json", {
        "task": TASK_IMPLICIT_PARAGRAPH,
        "threshold": overrides.get("entailment", config0.thresholds.entailment),
        "comparator": config0.comparators.get("entailment", "gt"),
        "combiner": config0.entailment_combiner,
        "claim_match_quantifier": "any_prediction_any_gold",
        "models": accuracy_by_model,
    })
    header, rows = accuracy_csv_rows(accuracy_by_model)
    write_csv(out_dir / "accuracy.csv", header, rows)
    write_json(out_dir / "calibration.json", {"models": calibration_by_model})
    calib_rows = []
    for model in sorted(calibration_by_model):
        for mode in sorted(calibration_by_model[model]):
            rep = calibration_by_model[model][mode]
            calib_rows.append([
                model, mode, rep["correct_more"], rep["correct_least"],
                rep["total_more"], rep["total_least"],
                fmt_ratio(rep.get("least_fraction_of_correct")),
            ])
    write_csv(out_dir / "calibration.csv",
              ["model", "setting", "correct_more", "correct_least",
               "total_more", "total_least", "least_fraction_of_correct"],
              calib_rows)
    write_json(out_dir / "grounding.json", {"models": grounding_by_model})
    write_jsonl(out_dir / "unit_results.jsonl", unit_rows)
    if figures:
        for _, meta, _ in loaded:
            mode = meta["context_mode"]
            acc = {m: accuracy_by_model[m][mode]["accuracy"]
                   for m in accuracy_by_model if mode in accuracy_by_model[m]}
            figs.accuracy_figure(acc, out_dir / f"accuracy_{mode}.png")
            calib = {m: calibration_by_model[m][mode]
                     for m in calibration_by_model
                     if mode in calibration_by_model[m]}
            figs.calibration_figure(calib, out_dir / f"calibration_{mode}.png")
    return {"task": TASK_IMPLICIT_PARAGRAPH, "accuracy": accuracy_by_model,
            "calibration": calibration_by_model,
            "grounding": grounding_by_model}


def _evaluate_fulltext_counts(loaded, out_dir: Path) -> dict:
    counts: dict[str, dict] = {}
    for run_dir, meta, _config in loaded:
        predictions = _load_predictions(run_dir, meta)
        for model_id in sorted(predictions):
            n_pairs = sum(len(p.get("pairs", [])) for p in predictions[model_id])
            n_docs = sum(1 for p in predictions[model_id] if p.get("pairs"))
            counts[model_id] = {"documents_with_pairs": n_docs,
                                "gap_pairs": n_pairs}
    write_json(out_dir / "extraction_counts.json", {
        "task": TASK_IMPLICIT_FULLTEXT,
        "note": "document-level inference is validated by expert review; "
                "see export-review/import-review",
        "models": counts,
    })
    write_csv(out_dir / "extraction_counts.csv",
              ["model", "documents_with_pairs", "gap_pairs"],
              [[m, counts[m]["documents_with_pairs"], counts[m]["gap_pairs"]]
               for m in sorted(counts)])
    return {"task": TASK_IMPLICIT_FULLTEXT, "counts": counts}


# ---------------------------------------------------------------------------
# agreement


def _prediction_texts(meta: dict, payloads: list[dict]) -> list[tuple[str, str]]:
    """(ref, text) pairs for one model's payloads, by task."""
    out = []
    for payload in payloads:
        unit = payload["unit_ref"]
        if meta["task"] == TASK_EXPLICIT:
            texts = payload.get("statements", [])
        elif meta["task"] == TASK_IMPLICIT_PARAGRAPH:
            texts = [r["claim"] for r in payload.get("inferences", [])]
        else:
            texts = [r["gap"] for r in payload.get("pairs", [])]
        out.extend((f"{unit}#{i}", text) for i, text in enumerate(texts))
    return out


def run_agreement(run_dirs, out_dir: str | Path | None = None,
                  figures: bool = True, models: list[str] | None = None,
                  sim_threshold: float | None = None) -> dict:
    if isinstance(run_dirs, (str, Path)):
        run_dirs = [run_dirs]
    loaded = [_load_run(rd) for rd in run_dirs]
    corpora = {(meta["corpus_path"], meta["corpus_format"])
               for _, meta, _ in loaded}
    if len(corpora) != 1:
        raise DataError("agreement runs cover disjoint corpora")

    preds: list[tuple[str, str]] = []
    refs: list[str] = []
    raw_counts: dict[str, int] = {}
    for run_dir, meta, _config in loaded:
        predictions = _load_predictions(run_dir, meta)
        for model_id in sorted(predictions):
            pairs = _prediction_texts(meta, predictions[model_id])
            raw_counts[model_id] = raw_counts.get(model_id, 0) + len(pairs)
            for ref, text in pairs:
                preds.append((model_id, text))
                refs.append(f"{model_id}:{ref}")
    model_ids = sorted(raw_counts)
    if len(model_ids) < 2:
        raise DataError("agreement needs predictions from at least two models")

    threshold = (sim_threshold if sim_threshold is not None
                 else loaded[0][2].thresholds.cluster)
    clusters = agreement_mod.cluster_predictions(preds, threshold, refs=refs)

    if models:
        chosen = [m for m in models if m in raw_counts]
        if len(chosen) != len(models):
            raise DataError(f"unknown model ids: "
                            f"{sorted(set(models) - set(chosen))}")
    else:
        by_volume = sorted(model_ids, key=lambda m: (-raw_counts[m], m))
        chosen = sorted(by_volume[:4])
    regions = agreement_mod.overlap_regions(clusters, chosen)
    unique_shared = agreement_mod.unique_vs_shared(clusters)

    dictionary = load_cue_dictionary(loaded[0][2]) or default_dictionary()
    texts_by_model: dict[str, list[str]] = {m: [] for m in model_ids}
    for (model_id, text) in preds:
        texts_by_model[model_id].append(text)
    profile = agreement_mod.category_profile(texts_by_model, dictionary)

    out_dir = Path(out_dir) if out_dir else loaded[0][0] / "reports"
    out_dir.mkdir(parents=True, exist_ok=True)
    write_json(out_dir / "regions.json", {
        "models": chosen, "sim_threshold": threshold, "regions": regions,
    })
    write_jsonl(out_dir / "clusters.jsonl", [
        {"cluster_id": c.cluster_id, "representative": c.representative,
         "models": sorted(c.model_set),
         "members": [{"model_id": m, "ref": r} for m, r in c.members]}
        for c in clusters
    ])
    write_json(out_dir / "unique_shared.json", {
        "models": {
            m: {"unique": u, "shared": s, "clusters": u + s,
                "raw_predictions": raw_counts[m]}
            for m, (u, s) in unique_shared.items()
        },
    })
    write_csv(out_dir / "unique_shared.csv",
              ["model", "unique", "shared", "clusters", "raw_predictions"],
              [[m, u, s, u + s, raw_counts[m]]
               for m, (u, s) in unique_shared.items()])
    write_json(out_dir / "category_profile.json", {
        "counts": profile.counts, "normalized": profile.normalized,
        "uncategorized": profile.uncategorized,
    })
    from .evaluation.cues import CATEGORIES
    write_csv(out_dir / "category_profile.csv",
              ["model", *CATEGORIES, "uncategorized"],
              [[m, *[fmt_ratio(profile.normalized[m][c]) for c in CATEGORIES],
                profile.uncategorized[m]] for m in sorted(profile.normalized)])
    if figures:
        figs.regions_figure(regions, out_dir / "regions.png")
        figs.unique_shared_figure(unique_shared, out_dir / "unique_shared.png")
        figs.category_profile_figure(profile.normalized,
                                     out_dir / "category_profile.png")
    return {"clusters": len(clusters), "regions": regions,
            "unique_shared": unique_shared, "models": chosen,
            "reports_dir": str(out_dir)}


# ---------------------------------------------------------------------------
# review bundle export / judgments import


def export_review_bundle(run_dir: str | Path,
                         out_path: str | Path | None = None) -> dict:
    run_dir, meta, _config = _load_run(run_dir)
    if meta["task"] not in (TASK_IMPLICIT_FULLTEXT, TASK_IMPLICIT_PARAGRAPH):
        raise DataError("review bundles are built from implicit-task runs")
    predictions = _load_predictions(run_dir, meta)

    documents: dict[str, list[dict]] = {}
    for model_id in sorted(predictions):
        for payload in predictions[model_id]:
            doc_ref = payload["parent_ref"]
            items = documents.setdefault(doc_ref, [])
            context = payload.get("context", "")
            excerpt = context[:600] + ("..." if len(context) > 600 else "")
            if meta["task"] == TASK_IMPLICIT_FULLTEXT:
                rows = payload.get("pairs", [])
                for i, row in enumerate(rows):
                    items.append({
                        "item_id": f"{doc_ref}#{model_id}#{i:03d}",
                        "doc_ref": doc_ref,
                        "model_id": model_id,
                        "gap": row["gap"],
                        "future_direction": row["future_direction"],
                        "evidence": row.get("evidence"),
                        "context_excerpt": excerpt,
                    })
            else:
                for i, row in enumerate(payload.get("inferences", [])):
                    items.append({
                        "item_id": f"{doc_ref}#{model_id}#{i:03d}",
                        "doc_ref": doc_ref,
                        "model_id": model_id,
                        "gap": row["claim"],
                        "future_direction": None,
                        "evidence": "; ".join(row["grounds"]),
                        "bucket": row["bucket"],
                        "context_excerpt": excerpt,
                    })
    bundle = {
        "schema_version": BUNDLE_SCHEMA_VERSION,
        "task": meta["task"],
        "questions": {
            "gap": "Is the stated knowledge gap factually true for this work?",
            "direction": "Is the suggested future direction valid and "
                         "feasible?",
        },
        "documents": [
            {"doc_ref": doc_ref, "items": documents[doc_ref]}
            for doc_ref in sorted(documents)
        ],
    }
    out_path = Path(out_path) if out_path else run_dir / "review_bundle.json"
    write_json(out_path, bundle)
    n_items = sum(len(d["items"]) for d in bundle["documents"])
    return {"bundle": str(out_path), "documents": len(bundle["documents"]),
            "items": n_items}


def _validate_judgment(row: dict, where: str) -> dict:
    item_id = row.get("item_id")
    if not item_id or not isinstance(item_id, str):
        raise DataError(f"{where}: judgment without item_id")
    gap_verdict = row.get("gap_verdict")
    if gap_verdict not in GAP_VERDICTS:
        raise DataError(f"{where}: bad gap_verdict {gap_verdict!r}")
    direction_verdict = row.get("direction_verdict", "not_applicable")
    if direction_verdict not in DIRECTION_VERDICTS:
        raise DataError(f"{where}: bad direction_verdict {direction_verdict!r}")
    justification = row.get("justification")
    if (gap_verdict == "disagree" or direction_verdict == "disagree"):
        if justification not in JUSTIFICATION_CODES:
            raise DataError(
                f"{where}: disagree verdict requires a justification code")
    elif justification is not None and justification not in JUSTIFICATION_CODES:
        raise DataError(f"{where}: unknown justification {justification!r}")
    return {
        "item_id": item_id,
        "gap_verdict": gap_verdict,
        "direction_verdict": direction_verdict,
        "justification": justification,
        "note": row.get("note", ""),
        "reviewer_tag": row.get("reviewer_tag", "anonymous"),
        "timestamp": row.get("timestamp", ""),
    }


def import_review(judgments_path: str | Path,
                  bundle_path: str | Path | None = None,
                  out_dir: str | Path | None = None) -> dict:
    """Turn a judgments file back into a human-validation report."""
    judgments_path = Path(judgments_path)
    if not judgments_path.exists():
        raise DataError(f"judgments file not found: {judgments_path}")

    active: dict[tuple[str, str], dict] = {}
    for line_no, line in enumerate(
            judgments_path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            row = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataError(f"{judgments_path}:{line_no}: invalid JSON: {exc}")
        if "summary" in row and "item_id" not in row:
            continue  # embedded summary block from the review UI export
        judgment = _validate_judgment(row, f"{judgments_path}:{line_no}")
        # later rows supersede earlier ones for the same (item, reviewer)
        active[(judgment["item_id"], judgment["reviewer_tag"])] = judgment

    rows = sorted(active.values(),
                  key=lambda j: (j["item_id"], j["reviewer_tag"]))
    n = len(rows)

    def fractions(counts: dict[str, int], total: int) -> dict:
        return {
            verdict: {"count": count,
                      "fraction": (count / total if total else None)}
            for verdict, count in counts.items()
        }

    gap_counts = {v: sum(1 for r in rows if r["gap_verdict"] == v)
                  for v in GAP_VERDICTS}
    dir_counts = {v: sum(1 for r in rows if r["direction_verdict"] == v)
                  for v in DIRECTION_VERDICTS}
    applicable = n - dir_counts["not_applicable"]

    report: dict = {
        "n_judgments": n,
        "n_items_judged": len({r["item_id"] for r in rows}),
        "gap": fractions(gap_counts, n),
        "direction": fractions(
            {v: dir_counts[v] for v in ("agree", "disagree")}, applicable),
        "direction_not_applicable": dir_counts["not_applicable"],
        "justifications": {
            code: sum(1 for r in rows if r["justification"] == code)
            for code in JUSTIFICATION_CODES
            if any(r["justification"] == code for r in rows)
        },
    }

    if bundle_path is not None:
        bundle = json.loads(Path(bundle_path).read_text(encoding="utf-8"))
        items = {item["item_id"]: item
                 for doc in bundle.get("documents", [])
                 for item in doc.get("items", [])}
        report["bundle_items"] = len(items)
        report["coverage"] = (report["n_items_judged"] / len(items)
                              if items else None)
        by_bucket: dict[str, dict[str, int]] = {}
        for row in rows:
            bucket = items.get(row["item_id"], {}).get("bucket")
            if bucket:
                counts = by_bucket.setdefault(
                    bucket, {v: 0 for v in GAP_VERDICTS})
                counts[row["gap_verdict"]] += 1
        if by_bucket:
            report["gap_by_bucket"] = {
                bucket: fractions(counts, sum(counts.values()))
                for bucket, counts in by_bucket.items()
            }

    out_dir = Path(out_dir) if out_dir else judgments_path.parent
    out_dir.mkdir(parents=True, exist_ok=True)
    write_json(out_dir / "human_validation.json", report)
    csv_rows = []
    for verdict in GAP_VERDICTS:
        entry = report["gap"][verdict]
        csv_rows.append(["gap", verdict, entry["count"],
                         fmt_pct(entry["fraction"])])
    for verdict in ("agree", "disagree"):
        entry = report["direction"][verdict]
        csv_rows.append(["direction", verdict, entry["count"],
                         fmt_pct(entry["fraction"])])
    write_csv(out_dir / "human_validation.csv",
              ["question", "verdict", "count", "pct"], csv_rows)
    report["reports_dir"] = str(out_dir)
    return report
