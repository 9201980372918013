"""Deterministic report serialization.

Every writer is byte-stable: JSON is sorted and indented the same way,
CSV uses fixed column orders and fixed float formatting, and all writes
go through a temp-file rename. Reports carry no timestamps or absolute
paths, so identical inputs reproduce identical bytes.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Sequence

CONTEXT_MODES = ("no_limit", "chunked")


def atomic_write_text(path: str | Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    tmp.replace(path)


def write_json(path: str | Path, payload) -> None:
    atomic_write_text(
        path, json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
    )


def write_jsonl(path: str | Path, rows: Iterable[dict]) -> None:
    lines = [json.dumps(row, sort_keys=True, ensure_ascii=False) for row in rows]
    atomic_write_text(path, "\n".join(lines) + ("\n" if lines else ""))


def write_csv(path: str | Path, header: Sequence[str],
              rows: Iterable[Sequence]) -> None:
    def cell(value) -> str:
        if value is None:
            return ""
        if isinstance(value, str):
            if any(ch in value for ch in ",\"\n"):
                return '"' + value.replace('"', '""') + '"'
            return value
        return str(value)

    lines = [",".join(header)]
    lines.extend(",".join(cell(v) for v in row) for row in rows)
    atomic_write_text(path, "\n".join(lines) + "\n")


def fmt_ratio(value: float | None) -> str:
    """P/R/F1-style cell, four decimals."""
    return "" if value is None else f"{value:.4f}"


def fmt_pct(value: float | None) -> str:
    """Accuracy-style cell, percent with two decimals."""
    return "" if value is None else f"{100 * value:.2f}"


def metrics_csv_rows(per_model: dict[str, dict[str, dict]],
                     ) -> tuple[list[str], list[list[str]]]:
    """Wide table mirroring the explicit-gap results layout: one row per
    model, P/R/F1 columns per context setting."""
    header = ["model"]
    for mode in CONTEXT_MODES:
        header += [f"{mode}_precision", f"{mode}_recall", f"{mode}_f1"]
    rows = []
    for model in sorted(per_model):
        row = [model]
        for mode in CONTEXT_MODES:
            entry = per_model[model].get(mode)
            if entry is None:
                row += ["", "", ""]
            else:
                row += [fmt_ratio(entry["precision"]), fmt_ratio(entry["recall"]),
                        fmt_ratio(entry["f1"])]
        rows.append(row)
    return header, rows


def accuracy_csv_rows(per_model: dict[str, dict[str, dict]],
                      ) -> tuple[list[str], list[list[str]]]:
    """Wide table mirroring the accuracy layout: correct count and
    accuracy percent per context setting, 'all_models' union row first."""
    header = ["model"]
    for mode in CONTEXT_MODES:
        header += [f"{mode}_correct", f"{mode}_accuracy_pct"]
    ordered = sorted(per_model, key=lambda m: (m != "all_models", m))
    rows = []
    for model in ordered:
        row = [model]
        for mode in CONTEXT_MODES:
            entry = per_model[model].get(mode)
            if entry is None:
                row += ["", ""]
            else:
                row += [str(entry["correct"]), fmt_pct(entry["accuracy"])]
        rows.append(row)
    return header, rows
