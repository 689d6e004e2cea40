"""Canonical JSON and CSV output for index and sweep reports.

JSON keys are sorted and floats are written with 17 significant digits, so
repeated runs with the same inputs produce byte-identical files.  Infinite
and NaN floats are written as the strings ``"inf"``, ``"-inf"``, ``"nan"``.
"""

from __future__ import annotations

import csv
import json
import math
import os
from fractions import Fraction
from pathlib import Path
from typing import Any

import numpy as np

from .homotopy import SweepReport
from .index import IndexReport
from .spectral import label_str

SV_TAIL = 10


def _float(x: float) -> str:
    if math.isnan(x):
        return json.dumps("nan")
    if math.isinf(x):
        return json.dumps("inf" if x > 0 else "-inf")
    text = format(x, ".17g")
    if not any(ch in text for ch in ".en"):
        text += ".0"
    return text


def canonical_json(value: Any, indent: int = 2, _level: int = 0) -> str:
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if value is None:
        return "null"
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return _float(float(value))
    if isinstance(value, Fraction):
        return json.dumps(str(value))
    if isinstance(value, complex):
        return canonical_json([value.real, value.imag], indent, _level)
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = sorted((str(k), v) for k, v in value.items())
        body = ",\n".join(f"{pad}{json.dumps(k)}: {canonical_json(v, indent, _level + 1)}" for k, v in items)
        return "{\n" + body + "\n" + end + "}"
    if isinstance(value, (list, tuple, np.ndarray)):
        seq = list(value)
        if not seq:
            return "[]"
        body = ",\n".join(pad + canonical_json(v, indent, _level + 1) for v in seq)
        return "[\n" + body + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(value).__name__}")


def _tail(sigma) -> list[float]:
    if sigma is None or len(sigma) == 0:
        return []
    return [float(x) for x in np.sort(np.asarray(sigma))[:SV_TAIL]]


def index_report_dict(report: IndexReport) -> dict:
    return {
        "dim_ker_L": report.dim_ker_L,
        "dim_ker_R": report.dim_ker_R,
        "index": report.index if report.finite else None,
        "finite": report.finite,
        "ill_conditioned": report.ill_conditioned,
        "boundary_discarded_L": report.boundary_discarded_L,
        "boundary_discarded_R": report.boundary_discarded_R,
        "gap_ratios": [float(g) for g in report.gap_ratios],
        "truncation": report.truncation,
        "zero_block_census": report.zero_blocks,
        "kernel_labels_L": [label_str(x) for x in report.kernel_labels("L")],
        "kernel_labels_R": [label_str(x) for x in report.kernel_labels("R")],
        "singular_value_tail_L": _tail(report.singular_values_L),
        "singular_value_tail_R": _tail(report.singular_values_R),
        "notes": list(report.notes),
    }


def sweep_report_dict(sweep: SweepReport) -> dict:
    steps = []
    for s, rep in zip(sweep.s, sweep.reports):
        steps.append({"s": str(s), "s_value": float(s), **index_report_dict(rep)})
    return {
        "verdict": sweep.verdict,
        "verdict_step": sweep.verdict_step,
        "steps": steps,
        "operator_norm_diffs": [float(x) for x in sweep.operator_diffs],
        "sobolev_norm_diffs": [float(x) for x in sweep.sobolev_diffs],
    }


def write_json(doc: dict, path: str | os.PathLike) -> None:
    Path(path).write_text(canonical_json(doc) + "\n", encoding="utf-8")


def write_singular_values(report: IndexReport, path: str | os.PathLike) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["side", "index", "value"])
        for side, sig in (("L", report.singular_values_L), ("R", report.singular_values_R)):
            for i, v in enumerate([] if sig is None else sig):
                writer.writerow([side, i, format(float(v), ".17g")])


def write_sweep_csv(sweep: SweepReport, path: str | os.PathLike) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["s", "index"])
        for s, rep in zip(sweep.s, sweep.reports):
            writer.writerow([format(float(s), ".17g"), rep.index if rep.finite else "undefined"])
