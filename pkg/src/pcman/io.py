"""Reading and writing matrices, results, reports and experiment files.

Formats:

* matrix CSV: headerless grid, one row per line, comma separated;
* matrix JSON: ``{"matrix": [[...], ...]}`` (a bare nested list is accepted);
* results / reports / priority vectors: JSON objects, indices 1-based;
* experiment output: CSV with a header row (see :data:`EXPERIMENT_COLUMNS`);
* experiment config: flat JSON object keyed by config field names.

Numbers are written with 12 significant digits unless ``digits`` says
otherwise, always with ``.`` as the decimal point.
"""

from __future__ import annotations

import csv
import dataclasses
import io as _io
import json
import math
import os
from pathlib import Path
from typing import Iterable, Optional, Union

import numpy as np

from .core import (
    TEXT_RECIPROCITY_TOL,
    Method,
    PCMatrix,
    PriorityVector,
    rank_of,
    validate,
)
from .detect import DetectionReport, Suspect
from .exceptions import MissingRequired, NotSquare, ParseError, RangeError, UnknownKey
from .manip import Algorithm, ManipulationResult, StepRecord
from .montecarlo import BucketStats, ExperimentConfig, GenerationConfig

DIGITS = 12

EXPERIMENT_COLUMNS = ("n", "algorithm", "method", "delta_pq", "ci_low", "ci_high",
                      "trials", "successes", "sr", "mean_m_res")

Source = Union[str, os.PathLike, _io.TextIOBase]


def fmt(x: float, digits: int = DIGITS) -> str:
    """Locale-independent ``%g`` formatting; NaN is written as ``nan``."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    return format(x, f".{digits}g")


def _num(x: float, digits: int = DIGITS) -> float:
    return float(fmt(x, digits))


def _read_text(source: Source) -> tuple:
    """Return ``(text, suffix)``; ``suffix`` is ``""`` for streams."""
    if hasattr(source, "read"):
        return source.read(), ""
    path = Path(source)
    return path.read_text(encoding="utf-8"), path.suffix.lower()


def _infer(fmt_name: Optional[str], suffix: str) -> str:
    if fmt_name:
        fmt_name = fmt_name.lower()
        if fmt_name not in ("csv", "json"):
            raise ValueError(f"unknown matrix format {fmt_name!r}")
        return fmt_name
    return "json" if suffix == ".json" else "csv"


# -- matrices ----------------------------------------------------------------

def parse_matrix_csv(text: str) -> list:
    rows = []
    for lineno, row in enumerate(csv.reader(_io.StringIO(text)), start=1):
        if not row or all(not cell.strip() for cell in row):
            continue
        values = []
        for col, cell in enumerate(row, start=1):
            try:
                values.append(float(cell.strip()))
            except ValueError:
                raise ParseError(f"not a number: {cell.strip()!r}", lineno, col) from None
        rows.append(values)
    if not rows:
        raise ParseError("empty matrix")
    width = len(rows[0])
    for k, r in enumerate(rows[1:], start=2):
        if len(r) != width:
            raise ParseError(f"expected {width} values, got {len(r)}", k)
    return rows


def parse_matrix_json(text: str) -> list:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None
    rows = doc.get("matrix") if isinstance(doc, dict) else doc
    if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
        raise ParseError("expected a list of rows under 'matrix'")
    try:
        return [[float(x) for x in r] for r in rows]
    except (TypeError, ValueError):
        raise ParseError("matrix entries must be numbers") from None


def read_matrix(source: Source, fmt_name: Optional[str] = None,
                tol: float = TEXT_RECIPROCITY_TOL) -> PCMatrix:
    """Parse a matrix file (or stream) and validate it.

    Text files usually carry rounded values, so reciprocity is checked with
    ``TEXT_RECIPROCITY_TOL`` unless ``tol`` says otherwise.
    """
    text, suffix = _read_text(source)
    kind = _infer(fmt_name, suffix)
    rows = parse_matrix_json(text) if kind == "json" else parse_matrix_csv(text)
    if len(rows) != len(rows[0]):
        raise NotSquare(f"expected a square matrix, got {len(rows)}x{len(rows[0])}")
    return validate(np.array(rows, dtype=float), tol=tol)


def matrix_to_csv(C, digits: int = DIGITS) -> str:
    a = np.asarray(C, dtype=float)
    return "".join(",".join(fmt(x, digits) for x in row) + "\n" for row in a)


def matrix_to_json(C, digits: int = DIGITS) -> str:
    a = np.asarray(C, dtype=float)
    return json.dumps({"n": int(a.shape[0]),
                       "matrix": [[_num(x, digits) for x in row] for row in a]}) + "\n"


def write_matrix(C, fmt_name: str = "csv", target: Optional[Source] = None,
                 digits: int = DIGITS) -> str:
    text = matrix_to_json(C, digits) if fmt_name == "json" else matrix_to_csv(C, digits)
    _write(text, target)
    return text


def _write(text: str, target):
    if target is None:
        return
    if hasattr(target, "write"):
        target.write(text)
    else:
        Path(target).write_text(text, encoding="utf-8")


# -- priority vectors ----------------------------------------------------------

def priority_to_dict(w: PriorityVector, digits: int = DIGITS) -> dict:
    doc = {
        "method": w.method.value,
        "weights": [_num(x, digits) for x in w.weights],
        "ranks": list(rank_of(w).positions),
    }
    if w.lambda_max is not None:
        doc["lambda_max"] = _num(w.lambda_max, digits)
    return doc


def priority_from_dict(doc: dict) -> PriorityVector:
    return PriorityVector(np.array(doc["weights"], dtype=float), Method(doc["method"]),
                          doc.get("lambda_max"))


# -- manipulation results --------------------------------------------------------

def _step_to_dict(k, step: StepRecord, matrix=None, digits=DIGITS) -> dict:
    i, j = step.modified_pair
    doc = {
        "step": k,
        "pair": [i + 1, j + 1],
        "new_values": [_num(v, digits) for v in step.new_values],
        "weights": [_num(x, digits) for x in step.weights_after.weights],
        "ci": _num(step.ci_after, digits),
        "rank_p": step.ranks_after[0],
        "rank_q": step.ranks_after[1],
    }
    if matrix is not None:
        doc["matrix"] = [[_num(x, digits) for x in row] for row in matrix.entries]
    return doc


def result_to_dict(result: ManipulationResult, include_matrices: bool = False,
                   digits: int = DIGITS) -> dict:
    mats = result.intermediate_matrices() if include_matrices else [None] * len(result.trace)
    return {
        "algorithm": result.algorithm.value,
        "method": result.method.value,
        "p": result.p + 1,
        "q": result.q + 1,
        "m_res": result.m_res,
        "cost": result.cost,
        "success": bool(result.success),
        "swap_achieved": bool(result.swap_achieved),
        "final_ci": _num(result.final_ci, digits),
        "ci_threshold": result.ci_threshold,
        "alpha_used": result.alpha_used,
        "weights": priority_to_dict(result.weights, digits),
        "out_of_scale": [[i + 1, j + 1] for i, j in result.out_of_scale],
        "matrix": [[_num(x, digits) for x in row] for row in result.matrix.entries],
        "trace": [_step_to_dict(k, s, m, digits)
                  for k, (s, m) in enumerate(zip(result.trace, mats), start=1)],
    }


def result_from_dict(doc: dict) -> ManipulationResult:
    method = Method(doc["method"])
    n = len(doc["matrix"])
    p, q = doc["p"] - 1, doc["q"] - 1
    trace = []
    for s in doc["trace"]:
        lam = None
        if method is Method.EVM:
            lam = s["ci"] * (n - 1) + n
        trace.append(StepRecord(
            modified_pair=(s["pair"][0] - 1, s["pair"][1] - 1),
            new_values=tuple(s["new_values"]),
            weights_after=PriorityVector(np.array(s["weights"]), method, lam),
            ci_after=s["ci"],
            ranks_after=(s["rank_p"], s["rank_q"]),
        ))
    return ManipulationResult(
        matrix=PCMatrix(np.array(doc["matrix"], dtype=float)),
        m_res=doc["m_res"], success=doc["success"], swap_achieved=doc["swap_achieved"],
        final_ci=doc["final_ci"], alpha_used=doc["alpha_used"],
        weights=priority_from_dict(doc["weights"]), p=p, q=q,
        algorithm=Algorithm(doc["algorithm"]), method=method,
        ci_threshold=doc["ci_threshold"], trace=tuple(trace),
        out_of_scale=tuple((i - 1, j - 1) for i, j in doc["out_of_scale"]),
    )


def _grid(a, places=4) -> list:
    width = max(len(f"{x:.{places}f}") for x in a.ravel())
    return ["  " + " ".join(f"{x:>{width}.{places}f}" for x in row) for row in a]


def result_to_text(result: ManipulationResult, include_matrices: bool = False) -> str:
    lines = [
        f"algorithm: {result.algorithm.value}",
        f"method: {result.method.value}",
        f"p: {result.p + 1}",
        f"q: {result.q + 1}",
        f"alpha: {'-' if result.alpha_used is None else fmt(result.alpha_used)}",
        f"m_res: {result.m_res}",
        f"cost: {result.cost}",
        f"final_ci: {result.final_ci:.4f}",
        f"swap_achieved: {str(result.swap_achieved).lower()}",
        f"success: {str(result.success).lower()}",
    ]
    if result.out_of_scale:
        pairs = ", ".join(f"({i + 1},{j + 1})" for i, j in result.out_of_scale)
        lines.append(f"warning: entries outside the comparison scale at {pairs}")
    mats = result.intermediate_matrices() if include_matrices else [None] * len(result.trace)
    for k, (step, m) in enumerate(zip(result.trace, mats), start=1):
        i, j = step.modified_pair
        w = " ".join(f"{x:.4f}" for x in step.weights_after.weights)
        lines.append(
            f"step {k}: c[{i + 1},{j + 1}] = {step.new_values[0]:.4f}, "
            f"c[{j + 1},{i + 1}] = {step.new_values[1]:.4f}; w = [{w}]; "
            f"CI = {step.ci_after:.4f}; r(p) = {step.ranks_after[0]}, r(q) = {step.ranks_after[1]}"
        )
        if m is not None:
            lines.extend(_grid(m.entries))
    lines.append("matrix:")
    lines.extend(_grid(result.matrix.entries))
    return "\n".join(lines) + "\n"


def write_result(result: ManipulationResult, fmt_name: str = "json",
                 include_matrices: bool = False, target: Optional[Source] = None) -> str:
    """Serialize a manipulation result as ``json`` or human-readable ``text``."""
    if fmt_name == "json":
        text = json.dumps(result_to_dict(result, include_matrices), indent=2) + "\n"
    else:
        text = result_to_text(result, include_matrices)
    _write(text, target)
    return text


def read_result(source: Source) -> ManipulationResult:
    text, _ = _read_text(source)
    return result_from_dict(json.loads(text))


# -- detection reports -----------------------------------------------------------

def report_to_dict(report: DetectionReport, digits: int = DIGITS) -> dict:
    return {
        "tolerance": report.tolerance,
        "ci": _num(report.ci, digits),
        "gated": bool(report.gated),
        "ci_gate": report.ci_gate,
        "suspects": [
            {
                "promoted_row": s.promoted_row + 1,
                "reference_row": s.reference_row + 1,
                "witness_columns": [k + 1 for k in s.witness_columns],
                "common_ratio": _num(s.common_ratio, digits),
            }
            for s in report.suspects
        ],
    }


def report_from_dict(doc: dict) -> DetectionReport:
    suspects = tuple(
        Suspect(s["promoted_row"] - 1, s["reference_row"] - 1,
                tuple(k - 1 for k in s["witness_columns"]), s["common_ratio"])
        for s in doc["suspects"]
    )
    return DetectionReport(suspects, doc["tolerance"], doc["ci"], doc["gated"], doc["ci_gate"])


def report_to_text(report: DetectionReport) -> str:
    lines = [f"CI: {report.ci:.4f}", f"tolerance: {report.tolerance:g}"]
    if report.gated:
        lines.append(f"skipped: CI <= {report.ci_gate:g}, the matrix is (nearly) consistent "
                     "and every row pair would match")
    elif not report.suspects:
        lines.append("no suspects")
    for s in report.suspects:
        cols = ",".join(str(k + 1) for k in s.witness_columns)
        lines.append(f"suspect: row {s.promoted_row + 1} promoted over row {s.reference_row + 1} "
                     f"(ratio {s.common_ratio:.6g} at columns {cols})")
    return "\n".join(lines) + "\n"


# -- experiments -------------------------------------------------------------------

_CONFIG_TUPLES = {"algorithms", "methods", "weight_range"}


def _fields(cls) -> set:
    return {f.name for f in dataclasses.fields(cls)}


def parse_experiment_config(doc: dict) -> tuple:
    """Split a flat config mapping into ``(ExperimentConfig, GenerationConfig)``.

    ``n`` and ``seed`` are shared. Unknown keys are rejected; everything else
    takes the dataclass defaults.
    """
    if not isinstance(doc, dict):
        raise ParseError("config must be a JSON object")
    exp_keys, gen_keys = _fields(ExperimentConfig), _fields(GenerationConfig)
    for key in doc:
        if key not in exp_keys | gen_keys:
            raise UnknownKey(key)
    if "n" not in doc:
        raise MissingRequired("n")
    values = {k: (tuple(v) if k in _CONFIG_TUPLES and isinstance(v, list) else v)
              for k, v in doc.items()}
    try:
        exp = ExperimentConfig(**{k: v for k, v in values.items() if k in exp_keys})
        gen = GenerationConfig(**{k: v for k, v in values.items() if k in gen_keys})
    except RangeError:
        raise
    except (TypeError, ValueError) as exc:
        raise RangeError("?", str(exc)) from None
    return exp, gen


def read_experiment_config(source: Source) -> tuple:
    text, _ = _read_text(source)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None
    return parse_experiment_config(doc)


def experiment_to_csv(stats: Iterable[BucketStats], digits: int = DIGITS) -> str:
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(EXPERIMENT_COLUMNS)
    for s in stats:
        writer.writerow([s.n, s.algorithm.value, s.method.value, s.delta_pq,
                         fmt(s.ci_low, digits), fmt(s.ci_high, digits), s.trials, s.successes,
                         fmt(s.sr, digits), fmt(s.mean_m_res, digits)])
    return buf.getvalue()


def write_experiment_csv(stats, target: Optional[Source] = None) -> str:
    text = experiment_to_csv(stats)
    _write(text, target)
    return text


def read_experiment_csv(source: Source) -> list:
    text, _ = _read_text(source)
    reader = csv.DictReader(_io.StringIO(text))
    if tuple(reader.fieldnames or ()) != EXPERIMENT_COLUMNS:
        raise ParseError(f"expected header {','.join(EXPERIMENT_COLUMNS)}", 1)
    return [
        BucketStats(int(r["n"]), Algorithm(r["algorithm"]), Method(r["method"]),
                    int(r["delta_pq"]), float(r["ci_low"]), float(r["ci_high"]),
                    int(r["trials"]), int(r["successes"]), float(r["mean_m_res"]))
        for r in reader
    ]
