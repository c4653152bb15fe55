"""JSON and CSV interchange for matrices, measurement sets and reports.

The matrix literal is ``{"rows": R, "cols": C, "data": [[re, im], ...]}`` in
row-major order; floats serialize via their shortest round-tripping decimal
form, so save/load round-trips are entrywise exact. Report serialization is
deterministic (sorted keys, fixed separators): identical runs give identical
bytes apart from the manifest timestamp.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import time
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .errors import SchemaError, UnknownObservable
from .measurement import KrausSet
from .operators import HermitianObservable, as_complex_matrix, eigendecompose, named_observable


def matrix_to_literal(matrix) -> dict:
    arr = as_complex_matrix(matrix)
    return {
        "rows": int(arr.shape[0]),
        "cols": int(arr.shape[1]),
        "data": [[float(z.real), float(z.imag)] for z in arr.reshape(-1)],
    }


def matrix_from_literal(obj, where: str = "matrix") -> np.ndarray:
    if not isinstance(obj, Mapping):
        raise SchemaError(f"{where}: expected an object, got {type(obj).__name__}")
    for key in ("rows", "cols", "data"):
        if key not in obj:
            raise SchemaError(f"{where}: missing field {key!r}")
    rows, cols = obj["rows"], obj["cols"]
    if not (isinstance(rows, int) and isinstance(cols, int) and rows > 0 and cols > 0):
        raise SchemaError(f"{where}: rows/cols must be positive integers")
    data = obj["data"]
    if not isinstance(data, list) or len(data) != rows * cols:
        raise SchemaError(
            f"{where}.data: expected {rows * cols} [re, im] pairs, got "
            f"{len(data) if isinstance(data, list) else type(data).__name__}")
    flat = np.empty(rows * cols, dtype=np.complex128)
    for i, pair in enumerate(data):
        if (not isinstance(pair, list) or len(pair) != 2
                or not all(isinstance(v, (int, float)) for v in pair)):
            raise SchemaError(f"{where}.data[{i}]: expected [re, im]")
        flat[i] = complex(pair[0], pair[1])
    out = flat.reshape(rows, cols)
    out.setflags(write=False)
    return out


def kraus_set_to_dict(kraus: KrausSet) -> dict:
    return {
        "dim": kraus.dim,
        "outcomes": [
            {"label": str(label), "matrix": matrix_to_literal(op)}
            for label, op in kraus.items()
        ],
        "complete": kraus.complete,
    }


def kraus_set_from_dict(obj, where: str = "kraus") -> KrausSet:
    if not isinstance(obj, Mapping):
        raise SchemaError(f"{where}: expected an object")
    if "outcomes" not in obj or not isinstance(obj["outcomes"], list) or not obj["outcomes"]:
        raise SchemaError(f"{where}.outcomes: expected a non-empty list")
    dim = obj.get("dim")
    operators = []
    labels = []
    for i, entry in enumerate(obj["outcomes"]):
        here = f"{where}.outcomes[{i}]"
        if not isinstance(entry, Mapping) or "matrix" not in entry:
            raise SchemaError(f"{here}: expected an object with a matrix")
        matrix = matrix_from_literal(entry["matrix"], f"{here}.matrix")
        if dim is not None and matrix.shape != (dim, dim):
            raise SchemaError(
                f"{here}.matrix: shape {matrix.shape} does not match dim {dim}")
        operators.append(matrix)
        labels.append(str(entry.get("label", i)))
    complete = obj.get("complete", True)
    if not isinstance(complete, bool):
        raise SchemaError(f"{where}.complete: expected a boolean")
    return KrausSet(operators=tuple(operators), labels=tuple(labels), complete=complete)


def load_json(path) -> Any:
    text = Path(path).read_text(encoding="utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


def load_kraus_set(path) -> KrausSet:
    return kraus_set_from_dict(load_json(path), where=str(path))


def save_kraus_set(kraus: KrausSet, path) -> None:
    Path(path).write_text(json.dumps(kraus_set_to_dict(kraus), indent=2,
                                     sort_keys=True) + "\n", encoding="utf-8")


def observable_from_spec(spec, dim: int, name: str | None = None,
                         where: str = "observable") -> HermitianObservable:
    """Resolve an observable given by preset name or matrix literal."""
    if isinstance(spec, str):
        try:
            return named_observable(spec, dim)
        except UnknownObservable:
            raise SchemaError(f"{where}: unknown observable name {spec!r}") from None
    if isinstance(spec, Mapping):
        matrix = matrix_from_literal(spec, where)
        if matrix.shape != (dim, dim):
            raise SchemaError(f"{where}: shape {matrix.shape} does not match dim {dim}")
        return eigendecompose(matrix, name=name)
    raise SchemaError(f"{where}: expected a name or a matrix literal")


def observables_from_dict(obj, where: str = "observables") -> dict[str, HermitianObservable]:
    """Load a named-observable file: {"dim": d, "observables": [{name, matrix}]}."""
    if not isinstance(obj, Mapping) or "observables" not in obj or "dim" not in obj:
        raise SchemaError(f"{where}: expected an object with dim and observables")
    dim = obj["dim"]
    if not isinstance(dim, int) or dim < 2:
        raise SchemaError(f"{where}.dim: expected an integer >= 2")
    out: dict[str, HermitianObservable] = {}
    for i, entry in enumerate(obj["observables"]):
        here = f"{where}.observables[{i}]"
        if not isinstance(entry, Mapping) or "name" not in entry:
            raise SchemaError(f"{here}: expected an object with a name")
        name = str(entry["name"])
        spec = entry.get("matrix", name)
        out[name] = observable_from_spec(spec, dim, name=name, where=here)
    return out


def to_jsonable(value) -> Any:
    """Recursively convert report objects to JSON-ready structures."""
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return {f.name: to_jsonable(getattr(value, f.name))
                for f in dataclasses.fields(value)}
    if isinstance(value, np.ndarray):
        if value.ndim == 2:
            return matrix_to_literal(value)
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return value.item()
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    if isinstance(value, Mapping):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, float) and value in (float("inf"), float("-inf")):
        return repr(value)
    return value


def report_json_bytes(report, manifest: "RunManifest | None" = None) -> bytes:
    """Deterministic JSON encoding of a report (optionally with its manifest)."""
    payload: dict[str, Any] = {"report": to_jsonable(report)}
    if manifest is not None:
        payload["manifest"] = to_jsonable(manifest)
    return (json.dumps(payload, sort_keys=True, indent=2,
                       separators=(",", ": ")) + "\n").encode("utf-8")


def write_table(path, header: list[str], rows: list[list], fmt: str = "csv") -> None:
    """Write rows as CSV, or gnuplot-friendly TSV with a # header."""
    path = Path(path)
    if fmt == "csv":
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(rows)
    elif fmt == "tsv":
        with path.open("w", encoding="utf-8") as fh:
            fh.write("# " + "\t".join(header) + "\n")
            for row in rows:
                fh.write("\t".join(str(v) for v in row) + "\n")
    else:
        raise ValueError(f"unknown table format {fmt!r}")


def characterization_rows(report) -> tuple[list[str], list[list]]:
    """Flat per-(outcome, observable) rows for a characterization report."""
    header = ["outcome", "status", "observable", "estimate", "resolution", "disturbance"]
    rows = []
    for outcome in report.outcomes:
        if outcome.status != "ok":
            rows.append([outcome.outcome, outcome.status, "", "", "", ""])
            continue
        for row in outcome.rows:
            rows.append([outcome.outcome, "ok", row.observable,
                         repr(row.estimate), repr(row.resolution), repr(row.disturbance)])
    return header, rows


def pair_rows(report) -> tuple[list[str], list[list]]:
    header = ["outcome", "observable_a", "observable_b",
              "resolution_a", "resolution_b", "pair_bound", "pair_slack", "pair_ok",
              "disturbance_b", "rd_bound", "rd_slack", "rd_ok"]
    rows = []
    for outcome in report.outcomes:
        for pair in outcome.pairs:
            rc, dc = pair.resolution_check, pair.disturbance_check
            rows.append([outcome.outcome, pair.observable_a, pair.observable_b,
                         repr(rc.var_a), repr(rc.var_b), repr(rc.bound),
                         repr(rc.slack), rc.satisfied,
                         repr(dc.disturbance), repr(dc.bound), repr(dc.slack),
                         dc.satisfied])
    return header, rows


def disturbance_record_rows(report) -> tuple[list[str], list[list]]:
    """Per-final-value disturbance records across all outcomes and observables."""
    header = ["outcome", "observable", "final_value", "weight",
              "random", "systematic", "total"]
    rows = []
    for outcome in report.outcomes:
        for row in outcome.rows:
            for rec in row.disturbance_report.records:
                rows.append([outcome.outcome, row.observable,
                             repr(rec.final_value), repr(rec.weight),
                             repr(rec.random), repr(rec.systematic), repr(rec.total)])
    return header, rows


def teleport_rows(report) -> tuple[list[str], list[list]]:
    header = ["quadrature", "estimate", "resolution", "disturbance", "tail_mass"]
    rows = [
        ["x", repr(report.estimate.real), repr(report.resolution_x),
         repr(report.disturbance_x), repr(report.tail_mass)],
        ["y", repr(report.estimate.imag), repr(report.resolution_y),
         repr(report.disturbance_y), repr(report.tail_mass)],
    ]
    return header, rows


def cloning_rows(report) -> tuple[list[str], list[list]]:
    header = ["outcome", "observable", "estimate", "resolution", "disturbance"]
    rows = [[row.outcome, report.observable, repr(row.estimate),
             repr(row.resolution), repr(row.disturbance)] for row in report.rows]
    return header, rows


def eavesdrop_rows(report) -> tuple[list[str], list[list]]:
    header = ["observable", "outcome", "analytic", "empirical_mean",
              "std_error", "count", "within_three_se"]
    rows = []
    for block in report.bases:
        rows.append([block.observable, "(all)", repr(block.analytic),
                     repr(block.empirical.mean), repr(block.empirical.std_error),
                     block.empirical.count, block.within_three_se])
        for stat in block.outcomes:
            rows.append([block.observable, stat.outcome, repr(stat.analytic),
                         repr(stat.empirical.mean), repr(stat.empirical.std_error),
                         stat.empirical.count, stat.within_three_se])
    return header, rows


def sha256_path(path) -> str:
    digest = hashlib.sha256()
    digest.update(Path(path).read_bytes())
    return digest.hexdigest()


@dataclasses.dataclass(frozen=True)
class RunManifest:
    """Provenance block embedded in every CLI report.

    Two runs with the same manifest (timestamp aside) must produce the same
    report bytes.
    """

    command: tuple[str, ...]
    inputs: dict[str, str]
    tolerances: dict[str, float]
    seed: int | None
    version: str
    timestamp: str


def make_manifest(command, inputs: dict[str, str], tolerances: dict[str, float],
                  seed: int | None, version: str) -> RunManifest:
    return RunManifest(
        command=tuple(str(c) for c in command),
        inputs=dict(inputs),
        tolerances=dict(tolerances),
        seed=seed,
        version=version,
        timestamp=time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    )
