"""File ingestion: JSON-lines record files, embedding matrices, stoplists.

All readers are strict. Anything malformed raises SchemaError carrying a
1-based line number, so a corrupted file is reported at the exact spot.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

from ..predmetrics import EmbeddingMatrix
from ..transition import MODALITIES, TaskResult


class SchemaError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class EmptyFile(ValueError):
    pass


class FormatError(ValueError):
    pass


@dataclass(frozen=True)
class GenRecord:
    id: str
    input_modality: str
    output_modality: str
    prediction: str
    references: tuple[str, ...]


def _iter_jsonl(path):
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            raise SchemaError("blank line", lineno)
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"invalid JSON ({exc.msg})", lineno) from None
        if not isinstance(obj, dict):
            raise SchemaError("expected a JSON object", lineno)
        yield lineno, obj


def _require(obj: dict, key: str, kind, lineno: int):
    if key not in obj:
        raise SchemaError(f"missing field {key!r}", lineno)
    value = obj[key]
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise SchemaError(f"field {key!r} must be a number", lineno)
        return float(value)
    if not isinstance(value, kind):
        raise SchemaError(f"field {key!r} must be {kind.__name__}", lineno)
    return value


def read_gen_records(path) -> list[GenRecord]:
    records = []
    seen_ids = set()
    for lineno, obj in _iter_jsonl(path):
        rec_id = _require(obj, "id", str, lineno)
        if rec_id in seen_ids:
            raise SchemaError(f"duplicate id {rec_id!r}", lineno)
        seen_ids.add(rec_id)
        modality_in = _require(obj, "input_modality", str, lineno)
        modality_out = _require(obj, "output_modality", str, lineno)
        for modality in (modality_in, modality_out):
            if modality not in MODALITIES:
                raise SchemaError(f"unknown modality {modality!r}", lineno)
        prediction = _require(obj, "prediction", str, lineno)
        references = _require(obj, "references", list, lineno)
        if not references or not all(isinstance(r, str) for r in references):
            raise SchemaError("references must be a non-empty list of strings", lineno)
        records.append(
            GenRecord(rec_id, modality_in, modality_out, prediction, tuple(references))
        )
    if not records:
        raise EmptyFile(f"no records in {path}")
    return records


def read_gold(path) -> dict[str, str]:
    gold = {}
    for lineno, obj in _iter_jsonl(path):
        query = _require(obj, "query", str, lineno)
        target = _require(obj, "target", str, lineno)
        if query in gold:
            raise SchemaError(f"duplicate query {query!r}", lineno)
        gold[query] = target
    if not gold:
        raise EmptyFile(f"no gold pairs in {path}")
    return gold


def read_results(path) -> list[TaskResult]:
    results = []
    for lineno, obj in _iter_jsonl(path):
        modality_in = _require(obj, "input", str, lineno)
        modality_out = _require(obj, "output", str, lineno)
        metric = _require(obj, "metric", str, lineno)
        value = _require(obj, "value", float, lineno)
        try:
            results.append(TaskResult(modality_in, modality_out, metric, value))
        except ValueError as exc:
            raise SchemaError(str(exc), lineno) from None
    if not results:
        raise EmptyFile(f"no results in {path}")
    return results


def read_property_rows(path):
    """Returns ("classification", {task: {"labels", "scores"}}) or
    ("regression", {task: {"preds", "truths"}}). A file holds one kind."""
    kind = None
    tasks: dict[str, dict[str, list]] = {}
    for lineno, obj in _iter_jsonl(path):
        task = _require(obj, "task", str, lineno)
        if "label" in obj or "score" in obj:
            row_kind = "classification"
        elif "pred" in obj or "truth" in obj:
            row_kind = "regression"
        else:
            raise SchemaError("expected label/score or pred/truth fields", lineno)
        if kind is None:
            kind = row_kind
        elif kind != row_kind:
            raise SchemaError(f"mixed {row_kind} row in a {kind} file", lineno)
        if kind == "classification":
            label = _require(obj, "label", float, lineno)
            if label not in (0.0, 1.0):
                raise SchemaError("label must be 0 or 1", lineno)
            score = _require(obj, "score", float, lineno)
            bucket = tasks.setdefault(task, {"labels": [], "scores": []})
            bucket["labels"].append(int(label))
            bucket["scores"].append(score)
        else:
            pred = _require(obj, "pred", float, lineno)
            truth = _require(obj, "truth", float, lineno)
            bucket = tasks.setdefault(task, {"preds": [], "truths": []})
            bucket["preds"].append(pred)
            bucket["truths"].append(truth)
    if not tasks:
        raise EmptyFile(f"no property rows in {path}")
    return kind, tasks


def read_pairs(path, scheme: str | None = None) -> list[tuple[list[str], list[str]]]:
    """Token mapping input. Each line holds "input" and "output", either
    raw strings (tokenized under scheme) or pre-tokenized string lists."""
    from ..textmetrics import tokenize

    pairs = []
    for lineno, obj in _iter_jsonl(path):
        sides = []
        for key in ("input", "output"):
            if key not in obj:
                raise SchemaError(f"missing field {key!r}", lineno)
            value = obj[key]
            if isinstance(value, str):
                sides.append(list(tokenize(value, scheme or "whitespace").tokens))
            elif isinstance(value, list) and all(isinstance(t, str) for t in value):
                sides.append(list(value))
            else:
                raise SchemaError(
                    f"field {key!r} must be a string or list of strings", lineno
                )
        pairs.append((sides[0], sides[1]))
    if not pairs:
        raise EmptyFile(f"no pairs in {path}")
    return pairs


_PROFILE_TEXT_FIELDS = ("selfies", "iupac", "caption")


def read_profile_rows(path) -> list[dict]:
    rows = []
    seen_ids = set()
    for lineno, obj in _iter_jsonl(path):
        rec_id = _require(obj, "id", str, lineno)
        if rec_id in seen_ids:
            raise SchemaError(f"duplicate id {rec_id!r}", lineno)
        seen_ids.add(rec_id)
        row = {"id": rec_id, "smiles": _require(obj, "smiles", str, lineno)}
        for key in _PROFILE_TEXT_FIELDS + ("split",):
            if key in obj:
                row[key] = _require(obj, key, str, lineno)
        rows.append(row)
    if not rows:
        raise EmptyFile(f"no records in {path}")
    return rows


_EMB_MAGIC = b"EMB1"


def read_embeddings(path) -> EmbeddingMatrix:
    """Binary layout: magic "EMB1", little-endian u32 row count, u32
    dimension, rows*dim f32 values, then newline-separated UTF-8 ids.
    Files without the magic are read as CSV (id, then float columns)."""
    raw = Path(path).read_bytes()
    if raw[:4] == _EMB_MAGIC:
        return _read_binary_embeddings(raw, path)
    return _read_csv_embeddings(raw, path)


def _read_binary_embeddings(raw: bytes, path) -> EmbeddingMatrix:
    if len(raw) < 12:
        raise FormatError(f"{path}: truncated header")
    rows, dim = struct.unpack_from("<II", raw, 4)
    if dim < 1:
        raise FormatError(f"{path}: dimension must be positive")
    data_end = 12 + rows * dim * 4
    if len(raw) < data_end:
        raise FormatError(f"{path}: truncated vector data")
    values = struct.unpack_from(f"<{rows * dim}f", raw, 12)
    try:
        id_block = raw[data_end:].decode("utf-8")
    except UnicodeDecodeError:
        raise FormatError(f"{path}: id block is not valid UTF-8") from None
    ids = id_block.splitlines()
    if len(ids) != rows:
        raise FormatError(f"{path}: {len(ids)} ids for {rows} rows")
    vectors = [list(values[i * dim : (i + 1) * dim]) for i in range(rows)]
    return _make_matrix(ids, vectors, path)


def _read_csv_embeddings(raw: bytes, path) -> EmbeddingMatrix:
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError:
        raise FormatError(f"{path}: not valid UTF-8") from None
    ids = []
    vectors = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            raise FormatError(f"{path}: blank line {lineno}")
        cells = line.split(",")
        if len(cells) < 2:
            raise FormatError(f"{path}: line {lineno} has no vector columns")
        try:
            vector = [float(c) for c in cells[1:]]
        except ValueError:
            raise FormatError(f"{path}: non-numeric value on line {lineno}") from None
        ids.append(cells[0])
        vectors.append(vector)
    return _make_matrix(ids, vectors, path)


def _make_matrix(ids, vectors, path) -> EmbeddingMatrix:
    if not ids:
        raise FormatError(f"{path}: no embedding rows")
    try:
        return EmbeddingMatrix(tuple(ids), tuple(tuple(v) for v in vectors))
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from None


def write_embeddings(path, matrix: EmbeddingMatrix):
    dim = matrix.dim
    blob = bytearray(_EMB_MAGIC)
    blob += struct.pack("<II", len(matrix.ids), dim)
    for row in matrix.vectors:
        blob += struct.pack(f"<{dim}f", *row)
    blob += "\n".join(matrix.ids).encode("utf-8")
    if matrix.ids:
        blob += b"\n"
    Path(path).write_bytes(bytes(blob))


# tokens dropped from mapping matrices unless the user supplies a stoplist
# file; bare punctuation carries no modality content
DEFAULT_STOPLIST = frozenset(
    [
        ".", ",", ";", ":", "!", "?", "(", ")", "[", "]", "{", "}",
        "'", '"', "`", "-", "_", "/", "\\", "|",
    ]
)


def read_stoplist(path) -> frozenset[str]:
    tokens = set()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        token = line.strip()
        if token:
            tokens.add(token)
    return frozenset(tokens)
