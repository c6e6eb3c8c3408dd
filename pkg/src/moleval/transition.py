"""Assembly of the modal transition probability matrix.

Cells are filled by rule priority: the diagonal is always 1; the
property row transfers nothing to text modalities; conversions between
the internal representations default to 1 because lossless tools exist,
unless a measured generation score for the row overrides them; every
other cell is either measured or missing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

MODALITIES = (
    "smiles",
    "inchi",
    "selfies",
    "graph",
    "image",
    "iupac",
    "caption",
    "property",
)
INTERNAL = frozenset(("smiles", "inchi", "selfies", "graph"))

_REGRESSION_METRICS = frozenset(("mse", "rmse", "mae"))


class UnknownModality(ValueError):
    pass


class ConflictingResults(ValueError):
    pass


@dataclass(frozen=True)
class TaskResult:
    input: str
    output: str
    metric: str
    value: float

    def __post_init__(self):
        if self.input not in MODALITIES:
            raise UnknownModality(f"unknown input modality {self.input!r}")
        if self.output not in MODALITIES:
            raise UnknownModality(f"unknown output modality {self.output!r}")
        if not math.isfinite(self.value):
            raise ValueError("result value must be finite")
        object.__setattr__(self, "value", min(1.0, max(0.0, float(self.value))))


@dataclass
class TransitionMatrix:
    entries: dict[tuple[str, str], float | None] = field(default_factory=dict)
    provenance: dict[tuple[str, str], str] = field(default_factory=dict)

    def cell(self, row: str, col: str) -> float | None:
        return self.entries[(row, col)]

    def tag(self, row: str, col: str) -> str:
        return self.provenance[(row, col)]


def _is_bleu(metric: str) -> bool:
    return metric == "bleu" or metric.startswith("bleu-")


def build_matrix(results: list[TaskResult]) -> TransitionMatrix:
    # regression scores cannot be read as probabilities; drop them for the
    # property column before any conflict checking
    usable = [
        r
        for r in results
        if not (r.output == "property" and r.metric in _REGRESSION_METRICS)
    ]

    by_cell: dict[tuple[str, str], dict[str, list[float]]] = {}
    for r in usable:
        cell = by_cell.setdefault((r.input, r.output), {})
        cell.setdefault(r.metric, []).append(r.value)
    measured: dict[tuple[str, str], tuple[float, str]] = {}
    for key, metrics in by_cell.items():
        if len(metrics) > 1:
            raise ConflictingResults(
                f"cell {key[0]}->{key[1]} has metrics {sorted(metrics)}"
            )
        metric, values = next(iter(metrics.items()))
        measured[key] = (sum(values) / len(values), metric)

    # a measured X->smiles generation BLEU fills all internal-target cells
    # of row X uniformly
    row_fill: dict[str, tuple[float, str]] = {}
    for (row, col), (value, metric) in measured.items():
        if col == "smiles" and _is_bleu(metric):
            row_fill[row] = (value, metric)

    matrix = TransitionMatrix()
    for row in MODALITIES:
        for col in MODALITIES:
            key = (row, col)
            if row == col:
                matrix.entries[key] = 1.0
                matrix.provenance[key] = "identity"
            elif row == "property":
                matrix.entries[key] = 0.0
                matrix.provenance[key] = "zero"
            elif row in INTERNAL and col in INTERNAL:
                if row in row_fill:
                    value, metric = row_fill[row]
                    matrix.entries[key] = value
                    matrix.provenance[key] = f"measured({metric})"
                else:
                    matrix.entries[key] = 1.0
                    matrix.provenance[key] = "tool"
            elif col in INTERNAL and row in row_fill:
                value, metric = row_fill[row]
                matrix.entries[key] = value
                matrix.provenance[key] = f"measured({metric})"
            elif key in measured:
                value, metric = measured[key]
                matrix.entries[key] = value
                matrix.provenance[key] = f"measured({metric})"
            else:
                matrix.entries[key] = None
                matrix.provenance[key] = "missing"
    return matrix


def export_matrix(matrix: TransitionMatrix) -> str:
    lines = ["," + ",".join(MODALITIES)]
    for row in MODALITIES:
        cells = []
        for col in MODALITIES:
            value = matrix.entries[(row, col)]
            cells.append("" if value is None else f"{value:.3f}")
        lines.append(row + "," + ",".join(cells))
    return "\n".join(lines) + "\n"


def export_provenance(matrix: TransitionMatrix) -> str:
    lines = ["," + ",".join(MODALITIES)]
    for row in MODALITIES:
        tags = [matrix.provenance[(row, col)] for col in MODALITIES]
        lines.append(row + "," + ",".join(tags))
    return "\n".join(lines) + "\n"


def parse_matrix(text: str) -> TransitionMatrix:
    lines = [line for line in text.strip().splitlines() if line]
    header = lines[0].split(",")[1:]
    if tuple(header) != MODALITIES:
        raise ValueError("unexpected modality header")
    matrix = TransitionMatrix()
    for line in lines[1:]:
        parts = line.split(",")
        row = parts[0]
        if row not in MODALITIES:
            raise UnknownModality(f"unknown row {row!r}")
        for col, cell in zip(MODALITIES, parts[1:]):
            matrix.entries[(row, col)] = float(cell) if cell else None
            matrix.provenance[(row, col)] = ""
    return matrix
