"""Dataset profiling: length statistics, scaffolds, descriptors, splits."""

from __future__ import annotations

from collections import Counter

from ..molgraph import (
    SmilesError,
    canonical_smiles,
    descriptors,
    murcko_scaffold,
    parse_smiles,
    summarize_descriptors,
    validity,
)
from ..selfies import NotEncodable, encode_selfies
from ..textmetrics import SCHEMES, tokenize
from .records import read_profile_rows
from .reports import provenance_for

_HIST_BUCKET = 10

# proportions a train/validation/test column is checked against
_SPLIT_TARGET = (0.8, 0.1, 0.1)
_SPLIT_TOLERANCE = 0.02


def _histogram(lengths) -> list[list[int]]:
    buckets: Counter = Counter()
    for length in lengths:
        buckets[(length // _HIST_BUCKET) * _HIST_BUCKET] += 1
    return [[low, buckets[low]] for low in sorted(buckets)]


def _modality_lengths(rows, key: str) -> dict | None:
    texts = [row[key] for row in rows if key in row]
    if not texts:
        return None
    block = {"records": len(texts), "chars": _histogram(len(t) for t in texts)}
    tokens = {}
    for scheme in SCHEMES:
        counts = []
        failed = 0
        for text in texts:
            # a strict scheme can refuse text from another notation;
            # such texts are skipped for that scheme and tallied
            try:
                counts.append(len(tokenize(text, scheme)))
            except ValueError:
                failed += 1
        entry: dict = {"hist": _histogram(counts)}
        if failed:
            entry["untokenizable"] = failed
        tokens[scheme] = entry
    block["tokens"] = tokens
    return block


def _split_check(rows) -> dict | None:
    labels = [row["split"] for row in rows if "split" in row]
    if not labels:
        return None
    counts = Counter(labels)
    total = len(labels)
    proportions = {label: counts[label] / total for label in sorted(counts)}
    ordered = sorted(proportions.values(), reverse=True)
    passes = len(ordered) == len(_SPLIT_TARGET) and all(
        abs(p - t) <= _SPLIT_TOLERANCE for p, t in zip(ordered, _SPLIT_TARGET)
    )
    return {"proportions": proportions, "passes": passes}


def profile_dataset(records_path) -> dict:
    rows = read_profile_rows(records_path)
    unparseable: list[str] = []
    invalid: list[str] = []
    unencodable: list[str] = []
    graphs = []
    for row in rows:
        try:
            graph = parse_smiles(row["smiles"])
        except SmilesError:
            unparseable.append(row["id"])
            continue
        if not validity(graph):
            invalid.append(row["id"])
            continue
        graphs.append(graph)
        try:
            encode_selfies(graph)
        except NotEncodable:
            unencodable.append(row["id"])

    lengths = {}
    for key in ("smiles", "selfies", "iupac", "caption"):
        block = _modality_lengths(rows, key)
        if block is not None:
            lengths[key] = block

    scaffold_counts: Counter = Counter()
    for graph in graphs:
        scaffold = murcko_scaffold(graph)
        scaffold_counts[canonical_smiles(scaffold) if scaffold.atoms else ""] += 1
    top_scaffolds = [
        {"scaffold": s, "count": c}
        for s, c in sorted(scaffold_counts.items(), key=lambda kv: (-kv[1], kv[0]))[:10]
    ]

    described = [descriptors(g) for g in graphs]
    descriptor_summary = {
        key: summarize_descriptors([d[key] for d in described])
        for key in ("mol_weight", "heavy_atoms", "rings", "aromatic_rings")
    }

    payload = {
        "task": "profile",
        "counts": {
            "records": len(rows),
            "profiled": len(graphs),
            "excluded": len(rows) - len(graphs),
        },
        "lengths": lengths,
        "scaffolds": top_scaffolds,
        "descriptors": descriptor_summary,
        "exclusions": {
            "unparseable_smiles": sorted(unparseable),
            "invalid_smiles": sorted(invalid),
            "selfies_unencodable": sorted(unencodable),
        },
        "provenance": provenance_for([records_path]),
    }
    split = _split_check(rows)
    if split is not None:
        payload["split_check"] = split
    return payload
