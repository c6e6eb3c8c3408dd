"""Evaluation over record files: generation, retrieval, property prediction."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from ..fingerprint import morgan_fp, path_fp, tanimoto
from ..molgraph import SmilesError, parse_smiles, validity
from ..predmetrics import (
    DegenerateLabels,
    ScoredLabels,
    f1_mean,
    pr_auc,
    regression_metrics,
    retrieval_eval,
    roc_auc,
)
from ..textmetrics import (
    bleu,
    bleu_sentence,
    exact_match,
    exact_match_raw,
    levenshtein,
    meteor_lite,
    rouge,
    tokenize,
)
from .records import read_embeddings, read_gen_records, read_gold, read_property_rows
from .reports import provenance_for

METRIC_NAMES = frozenset(
    {
        "bleu-2", "bleu-4", "rouge-1", "rouge-2", "rouge-l", "meteor",
        "exact-match", "exact-match-raw", "levenshtein", "validity",
        "rdk-fts", "morgan-fts", "mrr", "r@1", "r@5", "r@10",
        "roc-auc", "pr-auc", "f1", "mse", "rmse", "mae",
    }
)


@dataclass
class Report:
    task: str
    metrics: dict[str, float]
    counts: dict[str, int]
    provenance: dict
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        unknown = set(self.metrics) - METRIC_NAMES
        if unknown:
            raise ValueError(f"metric names outside the vocabulary: {sorted(unknown)}")

    def payload(self) -> dict:
        body = {
            "task": self.task,
            "metrics": self.metrics,
            "counts": self.counts,
            "provenance": self.provenance,
        }
        if self.details:
            body["details"] = self.details
        return body


def _mean(values) -> float:
    values = list(values)
    return sum(values) / len(values)


def _molecule_record(pred: str, ref: str) -> dict:
    try:
        pred_graph = parse_smiles(pred)
        pred_ok = True
    except SmilesError:
        pred_graph = None
        pred_ok = False
    try:
        ref_graph = parse_smiles(ref)
    except SmilesError:
        ref_graph = None
    rdk = morgan = 0.0
    if pred_graph is not None and ref_graph is not None:
        rdk = tanimoto(path_fp(pred_graph), path_fp(ref_graph))
        morgan = tanimoto(morgan_fp(pred_graph), morgan_fp(ref_graph))
    return {
        "valid": 1.0 if pred_ok and validity(pred_graph) else 0.0,
        "parseable": pred_ok,
        "exact": 1.0 if exact_match(pred, ref) else 0.0,
        "exact_raw": 1.0 if exact_match_raw(pred, ref) else 0.0,
        "lev": float(levenshtein(pred, ref)),
        "rdk": rdk,
        "morgan": morgan,
    }


def _text_record(cand_tokens, ref_tokens) -> dict:
    if len(cand_tokens) == 0 or len(ref_tokens) == 0:
        return {"rouge-1": 0.0, "rouge-2": 0.0, "rouge-l": 0.0, "meteor": 0.0}
    return {
        "rouge-1": rouge(cand_tokens, ref_tokens, "r1"),
        "rouge-2": rouge(cand_tokens, ref_tokens, "r2"),
        "rouge-l": rouge(cand_tokens, ref_tokens, "rl"),
        "meteor": meteor_lite(cand_tokens, ref_tokens),
    }


def _map_records(fn, items, threads: int):
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def eval_generation(records_path, target_kind: str, threads: int = 1) -> Report:
    """Metric bundle over a generation record file. Metrics compare each
    prediction with the record's first reference; invalid or unparseable
    predictions score zero where chemistry is needed but stay counted."""
    if target_kind not in ("molecule", "text"):
        raise ValueError(f"unknown target kind {target_kind!r}")
    records = read_gen_records(records_path)
    preds = [r.prediction for r in records]
    refs = [r.references[0] for r in records]
    scheme = "smiles_regex" if target_kind == "molecule" else "whitespace"
    cand_seqs = [tokenize(p, scheme) for p in preds]
    ref_seqs = [tokenize(r, scheme) for r in refs]

    metrics = {
        "bleu-2": bleu(cand_seqs, ref_seqs, 2),
        "bleu-4": bleu(cand_seqs, ref_seqs, 4),
    }
    details: dict = {
        "sentence_level": {
            "bleu-2": bleu_sentence(cand_seqs, ref_seqs, 2),
            "bleu-4": bleu_sentence(cand_seqs, ref_seqs, 4),
        }
    }
    if target_kind == "molecule":
        rows = _map_records(lambda pr: _molecule_record(*pr), list(zip(preds, refs)), threads)
        metrics["exact-match"] = _mean(r["exact"] for r in rows)
        metrics["exact-match-raw"] = _mean(r["exact_raw"] for r in rows)
        metrics["levenshtein"] = _mean(r["lev"] for r in rows)
        metrics["validity"] = _mean(r["valid"] for r in rows)
        metrics["rdk-fts"] = _mean(r["rdk"] for r in rows)
        metrics["morgan-fts"] = _mean(r["morgan"] for r in rows)
        details["unparseable_predictions"] = sum(1 for r in rows if not r["parseable"])
    else:
        rows = _map_records(
            lambda pr: _text_record(*pr), list(zip(cand_seqs, ref_seqs)), threads
        )
        for name in ("rouge-1", "rouge-2", "rouge-l", "meteor"):
            metrics[name] = _mean(r[name] for r in rows)

    return Report(
        task=f"eval-gen-{target_kind}",
        metrics=metrics,
        counts={"evaluated": len(records), "skipped": 0},
        provenance=provenance_for([records_path]),
        details=details,
    )


def eval_retrieval(queries_path, targets_path, gold_path) -> Report:
    queries = read_embeddings(queries_path)
    targets = read_embeddings(targets_path)
    gold = read_gold(gold_path)
    result = retrieval_eval(queries, targets, gold, ks=(1, 5, 10))
    metrics = {
        "mrr": result["mrr"],
        "r@1": result["recall_at"][1],
        "r@5": result["recall_at"][5],
        "r@10": result["recall_at"][10],
    }
    return Report(
        task="eval-retrieval",
        metrics=metrics,
        counts={"evaluated": len(gold), "skipped": 0},
        provenance=provenance_for([queries_path, targets_path, gold_path]),
        details={"ranks": list(result["ranks"])},
    )


def eval_property(records_path) -> Report:
    kind, tasks = read_property_rows(records_path)
    skip_reasons: dict[str, int] = {}
    if kind == "classification":
        scored = {
            task: ScoredLabels(tuple(data["labels"]), tuple(data["scores"]), task)
            for task, data in sorted(tasks.items())
        }
        roc_values = []
        pr_values = []
        for task, labels in scored.items():
            try:
                roc_values.append(roc_auc(labels))
            except DegenerateLabels:
                skip_reasons["degenerate-roc-auc"] = skip_reasons.get("degenerate-roc-auc", 0) + 1
            try:
                pr_values.append(pr_auc(labels))
            except DegenerateLabels:
                skip_reasons["degenerate-pr-auc"] = skip_reasons.get("degenerate-pr-auc", 0) + 1
        metrics = {"f1": f1_mean(list(scored.values()))}
        if roc_values:
            metrics["roc-auc"] = _mean(roc_values)
        if pr_values:
            metrics["pr-auc"] = _mean(pr_values)
    else:
        per_task = [
            regression_metrics(data["preds"], data["truths"])
            for _, data in sorted(tasks.items())
        ]
        metrics = {
            "mse": _mean(m["mse"] for m in per_task),
            "rmse": _mean(m["rmse"] for m in per_task),
            "mae": _mean(m["mae"] for m in per_task),
        }
    skipped = sum(skip_reasons.values())
    details = {"kind": kind}
    if skip_reasons:
        details["skip_reasons"] = skip_reasons
    return Report(
        task="eval-property",
        metrics=metrics,
        counts={"evaluated": len(tasks), "skipped": skipped},
        provenance=provenance_for([records_path]),
        details=details,
    )


def merge_reports(payloads: list[dict], provenance: dict) -> dict:
    """Mean and population std per metric over repeated runs of one task."""
    if len(payloads) < 2:
        raise ValueError("repeat merge needs at least two reports")
    tasks = {p.get("task") for p in payloads}
    if len(tasks) != 1:
        raise ValueError(f"reports describe different tasks: {sorted(map(str, tasks))}")
    names = set(payloads[0].get("metrics", {}))
    for p in payloads[1:]:
        if set(p.get("metrics", {})) != names:
            raise ValueError("reports carry different metric sets")
    merged = {}
    for name in sorted(names):
        values = [float(p["metrics"][name]) for p in payloads]
        mean = _mean(values)
        var = _mean((v - mean) ** 2 for v in values)
        merged[name] = {"mean": mean, "std": math.sqrt(var)}
    return {
        "task": tasks.pop(),
        "metrics": merged,
        "counts": {"runs": len(payloads)},
        "provenance": provenance,
    }
