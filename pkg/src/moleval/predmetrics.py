"""Classification, regression, pooling, and retrieval metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field


class DegenerateLabels(ValueError):
    pass


class LengthMismatch(ValueError):
    pass


class EmptySequence(ValueError):
    pass


class DimMismatch(ValueError):
    pass


class MissingId(ValueError):
    pass


@dataclass(frozen=True)
class ScoredLabels:
    labels: tuple[int, ...]
    scores: tuple[float, ...]
    task_id: str = ""

    def __post_init__(self):
        if len(self.labels) != len(self.scores):
            raise LengthMismatch("labels and scores differ in length")
        if not self.labels:
            raise EmptySequence("no labelled scores")
        if any(y not in (0, 1) for y in self.labels):
            raise ValueError("labels must be 0 or 1")


def roc_auc(s: ScoredLabels) -> float:
    """Probability that a random positive outranks a random negative,
    with 0.5 credit for score ties. Computed from average ranks."""
    n_pos = sum(s.labels)
    n_neg = len(s.labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DegenerateLabels(f"need both classes, task {s.task_id!r}")
    order = sorted(range(len(s.scores)), key=lambda i: s.scores[i])
    ranks = [0.0] * len(s.scores)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and s.scores[order[j + 1]] == s.scores[order[i]]:
            j += 1
        mean_rank = (i + j) / 2 + 1  # 1-based average rank of the tie block
        for k in range(i, j + 1):
            ranks[order[k]] = mean_rank
        i = j + 1
    pos_rank_sum = sum(r for r, y in zip(ranks, s.labels) if y == 1)
    return (pos_rank_sum - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg)


def pr_auc(s: ScoredLabels) -> float:
    """Average precision: precision at each positive's rank, walking
    scores in descending order with stable input-order tie breaks."""
    n_pos = sum(s.labels)
    if n_pos == 0:
        raise DegenerateLabels(f"no positive labels, task {s.task_id!r}")
    order = sorted(range(len(s.scores)), key=lambda i: (-s.scores[i], i))
    hits = 0
    acc = 0.0
    for rank, idx in enumerate(order, start=1):
        if s.labels[idx] == 1:
            hits += 1
            acc += hits / rank
    return acc / n_pos


def f1_mean(tasks: list[ScoredLabels], threshold: float = 0.5) -> float:
    if not 0.0 < threshold < 1.0:
        raise ValueError("threshold must lie in (0, 1)")
    if not tasks:
        raise EmptySequence("no tasks")
    total = 0.0
    for task in tasks:
        preds = [1 if score >= threshold else 0 for score in task.scores]
        tp = sum(1 for y, p in zip(task.labels, preds) if y == 1 and p == 1)
        fp = sum(1 for y, p in zip(task.labels, preds) if y == 0 and p == 1)
        fn = sum(1 for y, p in zip(task.labels, preds) if y == 1 and p == 0)
        if tp == 0:
            continue  # no predicted or no true positives scores 0
        precision = tp / (tp + fp)
        recall = tp / (tp + fn)
        total += 2 * precision * recall / (precision + recall)
    return total / len(tasks)


def regression_metrics(pred: list[float], truth: list[float]) -> dict[str, float]:
    if len(pred) != len(truth):
        raise LengthMismatch("prediction and truth lengths differ")
    if not pred:
        raise EmptySequence("no values")
    sq = [(p - t) ** 2 for p, t in zip(pred, truth)]
    ab = [abs(p - t) for p, t in zip(pred, truth)]
    mse = sum(sq) / len(sq)
    return {"mse": mse, "rmse": math.sqrt(mse), "mae": sum(ab) / len(ab)}


def pool(seq: list[list[float]], mode: str) -> list[float]:
    if not seq:
        raise EmptySequence("cannot pool an empty sequence")
    dim = len(seq[0])
    if any(len(v) != dim for v in seq):
        raise DimMismatch("vectors differ in dimension")
    if mode == "avg":
        return [sum(v[k] for v in seq) / len(seq) for k in range(dim)]
    if mode == "max":
        return [max(v[k] for v in seq) for k in range(dim)]
    raise ValueError(f"unknown pooling mode {mode!r}")


@dataclass(frozen=True)
class EmbeddingMatrix:
    ids: tuple[str, ...]
    vectors: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        if len(self.ids) != len(self.vectors):
            raise LengthMismatch("ids and vectors differ in length")
        if len(set(self.ids)) != len(self.ids):
            raise ValueError("ids must be unique")
        if self.vectors:
            dim = len(self.vectors[0])
            if dim < 1:
                raise DimMismatch("dimension must be at least 1")
            if any(len(v) != dim for v in self.vectors):
                raise DimMismatch("rows differ in dimension")

    @property
    def dim(self) -> int:
        return len(self.vectors[0]) if self.vectors else 0

    def row(self, item_id: str) -> tuple[float, ...]:
        try:
            return self.vectors[self.ids.index(item_id)]
        except ValueError:
            raise MissingId(f"id {item_id!r} not present") from None


def _cosine(u, v) -> float:
    nu = math.sqrt(sum(x * x for x in u))
    nv = math.sqrt(sum(x * x for x in v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return sum(a * b for a, b in zip(u, v)) / (nu * nv)


def retrieval_eval(
    queries: EmbeddingMatrix,
    targets: EmbeddingMatrix,
    gold: dict[str, str],
    ks: list[int] = (1, 5, 10),
) -> dict:
    """Cosine-ranked retrieval; rank ties break by target id ascending."""
    if queries.dim != targets.dim:
        raise DimMismatch(f"query dim {queries.dim} vs target dim {targets.dim}")
    if not gold:
        raise EmptySequence("no gold annotations")
    for qid, tid in gold.items():
        if qid not in queries.ids:
            raise MissingId(f"query id {qid!r} not present")
        if tid not in targets.ids:
            raise MissingId(f"target id {tid!r} not present")
    ranks = []
    for qid, tid in sorted(gold.items()):
        qvec = queries.row(qid)
        scored = sorted(
            ((-_cosine(qvec, vec), t) for t, vec in zip(targets.ids, targets.vectors)),
        )
        rank = next(pos for pos, (_, t) in enumerate(scored, start=1) if t == tid)
        ranks.append(rank)
    mrr = sum(1.0 / r for r in ranks) / len(ranks)
    recall_at = {k: sum(1 for r in ranks if r <= k) / len(ranks) for k in ks}
    return {"mrr": mrr, "recall_at": recall_at, "ranks": ranks}
