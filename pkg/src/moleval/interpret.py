"""Token mapping matrices and localized feature filtering.

The pipeline: count input/output token co-occurrences over inference
records, sort the matrix by row and column totals, flag cells that sit
T standard deviations above their local neighborhood, then judge the
flagged proportion against what a globally normal matrix would produce.
"""

from __future__ import annotations

import math
import warnings
from collections import Counter
from dataclasses import dataclass, field

import numpy as np


class TooFewTokens(ValueError):
    pass


class DegenerateMatrix(ValueError):
    pass


@dataclass
class MappingMatrix:
    counts: np.ndarray
    row_tokens: tuple[str, ...]
    col_tokens: tuple[str, ...]
    degraded: bool = False

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=float)
        n, m = self.counts.shape
        if n != len(self.row_tokens) or m != len(self.col_tokens):
            raise ValueError("token labels do not match matrix shape")
        if n < 2 or m < 2:
            raise TooFewTokens("mapping matrix needs at least 2 tokens per axis")
        if not np.all(np.isfinite(self.counts)) or np.any(self.counts < 0):
            raise ValueError("counts must be finite and non-negative")

    @property
    def row_sums(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def col_sums(self) -> np.ndarray:
        return self.counts.sum(axis=0)


@dataclass(frozen=True)
class FilterStats:
    threshold_T: float
    flags: np.ndarray
    p_actual: float
    p_expected: float
    z: float
    confidence: float
    global_mean: float
    global_std: float
    neighbor_means: np.ndarray
    neighbor_stds: np.ndarray


@dataclass(frozen=True)
class MappingPair:
    input_token: str
    output_token: str
    value: float
    group_key: str | None


@dataclass(frozen=True)
class SweepRow:
    threshold_T: float
    flag_count: int
    unique_pair_count: int
    z: float
    confidence: float


def _token_iter(seq):
    tokens = getattr(seq, "tokens", seq)
    return list(tokens)


def build_mapping_matrix(
    pairs,
    top_k: int = 20,
    stoplist: frozenset[str] = frozenset(),
    count_mode: str = "presence",
) -> MappingMatrix:
    """Select the top_k most frequent tokens per axis (document frequency)
    and count co-occurrences. presence mode adds 1 per record containing
    both tokens; occurrence mode multiplies the two occurrence counts."""
    if not pairs:
        raise ValueError("no record pairs")
    if top_k < 2:
        raise ValueError("top_k must be at least 2")
    if count_mode not in ("presence", "occurrence"):
        raise ValueError(f"unknown count mode {count_mode!r}")

    records = []
    row_freq: Counter = Counter()
    col_freq: Counter = Counter()
    for seq_in, seq_out in pairs:
        tokens_in = Counter(t for t in _token_iter(seq_in) if t not in stoplist)
        tokens_out = Counter(t for t in _token_iter(seq_out) if t not in stoplist)
        records.append((tokens_in, tokens_out))
        row_freq.update(tokens_in.keys())
        col_freq.update(tokens_out.keys())

    degraded = False
    selected = []
    for freq, axis in ((row_freq, "input"), (col_freq, "output")):
        if len(freq) < 2:
            raise TooFewTokens(f"fewer than 2 distinct {axis} tokens after filtering")
        if len(freq) < top_k:
            warnings.warn(
                f"only {len(freq)} distinct {axis} tokens available for top_k={top_k}",
                stacklevel=2,
            )
            degraded = True
        ranked = sorted(freq.items(), key=lambda kv: (-kv[1], kv[0]))
        selected.append(tuple(token for token, _ in ranked[:top_k]))
    row_tokens, col_tokens = selected

    row_index = {t: i for i, t in enumerate(row_tokens)}
    col_index = {t: j for j, t in enumerate(col_tokens)}
    counts = np.zeros((len(row_tokens), len(col_tokens)))
    for tokens_in, tokens_out in records:
        for token_in, c_in in tokens_in.items():
            i = row_index.get(token_in)
            if i is None:
                continue
            for token_out, c_out in tokens_out.items():
                j = col_index.get(token_out)
                if j is None:
                    continue
                counts[i, j] += 1 if count_mode == "presence" else c_in * c_out
    return MappingMatrix(counts, row_tokens, col_tokens, degraded=degraded)


def sort_matrix(matrix: MappingMatrix) -> MappingMatrix:
    """Descending row/column totals; equal totals fall back to token order."""
    row_sums = matrix.row_sums
    col_sums = matrix.col_sums
    row_order = sorted(
        range(len(matrix.row_tokens)),
        key=lambda i: (-row_sums[i], matrix.row_tokens[i]),
    )
    col_order = sorted(
        range(len(matrix.col_tokens)),
        key=lambda j: (-col_sums[j], matrix.col_tokens[j]),
    )
    counts = matrix.counts[np.ix_(row_order, col_order)]
    return MappingMatrix(
        counts,
        tuple(matrix.row_tokens[i] for i in row_order),
        tuple(matrix.col_tokens[j] for j in col_order),
        degraded=matrix.degraded,
    )


def neighborhood_stats(counts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Mean and population standard deviation over the radius-1 Moore
    neighborhood of each cell, center excluded, truncated at borders."""
    a = np.asarray(counts, dtype=float)
    n, m = a.shape
    padded = np.zeros((n + 2, m + 2))
    padded[1:-1, 1:-1] = a
    mask = np.zeros((n + 2, m + 2))
    mask[1:-1, 1:-1] = 1.0
    total = np.zeros((n, m))
    total_sq = np.zeros((n, m))
    count = np.zeros((n, m))
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            window = padded[1 + di : n + 1 + di, 1 + dj : m + 1 + dj]
            total += window
            total_sq += window * window
            count += mask[1 + di : n + 1 + di, 1 + dj : m + 1 + dj]
    means = total / count
    variances = np.maximum(total_sq / count - means * means, 0.0)
    return means, np.sqrt(variances)


def normal_cdf(x: float) -> float:
    # Phi(x) = erfc(-x / sqrt(2)) / 2; the C library erfc keeps absolute
    # error near machine epsilon, far inside the 1e-7 budget
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def _filter_arrays(counts: np.ndarray, T: float):
    means, stds = neighborhood_stats(counts)
    flags = counts > means + T * stds
    return flags, means, stds


def _expected_proportion(
    counts: np.ndarray, means: np.ndarray, stds: np.ndarray, T: float
) -> tuple[float, float, float]:
    mu = float(counts.mean())
    sigma = float(counts.std())
    if sigma == 0.0:
        raise DegenerateMatrix("matrix has zero variance")
    cutoffs = (means + T * stds - mu) / sigma
    expected = 1.0 - np.vectorize(normal_cdf)(cutoffs)
    return float(expected.mean()), mu, sigma


def _z_score(p_actual: float, p_expected: float, cells: int) -> float:
    spread = p_expected * (1.0 - p_expected) / cells
    if spread <= 0.0:
        if p_actual == p_expected:
            return 0.0
        return math.inf if p_actual > p_expected else -math.inf
    return (p_actual - p_expected) / math.sqrt(spread)


def local_filter(matrix: MappingMatrix, T: float) -> FilterStats:
    """Flag cells above their neighborhood by T local deviations, then
    compare the flagged share with the globally-normal expectation."""
    if T < 0:
        raise ValueError("T must be non-negative")
    ordered = sort_matrix(matrix)
    counts = ordered.counts
    flags, means, stds = _filter_arrays(counts, T)
    cells = counts.size
    p_actual = float(flags.sum()) / cells
    p_expected, mu, sigma = _expected_proportion(counts, means, stds, T)
    z = _z_score(p_actual, p_expected, cells)
    return FilterStats(
        threshold_T=float(T),
        flags=flags,
        p_actual=p_actual,
        p_expected=p_expected,
        z=z,
        confidence=normal_cdf(z) if math.isfinite(z) else (1.0 if z > 0 else 0.0),
        global_mean=mu,
        global_std=sigma,
        neighbor_means=means,
        neighbor_stds=stds,
    )


def sweep_threshold(matrix: MappingMatrix, t_grid: list[float]) -> list[SweepRow]:
    """One filter run per threshold. A zero-variance matrix still reports
    flag counts, with the z statistics marked NaN."""
    if not t_grid:
        raise ValueError("empty threshold grid")
    if any(b <= a for a, b in zip(t_grid, t_grid[1:])):
        raise ValueError("threshold grid must be strictly increasing")
    ordered = sort_matrix(matrix)
    counts = ordered.counts
    cells = counts.size
    rows = []
    for T in t_grid:
        flags, means, stds = _filter_arrays(counts, T)
        flag_count = int(flags.sum())
        unique = _unique_pair_count(ordered, flags)
        try:
            p_expected, _, _ = _expected_proportion(counts, means, stds, T)
        except DegenerateMatrix:
            rows.append(SweepRow(float(T), flag_count, unique, math.nan, math.nan))
            continue
        z = _z_score(flag_count / cells, p_expected, cells)
        confidence = normal_cdf(z) if math.isfinite(z) else (1.0 if z > 0 else 0.0)
        rows.append(SweepRow(float(T), flag_count, unique, z, confidence))
    return rows


def _unique_pair_count(matrix: MappingMatrix, flags: np.ndarray) -> int:
    count = 0
    for i, j in zip(*np.nonzero(flags)):
        if matrix.row_tokens[i] != matrix.col_tokens[j]:
            count += 1
    return count


def select_pairs(matrix: MappingMatrix, stats: FilterStats) -> list[MappingPair]:
    """Flagged cells as pairs, identical-name pairs dropped, grouped by
    shared input or output tokens."""
    ordered = sort_matrix(matrix)
    if stats.flags.shape != ordered.counts.shape:
        raise ValueError("stats were not produced from this matrix")
    raw = []
    for i, j in zip(*np.nonzero(stats.flags)):
        token_in = ordered.row_tokens[i]
        token_out = ordered.col_tokens[j]
        if token_in == token_out:
            continue
        raw.append((token_in, token_out, float(ordered.counts[i, j])))

    parent = list(range(len(raw)))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x: int, y: int):
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[ry] = rx

    by_input: dict[str, int] = {}
    by_output: dict[str, int] = {}
    for idx, (token_in, token_out, _) in enumerate(raw):
        if token_in in by_input:
            union(by_input[token_in], idx)
        else:
            by_input[token_in] = idx
        if token_out in by_output:
            union(by_output[token_out], idx)
        else:
            by_output[token_out] = idx

    members: dict[int, list[int]] = {}
    for idx in range(len(raw)):
        members.setdefault(find(idx), []).append(idx)

    keys: dict[int, str | None] = {}
    for root, idxs in members.items():
        if len(idxs) == 1:
            keys[root] = None
            continue
        shared: Counter = Counter()
        for idx in idxs:
            shared[raw[idx][0]] += 1
            shared[raw[idx][1]] += 1
        candidates = sorted(t for t, c in shared.items() if c >= 2)
        keys[root] = candidates[0] if candidates else None

    pairs = [
        MappingPair(token_in, token_out, value, keys[find(idx)])
        for idx, (token_in, token_out, value) in enumerate(raw)
    ]
    pairs.sort(key=lambda p: (-p.value, p.input_token, p.output_token))
    return pairs
