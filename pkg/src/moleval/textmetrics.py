"""Tokenizers and sequence-similarity metrics for text and chemical strings."""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass

from .molgraph import SmilesError, canonical_smiles, parse_smiles, validity
from .selfies import tokenize_selfies


class LengthMismatch(ValueError):
    pass


class EmptyCorpus(ValueError):
    pass


class EmptyInput(ValueError):
    pass


SCHEMES = ("whitespace", "smiles_regex", "selfies_bracket", "char")

# bracket atoms, two-letter halogens, and %nn ring labels stay whole
_SMILES_TOKEN = re.compile(r"\[[^\]]*\]|Br|Cl|%\d\d|.")


@dataclass(frozen=True)
class TokenSeq:
    tokens: tuple[str, ...]
    scheme: str

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)


def tokenize(text: str, scheme: str) -> TokenSeq:
    if scheme == "whitespace":
        tokens = tuple(text.split())
    elif scheme == "smiles_regex":
        tokens = tuple(_SMILES_TOKEN.findall(text))
    elif scheme == "selfies_bracket":
        tokens = tuple(tokenize_selfies(text))
    elif scheme == "char":
        tokens = tuple(text)
    else:
        raise ValueError(f"unknown tokenizer scheme {scheme!r}")
    return TokenSeq(tokens=tokens, scheme=scheme)


def _ngram_counts(tokens, n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def _check_bleu_inputs(candidates, references, max_n):
    if max_n not in (2, 4):
        raise ValueError("max_n must be 2 or 4")
    if len(candidates) != len(references):
        raise LengthMismatch(
            f"{len(candidates)} candidates vs {len(references)} references"
        )
    if not candidates:
        raise EmptyCorpus("no sentence pairs")


def bleu(candidates: list[TokenSeq], references: list[TokenSeq], max_n: int) -> float:
    """Corpus-level BLEU: geometric mean of clipped n-gram precisions times
    the brevity penalty. A zero precision at any order gives 0."""
    _check_bleu_inputs(candidates, references, max_n)
    matched = [0] * max_n
    total = [0] * max_n
    cand_len = 0
    ref_len = 0
    for cand, ref in zip(candidates, references):
        cand_len += len(cand)
        ref_len += len(ref)
        for n in range(1, max_n + 1):
            counts = _ngram_counts(cand.tokens, n)
            ref_counts = _ngram_counts(ref.tokens, n)
            total[n - 1] += sum(counts.values())
            matched[n - 1] += sum(min(c, ref_counts[g]) for g, c in counts.items())
    # orders with no n-grams anywhere (corpus shorter than n) are skipped so
    # that identical inputs score 1.0 regardless of max_n
    pairs = [(m, t) for m, t in zip(matched, total) if t > 0]
    if cand_len == 0 or not pairs or any(m == 0 for m, _ in pairs):
        return 0.0
    log_sum = sum(math.log(m / t) for m, t in pairs)
    brevity = math.exp(min(0.0, 1.0 - ref_len / cand_len))
    return brevity * math.exp(log_sum / len(pairs))


def bleu_sentence(
    candidates: list[TokenSeq], references: list[TokenSeq], max_n: int
) -> float:
    """Mean per-sentence BLEU; zero precisions are smoothed to 1e-9 so
    short sentences still produce a graded signal."""
    _check_bleu_inputs(candidates, references, max_n)
    eps = 1e-9
    scores = []
    for cand, ref in zip(candidates, references):
        if len(cand) == 0:
            scores.append(0.0)
            continue
        log_sum = 0.0
        for n in range(1, max_n + 1):
            counts = _ngram_counts(cand.tokens, n)
            ref_counts = _ngram_counts(ref.tokens, n)
            total = sum(counts.values())
            hit = sum(min(c, ref_counts[g]) for g, c in counts.items())
            p = hit / total if total else eps
            log_sum += math.log(p if p > 0 else eps)
        brevity = math.exp(min(0.0, 1.0 - len(ref) / len(cand)))
        scores.append(brevity * math.exp(log_sum / max_n))
    return sum(scores) / len(scores)


def rouge(candidate: TokenSeq, reference: TokenSeq, variant: str) -> float:
    if len(candidate) == 0 or len(reference) == 0:
        raise EmptyInput("rouge needs non-empty sequences")
    if variant == "r1":
        return _rouge_n(candidate.tokens, reference.tokens, 1)
    if variant == "r2":
        return _rouge_n(candidate.tokens, reference.tokens, 2)
    if variant == "rl":
        return _rouge_l(candidate.tokens, reference.tokens)
    raise ValueError(f"unknown rouge variant {variant!r}")


def _f1(overlap: float, cand_total: float, ref_total: float) -> float:
    if overlap == 0 or cand_total == 0 or ref_total == 0:
        return 0.0
    p = overlap / cand_total
    r = overlap / ref_total
    return 2 * p * r / (p + r)


def _rouge_n(cand, ref, n: int) -> float:
    c_counts = _ngram_counts(cand, n)
    r_counts = _ngram_counts(ref, n)
    overlap = sum(min(c, r_counts[g]) for g, c in c_counts.items())
    return _f1(overlap, sum(c_counts.values()), sum(r_counts.values()))


def _rouge_l(cand, ref) -> float:
    prev = [0] * (len(ref) + 1)
    for i in range(1, len(cand) + 1):
        row = [0] * (len(ref) + 1)
        for j in range(1, len(ref) + 1):
            if cand[i - 1] == ref[j - 1]:
                row[j] = prev[j - 1] + 1
            else:
                row[j] = max(prev[j], row[j - 1])
        prev = row
    return _f1(prev[-1], len(cand), len(ref))


_SUFFIXES = ("ing", "es", "ed", "ly", "s")  # longest first


def _stem(token: str) -> str:
    for suffix in _SUFFIXES:
        if token.endswith(suffix) and len(token) > len(suffix):
            return token[: -len(suffix)]
    return token


def meteor_lite(candidate: TokenSeq, reference: TokenSeq) -> float:
    """Unigram alignment score: exact matches, then suffix-strip stem
    matches; harmonic mean weighted toward recall, discounted by a
    fragmentation penalty."""
    if len(candidate) == 0 or len(reference) == 0:
        raise EmptyInput("meteor needs non-empty sequences")
    cand = list(candidate.tokens)
    ref = list(reference.tokens)
    pairs: list[tuple[int, int]] = []
    used_ref: set[int] = set()

    def run_stage(key):
        keyed_ref = [key(t) for t in ref]
        for ci, token in enumerate(cand):
            if any(c == ci for c, _ in pairs):
                continue
            want = key(token)
            for ri, have in enumerate(keyed_ref):
                if ri not in used_ref and have == want:
                    pairs.append((ci, ri))
                    used_ref.add(ri)
                    break

    run_stage(lambda t: t)
    run_stage(_stem)
    m = len(pairs)
    if m == 0:
        return 0.0
    precision = m / len(cand)
    recall = m / len(ref)
    fmean = 10 * precision * recall / (recall + 9 * precision)
    pairs.sort()
    chunks = 1
    for (c0, r0), (c1, r1) in zip(pairs, pairs[1:]):
        if c1 != c0 + 1 or r1 != r0 + 1:
            chunks += 1
    penalty = 0.5 * (chunks / m) ** 3
    return fmean * (1 - penalty)


def levenshtein(a: str, b: str) -> int:
    """Edit distance with unit insert/delete/substitute costs."""
    if a == b:
        return 0
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ch_a in enumerate(a, start=1):
        row = [i] + [0] * len(b)
        for j, ch_b in enumerate(b, start=1):
            row[j] = min(
                prev[j] + 1,
                row[j - 1] + 1,
                prev[j - 1] + (ch_a != ch_b),
            )
        prev = row
    return prev[-1]


def exact_match(candidate: str, reference: str) -> bool:
    """True when both strings are valid molecules with equal canonical
    forms; unparseable or invalid input is simply False."""
    try:
        cand = parse_smiles(candidate)
        ref = parse_smiles(reference)
    except SmilesError:
        return False
    if not validity(cand) or not validity(ref):
        return False
    try:
        return canonical_smiles(cand) == canonical_smiles(ref)
    except ValueError:
        return False


def exact_match_raw(candidate: str, reference: str) -> bool:
    return candidate == reference
