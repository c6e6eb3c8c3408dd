"""Command line interface.

Exit codes: 0 success, 1 usage error, 2 data error (malformed or
impossible input files), 3 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .. import interpret
from ..molgraph import (
    SmilesError,
    canonical_smiles,
    descriptors,
    parse_smiles,
    validity,
)
from ..selfies import decode_selfies, encode_selfies
from ..transition import MODALITIES, build_matrix, export_matrix, export_provenance
from .evaluate import eval_generation, eval_property, eval_retrieval, merge_reports
from .profile import profile_dataset
from .records import DEFAULT_STOPLIST, read_pairs, read_results, read_stoplist
from .reports import provenance_for, render, resolve_out


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _read_config(path) -> dict[str, str]:
    config = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise UsageError(f"{path}: line {lineno} is not key=value")
        key, value = body.split("=", 1)
        config[key.strip().replace("-", "_")] = value.strip()
    return config


def _setting(args, config, key: str, fallback, cast=str):
    """Flag value when given, else config value, else the fallback."""
    value = getattr(args, key, None)
    if value is not None:
        return value
    if key in config:
        try:
            return cast(config[key])
        except ValueError:
            raise UsageError(f"config key {key} has invalid value {config[key]!r}") from None
    return fallback


def _emit(payload: dict, out: str | None):
    fmt, path = resolve_out(out)
    text = render(payload, fmt)
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _write_or_print(text: str, path: str | None):
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _input_strings(args) -> list[str]:
    items = list(args.items)
    if getattr(args, "infile", None):
        for line in Path(args.infile).read_text(encoding="utf-8").splitlines():
            if line.strip():
                items.append(line.strip())
    if not items:
        raise UsageError("no input strings given (positional arguments or --in)")
    return items


def _cmd_parse(args, config):
    molecules = []
    valid_count = 0
    for text in _input_strings(args):
        entry: dict = {"smiles": text}
        try:
            graph = parse_smiles(text)
        except SmilesError as exc:
            entry.update({"parsed": False, "valid": False, "error": str(exc)})
            molecules.append(entry)
            continue
        entry["parsed"] = True
        entry["valid"] = validity(graph)
        if entry["valid"]:
            valid_count += 1
            entry["canonical"] = canonical_smiles(graph)
            entry.update(descriptors(graph))
        molecules.append(entry)
    payload = {
        "task": "parse",
        "molecules": molecules,
        "counts": {"given": len(molecules), "valid": valid_count},
    }
    _emit(payload, _setting(args, config, "out", None))


def _cmd_convert(args, config):
    if args.source == args.target:
        raise UsageError("--from and --to must differ")
    results = []
    for index, text in enumerate(_input_strings(args), 1):
        try:
            if args.source == "smiles":
                converted = encode_selfies(parse_smiles(text)).text()
            else:
                converted = canonical_smiles(decode_selfies(text))
        except ValueError as exc:
            raise ValueError(f"input {index}: {exc}") from None
        results.append({"input": text, "output": converted})
    out = _setting(args, config, "out", None)
    fmt, path = resolve_out(out)
    if out is None or (path is not None and Path(path).suffix.lstrip(".").lower() not in ("json", "md", "csv")):
        _write_or_print("".join(r["output"] + "\n" for r in results), path)
        return
    _emit({"task": "convert", "results": results, "counts": {"converted": len(results)}}, out)


def _cmd_profile(args, config):
    payload = profile_dataset(args.records)
    _emit(payload, _setting(args, config, "out", None))


def _merge_paths(args):
    return getattr(args, "repeat_merge", None)


def _cmd_eval_gen(args, config):
    merge = _merge_paths(args)
    if merge:
        payloads = [json.loads(Path(p).read_text(encoding="utf-8")) for p in merge]
        payload = merge_reports(payloads, provenance_for(merge))
    elif args.records is None:
        raise UsageError("eval gen needs --records (or --repeat-merge)")
    else:
        target_kind = _setting(args, config, "target_kind", None)
        if target_kind is None:
            raise UsageError("eval gen needs --target-kind molecule|text")
        threads = _setting(args, config, "threads", 1, int)
        report = eval_generation(args.records, target_kind, threads=threads)
        payload = report.payload()
        _attach_seed(payload, args, config)
    _emit(payload, _setting(args, config, "out", None))


def _cmd_eval_retrieval(args, config):
    merge = _merge_paths(args)
    if merge:
        payloads = [json.loads(Path(p).read_text(encoding="utf-8")) for p in merge]
        payload = merge_reports(payloads, provenance_for(merge))
    elif not (args.queries and args.targets and args.gold):
        raise UsageError("eval retrieval needs --queries, --targets and --gold")
    else:
        report = eval_retrieval(args.queries, args.targets, args.gold)
        payload = report.payload()
        _attach_seed(payload, args, config)
    _emit(payload, _setting(args, config, "out", None))


def _cmd_eval_property(args, config):
    merge = _merge_paths(args)
    if merge:
        payloads = [json.loads(Path(p).read_text(encoding="utf-8")) for p in merge]
        payload = merge_reports(payloads, provenance_for(merge))
    elif args.records is None:
        raise UsageError("eval property needs --records (or --repeat-merge)")
    else:
        report = eval_property(args.records)
        payload = report.payload()
        _attach_seed(payload, args, config)
    _emit(payload, _setting(args, config, "out", None))


def _attach_seed(payload: dict, args, config):
    seed = _setting(args, config, "seed", None, int)
    if seed is not None:
        payload.setdefault("provenance", {})["seed"] = seed


def _cmd_transition_build(args, config):
    results = read_results(args.results)
    matrix = build_matrix(results)
    if args.provenance:
        Path(args.provenance).write_text(export_provenance(matrix), encoding="utf-8")
    out = _setting(args, config, "out", None)
    fmt, path = resolve_out(out)
    if fmt == "csv":
        _write_or_print(export_matrix(matrix), path)
        return
    cells = {}
    for row in MODALITIES:
        cells[row] = {
            col: {
                "value": matrix.entries[(row, col)],
                "source": matrix.provenance[(row, col)],
            }
            for col in MODALITIES
        }
    payload = {
        "task": "transition-build",
        "modalities": list(MODALITIES),
        "cells": cells,
        "provenance": provenance_for([args.results]),
    }
    _emit(payload, out)


def _load_mapping_matrix(args, config) -> interpret.MappingMatrix:
    if getattr(args, "matrix", None):
        data = json.loads(Path(args.matrix).read_text(encoding="utf-8"))
        try:
            return interpret.MappingMatrix(
                np.array(data["counts"], dtype=float),
                tuple(data["row_tokens"]),
                tuple(data["col_tokens"]),
                degraded=bool(data.get("degraded", False)),
            )
        except (KeyError, TypeError) as exc:
            raise ValueError(f"{args.matrix}: not a saved mapping matrix ({exc})") from None
    if not getattr(args, "pairs", None):
        raise UsageError("tokenmap needs --pairs or --matrix")
    scheme = _setting(args, config, "scheme", "whitespace")
    pairs = read_pairs(args.pairs, scheme)
    if args.stoplist is not None:
        stoplist = read_stoplist(args.stoplist)
    else:
        stoplist = DEFAULT_STOPLIST
    top_k = _setting(args, config, "top_k", 20, int)
    count_mode = _setting(args, config, "count_mode", "presence")
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        matrix = interpret.build_mapping_matrix(
            pairs, top_k=top_k, stoplist=stoplist, count_mode=count_mode
        )
    return matrix


def _matrix_sources(args) -> list[str]:
    sources = []
    if getattr(args, "pairs", None):
        sources.append(args.pairs)
    if getattr(args, "matrix", None):
        sources.append(args.matrix)
    if getattr(args, "stoplist", None):
        sources.append(args.stoplist)
    return sources


def _cmd_tokenmap_build(args, config):
    matrix = interpret.sort_matrix(_load_mapping_matrix(args, config))
    out = _setting(args, config, "out", None)
    fmt, path = resolve_out(out)
    if fmt == "csv":
        import csv
        import io

        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow([""] + list(matrix.col_tokens))
        for token, row in zip(matrix.row_tokens, matrix.counts):
            writer.writerow([token] + [f"{v:g}" for v in row])
        _write_or_print(buffer.getvalue(), path)
        return
    peak = float(matrix.counts.max())
    normalized = matrix.counts / peak if peak > 0 else matrix.counts
    payload = {
        "task": "tokenmap-build",
        "row_tokens": list(matrix.row_tokens),
        "col_tokens": list(matrix.col_tokens),
        "counts": matrix.counts.tolist(),
        # display form only; the filter always consumes raw counts
        "normalized": normalized.tolist(),
        "degraded": matrix.degraded,
        "provenance": provenance_for(_matrix_sources(args)),
    }
    _emit(payload, out)


def _parse_grid(text: str) -> list[float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"grid must be start:stop:step, got {text!r}")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError:
        raise UsageError(f"grid values must be numbers, got {text!r}") from None
    if step <= 0 or stop < start:
        raise UsageError("grid needs step > 0 and stop >= start")
    values = []
    k = 0
    while True:
        value = start + k * step
        if value > stop + 1e-9:
            break
        values.append(round(value, 10))
        k += 1
    return values


def _cmd_tokenmap_sweep(args, config):
    matrix = _load_mapping_matrix(args, config)
    grid = _parse_grid(_setting(args, config, "grid", "0:5:0.25"))
    rows = interpret.sweep_threshold(matrix, grid)
    payload = {
        "task": "tokenmap-sweep",
        "rows": [
            {
                "T": r.threshold_T,
                "flag_count": r.flag_count,
                "unique_pair_count": r.unique_pair_count,
                "z": r.z,
                "confidence": r.confidence,
            }
            for r in rows
        ],
        "provenance": provenance_for(_matrix_sources(args)),
    }
    _emit(payload, _setting(args, config, "out", None))


def _cmd_tokenmap_select(args, config):
    matrix = _load_mapping_matrix(args, config)
    threshold = _setting(args, config, "t", None, float)
    if threshold is None:
        raise UsageError("tokenmap select needs --T")
    stats = interpret.local_filter(matrix, threshold)
    pairs = interpret.select_pairs(matrix, stats)
    groups: dict = {}
    order = []
    for pair in pairs:
        key = pair.group_key
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(
            {
                "input_token": pair.input_token,
                "output_token": pair.output_token,
                "value": pair.value,
            }
        )
    payload = {
        "task": "tokenmap-select",
        "threshold_T": stats.threshold_T,
        "z": stats.z,
        "confidence": stats.confidence,
        "p_actual": stats.p_actual,
        "p_expected": stats.p_expected,
        "pairs": [
            {
                "input_token": p.input_token,
                "output_token": p.output_token,
                "value": p.value,
                "group_key": p.group_key,
            }
            for p in pairs
        ],
        "groups": [
            {"group_key": key, "members": groups[key]} for key in order
        ],
        "provenance": provenance_for(_matrix_sources(args)),
    }
    _emit(payload, _setting(args, config, "out", None))


def _add_common(parser):
    parser.add_argument("--out", default=None, help="json|md|csv for stdout, or an output path")
    parser.add_argument("--threads", type=int, default=None)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--config", default=None, help="flat key=value defaults, overridden by flags")


def _add_tokenmap_source(parser):
    parser.add_argument("--pairs", default=None, help="JSONL of {input, output} token records")
    parser.add_argument("--matrix", default=None, help="saved tokenmap-build JSON")
    parser.add_argument("--scheme", default=None, choices=("whitespace", "smiles_regex", "selfies_bracket", "char"))
    parser.add_argument("--top-k", dest="top_k", type=int, default=None)
    parser.add_argument("--stoplist", default=None, help="file of tokens to drop, one per line")
    parser.add_argument("--count-mode", dest="count_mode", default=None, choices=("presence", "occurrence"))


def build_parser() -> _Parser:
    parser = _Parser(prog="moleval", description="molecular language model evaluation toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse and describe molecules")
    p.add_argument("items", nargs="*", metavar="SMILES")
    p.add_argument("--in", dest="infile", default=None)
    _add_common(p)
    p.set_defaults(handler=_cmd_parse)

    p = sub.add_parser("convert", help="convert between line notations")
    p.add_argument("items", nargs="*", metavar="STRING")
    p.add_argument("--in", dest="infile", default=None)
    p.add_argument("--from", dest="source", required=True, choices=("smiles", "selfies"))
    p.add_argument("--to", dest="target", required=True, choices=("smiles", "selfies"))
    _add_common(p)
    p.set_defaults(handler=_cmd_convert)

    p = sub.add_parser("profile", help="profile a dataset file")
    p.add_argument("--records", required=True)
    _add_common(p)
    p.set_defaults(handler=_cmd_profile)

    ev = sub.add_parser("eval", help="evaluate model outputs")
    ev_sub = ev.add_subparsers(dest="eval_command", required=True)

    p = ev_sub.add_parser("gen", help="generation records")
    p.add_argument("--records", default=None)
    p.add_argument("--target-kind", dest="target_kind", default=None, choices=("molecule", "text"))
    p.add_argument("--repeat-merge", dest="repeat_merge", nargs="+", default=None,
                   help="merge previously produced JSON reports (mean and std)")
    _add_common(p)
    p.set_defaults(handler=_cmd_eval_gen)

    p = ev_sub.add_parser("retrieval", help="embedding retrieval")
    p.add_argument("--queries", default=None)
    p.add_argument("--targets", default=None)
    p.add_argument("--gold", default=None)
    p.add_argument("--repeat-merge", dest="repeat_merge", nargs="+", default=None)
    _add_common(p)
    p.set_defaults(handler=_cmd_eval_retrieval)

    p = ev_sub.add_parser("property", help="property prediction records")
    p.add_argument("--records", default=None)
    p.add_argument("--repeat-merge", dest="repeat_merge", nargs="+", default=None)
    _add_common(p)
    p.set_defaults(handler=_cmd_eval_property)

    tr = sub.add_parser("transition", help="modal transition matrix")
    tr_sub = tr.add_subparsers(dest="transition_command", required=True)
    p = tr_sub.add_parser("build", help="build the matrix from task results")
    p.add_argument("--results", required=True)
    p.add_argument("--provenance", default=None, help="also write the cell source table here")
    _add_common(p)
    p.set_defaults(handler=_cmd_transition_build)

    tm = sub.add_parser("tokenmap", help="token mapping analysis")
    tm_sub = tm.add_subparsers(dest="tokenmap_command", required=True)

    p = tm_sub.add_parser("build", help="build and sort the mapping matrix")
    _add_tokenmap_source(p)
    _add_common(p)
    p.set_defaults(handler=_cmd_tokenmap_build)

    p = tm_sub.add_parser("sweep", help="threshold sweep")
    _add_tokenmap_source(p)
    p.add_argument("--grid", default=None, help="start:stop:step")
    _add_common(p)
    p.set_defaults(handler=_cmd_tokenmap_sweep)

    p = tm_sub.add_parser("select", help="flagged pair selection at one threshold")
    _add_tokenmap_source(p)
    p.add_argument("--T", dest="t", type=float, default=None)
    _add_common(p)
    p.set_defaults(handler=_cmd_tokenmap_select)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        config = _read_config(args.config) if args.config else {}
        args.handler(args, config)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        raise
    except Exception as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
