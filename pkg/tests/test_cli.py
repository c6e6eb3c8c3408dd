import json

import pytest

from moleval.harness.cli import main
from moleval.transition import build_matrix, export_matrix
from moleval.harness.records import read_results


def _write_jsonl(path, rows):
    path.write_text("".join(json.dumps(r) + "\n" for r in rows), encoding="utf-8")
    return str(path)


def _gen_rows(n=4):
    rows = []
    smiles = ["CCO", "c1ccccc1", "CC(=O)O", "CCN"]
    for i in range(n):
        rows.append(
            {
                "id": str(i),
                "input_modality": "iupac",
                "output_modality": "smiles",
                "prediction": smiles[i % len(smiles)],
                "references": [smiles[i % len(smiles)]],
            }
        )
    return rows


def test_no_arguments_is_usage_error(capsys):
    assert main([]) == 1
    assert "usage error" in capsys.readouterr().err


def test_unknown_flag_is_usage_error(capsys):
    assert main(["parse", "CCO", "--bogus"]) == 1


def test_parse_exit_zero_even_for_invalid(capsys):
    assert main(["parse", "CCO", "C1CC"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["counts"]["valid"] == 1


def test_parse_without_input_is_usage_error():
    assert main(["parse"]) == 1


def test_missing_file_is_data_error(capsys):
    assert main(["eval", "gen", "--records", "/nonexistent.jsonl", "--target-kind", "molecule"]) == 2


def test_corrupt_line_is_data_error_naming_line(tmp_path, capsys):
    path = tmp_path / "g.jsonl"
    rows = _gen_rows(3)
    lines = [json.dumps(r) for r in rows]
    lines[1] = "{broken json"
    path.write_text("\n".join(lines) + "\n")
    assert main(["eval", "gen", "--records", str(path), "--target-kind", "molecule"]) == 2
    assert "line 2" in capsys.readouterr().err


def test_eval_gen_writes_file_and_is_deterministic(tmp_path):
    rec = _write_jsonl(tmp_path / "g.jsonl", _gen_rows(6))
    out1 = tmp_path / "r1.json"
    out2 = tmp_path / "r2.json"
    assert main(["eval", "gen", "--records", rec, "--target-kind", "molecule", "--out", str(out1)]) == 0
    assert main(["eval", "gen", "--records", rec, "--target-kind", "molecule", "--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    data = json.loads(out1.read_text())
    assert data["metrics"]["validity"] == 1.0
    assert data["provenance"]["tool"]["name"] == "moleval"


def test_eval_gen_needs_target_kind(tmp_path):
    rec = _write_jsonl(tmp_path / "g.jsonl", _gen_rows(2))
    assert main(["eval", "gen", "--records", rec]) == 1


def test_seed_recorded(tmp_path, capsys):
    rec = _write_jsonl(tmp_path / "g.jsonl", _gen_rows(2))
    assert main(["eval", "gen", "--records", rec, "--target-kind", "molecule", "--seed", "7"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["provenance"]["seed"] == 7


def test_repeat_merge(tmp_path, capsys):
    rec = _write_jsonl(tmp_path / "g.jsonl", _gen_rows(4))
    r1 = tmp_path / "r1.json"
    r2 = tmp_path / "r2.json"
    main(["eval", "gen", "--records", rec, "--target-kind", "molecule", "--out", str(r1)])
    main(["eval", "gen", "--records", rec, "--target-kind", "molecule", "--out", str(r2)])
    assert main(["eval", "gen", "--repeat-merge", str(r1), str(r2)]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["counts"]["runs"] == 2
    assert data["metrics"]["validity"]["mean"] == 1.0
    assert data["metrics"]["validity"]["std"] == 0.0


def test_convert_round_trip(capsys):
    assert main(["convert", "--from", "smiles", "--to", "selfies", "C1=CC=CC=C1"]) == 0
    stream = capsys.readouterr().out.strip()
    assert stream == "[C][=C][C][=C][C][=C][Ring1][=Branch1]"
    assert main(["convert", "--from", "selfies", "--to", "smiles", stream]) == 0
    smiles = capsys.readouterr().out.strip()
    assert main(["parse", smiles]) == 0
    assert json.loads(capsys.readouterr().out)["molecules"][0]["valid"] is True


def test_convert_same_notation_is_usage_error():
    assert main(["convert", "--from", "smiles", "--to", "smiles", "CCO"]) == 1


def test_convert_bad_input_names_position(capsys):
    assert main(["convert", "--from", "smiles", "--to", "selfies", "CCO", "C1CC"]) == 2
    assert "input 2" in capsys.readouterr().err


def test_transition_build_csv_matches_library(tmp_path, capsys):
    rows = [
        {"input": "iupac", "output": "smiles", "metric": "bleu", "value": 0.881},
        {"input": "smiles", "output": "caption", "metric": "meteor", "value": 0.563},
    ]
    res = _write_jsonl(tmp_path / "res.jsonl", rows)
    assert main(["transition", "build", "--results", res, "--out", "csv"]) == 0
    printed = capsys.readouterr().out
    assert printed == export_matrix(build_matrix(read_results(res)))
    assert "iupac,0.881,0.881,0.881,0.881" in printed


def test_transition_build_provenance_file(tmp_path, capsys):
    rows = [{"input": "iupac", "output": "smiles", "metric": "bleu", "value": 0.5}]
    res = _write_jsonl(tmp_path / "res.jsonl", rows)
    prov = tmp_path / "prov.csv"
    assert main(["transition", "build", "--results", res, "--out", "csv", "--provenance", str(prov)]) == 0
    capsys.readouterr()
    text = prov.read_text()
    assert "measured(bleu)" in text
    assert "tool" in text


def test_transition_conflicting_results_data_error(tmp_path, capsys):
    rows = [
        {"input": "iupac", "output": "smiles", "metric": "bleu", "value": 0.5},
        {"input": "iupac", "output": "smiles", "metric": "meteor", "value": 0.6},
    ]
    res = _write_jsonl(tmp_path / "res.jsonl", rows)
    assert main(["transition", "build", "--results", res]) == 2


def _pairs_file(tmp_path):
    rows = [
        {"input": "the acid smells sharp", "output": "box lic ."},
        {"input": "acid rain falls", "output": "box drop"},
        {"input": "salt and acid", "output": "lic box"},
        {"input": "the salt dissolves", "output": "drop crystal"},
    ]
    return _write_jsonl(tmp_path / "pairs.jsonl", rows)


def test_tokenmap_build_and_reload(tmp_path, capsys):
    pairs = _pairs_file(tmp_path)
    saved = tmp_path / "matrix.json"
    assert main(["tokenmap", "build", "--pairs", pairs, "--out", str(saved)]) == 0
    data = json.loads(saved.read_text())
    assert data["degraded"] is True  # far fewer than 20 tokens
    assert "." not in data["col_tokens"]  # default stoplist removes punctuation
    assert len(data["counts"]) == len(data["row_tokens"])
    assert max(max(row) for row in data["normalized"]) == 1.0
    # a saved matrix is a valid source for the other subcommands
    assert main(["tokenmap", "sweep", "--matrix", str(saved), "--grid", "0:2:0.5"]) == 0
    rows = json.loads(capsys.readouterr().out)["rows"]
    assert [r["T"] for r in rows] == [0.0, 0.5, 1.0, 1.5, 2.0]
    counts = [r["flag_count"] for r in rows]
    assert all(b <= a for a, b in zip(counts, counts[1:]))


def test_tokenmap_build_csv_grid(tmp_path, capsys):
    pairs = _pairs_file(tmp_path)
    assert main(["tokenmap", "build", "--pairs", pairs, "--out", "csv"]) == 0
    lines = capsys.readouterr().out.splitlines()
    header = lines[0].split(",")
    assert header[0] == ""  # corner cell empty, then column tokens
    n_cols = len(header) - 1
    assert all(len(line.split(",")) == n_cols + 1 for line in lines[1:])
    assert len(lines) >= 3  # at least two token rows


def test_tokenmap_select_groups(tmp_path, capsys):
    pairs = _pairs_file(tmp_path)
    assert main(["tokenmap", "select", "--pairs", pairs, "--T", "0.5"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["threshold_T"] == 0.5
    assert all("group_key" in p for p in data["pairs"])
    assert all(set(g) == {"group_key", "members"} for g in data["groups"])


def test_tokenmap_select_needs_threshold(tmp_path):
    pairs = _pairs_file(tmp_path)
    assert main(["tokenmap", "select", "--pairs", pairs]) == 1


def test_tokenmap_needs_source():
    assert main(["tokenmap", "build"]) == 1


def test_tokenmap_bad_grid(tmp_path):
    pairs = _pairs_file(tmp_path)
    assert main(["tokenmap", "sweep", "--pairs", pairs, "--grid", "nope"]) == 1
    assert main(["tokenmap", "sweep", "--pairs", pairs, "--grid", "2:1:0.5"]) == 1


def test_tokenmap_degenerate_matrix_is_data_error(tmp_path):
    saved = tmp_path / "m.json"
    saved.write_text(json.dumps({
        "row_tokens": ["a", "b"],
        "col_tokens": ["x", "y"],
        "counts": [[3.0, 3.0], [3.0, 3.0]],
    }))
    assert main(["tokenmap", "select", "--matrix", str(saved), "--T", "1.0"]) == 2


def test_config_defaults_and_flag_override(tmp_path, capsys):
    pairs = _pairs_file(tmp_path)
    config = tmp_path / "moleval.cfg"
    config.write_text("top-k = 3\ngrid = 0:1:0.5\n# comment\n")
    assert main(["tokenmap", "build", "--pairs", pairs, "--config", str(config)]) == 0
    data = json.loads(capsys.readouterr().out)
    assert len(data["row_tokens"]) == 3
    # flag wins over config
    assert main(["tokenmap", "build", "--pairs", pairs, "--config", str(config), "--top-k", "2"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert len(data["row_tokens"]) == 2


def test_custom_stoplist(tmp_path, capsys):
    pairs = _pairs_file(tmp_path)
    stop = tmp_path / "stop.txt"
    stop.write_text("the\nand\n")
    assert main(["tokenmap", "build", "--pairs", pairs, "--stoplist", str(stop)]) == 0
    data = json.loads(capsys.readouterr().out)
    assert "the" not in data["row_tokens"]
    assert "." in data["col_tokens"]  # custom stoplist replaces the default


def test_profile_cli(tmp_path, capsys):
    rows = [{"id": str(i), "smiles": "CCO"} for i in range(3)]
    rec = _write_jsonl(tmp_path / "d.jsonl", rows)
    assert main(["profile", "--records", rec]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["counts"]["profiled"] == 3


def test_markdown_and_csv_output(tmp_path, capsys):
    rec = _write_jsonl(tmp_path / "g.jsonl", _gen_rows(2))
    assert main(["eval", "gen", "--records", rec, "--target-kind", "molecule", "--out", "md"]) == 0
    md = capsys.readouterr().out
    assert md.startswith("# eval-gen-molecule")
    assert main(["eval", "gen", "--records", rec, "--target-kind", "molecule", "--out", "csv"]) == 0
    csv_text = capsys.readouterr().out
    assert csv_text.splitlines()[0] == "key,value"
    assert "metrics.validity,1.0" in csv_text


def test_retrieval_cli(tmp_path, capsys):
    from moleval.harness.records import write_embeddings
    from moleval.predmetrics import EmbeddingMatrix

    matrix = EmbeddingMatrix(("a", "b"), ((1.0, 0.0), (0.0, 1.0)))
    qp = tmp_path / "q.emb"
    tp = tmp_path / "t.emb"
    write_embeddings(qp, matrix)
    write_embeddings(tp, matrix)
    gold = _write_jsonl(tmp_path / "gold.jsonl", [{"query": "a", "target": "a"}, {"query": "b", "target": "b"}])
    assert main(["eval", "retrieval", "--queries", str(qp), "--targets", str(tp), "--gold", gold]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["metrics"]["mrr"] == 1.0
    assert data["metrics"]["r@10"] == 1.0


def test_property_cli(tmp_path, capsys):
    rows = [
        {"task": "a", "label": 1, "score": 0.9},
        {"task": "a", "label": 0, "score": 0.1},
    ]
    rec = _write_jsonl(tmp_path / "p.jsonl", rows)
    assert main(["eval", "property", "--records", rec]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["metrics"]["roc-auc"] == 1.0


def test_internal_error_exit_code(monkeypatch, tmp_path):
    rec = _write_jsonl(tmp_path / "g.jsonl", _gen_rows(2))
    import moleval.harness.cli as cli_mod

    def boom(*args, **kwargs):
        raise RuntimeError("synthetic failure")

    monkeypatch.setattr(cli_mod, "eval_generation", boom)
    assert main(["eval", "gen", "--records", rec, "--target-kind", "molecule"]) == 3
