import json

import pytest

from cascademorph.cli import EXIT_CONFIG, EXIT_DATA, main


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    out = tmp_path_factory.mktemp("corpus")
    assert main(["generate", "--seed", "5", "--out", str(out), "--cascade-count", "80", "--user-count", "1500"]) == 0
    return out


def _inputs(d):
    return ["--follower-path", str(d / "followers.tsv"), "--actions-path", str(d / "actions.jsonl")]


FAST = ["--realization-count", "150", "--realization-length", "30", "--max-states", "1500",
        "--top-k", "25", "--k", "4"]


def test_generate_writes_inputs_and_labels(corpus):
    names = {p.name for p in corpus.iterdir()}
    assert {"followers.tsv", "actions.jsonl", "labels.csv", "generator_config.json"} <= names
    rows = (corpus / "labels.csv").read_text().splitlines()
    assert rows[0] == "cascade_id,label,final_edge_count"
    assert len(rows) == 161
    for r in rows[1:]:
        _, lab, n = r.split(",")
        assert int(lab) == int(int(n) >= 20)
    cfg = json.loads((corpus / "generator_config.json").read_text())
    assert cfg["seed"] == 5 and cfg["cascade_count"] == 80


def test_generate_is_reproducible(corpus, tmp_path):
    main(["generate", "--seed", "5", "--out", str(tmp_path), "--cascade-count", "80", "--user-count", "1500"])
    for name in ("followers.tsv", "actions.jsonl", "labels.csv"):
        assert (tmp_path / name).read_bytes() == (corpus / name).read_bytes()


def test_encode_output(corpus, capsys):
    assert main(["encode", *_inputs(corpus), "--truncate", "--tau1", "10"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 160
    for ln in lines:
        cid, bits, runs = ln.split("\t")
        assert set(bits) <= {"0", "1"} and len(bits) % 2 == 0
        assert sum(int(r) for r in runs.split(",") if r) == len(bits)  # a lone root encodes to nothing


def test_features_csv(corpus, tmp_path, capsys):
    assert main(["features", *_inputs(corpus), *FAST, "--output-dir", str(tmp_path)]) == 0
    head = (tmp_path / "features.csv").read_text().splitlines()[0].split(",")
    sel = json.loads((tmp_path / "features_selected.json").read_text())
    assert head[:2] == ["cascade_id", "label"]
    assert head[2:] == [f"f{i + 1}" for i in range(len(sel["features"]))]
    assert 1 <= sel["order"] <= 5


def test_fit_writes_chain(corpus, tmp_path):
    out = tmp_path / "chain.json"
    assert main(["fit", *_inputs(corpus), "--order", "2", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["order"] == 2


def test_evaluate_and_sweep(corpus, tmp_path, capsys):
    args = ["evaluate", "--seed", "0", *_inputs(corpus), *FAST, "--output-dir", str(tmp_path),
            "--sweep-tau1", "5,10", "--sweep-delta", "10"]
    assert main(args) == 0
    out = capsys.readouterr().out
    assert out.startswith("m4c\taccuracy=")
    assert "\nbaseline\taccuracy=" in out
    assert (tmp_path / "sweep.csv").read_text().startswith("tau1,tau2,")
    m = json.loads((tmp_path / "metrics_m4c.json").read_text())
    assert m["precision_paper"] == m["accuracy"]


def test_evaluate_requires_seed(corpus):
    with pytest.raises(SystemExit) as exc:
        main(["evaluate", *_inputs(corpus)])
    assert exc.value.code == 2


def test_config_error_exit_code(corpus, capsys):
    assert main(["evaluate", "--seed", "0", *_inputs(corpus), "--tau1", "20", "--tau2", "10"]) == EXIT_CONFIG
    assert "tau2" in capsys.readouterr().err


def test_config_file_and_override(corpus, tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"tau1": 20, "tau2": 10}))
    assert main(["encode", *_inputs(corpus), "--config", str(cfg)]) == EXIT_CONFIG
    assert main(["encode", *_inputs(corpus), "--config", str(cfg), "--tau2", "30"]) == 0
    cfg.write_text(json.dumps({"bogus": 1}))
    assert main(["encode", *_inputs(corpus), "--config", str(cfg)]) == EXIT_CONFIG


def test_data_error_exit_code(corpus, capsys):
    rc = main(["evaluate", "--seed", "0", *_inputs(corpus), "--tau1", "200", "--tau2", "250"])
    assert rc == EXIT_DATA
    assert "class 0 has" in capsys.readouterr().err
    assert main(["encode", "--follower-path", str(corpus / "nope.tsv"),
                 "--actions-path", str(corpus / "actions.jsonl")]) == EXIT_DATA


def test_export_dot(corpus, tmp_path, capsys):
    cid = (corpus / "labels.csv").read_text().splitlines()[1].split(",")[0]
    assert main(["export-dot", *_inputs(corpus), "--cascade-id", cid]) == 0
    assert capsys.readouterr().out.startswith(f'digraph "{cid}" {{')
    assert main(["export-dot", *_inputs(corpus), "--cascade-id", cid, "--output-dir", str(tmp_path)]) == 0
    assert (tmp_path / f"{cid}.dot").exists()
    assert main(["export-dot", *_inputs(corpus), "--cascade-id", "missing"]) == EXIT_DATA
