import json
import subprocess
import sys

import pytest

from pedf.cli import main


def run(*args):
    return subprocess.run([sys.executable, "-m", "pedf", *map(str, args)], capture_output=True, text=True)


def test_gen_chain_rows_and_determinism(configs, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["gen", str(configs / "chain.yaml"), "--out", str(a)]) == 0
    assert main(["gen", str(configs / "chain.yaml"), "--out", str(b)]) == 0
    lines = a.read_text().splitlines()
    assert len(lines) - 1 == 40 * 3
    assert a.read_bytes() == b.read_bytes()


def test_train_two_event_chain_has_four_nodes(tmp_path, capsys):
    gen = tmp_path / "gen.yaml"
    gen.write_text("edges: [{from: START, to: A}, {from: A, to: B, duration: 60}, {from: B, to: END}]\n")
    cfg = tmp_path / "run.yaml"
    cfg.write_text("version: 1\ndataset: {generator: gen.yaml, n_cases: 10}\n"
                   "model: {clusterer: {name: kmeans, k: 2}, classifier: {name: nb}}\n"
                   "output: {model: m.json}\n")
    assert main(["train", str(cfg)]) == 0
    out = capsys.readouterr().out
    assert "nodes: 4" in out and "cases: 10 (train 7)" in out
    first = (tmp_path / "m.json").read_bytes()
    assert main(["train", str(cfg)]) == 0
    assert (tmp_path / "m.json").read_bytes() == first


def test_predict_paths(configs, tmp_path, capsys):
    model = tmp_path / "m.json"
    assert main(["train", str(configs / "chain.yaml"), "--out", str(model)]) == 0
    capsys.readouterr()
    assert main(["predict", str(model), "--prefix", "A"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["events"] == ["B", "C", "END"]
    assert [s["duration"] for s in doc["steps"]] == [3600.0, 7200.0, 0.0]
    # a label-only prefix carries no amount, so only the predicted +5 and -2 accumulate
    assert doc["steps"][1]["cumulative"] == {"amount": 3.0, "state": "done"}

    assert main(["predict", str(model), "--prefix", "A,B,C,END"]) == 0
    assert json.loads(capsys.readouterr().out)["events"] == []


def test_predict_unknown_event_and_extend(configs, tmp_path):
    model = tmp_path / "m.json"
    assert main(["train", str(configs / "chain.yaml"), "--out", str(model)]) == 0
    res = run("predict", model, "--prefix", "A,Q")
    assert res.returncode != 0
    assert res.stderr.strip().splitlines() == [res.stderr.strip()]
    assert res.stderr.startswith("UnknownEvent: ")
    ext = tmp_path / "ext.json"
    res = run("predict", model, "--prefix", "A,Q", "--extend", "--save-model", ext)
    assert res.returncode != 0 and res.stderr.startswith("DeadEnd: ")


def test_predict_from_csv(configs, tmp_path, capsys):
    model, log = tmp_path / "m.json", tmp_path / "log.csv"
    assert main(["train", str(configs / "chain.yaml"), "--out", str(model)]) == 0
    assert main(["gen", str(configs / "chain.yaml"), "--out", str(log)]) == 0
    lines = log.read_text().splitlines()
    log.write_text("\n".join(lines[:2]) + "\n")
    capsys.readouterr()
    assert main(["predict", str(model), "--csv", str(log), "--case-id", "case000000"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["events"] == ["B", "C", "END"]
    assert doc["steps"][1]["cumulative"]["amount"] == 13.0


def test_predict_sample_is_seeded(configs, tmp_path, capsys):
    model = tmp_path / "m.json"
    assert main(["train", str(configs / "memory.yaml"), "--out", str(model)]) == 0
    capsys.readouterr()
    outs = []
    for _ in range(2):
        assert main(["predict", str(model), "--prefix", "A", "--sample", "--seed", "3"]) == 0
        outs.append(capsys.readouterr().out)
    assert outs[0] == outs[1]


def test_bench_writes_report_and_table(configs):
    assert main(["bench", str(configs / "chain.yaml"), "--threads", "2"]) == 0
    csv = (configs / "out" / "chain-report.csv").read_text().splitlines()
    assert len(csv) == 1 + 6 * 8
    assert (configs / "out" / "chain-report.txt").exists()


def test_bench_include_timings(configs, tmp_path):
    out = tmp_path / "r.csv"
    assert main(["bench", str(configs / "chain.yaml"), "--report", str(out), "--include-timings"]) == 0
    assert out.read_text().splitlines()[0].endswith(",train_seconds")


@pytest.mark.parametrize("argv, category", [
    (["train", "nope.yaml"], "ConfigError"),
    (["predict", "nope.json", "--prefix", "A"], "IOError"),
])
def test_error_lines(argv, category, tmp_path):
    res = run(*argv)
    assert res.returncode == 2
    assert res.stderr.startswith(f"{category}: ")
    assert len(res.stderr.strip().splitlines()) == 1


def test_corrupt_model_category(tmp_path):
    bad = tmp_path / "m.json"
    bad.write_text("{not json")
    res = run("predict", bad, "--prefix", "A")
    assert res.returncode == 2 and res.stderr.startswith("CorruptModel: ")


def test_missing_csv_column(tmp_path):
    data = tmp_path / "d.csv"
    data.write_text("id,event,time\n1,A,2020/01/01\n")
    cfg = tmp_path / "c.yaml"
    cfg.write_text("version: 1\ndataset: {path: d.csv}\noutput: {model: m.json}\n")
    res = run("train", cfg)
    assert res.returncode == 2 and res.stderr.startswith("MissingColumn: ")
