import json
import subprocess
import sys

import numpy as np
import pytest

from waldo.cli import main, read_config_file
from waldo.experiment import ConfigError, ExperimentConfig, run_experiment
from waldo.graph import write_edge_list
from waldo.metrics import hits, precision_at_k, recall_at_k

import oracles


def test_recall_examples():
    test = [(0, 1), (1, 2), (2, 3), (3, 4)]
    assert recall_at_k([(0, 1), (2, 1), (3, 2), (5, 6)], test) == 0.75
    assert recall_at_k(test, test) == 1.0
    assert recall_at_k([(7, 8)], test) == 0.0
    with pytest.raises(ValueError):
        recall_at_k(test, [])


def test_precision_examples():
    cands = [(i, i + 1) for i in range(10)]
    assert precision_at_k(cands, [(0, 1), (4, 5), (9, 10), (20, 21)]) == 0.3
    assert precision_at_k(cands, cands) == 1.0
    with pytest.raises(ValueError):
        precision_at_k([], cands)
    assert hits(cands, [(1, 0)]) == 1


@pytest.fixture
def graph_file(tmp_path):
    g = oracles.noisy_graph(120, 600, 0)
    path = tmp_path / "g.txt"
    write_edge_list(g, path)
    return path


def emb_file(tmp_path, g_path, name, d=4, seed=0):
    labels = []
    for line in open(g_path):
        for tok in line.split()[:2]:
            if tok not in labels:
                labels.append(tok)
    x = np.random.default_rng(seed).standard_normal((len(labels), d))
    path = tmp_path / name
    with open(path, "w") as fh:
        fh.write(f"{len(labels)} {d}\n")
        for lbl, row in zip(labels, x):
            fh.write(lbl + " " + " ".join(map(repr, row.tolist())) + "\n")
    return path


def strip_runtime(obj):
    if isinstance(obj, dict):
        return {k: strip_runtime(v) for k, v in obj.items() if "runtime" not in k}
    if isinstance(obj, list):
        return [strip_runtime(v) for v in obj]
    return obj


def test_report_files_and_determinism(tmp_path, graph_file):
    reports = []
    for run in ("a", "b"):
        out = tmp_path / run
        assert main(["--graph", str(graph_file), "--k", "200", "--bins", "4", "--seeds", "2",
                     "--out", str(out)]) == 0
        reports.append(json.loads((out / "report.json").read_text()))
        assert (out / "candidates_seed0.txt").exists()
        assert (out / "roadmap_seed1.csv").read_text().startswith("class_key,observed")
    a, b = reports
    assert a["schema_version"] == 1
    assert a["config"].pop("out") != b["config"].pop("out")
    assert strip_runtime(a) == strip_runtime(b)
    for rec in a["runs"]:
        assert 0 <= rec["recall_at_k"] <= 1 and 0 <= rec["precision_at_k"] <= 1
        assert rec["hits"] <= min(a["k"], rec["test_size"])
        assert rec["recall_at_k"] * rec["test_size"] == pytest.approx(rec["hits"])
        assert rec["precision_at_k"] * rec["candidates"] == pytest.approx(rec["hits"])
        tv = rec["tv_diagnostic"]
        assert tv["xi"] == 2 * a["k"] * tv["dtv"]
        assert sum(rec["per_class_hits"].values()) == rec["hits"]
    recalls = [r["recall_at_k"] for r in a["runs"]]
    assert a["summary"]["recall_std"] == pytest.approx(np.std(recalls, ddof=1))


def test_single_bin_matches_baseline(tmp_path, graph_file):
    base = run_experiment(ExperimentConfig(graph=str(graph_file), method="aa", k=150, seeds=2))
    lw = run_experiment(ExperimentConfig(graph=str(graph_file), method="linkwaldo", k=150,
                                         bins=1, proximity="aa", seeds=2))
    for a, b in zip(base["runs"], lw["runs"]):
        assert b["single_class"]
        assert a["recall_at_k"] == b["recall_at_k"]


def test_config_precedence(tmp_path, graph_file):
    conf = tmp_path / "run.conf"
    conf.write_text(f"# experiment\ngraph = {graph_file}\nk = 90\nbins: 3\nsg-clusters = 4\nseeds = 1\n")
    assert read_config_file(conf)["sg_clusters"] == "4"
    out = tmp_path / "o"
    assert main(["--config", str(conf), "--k", "40", "--out", str(out)]) == 0
    cfg = json.loads((out / "report.json").read_text())["config"]
    assert (cfg["k"], cfg["bins"], cfg["sg_clusters"], cfg["zeta"]) == (40, 3, 4, 0.5)


def test_bad_config_key(tmp_path, graph_file, capsys):
    conf = tmp_path / "bad.conf"
    conf.write_text(f"graph = {graph_file}\nwidth = 3\n")
    assert main(["--config", str(conf)]) == 2
    assert "unknown config key" in capsys.readouterr().err


@pytest.mark.parametrize("args, message", [
    (["--grouping", "sg"], "--struct-emb-file is required"),
    (["--grouping", "cg"], "--emb-file is required"),
    (["--proximity", "emb"], "--emb-file is required"),
    (["--emb-file", "/nonexistent", "--proximity", "emb"], "not found"),
])
def test_invalid_combinations(graph_file, capsys, args, message):
    assert main(["--graph", str(graph_file)] + args) == 2
    assert message in capsys.readouterr().err


def test_missing_graph(capsys):
    assert main(["--graph", "/nonexistent/graph.txt"]) == 2
    assert "not found" in capsys.readouterr().err
    with pytest.raises(ConfigError):
        ExperimentConfig(graph="x", method="katz").validate()


def test_embedding_groupings(tmp_path, graph_file):
    e = emb_file(tmp_path, graph_file, "e.txt", seed=1)
    s = emb_file(tmp_path, graph_file, "s.txt", seed=2)
    for grouping, prox in (("mg", "emb"), ("cg", "cn"), ("sg", "js")):
        rep = run_experiment(ExperimentConfig(
            graph=str(graph_file), grouping=grouping, proximity=prox, emb_file=str(e),
            struct_emb_file=str(s), k=100, seeds=1, bins=3, sg_clusters=3, cg_clusters=3))
        assert rep["runs"][0]["candidates"] == 100


def test_lapm_and_baselines(graph_file):
    for method in ("lapm", "cn", "js"):
        rep = run_experiment(ExperimentConfig(graph=str(graph_file), method=method, k=80, seeds=1))
        assert rep["runs"][0]["candidates"] <= 80
        assert rep["method"] == method


def test_temporal_split(tmp_path):
    rng = np.random.default_rng(0)
    path = tmp_path / "t.txt"
    with open(path, "w") as fh:
        for t in range(400):
            u, v = rng.integers(0, 60, 2)
            if u != v:
                fh.write(f"{u} {v} {t}\n")
    with pytest.warns(UserWarning, match="duplicate"):
        rep = run_experiment(ExperimentConfig(graph=str(path), split="temporal", k=50, seeds=2, bins=3))
    a, b = rep["runs"]
    assert a["test_size"] == b["test_size"] and a["removed"] == b["removed"]


def test_module_entry_point(graph_file, tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "waldo", "--graph", str(graph_file), "--method", "aa", "--k", "50",
         "--seeds", "1"],
        capture_output=True, text=True, check=True,
    )
    assert proc.stdout.startswith("aa k=50 seeds=1: R@k=")
