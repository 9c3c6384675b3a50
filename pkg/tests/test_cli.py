import json
import os

import numpy as np
import pytest

from moblp.cli import main
from moblp.instance import read_instance
from moblp.ksa import read_frontier


def run(*argv):
    return main([str(a) for a in argv])


def test_generate_and_solve(tmp_path):
    inst_dir = tmp_path / "inst"
    assert run("generate", "--kind", "kp", "--size", "7", "--count", "2",
               "--seed", "3", "--preorder", "--out", inst_dir) == 0
    paths = sorted(p for p in os.listdir(inst_dir) if p.endswith(".moblp"))
    assert len(paths) == 2
    inst = read_instance(inst_dir / paths[0])
    assert inst.n == 7 and inst.p == 3

    nd = tmp_path / "out.nd"
    assert run("solve", "--instance", inst_dir / paths[0], "-j", "2", "--out", nd) == 0
    front = read_frontier(nd)
    assert front.projection == 2
    assert front.ilp_count >= 1


def test_full_cli_pipeline(tmp_path):
    inst_dir = tmp_path / "inst"
    run("generate", "--kind", "planted", "--size", "8", "--count", "14",
        "--seed", "0", "--preorder", "--out", inst_dir)

    labels = tmp_path / "labels.tsv"
    assert run("label", "--instances", inst_dir, "--out", labels) == 0
    assert labels.exists()

    feats = tmp_path / "features.csv"
    assert run("features", "--instances", inst_dir, "--out", feats) == 0

    model = tmp_path / "model.json"
    assert run("train", "--features", feats, "--labels", labels, "--out", model) == 0
    doc = json.loads(model.read_text())
    assert doc["normalization"] is not None
    assert len(doc["W"]) == 3

    report = tmp_path / "report.json"
    assert run("evaluate", "--model", model, "--features", feats,
               "--labels", labels, "--out", report) == 0
    rep = json.loads(report.read_text())
    assert 0.0 <= rep["overall"]["accuracy"] <= 1.0

    assert run("report", "--report", report, "--out", tmp_path / "report.txt") == 0
    assert (tmp_path / "report.txt").read_text().startswith("metric:")


def test_label_rejects_non_canonical(tmp_path):
    inst_dir = tmp_path / "inst"
    # raw knapsack instances are rarely canonical: find one that is not
    run("generate", "--kind", "kp", "--size", "6", "--count", "8",
        "--seed", "1", "--out", inst_dir)
    from moblp.instance import preorder

    non_canonical = False
    for f in os.listdir(inst_dir):
        inst = read_instance(inst_dir / f)
        canon, _ = preorder(inst)
        if not np.array_equal(canon.C, inst.C):
            non_canonical = True
    if not non_canonical:
        pytest.skip("every sampled instance happened to be canonical")
    with pytest.raises(SystemExit, match="canonical"):
        run("label", "--instances", inst_dir, "--out", tmp_path / "l.tsv")


def test_run_from_config(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "problem = planted\nplanted_sizes = 8\ncount = 12\ncorpus_seed = 4\n"
        "metric = nodes\nsplit_seed = 1\nmax_epochs = 150\n"
    )
    out = tmp_path / "exp"
    assert run("run", "--config", cfg, "--out", out) == 0
    assert (out / "report.txt").exists()
    assert (out / "model.json").exists()
