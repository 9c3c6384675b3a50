"""Acceptance suite: one test per release criterion, one PASS line each.

Run with ``pytest -s tests/test_acceptance.py`` to see the per-criterion
lines; the suite is also part of the default ``pytest`` run.  The heavy
criteria (frontier exactness, the end-to-end statistical check) size their
workloads to finish well inside their stated budgets on a small machine.
"""

import itertools
import math
import os
import sys
import time

import numpy as np

sys.path.insert(0, os.path.dirname(__file__))
from test_bnb import random_query

from moblp import harness, ksa, learn, simplex
from moblp.bnb import IlpQuery, brute_force_ilp, solve_ilp
from moblp.features import (
    apply_normalizer,
    extract_features,
    feature_count,
    feature_groups,
    feature_names,
    fit_normalizer,
)
from moblp.harness import Effort, LabelRecord, RunConfig, run_experiment
from moblp.instance import generate_ap, generate_kp, preorder


def announce(num, ok, detail):
    line = f"ACCEPTANCE {num:2d} {'PASS' if ok else 'FAIL'}: {detail}"
    print(line, file=sys.stderr if not ok else sys.stdout, flush=True)
    assert ok, line


def test_criterion_01_frontier_exactness():
    t0 = time.time()
    checked = 0
    mismatches = 0
    rng = np.random.default_rng(20260809)
    for case in range(200):
        if case % 5 < 3:
            inst = generate_kp(int(rng.integers(4, 13)), 3, seed=int(rng.integers(1 << 30)))
        else:
            inst = generate_ap(int(rng.integers(2, 5)), 3, seed=int(rng.integers(1 << 30)))
        inst, _ = preorder(inst)
        want = ksa.brute_force_frontier(inst).point_set()
        for j in (1, 2, 3):
            got = ksa.ksa_solve(inst, j).point_set()
            checked += 1
            if got != want:
                mismatches += 1
    elapsed = time.time() - t0
    announce(
        1, mismatches == 0 and elapsed < 300,
        f"KSA == brute force on {checked} projection runs over 200 instances "
        f"({elapsed:.1f}s)",
    )


def test_criterion_02_ilp_oracle_exactness():
    t0 = time.time()
    bad = 0
    for seed in range(500):
        q = random_query(seed, max_n=12)
        got = solve_ilp(q)
        want = brute_force_ilp(q)
        if got.status != want.status:
            bad += 1
        elif want.status == simplex.OPTIMAL and got.value != want.value:
            bad += 1
    elapsed = time.time() - t0
    announce(2, bad == 0 and elapsed < 60,
             f"solve_ilp == enumeration on 500 random queries ({elapsed:.1f}s)")


def test_criterion_03_feature_count_identity():
    inst3, _ = preorder(generate_kp(6, 3, seed=0))
    inst2, _ = preorder(generate_kp(6, 2, seed=0))
    len3 = len(extract_features(inst3).values)
    len2 = len(extract_features(inst2).values)
    fam_sizes = {}
    for fam in feature_groups(3):
        fam_sizes[fam] = fam_sizes.get(fam, 0) + 1
    ok = (
        len3 == 313 == feature_count(3)
        and len2 == 182 == feature_count(2)
        and sum(fam_sizes.values()) == 313
        and len(feature_names(3)) == 313
    )
    announce(3, ok, f"lengths p=3:{len3} p=2:{len2}, families sum {sum(fam_sizes.values())}")


def test_criterion_04_scaling_invariance():
    t0 = time.time()
    rng = np.random.default_rng(7)
    start = feature_names(3).index("F19_2")
    worst = 0.0
    for i in range(50):
        if i % 2 == 0:
            inst = generate_kp(int(rng.integers(4, 9)), 3, seed=1000 + i)
        else:
            inst = generate_ap(int(rng.integers(2, 4)), 3, seed=1000 + i)
        inst, _ = preorder(inst)
        base = extract_features(inst).values
        ranges = None
        for _ in range(10):
            alpha = rng.uniform(0.1, 10.0, size=(inst.p, 1))
            beta = rng.uniform(0.1, 10.0, size=(inst.m, 1))
            # the rescaled twin is equivalent but no longer canonical AP/KP
            scaled = inst.replace(
                C=inst.C * alpha, A=inst.A * beta, b=inst.b * beta[:, 0],
                kind="GENERIC",
            )
            vals = extract_features(scaled).values
            worst = max(worst, float(np.abs(vals[start:] - base[start:]).max()))
    elapsed = time.time() - t0
    announce(
        4, worst < 1e-9 and elapsed < 60,
        f"max change of scale-free families over 500 rescalings: {worst:.2e} "
        f"({elapsed:.1f}s)",
    )


def test_criterion_05_preorder_canonicalization():
    t0 = time.time()
    rng = np.random.default_rng(11)
    stable = True
    for i in range(100):
        inst = generate_kp(int(rng.integers(4, 9)), 3, seed=2000 + i)
        canon, _ = preorder(inst)
        want_C = canon.C
        want_fv = extract_features(canon).values
        for perm in itertools.permutations(range(3)):
            shuffled = inst.replace(C=inst.C[list(perm)])
            got, _ = preorder(shuffled)
            if not np.array_equal(got.C, want_C):
                stable = False
                break
            if not np.array_equal(extract_features(got).values, want_fv):
                stable = False
                break
        if not stable:
            break
    elapsed = time.time() - t0
    announce(
        5, stable and elapsed < 60,
        f"canonical C and features identical across all 6 row orders x100 "
        f"instances ({elapsed:.1f}s)",
    )


def test_criterion_06_subset_search_structure():
    t0 = time.time()
    rng = np.random.default_rng(3)
    X = rng.normal(size=(60, 9))
    X[:, 5] = 0.0  # degenerate column must be dropped up front
    y = 1 + (X[:, 0] + 0.4 * X[:, 1] > 0).astype(int) + (X[:, 2] > 0.8)
    frontier = learn.subset_frontier(X, y, c_reg=10.0, tol=0.05, max_epochs=300)
    ks = [pt.k for pt in frontier.points]
    structure_ok = ks == list(range(8, 0, -1))
    nesting_ok = all(
        set(b.active) < set(a.active)
        for a, b in zip(frontier.points, frontier.points[1:])
    )
    sel = learn.select_model(frontier)
    filtered = [
        a for a in frontier.points
        if not any(
            b.k <= a.k and b.error <= a.error and (b.k, b.error) != (a.k, a.error)
            for b in frontier.points
        )
    ]
    k_lo = min(q.k for q in filtered)
    k_hi = max(q.k for q in filtered)
    e_hi = next(q.error for q in filtered if q.k == k_lo)
    e_lo = next(q.error for q in filtered if q.k == k_hi)
    best = None
    for q in sorted(filtered, key=lambda r: r.k):
        zk = (q.k - k_lo) / (k_hi - k_lo) if k_hi > k_lo else 0.0
        ze = (q.error - e_lo) / (e_hi - e_lo) if e_hi > e_lo else 0.0
        d = math.hypot(zk, ze)
        if best is None or d < best[0] - 1e-15:
            best = (d, q.k)
    exhaustive_ok = best is not None and sel.point.k == best[1]

    from moblp.learn import MsvmModel, SubsetFrontier, SubsetPoint

    def mk(pairs):
        return SubsetFrontier(
            points=tuple(
                SubsetPoint(
                    k=k, error=e, active=tuple(range(k)),
                    model=MsvmModel(p=2, W=np.zeros((2, k)), active=tuple(range(k)),
                                    c_reg=1.0, tol=0.1, seed=0),
                )
                for k, e in pairs
            ),
            dropped_constant=(),
        )

    worked = learn.select_model(mk([(10, 0.4), (5, 0.5), (2, 0.9)]))
    worked_ok = (worked.point.k, worked.point.error) == (5, 0.5)
    elapsed = time.time() - t0
    announce(
        6, structure_ok and nesting_ok and exhaustive_ok and worked_ok and elapsed < 1.0,
        f"queue k={ks[0]}..1 strict, selection matches exhaustive distances, "
        f"worked example picks (5, 0.5) ({elapsed:.2f}s)",
    )


def test_criterion_07_msvm_sanity():
    t0 = time.time()
    rng = np.random.default_rng(0)
    centers = np.array([[2.0, 0.0], [-1.0, 1.8], [-1.0, -1.8]])
    X = np.vstack([c + 0.15 * rng.standard_normal((30, 2)) for c in centers])
    y = np.repeat([1, 2, 3], 30)
    m1 = learn.train_msvm(X, y, c_reg=learn.DEFAULT_C_REG, tol=learn.DEFAULT_TOL, seed=0)
    m2 = learn.train_msvm(X, y, c_reg=learn.DEFAULT_C_REG, tol=learn.DEFAULT_TOL, seed=0)
    acc = 1.0 - learn.training_error(m1, X, y)
    elapsed = time.time() - t0
    announce(
        7, acc == 1.0 and np.array_equal(m1.W, m2.W) and elapsed < 10,
        f"separable 3x30 training accuracy {100 * acc:.0f}%, W deterministic "
        f"({elapsed:.2f}s)",
    )


def test_criterion_08_reduction_rule():
    def rec(rid, values):
        efforts = tuple(Effort(float(v), int(v), int(v)) for v in values)
        return LabelRecord(id=rid, subclass="S", metric="nodes",
                           efforts=efforts, label=1)

    worked = harness.reduce_set(
        [rec("a", [0, 1, 2]), rec("b", [0, 2, 3]), rec("c", [0, 4, 10])]
    )
    all_equal = harness.reduce_set([rec(f"r{i}", [0, 3, 4]) for i in range(5)])
    ok = [r.id for r in worked] == ["c"] and all_equal == []
    announce(8, ok, "ranges {2,3,10} keep only the 10; equal ranges drop all")


def test_criterion_09_metric_definitions(monkeypatch):
    rec = LabelRecord(
        id="a", subclass="S", metric="time_s",
        efforts=(Effort(10.0, 1, 1), Effort(8.0, 1, 1), Effort(9.0, 1, 1)),
        label=2,
    )
    monkeypatch.setattr(learn, "predict_raw", lambda model, fv: 2)
    report = harness.evaluate(object(), [rec], {"a": np.zeros(3)}, metric="time_s")
    acc_ok = report.overall.accuracy == 1.0
    ml_ok = abs(report.overall.ml_vs_rand - 100.0 / 9.0) < 1e-9
    ratio_ok = abs(report.overall.ratio - 1.0) < 1e-12

    rng = np.random.default_rng(5)
    identity_ok = True
    for trial in range(20):
        recs = [
            LabelRecord(
                id=f"r{i}", subclass=f"S{i % 2}", metric="time_s",
                efforts=tuple(Effort(float(v), 1, 1) for v in rng.uniform(1, 9, 3)),
                label=1,
            )
            for i in range(10)
        ]
        preds = iter(int(v) for v in rng.integers(1, 4, size=10))
        monkeypatch.setattr(learn, "predict_raw", lambda model, fv: next(preds))
        rep = harness.evaluate(object(), recs, {r.id: np.zeros(3) for r in recs})
        for row in list(rep.rows) + [rep.overall]:
            expect = row.ml_vs_rand / row.best_vs_rand if row.best_vs_rand else 0.0
            if abs(row.ratio - expect) > 1e-12:
                identity_ok = False
    announce(
        9, acc_ok and ml_ok and ratio_ok and identity_ok,
        f"worked example: accuracy 1, ML-vs-Rand {report.overall.ml_vs_rand:.4f}%, "
        "ratio identity holds on all emitted reports",
    )


def test_criterion_10_end_to_end_statistical(tmp_path):
    t0 = time.time()
    base = dict(
        problem="planted", planted_sizes=(10, 12), count=150, corpus_seed=42,
        metric="nodes", jobs=2,
    )
    out = tmp_path / "planted"
    accs, mls = [], []
    for seed in (1, 2, 3, 4, 5):
        cfg = RunConfig(**base, split_seed=seed)
        res = run_experiment(cfg, out, progress=lambda *a: None)
        accs.append(res.report.overall.accuracy)
        mls.append(res.report.overall.ml_vs_rand)
        print(
            f"  planted split seed {seed}: accuracy {res.report.overall.accuracy:.3f}, "
            f"ML-vs-Rand {res.report.overall.ml_vs_rand:+.2f}%",
            flush=True,
        )
    mean_acc = float(np.mean(accs))
    mean_ml = float(np.mean(mls))

    # plain random corpora must run end to end; no accuracy floor asserted
    kp_cfg = RunConfig(problem="kp", kp_sizes=(8,), count=15, corpus_seed=3,
                       metric="nodes", split_seed=1, max_epochs=150)
    kp_res = run_experiment(kp_cfg, tmp_path / "kp", progress=lambda *a: None)
    ap_cfg = RunConfig(problem="ap", ap_sizes=(3,), count=15, corpus_seed=3,
                       metric="nodes", split_seed=1, max_epochs=150)
    ap_res = run_experiment(ap_cfg, tmp_path / "ap", progress=lambda *a: None)
    plain_ok = all(
        r.report.overall.count > 0
        and np.isfinite(r.report.overall.ml_vs_rand)
        and np.isfinite(r.report.overall.best_vs_rand)
        for r in (kp_res, ap_res)
    )

    elapsed = time.time() - t0
    announce(
        10,
        mean_acc >= 1 / 3 + 0.10 and mean_ml >= 0.0 and plain_ok and elapsed < 1800,
        f"planted corpus (300 instances, 5 seeds): mean accuracy "
        f"{100 * mean_acc:.1f}% (baseline 33.3%), mean ML-vs-Rand {mean_ml:+.2f}%; "
        f"plain KP/AP pipelines completed ({elapsed:.0f}s)",
    )
