"""Experiment orchestration: corpora, labeling, splits, metrics, reports.

The pipeline canonicalizes every instance (objective rows pre-ordered)
before anything downstream sees it, so labels, features, and predictions
all speak the same objective indexing.  Labeling solves each instance once
per candidate projection and records the effort triple (wall time, ILP
count, branch-and-bound nodes); the label is the argmin of the chosen
metric, smallest index on ties.  The default metric is node count: it is
deterministic across machines, unlike wall time, which remains selectable.

Every stage of :func:`run_experiment` persists its artifact with a
parameter fingerprint, so re-running with a changed split seed reuses the
expensive corpus and labeling stages.  All files are written atomically
(temp file then rename).
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import dataclass, replace
from multiprocessing import Pool

import numpy as np

from . import ksa, learn
from ._senses import LE
from .features import (
    apply_normalizer,
    extract_features,
    feature_names,
    fit_normalizer,
)
from .instance import (
    KIND_GENERIC,
    MoblpInstance,
    generate_ap,
    generate_kp,
    preorder,
    read_instance,
    write_instance,
)

METRICS = ("nodes", "time_s", "ilp_count")
SETTINGS = ("complete", "reduced-test", "reduced-both")


class FrontierMismatchError(RuntimeError):
    """Different projections disagreed on the frontier; a solver bug."""


@dataclass(frozen=True)
class Effort:
    time_s: float
    ilp_count: int
    nodes: int

    def get(self, metric: str) -> float:
        if metric == "nodes":
            return float(self.nodes)
        if metric == "time_s":
            return self.time_s
        if metric == "ilp_count":
            return float(self.ilp_count)
        raise ValueError(f"unknown metric {metric!r}")


@dataclass(frozen=True)
class LabelRecord:
    """Per-instance labeling outcome: one effort triple per projection.

    ``label`` is the 1-based argmin projection of ``metric`` (ties to the
    smallest index) or None when the time cap interrupted labeling.
    """

    id: str
    subclass: str
    metric: str
    efforts: tuple[Effort, ...]
    label: int | None

    def metric_values(self, metric: str | None = None) -> list[float]:
        metric = metric or self.metric
        return [e.get(metric) for e in self.efforts]


def label_instance(inst, metric: str = "nodes", time_cap: float | None = None,
                   subclass: str | None = None) -> LabelRecord:
    """Solve the instance under every projection and pick the cheapest.

    The frontiers of all projections are cross-checked for set equality on
    every call; a mismatch raises FrontierMismatchError.  A time cap is
    enforced per projection run; exceeding it flags the record unlabeled.
    """
    if metric not in METRICS:
        raise ValueError(f"metric must be one of {METRICS}")
    efforts = []
    frontiers = []
    for j in range(1, inst.p + 1):
        try:
            front = ksa.ksa_solve(inst, j, time_limit=time_cap)
        except ksa.TimeLimitExceeded:
            return LabelRecord(
                id=inst.id, subclass=subclass or inst.kind, metric=metric,
                efforts=(), label=None,
            )
        frontiers.append(front)
        efforts.append(Effort(front.time_s, front.ilp_count, front.nodes))
    base = frontiers[0].point_set()
    for front in frontiers[1:]:
        if front.point_set() != base:
            raise FrontierMismatchError(
                f"{inst.id}: projection {front.projection} found "
                f"{len(front.points)} points, projection 1 found {len(base)}"
            )
    values = [e.get(metric) for e in efforts]
    label = 1 + min(range(inst.p), key=lambda i: (values[i], i))
    return LabelRecord(
        id=inst.id, subclass=subclass or inst.kind, metric=metric,
        efforts=tuple(efforts), label=label,
    )


def reduce_set(records, metric: str | None = None):
    """Drop tie cases: instances whose best-to-worst effort range is small.

    Per subclass, an instance survives only if its range exceeds the
    subclass minimum plus the sample (n-1) standard deviation of ranges.
    Subclasses with fewer than two labeled records pass through untouched.
    """
    by_subclass: dict[str, list[LabelRecord]] = {}
    for rec in records:
        if rec.label is None:
            continue
        by_subclass.setdefault(rec.subclass, []).append(rec)

    kept_ids = set()
    for subclass, recs in by_subclass.items():
        if len(recs) < 2:
            kept_ids.update(r.id for r in recs)
            continue
        ranges = {}
        for r in recs:
            vals = r.metric_values(metric)
            ranges[r.id] = max(vals) - min(vals)
        vals = np.array(list(ranges.values()))
        threshold = float(vals.min()) + float(vals.std(ddof=1))
        kept_ids.update(rid for rid, rng in ranges.items() if rng > threshold)
    return [r for r in records if r.id in kept_ids]


@dataclass(frozen=True)
class SubclassMetrics:
    subclass: str
    count: int
    accuracy: float
    ml_vs_rand: float
    best_vs_rand: float
    ratio: float


@dataclass(frozen=True)
class EvaluationReport:
    metric: str
    rows: tuple[SubclassMetrics, ...]
    overall: SubclassMetrics
    n_before_reduction: int
    n_after_reduction: int

    def to_dict(self) -> dict:
        def row(r):
            return {
                "subclass": r.subclass, "count": r.count, "accuracy": r.accuracy,
                "ml_vs_rand": r.ml_vs_rand, "best_vs_rand": r.best_vs_rand,
                "ratio": r.ratio,
            }

        return {
            "metric": self.metric,
            "rows": [row(r) for r in self.rows],
            "overall": row(self.overall),
            "n_before_reduction": self.n_before_reduction,
            "n_after_reduction": self.n_after_reduction,
        }

    @classmethod
    def from_dict(cls, d) -> "EvaluationReport":
        def row(r):
            return SubclassMetrics(
                subclass=r["subclass"], count=int(r["count"]),
                accuracy=float(r["accuracy"]), ml_vs_rand=float(r["ml_vs_rand"]),
                best_vs_rand=float(r["best_vs_rand"]), ratio=float(r["ratio"]),
            )

        return cls(
            metric=d["metric"],
            rows=tuple(row(r) for r in d["rows"]),
            overall=row(d["overall"]),
            n_before_reduction=int(d["n_before_reduction"]),
            n_after_reduction=int(d["n_after_reduction"]),
        )


def _aggregate(subclass, items, metric):
    """items: list of (record, predicted label)."""
    n = len(items)
    correct = 0
    t_rand = t_ml = t_best = 0.0
    for rec, pred in items:
        vals = rec.metric_values(metric)
        best = min(vals)
        if vals[pred - 1] == best:
            correct += 1
        t_rand += sum(vals) / len(vals)
        t_ml += vals[pred - 1]
        t_best += best
    ml_vs_rand = 100.0 * (t_rand - t_ml) / t_rand if t_rand else 0.0
    best_vs_rand = 100.0 * (t_rand - t_best) / t_rand if t_rand else 0.0
    ratio = ml_vs_rand / best_vs_rand if best_vs_rand else 0.0
    return SubclassMetrics(
        subclass=subclass, count=n, accuracy=correct / n,
        ml_vs_rand=ml_vs_rand, best_vs_rand=best_vs_rand, ratio=ratio,
    )


def evaluate(model, records, raw_features, metric: str | None = None,
             n_before: int | None = None) -> EvaluationReport:
    """Score a model on labeled records with their raw feature vectors.

    ``raw_features`` maps instance id to the unnormalized feature vector;
    the model applies its own normalization.  A prediction counts as
    correct when it attains the minimum metric value (any member of the
    argmin set is a success).  Per subclass and overall: with T_rand the
    total metric under uniform random projection (mean over j per record),
    T_ML under the predicted projection, and T_best under the argmin,
    ML-vs-Rand = 100 (T_rand - T_ML) / T_rand and Best-vs-Rand likewise
    with T_best; ratio = ML-vs-Rand / Best-vs-Rand (0 when the denominator
    vanishes).
    """
    records = [r for r in records if r.label is not None]
    if not records:
        raise ValueError("no labeled records to evaluate")
    metric = metric or records[0].metric
    pairs = []
    for rec in records:
        pred = learn.predict_raw(model, raw_features[rec.id])
        pairs.append((rec, pred))
    by_subclass: dict[str, list] = {}
    for rec, pred in pairs:
        by_subclass.setdefault(rec.subclass, []).append((rec, pred))
    rows = tuple(
        _aggregate(sub, items, metric)
        for sub, items in sorted(by_subclass.items())
    )
    overall = _aggregate("overall", pairs, metric)
    return EvaluationReport(
        metric=metric, rows=rows, overall=overall,
        n_before_reduction=n_before if n_before is not None else len(records),
        n_after_reduction=len(records),
    )


def render_report(report: EvaluationReport) -> str:
    """Plain text table in the shape of the paper-style summaries."""
    header = (
        f"{'Subclass':<12} {'N':>5} {'Accuracy':>9} {'ML vs Rand':>11} "
        f"{'Best vs Rand':>13} {'Ratio':>7}"
    )
    lines = [f"metric: {report.metric}", header, "-" * len(header)]
    for r in list(report.rows) + [report.overall]:
        lines.append(
            f"{r.subclass:<12} {r.count:>5} {100 * r.accuracy:>8.2f}% "
            f"{r.ml_vs_rand:>10.2f}% {r.best_vs_rand:>12.2f}% {r.ratio:>7.3f}"
        )
    lines.append(
        f"records: {report.n_after_reduction} evaluated"
        f" / {report.n_before_reduction} before reduction"
    )
    return "\n".join(lines)


def generate_planted(n: int, seed: int, p: int = 3) -> MoblpInstance:
    """Knapsack-shaped instance with a recoverable best-projection signal.

    One objective row is a positively scaled copy of another plus a
    constant shift and small integer noise; the third is independent.
    Measured over node counts, the cheapest projection falls inside the
    correlated pair on the vast majority of draws and on the scaled member
    most of the time, while the canonical position of each role varies
    with the drawn magnitudes.  The proportionality between the two rows
    is visible to the max-normalized ratio feature families, which makes
    the label statistically recoverable from static features.
    """
    if p != 3:
        raise ValueError("the planted corpus is tri-objective")
    rng = np.random.default_rng([int(seed), 7])
    weights = rng.integers(1, 101, size=n)
    capacity = math.ceil(int(weights.sum()) / 2)

    m_base = int(rng.choice(np.arange(40, 141, 20)))
    m_indep = int(rng.choice(np.arange(40, 261, 20)))
    lam = int(rng.integers(2, 4))
    shift = int(rng.integers(40, 81))
    base = -rng.integers(1, 2 * m_base, size=n)
    scaled = lam * base - shift + rng.integers(-2, 3, size=n)
    indep = -rng.integers(1, 2 * m_indep, size=n)
    rows = [base, scaled, indep]
    order = rng.permutation(3)
    C = np.vstack([rows[k] for k in order]).astype(np.float64)

    return MoblpInstance(
        p=3, n=n, m=1,
        C=C,
        A=weights.reshape(1, n).astype(np.float64),
        b=np.array([float(capacity)]),
        sense=(LE,),
        kind=KIND_GENERIC,
        id=f"PL-n{n}-s{seed}",
        seed=seed,
    )


@dataclass(frozen=True)
class RunConfig:
    """Settings for an end-to-end experiment; parsed from key = value text."""

    problem: str = "kp"  # kp | ap | mixed | planted
    kp_sizes: tuple[int, ...] = (10, 12)
    ap_sizes: tuple[int, ...] = (4, 5)
    planted_sizes: tuple[int, ...] = (12,)
    count: int = 100
    corpus_seed: int = 1
    kp_range: tuple[int, int] = (1, 100)
    ap_range: tuple[int, int] = (1, 20)
    metric: str = "nodes"
    time_cap: float | None = None
    split_seed: int = 7
    train_fraction: float = 0.8
    setting: str = "complete"
    c_reg: float = learn.DEFAULT_C_REG
    tol: float = learn.DEFAULT_TOL
    train_seed: int = 0
    max_epochs: int = learn.DEFAULT_MAX_EPOCHS
    jobs: int = 1

    def validate(self):
        if self.problem not in ("kp", "ap", "mixed", "planted"):
            raise ValueError(f"unknown problem {self.problem!r}")
        if self.metric not in METRICS:
            raise ValueError(f"metric must be one of {METRICS}")
        if self.setting not in SETTINGS:
            raise ValueError(f"setting must be one of {SETTINGS}")
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must be in (0, 1)")
        return self


_CONFIG_PARSERS = {
    "problem": str,
    "kp_sizes": lambda s: tuple(int(v) for v in s.split(",") if v.strip()),
    "ap_sizes": lambda s: tuple(int(v) for v in s.split(",") if v.strip()),
    "planted_sizes": lambda s: tuple(int(v) for v in s.split(",") if v.strip()),
    "count": int,
    "corpus_seed": int,
    "kp_range": lambda s: tuple(int(v) for v in s.split(",")),
    "ap_range": lambda s: tuple(int(v) for v in s.split(",")),
    "metric": str,
    "time_cap": lambda s: None if s.lower() in ("none", "") else float(s),
    "split_seed": int,
    "train_fraction": float,
    "setting": str,
    "c_reg": float,
    "tol": float,
    "train_seed": int,
    "max_epochs": int,
    "jobs": int,
}


def read_config(path) -> RunConfig:
    """Parse ``key = value`` lines; '#' comments and blank lines ignored."""
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, _, val = line.partition("=")
            key = key.strip()
            if key not in _CONFIG_PARSERS:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            values[key] = _CONFIG_PARSERS[key](val.strip())
    return RunConfig(**values).validate()


def atomic_write(path, text: str) -> None:
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _fingerprint(payload: dict) -> str:
    return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()[:16]


def build_corpus(config: RunConfig):
    """Deterministic canonical corpus: list of (subclass, instance)."""
    out = []
    plans = []
    if config.problem in ("kp", "mixed"):
        plans += [("KP", n) for n in config.kp_sizes]
    if config.problem in ("ap", "mixed"):
        plans += [("AP", r) for r in config.ap_sizes]
    if config.problem == "planted":
        plans += [("PL", n) for n in config.planted_sizes]
    for kind, size in plans:
        for i in range(config.count):
            seed = int(
                np.random.SeedSequence(
                    [config.corpus_seed, {"KP": 0, "AP": 1, "PL": 2}[kind], size, i]
                ).generate_state(1)[0]
            )
            if kind == "KP":
                inst = generate_kp(size, 3, seed=seed, coeff_range=config.kp_range)
                subclass = f"KP-{size}"
            elif kind == "AP":
                inst = generate_ap(size, 3, seed=seed, coeff_range=config.ap_range)
                subclass = f"AP-{size}"
            else:
                inst = generate_planted(size, seed=seed)
                subclass = f"PL-{size}"
            canon, _ = preorder(inst)
            canon = canon.replace(id=f"{subclass}-i{i:04d}")
            out.append((subclass, canon))
    return out


def write_labels(path, records) -> None:
    lines = ["id\tsubclass\tmetric\t" + "\t".join(
        f"{f}_{j}" for j in (1, 2, 3) for f in ("time", "ilps", "nodes")
    ) + "\tlabel"]
    for r in records:
        cells = [r.id, r.subclass, r.metric]
        if r.efforts:
            for e in r.efforts:
                cells += [repr(e.time_s), str(e.ilp_count), str(e.nodes)]
        else:
            cells += [""] * 9
        cells.append("" if r.label is None else str(r.label))
        lines.append("\t".join(cells))
    atomic_write(path, "\n".join(lines) + "\n")


def read_labels(path):
    records = []
    with open(path) as fh:
        header = fh.readline()
        if not header.startswith("id\t"):
            raise ValueError(f"{path}: not a labels file")
        for line in fh:
            cells = line.rstrip("\n").split("\t")
            if len(cells) != 13:
                raise ValueError(f"{path}: bad row {cells[:1]}")
            if cells[3] == "":
                efforts = ()
            else:
                efforts = tuple(
                    Effort(float(cells[3 + 3 * j]), int(cells[4 + 3 * j]),
                           int(cells[5 + 3 * j]))
                    for j in range(3)
                )
            records.append(
                LabelRecord(
                    id=cells[0], subclass=cells[1], metric=cells[2],
                    efforts=efforts,
                    label=None if cells[12] == "" else int(cells[12]),
                )
            )
    return records


def write_feature_matrix(path, p, rows) -> None:
    """rows: iterable of (id, raw feature vector)."""
    names = feature_names(p)
    lines = ["id," + ",".join(names)]
    for rid, vec in rows:
        lines.append(rid + "," + ",".join(repr(float(v)) for v in vec))
    atomic_write(path, "\n".join(lines) + "\n")


def read_feature_matrix(path):
    with open(path) as fh:
        header = fh.readline().rstrip("\n").split(",")
        if header[0] != "id":
            raise ValueError(f"{path}: not a feature matrix file")
        ids = []
        vals = []
        for line in fh:
            cells = line.rstrip("\n").split(",")
            if len(cells) != len(header):
                raise ValueError(f"{path}: row width mismatch at {cells[0]!r}")
            ids.append(cells[0])
            vals.append([float(v) for v in cells[1:]])
    return ids, np.array(vals), tuple(header[1:])


def _label_worker(args):
    path, metric, time_cap, subclass = args
    inst = read_instance(path)
    return label_instance(inst, metric=metric, time_cap=time_cap, subclass=subclass)


def label_corpus(entries, metric, time_cap=None, jobs=1):
    """entries: list of (subclass, path).  Parallel only for node/ILP metrics:
    timed runs must not share cores with other timed runs."""
    work = [(str(path), metric, time_cap, subclass) for subclass, path in entries]
    if jobs > 1 and metric != "time_s":
        with Pool(processes=jobs) as pool:
            return pool.map(_label_worker, work)
    return [_label_worker(w) for w in work]


def split_records(records, split_seed, train_fraction=0.8):
    """Stratified by subclass: each subclass is permuted by the seeded rng
    and cut at the train fraction."""
    by_subclass: dict[str, list[LabelRecord]] = {}
    for rec in records:
        by_subclass.setdefault(rec.subclass, []).append(rec)
    train, test = [], []
    for subclass in sorted(by_subclass):
        recs = sorted(by_subclass[subclass], key=lambda r: r.id)
        rng = np.random.default_rng([split_seed] + [ord(c) for c in subclass])
        order = rng.permutation(len(recs))
        cut = int(math.floor(train_fraction * len(recs)))
        train += [recs[i] for i in order[:cut]]
        test += [recs[i] for i in order[cut:]]
    return train, test


@dataclass
class ExperimentResult:
    config: RunConfig
    report: EvaluationReport
    model_path: str
    report_path: str
    selected_k: int
    selected_error: float


def run_experiment(config: RunConfig, outdir, progress=print) -> ExperimentResult:
    """Full pipeline with per-stage checkpoints in ``outdir``.

    Stages: corpus generation, labeling, feature extraction, training
    (subset frontier plus phase-two selection on the training split only),
    evaluation on the held-out split.  Each stage writes its artifact and a
    fingerprint of the parameters it depends on; a rerun with matching
    fingerprints loads the artifact instead of recomputing.
    """
    config.validate()
    outdir = str(outdir)
    os.makedirs(outdir, exist_ok=True)
    def cfg_fmt(v):
        if isinstance(v, tuple):
            return ",".join(str(x) for x in v)
        return "none" if v is None else str(v)

    atomic_write(
        os.path.join(outdir, "config.txt"),
        "".join(f"{k} = {cfg_fmt(v)}\n" for k, v in sorted(vars(config).items())),
    )
    inst_dir = os.path.join(outdir, "instances")
    os.makedirs(inst_dir, exist_ok=True)
    stamp_path = os.path.join(outdir, "stamps.json")
    stamps = {}
    if os.path.exists(stamp_path):
        with open(stamp_path) as fh:
            stamps = json.load(fh)

    def stage_current(name, fp, *paths):
        return stamps.get(name) == fp and all(os.path.exists(p) for p in paths)

    def commit(name, fp):
        stamps[name] = fp
        atomic_write(stamp_path, json.dumps(stamps, indent=1))

    # stage 1: corpus
    corpus_fp = _fingerprint({
        "problem": config.problem, "kp_sizes": config.kp_sizes,
        "ap_sizes": config.ap_sizes, "planted_sizes": config.planted_sizes,
        "count": config.count, "corpus_seed": config.corpus_seed,
        "kp_range": config.kp_range, "ap_range": config.ap_range,
    })
    manifest_path = os.path.join(outdir, "manifest.tsv")
    if not stage_current("corpus", corpus_fp, manifest_path):
        progress("stage corpus: generating instances")
        corpus = build_corpus(config)
        lines = ["id\tsubclass\tpath"]
        for subclass, inst in corpus:
            path = os.path.join(inst_dir, f"{inst.id}.moblp")
            write_instance(inst, path)
            lines.append(f"{inst.id}\t{subclass}\t{path}")
        atomic_write(manifest_path, "\n".join(lines) + "\n")
        commit("corpus", corpus_fp)
    entries = []
    with open(manifest_path) as fh:
        fh.readline()
        for line in fh:
            rid, subclass, path = line.rstrip("\n").split("\t")
            entries.append((subclass, path))

    # stage 2: labels
    labels_fp = _fingerprint({
        "corpus": corpus_fp, "metric": config.metric, "time_cap": config.time_cap,
    })
    labels_path = os.path.join(outdir, "labels.tsv")
    if not stage_current("labels", labels_fp, labels_path):
        progress(f"stage labels: solving {len(entries)} instances x3 projections")
        records = label_corpus(
            entries, config.metric, time_cap=config.time_cap, jobs=config.jobs
        )
        write_labels(labels_path, records)
        commit("labels", labels_fp)
    records = read_labels(labels_path)

    # stage 3: features
    features_fp = _fingerprint({"corpus": corpus_fp})
    features_path = os.path.join(outdir, "features.csv")
    if not stage_current("features", features_fp, features_path):
        progress("stage features: extracting")
        rows = []
        for subclass, path in entries:
            inst = read_instance(path)
            rows.append((inst.id, extract_features(inst).values))
        write_feature_matrix(features_path, 3, rows)
        commit("features", features_fp)
    ids, raw_matrix, _ = read_feature_matrix(features_path)
    raw_by_id = {rid: raw_matrix[i] for i, rid in enumerate(ids)}

    # stage 4: split, reduce, train
    model_fp = _fingerprint({
        "labels": labels_fp, "features": features_fp,
        "split_seed": config.split_seed, "train_fraction": config.train_fraction,
        "setting": config.setting, "c_reg": config.c_reg, "tol": config.tol,
        "train_seed": config.train_seed, "max_epochs": config.max_epochs,
    })
    model_path = os.path.join(outdir, "model.json")
    labeled = [r for r in records if r.label is not None]
    train_recs, test_recs = split_records(
        labeled, config.split_seed, config.train_fraction
    )
    n_test_before = len(test_recs)
    if config.setting in ("reduced-test", "reduced-both"):
        test_recs = reduce_set(test_recs)
    if config.setting == "reduced-both":
        train_recs = reduce_set(train_recs)

    if not stage_current("model", model_fp, model_path):
        progress(
            f"stage train: {len(train_recs)} training records, "
            f"subset search over features"
        )
        norm = fit_normalizer(np.vstack([raw_by_id[r.id] for r in train_recs]))
        X_train = apply_normalizer(
            norm, np.vstack([raw_by_id[r.id] for r in train_recs])
        )
        y_train = np.array([r.label for r in train_recs])
        frontier = learn.subset_frontier(
            X_train, y_train, c_reg=config.c_reg, tol=config.tol,
            seed=config.train_seed, max_epochs=config.max_epochs, p=3,
        )
        selected = learn.select_model(frontier)
        model = replace(selected.point.model, norm=norm)
        learn.save_model(
            model_path, model,
            provenance={
                "k": selected.point.k,
                "error": selected.point.error,
                "distance": selected.distance,
                "setting": config.setting,
                "split_seed": config.split_seed,
                "corpus_seed": config.corpus_seed,
                "metric": config.metric,
                "n_train": len(train_recs),
                "frontier": [[pt.k, pt.error] for pt in frontier.points],
            },
        )
        commit("model", model_fp)
    model = learn.load_model(model_path)
    with open(model_path) as fh:
        provenance = json.load(fh)["provenance"]

    # stage 5: evaluate
    report_fp = _fingerprint({"model": model_fp})
    report_path = os.path.join(outdir, "report.json")
    if not stage_current("report", report_fp, report_path):
        progress(f"stage evaluate: {len(test_recs)} test records")
        report = evaluate(
            model, test_recs, raw_by_id, metric=config.metric,
            n_before=n_test_before,
        )
        atomic_write(report_path, json.dumps(report.to_dict(), indent=1))
        atomic_write(os.path.join(outdir, "report.txt"), render_report(report) + "\n")
        commit("report", report_fp)
    with open(report_path) as fh:
        report = EvaluationReport.from_dict(json.load(fh))

    return ExperimentResult(
        config=config,
        report=report,
        model_path=model_path,
        report_path=report_path,
        selected_k=int(provenance.get("k", -1)),
        selected_error=float(provenance.get("error", -1.0)),
    )
