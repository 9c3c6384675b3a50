"""Command line interface.

Subcommands mirror the pipeline stages: generate instances, solve one
instance under one projection, label a directory, extract features, train
(subset search plus model selection), evaluate, render a report, or run
the whole experiment from a config file.  Objective indices on the command
line are 1-based, matching the label domain.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import harness, ksa, learn
from .features import apply_normalizer, extract_features, fit_normalizer
from .instance import generate_ap, generate_kp, preorder, read_instance, write_instance


def cmd_generate(args):
    os.makedirs(args.out, exist_ok=True)
    for i in range(args.count):
        seed = args.seed + i
        if args.kind == "kp":
            inst = generate_kp(args.size, args.objectives, seed=seed)
        elif args.kind == "ap":
            inst = generate_ap(args.size, args.objectives, seed=seed)
        else:
            inst = harness.generate_planted(args.size, seed=seed)
        if args.preorder:
            inst, _ = preorder(inst)
        path = os.path.join(args.out, f"{inst.id}.moblp")
        write_instance(inst, path)
        print(path)
    return 0


def cmd_solve(args):
    inst = read_instance(args.instance)
    if args.preorder:
        inst, _ = preorder(inst)
    front = ksa.ksa_solve(inst, args.projection, time_limit=args.time_limit)
    out = args.out or f"{os.path.splitext(args.instance)[0]}.j{args.projection}.nd"
    ksa.write_frontier(front, out)
    print(
        f"{inst.id or args.instance}: {len(front.points)} points, "
        f"{front.ilp_count} ILPs, {front.nodes} nodes, {front.time_s:.3f}s -> {out}"
    )
    return 0


def _instance_paths(directory):
    paths = sorted(
        os.path.join(directory, f)
        for f in os.listdir(directory)
        if f.endswith(".moblp")
    )
    if not paths:
        raise SystemExit(f"no .moblp files under {directory}")
    return paths


def cmd_label(args):
    paths = _instance_paths(args.instances)
    entries = []
    for path in paths:
        inst = read_instance(path)
        canon, _ = preorder(inst)
        if not np.array_equal(canon.C, inst.C):
            raise SystemExit(
                f"{path}: objectives are not in canonical order; "
                "regenerate with --preorder or rewrite the file"
            )
        entries.append((inst.kind, path))
    records = harness.label_corpus(
        entries, args.metric, time_cap=args.time_cap, jobs=args.jobs
    )
    harness.write_labels(args.out, records)
    labeled = sum(1 for r in records if r.label is not None)
    print(f"labeled {labeled}/{len(records)} instances -> {args.out}")
    return 0


def cmd_features(args):
    rows = []
    p = None
    for path in _instance_paths(args.instances):
        inst = read_instance(path)
        canon, _ = preorder(inst)
        if not np.array_equal(canon.C, inst.C):
            raise SystemExit(f"{path}: objectives are not in canonical order")
        p = inst.p
        rows.append((inst.id or os.path.basename(path), extract_features(inst).values))
    harness.write_feature_matrix(args.out, p, rows)
    print(f"wrote {len(rows)} x {len(rows[0][1])} feature matrix -> {args.out}")
    return 0


def cmd_train(args):
    ids, raw, _ = harness.read_feature_matrix(args.features)
    records = {r.id: r for r in harness.read_labels(args.labels)}
    rows, labels = [], []
    for i, rid in enumerate(ids):
        rec = records.get(rid)
        if rec is not None and rec.label is not None:
            rows.append(raw[i])
            labels.append(rec.label)
    if len(rows) < 2:
        raise SystemExit("need at least two labeled instances to train")
    raw_mat = np.vstack(rows)
    norm = fit_normalizer(raw_mat)
    X = apply_normalizer(norm, raw_mat)
    y = np.array(labels)
    frontier = learn.subset_frontier(
        X, y, c_reg=args.c_reg, tol=args.tol, seed=args.seed, p=3,
        progress=(lambda k, e: print(f"  k={k:4d} error={e:.4f}", file=sys.stderr))
        if args.verbose
        else None,
    )
    selected = learn.select_model(frontier)
    from dataclasses import replace

    model = replace(selected.point.model, norm=norm)
    learn.save_model(
        args.out, model,
        provenance={
            "k": selected.point.k,
            "error": selected.point.error,
            "distance": selected.distance,
            "n_train": len(labels),
            "frontier": [[pt.k, pt.error] for pt in frontier.points],
        },
    )
    print(
        f"selected {selected.point.k} features, training error "
        f"{selected.point.error:.4f} -> {args.out}"
    )
    return 0


def cmd_evaluate(args):
    model = learn.load_model(args.model)
    ids, raw, _ = harness.read_feature_matrix(args.features)
    raw_by_id = {rid: raw[i] for i, rid in enumerate(ids)}
    records = [r for r in harness.read_labels(args.labels) if r.label is not None]
    if args.reduce:
        kept = harness.reduce_set(records)
        report = harness.evaluate(
            model, kept, raw_by_id, metric=args.metric, n_before=len(records)
        )
    else:
        report = harness.evaluate(model, records, raw_by_id, metric=args.metric)
    with open(args.out, "w") as fh:
        json.dump(report.to_dict(), fh, indent=1)
    print(harness.render_report(report))
    return 0


def cmd_report(args):
    with open(args.report) as fh:
        report = harness.EvaluationReport.from_dict(json.load(fh))
    text = harness.render_report(report)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    print(text)
    return 0


def cmd_run(args):
    config = harness.read_config(args.config)
    result = harness.run_experiment(config, args.out)
    print(harness.render_report(result.report))
    print(
        f"model: {result.model_path} (k={result.selected_k}, "
        f"training error {result.selected_error:.4f})"
    )
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="moblp",
        description="Multi-objective binary linear programming toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write random instances")
    g.add_argument("--kind", choices=["kp", "ap", "planted"], required=True)
    g.add_argument("--size", type=int, required=True,
                   help="item count for kp/planted, grid size for ap")
    g.add_argument("--objectives", type=int, default=3)
    g.add_argument("--count", type=int, default=1)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--preorder", action="store_true",
                   help="canonicalize objective order before writing")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("solve", help="frontier of one instance, one projection")
    s.add_argument("--instance", required=True)
    s.add_argument("-j", "--projection", type=int, required=True,
                   help="1-based objective to project")
    s.add_argument("--preorder", action="store_true")
    s.add_argument("--time-limit", type=float, default=None)
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_solve)

    l = sub.add_parser("label", help="label a directory of canonical instances")
    l.add_argument("--instances", required=True)
    l.add_argument("--metric", choices=list(harness.METRICS), default="nodes")
    l.add_argument("--time-cap", type=float, default=None)
    l.add_argument("--jobs", type=int, default=1)
    l.add_argument("--out", required=True)
    l.set_defaults(func=cmd_label)

    f = sub.add_parser("features", help="feature matrix of canonical instances")
    f.add_argument("--instances", required=True)
    f.add_argument("--out", required=True)
    f.set_defaults(func=cmd_features)

    t = sub.add_parser("train", help="subset search and model selection")
    t.add_argument("--features", required=True)
    t.add_argument("--labels", required=True)
    t.add_argument("--c-reg", type=float, default=learn.DEFAULT_C_REG)
    t.add_argument("--tol", type=float, default=learn.DEFAULT_TOL)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--verbose", action="store_true")
    t.add_argument("--out", required=True)
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("evaluate", help="score a model on labeled instances")
    e.add_argument("--model", required=True)
    e.add_argument("--features", required=True)
    e.add_argument("--labels", required=True)
    e.add_argument("--metric", choices=list(harness.METRICS), default=None)
    e.add_argument("--reduce", action="store_true",
                   help="drop tie cases before scoring")
    e.add_argument("--out", required=True)
    e.set_defaults(func=cmd_evaluate)

    r = sub.add_parser("report", help="render a report file as a text table")
    r.add_argument("--report", required=True)
    r.add_argument("--out", default=None)
    r.set_defaults(func=cmd_report)

    x = sub.add_parser("run", help="full pipeline from a config file")
    x.add_argument("--config", required=True)
    x.add_argument("--out", required=True)
    x.set_defaults(func=cmd_run)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
