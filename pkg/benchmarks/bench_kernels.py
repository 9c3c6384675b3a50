"""Compare the compiled kernels against their pure-Python twins.

Times three workloads:
  * the bounded-variable simplex kernel on LP relaxations shaped like the
    branch-and-bound nodes the search actually solves (instance rows plus
    criterion-space cut rows, assorted variable fixings);
  * one full criterion-space run (all three projections) of a mid-size
    knapsack instance, which exercises simplex through branch and bound;
  * the multiclass SVM dual sweep on a realistic feature matrix.

Usage: python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import time

import numpy as np

from moblp._senses import LE
from moblp.instance import generate_ap, generate_kp, preorder
from moblp.simplex import _kernel_py
from moblp.simplex.core import make_workspace

try:
    from moblp.simplex import _kernel_cy
except ImportError:
    _kernel_cy = None

try:
    from moblp import _learn_cy
except ImportError:
    _learn_cy = None

from moblp.learn import _run_epoch_py


def lp_workload():
    """A bag of node-shaped LPs: (W, b, cost, lb, ub, n_struct) tuples."""
    rng = np.random.default_rng(0)
    problems = []
    for seed in range(40):
        inst = generate_kp(14, 3, seed=seed) if seed % 2 else generate_ap(4, 3, seed=seed)
        inst, _ = preorder(inst)
        others = [1, 2]
        A = np.vstack([inst.A, inst.C[others], inst.C[0:1]])
        sense = inst.sense + (LE,) * 3
        ws = make_workspace(A, sense)
        cuts = np.array([
            float(np.floor(inst.C[i].min() * 0.25)) for i in (1, 2, 0)
        ])
        b = np.concatenate([inst.b, cuts])
        cost = np.zeros(ws.n + ws.m)
        cost[: ws.n] = inst.C[0]
        lb = np.zeros(ws.n)
        ub = np.ones(ws.n)
        for j in range(ws.n):  # a sprinkle of branch fixings
            r = rng.random()
            if r < 0.15:
                lb[j] = ub[j] = 0.0
            elif r < 0.25:
                lb[j] = ub[j] = 1.0
        lbf = np.concatenate([lb, ws.slack_lb])
        ubf = np.concatenate([ub, ws.slack_ub])
        problems.append((ws.W, b, cost, lbf, ubf, ws.n))
    return problems


def time_simplex(kernel, problems, repeat):
    t0 = time.perf_counter()
    sink = 0.0
    for _ in range(repeat):
        for W, b, cost, lb, ub, ns in problems:
            status, x, obj, iters = kernel.solve_bounded(W, b, cost, lb, ub, ns)
            sink += obj if status == 0 else 1.0
    return time.perf_counter() - t0, sink


def time_ksa(env_value, repeat):
    """Fork-free backend switch is impossible after import, so run a child."""
    import subprocess
    import sys

    code = (
        "import time; from moblp.instance import generate_kp, preorder; "
        "from moblp import ksa; inst, _ = preorder(generate_kp(13, 3, seed=5)); "
        "t0 = time.perf_counter(); "
        f"[ksa.ksa_solve(inst, j) for _ in range({repeat}) for j in (1, 2, 3)]; "
        "print(time.perf_counter() - t0)"
    )
    env = dict(__import__("os").environ)
    if env_value:
        env["MOBLP_PURE_PYTHON"] = "1"
    else:
        env.pop("MOBLP_PURE_PYTHON", None)
    out = subprocess.run(
        [sys.executable, "-c", code], capture_output=True, text=True, env=env
    )
    if out.returncode != 0:
        raise RuntimeError(out.stderr)
    return float(out.stdout.strip())


def msvm_workload():
    rng = np.random.default_rng(1)
    N, k, p = 240, 313, 3
    X = np.clip(rng.normal(size=(N, k)), -1.0, 1.0)
    y0 = rng.integers(0, p, size=N)
    U = np.zeros((N, p))
    U[np.arange(N), y0] = 5e4
    sq = (X * X).sum(axis=1)
    perm = np.ascontiguousarray(rng.permutation(N))
    return X, np.ascontiguousarray(y0), U, sq, perm, p


def time_epoch(fn, workload, repeat):
    X, y0, U, sq, perm, p = workload
    alpha = np.zeros((X.shape[0], p))
    W = np.zeros((p, X.shape[1]))
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn(X, y0, U, alpha, W, sq, perm)
    return time.perf_counter() - t0


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    print(f"{'workload':<34} {'python':>10} {'cython':>10} {'speedup':>8}")
    print("-" * 66)

    problems = lp_workload()
    t_py, sink_py = time_simplex(_kernel_py, problems, args.repeat)
    row = f"{'simplex kernel (160 node LPs)':<34} {t_py:>9.3f}s"
    if _kernel_cy is not None:
        t_cy, sink_cy = time_simplex(_kernel_cy, problems, args.repeat)
        assert abs(sink_py - sink_cy) < 1e-6 * (1 + abs(sink_py)), "value drift"
        row += f" {t_cy:>9.3f}s {t_py / t_cy:>7.1f}x"
    else:
        row += f" {'missing':>10} {'-':>8}"
    print(row)

    t_py = time_ksa(env_value=True, repeat=1)
    row = f"{'criterion-space search (KP n=13)':<34} {t_py:>9.3f}s"
    try:
        t_cy = time_ksa(env_value=False, repeat=1)
        row += f" {t_cy:>9.3f}s {t_py / t_cy:>7.1f}x"
    except RuntimeError:
        row += f" {'missing':>10} {'-':>8}"
    print(row)

    workload = msvm_workload()
    t_py = time_epoch(_run_epoch_py, workload, args.repeat * 4)
    row = f"{'msvm dual sweep (240 x 313)':<34} {t_py:>9.3f}s"
    if _learn_cy is not None:
        t_cy = time_epoch(_learn_cy.run_epoch, workload, args.repeat * 4)
        row += f" {t_cy:>9.3f}s {t_py / t_cy:>7.1f}x"
    else:
        row += f" {'missing':>10} {'-':>8}"
    print(row)


if __name__ == "__main__":
    main()
