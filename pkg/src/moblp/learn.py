"""Multiclass SVM projection chooser and feature-subset selection.

The classifier is a linear Crammer-Singer machine: one weight vector per
objective, prediction by argmax of the scores.  Training runs block
coordinate ascent on the dual, one block per example, solving each block
exactly with the sorted water-filling step; it stops when the largest
per-example KKT violation falls below ``tol`` (the margin is 1, so the
violation is already on a relative scale) or after ``max_epochs`` sweeps.

Feature selection approximates the trade-off between feature count and
training error: starting from all usable features, repeatedly drop the
feature whose weight column has the smallest standard deviation across
classes and retrain, emitting one (count, error) point per step.  The
second phase filters dominated points and picks the one nearest the ideal
corner after endpoint normalization.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from .features import NormalizationParams, apply_normalizer, feature_names

if os.environ.get("MOBLP_PURE_PYTHON"):
    _epoch_cy = None
else:
    try:
        from ._learn_cy import run_epoch as _epoch_cy  # type: ignore[attr-defined]
    except ImportError:
        _epoch_cy = None

DEFAULT_C_REG = 5e4
DEFAULT_TOL = 0.1
DEFAULT_MAX_EPOCHS = 1000


def backend() -> str:
    """Name of the active training kernel: ``"cython"`` or ``"python"``."""
    return "python" if _epoch_cy is None else "cython"


@dataclass(frozen=True)
class MsvmModel:
    """Linear multiclass model over a feature subset.

    ``W`` has one row per class label 1..p and one column per entry of
    ``active`` (indices into the full feature vector, which must already be
    normalized with ``norm`` when predicting from raw features).
    """

    p: int
    W: np.ndarray
    active: tuple[int, ...]
    c_reg: float
    tol: float
    seed: int
    norm: NormalizationParams | None = None

    def __post_init__(self):
        if self.W.shape != (self.p, len(self.active)):
            raise ValueError(
                f"W has shape {self.W.shape}, expected {(self.p, len(self.active))}"
            )

    def scores(self, fv: np.ndarray) -> np.ndarray:
        fv = np.asarray(fv, dtype=np.float64)
        if fv.shape[-1] != len(self.active):
            if fv.shape[-1] < max(self.active, default=-1) + 1:
                raise ValueError(
                    f"feature vector of length {fv.shape[-1]} cannot index "
                    f"active set of {len(self.active)} features"
                )
            fv = fv[..., list(self.active)]
        return fv @ self.W.T


def train_msvm(
    X: np.ndarray,
    y,
    active=None,
    c_reg: float = DEFAULT_C_REG,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
    max_epochs: int = DEFAULT_MAX_EPOCHS,
    p: int | None = None,
) -> MsvmModel:
    """Fit the Crammer-Singer model on normalized features X and labels 1..p.

    ``active`` restricts training to a subset of columns (defaults to all).
    ``p`` is the class count; it defaults to the largest label seen but
    should be passed explicitly when a class might be absent from the
    training split.  The example visit order is reshuffled each epoch from
    ``seed``, so the result is a pure function of its arguments.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("training set must be a nonempty 2-D matrix")
    if y.shape != (X.shape[0],):
        raise ValueError("labels must align with the rows of X")
    if y.min() < 1:
        raise ValueError("labels must lie in 1..p")
    if p is None:
        p = max(int(y.max()), 2)
    elif int(y.max()) > p:
        raise ValueError(f"label {int(y.max())} out of range 1..{p}")

    if active is None:
        active = tuple(range(X.shape[1]))
    else:
        active = tuple(int(a) for a in active)
    Xa = np.ascontiguousarray(X[:, list(active)])
    N, k = Xa.shape

    W = np.zeros((p, k))
    alpha = np.zeros((N, p))
    sqnorm = (Xa * Xa).sum(axis=1)
    U = np.zeros((N, p))
    U[np.arange(N), y - 1] = c_reg

    y0 = np.ascontiguousarray(y - 1)
    epoch = _epoch_cy if _epoch_cy is not None else _run_epoch_py
    rng = np.random.default_rng(seed)
    for _ in range(max_epochs):
        perm = np.ascontiguousarray(rng.permutation(N))
        worst = epoch(Xa, y0, U, alpha, W, sqnorm, perm)
        if worst < tol:
            break
    return MsvmModel(p=p, W=W, active=active, c_reg=c_reg, tol=tol, seed=seed)


def _run_epoch_py(Xa, y0, U, alpha, W, sqnorm, perm) -> float:
    """One dual sweep in the given example order; mutates alpha and W.

    Returns the largest KKT violation seen.  The compiled twin in
    ``_learn_cy.pyx`` follows the same update order.
    """
    worst = 0.0
    for i in perm:
        q = sqnorm[i]
        if q < 1e-12:
            continue  # zero row: no influence on W regardless of its block
        x = Xa[i]
        grad = W @ x + 1.0
        grad[y0[i]] -= 1.0  # margin term is 1 - [class == label]
        open_mask = alpha[i] < U[i] - 1e-12
        viol = float(grad.max() - grad[open_mask].min())
        if viol > worst:
            worst = viol
        if viol < 1e-12:
            continue
        new_block = _solve_block(grad - q * alpha[i], U[i], q)
        delta = new_block - alpha[i]
        changed = np.abs(delta) > 1e-15
        if changed.any():
            W[changed] += np.outer(delta[changed], x)
            alpha[i] = new_block
    return worst


def _solve_block(B, U, q):
    """Exact minimizer of 0.5 q |v|^2 + B.v subject to sum(v) = 0, v <= U.

    Water-filling: v_m = min(U_m, (theta - B_m) / q) with theta chosen so
    the coordinates sum to zero; found by scanning the sorted breakpoints
    D_m = B_m + q U_m.
    """
    D = B + q * U
    order = np.argsort(-D, kind="stable")
    sum_B = 0.0
    sum_U_out = float(U.sum())
    for r, m in enumerate(order, start=1):
        sum_B += B[m]
        sum_U_out -= U[m]
        theta = (sum_B - q * sum_U_out) / r
        hi = D[order[r - 1]]
        lo = D[order[r]] if r < len(order) else -np.inf
        if lo <= theta < hi or (theta == hi and r == 1):
            chosen = order[:r]
            v = U.copy()
            v[chosen] = (theta - B[chosen]) / q
            return v
    # unreachable for q > 0 (the breakpoint scan always succeeds); kept as
    # a numerically safe landing spot
    theta = B.sum() / len(B)
    return np.minimum(U, (theta - B) / q)


def predict(model: MsvmModel, fv) -> int:
    """Class label in 1..p by argmax score; ties go to the smallest label."""
    s = model.scores(np.asarray(fv, dtype=np.float64))
    return int(np.argmax(s)) + 1


def predict_batch(model: MsvmModel, X) -> np.ndarray:
    s = model.scores(np.asarray(X, dtype=np.float64))
    return np.argmax(s, axis=1) + 1


def training_error(model: MsvmModel, X, y) -> float:
    pred = predict_batch(model, X)
    return float(np.mean(pred != np.asarray(y)))


def least_important_feature(W: np.ndarray) -> int:
    """Column whose entries vary least across classes (0-based, ties lowest).

    A zero-variance column contributes identically to every class score and
    can never change an argmax.
    """
    W = np.asarray(W, dtype=np.float64)
    if W.ndim != 2 or W.shape[1] == 0:
        raise ValueError("need a nonempty weight matrix")
    return int(np.argmin(W.std(axis=0)))


@dataclass(frozen=True)
class SubsetPoint:
    k: int
    error: float
    active: tuple[int, ...]
    model: MsvmModel


@dataclass(frozen=True)
class SubsetFrontier:
    """Queue of (feature count, training error) points, k = K down to 1."""

    points: tuple[SubsetPoint, ...]
    dropped_constant: tuple[int, ...]


@dataclass(frozen=True)
class SelectedModel:
    point: SubsetPoint
    distance: float


def subset_frontier(
    X,
    y,
    c_reg: float = DEFAULT_C_REG,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
    max_epochs: int = DEFAULT_MAX_EPOCHS,
    p: int | None = None,
    progress=None,
) -> SubsetFrontier:
    """Retrain over shrinking feature subsets, one point per subset size.

    Columns constant across the corpus are dropped up front (they carry no
    signal and make weight columns spuriously stable); at least two usable
    features must remain.  Iteration 1 trains on all K retained features;
    each later iteration removes the least important feature of the
    previous model, so the queue holds exactly K points with k = K .. 1.
    """
    X = np.asarray(X, dtype=np.float64)
    stds = X.std(axis=0)
    # a column is constant up to roundoff in the mean
    const = stds <= 1e-12 * (1.0 + np.abs(X.mean(axis=0)))
    active = [int(j) for j in np.nonzero(~const)[0]]
    dropped = tuple(int(j) for j in np.nonzero(const)[0])
    if len(active) < 2:
        raise ValueError("need at least 2 non-constant features")

    points = []
    model = None
    total = len(active)
    for t in range(total):
        if t > 0:
            worst = least_important_feature(model.W)
            active.pop(worst)
        model = train_msvm(
            X, y, active=tuple(active), c_reg=c_reg, tol=tol, seed=seed,
            max_epochs=max_epochs, p=p,
        )
        err = training_error(model, X, y)
        points.append(SubsetPoint(k=len(active), error=err, active=tuple(active), model=model))
        if progress is not None:
            progress(len(active), err)
    return SubsetFrontier(points=tuple(points), dropped_constant=dropped)


def _filter_dominated(points):
    kept = []
    for a in points:
        dominated = any(
            (b.k <= a.k and b.error <= a.error and (b.k, b.error) != (a.k, a.error))
            for b in points
        )
        if not dominated:
            kept.append(a)
    return kept


def select_model(frontier: SubsetFrontier) -> SelectedModel:
    """Pick the frontier point nearest the ideal corner (Phase II).

    Dominated points are removed first; the endpoints (k', e') with the
    fewest features and (k'', e'') with the lowest error define the
    normalization (k - k')/(k'' - k'), (e - e'')/(e' - e''), which maps
    the ideal point to the origin.  Ties in distance go to smaller k.
    """
    pts = _filter_dominated(list(frontier.points))
    if not pts:
        raise ValueError("empty frontier")
    if len(pts) == 1:
        return SelectedModel(point=pts[0], distance=0.0)
    k_lo = min(pt.k for pt in pts)
    k_hi = max(pt.k for pt in pts)
    e_of_klo = next(pt.error for pt in pts if pt.k == k_lo)
    e_of_khi = next(pt.error for pt in pts if pt.k == k_hi)
    e_hi, e_lo = e_of_klo, e_of_khi  # post-filter: fewer features, more error
    best = None
    best_d = None
    for pt in sorted(pts, key=lambda q: q.k):
        zk = (pt.k - k_lo) / (k_hi - k_lo)
        ze = 0.0 if e_hi == e_lo else (pt.error - e_lo) / (e_hi - e_lo)
        d = float(np.hypot(zk, ze))
        if best_d is None or d < best_d - 1e-15:
            best, best_d = pt, d
    return SelectedModel(point=best, distance=best_d)


def save_model(path, model: MsvmModel, provenance: dict | None = None) -> None:
    """Persist the model (and its normalization) as JSON; floats round-trip
    exactly via repr, so a reloaded model predicts identically."""
    names = feature_names(model.p) if model.norm is not None else None
    doc = {
        "p": model.p,
        "active": list(model.active),
        "active_names": [names[a] for a in model.active] if names else None,
        "W": [[float(v) for v in row] for row in model.W],
        "c_reg": model.c_reg,
        "tol": model.tol,
        "seed": model.seed,
        "normalization": model.norm.to_dict() if model.norm is not None else None,
        "provenance": provenance or {},
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)


def load_model(path) -> MsvmModel:
    with open(path) as fh:
        doc = json.load(fh)
    norm = (
        NormalizationParams.from_dict(doc["normalization"])
        if doc.get("normalization")
        else None
    )
    return MsvmModel(
        p=int(doc["p"]),
        W=np.array(doc["W"], dtype=np.float64),
        active=tuple(int(a) for a in doc["active"]),
        c_reg=float(doc["c_reg"]),
        tol=float(doc["tol"]),
        seed=int(doc["seed"]),
        norm=norm,
    )


def predict_raw(model: MsvmModel, raw_fv) -> int:
    """Predict from a raw feature vector using the model's own normalization."""
    if model.norm is None:
        raise ValueError("model carries no normalization parameters")
    return predict(model, apply_normalizer(model.norm, raw_fv))
