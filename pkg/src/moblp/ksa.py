"""Criterion-space search for the exact nondominated frontier.

The search projects out one objective j and explores the remaining
(p-1)-dimensional space through axis-aligned boxes of upper bounds.  Each
iteration solves a two-stage lexicographic pair of ILPs on the largest
live box: stage one minimizes z_j subject to z_i <= u_i for i != j; when
feasible, stage two minimizes the sum of the other objectives with the
extra bound z_j <= z_j(stage-one optimum).  The stage-two optimum is
always a nondominated point of the full problem.  The frontier returned
is identical for every choice of j; only the effort differs, which is
exactly the signal the learning pipeline feeds on.

Boxes assume integral objective data (both built-in generators provide
it): after a box's probe finds a point with projection y, that box is
replaced by one child per coordinate t with upper corner u_t = y_t - 1,
which excludes precisely the region the new point dominates within the
box.  Children that cannot contain feasible images and boxes contained in
another live box are dropped.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import simplex
from ._senses import GE, LE
from .bnb import BRUTE_FORCE_MAX_N, IlpQuery, solve_ilp

__all__ = [
    "Frontier",
    "Box",
    "BoxList",
    "NonIntegerObjectiveError",
    "TimeLimitExceeded",
    "ksa_solve",
    "brute_force_frontier",
    "box_update",
    "read_frontier",
    "write_frontier",
]


class NonIntegerObjectiveError(ValueError):
    """The box search needs integral objective rows; got fractional data."""


class TimeLimitExceeded(RuntimeError):
    """Raised between iterations once the optional wall-clock budget is spent."""


@dataclass(frozen=True)
class Frontier:
    """Exact set of nondominated points plus the effort spent finding them.

    ``ilp_count`` counts every stage-one and stage-two solve; ``nodes`` sums
    branch-and-bound nodes over those solves; ``projection`` is the 1-based
    objective used as the stage-one objective (0 for the brute-force oracle).
    """

    p: int
    points: tuple[tuple[int, ...], ...]
    projection: int
    ilp_count: int
    nodes: int
    time_s: float

    def point_set(self) -> frozenset:
        return frozenset(self.points)


@dataclass(frozen=True)
class Box:
    upper: tuple[int, ...]
    uid: int


@dataclass
class BoxList:
    """Live boxes of the projected search space, all sharing ``lower``.

    The union of live boxes covers every projection of a not-yet-found
    nondominated point; every box has positive extent in each coordinate.
    """

    lower: tuple[int, ...]
    boxes: list[Box] = field(default_factory=list)
    next_uid: int = 0

    def add(self, upper) -> None:
        self.boxes.append(Box(tuple(int(v) for v in upper), self.next_uid))
        self.next_uid += 1

    def select_largest(self) -> Box:
        """Largest-volume live box, ties to the oldest."""
        best = None
        best_vol = -1
        for box in self.boxes:
            vol = 1
            for u, l in zip(box.upper, self.lower):
                vol *= u - l
            if vol > best_vol:
                best, best_vol = box, vol
        return best

    def remove(self, box: Box) -> None:
        self.boxes.remove(box)


def box_update(boxes: BoxList, found, only_uid: int | None = None) -> BoxList:
    """Split boxes around ``found`` and drop redundant boxes.

    A box contains ``found`` when found <= upper componentwise.  A split
    box is replaced by one child per coordinate t with the upper corner
    lowered to found_t - 1 (strict exclusion, integral data).  Children
    with no room above the global lower corner are dropped, then any box
    whose corner is dominated componentwise by another live box's corner.

    When ``only_uid`` is given only that box is split.  The search always
    passes it: the region above ``found`` is dominated only relative to the
    box whose two-stage probe produced the point, so carving it out of a
    box with looser bounds can lose frontier points (a box with more slack
    in some coordinate may still hold points that beat the probe in the
    projected-out objective).  Other boxes containing the point shrink
    when their own probes rediscover it.
    """
    found = tuple(int(v) for v in found)
    dim = len(boxes.lower)
    out = BoxList(lower=boxes.lower, next_uid=boxes.next_uid)
    children = []
    for box in boxes.boxes:
        split = all(f <= u for f, u in zip(found, box.upper))
        if only_uid is not None:
            split = box.uid == only_uid
        if split:
            for t in range(dim):
                upper = list(box.upper)
                upper[t] = found[t] - 1
                if upper[t] <= boxes.lower[t]:
                    continue  # no integer image can land at or below lower
                children.append(tuple(upper))
        else:
            out.add(box.upper)
    for upper in children:
        out.add(upper)

    # discard boxes whose corner is covered by another live box
    keep: list[Box] = []
    for box in out.boxes:
        redundant = False
        for other in out.boxes:
            if other.uid == box.uid:
                continue
            if all(a <= b for a, b in zip(box.upper, other.upper)) and (
                box.upper != other.upper or other.uid < box.uid
            ):
                redundant = True
                break
        if not redundant:
            keep.append(box)
    out.boxes = keep
    return out


def _integral_matrix(C) -> np.ndarray:
    R = np.round(C)
    if not np.array_equal(C, R):
        raise NonIntegerObjectiveError(
            "objective coefficients must be integers for the box search"
        )
    return R.astype(np.int64)


def _global_bounds(inst):
    """Per-objective [floor(l)-1, ceil(u)+1] from the LP relaxation, or the
    coefficient-sum box when the relaxation itself is empty."""
    lo = np.empty(inst.p, dtype=np.int64)
    hi = np.empty(inst.p, dtype=np.int64)
    try:
        for i in range(inst.p):
            l, u = simplex.objective_bounds(inst, i + 1)
            lo[i] = math.floor(l) - 1
            hi[i] = math.ceil(u) + 1
    except simplex.RelaxationInfeasibleError:
        for i in range(inst.p):
            c = inst.C[i]
            lo[i] = math.floor(c[c < 0].sum() if (c < 0).any() else 0.0) - 1
            hi[i] = math.ceil(c[c > 0].sum() if (c > 0).any() else 0.0) + 1
    return lo, hi


def ksa_solve(inst, j: int, time_limit: float | None = None) -> Frontier:
    """Compute the full nondominated frontier projecting objective j (1-based).

    Raises :class:`TimeLimitExceeded` if ``time_limit`` seconds elapse
    before the box list empties; an infeasible instance yields an empty
    frontier after a single stage-one solve.
    """
    if not 1 <= j <= inst.p:
        raise ValueError(f"projection index {j} out of range 1..{inst.p}")
    Ci = _integral_matrix(inst.C)
    start = time.perf_counter()

    lo, hi = _global_bounds(inst)
    others = [i for i in range(inst.p) if i != j - 1]

    # one constraint block reused by every ILP in the run: instance rows,
    # then one bound row per non-projected objective, then the stage-two
    # bound on objective j (inactive in stage one via the global bound)
    A_full = np.vstack([inst.A, inst.C[others], inst.C[j - 1 : j]])
    sense_full = inst.sense + (LE,) * (len(others) + 1)
    ws = simplex.make_workspace(A_full, sense_full)
    c_stage1 = inst.C[j - 1]
    c_stage2 = inst.C[others].sum(axis=0)

    def make_b(box_upper, zj_cap):
        return np.concatenate([inst.b, np.asarray(box_upper, dtype=np.float64), [zj_cap]])

    boxes = BoxList(lower=tuple(int(lo[i]) for i in others))
    boxes.add(tuple(int(hi[i]) for i in others))

    points: set[tuple[int, ...]] = set()
    ilp_count = 0
    nodes = 0

    while boxes.boxes:
        if time_limit is not None and time.perf_counter() - start > time_limit:
            raise TimeLimitExceeded(f"projection {j} exceeded {time_limit:.3f}s")
        box = boxes.select_largest()

        b1 = make_b(box.upper, float(hi[j - 1]))
        stage1 = solve_ilp(
            IlpQuery(objective=c_stage1, A=A_full, b=b1, sense=sense_full),
            workspace=ws,
        )
        ilp_count += 1
        nodes += stage1.nodes_expanded
        if stage1.status == simplex.INFEASIBLE:
            boxes.remove(box)
            continue

        zj_hat = int(round(float(Ci[j - 1] @ stage1.x)))
        b2 = make_b(box.upper, float(zj_hat))
        stage2 = solve_ilp(
            IlpQuery(objective=c_stage2, A=A_full, b=b2, sense=sense_full),
            workspace=ws,
        )
        ilp_count += 1
        nodes += stage2.nodes_expanded
        if stage2.status == simplex.INFEASIBLE:  # cannot happen: stage1.x is feasible
            boxes.remove(box)
            continue

        point = tuple(int(v) for v in (Ci @ stage2.x))
        points.add(point)
        boxes = box_update(boxes, tuple(point[i] for i in others), only_uid=box.uid)

    return Frontier(
        p=inst.p,
        points=tuple(sorted(points)),
        projection=j,
        ilp_count=ilp_count,
        nodes=nodes,
        time_s=time.perf_counter() - start,
    )


def pareto_filter(Z: np.ndarray) -> np.ndarray:
    """Rows of Z that no other row dominates (<= everywhere, < somewhere)."""
    uniq = np.unique(Z, axis=0)
    keep = []
    for k in range(len(uniq)):
        z = uniq[k]
        dominated = False
        for other in uniq:
            if np.all(other <= z) and np.any(other < z):
                dominated = True
                break
        if not dominated:
            keep.append(k)
    return uniq[keep]


def brute_force_frontier(inst) -> Frontier:
    """Enumerate all feasible binary vectors and filter dominated images."""
    if inst.n > BRUTE_FORCE_MAX_N:
        raise ValueError(f"enumeration guard: n={inst.n} exceeds {BRUTE_FORCE_MAX_N}")
    start = time.perf_counter()
    Ci = _integral_matrix(inst.C)
    total = 1 << inst.n
    codes = np.arange(total, dtype=np.int64)
    images = []
    chunk = 1 << 14
    for s in range(0, total, chunk):
        block = codes[s : s + chunk]
        X = ((block[:, None] >> np.arange(inst.n)) & 1).astype(np.float64)
        V = X @ inst.A.T
        ok = np.ones(len(block), dtype=bool)
        for r, sense in enumerate(inst.sense):
            if sense == LE:
                ok &= V[:, r] <= inst.b[r] + 1e-9
            elif sense == GE:
                ok &= V[:, r] >= inst.b[r] - 1e-9
            else:
                ok &= np.abs(V[:, r] - inst.b[r]) <= 1e-9
        if ok.any():
            images.append((X[ok] @ Ci.T.astype(np.float64)).astype(np.int64))
    if not images:
        nd = np.empty((0, inst.p), dtype=np.int64)
    else:
        nd = pareto_filter(np.vstack(images))
    points = tuple(sorted(tuple(int(v) for v in row) for row in nd))
    return Frontier(
        p=inst.p,
        points=points,
        projection=0,
        ilp_count=0,
        nodes=0,
        time_s=time.perf_counter() - start,
    )


def write_frontier(frontier: Frontier, path) -> None:
    """Write the ``.nd`` format: header ``p count j ilp_count nodes time_s``
    then one point per line as p space-separated values."""
    with open(path, "w") as fh:
        fh.write(
            f"{frontier.p} {len(frontier.points)} {frontier.projection} "
            f"{frontier.ilp_count} {frontier.nodes} {frontier.time_s!r}\n"
        )
        for pt in frontier.points:
            fh.write(" ".join(str(v) for v in pt) + "\n")


def read_frontier(path) -> Frontier:
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 6:
            raise ValueError("frontier header must be 'p count j ilp_count nodes time_s'")
        p, count, j, ilps, nodes = (int(v) for v in header[:5])
        time_s = float(header[5])
        points = []
        for line in fh:
            vals = line.split()
            if not vals:
                continue
            if len(vals) != p:
                raise ValueError(f"point line has {len(vals)} values, expected {p}")
            points.append(tuple(int(v) for v in vals))
    if len(points) != count:
        raise ValueError(f"header count {count} does not match {len(points)} points")
    return Frontier(
        p=p, points=tuple(points), projection=j, ilp_count=ilps, nodes=nodes, time_s=time_s
    )
