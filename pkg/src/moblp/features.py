"""Static instance features for projection selection, plus normalization.

Thirty-two feature families describe an instance through its objective
rows, their interactions with the constraint matrix and right-hand sides,
LP-relaxation objective ranges, and scale-free variants built from
max-normalized rows.  The total count is 5p^2 + 106p - 50 (313 for three
objectives, 182 for two).  Families 19 and up use only max-normalized
data, so they are invariant under positive rescaling of any objective row
or constraint row; families 1-18 carry no such guarantee.

Conventions baked in here:
  * recurring statistics are Avg, Min, Max, Std, Median with population
    standard deviation and middle-averaging median;
  * statistics of an empty collection are all zero (a sign class of an
    objective may be empty);
  * an all-zero objective or constraint row makes its max-normalized copy
    the zero vector instead of dividing by zero (generators never emit
    such rows, arbitrary files might);
  * interval counts use closed bounds on both ends, so a coefficient
    sitting exactly on a bin edge counts in both neighboring bins.

The caller is expected to pre-order the instance first; the first family
is the vector of pre-ordering scores.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import simplex

STAT_NAMES = ("avg", "min", "max", "std", "median")


def feature_count(p: int) -> int:
    """Closed form for the number of features at p objectives."""
    return 5 * p * p + 106 * p - 50


def stats5(values) -> tuple[float, float, float, float, float]:
    """(Avg, Min, Max, Std, Median) of a multiset; all zero when empty.

    Std is the population standard deviation; the median of an even count
    averages the two middle order statistics.
    """
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        return (0.0, 0.0, 0.0, 0.0, 0.0)
    return (
        float(arr.mean()),
        float(arr.min()),
        float(arr.max()),
        float(arr.std()),
        float(np.median(arr)),
    )


def g(a: float) -> float:
    """a + 1 for a >= 0, a - 1 otherwise; |g(a)| >= 1 so it is a safe divisor."""
    return a + 1.0 if a >= 0.0 else a - 1.0


def _g_vec(arr):
    return np.where(arr >= 0.0, arr + 1.0, arr - 1.0)


def leverage_scores(A) -> np.ndarray:
    """Squared column norms of A over their total; uniform 1/n for zero A."""
    A = np.asarray(A, dtype=np.float64)
    sq = (A * A).sum(axis=0)
    total = sq.sum()
    if total == 0.0:
        return np.full(A.shape[1], 1.0 / A.shape[1])
    return sq / total


def _max_normalized_rows(M):
    """Rows divided by their max absolute entry; zero rows stay zero."""
    M = np.asarray(M, dtype=np.float64)
    mx = np.abs(M).max(axis=1)
    safe = np.where(mx == 0.0, 1.0, mx)
    return M / safe[:, None], mx


@lru_cache(maxsize=None)
def feature_names(p: int) -> tuple[str, ...]:
    """Stable column names, family-major, in the order extract_features emits."""
    names: list[str] = []

    def stat_block(base):
        names.extend(f"{base}.{s}" for s in STAT_NAMES)

    names.extend(f"F1_{i}" for i in range(1, p + 1))
    names.extend(["F2", "F3", "F4"])
    names.extend(f"F5_{i}" for i in range(1, p + 1))
    for fam in (6, 7):
        for i in range(1, p + 1):
            names.append(f"F{fam}_{i}.size")
            stat_block(f"F{fam}_{i}")
    for i in range(1, p + 1):
        stat_block(f"F8_{i}")
    names.extend(f"F9_{i}" for i in range(1, p + 1))
    for fam in (10, 11):
        for i in range(1, p + 1):
            stat_block(f"F{fam}_{i}")
    names.extend(f"F12_{i}" for i in range(1, p + 1))
    for fam in (13, 14, 15, 16):
        for i in range(1, p + 1):
            stat_block(f"F{fam}_{i}")
    names.extend(f"F17_{i}" for i in range(1, p + 1))
    for i in range(1, p + 1):
        names.extend(f"F18_{i}.bin{k}" for k in range(1, 7))
    for fam in (19, 20, 21):
        names.extend(f"F{fam}_{i}" for i in range(2, p + 1))
    for fam in range(22, 28):
        for i in range(2, p + 1):
            stat_block(f"F{fam}_{i}")
    for i in range(1, p + 1):
        for l in range(1, p + 1):
            if l != i:
                stat_block(f"F28_{i}_{l}")
    for fam in range(29, 33):
        for i in range(2, p + 1):
            stat_block(f"F{fam}_{i}")
    assert len(names) == feature_count(p)
    return tuple(names)


@dataclass(frozen=True)
class FeatureVector:
    """Raw feature values in the fixed column order for p objectives."""

    p: int
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "values", np.ascontiguousarray(self.values, dtype=np.float64)
        )
        expected = feature_count(self.p)
        if self.values.shape != (expected,):
            raise ValueError(
                f"feature vector for p={self.p} must have length {expected}, "
                f"got {self.values.shape}"
            )

    @property
    def names(self) -> tuple[str, ...]:
        return feature_names(self.p)


def extract_features(inst, objective_ranges=None) -> FeatureVector:
    """Compute the full feature vector of a (pre-ordered) instance.

    ``objective_ranges`` may supply the per-objective LP-relaxation
    ranges [(l_i, u_i)] to skip re-solving them; otherwise the twelfth
    family triggers 2p LP solves.  Raises RelaxationInfeasibleError when
    the relaxation is empty, in which case the instance has no feasible
    point at all.
    """
    p, n, m = inst.p, inst.n, inst.m
    C = inst.C
    A = inst.A
    b = inst.b
    out: list[float] = []

    # pre-ordering scores
    abs_sum = np.abs(C).sum(axis=0)
    xt = 1.0 / (abs_sum + 1.0)
    out.extend(C @ xt)

    out.extend([float(n), float(m), float(np.count_nonzero(A)) / (m * n)])

    pos_masks = [C[i] > 0 for i in range(p)]
    neg_masks = [C[i] < 0 for i in range(p)]
    out.extend(float(np.count_nonzero(C[i] == 0)) for i in range(p))
    for masks in (pos_masks, neg_masks):
        for i in range(p):
            vals = C[i][masks[i]]
            out.append(float(vals.size))
            out.extend(stats5(vals))

    row_dots = C @ A.T  # (p, m): objective i against constraint row j
    for i in range(p):
        out.extend(stats5(row_dots[i]))
    out.extend(C @ (A.T @ b))

    b_prime = np.where(b >= 0.0, b + 1.0, b - 1.0)
    for masks in (pos_masks, neg_masks):
        for i in range(p):
            total = float(C[i][masks[i]].sum())
            out.extend(stats5(total / b_prime))

    if objective_ranges is None:
        objective_ranges = [simplex.objective_bounds(inst, i + 1) for i in range(p)]
    spans = np.array([u - l for l, u in objective_ranges])
    for i in range(p):
        out.append(float(np.prod(np.delete(spans, i))))

    abs_C = np.abs(C)
    row_abs_sum = abs_C.sum(axis=1)
    cbar_prime = row_abs_sum / n
    for i in range(p):
        vals = [row_abs_sum[i] / (cbar_prime[j] + 1.0) for j in range(p) if j != i]
        out.extend(stats5(vals))
    for i in range(p):
        others = abs_C.sum(axis=0) - abs_C[i]
        out.extend(stats5(others / (abs_C[i] + 1.0)))
    col_abs_A = np.abs(A).sum(axis=0)
    for i in range(p):
        out.extend(stats5(col_abs_A / (abs_C[i] + 1.0)))

    gram = C @ C.T
    for i in range(p):
        out.extend(stats5([gram[i, j] for j in range(p) if j != i]))

    ls = leverage_scores(A)
    out.extend(C @ ls)

    avg_C = float(C.mean())
    std_C = float(C.std())
    bins = ((-np.inf, -1.0), (-1.0, -0.5), (-0.5, 0.0), (0.0, 0.5), (0.5, 1.0), (1.0, np.inf))
    for i in range(p):
        for lo, hi in bins:
            lower = -np.inf if lo == -np.inf else avg_C + lo * std_C
            upper = np.inf if hi == np.inf else avg_C + hi * std_C
            out.append(float(np.count_nonzero((C[i] >= lower) & (C[i] <= upper))))

    # scale-free block: rows of C and A divided by their max magnitudes
    cbar, _ = _max_normalized_rows(C)
    abar, a_max = _max_normalized_rows(A)
    bbar = b / np.where(a_max == 0.0, 1.0, a_max)

    zeros = (cbar == 0.0).sum(axis=1).astype(np.float64)
    pos = (cbar > 0.0).sum(axis=1).astype(np.float64)
    neg = (cbar < 0.0).sum(axis=1).astype(np.float64)
    for counts in (zeros, pos, neg):
        out.extend(np.log(1.0 + counts[0] / (1.0 + counts[1:])))

    cbar2 = cbar * cbar
    g_c = _g_vec(cbar)
    g_c2 = _g_vec(cbar2)
    ratio = cbar[0] / g_c  # (p, n): row i holds cbar_1 over g(cbar_i)
    ratio2 = cbar2[0] / g_c2
    per_row = abar @ ratio.T / n  # (m, p)
    per_row2 = abar @ ratio2.T / n
    for i in range(1, p):
        out.extend(stats5(ratio[i]))
    for i in range(1, p):
        out.extend(stats5(ratio2[i]))
    for i in range(1, p):
        out.extend(stats5(per_row[:, i]))
    for i in range(1, p):
        out.extend(stats5(per_row[:, i] - bbar))
    for i in range(1, p):
        out.extend(stats5(per_row2[:, i]))
    for i in range(1, p):
        out.extend(stats5(per_row2[:, i] - bbar))

    for i in range(p):
        for l in range(p):
            if l != i:
                out.extend(stats5(cbar[i] / g_c[l]))

    # per-variable statistics of the normalized constraint columns
    col_stats = np.vstack(
        [
            abar.mean(axis=0),
            abar.min(axis=0),
            abar.max(axis=0),
            abar.std(axis=0),
            np.median(abar, axis=0),
        ]
    )  # (5, n)
    b_stats = np.array(stats5(bbar))
    lin = col_stats @ ratio.T / n  # (5, p)
    lin2 = col_stats @ ratio2.T / n
    for i in range(1, p):
        out.extend(lin[:, i])
    for i in range(1, p):
        out.extend(lin[:, i] - b_stats)
    for i in range(1, p):
        out.extend(lin2[:, i])
    for i in range(1, p):
        out.extend(lin2[:, i] - b_stats)

    return FeatureVector(p=p, values=np.array(out))


@lru_cache(maxsize=None)
def feature_groups(p: int) -> tuple[str, ...]:
    """Family identifier per column (the source grouping for normalization)."""
    return tuple(name.split("_")[0].split(".")[0] for name in feature_names(p))


@dataclass(frozen=True)
class NormalizationParams:
    """Per-feature location/scale fitted on a training corpus.

    Features map through clamp((x - mean) / (3 std), -1, 1); a feature
    constant on the training corpus (std 0) maps to 0.  ``groups`` records
    each feature's family so a group-wise variant can be compared later.
    """

    p: int
    mean: np.ndarray
    std: np.ndarray
    groups: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "mean": [float(v) for v in self.mean],
            "std": [float(v) for v in self.std],
        }

    @classmethod
    def from_dict(cls, d) -> "NormalizationParams":
        p = int(d["p"])
        return cls(
            p=p,
            mean=np.array(d["mean"], dtype=np.float64),
            std=np.array(d["std"], dtype=np.float64),
            groups=feature_groups(p),
        )


def fit_normalizer(vectors) -> NormalizationParams:
    """Fit per-feature mean and population std over a training corpus."""
    if isinstance(vectors, np.ndarray):
        mat = np.asarray(vectors, dtype=np.float64)
        if mat.ndim != 2:
            raise ValueError("expected a 2-D feature matrix")
        p = next((q for q in range(2, 64) if feature_count(q) == mat.shape[1]), None)
        if p is None:
            raise ValueError(f"{mat.shape[1]} columns is not a feature count for any p")
    else:
        vectors = list(vectors)
        ps = {fv.p for fv in vectors}
        if len(ps) > 1:
            raise ValueError(f"mixed objective counts in corpus: {sorted(ps)}")
        if not vectors:
            raise ValueError("cannot fit a normalizer on an empty corpus")
        p = vectors[0].p
        mat = np.vstack([fv.values for fv in vectors])
    if mat.shape[0] < 2:
        raise ValueError("need at least 2 instances to fit a normalizer")
    return NormalizationParams(
        p=p,
        mean=mat.mean(axis=0),
        std=mat.std(axis=0),
        groups=feature_groups(p),
    )


def apply_normalizer(params: NormalizationParams, fv) -> np.ndarray:
    """Map raw features into [-1, 1]; accepts a FeatureVector, a row, or a matrix."""
    raw = fv.values if isinstance(fv, FeatureVector) else np.asarray(fv, dtype=np.float64)
    scale = 3.0 * params.std
    safe = np.where(scale == 0.0, 1.0, scale)
    z = (raw - params.mean) / safe
    z = np.where(params.std == 0.0, 0.0, z)
    return np.clip(z, -1.0, 1.0)
