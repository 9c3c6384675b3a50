"""Instance model for multi-objective binary linear programs.

An instance holds p linear objectives (all minimized) over n binary
variables subject to m linear constraints.  Two benchmark generators are
provided (knapsack and assignment), both deterministic functions of their
arguments, plus a canonical pre-ordering of the objective rows and a plain
text file format.

Randomness comes from numpy's PCG64 bit generator seeded with
``[seed, stream]`` so that corpora are reproducible from the recorded
seeds alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._senses import EQ, GE, LE, SENSES

KIND_AP = "AP"
KIND_KP = "KP"
KIND_GENERIC = "GENERIC"
KINDS = (KIND_AP, KIND_KP, KIND_GENERIC)


class InstanceFormatError(ValueError):
    """Raised on malformed instance files; carries a 1-based line number."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True, eq=False)
class MoblpInstance:
    """A multi-objective binary linear program, objectives stored as minimization.

    C is the (p, n) objective coefficient matrix, A the (m, n) constraint
    matrix with right-hand sides b and per-row senses.  The feasible set is
    a subset of {0,1}^n and therefore always bounded.
    """

    p: int
    n: int
    m: int
    C: np.ndarray
    A: np.ndarray
    b: np.ndarray
    sense: tuple[str, ...]
    kind: str = KIND_GENERIC
    id: str = ""
    seed: int | None = None

    def __post_init__(self):
        C = np.ascontiguousarray(np.asarray(self.C, dtype=np.float64))
        A = np.ascontiguousarray(np.asarray(self.A, dtype=np.float64))
        b = np.ascontiguousarray(np.asarray(self.b, dtype=np.float64))
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "sense", tuple(self.sense))
        self._validate()
        for arr in (C, A, b):
            arr.setflags(write=False)

    def _validate(self):
        if self.p < 2:
            raise ValueError(f"need at least 2 objectives, got p={self.p}")
        if self.n < 1 or self.m < 1:
            raise ValueError(f"need n >= 1 and m >= 1, got n={self.n}, m={self.m}")
        if self.C.shape != (self.p, self.n):
            raise ValueError(f"C has shape {self.C.shape}, expected {(self.p, self.n)}")
        if self.A.shape != (self.m, self.n):
            raise ValueError(f"A has shape {self.A.shape}, expected {(self.m, self.n)}")
        if self.b.shape != (self.m,):
            raise ValueError(f"b has shape {self.b.shape}, expected {(self.m,)}")
        if len(self.sense) != self.m:
            raise ValueError(f"sense has length {len(self.sense)}, expected {self.m}")
        for s in self.sense:
            if s not in SENSES:
                raise ValueError(f"unknown sense token {s!r}")
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r}")
        if self.kind == KIND_KP:
            if self.m != 1 or self.sense[0] != LE:
                raise ValueError("KP instances have a single <= constraint")
            if np.any(self.A < 0) or self.b[0] < 0:
                raise ValueError("KP weights and capacity must be nonnegative")
        if self.kind == KIND_AP:
            r = math.isqrt(self.n)
            if r * r != self.n or self.m != 2 * r:
                raise ValueError("AP instances need n = r^2 and m = 2r")
            if any(s != EQ for s in self.sense) or np.any(self.b != 1):
                raise ValueError("AP constraints are equalities with unit right-hand sides")

    def __eq__(self, other):
        if not isinstance(other, MoblpInstance):
            return NotImplemented
        return (
            (self.p, self.n, self.m, self.sense, self.kind, self.id, self.seed)
            == (other.p, other.n, other.m, other.sense, other.kind, other.id, other.seed)
            and np.array_equal(self.C, other.C)
            and np.array_equal(self.A, other.A)
            and np.array_equal(self.b, other.b)
        )

    def objective_values(self, x) -> np.ndarray:
        """Image of a decision vector in criterion space, z_i = c_i . x."""
        return self.C @ np.asarray(x, dtype=np.float64)

    def has_integer_objectives(self) -> bool:
        return bool(np.all(self.C == np.round(self.C)))

    def replace(self, **changes) -> "MoblpInstance":
        from dataclasses import replace as _replace

        return _replace(self, **changes)


@dataclass(frozen=True)
class PreorderReport:
    """Outcome of canonical objective ordering.

    ``permutation[k]`` is the original (0-based) row index that ended up at
    canonical position k; ``scores`` are the ordering scores indexed by
    original row, so scores read through the permutation are non-decreasing.
    """

    permutation: tuple[int, ...]
    scores: tuple[float, ...]


def preorder(inst: MoblpInstance) -> tuple[MoblpInstance, PreorderReport]:
    """Reorder objective rows into the canonical non-decreasing score order.

    The score of row i is c_i . xt with xt_j = 1 / (sum_i |c_ij| + 1).
    Score ties break on lexicographic comparison of the raw coefficient
    rows (smaller first), which makes the ordering a deterministic total
    order: it is invariant under any permutation of the input rows and
    idempotent.
    """
    abs_sum = np.abs(inst.C).sum(axis=0)
    xt = 1.0 / (abs_sum + 1.0)
    scores = inst.C @ xt
    order = sorted(range(inst.p), key=lambda i: (scores[i], tuple(inst.C[i])))
    canonical = inst.replace(C=inst.C[order])
    return canonical, PreorderReport(tuple(order), tuple(float(s) for s in scores))


def _rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(stream)])


def _check_range(coeff_range) -> tuple[int, int]:
    lo, hi = int(coeff_range[0]), int(coeff_range[1])
    if lo > hi or lo < 1:
        raise ValueError(f"coefficient range must satisfy 1 <= lo <= hi, got [{lo}, {hi}]")
    return lo, hi


def generate_kp(n: int, p: int, seed: int, coeff_range=(1, 100)) -> MoblpInstance:
    """Random knapsack instance: maximize p profit rows, capacity half the weight.

    Profits and weights are uniform integers in ``coeff_range``; profits are
    stored negated so all objectives minimize.  Capacity is
    ceil(total weight / 2).  Output is a pure function of the arguments.
    """
    if n < 1 or p < 2:
        raise ValueError("need n >= 1 and p >= 2")
    lo, hi = _check_range(coeff_range)
    rng = _rng(seed, 0)
    profits = rng.integers(lo, hi + 1, size=(p, n))
    weights = rng.integers(lo, hi + 1, size=n)
    capacity = math.ceil(int(weights.sum()) / 2)
    return MoblpInstance(
        p=p,
        n=n,
        m=1,
        C=-profits.astype(np.float64),
        A=weights.reshape(1, n).astype(np.float64),
        b=np.array([capacity], dtype=np.float64),
        sense=(LE,),
        kind=KIND_KP,
        id=f"KP-n{n}-p{p}-s{seed}",
        seed=seed,
    )


def generate_ap(r: int, p: int, seed: int, coeff_range=(1, 20)) -> MoblpInstance:
    """Random r x r assignment instance with p cost matrices.

    Variables are x_{a,t} for agent a and task t, column index a*r + t.
    Each agent is assigned exactly once and each task filled exactly once
    (2r equality rows).  Costs are uniform integers in ``coeff_range``.
    """
    if r < 2 or p < 2:
        raise ValueError("need r >= 2 and p >= 2")
    lo, hi = _check_range(coeff_range)
    rng = _rng(seed, 0)
    n = r * r
    costs = rng.integers(lo, hi + 1, size=(p, n))
    A = np.zeros((2 * r, n))
    for a in range(r):
        A[a, a * r : (a + 1) * r] = 1.0
    for t in range(r):
        A[r + t, t::r] = 1.0
    return MoblpInstance(
        p=p,
        n=n,
        m=2 * r,
        C=costs.astype(np.float64),
        A=A,
        b=np.ones(2 * r),
        sense=(EQ,) * (2 * r),
        kind=KIND_AP,
        id=f"AP-r{r}-p{p}-s{seed}",
        seed=seed,
    )


def _fmt(v: float) -> str:
    # integers round-trip as integer literals, other floats via repr
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def write_instance(inst: MoblpInstance, path) -> None:
    """Write the plain text format described in :func:`read_instance`."""
    lines = []
    if inst.id:
        lines.append(f"# id: {inst.id}")
    if inst.seed is not None:
        lines.append(f"# seed: {inst.seed}")
    lines.append(f"{inst.p} {inst.n} {inst.m} {inst.kind}")
    for i in range(inst.p):
        lines.append(" ".join(_fmt(v) for v in inst.C[i]))
    for r in range(inst.m):
        row = " ".join(_fmt(v) for v in inst.A[r])
        lines.append(f"{row} {inst.sense[r]} {_fmt(inst.b[r])}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_instance(path) -> MoblpInstance:
    """Parse an instance file.

    Format: header line ``p n m kind``; then p objective rows of n numbers;
    then m constraint rows of n numbers followed by a sense token
    (``<=``, ``>=`` or ``=``) and the right-hand side.  Tokens are
    whitespace separated, ``#`` starts a comment to end of line.  The
    metadata comments ``# id:`` and ``# seed:`` written by
    :func:`write_instance` are recognized and restored.
    """
    inst_id = ""
    seed = None
    rows: list[tuple[int, list[str]]] = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            stripped = raw.strip()
            if stripped.startswith("# id:"):
                inst_id = stripped[5:].strip()
                continue
            if stripped.startswith("# seed:"):
                try:
                    seed = int(stripped[7:].strip())
                except ValueError as exc:
                    raise InstanceFormatError(f"bad seed comment: {exc}", lineno)
                continue
            data = raw.split("#", 1)[0].split()
            if data:
                rows.append((lineno, data))

    if not rows:
        raise InstanceFormatError("empty instance file", 1)

    lineno, header = rows[0]
    if len(header) != 4:
        raise InstanceFormatError("header must be 'p n m kind'", lineno)
    try:
        p, n, m = int(header[0]), int(header[1]), int(header[2])
    except ValueError as exc:
        raise InstanceFormatError(f"bad header counts: {exc}", lineno)
    kind = header[3]
    if kind not in KINDS:
        raise InstanceFormatError(f"unknown kind {kind!r}", lineno)

    expected = 1 + p + m
    if len(rows) != expected:
        raise InstanceFormatError(
            f"expected {expected} data lines for p={p}, m={m}, found {len(rows)}",
            rows[-1][0],
        )

    def parse_numbers(tokens, lineno, count, what):
        if len(tokens) != count:
            raise InstanceFormatError(
                f"{what}: expected {count} values, found {len(tokens)}", lineno
            )
        try:
            return [float(t) for t in tokens]
        except ValueError as exc:
            raise InstanceFormatError(f"{what}: {exc}", lineno)

    C = np.empty((p, n))
    for i in range(p):
        lineno, tokens = rows[1 + i]
        C[i] = parse_numbers(tokens, lineno, n, f"objective {i + 1}")

    A = np.empty((m, n))
    b = np.empty(m)
    sense = []
    for r in range(m):
        lineno, tokens = rows[1 + p + r]
        if len(tokens) != n + 2:
            raise InstanceFormatError(
                f"constraint {r + 1}: expected {n} coefficients, a sense and a rhs",
                lineno,
            )
        A[r] = parse_numbers(tokens[:n], lineno, n, f"constraint {r + 1}")
        if tokens[n] not in SENSES:
            raise InstanceFormatError(
                f"constraint {r + 1}: unknown sense {tokens[n]!r}", lineno
            )
        sense.append(tokens[n])
        try:
            b[r] = float(tokens[n + 1])
        except ValueError as exc:
            raise InstanceFormatError(f"constraint {r + 1} rhs: {exc}", lineno)

    try:
        return MoblpInstance(
            p=p, n=n, m=m, C=C, A=A, b=b, sense=tuple(sense), kind=kind, id=inst_id, seed=seed
        )
    except ValueError as exc:
        raise InstanceFormatError(str(exc), rows[0][0])
