"""Branch-and-bound tests; brute-force enumeration is the oracle."""

import numpy as np
import pytest

from moblp._senses import EQ, GE, LE
from moblp.bnb import IlpQuery, brute_force_ilp, solve_ilp
from moblp.instance import generate_ap, generate_kp
from moblp.simplex import INFEASIBLE, OPTIMAL


def random_query(seed, max_n=10):
    rng = np.random.default_rng(seed)
    kind = rng.integers(0, 3)
    if kind == 0:
        inst = generate_kp(int(rng.integers(3, max_n + 1)), 3, seed=seed)
    elif kind == 1:
        inst = generate_ap(int(rng.integers(2, 4)), 3, seed=seed)
    else:
        n = int(rng.integers(2, max_n + 1))
        m = int(rng.integers(1, 4))
        A = rng.integers(-5, 6, size=(m, n)).astype(float)
        b = rng.integers(-2, 8, size=m).astype(float)
        sense = tuple(rng.choice([LE, GE], size=m))
        c = rng.integers(-10, 11, size=n).astype(float)
        return IlpQuery(objective=c, A=A, b=b, sense=sense)
    i = int(rng.integers(0, 3))
    # sometimes append a criterion-space style cut on another objective
    if rng.random() < 0.5:
        k = int(rng.integers(0, 3))
        u = float(rng.integers(-50, 10))
        A = np.vstack([inst.A, inst.C[k]])
        b = np.append(inst.b, u)
        sense = inst.sense + (LE,)
    else:
        A, b, sense = inst.A, inst.b, inst.sense
    return IlpQuery(objective=inst.C[i], A=A, b=b, sense=sense)


def test_two_item_knapsack():
    q = IlpQuery(
        objective=np.array([-2.0, -3.0]),
        A=np.array([[1.0, 1.0]]),
        b=np.array([1.0]),
        sense=(LE,),
    )
    res = solve_ilp(q)
    assert res.status == OPTIMAL
    assert res.value == -3.0
    assert list(res.x) == [0, 1]


def test_empty_region():
    q = IlpQuery(
        objective=np.array([1.0]),
        A=np.array([[1.0], [1.0]]),
        b=np.array([1.0, 0.0]),
        sense=(GE, LE),
    )
    assert solve_ilp(q).status == INFEASIBLE


def test_zero_objective():
    q = IlpQuery(
        objective=np.zeros(3),
        A=np.array([[1.0, 1.0, 1.0]]),
        b=np.array([2.0]),
        sense=(LE,),
    )
    res = solve_ilp(q)
    assert res.status == OPTIMAL
    assert res.value == 0.0


@pytest.mark.parametrize("seed", range(200))
def test_agrees_with_brute_force(seed):
    q = random_query(seed)
    got = solve_ilp(q)
    want = brute_force_ilp(q)
    assert got.status == want.status, f"seed {seed}"
    if want.status == OPTIMAL:
        assert got.value == want.value, f"seed {seed}"
        # returned vector must itself be feasible and attain the value
        assert got.value == pytest.approx(float(q.objective @ got.x))


def test_nodes_deterministic():
    q = random_query(17)
    a = solve_ilp(q)
    b = solve_ilp(q)
    assert a.nodes_expanded == b.nodes_expanded
    assert a.value == b.value
    assert np.array_equal(a.x, b.x)


class TestCutoff:
    def base_query(self, cutoff):
        return IlpQuery(
            objective=np.array([-2.0, -3.0, -4.0]),
            A=np.array([[1.0, 1.0, 1.0]]),
            b=np.array([2.0]),
            sense=(LE,),
            cutoff=cutoff,
        )

    def test_cutoff_above_optimum_keeps_value(self):
        # optimum is -7 (items 2 and 3)
        assert solve_ilp(self.base_query(None)).value == -7.0
        assert solve_ilp(self.base_query(-3.0)).value == -7.0

    def test_cutoff_at_optimum_keeps_value(self):
        assert solve_ilp(self.base_query(-7.0)).value == -7.0

    def test_cutoff_below_optimum_keeps_value(self):
        # a lying cutoff must not change the answer
        assert solve_ilp(self.base_query(-100.0)).value == -7.0

    def test_cutoff_on_infeasible_query(self):
        q = IlpQuery(
            objective=np.array([1.0]),
            A=np.array([[1.0], [1.0]]),
            b=np.array([1.0, 0.0]),
            sense=(GE, LE),
            cutoff=5.0,
        )
        assert solve_ilp(q).status == INFEASIBLE


class TestBruteForce:
    def test_guard(self):
        q = IlpQuery(
            objective=np.zeros(23), A=np.zeros((1, 23)), b=np.zeros(1), sense=(LE,)
        )
        with pytest.raises(ValueError, match="guard"):
            brute_force_ilp(q)

    def test_no_variables(self):
        feasible = IlpQuery(objective=np.zeros(0), A=np.zeros((1, 0)), b=np.array([1.0]), sense=(LE,))
        res = brute_force_ilp(feasible)
        assert res.status == OPTIMAL and res.value == 0.0
        infeasible = IlpQuery(objective=np.zeros(0), A=np.zeros((1, 0)), b=np.array([1.0]), sense=(GE,))
        assert brute_force_ilp(infeasible).status == INFEASIBLE
        # solver handles the degenerate shape too
        assert solve_ilp(feasible).status == OPTIMAL
        assert solve_ilp(infeasible).status == INFEASIBLE

    def test_lp_bound_below_ilp_value(self):
        from moblp import simplex

        for seed in range(10):
            inst = generate_kp(8, 3, seed=seed)
            q = IlpQuery(objective=inst.C[0], A=inst.A, b=inst.b, sense=inst.sense)
            lp = simplex.solve_lp(
                simplex.LpProblem(c=q.objective, A=q.A, b=q.b, sense=q.sense)
            )
            ilp = solve_ilp(q)
            assert lp.value <= ilp.value + 1e-7
