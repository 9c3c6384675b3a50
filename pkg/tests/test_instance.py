import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from moblp._senses import EQ, GE, LE
from moblp.instance import (
    InstanceFormatError,
    KIND_GENERIC,
    MoblpInstance,
    generate_ap,
    generate_kp,
    preorder,
    read_instance,
    write_instance,
)


class TestPreorder:
    def test_hand_example(self):
        # c1=(2,0), c2=(1,1): xt=(1/4, 1/2), scores (0.5, 0.75), order kept
        inst = MoblpInstance(
            p=2, n=2, m=1,
            C=np.array([[2.0, 0.0], [1.0, 1.0]]),
            A=np.array([[1.0, 1.0]]), b=np.array([2.0]), sense=(LE,),
        )
        canon, rep = preorder(inst)
        assert rep.permutation == (0, 1)
        assert rep.scores == pytest.approx((0.5, 0.75))
        assert np.array_equal(canon.C, inst.C)

    def test_identical_rows_keep_order(self):
        inst = MoblpInstance(
            p=2, n=2, m=1,
            C=np.array([[3.0, 1.0], [3.0, 1.0]]),
            A=np.array([[1.0, 1.0]]), b=np.array([2.0]), sense=(LE,),
        )
        _, rep = preorder(inst)
        assert rep.permutation == (0, 1)

    def test_reorders_by_score(self):
        inst = MoblpInstance(
            p=2, n=1, m=1,
            C=np.array([[5.0], [-5.0]]),
            A=np.array([[1.0]]), b=np.array([1.0]), sense=(LE,),
        )
        canon, rep = preorder(inst)
        assert rep.permutation == (1, 0)
        assert canon.C[0, 0] == -5.0

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 10_000), st.permutations([0, 1, 2]))
    def test_permutation_invariance(self, seed, perm):
        inst = generate_kp(6, 3, seed=seed)
        shuffled = inst.replace(C=inst.C[list(perm)])
        canon_a, _ = preorder(inst)
        canon_b, _ = preorder(shuffled)
        assert np.array_equal(canon_a.C, canon_b.C)

    def test_idempotent(self):
        inst = generate_ap(3, 3, seed=5)
        once, _ = preorder(inst)
        twice, rep = preorder(once)
        assert np.array_equal(once.C, twice.C)
        assert rep.permutation == (0, 1, 2)

    def test_scores_nondecreasing_through_permutation(self):
        for seed in range(20):
            inst = generate_kp(8, 3, seed=seed)
            _, rep = preorder(inst)
            ordered = [rep.scores[i] for i in rep.permutation]
            assert all(a <= b for a, b in zip(ordered, ordered[1:]))


class TestGenerators:
    def test_kp_structure(self):
        inst = generate_kp(5, 3, seed=42)
        assert (inst.p, inst.n, inst.m) == (3, 5, 1)
        assert inst.sense == (LE,)
        assert np.all(inst.C <= -1)
        assert inst.b[0] == np.ceil(inst.A[0].sum() / 2)

    def test_kp_deterministic(self):
        a = generate_kp(7, 3, seed=123)
        b = generate_kp(7, 3, seed=123)
        assert a == b
        c = generate_kp(7, 3, seed=124)
        assert a != c

    def test_kp_single_item(self):
        inst = generate_kp(1, 2, seed=0)
        w = inst.A[0, 0]
        cap = inst.b[0]
        assert cap == np.ceil(w / 2)
        # x=1 feasible iff w <= ceil(w/2), i.e. w == 1
        assert (w <= cap) == (w == 1)

    def test_ap_structure(self):
        inst = generate_ap(3, 3, seed=1)
        assert (inst.p, inst.n, inst.m) == (3, 9, 6)
        assert all(s == EQ for s in inst.sense)
        assert np.all(inst.b == 1)
        # each agent row covers exactly r cells, same for task rows
        assert np.all(inst.A.sum(axis=1) == 3)
        # a permutation assignment is feasible
        x = np.eye(3).reshape(-1)
        assert np.allclose(inst.A @ x, inst.b)

    def test_ap_deterministic(self):
        assert generate_ap(4, 3, seed=9) == generate_ap(4, 3, seed=9)

    def test_bad_ranges(self):
        with pytest.raises(ValueError):
            generate_kp(5, 3, seed=1, coeff_range=(10, 2))
        with pytest.raises(ValueError):
            generate_ap(3, 3, seed=1, coeff_range=(0, 5))


class TestIo:
    def test_round_trip(self, tmp_path):
        for inst in (generate_kp(6, 3, seed=3), generate_ap(3, 3, seed=4)):
            path = tmp_path / f"{inst.id}.moblp"
            write_instance(inst, path)
            again = read_instance(path)
            assert again == inst

    def test_round_trip_fractional_data(self, tmp_path):
        inst = MoblpInstance(
            p=2, n=2, m=1,
            C=np.array([[0.1, -2.5], [1.0, 3.0]]),
            A=np.array([[1.25, 1.0]]), b=np.array([1.75]), sense=(GE,),
            kind=KIND_GENERIC, id="frac", seed=None,
        )
        path = tmp_path / "frac.moblp"
        write_instance(inst, path)
        assert read_instance(path) == inst

    def test_line_count_mismatch(self, tmp_path):
        path = tmp_path / "bad.moblp"
        path.write_text("2 2 2 GENERIC\n1 2\n3 4\n1 1 <= 5\n")
        with pytest.raises(InstanceFormatError, match="line"):
            read_instance(path)

    def test_token_count_mismatch(self, tmp_path):
        path = tmp_path / "bad.moblp"
        path.write_text("2 3 1 GENERIC\n1 2\n3 4 5\n1 1 1 <= 5\n")
        with pytest.raises(InstanceFormatError, match="line 2"):
            read_instance(path)

    def test_whitespace_and_comments(self, tmp_path):
        a = tmp_path / "a.moblp"
        b = tmp_path / "b.moblp"
        a.write_text("2 2 1 GENERIC\n1 2\n3 4\n1 1 <= 5\n")
        b.write_text(
            "# free comment\n  2   2  1   GENERIC  \n\n1\t2\n3 4   # trailing\n  1  1  <=  5\n"
        )
        assert read_instance(a) == read_instance(b)

    def test_unknown_sense(self, tmp_path):
        path = tmp_path / "bad.moblp"
        path.write_text("2 2 1 GENERIC\n1 2\n3 4\n1 1 == 5\n")
        with pytest.raises(InstanceFormatError, match="sense"):
            read_instance(path)


class TestInvariants:
    def test_dimension_checks(self):
        with pytest.raises(ValueError):
            MoblpInstance(
                p=1, n=2, m=1, C=np.ones((1, 2)),
                A=np.ones((1, 2)), b=np.ones(1), sense=(LE,),
            )
        with pytest.raises(ValueError):
            MoblpInstance(
                p=2, n=2, m=1, C=np.ones((2, 3)),
                A=np.ones((1, 2)), b=np.ones(1), sense=(LE,),
            )

    def test_arrays_frozen(self):
        inst = generate_kp(4, 2, seed=0)
        with pytest.raises(ValueError):
            inst.C[0, 0] = 99.0

    def test_kp_zero_vector_always_feasible(self):
        for seed in range(5):
            inst = generate_kp(6, 3, seed=seed)
            assert inst.A[0] @ np.zeros(6) <= inst.b[0]
