import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import dense_form, dense_inner
from conftest import random_sparse
from tensorconc import (
    DenseGateError,
    DenseProbability,
    Homogeneous,
    OffsetTensor,
    ShapeMismatchError,
    SparseTensor,
    TensorShape,
    VectorTuple,
    center,
    contract_all_but_one,
    dumps_tensor,
    frobenius_inner,
    frobenius_norm,
    hadamard,
    loads_tensor,
    multilinear_form,
    rank1,
)


class TestShapesAndConstruction:
    def test_shape_validation(self):
        with pytest.raises(ValueError):
            TensorShape(1, 4)
        with pytest.raises(ValueError):
            TensorShape(3, 0)
        with pytest.raises(ValueError):
            TensorShape(2, 2**31)

    def test_canonical_sorting_and_zero_drop(self):
        sh = TensorShape(2, 3)
        t = SparseTensor(sh, [[3, 1], [1, 2], [2, 2]], [1.0, 2.0, 0.0])
        assert t.coords.tolist() == [[1, 2], [3, 1]]
        assert t.values.tolist() == [2.0, 1.0]

    def test_duplicate_coordinate_rejected(self):
        sh = TensorShape(2, 3)
        with pytest.raises(ValueError, match="duplicate"):
            SparseTensor(sh, [[1, 2], [1, 2]], [1.0, 2.0])

    def test_out_of_range_coordinate_rejected(self):
        sh = TensorShape(2, 3)
        with pytest.raises(ValueError):
            SparseTensor(sh, [[0, 1]], [1.0])
        with pytest.raises(ValueError):
            SparseTensor(sh, [[1, 4]], [1.0])

    def test_immutability(self):
        t = SparseTensor.all_ones(TensorShape(2, 2))
        with pytest.raises(AttributeError):
            t.values = None
        with pytest.raises(ValueError):
            t.values[0] = 5.0

    def test_dense_gate(self):
        big = OffsetTensor(SparseTensor.empty(TensorShape(4, 200)), 1.0)
        with pytest.raises(DenseGateError):
            big.materialize()


class TestFrobenius:
    def test_ones_inner(self):
        j = SparseTensor.all_ones(TensorShape(2, 3))
        assert frobenius_inner(j, j) == 9.0

    def test_inner_with_zero(self):
        t = random_sparse(np.random.default_rng(0), 3, 2)
        zero = SparseTensor.empty(t.shape)
        assert frobenius_inner(t, zero) == 0.0

    def test_inner_matches_bruteforce(self, rng):
        for _ in range(20):
            a = random_sparse(rng, 3, 2)
            b = random_sparse(rng, 3, 2)
            assert frobenius_inner(a, b) == pytest.approx(
                dense_inner(a.to_dense(), b.to_dense()), rel=1e-12, abs=1e-12
            )

    def test_norm_all_ones(self):
        j = SparseTensor.all_ones(TensorShape(3, 4))
        assert frobenius_norm(j) == pytest.approx(4 ** 1.5)

    def test_norm_single_entry(self):
        t = SparseTensor(TensorShape(3, 5), [[2, 3, 4]], [1.0])
        assert frobenius_norm(t) == 1.0

    def test_norm_matches_bruteforce(self, rng):
        t = random_sparse(rng, 3, 2, values="float")
        expected = np.sqrt(dense_inner(t.to_dense(), t.to_dense()))
        assert frobenius_norm(t) == pytest.approx(expected, rel=1e-12)

    def test_background_inner_gated(self):
        small = OffsetTensor(SparseTensor.empty(TensorShape(2, 3)), 2.0)
        assert frobenius_inner(small, small) == pytest.approx(4.0 * 9)
        big = OffsetTensor(SparseTensor.empty(TensorShape(4, 200)), 1.0)
        with pytest.raises(DenseGateError):
            frobenius_inner(big, big)

    def test_shape_mismatch(self):
        a = SparseTensor.empty(TensorShape(2, 3))
        b = SparseTensor.empty(TensorShape(2, 4))
        with pytest.raises(ShapeMismatchError):
            frobenius_inner(a, b)


class TestMultilinearForm:
    def test_basis_vectors_select_entry(self):
        j = SparseTensor.all_ones(TensorShape(3, 2))
        xs = VectorTuple.basis(3, 2, [1, 1, 1])
        assert multilinear_form(j, xs) == 1.0

    def test_uniform_vectors_on_ones(self):
        j = SparseTensor.all_ones(TensorShape(3, 2))
        xs = VectorTuple.uniform(3, 2)
        assert multilinear_form(j, xs) == pytest.approx(2 * np.sqrt(2), abs=1e-12)

    def test_matches_bruteforce(self, rng):
        for _ in range(20):
            t = random_sparse(rng, 3, 2, values="float")
            xs = [v / np.linalg.norm(v) for v in rng.standard_normal((3, 2))]
            assert multilinear_form(t, xs) == pytest.approx(
                dense_form(t.to_dense(), xs), rel=1e-10, abs=1e-12
            )

    def test_background_form(self, rng):
        t = random_sparse(rng, 2, 4)
        w = OffsetTensor(t, -0.25)
        xs = [rng.standard_normal(4) for _ in range(2)]
        assert multilinear_form(w, xs) == pytest.approx(
            dense_form(w.materialize(), xs), rel=1e-10, abs=1e-12
        )

    def test_form_bounded_by_frobenius(self, rng):
        for _ in range(50):
            t = random_sparse(rng, 3, 3, values="float")
            xs = [v / np.linalg.norm(v) for v in rng.standard_normal((3, 3))]
            assert abs(multilinear_form(t, xs)) <= frobenius_norm(t) + 1e-10

    def test_multilinearity_in_each_slot(self, rng):
        t = random_sparse(rng, 3, 3, values="float")
        base = [rng.standard_normal(3) for _ in range(3)]
        for slot in range(3):
            x, y = rng.standard_normal(3), rng.standard_normal(3)
            a, b = 0.7, -1.3
            combo = list(base)
            combo[slot] = a * x + b * y
            xs_x, xs_y = list(base), list(base)
            xs_x[slot], xs_y[slot] = x, y
            lhs = multilinear_form(t, combo)
            rhs = a * multilinear_form(t, xs_x) + b * multilinear_form(t, xs_y)
            assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-10)


class TestContract:
    def test_ones_uniform(self):
        j = SparseTensor.all_ones(TensorShape(3, 2))
        u = np.full(2, 2 ** -0.5)
        v = contract_all_but_one(j, [u, u], 1)
        assert v == pytest.approx(np.full(2, 2.0))

    def test_zero_tensor(self):
        z = SparseTensor.empty(TensorShape(3, 4))
        v = contract_all_but_one(z, [np.ones(4), np.ones(4)], 2)
        assert np.all(v == 0.0)

    def test_definition_replay(self, rng):
        t = random_sparse(rng, 3, 2, values="float")
        xs = [v / np.linalg.norm(v) for v in rng.standard_normal((3, 2))]
        for mode in range(1, 4):
            others = [xs[j] for j in range(3) if j != mode - 1]
            v = contract_all_but_one(t, others, mode)
            for i in range(2):
                probe = list(xs)
                e = np.zeros(2)
                e[i] = 1.0
                probe[mode - 1] = e
                assert v[i] == pytest.approx(multilinear_form(t, probe), rel=1e-12, abs=1e-12)


class TestHadamard:
    def test_identity_weight(self, rng):
        t = random_sparse(rng, 3, 2)
        j = SparseTensor.all_ones(t.shape)
        assert hadamard(j, t) == t
        assert hadamard(t, j).nnz == t.nnz

    def test_zero_weight(self, rng):
        t = random_sparse(rng, 3, 2)
        assert hadamard(SparseTensor.empty(t.shape), t).nnz == 0

    def test_matches_bruteforce(self, rng):
        a = random_sparse(rng, 3, 2)
        t = random_sparse(rng, 3, 2)
        expected = a.to_dense() * t.to_dense()
        assert np.array_equal(hadamard(a, t).to_dense(), expected)

    def test_dense_weights(self, rng):
        t = random_sparse(rng, 2, 4)
        w = rng.standard_normal((4, 4))
        assert np.allclose(hadamard(w, t).to_dense(), w * t.to_dense())


class TestCenter:
    def test_full_tensor_probability_one(self):
        j = SparseTensor.all_ones(TensorShape(3, 2))
        w = center(j, Homogeneous(1.0))
        assert np.all(w.materialize() == 0.0)
        xs = VectorTuple.uniform(3, 2)
        assert multilinear_form(w, xs) == pytest.approx(0.0, abs=1e-12)

    def test_empty_probability_zero(self):
        z = SparseTensor.empty(TensorShape(2, 3))
        w = center(z, Homogeneous(0.0))
        assert w.background == 0.0 and w.nnz == 0

    def test_matches_dense_subtraction(self, rng):
        t = random_sparse(rng, 2, 4, values="binary")
        w = center(t, Homogeneous(0.3))
        assert np.array_equal(w.materialize(), t.to_dense() - 0.3)

    def test_dense_model(self, rng):
        t = random_sparse(rng, 2, 4, values="binary")
        table = rng.random((4, 4))
        w = center(t, DenseProbability(table))
        assert np.allclose(w.materialize(), t.to_dense() - table)

    def test_dense_model_gate(self):
        with pytest.raises(DenseGateError):
            DenseProbability(np.broadcast_to(0.0, (200, 200, 200, 200)))


class TestRank1:
    def test_basis_outer(self):
        out = rank1([np.array([1.0, 0.0]), np.array([1.0, 0.0])])
        assert np.array_equal(out, [[1.0, 0.0], [0.0, 0.0]])

    def test_zero_vector(self):
        out = rank1([np.zeros(2), np.ones(2), np.ones(2)])
        assert np.all(out == 0.0)

    def test_hand_product(self):
        out = rank1([np.array([1.0, 2.0]), np.array([3.0, 4.0])])
        assert np.array_equal(out, [[3.0, 4.0], [6.0, 8.0]])


class TestVectorTuple:
    def test_unit_flag(self):
        assert VectorTuple.uniform(2, 5).unit
        assert not VectorTuple([np.ones(3), np.ones(3)]).unit

    def test_nonfinite_rejected(self):
        with pytest.raises(ValueError):
            VectorTuple([np.array([np.nan, 1.0])])


class TestSerialization:
    def test_header_and_roundtrip(self, rng):
        t = random_sparse(rng, 3, 3, values="float")
        w = OffsetTensor(t, -0.125)
        text = dumps_tensor(w)
        assert text.splitlines()[0] == f"3 3 {t.nnz} -0.125"
        again = loads_tensor(text)
        assert again == w
        assert dumps_tensor(again) == text

    @settings(max_examples=50, deadline=None)
    @given(st.lists(
        st.tuples(st.tuples(st.integers(1, 3), st.integers(1, 3)),
                  st.floats(-8, 8, allow_nan=False).filter(lambda v: v != 0.0)),
        max_size=6, unique_by=lambda e: e[0]))
    def test_roundtrip_identity_property(self, entries):
        t = SparseTensor.from_entries(TensorShape(2, 3), entries)
        again = loads_tensor(dumps_tensor(t))
        assert again.sparse == t
        assert dumps_tensor(again) == dumps_tensor(t)

    def test_entry_list_order_irrelevant(self, rng):
        sh = TensorShape(2, 4)
        entries = [((1, 2), 1.5), ((3, 1), -2.0), ((2, 2), 4.0)]
        perm = [entries[i] for i in rng.permutation(3)]
        assert SparseTensor.from_entries(sh, entries) == SparseTensor.from_entries(sh, perm)
