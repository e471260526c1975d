import itertools
import json
import math

import numpy as np
import pytest

from edcrit.tensors import (
    DenseTensor,
    ModeSplit,
    RankOneTerm,
    SymTensor,
    hs_inner,
    hs_norm,
    orbit_size,
    rank_one,
    sorted_multi_indices,
    sym_dim,
    symmetrize,
    unfold_split,
)


def test_dense_roundtrip():
    rng = np.random.default_rng(0)
    t = DenseTensor.from_array(rng.standard_normal((2, 3, 4)))
    t2 = DenseTensor.from_json(t.to_json())
    assert t2.shape == t.shape
    np.testing.assert_array_equal(t2.data, t.data)


def test_dense_shape_mismatch():
    with pytest.raises(ValueError):
        DenseTensor((2, 2), np.zeros(5))


def test_dense_immutable():
    t = DenseTensor.from_array(np.ones((2, 2)))
    with pytest.raises(ValueError):
        t.data[0] = 7.0


def test_sym_dim_values():
    assert sym_dim(2, 2) == 3
    assert sym_dim(2, 3) == 4
    assert sym_dim(3, 3) == 10
    assert sym_dim(3, 4) == 15


def test_sorted_multi_indices_count():
    for m, d in [(2, 2), (3, 3), (4, 2)]:
        idx = sorted_multi_indices(m, d)
        assert len(idx) == sym_dim(m, d)
        assert all(tuple(sorted(i)) == i for i in idx)


def test_orbit_size():
    # oracle: explicit permutation sets
    for idx in [(0, 0, 0), (0, 0, 1), (0, 1, 2), (1, 1, 2, 2)]:
        assert orbit_size(idx) == len(set(itertools.permutations(idx)))


def test_hs_inner_matches_flat_dot():
    rng = np.random.default_rng(1)
    a = rng.standard_normal((2, 2, 2))
    b = rng.standard_normal((2, 2, 2))
    x, y = DenseTensor.from_array(a), DenseTensor.from_array(b)
    assert hs_inner(x, y) == pytest.approx(float(np.sum(a * b)))
    assert hs_norm(x) == pytest.approx(np.linalg.norm(a))
    with pytest.raises(ValueError):
        hs_inner(x, DenseTensor.from_array(np.zeros((2, 2))))


def test_symmetrize_is_projection():
    rng = np.random.default_rng(2)
    t = DenseTensor.from_array(rng.standard_normal((3, 3, 3)))
    s = symmetrize(t)
    dense = s.densify()
    # idempotent
    s2 = symmetrize(dense)
    for idx, val in s.coeffs.items():
        assert s2.coeffs[idx] == pytest.approx(val)
    # densified result is invariant under every mode permutation
    arr = dense.array()
    for perm in itertools.permutations(range(3)):
        np.testing.assert_allclose(arr, arr.transpose(perm), atol=1e-12)
    # orthogonal projection: t - sym(t) is orthogonal to the symmetric part
    assert hs_inner(DenseTensor.from_array(t.array() - arr), dense) == \
        pytest.approx(0.0, abs=1e-10)


def test_symmetrize_rejects_noncubical():
    with pytest.raises(ValueError):
        symmetrize(DenseTensor.from_array(np.zeros((2, 3))))


def test_sym_tensor_roundtrip_and_coeff():
    s = SymTensor(2, 3, {(0, 0, 1): 2.5, (1, 1, 1): -1.0})
    assert s.coeff(1, 0, 0) == 2.5  # unsorted access resolves to sorted key
    s2 = SymTensor.from_json(s.to_json())
    assert s2.coeffs == s.coeffs
    arr = s.densify().array()
    assert arr[0, 1, 0] == 2.5 and arr[1, 1, 1] == -1.0


def test_sym_tensor_rejects_unsorted_keys():
    with pytest.raises(ValueError):
        SymTensor(2, 2, {(1, 0): 1.0})


def test_unfold_split_index_identity():
    rng = np.random.default_rng(3)
    t = DenseTensor.from_array(rng.standard_normal((2, 2, 2, 2)))
    s = ModeSplit(1, 1, 2)
    u = unfold_split(t, s)
    assert u.shape == (2, 2, 4)
    arr, uarr = t.array(), u.array()
    for idx in np.ndindex(*t.shape):
        i = idx[0]
        j = idx[1]
        kk = idx[2] * 2 + idx[3]
        assert uarr[i, j, kk] == arr[idx]


def test_rank_one_densify():
    term = RankOneTerm.make(1.0, [np.array([3.0, 0.0]), np.array([0.0, 2.0])])
    assert term.weight == pytest.approx(6.0)
    arr = rank_one(term).array()
    np.testing.assert_allclose(arr, np.outer([3.0, 0.0], [0.0, 2.0]))


def test_rank_one_term_validation():
    with pytest.raises(ValueError):
        RankOneTerm(1.0, (np.array([1.0, 1.0]),))  # not unit norm
    with pytest.raises(ValueError):
        RankOneTerm.make(1.0, [np.zeros(2)])


def test_mode_split():
    s = ModeSplit(1, 2, 2)
    assert s.d == 5
    with pytest.raises(ValueError):
        ModeSplit(0, 1, 1)
