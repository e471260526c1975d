from fractions import Fraction

import pytest

from edcrit.symdecomp import (
    exact_det,
    exact_power_entries,
    mixed_power,
    power_basis,
    power_basis_matrix,
    vandermonde_decompose,
)
from edcrit.tensors import sorted_multi_indices, sym_dim


def _power_sum(u, v, t, d):
    """Exact entries of the d-th tensor power of t*u + v, sorted-index keyed."""
    vec = tuple(Fraction(t) * Fraction(a) + Fraction(b) for a, b in zip(u, v))
    return exact_power_entries(vec, d)


def test_mixed_power_binomial_expansion():
    # oracle: (t u + v)^{(x) d} = sum_k t^k S_{k,d-k}(u, v), checked exactly
    # at several rational values of t
    u = (Fraction(2), Fraction(-1), Fraction(3))
    v = (Fraction(1), Fraction(1, 2), Fraction(0))
    d = 4
    mixed = [mixed_power(u, v, k, d) for k in range(d + 1)]
    for t in (Fraction(0), Fraction(1), Fraction(-2), Fraction(3, 7)):
        lhs = _power_sum(u, v, t, d)
        for idx in sorted_multi_indices(3, d):
            rhs = sum(t**k * mixed[k].coeffs[idx] for k in range(d + 1))
            assert lhs[idx] == rhs


def test_mixed_power_boundaries():
    u = (Fraction(1), Fraction(2))
    v = (Fraction(-1), Fraction(1))
    d = 3
    assert mixed_power(u, v, d, d).coeffs == exact_power_entries(u, d)
    assert mixed_power(u, v, 0, d).coeffs == exact_power_entries(v, d)
    with pytest.raises(ValueError):
        mixed_power(u, v, 4, 3)
    with pytest.raises(ValueError):
        mixed_power(u, (Fraction(1),), 1, 3)


@pytest.mark.parametrize("d", range(2, 6))
def test_vandermonde_exactness(d):
    u = (Fraction(1), Fraction(-2), Fraction(1, 3))
    v = (Fraction(0), Fraction(1), Fraction(2))
    for k in range(d + 1):
        comb = vandermonde_decompose(u, v, k, d)
        target = mixed_power(u, v, k, d)
        got = comb.densify_coeffs()
        for idx, val in target.coeffs.items():
            assert got[idx] == val, (d, k, idx)


def test_vandermonde_custom_nodes():
    u = (Fraction(1), Fraction(0))
    v = (Fraction(0), Fraction(1))
    nodes = [Fraction(1, 2), Fraction(-1), Fraction(3)]
    comb = vandermonde_decompose(u, v, 1, 3, nodes=nodes)
    assert comb.densify_coeffs() == {
        idx: Fraction(c) for idx, c in mixed_power(u, v, 1, 3).coeffs.items()
    }
    with pytest.raises(ValueError):
        vandermonde_decompose(u, v, 1, 3, nodes=[0, 0, 1])
    with pytest.raises(ValueError):
        vandermonde_decompose(u, v, 1, 3, nodes=[0, 1])


def test_vandermonde_json():
    u = (Fraction(1), Fraction(0))
    v = (Fraction(0), Fraction(1))
    comb = vandermonde_decompose(u, v, 2, 3)
    import json

    obj = json.loads(comb.to_json())
    assert obj["d"] == 3
    assert all("/" in t["coeff"] for t in obj["terms"])


@pytest.mark.parametrize("m,d", [(2, 2), (2, 3), (3, 3), (2, 4), (3, 2)])
def test_power_basis_certified(m, d):
    vectors = power_basis(m, d)
    assert len(vectors) == sym_dim(m, d)
    det = exact_det(power_basis_matrix(vectors, d))
    assert det != 0


def test_power_basis_expands_arbitrary_symmetric():
    # the powers span: solve for coordinates of a random rational symmetric
    # tensor and verify the exact recombination
    from edcrit.symdecomp import _solve_exact

    m, d = 2, 3
    vectors = power_basis(m, d)
    mat = power_basis_matrix(vectors, d)
    indices = sorted_multi_indices(m, d)
    target = {idx: Fraction(i + 1, 7) for i, idx in enumerate(indices)}
    rhs = [target[idx] for idx in indices]
    coords = _solve_exact(mat, rhs)
    powers = [exact_power_entries(v, d) for v in vectors]
    for idx in indices:
        total = sum(c * p[idx] for c, p in zip(coords, powers))
        assert total == target[idx]


def test_exact_det_known_values():
    assert exact_det([[2, 0], [0, 3]]) == 6
    assert exact_det([[1, 2], [2, 4]]) == 0
    assert exact_det([[0, 1], [1, 0]]) == -1
    # oracle: cofactor expansion of a fixed 3x3
    mat = [[1, 2, 3], [4, 5, 6], [7, 8, 10]]
    assert exact_det(mat) == Fraction(-3)


def test_power_basis_rejects_degenerate_sizes():
    with pytest.raises(ValueError):
        power_basis(1, 3)
    with pytest.raises(ValueError):
        power_basis(2, 1)
