"""Property-based checks for the exact identities and tensor plumbing."""

import itertools
from fractions import Fraction

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from edcrit.symdecomp import mixed_power, vandermonde_decompose
from edcrit.tensors import (
    DenseTensor,
    ModeSplit,
    hs_norm,
    sorted_multi_indices,
    symmetrize,
    unfold_split,
)

small_frac = st.fractions(
    min_value=-3, max_value=3, max_denominator=4
)
vec2 = st.tuples(small_frac, small_frac)


@settings(max_examples=25, deadline=None)
@given(u=vec2, v=vec2, t=small_frac, d=st.integers(min_value=1, max_value=4))
def test_mixed_power_expansion_property(u, v, t, d):
    # sum_k t^k S_{k,d-k}(u,v) equals the d-th power of t*u + v, exactly
    vec = tuple(t * a + b for a, b in zip(u, v))
    for idx in sorted_multi_indices(2, d):
        direct = Fraction(1)
        for i in idx:
            direct *= vec[i]
        expanded = sum(
            t**k * mixed_power(u, v, k, d).coeffs[idx] for k in range(d + 1)
        )
        assert expanded == direct


@settings(max_examples=15, deadline=None)
@given(u=vec2, v=vec2, d=st.integers(min_value=2, max_value=4),
       data=st.data())
def test_vandermonde_matches_mixed_power_property(u, v, d, data):
    k = data.draw(st.integers(min_value=0, max_value=d))
    comb = vandermonde_decompose(u, v, k, d)
    target = mixed_power(u, v, k, d)
    got = comb.densify_coeffs()
    for idx, val in target.coeffs.items():
        assert got[idx] == Fraction(val)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(min_value=0, max_value=10**6),
       m=st.integers(min_value=2, max_value=3),
       d=st.integers(min_value=2, max_value=3))
def test_symmetrize_idempotent_and_invariant(seed, m, d):
    rng = np.random.default_rng(seed)
    t = DenseTensor.from_array(rng.standard_normal((m,) * d))
    s = symmetrize(t)
    arr = s.densify().array()
    for perm in itertools.permutations(range(d)):
        np.testing.assert_allclose(arr, arr.transpose(perm), atol=1e-12)
    again = symmetrize(s.densify())
    for idx, val in s.coeffs.items():
        assert abs(again.coeffs[idx] - val) < 1e-12


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(min_value=0, max_value=10**6))
def test_unfold_split_preserves_norm(seed):
    rng = np.random.default_rng(seed)
    t = DenseTensor.from_array(rng.standard_normal((2, 2, 2, 2, 2)))
    for split in (ModeSplit(1, 2, 2), ModeSplit(2, 2, 1), ModeSplit(1, 1, 3)):
        u = unfold_split(t, split)
        assert hs_norm(u) == hs_norm(t)
        np.testing.assert_array_equal(u.data, t.data)
