"""Constructive symmetric decompositions in exact rational arithmetic.

Everything here is an algebraic identity, so all arithmetic is done with
``fractions.Fraction``; verification is by exact expansion, never by
floating comparison.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction

from .tensors import SymTensor, sorted_multi_indices, sym_dim

__all__ = [
    "SymCombination",
    "mixed_power",
    "vandermonde_decompose",
    "power_basis",
    "sym_dim",
    "exact_power_entries",
    "power_basis_matrix",
    "exact_det",
]


def _frac_vec(v):
    return tuple(Fraction(x) for x in v)


@dataclass(frozen=True)
class SymCombination:
    """A combination sum_i c_i * (d-th tensor power of v_i) with rational c_i."""

    d: int
    terms: tuple  # of (Fraction, tuple-of-Fraction vector)

    def densify_coeffs(self) -> dict:
        """Exact entries of the densified sum, keyed by sorted multi-index."""
        m = len(self.terms[0][1])
        out = {}
        for idx in sorted_multi_indices(m, self.d):
            val = Fraction(0)
            for c, v in self.terms:
                prod = Fraction(1)
                for i in idx:
                    prod *= v[i]
                val += c * prod
            out[idx] = val
        return out

    def to_json(self) -> str:
        terms = [
            {"coeff": f"{c.numerator}/{c.denominator}",
             "vector": [f"{x.numerator}/{x.denominator}" for x in v]}
            for c, v in self.terms
        ]
        return json.dumps({"d": self.d, "terms": terms})


def mixed_power(u, v, k: int, d: int) -> SymTensor:
    """Symmetric tensor collecting all arrangements of k copies of u and d-k of v.

    The entry at a multi-index is the sum over all k-subsets A of positions
    of prod_{p in A} u[i_p] * prod_{p not in A} v[i_p].  Boundary cases are
    the pure powers of u (k = d) and v (k = 0).
    """
    if not 0 <= k <= d:
        raise ValueError(f"k must be in [0, {d}], got {k}")
    u = _frac_vec(u)
    v = _frac_vec(v)
    m = len(u)
    if len(v) != m:
        raise ValueError("u and v must have the same length")
    coeffs = {}
    positions = list(range(d))
    for idx in sorted_multi_indices(m, d):
        val = Fraction(0)
        for sub in itertools.combinations(positions, k):
            chosen = set(sub)
            prod = Fraction(1)
            for p in positions:
                prod *= u[idx[p]] if p in chosen else v[idx[p]]
            val += prod
        coeffs[idx] = val
    return SymTensor(m, d, coeffs)


def _solve_exact(matrix, rhs):
    """Solve a square rational linear system by Gaussian elimination."""
    n = len(matrix)
    a = [[Fraction(x) for x in row] + [Fraction(y)] for row, y in zip(matrix, rhs)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col] != 0), None)
        if pivot is None:
            raise ValueError("singular system")
        a[col], a[pivot] = a[pivot], a[col]
        inv = Fraction(1) / a[col][col]
        a[col] = [x * inv for x in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                factor = a[r][col]
                a[r] = [x - factor * y for x, y in zip(a[r], a[col])]
    return [a[r][n] for r in range(n)]


def vandermonde_decompose(u, v, k: int, d: int, nodes=None) -> SymCombination:
    """Express the mixed power S_{k,d-k}(u, v) through pure d-th powers.

    Inverts the Vandermonde system in the node values exactly, producing a
    rational combination of the powers of (tau_i * u + v) and of u itself.
    """
    if not 0 <= k <= d:
        raise ValueError(f"k must be in [0, {d}], got {k}")
    if nodes is None:
        nodes = list(range(d))
    nodes = [Fraction(t) for t in nodes]
    if len(nodes) != d or len(set(nodes)) != d:
        raise ValueError("need d pairwise distinct nodes")
    u = _frac_vec(u)
    v = _frac_vec(v)
    if k == d:
        return SymCombination(d, ((Fraction(1), u),))
    # (tau u + v)^{\otimes d} - tau^d u^{\otimes d} = sum_{j<d} tau^j S_j
    vand = [[tau**j for j in range(d)] for tau in nodes]
    rhs = [Fraction(1) if j == k else Fraction(0) for j in range(d)]
    # want weights w with sum_i w_i tau_i^j = delta_{jk}: solve transpose system
    vand_t = [[vand[i][j] for i in range(d)] for j in range(d)]
    weights = _solve_exact(vand_t, rhs)
    terms = []
    u_coeff = Fraction(0)
    for w, tau in zip(weights, nodes):
        if w != 0:
            vec = tuple(tau * a + b for a, b in zip(u, v))
            terms.append((w, vec))
        u_coeff -= w * tau**d
    if u_coeff != 0:
        terms.append((u_coeff, u))
    return SymCombination(d, tuple(terms))


def exact_power_entries(vec, d: int) -> dict:
    """Entries of the d-th tensor power of a rational vector, by sorted index."""
    vec = _frac_vec(vec)
    m = len(vec)
    out = {}
    for idx in sorted_multi_indices(m, d):
        prod = Fraction(1)
        for i in idx:
            prod *= vec[i]
        out[idx] = prod
    return out


def power_basis(m: int, d: int):
    """Integer vectors whose d-th powers span the symmetric tensors.

    Follows the peel-one-variable recursion: candidate vectors are
    (j_1, ..., j_{m-1}, 1) over the staircase of exponent vectors with
    total degree at most d (pure-power corners excluded), plus the m-1
    pure coordinate vectors.  Invertibility is certified by an exact
    nonzero determinant of the coefficient matrix.
    """
    if m < 2 or d < 2:
        raise ValueError("power_basis requires m, d >= 2")
    vectors = []
    for counts in itertools.product(range(d + 1), repeat=m - 1):
        if sum(counts) > d:
            continue
        if any(c == d for c in counts):
            continue  # pure powers of e_1..e_{m-1} appended separately
        vectors.append(tuple(counts) + (1,))
    for j in range(m - 1):
        vec = [0] * m
        vec[j] = 1
        vectors.append(tuple(vec))
    assert len(vectors) == sym_dim(m, d)
    det = exact_det(power_basis_matrix(vectors, d))
    if det == 0:
        raise RuntimeError(f"power basis certification failed for (m={m}, d={d})")
    return vectors


def power_basis_matrix(vectors, d: int):
    """Coefficient matrix: row per sorted multi-index, column per vector power."""
    m = len(vectors[0])
    indices = sorted_multi_indices(m, d)
    cols = [exact_power_entries(v, d) for v in vectors]
    return [[col[idx] for col in cols] for idx in indices]


def exact_det(matrix) -> Fraction:
    """Determinant over the rationals by fraction-free style elimination."""
    n = len(matrix)
    a = [[Fraction(x) for x in row] for row in matrix]
    det = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            a[col], a[pivot] = a[pivot], a[col]
            det = -det
        det *= a[col][col]
        inv = Fraction(1) / a[col][col]
        for r in range(col + 1, n):
            if a[r][col] != 0:
                factor = a[r][col] * inv
                a[r] = [x - factor * y for x, y in zip(a[r], a[col])]
    return det
