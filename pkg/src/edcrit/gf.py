"""Exact linear algebra and exhaustive rank searches over prime fields GF(p).

Desk-scale only: exhaustive searches are bounded by p^m <= 64 and at most
four rank-one terms, which is enough to verify the small counterexamples
this package cares about.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from functools import reduce
from typing import Optional

import numpy as np

from .tensors import sorted_multi_indices, sym_dim

__all__ = [
    "GFTensor",
    "gf_rank",
    "srank_exhaustive",
    "rank_exhaustive",
    "prop61_witness",
    "Prop61Result",
    "example64_tensor",
]

MAX_PRIME = 97
SEARCH_SPACE_LIMIT = 2_000_000


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    for i in range(2, int(math.isqrt(n)) + 1):
        if n % i == 0:
            return False
    return True


def _check_prime(p: int):
    if not _is_prime(p):
        raise ValueError(f"modulus {p} is not prime")
    if p > MAX_PRIME:
        raise ValueError(f"modulus {p} exceeds the supported bound {MAX_PRIME}")


@dataclass(frozen=True)
class GFTensor:
    """Tensor over GF(p) with entries stored as residues in [0, p)."""

    p: int
    shape: tuple
    entries: np.ndarray

    def __post_init__(self):
        _check_prime(self.p)
        shape = tuple(int(s) for s in self.shape)
        object.__setattr__(self, "shape", shape)
        entries = np.asarray(self.entries, dtype=np.int64).ravel() % self.p
        if entries.size != int(np.prod(shape)):
            raise ValueError("entry count does not match shape")
        entries.flags.writeable = False
        object.__setattr__(self, "entries", entries)

    @classmethod
    def from_array(cls, p: int, arr) -> "GFTensor":
        arr = np.asarray(arr, dtype=np.int64)
        return cls(p, arr.shape, arr.ravel())

    def array(self) -> np.ndarray:
        return self.entries.reshape(self.shape)

    def to_json(self) -> str:
        return json.dumps(
            {"p": self.p, "shape": list(self.shape), "entries": self.entries.tolist()}
        )

    @classmethod
    def from_json(cls, text: str) -> "GFTensor":
        obj = json.loads(text)
        return cls(obj["p"], tuple(obj["shape"]), np.asarray(obj["entries"]))


def gf_rank(matrix, p: int) -> int:
    """Rank over GF(p) by row-echelon Gaussian elimination."""
    _check_prime(p)
    mat = np.asarray(matrix, dtype=np.int64) % p
    if mat.ndim != 2:
        raise ValueError("gf_rank expects a matrix")
    mat = mat.copy()
    rows, cols = mat.shape
    rank = 0
    for col in range(cols):
        if rank >= rows:
            break
        nz = np.nonzero(mat[rank:, col])[0]
        if nz.size == 0:
            continue
        pivot = nz[0] + rank
        if pivot != rank:
            mat[[rank, pivot]] = mat[[pivot, rank]]
        inv = pow(int(mat[rank, col]), -1, p)
        mat[rank] = (mat[rank] * inv) % p
        for r in range(rank + 1, rows):
            if mat[r, col]:
                mat[r] = (mat[r] - mat[r, col] * mat[rank]) % p
        rank += 1
    return rank


def _nonzero_vectors(p: int, m: int):
    return [v for v in itertools.product(range(p), repeat=m) if any(v)]


def _projective_reps(p: int, m: int):
    """One representative per line: first nonzero coordinate normalized to 1."""
    reps = []
    for v in _nonzero_vectors(p, m):
        lead = next(x for x in v if x)
        if lead == 1:
            reps.append(v)
    return reps


def _outer_mod(vectors, p: int) -> np.ndarray:
    arrs = [np.asarray(v, dtype=np.int64) for v in vectors]
    return reduce(lambda a, b: np.multiply.outer(a, b) % p, arrs) % p


def _check_search_pre(t: GFTensor, max_terms: int):
    m = t.shape[0]
    if t.p**m > 64:
        raise ValueError("search space too large: requires p^m <= 64")
    if max_terms > 4:
        raise ValueError("search space too large: requires max_terms <= 4")


def srank_exhaustive(s: GFTensor, max_terms: int) -> Optional[int]:
    """Smallest number of weighted symmetric rank-one terms summing to ``s``.

    Searches all combinations of terms c * u^{\\otimes d} over GF(p) in
    increasing term count; returns None if no decomposition with at most
    ``max_terms`` terms exists (which can happen in finite characteristic).
    """
    _check_search_pre(s, max_terms)
    p = s.p
    m = s.shape[0]
    d = len(s.shape)
    target = s.array()
    if not target.any():
        return 0
    terms = []
    for u in _projective_reps(p, m):
        power = _outer_mod([u] * d, p)
        for c in range(1, p):
            terms.append((c * power) % p)
    return _search_sums(terms, target, p, max_terms)


def rank_exhaustive(t: GFTensor, max_terms: int) -> Optional[int]:
    """Smallest number of (not necessarily symmetric) rank-one terms for ``t``."""
    _check_search_pre(t, max_terms)
    p = t.p
    d = len(t.shape)
    target = t.array()
    if not target.any():
        return 0
    reps = [_projective_reps(p, s) for s in t.shape]
    n_tuples = math.prod(len(r) for r in reps) * (p - 1)
    if n_tuples**min(max_terms, 2) > SEARCH_SPACE_LIMIT:
        raise ValueError("search space too large")
    terms = []
    for combo in itertools.product(*reps):
        base = _outer_mod(combo, p)
        for c in range(1, p):
            terms.append((c * base) % p)
    return _search_sums(terms, target, p, max_terms)


def _search_sums(terms, target, p: int, max_terms: int) -> Optional[int]:
    """First (smallest) term count whose sum hits target; deterministic order."""
    for count in range(1, max_terms + 1):
        if len(terms) ** count > SEARCH_SPACE_LIMIT:
            raise ValueError("search space too large")
        for combo in itertools.combinations_with_replacement(range(len(terms)), count):
            total = terms[combo[0]].copy()
            for i in combo[1:]:
                total = (total + terms[i]) % p
            if np.array_equal(total, target):
                return count
    return None


@dataclass(frozen=True)
class Prop61Result:
    """Outcome of the rank-one-span computation in S(m, d, GF(p))."""

    p: int
    m: int
    d: int
    sym_dim: int
    line_count: int
    span_dim: int
    witness: Optional[GFTensor]

    @property
    def inequality_holds(self) -> bool:
        return self.sym_dim > self.line_count

    def to_json(self) -> str:
        return json.dumps(
            {
                "p": self.p,
                "m": self.m,
                "d": self.d,
                "sym_dim": self.sym_dim,
                "line_count": self.line_count,
                "span_dim": self.span_dim,
                "inequality_holds": self.inequality_holds,
                "witness": None if self.witness is None
                else json.loads(self.witness.to_json()),
            }
        )


def prop61_witness(p: int, m: int, d: int) -> Prop61Result:
    """Symmetric GF(p) tensor outside the span of symmetric rank-one tensors.

    When binom(m+d-1, d) exceeds the number of lines in GF(p)^m the span of
    all d-th powers is a proper subspace, so a witness exists; the returned
    witness is verified to increase the span rank by one.  Otherwise the
    witness is None and only the span dimension is reported.
    """
    _check_prime(p)
    if p**m > 256:
        raise ValueError("prop61_witness requires p^m <= 256")
    dim = sym_dim(m, d)
    line_count = (p**m - 1) // (p - 1)
    indices = sorted_multi_indices(m, d)
    index_pos = {idx: i for i, idx in enumerate(indices)}
    # coordinates of each d-th power in the sorted-entry basis
    rows = []
    for u in _projective_reps(p, m):
        vec = np.zeros(dim, dtype=np.int64)
        for idx in indices:
            val = 1
            for i in idx:
                val = (val * u[i]) % p
            vec[index_pos[idx]] = val
        rows.append(vec)
    span = np.array(rows, dtype=np.int64)
    span_dim = gf_rank(span, p)
    witness = None
    if dim > line_count:
        for idx in indices:
            cand = np.zeros(dim, dtype=np.int64)
            cand[index_pos[idx]] = 1
            if gf_rank(np.vstack([span, cand]), p) == span_dim + 1:
                arr = np.zeros((m,) * d, dtype=np.int64)
                for perm in set(itertools.permutations(idx)):
                    arr[perm] = 1
                witness = GFTensor.from_array(p, arr)
                break
        assert witness is not None, "witness guaranteed when dim exceeds line count"
    return Prop61Result(p, m, d, dim, line_count, span_dim, witness)


def example64_tensor(p: int = 2) -> GFTensor:
    """The symmetric 2x2 tensor e1 (x) e2 + e2 (x) e1 over GF(p)."""
    arr = np.array([[0, 1], [1, 0]], dtype=np.int64)
    return GFTensor.from_array(p, arr)
