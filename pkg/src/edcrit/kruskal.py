"""Kruskal ranks, the uniqueness condition, and rank certification.

Kruskal ranks are computed by exhaustive subset enumeration with a
scale-invariant singular value test; at desk scale (r <= 12) exactness is
cheap.  The certified-rank bound for symmetric decompositions is kept as an
exact rational because it is fractional for odd mode size.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Optional

import numpy as np

from .tensors import ModeSplit, RankOneTerm

__all__ = [
    "FactorBundle",
    "KruskalCertificate",
    "krank",
    "certify",
    "is_abc_generic",
    "n_bound",
    "n_bound_tensor",
    "certify_symmetric_rank",
    "certify_tensor_rank",
    "canonical_split",
]

INDEPENDENCE_RTOL = 1e-10


@dataclass(frozen=True)
class FactorBundle:
    """Factor matrices Y, Z, W of a 3-mode rank-one decomposition."""

    Y: np.ndarray
    Z: np.ndarray
    W: np.ndarray

    def __post_init__(self):
        for name in ("Y", "Z", "W"):
            mat = np.asarray(getattr(self, name), dtype=float)
            if mat.ndim != 2:
                raise ValueError(f"{name} must be a matrix")
            object.__setattr__(self, name, mat)
        r = self.Y.shape[1]
        if r < 1 or self.Z.shape[1] != r or self.W.shape[1] != r:
            raise ValueError("factor matrices must share a positive column count")
        for mat in (self.Y, self.Z, self.W):
            if np.any(np.linalg.norm(mat, axis=0) == 0.0):
                raise ValueError("all factor columns must be nonzero")

    @property
    def r(self) -> int:
        return self.Y.shape[1]


@dataclass(frozen=True)
class KruskalCertificate:
    """Result of the Kruskal condition check kappa1+kappa2+kappa3 >= 2r+2."""

    kappas: tuple
    r: int
    condition_met: bool
    rank_certified: Optional[int]
    uniqueness_certified: bool
    bound: Optional[Fraction] = None
    bound_met: Optional[bool] = None
    verdict: str = ""

    def to_json(self) -> str:
        return json.dumps(
            {
                "kappas": list(self.kappas),
                "r": self.r,
                "condition_met": self.condition_met,
                "rank_certified": self.rank_certified,
                "uniqueness_certified": self.uniqueness_certified,
                "bound": None if self.bound is None else str(self.bound),
                "bound_met": self.bound_met,
                "verdict": self.verdict,
            }
        )


def krank(columns) -> int:
    """Kruskal rank: largest k such that every k-subset of columns is independent."""
    mat = np.asarray(columns, dtype=float)
    if mat.ndim != 2:
        raise ValueError("krank expects a matrix")
    norms = np.linalg.norm(mat, axis=0)
    if np.any(norms == 0.0):
        raise ValueError("krank is undefined for zero columns")
    n, l = mat.shape
    scale = np.linalg.svd(mat, compute_uv=False)[0]
    k = 0
    for size in range(1, min(n, l) + 1):
        if all(
            np.linalg.svd(mat[:, list(sub)], compute_uv=False)[-1]
            > INDEPENDENCE_RTOL * scale
            for sub in itertools.combinations(range(l), size)
        ):
            k = size
        else:
            break
    return k


def certify(f: FactorBundle) -> KruskalCertificate:
    """Apply Kruskal's sufficient condition to a 3-mode decomposition."""
    kappas = (krank(f.Y), krank(f.Z), krank(f.W))
    condition_met = sum(kappas) >= 2 * f.r + 2
    return KruskalCertificate(
        kappas=kappas,
        r=f.r,
        condition_met=condition_met,
        rank_certified=f.r if condition_met else None,
        uniqueness_certified=condition_met,
        verdict="certified" if condition_met else "kruskal condition not met",
    )


def _grouped_power(vec: np.ndarray, a: int) -> np.ndarray:
    return reduce(np.multiply.outer, [vec] * a).ravel()


def grouped_factor_matrices(terms, s: ModeSplit):
    """Column-stack the grouped tensor powers of each term's factors.

    For symmetric terms (one repeated factor) the grouped column for block
    size a is the flattened a-th power of the factor; the term weight is
    absorbed into the first block.
    """
    cols = {0: [], 1: [], 2: []}
    blocks = (s.a, s.b, s.c)
    for term in terms:
        factors = term.factors
        d = len(factors)
        if d != s.d:
            raise ValueError(f"split {s} does not match term order {d}")
        pos = 0
        for bi, size in enumerate(blocks):
            group = factors[pos:pos + size]
            col = reduce(np.multiply.outer, group).ravel()
            if bi == 0:
                col = col * term.weight
            cols[bi].append(col)
            pos += size
    return tuple(np.column_stack(cols[bi]) for bi in range(3))


def _symmetric_bounds(m: int, s: ModeSplit):
    return tuple(math.comb(m + a - 1, a) for a in (s.a, s.b, s.c))


def _tensor_bounds(m: int, s: ModeSplit):
    return tuple(m**a for a in (s.a, s.b, s.c))


def is_abc_generic(terms, s: ModeSplit, m: int, symmetric: bool = True) -> bool:
    """Check the grouped-factor genericity condition for a list of terms.

    Every subset of size min(bound, r) of each grouped factor matrix must be
    linearly independent, where the bound is the dimension of the space the
    grouped columns live in (symmetric powers for symmetric terms, full
    tensor powers otherwise).
    """
    terms = list(terms)
    if not terms:
        raise ValueError("terms must be nonempty")
    r = len(terms)
    mats = grouped_factor_matrices(terms, s)
    bounds = _symmetric_bounds(m, s) if symmetric else _tensor_bounds(m, s)
    for mat, bound in zip(mats, bounds):
        size = min(bound, r)
        scale = np.linalg.svd(mat, compute_uv=False)[0]
        for sub in itertools.combinations(range(r), size):
            smin = np.linalg.svd(mat[:, list(sub)], compute_uv=False)[-1]
            if smin <= INDEPENDENCE_RTOL * scale:
                return False
    return True


def n_bound(m: int, d: int) -> Fraction:
    """Certified-term-count bound for symmetric decompositions.

    Exact rational: binom(m+(d-3)/2, m-1) + (m-2)/2 for odd d, and
    binom(m+(d-4)/2, m-1) + (m-2) for even d.  Fractional for odd m, and
    deliberately not truncated.
    """
    if m < 2:
        raise ValueError("n_bound requires m >= 2")
    if d < 3:
        raise ValueError("n_bound requires d >= 3")
    if d % 2 == 1:
        return Fraction(math.comb(m + (d - 3) // 2, m - 1)) + Fraction(m - 2, 2)
    return Fraction(math.comb(m + (d - 4) // 2, m - 1)) + Fraction(m - 2)


def n_bound_tensor(m: int, d: int) -> Fraction:
    """Certified-term-count bound for general (non-symmetric) decompositions."""
    if m < 2:
        raise ValueError("n_bound_tensor requires m >= 2")
    if d < 3:
        raise ValueError("n_bound_tensor requires d >= 3")
    b = (d - 1) // 2
    if d % 2 == 1:
        return Fraction(m**b) + Fraction(m - 2, 2)
    return Fraction(m**b) + Fraction(m - 2)


def canonical_split(d: int) -> ModeSplit:
    """The (1, floor((d-1)/2), ceil((d-1)/2)) split used for certification."""
    if d < 3:
        raise ValueError("canonical split requires d >= 3")
    b = (d - 1) // 2
    return ModeSplit(1, b, d - 1 - b)


def certify_symmetric_rank(terms, m: int, d: int) -> KruskalCertificate:
    """Certify that a symmetric decomposition has rank = srank = its term count.

    Requires weights +-1, grouped-factor genericity at the canonical split,
    term count within the certified bound, and Kruskal's condition on the
    grouped factor matrices.
    """
    terms = list(terms)
    if d < 3:
        raise ValueError("certification requires d >= 3")
    for term in terms:
        if abs(abs(term.weight) - 1.0) > 1e-9:
            raise ValueError("symmetric certification requires weights +1 or -1")
        if len(term.factors) != d:
            raise ValueError("term order does not match d")
    s = len(terms)
    split = canonical_split(d)
    bound = n_bound(m, d)
    if Fraction(s) > bound:
        return KruskalCertificate(
            kappas=(0, 0, 0), r=s, condition_met=False, rank_certified=None,
            uniqueness_certified=False, bound=bound, bound_met=False,
            verdict="bound exceeded",
        )
    if not is_abc_generic(terms, split, m, symmetric=True):
        return KruskalCertificate(
            kappas=(0, 0, 0), r=s, condition_met=False, rank_certified=None,
            uniqueness_certified=False, bound=bound, bound_met=True,
            verdict="genericity check failed",
        )
    Y, Z, W = grouped_factor_matrices(terms, split)
    cert = certify(FactorBundle(Y, Z, W))
    return KruskalCertificate(
        kappas=cert.kappas, r=s, condition_met=cert.condition_met,
        rank_certified=cert.rank_certified,
        uniqueness_certified=cert.uniqueness_certified,
        bound=bound, bound_met=True,
        verdict="certified rank = srank = s" if cert.condition_met
        else "kruskal condition not met",
    )


def certify_tensor_rank(terms, m: int, d: int) -> KruskalCertificate:
    """Non-symmetric variant of the certification, with tensor-power bounds."""
    terms = list(terms)
    if d < 3:
        raise ValueError("certification requires d >= 3")
    r = len(terms)
    split = canonical_split(d)
    bound = n_bound_tensor(m, d)
    if Fraction(r) > bound:
        return KruskalCertificate(
            kappas=(0, 0, 0), r=r, condition_met=False, rank_certified=None,
            uniqueness_certified=False, bound=bound, bound_met=False,
            verdict="bound exceeded",
        )
    if not is_abc_generic(terms, split, m, symmetric=False):
        return KruskalCertificate(
            kappas=(0, 0, 0), r=r, condition_met=False, rank_certified=None,
            uniqueness_certified=False, bound=bound, bound_met=True,
            verdict="genericity check failed",
        )
    Y, Z, W = grouped_factor_matrices(terms, split)
    cert = certify(FactorBundle(Y, Z, W))
    return KruskalCertificate(
        kappas=cert.kappas, r=r, condition_met=cert.condition_met,
        rank_certified=cert.rank_certified,
        uniqueness_certified=cert.uniqueness_certified,
        bound=bound, bound_met=True,
        verdict="certified rank = r" if cert.condition_met
        else "kruskal condition not met",
    )
