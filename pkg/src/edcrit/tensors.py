"""Dense and symmetric tensor types with Hilbert-Schmidt geometry.

Tensors are stored flat in row-major (C) order, so grouped-mode unfoldings
are pure reshapes.  Symmetric tensors store one coefficient per sorted
multi-index; the stored value is the entry of the densified tensor at that
index (not the orbit sum), which keeps multiplicity bookkeeping out of the
arithmetic.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce

import numpy as np

__all__ = [
    "DenseTensor",
    "SymTensor",
    "RankOneTerm",
    "ModeSplit",
    "hs_inner",
    "hs_norm",
    "symmetrize",
    "unfold_split",
    "rank_one",
    "sym_dim",
    "sorted_multi_indices",
    "orbit_size",
]

UNIT_NORM_TOL = 1e-12


def sym_dim(m: int, d: int) -> int:
    """Dimension of the space of symmetric d-mode tensors with mode size m."""
    return math.comb(m + d - 1, d)


def sorted_multi_indices(m: int, d: int):
    """All 0-based multi-indices i1 <= ... <= id with entries in [0, m)."""
    return list(itertools.combinations_with_replacement(range(m), d))


def orbit_size(idx) -> int:
    """Number of distinct permutations of the multi-index ``idx``."""
    counts = {}
    for i in idx:
        counts[i] = counts.get(i, 0) + 1
    size = math.factorial(len(idx))
    for c in counts.values():
        size //= math.factorial(c)
    return size


@dataclass(frozen=True)
class DenseTensor:
    """A d-mode real tensor with explicit shape and flat row-major storage."""

    shape: tuple
    data: np.ndarray

    def __post_init__(self):
        shape = tuple(int(s) for s in self.shape)
        object.__setattr__(self, "shape", shape)
        if any(s < 1 for s in shape):
            raise ValueError(f"all mode sizes must be >= 1, got {shape}")
        data = np.asarray(self.data, dtype=float).ravel()
        expected = int(np.prod(shape))
        if data.size != expected:
            raise ValueError(
                f"data length {data.size} does not match shape {shape} "
                f"(expected {expected})"
            )
        data = data.copy()
        data.flags.writeable = False
        object.__setattr__(self, "data", data)

    @classmethod
    def from_array(cls, arr) -> "DenseTensor":
        arr = np.asarray(arr, dtype=float)
        return cls(arr.shape, arr.ravel())

    def array(self) -> np.ndarray:
        return self.data.reshape(self.shape)

    @property
    def order(self) -> int:
        return len(self.shape)

    def is_cubical(self) -> bool:
        return len(set(self.shape)) == 1

    def to_json(self) -> str:
        return json.dumps({"shape": list(self.shape), "data": self.data.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "DenseTensor":
        obj = json.loads(text)
        return cls(tuple(obj["shape"]), np.asarray(obj["data"], dtype=float))


@dataclass(frozen=True)
class SymTensor:
    """Symmetric tensor stored by sorted multi-index.

    ``coeffs`` maps 0-based sorted multi-indices to the entry of the
    densified tensor at that index.  Values may be floats or exact
    ``Fraction``s; arithmetic helpers preserve whichever is stored.
    """

    m: int
    d: int
    coeffs: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.m < 1 or self.d < 1:
            raise ValueError("m and d must be positive")
        expected = sym_dim(self.m, self.d)
        full = {}
        for idx in sorted_multi_indices(self.m, self.d):
            full[idx] = self.coeffs.get(idx, 0.0)
        if len(self.coeffs) > expected or any(
            tuple(sorted(k)) != tuple(k) for k in self.coeffs
        ):
            raise ValueError("coeffs keys must be sorted multi-indices")
        object.__setattr__(self, "coeffs", full)

    def coeff(self, *idx) -> float:
        return self.coeffs[tuple(sorted(idx))]

    def densify(self) -> DenseTensor:
        arr = np.zeros((self.m,) * self.d)
        for idx, val in self.coeffs.items():
            if val == 0:
                continue
            for perm in set(itertools.permutations(idx)):
                arr[perm] = float(val)
        return DenseTensor.from_array(arr)

    def to_json(self) -> str:
        # keys are 1-based comma-joined indices
        coeffs = {
            ",".join(str(i + 1) for i in idx): float(v)
            for idx, v in self.coeffs.items()
        }
        return json.dumps({"m": self.m, "d": self.d, "coeffs": coeffs})

    @classmethod
    def from_json(cls, text: str) -> "SymTensor":
        obj = json.loads(text)
        coeffs = {}
        for key, val in obj["coeffs"].items():
            idx = tuple(sorted(int(p) - 1 for p in key.split(",")))
            coeffs[idx] = val
        return cls(obj["m"], obj["d"], coeffs)


@dataclass(frozen=True)
class RankOneTerm:
    """Weighted rank-one tensor: weight times the outer product of unit factors."""

    weight: float
    factors: tuple

    def __post_init__(self):
        factors = tuple(np.asarray(f, dtype=float).ravel() for f in self.factors)
        for f in factors:
            if abs(np.linalg.norm(f) - 1.0) > UNIT_NORM_TOL:
                raise ValueError("factor vectors must be unit-normalized")
            f.flags.writeable = False
        object.__setattr__(self, "factors", factors)
        object.__setattr__(self, "weight", float(self.weight))

    @classmethod
    def make(cls, weight, vectors) -> "RankOneTerm":
        """Normalize ``vectors``, absorbing their magnitudes into the weight."""
        w = float(weight)
        factors = []
        for v in vectors:
            v = np.asarray(v, dtype=float).ravel()
            nrm = np.linalg.norm(v)
            if nrm == 0.0:
                raise ValueError("rank-one factors must be nonzero")
            w *= nrm
            factors.append(v / nrm)
        return cls(w, tuple(factors))

    @property
    def shape(self) -> tuple:
        return tuple(len(f) for f in self.factors)


@dataclass(frozen=True)
class ModeSplit:
    """Grouping of d modes into three consecutive blocks of sizes a, b, c."""

    a: int
    b: int
    c: int

    def __post_init__(self):
        if min(self.a, self.b, self.c) < 1:
            raise ValueError("split sizes must be positive")

    @property
    def d(self) -> int:
        return self.a + self.b + self.c


def hs_inner(x: DenseTensor, y: DenseTensor) -> float:
    """Hilbert-Schmidt (entrywise) inner product of two same-shape tensors."""
    if x.shape != y.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {y.shape}")
    return float(np.dot(x.data, y.data))


def hs_norm(x: DenseTensor) -> float:
    return float(np.linalg.norm(x.data))


def symmetrize(t: DenseTensor) -> SymTensor:
    """Average the S_d orbit of a cubical tensor into a SymTensor.

    This is the orthogonal projection onto the symmetric subspace.
    """
    sizes = set(t.shape)
    if len(sizes) != 1:
        raise ValueError(f"symmetrize requires equal mode sizes, got {t.shape}")
    m = t.shape[0]
    d = t.order
    arr = t.array()
    sums: dict = {}
    counts: dict = {}
    for idx in itertools.product(range(m), repeat=d):
        key = tuple(sorted(idx))
        sums[key] = sums.get(key, 0.0) + arr[idx]
        counts[key] = counts.get(key, 0) + 1
    coeffs = {key: sums[key] / counts[key] for key in sums}
    return SymTensor(m, d, coeffs)


def unfold_split(t: DenseTensor, s: ModeSplit) -> DenseTensor:
    """Regroup a cubical d-mode tensor into a 3-mode (m^a, m^b, m^c) tensor.

    Row-major storage makes this a pure reshape: the entry at grouped index
    (I, J, K) is the entry of ``t`` at the concatenated multi-index.
    """
    if len(set(t.shape)) != 1:
        raise ValueError("unfold_split requires a cubical tensor")
    if s.d != t.order:
        raise ValueError(f"split {s} does not sum to tensor order {t.order}")
    m = t.shape[0]
    return DenseTensor((m**s.a, m**s.b, m**s.c), t.data)


def rank_one(term: RankOneTerm) -> DenseTensor:
    """Densify a weighted rank-one term."""
    arr = reduce(np.multiply.outer, term.factors) * term.weight
    arr = np.asarray(arr).reshape(term.shape)
    return DenseTensor.from_array(arr)
