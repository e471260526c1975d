"""Critical points of the squared distance function on supported varieties.

The semi-critical condition is tested through the tangential-projection
residual ||P_T(x - y)||, which vanishes exactly when x - y lies in the
normal space at a smooth point.  Closed-form solvers cover subspaces
(orthogonal projection), bounded-rank matrices (SVD subset selection) and
diagonal quadric cones (a univariate multiplier equation bracketed between
its poles); tensor varieties fall back to seeded multistart solves of the
stationarity system.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Optional

import numpy as np
from scipy.optimize import brentq, least_squares

from .approx import _contract_except, _hosvd_factors, best_rank_k
from .tensors import DenseTensor

__all__ = [
    "VarietySpec",
    "CriticalPoint",
    "CriticalReport",
    "StratumTree",
    "OffVarietyError",
    "SingularPointError",
    "critical_residual",
    "critical_set",
    "quadric_transversality",
    "lipschitz_probe",
    "uniqueness_probe",
    "orbit_closure_check",
    "stratum_tree",
]

ON_VARIETY_TOL = 1e-8
CRITICAL_TOL = 1e-8
DEDUP_TOL = 1e-6
GAP_TOL = 1e-6


class OffVarietyError(ValueError):
    """The supplied point does not lie on the variety within tolerance."""


class SingularPointError(ValueError):
    """The point is singular; criticality must be tested on a child stratum."""


@dataclass(frozen=True)
class VarietySpec:
    """Tagged description of a supported variety together with its ambient."""

    kind: str
    basis: Optional[np.ndarray] = None       # subspace
    coeffs: Optional[np.ndarray] = None      # diagonal quadric cone
    p: Optional[int] = None                  # matrix rows
    q: Optional[int] = None                  # matrix cols
    k: Optional[int] = None                  # rank bound
    shape: Optional[tuple] = None            # tensor shape

    @classmethod
    def subspace(cls, basis) -> "VarietySpec":
        basis = np.asarray(basis, dtype=float)
        if basis.ndim != 2:
            raise ValueError("basis must be a matrix")
        if np.linalg.matrix_rank(basis) != basis.shape[1]:
            raise ValueError("subspace basis must have full column rank")
        return cls(kind="subspace", basis=basis)

    @classmethod
    def diag_quadric(cls, coeffs) -> "VarietySpec":
        coeffs = np.asarray(coeffs, dtype=float)
        if np.any(coeffs == 0.0):
            raise ValueError("quadric coefficients must be nonzero")
        return cls(kind="diag_quadric", coeffs=coeffs)

    @classmethod
    def matrix_rank(cls, p: int, q: int, k: int) -> "VarietySpec":
        if not 1 <= k < min(p, q):
            raise ValueError("matrix rank bound requires 1 <= k < min(p, q)")
        return cls(kind="matrix_rank", p=p, q=q, k=k)

    @classmethod
    def tensor_rank_one(cls, shape) -> "VarietySpec":
        return cls(kind="tensor_rank_one", shape=tuple(int(s) for s in shape))

    @classmethod
    def tensor_rank(cls, shape, k: int) -> "VarietySpec":
        if k < 1:
            raise ValueError("rank bound must be positive")
        return cls(kind="tensor_rank", shape=tuple(int(s) for s in shape), k=k)

    @property
    def ambient_dim(self) -> int:
        if self.kind == "subspace":
            return self.basis.shape[0]
        if self.kind == "diag_quadric":
            return len(self.coeffs)
        if self.kind == "matrix_rank":
            return self.p * self.q
        return int(np.prod(self.shape))


@dataclass(frozen=True)
class CriticalPoint:
    y: np.ndarray
    distance: float
    stratum: int
    residual: float


@dataclass(frozen=True)
class CriticalReport:
    """Deduplicated critical set of a query, sorted by distance."""

    query: np.ndarray
    points: tuple
    delta_estimate: int
    starts: int
    seed: int
    notes: tuple = ()

    @property
    def best(self) -> CriticalPoint:
        return self.points[0]

    @property
    def distance(self) -> float:
        return self.points[0].distance

    @property
    def uniqueness_gap(self) -> float:
        if len(self.points) < 2:
            return math.inf
        return self.points[1].distance - self.points[0].distance

    def top_stratum_points(self):
        return [pt for pt in self.points if pt.stratum == 0]

    def to_json(self) -> str:
        gap = self.uniqueness_gap
        return json.dumps(
            {
                "query": self.query.tolist(),
                "points": [
                    {
                        "y": pt.y.tolist(),
                        "distance": pt.distance,
                        "stratum": pt.stratum,
                        "residual": pt.residual,
                    }
                    for pt in self.points
                ],
                "delta_estimate": self.delta_estimate,
                "uniqueness_gap": None if math.isinf(gap) else gap,
                "starts": self.starts,
                "seed": self.seed,
                "notes": list(self.notes),
            }
        )


@dataclass(frozen=True)
class StratumTree:
    """Singular-locus tree: (description, parent index) per stratum."""

    strata: tuple


def stratum_tree(v: VarietySpec) -> StratumTree:
    if v.kind == "subspace":
        return StratumTree((("subspace", -1),))
    if v.kind in ("diag_quadric", "tensor_rank_one"):
        return StratumTree(((v.kind, -1), ("origin", 0)))
    if v.kind == "matrix_rank":
        strata = [("rank<=%d" % j, idx - 1 if idx else -1)
                  for idx, j in enumerate(range(v.k, 0, -1))]
        strata.append(("origin", len(strata) - 1))
        return StratumTree(tuple(strata))
    # tensor_rank: singular locus not characterized; search smooth locus only
    return StratumTree(((v.kind, -1),))


# ---------------------------------------------------------------------------
# tangent spaces and residuals


def _scale(x: np.ndarray) -> float:
    return 1.0 + float(np.linalg.norm(x))


def _tangent_basis(v: VarietySpec, y: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the tangent space at a smooth point of v."""
    s = _scale(y)
    if v.kind == "subspace":
        q, _ = np.linalg.qr(v.basis)
        if np.linalg.norm(y - q @ (q.T @ y)) > ON_VARIETY_TOL * s:
            raise OffVarietyError("point is not in the subspace")
        return q
    if v.kind == "diag_quadric":
        a = v.coeffs
        if abs(float(a @ (y * y))) > ON_VARIETY_TOL * s * s:
            raise OffVarietyError("point does not satisfy the quadric equation")
        grad = 2.0 * a * y
        ng = np.linalg.norm(grad)
        if ng < 1e-12 * s:
            raise SingularPointError("apex of the cone; use the origin stratum")
        ghat = (grad / ng).reshape(-1, 1)
        full = np.eye(len(y)) - ghat @ ghat.T
        q, r = np.linalg.qr(full)
        keep = np.abs(np.diag(r)) > 1e-12
        return q[:, keep]
    if v.kind == "matrix_rank":
        mat = y.reshape(v.p, v.q)
        u, sig, vt = np.linalg.svd(mat, full_matrices=True)
        if len(sig) > v.k and sig[v.k] > ON_VARIETY_TOL * s:
            raise OffVarietyError("matrix rank exceeds the bound")
        if sig[v.k - 1] <= ON_VARIETY_TOL * s:
            raise SingularPointError(
                "rank below the bound; use the rank<=%d stratum" % (v.k - 1))
        pu = u[:, : v.k]
        pv = vt[: v.k, :].T
        cols = []
        # tangent = {A : (I - Pu) A (I - Pv) = 0}; spanned by Pu E + E Pv parts
        for i in range(v.p):
            for j in range(v.k):
                e = np.zeros((v.p, v.q))
                e[i] = pv[:, j]
                cols.append(e.ravel())
        for i in range(v.k):
            for j in range(v.q):
                e = np.outer(pu[:, i], np.eye(v.q)[j])
                cols.append(e.ravel())
        return _orthonormalize(np.column_stack(cols))
    if v.kind == "tensor_rank_one":
        arr = y.reshape(v.shape)
        ny = np.linalg.norm(arr)
        if ny < 1e-10:
            raise SingularPointError("zero tensor; use the origin stratum")
        factors = _hosvd_factors(arr)
        w = _mlinear(arr, factors)
        recon = w * reduce(np.multiply.outer, factors)
        if np.linalg.norm(recon - arr) > ON_VARIETY_TOL * s:
            raise OffVarietyError("point is not a rank-one tensor")
        return _rank1_tangent(factors, v.shape)
    if v.kind == "tensor_rank":
        arr = y.reshape(v.shape)
        model = best_rank_k(DenseTensor.from_array(arr), v.k, starts=8, seed=0)
        if model.objective > ON_VARIETY_TOL * s:
            raise OffVarietyError("point does not have the required rank")
        cols = []
        for term in model.terms:
            cols.append(_rank1_tangent(list(term.factors), v.shape, raw=True))
        return _orthonormalize(np.column_stack(cols))
    raise ValueError(f"unknown variety kind {v.kind}")


def _mlinear(arr, factors) -> float:
    out = arr
    for f in reversed(factors):
        out = out @ f
    return float(out)


def _rank1_tangent(factors, shape, raw: bool = False):
    cols = []
    d = len(shape)
    for mode in range(d):
        for j in range(shape[mode]):
            vecs = list(factors)
            e = np.zeros(shape[mode])
            e[j] = 1.0
            vecs[mode] = e
            cols.append(reduce(np.multiply.outer, vecs).ravel())
    stacked = np.column_stack(cols)
    return stacked if raw else _orthonormalize(stacked)


def _orthonormalize(cols: np.ndarray) -> np.ndarray:
    u, sig, _ = np.linalg.svd(cols, full_matrices=False)
    keep = sig > 1e-10 * (sig[0] if sig.size else 1.0)
    return u[:, keep]


def critical_residual(v: VarietySpec, x, y) -> float:
    """Norm of the tangential component of x - y at a smooth point y of v."""
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    q = _tangent_basis(v, y)
    return float(np.linalg.norm(q.T @ (x - y)))


# ---------------------------------------------------------------------------
# critical sets


def critical_set(v: VarietySpec, x, starts: int = 200, seed: int = 0) -> CriticalReport:
    """The deduplicated critical set Y(x), merged across strata.

    Closed-form solvers are used where available; tensor varieties run a
    seeded multistart solve of the stationarity system.  The distance to
    the variety is the minimum over the reported points.
    """
    x = np.asarray(x, dtype=float).ravel()
    if not np.all(np.isfinite(x)):
        raise ValueError("query must be finite")
    if starts < 1:
        raise ValueError("starts must be >= 1")
    if x.size != v.ambient_dim:
        raise ValueError("query dimension does not match the ambient space")
    notes: list = []
    if v.kind == "subspace":
        pts = _critical_subspace(v, x)
    elif v.kind == "diag_quadric":
        pts = _critical_quadric(v, x, notes)
    elif v.kind == "matrix_rank":
        pts = _critical_matrix(v, x)
    elif v.kind == "tensor_rank_one":
        pts = _critical_tensor_rank_one(v, x, starts, seed)
    elif v.kind == "tensor_rank":
        pts = _critical_tensor_rank(v, x, starts, seed, notes)
        notes.append("singular locus of bounded-rank tensors not searched")
    else:
        raise ValueError(f"unknown variety kind {v.kind}")
    pts = _dedup_points(pts)
    if not pts:
        raise RuntimeError("no critical point found")
    pts.sort(key=lambda pt: pt.distance)
    delta = sum(1 for pt in pts if pt.stratum == 0)
    return CriticalReport(
        query=x, points=tuple(pts), delta_estimate=delta,
        starts=starts, seed=seed, notes=tuple(notes),
    )


def _dedup_points(pts):
    kept = []
    for pt in sorted(pts, key=lambda p: p.distance):
        if all(np.linalg.norm(pt.y - other.y) > DEDUP_TOL for other in kept):
            kept.append(pt)
    return kept


def _critical_subspace(v, x):
    q, _ = np.linalg.qr(v.basis)
    y = q @ (q.T @ x)
    return [CriticalPoint(y, float(np.linalg.norm(x - y)), 0,
                          float(np.linalg.norm(q.T @ (x - y))))]


def _quadric_point(v, x, y, stratum):
    try:
        resid = critical_residual(v, x, y)
    except (OffVarietyError, SingularPointError):
        return None
    if resid > CRITICAL_TOL * _scale(x):
        return None
    return CriticalPoint(y, float(np.linalg.norm(x - y)), stratum, resid)


def _critical_quadric(v, x, notes):
    a = v.coeffs
    n = len(a)
    scale = _scale(x)
    pts = []
    active = np.abs(x) > 1e-13 * scale

    def h(lam):
        val = 0.0
        for i in range(n):
            if active[i]:
                val += a[i] * x[i] ** 2 / (1.0 + lam * a[i]) ** 2
        return val

    poles = sorted({-1.0 / a[i] for i in range(n) if active[i]})
    # bracket roots of h on each interval between consecutive poles
    span = max(1.0, max(abs(p) for p in poles)) if poles else 1.0
    endpoints = [poles[0] - 50 * span] + poles + [poles[-1] + 50 * span] \
        if poles else []
    for lo, hi in zip(endpoints[:-1], endpoints[1:]):
        grid = lo + (hi - lo) * (1 - np.cos(np.linspace(0, np.pi, 4001))) / 2
        grid = grid[1:-1]
        vals = np.array([h(g) for g in grid])
        for g1, g2, f1, f2 in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
            if f1 == 0.0:
                root = g1
            elif f1 * f2 < 0:
                root = brentq(h, g1, g2, xtol=1e-15, rtol=8.9e-16)
            else:
                continue
            y = np.array([
                x[i] / (1.0 + root * a[i]) if active[i] else 0.0
                for i in range(n)
            ])
            pt = _quadric_point(v, x, y, 0)
            if pt is not None:
                pts.append(pt)
    # branches where the multiplier hits a pole of an inactive coordinate
    for alpha in sorted(set(a.tolist())):
        zset = [i for i in range(n) if a[i] == alpha]
        if any(active[i] for i in zset):
            continue
        rest = [j for j in range(n) if a[j] != alpha]
        y = np.zeros(n)
        for j in rest:
            y[j] = x[j] / (1.0 - a[j] / alpha)
        rho2 = -sum(a[j] * y[j] ** 2 for j in rest) / alpha
        if rho2 < -1e-12 * scale**2:
            continue
        if len(zset) == 1:
            r = math.sqrt(max(rho2, 0.0))
            for sgn in ((1.0,) if r == 0.0 else (1.0, -1.0)):
                yy = y.copy()
                yy[zset[0]] = sgn * r
                pt = _quadric_point(v, x, yy, 0)
                if pt is not None:
                    pts.append(pt)
        elif rho2 <= 1e-12 * scale**2:
            pt = _quadric_point(v, x, y, 0)
            if pt is not None:
                pts.append(pt)
        else:
            notes.append("continuum of critical points on a pole branch; "
                         "not enumerated")
    # apex stratum
    pts.append(CriticalPoint(np.zeros(n), float(np.linalg.norm(x)), 1, 0.0))
    return pts


def _critical_matrix(v, x):
    import itertools

    mat = x.reshape(v.p, v.q)
    u, sig, vt = np.linalg.svd(mat, full_matrices=False)
    r = min(v.p, v.q)
    pts = []
    for j in range(v.k, 0, -1):
        stratum = v.k - j
        for omega in itertools.combinations(range(r), j):
            if any(sig[i] <= 1e-12 for i in omega):
                continue  # would duplicate a lower stratum
            y = sum(sig[i] * np.outer(u[:, i], vt[i]) for i in omega)
            dist = math.sqrt(sum(sig[i] ** 2 for i in range(r) if i not in omega))
            try:
                resid = critical_residual(
                    VarietySpec.matrix_rank(v.p, v.q, j), x, y.ravel())
            except (OffVarietyError, SingularPointError):
                continue
            pts.append(CriticalPoint(y.ravel(), dist, stratum, resid))
    pts.append(CriticalPoint(np.zeros(v.p * v.q), float(np.linalg.norm(x)),
                             v.k, 0.0))
    return pts


def _critical_tensor_rank_one(v, x, starts, seed):
    shape = v.shape
    d = len(shape)
    arr = x.reshape(shape)
    norm_x = np.linalg.norm(arr)
    hosvd = _hosvd_factors(arr)
    sizes = list(shape)
    amp = max(norm_x, 1.0) ** (1.0 / d)

    def unpack(theta):
        out, pos = [], 0
        for m in sizes:
            out.append(theta[pos:pos + m])
            pos += m
        return out

    def resid(theta):
        vecs = unpack(theta)
        y = reduce(np.multiply.outer, vecs)
        diff = arr - y
        return np.concatenate([
            _contract_except(diff, vecs, mode) for mode in range(d)
        ])

    pts = []
    for s in range(starts):
        rng = np.random.default_rng(seed + s)
        if s % 2 == 0:
            vecs = [amp * rng.standard_normal(m) for m in sizes]
        else:
            w = _mlinear(arr, hosvd)
            a = abs(w) ** (1.0 / d) if w != 0 else amp
            vecs = [a * (h + 0.5 * rng.standard_normal(len(h))) for h in hosvd]
        theta0 = np.concatenate(vecs)
        sol = least_squares(resid, theta0, method="lm", xtol=1e-15,
                            ftol=1e-15, gtol=1e-15, max_nfev=4000)
        vecs = unpack(sol.x)
        y = reduce(np.multiply.outer, vecs).ravel()
        if np.linalg.norm(sol.fun) > 1e-9 * _scale(x):
            continue
        if np.linalg.norm(y) < 1e-7 * _scale(x):
            continue  # collapsed to the apex; reported separately below
        try:
            r = critical_residual(v, x, y)
        except (OffVarietyError, SingularPointError):
            continue
        if r > CRITICAL_TOL * _scale(x):
            continue
        pts.append(CriticalPoint(y, float(np.linalg.norm(x - y)), 0, r))
    pts.append(CriticalPoint(np.zeros(x.size), float(norm_x), 1, 0.0))
    return pts


def _critical_tensor_rank(v, x, starts, seed, notes):
    shape = v.shape
    d = len(shape)
    k = v.k
    arr = x.reshape(shape)
    sizes = [m for m in shape for _ in range(1)]
    amp = max(np.linalg.norm(arr), 1.0) ** (1.0 / d)

    def unpack(theta):
        out, pos = [], 0
        for _ in range(k):
            term = []
            for m in shape:
                term.append(theta[pos:pos + m])
                pos += m
            out.append(term)
        return out

    def model_of(terms):
        y = np.zeros(shape)
        for vecs in terms:
            y = y + reduce(np.multiply.outer, vecs)
        return y

    def resid(theta):
        terms = unpack(theta)
        diff = arr - model_of(terms)
        parts = []
        for vecs in terms:
            for mode in range(d):
                parts.append(_contract_except(diff, vecs, mode))
        return np.concatenate(parts)

    dropped = 0
    pts = []
    for s in range(starts):
        rng = np.random.default_rng(seed + s)
        theta0 = amp * rng.standard_normal(sum(shape) * k) / max(k, 1)
        sol = least_squares(resid, theta0, method="lm", xtol=1e-15,
                            ftol=1e-15, gtol=1e-15, max_nfev=6000)
        terms = unpack(sol.x)
        if np.linalg.norm(sol.fun) > 1e-9 * _scale(x):
            continue
        if any(np.linalg.norm(reduce(np.multiply.outer, vecs)) <
               1e-6 * _scale(x) for vecs in terms):
            dropped += 1
            continue  # term collapsed: the point left the smooth locus
        y = model_of(terms).ravel()
        try:
            r = critical_residual(v, x, y)
        except (OffVarietyError, SingularPointError):
            continue
        if r > CRITICAL_TOL * _scale(x):
            continue
        pts.append(CriticalPoint(y, float(np.linalg.norm(x - y)), 0, r))
    if dropped:
        notes.append(f"{dropped} starts collapsed toward the singular locus")
    return pts


# ---------------------------------------------------------------------------
# probes


def quadric_transversality(a) -> bool:
    """Pairwise-distinct coefficients criterion for the diagonal quadric."""
    a = np.asarray(a, dtype=float).ravel()
    if np.any(a == 0.0):
        raise ValueError("quadric coefficients must be nonzero")
    return len(set(a.tolist())) == len(a)


def _distance(v: VarietySpec, x, starts, seed) -> float:
    return critical_set(v, x, starts=starts, seed=seed).distance


def lipschitz_probe(v: VarietySpec, trials: int, seed: int,
                    starts: int = 60) -> float:
    """Max observed |dist(x,C)-dist(z,C)| / ||x-z|| over random pairs."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    n = v.ambient_dim
    worst = 0.0
    for trial in range(trials):
        x = rng.standard_normal(n)
        z = rng.standard_normal(n)
        dxz = float(np.linalg.norm(x - z))
        if dxz == 0.0:
            continue  # ratio defined as 0 for degenerate pairs
        dx = _distance(v, x, starts, seed + 1000 + trial)
        dz = _distance(v, z, starts, seed + 2000 + trial)
        worst = max(worst, abs(dx - dz) / dxz)
    return worst


def uniqueness_probe(v: VarietySpec, trials: int, seed: int,
                     starts: int = 60) -> float:
    """Fraction of random queries whose two best critical distances differ."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    n = v.ambient_dim
    unique = 0
    done = 0
    attempts = 0
    while done < trials and attempts < 20 * trials:
        attempts += 1
        x = rng.standard_normal(n)
        report = critical_set(v, x, starts=starts, seed=seed + attempts)
        if report.distance <= 1e-10 * _scale(x):
            continue  # on-variety queries are excluded
        done += 1
        if report.uniqueness_gap > GAP_TOL:
            unique += 1
    if done == 0:
        raise RuntimeError("all sampled queries were on the variety")
    return unique / done


def orbit_closure_check(v: VarietySpec, x: DenseTensor,
                        report: CriticalReport) -> bool:
    """Whether the reported critical set is closed under mode transpositions."""
    if v.kind not in ("tensor_rank_one", "tensor_rank"):
        raise ValueError("orbit closure applies to cubical tensor varieties")
    shape = v.shape
    if len(set(shape)) != 1:
        raise ValueError("orbit closure requires a cubical shape")
    d = len(shape)
    pts = [pt.y.reshape(shape) for pt in report.points]
    for arr in pts:
        for i in range(d):
            for j in range(i + 1, d):
                perm = list(range(d))
                perm[i], perm[j] = perm[j], perm[i]
                image = arr.transpose(perm).ravel()
                if not any(np.linalg.norm(image - other.ravel()) <= DEDUP_TOL
                           for other in pts):
                    return False
    return True
