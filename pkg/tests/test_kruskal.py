from fractions import Fraction

import numpy as np
import pytest

from edcrit.kruskal import (
    FactorBundle,
    canonical_split,
    certify,
    certify_symmetric_rank,
    certify_tensor_rank,
    grouped_factor_matrices,
    is_abc_generic,
    krank,
    n_bound,
    n_bound_tensor,
)
from edcrit.tensors import ModeSplit, RankOneTerm


def test_krank_identity_and_degenerate():
    assert krank(np.eye(3)) == 3
    e1 = np.array([[1.0, 1.0], [0.0, 0.0]])
    assert krank(e1) == 1  # repeated column
    with pytest.raises(ValueError):
        krank(np.array([[1.0, 0.0], [0.0, 0.0]]))  # zero column


def test_krank_generic_random():
    rng = np.random.default_rng(0)
    mat = rng.standard_normal((5, 3))
    assert krank(mat) == 3
    # appending a column inside the span caps krank at wide-matrix generic
    wide = rng.standard_normal((2, 4))
    assert krank(wide) == 2


def test_certify_diagonal_and_degraded():
    eye = np.eye(2)
    cert = certify(FactorBundle(eye, eye, eye))
    assert cert.kappas == (2, 2, 2)
    assert cert.condition_met and cert.rank_certified == 2
    assert cert.uniqueness_certified
    bad = np.array([[1.0, 1.0], [0.0, 0.0]])
    cert2 = certify(FactorBundle(bad, eye, eye))
    assert not cert2.condition_met
    assert cert2.rank_certified is None


def test_factor_bundle_validation():
    with pytest.raises(ValueError):
        FactorBundle(np.eye(2), np.eye(2), np.eye(3))  # column mismatch
    with pytest.raises(ValueError):
        FactorBundle(np.zeros((2, 2)), np.eye(2), np.eye(2))


def test_n_bound_values():
    assert n_bound(2, 3) == Fraction(2)
    assert n_bound(3, 3) == Fraction(7, 2)
    assert n_bound(3, 4) == Fraction(4)
    assert n_bound(2, 4) == Fraction(2)
    with pytest.raises(ValueError):
        n_bound(1, 3)
    with pytest.raises(ValueError):
        n_bound(2, 2)


def test_n_bound_tensor_values():
    assert n_bound_tensor(2, 3) == Fraction(2)
    assert n_bound_tensor(3, 3) == Fraction(7, 2)
    assert n_bound_tensor(2, 5) == Fraction(4)
    assert n_bound_tensor(3, 4) == Fraction(4)


def test_canonical_split():
    assert canonical_split(3) == ModeSplit(1, 1, 1)
    assert canonical_split(4) == ModeSplit(1, 1, 2)
    assert canonical_split(5) == ModeSplit(1, 2, 2)
    with pytest.raises(ValueError):
        canonical_split(2)


def _sym_terms(vectors, d, weights=None):
    weights = weights or [1.0] * len(vectors)
    out = []
    for w, v in zip(weights, vectors):
        v = np.asarray(v, dtype=float)
        v = v / np.linalg.norm(v)
        out.append(RankOneTerm(w, (v,) * d))
    return out


def test_grouped_factor_matrices_shapes():
    terms = _sym_terms([[1.0, 0.0], [0.0, 1.0]], 3)
    y, z, w = grouped_factor_matrices(terms, ModeSplit(1, 1, 1))
    assert y.shape == (2, 2) and z.shape == (2, 2) and w.shape == (2, 2)
    y2, z2, w2 = grouped_factor_matrices(
        _sym_terms([[1.0, 1.0], [1.0, -1.0]], 5), ModeSplit(1, 2, 2))
    assert y2.shape == (2, 2) and z2.shape == (4, 2) and w2.shape == (4, 2)


def test_is_abc_generic_detects_shared_factor():
    good = _sym_terms([[1.0, 0.3], [0.2, 1.0]], 3)
    assert is_abc_generic(good, ModeSplit(1, 1, 1), 2)
    shared = _sym_terms([[1.0, 0.0], [1.0, 0.0]], 3)
    assert not is_abc_generic(shared, ModeSplit(1, 1, 1), 2)


def test_certify_symmetric_rank_paths():
    rng = np.random.default_rng(1)
    terms = _sym_terms(rng.standard_normal((2, 3)), 3)
    cert = certify_symmetric_rank(terms, 3, 3)
    assert cert.condition_met
    assert cert.bound == Fraction(7, 2)
    assert cert.verdict.startswith("certified")
    # too many terms for the bound
    many = _sym_terms(rng.standard_normal((3, 2)), 3)
    cert2 = certify_symmetric_rank(many, 2, 3)
    assert cert2.verdict == "bound exceeded"
    assert not cert2.condition_met
    # repeated factor direction fails genericity
    shared = _sym_terms([[1.0, 0.0], [1.0, 0.0]], 3)
    cert3 = certify_symmetric_rank(shared, 2, 3)
    assert cert3.verdict == "genericity check failed"
    # non-unit weight rejected
    badw = _sym_terms([[1.0, 0.2], [0.1, 1.0]], 3, weights=[2.0, 1.0])
    with pytest.raises(ValueError):
        certify_symmetric_rank(badw, 2, 3)


def test_certify_tensor_rank():
    rng = np.random.default_rng(2)
    terms = []
    for _ in range(2):
        vecs = [rng.standard_normal(2) for _ in range(3)]
        terms.append(RankOneTerm.make(1.0, vecs))
    cert = certify_tensor_rank(terms, 2, 3)
    assert cert.condition_met and cert.rank_certified == 2


def test_certificate_json():
    import json

    cert = certify(FactorBundle(np.eye(2), np.eye(2), np.eye(2)))
    obj = json.loads(cert.to_json())
    assert obj["kappas"] == [2, 2, 2]
    assert obj["condition_met"] is True
