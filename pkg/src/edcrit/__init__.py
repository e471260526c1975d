"""Critical points of Euclidean distance on varieties, low-rank tensor
approximation, Kruskal certification, exact symmetric decompositions, and
finite-field rank searches."""

from .approx import (
    CPModel,
    SymmetryVerdict,
    best_rank1,
    best_rank1_symmetric,
    best_rank_k,
    experiment_thm71,
    experiment_thm72,
    match_terms,
    random_symmetric_tensor,
    sample_certified_symmetric,
    symmetry_verdict,
)
from .gf import (
    GFTensor,
    Prop61Result,
    example64_tensor,
    gf_rank,
    prop61_witness,
    rank_exhaustive,
    srank_exhaustive,
)
from .kruskal import (
    FactorBundle,
    KruskalCertificate,
    canonical_split,
    certify,
    certify_symmetric_rank,
    certify_tensor_rank,
    is_abc_generic,
    krank,
    n_bound,
    n_bound_tensor,
)
from .symdecomp import (
    SymCombination,
    exact_det,
    mixed_power,
    power_basis,
    power_basis_matrix,
    vandermonde_decompose,
)
from .tensors import (
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
from .varieties import (
    CriticalPoint,
    CriticalReport,
    OffVarietyError,
    SingularPointError,
    StratumTree,
    VarietySpec,
    critical_residual,
    critical_set,
    lipschitz_probe,
    orbit_closure_check,
    quadric_transversality,
    stratum_tree,
    uniqueness_probe,
)

__version__ = "0.1.0"
