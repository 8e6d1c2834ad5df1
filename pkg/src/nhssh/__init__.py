"""Disordered non-Hermitian SSH chains: spectra, real-space winding numbers and localization."""

__version__ = "0.1.0"

from .analytic import (  # noqa: E402
    MappedParams,
    bulk_gap_formula,
    critical_disorder,
    inverse_localization_length,
    localization_length,
    localization_length_w2zero,
    mapped_params,
    pt_threshold,
)
from .ensemble import (  # noqa: E402
    EnsembleConfig,
    PhaseDiagramResult,
    PointRecord,
    SweepGrid,
    derive_seed,
    run_point,
    run_sweep,
)
from .lattice import (  # noqa: E402
    Boundary,
    ChiralOperator,
    DisorderRealization,
    HamiltonianMatrix,
    ModelError,
    ModelSpec,
    NonreciprocalForm,
    Variant,
    build_hamiltonian,
    chiral_operator,
    clean_realization,
    gainloss_rotation,
    sample_disorder,
    similarity_transform,
    verify_symmetry,
    working_frame,
)
from .observables import WindingConfig, density_profile, ipr, spectral_observables, winding_number  # noqa: E402
from .spectral import (  # noqa: E402
    BranchError,
    DecompositionError,
    SpectralDecomposition,
    SpectralError,
    chiral_branches,
    decompose,
)

__all__ = [name for name in dir() if not name.startswith("_")]
