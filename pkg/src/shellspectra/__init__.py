"""Spectra of Schrodinger operators with singular interactions on
concentric equidistant shells.

The package splits into a 1D layer (transfer matrices, bands, gap
asymptotics), a radial layer (channel reduction, oscillation counting,
eigenvalue location in gaps), a classification layer assembling the
ac/dense-point picture, and the planar s-wave machinery for eigenvalues
below the band bottom.  ``oracle`` holds an independent finite-difference
discretization used only for cross-checks.
"""

from .errors import (
    BasisZero,
    BracketingFailure,
    ConfigError,
    ConstraintViolation,
    ConvergenceFailure,
    DegenerateEdge,
    DegenerateEndpoint,
    GridMisaligned,
    NonDecayingStart,
    NumericsError,
    ParameterError,
    PositionMismatch,
    ShellSpectraError,
    StepFailure,
    UnclassifiableInteraction,
)
from .interaction import (
    InteractionClass,
    InteractionKind,
    InteractionParams,
    LatticeGeometry,
    StateVector,
    apply_interaction,
    classify,
    make_interaction,
    params_from_mapping,
    params_to_mapping,
    wronskian,
)
from .kronig1d import (
    AsymptoticsReport,
    BandRow,
    BandStructure,
    GroundStateSymmetry,
    asymptotics_report,
    band_structure,
    discriminant,
    ground_state_symmetry,
    monodromy,
)
from .oracle import DiscretizedOperator, discretize, refine_eigenvalues
from .radial import (
    ChannelSpec,
    OriginCondition,
    PruferState,
    TransferMatrix,
    count_wronskian_zeros,
    locate_eigenvalues,
    matching_defect,
    origin_start,
    propagate_cell,
    prufer_advance,
    transfer,
)
from .spectral_map import (
    MFunctionEstimate,
    SpectralKind,
    SpectrumInterval,
    SpectrumMap,
    TransferNormProfile,
    build_spectrum_map,
    essential_spectrum,
    floquet_exponent,
    gap_eigenvalues,
    m_function_estimate,
    transfer_norm_profile,
)
from .welsh import (
    FloquetBasis,
    KeplerTrace,
    PhaseVerdict,
    WelshReport,
    find_welsh_eigenvalues,
    floquet_basis_at_e0,
    kepler_trace,
    phase_unbounded_test,
)

__version__ = "0.1.0"

__all__ = [
    "AsymptoticsReport",
    "BandRow",
    "BandStructure",
    "BasisZero",
    "BracketingFailure",
    "ChannelSpec",
    "ConfigError",
    "ConstraintViolation",
    "ConvergenceFailure",
    "DegenerateEdge",
    "DegenerateEndpoint",
    "DiscretizedOperator",
    "FloquetBasis",
    "GridMisaligned",
    "GroundStateSymmetry",
    "InteractionClass",
    "InteractionKind",
    "InteractionParams",
    "KeplerTrace",
    "LatticeGeometry",
    "MFunctionEstimate",
    "NonDecayingStart",
    "NumericsError",
    "OriginCondition",
    "ParameterError",
    "PhaseVerdict",
    "PositionMismatch",
    "PruferState",
    "ShellSpectraError",
    "SpectralKind",
    "SpectrumInterval",
    "SpectrumMap",
    "StateVector",
    "StepFailure",
    "TransferMatrix",
    "TransferNormProfile",
    "UnclassifiableInteraction",
    "WelshReport",
    "apply_interaction",
    "asymptotics_report",
    "band_structure",
    "build_spectrum_map",
    "classify",
    "count_wronskian_zeros",
    "discretize",
    "discriminant",
    "essential_spectrum",
    "find_welsh_eigenvalues",
    "floquet_basis_at_e0",
    "floquet_exponent",
    "gap_eigenvalues",
    "ground_state_symmetry",
    "kepler_trace",
    "locate_eigenvalues",
    "m_function_estimate",
    "make_interaction",
    "matching_defect",
    "monodromy",
    "origin_start",
    "params_from_mapping",
    "params_to_mapping",
    "phase_unbounded_test",
    "propagate_cell",
    "prufer_advance",
    "refine_eigenvalues",
    "transfer",
    "transfer_norm_profile",
    "wronskian",
    "__version__",
]
