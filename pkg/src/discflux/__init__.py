"""Conservation laws with a flux that switches branches at x = 0.

The package covers the full pipeline: sampled flux pairs, admissibility
transforms (crossing checks, connections, constructive builders), a viscous
finite-volume solver in the relabelled variable, exact Riemann references for
a single branch, entropy-residual diagnostics, and run persistence.
"""

from .curves import MonotoneBijection, SampledCurve, lower_convex_envelope, upper_concave_envelope
from .errors import (
    CompositionError,
    ConstructionError,
    CoverageError,
    DiscFluxError,
    DomainError,
    ResolutionError,
    StabilityError,
)
from .fluxes import (
    ConstantIntervalSet,
    FluxPair,
    clip_flux,
    compose_flux,
    detect_constant_intervals,
    find_local_maxima,
    get_flux,
    load_flux_csv,
    registry_names,
    save_flux_csv,
    truncate,
)
from .transforms import (
    Connection,
    ConnectionCheck,
    CrossingReport,
    TransformAudit,
    TransformPair,
    build_connection_transform,
    build_translation_transform,
    check_crossing,
    composed_fluxes,
    identity_transform,
    is_connection,
    verify_transform,
)
from .riemann import RiemannSolution, Wave, classical_riemann, steady_connection_state
from .solver import (
    LadderResult,
    SolutionField,
    SolverConfig,
    ladder,
    mollifier_delta,
    mollify_initial,
    reconstruct_u,
    smooth_heaviside,
    solve,
)
from .diagnostics import (
    BoundsReport,
    LadderBounds,
    EntropyReport,
    HatFunction,
    SpaceTimeHat,
    TraceReport,
    bounds_report,
    ladder_bounds,
    default_test_functions,
    entropy_residual_connection,
    entropy_residual_pair,
    entropy_residual_side,
    extract_traces,
    l1_distances,
    ordering_preserved,
    sgn,
    sgn_plus,
)
from .runio import config_hash, load_transform_csv, read_run, save_transform_csv, write_run

__version__ = "0.1.0"

__all__ = [
    "BoundsReport",
    "LadderBounds",
    "CompositionError",
    "Connection",
    "ConnectionCheck",
    "ConstantIntervalSet",
    "ConstructionError",
    "CoverageError",
    "CrossingReport",
    "DiscFluxError",
    "DomainError",
    "EntropyReport",
    "FluxPair",
    "HatFunction",
    "LadderResult",
    "MonotoneBijection",
    "ResolutionError",
    "RiemannSolution",
    "SampledCurve",
    "SolutionField",
    "SolverConfig",
    "SpaceTimeHat",
    "StabilityError",
    "TraceReport",
    "TransformAudit",
    "TransformPair",
    "Wave",
    "bounds_report",
    "ladder_bounds",
    "build_connection_transform",
    "build_translation_transform",
    "check_crossing",
    "classical_riemann",
    "clip_flux",
    "compose_flux",
    "composed_fluxes",
    "config_hash",
    "default_test_functions",
    "detect_constant_intervals",
    "entropy_residual_connection",
    "entropy_residual_pair",
    "entropy_residual_side",
    "extract_traces",
    "find_local_maxima",
    "get_flux",
    "identity_transform",
    "is_connection",
    "l1_distances",
    "ladder",
    "load_flux_csv",
    "load_transform_csv",
    "lower_convex_envelope",
    "mollifier_delta",
    "mollify_initial",
    "ordering_preserved",
    "read_run",
    "reconstruct_u",
    "registry_names",
    "save_flux_csv",
    "save_transform_csv",
    "sgn",
    "sgn_plus",
    "smooth_heaviside",
    "solve",
    "steady_connection_state",
    "truncate",
    "upper_concave_envelope",
    "verify_transform",
    "write_run",
]
