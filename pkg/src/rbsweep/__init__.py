"""Certified reduced-basis fast frequency sweeps for lossless wave problems.

The package builds small sweep spaces for ``(K - omega**2 M) x = i omega b``
with symmetric positive semidefinite ``K`` and positive definite ``M``, seeds
them with the in-band eigenmodes, and certifies the surrogate with residual
and dual-space error estimates measured in the ``K + M`` energy norm.
"""

from .errors import (
    AtResonance,
    DimensionMismatch,
    DivisionByZeroTrueError,
    EigensolverFailure,
    InvalidPort,
    MassNotPositiveDefinite,
    NotSymmetric,
    ParseError,
    RBSweepError,
    ReducedSingular,
    ResonantBound,
    SingularAtResonance,
    ZeroVector,
)
from .estimators import (
    IndicatorReport,
    classical_error_bound,
    effectivity,
    indicator_report,
    indicator_res,
    indicator_state,
    indicator_true,
    inf_sup,
    inf_sup_curve,
    residual,
    residual_norm_curve,
    state_error_estimate,
    state_estimate_curve,
    true_error_curve,
)
from .fom import (
    FrequencyBand,
    FullOrderModel,
    assemble,
    import_model,
    make_helmholtz_cavity,
    make_resonator_chain,
    pencil_eig,
    pencil_eigenvalues,
    solve_fom,
    solve_system,
    x_inner,
    x_norm,
)
from .greedy import (
    GreedyConfig,
    GreedyTrace,
    TraceRow,
    run_algorithm1,
    run_algorithm2,
    run_greedy,
    run_residual_baseline,
)
from .io import export_basis, import_basis, read_csv_columns, write_sweep, write_trace
from .reduction import (
    ReducedSpace,
    compose_residual_space,
    empty_space,
    enrich,
    from_vectors,
    new_information_norm,
    solve_rom,
)
from .spectral import (
    CouplingCoefficients,
    ModalDecomposition,
    compute_inband_modes,
    compute_statics,
    coupling_coefficients,
    modal_decomposition,
    modal_solve,
)

__version__ = "0.1.0"
