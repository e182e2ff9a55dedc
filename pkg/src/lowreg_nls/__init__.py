"""Filtered low-regularity Fourier integrator for the cubic NLS on a periodic grid."""

__version__ = "0.1.0"

from .spectral import Field, Grid, Multiplier, apply_multiplier, free_flow, make_grid, to_frequency, to_physical
from .filters import CutoffProfile, FilterParams, chi, lp_block, lp_blocks, make_projector, phi1, phi1_multiplier
from .integrators import (
    BlowUpError,
    SchemeConfig,
    Trajectory,
    evolve,
    initialize,
    step_lie,
    step_lie_filtered,
    step_lri,
    step_strang,
)
from .analysis import (
    AdmissiblePair,
    SpaceTimeSeries,
    check_admissible,
    measure_dispersive_decay,
    measure_strichartz_growth,
    norm_hs,
    norm_lq,
    norm_spacetime,
    norm_wsq,
)
from .experiments import (
    ConvergenceReport,
    RoughDataSpec,
    choose_K,
    generate_rough_data,
    reference_solution,
    run_convergence,
    run_filter_gap,
    run_local_order,
)
from .estimators import ConvergenceOrderRegressor, NLSIntegrator
