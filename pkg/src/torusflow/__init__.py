"""Pseudo-spectral solvers for a density-coupled incompressible flow model.

The model transports a density whose gradient feeds back on the velocity
through a scalar coefficient f(rho, v), while an incompressible pressure
enforces div(v) = 0. Three epsilon-regularizations are implemented and
cross-validated on the 2-D torus:

* a mollified, Leray-projected scheme (exactly divergence-free),
* a continuous projection penalty scheme (gradient part damped at rate 1/eps),
* an artificial compressibility scheme (acoustic relaxation of the constraint),

together with the exactly-solvable reduction for f = f(rho), which serves
as an independent verification oracle.
"""

from .errors import (
    ConfigError,
    FormatError,
    HyperbolicityLoss,
    NumericalBlowup,
    PositivityLoss,
    UnsupportedVersion,
)
from .spectral import (
    Grid,
    MollifierKind,
    ScalarField,
    SpectralCoefficients,
    VectorField,
    dealias,
    dealias_field,
    divergence,
    gradient,
    inner,
    l2_norm,
    leray_project,
    mollify,
    mollify_vector,
    sobolev_norm,
    solve_poisson,
    transform_forward,
    transform_inverse,
)
from .model import (
    AdmissibilityReport,
    PressureLaw,
    State,
    Tendency,
    advective_rhs,
    affine_rho_law,
    assemble_symbol,
    biofilm_law,
    check_admissible,
    constant_law,
    eigenvalues_closed_form,
    kinetic_law,
    make_law,
    make_state,
    recover_pressure,
    state_sobolev_norm,
    symmetrizer,
    translate,
    untranslate,
)
from .schemes import (
    AcousticPair,
    ProjectionPenalty,
    SchemeConfig,
    SchemeKind,
    reduction_oracle_rhs,
    rhs_scheme_a,
    rhs_scheme_b,
    rhs_scheme_c,
    slightly_compressible_init,
)
from .integrate import (
    RunReport,
    Splitting,
    TimeControls,
    cfl_dt,
    rk4_step,
    run_simulation,
    stiff_exact_substep,
)
from .diagnostics import (
    HyperbolicityReport,
    OracleDistances,
    SeparationReport,
    StudyReport,
    hyperbolicity_scan,
    oracle_compare,
    penalty_bound_check,
    run_study,
    scheme_distance,
    state_distance,
    uniqueness_separation,
)
from .presets import compressible_perturbation, initial_state

__version__ = "0.1.0"
