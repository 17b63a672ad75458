"""Critical constants for the attractive relativistic Vlasov-Poisson
system, computed from Lane-Emden polytropes and verified by independent
quadrature."""

from .critical import (
    ConsistencyError,
    CriticalReport,
    ScalingConstants,
    asymptotic_critical,
    asymptotic_first_zero,
    asymptotic_radius,
    beta_of_n,
    bounds_kz,
    c_of_beta,
    critical_at_infinity,
    critical_at_three_halves,
    critical_constant,
    critical_report,
    improved_bound_plateau,
    improved_upper_bound,
    n_of_beta,
    scaling_constants,
)
from .numerics import (
    BracketError,
    BudgetError,
    DenseTrajectory,
    IvpResult,
    NumericsError,
    StiffnessError,
    Tolerances,
    find_root_bracketed,
    integrate_adaptive,
    integrate_ivp,
)
from .polytrope import Polytrope, mass_integral, series_start, solve_polytrope, theta_closed_form
from .verify import (
    MinimizerProfile,
    VerificationReport,
    build_minimizer_profile,
    check_boundary,
    check_exterior,
    check_kinetic,
    check_lbeta_norm,
    check_mass,
    check_pohozaev,
    check_potential,
    ode_residual,
    potential_K,
    run_full_verification,
)

__version__ = "0.1.0"
