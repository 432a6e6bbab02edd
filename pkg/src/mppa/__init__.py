"""Multi-parameter proximal point iteration with quantitative rates.

The package has three layers:

* ``operators`` / ``schedules`` / ``iteration`` run the iteration
  z_{n+1} = lam_n u + gam_n z_n + del_n J_{c_n} z_n + e_n numerically,
* ``countfn`` / ``bounds`` / ``refeval`` evaluate the rate calculus over
  exact integers under an explicit work-and-magnitude budget,
* ``oracle`` / ``acceptance`` / ``cli`` cross-check the two against each
  other and against brute-force searches on synthetic instances.
"""

from .countfn import (
    BUDGET_BITS_ENV,
    DEFAULT_MAGNITUDE_BITS,
    DEFAULT_MAX_CALLS,
    Affine,
    BoundValue,
    Budget,
    BudgetExceededError,
    Composed,
    Const,
    CountFn,
    ExpCeil,
    Identity,
    Max,
    Table,
    ceil_ln,
    evaluate,
    iterate,
    majorize,
    strongly_majorizes,
)
from .operators import (
    BallProjection,
    BoxProjection,
    LinearPSD,
    QuadraticProx,
    ResolventOperator,
    Rotation2D,
    check_resolvent_identity,
    check_resolvent_scaling,
)
from .schedules import (
    BoundContext,
    ConstantSeq,
    GeometricError,
    HarmonicSeq,
    Moduli,
    ModuliReport,
    Schedule,
    ZeroError,
    derive_constants,
    mu,
    nu,
    validate_anchors,
    validate_moduli,
    validate_schedule,
)
from .bounds import (
    chi0,
    chi_tilde,
    phi,
    phi_chi,
    proj3_bound,
    proj_bound,
    psi,
    psi_cap,
    psi_functional,
    qtxu_sigma_window,
    r_const,
    res_bounds,
    sigma,
    theta,
    theta_cap,
    varphi_suzuki1,
    xi,
    xi_rate,
    zeta,
)
from .iteration import (
    Trace,
    empirical_metastability,
    empirical_window_index,
    run,
    stabilization_index,
)
from .oracle import run_suite
from .config import ConfigError, ExperimentConfig, parse_config, serialize_config

__version__ = "0.1.0"

__all__ = [
    "BUDGET_BITS_ENV",
    "DEFAULT_MAGNITUDE_BITS",
    "DEFAULT_MAX_CALLS",
    "Affine",
    "BallProjection",
    "BoundContext",
    "BoundValue",
    "BoxProjection",
    "Budget",
    "BudgetExceededError",
    "Composed",
    "ConfigError",
    "Const",
    "ConstantSeq",
    "CountFn",
    "ExpCeil",
    "ExperimentConfig",
    "GeometricError",
    "HarmonicSeq",
    "Identity",
    "LinearPSD",
    "Max",
    "Moduli",
    "ModuliReport",
    "QuadraticProx",
    "ResolventOperator",
    "Rotation2D",
    "Schedule",
    "Table",
    "Trace",
    "ZeroError",
    "ceil_ln",
    "check_resolvent_identity",
    "check_resolvent_scaling",
    "chi0",
    "chi_tilde",
    "derive_constants",
    "empirical_metastability",
    "empirical_window_index",
    "evaluate",
    "iterate",
    "majorize",
    "mu",
    "nu",
    "parse_config",
    "phi",
    "phi_chi",
    "proj3_bound",
    "proj_bound",
    "psi",
    "psi_cap",
    "psi_functional",
    "qtxu_sigma_window",
    "r_const",
    "res_bounds",
    "run",
    "run_suite",
    "serialize_config",
    "sigma",
    "stabilization_index",
    "strongly_majorizes",
    "theta",
    "theta_cap",
    "validate_anchors",
    "validate_moduli",
    "validate_schedule",
    "varphi_suzuki1",
    "xi",
    "xi_rate",
    "zeta",
    "__version__",
]
