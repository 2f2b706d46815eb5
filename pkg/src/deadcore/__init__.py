"""Dead-core minimisers of Ginzburg-Landau type energies with rough potentials.

Radial dynamic-programming solver for the comparison functions, closed-form
oracles, a proximal lattice solver for vector fields and quantitative
diagnostics of the comparison, dead-core, Pohozaev, monotonicity,
first-integral and maximum-principle statements.
"""

from .errors import (
    ConfigError,
    DeadCoreError,
    DomainError,
    GeometryError,
    NonConvergenceError,
    PreconditionError,
    ResourceError,
)
from .potential import (
    IqResult,
    Kind,
    PotentialSpec,
    RadialPotential,
    Variant,
    compute_iq,
    eval_total,
    eval_wrad,
)
from .radial import (
    ComparisonPair,
    CriticalRadius,
    DeadCoreReport,
    RadialGrid,
    RadialProfile,
    Tie,
    comparison_pair,
    core_radius,
    critical_radius,
    dead_core_report,
    discrete_energy,
    solve_dp,
    solve_dp_multires,
    solve_profile,
)
from .oracles import (
    Branch,
    ClosedFormProfile,
    Family,
    brute_force_dp_oracle,
    cosh_profile_n1,
    first_integral_profile_n1,
    log_core_edge,
    log_core_profile,
    remark1_profile,
)
from .field import (
    GridField,
    LatticeDomain,
    SolveStats,
    grid_energy,
    minimize_field,
    modulus_field,
    prox_radial,
    prox_vector,
)
from .diagnostics import (
    Check,
    ComparisonVerdict,
    Mode,
    Report,
    Verdict,
    dead_core_check,
    hamiltonian_check,
    maximum_principle_check,
    monotonicity_scan,
    pohozaev_scan,
    verify_comparison,
)

__version__ = "0.1.0"
