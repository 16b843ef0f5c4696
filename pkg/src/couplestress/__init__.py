"""Verification lab and Ritz solver for the indeterminate couple stress model."""

from .constitutive import (
    MaterialParams,
    cauchy_stress,
    couple_stress,
    el_residual,
    energy_density,
    total_force_stress,
)
from .geometry import (
    DomainGeometry,
    integrate_edge,
    integrate_surface,
    integrate_volume,
    make_domain,
    surface_gradient,
)
from .poly_fields import (
    PolyField,
    curl_vector,
    div_matrix,
    evaluate,
    grad_matrix,
    grad_vector,
    parse_scalar,
    parse_vector,
    random_field,
)
from .ritz import (
    BasisSpec,
    Constraints,
    CoupleStressRitz,
    Loads,
    assemble,
    manufactured_loads,
    patch_test,
    solve_equilibrium,
)
from .tractions import (
    StressState,
    edge_jump,
    missing_term,
    moment_corrected,
    moment_mt,
    traction_corrected,
    traction_mt,
)
from .virtual_work import (
    BalanceReport,
    balance_report,
    geometric_bc_equivalence,
    internal_work,
    surface_work_corrected,
    surface_work_mt,
)

__version__ = "0.1.0"
