"""Constructive solvers for Riemann-Hilbert boundary value problems of
bi-axially symmetric poly-monogenic and perturbed meta-monogenic functions.

The pipeline: Clifford algebra arithmetic -> four-component reduction of
the Dirac operator over (r, rho) -> Euler/ray-integral operator calculus ->
Almansi-type splitting into monogenic layers -> a Vekua similarity solver
on the projected plane domain -> layered recursion and residual reports.
"""

from .cliffordalg import (
    Signature,
    Multivector,
    VectorX,
    blade_product,
    mv_multiply,
    scalar_part,
    conjugate,
    inner_product,
    vector_inverse,
)
from .domains import ProjectedDomain, quarter_disk, unit_disk, rect_domain
from .fields import PolyField, GridField, BiaxialQuadruple, ChartGrid
from .operators import (
    dirac_biaxial,
    x_multiply,
    euler_op,
    i_op,
    q_op,
    bracket_fn,
    frak_coeff,
    dirac_power_of_x,
    component_extractor,
    beta_eval,
    perturbed_dirac_pointwise,
)
from .almansi import AlmansiComponents, decompose, recompose, decompose_perturbed, make_k_monogenic_sample
from .complexrh import (
    ConformalMap,
    quarter_disk_map,
    identity_disk_map,
    schwarz_operator,
    compute_index,
    tau_integral,
    build_g_hat,
    phi_nonneg_index,
    phi_neg_index,
    SolvabilityFailure,
    BoundaryCoefficients,
    solve_monogenic_rhbvp,
)
from .solver import (
    RHProblemSpec,
    SolutionBundle,
    solve_iterated,
    solve_perturbed,
    verify_solution,
    fd_dirac_fullspace,
)

__version__ = "0.1.0"

__all__ = [
    "Signature", "Multivector", "VectorX", "blade_product", "mv_multiply",
    "scalar_part", "conjugate", "inner_product", "vector_inverse",
    "ProjectedDomain", "quarter_disk", "unit_disk", "rect_domain",
    "PolyField", "GridField", "BiaxialQuadruple", "ChartGrid",
    "dirac_biaxial", "x_multiply", "euler_op", "i_op", "q_op", "bracket_fn",
    "frak_coeff", "dirac_power_of_x", "component_extractor", "beta_eval",
    "perturbed_dirac_pointwise",
    "AlmansiComponents", "decompose", "recompose", "decompose_perturbed",
    "make_k_monogenic_sample",
    "ConformalMap", "quarter_disk_map", "identity_disk_map", "schwarz_operator",
    "compute_index", "tau_integral", "build_g_hat", "phi_nonneg_index",
    "phi_neg_index", "SolvabilityFailure", "BoundaryCoefficients",
    "solve_monogenic_rhbvp",
    "RHProblemSpec", "SolutionBundle", "solve_iterated", "solve_perturbed",
    "verify_solution", "fd_dirac_fullspace",
]
