"""Numerical special Lagrangian geometry in C^m with abelian symmetry.

Library layout:

- calibration: the flat structures g, omega, Omega and the special
  Lagrangian plane test on tangent frames
- elliptic: Jacobi sn/cn/dn, K(k), and endpoint-singular quadrature
- wsystem: the coupled coordinate flow, its first integrals, and lifts
- reduced: the (u, theta, psi) reduction, periods, rotation numbers,
  closure search, and the elliptic closed forms for three weights
- families: samplers and defining equations for the explicit families
- verify: moment maps, batch verification jobs, Newton projection
- cli: the `slgeo` command-line front end
"""

from .calibration import (
    CalibrationReport,
    TangentFrame,
    finite_diff_frame,
    holomorphic_volume,
    kahler_form,
    metric_inner,
    orthonormalize,
    sl_check,
)
from .elliptic import JacobiTriple, complete_K, endpoint_sqrt_quadrature, jacobi
from .families import FamilyKind, FamilySpec, SamplePoint, default_spec, sample_family, sample_grid
from .reduced import (
    NoBracketError,
    TorusSolution,
    TurningData,
    angles_of_u,
    b_to_a,
    closed_form_u_m3,
    compute_A,
    explicit_A0_m3,
    find_rational_A,
    integrate_reduced,
    period_T,
    psi_limits,
    q_eval,
    rotation_Psi,
    turning_points,
)
from .verify import MomentSpec, VerifyJob, closure_check, moment_value, newton_project, verify_family
from .wsystem import (
    CoeffVector,
    ConservedSet,
    WState,
    integrate_w,
    invariants_w,
    lift,
    poisson_bracket,
    poisson_check,
    project,
    rhs_w,
)

__version__ = "0.1.0"
