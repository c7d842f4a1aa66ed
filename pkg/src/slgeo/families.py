"""Samplers, tangent frames, and defining equations for the explicit
special Lagrangian families.

Each family kind carries its calibration phase and the moment data of its
symmetry group, so the verification engine can exercise all of them
uniformly: sample points on a parameter grid, build tangent frames
(analytic where a parameterization is available, SVD null spaces of the
defining equations otherwise), and check the calibration and moment-map
residuals.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.linalg import expm

from .calibration import TangentFrame, finite_diff_frame
from .elliptic import jacobi
from .reduced import TorusSolution, b_to_a, explicit_A0_m3, integrate_reduced, turning_points
from .wsystem import CoeffVector

__all__ = [
    "FamilyKind",
    "FamilySpec",
    "SamplePoint",
    "ac_from_cone",
    "case_a_sample",
    "case_b_sample",
    "conformal_residual",
    "default_spec",
    "explicit_m3_sample",
    "frame_from_implicit",
    "hl_sample",
    "helicoid_sample",
    "implicit_residual",
    "marshall_matrices",
    "marshall_sample",
    "moment_generators",
    "perp4_sample",
    "phase_of_i_power",
    "quadric_sample",
    "sample_family",
    "sample_grid",
    "so_cone_sample",
    "special_pm1_sample",
    "sphere_point",
    "torus_cone_family",
    "torus_cone_sample",
]


class FamilyKind(str, Enum):
    HL_TORUS = "hl_torus"
    SO_CONE = "so_cone"
    PRODUCT = "product"
    MARSHALL = "marshall"
    CASE_A_CONE = "case_a_cone"
    CASE_B = "case_b"
    TORUS_CONE = "torus_cone"
    EXPLICIT_M3 = "explicit_m3"
    SPECIAL_PM1 = "special_pm1"
    AC_FROM_CONE = "ac_from_cone"
    QUADRIC = "quadric"
    HELICOID = "helicoid"
    PERP4 = "perp4"


def phase_of_i_power(k):
    """Phase angle of i^k: k * pi/2 reduced mod 2 pi."""
    return (k % 4) * np.pi / 2.0


@dataclass(frozen=True)
class SamplePoint:
    point: np.ndarray
    frame: TangentFrame
    params: tuple


@dataclass
class FamilySpec:
    """A family kind with concrete parameters and its calibration phase."""

    kind: FamilyKind
    m: int
    phase: float
    params: dict = field(default_factory=dict)
    note: str = ""


# ---------------------------------------------------------------------------
# linear-algebra helpers


def _orthonormal_null_rows(mat):
    """Orthonormal basis of the null space of mat (rows of the result)."""
    mat = np.atleast_2d(np.asarray(mat, dtype=float))
    _u, s, vt = np.linalg.svd(mat)
    rank = int(np.sum(s > 1e-10 * (s[0] if s.size else 1.0)))
    return vt[rank:]


def _angle_basis(a: CoeffVector):
    """Basis of phase directions with sum zero and a-weighted sum zero."""
    return _orthonormal_null_rows(np.vstack([np.ones(a.m), a.a]))


def sphere_point(angles):
    """Unit vector of R^m from m-1 hyperspherical angles."""
    angles = np.asarray(angles, dtype=float)
    m = angles.size + 1
    x = np.ones(m)
    for i, t in enumerate(angles):
        x[i] *= np.cos(t)
        x[i + 1 :] *= np.sin(t)
    return x


def _sphere_tangent_basis(x):
    return _orthonormal_null_rows(x[None, :])


def frame_from_implicit(residual_fn, z, h=1e-6, threshold=1e-10):
    """Tangent frame of an implicit family: null space of the real Jacobian.

    residual_fn maps a point of C^m to a residual vector; the Jacobian in
    the 2m real coordinates is formed by central differences, and its SVD
    null space (singular values below threshold * s_max) gives the frame.
    """
    z = np.asarray(z, dtype=complex)
    m = z.size
    r0 = np.asarray(residual_fn(z), dtype=float)
    jac = np.empty((r0.size, 2 * m))
    for i in range(2 * m):
        dz = np.zeros(m, dtype=complex)
        if i < m:
            dz[i] = h
        else:
            dz[i - m] = 1j * h
        hi = np.asarray(residual_fn(z + dz), dtype=float)
        lo = np.asarray(residual_fn(z - dz), dtype=float)
        jac[:, i] = (hi - lo) / (2 * h)
    _u, s, vt = np.linalg.svd(jac)
    rank = int(np.sum(s > threshold * s[0]))
    null = vt[rank:]
    return TangentFrame(null[:, :m] + 1j * null[:, m:])


# ---------------------------------------------------------------------------
# torus families with product / modulus constraints


def _hl_point(m, levels, b, params):
    phases = np.asarray(params[: m - 1], dtype=float)
    rho = float(params[m - 1])
    mods_sq = np.concatenate([np.asarray(levels, dtype=float) + rho * rho, [rho * rho]])
    if np.any(mods_sq <= 0.0):
        raise ValueError("all squared moduli must be positive; reduce |levels| or raise rho")
    mods = np.sqrt(mods_sq)
    prod = float(np.prod(mods))
    if abs(b) > prod:
        raise ValueError(f"|b| = {abs(b)} exceeds the product of moduli {prod}")
    sigma = float(np.sum(phases))
    ratio = b / prod
    last = (np.arcsin(ratio) if m % 2 else np.arccos(ratio)) - sigma
    return mods * np.exp(1j * np.concatenate([phases, [last]]))


def hl_sample(m, levels, b, rho, phases, h=1e-4):
    """Point of the torus family |z_j|^2 - |z_m|^2 = levels_j with the product
    constraint Im(z_1...z_m) = b (m odd) or Re(z_1...z_m) = b (m even).

    The first m-1 phases are free; the last is solved from the product
    constraint.  Phase of the family: 1.  The frame is a central-difference
    frame over (phases, rho).
    """
    params = np.concatenate([np.asarray(phases, dtype=float), [float(rho)]])
    point = _hl_point(m, levels, b, params)
    frame = finite_diff_frame(lambda p: _hl_point(m, levels, b, p), params, h=h)
    return SamplePoint(point, frame, tuple(params))


def _product_point(a_level, b_level, c_level, params):
    phi, rho, x3 = params
    if rho * rho <= a_level:
        raise ValueError("need rho^2 > a to keep |z_2| real")
    rho2 = np.sqrt(rho * rho - a_level)
    if abs(b_level) > rho * rho2:
        raise ValueError("|b| exceeds |z_1||z_2|")
    phi2 = np.arccos(b_level / (rho * rho2)) - phi
    return np.array([rho * np.exp(1j * phi), rho2 * np.exp(1j * phi2), x3 + 1j * c_level])


# ---------------------------------------------------------------------------
# cones over the sphere and asymptotically conical pieces


def so_cone_sample(m, c, theta, x):
    """Point lambda * x on the rotation-invariant cone Im(lambda^m) = c.

    lambda = (c / sin(m theta))^{1/m} e^{i theta} with theta in (0, pi/m)
    and c > 0; x is a unit vector of R^m.  Phase of the family: 1.
    """
    x = np.asarray(x, dtype=float)
    if abs(np.linalg.norm(x) - 1.0) > 1e-10:
        raise ValueError("x must be a unit vector")
    s = np.sin(m * theta)
    if s <= 0.0 or not 0.0 < theta < np.pi / m:
        raise ValueError(f"theta = {theta} must lie in (0, pi/m) so sin(m theta) > 0")
    lam = (c / s) ** (1.0 / m) * np.exp(1j * theta)
    return lam * x


def _so_cone_frame(m, c, theta, x):
    lam = (c / np.sin(m * theta)) ** (1.0 / m) * np.exp(1j * theta)
    dlam = lam * (1j - 1.0 / np.tan(m * theta))
    rows = [lam * t for t in _sphere_tangent_basis(np.asarray(x, dtype=float))]
    rows.append(dlam * np.asarray(x, dtype=float))
    return TangentFrame(np.stack(rows))


def ac_from_cone(link_sampler, m, c, theta, link_params, link_phase=0.0):
    """Point of the asymptotically conical family built from a cone link.

    link_sampler maps link parameters to a unit-norm point of the link of a
    special Lagrangian cone with calibration angle link_phase; the link is
    rotated by e^{-i link_phase / m} so the construction starts from a
    phase-1 cone.  The output point is c (sin(m theta))^{-1/m} e^{i theta}
    times the link point, theta in (0, pi/m); the resulting family again
    has phase 1.  As theta -> 0+ the prefactor diverges and the family
    escapes along the original cone.
    """
    if not 0.0 < theta < np.pi / m:
        raise ValueError("theta must lie in (0, pi/m)")
    if c <= 0.0:
        raise ValueError("c must be positive")
    rot = np.exp(-1j * link_phase / m)
    z = rot * np.asarray(link_sampler(np.asarray(link_params, dtype=float)), dtype=complex)
    return c * np.sin(m * theta) ** (-1.0 / m) * np.exp(1j * theta) * z


# ---------------------------------------------------------------------------
# torus-invariant cones: the A = 0 family, the A = 1 cone, oscillating orbits


def _torus_orbit_point(a: CoeffVector, u, theta, psi, r, orbit_coords, signs=None):
    """Point r e^{i alpha_j} sqrt(a_j u + 1) with the two phase constraints
    sum alpha_j = theta, sum a_j alpha_j = psi solved by a particular choice
    plus orbit coordinates along the constraint null space."""
    radicand = a.a * u + 1.0
    if np.any(radicand < -1e-12):
        raise ValueError("u outside the admissible interval")
    alphas = theta / a.m + psi * a.a / float(np.sum(a.a ** 2))
    basis = _angle_basis(a)
    for s, n in zip(np.atleast_1d(orbit_coords), basis):
        alphas = alphas + s * n
    signs = np.ones(a.m) if signs is None else np.asarray(signs, dtype=float)
    return signs * r * np.exp(1j * alphas) * np.sqrt(np.maximum(radicand, 0.0)), alphas


def case_a_sample(a: CoeffVector, u, alphas, r, signs=None):
    """Point of the stationary-angle cone: r e^{i alpha_j} sqrt(a_j u + 1).

    The angles must satisfy sum alpha_j = 0 and sum a_j alpha_j = 0; u runs
    over [-1/a_m, -1/a_1], and at the ends the last / first coordinate
    collapses to zero (signs optionally extend past the collapse).  Phase
    of the family: i^{m-2}.  The frame is analytic and only valid at
    interior u.
    """
    alphas = np.asarray(alphas, dtype=float)
    if abs(np.sum(alphas)) > 1e-10 or abs(np.dot(a.a, alphas)) > 1e-10:
        raise ValueError("angles must satisfy both linear constraints")
    lo, hi = a.u_range
    if not lo - 1e-12 <= u <= hi + 1e-12:
        raise ValueError(f"u = {u} outside [{lo}, {hi}]")
    radicand = a.a * u + 1.0
    signs_arr = np.ones(a.m) if signs is None else np.asarray(signs, dtype=float)
    point = signs_arr * r * np.exp(1j * alphas) * np.sqrt(np.maximum(radicand, 0.0))
    if np.any(radicand <= 1e-12):
        return SamplePoint(point, None, (r, u, *alphas))
    rows = [point / r]
    rows.append(point * a.a / (2.0 * radicand))
    for n in _angle_basis(a):
        rows.append(1j * n * point)
    return SamplePoint(point, TangentFrame(np.stack(rows)), (r, u, *alphas))


def case_b_sample(m, r, alphas):
    """Point (r e^{i alpha_1}, ..., r e^{i alpha_m}) with sum alpha_j = pi/2.

    This is the u = 0 stationary cone; it does not depend on the weights.
    Phase: i^{m-2}.
    """
    alphas = np.asarray(alphas, dtype=float)
    if abs(np.sum(alphas) - np.pi / 2.0) > 1e-10:
        raise ValueError("angles must sum to pi/2")
    point = r * np.exp(1j * alphas)
    rows = [point / r]
    for n in _orthonormal_null_rows(np.ones((1, m))):
        rows.append(1j * n * point)
    return SamplePoint(point, TangentFrame(np.stack(rows)), (r, *alphas))


def _pm1_w(B, C, t):
    w1 = B * np.exp(1j * t) + C * np.exp(-1j * t)
    wm = 1j * np.conj(B) * np.exp(-1j * t) - 1j * np.conj(C) * np.exp(1j * t)
    dw1 = 1j * (B * np.exp(1j * t) - C * np.exp(-1j * t))
    dwm = np.conj(B) * np.exp(-1j * t) + np.conj(C) * np.exp(1j * t)
    return w1, wm, dw1, dwm


def special_pm1_sample(B, C, m, r, t, alphas):
    """Orbit point of the constant-rotation family for weights (-1,0,...,0,1).

    w_1 = B e^{it} + C e^{-it} and w_m = i conj(B) e^{-it} - i conj(C) e^{it}
    with |B|^2 + |C|^2 = 1; the middle coordinates are unimodular constants.
    The conserved product imaginary part is |B|^2 - |C|^2, independent of t.
    Angles must satisfy sum alpha_j = 0 and alpha_1 = alpha_m.  Phase: i^{m-2}.
    """
    B, C = complex(B), complex(C)
    if abs(abs(B) ** 2 + abs(C) ** 2 - 1.0) > 1e-12:
        raise ValueError("need |B|^2 + |C|^2 = 1")
    alphas = np.asarray(alphas, dtype=float)
    if abs(np.sum(alphas)) > 1e-10 or abs(alphas[0] - alphas[-1]) > 1e-10:
        raise ValueError("angles must satisfy sum = 0 and alpha_1 = alpha_m")
    w1, wm, dw1, dwm = _pm1_w(B, C, t)
    coords = np.ones(m, dtype=complex)
    coords[0], coords[-1] = w1, wm
    point = r * np.exp(1j * alphas) * coords
    dt_coords = np.zeros(m, dtype=complex)
    dt_coords[0], dt_coords[-1] = dw1, dwm
    rows = [point / r, r * np.exp(1j * alphas) * dt_coords]
    constraint = np.vstack([np.ones(m), np.eye(m)[0] - np.eye(m)[-1]])
    for n in _orthonormal_null_rows(constraint):
        rows.append(1j * n * point)
    return SamplePoint(point, TangentFrame(np.stack(rows)), (r, t, *alphas))


class torus_cone_family:
    """Oscillating torus-invariant cone attached to a closing solution.

    Integrates the reduced flow once over the closing window [0, b_mult*T]
    from (u, theta, psi) = (alpha, pi/2, psi0) and serves orbit samples with
    analytic frames from the dense trajectory.
    """

    def __init__(self, a: CoeffVector, solution: TorusSolution, psi0=0.0, tol=1e-11):
        self.a = a
        self.solution = solution
        td = turning_points(a, solution.A)
        self.turning = td
        self.traj = integrate_reduced(
            a, (td.alpha, np.pi / 2.0, psi0), (0.0, solution.b_mult * solution.T), tol=tol
        )

    def orbit_data(self, t):
        return self.traj.state(t)

    def sample(self, r, t, orbit_coords):
        from .reduced import q_eval

        u, theta, psi = self.traj.state(t)
        point, _alphas = _torus_orbit_point(self.a, u, theta, psi, r, orbit_coords)
        q, _ = q_eval(self.a, u)
        radicand = self.a.a * u + 1.0
        du = 2.0 * np.sqrt(max(q, 0.0)) * np.cos(theta)
        A = self.solution.A
        s2 = float(np.sum(self.a.a ** 2))
        dtheta_tot = -A * np.sum(self.a.a / radicand)
        dpsi_tot = -A * np.sum(self.a.a ** 2 / radicand)
        dalphas = dtheta_tot / self.a.m + dpsi_tot * self.a.a / s2
        rows = [point / r, point * (self.a.a * du / (2.0 * radicand) + 1j * dalphas)]
        for n in _angle_basis(self.a):
            rows.append(1j * n * point)
        return SamplePoint(point, TangentFrame(np.stack(rows)), (r, t, *np.atleast_1d(orbit_coords)))


def torus_cone_sample(a: CoeffVector, solution: TorusSolution, r, t, orbit_coords, family=None):
    """Sample the oscillating torus cone at time t along the closing orbit."""
    fam = family if family is not None else torus_cone_family(a, solution)
    return fam.sample(r, t, orbit_coords)


# ---------------------------------------------------------------------------
# m = 3 explicit cone and its conformal parameterization


def _explicit_m3_w(b, t, modulus_perturb=0.0):
    """Coordinate functions (c_1 dn, c_2 cn, c_3 sn)(a_ell t) and their
    t-derivatives; a nonzero modulus perturbation gives a non-solution."""
    _w0, (a_ell, b_ell) = explicit_A0_m3(b, 0.0)  # validates the hypotheses on b
    a1, a2, a3 = b_to_a(*b)
    c1 = np.sqrt((a3 - a1) / a3)
    c2 = np.sqrt((a3 - a2) / a3)
    c3 = np.sqrt((a2 - a3) / a2)
    k = min(b_ell + modulus_perturb, 1.0)
    tri = jacobi(a_ell * t, k)
    w = np.array([c1 * tri.dn, c2 * tri.cn, c3 * tri.sn])
    dw = a_ell * np.array(
        [-c1 * k * k * tri.sn * tri.cn, -c2 * tri.sn * tri.dn, c3 * tri.cn * tri.dn]
    )
    return w, dw, a_ell, b_ell


def explicit_m3_sample(b, r, s, t):
    """Point r (e^{i b_1 s} w_1, e^{i b_2 s} w_2, e^{i b_3 s} w_3)(t) of the
    explicit m = 3 torus cone; requires integers b_2 > b_3 > 0 > b_1 with
    sum zero.  Phase: i.  The frame is analytic.
    """
    w, dw, _a_ell, _b_ell = _explicit_m3_w(b, t)
    phases = np.exp(1j * np.asarray(b, dtype=float) * s)
    point = r * phases * w
    rows = [
        phases * w,
        1j * np.asarray(b, dtype=float) * point,
        r * phases * dw,
    ]
    return SamplePoint(point, TangentFrame(np.stack(rows)), (r, s, t))


def conformal_residual(b1, b2, b3, s, t, modulus_perturb=0.0):
    """Conformality defect of the unit-sphere map Phi(s, t).

    Phi = 3^{-1/2} (e^{i b_j s} w_j(t)); returns (g(dPhi/ds, dPhi/dt),
    |dPhi/ds|^2 - |dPhi/dt|^2), both zero for true solutions.  A modulus
    perturbation breaks the solution property and inflates the norm gap.
    """
    from .calibration import metric_inner

    b = (b1, b2, b3)
    w, dw, _, _ = _explicit_m3_w(b, t, modulus_perturb)
    phases = np.exp(1j * np.asarray(b, dtype=float) * s)
    dphi_ds = 1j * np.asarray(b, dtype=float) * phases * w / np.sqrt(3.0)
    dphi_dt = phases * dw / np.sqrt(3.0)
    inner = metric_inner(dphi_ds, dphi_dt)
    norm_gap = metric_inner(dphi_ds, dphi_ds) - metric_inner(dphi_dt, dphi_dt)
    return inner, norm_gap


# ---------------------------------------------------------------------------
# families from perpendicular symmetries


def quadric_sample(a: CoeffVector, c, theta, x):
    """Point (e^{i a_1 theta} x_1, ..., e^{i a_m theta} x_m) with x real on
    the level set sum a_j x_j^2 = c.

    The map is generically 2:1: theta -> theta + pi combined with
    x_j -> (-1)^{a_j} x_j returns the same point (the weights are integers).
    Phase: i.  The frame is analytic.
    """
    if not a.integral:
        raise ValueError("quadric weights must be integers")
    x = np.asarray(x, dtype=float)
    if abs(float(np.sum(a.a * x * x)) - c) > 1e-10:
        raise ValueError("x does not satisfy the quadric constraint")
    phases = np.exp(1j * a.a * theta)
    point = phases * x
    rows = [1j * a.a * point]
    grad = a.a * x
    for tvec in _orthonormal_null_rows(grad[None, :]):
        rows.append(phases * tvec)
    return SamplePoint(point, TangentFrame(np.stack(rows)), (theta, *x))


def helicoid_sample(t, x1, x2):
    """Point (e^{it} x_1, e^{-it} x_2, x_3 + it) with x_3 = (x_2^2 - x_1^2)/2.

    A twisted graph over the parabolic surface x_1^2 - x_2^2 + 2 x_3 = 0;
    its axis is the imaginary z_3 line.  Phase: i.
    """
    x3 = 0.5 * (x2 * x2 - x1 * x1)
    point = np.array([np.exp(1j * t) * x1, np.exp(-1j * t) * x2, x3 + 1j * t])
    rows = [
        np.array([1j * np.exp(1j * t) * x1, -1j * np.exp(-1j * t) * x2, 1j]),
        np.array([np.exp(1j * t), 0.0, -x1]),
        np.array([0.0, np.exp(-1j * t), x2]),
    ]
    return SamplePoint(point, TangentFrame(np.stack(rows)), (t, x1, x2))


def perp4_sample(link3_sampler, theta, x4, c, link_params, link_phase=0.0):
    """Point of the C^4 family (e^{i theta} x, e^{-3 i theta} x_4) where x
    runs over a special Lagrangian cone in C^3 scaled onto the level set
    |x|^2 - 3 x_4^2 = c.

    link3_sampler maps link parameters to a unit-norm point of the cone's
    link; link_phase rotates it to a phase-1 cone first.  Needs
    c + 3 x_4^2 > 0.  Phase of the family: i.
    """
    rho_sq = c + 3.0 * x4 * x4
    if rho_sq <= 0.0:
        raise ValueError("need c + 3 x_4^2 > 0")
    rot = np.exp(-1j * link_phase / 3.0)
    link = rot * np.asarray(link3_sampler(np.asarray(link_params, dtype=float)), dtype=complex)
    x = np.sqrt(rho_sq) * link
    return np.concatenate([np.exp(1j * theta) * x, [np.exp(-3j * theta) * x4]])


# ---------------------------------------------------------------------------
# the SU(2)-invariant family in C^4


def marshall_matrices():
    """Anti-Hermitian trace-free generators of the SU(2)-action on C^4."""
    s3 = np.sqrt(3.0)
    x1 = 1j * np.diag([3.0, 1.0, -1.0, -3.0])
    x2 = np.array(
        [[0, s3, 0, 0], [-s3, 0, 2, 0], [0, -2, 0, s3], [0, 0, -s3, 0]], dtype=complex
    )
    x3 = 1j * np.array(
        [[0, s3, 0, 0], [s3, 0, 2, 0], [0, 2, 0, s3], [0, 0, s3, 0]], dtype=float
    )
    return [x1, x2, x3]


def _marshall_residual(d, z):
    z1, z2, z3, z4 = z
    lin = np.sqrt(3.0) * (z1 * np.conj(z2) + z3 * np.conj(z4)) + 2.0 * z2 * np.conj(z3)
    balance = 3 * abs(z1) ** 2 + abs(z2) ** 2 - abs(z3) ** 2 - 3 * abs(z4) ** 2
    # z1 z3^3 (not z1 z3^2): every monomial must be quartic with zero total
    # weight under diag(3, 1, -1, -3), or the level set loses its symmetry
    quartic = (
        2.0 * np.sqrt(3.0) * (z1 * z3 ** 3 + z2 ** 3 * z4)
        - 9.0 * z1 * z2 * z3 * z4
        + 4.5 * z1 ** 2 * z4 ** 2
        - 1.5 * z2 ** 2 * z3 ** 2
    )
    return np.array([lin.real, lin.imag, balance, quartic.imag - d])


def marshall_seed(d, rho, phi1):
    """Point (z_1, 0, 0, z_4) with |z_1| = |z_4| = rho and the quartic level d.

    On this slice the residuals reduce to Im((9/2) z_1^2 z_4^2) = d, solved
    for the phase of z_4.
    """
    tau = 2.0 * d / (9.0 * rho ** 4)
    if abs(tau) > 1.0:
        raise ValueError("level d out of reach at this radius")
    phi4 = 0.5 * (np.arcsin(tau) - 2.0 * phi1)
    return np.array([rho * np.exp(1j * phi1), 0.0, 0.0, rho * np.exp(1j * phi4)])


def marshall_sample(d, rho, phi1, group_coords):
    """Apply a symmetry-group element to a seed point and attach the frame.

    The group action preserves every defining equation, so the moved point
    stays on the family exactly; the frame is the SVD null space of the
    residual Jacobian there.
    """
    seed = marshall_seed(d, rho, phi1)
    gen = sum(t * X for t, X in zip(group_coords, marshall_matrices()))
    z = expm(gen) @ seed
    frame = frame_from_implicit(lambda p: _marshall_residual(d, p), z)
    return SamplePoint(z, frame, (rho, phi1, *group_coords))


# ---------------------------------------------------------------------------
# defining-equation residuals


def implicit_residual(spec: FamilySpec, z):
    """Residuals of the defining equations, where the family has them."""
    z = np.asarray(z, dtype=complex)
    kind, p = spec.kind, spec.params
    if kind == FamilyKind.HL_TORUS:
        levels = np.asarray(p["levels"], dtype=float)
        mods = np.abs(z) ** 2
        prod = np.prod(z)
        prod_res = (prod.imag if spec.m % 2 else prod.real) - p["b"]
        return np.concatenate([mods[:-1] - mods[-1] - levels, [prod_res]])
    if kind == FamilyKind.PRODUCT:
        return np.array(
            [
                abs(z[0]) ** 2 - abs(z[1]) ** 2 - p["a"],
                (z[0] * z[1]).real - p["b"],
                z[2].imag - p["c"],
            ]
        )
    if kind == FamilyKind.MARSHALL:
        return _marshall_residual(p["d"], z)
    if kind == FamilyKind.QUADRIC:
        return np.array([float(np.sum(p["a"].a * np.abs(z) ** 2)) - p["c"]])
    raise ValueError(f"family {kind.value} has no implicit form")


# ---------------------------------------------------------------------------
# symmetry data: generators of the preserved group action and moment levels


def _diag_generator(vec):
    return 1j * np.diag(np.asarray(vec, dtype=float)), np.zeros(len(vec), dtype=complex)


def _rotation_generators(m):
    gens = []
    for i in range(m):
        for j in range(i + 1, m):
            mat = np.zeros((m, m), dtype=complex)
            mat[i, j] = -1.0
            mat[j, i] = 1.0
            gens.append((mat, np.zeros(m, dtype=complex)))
    return gens


def moment_generators(spec: FamilySpec):
    """(generators, expected moment levels, abelian flag) for the family.

    Generators are (X, v) with X anti-Hermitian trace-free and v a
    translation part.  Levels follow the normalization that vanishes at the
    origin, so they match the defining equations up to the recorded factor
    of one half per quadratic constraint.
    """
    kind, p, m = spec.kind, spec.params, spec.m
    if kind == FamilyKind.HL_TORUS:
        gens = [_diag_generator(np.eye(m)[j] - np.eye(m)[-1]) for j in range(m - 1)]
        levels = 0.5 * np.asarray(p["levels"], dtype=float)
        return gens, levels, True
    if kind == FamilyKind.SO_CONE:
        gens = _rotation_generators(m)
        return gens, np.zeros(len(gens)), False
    if kind == FamilyKind.PRODUCT:
        vec = np.zeros(m)
        vec[0], vec[1] = 1.0, -1.0
        trans = (np.zeros((m, m), dtype=complex), np.array([0.0, 0.0, 1.0], dtype=complex))
        return [_diag_generator(vec), trans], np.array([0.5 * p["a"], -p["c"]]), True
    if kind == FamilyKind.MARSHALL:
        gens = [(X, np.zeros(4, dtype=complex)) for X in marshall_matrices()]
        return gens, np.zeros(3), False
    if kind in (FamilyKind.CASE_A_CONE, FamilyKind.TORUS_CONE):
        a = p["a"]
        gens = [_diag_generator(n) for n in _angle_basis(a)]
        return gens, np.zeros(len(gens)), True
    if kind == FamilyKind.CASE_B:
        gens = [_diag_generator(n) for n in _orthonormal_null_rows(np.ones((1, m)))]
        return gens, np.zeros(len(gens)), True
    if kind == FamilyKind.SPECIAL_PM1:
        constraint = np.vstack([np.ones(m), np.eye(m)[0] - np.eye(m)[-1]])
        gens = [_diag_generator(n) for n in _orthonormal_null_rows(constraint)]
        return gens, np.zeros(len(gens)), True
    if kind == FamilyKind.EXPLICIT_M3:
        return [_diag_generator(np.asarray(p["b"], dtype=float))], np.zeros(1), True
    if kind == FamilyKind.AC_FROM_CONE:
        if p.get("link") == "case_a":
            gens = [_diag_generator(n) for n in _angle_basis(p["a"])]
            return gens, np.zeros(len(gens)), True
        gens = _rotation_generators(m)
        return gens, np.zeros(len(gens)), False
    if kind == FamilyKind.QUADRIC:
        return [_diag_generator(p["a"].a)], np.array([0.5 * p["c"]]), True
    if kind == FamilyKind.HELICOID:
        x = (1j * np.diag([1.0, -1.0, 0.0]), np.array([0.0, 0.0, 1j]))
        return [x], np.zeros(1), True
    if kind == FamilyKind.PERP4:
        return [_diag_generator([1.0, 1.0, 1.0, -3.0])], np.array([0.5 * p["c"]]), True
    raise ValueError(f"no moment data for {kind}")


# ---------------------------------------------------------------------------
# uniform sampling interface for the verification engine


def default_spec(kind: FamilyKind, **overrides) -> FamilySpec:
    """A concrete, nonsingular member of each family, used by the catalog."""
    kind = FamilyKind(kind)
    if kind == FamilyKind.HL_TORUS:
        p = {"m": 3, "levels": [0.4, 0.1], "b": 0.3, "rho": 1.0}
        p.update(overrides)
        return FamilySpec(kind, p["m"], 0.0, p, "torus orbits over modulus constraints")
    if kind == FamilyKind.SO_CONE:
        p = {"m": 3, "c": 1.0}
        p.update(overrides)
        return FamilySpec(kind, p["m"], 0.0, p, "rotation-invariant cone over the sphere")
    if kind == FamilyKind.PRODUCT:
        p = {"a": 0.3, "b": 0.5, "c": 0.2}
        p.update(overrides)
        return FamilySpec(kind, 3, 0.0, p, "plane curve times a real line")
    if kind == FamilyKind.MARSHALL:
        p = {"d": 0.7}
        p.update(overrides)
        return FamilySpec(kind, 4, 0.0, p, "SU(2)-invariant family in C^4")
    if kind == FamilyKind.CASE_A_CONE:
        p = {"a": CoeffVector.make([-3, 1, 2])}
        p.update(overrides)
        m = p["a"].m
        return FamilySpec(kind, m, phase_of_i_power(m - 2), p, "stationary-angle torus cone")
    if kind == FamilyKind.CASE_B:
        p = {"m": 3}
        p.update(overrides)
        return FamilySpec(kind, p["m"], phase_of_i_power(p["m"] - 2), p, "angle-sum pi/2 cone")
    if kind == FamilyKind.TORUS_CONE:
        p = {"a": CoeffVector.make([-3, 1, 2]), "q": "13/5"}
        p.update(overrides)
        m = p["a"].m
        return FamilySpec(kind, m, phase_of_i_power(m - 2), p, "closed oscillating torus cone")
    if kind == FamilyKind.EXPLICIT_M3:
        p = {"b": (-3, 2, 1)}
        p.update(overrides)
        return FamilySpec(kind, 3, np.pi / 2, p, "elliptic-function torus cone in C^3")
    if kind == FamilyKind.SPECIAL_PM1:
        p = {"m": 4, "B": 0.8 + 0.1j}
        p.update(overrides)
        if "C" not in p:
            p["C"] = np.sqrt(1.0 - abs(p["B"]) ** 2)
        return FamilySpec(kind, p["m"], phase_of_i_power(p["m"] - 2), p, "constant-rotation family")
    if kind == FamilyKind.AC_FROM_CONE:
        p = {"m": 3, "c": 1.0, "link": "sphere"}
        p.update(overrides)
        return FamilySpec(kind, p["m"], 0.0, p, "asymptotically conical family from a cone")
    if kind == FamilyKind.QUADRIC:
        p = {"a": CoeffVector.make([-3, 1, 2]), "c": 1.0}
        p.update(overrides)
        return FamilySpec(kind, p["a"].m, np.pi / 2, p, "rotated real quadric")
    if kind == FamilyKind.HELICOID:
        p = dict(overrides)
        return FamilySpec(kind, 3, np.pi / 2, p, "twisted parabolic graph")
    if kind == FamilyKind.PERP4:
        p = {"c": 1.0, "link": "sphere"}
        p.update(overrides)
        return FamilySpec(kind, 4, np.pi / 2, p, "C^3 cone spun into C^4")
    raise ValueError(f"unknown kind {kind}")


def _lin(lo, hi, n):
    return np.linspace(lo, hi, n)


def sample_grid(spec: FamilySpec, n=5, seed=20240611):
    """Deterministic parameter tuples covering a family's smooth stratum."""
    rng = np.random.default_rng(seed)
    kind, p, m = spec.kind, spec.params, spec.m
    if kind == FamilyKind.HL_TORUS:
        return [
            tuple(rng.uniform(0.0, 2 * np.pi, m - 1)) + (rho,)
            for rho in _lin(0.85, 1.25, n)
            for _ in range(2)
        ]
    if kind == FamilyKind.SO_CONE:
        return [
            (theta,) + tuple(rng.uniform(0.1, 3.0, m - 1))
            for theta in _lin(0.15, 0.85, n) * (np.pi / m)
        ]
    if kind == FamilyKind.PRODUCT:
        return [
            (phi, rho, x3)
            for phi in _lin(0.0, 2.0, n)
            for rho, x3 in [(1.0 + 0.1 * phi, 0.3), (1.3, -0.4)]
        ]
    if kind == FamilyKind.MARSHALL:
        return [
            (rho, phi1, *rng.uniform(-0.6, 0.6, 3))
            for rho in _lin(0.9, 1.2, max(2, n // 2))
            for phi1 in _lin(0.0, 1.0, 2)
        ]
    if kind == FamilyKind.CASE_A_CONE:
        a = p["a"]
        lo, hi = a.u_range
        us = _lin(lo + 0.15 * (hi - lo), hi - 0.15 * (hi - lo), n)
        return [
            (r, u) + tuple(rng.uniform(-1.0, 1.0, m - 2))
            for u in us
            for r in (0.8, 1.4)
        ]
    if kind == FamilyKind.CASE_B:
        return [
            (r,) + tuple(rng.uniform(-1.0, 1.0, m - 1))
            for r in _lin(0.7, 1.5, n)
            for _ in range(2)
        ]
    if kind == FamilyKind.TORUS_CONE:
        sol = p["solution"]
        ts = _lin(0.0, sol.b_mult * sol.T, n + 1)[:-1]
        return [(r, t) + tuple(rng.uniform(-1.0, 1.0, m - 2)) for t in ts for r in (0.9, 1.6)]
    if kind == FamilyKind.EXPLICIT_M3:
        return [(r, s, t) for r in (0.8, 1.2) for s in _lin(0.0, 2.0, n) for t in _lin(-1.0, 1.5, n)]
    if kind == FamilyKind.SPECIAL_PM1:
        return [(r, t) + tuple(rng.uniform(-1.0, 1.0, m - 2)) for r in (0.9, 1.3) for t in _lin(0.0, 3.0, n)]
    if kind == FamilyKind.AC_FROM_CONE:
        thetas = _lin(0.15, 0.85, n) * (np.pi / m)
        if p.get("link") == "case_a":
            lo, hi = p["a"].u_range
            return [
                (theta, rng.uniform(lo + 0.2 * (hi - lo), hi - 0.2 * (hi - lo)))
                + tuple(rng.uniform(-1.0, 1.0, m - 2))
                for theta in thetas
            ]
        return [(theta,) + tuple(rng.uniform(0.2, 1.2, m - 1)) for theta in thetas]
    if kind == FamilyKind.QUADRIC:
        a = p["a"].a
        out = []
        while len(out) < 2 * n:
            d = rng.normal(size=m)
            scale_sq = float(np.sum(a * d * d))
            if scale_sq * p["c"] <= 1e-3:
                continue
            x = d * np.sqrt(p["c"] / scale_sq)
            out.append((rng.uniform(0.0, 2 * np.pi), *x))
        return out
    if kind == FamilyKind.HELICOID:
        return [(t, x1, x2) for t in _lin(-1.5, 1.5, n) for x1, x2 in [(0.6, 0.2), (-0.4, 1.0)]]
    if kind == FamilyKind.PERP4:
        return [
            (theta, x4) + tuple(rng.uniform(0.2, 1.2, 2))
            for theta in _lin(0.1, 1.4, n)
            for x4 in (-0.5, 0.4)
        ]
    raise ValueError(f"no default grid for {kind}")


def _sphere_link(params):
    return sphere_point(params)


def _case_a_link(a: CoeffVector):
    """Unit-norm link of the stationary-angle cone: r = 1/sqrt(m)."""

    def link(params):
        u = params[0]
        alphas_coords = params[1:]
        point, _ = _torus_orbit_point(a, u, 0.0, 0.0, 1.0 / np.sqrt(a.m), alphas_coords)
        return point

    return link


def _explicit_m3_link(b):
    def link(params):
        s, t = params
        return explicit_m3_sample(b, 1.0 / np.sqrt(3.0), s, t).point

    return link


def sample_family(spec: FamilySpec, params) -> SamplePoint:
    """Dispatch a parameter tuple to the family's sampler, with a frame."""
    kind, p, m = spec.kind, spec.params, spec.m
    params = tuple(params)
    if kind == FamilyKind.HL_TORUS:
        return hl_sample(m, p["levels"], p["b"], params[-1], params[:-1])
    if kind == FamilyKind.SO_CONE:
        theta, x = params[0], sphere_point(params[1:])
        point = so_cone_sample(m, p["c"], theta, x)
        return SamplePoint(point, _so_cone_frame(m, p["c"], theta, x), params)
    if kind == FamilyKind.PRODUCT:
        point = _product_point(p["a"], p["b"], p["c"], params)
        frame = finite_diff_frame(
            lambda q: _product_point(p["a"], p["b"], p["c"], q), np.asarray(params), h=1e-4
        )
        return SamplePoint(point, frame, params)
    if kind == FamilyKind.MARSHALL:
        return marshall_sample(p["d"], params[0], params[1], params[2:])
    if kind == FamilyKind.CASE_A_CONE:
        a = p["a"]
        r, u, coords = params[0], params[1], params[2:]
        alphas = np.zeros(a.m)
        for s, nvec in zip(coords, _angle_basis(a)):
            alphas = alphas + s * nvec
        return case_a_sample(a, u, alphas, r)
    if kind == FamilyKind.CASE_B:
        r, free = params[0], np.asarray(params[1:], dtype=float)
        alphas = np.concatenate([free, [np.pi / 2 - free.sum()]])
        return case_b_sample(m, r, alphas)
    if kind == FamilyKind.TORUS_CONE:
        fam = p.get("family")
        if fam is None:
            fam = torus_cone_family(p["a"], p["solution"])
            p["family"] = fam
        return fam.sample(params[0], params[1], np.asarray(params[2:], dtype=float))
    if kind == FamilyKind.EXPLICIT_M3:
        return explicit_m3_sample(p["b"], *params)
    if kind == FamilyKind.SPECIAL_PM1:
        r, t, coords = params[0], params[1], params[2:]
        constraint = np.vstack([np.ones(m), np.eye(m)[0] - np.eye(m)[-1]])
        alphas = np.zeros(m)
        for s, nvec in zip(coords, _orthonormal_null_rows(constraint)):
            alphas = alphas + s * nvec
        return special_pm1_sample(p["B"], p["C"], m, r, t, alphas)
    if kind == FamilyKind.AC_FROM_CONE:
        if p.get("link") == "case_a":
            link, link_phase = _case_a_link(p["a"]), phase_of_i_power(m - 2)
        else:
            link, link_phase = _sphere_link, 0.0
        theta, link_params = params[0], np.asarray(params[1:], dtype=float)
        point = ac_from_cone(link, m, p["c"], theta, link_params, link_phase)
        frame = finite_diff_frame(
            lambda q: ac_from_cone(link, m, p["c"], q[0], q[1:], link_phase),
            np.asarray(params),
            h=1e-5,
        )
        return SamplePoint(point, frame, params)
    if kind == FamilyKind.QUADRIC:
        return quadric_sample(p["a"], p["c"], params[0], np.asarray(params[1:], dtype=float))
    if kind == FamilyKind.HELICOID:
        return helicoid_sample(*params)
    if kind == FamilyKind.PERP4:
        if p.get("link") == "explicit_m3":
            link, link_phase = _explicit_m3_link(p["b"]), np.pi / 2
        else:
            link, link_phase = _sphere_link, 0.0
        theta, x4, link_params = params[0], params[1], np.asarray(params[2:], dtype=float)
        point = perp4_sample(link, theta, x4, p["c"], link_params, link_phase)
        frame = finite_diff_frame(
            lambda q: perp4_sample(link, q[0], q[1], p["c"], q[2:], link_phase),
            np.asarray(params),
            h=1e-5,
        )
        return SamplePoint(point, frame, params)
    raise ValueError(f"unknown kind {kind}")
