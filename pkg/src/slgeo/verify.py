"""Batch verification: calibration, moment-map, and closure checks.

Moment maps here follow the normalization that vanishes at the origin: for
a generator (X, v) with X anti-Hermitian trace-free and v a translation
part, the component is mu(z) = -1/2 Im<Xz, z> - Im<v, z>, the Hamiltonian
of the vector field phi(z) = -(Xz + v) under omega, so the contraction
identity d mu (w) = omega(phi(z), w) holds exactly.  With this convention
a diagonal generator i*diag(a) has mu = 1/2 sum a_j |z_j|^2, matching the
families' defining quadratic equations up to the recorded factor.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .calibration import CalibrationReport, kahler_form, sl_check
from .families import FamilySpec, implicit_residual, moment_generators, sample_family, sample_grid
from .reduced import TorusSolution, integrate_reduced, turning_points
from .wsystem import CoeffVector

__all__ = [
    "ClosureReport",
    "MomentSpec",
    "NewtonDivergence",
    "VerifyJob",
    "VerifyReport",
    "closure_check",
    "infinitesimal_action",
    "moment_identity_residual",
    "moment_value",
    "newton_project",
    "verify_family",
]


@dataclass(frozen=True)
class MomentSpec:
    """Generators (X, v) of an isometric affine action with expected levels.

    X must be anti-Hermitian and trace-free.  The abelian flag demands the
    generators commute as affine vector fields, which the level-set
    constructions require; evaluation-only specs for non-abelian groups may
    pass abelian=False.
    """

    generators: list
    levels: np.ndarray | None = None
    abelian: bool = True

    def __post_init__(self):
        for X, v in self.generators:
            X = np.asarray(X, dtype=complex)
            if np.linalg.norm(X + X.conj().T) > 1e-12 * max(1.0, np.linalg.norm(X)):
                raise ValueError("generator matrix is not anti-Hermitian")
            if abs(np.trace(X)) > 1e-12 * max(1.0, np.linalg.norm(X)):
                raise ValueError("generator matrix is not trace-free")
        if self.abelian:
            for i, (Xi, vi) in enumerate(self.generators):
                for Xj, vj in self.generators[i + 1 :]:
                    comm = Xi @ Xj - Xj @ Xi
                    affine = Xi @ vj - Xj @ vi
                    if np.linalg.norm(comm) > 1e-10 or np.linalg.norm(affine) > 1e-10:
                        raise ValueError("generators do not commute as affine vector fields")

    @classmethod
    def for_family(cls, spec: FamilySpec):
        gens, levels, abelian = moment_generators(spec)
        return cls(generators=gens, levels=np.asarray(levels, dtype=float), abelian=abelian)


def moment_value(spec: MomentSpec, z):
    """Moment components at z, one per generator, normalized to vanish at 0."""
    z = np.asarray(z, dtype=complex)
    out = []
    for X, v in spec.generators:
        quad = -0.5 * np.vdot(np.asarray(X, dtype=complex) @ z, z).imag
        lin = -np.vdot(np.asarray(v, dtype=complex), z).imag
        out.append(quad + lin)
    return np.array(out)


def infinitesimal_action(spec: MomentSpec, z):
    """Vector fields phi_i(z) paired with the moment components above."""
    z = np.asarray(z, dtype=complex)
    return [-(np.asarray(X, dtype=complex) @ z + np.asarray(v, dtype=complex)) for X, v in spec.generators]


def moment_identity_residual(spec: MomentSpec, z, w, h=1e-6):
    """max_i | d mu_i(w) - omega(phi_i(z), w) | with central differences.

    The moment components are quadratic, so the differencing is exact up
    to rounding.
    """
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    dmu = (moment_value(spec, z + h * w) - moment_value(spec, z - h * w)) / (2.0 * h)
    fields = infinitesimal_action(spec, z)
    omega_vals = np.array([kahler_form(phi, w) for phi in fields])
    return float(np.max(np.abs(dmu - omega_vals)))


# ---------------------------------------------------------------------------
# Gauss-Newton projection onto implicit families


class NewtonDivergence(RuntimeError):
    pass


def newton_project(residual_fn, seed, tol=1e-12, max_iter=50, h=1e-7):
    """Project a seed onto the zero set of residual_fn by Gauss-Newton.

    Works in the 2m real coordinates with a finite-difference Jacobian and
    minimum-norm least-squares steps, halving the step while it fails to
    reduce the residual.  Returns (point, moved_distance); raises
    NewtonDivergence if max_iter iterations do not reach tol.
    """
    z = np.asarray(seed, dtype=complex).copy()
    m = z.size
    start = z.copy()

    def res(x):
        return np.asarray(residual_fn(x), dtype=float)

    r = res(z)
    for _ in range(max_iter):
        norm = np.linalg.norm(r)
        if norm < tol:
            return z, float(np.linalg.norm(z - start))
        jac = np.empty((r.size, 2 * m))
        for i in range(2 * m):
            dz = np.zeros(m, dtype=complex)
            if i < m:
                dz[i] = h
            else:
                dz[i - m] = 1j * h
            jac[:, i] = (res(z + dz) - res(z - dz)) / (2 * h)
        step, *_ = np.linalg.lstsq(jac, -r, rcond=None)
        dz = step[:m] + 1j * step[m:]
        scale = 1.0
        for _ in range(8):
            trial = z + scale * dz
            r_trial = res(trial)
            if np.linalg.norm(r_trial) < norm:
                z, r = trial, r_trial
                break
            scale *= 0.5
        else:
            raise NewtonDivergence(f"no descent from residual {norm:.3e}")
    if np.linalg.norm(r) < tol:
        return z, float(np.linalg.norm(z - start))
    raise NewtonDivergence(f"residual {np.linalg.norm(r):.3e} after {max_iter} iterations")


# ---------------------------------------------------------------------------
# closure of torus-cone orbits


@dataclass(frozen=True)
class ClosureReport:
    u_gap: float
    theta_gap: float  # |e^{i theta(bT)} - e^{i theta(0)}|
    psi_gap: float  # |e^{i psi(bT)} - e^{i psi(0)}|
    passed: bool


def closure_check(a: CoeffVector, solution: TorusSolution, tol=1e-6, t0=0.0, tol_ode=1e-11):
    """Integrate the reduced flow over b_mult periods and compare orbit data.

    The orbit family closes when (u, e^{i theta}, e^{i psi}) return to their
    starting values after b_mult periods; the gaps are reported and compared
    against tol.  The starting time t0 shifts the initial point along the
    orbit and must not affect the gaps.
    """
    td = turning_points(a, solution.A)
    start = (td.alpha, np.pi / 2.0, 0.0)
    horizon = t0 + solution.b_mult * solution.T
    traj = integrate_reduced(a, start, (0.0, horizon), tol=tol_ode)
    u0, th0, ps0 = traj.state(t0)
    u1, th1, ps1 = traj.state(horizon)
    u_gap = abs(u1 - u0)
    theta_gap = abs(np.exp(1j * th1) - np.exp(1j * th0))
    psi_gap = abs(np.exp(1j * ps1) - np.exp(1j * ps0))
    return ClosureReport(u_gap, theta_gap, psi_gap, bool(max(u_gap, theta_gap, psi_gap) < tol))


# ---------------------------------------------------------------------------
# family verification jobs


@dataclass
class VerifyJob:
    spec: FamilySpec
    grid_size: int = 5
    phase: float | None = None  # defaults to the family's declared phase
    cal_tol: float = 1e-6
    moment_tol: float = 1e-9
    implicit_tol: float = 1e-10
    closure_tol: float = 1e-6
    seed: int = 20240611


@dataclass
class VerifyReport:
    job: VerifyJob
    calibration: CalibrationReport
    moment_max_dev: float
    implicit_max_res: float | None
    closure: ClosureReport | None
    passed: bool
    worst_params: tuple
    sample_count: int

    def to_dict(self):
        spec = self.job.spec
        return {
            "job": {
                "family": spec.kind.value,
                "m": spec.m,
                "phase": self.job.phase if self.job.phase is not None else spec.phase,
                "grid_size": self.job.grid_size,
                "cal_tol": self.job.cal_tol,
                "moment_tol": self.job.moment_tol,
                "seed": self.job.seed,
            },
            "residuals": {
                "max_omega": self.calibration.max_omega_residual,
                "max_imag": self.calibration.max_imag_residual,
                "calibration_defect": self.calibration.calibration_defect,
                "moment_max_dev": self.moment_max_dev,
                "implicit_max_res": self.implicit_max_res,
            },
            "closure": None
            if self.closure is None
            else {
                "u_gap": self.closure.u_gap,
                "theta_gap": self.closure.theta_gap,
                "psi_gap": self.closure.psi_gap,
                "passed": self.closure.passed,
            },
            "pass": self.passed,
            "worst_point": list(map(float, self.worst_params)),
            "sample_count": self.sample_count,
        }

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, **kwargs)


def _prepare_spec(spec: FamilySpec):
    """Resolve derived parameters (e.g. a closing solution for torus cones)."""
    from fractions import Fraction

    from .families import FamilyKind
    from .reduced import find_rational_A

    if spec.kind == FamilyKind.TORUS_CONE and "solution" not in spec.params:
        q = Fraction(spec.params["q"])
        spec.params["solution"] = find_rational_A(spec.params["a"], q)[0]
    return spec


def verify_family(job: VerifyJob) -> VerifyReport:
    """Run calibration, moment, implicit, and closure checks over a grid.

    Sampler failures propagate with the offending grid location attached.
    The job passes when every residual is below its tolerance.
    """
    spec = _prepare_spec(job.spec)
    phase = spec.phase if job.phase is None else job.phase
    mspec = MomentSpec.for_family(spec)
    params_list = sample_grid(spec, job.grid_size, seed=job.seed)

    reports = []
    moment_dev = 0.0
    implicit_max = None
    worst = params_list[0]
    worst_val = -1.0
    for params in params_list:
        try:
            sp = sample_family(spec, params)
            rep = sl_check(sp.frame, phase)
        except Exception as exc:
            raise RuntimeError(f"sampler failed at grid point {params}: {exc}") from exc
        reports.append(rep)
        val = max(rep.max_omega_residual, rep.max_imag_residual, rep.calibration_defect)
        if val > worst_val:
            worst_val, worst = val, params
        if mspec.levels is not None:
            moment_dev = max(moment_dev, float(np.max(np.abs(moment_value(mspec, sp.point) - mspec.levels))))
        try:
            res = implicit_residual(spec, sp.point)
            implicit_max = max(implicit_max or 0.0, float(np.max(np.abs(res))))
        except ValueError:
            pass

    calibration = CalibrationReport.merge(reports)
    closure = None
    from .families import FamilyKind

    if spec.kind == FamilyKind.TORUS_CONE:
        closure = closure_check(spec.params["a"], spec.params["solution"], tol=job.closure_tol)

    passed = (
        calibration.passes(job.cal_tol)
        and moment_dev < job.moment_tol
        and (implicit_max is None or implicit_max < job.implicit_tol)
        and (closure is None or closure.passed)
    )
    return VerifyReport(
        job=job,
        calibration=calibration,
        moment_max_dev=moment_dev,
        implicit_max_res=implicit_max,
        closure=closure,
        passed=passed,
        worst_params=worst,
        sample_count=len(params_list),
    )
