"""The coupled system dw_j/dt = a_j conj(prod_{k!=j} w_k) on C^m.

A weight vector a_1 <= ... <= a_m with sum zero fixes a diagonal torus
action on C^m; orbits of the flow above sweep out special Lagrangian cones
of phase i^{m-2}.  Along solutions the moduli stay pinned to
|w_j|^2 = a_j u + 1 where du/dt = 2 Re(w_1...w_m), and the flow is a
completely integrable Hamiltonian system: the quantities

    p_j = a_m |w_j|^2 - a_j |w_m|^2   (j < m),
    p_m = Im(w_1...w_m),   H = 2 p_m

are first integrals in involution for the symplectic form
(i/2) sum_j a_j^{-1} dw_j ^ dwbar_j.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ode import Trajectory, integrate_ode

__all__ = [
    "CoeffVector",
    "ConservedSet",
    "InvariantReport",
    "WState",
    "WTrajectory",
    "integrate_w",
    "invariants_w",
    "lift",
    "poisson_bracket",
    "poisson_check",
    "project",
    "rhs_w",
    "trajectory_csv_rows",
]


def _hcf(values):
    g = 0
    for v in values:
        g = math.gcd(g, v)
    return g


@dataclass(frozen=True)
class CoeffVector:
    """Sorted weights a_1 <= ... <= a_m with sum zero, not all zero.

    When every entry is an integer the highest common factor must be 1
    (integral=True); real entries are allowed for the ODE-level theory.
    """

    a: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        object.__setattr__(self, "a", a)
        if a.ndim != 1 or a.size < 3:
            raise ValueError("need m >= 3 weights")
        if np.any(np.diff(a) < 0):
            raise ValueError("weights must be sorted ascending")
        scale = float(np.max(np.abs(a)))
        if scale == 0.0:
            raise ValueError("weights must not all vanish")
        if abs(float(np.sum(a))) > 1e-12 * max(1.0, scale):
            raise ValueError(f"weights must sum to zero, got sum {np.sum(a)}")
        if self.integral:
            ints = [int(round(x)) for x in a if round(x) != 0]
            if _hcf(abs(v) for v in ints) != 1:
                raise ValueError("integer weights must have highest common factor 1")

    @classmethod
    def make(cls, values):
        return cls(np.sort(np.asarray(values, dtype=float)))

    @property
    def m(self):
        return self.a.size

    @property
    def integral(self):
        return bool(np.all(np.abs(self.a - np.round(self.a)) < 1e-9))

    @property
    def u_range(self):
        """Open interval (-1/a_m, -1/a_1) on which all a_j u + 1 > 0."""
        return (-1.0 / self.a[-1], -1.0 / self.a[0])

    def is_degenerate_pattern(self):
        """True for (-1, 0, ..., 0, 1) up to scale: only the ends nonzero and opposite."""
        a = self.a
        return bool(
            np.all(np.abs(a[1:-1]) < 1e-14)
            and abs(a[0] + a[-1]) < 1e-14
            and a[-1] > 0
        )


@dataclass(frozen=True)
class WState:
    """Point of the flow: complex coordinates w plus the modulus parameter u."""

    w: np.ndarray
    u: float

    def __post_init__(self):
        object.__setattr__(self, "w", np.asarray(self.w, dtype=complex))
        object.__setattr__(self, "u", float(self.u))


@dataclass(frozen=True)
class ConservedSet:
    pj: np.ndarray  # a_m |w_j|^2 - a_j |w_m|^2 for j = 1..m-1
    pm: float  # Im(w_1 ... w_m)

    @property
    def H(self):
        return 2.0 * self.pm


@dataclass(frozen=True)
class InvariantReport:
    conserved: ConservedSet
    max_constraint_residual: float  # max_j | |w_j|^2 - a_j u - 1 |
    A_residual: float | None = None  # | Im(w_1...w_m) - A_ref | when a reference is given


def lift(a: CoeffVector, u, thetas):
    """w_j = e^{i theta_j} sqrt(a_j u + 1); requires all radicands positive."""
    thetas = np.asarray(thetas, dtype=float)
    if thetas.shape != (a.m,):
        raise ValueError(f"need {a.m} phase angles")
    radicand = a.a * u + 1.0
    if np.any(radicand <= 0.0):
        raise ValueError(f"a_j u + 1 must be positive, got min {radicand.min()}")
    return WState(np.exp(1j * thetas) * np.sqrt(radicand), u)


def project(a: CoeffVector, w, tol=1e-8):
    """Recover (u, thetas) from w: inverse of lift on consistent states.

    u is the average of (|w_j|^2 - 1)/a_j over the nonzero weights; the
    spread of those estimates beyond tol means w violates the modulus
    constraint and is rejected.  thetas are principal arguments in (-pi, pi].
    """
    w = np.asarray(w, dtype=complex)
    if np.any(w == 0):
        raise ValueError("cannot project a state with a vanishing coordinate")
    active = a.a != 0.0
    estimates = (np.abs(w[active]) ** 2 - 1.0) / a.a[active]
    u = float(np.mean(estimates))
    if estimates.size > 1 and float(np.ptp(estimates)) > tol:
        raise ValueError(f"inconsistent moduli: u estimates spread {np.ptp(estimates):.3e}")
    inactive = ~active
    if np.any(np.abs(np.abs(w[inactive]) - 1.0) > tol):
        raise ValueError("zero-weight coordinates must have unit modulus")
    return u, np.angle(w)


def rhs_w(a: CoeffVector, w):
    """dw_j/dt = a_j * conj(prod of the other coordinates).

    Prefix/suffix products keep the evaluation exact when coordinates
    vanish (two zeros kill every product except at those two slots).
    """
    w = np.asarray(w, dtype=complex)
    m = w.size
    pre = np.ones(m + 1, dtype=complex)
    suf = np.ones(m + 1, dtype=complex)
    for j in range(m):
        pre[j + 1] = pre[j] * w[j]
        suf[m - 1 - j] = suf[m - j] * w[m - 1 - j]
    others = pre[:m] * suf[1:]
    return a.a * np.conj(others)


def _pack(w, u):
    return np.concatenate([w.real, w.imag, [u]])


def _unpack(y, m):
    return y[:m] + 1j * y[m : 2 * m], y[2 * m]


@dataclass
class WTrajectory:
    """Trajectory of the coupled (w, u) system with complex accessors."""

    a: CoeffVector
    raw: Trajectory

    @property
    def times(self):
        return self.raw.times

    @property
    def step_stats(self):
        return {"accepted": self.raw.accepted, "rejected": self.raw.rejected, "nfev": self.raw.nfev}

    def state(self, t) -> WState:
        w, u = _unpack(self.raw(t), self.a.m)
        return WState(w, u)

    def states(self, t=None):
        ys = self.raw.states if t is None else np.atleast_2d(self.raw(t))
        m = self.a.m
        return ys[:, :m] + 1j * ys[:, m : 2 * m], ys[:, 2 * m]


def integrate_w(a: CoeffVector, w0, t_span, tol=1e-10, t_eval=None):
    """Integrate the coupled (w, u) flow from w0 over t_span.

    w0 must satisfy |w_j|^2 = a_j u0 + 1 for a common u0 to within 1e-10;
    u is carried as an extra state variable and the algebraic relation is
    monitored as a drift gauge.  Drift beyond 1e3 * tol fails the run.
    """
    w0 = np.asarray(w0, dtype=complex)
    active = a.a != 0.0
    estimates = (np.abs(w0[active]) ** 2 - 1.0) / a.a[active]
    u0 = float(np.mean(estimates))
    resid0 = float(np.max(np.abs(np.abs(w0) ** 2 - (a.a * u0 + 1.0))))
    if resid0 > 1e-10:
        raise ValueError(f"w0 violates the modulus constraint by {resid0:.3e}")

    m = a.m

    def fun(t, y):
        w, _ = _unpack(y, m)
        dw = rhs_w(a, w)
        du = 2.0 * np.prod(w).real
        return _pack(dw, du)

    raw = integrate_ode(fun, t_span, _pack(w0, u0), rtol=tol, atol=tol, t_eval=t_eval)
    traj = WTrajectory(a, raw)
    ws, us = traj.states()
    drift = np.max(np.abs(np.abs(ws) ** 2 - (a.a[None, :] * us[:, None] + 1.0)))
    if drift > 1e3 * tol:
        raise RuntimeError(f"modulus-constraint drift {drift:.3e} exceeds 1e3*tol")
    return traj


def invariants_w(a: CoeffVector, state: WState, ref_A=None) -> InvariantReport:
    """First integrals and constraint residuals at a single state."""
    w = state.w
    mods = np.abs(w) ** 2
    pj = a.a[-1] * mods[:-1] - a.a[:-1] * mods[-1]
    pm = float(np.prod(w).imag)
    resid = float(np.max(np.abs(mods - (a.a * state.u + 1.0))))
    A_res = None if ref_A is None else abs(pm - ref_A)
    return InvariantReport(ConservedSet(pj, pm), resid, A_res)


def _p_functions(a: CoeffVector):
    fns = []
    for j in range(a.m - 1):
        fns.append(lambda w, j=j: a.a[-1] * abs(w[j]) ** 2 - a.a[j] * abs(w[-1]) ** 2)
    fns.append(lambda w: np.prod(w).imag)
    fns.append(lambda w: 2.0 * np.prod(w).imag)  # H
    return fns


def poisson_bracket(a: CoeffVector, f, g, z, h=1e-5):
    """{f, g} at z under omega = (i/2) sum_j a_j^{-1} dw_j ^ dwbar_j.

    Gradients are central finite differences in the real coordinates
    (x_j, y_j) = (Re w_j, Im w_j); zero-weight coordinates are frozen and
    excluded from the sum, since the flow leaves them constant.
    """
    z = np.asarray(z, dtype=complex)
    m = z.size
    active = np.flatnonzero(a.a != 0.0)
    if active.size == 0:
        raise ValueError("no active coordinates: all weights vanish")

    def grad(fn):
        gx = np.zeros(m)
        gy = np.zeros(m)
        for j in active:
            dz = np.zeros(m, dtype=complex)
            dz[j] = h
            gx[j] = (fn(z + dz) - fn(z - dz)) / (2 * h)
            dz[j] = 1j * h
            gy[j] = (fn(z + dz) - fn(z - dz)) / (2 * h)
        return gx, gy

    fx, fy = grad(f)
    gx, gy = grad(g)
    return float(np.sum(a.a[active] * (fx[active] * gy[active] - fy[active] * gx[active])))


def poisson_check(a: CoeffVector, z, h=1e-5):
    """Matrix of brackets among (p_1..p_{m-1}, p_m, H); all should vanish."""
    fns = _p_functions(a)
    n = len(fns)
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            out[i, j] = poisson_bracket(a, fns[i], fns[j], z, h)
            out[j, i] = -out[i, j]
    return out


def trajectory_csv_rows(traj: WTrajectory, t_eval):
    """Rows (t, Re w_j.., Im w_j.., u, p_1.., p_m, H, constraint) for export."""
    ws, us = traj.states(t_eval)
    rows = []
    for t, w, u in zip(np.atleast_1d(t_eval), ws, us):
        rep = invariants_w(traj.a, WState(w, u))
        rows.append(
            [t, *w.real, *w.imag, u, *rep.conserved.pj, rep.conserved.pm, rep.conserved.H,
             rep.max_constraint_residual]
        )
    return rows
