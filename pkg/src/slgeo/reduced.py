"""The reduced (u, theta, psi) system and its period / rotation analysis.

With Q(u) = prod_j (a_j u + 1), orbits of the torus-invariant flow are
governed by

    du/dt     =  2 Q(u)^{1/2} cos(theta)
    dtheta/dt = -Q(u)^{1/2} sin(theta) sum_j a_j / (a_j u + 1)
    dpsi/dt   = -Q(u)^{1/2} sin(theta) sum_j a_j^2 / (a_j u + 1)

and A = Q(u)^{1/2} sin(theta) is conserved.  For A in (0, 1), u oscillates
between the two roots alpha < 0 < beta of Q(u) = A^2 with period T, and psi
drops by a fixed rotation Psi each period.  Whenever Psi is a rational
multiple 2*pi*q of a full turn, the orbit family closes up after
denominator(q) periods and the cone is a torus cone.  Both T and Psi are
complete integrals with inverse-square-root endpoint singularities and are
evaluated by factoring out the simple roots at alpha, beta.

For m = 3 the oscillation has a closed form in Jacobi elliptic functions,
and for A = 0 the coordinates themselves reduce to sn, cn, dn.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.optimize import brentq

from .elliptic import endpoint_sqrt_quadrature, jacobi, sqrt_weight_integral
from .ode import Trajectory, integrate_ode
from .wsystem import CoeffVector

__all__ = [
    "NoBracketError",
    "ReducedTrajectory",
    "TorusSolution",
    "TurningData",
    "a_to_b",
    "angles_of_u",
    "b_to_a",
    "closed_form_params_m3",
    "closed_form_u_m3",
    "compute_A",
    "explicit_A0_m3",
    "find_rational_A",
    "integrate_reduced",
    "period_T",
    "psi_limits",
    "psi_table",
    "q_eval",
    "recognize_rational",
    "rotation_Psi",
    "turning_points",
]


class NoBracketError(RuntimeError):
    """The requested rotation number is not bracketed by the scanned range."""


# ---------------------------------------------------------------------------
# The polynomial Q and its root structure


def q_coeffs(a: CoeffVector):
    """Ascending power-basis coefficients of Q(u) = prod_j (a_j u + 1)."""
    c = np.array([1.0])
    for aj in a.a:
        c = np.convolve(c, [1.0, aj])
    return c


def q_eval(a: CoeffVector, u):
    """Q(u) and Q'(u); u may be a scalar or an array."""
    c = q_coeffs(a)
    dc = c[1:] * np.arange(1, c.size)
    u = np.asarray(u, dtype=float)
    q = np.polynomial.polynomial.polyval(u, c)
    dq = np.polynomial.polynomial.polyval(u, dc)
    if u.ndim == 0:
        return float(q), float(dq)
    return q, dq


@dataclass(frozen=True)
class TurningData:
    """Roots of Q(u) = A^2 around the oscillation interval.

    alpha < 0 < beta bound the oscillation; gamma lists all real roots in
    descending order (for m = 3: gamma_1 >= gamma_2 >= 0 >= gamma_3).
    """

    A: float
    alpha: float
    beta: float
    gamma: np.ndarray


def turning_points(a: CoeffVector, A) -> TurningData:
    """Locate alpha in (-1/a_m, 0) and beta in (0, -1/a_1) with Q = A^2.

    Q increases from 0 to 1 on [-1/a_m, 0] and decreases back to 0 on
    [0, -1/a_1], so for 0 < A < 1 each interval holds exactly one root.
    """
    A = float(A)
    if not 0.0 < A < 1.0:
        raise ValueError(f"need 0 < A < 1, got A={A}")
    lo, hi = a.u_range
    target = A * A

    def g(u):
        return q_eval(a, u)[0] - target

    def _root(outer):
        # g(0) = 1 - A^2 > 0 and g -> -A^2 at the interval ends, but the
        # ends are roots of Q only up to rounding: for very small A the
        # computed sign there can come out positive, so walk inward until
        # it is genuinely negative
        probe = outer
        shift = 1e-15 * max(abs(outer), 1e-3)
        for _ in range(60):
            if g(probe) < 0.0:
                return brentq(g, min(probe, 0.0), max(probe, 0.0), xtol=1e-15, rtol=8.9e-16)
            probe = outer - np.sign(outer) * shift
            shift *= 2.0
            if abs(probe) < 0.5 * abs(outer):
                break
        raise ValueError(f"could not bracket the turning point near {outer}")

    alpha = _root(lo)
    beta = _root(hi)

    coeffs = q_coeffs(a).copy()
    coeffs[0] -= target
    roots = np.polynomial.polynomial.polyroots(coeffs)
    real = np.sort(roots[np.abs(roots.imag) < 1e-9 * max(1.0, np.max(np.abs(roots)))].real)[::-1]
    return TurningData(A=A, alpha=float(alpha), beta=float(beta), gamma=real)


def compute_A(a: CoeffVector, u0, theta0):
    """Conserved A = Q(u0)^{1/2} sin(theta0); lies in [-1, 1]."""
    q, _ = q_eval(a, u0)
    if q <= 0.0:
        raise ValueError(f"Q(u0) = {q} must be positive (u0 outside the admissible interval)")
    return float(np.sqrt(q) * np.sin(theta0))


def _deflate(coeffs, root):
    """Synthetic division of an ascending-coefficient polynomial by (u - root)."""
    desc = coeffs[::-1]
    out = np.empty(desc.size - 1)
    acc = 0.0
    for i, c in enumerate(desc[:-1]):
        acc = c + root * acc
        out[i] = acc
    return out[::-1]


def _smooth_factor(a: CoeffVector, A, td: TurningData):
    """Coefficients of S with Q(u) - A^2 = (u - alpha)(beta - u) S(u), S > 0 inside."""
    coeffs = q_coeffs(a).copy()
    coeffs[0] -= A * A
    s = _deflate(_deflate(coeffs, td.alpha), td.beta)
    return -s  # (u - alpha)(u - beta) = -(u - alpha)(beta - u)


# ---------------------------------------------------------------------------
# Period and rotation per period


def period_T(a: CoeffVector, A):
    """Oscillation period T = int_alpha^beta du / sqrt(Q(u) - A^2)."""
    td = turning_points(a, A)
    s = _smooth_factor(a, A, td)

    def f(u):
        return 1.0 / np.sqrt(np.polynomial.polynomial.polyval(u, s))

    return endpoint_sqrt_quadrature(f, td.alpha, td.beta)


def _rotation_integrand(a: CoeffVector, s):
    def f(u):
        total = np.zeros_like(np.asarray(u, dtype=float))
        for aj in a.a:
            total = total + aj * aj / (aj * u + 1.0)
        return total / np.sqrt(np.polynomial.polynomial.polyval(u, s))

    return f


def rotation_Psi(a: CoeffVector, A):
    """Per-period drop of psi.

    Psi = int_alpha^beta [sum_j a_j^2/(a_j v + 1)] / sqrt(A^{-2} Q(v) - 1) dv,
    evaluated as A * int f(v)/sqrt((v-alpha)(beta-v)) dv after splitting off
    the simple roots of Q - A^2 at the turning points.
    """
    A = float(A)
    if not 0.0 < A < 1.0:
        raise ValueError(f"need 0 < A < 1, got A={A}")
    td = turning_points(a, A)
    s = _smooth_factor(a, A, td)
    return A * endpoint_sqrt_quadrature(_rotation_integrand(a, s), td.alpha, td.beta)


def psi_limits(a: CoeffVector):
    """Limits of Psi: pi(a_m - a_1) as A -> 0 and pi sqrt(2 sum a_j^2) as A -> 1.

    The first never exceeds the second; they agree exactly for the pattern
    (-1, 0, ..., 0, 1), where Psi is constant 2*pi.
    """
    low = np.pi * (a.a[-1] - a.a[0])
    high = np.pi * np.sqrt(2.0 * np.sum(a.a ** 2))
    return float(low), float(high)


def angles_of_u(a: CoeffVector, A, u, u0, psi0):
    """(theta, psi) as functions of u on an increasing-u leg.

    theta(u) = arcsin(A Q(u)^{-1/2}) on the cos(theta) > 0 branch, and
    psi(u) = psi0 - (A/2) int_{u0}^{u} [sum_j a_j^2/(a_j v+1)] / sqrt(Q - A^2) dv.
    Both u0 and u must lie strictly between the turning points.  At A = 0
    the angles freeze: theta = 0 and psi = psi0.
    """
    if abs(A) < 1e-14:
        for uu in (u, u0):
            if np.any(a.a * uu + 1.0 <= 0.0):
                raise ValueError(f"u = {uu} outside the admissible interval")
        return 0.0, float(psi0)
    td = turning_points(a, A)
    if not (td.alpha < u < td.beta and td.alpha < u0 < td.beta):
        raise ValueError("u and u0 must lie strictly inside (alpha, beta)")
    q, _ = q_eval(a, u)
    theta = float(np.arcsin(A / np.sqrt(q)))
    s = _smooth_factor(a, A, td)
    f = _rotation_integrand(a, s)
    lo, hi = min(u0, u), max(u0, u)
    integral = sqrt_weight_integral(f, td.alpha, td.beta, lo=lo, hi=hi)
    if u < u0:
        integral = -integral
    return theta, float(psi0 - 0.5 * A * integral)


# ---------------------------------------------------------------------------
# Reduced flow


@dataclass
class ReducedTrajectory:
    a: CoeffVector
    A: float
    raw: Trajectory

    @property
    def times(self):
        return self.raw.times

    @property
    def step_stats(self):
        return {"accepted": self.raw.accepted, "rejected": self.raw.rejected, "nfev": self.raw.nfev}

    def state(self, t):
        u, theta, psi = self.raw(t)
        return float(u), float(theta), float(psi)

    def states(self, t=None):
        ys = self.raw.states if t is None else np.atleast_2d(self.raw(t))
        return ys[:, 0], ys[:, 1], ys[:, 2]


def integrate_reduced(a: CoeffVector, state0, t_span, tol=1e-10, t_eval=None):
    """Integrate (u, theta, psi) from state0 = (u0, theta0, psi0)."""
    u0, theta0, psi0 = (float(x) for x in state0)
    A = compute_A(a, u0, theta0)

    def fun(t, y):
        u, theta, _ = y
        q, _dq = q_eval(a, u)
        root = np.sqrt(max(q, 0.0))
        s1 = np.sum(a.a / (a.a * u + 1.0))
        s2 = np.sum(a.a ** 2 / (a.a * u + 1.0))
        st = np.sin(theta)
        return np.array([2.0 * root * np.cos(theta), -root * st * s1, -root * st * s2])

    raw = integrate_ode(fun, t_span, np.array([u0, theta0, psi0]), rtol=tol, atol=tol, t_eval=t_eval)
    traj = ReducedTrajectory(a, A, raw)
    us, thetas, _ = traj.states()
    qs, _ = q_eval(a, us)
    drift = np.max(np.abs(np.sqrt(np.maximum(qs, 0.0)) * np.sin(thetas) - A))
    if drift > 1e3 * max(tol, 1e-14):
        raise RuntimeError(f"A-drift {drift:.3e} exceeds 1e3*tol")
    return traj


# ---------------------------------------------------------------------------
# Closure search


@dataclass(frozen=True)
class TorusSolution:
    """A closing orbit family: Psi(A) = 2 pi q with q rational.

    The orbit data return to themselves after b_mult = denominator(q)
    periods, so the associated cone is a closed torus cone.  degenerate
    marks the pattern (-1,0,...,0,1) where Psi is constant and every A
    works.
    """

    A: float
    T: float
    Psi: float
    q: Fraction
    b_mult: int
    degenerate: bool = False


def recognize_rational(x, max_den=64, tol=1e-9):
    """Nearest fraction with denominator <= max_den, or None beyond tol."""
    frac = Fraction(x).limit_denominator(max_den)
    return frac if abs(float(frac) - x) < tol else None


def find_rational_A(a: CoeffVector, q, bracket_hint=None, grid=256, a_lo=1e-3, a_hi=None, tol=1e-10):
    """All A in (0, 1) with Psi(A) = 2*pi*q, by scan + bracket refinement.

    Psi need not be monotone, so a grid scan locates every sign change of
    Psi - 2*pi*q and each bracket is refined to |Psi - 2*pi*q| < tol.
    bracket_hint = (A_lo, A_hi) restricts the scan.  Raises NoBracketError
    when the target is never crossed.
    """
    q = Fraction(q)
    target = 2.0 * np.pi * float(q)
    if a.is_degenerate_pattern():
        if q == 1:
            return [TorusSolution(A=0.5, T=period_T(a, 0.5), Psi=2.0 * np.pi, q=q,
                                  b_mult=1, degenerate=True)]
        raise NoBracketError("rotation is constant 2*pi for this pattern; only q = 1 closes")
    if bracket_hint is not None:
        a_lo, a_hi = bracket_hint
    if a_hi is None:
        a_hi = 1.0 - 1e-3
    grid_A = np.linspace(a_lo, a_hi, grid)
    vals = np.array([rotation_Psi(a, A) - target for A in grid_A])
    solutions = []
    for i in np.flatnonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0):
        A_star = brentq(lambda A: rotation_Psi(a, A) - target, grid_A[i], grid_A[i + 1],
                        xtol=1e-14, rtol=8.9e-16)
        psi_val = rotation_Psi(a, A_star)
        if abs(psi_val - target) > tol:
            raise RuntimeError(f"refinement stalled: |Psi - 2 pi q| = {abs(psi_val - target):.3e}")
        solutions.append(
            TorusSolution(A=float(A_star), T=period_T(a, A_star), Psi=psi_val, q=q,
                          b_mult=q.denominator)
        )
    for i in np.flatnonzero(vals == 0.0):
        A_star = float(grid_A[i])
        solutions.append(
            TorusSolution(A=A_star, T=period_T(a, A_star), Psi=target, q=q, b_mult=q.denominator)
        )
    if not solutions:
        raise NoBracketError(
            f"no bracket: 2 pi q = {target:.6f} not crossed by Psi on [{a_lo}, {a_hi}]"
        )
    return solutions


def psi_table(a: CoeffVector, grid=256, a_lo=1e-3, a_hi=None, threads=None):
    """Rows (A, Psi, T, alpha, beta) over a grid in A, optionally threaded."""
    if a_hi is None:
        a_hi = 1.0 - 1e-3
    grid_A = np.linspace(a_lo, a_hi, grid)

    def row(A):
        td = turning_points(a, A)
        return [float(A), rotation_Psi(a, A), period_T(a, A), td.alpha, td.beta]

    if threads and threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(row, grid_A))
    else:
        rows = [row(A) for A in grid_A]
    return rows


# ---------------------------------------------------------------------------
# m = 3: change of coordinates and Jacobi closed forms


def b_to_a(b1, b2, b3):
    """Weights from the symmetric parameters: a_j = (b_{j+1} - b_{j+2})/sqrt(3).

    Index correspondence is preserved (no sorting), so the inverse relation
    b_1 = (a_2 - a_3)/sqrt(3) holds componentwise; sort the result to build
    a CoeffVector.  The b_j are distinct exactly when the weights avoid the
    constant-rotation pattern.
    """
    b = np.array([b1, b2, b3], dtype=float)
    if np.all(b == 0):
        raise ValueError("b must not be identically zero")
    if abs(b.sum()) > 1e-12 * max(1.0, np.max(np.abs(b))):
        raise ValueError("b must sum to zero")
    return np.array([b[2] - b[1], b[0] - b[2], b[1] - b[0]]) / np.sqrt(3.0)


def a_to_b(a):
    """Inverse of b_to_a with index correspondence: b_j = (a_{j+1} - a_{j+2})/sqrt(3)."""
    a = np.asarray(a, dtype=float)
    return np.array([a[1] - a[2], a[2] - a[0], a[0] - a[1]]) / np.sqrt(3.0)


@dataclass(frozen=True)
class ClosedFormParams:
    """Data of u(t) = u_turn + span * sn^2(a_ell t + c, b_ell) for m = 3.

    u_turn is the turning point reached when the sn argument vanishes; for
    prod(a) > 0 that is the minimum alpha, for prod(a) < 0 the maximum beta
    (the solution formula is derived for two negative weights and carries
    to one negative weight by the sign flip u -> -u, a -> -a).  gamma are
    the roots of Q - A^2 in descending order; span = u_other - u_turn.
    """

    gamma: np.ndarray
    a_ell: float
    b_ell: float
    u_turn: float
    span: float
    flipped: bool


def closed_form_params_m3(a: CoeffVector, A) -> ClosedFormParams:
    if a.m != 3:
        raise ValueError("closed form is specific to m = 3")
    A = float(A)
    if not 0.0 < A < 1.0:
        raise ValueError("need 0 < A < 1")
    td = turning_points(a, A)
    K = float(np.prod(a.a))
    if abs(K) < 1e-14:
        # middle weight zero: Q is quadratic and the oscillation is harmonic
        return ClosedFormParams(
            gamma=td.gamma, a_ell=float(a.a[-1]), b_ell=0.0,
            u_turn=td.alpha, span=td.beta - td.alpha, flipped=False,
        )
    if K > 0:
        g1, g2, g3 = td.gamma  # g3 = alpha, g2 = beta, g1 outside to the right
        a_ell = np.sqrt(K * (g1 - g3))
        b_ell = np.sqrt((g2 - g3) / (g1 - g3))
        return ClosedFormParams(td.gamma, float(a_ell), float(b_ell), float(g3),
                                float(g2 - g3), flipped=False)
    # one negative weight: flip u -> -u, which swaps the roles of the ends
    g1, g2, g3 = td.gamma  # g1 = beta, g2 = alpha, g3 outside to the left
    a_ell = np.sqrt(-K * (g1 - g3))
    b_ell = np.sqrt((g1 - g2) / (g1 - g3))
    return ClosedFormParams(td.gamma, float(a_ell), float(b_ell), float(g1),
                            float(g2 - g1), flipped=True)


def closed_form_u_m3(a: CoeffVector, A, c_shift, t):
    """u(t) in closed form for m = 3: a quadratic in sn of modulus b_ell.

    Satisfies (du/dt)^2 = 4 (Q(u) - A^2); at a_ell*t + c_shift = 0 the value
    is the turning point u_turn of closed_form_params_m3 and a quarter
    period later it is the opposite turning point.
    """
    p = closed_form_params_m3(a, A)
    arg = p.a_ell * np.asarray(t, dtype=float) + c_shift
    sn = jacobi(arg, p.b_ell)[0] if np.ndim(t) else jacobi(float(arg), p.b_ell).sn
    return p.u_turn + p.span * np.asarray(sn) ** 2 if np.ndim(t) else p.u_turn + p.span * sn ** 2


def explicit_A0_m3(b, t):
    """The A = 0 solution in C^3: (w_1, w_2, w_3) = (c_1 dn, c_2 cn, c_3 sn)(a_ell t).

    b = (b_1, b_2, b_3) must be integers with b_2 > b_3 > 0 > b_1 summing to
    zero.  Returns the real coordinate functions at t (scalar or array)
    together with (a_ell, b_ell); the moduli satisfy both level constraints
    sum |w_j|^2 = 3 and sum b_j |w_j|^2 = 0 identically.
    """
    b1, b2, b3 = b
    vals = np.array([b1, b2, b3], dtype=float)
    if np.any(np.abs(vals - np.round(vals)) > 1e-12):
        raise ValueError("b_j must be integers")
    if not (b2 > b3 > 0 > b1):
        raise ValueError("need b_2 > b_3 > 0 > b_1")
    if b1 + b2 + b3 != 0:
        raise ValueError("b must sum to zero")
    a1, a2, a3 = b_to_a(b1, b2, b3)
    a_ell = np.sqrt(a2 * (a1 - a3))
    b_ell = np.sqrt(a1 * (a2 - a3) / (a2 * (a1 - a3)))
    c1 = np.sqrt((a3 - a1) / a3)
    c2 = np.sqrt((a3 - a2) / a3)
    c3 = np.sqrt((a2 - a3) / a2)
    arg = a_ell * np.asarray(t, dtype=float)
    if np.ndim(t) == 0:
        tri = jacobi(float(arg), b_ell)
        sn, cn, dn = tri.sn, tri.cn, tri.dn
    else:
        sn, cn, dn = jacobi(arg, b_ell)
    return (c1 * dn, c2 * cn, c3 * sn), (float(a_ell), float(b_ell))
