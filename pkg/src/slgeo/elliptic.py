"""Jacobi elliptic functions, the complete integral K(k), and a quadrature
rule for integrals with inverse-square-root endpoint singularities.

sn, cn, dn are evaluated by the descending Landen transformation driven by
an arithmetic-geometric mean scale, which is fast and uniformly accurate in
k; the defining first-order system is used as an independent oracle in the
test suite, not here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "JacobiTriple",
    "QuadratureError",
    "complete_K",
    "endpoint_sqrt_quadrature",
    "jacobi",
    "sqrt_weight_integral",
]

_DEGENERATE_EPS = 1e-15  # within this of k = 0 or 1, use the closed forms
_MAX_NODES = 2 ** 20


class QuadratureError(RuntimeError):
    pass


@dataclass(frozen=True)
class JacobiTriple:
    sn: float
    cn: float
    dn: float


def complete_K(k):
    """Complete elliptic integral K(k) = int_0^{pi/2} dx / sqrt(1 - k^2 sin^2 x).

    Computed as pi / (2 agm(1, k')) with k' = sqrt(1 - k^2); relative error
    is at machine level.  k must lie in [0, 1); the integral diverges at 1.
    """
    k = float(k)
    if not 0.0 <= k < 1.0:
        raise ValueError(f"modulus k={k} must lie in [0, 1)")
    a, b = 1.0, np.sqrt((1.0 - k) * (1.0 + k))
    for _ in range(40):
        if abs(a - b) <= np.finfo(float).eps * a:
            break
        a, b = 0.5 * (a + b), np.sqrt(a * b)
    return float(np.pi / (2.0 * a))


def _jacobi_arrays(t, k):
    """sn, cn, dn for array t and scalar k in (0, 1), by descending Landen."""
    a_list, c_list = [], []
    a, b, c = 1.0, np.sqrt((1.0 - k) * (1.0 + k)), k
    n = 0
    while abs(c) > 1e-17 * a and n < 40:
        a_list.append(a)
        c_list.append(c)
        a, b, c = 0.5 * (a + b), np.sqrt(a * b), 0.5 * (a - b)
        n += 1
    a_list.append(a)
    c_list.append(c)

    phi = (2.0 ** n) * a * t
    for i in range(n, 0, -1):
        s = np.clip(c_list[i] / a_list[i] * np.sin(phi), -1.0, 1.0)
        phi = 0.5 * (phi + np.arcsin(s))
    sn = np.sin(phi)
    cn = np.cos(phi)
    dn = np.sqrt(np.maximum(1.0 - (k * sn) ** 2, 0.0))
    return sn, cn, dn


def jacobi(t, k):
    """Jacobi elliptic functions sn, cn, dn of modulus k in [0, 1].

    Satisfies sn(0)=0, cn(0)=dn(0)=1, sn^2+cn^2 = 1, k^2 sn^2 + dn^2 = 1,
    and the derivative relations sn' = cn dn, cn' = -sn dn, dn' = -k^2 sn cn.
    At k=0 this is (sin, cos, 1) and at k=1 it is (tanh, sech, sech); inputs
    within 1e-15 of those endpoints are routed to the closed forms, since the
    Landen recursion stalls there.  t may be a scalar or an array; a scalar t
    yields a JacobiTriple, an array yields a tuple of arrays.
    """
    k = float(k)
    if not 0.0 <= k <= 1.0:
        raise ValueError(f"modulus k={k} must lie in [0, 1]")
    t_arr = np.asarray(t, dtype=float)
    if k <= _DEGENERATE_EPS:
        sn, cn, dn = np.sin(t_arr), np.cos(t_arr), np.ones_like(t_arr)
    elif k >= 1.0 - _DEGENERATE_EPS:
        sn, cn = np.tanh(t_arr), 1.0 / np.cosh(t_arr)
        dn = cn.copy() if isinstance(cn, np.ndarray) else cn
    else:
        sn, cn, dn = _jacobi_arrays(t_arr, k)
    if np.isscalar(t) or np.ndim(t) == 0:
        return JacobiTriple(float(sn), float(cn), float(dn))
    return sn, cn, dn


def _eval_vectorized(f, x):
    try:
        y = np.asarray(f(x), dtype=float)
        if y.shape != x.shape:
            raise ValueError
        return y
    except Exception:
        return np.array([float(f(xi)) for xi in x])


def sqrt_weight_integral(f, alpha, beta, lo=None, hi=None, rel_tol=1e-12, max_nodes=_MAX_NODES):
    """integral of f(u) / sqrt((u - alpha)(beta - u)) over [lo, hi] in [alpha, beta].

    The substitution u = alpha + (beta - alpha) sin^2(phi) absorbs the
    weight; the transformed integrand is smooth whenever f is, and the full
    interval [alpha, beta] maps to phi in [0, pi/2].  Node counts double
    until two consecutive refinements agree to rel_tol, capped at max_nodes.
    """
    alpha, beta = float(alpha), float(beta)
    if not alpha < beta:
        raise ValueError(f"need alpha < beta, got [{alpha}, {beta}]")
    lo = alpha if lo is None else float(lo)
    hi = beta if hi is None else float(hi)
    if not (alpha <= lo <= hi <= beta):
        raise ValueError("integration limits must lie inside [alpha, beta]")
    t0 = np.arcsin(np.sqrt(np.clip((lo - alpha) / (beta - alpha), 0.0, 1.0)))
    t1 = np.arcsin(np.sqrt(np.clip((hi - alpha) / (beta - alpha), 0.0, 1.0)))
    if t1 <= t0:
        return 0.0

    def g(phi):
        u = alpha + (beta - alpha) * np.sin(phi) ** 2
        vals = _eval_vectorized(f, u)
        if not np.all(np.isfinite(vals)):
            raise QuadratureError("non-finite integrand evaluation")
        return vals

    # Composite trapezoid with node doubling and reuse.  For the full
    # interval the transformed integrand extends to a smooth even periodic
    # function, so convergence under doubling is spectral; partial ranges
    # still converge cleanly because the integrand is smooth.
    n = 64
    ends = g(np.array([t0, t1]))
    interior = g(np.linspace(t0, t1, n + 1)[1:-1])
    h = (t1 - t0) / n
    est = h * (0.5 * ends[0] + interior.sum() + 0.5 * ends[1])
    agreements = 0
    last_diff = np.inf
    while n < max_nodes:
        mid_vals = g(t0 + (np.arange(n) + 0.5) * h)
        n *= 2
        h *= 0.5
        new_est = 0.5 * est + h * mid_vals.sum()
        last_diff = abs(new_est - est)
        agreements = agreements + 1 if last_diff < rel_tol * max(1.0, abs(new_est)) else 0
        est = new_est
        if agreements >= 2:
            return 2.0 * est
    if last_diff >= 1e-9 * max(1.0, abs(est)):
        raise QuadratureError(f"no convergence within {max_nodes} nodes")
    return 2.0 * est


def endpoint_sqrt_quadrature(f, alpha, beta, rel_tol=1e-12, max_nodes=_MAX_NODES):
    """int_alpha^beta f(u) / sqrt((u - alpha)(beta - u)) du for continuous f."""
    return sqrt_weight_integral(f, alpha, beta, rel_tol=rel_tol, max_nodes=max_nodes)
