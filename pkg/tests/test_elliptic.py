import numpy as np
import pytest
from scipy.integrate import quad, solve_ivp

from slgeo.elliptic import (
    QuadratureError,
    complete_K,
    endpoint_sqrt_quadrature,
    jacobi,
    sqrt_weight_integral,
)


def test_complete_K_at_zero():
    assert complete_K(0.0) == pytest.approx(np.pi / 2, abs=1e-14)


def test_complete_K_against_direct_quadrature():
    k = 0.5
    oracle, _ = quad(lambda x: 1.0 / np.sqrt(1 - k * k * np.sin(x) ** 2), 0.0, np.pi / 2,
                     epsabs=1e-13, epsrel=1e-13)
    assert complete_K(k) == pytest.approx(oracle, abs=1e-10)
    assert complete_K(0.5) == pytest.approx(1.685750354812596, abs=1e-12)


def test_complete_K_monotone_and_bounded_below():
    ks = np.linspace(0.0, 0.99, 34)
    vals = [complete_K(k) for k in ks]
    assert all(v >= np.pi / 2 for v in vals)
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_complete_K_near_one():
    val = complete_K(1 - 1e-12)
    assert np.isfinite(val) and val > 10.0
    mp = pytest.importorskip("mpmath")
    mp.mp.dps = 40
    k = mp.mpf(1 - 1e-12)  # the same binary double the implementation sees
    oracle = mp.quad(lambda x: 1 / mp.sqrt(1 - k ** 2 * mp.sin(x) ** 2), [0, mp.pi / 2])
    assert val == pytest.approx(float(oracle), rel=1e-12)


def test_complete_K_domain():
    for bad in (1.0, -0.1, 1.5):
        with pytest.raises(ValueError):
            complete_K(bad)


def test_jacobi_degenerate_forms():
    ts = np.linspace(-3.0, 3.0, 11)
    sn, cn, dn = jacobi(ts, 0.0)
    assert np.max(np.abs(sn - np.sin(ts))) < 1e-12
    assert np.max(np.abs(cn - np.cos(ts))) < 1e-12
    assert np.max(np.abs(dn - 1.0)) < 1e-12
    sn, cn, dn = jacobi(ts, 1.0)
    assert np.max(np.abs(sn - np.tanh(ts))) < 1e-12
    assert np.max(np.abs(cn - 1.0 / np.cosh(ts))) < 1e-12
    assert np.max(np.abs(dn - 1.0 / np.cosh(ts))) < 1e-12


def test_jacobi_initial_conditions():
    for k in (0.0, 0.3, 0.7, 0.99, 1.0):
        tri = jacobi(0.0, k)
        assert (tri.sn, tri.cn, tri.dn) == (0.0, 1.0, 1.0)


def test_jacobi_identities_on_grid():
    ts = np.linspace(-10.0, 10.0, 81)
    for k in np.arange(0.0, 1.0, 0.1).tolist() + [0.99]:
        sn, cn, dn = jacobi(ts, k)
        assert np.max(np.abs(sn ** 2 + cn ** 2 - 1.0)) < 1e-12
        assert np.max(np.abs(k * k * sn ** 2 + dn ** 2 - 1.0)) < 1e-12


def test_jacobi_first_order_system_oracle():
    # independent oracle: integrate sn' = cn dn, cn' = -sn dn, dn' = -k^2 sn cn
    k = 0.7

    def rhs(t, y):
        sn, cn, dn = y
        return [cn * dn, -sn * dn, -k * k * sn * cn]

    sol = solve_ivp(rhs, (0.0, 1.3), [0.0, 1.0, 1.0], rtol=1e-12, atol=1e-14,
                    dense_output=True)
    tri = jacobi(1.3, k)
    assert np.max(np.abs(np.array([tri.sn, tri.cn, tri.dn]) - sol.y[:, -1])) < 1e-9
    # frozen values from the same oracle
    assert tri.sn == pytest.approx(0.9214672225114198, abs=1e-11)
    assert tri.cn == pytest.approx(0.3884561208644931, abs=1e-11)
    assert tri.dn == pytest.approx(0.7641597328701467, abs=1e-11)


def test_jacobi_squared_derivative_relations_by_differencing():
    # the defining first-order equations, with d/dt replaced by central
    # differences of the computed values
    h = 1e-5
    ts = np.linspace(-10.0, 10.0, 41)
    for k in (0.0, 0.2, 0.5, 0.8, 0.99):
        sn, cn, dn = jacobi(ts, k)
        dsn = (jacobi(ts + h, k)[0] - jacobi(ts - h, k)[0]) / (2 * h)
        dcn = (jacobi(ts + h, k)[1] - jacobi(ts - h, k)[1]) / (2 * h)
        ddn = (jacobi(ts + h, k)[2] - jacobi(ts - h, k)[2]) / (2 * h)
        assert np.max(np.abs(dsn ** 2 - (1 - sn ** 2) * (1 - k * k * sn ** 2))) < 1e-9
        assert np.max(np.abs(dcn ** 2 - (1 - cn ** 2) * (1 - k * k + k * k * cn ** 2))) < 1e-9
        assert np.max(np.abs(ddn ** 2 - -(1 - dn ** 2) * (1 - k * k - dn ** 2))) < 1e-9


def test_jacobi_periodicity():
    ts = np.linspace(-5.0, 5.0, 23)
    for k in (0.1, 0.5, 0.9, 0.99):
        K = complete_K(k)
        sn0, cn0, dn0 = jacobi(ts, k)
        sn1, cn1, _ = jacobi(ts + 4 * K, k)
        _, _, dn2 = jacobi(ts + 2 * K, k)
        assert np.max(np.abs(sn1 - sn0)) < 1e-9
        assert np.max(np.abs(cn1 - cn0)) < 1e-9
        assert np.max(np.abs(dn2 - dn0)) < 1e-9


def test_jacobi_domain():
    with pytest.raises(ValueError):
        jacobi(1.0, 1.5)


def test_endpoint_quadrature_arcsine():
    val = endpoint_sqrt_quadrature(lambda u: np.ones_like(u), -1.0, 1.0)
    assert val == pytest.approx(np.pi, abs=1e-12)


def test_endpoint_quadrature_linear_weight():
    # f(u) = u on [0, 2]: the weight is symmetric about the midpoint
    val = endpoint_sqrt_quadrature(lambda u: u, 0.0, 2.0)
    assert val == pytest.approx(np.pi, abs=1e-11)


def test_endpoint_quadrature_against_tanh_sinh_oracle():
    mp = pytest.importorskip("mpmath")
    alpha, beta = -1.0, 2.0

    def f(u):
        return 1.0 / np.sqrt(u ** 4 + u ** 2 + 2.0)

    val = endpoint_sqrt_quadrature(f, alpha, beta)
    mp.mp.dps = 30
    oracle = mp.quad(
        lambda u: 1 / (mp.sqrt(u ** 4 + u ** 2 + 2) * mp.sqrt((u - alpha) * (beta - u))),
        [alpha, beta],
    )
    assert val == pytest.approx(float(oracle), abs=1e-9)


def test_endpoint_quadrature_linearity_and_reflection():
    alpha, beta = 0.3, 1.9
    f = lambda u: np.cos(u)
    g = lambda u: u * u
    lhs = endpoint_sqrt_quadrature(lambda u: 2.0 * f(u) + 3.0 * g(u), alpha, beta)
    rhs = 2.0 * endpoint_sqrt_quadrature(f, alpha, beta) + 3.0 * endpoint_sqrt_quadrature(g, alpha, beta)
    assert lhs == pytest.approx(rhs, rel=1e-12)
    # reflection u -> alpha + beta - u leaves the integral of a symmetric f alone
    sym = lambda u: np.cos(u - 0.5 * (alpha + beta)) ** 2
    refl = lambda u: sym(alpha + beta - u)
    assert endpoint_sqrt_quadrature(sym, alpha, beta) == pytest.approx(
        endpoint_sqrt_quadrature(refl, alpha, beta), rel=1e-12
    )


def test_endpoint_quadrature_validation():
    with pytest.raises(ValueError):
        endpoint_sqrt_quadrature(lambda u: u, 1.0, 1.0)
    with pytest.raises(QuadratureError):
        endpoint_sqrt_quadrature(lambda u: np.full_like(u, np.nan), 0.0, 1.0)


def test_partial_range_weight_integral():
    # smooth partial-range integral against scipy quad on the raw integrand
    alpha, beta = -1.0, 1.0
    lo, hi = -0.4, 0.7
    f = lambda u: np.exp(u)
    val = sqrt_weight_integral(f, alpha, beta, lo=lo, hi=hi)
    oracle, _ = quad(lambda u: np.exp(u) / np.sqrt((u - alpha) * (beta - u)), lo, hi,
                     epsabs=1e-13, epsrel=1e-13)
    assert val == pytest.approx(oracle, abs=1e-10)
