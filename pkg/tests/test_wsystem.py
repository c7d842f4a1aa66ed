import numpy as np
import pytest

from slgeo.reduced import period_T
from slgeo.wsystem import (
    CoeffVector,
    WState,
    integrate_w,
    invariants_w,
    lift,
    poisson_bracket,
    poisson_check,
    project,
    rhs_w,
    trajectory_csv_rows,
)


def test_coeff_vector_validation():
    a = CoeffVector.make([2, -3, 1])
    assert np.allclose(a.a, [-3, 1, 2])
    assert a.integral and a.m == 3
    with pytest.raises(ValueError):
        CoeffVector(np.array([1.0, -1.0, 0.0]))  # not sorted
    with pytest.raises(ValueError):
        CoeffVector.make([-1, 0, 2])  # nonzero sum
    with pytest.raises(ValueError):
        CoeffVector.make([0, 0, 0])
    with pytest.raises(ValueError):
        CoeffVector.make([-2, 0, 2])  # common factor 2
    with pytest.raises(ValueError):
        CoeffVector.make([-1, 1])  # m < 3
    real = CoeffVector.make([-1.5, 0.5, 1.0])
    assert not real.integral


def test_degenerate_pattern_detection():
    assert CoeffVector.make([-1, 0, 1]).is_degenerate_pattern()
    assert CoeffVector.make([-1, 0, 0, 0, 1]).is_degenerate_pattern()
    assert not CoeffVector.make([-3, 1, 2]).is_degenerate_pattern()


def test_rhs_all_ones():
    a = CoeffVector.make([-1, 0, 1])
    assert np.allclose(rhs_w(a, np.ones(3, dtype=complex)), [-1, 0, 1])


def test_rhs_two_zeros():
    a = CoeffVector.make([-3, 1, 2])
    w = np.array([0.0, 0.0, 1.7 + 0.3j])
    dw = rhs_w(a, w)
    # every product of two coordinates vanishes except w_3 alone paired slots
    assert dw[2] == 0.0
    assert np.allclose(dw[:2], [-3 * np.conj(w[1] * w[2]), np.conj(w[0] * w[2])])
    assert np.allclose(dw[:2], 0.0)


def test_rhs_hand_expansion():
    a = CoeffVector.make([-2, 1, 1])
    w = np.array([1j, 1.0, 1.0 + 1j])
    expected = np.array(
        [
            -2 * np.conj(w[1] * w[2]),
            np.conj(w[0] * w[2]),
            np.conj(w[0] * w[1]),
        ]
    )
    assert np.allclose(rhs_w(a, w), expected, atol=1e-15)
    assert np.allclose(expected, [-2 + 2j, -1 - 1j, -1j])


def test_lift_examples_and_round_trip():
    a = CoeffVector.make([-3, 1, 2])
    st = lift(a, 0.0, np.zeros(3))
    assert np.allclose(st.w, 1.0)
    st = lift(a, 0.0, np.full(3, np.pi / 2))
    assert np.allclose(st.w, 1j)
    u, th = 0.11, np.array([0.3, -0.8, 2.9])
    st = lift(a, u, th)
    u2, th2 = project(a, st.w)
    assert u2 == pytest.approx(u, abs=1e-12)
    assert np.max(np.abs(np.mod(th2 - th + np.pi, 2 * np.pi) - np.pi)) < 1e-12
    w3 = lift(a, u2, th2).w
    assert np.max(np.abs(w3 - st.w)) < 1e-12


def test_lift_radicand_guard():
    a = CoeffVector.make([-3, 1, 2])
    with pytest.raises(ValueError):
        lift(a, 0.9, np.zeros(3))  # a_1 u + 1 < 0


def test_project_rejects_bad_states():
    a = CoeffVector.make([-3, 1, 2])
    with pytest.raises(ValueError):
        project(a, np.array([0.0, 1.0, 1.0]))
    with pytest.raises(ValueError):
        project(a, np.array([2.0, 1.0, 1.0]))  # inconsistent moduli


def test_integrate_matches_constant_rotation_closed_form():
    # for weights (-1, 0, 1) the flow is solvable: w_1 = B e^{it} + C e^{-it},
    # w_m = i conj(B) e^{-it} - i conj(C) e^{it}, middle coordinates frozen
    a = CoeffVector.make([-1, 0, 1])
    st = lift(a, 0.0, np.zeros(3))
    B = 0.5 * (st.w[0] + 1j * np.conj(st.w[2]))
    C = 0.5 * (st.w[0] - 1j * np.conj(st.w[2]))
    traj = integrate_w(a, st.w, (0.0, 1.0), tol=1e-11)
    ts = np.linspace(0.0, 1.0, 40)
    ws, us = traj.states(ts)
    w1 = B * np.exp(1j * ts) + C * np.exp(-1j * ts)
    wm = 1j * np.conj(B) * np.exp(-1j * ts) - 1j * np.conj(C) * np.exp(1j * ts)
    assert np.max(np.abs(ws[:, 0] - w1)) < 1e-8
    assert np.max(np.abs(ws[:, 2] - wm)) < 1e-8
    assert np.max(np.abs(ws[:, 1] - st.w[1])) == 0.0  # frozen exactly


def test_stationary_phase_start_pins_u():
    a = CoeffVector.make([-2, 1, 1])
    thetas = np.array([np.pi / 2, 0.0, 0.0])  # total phase pi/2
    st = lift(a, 0.0, thetas)
    traj = integrate_w(a, st.w, (0.0, 4.0), tol=1e-11)
    _, us = traj.states(np.linspace(0, 4, 60))
    assert np.max(np.abs(us)) < 1e-10


def test_invariants_drift_and_product_identity():
    a = CoeffVector.make([-3, 1, 2])
    st = lift(a, 0.02, np.array([0.5, 0.1, -0.3]))
    A = np.prod(st.w).imag
    T = 5.0  # a generic long window, dozens of oscillations
    traj = integrate_w(a, st.w, (0.0, 10 * T), tol=1e-11)
    ws, us = traj.states(np.linspace(0, 10 * T, 300))
    rep0 = invariants_w(a, WState(ws[0], us[0]))
    worst_pj = 0.0
    for w, u in zip(ws, us):
        rep = invariants_w(a, WState(w, u), ref_A=A)
        worst_pj = max(worst_pj, np.max(np.abs(rep.conserved.pj - rep0.conserved.pj)))
        assert rep.max_constraint_residual < 1e-8
        assert rep.A_residual < 1e-8
        assert rep.conserved.H == 2.0 * rep.conserved.pm
    assert worst_pj < 1e-8
    # Re(prod w) = u'/2 along the flow; u' by differencing the dense output
    h = 1e-5
    for t in (0.37 * T, 1.9 * T, 5.3 * T):
        w_t, _ = traj.states(np.array([t]))
        _, u_pair = traj.states(np.array([t - h, t + h]))
        du = (u_pair[1] - u_pair[0]) / (2 * h)
        assert np.prod(w_t[0]).real == pytest.approx(du / 2, abs=1e-6)


def test_pm_equals_weighted_sine():
    a = CoeffVector.make([-2, 1, 1])
    u, th = 0.1, np.array([0.4, 0.2, -0.1])
    st = lift(a, u, th)
    q = np.prod(a.a * u + 1.0)
    rep = invariants_w(a, st)
    assert rep.conserved.pm == pytest.approx(np.sqrt(q) * np.sin(th.sum()), abs=1e-12)
    st0 = lift(a, u, np.zeros(3))
    assert invariants_w(a, st0).conserved.pm == pytest.approx(0.0, abs=1e-12)


def test_time_reversal():
    a = CoeffVector.make([-3, 1, 2])
    st = lift(a, 0.0, np.array([0.7, -0.2, 0.4]))
    # the forward run must hand back a state inside the consistency gate
    fwd = integrate_w(a, st.w, (0.0, 3.0), tol=1e-12)
    end = fwd.state(3.0)
    back = integrate_w(a, end.w, (3.0, 0.0), tol=1e-10)
    ws, us = back.states(np.array([0.0]))
    assert np.max(np.abs(ws[0] - st.w)) < 1e-7
    assert abs(us[0] - st.u) < 1e-7


def test_inconsistent_start_rejected():
    a = CoeffVector.make([-3, 1, 2])
    with pytest.raises(ValueError):
        integrate_w(a, np.array([1.0, 1.0, 2.0 + 0j]), (0.0, 1.0))


def test_poisson_brackets_vanish():
    a = CoeffVector.make([-2, 1, 1])
    rng = np.random.default_rng(23)
    z = rng.normal(size=3) + 1j * rng.normal(size=3)
    mat = poisson_check(a, z, h=1e-5)
    assert np.max(np.abs(mat)) < 1e-6
    # antisymmetry is exact, including the diagonal
    assert np.all(mat == -mat.T)


def test_poisson_nonzero_for_noninvariant_function():
    a = CoeffVector.make([-2, 1, 1])
    rng = np.random.default_rng(29)
    z = rng.normal(size=3) + 1j * rng.normal(size=3)
    p1 = lambda w: a.a[-1] * abs(w[0]) ** 2 - a.a[0] * abs(w[-1]) ** 2
    val = poisson_bracket(a, p1, lambda w: w[0].real, z, h=1e-5)
    assert abs(val) > 1e-3


def test_poisson_frozen_coordinates():
    # zero-weight coordinates are excluded from the bracket
    a = CoeffVector.make([-1, 0, 1])
    z = np.array([1.0 + 0.2j, 0.7 - 0.1j, 0.9 + 0.4j])
    mat = poisson_check(a, z, h=1e-5)
    assert np.max(np.abs(mat)) < 1e-6


def test_csv_rows_shape():
    a = CoeffVector.make([-1, 0, 1])
    st = lift(a, 0.0, np.zeros(3))
    traj = integrate_w(a, st.w, (0.0, 1.0), tol=1e-10)
    rows = trajectory_csv_rows(traj, np.linspace(0, 1, 5))
    assert len(rows) == 5
    # t + 2m + u + (m-1) + pm + H + residual
    assert len(rows[0]) == 1 + 6 + 1 + 2 + 1 + 1 + 1
