"""Adaptive Dormand-Prince 5(4) integrator with dense output.

Small explicit embedded pair with PI step-size control, enough for the
low-dimensional smooth systems in this package.  The 5th-order solution is
propagated; the embedded 4th-order solution drives the error estimate, and
accepted steps carry a quartic interpolant for dense evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["StepSizeUnderflow", "Trajectory", "integrate_ode"]

# Dormand-Prince coefficients (c, A, b of the 5th-order solution, and the
# difference d = b5 - b4 used for the error estimate; the last stage is FSAL).
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_E = np.array(
    [71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40]
)
# Interpolation matrix for the quartic dense output (Shampine).
_P = np.array(
    [
        [1, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
        [0, 0, 0, 0],
        [0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
        [0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
        [0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
        [0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
        [0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
    ]
)

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0
# PI controller exponents for a 4th-order error estimate.
_ALPHA = 0.7 / 5.0
_BETA = 0.4 / 5.0


class StepSizeUnderflow(RuntimeError):
    pass


@dataclass
class Trajectory:
    """Accepted integration nodes plus a dense interpolant between them.

    times is strictly monotone in the direction of integration; states has
    one row per node.  accepted/rejected count trial steps.
    """

    times: np.ndarray
    states: np.ndarray
    accepted: int
    rejected: int
    nfev: int
    _interp: list = field(repr=False, default_factory=list)

    def __call__(self, t):
        """Evaluate the dense output at scalar or array t inside the span."""
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        direction = 1.0 if self.times[-1] >= self.times[0] else -1.0
        s = direction * self.times
        lo, hi = s[0], s[-1]
        if np.any(direction * t_arr < lo - 1e-12 * max(1, abs(lo))) or np.any(
            direction * t_arr > hi + 1e-12 * max(1, abs(hi))
        ):
            raise ValueError("dense evaluation outside the integrated span")
        idx = np.clip(np.searchsorted(s, direction * t_arr, side="right") - 1, 0, len(self._interp) - 1)
        out = np.empty((t_arr.size, self.states.shape[1]))
        for row, (ti, i) in enumerate(zip(t_arr, idx)):
            t0, h, y0, q = self._interp[i]
            x = (ti - t0) / h
            p = np.array([x, x * x, x ** 3, x ** 4])
            out[row] = y0 + h * (q @ p)
        return out[0] if np.ndim(t) == 0 else out


def _error_norm(err, y0, y1, rtol, atol):
    scale = atol + rtol * np.maximum(np.abs(y0), np.abs(y1))
    return float(np.sqrt(np.mean((err / scale) ** 2)))


def _initial_step(fun, t0, y0, f0, direction, rtol, atol, order=5):
    scale = atol + rtol * np.abs(y0)
    d0 = np.sqrt(np.mean((y0 / scale) ** 2))
    d1 = np.sqrt(np.mean((f0 / scale) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    y1 = y0 + h0 * direction * f0
    f1 = fun(t0 + h0 * direction, y1)
    d2 = np.sqrt(np.mean(((f1 - f0) / scale) ** 2)) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1.0 / (order + 1))
    return min(100 * h0, h1)


def integrate_ode(fun, t_span, y0, rtol=1e-10, atol=1e-10, max_step=np.inf, t_eval=None):
    """Integrate dy/dt = fun(t, y) over t_span = (t0, t1), t1 < t0 allowed.

    Returns a Trajectory whose nodes are the accepted steps (or t_eval when
    given, via dense output).  Local error is kept below atol + rtol*|y|
    per step in an RMS sense.  Raises StepSizeUnderflow if the controller
    drives the step below machine resolution.
    """
    t0, t1 = float(t_span[0]), float(t_span[1])
    y = np.asarray(y0, dtype=float).copy()
    direction = 1.0 if t1 >= t0 else -1.0
    span = abs(t1 - t0)
    if span == 0.0:
        traj = Trajectory(np.array([t0]), y[None, :].copy(), 0, 0, 1, [])
        traj._interp = [(t0, 1.0, y.copy(), np.zeros((y.size, 4)))]
        return traj

    t = t0
    f = np.asarray(fun(t, y), dtype=float)
    nfev = 1
    h = min(_initial_step(fun, t, y, f, direction, rtol, atol), span, max_step)
    nfev += 1

    times = [t0]
    states = [y.copy()]
    interp = []
    accepted = rejected = 0
    err_prev = 1.0
    K = np.empty((7, y.size))

    while direction * (t1 - t) > 0:
        h = min(h, abs(t1 - t), max_step)
        if h < 16 * np.finfo(float).eps * max(abs(t), 1.0):
            raise StepSizeUnderflow(f"step size underflow at t={t}")
        hd = h * direction
        K[0] = f
        for i in range(1, 7):
            yi = y + hd * (K[:i].T @ _A[i])
            K[i] = fun(t + _C[i] * hd, yi)
        nfev += 6
        y_new = y + hd * (K.T @ _B)
        # FSAL: stage 7 was evaluated at (t+h, y_new)
        err = hd * (K.T @ _E)
        enorm = _error_norm(err, y, y_new, rtol, atol)
        if not np.isfinite(enorm):
            rejected += 1
            h *= _MIN_FACTOR
            continue
        if enorm <= 1.0 or h <= 16 * np.finfo(float).eps * max(abs(t), 1.0):
            accepted += 1
            q = K.T @ _P
            interp.append((t, hd, y.copy(), q))
            t = t + hd
            y = y_new
            f = K[6].copy()
            times.append(t)
            states.append(y.copy())
            factor = _SAFETY * (enorm + 1e-16) ** (-_ALPHA) * err_prev ** _BETA
            err_prev = enorm + 1e-16
            h *= min(_MAX_FACTOR, max(_MIN_FACTOR, factor))
        else:
            rejected += 1
            h *= max(_MIN_FACTOR, _SAFETY * enorm ** (-1.0 / 5.0))

    traj = Trajectory(np.array(times), np.stack(states), accepted, rejected, nfev, interp)
    if t_eval is not None:
        t_eval = np.asarray(t_eval, dtype=float)
        traj = Trajectory(t_eval.copy(), np.atleast_2d(traj(t_eval)), accepted, rejected, nfev, interp)
    return traj
