"""Flat Kaehler structures on C^m and the special Lagrangian plane test.

C^m carries the Euclidean metric g, the standard symplectic form
omega = (i/2) sum_j dz_j ^ dzbar_j and the holomorphic volume form
Omega = dz_1 ^ ... ^ dz_m.  A real m-plane P is special Lagrangian of
phase e^{i*theta} exactly when omega vanishes on P and Omega evaluates
to +-e^{i*theta} on any g-orthonormal basis of P.  Everything here is a
pure function of complex coordinate vectors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "CalibrationReport",
    "TangentFrame",
    "finite_diff_frame",
    "holomorphic_volume",
    "kahler_form",
    "metric_inner",
    "orthonormalize",
    "real_coords",
    "sl_check",
]

# Residual tolerances used throughout: algebraic identities, frames built
# from analytic derivatives, frames built by central differences.
TOL_ALGEBRAIC = 1e-12
TOL_ANALYTIC_FRAME = 1e-8
TOL_FD_FRAME = 1e-6


class DegenerateFrameError(ValueError):
    """Frame vectors are linearly dependent over R (below tolerance)."""


def real_coords(v):
    """View a complex m-vector as the real 2m-vector (Re z_1..m, Im z_1..m)."""
    v = np.asarray(v, dtype=complex)
    return np.concatenate([v.real, v.imag])


@dataclass(frozen=True)
class TangentFrame:
    """k tangent vectors of C^m = R^2m, stored in complex coordinates.

    vectors has shape (k, m), one vector per row.  The rows must be
    linearly independent over the reals.
    """

    vectors: np.ndarray

    def __post_init__(self):
        vectors = np.atleast_2d(np.asarray(self.vectors, dtype=complex))
        object.__setattr__(self, "vectors", vectors)
        k, m = vectors.shape
        if not 1 <= k <= m:
            raise ValueError(f"frame size k={k} must satisfy 1 <= k <= m={m}")
        if not np.all(np.isfinite(vectors)):
            raise ValueError("frame contains non-finite entries")
        real_mat = np.stack([real_coords(v) for v in vectors])
        smin = np.linalg.svd(real_mat, compute_uv=False)[-1]
        if smin <= 0.0:
            raise DegenerateFrameError("frame vectors are linearly dependent over R")

    @property
    def k(self):
        return self.vectors.shape[0]

    @property
    def m(self):
        return self.vectors.shape[1]


@dataclass(frozen=True)
class CalibrationReport:
    """Worst-case residuals of the special Lagrangian conditions on frames.

    max_omega_residual : largest |omega(e_i, e_j)| over orthonormalized pairs
    max_imag_residual  : largest |Im(e^{-i theta} Omega)| on the frames
    calibration_defect : largest ||Omega| - 1| on the orthonormalized frames
    """

    max_omega_residual: float
    max_imag_residual: float
    calibration_defect: float
    sample_count: int = 1
    worst_sample_index: int = 0

    def __post_init__(self):
        for name in ("max_omega_residual", "max_imag_residual", "calibration_defect"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")

    def passes(self, tol):
        return (
            self.max_omega_residual < tol
            and self.max_imag_residual < tol
            and self.calibration_defect < tol
        )

    @staticmethod
    def merge(reports):
        """Combine per-sample reports, recording the worst sample index."""
        reports = list(reports)
        if not reports:
            raise ValueError("no reports to merge")
        worst = lambda r: max(r.max_omega_residual, r.max_imag_residual, r.calibration_defect)
        idx = int(np.argmax([worst(r) for r in reports]))
        return CalibrationReport(
            max_omega_residual=max(r.max_omega_residual for r in reports),
            max_imag_residual=max(r.max_imag_residual for r in reports),
            calibration_defect=max(r.calibration_defect for r in reports),
            sample_count=len(reports),
            worst_sample_index=idx,
        )


def _pair(v, w):
    v = np.asarray(v, dtype=complex)
    w = np.asarray(w, dtype=complex)
    if v.shape != w.shape:
        raise ValueError(f"dimension mismatch: {v.shape} vs {w.shape}")
    return v, w


def kahler_form(v, w):
    """omega(v, w) = sum_j Im(conj(v_j) w_j)."""
    v, w = _pair(v, w)
    return float(np.sum((np.conj(v) * w).imag))


def metric_inner(v, w):
    """Euclidean inner product g(v, w) = Re sum_j conj(v_j) w_j."""
    v, w = _pair(v, w)
    return float(np.sum((np.conj(v) * w).real))


def holomorphic_volume(frame):
    """Omega evaluated on a full frame: det of the m x m matrix of columns."""
    vectors = frame.vectors if isinstance(frame, TangentFrame) else np.atleast_2d(np.asarray(frame, dtype=complex))
    k, m = vectors.shape
    if k != m:
        raise ValueError(f"holomorphic volume needs k = m, got k={k}, m={m}")
    return complex(np.linalg.det(vectors.T))


def orthonormalize(frame, tol=1e-13):
    """Gram-Schmidt with respect to the real metric, span preserved.

    Two modified Gram-Schmidt passes keep the Gram matrix within ~1e-14
    of the identity.  Raises DegenerateFrameError on rank deficiency.
    """
    vectors = np.array(frame.vectors if isinstance(frame, TangentFrame) else frame, dtype=complex)
    vectors = np.atleast_2d(vectors)
    scale = max(np.linalg.norm(real_coords(v)) for v in vectors)
    out = []
    for v in vectors:
        for _ in range(2):
            for e in out:
                v = v - metric_inner(e, v) * e
        norm = np.sqrt(metric_inner(v, v))
        if norm <= tol * scale:
            raise DegenerateFrameError("rank deficiency during orthonormalization")
        out.append(v / norm)
    return TangentFrame(np.stack(out))


def sl_check(frame, phase, tol=TOL_ANALYTIC_FRAME):
    """Test whether a full frame spans a special Lagrangian m-plane.

    The frame is orthonormalized first, so only its span matters.  The
    plane is special Lagrangian with phase e^{i*phase} (for one of its two
    orientations) iff all three reported residuals are below tol:
    Omega on an orthonormal basis then equals +-e^{i*phase}.
    """
    on = orthonormalize(frame)
    vecs = on.vectors
    k = on.k
    if k != on.m:
        raise ValueError("sl_check needs a full frame (k = m)")
    omega_res = 0.0
    for i in range(k):
        for j in range(i + 1, k):
            omega_res = max(omega_res, abs(kahler_form(vecs[i], vecs[j])))
    vol = holomorphic_volume(on)
    rotated = np.exp(-1j * phase) * vol
    return CalibrationReport(
        max_omega_residual=omega_res,
        max_imag_residual=abs(rotated.imag),
        calibration_defect=abs(abs(vol) - 1.0),
    )


def finite_diff_frame(map_fn, params, h=1e-4):
    """Tangent frame of a parameterization by central differences.

    map_fn takes a length-k real parameter vector and returns a point of
    C^m; the i-th frame vector approximates d(map_fn)/d(params_i) with
    O(h^2) error.
    """
    params = np.asarray(params, dtype=float)
    if h <= 0:
        raise ValueError("step h must be positive")
    cols = []
    for i in range(params.size):
        dp = np.zeros_like(params)
        dp[i] = h
        hi = np.asarray(map_fn(params + dp), dtype=complex)
        lo = np.asarray(map_fn(params - dp), dtype=complex)
        if not (np.all(np.isfinite(hi)) and np.all(np.isfinite(lo))):
            raise ValueError("non-finite evaluation while differencing")
        cols.append((hi - lo) / (2.0 * h))
    return TangentFrame(np.stack(cols))
