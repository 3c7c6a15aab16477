"""Sample spatial sign covariance operator and its location-perturbation terms.

``sign_cov`` estimates ``E[s(X - t) (x) s(X - t)]``.  ``empirical_F``,
``empirical_S`` and ``empirical_G = 2F - 2S`` are the plug-in versions of the
linear maps that describe, to first order, how the sign operator moves when
the center is displaced by ``u``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateObservation
from .hilbert import (
    Curve,
    HSOperator,
    SampleLike,
    _check_grids,
    as_sample,
    sample_norms,
    sample_signs,
)
from .location import MedianResult


@dataclass(frozen=True)
class SignCovResult:
    operator: HSOperator
    center: Curve
    n_zero_residuals: int

    @property
    def trace(self) -> float:
        return self.operator.trace()


def default_eps0(residual_norms: np.ndarray) -> float:
    """Zero threshold scaled by the typical residual size."""
    if residual_norms.size == 0:
        return 0.0
    return 1e-12 * float(np.median(residual_norms))


def sign_kernel(signs: np.ndarray) -> np.ndarray:
    """``(1/n) sum_i s_i s_i^T`` accumulated in observation order."""
    n, m = signs.shape
    kernel = np.zeros((m, m))
    for s in signs:
        kernel += np.multiply.outer(s, s)
    return kernel / n


def residual_signs(sample: SampleLike, center: Curve, eps0: float | None = None):
    """Signs of ``X_i - center`` and the mask of zero residuals."""
    s = as_sample(sample)
    _check_grids(s.grid, center.grid)
    resid = s.values - center.values
    if eps0 is None:
        eps0 = default_eps0(sample_norms(resid, s.grid))
    return sample_signs(resid, s.grid, eps0)


def sign_cov(
    sample: SampleLike, center: Curve, eps0: float | None = None
) -> SignCovResult:
    """Sample spatial sign covariance operator about ``center``.

    Observations equal to the center contribute a zero term but still count in
    the ``1/n`` normalization, so the trace equals the fraction of nonzero
    residuals.

    Parameters
    ----------
    sample : Sample or sequence of Curve
    center : Curve
    eps0 : float, optional
        Residual norms at or below ``eps0`` are zero.  Defaults to ``1e-12``
        times the median residual norm.
    """
    s = as_sample(sample)
    signs, zero = residual_signs(s, center, eps0)
    return SignCovResult(HSOperator(s.grid, sign_kernel(signs)), center, int(zero.sum()))


def _residuals(sample: SampleLike, center: Curve, u: Curve | None = None):
    s = as_sample(sample)
    _check_grids(s.grid, center.grid)
    if u is not None:
        _check_grids(s.grid, u.grid)
    resid = s.values - center.values
    r = sample_norms(resid, s.grid)
    eps0 = default_eps0(r)
    bad = np.flatnonzero(r <= eps0)
    if bad.size:
        raise DegenerateObservation(
            f"{bad.size} observation(s) coincide with the center (first index {bad[0]})"
        )
    return s, resid, r


def empirical_F(sample: SampleLike, center: Curve, u: Curve) -> HSOperator:
    """``(1/n) sum_i <R_i, u> / ||R_i||^4  R_i (x) R_i`` with ``R_i = X_i - center``."""
    s, resid, r = _residuals(sample, center, u)
    coef = (resid @ (s.grid.weights * u.values)) / r**4
    kernel = (resid.T * coef) @ resid / s.n
    return HSOperator(s.grid, kernel)


def mean_scaled_residual(sample: SampleLike, center: Curve) -> Curve:
    """``(1/n) sum_i R_i / ||R_i||^2``."""
    s, resid, r = _residuals(sample, center)
    return Curve(s.grid, (resid / r[:, None] ** 2).mean(axis=0))


def empirical_S(sample: SampleLike, center: Curve, u: Curve) -> HSOperator:
    """``(u (x) e + e (x) u) / 2`` with ``e`` the mean scaled residual."""
    s, resid, r = _residuals(sample, center, u)
    e = (resid / r[:, None] ** 2).mean(axis=0)
    kernel = 0.5 * (np.multiply.outer(u.values, e) + np.multiply.outer(e, u.values))
    return HSOperator(s.grid, kernel)


def empirical_G(sample: SampleLike, center: Curve, u: Curve) -> HSOperator:
    return 2.0 * empirical_F(sample, center, u) - 2.0 * empirical_S(sample, center, u)


def shift_correction(
    sample: SampleLike,
    median_result: MedianResult,
    sign_cov_at_median: SignCovResult,
    displacement: Curve,
) -> HSOperator:
    """First-order change of the sign operator caused by moving the center.

    Evaluates ``G(displacement)`` at the estimated median; for a displacement
    ``mu_hat - mu`` this approximates ``Gamma_hat(mu_hat) - Gamma_hat(mu)``.
    """
    _check_grids(sign_cov_at_median.operator.grid, displacement.grid)
    return empirical_G(sample, median_result.estimate, displacement)
