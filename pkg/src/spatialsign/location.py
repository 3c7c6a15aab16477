"""Spatial (L1) median of a functional sample.

Two estimators are provided.  The Weiszfeld fixed-point iteration is the
default for centering data; the averaged stochastic gradient estimator
processes each curve once.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument
from .hilbert import Curve, SampleLike, as_sample, sample_norms

DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 500
DEFAULT_STEP_C = 1.0
DEFAULT_STEP_GAMMA = 0.6


@dataclass(frozen=True)
class MedianResult:
    """Outcome of a spatial median computation.

    Attributes
    ----------
    estimate : Curve
        The median curve.
    iterations : int
        Fixed-point iterations (Weiszfeld) or processed observations (ASGD).
    converged : bool
        Whether the stopping rule was met.
    final_step : float
        Size of the last update relative to ``max(1, ||mu||)``.
    objective : float
        ``(1/n) sum_i ||X_i - estimate||``.
    objectives : tuple of float
        Objective after each accepted iterate, starting at the initial point.
        Empty for the stochastic estimator.
    """

    estimate: Curve
    iterations: int
    converged: bool
    final_step: float
    objective: float
    objectives: tuple = field(default=(), repr=False)


def median_objective(sample: SampleLike, center: Curve) -> float:
    """Empirical L1 objective ``(1/n) sum_i ||X_i - center||``."""
    s = as_sample(sample)
    return float(np.mean(sample_norms(s.values - center.values, s.grid)))


def _objective(X, mu, w):
    return float(np.mean(np.sqrt(((X - mu) ** 2) @ w)))


def _eps0(X, mu, w):
    r = np.sqrt(((X - mu) ** 2) @ w)
    return 1e-12 * float(np.median(r))


def spatial_median_weiszfeld(
    sample: SampleLike,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    eps0: float | None = None,
) -> MedianResult:
    """Spatial median by Weiszfeld iteration.

    Starts from the pointwise median and iterates
    ``mu <- sum_i X_i / r_i / sum_i 1 / r_i`` with ``r_i = ||X_i - mu||``,
    leaving out observations with ``r_i <= eps0``.  Stops when the relative
    step falls below ``tol``.

    When the iterate sits on data points, it is returned as the answer if the
    resultant of the remaining unit residuals has norm at most the number of
    coincident points (the subgradient optimality condition).  Otherwise the
    reduced Weiszfeld step is taken with step halving, so the objective never
    increases across accepted iterates.

    Parameters
    ----------
    sample : Sample or sequence of Curve
    tol : float
        Relative step tolerance.
    max_iter : int
    eps0 : float, optional
        Residual norms at or below this are treated as zero.  Defaults to
        ``1e-12`` times the median residual norm at the starting point.
    """
    if tol <= 0:
        raise InvalidArgument("tol must be positive")
    if max_iter < 1:
        raise InvalidArgument("max_iter must be at least 1")
    s = as_sample(sample)
    X, w, grid = s.values, s.grid.weights, s.grid

    mu = np.median(X, axis=0)
    if eps0 is None:
        eps0 = _eps0(X, mu, w)

    obj = _objective(X, mu, w)
    objectives = [obj]
    step = np.inf
    converged = False
    it = 0
    while it < max_iter:
        it += 1
        r = np.sqrt(((X - mu) ** 2) @ w)
        keep = r > eps0
        n_anchor = int(np.count_nonzero(~keep))
        if not keep.any():
            step, converged = 0.0, True
            break
        inv = 1.0 / r[keep]
        if n_anchor:
            resultant = ((X[keep] - mu) * inv[:, None]).sum(axis=0)
            if np.sqrt(resultant**2 @ w) <= n_anchor:
                step, converged = 0.0, True
                break
        target = inv @ X[keep] / inv.sum()
        direction = target - mu
        scale_ = max(1.0, float(np.sqrt(mu**2 @ w)))
        slack = 1e-12 * max(obj, 1.0)
        t = 1.0
        while True:
            new = mu + t * direction
            new_obj = _objective(X, new, w)
            if new_obj <= obj + slack or t < 1e-8:
                break
            t *= 0.5
        if new_obj > obj + slack:
            # no descent even for tiny steps: optimal to working precision
            step, converged = 0.0, True
            break
        step = float(np.sqrt((new - mu) ** 2 @ w)) / scale_
        mu, obj = new, new_obj
        objectives.append(obj)
        if step <= tol:
            converged = True
            break

    return MedianResult(
        estimate=Curve(grid, mu),
        iterations=it,
        converged=converged,
        final_step=float(step),
        objective=obj,
        objectives=tuple(objectives),
    )


def spatial_median_asgd(
    sample: SampleLike,
    step_c: float = DEFAULT_STEP_C,
    step_gamma: float = DEFAULT_STEP_GAMMA,
    seed=None,
    tol: float = 1e-3,
    eps0: float | None = None,
) -> MedianResult:
    """Averaged stochastic gradient spatial median (one pass).

    The observations are visited once in a random order; with
    ``g_k = c * k**(-gamma)`` the iterate moves by ``g_k * s(X_k - mu_k)`` and
    the returned estimate is the running mean of all iterates, the first
    being the pointwise median.

    ``converged`` reports whether the last change of the averaged iterate is
    at most ``tol`` (relative); there is no further stopping rule.
    """
    if step_c <= 0:
        raise InvalidArgument("step_c must be positive")
    if not 0.5 < step_gamma < 1:
        raise InvalidArgument("step_gamma must lie in (1/2, 1)")
    s = as_sample(sample)
    if s.n < 2:
        raise InvalidArgument("the stochastic estimator needs at least two curves")
    X, w, grid = s.values, s.grid.weights, s.grid
    rng = np.random.default_rng(seed)

    mu = np.median(X, axis=0)
    if eps0 is None:
        eps0 = _eps0(X, mu, w)
    avg = mu.copy()
    step = 0.0
    for k, idx in enumerate(rng.permutation(s.n), start=1):
        d = X[idx] - mu
        r = float(np.sqrt(d**2 @ w))
        if r > eps0:
            mu = mu + step_c * k ** (-step_gamma) * d / r
        new_avg = avg + (mu - avg) / (k + 1)
        step = float(np.sqrt((new_avg - avg) ** 2 @ w)) / max(
            1.0, float(np.sqrt(avg**2 @ w))
        )
        avg = new_avg

    return MedianResult(
        estimate=Curve(grid, avg),
        iterations=s.n,
        converged=step <= tol,
        final_step=step,
        objective=_objective(X, avg, w),
    )


def pointwise_mean(sample: SampleLike) -> Curve:
    s = as_sample(sample)
    return Curve(s.grid, s.values.mean(axis=0))
