"""Spherical principal components.

Eigen-analysis of self-adjoint kernel operators in the weighted L2 geometry of
the grid, plus the derived objects used in inference on principal
directions: eigenprojections, truncated resolvent sums and the eigenvalue
shrinkage that relates sign-operator eigenvalues to scatter eigenvalues.

Eigenfunction indices are 0-based throughout.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import (
    AmbiguousAlignment,
    DegenerateEigenvalue,
    InvalidArgument,
    NotSelfAdjoint,
)
from .hilbert import Curve, Grid, HSOperator, inner

SYMMETRY_TOL = 1e-8
GAP_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class EigenSystem:
    """Leading eigenpairs of a self-adjoint operator.

    ``vectors[j]`` holds the grid values of the ``j``-th eigenfunction; the
    rows are orthonormal under the grid weights.
    """

    grid: Grid
    values: np.ndarray
    vectors: np.ndarray
    op_trace: float

    @property
    def k(self) -> int:
        return self.values.size

    @property
    def functions(self) -> list[Curve]:
        return [Curve(self.grid, v) for v in self.vectors]

    def explained_fraction(self) -> np.ndarray:
        """Cumulative share of the trace carried by the first 1..k eigenvalues."""
        if self.op_trace == 0:
            return np.zeros(self.k)
        return np.cumsum(self.values) / self.op_trace


def _sign_convention(vectors: np.ndarray) -> np.ndarray:
    out = vectors.copy()
    for row in out:
        big = np.abs(row) > 1e-12 * np.max(np.abs(row), initial=0.0)
        if big.any() and row[np.argmax(big)] < 0:
            row *= -1.0
    return out


def eigendecompose(A: HSOperator, k: int | None = None) -> EigenSystem:
    """Top-``k`` eigenpairs of a self-adjoint kernel operator.

    The weighted problem ``K W phi = lambda phi`` is symmetrized as
    ``B = W^1/2 K W^1/2``; eigenvectors of ``B`` are mapped back by
    ``W^-1/2`` so the eigenfunctions are orthonormal for the grid inner
    product.  Each eigenfunction is oriented so its first non-negligible grid
    value is positive.
    """
    m = A.grid.m
    if k is None:
        k = m
    if int(k) != k or not 1 <= k <= m:
        raise InvalidArgument(f"k must lie in [1, {m}], got {k!r}")
    k = int(k)
    if A.asymmetry() > SYMMETRY_TOL:
        raise NotSelfAdjoint(f"kernel asymmetry {A.asymmetry():.3g} exceeds {SYMMETRY_TOL}")
    sw = np.sqrt(A.grid.weights)
    B = sw[:, None] * A.kernel * sw[None, :]
    B = 0.5 * (B + B.T)
    vals, vecs = np.linalg.eigh(B)
    order = np.argsort(vals, kind="stable")[::-1][:k]
    vals = vals[order]
    vectors = _sign_convention((vecs[:, order] / sw[:, None]).T)
    return EigenSystem(A.grid, vals, vectors, A.trace())


def align_sign(est: Curve, reference: Curve, tol: float = 1e-12) -> Curve:
    """Flip ``est`` so that it has a positive inner product with ``reference``."""
    c = inner(est, reference)
    if abs(c) <= tol:
        raise AmbiguousAlignment(f"|<est, reference>| = {abs(c):.3g} is too small to orient")
    return est if c > 0 else -est


def _check_indices(system: EigenSystem, indices: Iterable[int]) -> list[int]:
    idx = sorted(set(int(i) for i in indices))
    if idx and (idx[0] < 0 or idx[-1] >= system.k):
        raise InvalidArgument(f"indices must lie in [0, {system.k - 1}], got {idx}")
    return idx


def eigenprojection(system: EigenSystem, indices: Iterable[int]) -> HSOperator:
    """``sum_{j in indices} phi_j (x) phi_j``."""
    idx = _check_indices(system, indices)
    V = system.vectors[idx]
    return HSOperator(system.grid, V.T @ V)


def resolvent_delta(system: EigenSystem, i: int, k: int | None = None) -> HSOperator:
    """``sum_{l < k, l != i} (lambda_i - lambda_l)^-1 phi_l (x) phi_l``.

    Raises :class:`DegenerateEigenvalue` when ``lambda_i`` is not separated
    from another retained eigenvalue by a relative gap of ``1e-10``.
    """
    if k is None:
        k = system.k
    if not 1 <= k <= system.k:
        raise InvalidArgument(f"k must lie in [1, {system.k}]")
    if not 0 <= i < k:
        raise InvalidArgument(f"i must lie in [0, {k - 1}]")
    lam = system.values[:k]
    others = np.array([l for l in range(k) if l != i], dtype=int)
    gaps = lam[i] - lam[others]
    scale_ = np.maximum(np.abs(lam[i]), np.abs(lam[others]))
    if np.any(np.abs(gaps) <= GAP_TOL * np.maximum(scale_, np.finfo(float).tiny)):
        raise DegenerateEigenvalue(f"eigenvalue {i} is not simple among the first {k}")
    V = system.vectors[others]
    return HSOperator(system.grid, (V.T / gaps) @ V)


def shrinkage_factor_mc(
    eigenvalues,
    reps: int,
    seed=None,
    return_stderr: bool = False,
    batch: int = 200_000,
):
    """Monte Carlo sign-operator eigenvalues of a Gaussian scatter spectrum.

    Estimates ``lambda_l E[xi_l^2 / sum_j lambda_j xi_j^2]`` with ``xi`` i.i.d.
    standard normal.  All components come from the same draws, so the
    estimates sum to one up to rounding.

    Returns the estimates, and with ``return_stderr`` also their Monte Carlo
    standard errors.
    """
    lam = np.asarray(eigenvalues, dtype=float)
    if lam.ndim != 1 or lam.size == 0:
        raise InvalidArgument("eigenvalues must be a non-empty vector")
    if np.any(lam < 0) or not np.any(lam > 0):
        raise InvalidArgument("eigenvalues must be non-negative and not all zero")
    if int(reps) != reps or reps < 1:
        raise InvalidArgument("reps must be a positive integer")
    rng = np.random.default_rng(seed)
    total = np.zeros(lam.size)
    total_sq = np.zeros(lam.size)
    done = 0
    while done < reps:
        b = min(batch, reps - done)
        terms = lam * rng.standard_normal((b, lam.size)) ** 2
        ratio = terms / terms.sum(axis=1, keepdims=True)
        total += ratio.sum(axis=0)
        total_sq += (ratio**2).sum(axis=0)
        done += b
    mean = total / reps
    if not return_stderr:
        return mean
    var = np.maximum(total_sq / reps - mean**2, 0.0)
    return mean, np.sqrt(var / reps)
