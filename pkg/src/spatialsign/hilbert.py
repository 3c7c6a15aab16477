"""Discretized L2(0, 1) arithmetic.

Curves are sampled on a :class:`Grid` whose quadrature weights define the
inner product ``<u, v> = sum_j w_j u_j v_j``.  Operators are stored as kernel
matrices acting through the same weights, ``(A u)_i = sum_j w_j K_ij u_j``, so
tensor products, Hilbert-Schmidt inner products and compositions are exact
with respect to the chosen quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import IncompatibleGrids, InvalidArgument

DEFAULT_EPS0 = 1e-12


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Grid:
    """Design points in (0, 1] with positive quadrature weights."""

    points: np.ndarray
    weights: np.ndarray
    rule: str = "equidistant"

    def __post_init__(self):
        points = _frozen(self.points)
        weights = _frozen(self.weights)
        if points.ndim != 1 or points.shape != weights.shape:
            raise InvalidArgument("points and weights must be 1-d arrays of equal length")
        if points.size < 1:
            raise InvalidArgument("a grid needs at least one point")
        if np.any(np.diff(points) <= 0):
            raise InvalidArgument("grid points must be strictly increasing")
        if points[0] <= 0 or points[-1] > 1:
            raise InvalidArgument("grid points must lie in (0, 1]")
        if np.any(weights <= 0):
            raise InvalidArgument("quadrature weights must be positive")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", weights)

    @property
    def m(self) -> int:
        return self.points.size

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Grid):
            return NotImplemented
        return (
            self.m == other.m
            and np.array_equal(self.points, other.points)
            and np.array_equal(self.weights, other.weights)
        )

    def __hash__(self):
        return hash((self.m, self.points.tobytes(), self.weights.tobytes()))

    def __repr__(self):
        return f"Grid(m={self.m}, rule={self.rule!r})"

    def to_json_dict(self) -> dict:
        return {"m": self.m, "rule": self.rule}


def make_equidistant_grid(m: int) -> Grid:
    """Right-endpoint rectangle rule on ``t_j = j/m`` with ``w_j = 1/m``."""
    if int(m) != m or m < 2:
        raise InvalidArgument(f"equidistant grid needs m >= 2, got {m!r}")
    m = int(m)
    return Grid(np.arange(1, m + 1) / m, np.full(m, 1.0 / m))


def _check_grids(a: Grid, b: Grid) -> None:
    if a is not b and a != b:
        raise IncompatibleGrids(f"{a!r} and {b!r} differ")


@dataclass(frozen=True, eq=False)
class Curve:
    """One function sampled on a grid."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = _frozen(self.values)
        if values.shape != (self.grid.m,):
            raise InvalidArgument(
                f"curve has {values.shape} values but the grid has m={self.grid.m}"
            )
        object.__setattr__(self, "values", values)

    def __add__(self, other: "Curve") -> "Curve":
        _check_grids(self.grid, other.grid)
        return Curve(self.grid, self.values + other.values)

    def __sub__(self, other: "Curve") -> "Curve":
        _check_grids(self.grid, other.grid)
        return Curve(self.grid, self.values - other.values)

    def __mul__(self, c: float) -> "Curve":
        return Curve(self.grid, float(c) * self.values)

    __rmul__ = __mul__

    def __neg__(self) -> "Curve":
        return Curve(self.grid, -self.values)

    def __repr__(self):
        return f"Curve(m={self.grid.m})"


def zero_curve(grid: Grid) -> Curve:
    return Curve(grid, np.zeros(grid.m))


@dataclass(frozen=True, eq=False)
class Sample:
    """``n`` curves on a shared grid, stored row-wise as an ``n x m`` array."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = _frozen(self.values)
        if values.ndim != 2 or values.shape[1] != self.grid.m:
            raise InvalidArgument(
                f"sample must be n x {self.grid.m}, got shape {values.shape}"
            )
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def __len__(self):
        return self.n

    def __getitem__(self, i) -> Curve:
        return Curve(self.grid, self.values[i])

    def __iter__(self):
        for row in self.values:
            yield Curve(self.grid, row)

    def curves(self) -> list[Curve]:
        return list(self)

    def __repr__(self):
        return f"Sample(n={self.n}, m={self.grid.m})"


SampleLike = Union[Sample, Sequence[Curve]]


def as_sample(sample: SampleLike, allow_empty: bool = False) -> Sample:
    """Coerce a :class:`Sample` or a sequence of curves to a :class:`Sample`."""
    if isinstance(sample, Sample):
        if sample.n == 0 and not allow_empty:
            raise InvalidArgument("empty sample")
        return sample
    curves = list(sample)
    if not curves:
        raise InvalidArgument("empty sample")
    grid = curves[0].grid
    for c in curves[1:]:
        _check_grids(grid, c.grid)
    return Sample(grid, np.vstack([c.values for c in curves]))


def sample_from_array(values, grid: Grid | None = None) -> Sample:
    values = np.atleast_2d(np.asarray(values, dtype=float))
    if grid is None:
        grid = make_equidistant_grid(values.shape[1])
    return Sample(grid, values)


def inner(u: Curve, v: Curve) -> float:
    _check_grids(u.grid, v.grid)
    return float(np.dot(u.grid.weights * u.values, v.values))


def norm(u: Curve) -> float:
    return float(np.sqrt(max(inner(u, u), 0.0)))


def sample_norms(values: np.ndarray, grid: Grid) -> np.ndarray:
    """Row-wise L2 norms of an ``n x m`` array, ``sqrt(sum_j w_j (v_j v_j))``."""
    return np.sqrt((grid.weights * (values * values)).sum(axis=1))


def sign(u: Curve, eps0: float = DEFAULT_EPS0) -> Curve:
    """Functional sign ``u/||u||``; the zero curve when ``||u|| <= eps0``."""
    r = norm(u)
    if r > eps0:
        return Curve(u.grid, u.values / r)
    return zero_curve(u.grid)


def sample_signs(values: np.ndarray, grid: Grid, eps0: float = DEFAULT_EPS0):
    """Row-wise functional signs.

    Returns the ``n x m`` array of signs and the boolean mask of rows whose
    norm did not exceed ``eps0`` (those rows are set to zero).
    """
    r = sample_norms(values, grid)
    zero = r <= eps0
    safe = np.where(zero, 1.0, r)
    signs = values / safe[:, None]
    signs[zero] = 0.0
    return signs, zero


@dataclass(frozen=True, eq=False)
class HSOperator:
    """Kernel representation of a Hilbert-Schmidt operator on a grid."""

    grid: Grid
    kernel: np.ndarray

    def __post_init__(self):
        kernel = _frozen(self.kernel)
        m = self.grid.m
        if kernel.shape != (m, m):
            raise InvalidArgument(f"kernel must be {m} x {m}, got {kernel.shape}")
        object.__setattr__(self, "kernel", kernel)

    def __add__(self, other: "HSOperator") -> "HSOperator":
        return add(self, other)

    def __sub__(self, other: "HSOperator") -> "HSOperator":
        return sub(self, other)

    def __mul__(self, c: float) -> "HSOperator":
        return scale(self, c)

    __rmul__ = __mul__

    def __neg__(self) -> "HSOperator":
        return scale(self, -1.0)

    def __call__(self, u: Curve) -> Curve:
        return apply(self, u)

    @property
    def T(self) -> "HSOperator":
        """Adjoint (the transposed kernel)."""
        return HSOperator(self.grid, self.kernel.T)

    def trace(self) -> float:
        return float(np.dot(self.grid.weights, np.diag(self.kernel)))

    def asymmetry(self) -> float:
        """Relative size of the antisymmetric part of the kernel."""
        k = self.kernel
        scale_ = np.max(np.abs(k))
        if scale_ == 0:
            return 0.0
        return float(np.max(np.abs(k - k.T)) / scale_)

    def __repr__(self):
        return f"HSOperator(m={self.grid.m})"


def zero_operator(grid: Grid) -> HSOperator:
    return HSOperator(grid, np.zeros((grid.m, grid.m)))


def identity_kernel_operator(grid: Grid) -> HSOperator:
    """Kernel ``delta_ij / w_j``; reproduces every curve under :func:`apply`."""
    return HSOperator(grid, np.diag(1.0 / grid.weights))


def tensor(u: Curve, v: Curve) -> HSOperator:
    """``(u (x) v) w = <v, w> u``, kernel ``u_i v_j``."""
    _check_grids(u.grid, v.grid)
    return HSOperator(u.grid, np.outer(u.values, v.values))


def apply(A: HSOperator, u: Curve) -> Curve:
    _check_grids(A.grid, u.grid)
    return Curve(u.grid, A.kernel @ (A.grid.weights * u.values))


def compose(A: HSOperator, B: HSOperator) -> HSOperator:
    """Kernel of ``A o B`` under the grid quadrature."""
    _check_grids(A.grid, B.grid)
    return HSOperator(A.grid, (A.kernel * A.grid.weights) @ B.kernel)


def add(A: HSOperator, B: HSOperator) -> HSOperator:
    _check_grids(A.grid, B.grid)
    return HSOperator(A.grid, A.kernel + B.kernel)


def sub(A: HSOperator, B: HSOperator) -> HSOperator:
    _check_grids(A.grid, B.grid)
    return HSOperator(A.grid, A.kernel - B.kernel)


def scale(A: HSOperator, c: float) -> HSOperator:
    return HSOperator(A.grid, float(c) * A.kernel)


def hs_inner(A: HSOperator, B: HSOperator) -> float:
    """``trace(A* B) = sum_ij w_i w_j K_A(i,j) K_B(i,j)``."""
    _check_grids(A.grid, B.grid)
    w = A.grid.weights
    return float(np.einsum("i,ij,ij,j->", w, A.kernel, B.kernel, w))


def hs_norm(A: HSOperator) -> float:
    return float(np.sqrt(max(hs_inner(A, A), 0.0)))


def kernel_hs_norm2(kernel: np.ndarray, weights: np.ndarray) -> float:
    """Squared HS norm of a raw kernel matrix; avoids building an operator."""
    return float(np.einsum("i,ij,ij,j->", weights, kernel, kernel, weights))


def sum_operators(ops: Iterable[HSOperator], grid: Grid) -> HSOperator:
    total = np.zeros((grid.m, grid.m))
    for op in ops:
        _check_grids(grid, op.grid)
        total += op.kernel
    return HSOperator(grid, total)
