"""Seeded generators for the Monte Carlo designs.

Random streams
--------------
Every generator takes ``seed`` as anything :func:`numpy.random.default_rng`
accepts.  Simulation designs derive independent streams with :func:`stream`,
which keys a :class:`numpy.random.SeedSequence` on ``(master seed, *keys)``.
Replication ``r`` of a design uses the keys

* ``(r, 0)`` first sample,
* ``(r, 1)`` ``Y1`` part of the second sample,
* ``(r, 2)`` ``Y2`` part of the second sample,
* ``(r, 3)`` / ``(r, 4)`` contamination of the first / second sample,

so a replication can be regenerated in isolation and the clean and
contaminated versions of a replication share the same underlying curves.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .errors import InvalidArgument, NumericalFailure
from .hilbert import Grid, Sample, make_equidistant_grid

MODELS = ("null_bm", "model1", "model2")
MODEL2_RANGE = 0.2

MODEL1_DELTAS = tuple(range(0, 9)) + tuple(range(10, 21, 2))
MODEL2_DELTAS = (0, 0.5, 1, 1.5, 2, 2.5, 3, 4, 5)


def stream(seed: int, *keys: int) -> np.random.Generator:
    """Generator for the sub-stream ``keys`` of master seed ``seed``."""
    return np.random.default_rng(
        np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))
    )


@dataclass(frozen=True)
class SimDesign:
    """One cell of the simulation study.

    The second population is perturbed with ``delta_n = delta * n**-0.25``,
    ``n = n1 + n2``.
    """

    model: str = "null_bm"
    delta: float = 0.0
    n1: int = 100
    n2: int = 100
    m: int = 100
    contaminated: bool = False
    epsilon: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.model not in MODELS:
            raise InvalidArgument(f"model must be one of {MODELS}, got {self.model!r}")
        if self.delta < 0:
            raise InvalidArgument("delta must be non-negative")
        if self.n1 < 1 or self.n2 < 1:
            raise InvalidArgument("sample sizes must be positive")
        if self.m < 2:
            raise InvalidArgument("m must be at least 2")
        if not 0 <= self.epsilon <= 1:
            raise InvalidArgument("epsilon must lie in [0, 1]")

    @property
    def n(self) -> int:
        return self.n1 + self.n2

    @property
    def delta_n(self) -> float:
        return self.delta * self.n ** -0.25

    @property
    def grid(self) -> Grid:
        return make_equidistant_grid(self.m)

    def with_(self, **changes) -> "SimDesign":
        return replace(self, **changes)


def _bm_values(m: int, count: int, rng: np.random.Generator) -> np.ndarray:
    return np.cumsum(rng.standard_normal((count, m)) * np.sqrt(1.0 / m), axis=1)


def gen_bm(m: int, count: int, seed=None) -> Sample:
    """Standard Brownian motion sampled at ``t_j = j/m`` via cumulative increments."""
    if m < 2 or count < 1:
        raise InvalidArgument("gen_bm needs m >= 2 and count >= 1")
    rng = np.random.default_rng(seed)
    return Sample(make_equidistant_grid(m), _bm_values(m, count, rng))


def exponential_kernel(grid: Grid, range_: float = MODEL2_RANGE) -> np.ndarray:
    t = grid.points
    return np.exp(-np.abs(t[:, None] - t[None, :]) / range_)


@lru_cache(maxsize=8)
def _exp_cholesky(m: int, range_: float) -> np.ndarray:
    K = exponential_kernel(make_equidistant_grid(m), range_)
    for jitter in (1e-10, 1e-9, 1e-8):
        try:
            L = np.linalg.cholesky(K + jitter * np.eye(m))
        except np.linalg.LinAlgError:
            continue
        L.setflags(write=False)
        return L
    raise NumericalFailure(f"Cholesky factorization failed for m={m} even with jitter 1e-8")


def gen_exp_gp(m: int, count: int, seed=None, range_: float = MODEL2_RANGE) -> Sample:
    """Centered Gaussian process with covariance ``exp(-|s - t| / range_)``."""
    rng = np.random.default_rng(seed)
    L = _exp_cholesky(int(m), float(range_))
    return Sample(make_equidistant_grid(m), rng.standard_normal((count, m)) @ L.T)


def contaminate(sample: Sample, epsilon: float, seed=None, return_mask: bool = False):
    """Scale whole curves by ``|Cauchy|`` draws with probability ``epsilon``.

    Each curve independently gets ``B ~ Bernoulli(epsilon)``; when ``B = 1``
    it is multiplied by ``|tan(pi (U - 1/2))|`` with ``U`` uniform.
    """
    if not 0 <= epsilon <= 1:
        raise InvalidArgument("epsilon must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    n = sample.n
    hit = rng.random(n) < epsilon
    v = np.abs(np.tan(np.pi * (rng.random(n) - 0.5)))
    factor = np.where(hit, v, 1.0)
    out = Sample(sample.grid, sample.values * factor[:, None])
    if return_mask:
        return out, hit
    return out


def gen_elliptical_t(m: int, count: int, df: float, seed=None) -> Sample:
    """Functional t-process ``V * Y``: ``Y`` Brownian motion, ``df / V**2 ~ chi2(df)``."""
    if df < 1:
        raise InvalidArgument("degrees of freedom must be at least 1")
    if m < 2 or count < 1:
        raise InvalidArgument("gen_elliptical_t needs m >= 2 and count >= 1")
    rng = np.random.default_rng(seed)
    Y = _bm_values(m, count, rng)
    V = np.sqrt(df / rng.chisquare(df, size=count))
    return Sample(make_equidistant_grid(m), Y * V[:, None])


def _second_population(design: SimDesign, replication: int) -> np.ndarray:
    y1 = _bm_values(design.m, design.n2, stream(design.seed, replication, 1))
    if design.model == "null_bm" or design.delta == 0:
        return y1
    rng2 = stream(design.seed, replication, 2)
    if design.model == "model1":
        y2 = _bm_values(design.m, design.n2, rng2)
        return y1 + design.delta_n * y2**2
    y2 = gen_exp_gp(design.m, design.n2, rng2).values
    return y1 + design.delta_n * y2


def gen_samples(design: SimDesign, replication: int = 0) -> tuple[Sample, Sample]:
    """Both samples of replication ``replication`` of ``design``."""
    grid = design.grid
    x1 = Sample(grid, _bm_values(design.m, design.n1, stream(design.seed, replication, 0)))
    x2 = Sample(grid, _second_population(design, replication))
    if design.contaminated:
        x1 = contaminate(x1, design.epsilon, stream(design.seed, replication, 3))
        x2 = contaminate(x2, design.epsilon, stream(design.seed, replication, 4))
    return x1, x2


def gen_null(design: SimDesign, replication: int = 0) -> tuple[Sample, Sample]:
    if design.model != "null_bm":
        raise InvalidArgument("gen_null expects model='null_bm'")
    return gen_samples(design, replication)


def gen_model1(design: SimDesign, replication: int = 0) -> tuple[Sample, Sample]:
    """``X1 ~ BM``; ``X2 = Y1 + delta_n * Y2**2`` with independent Brownian motions."""
    if design.model != "model1":
        raise InvalidArgument("gen_model1 expects model='model1'")
    return gen_samples(design, replication)


def gen_model2(design: SimDesign, replication: int = 0) -> tuple[Sample, Sample]:
    """``X1 ~ BM``; ``X2 = Y1 + delta_n * Y2`` with ``Y2`` exponential-kernel Gaussian."""
    if design.model != "model2":
        raise InvalidArgument("gen_model2 expects model='model2'")
    return gen_samples(design, replication)
