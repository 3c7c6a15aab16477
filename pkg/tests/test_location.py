import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spatialsign.errors import InvalidArgument
from spatialsign.hilbert import Curve, Sample, make_equidistant_grid, norm
from spatialsign.location import (
    median_objective,
    spatial_median_asgd,
    spatial_median_weiszfeld,
)
from spatialsign.simgen import gen_bm


def _const_sample(levels, m=4):
    g = make_equidistant_grid(m)
    return Sample(g, np.outer(levels, np.ones(m)))


def test_coincident_sample_returns_the_point(rng):
    g = make_equidistant_grid(6)
    a = rng.normal(size=6)
    res = spatial_median_weiszfeld([Curve(g, a)] * 3)
    np.testing.assert_array_equal(res.estimate.values, a)
    assert res.converged and res.iterations <= 2


def test_constant_levels_match_one_dimensional_brute_force():
    levels = np.array([0.0, 1.0, 10.0])
    # oracle: minimize sum |c - x_i| over a fine grid of c
    cs = np.linspace(-2, 12, 140001)
    c_star = cs[np.argmin(np.abs(cs[:, None] - levels).sum(axis=1))]
    assert c_star == pytest.approx(1.0, abs=1e-9)
    res = spatial_median_weiszfeld(_const_sample(levels))
    np.testing.assert_allclose(res.estimate.values, c_star, atol=1e-6)
    assert res.converged


def test_objective_is_non_increasing(rng):
    x = gen_bm(30, 50, rng)
    res = spatial_median_weiszfeld(x)
    steps = np.diff(res.objectives)
    assert np.all(steps <= 1e-10)
    assert res.converged and res.final_step <= 1e-8


def test_objective_non_increasing_with_anchor_start():
    # pointwise median coincides with an observation
    g = make_equidistant_grid(3)
    x = Sample(g, [[0, 0, 0], [1, 2, 0], [-1, 0.5, 2], [3, -1, 1], [0.2, 0.1, -4]])
    res = spatial_median_weiszfeld(x)
    assert np.all(np.diff(res.objectives) <= 1e-10)


def test_translation_equivariance(rng):
    g = make_equidistant_grid(10)
    x = Sample(g, rng.standard_t(3, size=(40, 10)))
    v = rng.normal(size=10) * 5
    base = spatial_median_weiszfeld(x).estimate.values
    shifted = spatial_median_weiszfeld(Sample(g, x.values + v)).estimate.values
    np.testing.assert_allclose(shifted, base + v, atol=1e-8)


def test_scale_equivariance(rng):
    g = make_equidistant_grid(10)
    x = Sample(g, rng.normal(size=(40, 10)))
    # the default stopping rule leaves ~1e-7 iteration error; solve tightly
    base = spatial_median_weiszfeld(x, tol=1e-13, max_iter=5000)
    scaled = spatial_median_weiszfeld(Sample(g, 3.7 * x.values), tol=1e-13, max_iter=5000)
    assert base.converged and scaled.converged
    np.testing.assert_allclose(scaled.estimate.values, 3.7 * base.estimate.values, atol=1e-8)


def test_weiszfeld_is_a_minimum(rng):
    x = gen_bm(20, 60, rng)
    res = spatial_median_weiszfeld(x)
    for _ in range(20):
        d = Curve(x.grid, rng.normal(size=20) * 1e-3)
        assert median_objective(x, res.estimate + d) >= res.objective - 1e-12


def test_consistency_smoke():
    norms = []
    for n in (100, 400, 1600):
        x = gen_bm(50, n, np.random.default_rng(1000 + n))
        norms.append(norm(spatial_median_weiszfeld(x).estimate))
    assert norms[0] > norms[1] > norms[2]


def test_invalid_arguments():
    with pytest.raises(InvalidArgument):
        spatial_median_weiszfeld([])
    with pytest.raises(InvalidArgument):
        spatial_median_weiszfeld(_const_sample([1.0, 2.0]), tol=0)
    with pytest.raises(InvalidArgument):
        spatial_median_asgd(_const_sample([1.0]))
    with pytest.raises(InvalidArgument):
        spatial_median_asgd(_const_sample([1.0, 2.0]), step_gamma=0.4)


def test_asgd_coincident_sample_is_exact(rng):
    g = make_equidistant_grid(5)
    a = rng.normal(size=5)
    res = spatial_median_asgd([Curve(g, a)] * 4, seed=0)
    np.testing.assert_array_equal(res.estimate.values, a)


def test_asgd_close_to_weiszfeld_objective():
    x = gen_bm(100, 500, np.random.default_rng(77))
    w = spatial_median_weiszfeld(x)
    a = spatial_median_asgd(x, step_c=1.0, step_gamma=0.6, seed=77)
    assert a.objective <= 1.05 * w.objective


def test_two_point_sample_objective(rng):
    g = make_equidistant_grid(8)
    u = Curve(g, rng.normal(size=8))
    sample = [u, -u]
    for res in (spatial_median_weiszfeld(sample), spatial_median_asgd(sample, seed=3)):
        assert res.objective == pytest.approx(norm(u), abs=1e-6)


def test_asgd_translation_equivariance(rng):
    g = make_equidistant_grid(10)
    x = Sample(g, rng.normal(size=(60, 10)))
    v = rng.normal(size=10)
    base = spatial_median_asgd(x, seed=5).estimate.values
    shifted = spatial_median_asgd(Sample(g, x.values + v), seed=5).estimate.values
    np.testing.assert_allclose(shifted, base + v, atol=1e-8)


@pytest.mark.property
@settings(max_examples=40, deadline=None)
@given(
    st.integers(2, 25),
    st.integers(2, 8),
    st.integers(0, 2**32 - 1),
    st.booleans(),
)
def test_weiszfeld_monotone_property(n, m, seed, with_ties):
    r = np.random.default_rng(seed)
    X = r.standard_cauchy(size=(n, m))
    if with_ties:
        X[n // 2 :] = X[0]
    res = spatial_median_weiszfeld(Sample(make_equidistant_grid(m), X))
    obj = np.array(res.objectives)
    assert np.all(np.diff(obj) <= 1e-12 * np.maximum(obj[:-1], 1.0))
    assert res.objective == pytest.approx(obj[-1])
