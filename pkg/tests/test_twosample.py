import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.stats import chi2

from spatialsign.errors import IncompatibleGrids, InsufficientRank, InvalidArgument
from spatialsign.hilbert import Curve, Sample, make_equidistant_grid, sign
from spatialsign.location import spatial_median_weiszfeld
from spatialsign.simgen import SimDesign, gen_bm, gen_samples
from spatialsign.twosample import (
    ThetaSpectrum,
    bootstrap_null,
    covariance_operator,
    estimate_theta_spectrum,
    half_vec,
    p_value,
    prepare_pair,
    run_test,
    spectrum_from_prepared,
    statistic_classical,
    statistic_sign,
)


def _zero(g):
    return Curve(g, np.zeros(g.m))


def _weights(thetas):
    thetas = np.asarray(thetas, dtype=float)
    return ThetaSpectrum(thetas, 1, thetas.size)


@pytest.fixture(scope="module")
def null_pair():
    return gen_samples(SimDesign(n1=100, n2=100, m=100, seed=31), 0)


# -- statistics --------------------------------------------------------------


def test_sign_statistic_identical_samples():
    x = gen_bm(20, 15, seed=1)
    c = _zero(x.grid)
    assert statistic_sign(x, x, c, c) == 0.0


def test_sign_statistic_orthogonal_units(grid2):
    s1 = Curve(grid2, [np.sqrt(2.0), 0.0])
    s2 = Curve(grid2, [0.0, np.sqrt(2.0)])
    c = _zero(grid2)
    assert statistic_sign([s1], [s2], c, c) == pytest.approx(4.0, abs=1e-12)


def test_sign_statistic_swap_symmetry():
    a, b = gen_bm(15, 12, seed=2), gen_bm(15, 20, seed=3)
    ca, cb = spatial_median_weiszfeld(a).estimate, spatial_median_weiszfeld(b).estimate
    assert statistic_sign(a, b, ca, cb) == pytest.approx(statistic_sign(b, a, cb, ca), rel=1e-14)


def test_sign_statistic_rescaling_invariance(rng):
    a, b = gen_bm(10, 8, seed=4), gen_bm(10, 9, seed=5)
    c = _zero(a.grid)
    k = rng.uniform(0.1, 10, size=(9, 1))
    b_scaled = Sample(b.grid, b.values * k)
    assert statistic_sign(a, b_scaled, c, c) == pytest.approx(statistic_sign(a, b, c, c), rel=1e-10)


def test_statistic_grid_mismatch():
    a, b = gen_bm(5, 3, seed=1), gen_bm(6, 3, seed=1)
    with pytest.raises(IncompatibleGrids):
        statistic_sign(a, b, _zero(a.grid), _zero(a.grid))
    with pytest.raises(IncompatibleGrids):
        statistic_classical(a, b)


def test_classical_identical():
    x = gen_bm(12, 10, seed=6)
    assert statistic_classical(x, x) == 0.0


def test_classical_scaling_arithmetic(rng):
    g = make_equidistant_grid(3)
    x1 = rng.normal(size=(2, 3))
    x2 = rng.normal(size=(2, 3))
    c = 1.7
    w = np.full(3, 1 / 3)

    def cov(x):
        d = x - x.mean(axis=0)
        return sum(np.outer(r, r) for r in d) / len(x)

    diff = cov(x1) - c**2 * cov(x2)
    want = 4 * sum(w[i] * w[j] * diff[i, j] ** 2 for i in range(3) for j in range(3))
    got = statistic_classical(Sample(g, x1), Sample(g, c * x2))
    assert got == pytest.approx(want, rel=1e-12)


def test_classical_mean_shift_invariance(rng):
    a, b = gen_bm(10, 30, seed=7), gen_bm(10, 25, seed=8)
    shifted = Sample(b.grid, b.values + rng.normal(size=10))
    assert statistic_classical(a, shifted) == pytest.approx(statistic_classical(a, b), abs=1e-10)


def test_covariance_operator_about_mean():
    x = gen_bm(6, 40, seed=9)
    K = covariance_operator(x).kernel
    np.testing.assert_allclose(K, np.cov(x.values.T, bias=True), atol=1e-14)


# -- theta spectrum ----------------------------------------------------------


def test_half_vec_examples():
    A = np.array([[1.0, 2.0], [2.0, 3.0]])
    np.testing.assert_allclose(half_vec(A), [1.0, 2.0 * np.sqrt(2), 3.0])
    with pytest.raises(InvalidArgument):
        half_vec(np.zeros((2, 3)))


@pytest.mark.property
@settings(max_examples=100, deadline=None)
@given(st.integers(1, 8).flatmap(lambda M: st.tuples(
    arrays(float, (M, M), elements=st.floats(-100, 100)),
    arrays(float, (M, M), elements=st.floats(-100, 100)),
)))
def test_half_vec_isometry(pair):
    A, B = pair
    A, B = A + A.T, B + B.T
    frob = float(np.sum(A * B))
    scale = max(1.0, float(np.abs(A).max() * np.abs(B).max() * A.size))
    assert float(half_vec(A) @ half_vec(B)) == pytest.approx(frob, abs=1e-12 * scale)


def test_identical_one_point_samples_have_zero_thetas(grid4):
    x = [Curve(grid4, [1.0, -2.0, 0.5, 3.0])]
    spectrum = estimate_theta_spectrum(x, x, _zero(grid4), _zero(grid4), 1, "sign")
    assert spectrum.q_n == 1
    np.testing.assert_array_equal(spectrum.thetas, [0.0])


def test_single_direction_matches_scalar_variance():
    a, b = gen_bm(20, 50, seed=10), gen_bm(20, 50, seed=11)
    prep = prepare_pair(a, b, "sign")
    spectrum = spectrum_from_prepared(prep, 1)
    phi = prep.pooled.vectors[0]
    w = a.grid.weights
    want = 0.0
    for s, c in ((a, prep.centers[0]), (b, prep.centers[1])):
        scores = np.array([np.sum(w * sign(x - c).values * phi) for x in s])
        want += (100 / 50) * np.var(scores**2, ddof=1)
    assert spectrum.q_n == 1
    assert spectrum.thetas[0] == pytest.approx(want, rel=1e-10)


def test_spectrum_shape_and_clipping(null_pair):
    prep = prepare_pair(*null_pair, "sign")
    for M in (1, 3, 10):
        spectrum = spectrum_from_prepared(prep, M)
        assert spectrum.M == M and spectrum.q_n == M * (M + 1) // 2 == spectrum.thetas.size
        assert np.all(spectrum.thetas >= 0)
        assert np.all(np.diff(spectrum.thetas) <= 0)
        assert spectrum.thetas.sum() <= spectrum.upsilon_trace + 1e-8


def test_pooled_explained_fraction_m3(null_pair):
    prep = prepare_pair(*null_pair, "sign")
    assert prep.explained_fraction(3) == pytest.approx(0.828, abs=0.02)


def test_spectrum_errors(null_pair):
    x1, x2 = null_pair
    with pytest.raises(InvalidArgument):
        estimate_theta_spectrum(x1, x2, None, None, 101)
    prep = prepare_pair(x1, x2, "sign")
    with pytest.raises(InvalidArgument):
        spectrum_from_prepared(prep, 0)
    tiny = gen_bm(10, 2, seed=1)
    with pytest.raises(InsufficientRank):
        estimate_theta_spectrum(tiny, tiny, None, None, 5, "classical")
    with pytest.raises(InvalidArgument):
        prepare_pair(x1, x2, "bogus")


def test_classical_gauss_spectrum():
    a, b = gen_bm(10, 60, seed=12), gen_bm(10, 40, seed=13)
    prep = prepare_pair(a, b, "classical_gauss")
    spectrum = spectrum_from_prepared(prep, None)
    lam = prep.pooled.values
    r = spectrum.M
    assert spectrum.q_n == r * (r + 1) // 2 == spectrum.thetas.size
    assert spectrum.thetas[0] == pytest.approx((100 / 60 + 100 / 40) * 2 * lam[0] ** 2)


# -- bootstrap ---------------------------------------------------------------


def test_bootstrap_zero_weights():
    np.testing.assert_array_equal(bootstrap_null(_weights([0.0, 0.0]), 500, seed=1), np.zeros(500))
    np.testing.assert_array_equal(bootstrap_null(_weights([]), 10, seed=1), np.zeros(10))


def test_bootstrap_chi2_1_quantile():
    draws = bootstrap_null(_weights([1.0]), 100_000, seed=2)
    assert np.quantile(draws, 0.95) == pytest.approx(chi2.ppf(0.95, 1), abs=0.05)


def test_bootstrap_chi2_3_mean():
    N_b = 50_000
    draws = bootstrap_null(_weights([1.0, 1.0, 1.0]), N_b, seed=3)
    assert abs(draws.mean() - 3.0) <= 3 * np.sqrt(6 / N_b)


def test_bootstrap_rejects_bad_size():
    for bad in (0, 2.5):
        with pytest.raises(InvalidArgument):
            bootstrap_null(_weights([1.0]), bad)


@pytest.mark.property
@settings(max_examples=30, deadline=None)
@given(
    arrays(float, st.integers(0, 12), elements=st.floats(0, 5)),
    st.integers(1, 5000),
    st.integers(0, 2**63 - 1),
    st.integers(2, 6),
)
def test_bootstrap_determinism(thetas, N_b, seed, threads):
    a = bootstrap_null(_weights(thetas), N_b, seed=seed)
    b = bootstrap_null(_weights(thetas), N_b, seed=seed)
    c = bootstrap_null(_weights(thetas), N_b, seed=seed, threads=threads)
    assert a.shape == (N_b,)
    np.testing.assert_array_equal(a, b)
    np.testing.assert_array_equal(a, c)


def test_bootstrap_prefix_stable():
    spectrum = _weights([2.0, 1.0])
    long = bootstrap_null(spectrum, 3000, seed=5)
    np.testing.assert_array_equal(bootstrap_null(spectrum, 1500, seed=5), long[:1500])


def test_p_value_grid_and_monotonicity():
    draws = bootstrap_null(_weights([1.0, 0.5]), 1000, seed=6)
    stats = np.linspace(0, 15, 200)
    ps = np.array([p_value(t, draws) for t in stats])
    assert np.all(np.diff(ps) <= 0)
    assert np.allclose(ps * 1000, np.round(ps * 1000))
    assert p_value(0.0, draws) == 1.0
    assert p_value(np.inf, draws) == 0.0


# -- run_test ----------------------------------------------------------------


@pytest.mark.parametrize("mode", ["sign", "classical", "classical-gauss"])
def test_copy_gives_zero_statistic(mode):
    x = gen_bm(30, 40, seed=14)
    res = run_test(x, Sample(x.grid, x.values.copy()), M=5, N_b=500, mode=mode, seed=1)
    assert res.statistic == 0.0
    assert res.p_value == 1.0
    assert res.null_draws.shape == (500,)


def test_run_test_fields_and_determinism(null_pair):
    a = run_test(*null_pair, M=3, N_b=800, seed=7)
    b = run_test(*null_pair, M=3, N_b=800, seed=7, threads=3)
    assert a.statistic == b.statistic and a.p_value == b.p_value
    np.testing.assert_array_equal(a.null_draws, b.null_draws)
    assert (a.n1, a.n2, a.mode) == (100, 100, "sign")
    assert 0 <= a.p_value <= 1 and a.statistic >= 0
    assert a.statistic <= a.statistic_full + 1e-12
    assert a.p_value == p_value(a.statistic, a.null_draws)


def test_run_test_prepared_reuse(null_pair):
    prep = prepare_pair(*null_pair, "sign")
    a = run_test(*null_pair, M=10, N_b=300, seed=8, prepared=prep)
    b = run_test(*null_pair, M=10, N_b=300, seed=8)
    assert a.statistic == b.statistic and a.p_value == b.p_value
    with pytest.raises(InvalidArgument):
        run_test(*null_pair, M=10, N_b=300, mode="classical", prepared=prep)


def test_projected_statistic_at_full_rank_equals_full():
    a, b = gen_bm(6, 30, seed=15), gen_bm(6, 30, seed=16)
    prep = prepare_pair(a, b, "classical")
    assert prep.projected_statistic(6) == pytest.approx(prep.statistic, rel=1e-10)


def test_detects_large_scale_difference():
    a = gen_bm(30, 80, seed=17)
    b = gen_samples(SimDesign(model="model2", delta=20.0, n1=80, n2=80, m=30, seed=18))[1]
    assert run_test(a, b, M=5, N_b=1000, seed=2).p_value < 0.01
