import math

import numpy as np
import pytest
from scipy import stats
from scipy.integrate import quad

from dpplab import dsp
from dpplab import kernels as K
from dpplab.kernels import KernelSpec
from dpplab.rng import stream

BM = dsp.InitialConfig("bm", [-0.5, 0.5])
BESQ = dsp.InitialConfig("besq", [0.3, 1.5], nu=0.5)
CIRC = dsp.InitialConfig("circle", [0.5, 2.5])


def within(a, b, se, k=3.0):
    return abs(a - b) < k * se


def test_initial_config_validation():
    with pytest.raises(ValueError):
        dsp.InitialConfig("bm", [1.0, 0.0])
    with pytest.raises(ValueError):
        dsp.InitialConfig("circle")
    with pytest.raises(ValueError):
        dsp.InitialConfig("circle", [0.0, 7.0])
    with pytest.raises(ValueError):
        dsp.InitialConfig("besq", [-0.1, 1.0])
    with pytest.raises(ValueError):
        dsp.InitialConfig("heat", [0.0])
    assert dsp.InitialConfig("bm", N=3).multiple


def test_heat_moment_examples():
    x = np.linspace(-3, 3, 7)
    assert np.allclose(dsp.heat_moment(0, 0.7, x), 1)
    assert np.allclose(dsp.heat_moment(1, 0.7, x), x)
    assert np.allclose(dsp.heat_moment(2, 0.7, x), x * x - 0.7)
    assert np.allclose(dsp.heat_moment(3, 0.7, x), x ** 3 - 3 * 0.7 * x)
    with pytest.raises(ValueError):
        dsp.heat_moment(1, 0.0, x)


def test_laguerre_moment_examples():
    x = np.linspace(0, 5, 6)
    assert np.allclose(dsp.laguerre_moment(0, 0.5, 0.3, x), 1)
    assert np.allclose(dsp.laguerre_moment(1, 0.5, 0.3, x), x - 2 * 1.5 * 0.3)
    with pytest.raises(ValueError):
        dsp.laguerre_moment(1, 0.5, -1.0, x)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_heat_polynomials_are_martingales(n):
    rng = stream(1, n)
    x, t = 0.7, 1.3
    y = dsp.heat_moment(n, t, x + math.sqrt(t) * rng.standard_normal(100000))
    assert within(y.mean(), x ** n, y.std() / math.sqrt(len(y)))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_laguerre_moments_are_martingales(n):
    rng = stream(2, n)
    x, t, nu = 0.8, 0.6, 0.5
    y = dsp.laguerre_moment(n, nu, t, t * rng.noncentral_chisquare(2 * (nu + 1), x / t, 100000))
    assert within(y.mean(), x ** n, y.std() / math.sqrt(len(y)))


def test_martingale_fn_examples():
    one = dsp.InitialConfig("bm", [0.4])
    assert np.allclose(dsp.martingale_fn(one, 0.4, 0.5, np.linspace(-2, 2, 5)), 1)
    x = np.linspace(-2, 2, 5)
    assert np.allclose(dsp.martingale_fn(BM, -0.5, 0.9, x), (x - 0.5) / (-1.0))
    with pytest.raises(ValueError):
        dsp.martingale_fn(BM, 0.2, 0.5, x)


@pytest.mark.parametrize("xi", [BM, BESQ, CIRC, dsp.InitialConfig("circle", [0.3, 2.0, 4.0]),
                                dsp.InitialConfig("bm", [-1.0, 0.3, 1.2])])
def test_martingale_fn_interpolates_at_zero(xi):
    M = np.array([[dsp.martingale_fn(xi, v, 0, u) for u in xi.points] for v in xi.points])
    assert np.allclose(M, np.eye(xi.N), atol=1e-12)


@pytest.mark.parametrize("xi", [dsp.InitialConfig("bm", [-1.0, 0.3, 1.2]),
                                dsp.InitialConfig("besq", [0.2, 1.0, 2.5], nu=0.5),
                                dsp.InitialConfig("circle", [0.3, 2.0, 4.0]),
                                dsp.InitialConfig("circle", [0.3, 2.0, 4.0, 5.5])])
def test_martingale_property(xi):
    times = [0.5, 1.0, 2.0]
    Y = dsp.sample_independent(xi, times, 100000, stream(3, xi.N))
    for k, t in enumerate(times):
        for a, v in enumerate(xi.points):
            for j in range(xi.N):
                m = dsp.martingale_fn(xi, v, t, Y[:, k, j])
                assert within(m.mean(), float(a == j), m.std() / math.sqrt(len(m)) + 1e-12, 3.5)


@pytest.mark.parametrize("xi", [BM, BESQ, CIRC])
def test_martingale_short_time_limit(xi):
    Y = dsp.sample_independent(xi, [1e-3], 100000, stream(4, 0))[:, 0]
    for a, v in enumerate(xi.points):
        for j in range(xi.N):
            m = dsp.martingale_fn(xi, v, 1e-3, Y[:, j])
            assert within(m.mean(), float(a == j), m.std() / math.sqrt(len(m)) + 1e-12)


def test_det_martingale_examples():
    one = dsp.InitialConfig("bm", [0.0])
    assert np.allclose(dsp.det_martingale(one, 1.0, np.array([[0.3], [2.0]])), 1)
    for xi in (BM, BESQ, CIRC):
        assert dsp.det_martingale(xi, 1e-9, xi.points) == pytest.approx(1, abs=1e-6)
        y = xi.points + np.array([0.1, 0.3])
        assert dsp.det_martingale(xi, 0.5, y) == pytest.approx(-dsp.det_martingale(xi, 0.5, y[::-1]))
    with pytest.raises(ValueError):
        dsp.det_martingale(BM, 0.5, np.zeros(3))


def test_multipoint_martingale_normalization():
    rng = stream(5, 0)
    for process, N, nu in (("bm", 3, 0.0), ("besq", 3, 0.5)):
        for t in (0.5, 1.0, 2.0):
            if process == "bm":
                y = math.sqrt(t) * rng.standard_normal(100000)
            else:
                y = t * rng.chisquare(2 * (nu + 1), 100000)
            m = dsp.multipoint_martingale(process, N, 0.8, 0.4, t, y, nu=nu)
            assert within(m.mean(), 1.0, m.std() / math.sqrt(len(m)))


def test_transition_densities():
    y = np.linspace(-3, 9, 11)
    for N in (3, 4):
        a = dsp.p_circle(0.4, y, 0.5, 1.3, N)
        assert np.allclose(a, dsp.p_circle_fourier(0.4, y, 0.5, 1.3, N), atol=1e-13)
    # even N kernel flips sign across one turn
    per = 2 * math.pi * 1.3
    assert dsp.p_circle(0.4, 1.0 + per, 0.5, 1.3, 4) == pytest.approx(-dsp.p_circle(0.4, 1.0, 0.5, 1.3, 4))
    for u in (0.0, 0.3, 1.5):
        assert quad(lambda v: dsp.p_besq(0.4, v, u, 0.5), 0, np.inf)[0] == pytest.approx(1, abs=1e-10)
        v = np.array([0.2, 1.0, 3.0])
        ref = stats.ncx2.pdf(v / 0.4, 3.0, u / 0.4) / 0.4 if u > 0 else stats.chi2.pdf(v / 0.4, 3.0) / 0.4
        assert np.allclose(dsp.p_besq(0.4, v, u, 0.5), ref, rtol=1e-10)


def _herm_scaled(N, t):
    return K.transform_kernel(KernelSpec.hermite(N), "dilate", math.sqrt(2 * t))


def test_extended_hermite_equal_time():
    N, t = 4, 0.7
    xi = dsp.InitialConfig("bm", N=N)
    x, y = np.array([0.3, 1.1]), np.array([-0.8, 0.2])
    k = dsp.st_kernel(xi, t, x, t, y)
    gauge = np.sqrt(dsp.p_bm(t, x, 0) * dsp.p_bm(t, y, 0))
    ref = K.lebesgue_kernel(_herm_scaled(N, t), x, y)
    assert np.allclose(k * gauge, ref, atol=1e-12)
    # Hermitian in the symmetric gauge, trace N
    assert np.allclose(k, dsp.st_kernel(xi, t, y, t, x), atol=1e-12)
    tr = quad(lambda v: dsp.st_kernel(xi, t, v, t, v) * dsp.p_bm(t, v, 0), -20, 20)[0]
    assert tr == pytest.approx(N, abs=1e-8)


def test_extended_laguerre_equal_time():
    N, t, nu = 3, 0.7, 0.5
    xi = dsp.InitialConfig("besq", N=N, nu=nu)
    x, y = np.array([1.3, 0.2]), np.array([1.2, 2.5])
    k = dsp.st_kernel(xi, t, x, t, y)
    gauge = np.sqrt(dsp.p_besq(t, x, 0, nu) * dsp.p_besq(t, y, 0, nu))
    ref = K.lebesgue_kernel(K.transform_kernel(KernelSpec.laguerre(N, nu), "dilate", 2 * t), x, y)
    assert np.allclose(k * gauge, ref, atol=1e-12)
    tr = quad(lambda v: dsp.st_kernel(xi, t, v, t, v) * dsp.p_besq(t, v, 0, nu), 0, 80, limit=200)[0]
    assert tr == pytest.approx(N, abs=1e-8)


def test_extended_tail_truncation():
    x = np.array([0.4])
    a = dsp.extended_hermite(3, 1.0, x, 0.5, x, terms=500)
    b = dsp.extended_hermite(3, 1.0, x, 0.5, x, terms=1000)
    assert abs(a - b) < 1e-10
    assert np.allclose(dsp.extended_hermite(3, 1.0, x, 0.5, x), b, atol=1e-10)
    assert np.all(a < 0) or np.all(a > 0)


def test_extended_kernel_reproduces_transition():
    # head (n < N) plus the negated s > t branch is the full Mehler sum, which
    # in this gauge is p(s - t, x|y) / p(s, x|0)
    from dpplab import specfun as sf

    N, s, t = 3, 1.0, 0.5
    x, y = 0.4, -0.3
    w = (t / s) ** (np.arange(N) / 2)
    head = np.sum(w * sf.hermite_table(N - 1, x / math.sqrt(2 * s)) * sf.hermite_table(N - 1, y / math.sqrt(2 * t)))
    tail = -dsp.extended_hermite(N, s, x, t, y)
    assert head + tail == pytest.approx(dsp.p_bm(s - t, x, y) / dsp.p_bm(s, x, 0), rel=1e-9)


def test_relaxation_two_routes():
    for N in (3, 4):
        for s, t in ((0.5, 0.7), (0.9, 0.3), (0.6, 0.6)):
            a = dsp.relaxation_kernel(N, 1.2, s, 1.1, t, 2.3)
            b = dsp.relaxation_kernel_triple(N, 1.2, s, 1.1, t, 2.3)
            assert abs(a - b) < 1e-10


def test_relaxation_reaches_equilibrium():
    N, r = 4, 1.0
    x = np.linspace(0.1, 6.0, 7)
    y = x[::-1]
    k = dsp.relaxation_kernel(N, r, 40.0, x, 40.0, y)
    assert np.allclose(k, dsp.equilibrium_kernel(N, r, x, y), atol=1e-10)
    assert np.allclose(dsp.equilibrium_kernel(N, r, x, x), N)


def test_st_kernel_simple_start_density():
    for xi, lo, hi in ((BM, -15, 15), (BESQ, 0, 60)):
        for t in (0.3, 1.0):
            tr = quad(lambda v: dsp.st_kernel(xi, t, np.array([v]), t, np.array([v]))[0], lo, hi, limit=200)[0]
            assert tr == pytest.approx(xi.N, abs=1e-7)
    per = 2 * math.pi * CIRC.radius
    tr = quad(lambda v: dsp.st_kernel(CIRC, 0.5, np.array([v]), 0.5, np.array([v]))[0], 0, per, limit=200)[0]
    assert tr == pytest.approx(CIRC.N, abs=1e-7)


def test_st_kernel_errors():
    with pytest.raises(ValueError):
        dsp.st_kernel(BM, 0.0, 0.1, 1.0, 0.2)


def _both_in(Y):
    return np.all(np.abs(Y[:, 0, :]) <= 1, axis=1).astype(float)


def test_dmr_single_particle():
    xi = dsp.InitialConfig("bm", [0.2])
    r = dsp.dmr_expectation(xi, lambda Y: np.cos(Y[:, -1, 0]), [1.0], 20000, 1)
    assert abs(r.z) < 3
    assert r.weighted == pytest.approx(math.cos(0.2) * math.exp(-0.5), abs=3 * r.weighted_se)


def test_dmr_dyson_indicator():
    r = dsp.dmr_expectation(BM, _both_in, [0.5], 100000, 2)
    assert abs(r.z) < 3


def test_dmr_rejects_large_problems():
    with pytest.raises(ValueError):
        dsp.dmr_expectation(dsp.InitialConfig("bm", [0, 1, 2, 3, 4.0]), _both_in, [0.5], 10, 1)


@pytest.mark.parametrize("xi,F,lo,hi", [
    (BM, lambda y: y ** 2, -20, 20),
    (BESQ, lambda y: np.exp(-y), 0, 60),
    (CIRC, np.cos, 0, 2 * math.pi),
])
def test_reducibility(xi, F, lo, hi):
    t, T = 0.4, 1.0
    left, lse, right, rse = dsp.reducibility(xi, F, t, T, 200000, 1)
    assert within(left, right, math.hypot(lse, rse))
    # both sides equal the one-point density integral of F
    exact = quad(lambda v: dsp.st_kernel(xi, t, np.array([v]), t, np.array([v]))[0] * F(v), lo, hi, limit=200)[0]
    assert within(left, exact, lse)
    assert within(right, exact, rse)
