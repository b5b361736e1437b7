import math

import numpy as np
import pytest
from scipy import stats

from dpplab import dpp
from dpplab import kernels as K
from dpplab.kernels import KernelSpec


def test_samplers_are_deterministic():
    a = dpp.sample_gue_batch(3, 10, seed=5)
    b = dpp.sample_gue_batch(3, 10, seed=5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, dpp.sample_gue_batch(3, 10, seed=6))
    assert np.array_equal(dpp.sample_gue(3, 5).positions, dpp.sample_gue(3, 5).positions)


def test_gue_one_by_one_variance():
    x = dpp.sample_gue_batch(1, 100000, 1)[:, 0]
    se = 0.5 * math.sqrt(2 / len(x))
    assert abs(x.var() - 0.5) < 3 * se


def test_gue_two_by_two_centered():
    x = dpp.sample_gue_batch(2, 50000, 2)
    s = x.sum(axis=1)
    assert abs(s.mean()) < 3 * s.std() / math.sqrt(len(s))
    assert x[:, 1].mean() > 0


def test_gue_density_matches_kernel():
    N = 8
    x = dpp.sample_gue_batch(N, 100000, 3)
    edges = np.linspace(-4.5, 4.5, 19)
    est = dpp.estimate_correlation(x, 1, edges)
    spec = KernelSpec.hermite(N)
    ref = dpp.bin_average(lambda p: np.real(K.lebesgue_kernel(spec, p, p)), edges)
    assert np.max(np.abs(est.value - ref)) < 0.02


@pytest.mark.parametrize("nu,mean", [(0, 1.0), (2, 3.0)])
def test_chgue_single(nu, mean):
    x = dpp.sample_chgue_batch(1, nu, 50000, 4)[:, 0]
    assert abs(x.mean() - mean) < 3 * x.std() / math.sqrt(len(x))


def test_chgue_density_matches_kernel():
    x = dpp.sample_chgue_batch(6, 1, 20000, 5)
    edges = np.linspace(0, 30, 31)
    est = dpp.estimate_correlation(x, 1, edges)
    spec = KernelSpec.laguerre(6, 1.0)
    ref = dpp.bin_average(lambda p: np.real(K.lebesgue_kernel(spec, p, p)), edges)
    assert np.max(np.abs(est.value - ref)) < 0.02


def test_cue_single_is_uniform():
    x = dpp.sample_cue_batch(1, 100000, 6)[:, 0]
    assert stats.kstest(x / (2 * math.pi), "uniform").pvalue > 0.01


def test_cue_pair_correlation():
    N = 4
    x = dpp.sample_cue_batch(N, 20000, 7)
    edges = np.linspace(0, 2 * math.pi, 13)
    est = dpp.estimate_correlation(x, 2, edges)
    spec = KernelSpec.root_system("A", N)

    def rho2(a, b):
        k = K.eval_kernel(spec, a, b)
        return (N * N - np.abs(k) ** 2) / (2 * math.pi) ** 2

    ref = dpp.bin_average_2d(rho2, edges)
    assert np.max(np.abs(est.value - ref)) < 0.03
    gaps = np.diff(np.concatenate([x, x[:, :1] + 2 * math.pi], axis=1), axis=1)
    assert gaps.mean() == pytest.approx(2 * math.pi / N)


def test_ginibre_bulk():
    z = dpp.sample_ginibre_batch(64, 3000, 8)
    for r in (1.0, 2.0, 4.0):
        c = (np.abs(z) <= r).sum(axis=1)
        assert abs(c.mean() / r ** 2 - 1) < 0.03
    one = dpp.sample_ginibre_batch(1, 50000, 9)[:, 0]
    m = np.abs(one) ** 2
    assert abs(m.mean() - 1) < 3 * m.std() / math.sqrt(len(m))


def test_ginibre_radial_density_flat():
    z = dpp.sample_ginibre_batch(64, 3000, 10)
    edges = np.linspace(0.5, 4.0, 8)
    counts = np.histogram(np.abs(z).ravel(), edges)[0] / len(z)
    dens = counts / (math.pi * np.diff(edges ** 2))
    assert np.max(np.abs(dens * math.pi - 1)) < 0.05


def test_gram_examples():
    g = dpp.gram_restriction("hermite", 1, 0.0)
    assert g.matrix[0, 0] == pytest.approx(0.5, abs=1e-12)
    far = dpp.gram_restriction("hermite", 10, -50.0)
    assert np.allclose(far.matrix, np.eye(10), atol=1e-12)
    g = dpp.gram_restriction("hermite", 5, 0.7)
    assert g.discrepancy < 1e-8
    with pytest.raises(ValueError):
        dpp.gram_restriction("laguerre", 4, 0.0)
    with pytest.raises(ValueError):
        dpp.gram_restriction("hermite", 31, 0.0)


@pytest.mark.parametrize("family,N,r,nu", [
    ("hermite", 30, 1.5, 0.0), ("hermite", 17, -2.0, 0.0), ("laguerre", 6, 2.0, 1.0),
    ("laguerre", 30, 10.0, 0.0), ("laguerre", 20, 0.3, -0.5),
])
def test_gram_two_routes_agree(family, N, r, nu):
    g = dpp.gram_restriction(family, N, r, nu)
    assert g.discrepancy < 1e-8
    ev = g.eigenvalues()
    assert ev.min() > -1e-8 and ev.max() < 1 + 1e-8


def test_counting_law():
    law = dpp.counting_law(dpp.gram_restriction("hermite", 1, 0.0))
    assert law.pmf[1] == pytest.approx(0.5)
    full = dpp.counting_law(np.eye(4))
    assert full.pmf[4] == pytest.approx(1) and full.pmf[:4].sum() == pytest.approx(0)
    g = dpp.gram_restriction("hermite", 8, 0.3)
    law = dpp.counting_law(g)
    assert law.mean() == pytest.approx(np.trace(g.matrix), abs=1e-10)
    assert law.pmf.sum() == pytest.approx(1, abs=1e-12)
    with pytest.raises(ValueError):
        dpp.counting_law(np.diag([1.2, 0.1]))


def test_poisson_binomial_against_enumeration():
    p = np.array([0.1, 0.5, 0.9, 0.33])
    ref = np.zeros(5)
    for bits in range(16):
        b = [(bits >> i) & 1 for i in range(4)]
        ref[sum(b)] += np.prod([q if s else 1 - q for q, s in zip(p, b)])
    assert np.allclose(dpp.poisson_binomial(p), ref, atol=1e-15)


def test_duality_small_sample():
    x = dpp.sample_gue_batch(8, 20000, 11)
    law = dpp.counting_law(dpp.gram_restriction("hermite", 8, 0.0))
    emp = dpp.empirical_law((x >= 0).sum(axis=1), 8)
    assert dpp.total_variation(emp, law.pmf) < 0.02


def test_ginibre_radial_law():
    for r in (0.5, 1.0, 3.0):
        law = dpp.ginibre_radial_law(r)
        assert law.bernoulli_params[0] == pytest.approx(1 - math.exp(-r * r))
        assert law.bernoulli_params.sum() == pytest.approx(r * r, abs=1e-10)
        assert law.mean() == pytest.approx(r * r, abs=1e-9)
    a = dpp.ginibre_radial_law(1.0).bernoulli_params
    b = dpp.ginibre_radial_law(1.5, n_max=len(a) - 1).bernoulli_params
    assert np.all(b >= a)
    tiny = dpp.ginibre_radial_law(1e-4)
    assert tiny.pmf[0] == pytest.approx(1, abs=1e-7)
    with pytest.raises(ValueError):
        dpp.ginibre_radial_law(3.0, n_max=10)


def test_estimator_independence():
    rng = np.random.default_rng(0)
    s = rng.uniform(0, 1, (20000, 3))
    edges = np.linspace(0, 1, 6)
    r1 = dpp.estimate_correlation(s, 1, edges)
    r2 = dpp.estimate_correlation(s, 2, edges)
    # i.i.d. points: rho2 = (n(n-1)/n^2) rho1 x rho1
    ref = np.outer(r1.value, r1.value) * 6 / 9
    assert np.all(np.abs(r2.value - ref) < 3 * r2.stderr + 0.05)
    with pytest.raises(ValueError):
        dpp.estimate_correlation(s[:10], 1, edges)
