"""Matrix-model samplers, Gram restrictions and the counting laws they induce."""

from dataclasses import dataclass
import math

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import gammainc

from . import kernels as kn
from . import specfun as sf
from .kernels import PointConfiguration
from .rng import stream

BATCH = 4096


# ------------------------------------------------------------------ samplers

def _complex_normal(rng, shape, var):
    # E|z|^2 = var
    s = math.sqrt(var / 2)
    return s * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def gue_matrices(N, n, rng, t=1.0):
    """n Hermitian matrices with density proportional to exp(-tr H^2 / t)."""
    diag = rng.standard_normal((n, N)) * math.sqrt(t / 2)
    h = np.triu(_complex_normal(rng, (n, N, N), t / 2), 1)
    h = h + np.conj(np.swapaxes(h, 1, 2))
    h[:, np.arange(N), np.arange(N)] = diag
    return h


def _batched(fn, n, seed):
    # fixed-size batches, each with its own stream, so results do not depend on n splits
    out = []
    for b in range(0, n, BATCH):
        out.append(fn(min(BATCH, n - b), stream(seed, b // BATCH)))
    return np.concatenate(out)


def sample_gue_batch(N, n, seed):
    """(n, N) array of sorted GUE eigenvalues, law K_Hermite against N(0, 1/2)."""
    if N < 1:
        raise ValueError("N must be >= 1")
    return _batched(lambda m, rng: np.linalg.eigvalsh(gue_matrices(N, m, rng)), n, seed)


def sample_gue(N, seed):
    return PointConfiguration(sample_gue_batch(N, 1, seed)[0])


def sample_chgue_batch(N, nu, n, seed):
    """(n, N) sorted eigenvalues of M*M, M of size (N+nu) x N with E|m|^2 = 1."""
    if N < 1 or nu < 0 or int(nu) != nu:
        raise ValueError("need N >= 1 and integer nu >= 0")

    def draw(m, rng):
        M = _complex_normal(rng, (m, N + int(nu), N), 1.0)
        return np.linalg.eigvalsh(np.conj(np.swapaxes(M, 1, 2)) @ M)

    return _batched(draw, n, seed)


def sample_chgue(N, nu, seed):
    return PointConfiguration(sample_chgue_batch(N, nu, 1, seed)[0])


def haar_unitary(N, n, rng):
    """n Haar unitaries by QR of complex Ginibre matrices with the phase fix."""
    Z = _complex_normal(rng, (n, N, N), 1.0)
    Q, R = np.linalg.qr(Z)
    d = np.diagonal(R, axis1=1, axis2=2)
    return Q * (d / np.abs(d))[:, None, :]


def sample_cue_batch(N, n, seed):
    """(n, N) sorted eigenangles in [0, 2pi)."""
    if N < 1:
        raise ValueError("N must be >= 1")

    def draw(m, rng):
        ang = np.angle(np.linalg.eigvals(haar_unitary(N, m, rng))) % (2 * np.pi)
        return np.sort(ang, axis=1)

    return _batched(draw, n, seed)


def sample_cue(N, seed):
    return PointConfiguration(sample_cue_batch(N, 1, seed)[0])


def sample_ginibre_batch(N, n, seed):
    """(n, N) complex eigenvalues of matrices with i.i.d. E|z|^2 = 1 entries."""
    if N < 1:
        raise ValueError("N must be >= 1")
    return _batched(lambda m, rng: np.linalg.eigvals(_complex_normal(rng, (m, N, N), 1.0)), n, seed)


def sample_ginibre(N, seed):
    return PointConfiguration(sample_ginibre_batch(N, 1, seed)[0])


# --------------------------------------------------------- Gram restrictions

@dataclass
class GramRestriction:
    """A_{nm} = int_r^inf phi_n phi_m dlambda, computed two ways."""

    matrix: np.ndarray
    closed_form: np.ndarray
    family: str
    r: float
    nu: float = 0.0

    @property
    def discrepancy(self):
        return float(np.max(np.abs(self.matrix - self.closed_form)))

    def eigenvalues(self):
        return np.linalg.eigvalsh(self.matrix)


def _panels(a, b, width, order=200):
    npan = max(1, int(math.ceil((b - a) / width)))
    t, w = leggauss(order)
    edges = np.linspace(a, b, npan + 1)
    h = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    return (mid[:, None] + h[:, None] * t).ravel(), (h[:, None] * w).ravel()


def gram_quadrature(family, N, r, nu=0.0):
    if family == "hermite":
        top = math.sqrt(2 * N + 1) + 12.0
        a, b = max(r, -top), top
        if a >= b:
            return np.zeros((N, N))
        x, w = _panels(a, b, 2.0)
        psi = sf.hermite_table(N - 1, x, weighted=True)
    else:
        top = 4 * N + 2 * nu + 80.0
        a, b = r, max(r, top)
        x, w = _panels(a, b, 4.0)
        psi = sf.laguerre_table(N - 1, nu, x, weighted=True)
    return (psi * w) @ psi.T


def gram_closed(family, N, r, nu=0.0):
    n, m = np.meshgrid(np.arange(N), np.arange(N), indexing="ij")
    if family == "hermite":
        A = kn.discrete_hermite_offdiag(r, n, m)
        A[np.diag_indices(N)] = kn.discrete_hermite_diag(r, N - 1)
    else:
        A = kn.discrete_laguerre_offdiag(r, nu, n, m)
        A[np.diag_indices(N)] = kn.discrete_laguerre_diag(r, nu, N - 1)
    return A


def gram_restriction(family, N, r, nu=0.0):
    """Gram matrix of the first N orthonormal functions on [r, inf).

    The quadrature matrix is the one used downstream; the closed form rides
    along so callers can check the two agree.
    """
    if family not in ("hermite", "laguerre"):
        raise ValueError("family must be 'hermite' or 'laguerre'")
    if not 1 <= N <= 30:
        raise ValueError("N must be in 1..30")
    if family == "laguerre" and not r > 0:
        raise ValueError("Laguerre restriction needs r > 0")
    A = gram_quadrature(family, N, r, nu)
    if not np.all(np.isfinite(A)):
        raise ArithmeticError("quadrature did not converge")
    return GramRestriction(A, gram_closed(family, N, r, nu), family, r, nu)


# ------------------------------------------------------------ counting laws

@dataclass
class CountingLaw:
    bernoulli_params: np.ndarray
    pmf: np.ndarray

    def mean(self):
        return float(np.dot(np.arange(len(self.pmf)), self.pmf))


def poisson_binomial(p):
    """pmf of a sum of independent Bernoulli(p_i), by convolution."""
    pmf = np.zeros(len(p) + 1)
    pmf[0] = 1.0
    for k, q in enumerate(p):
        pmf[1:k + 2] = pmf[1:k + 2] * (1 - q) + pmf[:k + 1] * q
        pmf[0] *= 1 - q
    return pmf


def counting_law(gram):
    """Law of the number of points in the window: Poisson-binomial of the Gram spectrum."""
    ev = gram.eigenvalues() if isinstance(gram, GramRestriction) else np.linalg.eigvalsh(gram)
    if np.any(ev < -1e-8) or np.any(ev > 1 + 1e-8):
        raise ValueError("Gram eigenvalues outside [0, 1]")
    ev = np.clip(ev, 0.0, 1.0)
    return CountingLaw(ev, poisson_binomial(ev))


def ginibre_radial_law(r, n_max=None):
    """Bernoulli parameters P(Po(r^2) >= n+1), n = 0..n_max, and their sum law."""
    if not r > 0:
        raise ValueError("r must be positive")
    r2 = r * r
    need = r2 + 10 * r
    if n_max is None:
        n_max = int(math.ceil(need)) + 20
    if n_max < need:
        raise ValueError("n_max too small for the truncation tolerance")
    lam = gammainc(np.arange(n_max + 1) + 1.0, r2)
    tail = float(np.sum(gammainc(np.arange(n_max + 1, n_max + 400) + 1.0, r2)))
    if tail > 1e-10:
        raise ValueError("truncation tail mass too large; raise n_max")
    return CountingLaw(lam, poisson_binomial(lam))


def empirical_law(counts, size):
    return np.bincount(np.asarray(counts, dtype=int), minlength=size + 1)[: size + 1] / len(counts)


def total_variation(p, q):
    n = max(len(p), len(q))
    p = np.pad(p, (0, n - len(p)))
    q = np.pad(q, (0, n - len(q)))
    return 0.5 * float(np.sum(np.abs(p - q)))


# ---------------------------------------------------------------- estimators

@dataclass
class BinnedEstimate:
    edges: object
    value: np.ndarray
    stderr: np.ndarray
    empty: np.ndarray


def estimate_correlation(samples, order, bins, weights=None):
    """Binned rho^1 or rho^2 against Lebesgue measure.

    samples is a sequence of point arrays (or an (n, N) array). For order 2
    ``bins`` is applied to both coordinates and ordered pairs i != j are
    counted. ``weights`` (one per sample) gives a weighted estimator.
    """
    samples = [np.asarray(s) for s in samples]
    n = len(samples)
    if n < 1000:
        raise ValueError("need at least 1000 samples")
    wts = np.ones(n) if weights is None else np.asarray(weights, float)
    if order == 1:
        edges = np.asarray(bins, float)
        width = np.diff(edges)
        per = np.array([np.histogram(s, edges)[0] for s in samples], float) * wts[:, None]
        val = per.mean(axis=0) / width
        se = per.std(axis=0, ddof=1) / math.sqrt(n) / width
        return BinnedEstimate(edges, val, se, per.sum(axis=0) == 0)
    if order == 2:
        edges = np.asarray(bins, float)
        width = np.diff(edges)
        area = np.outer(width, width)
        per = np.empty((n, len(width), len(width)))
        for k, s in enumerate(samples):
            i, j = np.nonzero(~np.eye(len(s), dtype=bool))
            per[k] = np.histogram2d(s[i], s[j], [edges, edges])[0] * wts[k]
        val = per.mean(axis=0) / area
        se = per.std(axis=0, ddof=1) / math.sqrt(n) / area
        return BinnedEstimate(edges, val, se, per.sum(axis=0) == 0)
    raise ValueError("order must be 1 or 2")


def bin_average(fn, edges, sub=16):
    """Average of fn over each bin (midpoint rule on sub points)."""
    edges = np.asarray(edges, float)
    t = (np.arange(sub) + 0.5) / sub
    pts = edges[:-1, None] + np.diff(edges)[:, None] * t
    return fn(pts).mean(axis=1)


def bin_average_2d(fn, edges, sub=8):
    edges = np.asarray(edges, float)
    t = (np.arange(sub) + 0.5) / sub
    pts = edges[:-1, None] + np.diff(edges)[:, None] * t
    X = pts[:, None, :, None]
    Y = pts[None, :, None, :]
    return fn(X, Y).mean(axis=(2, 3))
