"""Determinantal martingales and spatio-temporal kernels for three processes.

Processes: "bm" (noncolliding Brownian motion / Dyson beta=2), "besq"
(noncolliding squared Bessel / Bru-Wishart beta=2 with index nu) and
"circle" (noncolliding Brownian motion on the circle of radius r).
"""

from dataclasses import dataclass
import math

import numpy as np

from . import specfun as sf
from . import loggas
from .rng import stream

PROCESSES = ("bm", "besq", "circle")


@dataclass
class InitialConfig:
    process: str
    points: object = None  # None: all N particles at the origin
    N: int = 0
    nu: float = 0.0
    radius: float = 1.0

    def __post_init__(self):
        if self.process not in PROCESSES:
            raise ValueError(f"process must be one of {PROCESSES}")
        if self.points is None:
            if self.process == "circle":
                raise ValueError("circle process needs explicit points")
            if self.N < 1:
                raise ValueError("give N for the multiple-point start")
        else:
            u = np.asarray(self.points, float)
            if np.any(np.diff(u) <= 0):
                raise ValueError("support points must be strictly increasing")
            if self.process == "besq" and u[0] < 0:
                raise ValueError("squared Bessel points must be >= 0")
            if self.process == "circle" and (u[0] < 0 or u[-1] >= 2 * math.pi * self.radius):
                raise ValueError("circle points must lie in [0, 2 pi r)")
            self.points = u
            self.N = len(u)
        if self.process == "besq" and not self.nu > -1:
            raise ValueError("nu must be > -1")

    @property
    def multiple(self):
        return self.points is None

    def gas(self):
        """The interacting system whose law the determinantal martingale represents."""
        model = {"bm": "dyson", "besq": "bru_wishart", "circle": "circular"}[self.process]
        return loggas.GasConfig(model, self.N, beta=2.0, nu=self.nu, radius=self.radius,
                                initial=None if self.multiple else self.points)


# --------------------------------------------------------- moment transforms

def _check_t(t):
    if np.any(np.asarray(t) <= 0):
        raise ValueError("t must be positive")


def heat_moment(n, t, x):
    """m_n(t, x) = (t/2)^{n/2} H_n(x / sqrt(2t)), so that m_n(t, B_t) is a martingale."""
    _check_t(t)
    t = np.asarray(t, float)
    return (t / 2) ** (n / 2) * sf.hermite(n, np.asarray(x, float) / np.sqrt(2 * t))


def laguerre_moment(n, nu, t, x):
    """(-1)^n n! (2t)^n L_n^nu(x / 2t), the squared-Bessel analogue."""
    _check_t(t)
    t = np.asarray(t, float)
    return (-1) ** n * math.factorial(n) * (2 * t) ** n * sf.laguerre(n, nu, np.asarray(x, float) / (2 * t))


def exp_moment(alpha, t, x):
    """exp(i alpha x + alpha^2 t / 2): the martingale version of exp(i alpha x)."""
    return np.exp(1j * alpha * np.asarray(x, float) + 0.5 * alpha * alpha * np.asarray(t, float))


# ------------------------------------------------------ martingale functions

def _poly_coeffs(xi, k):
    # monomial coefficients (low degree first) of prod_{j != k} (z - u_j)/(u_k - u_j)
    u = xi.points
    others = np.delete(u, k)
    c = np.poly(others)[::-1] if len(others) else np.array([1.0])
    return c / np.prod(u[k] - others)


def _exp_coeffs(xi, k):
    # prod_{j != k} sin((z - u_j)/2r) / sin((u_k - u_j)/2r) as sum_m c_m exp(i m z / 2r)
    u, r = xi.points, xi.radius
    coef = {0: 1.0 + 0j}
    for j in range(len(u)):
        if j == k:
            continue
        a = np.exp(-1j * u[j] / (2 * r))
        nxt = {}
        for m, c in coef.items():
            # sin(w) = (e^{iw} - e^{-iw}) / 2i with w = (z - u_j)/2r
            nxt[m + 1] = nxt.get(m + 1, 0) + c * a / 2j
            nxt[m - 1] = nxt.get(m - 1, 0) - c * np.conj(a) / 2j
        coef = nxt
    den = np.prod([math.sin((u[k] - u[j]) / (2 * r)) for j in range(len(u)) if j != k])
    return {m: c / den for m, c in coef.items()}


def _index(xi, v):
    hits = np.nonzero(np.isclose(xi.points, v, rtol=0, atol=1e-12))[0]
    if hits.size == 0:
        raise ValueError(f"{v} is not a support point")
    return int(hits[0])


def martingale_fn(xi, v, t, x):
    """M_xi^v(t, x); at t = 0 this is the entire function Phi_xi^v(x)."""
    if xi.multiple:
        raise ValueError("use multipoint_martingale for the multiple-point start")
    k = _index(xi, v)
    x = np.asarray(x, float)
    if xi.process == "circle":
        out = np.zeros(x.shape, complex)
        for m, c in _exp_coeffs(xi, k).items():
            a = m / (2 * xi.radius)
            out += c * (np.exp(1j * a * x) if t == 0 else exp_moment(a, t, x))
        return out.real
    c = _poly_coeffs(xi, k)
    if t == 0:
        return np.polyval(c[::-1], x)
    mom = heat_moment if xi.process == "bm" else (lambda n, t, x: laguerre_moment(n, xi.nu, t, x))
    return sum(cn * mom(n, t, x) for n, cn in enumerate(c))


def det_martingale(xi, T, Y):
    """D_xi(T, Y) = det[M_xi^{u_k}(T, Y_j)]; Y has shape (..., N)."""
    Y = np.asarray(Y, float)
    if Y.shape[-1] != xi.N:
        raise ValueError("Y must have N coordinates")
    cols = [martingale_fn(xi, u, T, Y) for u in xi.points]
    mat = np.stack(cols, axis=-1)  # [..., j, k]
    d = np.linalg.det(mat)
    if not np.all(np.isfinite(d)):
        raise ArithmeticError("non-finite determinantal martingale")
    return d


def _weighted_sum(w, a, b):
    # sum_n w_n a_n(x) b_n(y) with x and y broadcast against each other
    a = np.asarray(a)
    b = np.asarray(b)
    nd = max(a.ndim, b.ndim)
    a = a.reshape(a.shape + (1,) * (nd - a.ndim))
    b = b.reshape(b.shape + (1,) * (nd - b.ndim))
    return np.sum(np.reshape(w, (-1,) + (1,) * (nd - 1)) * a * b, axis=0)


def multipoint_martingale(process, N, s, x, t, Y, nu=0.0):
    """Martingale function of the N-fold origin start, indexed by (s, x).

    For the Brownian case: sum_{n<N} (t/s)^{n/2} phi_n(x/sqrt(2s)) phi_n(Y/sqrt(2t)).
    """
    Y = np.asarray(Y, float)
    if process == "bm":
        a = sf.hermite_table(N - 1, np.asarray(x, float) / math.sqrt(2 * s))
        b = sf.hermite_table(N - 1, Y / np.sqrt(2 * t))
        w = (t / s) ** (np.arange(N) / 2)
    elif process == "besq":
        a = sf.laguerre_table(N - 1, nu, np.asarray(x, float) / (2 * s))
        b = sf.laguerre_table(N - 1, nu, Y / (2 * t))
        w = (t / s) ** np.arange(N, dtype=float)
    else:
        raise ValueError("multiple-point start only for bm and besq")
    return _weighted_sum(w, a, b)


# ----------------------------------------------------- transition densities

def p_bm(t, y, x):
    return np.exp(-(np.asarray(y) - x) ** 2 / (2 * t)) / np.sqrt(2 * math.pi * t)


def p_besq(t, y, x, nu):
    """Transition density of BESQ with index nu from x to y (x = 0 allowed)."""
    y = np.asarray(y, float)
    x = np.asarray(x, float)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.sqrt(x * y) / t
        # e^{-(x+y)/2t} I_nu(z) = e^{-(sqrt x - sqrt y)^2 / 2t} e^{-z} I_nu(z)
        main = (0.5 / t) * (y / np.where(x > 0, x, 1.0)) ** (nu / 2) * np.exp(
            -(np.sqrt(x) - np.sqrt(y)) ** 2 / (2 * t)) * sf.bessel_i_scaled(nu, z)
        origin = y ** nu * np.exp(-y / (2 * t)) / ((2 * t) ** (nu + 1) * sf.gamma(nu + 1.0))
    return np.where(x > 0, main, origin)


def p_circle(t, y, x, radius, N):
    """Signed circle kernel: wrapped heat kernel with (-1)^l windings for even N."""
    sign = -1.0 if N % 2 == 0 else 1.0
    period = 2 * math.pi * radius
    L = int(math.ceil(math.sqrt(60 * t) / period)) + 2
    d = np.asarray(y, float) - x
    tot = np.zeros(np.shape(d))
    for l in range(-L, L + 1):
        tot = tot + sign ** abs(l) * np.exp(-(d + period * l) ** 2 / (2 * t))
    return tot / math.sqrt(2 * math.pi * t)


def p_circle_fourier(t, y, x, radius, N):
    """Same kernel from its Fourier series; |sigma| <= r sqrt(40/t) + 5."""
    shift = 0.0 if N % 2 else 0.5
    top = int(math.ceil(radius * math.sqrt(40 / t))) + 5
    sig = np.arange(-top, top + 1) + shift
    d = np.asarray(y, float) - x
    terms = np.exp(-sig ** 2 * t / (2 * radius ** 2))[:, None] * np.cos(np.outer(sig, np.ravel(d)) / radius)
    return (terms.sum(axis=0) / (2 * math.pi * radius)).reshape(np.shape(d))


def transition(xi, t, y, x):
    if xi.process == "bm":
        return p_bm(t, y, x)
    if xi.process == "besq":
        return p_besq(t, y, x, xi.nu)
    return p_circle(t, y, x, xi.radius, xi.N)


# ----------------------------------------------------- spatio-temporal kernels

def _series_terms(ratio, cap=20000):
    # enough terms for ratio^n < 1e-13, at least 50
    if ratio >= 1:
        raise ValueError("tail series needs s > t")
    return int(min(cap, max(50, math.ceil(math.log(1e-13) / math.log(ratio)) + 10)))


def extended_hermite(N, s, x, t, y, terms=None):
    """Extended Hermite kernel relative to p_BM(s, x|0) dx."""
    if s <= t:
        a = sf.hermite_table(N - 1, np.asarray(x, float) / math.sqrt(2 * s))
        b = sf.hermite_table(N - 1, np.asarray(y, float) / math.sqrt(2 * t))
        w = (t / s) ** (np.arange(N) / 2)
        return _weighted_sum(w, a, b)
    M = terms or _series_terms(math.sqrt(t / s)) + N
    a = sf.hermite_table(M - 1, np.asarray(x, float) / math.sqrt(2 * s))
    b = sf.hermite_table(M - 1, np.asarray(y, float) / math.sqrt(2 * t))
    w = (t / s) ** (np.arange(M) / 2)
    return -_weighted_sum(w[N:], a[N:], b[N:])


def extended_laguerre(N, nu, s, x, t, y, terms=None):
    """Extended Laguerre kernel relative to p^nu(s, x|0) dx."""
    if s <= t:
        a = sf.laguerre_table(N - 1, nu, np.asarray(x, float) / (2 * s))
        b = sf.laguerre_table(N - 1, nu, np.asarray(y, float) / (2 * t))
        w = (t / s) ** np.arange(N, dtype=float)
        return _weighted_sum(w, a, b)
    M = terms or _series_terms(t / s) + N
    a = sf.laguerre_table(M - 1, nu, np.asarray(x, float) / (2 * s))
    b = sf.laguerre_table(M - 1, nu, np.asarray(y, float) / (2 * t))
    w = (t / s) ** np.arange(M, dtype=float)
    return -_weighted_sum(w[N:], a[N:], b[N:])


def _sigma(N, m):
    return m if N % 2 else m - 0.5


def relaxation_kernel(N, radius, s, x, t, y, lmax=None):
    """Kernel of circular noncolliding BM from the equidistant start (against dx/2 pi r).

    The sum over starting rotations k collapses to sigma_l = sigma_m mod N.
    """
    r = radius
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    if lmax is None:
        lmax = int(math.ceil(r * math.sqrt(40 / min(s, t)))) + N + 5
    ms = [_sigma(N, m) for m in range(-N, N + 1) if abs(_sigma(N, m)) <= (N - 1) / 2]
    out = np.zeros(np.broadcast(x, y).shape, complex)
    for sm in ms:
        j = np.arange(-(lmax // N) - 1, lmax // N + 2)
        for sl in sm + N * j:
            out += np.exp((sm * sm * t - sl * sl * s) / (2 * r * r) + 1j * (sl * x - sm * y) / r)
    if s > t:
        sig = np.array([_sigma(N, l) for l in range(-lmax, lmax + 1)])
        out -= sum(np.exp(l * l * (t - s) / (2 * r * r) + 1j * l * (x - y) / r) for l in sig)
    return out


def relaxation_kernel_triple(N, radius, s, x, t, y, lmax=40):
    """Same kernel by the literal triple sum over k, l and m (oracle)."""
    r = radius

    def ratio(n1, t1, x1, n2, t2, x2):
        # e(n1, t1, x1) / e(n2, t2, x2) with e(n, t, x) = exp(n^2 t - i n x)
        return np.exp(n1 * n1 * t1 - n2 * n2 * t2 - 1j * (n1 * x1 - n2 * x2))

    out = 0j
    ms = [_sigma(N, m) for m in range(-N, N + 1) if abs(_sigma(N, m)) <= (N - 1) / 2]
    for k in range(1, N + 1):
        th = 2 * math.pi * (k - 1) / N
        for l in range(-lmax, lmax + 1):
            sl = _sigma(N, l)
            for sm in ms:
                out += ratio(sm, t / (2 * r * r), y / r - th, sl, s / (2 * r * r), x / r - th)
    out /= N
    if s > t:
        for l in range(-lmax, lmax + 1):
            sl = _sigma(N, l)
            out -= ratio(sl, t / (2 * r * r), y / r, sl, s / (2 * r * r), x / r)
    return out


def equilibrium_kernel(N, radius, x, y):
    u = (np.asarray(y, float) - x) / (2 * radius)
    sn = np.sin(u)
    small = np.abs(sn) < 1e-8
    return np.where(small, N * np.cos(N * u) / np.cos(u), np.sin(N * u) / np.where(small, 1.0, sn))


def st_kernel(xi, s, x, t, y):
    """Spatio-temporal correlation kernel of the process started from xi.

    Simple starts use sum_v p(s, x|v) M^v(t, y) - 1(s > t) p(s - t, x|y)
    against dx; the multiple-point start returns the extended kernels
    (against p(s, x|0) dx); the key "equidistant" for a circle start
    whose points are equally spaced returns the relaxation kernel.
    """
    _check_t(s)
    _check_t(t)
    if xi.multiple:
        if xi.process == "bm":
            return extended_hermite(xi.N, s, x, t, y)
        if xi.process == "besq":
            return extended_laguerre(xi.N, xi.nu, s, x, t, y)
        raise ValueError("unsupported start")
    if xi.process == "circle" and _is_equidistant(xi):
        return relaxation_kernel(xi.N, xi.radius, s, x, t, y)
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    out = sum(transition(xi, s, x, v) * martingale_fn(xi, v, t, y) for v in xi.points)
    if s > t:
        out = out - transition(xi, s - t, x, y)
    return out


def _is_equidistant(xi):
    u = xi.points
    w = 2 * math.pi * xi.radius * np.arange(xi.N) / xi.N
    return np.allclose(u - u[0], w, atol=1e-12) and abs(u[0]) < 1e-12


# ------------------------------------------------------------ Monte Carlo

def sample_independent(xi, times, replicas, rng, start=None):
    """Independent one-particle paths at the given times: (replicas, len(times), N)."""
    u = np.asarray(xi.points if start is None else start, float)
    out = np.empty((replicas, len(times), len(u)))
    cur = np.tile(u, (replicas, 1))
    prev = 0.0
    for k, tk in enumerate(times):
        h = tk - prev
        if xi.process == "besq":
            cur = h * rng.noncentral_chisquare(2 * (xi.nu + 1), cur / h)
        else:
            cur = cur + math.sqrt(h) * rng.standard_normal(cur.shape)
        out[:, k] = cur
        prev = tk
    return out


def _observe(xi, Y):
    if xi.process == "circle":
        return np.mod(Y, 2 * math.pi * xi.radius)
    return Y


@dataclass
class DMRResult:
    direct: float
    direct_se: float
    weighted: float
    weighted_se: float

    @property
    def z(self):
        return (self.direct - self.weighted) / math.hypot(self.direct_se, self.weighted_se)


def dmr_expectation(xi, F, times, replicas, seed, dt_max=1e-2, direct_replicas=None):
    """Direct and determinantal-martingale-weighted estimates of E[F].

    F maps an array (replicas, len(times), N) of (wrapped) positions to
    (replicas,) values and must be symmetric in the particles.
    """
    if xi.N > 4 or len(times) > 2:
        raise ValueError("desk-scale protocol: N <= 4 and at most two times")
    times = sorted(times)
    T = times[-1]
    traj = loggas.simulate(xi.gas(), T, dt_max, seed, replicas=direct_replicas or replicas, store=times)
    states = traj.states[~traj.collided]
    if xi.process == "circle":
        states = np.mod(states, 2 * math.pi * xi.radius)
    fd = F(states)
    rng = stream(seed, 10**6)
    Y = sample_independent(xi, times, replicas, rng)
    fw = F(_observe(xi, Y)) * det_martingale(xi, T, Y[:, -1])
    return DMRResult(float(fd.mean()), float(fd.std(ddof=1) / math.sqrt(len(fd))),
                     float(fw.mean()), float(fw.std(ddof=1) / math.sqrt(len(fw))))


def standard_functionals(xi):
    """Two symmetric bounded test functionals of (t1, T) positions per process.

    Returns {name: (F, times)} for use with dmr_expectation.
    """
    def window(Y):
        return np.all(np.abs(Y[:, -1, :]) <= 1.0, axis=1).astype(float)

    def two_time(inner):
        return lambda Y: np.prod(np.cos(Y[:, 0, :]) + 1.5, axis=1) * np.sum(inner(Y[:, -1, :]), axis=1)

    if xi.process == "bm":
        return {"window": (window, [1.0]), "two_time": (two_time(lambda y: np.exp(-y * y / 2)), [0.5, 1.0])}
    if xi.process == "besq":
        return {"laplace": (lambda Y: np.exp(-np.sum(Y[:, -1, :], axis=1) / 4), [1.0]),
                "two_time": (two_time(lambda y: np.exp(-y / 2)), [0.5, 1.0])}
    return {"cosine": (lambda Y: np.prod(np.cos(Y[:, -1, :]) + 1.5, axis=1), [1.0]),
            "two_time": (two_time(np.sin), [0.5, 1.0])}


def reducibility(xi, F1, t, T, replicas, seed):
    """Both sides of the reduction of an N-particle determinantal weight to N' = 1.

    Left: sum_j E^u[F1(Y_j(t)) D(T, Y(T))]. Right: sum_v E^v[F1(Y(t)) M^v(T, Y(T))].
    Returns (left, left_se, right, right_se).
    """
    times = [t, T] if t < T else [T]
    rng = stream(seed, 1)
    Y = sample_independent(xi, times, replicas, rng)
    D = det_martingale(xi, T, Y[:, -1])
    obs = _observe(xi, Y[:, 0])
    left = sum(F1(obs[:, j]) for j in range(xi.N)) * D
    right = np.zeros(replicas)
    for k, v in enumerate(xi.points):
        Z = sample_independent(xi, times, replicas, stream(seed, 2 + k), start=[v])
        right += F1(_observe(xi, Z[:, 0, 0])) * martingale_fn(xi, v, T, Z[:, -1, 0])
    se = lambda a: float(a.std(ddof=1) / math.sqrt(len(a)))
    return float(left.mean()), se(left), float(right.mean()), se(right)


def relaxation_distance(N, radius, t, replicas, seed, bins=12, dt_max=1e-2, return_estimate=False):
    """Sup over bins of |empirical rho^2 - equilibrium rho^2| for circular Dyson at time t."""
    if not t > 0:
        raise ValueError("t must be positive")
    from .dpp import estimate_correlation, bin_average_2d

    w = 2 * math.pi * radius * np.arange(N) / N
    cfg = loggas.GasConfig("circular", N, beta=2.0, radius=radius, initial=w)
    traj = loggas.simulate(cfg, t, dt_max, seed, replicas=replicas)
    ang = np.mod(traj.at(t)[~traj.collided], 2 * math.pi * radius)
    edges = np.linspace(0, 2 * math.pi * radius, bins + 1)
    est = estimate_correlation(ang, 2, edges)
    c = 2 * math.pi * radius

    def rho2(a, b):
        k = equilibrium_kernel(N, radius, a, b)
        return (N * N - k * k) / c ** 2

    ref = bin_average_2d(rho2, edges)
    dist = float(np.max(np.abs(est.value - ref)))
    return (dist, est, ref) if return_estimate else dist
