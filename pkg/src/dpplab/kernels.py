"""Correlation kernels of the classical DPP families.

Kernels are returned relative to each family's background measure, as in
K(x, x') lambda(dx) lambda(dx').  ``lebesgue_kernel`` folds the measure in
and is what the scaling limits compare against.
"""

from dataclasses import dataclass, field, replace
import math

import numpy as np

from . import specfun as sf

DIAG_EPS = 1e-8

# family -> (domain tag, background-measure tag)
_TAGS = {
    "hermite": ("R", "N(0,1/2)"),
    "laguerre": ("R>=0", "Gamma(nu+1,1)"),
    "root": (None, "uniform-circle"),
    "sinc": ("R", "Lebesgue"),
    "airy": ("R", "Lebesgue"),
    "bessel": ("R>=0", "Lebesgue"),
    "ginibre_a": ("C", "complex-Gaussian"),
    "ginibre_c": ("C", "complex-Gaussian"),
    "ginibre_d": ("C", "complex-Gaussian"),
    "ginibre_type": ("C", "complex-Gaussian"),
    "euclidean": ("R^d", "Lebesgue"),
    "heisenberg": ("C^d", "complex-Gaussian"),
    "discrete_hermite": ("N0", "counting"),
    "discrete_laguerre": ("N0", "counting"),
}


@dataclass(frozen=True)
class KernelSpec:
    """A kernel family, its parameters, and any point transforms applied."""

    family: str
    N: int = 0
    nu: float = 0.0
    root: str = ""
    q: int = 0
    d: int = 1
    r: float = 0.0
    ops: tuple = field(default=())

    def __post_init__(self):
        if self.family not in _TAGS:
            raise ValueError(f"unknown kernel family {self.family!r}")
        if self.family in ("hermite", "laguerre", "root") and self.N < 1:
            raise ValueError("finite families need N >= 1")
        if self.family in ("laguerre", "bessel", "discrete_laguerre") and not self.nu > -1:
            raise ValueError("nu must be > -1")
        if self.family == "root" and self.root not in ("A", "B", "C", "D"):
            raise ValueError("root system type must be one of A, B, C, D")
        if self.family == "ginibre_type" and (self.q < 0 or int(self.q) != self.q):
            raise ValueError("q must be a nonnegative integer")
        if self.family in ("euclidean", "heisenberg") and self.d < 1:
            raise ValueError("dimension must be >= 1")
        if self.family == "discrete_laguerre" and not self.r > 0:
            raise ValueError("discrete Laguerre kernel needs r > 0")

    @property
    def domain(self):
        if self.family == "root":
            base = "[0,2pi)" if self.root == "A" else "[0,pi]"
        else:
            base = _TAGS[self.family][0]
        return base

    @property
    def measure(self):
        if self.family == "root":
            return "uniform-circle" if self.root == "A" else "uniform-[0,pi]"
        return _TAGS[self.family][1]

    # constructors
    @classmethod
    def hermite(cls, N):
        return cls("hermite", N=N)

    @classmethod
    def laguerre(cls, N, nu):
        return cls("laguerre", N=N, nu=nu)

    @classmethod
    def root_system(cls, root, N):
        return cls("root", N=N, root=root)

    @classmethod
    def sinc(cls):
        return cls("sinc")

    @classmethod
    def airy(cls):
        return cls("airy")

    @classmethod
    def bessel(cls, nu):
        return cls("bessel", nu=nu)

    @classmethod
    def ginibre(cls, kind="A"):
        return cls("ginibre_" + kind.lower())

    @classmethod
    def ginibre_type(cls, q):
        return cls("ginibre_type", q=q)

    @classmethod
    def euclidean(cls, d):
        return cls("euclidean", d=d)

    @classmethod
    def heisenberg(cls, d):
        return cls("heisenberg", d=d)

    @classmethod
    def discrete_hermite(cls, r):
        return cls("discrete_hermite", r=r)

    @classmethod
    def discrete_laguerre(cls, r, nu):
        return cls("discrete_laguerre", r=r, nu=nu)


@dataclass
class PointConfiguration:
    """Finite point set; sorted when the domain is ordered."""

    positions: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.positions)
        if not np.all(np.isfinite(p)):
            raise ValueError("positions must be finite")
        if not np.iscomplexobj(p) and p.ndim == 1:
            p = np.sort(p)
        self.positions = p

    def __len__(self):
        return len(self.positions)


# ---------------------------------------------------------------- transforms

def transform_kernel(spec, op, arg=None):
    """Return the spec of the transformed point process.

    op is "shift" (x -> x + arg), "dilate" (x -> arg * x) or "sqrt"
    (x -> sqrt(x), only for nonnegative domains).
    """
    if op == "sqrt" and spec.domain not in ("R>=0", "N0"):
        raise ValueError("sqrt_map needs a nonnegative domain")
    if op == "dilate" and (arg is None or arg == 0):
        raise ValueError("dilation factor must be nonzero")
    if op not in ("shift", "dilate", "sqrt"):
        raise ValueError(f"unknown transform {op!r}")
    return replace(spec, ops=spec.ops + ((op, arg),))


def _pull_back(spec, x):
    # map a point of the transformed process back to the base process
    for op, arg in reversed(spec.ops):
        if op == "shift":
            x = x - arg
        elif op == "dilate":
            x = x / arg
        else:
            x = x * x
    return x


def _jacobian(spec, x):
    # |d(pull_back)/dx| for 1-d transforms
    jac = np.ones(np.shape(x))
    for op, arg in reversed(spec.ops):
        if op == "dilate":
            jac = jac / abs(arg)
        elif op == "sqrt":
            jac = jac * 2 * np.abs(x)
        if op == "shift":
            x = x - arg
        elif op == "dilate":
            x = x / arg
        else:
            x = x * x
    return jac


# ------------------------------------------------------------ finite kernels

def _dirichlet(n, u):
    # sin(n u / 2) / sin(u / 2) with its limit where sin(u/2) vanishes
    s = np.sin(u / 2)
    small = np.abs(s) < DIAG_EPS
    safe = np.where(small, 1.0, s)
    return np.where(small, n * np.cos(n * u / 2) / np.cos(u / 2), np.sin(n * u / 2) / safe)


def _hermite_cd(N, x, y, weighted=False):
    m = 0.5 * (x + y)
    diag = np.abs(x - y) < DIAG_EPS
    px = sf.hermite_table(N, x, weighted)
    py = sf.hermite_table(N, y, weighted)
    pm = sf.hermite_table(N, m, weighted)
    dx = np.where(diag, 1.0, x - y)
    off = np.sqrt(N / 2) * (px[N] * py[N - 1] - py[N] * px[N - 1]) / dx
    on = N * pm[N - 1] ** 2
    if N >= 2:
        on = on - np.sqrt(N * (N - 1)) * pm[N] * pm[N - 2]
    return np.where(diag, on, off)


def hermite_direct(N, x, y):
    """Direct sum of phi_n(x) phi_n(y), n < N (oracle for the CD form)."""
    return np.einsum("n...,n...->...", sf.hermite_table(N - 1, x), sf.hermite_table(N - 1, y))


def _laguerre_diag(N, nu, x):
    p = sf.laguerre_table(N, nu, x)
    q = sf.laguerre_table(N, nu + 1, x)
    dN = -np.sqrt(N / (nu + 1)) * q[N - 1]
    dNm1 = -np.sqrt((N - 1) / (nu + 1)) * q[N - 2] if N >= 2 else 0.0
    return -np.sqrt(N * (N + nu)) * (dN * p[N - 1] - p[N] * dNm1)


def _laguerre_cd(N, nu, x, y, weighted=False):
    m = 0.5 * (x + y)
    diag = np.abs(x - y) < DIAG_EPS
    px = sf.laguerre_table(N, nu, x, weighted)
    py = sf.laguerre_table(N, nu, y, weighted)
    dx = np.where(diag, 1.0, x - y)
    off = -np.sqrt(N * (N + nu)) * (px[N] * py[N - 1] - py[N] * px[N - 1]) / dx
    on = _laguerre_diag(N, nu, m)
    if weighted:
        on = on * laguerre_weight(nu, m)
    return np.where(diag, on, off)


def laguerre_direct(N, nu, x, y):
    """Direct sum of phi^(nu)_n(x) phi^(nu)_n(y), n < N."""
    return np.einsum(
        "n...,n...->...", sf.laguerre_table(N - 1, nu, x), sf.laguerre_table(N - 1, nu, y)
    )


def laguerre_weight(nu, x):
    """Density of Gamma(nu+1, 1) with respect to dx."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.exp(nu * np.log(x) - x - sf.loggamma(nu + 1.0))
    return np.where(x > 0, w, 0.0 if nu > 0 else (1.0 if nu == 0 else np.inf))


def _root_kernel(root, N, x, y):
    u, v = x - y, x + y
    if root == "A":
        return _dirichlet(N, u)
    if root == "B":
        return 0.5 * (_dirichlet(2 * N, u) - _dirichlet(2 * N, v))
    if root == "C":
        return 0.5 * (_dirichlet(2 * N + 1, u) - _dirichlet(2 * N + 1, v))
    return 0.5 * (_dirichlet(2 * N - 1, u) + _dirichlet(2 * N - 1, v))


ROOT_NR = {"A": lambda N: N, "B": lambda N: 2 * N - 1, "C": lambda N: 2 * (N + 1), "D": lambda N: 2 * (N - 1)}
ROOT_J = {"A": lambda n: n - 0.5, "B": lambda n: n - 1, "C": lambda n: n, "D": lambda n: n - 1}


def root_functions(root, N, x):
    """Orthonormal functions (rows n = 1..N) for the root-system kernels.

    Normalised against dx/2pi (A) or dx/pi (B, C, D).
    """
    x = np.asarray(x, dtype=float)
    n = np.arange(1, N + 1).reshape((-1,) + (1,) * x.ndim)
    freq = (ROOT_NR[root](N) - 2 * ROOT_J[root](n)) / 2.0
    if root == "A":
        return np.exp(-1j * freq * x)
    if root in ("B", "C"):
        return np.sqrt(2.0) * np.sin(freq * x)
    return np.where(freq == 0, 1.0, np.sqrt(2.0)) * np.cos(freq * x)


def root_direct(root, N, x, y):
    fx = root_functions(root, N, x)
    fy = root_functions(root, N, y)
    return np.sum(fx * np.conj(fy), axis=0)


# ----------------------------------------------------------- infinite kernels

def _sinc(u):
    small = np.abs(u) < DIAG_EPS
    return np.where(small, 1 / np.pi, np.sin(u) / (np.pi * np.where(small, 1.0, u)))


def _airy_kernel(x, y):
    m = 0.5 * (x + y)
    diag = np.abs(x - y) < DIAG_EPS
    ax, apx = sf.airy_pair(x)
    ay, apy = sf.airy_pair(y)
    am, apm = sf.airy_pair(m)
    off = (ax * apy - ay * apx) / np.where(diag, 1.0, x - y)
    return np.where(diag, apm ** 2 - m * am ** 2, off)


def _bessel_parts(nu, x):
    j = sf.bessel_j(nu, x)
    j1 = sf.bessel_j(nu + 1, x)
    with np.errstate(divide="ignore", invalid="ignore"):
        jp = np.where(x > 0, nu / np.where(x > 0, x, 1.0) * j - j1, 0.0)
    return j, j1, jp


def _bessel_kernel(nu, x, y):
    if np.any(np.asarray(x) < 0) or np.any(np.asarray(y) < 0):
        raise ValueError("Bessel kernel lives on R>=0")
    m = 0.5 * (x + y)
    diag = np.abs(x - y) < DIAG_EPS
    jx, _, jpx = _bessel_parts(nu, x)
    jy, _, jpy = _bessel_parts(nu, y)
    jm, j1m, _ = _bessel_parts(nu, m)
    den = np.where(diag, 1.0, x * x - y * y)
    off = np.sqrt(x * y) * (jx * y * jpy - x * jpx * jy) / den
    # x/2 (J_nu^2 - J_{nu-1} J_{nu+1}) with J_{nu-1} eliminated by the recurrence
    with np.errstate(divide="ignore", invalid="ignore"):
        on = 0.5 * m * (jm ** 2 + j1m ** 2) - nu * jm * j1m
    return np.where(diag, on, off)


def _euclid_ratio(d, rr):
    # J_{d/2}(r) / r^{d/2}, with its Taylor series near 0
    nu = d / 2.0
    out = np.empty_like(rr)
    small = rr < 1.0
    if np.any(small):
        h2 = (0.5 * rr[small]) ** 2
        term = np.full_like(h2, 1.0 / (2 ** nu * sf.gamma(nu + 1.0)))
        tot = term.copy()
        for k in range(1, 30):
            term = -term * h2 / (k * (k + nu))
            tot += term
        out[small] = tot
    if np.any(~small):
        out[~small] = sf.bessel_j(nu, rr[~small]) / rr[~small] ** nu
    return out


def _ginibre_type(q, x, y):
    w = np.abs(x - y) ** 2
    return sf.laguerre(q, 0.0, w) * np.exp(x * np.conj(y))


def ginibre_type_series(q, x, y, terms=200):
    """Sum over p of h_{p,q}(x) conj(h_{p,q}(y)), the complex-Hermite expansion."""
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)

    def table(z):
        # h[p][k] for k = 0..q, built by the normalised recurrence in p
        h = [np.conj(z) ** k / math.sqrt(math.factorial(k)) for k in range(q + 1)]
        rows = [h]
        for p in range(terms - 1):
            nxt = []
            for k in range(q + 1):
                val = z * h[k]
                if k > 0:
                    val = val - math.sqrt(k) * h[k - 1]
                nxt.append(val / math.sqrt(p + 1))
            h = nxt
            rows.append(h)
        return np.array([row[q] for row in rows])

    return np.sum(table(x) * np.conj(table(y)), axis=0)


def discrete_hermite_offdiag(r, n, m):
    """Closed form of int_r^inf phi_n phi_m dlambda for n != m."""
    nmax = int(max(np.max(n), np.max(m))) + 1
    psi = sf.hermite_table(nmax, np.asarray(r, dtype=float), weighted=True)
    n = np.asarray(n)
    m = np.asarray(m)
    num = np.sqrt(n + 1) * psi[n + 1] * psi[m] - np.sqrt(m + 1) * psi[n] * psi[m + 1]
    return -num / (np.sqrt(2.0) * np.where(n == m, 1, n - m))


def discrete_hermite_diag(r, nmax):
    """int_r^inf phi_n^2 dlambda for n = 0..nmax by a ladder recursion from erfc."""
    psi = sf.hermite_table(nmax + 2, float(r), weighted=True)
    out = np.empty(nmax + 1)
    out[0] = 0.5 * math.erfc(r)

    def off(a, b):
        return float(discrete_hermite_offdiag(r, a, b))

    for n in range(1, nmax + 1):
        acc = psi[n] * psi[n - 1] - math.sqrt((n + 1) / 2) * off(n + 1, n - 1)
        if n >= 2:
            acc += math.sqrt((n - 1) / 2) * off(n, n - 2)
        out[n] = out[n - 1] + acc / math.sqrt(n / 2)
    return out


def discrete_laguerre_offdiag(r, nu, n, m):
    """Closed form of int_r^inf phi_n phi_m dlambda_Gamma for n != m, r > 0."""
    n = np.asarray(n)
    m = np.asarray(m)

    def lag(k, a):
        return np.where(k >= 0, _lag_vec(np.maximum(k, 0), a, r), 0.0)

    lnorm = 0.5 * (sf.loggamma(n + 1.0) + sf.loggamma(m + 1.0)
                   - sf.loggamma(n + nu + 1.0) - sf.loggamma(m + nu + 1.0))
    pref = np.exp(lnorm + (nu + 1) * math.log(r) - r)
    num = lag(n - 1, nu + 1) * lag(m, nu) - lag(n, nu) * lag(m - 1, nu + 1)
    return -pref * num / np.where(n == m, 1, n - m)


def _lag_vec(k, a, x):
    k = np.asarray(k)
    out = np.empty(k.shape)
    for idx, kk in np.ndenumerate(k):
        out[idx] = sf.laguerre(int(kk), a, x)
    return out


def discrete_laguerre_diag(r, nu, nmax):
    """int_r^inf phi_n^2 dlambda_Gamma for n = 0..nmax.

    From (y w phi_n')' = -n w phi_n the integral drops one degree and raises
    nu by one, picking up a boundary term; the chain ends at Q(nu+n+1, r).
    """
    from scipy.special import gammaincc

    out = np.empty(nmax + 1)
    for n in range(nmax + 1):
        acc = float(gammaincc(nu + n + 1.0, r))
        for k in range(n):
            mu, m = nu + k, n - k
            tab = sf.laguerre_table(m, mu, r)
            up = sf.laguerre_table(m - 1, mu + 1, r)
            dphi = -math.sqrt(m / (mu + 1)) * up[m - 1]
            acc += r * float(laguerre_weight(mu, r)) * dphi * tab[m] / m
        out[n] = acc
    return out


# ------------------------------------------------------------------ evaluation

def _base_kernel(spec, x, y, weighted=False):
    f = spec.family
    if f == "hermite":
        return _hermite_cd(spec.N, x, y, weighted)
    if f == "laguerre":
        if np.any(np.asarray(x) < 0) or np.any(np.asarray(y) < 0):
            raise ValueError("Laguerre kernel lives on R>=0")
        return _laguerre_cd(spec.N, spec.nu, x, y, weighted)
    if f == "root":
        k = _root_kernel(spec.root, spec.N, x, y)
        if weighted:
            k = k / (2 * np.pi if spec.root == "A" else np.pi)
        return k
    if f == "sinc":
        return _sinc(x - y)
    if f == "airy":
        return _airy_kernel(x, y)
    if f == "bessel":
        return _bessel_kernel(spec.nu, x, y)
    if f.startswith("ginibre_") and f != "ginibre_type":
        s = x * np.conj(y)
        k = {"ginibre_a": np.exp, "ginibre_c": np.sinh, "ginibre_d": np.cosh}[f](s)
        if weighted:
            k = k * np.exp(-0.5 * (np.abs(x) ** 2 + np.abs(y) ** 2)) / np.pi
        return k
    if f == "ginibre_type":
        k = _ginibre_type(spec.q, x, y)
        if weighted:
            k = k * np.exp(-0.5 * (np.abs(x) ** 2 + np.abs(y) ** 2)) / np.pi
        return k
    if f == "euclidean":
        rr = np.linalg.norm(np.asarray(x, float) - np.asarray(y, float), axis=-1)
        return _euclid_ratio(spec.d, np.atleast_1d(rr)).reshape(rr.shape) / (2 * np.pi) ** (spec.d / 2)
    if f == "heisenberg":
        x = np.asarray(x, complex)
        y = np.asarray(y, complex)
        k = np.exp(np.sum(x * np.conj(y), axis=-1))
        if weighted:
            k = k * np.exp(-0.5 * np.sum(np.abs(x) ** 2 + np.abs(y) ** 2, axis=-1)) / np.pi ** spec.d
        return k
    if f == "discrete_hermite":
        return _discrete(spec, x, y, discrete_hermite_offdiag, lambda nmax: discrete_hermite_diag(spec.r, nmax))
    if f == "discrete_laguerre":
        return _discrete(
            spec, x, y,
            lambda r, n, m: discrete_laguerre_offdiag(r, spec.nu, n, m),
            lambda nmax: discrete_laguerre_diag(spec.r, spec.nu, nmax),
        )
    raise ValueError(f)


def _discrete(spec, x, y, offdiag, diag):
    x = np.asarray(x)
    y = np.asarray(y)
    if np.any(x < 0) or np.any(y < 0) or np.any(x != np.round(x)) or np.any(y != np.round(y)):
        raise ValueError("discrete kernels live on nonnegative integers")
    x = x.astype(int)
    y = y.astype(int)
    x, y = np.broadcast_arrays(x, y)
    out = np.empty(x.shape)
    same = x == y
    if np.any(~same):
        out[~same] = offdiag(spec.r, x[~same], y[~same])
    if np.any(same):
        d = diag(int(np.max(x[same])))
        out[same] = d[x[same]]
    return out


def eval_kernel(spec, x, y):
    """K(x, y) relative to the (transformed) background measure."""
    x = np.asarray(x)
    y = np.asarray(y)
    return _base_kernel(spec, _pull_back(spec, x), _pull_back(spec, y))


def measure_density(spec, x):
    """Density of the background measure with respect to Lebesgue (1 for counting)."""
    x = np.asarray(x)
    b = _pull_back(spec, x)
    f = spec.family
    if f == "hermite":
        w = np.exp(-b * b) / np.sqrt(np.pi)
    elif f == "laguerre":
        w = laguerre_weight(spec.nu, b)
    elif f == "root":
        w = np.full(np.shape(b), 1 / (2 * np.pi) if spec.root == "A" else 1 / np.pi)
    elif f in ("ginibre_a", "ginibre_c", "ginibre_d", "ginibre_type"):
        w = np.exp(-np.abs(b) ** 2) / np.pi
    elif f == "heisenberg":
        w = np.exp(-np.sum(np.abs(b) ** 2, axis=-1)) / np.pi ** spec.d
    else:
        w = np.ones(np.shape(b) if f != "euclidean" else np.shape(b)[:-1])
    if spec.ops and f not in ("euclidean", "heisenberg"):
        w = w * _jacobian(spec, x)
    return w


def lebesgue_kernel(spec, x, y):
    """sqrt(w(x) w(y)) K(x, y): the kernel against dx (dilations included)."""
    x = np.asarray(x)
    y = np.asarray(y)
    if spec.family in ("hermite", "laguerre") and all(op != "sqrt" for op, _ in spec.ops):
        # stable weighted tables, then the Jacobian of the linear maps
        k = _base_kernel(spec, _pull_back(spec, x), _pull_back(spec, y), weighted=True)
        return k * np.sqrt(_jacobian(spec, x) * _jacobian(spec, y))
    if spec.family in ("hermite", "laguerre"):
        bx, by = _pull_back(spec, x), _pull_back(spec, y)
        k = _base_kernel(spec, bx, by, weighted=True)
        return k * np.sqrt(_jacobian(spec, x) * _jacobian(spec, y))
    return eval_kernel(spec, x, y) * np.sqrt(measure_density(spec, x) * measure_density(spec, y))


def density(spec, x):
    """One-point function K(x, x) relative to the background measure."""
    k = eval_kernel(spec, x, x)
    return np.real(k)


def correlation_det(spec, pts):
    """rho^n(x_1..x_n) = det[K(x_j, x_k)] for n <= 12 points."""
    p = np.asarray(pts.positions if isinstance(pts, PointConfiguration) else pts)
    n = len(p)
    if not 1 <= n <= 12:
        raise ValueError("correlation_det handles 1..12 points")
    if spec.family in ("euclidean", "heisenberg"):
        mat = eval_kernel(spec, p[:, None, :], p[None, :, :])
    else:
        mat = eval_kernel(spec, p[:, None], p[None, :])
    if not np.all(np.isfinite(mat)):
        raise ValueError("kernel matrix has non-finite entries")
    det = np.linalg.det(mat)
    if np.iscomplexobj(det):
        if abs(det.imag) > 1e-10 * max(1.0, abs(det.real)):
            raise ValueError("determinant of a Hermitian kernel matrix is not real")
        det = det.real
    return float(det)


# --------------------------------------------------------------- identities

def weyl_identity_residual(root, zeta):
    """Relative residual of the trigonometric Weyl denominator identity."""
    zeta = np.asarray(zeta, dtype=complex)
    N = len(zeta)
    if not 1 <= N <= 8:
        raise ValueError("N must be in 1..8")
    j = np.arange(1, N + 1)
    arg = (ROOT_NR[root](N) - 2 * ROOT_J[root](j))[:, None] * zeta[None, :]
    if root == "A":
        lhs = np.linalg.det(np.exp(-1j * arg))
    elif root in ("B", "C"):
        lhs = np.linalg.det(np.sin(arg))
    elif root == "D":
        lhs = np.linalg.det(np.cos(arg))
    else:
        raise ValueError("root must be A, B, C or D")
    prod = 1.0 + 0j
    for k in range(N):
        for i in range(k):
            prod *= np.sin(zeta[k] - zeta[i])
            if root != "A":
                prod *= np.sin(zeta[k] + zeta[i])
    if root == "A":
        rhs = (2j) ** (N * (N - 1) / 2) * prod
    elif root == "B":
        rhs = 2.0 ** (N * (N - 1)) * np.prod(np.sin(zeta)) * prod
    elif root == "C":
        rhs = 2.0 ** (N * (N - 1)) * np.prod(np.sin(2 * zeta)) * prod
    else:
        rhs = 2.0 ** ((N - 1) ** 2) * prod
    return float(abs(lhs - rhs) / (1 + abs(rhs)))


def weyl_algebraic_residual(root, z):
    """Residual of the algebraic Weyl denominator formula in the variables z."""
    z = np.asarray(z, dtype=complex)
    N = len(z)
    j = np.arange(1, N + 1)[:, None]
    zk = z[None, :]
    if root == "A":
        mat = zk ** (j - 1)
    elif root == "B":
        mat = zk ** (j - N) - zk ** (N + 1 - j)
    elif root == "C":
        mat = zk ** (j - N - 1) - zk ** (N + 1 - j)
    else:
        mat = zk ** (j - N) + zk ** (N - j)
    lhs = np.linalg.det(mat)
    prod = 1.0 + 0j
    for k in range(N):
        for i in range(k):
            prod *= (z[k] - z[i]) * (1 if root == "A" else (1 - z[i] * z[k]))
    if root == "A":
        rhs = prod
    elif root == "B":
        rhs = np.prod(z ** (1 - N) * (1 - z)) * prod
    elif root == "C":
        rhs = np.prod(z ** (-N) * (1 - z * z)) * prod
    else:
        rhs = 2 * np.prod(z ** (1 - N)) * prod
    return float(abs(lhs - rhs) / (1 + abs(rhs)))


# ------------------------------------------------------------ scaling limits

def scaled_kernel(mode, N, nu=0.0, root="A"):
    """(finite spec scaled to the limit regime, limit spec), both for lebesgue_kernel."""
    if mode == "bulk":
        return transform_kernel(KernelSpec.hermite(N), "dilate", math.sqrt(2 * N)), KernelSpec.sinc()
    if mode == "soft_edge":
        s = transform_kernel(KernelSpec.hermite(N), "shift", -math.sqrt(2 * N))
        return transform_kernel(s, "dilate", math.sqrt(2) * N ** (1 / 6)), KernelSpec.airy()
    if mode == "hard_edge":
        s = transform_kernel(KernelSpec.laguerre(N, nu), "dilate", 4 * N)
        return transform_kernel(s, "sqrt"), KernelSpec.bessel(nu)
    if mode == "circular_bulk":
        base = KernelSpec.root_system(root, N)
        if root == "A":
            return transform_kernel(base, "dilate", N / 2), KernelSpec.sinc()
        limit_nu = -0.5 if root == "D" else 0.5
        return transform_kernel(base, "dilate", N), KernelSpec.bessel(limit_nu)
    raise ValueError(f"unknown scaling mode {mode!r}")


def scaling_limit_error(mode, N, box, grid=41, nu=0.0, root="A"):
    """Sup over a grid on box x box of |scaled finite kernel - limit kernel|."""
    if N < 10:
        raise ValueError("scaling limits need N >= 10")
    finite, limit = scaled_kernel(mode, N, nu=nu, root=root)
    g = np.linspace(box[0], box[1], grid)
    X, Y = np.meshgrid(g, g)
    a = lebesgue_kernel(finite, X, Y)
    b = lebesgue_kernel(limit, X, Y)
    return float(np.max(np.abs(a - b)))
