"""Green functions, Dirichlet energies and Gaussian pairings for H and the quadrant O.

G_H(z, w) = log|z - conj(w)| - log|z - w|,   G_O(z, w) = G_H(z^2, w^2).

Fields are represented only through pairings with smooth radial bumps.  The
stationary coupling is checked through the Im M pairing: its mean is constant
and Var + E_t(f) = E_0(f).
"""

from dataclasses import dataclass, field, asdict
from functools import lru_cache
import math

import numpy as np

from . import loggas, sle
from .rng import derive, stream

DOMAINS = ("H", "O")
QUAD_NODES = 32
MC_NODES = 16
EIG_FLOOR = -1e-10
BLOCK = 250


def green(domain, z, w):
    z = np.asarray(z, complex)
    w = np.asarray(w, complex)
    if np.any(np.abs(z - w) == 0):
        raise ValueError("green function needs z != w")
    if domain == "O":
        z, w = z * z, w * w
    elif domain != "H":
        raise ValueError(f"domain must be one of {DOMAINS}")
    return np.log(np.abs(z - np.conj(w))) - np.log(np.abs(z - w))


def chi(kappa):
    return 2 / math.sqrt(kappa) - math.sqrt(kappa) / 2


# ------------------------------------------------------------ test functions

@lru_cache(maxsize=None)
def _leggauss(n):
    return np.polynomial.legendre.leggauss(n)


def _gl(n, a, b):
    x, w = _leggauss(n)
    return 0.5 * (b - a) * x + 0.5 * (a + b), 0.5 * (b - a) * w


@dataclass(frozen=True)
class TestFn:
    """Radial bump amplitude * exp(1 - 1/(1 - (r/radius)^2)) around center."""

    center: complex
    radius: float
    domain: str = "H"
    amplitude: float = 1.0

    __test__ = False

    def __post_init__(self):
        if self.domain not in DOMAINS:
            raise ValueError(f"domain must be one of {DOMAINS}")
        if not self.radius > 0:
            raise ValueError("radius must be > 0")
        c = complex(self.center)
        margin = c.imag if self.domain == "H" else min(c.real, c.imag)
        if margin - self.radius <= self.radius / 2:
            raise ValueError("support must stay farther than radius/2 from the boundary")

    def profile(self, r):
        s = np.clip(np.asarray(r, float) / self.radius, 0, 1)
        out = np.zeros_like(s)
        inside = s < 1
        out[inside] = np.exp(1 - 1 / (1 - s[inside] ** 2))
        return self.amplitude * out

    def __call__(self, z):
        return self.profile(np.abs(np.asarray(z, complex) - self.center))

    def scaled(self, c):
        return TestFn(self.center, self.radius, self.domain, self.amplitude * c)

    def nodes(self, n=QUAD_NODES):
        """(points, weights) with sum(weights * h(points)) ~ integral of f h over the disk."""
        r, wr = _gl(n, 0.0, self.radius)
        th = 2 * math.pi * (np.arange(n) + 0.5) / n
        z = self.center + r[:, None] * np.exp(1j * th[None, :])
        w = (wr * r * self.profile(r))[:, None] * np.full(n, 2 * math.pi / n)
        return z.ravel(), w.ravel()

    def mass(self):
        r, wr = _gl(64, 0.0, self.radius)
        return 2 * math.pi * float(np.sum(wr * r * self.profile(r)))

    def log_potential(self, w, n=QUAD_NODES):
        """U(w) = integral f(z) log|z - w| dA(z), exact radial reduction (Newton)."""
        w = np.asarray(w, complex)
        s = np.abs(w - self.center)
        out = np.empty(s.shape)
        flat, res = s.ravel(), out.reshape(-1)
        for i, d in enumerate(flat):
            if d >= self.radius:
                r, wr = _gl(n, 0.0, self.radius)
                res[i] = math.log(d) * np.sum(wr * r * self.profile(r))
                continue
            r1, w1 = _gl(n, 0.0, d) if d > 0 else (np.zeros(0), np.zeros(0))
            r2, w2 = _gl(n, d, self.radius)
            inner = math.log(d) * np.sum(w1 * r1 * self.profile(r1)) if d > 0 else 0.0
            res[i] = inner + np.sum(w2 * r2 * self.profile(r2) * np.log(r2))
        return 2 * math.pi * out


# ------------------------------------------------------------ energies

def _smooth_green(domain, z, w):
    # G_D(z, w) + log|z - w|, smooth on the product of interior supports
    if domain == "H":
        return np.log(np.abs(z - np.conj(w)))
    return (np.log(np.abs(z * z - np.conj(w * w))) - np.log(np.abs(z + w)))


def _pair(domain, f, g, fn):
    zf, wf = f.nodes(QUAD_NODES)
    zg, wg = g.nodes(QUAD_NODES)
    return wf @ fn(domain, zf[:, None], zg[None, :]) @ wg


def energy0(f, g=None):
    """E_0(f, g) = integral f(z) G_D(z, w) g(w) by quadrature, log singularity via Newton."""
    g = f if g is None else g
    if f.domain != g.domain:
        raise ValueError("test functions live in different domains")
    smooth = _pair(f.domain, f, g, _smooth_green)
    zg, wg = g.nodes(QUAD_NODES)
    return float(smooth - wg @ f.log_potential(zg))


def energy_shift(domain, zf, wf, gf, lf, zg, wg, gg):
    """E_t - E_0 from mapped node values; gf, lf are (R, P) map and log-derivative values.

    The kernel G_D(g(z), g(w)) - G_D(z, w) is smooth; where a node meets itself
    the difference quotient log|(g(z) - g(w)) / (z - w)| is replaced by log|g'(z)|.
    """
    z, w = zf[:, None], zg[None, :]
    a, b = gf[:, :, None], gg[:, None, :]
    la = np.real(lf)
    if domain == "O":
        z, w, a, b = z * z, w * w, a * a, b * b
        # d(g^2)/d(z^2) = g g' / z
        la = la + np.log(np.abs(gf)) - np.log(np.abs(zf))
    same = np.abs(z - w) < 1e-14
    z0 = np.where(same, z + 1j, z)  # placeholder, the diagonal is set below
    g0 = np.log(np.abs(z0 - np.conj(w))) - np.log(np.abs(z0 - w))
    dr = (a.real - b.real) ** 2
    k = 0.5 * np.log((dr + (a.imag + b.imag) ** 2) / (dr + (a.imag - b.imag) ** 2)) - g0
    i, j = np.nonzero(same)
    if len(i):
        zi = (zf * zf if domain == "O" else zf)[i]
        ai = (gf * gf if domain == "O" else gf)[:, i]
        k[:, i, j] = np.log(ai.imag / zi.imag) - la[:, i]
    return np.einsum("i,rij,j->r", wf, k, wg)


@dataclass
class MappedNodes:
    """Node values of a map g_t and log g_t' for one test function."""

    z: np.ndarray
    w: np.ndarray
    g: np.ndarray  # (R, P)
    log_dg: np.ndarray  # (R, P)


def dirichlet_energy(f, g=None, fmap=None, gmap=None):
    """E_t(f, g) with G_{D_t}(z, w) = G_D(g_t(z), g_t(w)); identity map when fmap is None.

    fmap / gmap are MappedNodes on each function's own nodes; the returned
    array has one entry per replica.  Swallowed nodes give NaN.
    """
    g = f if g is None else g
    e0 = energy0(f, g)
    if fmap is None:
        return e0
    gmap = fmap if gmap is None and g is f else gmap
    if gmap is None:
        raise ValueError("map values for g are missing")
    return e0 + energy_shift(f.domain, fmap.z, fmap.w, fmap.g, fmap.log_dg,
                             gmap.z, gmap.w, gmap.g)


def map_nodes(f, state, k=-1, n=MC_NODES):
    """MappedNodes for f from a LoewnerState tracked at f.nodes(n)."""
    z, w = f.nodes(n)
    if state.points.shape != z.shape or not np.allclose(state.points, z):
        raise ValueError("state does not track the nodes of this test function")
    return MappedNodes(z, w, state.g[:, k], state.log_dg[:, k])


# ------------------------------------------------------------ pairing sampler

@dataclass
class GaussianPairingModel:
    fns: list
    C: np.ndarray
    factor: np.ndarray = field(default=None)

    def __post_init__(self):
        C = np.asarray(self.C, float)
        if C.ndim != 2 or C.shape[0] != C.shape[1] or not np.allclose(C, C.T, atol=1e-12):
            raise ValueError("covariance must be a symmetric matrix")
        lam, V = np.linalg.eigh(C)
        if lam.min(initial=0.0) < EIG_FLOOR * max(1.0, lam.max(initial=0.0)):
            raise ValueError("covariance is not positive semidefinite")
        self.C = C
        self.factor = V * np.sqrt(np.clip(lam, 0, None))

    @classmethod
    def from_testfns(cls, fns):
        m = len(fns)
        C = np.zeros((m, m))
        for a in range(m):
            for b in range(a, m):
                C[a, b] = C[b, a] = energy0(fns[a], fns[b])
        return cls(list(fns), C)


def sample_pairings(model, n, seed):
    """(n, m) jointly Gaussian pairings with covariance model.C."""
    rng = stream(seed, 7)
    Z = rng.standard_normal((n, model.C.shape[0]))
    return Z @ model.factor.T


# ------------------------------------------------------------ stationarity

def im_m_pairing(state, kappa, f, k=-1, n=MC_NODES):
    """(2/sqrt(kappa)) integral Im M_D(z, t_k) f(z) per replica (NaN if any node swallowed)."""
    z, w = f.nodes(n)
    if state.points.shape != z.shape or not np.allclose(state.points, z):
        raise ValueError("state does not track the nodes of this test function")
    M = sle.martingale_observable(state, kappa, k)
    return 2 / math.sqrt(kappa) * (M.imag @ w)


def default_gas(domain, kappa, N, nu=0.5, initial=None):
    if initial is None:
        if domain == "H":
            initial = [0.0] if N == 1 else list(np.linspace(-0.5, 0.5, N))
        else:
            initial = list(np.linspace(0.25, 1.0, N)) if N > 1 else [0.25]
    model = "dyson" if domain == "H" else "bru_wishart"
    return loggas.GasConfig.from_kappa(model, N, kappa, nu=nu, initial=initial)


@dataclass
class StationarityRow:
    t: float
    mean: float
    mean_se: float
    mean0: float
    var: float
    energy_t: float
    energy_0: float
    excluded: int
    mean_ok: bool
    var_ok: bool

    @property
    def balance(self):
        return self.var + self.energy_t


@dataclass
class StationarityReport:
    domain: str
    kappa: float
    N: int
    replicas: int
    rows: list

    @property
    def passed(self):
        return all(r.mean_ok and r.var_ok for r in self.rows)

    def to_dict(self):
        return {"domain": self.domain, "kappa": self.kappa, "N": self.N,
                "replicas": self.replicas, "pass": self.passed,
                "rows": [dict(asdict(r), balance=r.balance) for r in self.rows]}


def stationarity_check(domain, kappa, N, f, t_list, replicas, seed, nu=0.5,
                       initial=None, dt=2.5e-3, n=MC_NODES, var_tol=0.05, mean_sigma=3.0):
    """Monte Carlo check of the stationary coupling at each t in t_list.

    The gas is the kappa-Dyson model (H) or kappa-Bru-Wishart with delta = nu (O).
    Replicas whose support gets swallowed are excluded; more than 1% fails the row.
    """
    if not 0 < kappa <= 4:
        raise ValueError("kappa must lie in (0, 4]")
    if f.domain != domain:
        raise ValueError("test function domain mismatch")
    t_list = sorted(float(t) for t in t_list)
    T = t_list[-1]
    steps = max(1, int(math.ceil(T / dt)))
    grid = np.linspace(0, T, steps + 1)
    idx = [int(np.argmin(np.abs(grid - t))) for t in t_list]
    cfg = default_gas(domain, kappa, N, nu, initial)
    z, w = f.nodes(n)
    e0 = energy0(f)
    pair = [[] for _ in t_list]
    shift = [[] for _ in t_list]
    pair0 = None
    for b, start in enumerate(range(0, replicas, BLOCK)):
        R = min(BLOCK, replicas - start)
        d = sle.DrivingPath.from_gas(cfg, T, steps, seed=derive(seed, 9, b), replicas=R, sqrt=domain == "O")
        state = (sle.forward_flow(d, z) if domain == "H" else sle.quadrant_flow(d, nu, z))
        if pair0 is None:
            pair0 = float(im_m_pairing(state, kappa, f, 0, n)[0])
        for j, k in enumerate(idx):
            pair[j].append(im_m_pairing(state, kappa, f, k, n))
            m = MappedNodes(z, w, state.g[:, k], state.log_dg[:, k])
            shift[j].append(energy_shift(domain, z, w, m.g, m.log_dg, z, w, m.g))
    rows = []
    for j, t in enumerate(t_list):
        p = np.concatenate(pair[j])
        s = np.concatenate(shift[j])
        ok = np.isfinite(p) & np.isfinite(s)
        excl = int(np.sum(~ok))
        p, s = p[ok], s[ok]
        mean, se = float(p.mean()), float(p.std(ddof=1) / math.sqrt(len(p))) if len(p) > 1 else 0.0
        var = float(p.var(ddof=1)) if len(p) > 1 else 0.0
        et = e0 + float(s.mean())
        frac_ok = excl <= 0.01 * replicas
        mean_ok = frac_ok and abs(mean - pair0) <= mean_sigma * se + 1e-12
        var_ok = frac_ok and abs(var + et - e0) <= var_tol * e0
        rows.append(StationarityRow(t, mean, se, pair0, var, et, e0, excl, bool(mean_ok), bool(var_ok)))
    return StationarityReport(domain, kappa, N, replicas, rows)
