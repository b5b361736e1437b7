"""Chordal and multiple Loewner flows in the upper half-plane H and the quadrant O.

H:  dg/dt = sum_i 2 lam_i / (g - X_i)
O:  dg/dt = sum_i 2 lam_i [1/(g - X_i) + 1/(g + X_i)] + 4 delta / g

The solver integrates the displacement g - z and log g' by RK4 along the
driving grid, with the driver linearly interpolated inside each step.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from . import loggas

SWALLOW = 1e-6
MAX_SUBSTEPS = 4096
HCAP_RADIUS = 50.0


@dataclass
class DrivingPath:
    times: np.ndarray
    values: np.ndarray  # (K+1, N) or (R, K+1, N)
    weights: object = None  # None (all 1), (N,) or same shape as values

    def __post_init__(self):
        self.times = np.asarray(self.times, float)
        v = np.asarray(self.values, float)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim == 2:
            v = v[None]
        if v.shape[1] != len(self.times):
            raise ValueError("values must have one row per time")
        if self.times[0] != 0 or np.any(np.diff(self.times) <= 0):
            raise ValueError("times must increase strictly from 0")
        if not np.all(np.isfinite(v)):
            raise ValueError("driving values must be finite")
        self.values = v
        if self.weights is not None:
            w = np.asarray(self.weights, float)
            self.weights = w if w.ndim == 1 else np.broadcast_to(w, v.shape)

    @property
    def N(self):
        return self.values.shape[2]

    @property
    def replicas(self):
        return self.values.shape[0]

    @classmethod
    def constant(cls, u, T, steps):
        t = np.linspace(0, T, steps + 1)
        return cls(t, np.tile(np.atleast_1d(np.asarray(u, float)), (steps + 1, 1)))

    @classmethod
    def from_function(cls, fn, T, steps):
        t = np.linspace(0, T, steps + 1)
        return cls(t, np.array([np.atleast_1d(fn(s)) for s in t], float))

    @classmethod
    def from_gas(cls, cfg, T, steps, seed, replicas, dt_max=1e-2, sqrt=False):
        """Driving paths from a log-gas stored on a uniform grid.

        ``sqrt`` takes square roots (Bru-Wishart coordinates -> quadrant driver).
        Replicas aborted by the simulator are dropped.
        """
        t = np.linspace(0, T, steps + 1)
        traj = loggas.simulate(cfg, T, dt_max, seed, replicas=replicas, store=t[1:])
        ok = ~traj.collided
        start = np.tile(cfg.initial, (int(ok.sum()), 1, 1))
        vals = np.concatenate([start, traj.states[ok]], axis=1)
        return cls(t, np.sqrt(vals) if sqrt else vals)

    def weight_array(self):
        if self.weights is None:
            return np.ones(self.values.shape)
        return np.broadcast_to(self.weights, self.values.shape)


@dataclass
class LoewnerState:
    domain: str
    times: np.ndarray
    points: np.ndarray  # (P,)
    disp: np.ndarray  # (R, K+1, P) values of g_t(z) - z
    log_dg: np.ndarray  # (R, K+1, P) continuous log g_t'(z)
    driving: DrivingPath
    delta: float = 0.0
    tau: np.ndarray = field(default=None)  # (R, P) swallow times (inf if never)
    substeps: int = 0

    @property
    def g(self):
        return self.points + self.disp

    def alive(self, k=-1):
        return np.isfinite(self.disp[:, k, :])

    @property
    def hcap_rate(self):
        """d hcap / dt implied by the weights (2 sum lam_i)."""
        return 2 * self.driving.weight_array().sum(axis=-1)


def _rhs(domain, delta, z, d, X, lam):
    # returns (dd/dt, d log g'/dt) at g = z + d; X, lam are (m, N)
    g = (z + d)[..., None]
    a = 1 / (g - X[:, None, :])
    if domain == "H":
        f = 2 * np.sum(lam[:, None, :] * a, axis=-1)
        fp = -2 * np.sum(lam[:, None, :] * a * a, axis=-1)
    else:
        b = 1 / (g + X[:, None, :])
        f = 2 * np.sum(lam[:, None, :] * (a + b), axis=-1)
        fp = -2 * np.sum(lam[:, None, :] * (a * a + b * b), axis=-1)
        if delta:
            f = f + 4 * delta / g[..., 0]
            fp = fp - 4 * delta / g[..., 0] ** 2
    return f, fp


def _distance(domain, delta, g, X):
    d = np.min(np.abs(g[..., None] - X[:, None, :]), axis=-1)
    if domain == "O":
        d = np.minimum(d, np.min(np.abs(g[..., None] + X[:, None, :]), axis=-1))
        if delta:
            d = np.minimum(d, np.abs(g))
    return d


def _flow(domain, driving, points, delta=0.0):
    t = driving.times
    X = driving.values
    lam = driving.weight_array()
    R, K1, N = X.shape
    z = np.asarray(points, complex).ravel()
    P = len(z)
    if domain == "H" and np.any(z.imag <= 0):
        raise ValueError("points must lie in the upper half-plane")
    if domain == "O" and np.any((z.real <= 0) | (z.imag <= 0)):
        raise ValueError("points must lie in the open first quadrant")
    if np.any(_distance(domain, delta, np.broadcast_to(z, (R, P)), X[:, 0]) <= SWALLOW):
        raise ValueError("points too close to the driving starting values")
    disp = np.full((R, K1, P), np.nan + 0j)
    lg = np.full((R, K1, P), np.nan + 0j)
    disp[:, 0] = 0
    lg[:, 0] = 0
    tau = np.full((R, P), np.inf)
    d = np.zeros((R, P), complex)
    L = np.zeros((R, P), complex)
    alive = np.ones((R, P), bool)
    total = 0
    for k in range(K1 - 1):
        h = t[k + 1] - t[k]
        X0, X1 = X[:, k], X[:, k + 1]
        l0, l1 = lam[:, k], lam[:, k + 1]
        dist = _distance(domain, delta, z + d, X0)
        dist = np.where(alive, dist, np.inf)
        # substeps per replica so that each one is below (|g - X| / 10)^2
        n = np.ceil(100 * h / np.maximum(np.min(dist, axis=1), 1e-300) ** 2)
        n = np.clip(np.where(np.isfinite(n), n, 1), 1, MAX_SUBSTEPS).astype(int)
        for j in range(int(n.max())):
            rows = np.nonzero(n > j)[0]
            hs = h / n[rows]
            s0 = j * hs

            def drv(s):
                w = (s / h)[:, None]
                return X0[rows] + (X1[rows] - X0[rows]) * w, l0[rows] + (l1[rows] - l0[rows]) * w

            dd, LL = d[rows], L[rows]
            Xa, la = drv(s0)
            Xb, lb = drv(s0 + hs / 2)
            Xc, lc = drv(s0 + hs)
            hh = hs[:, None]
            k1 = _rhs(domain, delta, z, dd, Xa, la)
            k2 = _rhs(domain, delta, z, dd + hh / 2 * k1[0], Xb, lb)
            k3 = _rhs(domain, delta, z, dd + hh / 2 * k2[0], Xb, lb)
            k4 = _rhs(domain, delta, z, dd + hh * k3[0], Xc, lc)
            d[rows] = dd + hh / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
            L[rows] = LL + hh / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
            total += len(rows)
        gone = alive & ~(_distance(domain, delta, z + d, X1) > SWALLOW)
        if domain == "H":
            gone |= alive & ~((z + d).imag > 0)
        else:
            gone |= alive & ~(((z + d).imag > 0) & ((z + d).real > 0))
        tau[gone] = t[k + 1]
        alive &= ~gone
        d[~alive] = np.nan
        L[~alive] = np.nan
        disp[:, k + 1] = d
        lg[:, k + 1] = L
    return LoewnerState(domain, t, z, disp, lg, driving, delta, tau, total)


def forward_flow(driving, points):
    """Multiple Loewner flow in H for the given points."""
    return _flow("H", driving, points)


def quadrant_flow(driving, delta, points):
    """Multiple Loewner flow in the first quadrant O with the 4 delta / g term."""
    if np.any(driving.values < 0):
        raise ValueError("quadrant driving values must be >= 0")
    return _flow("O", driving, points, float(delta))


def quadrant_transport(driving, delta):
    """H driving equivalent to the quadrant flow via g_O(z)^2 = g_H(z^2) + c(t).

    With c(t) = 8 (N + delta) t the H map has drivers X_i^2 - c(t) and
    weights 4 X_i^2.
    """
    X = driving.values
    c = 8 * (driving.N + delta) * driving.times
    V = X ** 2 - c[None, :, None]
    return DrivingPath(driving.times, V, weights=4 * X ** 2), c


def refine(driving, factor):
    """Same path on a grid ``factor`` times finer (linear interpolation)."""
    t = driving.times
    fine = np.interp(np.arange(factor * (len(t) - 1) + 1) / factor, np.arange(len(t)), t)
    idx = np.arange(len(t))
    X = driving.values
    vals = np.stack([[np.interp(np.arange(len(fine)) / factor, idx, X[r, :, i])
                      for i in range(X.shape[2])] for r in range(X.shape[0])], axis=0)
    return DrivingPath(fine, np.swapaxes(vals, 1, 2), driving.weights if driving.weights is None
                       or np.ndim(driving.weights) == 1 else None)


def transport_residual(driving, delta, points, factor=32):
    """max |g_O(z) - sqrt(g_H(z^2) + c(t))| over the grid, points and replicas.

    Both flows interpolate their own drivers linearly, so the path is first
    refined to make the two interpolants agree to O((dt / factor)^2).
    """
    z = np.asarray(points, complex)
    driving = refine(driving, factor)
    so = quadrant_flow(driving, delta, z)
    hd, c = quadrant_transport(driving, delta)
    sh = forward_flow(hd, z ** 2)
    lift = np.sqrt(sh.g + c[None, :, None])
    return float(np.nanmax(np.abs(so.g - lift)))


def hcap_estimate(state, k=-1):
    """Half-plane capacity at time index k from two far tracked points.

    Uses c = Re[(g(z) - z) z] at the two largest points z = i y (|z| >= 50);
    the 1/z correction is purely imaginary there since the coefficients are real.
    """
    if state.domain != "H":
        raise ValueError("hcap is defined for the half-plane flow")
    z = state.points
    far = np.nonzero(np.abs(z) >= HCAP_RADIUS)[0]
    if len(far) < 2:
        raise ValueError("need two tracked points with |z| >= 50")
    far = far[np.argsort(np.abs(z[far]))[-2:]]
    c = np.real(state.disp[:, k, far] * z[far])
    if np.any(np.abs(c[:, 0] - c[:, 1]) > 1e-6):
        raise ArithmeticError("hcap fits disagree")
    return c.mean(axis=1)


# ------------------------------------------------------------ slit tracing

def _inv_slit(w, v, dt):
    # inverse of w -> v + sqrt((w - v)^2 + 4 dt), branch in the closed upper half-plane
    s = 2 * math.sqrt(dt)
    return v + np.sqrt(w - v - s + 0j) * np.sqrt(w - v + s + 0j)


@dataclass
class SlitTrace:
    times: np.ndarray
    tips: np.ndarray  # (K+1, N) complex
    touched: bool = False


def trace_slit(driving, T=None, dt=None):
    """Slit tips by the zipper: compose inverse vertical-slit maps.

    The driver is frozen on each grid step at its midpoint value, which
    makes every elementary map exact; for N > 1 the N slits of a step are
    applied in sequence. Requires a single replica.
    """
    if driving.replicas != 1:
        raise ValueError("trace one driving path at a time")
    t = driving.times
    if T is not None:
        t = t[t <= T + 1e-12]
    X = driving.values[0, :len(t)]
    lam = driving.weight_array()[0, :len(t)]
    N = X.shape[1]
    vs, hs, owner = [], [], []
    for k in range(len(t) - 1):
        h = t[k + 1] - t[k]
        for i in range(N):
            vs.append(0.5 * (X[k, i] + X[k + 1, i]))
            hs.append(0.5 * (lam[k, i] + lam[k + 1, i]) * h)
            owner.append(i)
    vs, hs = np.array(vs), np.array(hs)
    M = len(vs)
    w = vs.astype(complex)
    # tip of the map with flat index m: apply inverses m, m-1, ..., 0
    for m in range(M - 1, -1, -1):
        sel = slice(m, M)
        w[sel] = _inv_slit(w[sel], vs[m], hs[m])
    tips = np.zeros((len(t), N), complex)
    tips[0] = X[0]
    for m in range(M):
        tips[m // N + 1, owner[m]] = w[m]
    touched = bool(np.any(tips[1:].imag < 1e-9 * max(1.0, np.max(np.abs(tips)))))
    return SlitTrace(t, tips, touched)


def tilted_driving(alpha, T, steps):
    """Driving sqrt(kappa t) (alpha <= 1/2) or -sqrt(kappa t) with kappa = kappa(alpha)."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    kappa = 4 * (1 - 2 * alpha) ** 2 / (alpha * (1 - alpha))
    sign = 1.0 if alpha <= 0.5 else -1.0
    return DrivingPath.from_function(lambda s: sign * math.sqrt(kappa * s), T, steps)


def tilted_tip(alpha, t):
    """Closed-form tip of the tilted straight slit."""
    return 2 * ((1 - alpha) / alpha) ** (0.5 - alpha) * np.exp(1j * alpha * math.pi) * math.sqrt(t)


# --------------------------------------------------------- observables

def potential(domain, g, X, q=0.0):
    """Complex logarithmic potential Phi_D(g, X); g (R, P), X (R, N)."""
    a = np.sum(np.log(g[..., None] - X[:, None, :]), axis=-1)
    if domain == "H":
        return a
    return a + np.sum(np.log(g[..., None] + X[:, None, :]), axis=-1) + q * np.log(g)


def martingale_observable(state, kappa, k=-1):
    """M_D(z, t_k) for every replica and tracked point (NaN once swallowed).

    H: -Phi_H(g, X) - (1 - kappa/4) log g'.
    O: -Phi_O(g, X; q) - (1 - kappa/4) log g' with q = 1 - kappa/4.
    """
    a = 1 - kappa / 4
    g = state.g[:, k]
    X = state.driving.values[:, k]
    return -potential(state.domain, g, X, q=a if state.domain == "O" else 0.0) - a * state.log_dg[:, k]


def potential_drift_H(g, X, F, kappa):
    """dt coefficient of d Phi_H(g_t(z), X(t)) for dX_i = sqrt(kappa) dB_i + F_i dt.

    Returned as the two pieces of the decomposition: the interaction-corrected
    drift term and the log g' term, so that drift = first - (1 - kappa/4) dlog g'/dt.
    """
    g = np.asarray(g, complex)[..., None]
    X = np.asarray(X, float)
    N = X.shape[-1]
    inter = np.zeros_like(X)
    for i in range(N):
        for j in range(N):
            if i != j:
                inter[..., i] += 4 / (X[..., i] - X[..., j])
    first = -np.sum((F - inter) / (g - X), axis=-1)
    dlog = -2 * np.sum(1 / (g - X) ** 2, axis=-1)
    return first - (1 - kappa / 4) * dlog


def covariation(state, kappa, i, j):
    """Realized covariation of Im M_D at tracked points i, j along the grid, per replica."""
    M = np.stack([martingale_observable(state, kappa, k) for k in range(len(state.times))], axis=1)
    a = np.diff(M[:, :, i].imag, axis=1)
    b = np.diff(M[:, :, j].imag, axis=1)
    return np.sum(a * b, axis=1)
