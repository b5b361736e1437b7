"""Stochastic log-gases: Dyson, Bru-Wishart and circular Dyson.

All three models carry a diffusion scale s.  With s = 1 they are the
beta-parametrised systems

    Dyson        dY_i = dB_i + (beta/2) sum_j dt / (Y_i - Y_j)
    Bru-Wishart  dL_i = 2 sqrt(L_i) dB_i + beta [(nu+1) + 2 L_i sum_j 1/(L_i - L_j)] dt
    circular     dX_i = dB_i + (beta/4r) sum_j cot((X_i - X_j)/2r) dt

and ``GasConfig.from_kappa`` gives the kappa form (s = kappa, beta = 8/kappa).
"""

from dataclasses import dataclass, field
import math
import warnings

import numpy as np

from .dpp import gue_matrices, _complex_normal
from .kernels import PointConfiguration
from .rng import stream

MODELS = ("dyson", "bru_wishart", "circular")
GAP_FACTOR = 0.01
COLLISION_GAP = 1e-12
ENTRANCE_T0 = 1e-4
BLOCK = 50000


@dataclass
class GasConfig:
    model: str
    N: int
    beta: float = 2.0
    nu: float = 0.0
    radius: float = 1.0
    scale: float = 1.0
    initial: object = None  # None means all particles at the origin

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"model must be one of {MODELS}")
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if self.model == "bru_wishart" and not self.nu > -1:
            raise ValueError("nu must be > -1")
        if self.beta < 1:
            warnings.warn("beta < 1: noncolliding property not guaranteed", stacklevel=2)
        if self.initial is None:
            if self.model == "circular":
                raise ValueError("circular model needs explicit initial positions")
        else:
            u = np.asarray(self.initial, dtype=float)
            if u.shape != (self.N,):
                raise ValueError("initial must have N entries")
            if self.N > 1 and self.model != "circular" and np.all(u == 0):
                self.initial = None  # N-fold origin start
                return
            if np.any(np.diff(u) <= 0):
                raise ValueError("initial positions must be strictly increasing")
            if self.model == "bru_wishart" and u[0] < 0:
                raise ValueError("Bru-Wishart positions must be >= 0")
            if self.model == "circular" and (u[0] < 0 or u[-1] >= 2 * math.pi * self.radius):
                raise ValueError("circular positions must lie in [0, 2 pi r)")
            self.initial = u

    @classmethod
    def from_kappa(cls, model, N, kappa, **kw):
        """kappa-parametrised system: beta = 8/kappa with diffusion scale kappa."""
        return cls(model, N, beta=8.0 / kappa, scale=kappa, **kw)

    @property
    def kappa(self):
        return 8.0 / self.beta


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # (replicas, len(times), N); NaN after an aborted replica
    config: GasConfig
    collided: np.ndarray = field(default=None)
    min_gap: np.ndarray = field(default=None)
    steps: np.ndarray = field(default=None)
    reflections: int = 0

    @property
    def collisions(self):
        return int(np.sum(self.collided))

    def at(self, t):
        k = int(np.argmin(np.abs(self.times - t)))
        return self.states[:, k, :]


# ------------------------------------------------------------------- drifts

def _pair_sum(X, f):
    # sum_j f(X_i - X_j) for an odd f, pair by pair (N is small)
    out = np.zeros_like(X)
    N = X.shape[1]
    for i in range(N):
        for j in range(i + 1, N):
            v = f(X[:, i] - X[:, j])
            out[:, i] += v
            out[:, j] -= v
    return out


def drift(cfg, X):
    s, b = cfg.scale, cfg.beta
    if cfg.model == "dyson":
        return 0.5 * s * b * _pair_sum(X, np.reciprocal)
    if cfg.model == "bru_wishart":
        return s * b * (cfg.nu + 1) + interaction(cfg, X)
    r = cfg.radius
    return s * b / (4 * r) * _pair_sum(X, lambda d: 1 / np.tan(d / (2 * r)))


def interaction(cfg, X):
    """Bru-Wishart drift without the free BESQ part."""
    return 2 * cfg.scale * cfg.beta * X * _pair_sum(X, np.reciprocal)


def _gaps(cfg, X):
    g = np.diff(X, axis=1)
    if cfg.model == "circular":
        wrap = X[:, :1] + 2 * math.pi * cfg.radius - X[:, -1:]
        g = np.concatenate([g, wrap], axis=1) if cfg.N > 1 else wrap
    return g


def _step_size(cfg, X, dt_max):
    s = cfg.scale
    dt = np.full(len(X), float(dt_max))
    if cfg.model == "bru_wishart":
        if cfg.N > 1:
            # gaps measured in sqrt coordinates, where the noise is additive
            g = np.min(np.diff(np.sqrt(X), axis=1), axis=1)
            dt = np.minimum(dt, GAP_FACTOR * g * g / s)
    elif cfg.N > 1 or cfg.model == "circular":
        g = np.min(_gaps(cfg, X), axis=1)
        dt = np.minimum(dt, GAP_FACTOR * g * g / s)
    return dt


# --------------------------------------------------------- entrance laws

def beta_hermite(N, beta, n, rng):
    """(n, N) eigenvalues with density prop. to |Delta|^beta exp(-sum x^2/2) (tridiagonal model)."""
    diag = rng.standard_normal((n, N)) * math.sqrt(2.0)
    off = np.sqrt(rng.chisquare(beta * np.arange(N - 1, 0, -1), size=(n, N - 1))) if N > 1 else None
    if N == 1:
        return diag / math.sqrt(2.0)
    T = np.zeros((n, N, N))
    T[:, np.arange(N), np.arange(N)] = diag
    T[:, np.arange(N - 1), np.arange(1, N)] = off
    T[:, np.arange(1, N), np.arange(N - 1)] = off
    return np.linalg.eigvalsh(T / math.sqrt(2.0))


def beta_laguerre(N, beta, nu, n, rng):
    """(n, N) eigenvalues with density prop. to prod x^{beta(nu+1)/2 - 1} |Delta|^beta e^{-sum x/2}."""
    i = np.arange(1, N + 1)
    d = np.sqrt(rng.chisquare(beta * (nu + N - i + 1), size=(n, N)))
    B = np.zeros((n, N, N))
    B[:, np.arange(N), np.arange(N)] = d
    if N > 1:
        e = np.sqrt(rng.chisquare(beta * np.arange(N - 1, 0, -1), size=(n, N - 1)))
        B[:, np.arange(1, N), np.arange(N - 1)] = e
    return np.linalg.eigvalsh(B @ np.swapaxes(B, 1, 2))


def entrance_sample(cfg, t, n, rng):
    """Exact equal-time law at time t of the process started with all N particles at 0."""
    if cfg.model == "dyson":
        return math.sqrt(cfg.scale * t) * beta_hermite(cfg.N, cfg.beta, n, rng)
    if cfg.model == "bru_wishart":
        return cfg.scale * t * beta_laguerre(cfg.N, cfg.beta, cfg.nu, n, rng)
    raise ValueError("the multiple-point start is only for Dyson and Bru-Wishart")


def matrix_reference(model, N, t, seed, nu=0, replicas=1, steps=1):
    """Eigenvalues at time t of the Hermitian or Laguerre matrix process.

    The matrix is accumulated from ``steps`` independent Gaussian increments;
    returns an (replicas, N) array (a PointConfiguration for replicas=1).
    """
    rng = stream(seed, 0)
    if model == "hermitian_bm":
        H = sum(gue_matrices(N, replicas, rng, t=2 * t / steps) for _ in range(steps))
        ev = np.linalg.eigvalsh(H)
    elif model == "laguerre":
        if nu < 0 or int(nu) != nu:
            raise ValueError("Laguerre matrix process needs integer nu >= 0")
        K = sum(_complex_normal(rng, (replicas, N + int(nu), N), 2 * t / steps) for _ in range(steps))
        ev = np.linalg.eigvalsh(np.conj(np.swapaxes(K, 1, 2)) @ K)
    else:
        raise ValueError("model must be 'hermitian_bm' or 'laguerre'")
    return PointConfiguration(ev[0]) if replicas == 1 else ev


# --------------------------------------------------------------- simulator

def _run_block(cfg, T, dt_max, store, rng, R):
    N = cfg.N
    t = np.zeros(R)
    if cfg.initial is None:
        X = entrance_sample(cfg, ENTRANCE_T0, R, rng)
        t[:] = ENTRANCE_T0
    else:
        X = np.tile(cfg.initial, (R, 1))
    alive = np.ones(R, bool)
    min_gap = np.full(R, np.inf)
    steps = np.zeros(R, int)
    refl = 0
    out = np.empty((R, len(store), N))
    sig = math.sqrt(cfg.scale)
    for k, target in enumerate(store):
        while True:
            idx = np.nonzero(alive & (t < target - 1e-13))[0]
            if idx.size == 0:
                break
            Xa = X[idx]
            dt = np.minimum(_step_size(cfg, Xa, dt_max), target - t[idx])
            if cfg.model == "bru_wishart":
                Xn = _besq_split_step(cfg, Xa, dt, rng)
                neg = Xn < 0
                if np.any(neg):
                    refl += int(np.sum(neg))
                    Xn = np.abs(Xn)
            else:
                Z = rng.standard_normal(Xa.shape)
                Xn = Xa + drift(cfg, Xa) * dt[:, None] + sig * np.sqrt(dt)[:, None] * Z
            ok = np.ones(len(idx), bool)
            if N > 1 or cfg.model == "circular":
                g = np.min(_gaps(cfg, Xn), axis=1)
                min_gap[idx] = np.minimum(min_gap[idx], g)
                ok = g > COLLISION_GAP
            alive[idx[~ok]] = False
            X[idx] = Xn
            t[idx] += dt
            steps[idx] += 1
        out[:, k] = np.where(alive[:, None], X, np.nan)
    return out, ~alive, min_gap, steps, refl


def _besq_split_step(cfg, X, dt, rng):
    # pair interaction by Euler (cannot push a coordinate below 0 at these
    # step sizes), then an exact squared-Bessel step of dimension beta(nu+1)
    # for each coordinate; the mean of the drift sum stays exact
    if cfg.N > 1:
        X = X + interaction(cfg, X) * dt[:, None]
    h = cfg.scale * dt[:, None]
    return h * rng.noncentral_chisquare(cfg.beta * (cfg.nu + 1), np.maximum(X, 0) / h)


def simulate(config, T, dt_max, seed, replicas=1, store=None):
    """Euler-Maruyama ensemble with per-replica adaptive steps.

    ``store`` lists the output times (default [T]).  Replicas are processed
    in fixed blocks, each with its own random stream.
    """
    if not T > 0 or not dt_max > 0:
        raise ValueError("need T > 0 and dt_max > 0")
    store = np.asarray([T] if store is None else sorted(store), dtype=float)
    if store[0] <= (ENTRANCE_T0 if config.initial is None else 0) or store[-1] > T:
        raise ValueError("store times must lie in (0, T]")
    parts = []
    for b, start in enumerate(range(0, replicas, BLOCK)):
        parts.append(_run_block(config, T, dt_max, store, stream(seed, b), min(BLOCK, replicas - start)))
    states = np.concatenate([p[0] for p in parts])
    traj = Trajectory(store, states, config,
                      collided=np.concatenate([p[1] for p in parts]),
                      min_gap=np.concatenate([p[2] for p in parts]),
                      steps=np.concatenate([p[3] for p in parts]),
                      reflections=sum(p[4] for p in parts))
    if traj.reflections and config.model == "bru_wishart" and config.nu >= 0:
        warnings.warn(f"{traj.reflections} negative coordinates reflected", stacklevel=2)
    return traj


def circular_positions(traj):
    """(wrapped angles in [0, 2 pi r), winding numbers) of a circular trajectory."""
    if traj.config.model != "circular":
        raise ValueError("not a circular trajectory")
    return wrap(traj.states, traj.config.radius)


def wrap(x, radius=1.0):
    period = 2 * math.pi * radius
    w = np.floor_divide(x, period)
    return x - w * period, w.astype(int) if np.all(np.isfinite(w)) else w
