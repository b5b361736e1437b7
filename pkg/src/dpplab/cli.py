"""Batch runner: every verification as a subcommand writing CSV data and a JSON summary.

Parameters come from defaults, then a JSON config file (--config), then flags.
Exit codes: 0 all checks pass, 1 a check failed, 2 configuration error.
Each subcommand draws its randomness from derive(seed, tag) where tag is the
CRC32 of the subcommand name, so reruns with the same (config, seed) are
bit-identical.
"""

import argparse
import csv
import json
import math
import os
import sys
import warnings
import zlib
from dataclasses import dataclass, field

import numpy as np

from . import dpp, dsp, gff, loggas, sle
from . import kernels as K
from . import specfun as sf
from .kernels import KernelSpec
from .rng import derive


class ConfigError(ValueError):
    pass


# ------------------------------------------------------------------ values

def floats(v):
    if isinstance(v, (list, tuple)):
        return [float(x) for x in v]
    if isinstance(v, (int, float)):
        return [float(v)]
    return [float(x) for x in str(v).split(",") if x.strip()]


def complexes(v):
    if isinstance(v, (list, tuple)):
        return [complex(str(x).replace("i", "j")) for x in v]
    return [complex(x.strip().replace("i", "j")) for x in str(v).split(",") if x.strip()]


def optional_floats(v):
    return None if v is None or v == "" else floats(v)


def choice(*opts):
    def parse(v):
        if str(v) not in opts:
            raise ValueError(f"must be one of {', '.join(opts)}")
        return str(v)
    parse.__name__ = "choice"
    return parse


@dataclass
class Check:
    check: str
    value: float
    target: float
    tolerance: float
    ok: bool

    def to_dict(self):
        return {"check": self.check, "value": _num(self.value), "target": _num(self.target),
                "tolerance": _num(self.tolerance), "pass": bool(self.ok)}


def _num(x):
    x = float(x)
    return x if math.isfinite(x) else str(x)


def close(name, value, target, tol, rel=False):
    err = abs(value - target) / (abs(target) if rel else 1.0)
    return Check(name, float(value), float(target), float(tol), bool(err <= tol))


def below(name, value, tol):
    return Check(name, float(value), 0.0, float(tol), bool(value < tol))


@dataclass
class Result:
    header: list
    rows: list
    checks: list
    plot: list = field(default_factory=list)  # (series, x, y, yerr)
    extra: dict = field(default_factory=dict)


def emit_plotdata(kind, inputs):
    """Tidy (series, x, y, yerr) rows for a kernel heatmap, relaxation curve or SLE trace."""
    if kind == "kernel-heatmap":
        grid, values = inputs
        return [(f"x={a:.6g}", float(b), float(values[i, j]), 0.0)
                for i, a in enumerate(grid) for j, b in enumerate(grid)]
    if kind == "relaxation":
        return [("relaxation", float(t), float(d), 0.0) for t, d in inputs]
    if kind == "sle-trace":
        tips = inputs
        return [(f"slit{i}", float(z.real), float(z.imag), 0.0)
                for i in range(tips.shape[1]) for z in tips[:, i]]
    if kind == "counting-law":
        return [(s, float(k), float(p), 0.0) for s, k, p in inputs]
    raise ValueError(f"unknown plot kind {kind!r}")


# ------------------------------------------------------------ subcommands

def _rng_seed(p, name):
    return derive(p["seed"], zlib.crc32(name.encode()))


def cmd_kernel_table(p):
    kind, N, nu = p["kernel"], p["N"], p["nu"]
    if N < 1 or N > 30:
        raise ConfigError("N must be in 1..30")
    if kind == "hermite":
        spec, lo, hi = KernelSpec.hermite(N), -6.0, 6.0
    elif kind == "laguerre":
        if not nu > -1:
            raise ConfigError("nu must be > -1")
        spec, lo, hi = KernelSpec.laguerre(N, nu), 0.0, 4.0 * N + 10
    else:
        spec, lo, hi = KernelSpec.root_system(kind, N), 0.0, (2 if kind == "A" else 1) * math.pi
    lo = p["lo"] if p["lo"] is not None else lo
    hi = p["hi"] if p["hi"] is not None else hi
    if not hi > lo or p["points"] < 2:
        raise ConfigError("need lo < hi and points >= 2")
    g = np.linspace(lo, hi, p["points"])
    X, Y = np.meshgrid(g, g, indexing="ij")
    V = np.real(K.lebesgue_kernel(spec, X, Y))
    rows = [(float(a), float(b), float(V[i, j])) for i, a in enumerate(g) for j, b in enumerate(g)]
    checks = [_cd_check(kind, N, nu, X, Y), _trace_check(kind, N, nu)]
    return Result(["x", "y", "K"], rows, checks, emit_plotdata("kernel-heatmap", (g, V)))


def _cd_check(kind, N, nu, X, Y):
    if kind == "hermite":
        a, b = K.eval_kernel(KernelSpec.hermite(N), X, Y), K.hermite_direct(N, X, Y)
        s = np.sqrt(K.hermite_direct(N, X, X) * K.hermite_direct(N, Y, Y))
    elif kind == "laguerre":
        a, b = K.eval_kernel(KernelSpec.laguerre(N, nu), X, Y), K.laguerre_direct(N, nu, X, Y)
        s = np.sqrt(K.laguerre_direct(N, nu, X, X) * K.laguerre_direct(N, nu, Y, Y))
    else:
        a, b = K.eval_kernel(KernelSpec.root_system(kind, N), X, Y), K.root_direct(kind, N, X, Y)
        s = 1.0
    return below(f"cd_vs_direct_{kind}", float(np.max(np.abs(a - b) / s)), 1e-10)


def _trace(kind, N, nu=0.0):
    from scipy import special

    if kind == "hermite":
        x, w = special.roots_hermite(200)
        return float(np.sum(w / math.sqrt(math.pi) * K.density(KernelSpec.hermite(N), x)))
    if kind == "laguerre":
        x, w = special.roots_genlaguerre(200, nu)
        return float(np.sum(w / math.gamma(nu + 1) * K.density(KernelSpec.laguerre(N, nu), x)))
    t, w = np.polynomial.legendre.leggauss(200)
    hi = 2 * math.pi if kind == "A" else math.pi
    return float(np.sum(0.5 * w * K.density(KernelSpec.root_system(kind, N), 0.5 * hi * (t + 1))))


def _trace_check(kind, N, nu):
    return close(f"trace_{kind}", _trace(kind, N, nu), N, 1e-6)


def cmd_identity_suite(p):
    rng = np.random.default_rng(_rng_seed(p, "identity-suite"))
    checks = []
    worst = 0.0
    for N in (1, 5, 17, 30):
        x, y = rng.uniform(-10, 10, 200), rng.uniform(-10, 10, 200)
        worst = max(worst, _cd_check("hermite", N, 0.0, x, y).value)
    checks.append(below("cd_hermite_N<=30", worst, 1e-10))
    worst = 0.0
    for nu in (-0.5, 0.0, 2.0):
        for N in (1, 6, 30):
            x, y = rng.uniform(0, 10, 200), rng.uniform(0, 10, 200)
            worst = max(worst, _cd_check("laguerre", N, nu, x, y).value)
    checks.append(below("cd_laguerre_N<=30", worst, 1e-10))
    for root in "ABCD":
        r = max(K.weyl_identity_residual(root, rng.uniform(0, 3, N) + 1j * rng.uniform(-0.5, 0.5, N))
                for N in range(1, 7) for _ in range(5))
        checks.append(below(f"weyl_{root}", r, 1e-9))
    checks.append(below("trace_hermite", max(abs(_trace("hermite", N) - N) for N in (1, 8, 20)), 1e-6))
    checks.append(below("trace_laguerre", max(abs(_trace("laguerre", N, nu) - N)
                                              for nu in (-0.5, 0.0, 2.0) for N in (1, 6, 12)), 1e-6))
    checks.append(below("trace_root_systems", max(abs(_trace(r, N) - N) for r in "ABCD" for N in (1, 4, 9)), 1e-6))
    x, w = np.polynomial.hermite.hermgauss(80)
    phi = sf.hermite_table(11, x, weighted=True) * np.exp(x * x / 2)
    checks.append(below("orthonormal_hermite", float(np.max(np.abs((phi * w) @ phi.T - np.eye(12)))), 1e-10))
    checks.append(below("scaling_bulk_sinc", K.scaling_limit_error("bulk", 200, (-2, 2)), 1e-2))
    checks.append(below("scaling_soft_edge_airy", K.scaling_limit_error("soft_edge", 200, (-2, 2)), 1e-2))
    checks.append(below("scaling_hard_edge_bessel", K.scaling_limit_error("hard_edge", 200, (0.05, 5), nu=0.3), 1e-2))
    for root in "ABCD":
        checks.append(below(f"scaling_circular_{root}",
                            K.scaling_limit_error("circular_bulk", 200, (0.05, 5), root=root), 1e-2))
    rows = [(c.check, c.value, c.tolerance, int(c.ok)) for c in checks]
    return Result(["identity", "value", "tolerance", "pass"], rows, checks)


def _density_error(x, spec, edges):
    est = dpp.estimate_correlation(x, 1, edges)
    ref = dpp.bin_average(lambda q: np.real(K.lebesgue_kernel(spec, q, q)), edges)
    return float(np.max(np.abs(est.value - ref)))


def cmd_dpp_sample(p):
    ens, N, n = p["ensemble"], p["N"], p["replicas"]
    if N < 1 or n < 1:
        raise ConfigError("N and replicas must be >= 1")
    seed = _rng_seed(p, "dpp-sample")
    checks = []
    if ens == "gue":
        x = dpp.sample_gue_batch(N, n, seed)
        top = math.sqrt(2 * N) + 2
        checks.append(below("density_sup_bin_error", _density_error(x, KernelSpec.hermite(N),
                                                                     np.linspace(-top, top, 19)), 0.03))
    elif ens == "chgue":
        if p["nu"] < 0 or int(p["nu"]) != p["nu"]:
            raise ConfigError("chGUE needs an integer nu >= 0")
        x = dpp.sample_chgue_batch(N, int(p["nu"]), n, seed)
        checks.append(below("density_sup_bin_error", _density_error(
            x, KernelSpec.laguerre(N, float(p["nu"])), np.linspace(0, 4 * N + 2 * p["nu"] + 6, 31)), 0.03))
    elif ens == "cue":
        x = dpp.sample_cue_batch(N, n, seed)
        c = np.histogram(x.ravel(), np.linspace(0, 2 * math.pi, 13))[0] / n / (2 * math.pi / 12)
        checks.append(below("density_sup_bin_error", float(np.max(np.abs(c - N / (2 * math.pi)))), 0.03))
    else:
        x = dpp.sample_ginibre_batch(N, n, seed)
        for r in (1.0, 2.0, 3.0):
            if r * r < N / 2:
                m = float((np.abs(x) <= r).sum(axis=1).mean())
                checks.append(close(f"mean_count_r{r:g}", m, r * r, 0.02, rel=True))
    rows = [(i, j, float(np.real(v)), float(np.imag(v))) for i in range(n) for j, v in enumerate(x[i])]
    return Result(["replica", "index", "re", "im"], rows, checks)


def cmd_duality_check(p):
    fam, N, n = p["family"], p["N"], p["replicas"]
    rs = p["r"] if p["r"] is not None else ([1.0, 2.0, 3.0] if fam == "ginibre" else
                                            [2.0] if fam == "laguerre" else [-1.0, 0.0, 1.0])
    if n < 1 or N < 1:
        raise ConfigError("N and replicas must be >= 1")
    if fam != "ginibre" and N > 30:
        raise ConfigError("N must be in 1..30")
    if fam == "laguerre" and (min(rs) <= 0 or p["nu"] < 0 or int(p["nu"]) != p["nu"]):
        raise ConfigError("Laguerre duality needs r > 0 and integer nu >= 0")
    if fam == "ginibre" and min(rs) <= 0:
        raise ConfigError("Ginibre radii must be > 0")
    seed = _rng_seed(p, "duality-check")
    if fam == "hermite":
        x = dpp.sample_gue_batch(N, n, seed)
    elif fam == "laguerre":
        x = dpp.sample_chgue_batch(N, int(p["nu"]), n, seed)
    else:
        x = np.abs(dpp.sample_ginibre_batch(N, n, seed))
    rows, checks, plot = [], [], []
    for r in rs:
        if fam == "ginibre":
            law = dpp.ginibre_radial_law(r)
            counts = (x <= r).sum(axis=1)
            tol = 0.015
            checks.append(close(f"mean_count_r{r:g}", counts.mean(), r * r, 0.02, rel=True))
        else:
            law = dpp.counting_law(dpp.gram_restriction(fam, N, r, p["nu"]))
            counts = (x >= r).sum(axis=1)
            tol = 0.01
        size = max(len(law.pmf) - 1, int(counts.max()))
        emp = dpp.empirical_law(counts, size)
        exact = np.pad(law.pmf, (0, size + 1 - len(law.pmf)))
        checks.append(below(f"tv_r{r:g}", dpp.total_variation(emp, exact), tol))
        for k in range(size + 1):
            rows.append((r, k, float(emp[k]), float(exact[k])))
            plot += [(f"r={r:g} empirical", k, emp[k]), (f"r={r:g} exact", k, exact[k])]
    return Result(["r", "k", "empirical", "exact"], rows, checks, emit_plotdata("counting-law", plot))


def _gas_config(p, N):
    kw = {}
    if p["model"] == "bru_wishart":
        kw["nu"] = p["nu"]
    if p["model"] == "circular":
        kw["radius"] = p["radius"]
    init = p["initial"]
    if init is None and p["model"] == "circular":
        init = list(2 * math.pi * p["radius"] * np.arange(N) / N)
    if p["kappa"] is not None:
        return loggas.GasConfig.from_kappa(p["model"], N, p["kappa"], initial=init, **kw)
    return loggas.GasConfig(p["model"], N, beta=p["beta"], initial=init, **kw)


def cmd_gas_simulate(p):
    cfg = _gas_config(p, p["N"])
    T, steps = p["T"], p["store"]
    if not T > 0 or steps < 1 or p["replicas"] < 1:
        raise ConfigError("need T > 0, store >= 1 and replicas >= 1")
    times = list(np.linspace(0, T, steps + 1)[1:])
    tr = loggas.simulate(cfg, T, p["dt"], _rng_seed(p, "gas-simulate"), replicas=p["replicas"], store=times)
    rows = []
    for i in range(min(p["replicas"], p["csv_replicas"])):
        if tr.collided[i]:
            continue
        for k, t in enumerate(times):
            rows += [(i, float(t), j, float(v)) for j, v in enumerate(tr.states[i, k])]
    ok = ~tr.collided
    ordered = bool(np.all(np.diff(tr.states[ok], axis=2) > 0)) if cfg.N > 1 else True
    checks = [Check("collisions", tr.collisions, 0, 0, tr.collisions == 0),
              Check("ordered", float(ordered), 1.0, 0, ordered)]
    extra = {"reflections": tr.reflections, "min_gap": _num(np.min(tr.min_gap)),
             "mean_steps": float(np.mean(tr.steps))}
    return Result(["replica", "time", "particle", "value"], rows, checks, extra=extra)


def cmd_gas_moments(p):
    N, T, n = p["N"], p["T"], p["replicas"]
    if not 1 <= N <= 4 or not T > 0 or n < 2:
        raise ConfigError("need 1 <= N <= 4, T > 0 and replicas >= 2")
    seed = _rng_seed(p, "gas-moments")
    kappa = p["kappa"] if p["kappa"] is not None else 2.0
    u = np.linspace(-1.5, 1.5, N) if N > 1 else np.zeros(1)
    cfg = loggas.GasConfig.from_kappa("dyson", N, kappa, initial=u)
    tr = loggas.simulate(cfg, T, p["dt"], seed, replicas=n)
    S = tr.at(T)[~tr.collided].sum(axis=1)
    var, var_se = float(S.var(ddof=1)), float(S.var(ddof=1) * math.sqrt(2 / (len(S) - 1)))
    v = np.linspace(0.5, 3.0, N) if N > 1 else np.array([1.0])
    bw = loggas.GasConfig("bru_wishart", N, beta=2.0, nu=p["nu"], initial=v)
    tb = loggas.simulate(bw, T, p["dt"], derive(seed, 1), replicas=n)
    L = tb.at(T)[~tb.collided].sum(axis=1)
    mean, mean_se = float(L.mean()), float(L.std(ddof=1) / math.sqrt(len(L)))
    t1, t2 = N * kappa * T, float(v.sum() + 2 * N * (p["nu"] + N) * T)
    checks = [Check("dyson_sum_variance", var, t1, 3 * var_se, abs(var - t1) <= 3 * var_se),
              Check("bru_wishart_sum_mean", mean, t2, 3 * mean_se, abs(mean - t2) <= 3 * mean_se)]
    rows = [("dyson", "var_sum", var, var_se, t1), ("bru_wishart", "mean_sum", mean, mean_se, t2)]
    return Result(["model", "statistic", "value", "se", "target"], rows, checks)


_DSP_CONFIGS = {
    "bm": lambda p: dsp.InitialConfig("bm", [-0.5, 0.5]),
    "besq": lambda p: dsp.InitialConfig("besq", [0.3, 1.5], nu=p["nu"]),
    "circle": lambda p: dsp.InitialConfig("circle", [0.5, 2.5], radius=p["radius"]),
}


def cmd_dsp_check(p):
    procs = list(_DSP_CONFIGS) if p["process"] == "all" else [p["process"]]
    if p["replicas"] < 2:
        raise ConfigError("replicas must be >= 2")
    xis = {k: _DSP_CONFIGS[k](p) for k in procs}
    seed = _rng_seed(p, "dsp-check")
    rows, checks = [], []
    for a, (name, xi) in enumerate(xis.items()):
        for b, (fname, (F, times)) in enumerate(dsp.standard_functionals(xi).items()):
            r = dsp.dmr_expectation(xi, F, times, p["replicas"], derive(seed, a, b))
            rows.append((name, fname, r.direct, r.direct_se, r.weighted, r.weighted_se, r.z))
            checks.append(Check(f"dmr_{name}_{fname}", r.z, 0.0, 3.0, abs(r.z) < 3))
    return Result(["process", "functional", "direct", "direct_se", "weighted", "weighted_se", "z"],
                  rows, checks)


def cmd_relaxation(p):
    N, r = p["N"], p["radius"]
    times = p["t"] if p["t"] is not None else [0.25 * r * r, r * r, 4 * r * r]
    if N < 2 or not r > 0 or min(times) <= 0:
        raise ConfigError("need N >= 2, radius > 0 and t > 0")
    seed = _rng_seed(p, "relaxation")
    rows, checks = [], []
    for k, t in enumerate(times):
        d = dsp.relaxation_distance(N, r, t, p["replicas"], derive(seed, k), bins=p["bins"])
        rows.append((t, d))
        if t >= 4 * r * r - 1e-12:
            checks.append(below(f"relaxation_t{t:g}", d, 0.05))
    return Result(["t", "distance"], rows, checks, emit_plotdata("relaxation", rows))


def cmd_sle_trace(p):
    T, steps = p["T"], p["steps"]
    if not T > 0 or steps < 1:
        raise ConfigError("need T > 0 and steps >= 1")
    drv = p["driver"]
    checks = []
    if drv == "zero":
        d = sle.DrivingPath.constant(0.0, T, steps)
    elif drv == "tilted":
        if not 0 < p["alpha"] < 1:
            raise ConfigError("alpha must lie in (0, 1)")
        d = sle.tilted_driving(p["alpha"], T, steps)
    elif drv == "constant":
        d = sle.DrivingPath.constant(sorted(p["u"]), T, steps)
    else:
        if not 0 < p["kappa"] <= 4:
            raise ConfigError("kappa must lie in (0, 4] for traced curves")
        rng = np.random.default_rng(_rng_seed(p, "sle-trace"))
        w = np.concatenate([[0.0], np.cumsum(rng.standard_normal(steps))]) * math.sqrt(p["kappa"] * T / steps)
        d = sle.DrivingPath(np.linspace(0, T, steps + 1), w)
    tr = sle.trace_slit(d)
    tip = tr.tips[-1, 0]
    if drv == "zero":
        checks.append(close("tip_vertical", abs(tip - 2j * math.sqrt(T)) / (2 * math.sqrt(T)), 0, 1e-3))
    if drv == "tilted":
        a = p["alpha"]
        checks.append(close("tip_angle", np.angle(tip) / math.pi, a, 0.01 * a))
    checks.append(Check("not_touched", float(tr.touched), 0.0, 0, not tr.touched))
    # analytic oracles of the solver on this driving path
    s = sle.forward_flow(d, np.array([1e4j, 2e4j]))
    lam = d.weight_array()[0].sum(axis=-1)
    hc = np.concatenate([[0.0], np.cumsum(np.diff(d.times) * (lam[1:] + lam[:-1]))])
    checks.append(below("hcap_vs_2t", float(np.max(np.abs([sle.hcap_estimate(s, k)[0] - hc[k]
                                                          for k in range(len(d.times))]))), 1e-4))
    z = np.array([1 + 1j, -2 + 0.5j, 0.3 + 2j, 3j, -0.7 + 0.2j, 4 + 1j, 0.1 + 0.1j, -5 + 3j, 2 + 2j, 1.5 + 0.5j])
    z0 = sle.forward_flow(sle.DrivingPath.constant(0.0, 2.0, 200), z)
    ex = np.sqrt(z[None] ** 2 + 4 * z0.times[:, None])
    ex = np.where(ex.imag < 0, -ex, ex)
    checks.append(below("zero_driving_map_error", float(np.max(np.abs(z0.g[0] - ex))), 1e-6))
    rng = np.random.default_rng(derive(p["seed"], 5))
    w = 1 + np.concatenate([[0.0], np.cumsum(rng.standard_normal(100)) * 0.05])
    q = sle.DrivingPath(np.linspace(0, 0.25, 101), np.abs(w))
    checks.append(below("quadrant_transport_residual",
                        sle.transport_residual(q, 0.5, np.array([1 + 1j, 0.4 + 1.3j])), 1e-6))
    rows = [(float(t), i, float(v.real), float(v.imag)) for k, t in enumerate(tr.times)
            for i, v in enumerate(tr.tips[k])]
    return Result(["time", "slit", "re", "im"], rows, checks, emit_plotdata("sle-trace", tr.tips))


def cmd_sle_martingale(p):
    dom, kappa, N = p["domain"], p["kappa"], p["N"]
    if not 0 < kappa <= 4:
        raise ConfigError("kappa must lie in (0, 4]")
    pts = np.array(p["points"] or ([2j, -1 + 1.5j] if dom == "H" else [1 + 2j]), complex)
    seed = _rng_seed(p, "sle-martingale")
    if dom == "H":
        init = p["initial"] or (list(np.linspace(-0.5, 0.5, N)) if N > 1 else [0.0])
        cfg = loggas.GasConfig.from_kappa("dyson", N, kappa, initial=init)
    else:
        init = p["initial"] or (list(np.linspace(0.5, 1.5, N)) if N > 1 else [1.0])
        cfg = loggas.GasConfig.from_kappa("bru_wishart", N, kappa, nu=p["nu"], initial=init)
    d = sle.DrivingPath.from_gas(cfg, p["T"], p["steps"], seed, p["replicas"], sqrt=dom == "O")
    with np.errstate(all="ignore"):
        s = sle.forward_flow(d, pts) if dom == "H" else sle.quadrant_flow(d, p["nu"], pts)
        Ms = np.stack([sle.martingale_observable(s, kappa, k) for k in range(len(d.times))], axis=1)
    checks, rows = [], []
    marks = sorted({int(round(f * p["steps"])) for f in (0.25, 0.5, 0.75, 1.0)} - {0})
    for j, z in enumerate(pts):
        for k in marks:
            ok = np.isfinite(Ms[:, k, j])
            dm = Ms[ok, k, j] - Ms[ok, 0, j]
            for part, v in (("re", dm.real), ("im", dm.imag)):
                se = float(v.std(ddof=1) / math.sqrt(len(v)))
                checks.append(Check(f"mean_{part}_z{z}_t{d.times[k]:g}", float(v.mean()), 0.0, 3 * se,
                                    abs(v.mean()) <= 3 * se))
    if dom == "H" and len(pts) >= 2:
        cv = sle.covariation(s, kappa, 0, 1)
        tgt = -(kappa / 4) * (gff.green("H", s.g[:, -1, 0], s.g[:, -1, 1]) - gff.green("H", pts[0], pts[1]))
        ok = np.isfinite(cv) & np.isfinite(tgt)
        checks.append(close("covariation_vs_green", cv[ok].mean(), tgt[ok].mean(), 0.05, rel=True))
    for i in range(min(p["csv_replicas"], d.replicas)):
        for k, t in enumerate(d.times):
            for j in range(len(pts)):
                m = Ms[i, k, j]
                if np.isfinite(m):
                    rows.append((float(t), i, j, float(m.real), float(m.imag)))
    extra = {"swallowed": int(np.sum(np.isfinite(s.tau)))}
    return Result(["time", "replica", "point", "re_M", "im_M"], rows, checks, extra=extra)


def cmd_gff_stationarity(p):
    dom = p["domain"]
    c = complex(p["center"].replace("i", "j")) if isinstance(p["center"], str) else complex(p["center"])
    f = gff.TestFn(c, p["radius"], dom)
    times = p["t"] if p["t"] is not None else [0.1, 0.25]
    with np.errstate(all="ignore"):
        rep = gff.stationarity_check(dom, p["kappa"], p["N"], f, times, p["replicas"],
                                     _rng_seed(p, "gff-stationarity"), nu=p["nu"],
                                     initial=p["initial"])
    rows, checks = [], []
    for r in rep.rows:
        rows.append((r.t, r.mean, r.mean_se, r.mean0, r.var, r.energy_t, r.energy_0, r.excluded))
        checks.append(Check(f"mean_t{r.t:g}", r.mean, r.mean0, 3 * r.mean_se, r.mean_ok))
        checks.append(Check(f"variance_balance_t{r.t:g}", r.balance, r.energy_0, 0.05 * r.energy_0, r.var_ok))
    return Result(["t", "mean", "mean_se", "mean0", "var", "energy_t", "energy_0", "excluded"], rows, checks,
                  extra={"report": rep.to_dict()})


# --------------------------------------------------------------- registry

COMMON = {"seed": (int, 0)}

COMMANDS = {
    "kernel-table": (cmd_kernel_table, {
        "kernel": (choice("hermite", "laguerre", "A", "B", "C", "D"), "hermite"),
        "N": (int, 8), "nu": (float, 0.0), "lo": (float, None), "hi": (float, None), "points": (int, 41)}),
    "identity-suite": (cmd_identity_suite, {}),
    "dpp-sample": (cmd_dpp_sample, {
        "ensemble": (choice("gue", "chgue", "cue", "ginibre"), "gue"),
        "N": (int, 8), "nu": (float, 1.0), "replicas": (int, 10000)}),
    "duality-check": (cmd_duality_check, {
        "family": (choice("hermite", "laguerre", "ginibre"), "hermite"),
        "N": (int, 8), "r": (optional_floats, None), "nu": (float, 1.0), "replicas": (int, 100000)}),
    "gas-simulate": (cmd_gas_simulate, {
        "model": (choice("dyson", "bru_wishart", "circular"), "dyson"), "N": (int, 3),
        "beta": (float, 2.0), "kappa": (float, None), "nu": (float, 0.5), "radius": (float, 1.0),
        "initial": (optional_floats, None), "T": (float, 1.0), "dt": (float, 1e-2),
        "replicas": (int, 1000), "store": (int, 10), "csv_replicas": (int, 100)}),
    "gas-moments": (cmd_gas_moments, {
        "N": (int, 4), "kappa": (float, 2.0), "nu": (float, 0.5), "T": (float, 1.0),
        "dt": (float, 1e-2), "replicas": (int, 100000)}),
    "dsp-check": (cmd_dsp_check, {
        "process": (choice("all", "bm", "besq", "circle"), "all"), "nu": (float, 0.5),
        "radius": (float, 1.0), "replicas": (int, 100000)}),
    "relaxation": (cmd_relaxation, {
        "N": (int, 4), "radius": (float, 1.0), "t": (optional_floats, None),
        "replicas": (int, 100000), "bins": (int, 12)}),
    "sle-trace": (cmd_sle_trace, {
        "driver": (choice("zero", "tilted", "constant", "brownian"), "zero"), "alpha": (float, 1 / 3),
        "kappa": (float, 2.0), "u": (floats, [0.0]), "T": (float, 1.0), "steps": (int, 1000)}),
    "sle-martingale": (cmd_sle_martingale, {
        "domain": (choice("H", "O"), "H"), "kappa": (float, 2.0), "N": (int, 2), "nu": (float, 0.5),
        "initial": (optional_floats, None), "points": (complexes, None), "T": (float, 0.5),
        "steps": (int, 100), "replicas": (int, 10000), "csv_replicas": (int, 20)}),
    "gff-stationarity": (cmd_gff_stationarity, {
        "domain": (choice("H", "O"), "H"), "kappa": (float, 2.0), "N": (int, 2), "nu": (float, 0.5),
        "initial": (optional_floats, None), "center": (str, "2j"), "radius": (float, 0.3),
        "t": (optional_floats, None), "replicas": (int, 10000)}),
}


def build_parser():
    ap = argparse.ArgumentParser(prog="dpplab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name, (_, params) in COMMANDS.items():
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON file with parameters; flags override it")
        sp.add_argument("--seed", help="root seed (unsigned 64-bit)")
        sp.add_argument("--threads", help="worker cap (results do not depend on it)")
        sp.add_argument("--out", help="output prefix for PREFIX.csv / PREFIX.json")
        for key in params:
            sp.add_argument(f"--{key}", dest=f"p_{key}")
    return ap


def resolve(args):
    """Merged, validated parameter dict (defaults < config file < flags)."""
    _, spec = COMMANDS[args.command]
    raw = {k: d for k, (_, d) in spec.items()}
    meta = {"seed": 0, "threads": 1, "out": args.command}
    if args.config:
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config: {e}") from None
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a JSON object")
        cmd = cfg.pop("command", args.command)
        if cmd != args.command:
            raise ConfigError(f"config is for {cmd!r}, not {args.command!r}")
        block = dict(cfg.pop("params", {}))
        for k in list(cfg):
            (meta if k in meta else block)[k] = cfg[k]
        for k, v in block.items():
            if k not in spec:
                raise ConfigError(f"unknown parameter {k!r}")
            raw[k] = v
    for k in spec:
        v = getattr(args, f"p_{k}")
        if v is not None:
            raw[k] = v
    for k in meta:
        v = getattr(args, k)
        if v is not None:
            meta[k] = v
    p = {}
    for k, (conv, _) in spec.items():
        v = raw[k]
        try:
            p[k] = None if v is None else conv(v)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"parameter {k}: {e}") from None
    try:
        p["seed"] = int(meta["seed"])
        threads = int(meta["threads"])
    except (TypeError, ValueError):
        raise ConfigError("seed and threads must be integers") from None
    if not 0 <= p["seed"] < 2 ** 64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    if threads < 1:
        raise ConfigError("threads must be >= 1")
    return p, threads, str(meta["out"])


def _check_finite(rows):
    for row in rows:
        for v in row:
            if isinstance(v, (float, np.floating)) and not math.isfinite(v):
                raise ArithmeticError("non-finite value in CSV output")


def write_outputs(prefix, command, params, threads, res):
    _check_finite(res.rows)
    _check_finite([r[1:] for r in res.plot])
    d = os.path.dirname(prefix)
    if d:
        os.makedirs(d, exist_ok=True)
    with open(prefix + ".csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(res.header)
        w.writerows(res.rows)
    if res.plot:
        with open(prefix + "_plot.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["series", "x", "y", "yerr"])
            w.writerows(res.plot)
    summary = {"command": command, "seed": params["seed"], "threads": threads,
               "params": {k: _jsonable(v) for k, v in params.items() if k != "seed"},
               "checks": [c.to_dict() for c in res.checks],
               "pass": all(c.ok for c in res.checks)}
    summary.update(res.extra)
    with open(prefix + ".json", "w") as fh:
        json.dump(summary, fh, indent=2)
    return summary


def _jsonable(v):
    if isinstance(v, complex):
        return str(v)
    if isinstance(v, list):
        return [_jsonable(x) for x in v]
    return v


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        params, threads, out = resolve(args)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            res = COMMANDS[args.command][0](params)
    except ValueError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    summary = write_outputs(out, args.command, params, threads, res)
    for c in summary["checks"]:
        print(f"{'PASS' if c['pass'] else 'FAIL'} {c['check']}: {c['value']} (target {c['target']}, tol {c['tolerance']})")
    return 0 if summary["pass"] else 1


if __name__ == "__main__":
    sys.exit(main())
