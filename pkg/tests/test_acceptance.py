"""End-to-end acceptance suite: one summary line per criterion.

Heavy Monte Carlo criteria are marked slow; run everything with plain pytest.
"""
import json
import math
import warnings

import numpy as np
import pytest

from dpplab import cli, dpp, loggas
from dpplab import kernels as K
from dpplab.kernels import KernelSpec
from dpplab.rng import derive


@pytest.fixture(autouse=True)
def _quiet():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        warnings.simplefilter("ignore", UserWarning)
        yield


def run_cli(tmp_path, *argv):
    prefix = str(tmp_path / argv[0])
    code = cli.main([*argv, "--out", prefix])
    with open(prefix + ".json") as fh:
        return code, json.load(fh)


def worst(checks):
    return ", ".join(f"{c['check']}={c['value']:.3g}" for c in checks)


def test_criterion_01_kernel_identities(acceptance):
    rng = np.random.default_rng(derive(2024, 1))
    cd = 0.0
    for N in range(1, 31):
        x, y = rng.uniform(-10, 10, 400), rng.uniform(-10, 10, 400)
        a, b = K.eval_kernel(KernelSpec.hermite(N), x, y), K.hermite_direct(N, x, y)
        s = np.sqrt(K.hermite_direct(N, x, x) * K.hermite_direct(N, y, y))
        cd = max(cd, float(np.max(np.abs(a - b) / s)))
        for nu in (-0.5, 0.0, 1.0, 2.0):
            x, y = rng.uniform(0, 10, 200), rng.uniform(0, 10, 200)
            a, b = K.eval_kernel(KernelSpec.laguerre(N, nu), x, y), K.laguerre_direct(N, nu, x, y)
            s = np.sqrt(K.laguerre_direct(N, nu, x, x) * K.laguerre_direct(N, nu, y, y))
            cd = max(cd, float(np.max(np.abs(a - b) / s)))
    weyl = max(K.weyl_identity_residual(root, rng.uniform(0, 3, N) + 1j * rng.uniform(-0.5, 0.5, N))
               for root in "ABCD" for N in range(1, 7) for _ in range(10))
    ok = cd < 1e-10 and weyl < 1e-9
    acceptance(1, "kernel identities", ok, f"CD rel err {cd:.2e} (<1e-10), Weyl residual {weyl:.2e} (<1e-9)")
    assert ok


def test_criterion_02_projection_traces(acceptance):
    errs = {"hermite": max(abs(cli._trace("hermite", N) - N) for N in (1, 4, 8, 20, 30))}
    for nu in (-0.5, 0.0, 2.0):
        errs[f"laguerre_nu{nu:g}"] = max(abs(cli._trace("laguerre", N, nu) - N) for N in (1, 6, 12, 30))
    for root in "ABCD":
        errs[root] = max(abs(cli._trace(root, N) - N) for N in (1, 4, 9, 30))
    w = max(errs.values())
    ok = w < 1e-6
    acceptance(2, "projection traces", ok, f"max |trace - N| {w:.2e} (<1e-6) over {len(errs)} kernels")
    assert ok


def test_criterion_03_scaling_limits(acceptance):
    errs = {
        "bulk": K.scaling_limit_error("bulk", 200, (-2, 2)),
        "soft": K.scaling_limit_error("soft_edge", 200, (-2, 2)),
        "hard": K.scaling_limit_error("hard_edge", 200, (0.05, 5), nu=0.3),
    }
    for root in "ABCD":
        errs[root] = K.scaling_limit_error("circular_bulk", 200, (0.05, 5), root=root)
    ok = max(errs.values()) < 1e-2
    acceptance(3, "scaling limits", ok, ", ".join(f"{k} {v:.1e}" for k, v in errs.items()) + " (<1e-2)")
    assert ok


@pytest.mark.slow
def test_criterion_04_counting_duality(tmp_path, acceptance):
    c1, h = run_cli(tmp_path, "duality-check", "--family", "hermite", "--N", "8", "--replicas", "100000")
    c2, lg = run_cli(tmp_path, "duality-check", "--family", "laguerre", "--N", "6", "--nu", "1",
                     "--r", "2", "--replicas", "100000", "--seed", "1")
    tv = [c for c in h["checks"] + lg["checks"] if c["check"].startswith("tv")]
    ok = c1 == 0 and c2 == 0 and len(tv) == 4 and all(c["pass"] for c in tv)
    acceptance(4, "GUE/Laguerre counting duality", ok, worst(tv) + " (TV<0.01, 1e5 samples)")
    assert ok


@pytest.mark.slow
def test_criterion_05_ginibre_duality(tmp_path, acceptance):
    code, s = run_cli(tmp_path, "duality-check", "--family", "ginibre", "--N", "64", "--replicas", "10000")
    ok = code == 0 and len(s["checks"]) == 6 and s["pass"]
    acceptance(5, "Ginibre radial duality", ok, worst(s["checks"]) + " (TV<0.015, mean within 2%)")
    assert ok


@pytest.mark.slow
def test_criterion_06_gas_moments(tmp_path, acceptance):
    code, s = run_cli(tmp_path, "gas-moments", "--N", "4", "--replicas", "100000")
    detail = ", ".join(f"{c['check']} {c['value']:.4f} vs {c['target']:.4f} (3se {c['tolerance']:.4f})"
                       for c in s["checks"])
    ok = code == 0 and s["pass"]
    acceptance(6, "log-gas moments", ok, detail)
    assert ok


@pytest.mark.slow
def test_criterion_07_noncolliding(acceptance):
    counts = {}
    for beta in (1.0, 2.0, 4.0):
        cfgs = {
            "dyson": loggas.GasConfig("dyson", 3, beta=beta, initial=[-1.0, 0.0, 1.0]),
            "bru_wishart": loggas.GasConfig("bru_wishart", 3, beta=beta, nu=0.5, initial=[0.5, 1.5, 3.0]),
            "circular": loggas.GasConfig("circular", 3, beta=beta, initial=2 * math.pi * np.arange(3) / 3),
        }
        for name, cfg in cfgs.items():
            tr = loggas.simulate(cfg, 1.0, 1e-2, derive(7, int(beta), len(name)), replicas=10000)
            counts[f"{name}_b{beta:g}"] = tr.collisions
    ok = all(v == 0 for v in counts.values())
    acceptance(7, "noncolliding contract", ok,
               ", ".join(f"{k}={v}" for k, v in counts.items()) + " collisions in 1e4 replicas")
    assert ok


@pytest.mark.slow
def test_criterion_08_dmr(tmp_path, acceptance):
    code, s = run_cli(tmp_path, "dsp-check", "--replicas", "100000")
    ok = code == 0 and len(s["checks"]) == 6 and s["pass"]
    acceptance(8, "DMR equivalence", ok, worst(s["checks"]) + " (|z|<3)")
    assert ok


def _density_error(x, spec, edges):
    est = dpp.estimate_correlation(x, 1, edges)
    ref = dpp.bin_average(lambda q: np.real(K.lebesgue_kernel(spec, q, q)), edges)
    return float(np.max(np.abs(est.value - ref)))


@pytest.mark.slow
def test_criterion_09_entrance_law(acceptance):
    t, n = 1.0, 100000
    dy = loggas.simulate(loggas.GasConfig("dyson", 4), t, 1e-2, derive(9, 0), replicas=n)
    e1 = _density_error(dy.at(t)[~dy.collided],
                        K.transform_kernel(KernelSpec.hermite(4), "dilate", math.sqrt(2 * t)),
                        np.linspace(-6, 6, 25))
    bw = loggas.simulate(loggas.GasConfig("bru_wishart", 4, nu=0.5), t, 1e-2, derive(9, 1), replicas=n)
    e2 = _density_error(bw.at(t)[~bw.collided],
                        K.transform_kernel(KernelSpec.laguerre(4, 0.5), "dilate", 2 * t),
                        np.linspace(0, 40, 41))
    ok = e1 < 0.03 and e2 < 0.03 and dy.collisions == 0 and bw.collisions == 0
    acceptance(9, "entrance law", ok, f"Dyson sup bin err {e1:.4f}, BESQ sup bin err {e2:.4f} (<0.03)")
    assert ok


@pytest.mark.slow
def test_criterion_10_relaxation(tmp_path, acceptance):
    code, s = run_cli(tmp_path, "relaxation", "--N", "4", "--radius", "1", "--t", "4", "--replicas", "100000")
    ok = code == 0 and len(s["checks"]) == 1 and s["pass"]
    acceptance(10, "relaxation to CUE", ok, worst(s["checks"]) + " (<0.05)")
    assert ok


def test_criterion_11_loewner_oracles(tmp_path, acceptance):
    runs = [run_cli(tmp_path, "sle-trace", "--driver", "zero"),
            run_cli(tmp_path, "sle-trace", "--driver", "tilted", "--alpha", str(1 / 3)),
            run_cli(tmp_path, "sle-trace", "--driver", "tilted", "--alpha", str(2 / 3)),
            run_cli(tmp_path, "sle-trace", "--driver", "brownian", "--seed", "3")]
    checks = [c for _, s in runs for c in s["checks"]]
    names = {c["check"] for c in checks}
    need = {"zero_driving_map_error", "tip_angle", "hcap_vs_2t", "quadrant_transport_residual"}
    ok = all(code == 0 for code, _ in runs) and all(c["pass"] for c in checks) and need <= names
    by = {}
    for c in checks:
        by[c["check"]] = max(by.get(c["check"], -math.inf), abs(c["value"] - c["target"]))
    acceptance(11, "Loewner oracles", ok, ", ".join(f"{k} {by[k]:.2e}" for k in sorted(need)))
    assert ok


def test_criterion_12_martingale_observable(tmp_path, acceptance):
    cH, h = run_cli(tmp_path, "sle-martingale", "--domain", "H", "--N", "2", "--kappa", "2",
                    "--points", "2j", "--replicas", "10000", "--seed", "1")
    cO, o = run_cli(tmp_path, "sle-martingale", "--domain", "O", "--N", "2", "--kappa", "2",
                    "--points", "1+2j", "--replicas", "10000", "--seed", "1")
    checks = h["checks"] + o["checks"]
    zmax = max(abs(c["value"]) / (c["tolerance"] / 3) for c in checks)
    ok = cH == 0 and cO == 0 and len(checks) == 16
    acceptance(12, "martingale observable", ok, f"H and O means constant, max |z| {zmax:.2f} (<3), 1e4 paths")
    assert ok


def test_criterion_13_covariation(tmp_path, acceptance):
    code, s = run_cli(tmp_path, "sle-martingale", "--domain", "H", "--N", "2", "--kappa", "2",
                      "--points", "1+1j,-1+1.5j", "--T", "0.25", "--steps", "250", "--replicas", "4000")
    c = [c for c in s["checks"] if c["check"] == "covariation_vs_green"][0]
    rel = abs(c["value"] / c["target"] - 1)
    ok = c["pass"]
    acceptance(13, "covariation vs Green increment", ok,
               f"{c['value']:.4f} vs {c['target']:.4f}, rel err {rel:.3f} (<0.05)")
    assert ok


@pytest.mark.slow
@pytest.mark.parametrize("domain,N,center", [("H", 1, "2j"), ("H", 2, "2j"), ("O", 1, "1+1.5j")])
def test_criterion_14_gff_stationarity(tmp_path, acceptance, request, domain, N, center):
    code, s = run_cli(tmp_path, "gff-stationarity", "--domain", domain, "--N", str(N),
                      "--center", center, "--t", "0.1,0.25", "--replicas", "10000")
    rows = s["report"]["rows"]
    ok = code == 0 and s["pass"] and len(rows) == 2
    store = request.config.stash.setdefault(_GFF, {})
    store[(domain, N)] = (ok, ", ".join(f"t={r['t']:g} balance/E0-1 {r['balance'] / r['energy_0'] - 1:+.3f}"
                                        for r in rows))
    all_ok = all(v[0] for v in store.values())
    acceptance(14, "GFF stationarity", all_ok,
               "; ".join(f"{d} N={n}: {v[1]}" for (d, n), v in store.items()))
    assert ok


_GFF = pytest.StashKey()
