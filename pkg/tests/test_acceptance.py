"""Acceptance criteria 1-10 at their stated sizes and tolerances.

Each test prints one PASS/FAIL line and the full list is repeated in the
terminal summary. Criteria 1 and 2 compare against 1/(2π²k²); the rooted
winding area computed here is 1/(4π²k²), so both fail by a factor of two
(see the decisions ledger). Criterion 7 asks for no variance growth across
levels, which a martingale bounded in L² does not satisfy at finite depth.
"""
import math

import numpy as np
import pytest

from oracles import ray_crossing_winding
from windsoup.cli import main
from windsoup.exact import (fourier_identity_partial, lemma1_radial_integral, lemma1_value, winding_pmf_contour,
                            winding_pmf_fourier)
from windsoup.experiments import ExperimentConfig, run_experiment
from windsoup.field import a_exponent
from windsoup.sampler import Loop
from windsoup.winding import winding_number

SEED = 20261016


def _checks(result):
    return {c.name: c for c in result.checks}


def _fmt(c):
    return f"{c.name}={c.estimate:.6g} (ref {c.reference_value:.6g}, z={c.z_score:.2f})"


def test_criterion_1_lemma1_monte_carlo(record):
    res = run_experiment(ExperimentConfig(experiment="verify-lemma1", seed=SEED))
    chk = _checks(res)
    assert res.rows and sum(r[3] for r in res.rows if r[1] == 1) >= 10**6
    names = [f"lemma1_k{k}" for k in (1, 2, 3)] + [f"lemma1_k{k}_relative" for k in (1, 2, 3)]
    ok = all(chk[n].passed for n in names)
    detail = "; ".join(_fmt(chk[f"lemma1_k{k}"]) for k in (1, 2, 3))
    detail += "; derived 1/(4π²k²): " + ", ".join(
        f"k={k} {'ok' if chk[f'rooted_winding_area_k{k}'].passed else 'off'}" for k in (1, 2, 3))
    record(1, ok, detail)
    assert ok


def test_criterion_2_lemma1_quadrature(record):
    errs = {(m, k): abs(lemma1_radial_integral(k, m) - lemma1_value(k))
            for m in ("contour", "fourier") for k in (1, 2, 3)}
    ok = max(errs.values()) < 1e-5
    ratio = lemma1_radial_integral(1) / lemma1_value(1)
    record(2, ok, f"max |error| = {max(errs.values()):.3g} (tol 1e-5); radial/stated = {ratio:.9f}")
    assert ok


def test_criterion_3_representation_agreement(record):
    diff = max(abs(winding_pmf_contour(n, r) - winding_pmf_fourier(n, r))
               for n in (1, 2, 3) for r in (0.5, 1.0, 2.0))
    ok = diff < 1e-6
    record(3, ok, f"max |contour - Fourier| = {diff:.3g} (tol 1e-6)")
    assert ok


def test_criterion_4_lemma2_poisson(record):
    cfg = ExperimentConfig(experiment="verify-lemma2", alpha=2.0, delta=0.2, replicas=10_000, seed=SEED)
    chk = _checks(run_experiment(cfg))
    mean, var = chk["lemma2_mean_k1"], chk["lemma2_poisson_variance_k1"]
    ok = mean.passed and var.passed
    record(4, ok, f"{_fmt(mean)}; variance z={var.z_score:.2f}")
    assert ok


def test_criterion_5_lemma3_scaling(record):
    cfg = ExperimentConfig(experiment="verify-lemma3", alpha=1.0, beta=math.pi, replicas=10_000, seed=SEED)
    res = run_experiment(cfg)
    deltas = cfg.schedule.scales
    assert np.allclose(deltas, [0.5, 0.35, 0.25, 0.18, 0.125], atol=0.004)
    chk = _checks(res)
    level = [c for c in res.checks if c.name.startswith(("re_w_", "im_w_"))]
    slope = chk["loglog_slope"]
    ok = len(level) == 10 and all(c.passed for c in level) and slope.passed
    worst = max(level, key=lambda c: abs(c.z_score))
    record(5, ok, f"worst level {_fmt(worst)}; slope {slope.estimate:.4f} vs 0.25 (tol 5%)")
    assert ok


@pytest.mark.parametrize("alpha", [1.0, 2.0])
def test_criterion_6_martingale(record, alpha):
    cfg = ExperimentConfig(experiment="martingale-scan", alpha=alpha, beta=math.pi, replicas=10_000, seed=SEED)
    res = run_experiment(cfg)
    means = [c for c in res.checks if c.name.startswith(("re_z_", "im_z_"))]
    corr = [c for c in res.checks if c.name.startswith("increment_corr")]
    ok = len(means) == 2 * len(cfg.schedule) and corr and all(c.passed for c in means + corr)
    worst_m = max(means, key=lambda c: abs(c.z_score))
    worst_c = max(corr, key=lambda c: abs(c.z_score))
    # the two alpha values share one criterion line
    from conftest import CRITERIA

    prev_ok, prev = CRITERIA.get(6, (True, ""))
    detail = f"α={alpha:g}: worst mean {_fmt(worst_m)}, worst corr {_fmt(worst_c)}"
    record(6, prev_ok and ok, f"{prev}; {detail}" if prev else detail)
    assert ok


def test_criterion_7_variance_growth(record):
    cfg = ExperimentConfig(experiment="field-moments", alpha=2.0, h="indicator", h_radius=0.5,
                           beta=math.pi, seed=SEED)
    res = run_experiment(cfg)
    trend = _checks(res)["variance_trend_slope"]
    var = res.diagnostics["variance"]
    # exploratory α = 4 scan: emitted, never gated
    explo = run_experiment(ExperimentConfig(experiment="field-moments", alpha=4.0, beta=math.pi, replicas=100,
                                            grid_n=16, seed=SEED))
    assert all(not c.gated for c in explo.checks) and explo.all_pass
    ok = trend.passed
    record(7, ok, f"variance by level {np.round(var, 4).tolist()}; slope {trend.estimate:.3g} "
                  f"± {trend.stderr:.2g} (z={trend.z_score:.2f}); α=4 variances "
                  f"{np.round(explo.diagnostics['variance'], 3).tolist()} (not gated)")
    assert ok


def test_criterion_8_winding_oracle(record):
    rng = np.random.default_rng(SEED)
    agree = 0
    for _ in range(1000):
        n = int(rng.integers(3, 60))
        if rng.random() < 0.5:
            v = rng.normal(0, 1, n) + 1j * rng.normal(0, 1, n)
        else:
            th = np.sort(rng.random(n)) * 2 * np.pi * int(rng.integers(1, 5))
            v = (0.3 + rng.random(n)) * np.exp(1j * th * rng.choice([-1, 1]))
        x = complex(*rng.normal(0, 0.5, 2))
        agree += winding_number(Loop.from_polygon(v), x) == ray_crossing_winding(list(v), x)
    transformed = 0
    for _ in range(100):
        v = rng.normal(0, 1, 12) + 1j * rng.normal(0, 1, 12)
        x = complex(*rng.normal(0, 0.5, 2))
        rot = np.exp(1j * rng.uniform(0, 2 * np.pi))
        n = winding_number(Loop.from_polygon(v), x)
        transformed += (winding_number(Loop.from_polygon(v * rot), x * rot) == n
                        and winding_number(Loop.from_polygon(np.conj(v)), x.conjugate()) == -n)
    ok = agree == 1000 and transformed == 100
    record(8, ok, f"oracle agreement {agree}/1000; transformed {transformed}/100")
    assert ok


def test_criterion_9_fourier_identity(record):
    errs = {b: abs(fourier_identity_partial(b, 10**6) - b * (2 * math.pi - b) / (4 * math.pi**2))
            for b in (math.pi / 2, math.pi, 1.5 * math.pi)}
    tail = [0.25 - fourier_identity_partial(math.pi, N) for N in (10, 1000, 10**5)]
    ok = max(errs.values()) < 1e-5 and all(a > b > 0 for a, b in zip(tail, tail[1:])) and a_exponent(math.pi) == 0.25
    record(9, ok, f"max error at N=10^6 {max(errs.values()):.3g}; 1/4 - S_N at N=10,10^3,10^5: "
                  + ", ".join(f"{t:.2g}" for t in tail))
    assert ok


SMALL_RUNS = {
    "verify-lemma1": "bridges = 20000\nreplicas = 10\n",
    "verify-lemma2": "replicas = 200\n",
    "verify-lemma3": "replicas = 100\n",
    "martingale-scan": "replicas = 100\nalpha = 2\n",
    "field-moments": "replicas = 8\ngrid_n = 8\n",
    "exact-tables": "",
    "soup-dump": "replicas = 20\n",
}


def test_criterion_10_determinism(record, tmp_path):
    same = []
    for name, text in SMALL_RUNS.items():
        cfg = tmp_path / f"{name}.cfg"
        cfg.write_text(text)
        outs = []
        for workers in (1, 8):
            out = tmp_path / f"{name}-{workers}"
            main([name, "--config", str(cfg), "--seed", str(SEED), "--out", str(out), "--workers", str(workers)])
            outs.append((out / f"{name}.csv").read_bytes())
        same.append(outs[0] == outs[1] and len(outs[0]) > 0)
    ok = all(same)
    record(10, ok, f"byte-identical CSVs at 1 and 8 workers for {sum(same)}/{len(same)} experiments")
    assert ok
