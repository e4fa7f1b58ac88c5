"""Acceptance criteria, each run at its stated tolerance.

Every test records one PASS/FAIL line through the ``criterion`` fixture; the
lines are repeated in the pytest terminal summary.
"""
from __future__ import annotations

import itertools
import time
from functools import partial

import numpy as np
import pytest
import yaml

from conftest import fd_oracle
from qderiv.bench import reference
from qderiv.bench.cli import main
from qderiv.bench.experiments import ExperimentConfig, cmd_mse_sweep, cmd_scaling_sweep
from qderiv.circuit import PauliString, random_circuit
from qderiv.derivatives import ExactEvaluator, derivative_tensor, pi_shift_identity_check, ps_tensor
from qderiv.estimators import EstimatorSpec, empirical_report, exact_derivatives, optimal_lambda
from qderiv.optimizers import OptimizerConfig, optimize
from qderiv.reconstruct import trig_reconstruct
from qderiv.simulator import SinglePauli, expectation

REF = reference.reference_circuit()
OBS = reference.observable()
THETA = reference.REFERENCE_ANGLES
SHOT_GRID = [100, 1_000, 10_000, 100_000, 1_000_000]


def _random_problems(count=50, seed=2024):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        n = int(rng.integers(1, 6))
        m = int(rng.integers(1, 7))
        c = random_circuit(n, m, rng, max_weight=min(3, n))
        obs = SinglePauli(PauliString("".join(rng.choice(list("XYZ"), n))))
        yield c, obs, rng.uniform(0, 2 * np.pi, m)


# --- 1, 2: exact rules -------------------------------------------------------

def test_c01_shift_rules_are_exact(criterion):
    start = time.perf_counter()
    worst_fd = worst_s = 0.0
    for c, obs, theta in _random_problems():
        ev = ExactEvaluator(c, obs)
        fn = partial(expectation, c, obs=obs)
        for order in (1, 2):
            for idx in itertools.combinations_with_replacement(range(c.n_params), order):
                ref = ps_tensor(ev, theta, idx)
                worst_fd = max(worst_fd, abs(ref - fd_oracle(fn, theta, idx, 1e-5)))
                for s in (0.3, 1.0):
                    worst_s = max(worst_s, abs(ps_tensor(ev, theta, idx, s) - ref))
    elapsed = time.perf_counter() - start
    ok = worst_fd <= 1e-5 and worst_s <= 1e-9 and elapsed < 60
    criterion("C01 shift rules vs finite differences", ok,
              f"max |ps - fd| {worst_fd:.2e}, max shift spread {worst_s:.2e}, {elapsed:.1f}s")
    assert ok


def test_c02_pi_shift_identity(criterion):
    worst = 0.0
    for c, obs, theta in _random_problems():
        ev = ExactEvaluator(c, obs)
        for j in range(c.n_params):
            lhs, rhs = pi_shift_identity_check(ev, theta, j)
            worst = max(worst, abs(lhs - rhs))
    criterion("C02 pi-shift identity", worst <= 1e-10, f"max deviation {worst:.2e}")
    assert worst <= 1e-10


# --- 3, 4: reconstruction and reference values ---------------------------------

def test_c03_trig_reconstruction(criterion):
    start = time.perf_counter()
    ev = ExactEvaluator(REF, OBS)
    sur = trig_reconstruct(ev)
    pts = np.random.default_rng(3).uniform(0, 2 * np.pi, (100, 5))
    worst = max(abs(sur(p) - expectation(REF, p, OBS)) for p in pts)
    elapsed = time.perf_counter() - start
    ok = ev.calls == 243 and worst <= 1e-9 and elapsed < 10
    criterion("C03 trig reconstruction", ok, f"{ev.calls} evaluations, max error {worst:.2e}, {elapsed:.2f}s")
    assert ok


def test_c04_reference_values(criterion):
    cal = reference.calibrate()
    ev = ExactEvaluator(REF, OBS)
    cost = ev(THETA)
    grad = derivative_tensor(ev, THETA, 1).to_array()
    hess = derivative_tensor(ev, THETA, 2).to_array()
    if cal.matched:
        atol = reference.GOLDEN_ATOL
        dev = max(abs(cost - reference.GOLDEN_COST), np.max(np.abs(grad - reference.GOLDEN_GRADIENT)),
                  np.max(np.abs(hess - reference.GOLDEN_HESSIAN)))
        ok = dev <= atol
        detail = f"calibrated candidate {cal.candidate_index} {cal.cnots}, max deviation {dev:.1e}"
    else:
        dev = max(abs(cost - cal.cost), np.max(np.abs(grad - cal.gradient)), np.max(np.abs(hess - cal.hessian)))
        ok = dev <= 1e-9
        detail = f"calibration-unmet; pinned-circuit goldens, max deviation {dev:.1e}"
    criterion("C04 known cost, gradient and Hessian", ok, detail)
    assert ok


# --- 5-8: estimator statistics --------------------------------------------------

@pytest.fixture(scope="module")
def gradient_sweep():
    cfg = ExperimentConfig(kind="scaling-sweep", seed=20240501, order=1, repetitions=1000,
                           shots=[10, 30] + SHOT_GRID, fit_min_shots=100)
    start = time.perf_counter()
    res = cmd_scaling_sweep(cfg)
    return res, time.perf_counter() - start


@pytest.fixture(scope="module")
def hessian_sweep():
    cfg = ExperimentConfig(kind="scaling-sweep", seed=20240502, order=2, repetitions=1000, shots=SHOT_GRID)
    start = time.perf_counter()
    res = cmd_scaling_sweep(cfg)
    return res, time.perf_counter() - start


def _fits(res):
    return {(r["estimator"], r["quantity"]): r["exponent"] for r in res.rows if r["record"] == "fit"}


def test_c05_gradient_scaling(criterion, gradient_sweep):
    res, elapsed = gradient_sweep
    fits = _fits(res)
    targets = {("central", "mse"): (-2 / 3, 0.07), ("forward", "mse"): (-0.5, 0.07),
               ("param_shift", "mse"): (-1.0, 0.05), ("central", "step"): (-1 / 6, 0.05)}
    ok = all(abs(fits[k] - t) <= tol for k, (t, tol) in targets.items()) and elapsed < 15 * 60
    cross = {r["quantity"]: r["value"] for r in res.rows if r["record"] == "crossover"}
    detail = ", ".join(f"{k[0]} {k[1]} {fits[k]:+.3f}" for k in targets)
    detail += f"; crossover N~{cross['fit_intersection']:.0f} (sign change in [{cross['bracket_low']}, {cross['bracket_high']}])"
    criterion("C05 gradient MSE scaling", ok, f"{detail}; {elapsed:.0f}s")
    assert ok
    assert cross["fit_intersection"] is not None


def test_c06_hessian_scaling(criterion, hessian_sweep):
    res, elapsed = hessian_sweep
    fits = _fits(res)
    fd, ps = fits["central", "mse"], fits["param_shift", "mse"]
    ok = abs(fd + 0.5) <= 0.05 and abs(ps + 1.0) <= 0.05 and elapsed < 20 * 60
    criterion("C06 Hessian MSE scaling", ok, f"finite difference {fd:+.4f}, parameter shift {ps:+.4f}; {elapsed:.0f}s")
    assert ok


def test_c07_step_curve_shape(criterion):
    cfg = ExperimentConfig(kind="mse-sweep", seed=20240503, shots=[1000], repetitions=1000,
                           estimators=["central", "param_shift"])
    rows = cmd_mse_sweep(cfg).rows
    central = [r for r in rows if r["estimator"] == "central"]
    ps = [r for r in rows if r["estimator"] == "param_shift"]
    i = int(np.argmin([r["total_mse"] for r in central]))
    h_best = central[i]["step"]
    interior = 0 < i < len(central) - 1
    monotone = all(b["total_mse"] <= a["total_mse"] + 2 * np.hypot(a["total_mse_se"], b["total_mse_se"])
                   for a, b in zip(ps, ps[1:]))
    ok = interior and 0.4 <= h_best <= 0.9 and monotone
    criterion("C07 step-size curve shape", ok, f"central minimum at h={h_best:.3f}, parameter-shift monotone={monotone}")
    assert ok


def test_c08_scaled_estimator_dominates(criterion, gradient_sweep):
    res, _ = gradient_sweep
    cells = [r for r in res.rows if r["record"] == "cell" and r["estimator"] in ("central", "param_shift")
             and r["shots"] in SHOT_GRID]
    truth = exact_derivatives(REF, THETA, OBS, 1)
    worst, failures = -np.inf, 0
    for n in SHOT_GRID:
        lam = optimal_lambda(REF, THETA, OBS, n)
        scaled = empirical_report(EstimatorSpec.scaled(lam), REF, THETA, OBS, n, 1000, seed=20240504, truth=truth)
        for r in (c for c in cells if c["shots"] == n):
            margin = 2 * np.hypot(scaled.total_mse_se, r["total_mse_se"])
            gap = scaled.total_mse - r["total_mse"]
            worst = max(worst, gap / margin)
            failures += gap > margin
    criterion("C08 scaled estimator dominance", failures == 0,
              f"{len(cells)} comparisons, worst gap {worst:+.2f} x (2 SE)")
    assert failures == 0


def test_c09_bias_variance_decomposition(criterion):
    specs = [EstimatorSpec.param_shift(s) for s in (0.3, np.pi / 2)]
    specs += [EstimatorSpec.scaled(0.6), EstimatorSpec.central(0.05), EstimatorSpec.central(0.6),
              EstimatorSpec.forward(0.1), EstimatorSpec.param_shift(order=2), EstimatorSpec.central(0.4, order=2)]
    reports = [empirical_report(spec, REF, THETA, OBS, n, 200, seed=20240505, stream=k * 1000)
               for k, (spec, n) in enumerate(itertools.product(specs, (100, 10_000)))]
    bad = [r for r in reports if not r.decomposition_holds()]
    worst = max(r.decomposition_gap() / r.tolerance for r in reports)
    criterion("C09 MSE = variance + bias^2", not bad, f"{len(reports)} reports, worst gap {worst:.2g} x tolerance")
    assert not bad


# --- 10: optimizer race ----------------------------------------------------------

THRESHOLD = reference.MINIMUM + 1e-2
RACE = ("GD", "Newton", "DiagNewton")


@pytest.fixture(scope="module")
def race():
    out = {}
    for method in RACE:
        cfg = OptimizerConfig(method=method, eta=0.4, regularizer="clamp", eps=1e-3, trainable=(0, 1), max_iter=100)
        out[method] = optimize(cfg, REF, OBS, reference.embed(reference.START))
    return out


def test_c10a_race_reaches_minimum(criterion, race):
    evals = {m: race[m].evaluations_to_reach(THRESHOLD) for m in RACE}
    ok = all(v is not None for v in evals.values())
    criterion("C10a race reaches -0.874 +- 1e-2", ok, ", ".join(f"{m} after {v} evaluations" for m, v in evals.items()))
    assert ok


@pytest.mark.parametrize("method", RACE)
def test_c10b_race_limit_point(criterion, race, method):
    final = np.mod(race[method].final_theta[:2] + np.pi, 2 * np.pi) - np.pi
    ok = np.allclose(np.abs(final), [0.0, np.pi], atol=1e-2)
    criterion(f"C10b limit point (0, pi) for {method}", ok, f"wrapped limit ({final[0]:+.3f}, {final[1]:+.3f})")
    assert ok


def test_c10c_second_order_needs_fewer_evaluations(criterion, race):
    evals = {m: race[m].evaluations_to_reach(THRESHOLD) for m in RACE}
    ok = evals["Newton"] < evals["GD"] and evals["DiagNewton"] < evals["GD"]
    criterion("C10c fewer evaluations than GD", ok, str(evals))
    assert ok


def test_c10d_per_step_counts(criterion, race):
    per_step = {m: set(np.diff(race[m].evaluations()).tolist()) for m in RACE}
    ok = per_step == {"GD": {4}, "Newton": {9}, "DiagNewton": {5}}
    criterion("C10d evaluations per step 4/5/9", ok, str(per_step))
    assert ok


# --- 11: determinism ------------------------------------------------------------

CLI_CONFIGS = {
    "mse-sweep": {"shots": [100, 1000], "repetitions": 20, "steps": {"min": 0.01, "max": 1.5, "count": 4}},
    "scaling-sweep": {"shots": [100, 1000, 100000], "repetitions": 20, "steps": [0.1, 0.5, 1.5]},
    "hessian": {"shots": [100, 10000], "steps": [0.01, 0.1]},
    "metric": {"shots": [100, 10000]},
    "optimize": {"optimizer": {"methods": ["GD", "Newton", "DiagNewton", "QNG"], "shots": [None, 100], "max_iter": 10}},
    "reconstruct": {"samples": 20},
}


def test_c11_cli_determinism(criterion, tmp_path):
    results = {}
    for kind, body in CLI_CONFIGS.items():
        cfg = tmp_path / f"{kind}.yaml"
        cfg.write_text(yaml.safe_dump({"kind": kind, **body}))
        blobs = []
        for run in range(2):
            out = tmp_path / f"{kind}-{run}.csv"
            code = main([kind, "--config", str(cfg), "--seed", "987654321", "--out", str(out)])
            blobs.append((code, out.read_bytes()))
        results[kind] = blobs[0][0] == 0 and blobs[0] == blobs[1]
    ok = all(results.values())
    criterion("C11 byte-identical CSV", ok, ", ".join(f"{k}={'same' if v else 'DIFFERENT'}" for k, v in results.items()))
    assert ok
