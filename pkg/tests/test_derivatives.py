"""Parameter-shift tensors and the metric tensor against independent oracles."""
from __future__ import annotations

import itertools
from functools import partial

import numpy as np
import pytest

from conftest import dense_expectation, fd_oracle, metric_oracle, trig_oracle
from qderiv.circuit import Circuit, PauliString, random_circuit, rx
from qderiv.derivatives import (
    ExactEvaluator, SampledEvaluator, derivative_tensor, fd_tensor, gradient, hessian,
    metric_tensor, overlap_evaluator, pi_shift_identity_check, ps_hessian_diag, ps_tensor,
)
from qderiv.errors import UnsupportedShiftError
from qderiv.shifts import eval_count
from qderiv.simulator import ShotModel, SinglePauli, make_rng, sample_means


def _problem(seed, n=3, m=4):
    rng = np.random.default_rng(seed)
    c = random_circuit(n, m, rng, max_weight=3)
    obs = SinglePauli(PauliString("".join(rng.choice(list("XYZ"), n))))
    theta = rng.uniform(0, 2 * np.pi, m)
    return c, obs, theta


# --- exact rules against oracles ---

@pytest.mark.parametrize("seed", range(6))
@pytest.mark.parametrize("order", [1, 2])
def test_ps_matches_finite_difference_oracle(seed, order):
    c, obs, theta = _problem(seed)
    fn = partial(dense_expectation, c, obs=obs)
    ev = ExactEvaluator(c, obs)
    for idx in itertools.combinations_with_replacement(range(4), order):
        assert ps_tensor(ev, theta, idx) == pytest.approx(fd_oracle(fn, theta, idx), abs=1e-5)


@pytest.mark.parametrize("seed", range(4))
@pytest.mark.parametrize("idx", [(0,), (1, 1), (0, 2), (0, 1, 2), (1, 1, 3), (2, 2, 2), (0, 0, 1, 1), (3, 3, 3, 3)])
def test_ps_matches_fourier_oracle(seed, idx):
    c, obs, theta = _problem(seed)
    fn = partial(dense_expectation, c, obs=obs)
    ev = ExactEvaluator(c, obs)
    assert ps_tensor(ev, theta, idx) == pytest.approx(trig_oracle(fn, theta, idx), abs=1e-10)


@pytest.mark.parametrize("seed", range(4))
@pytest.mark.parametrize("order", [1, 2])
def test_shift_independence(seed, order):
    c, obs, theta = _problem(seed)
    ev = ExactEvaluator(c, obs)
    for idx in itertools.combinations_with_replacement(range(4), order):
        ref = ps_tensor(ev, theta, idx)
        for s in (0.3, 1.0):
            assert ps_tensor(ev, theta, idx, s) == pytest.approx(ref, abs=1e-9)


@pytest.mark.parametrize("seed", range(4))
def test_reduced_and_literal_rules_agree(seed):
    c, obs, theta = _problem(seed)
    ev = ExactEvaluator(c, obs)
    for idx in [(0, 0), (1, 1, 1), (0, 0, 2), (2, 2, 3, 3)]:
        assert ps_tensor(ev, theta, idx, reduce_pi=False) == pytest.approx(ps_tensor(ev, theta, idx), abs=1e-10)


@pytest.mark.parametrize("theta", [0.0, 0.4, 2.0, -1.3])
def test_single_rotation_closed_forms(theta):
    c = Circuit(1, (rx(1, 0, 0),))
    ev = ExactEvaluator(c, SinglePauli(PauliString("Z")))
    assert gradient(ev, [theta])[0] == pytest.approx(-np.sin(theta), abs=1e-14)
    assert hessian(ev, [theta])[0, 0] == pytest.approx(-np.cos(theta), abs=1e-14)
    assert ps_tensor(ev, [theta], (0, 0, 0)) == pytest.approx(np.sin(theta), abs=1e-14)


@pytest.mark.parametrize("seed", range(3))
@pytest.mark.parametrize("variant", ["two-eval", "three-eval"])
def test_diagonal_variants(seed, variant):
    c, obs, theta = _problem(seed)
    ev = ExactEvaluator(c, obs)
    for j in range(4):
        assert ps_hessian_diag(ev, theta, j, variant) == pytest.approx(ps_tensor(ev, theta, (j, j)), abs=1e-12)


def test_unknown_diagonal_variant():
    c, obs, theta = _problem(0)
    with pytest.raises(ValueError):
        ps_hessian_diag(ExactEvaluator(c, obs), theta, 0, "four-eval")


def test_high_order_with_other_shift_is_refused():
    c, obs, theta = _problem(0)
    with pytest.raises(UnsupportedShiftError):
        ps_tensor(ExactEvaluator(c, obs), theta, (0, 1, 2), 1.0)


@pytest.mark.parametrize("seed", range(6))
def test_pi_shift_identity(seed):
    c, obs, theta = _problem(seed)
    ev = ExactEvaluator(c, obs)
    for j in range(4):
        lhs, rhs = pi_shift_identity_check(ev, theta, j)
        assert lhs == pytest.approx(rhs, abs=1e-10)


# --- whole tensors ---

@pytest.mark.parametrize("m,order", [(2, 1), (2, 2), (3, 2), (4, 2), (3, 3), (4, 3)])
def test_tensor_evaluations_within_bound(m, order):
    c, obs, theta = _problem(1, 3, m)
    ev = ExactEvaluator(c, obs)
    t = derivative_tensor(ev, theta, order)
    assert t.evaluations <= eval_count(m, order)
    assert ev.calls == t.evaluations
    arr = t.to_array()
    for perm in itertools.permutations(range(order)):
        np.testing.assert_allclose(arr, np.transpose(arr, perm), atol=1e-14)


def test_tensor_restricted_to_params():
    c, obs, theta = _problem(2)
    t = derivative_tensor(ExactEvaluator(c, obs), theta, 2, params=[1, 3])
    assert set(t.entries) == {(1, 1), (1, 3), (3, 3)}
    assert t.evaluations == 9


def test_central_difference_tensor():
    c, obs, theta = _problem(3)
    ev = ExactEvaluator(c, obs)
    for idx in [(0,), (1, 2), (3, 3)]:
        assert fd_tensor(ev, theta, idx, 1e-4) == pytest.approx(ps_tensor(ev, theta, idx), abs=1e-6)


def test_sampled_evaluator_uses_fresh_streams():
    c, obs, theta = _problem(4)
    ev = SampledEvaluator(c, obs, ShotModel(100, 3, stream=10))
    got = [ev(theta), ev(theta)]
    exact = dense_expectation(c, theta, obs)
    expected = [float(sample_means(exact, obs, 100, make_rng(3, s))) for s in (10, 11)]
    assert got == pytest.approx(expected, abs=1e-12)
    assert ev.next_stream == 12


# --- metric tensor ---

@pytest.mark.parametrize("seed", range(4))
@pytest.mark.parametrize("diagonal", ["two-eval", "half-pi"])
def test_metric_matches_state_derivative_oracle(seed, diagonal):
    c, _, theta = _problem(seed)
    got = metric_tensor(c, theta, diagonal=diagonal).to_array()
    np.testing.assert_allclose(got, metric_oracle(c, theta), atol=1e-7)


def test_metric_of_single_rotation_is_quarter():
    c = Circuit(1, (rx(1, 0, 0),))
    assert metric_tensor(c, [0.8])[0, 0] == pytest.approx(0.25, abs=1e-14)


def test_metric_overlaps_through_the_composite_circuit():
    c, _, theta = _problem(5)
    ref = metric_tensor(c, theta).to_array()
    ov = overlap_evaluator(c, theta)
    # the -1/2 Hessian of the overlap at coincidence is the metric
    for j, k in [(0, 1), (2, 3), (1, 1)]:
        assert -0.5 * ps_tensor(ov, theta, (j, k), reduce_pi=False) == pytest.approx(ref[j, k], abs=1e-10)


def test_sampled_metric_converges():
    c, _, theta = _problem(6)
    exact = metric_tensor(c, theta).to_array()
    noisy = metric_tensor(c, theta, ShotModel(10 ** 8, 1)).to_array()
    np.testing.assert_allclose(noisy, exact, atol=5e-4)
    with pytest.raises(ValueError):
        metric_tensor(c, theta, diagonal="bogus")
