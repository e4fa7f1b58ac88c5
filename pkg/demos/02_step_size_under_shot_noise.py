"""
Choosing a step under shot noise
================================

With a finite number of measurements the estimate of every expectation value
carries variance.  Finite differences must balance that variance, which grows
as the step shrinks, against a truncation bias, which grows as the step widens.
The shift rule has no bias, so its best step is as wide as possible.  This
script scans the step for both estimators at 1000 shots and compares the
empirical total MSE with the closed-form optimum.
"""
from __future__ import annotations

import numpy as np

from qderiv import EstimatorSpec, empirical_report, optimal_step
from qderiv.bench import reference
from qderiv.estimators import optimal_mse, theory_inputs

circuit, obs = reference.reference_circuit(), reference.observable()
theta = reference.REFERENCE_ANGLES
shots, reps = 1000, 300

print(f"{'step':>8} {'central MSE':>12} {'shift MSE':>12}")
for step in np.geomspace(1e-2, np.pi / 2, 9):
    fd = empirical_report(EstimatorSpec.central(step), circuit, theta, obs, shots, reps, seed=1, stream=0)
    ps = empirical_report(EstimatorSpec.param_shift(step), circuit, theta, obs, shots, reps, seed=1, stream=10**6)
    print(f"{step:8.4f} {fd.total_mse:12.3e} {ps.total_mse:12.3e}")

# Closed-form optimum of the central scheme from the exact third derivatives.
inputs = theory_inputs(circuit, theta, obs, shots)
h_star = optimal_step("central", inputs)
print(f"central: optimal step {h_star:.3f}, predicted total MSE {optimal_mse('central', inputs):.3e}")

# The MSE of the shift rule falls as 1/N while the central scheme at its
# optimal step only falls as N^(-2/3), so beyond a few dozen shots the shift
# rule is the better choice.
for n in (100, 10_000, 1_000_000):
    inp = theory_inputs(circuit, theta, obs, n)
    ps = empirical_report(EstimatorSpec.param_shift(), circuit, theta, obs, n, reps, seed=1)
    print(f"N={n:>8}: central optimum {optimal_mse('central', inp):.2e}, shift rule {ps.total_mse:.2e}")
