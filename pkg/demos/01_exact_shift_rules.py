"""
Exact derivatives from shifted circuits
=======================================

A rotation gate generated by a Pauli string makes the cost a trigonometric
polynomial of degree one in each angle.  Two evaluations at +-pi/2 then give
the exact partial derivative, with no truncation error at all.  This script
compares the shift rule with central differences on the five-wire benchmark
circuit and shows how point sharing keeps the cost of higher orders bounded.
"""
from __future__ import annotations

import numpy as np

from qderiv import ExactEvaluator, derivative_tensor, eval_count, fd_tensor, gradient, hessian
from qderiv.bench import reference
from qderiv.derivatives import pi_shift_identity_check

circuit, obs = reference.reference_circuit(), reference.observable()
theta = reference.REFERENCE_ANGLES
ev = ExactEvaluator(circuit, obs)

# Gradient: shift rule against central differences with shrinking step.
g = gradient(ev, theta)
print("shift-rule gradient:", np.round(g, 6))
for h in (1e-1, 1e-3, 1e-5):
    fd = np.array([fd_tensor(ev, theta, (j,), h) for j in range(circuit.n_params)])
    print(f"  central h={h:.0e}: max |difference| = {np.max(np.abs(fd - g)):.2e}")

# The shift need not be pi/2: any non-singular shift is exact in the noiseless
# limit, only its statistical behaviour changes.
for s in (0.3, 1.0, np.pi / 2):
    gs = gradient(ev, theta, s=s)
    print(f"shift s={s:.3f}: max deviation from pi/2 rule = {np.max(np.abs(gs - g)):.1e}")

# Hessian entries reuse points already needed by the gradient.
H = hessian(ev, theta)
print("Hessian eigenvalues:", np.round(np.linalg.eigvalsh(H), 4))

# A shift by pi is a combination of the pi/2 points and the unshifted value,
# so every higher-order rule folds onto a three-point grid per angle.
lhs, rhs = pi_shift_identity_check(ev, theta, 0)
print(f"f(theta + pi e0) = {lhs:.12f}, recombined = {rhs:.12f}")

# Distinct circuit evaluations for a full third-order tensor.
ev.calls = 0
derivative_tensor(ev, theta, 3)
print(f"third-order tensor: {ev.calls} evaluations, bound {eval_count(circuit.n_params, 3)}")
