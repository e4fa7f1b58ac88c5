"""
Metric tensor and natural-gradient descent
==========================================

The metric tensor measures how fast the prepared state moves as the angles
change.  It is read off from the probability of returning to the all-zeros
state after preparing at one point and un-preparing at a nearby shifted point.
Preconditioning the gradient with it gives natural-gradient descent.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from qderiv import OptimizerConfig, PauliString, SinglePauli, load_circuit, metric_tensor, optimize

circuit = load_circuit(Path(__file__).resolve().parents[1] / "configs" / "circuits" / "two_wire.json")
obs = SinglePauli(PauliString("ZZ"))
theta = np.array([0.4, 1.1, 0.3])

for diagonal in ("two-eval", "half-pi"):
    g = metric_tensor(circuit, theta, diagonal=diagonal)
    print(f"{diagonal} diagonal ({g.evaluations} overlap circuits):")
    print(np.round(g.to_array(), 6))

# Both diagonal variants are exact without sampling.  They use different
# shifts, so their sampled estimates scatter differently.
print("exact metric eigenvalues:", np.round(np.linalg.eigvalsh(metric_tensor(circuit, theta).to_array()), 4))

for method in ("GD", "QNG"):
    cfg = OptimizerConfig(method=method, eta=0.2, regularizer="shift", eps=1e-2, max_iter=50)
    trace = optimize(cfg, circuit, obs, theta)
    print(f"{method}: cost after 10 steps {trace.costs()[10]:+.4f}, after 50 steps {trace.costs()[-1]:+.4f}, "
          f"{trace.evaluations()[-1]} evaluations")
