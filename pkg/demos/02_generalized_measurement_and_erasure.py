"""Rotating A before copying it gives a generalised measurement.

theta sweeps from a sharp measurement (0) to one that learns nothing
(pi/4).  At pi/4 the premeasurement can be undone: outcome 1 returns the
original state, outcome 0 returns it up to a Z that we correct.
"""

import math

import numpy as np

from mmsim import (
    HADAMARD_PARAMS,
    A,
    RotationParams,
    S,
    StateVector,
    erase_premeasurement,
    fidelity,
    kraus_ops,
    mms_measure,
    premeasure,
    tensor,
)

psi = StateVector.from_amplitudes([S(0)], [0.6, 0.8])
state = premeasure(tensor(psi, StateVector.zero([A(0)])), S(0), A(0))

print(" theta   p(r=0)  p(r=1)  <post_1|psi>^2")
for theta in np.linspace(0, math.pi / 4, 6):
    res = mms_measure(state, A(0), RotationParams(theta))
    p = {b.r: b for b in res.branches}
    print(f" {theta:.3f}   {p[0].probability:.4f}  {p[1].probability:.4f}  {fidelity(p[1].post_state, psi):.4f}")

k = kraus_ops(HADAMARD_PARAMS)
print("\nat pi/4: M1 =", np.round(k.m1, 4).tolist(), " M0 =", np.round(k.m0, 4).tolist())

for seed in range(4):
    recovered, r = erase_premeasurement(state, A(0), seed)
    print(f"seed {seed}: outcome {r}, fidelity with original {fidelity(recovered, psi):.12f}")
