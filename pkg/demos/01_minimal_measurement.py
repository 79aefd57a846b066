"""A projective measurement built from two CNOTs and one partial trace.

The System qubit is copied onto A, A is copied onto X, and X is discarded.
The resulting System+A state is compared with textbook projective collapse.
"""

import numpy as np

from mmsim import (
    PROJECTIVE,
    A,
    S,
    StateVector,
    ancilla_projectors,
    mms_measure,
    premeasure,
    shannon_entropy,
    tensor,
    von_neumann_collapse_oracle,
    von_neumann_entropy,
)

psi = StateVector.from_amplitudes([S(0)], [0.6, 0.8j])
state = premeasure(tensor(psi, StateVector.zero([A(0)])), S(0), A(0))
print("after premeasurement (S0 A0):", np.round(state.amplitudes, 4))

result = mms_measure(state, A(0), PROJECTIVE, mode="explicit-x")
print("\nbranches after tracing out X:")
for b in result.branches:
    print(f"  r={b.r}  p={b.probability:.4f}  System -> {np.round(b.post_state.amplitudes, 4)}")

oracle = von_neumann_collapse_oracle(state.density(), ancilla_projectors(state.register, A(0)))
print("\nmax |rho_sa - projective collapse| =", np.max(np.abs(result.rho_sa.matrix - oracle.matrix)))
print("S(rho_sa) =", round(von_neumann_entropy(result.rho_sa), 12),
      " H(p_r) =", round(shannon_entropy([b.probability for b in result.branches]), 12))
