"""Histories of a small circuit, before and after reading some A-qubits.

The spec files in ``specs/`` drive everything.  Without a readout the
history matrix D can carry interference terms; reading out the A-qubits
removes the blocks between different outcomes, leaving branches with
additive probabilities and conditional tables for what was not read out.
"""

from pathlib import Path

import numpy as np

from mmsim import (
    apply_mms_to_history,
    conditional_table,
    consistency_check,
    history_density_matrix,
    parse_history_spec,
)

here = Path(__file__).parent / "specs"

spec = parse_history_spec((here / "consistency_pi8.hist").read_text())
D = history_density_matrix(spec)
print("consistency_pi8: D =")
print(np.round(D.entries, 4))
print("before readout:", consistency_check(D))
print("after reading both A-qubits:", consistency_check(apply_mms_to_history(spec, spec.labels)))

spec = parse_history_spec((here / "erasure.hist").read_text())
tree = apply_mms_to_history(spec)
print("\nerasure: measured", tree.measured, "unmeasured", tree.unmeasured)
for beta, branch in tree.branches.items():
    print(f"  beta={beta} p={branch.probability:.4f} p(gamma|beta)={np.round(conditional_table(tree, beta), 4)}")
print("  either outcome leaves the other event at |c0|^2, |c1|^2 = 0.36, 0.64")

spec = parse_history_spec((here / "three_events_partial.hist").read_text())
tree = apply_mms_to_history(spec)
print("\nthree_events_partial: total probability", round(tree.total_probability(), 12))
for beta, p in tree.probabilities().items():
    print(f"  beta={beta} p={p:.4f}")
