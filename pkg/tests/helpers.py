import math

import numpy as np

from mmsim.gates import RotationParams
from mmsim.history import GateOp, HistorySpec, PremeasureEvent


def random_amplitudes(rng, dim):
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_params(rng):
    return RotationParams(rng.uniform(0, math.pi / 2), rng.uniform(-math.pi, math.pi))


def random_gate(rng, d):
    choices = ["h", "x", "z", "r"] + (["cnot"] if d > 1 else [])
    name = choices[rng.integers(len(choices))]
    if name == "cnot":
        c, t = rng.choice(d, size=2, replace=False)
        return GateOp("cnot", (int(c), int(t)))
    q = int(rng.integers(d))
    if name == "r":
        return GateOp("r", (q,), rng.uniform(0, math.pi), rng.uniform(-math.pi, math.pi))
    return GateOp(name, (q,))


def random_spec(rng, d, n, pure=True, measured=0, max_gates=3):
    steps = []
    for l in range(n):
        steps += [random_gate(rng, d) for _ in range(rng.integers(0, max_gates + 1))]
        kind = rng.integers(3)
        basis = None
        q = int(rng.integers(d))
        if kind == 1:
            basis = GateOp("h", (q,))
        elif kind == 2:
            basis = GateOp("r", (q,), rng.uniform(0, math.pi), rng.uniform(-math.pi, math.pi))
        steps.append(PremeasureEvent(f"e{l}", q, basis))
    steps += [random_gate(rng, d) for _ in range(rng.integers(0, max_gates + 1))]
    init = random_amplitudes(rng, 1 << d) if pure else None
    labels = [f"e{l}" for l in rng.permutation(n)[:measured]]
    return HistorySpec.build(d, steps, init, [(l, random_params(rng)) for l in labels])
