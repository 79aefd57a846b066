"""Minimalistic measurement: premeasure S->A, rotate A, copy A->X, lose X.

The A-qubit is read out in the basis whose vectors are the rows of
``R(theta, phi)``.  In circuit terms the gate applied to A before the
CNOT(A, X) is therefore ``conj(R)``, and outcome ``r`` leaves the System in
``M_r|psi>`` with

    M_r = sum_k conj(R[r, k]) P_k

    M_1 = cos(theta) P_1 + e^{-i phi} sin(theta) P_0
    M_0 = -e^{i phi} sin(theta) P_1 + cos(theta) P_0
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import AncillaNotFreshError, DimensionError, MMSError, ValidationError
from .gates import (
    HADAMARD_PARAMS,
    RotationParams,
    rotation_matrix,
    standard_gate,
)
from .qstate import (
    DensityOperator,
    Kind,
    QubitLabel,
    StateVector,
    UnitaryOperator,
    apply_unitary,
    next_free,
    partial_trace,
    positions,
    tensor,
)

ZERO_BRANCH = 1e-14

P0 = np.diag([1.0, 0.0]).astype(complex)
P1 = np.diag([0.0, 1.0]).astype(complex)


@dataclass(frozen=True, eq=False)
class KrausSet:
    params: RotationParams
    m0: np.ndarray
    m1: np.ndarray

    def __iter__(self):
        # outcome order r = 0, 1
        return iter((self.m0, self.m1))

    def completeness_residual(self) -> float:
        s = self.m0.conj().T @ self.m0 + self.m1.conj().T @ self.m1
        return float(np.max(np.abs(s - np.eye(s.shape[0]))))


class BranchOutcome(NamedTuple):
    r: int
    probability: float
    post_state: StateVector


class MeasurementResult(NamedTuple):
    branches: list[BranchOutcome]
    rho_sa: DensityOperator
    dropped: tuple[int, ...] = ()


def readout_gate(p: RotationParams) -> np.ndarray:
    """Gate applied to the A-qubit before it is copied onto X."""
    return rotation_matrix(p.theta, p.phi).conj()


def kraus_ops(p: RotationParams, projectors: tuple[np.ndarray, np.ndarray] | None = None) -> KrausSet:
    """Kraus pair for a readout rotation ``p``.

    ``projectors`` defaults to the computational ``(P0, P1)`` on one qubit;
    any complete orthogonal pair (e.g. the premeasurement projectors of a
    multi-qubit System) may be supplied instead.
    """
    p0, p1 = (P0, P1) if projectors is None else projectors
    r = rotation_matrix(p.theta, p.phi)
    m0 = np.conj(r[0, 0]) * p0 + np.conj(r[0, 1]) * p1
    m1 = np.conj(r[1, 0]) * p0 + np.conj(r[1, 1]) * p1
    return KrausSet(p, m0, m1)


def ancilla_reduced(state: StateVector, ancilla: QubitLabel) -> np.ndarray:
    rest = [q for q in state.register if q != ancilla]
    return partial_trace(state, rest).matrix


def premeasure(
    state: StateVector,
    sys_qubit: QubitLabel,
    ancilla: QubitLabel,
    basis_change: UnitaryOperator | np.ndarray | None = None,
    tol: float = 1e-10,
) -> StateVector:
    """Entangle ``ancilla`` with ``sys_qubit`` by a CNOT.

    With ``basis_change = U`` the control basis is ``U|k>``: apply ``U^H`` to
    the System qubit, CNOT, then ``U`` again.
    """
    positions(state.register, [sys_qubit, ancilla])
    rho_a = ancilla_reduced(state, ancilla)
    dev = np.max(np.abs(rho_a - P0))
    if dev > tol:
        raise AncillaNotFreshError(f"ancilla {ancilla} is not in |0> (deviation {dev:.3g})")
    cnot = standard_gate("cnot")
    if basis_change is None:
        return apply_unitary(state, cnot, [sys_qubit, ancilla])
    u = basis_change.matrix if isinstance(basis_change, UnitaryOperator) else np.asarray(basis_change, dtype=complex)
    if u.shape != (2, 2):
        raise DimensionError("basis_change must be a single-qubit unitary")
    out = apply_unitary(state, u.conj().T, [sys_qubit])
    out = apply_unitary(out, cnot, [sys_qubit, ancilla])
    return apply_unitary(out, u, [sys_qubit])


def _branch_states(state: StateVector, ancilla: QubitLabel, drop: Sequence[QubitLabel]) -> tuple[list[BranchOutcome], tuple[int, ...]]:
    """Condition ``state`` on each value of ``ancilla``; ``drop`` qubits must be copies of it."""
    n = state.num_qubits
    axes = positions(state.register, [ancilla, *drop])
    keep = [i for i in range(n) if i not in axes]
    reg = tuple(state.register[i] for i in keep)
    t = state.amplitudes.reshape((2,) * n).transpose(axes + keep)
    branches, dropped = [], []
    for r in (0, 1):
        block = t[(r,) * len(axes)].reshape(-1)
        p = float(np.vdot(block, block).real)
        if p < ZERO_BRANCH:
            dropped.append(r)
            continue
        branches.append(BranchOutcome(r, p, StateVector(reg, block / math.sqrt(p))))
    return branches, tuple(dropped)


def mms_measure(
    state: StateVector,
    ancilla_A: QubitLabel,
    p: RotationParams,
    mode: str = "explicit-x",
    max_qubits: int | None = None,
) -> MeasurementResult:
    """Generalised measurement of an already-premeasured A-qubit.

    ``explicit-x`` appends a fresh X-qubit, applies ``conj(R)`` to A and
    CNOT(A, X), and traces X out.  ``dephase`` applies the same rotation and
    removes A's coherences directly.  Both return the same ``rho_sa``.
    Branches with probability below 1e-14 are left out and listed in
    ``dropped``.
    """
    rotated = apply_unitary(state, readout_gate(p), [ancilla_A])
    if mode == "explicit-x":
        x = next_free(state.register, Kind.ANCILLA_X)
        full = tensor(rotated, StateVector.zero([x]), max_qubits=max_qubits)
        full = apply_unitary(full, standard_gate("cnot"), [ancilla_A, x])
        rho = partial_trace(full, [x])
        branches, dropped = _branch_states(full, ancilla_A, [x])
    elif mode == "dephase":
        m = rotated.density().matrix
        (a,) = positions(rotated.register, [ancilla_A])
        n = rotated.num_qubits
        bits = (np.arange(1 << n) >> (n - 1 - a)) & 1
        m = np.where(bits[:, None] == bits[None, :], m, 0.0)
        rho = DensityOperator(rotated.register, m)
        branches, dropped = _branch_states(rotated, ancilla_A, [])
    else:
        raise ValueError(f"unknown mode {mode!r}; expected 'explicit-x' or 'dephase'")
    return MeasurementResult(branches, rho, dropped)


def sample_outcome(branches: Sequence[BranchOutcome], rng_seed: int | np.random.Generator) -> BranchOutcome:
    """Draw one branch with its probability.

    An integer seed gives a fresh generator (same seed -> same draw); pass a
    ``np.random.Generator`` to draw a sequence.
    """
    if not branches:
        raise MMSError("cannot sample from an empty branch list")
    probs = np.array([b.probability for b in branches])
    if abs(probs.sum() - 1.0) > 1e-10:
        raise ValidationError(f"branch probabilities sum to {probs.sum()!r}")
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    return branches[int(rng.choice(len(branches), p=probs / probs.sum()))]


def fidelity(a: StateVector, b: StateVector) -> float:
    """``|<a|b>|^2``; insensitive to global phase."""
    if a.register != b.register:
        raise DimensionError("fidelity between states on different registers")
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)


def erase_premeasurement(
    state: StateVector,
    ancilla_A: QubitLabel,
    rng_seed: int | np.random.Generator,
    sys_qubit: QubitLabel | None = None,
    basis_change: np.ndarray | None = None,
    mode: str = "explicit-x",
) -> tuple[StateVector, int]:
    """Undo a premeasurement by reading A out with ``R(pi/4, 0)``.

    Outcome 1 leaves the System as it was; outcome 0 leaves it with a
    ``P0 - P1`` (Pauli-Z in the premeasurement basis) applied, which is
    corrected here.  Returns the recovered state (A removed) and ``r``.
    """
    result = mms_measure(state, ancilla_A, HADAMARD_PARAMS, mode=mode)
    branch = sample_outcome(result.branches, rng_seed)
    recovered = branch.post_state
    if branch.r == 0:
        if sys_qubit is None:
            systems = [q for q in recovered.register if q.kind == Kind.SYSTEM]
            if len(systems) != 1:
                raise MMSError("sys_qubit is required when the System has several qubits")
            sys_qubit = systems[0]
        z = np.diag([1.0, -1.0]).astype(complex)
        if basis_change is not None:
            u = np.asarray(basis_change, dtype=complex)
            z = u @ z @ u.conj().T
        recovered = apply_unitary(recovered, z, [sys_qubit])
    return recovered, branch.r


def ancilla_projectors(register: Sequence[QubitLabel], ancilla: QubitLabel) -> list[np.ndarray]:
    """Full-register projectors onto ``ancilla = 0`` and ``ancilla = 1``."""
    (a,) = positions(register, [ancilla])
    n = len(register)
    bits = (np.arange(1 << n) >> (n - 1 - a)) & 1
    return [np.diag((bits == k).astype(complex)) for k in (0, 1)]


def von_neumann_collapse_oracle(rho: DensityOperator, projectors: Sequence[np.ndarray], tol: float = 1e-12) -> DensityOperator:
    """Non-unitary projection ``sum_k P_k rho P_k``."""
    dim = rho.matrix.shape[0]
    ps = [np.asarray(p, dtype=complex) for p in projectors]
    if not ps or any(p.shape != (dim, dim) for p in ps):
        raise DimensionError("projectors must match the density matrix dimension")
    if np.max(np.abs(sum(ps) - np.eye(dim))) > tol:
        raise ValidationError("projectors do not sum to the identity")
    for i, pi in enumerate(ps):
        for j, pj in enumerate(ps):
            want = pi if i == j else 0.0
            if np.max(np.abs(pi @ pj - want)) > tol:
                raise ValidationError("projectors are not orthogonal and idempotent")
    out = sum(p @ rho.matrix @ p for p in ps)
    return DensityOperator(rho.register, 0.5 * (out + out.conj().T))
