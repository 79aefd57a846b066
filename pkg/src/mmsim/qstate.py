"""Dense states and operators over labelled qubit registers.

Basis-index convention
----------------------
A register is a tuple of :class:`QubitLabel` in canonical order: System
qubits first, then A-ancillas, then X-ancillas, each by ascending index.
The first label of the register is the *most significant* bit of a basis
index, so ``np.kron(a, b)`` of two canonical registers is already in
canonical order whenever every label of ``a`` sorts before every label of
``b``.  Within a qubit, index 0 is ``|0>`` and index 1 is ``|1>``.

All values are immutable after construction (arrays are flagged
read-only), so they can be shared freely between threads.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import (
    DimensionError,
    LabelCollisionError,
    RegisterSizeError,
    ValidationError,
)

MAX_QUBITS = 16
ENTROPY_FLOOR = 1e-12
NORM_TOL = 1e-12
HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
UNITARY_TOL = 1e-12


class Kind(enum.IntEnum):
    SYSTEM = 0
    ANCILLA_A = 1
    ANCILLA_X = 2


_PREFIX = {Kind.SYSTEM: "S", Kind.ANCILLA_A: "A", Kind.ANCILLA_X: "X"}


@dataclass(frozen=True, order=True)
class QubitLabel:
    """Identity of one qubit; ordering of labels is the canonical order."""

    kind: Kind
    index: int

    def __post_init__(self):
        if self.index < 0:
            raise ValidationError(f"qubit index must be nonnegative, got {self.index}")
        object.__setattr__(self, "kind", Kind(self.kind))

    def __str__(self) -> str:
        return f"{_PREFIX[self.kind]}{self.index}"

    @classmethod
    def parse(cls, text: str) -> "QubitLabel":
        """``"S0"``, ``"A3"``, ``"X1"`` -> label."""
        for kind, prefix in _PREFIX.items():
            if text.startswith(prefix) and text[1:].isdigit():
                return cls(kind, int(text[1:]))
        raise ValidationError(f"not a qubit label: {text!r}")


def S(i: int) -> QubitLabel:
    return QubitLabel(Kind.SYSTEM, i)


def A(i: int) -> QubitLabel:
    return QubitLabel(Kind.ANCILLA_A, i)


def X(i: int) -> QubitLabel:
    return QubitLabel(Kind.ANCILLA_X, i)


Register = tuple[QubitLabel, ...]


def canonical(labels: Iterable[QubitLabel]) -> Register:
    """Sort labels into canonical order; duplicates are an error."""
    labels = tuple(labels)
    if len(set(labels)) != len(labels):
        dup = sorted({str(q) for q in labels if labels.count(q) > 1})
        raise LabelCollisionError(f"duplicate qubit labels: {', '.join(dup)}")
    return tuple(sorted(labels))


def _check_register(register: Sequence[QubitLabel]) -> Register:
    register = tuple(register)
    if canonical(register) != register:
        raise ValidationError("register is not in canonical order: " + " ".join(map(str, register)))
    return register


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.flags.writeable = False
    return a


def _num_qubits(dim: int) -> int:
    n = dim.bit_length() - 1
    if dim < 1 or 1 << n != dim:
        raise DimensionError(f"dimension {dim} is not a power of two")
    return n


def next_free(register: Sequence[QubitLabel], kind: Kind) -> QubitLabel:
    """Smallest-index label of ``kind`` not already in ``register``."""
    used = {q.index for q in register if q.kind == kind}
    i = 0
    while i in used:
        i += 1
    return QubitLabel(kind, i)


# ---------------------------------------------------------------------------
# value types


@dataclass(frozen=True, eq=False)
class StateVector:
    register: Register
    amplitudes: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "register", _check_register(self.register))
        amps = _frozen(self.amplitudes).reshape(-1)
        if amps.size != 1 << len(self.register):
            raise DimensionError(
                f"{amps.size} amplitudes do not fit a {len(self.register)}-qubit register"
            )
        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1.0) > NORM_TOL:
            raise ValidationError(f"state is not normalised (|psi|^2 = {norm2!r})")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_amplitudes(cls, register, amplitudes, normalize: bool = True) -> "StateVector":
        """Build a state from raw amplitudes, rescaling to unit norm by default.

        ``register`` may be in any order; amplitudes are read in that order and
        re-permuted to canonical order.
        """
        register = tuple(register)
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        if normalize:
            norm = np.linalg.norm(amps)
            if norm == 0:
                raise ValidationError("cannot normalise the zero vector")
            amps = amps / norm
        reg, amps = _to_canonical_vector(register, amps)
        return cls(reg, amps)

    @classmethod
    def basis(cls, register, bits: Sequence[int]) -> "StateVector":
        """Computational basis state; ``bits[i]`` is the value of ``register[i]``."""
        register = tuple(register)
        if len(bits) != len(register):
            raise DimensionError("one bit per qubit expected")
        amps = np.zeros(1 << len(register), dtype=complex)
        amps[int("".join(str(int(b)) for b in bits) or "0", 2)] = 1.0
        return cls.from_amplitudes(register, amps, normalize=False)

    @classmethod
    def zero(cls, register) -> "StateVector":
        return cls.basis(register, [0] * len(tuple(register)))

    @property
    def num_qubits(self) -> int:
        return len(self.register)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def density(self) -> "DensityOperator":
        return DensityOperator(self.register, np.outer(self.amplitudes, self.amplitudes.conj()))

    def allclose(self, other: "StateVector", atol: float = 1e-10) -> bool:
        return self.register == other.register and np.max(
            np.abs(self.amplitudes - other.amplitudes), initial=0.0
        ) <= atol

    def __repr__(self) -> str:
        return f"StateVector({' '.join(map(str, self.register))}; {np.array2string(self.amplitudes, precision=4)})"


@dataclass(frozen=True, eq=False)
class DensityOperator:
    register: Register
    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "register", _check_register(self.register))
        m = _frozen(self.matrix)
        side = 1 << len(self.register)
        if m.shape != (side, side):
            raise DimensionError(f"density matrix of shape {m.shape} on {len(self.register)} qubits")
        herm = np.max(np.abs(m - m.conj().T), initial=0.0)
        if herm > HERMITIAN_TOL:
            raise ValidationError(f"density matrix is not Hermitian (max |rho - rho^H| = {herm:.3g})")
        tr = np.trace(m).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValidationError(f"density matrix trace is {tr!r}, expected 1")
        object.__setattr__(self, "matrix", m)

    @property
    def num_qubits(self) -> int:
        return len(self.register)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def is_positive(self, tol: float = 1e-10) -> bool:
        return bool(self.eigenvalues().min(initial=0.0) >= -tol)

    def allclose(self, other: "DensityOperator", atol: float = 1e-10) -> bool:
        return self.register == other.register and np.max(
            np.abs(self.matrix - other.matrix), initial=0.0
        ) <= atol

    def __repr__(self) -> str:
        return f"DensityOperator({' '.join(map(str, self.register))}; dim={self.matrix.shape[0]})"


@dataclass(frozen=True, eq=False)
class UnitaryOperator:
    """Unitary matrix, optionally bound to a register.

    Free operators (``register=None``) are gates that get placed on
    explicit target qubits by :func:`apply_unitary` or
    :func:`mmsim.gates.embed`.
    """

    matrix: np.ndarray
    register: Register | None = None

    def __post_init__(self):
        m = _frozen(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"operator must be square, got shape {m.shape}")
        n = _num_qubits(m.shape[0])
        if self.register is not None:
            reg = _check_register(self.register)
            if len(reg) != n:
                raise DimensionError(f"{n}-qubit operator on a {len(reg)}-qubit register")
            object.__setattr__(self, "register", reg)
        err = np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0])), initial=0.0)
        if err > UNITARY_TOL:
            raise ValidationError(f"operator is not unitary (max |U^H U - I| = {err:.3g})")
        object.__setattr__(self, "matrix", m)

    @property
    def num_qubits(self) -> int:
        return _num_qubits(self.matrix.shape[0])

    @property
    def dagger(self) -> "UnitaryOperator":
        return UnitaryOperator(self.matrix.conj().T, self.register)

    def __matmul__(self, other: "UnitaryOperator") -> "UnitaryOperator":
        if self.register != other.register:
            raise LabelCollisionError("operators act on different registers")
        return UnitaryOperator(self.matrix @ other.matrix, self.register)


Quantum = Union[StateVector, DensityOperator, UnitaryOperator]


# ---------------------------------------------------------------------------
# index plumbing


def _axes_perm(register: Sequence[QubitLabel]) -> tuple[Register, list[int]]:
    """Canonical register and the axis permutation that takes ``register`` to it."""
    reg = canonical(register)
    pos = {q: i for i, q in enumerate(register)}
    return reg, [pos[q] for q in reg]


def _to_canonical_vector(register, amps: np.ndarray) -> tuple[Register, np.ndarray]:
    reg, perm = _axes_perm(register)
    n = len(reg)
    if amps.size != 1 << n:
        raise DimensionError(f"{amps.size} amplitudes do not fit a {n}-qubit register")
    if perm == list(range(n)):
        return reg, amps
    return reg, amps.reshape((2,) * n).transpose(perm).reshape(-1)


def _to_canonical_matrix(register, m: np.ndarray) -> tuple[Register, np.ndarray]:
    reg, perm = _axes_perm(register)
    n = len(reg)
    if perm == list(range(n)):
        return reg, m
    t = m.reshape((2,) * (2 * n)).transpose(perm + [n + p for p in perm])
    return reg, t.reshape(1 << n, 1 << n)


def _apply_on_axes(tensor: np.ndarray, u: np.ndarray, axes: Sequence[int]) -> np.ndarray:
    """Contract the k-qubit matrix ``u`` into ``tensor`` along ``axes``."""
    k = len(axes)
    ut = u.reshape((2,) * (2 * k))
    out = np.tensordot(ut, tensor, axes=(list(range(k, 2 * k)), list(axes)))
    return np.moveaxis(out, list(range(k)), list(axes))


def positions(register: Sequence[QubitLabel], targets: Sequence[QubitLabel]) -> list[int]:
    """Axis positions of ``targets`` inside ``register`` (order preserved)."""
    index = {q: i for i, q in enumerate(register)}
    missing = [str(q) for q in targets if q not in index]
    if missing:
        raise LabelCollisionError(f"qubits not in register: {', '.join(missing)}")
    if len(set(targets)) != len(targets):
        raise LabelCollisionError("target qubits must be distinct")
    return [index[q] for q in targets]


def check_size(n: int, max_qubits: int | None = None) -> None:
    cap = MAX_QUBITS if max_qubits is None else max_qubits
    if n > cap:
        raise RegisterSizeError(f"{n} qubits exceeds the register cap of {cap}")


# ---------------------------------------------------------------------------
# operations


def tensor(a: Quantum, b: Quantum, max_qubits: int | None = None) -> Quantum:
    """Tensor product of two values of the same kind over disjoint registers.

    The result is re-permuted into canonical order, so ``tensor(a, b)`` and
    ``tensor(b, a)`` are the same value.
    """
    if type(a) is not type(b):
        raise TypeError(f"cannot tensor {type(a).__name__} with {type(b).__name__}")
    if isinstance(a, UnitaryOperator) and (a.register is None or b.register is None):
        if a.register is not None or b.register is not None:
            raise TypeError("cannot tensor a free operator with a register-bound one")
        return UnitaryOperator(np.kron(a.matrix, b.matrix))
    overlap = set(a.register) & set(b.register)
    if overlap:
        raise LabelCollisionError(
            "registers overlap on " + ", ".join(str(q) for q in sorted(overlap))
        )
    joint = a.register + b.register
    check_size(len(joint), max_qubits)
    if isinstance(a, StateVector):
        reg, amps = _to_canonical_vector(joint, np.kron(a.amplitudes, b.amplitudes))
        return StateVector(reg, amps)
    reg, m = _to_canonical_matrix(joint, np.kron(a.matrix, b.matrix))
    if isinstance(a, DensityOperator):
        return DensityOperator(reg, m)
    return UnitaryOperator(m, reg)


def partial_trace(rho: DensityOperator | StateVector, discard: Iterable[QubitLabel]) -> DensityOperator:
    """Trace out ``discard``; a pure state is reduced without forming |psi><psi|.

    Discarding every qubit yields the 1x1 operator ``[[Tr rho]]`` on the
    empty register.
    """
    discard = set(discard)
    if not discard and isinstance(rho, DensityOperator):
        return rho
    register = rho.register
    positions(register, sorted(discard))
    keep = [i for i, q in enumerate(register) if q not in discard]
    drop = [i for i, q in enumerate(register) if q in discard]
    kept_reg = tuple(register[i] for i in keep)
    n = len(register)
    dk, dd = 1 << len(keep), 1 << len(drop)
    if isinstance(rho, StateVector):
        psi = rho.amplitudes.reshape((2,) * n).transpose(keep + drop).reshape(dk, dd)
        reduced = psi @ psi.conj().T
    else:
        t = rho.matrix.reshape((2,) * (2 * n))
        t = t.transpose(keep + drop + [n + i for i in keep] + [n + i for i in drop])
        reduced = np.einsum("ijkj->ik", t.reshape(dk, dd, dk, dd))
    # restore exact hermiticity lost to rounding
    reduced = 0.5 * (reduced + reduced.conj().T)
    return DensityOperator(kept_reg, reduced)


def von_neumann_entropy(rho: DensityOperator | np.ndarray, floor: float = ENTROPY_FLOOR) -> float:
    """Entropy ``-Tr rho log2 rho`` in bits; eigenvalues below ``floor`` count as zero."""
    m = rho.matrix if isinstance(rho, DensityOperator) else np.asarray(rho, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"density matrix must be square, got shape {m.shape}")
    if np.max(np.abs(m - m.conj().T), initial=0.0) > HERMITIAN_TOL:
        raise ValidationError("von Neumann entropy of a non-Hermitian matrix")
    lam = np.linalg.eigvalsh(m)
    lam = lam[lam > floor]
    return float(-np.sum(lam * np.log2(lam)))


def shannon_entropy(p: Sequence[float] | np.ndarray) -> float:
    """Shannon entropy in bits with ``0 log 0 = 0``."""
    p = np.asarray(p, dtype=float).reshape(-1)
    if p.size == 0:
        raise ValidationError("empty probability vector")
    if np.any(p < 0):
        raise ValidationError(f"negative probability {p.min()!r}")
    total = p.sum()
    if abs(total - 1.0) > 1e-10:
        raise ValidationError(f"probabilities sum to {total!r}, not 1")
    nz = p[p > 0]
    return float(-np.sum(nz * np.log2(nz)))


def apply_unitary(state: StateVector, u: UnitaryOperator | np.ndarray, targets: Sequence[QubitLabel]) -> StateVector:
    """Apply a k-qubit gate to ``targets`` (first target = most significant gate bit)."""
    m = u.matrix if isinstance(u, UnitaryOperator) else np.asarray(u, dtype=complex)
    targets = tuple(targets)
    if m.shape != (1 << len(targets), 1 << len(targets)):
        raise DimensionError(f"{m.shape[0]}x{m.shape[1]} gate on {len(targets)} target qubit(s)")
    axes = positions(state.register, targets)
    n = state.num_qubits
    psi = _apply_on_axes(state.amplitudes.reshape((2,) * n), m, axes).reshape(-1)
    return StateVector(state.register, psi)


def evolve_density(rho: DensityOperator, u: UnitaryOperator | np.ndarray, targets: Sequence[QubitLabel]) -> DensityOperator:
    """``U rho U^H`` with ``U`` acting on ``targets``."""
    m = u.matrix if isinstance(u, UnitaryOperator) else np.asarray(u, dtype=complex)
    targets = tuple(targets)
    if m.shape != (1 << len(targets), 1 << len(targets)):
        raise DimensionError(f"{m.shape[0]}x{m.shape[1]} gate on {len(targets)} target qubit(s)")
    axes = positions(rho.register, targets)
    n = rho.num_qubits
    t = rho.matrix.reshape((2,) * (2 * n))
    t = _apply_on_axes(t, m, axes)
    t = _apply_on_axes(t, m.conj(), [n + a for a in axes])
    out = t.reshape(rho.matrix.shape)
    return DensityOperator(rho.register, 0.5 * (out + out.conj().T))


def bit_probability(state: StateVector, qubit: QubitLabel) -> float:
    """Probability of finding ``qubit`` in |1>."""
    (axis,) = positions(state.register, [qubit])
    t = np.abs(state.amplitudes.reshape((2,) * state.num_qubits)) ** 2
    return float(np.take(t, 1, axis=axis).sum())
