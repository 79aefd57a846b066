"""Gate constructors and register embedding.

Matrices are stored in the computational index order of :mod:`mmsim.qstate`
(row/column 0 is ``|0>``).  The rotation is the two-parameter family

    R(theta, phi)|1> = cos(theta)|1> - e^{-i phi} sin(theta)|0>
    R(theta, phi)|0> = e^{i phi} sin(theta)|1> + cos(theta)|0>

which, written with rows and columns ordered ``(|1>, |0>)``, reads
``[[cos, e^{i phi} sin], [-e^{-i phi} sin, cos]]``.  :func:`reversed_layout`
converts a stored 2x2 matrix to that ``(|1>, |0>)`` layout.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionError, ValidationError
from .qstate import QubitLabel, UnitaryOperator, _apply_on_axes, _check_register, check_size, positions


@dataclass(frozen=True)
class RotationParams:
    theta: float
    phi: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.theta) and math.isfinite(self.phi)):
            raise ValidationError(f"rotation angles must be finite, got ({self.theta}, {self.phi})")
        object.__setattr__(self, "theta", float(self.theta))
        object.__setattr__(self, "phi", float(self.phi))

    @property
    def q(self) -> float:
        return math.cos(self.theta)

    @property
    def q_squared(self) -> float:
        return math.cos(self.theta) ** 2


PROJECTIVE = RotationParams(0.0, 0.0)
HADAMARD_PARAMS = RotationParams(math.pi / 4, 0.0)


def rotation_matrix(theta: float, phi: float = 0.0) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    e = complex(math.cos(phi), math.sin(phi))
    # rows/cols: |0>, |1>
    return np.array([[c, -s / e], [e * s, c]], dtype=complex)


def rotation_gate(p: RotationParams) -> UnitaryOperator:
    return UnitaryOperator(rotation_matrix(p.theta, p.phi))


def hadamard() -> UnitaryOperator:
    """``R(pi/4, 0)``: the sign pattern differs from the textbook Hadamard."""
    return rotation_gate(HADAMARD_PARAMS)


def reversed_layout(m: np.ndarray) -> np.ndarray:
    """Reorder a single-qubit matrix to rows/columns ``(|1>, |0>)``."""
    m = np.asarray(m)
    if m.shape != (2, 2):
        raise DimensionError("reversed_layout expects a 2x2 matrix")
    return m[::-1, ::-1]


class GateName(str, enum.Enum):
    CNOT = "cnot"
    PAULI_Z = "z"
    PAULI_X = "x"
    IDENTITY = "i"


_ALIASES = {
    "cnot": GateName.CNOT,
    "cx": GateName.CNOT,
    "z": GateName.PAULI_Z,
    "pauliz": GateName.PAULI_Z,
    "x": GateName.PAULI_X,
    "paulix": GateName.PAULI_X,
    "i": GateName.IDENTITY,
    "id": GateName.IDENTITY,
    "identity": GateName.IDENTITY,
}

_MATRICES = {
    GateName.PAULI_Z: np.diag([1.0, -1.0]),
    GateName.PAULI_X: np.array([[0.0, 1.0], [1.0, 0.0]]),
    GateName.IDENTITY: np.eye(2),
    # control = first target, target = second
    GateName.CNOT: np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=float
    ),
}


def standard_gate(name: str | GateName) -> UnitaryOperator:
    """Textbook gate by name (``cnot``, ``z``/``PauliZ``, ``x``/``PauliX``, ``i``/``Identity``)."""
    if not isinstance(name, GateName):
        key = str(name).lower().replace("_", "").replace("-", "")
        if key not in _ALIASES:
            raise ValueError(f"unknown gate {name!r}")
        name = _ALIASES[key]
    return UnitaryOperator(_MATRICES[name])


def identity(num_qubits: int) -> UnitaryOperator:
    return UnitaryOperator(np.eye(1 << num_qubits))


def embed(
    u: UnitaryOperator | np.ndarray,
    targets: Sequence[QubitLabel],
    register: Sequence[QubitLabel],
    max_qubits: int | None = None,
) -> UnitaryOperator:
    """Full-register unitary acting as ``u`` on ``targets`` and as identity elsewhere."""
    m = u.matrix if isinstance(u, UnitaryOperator) else np.asarray(u, dtype=complex)
    register = _check_register(register)
    targets = tuple(targets)
    check_size(len(register), max_qubits)
    if m.shape != (1 << len(targets), 1 << len(targets)):
        raise DimensionError(f"{m.shape[0]}x{m.shape[1]} gate on {len(targets)} target qubit(s)")
    axes = positions(register, targets)
    n = len(register)
    eye = np.eye(1 << n, dtype=complex).reshape((2,) * (2 * n))
    full = _apply_on_axes(eye, m, axes).reshape(1 << n, 1 << n)
    return UnitaryOperator(full, register)


def single_qubit_on(u: np.ndarray, target: int, num_qubits: int) -> np.ndarray:
    """Plain-matrix embedding on an anonymous register (qubit 0 most significant)."""
    return np.kron(np.kron(np.eye(1 << target), u), np.eye(1 << (num_qubits - target - 1)))


def projector_pair(target: int, num_qubits: int, basis_change: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    """``(P0, P1)`` for qubit ``target`` in the basis ``U|k>`` (``U = basis_change``)."""
    p = [np.diag([1.0, 0.0]).astype(complex), np.diag([0.0, 1.0]).astype(complex)]
    if basis_change is not None:
        u = np.asarray(basis_change, dtype=complex)
        p = [u @ pk @ u.conj().T for pk in p]
    return single_qubit_on(p[0], target, num_qubits), single_qubit_on(p[1], target, num_qubits)
