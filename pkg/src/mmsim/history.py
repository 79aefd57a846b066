"""Histories of a d-qubit System recorded on A-qubits.

A :class:`HistorySpec` alternates evolution segments and premeasurement
events::

    segment[0]  event[0]  segment[1]  event[1] ...  event[n-1]  segment[n]

Event ``l`` copies a binary property of the System (one qubit, optionally
in a rotated basis) onto its own A-qubit.  History index ``alpha`` is an
integer whose most significant bit belongs to ``event[0]``; this matches
the canonical A-register order, so ``D`` built from chain operators and
``Tr_S |Psi><Psi|`` from the explicit circuit use the same indexing.

Chain operators apply the earliest factor first::

    C_alpha = T_n P^(n-1)_{alpha} T_{n-1} ... P^(0)_{alpha} T_0

(the trailing segment ``T_n`` drops out of every trace but keeps
``sum_alpha |alpha> C_alpha |psi0>`` equal to the circuit state).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, NamedTuple, Sequence, Union

import numpy as np

from .errors import (
    DimensionError,
    MMSError,
    ValidationError,
    ZeroProbabilityError,
)
from .gates import PROJECTIVE, RotationParams, projector_pair, rotation_matrix, single_qubit_on, standard_gate
from .mms import ZERO_BRANCH, premeasure
from .qstate import A, S, StateVector, _apply_on_axes, apply_unitary, check_size, partial_trace, tensor

MAX_EVENTS = 12
GATE_NAMES = ("h", "x", "z", "cnot", "r")


@dataclass(frozen=True)
class GateOp:
    """One gate of an evolution segment; ``h`` is ``R(pi/4, 0)``."""

    name: str
    targets: tuple[int, ...]
    theta: float = 0.0
    phi: float = 0.0

    def __post_init__(self):
        if self.name not in GATE_NAMES:
            raise ValidationError(f"unknown gate {self.name!r}")
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        want = 2 if self.name == "cnot" else 1
        if len(self.targets) != want:
            raise ValidationError(f"gate {self.name} takes {want} target(s), got {len(self.targets)}")
        if len(set(self.targets)) != len(self.targets):
            raise ValidationError(f"gate {self.name} has repeated targets")
        if self.name != "r" and (self.theta != 0.0 or self.phi != 0.0):
            raise ValidationError(f"gate {self.name} takes no angles")

    def matrix(self) -> np.ndarray:
        if self.name == "r":
            return rotation_matrix(self.theta, self.phi)
        if self.name == "h":
            return rotation_matrix(math.pi / 4, 0.0)
        return standard_gate(self.name).matrix

    def full(self, d: int) -> np.ndarray:
        """Matrix on the whole ``d``-qubit System (qubit 0 most significant)."""
        if any(t >= d or t < 0 for t in self.targets):
            raise ValidationError(f"gate {self.name} targets {self.targets} outside a {d}-qubit System")
        if len(self.targets) == 1:
            return single_qubit_on(self.matrix(), self.targets[0], d)
        eye = np.eye(1 << d, dtype=complex)
        t = _apply_on_axes(eye.reshape((2,) * (2 * d)), self.matrix(), list(self.targets))
        return t.reshape(1 << d, 1 << d)


@dataclass(frozen=True)
class EvolutionSegment:
    gates: tuple[GateOp, ...] = ()

    def unitary(self, d: int) -> np.ndarray:
        u = np.eye(1 << d, dtype=complex)
        for g in self.gates:
            u = g.full(d) @ u
        err = np.max(np.abs(u.conj().T @ u - np.eye(1 << d)))
        if err > 1e-12:
            raise ValidationError(f"segment is not unitary (residual {err:.3g})")
        return u

    def __add__(self, other: "EvolutionSegment") -> "EvolutionSegment":
        return EvolutionSegment(self.gates + other.gates)


@dataclass(frozen=True)
class PremeasureEvent:
    """Copy System qubit ``target`` (in basis ``U|k>``, ``U`` from ``basis``) onto a fresh A-qubit."""

    label: str
    target: int
    basis: GateOp | None = None

    def __post_init__(self):
        if self.basis is not None and self.basis.name not in ("h", "r"):
            raise ValidationError(f"premeasurement basis must be h or r, got {self.basis.name}")

    def basis_matrix(self) -> np.ndarray | None:
        return None if self.basis is None else self.basis.matrix()

    def projectors(self, d: int) -> tuple[np.ndarray, np.ndarray]:
        return projector_pair(self.target, d, self.basis_matrix())


@dataclass(frozen=True)
class HistorySpec:
    d: int
    init: tuple[complex, ...] | None
    segments: tuple[EvolutionSegment, ...]
    events: tuple[PremeasureEvent, ...]
    measured: tuple[tuple[str, RotationParams], ...] = ()

    def __post_init__(self):
        if self.d < 1:
            raise ValidationError(f"System needs at least one qubit, got d={self.d}")
        n = len(self.events)
        if n > MAX_EVENTS:
            raise ValidationError(f"{n} premeasurement events exceed the limit of {MAX_EVENTS}")
        if len(self.segments) != n + 1:
            raise ValidationError(f"expected {n + 1} evolution segments, got {len(self.segments)}")
        labels = [e.label for e in self.events]
        if len(set(labels)) != n:
            raise ValidationError("premeasurement labels must be unique")
        for e in self.events:
            if not 0 <= e.target < self.d:
                raise ValidationError(f"event {e.label} targets qubit {e.target} outside the System")
        for seg in self.segments:
            for g in seg.gates:
                if max(g.targets) >= self.d:
                    raise ValidationError(f"gate {g.name} targets {g.targets} outside a {self.d}-qubit System")
        seen = set()
        for label, _ in self.measured:
            if label not in labels:
                raise ValidationError(f"measured event {label!r} is not a premeasurement")
            if label in seen:
                raise ValidationError(f"event {label!r} measured twice")
            seen.add(label)
        if self.init is not None:
            amps = tuple(complex(a) for a in self.init)
            if len(amps) != 1 << self.d:
                raise DimensionError(f"pure init needs {1 << self.d} amplitudes, got {len(amps)}")
            norm2 = sum(abs(a) ** 2 for a in amps)
            if abs(norm2 - 1.0) > 1e-12:
                raise ValidationError(f"initial state is not normalised (|psi|^2 = {norm2!r})")
            object.__setattr__(self, "init", amps)

    @classmethod
    def build(
        cls,
        d: int,
        steps: Iterable[GateOp | PremeasureEvent],
        init: Sequence[complex] | None = None,
        measured: Iterable[tuple[str, RotationParams]] | Mapping[str, RotationParams] = (),
        normalize: bool = True,
    ) -> "HistorySpec":
        """Assemble a spec from an interleaved list of gates and events."""
        segments, events, current = [], [], []
        for step in steps:
            if isinstance(step, PremeasureEvent):
                segments.append(EvolutionSegment(tuple(current)))
                events.append(step)
                current = []
            else:
                current.append(step)
        segments.append(EvolutionSegment(tuple(current)))
        if init is not None and normalize:
            v = np.asarray(init, dtype=complex)
            norm = np.linalg.norm(v)
            if norm == 0:
                raise ValidationError("initial state is the zero vector")
            if abs(norm - 1.0) > 1e-13:
                v = v / norm
            init = tuple(v.tolist())
        if isinstance(measured, Mapping):
            measured = measured.items()
        return cls(d, None if init is None else tuple(init), tuple(segments), tuple(events), tuple(measured))

    @property
    def n(self) -> int:
        return len(self.events)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(e.label for e in self.events)

    @property
    def measured_params(self) -> dict[str, RotationParams]:
        return dict(self.measured)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise MMSError(f"unknown event label {label!r}") from None

    def rho0(self) -> np.ndarray:
        dim = 1 << self.d
        if self.init is None:
            return np.eye(dim, dtype=complex) / dim
        psi = np.asarray(self.init, dtype=complex)
        return np.outer(psi, psi.conj())

    def steps(self) -> list[GateOp | PremeasureEvent]:
        out: list[GateOp | PremeasureEvent] = []
        for seg, ev in zip(self.segments, self.events):
            out.extend(seg.gates)
            out.append(ev)
        out.extend(self.segments[-1].gates)
        return out

    def without_event(self, label: str) -> "HistorySpec":
        """Same spec with one premeasurement deleted (its neighbouring segments merged)."""
        i = self.index(label)
        segs = list(self.segments)
        merged = segs[i] + segs[i + 1]
        segs[i : i + 2] = [merged]
        events = self.events[:i] + self.events[i + 1 :]
        measured = tuple((l, p) for l, p in self.measured if l != label)
        return replace(self, segments=tuple(segs), events=events, measured=measured)


@dataclass(frozen=True, eq=False)
class HistoryDensityMatrix:
    entries: np.ndarray
    labels: tuple[str, ...]

    def __post_init__(self):
        m = np.array(self.entries, dtype=complex)
        n = len(self.labels)
        if m.shape != (1 << n, 1 << n):
            raise DimensionError(f"history matrix of shape {m.shape} for {n} events")
        herm = np.max(np.abs(m - m.conj().T), initial=0.0)
        if herm > 1e-10:
            raise ValidationError(f"history matrix is not Hermitian ({herm:.3g})")
        if abs(np.trace(m).real - 1.0) > 1e-9:
            raise ValidationError(f"history matrix trace {np.trace(m).real!r} != 1")
        if np.min(np.diag(m).real, initial=0.0) < -1e-10:
            raise ValidationError("history matrix has a negative diagonal entry")
        m.flags.writeable = False
        object.__setattr__(self, "entries", m)

    @property
    def n(self) -> int:
        return len(self.labels)

    def probabilities(self) -> np.ndarray:
        return np.clip(np.diag(self.entries).real, 0.0, None)


class Branch(NamedTuple):
    probability: float
    residual: np.ndarray


@dataclass(frozen=True, eq=False)
class BranchTree:
    """Post-measurement history matrix split by the measured outcomes ``beta``.

    ``residual`` of a branch is the unnormalised ``D^(beta)`` over the
    unmeasured events, so ``probability == trace(residual)``.  Blocks
    between different ``beta`` are zero by construction and not stored.
    """

    labels: tuple[str, ...]
    measured: tuple[str, ...]
    unmeasured: tuple[str, ...]
    branches: dict[tuple[int, ...], Branch] = field(default_factory=dict)
    dropped: tuple[tuple[int, ...], ...] = ()

    def probabilities(self) -> dict[tuple[int, ...], float]:
        return {beta: b.probability for beta, b in self.branches.items()}

    def total_probability(self) -> float:
        return float(sum(b.probability for b in self.branches.values()))

    def full_matrix(self) -> np.ndarray:
        """Whole post-measurement matrix in the original event order."""
        m, u = len(self.measured), len(self.unmeasured)
        t = np.zeros((2,) * (2 * (m + u)), dtype=complex)
        for beta, b in self.branches.items():
            t[beta + (slice(None),) * u + beta + (slice(None),) * u] = b.residual.reshape((2,) * (2 * u))
        order = list(self.measured) + list(self.unmeasured)
        perm = [order.index(l) for l in self.labels]
        k = m + u
        t = t.transpose(perm + [k + p for p in perm])
        return t.reshape(1 << k, 1 << k)


# ---------------------------------------------------------------------------
# operators


def _event_ops(spec: HistorySpec, rotations: Mapping[str, RotationParams] | None) -> list[tuple[np.ndarray, np.ndarray]]:
    """Per-event operator pair ``(K_0, K_1)``: projectors, or Kraus operators if rotated."""
    ops = []
    for ev in spec.events:
        p0, p1 = ev.projectors(spec.d)
        rot = None if rotations is None else rotations.get(ev.label)
        if rot is None:
            ops.append((p0, p1))
            continue
        r = rotation_matrix(rot.theta, rot.phi)
        ops.append((np.conj(r[0, 0]) * p0 + np.conj(r[0, 1]) * p1, np.conj(r[1, 0]) * p0 + np.conj(r[1, 1]) * p1))
    return ops


def all_history_operators(spec: HistorySpec, rotations: Mapping[str, RotationParams] | None = None) -> np.ndarray:
    """Stack of all ``2^n`` chain (or generalised history) operators, indexed by ``alpha``."""
    dim = 1 << spec.d
    ops = np.eye(dim, dtype=complex)[None]
    for seg, (k0, k1) in zip(spec.segments, _event_ops(spec, rotations)):
        evolved = seg.unitary(spec.d) @ ops
        ops = np.stack([k0 @ evolved, k1 @ evolved], axis=1).reshape(-1, dim, dim)
    return spec.segments[-1].unitary(spec.d) @ ops


def _alpha_index(bits: Sequence[int], n: int) -> int:
    bits = tuple(int(b) for b in bits)
    if len(bits) != n:
        raise DimensionError(f"history vector of length {len(bits)} for {n} events")
    if any(b not in (0, 1) for b in bits):
        raise ValidationError(f"history vector must be binary, got {bits}")
    return int("".join(map(str, bits)) or "0", 2)


def chain_operator(spec: HistorySpec, alpha: Sequence[int]) -> np.ndarray:
    """Time-ordered product of projectors and evolutions for history ``alpha``."""
    _alpha_index(alpha, spec.n)
    dim = 1 << spec.d
    op = np.eye(dim, dtype=complex)
    for seg, ev, a in zip(spec.segments, spec.events, alpha):
        op = ev.projectors(spec.d)[int(a)] @ seg.unitary(spec.d) @ op
    return spec.segments[-1].unitary(spec.d) @ op


def _rotation_map(spec: HistorySpec, rotations) -> dict[str, RotationParams]:
    if rotations is None:
        return spec.measured_params
    if isinstance(rotations, Mapping):
        for label in rotations:
            spec.index(label)
        return {k: v for k, v in rotations.items() if v is not None}
    rotations = list(rotations)
    if len(rotations) != spec.n:
        raise DimensionError(f"{len(rotations)} rotations for {spec.n} events")
    return {ev.label: r for ev, r in zip(spec.events, rotations) if r is not None}


def generalized_history_operator(
    spec: HistorySpec,
    beta: Sequence[int],
    rotations: Mapping[str, RotationParams] | Sequence[RotationParams | None] | None = None,
) -> np.ndarray:
    """Chain operator with each projector pair replaced by the Kraus pair of its A-readout.

    ``rotations`` maps labels (or lists events in order) to readout
    rotations; events without one keep their projectors.  Defaults to the
    spec's ``measured`` rotations.
    """
    _alpha_index(beta, spec.n)
    rot = _rotation_map(spec, rotations)
    op = np.eye(1 << spec.d, dtype=complex)
    for seg, pair, b in zip(spec.segments, _event_ops(spec, rot), beta):
        op = pair[int(b)] @ seg.unitary(spec.d) @ op
    return spec.segments[-1].unitary(spec.d) @ op


def build_history_state(spec: HistorySpec, max_qubits: int | None = None) -> StateVector:
    """Run the premeasurement circuit gate by gate on System + n A-qubits."""
    if spec.init is None:
        raise MMSError("the explicit history circuit needs a pure initial state")
    check_size(spec.d + spec.n, max_qubits)
    sys_reg = [S(i) for i in range(spec.d)]
    state = StateVector.from_amplitudes(sys_reg, spec.init, normalize=False)
    if spec.n:
        state = tensor(state, StateVector.zero([A(l) for l in range(spec.n)]), max_qubits=max_qubits)

    def run(seg: EvolutionSegment, st: StateVector) -> StateVector:
        for g in seg.gates:
            st = apply_unitary(st, g.matrix(), [S(t) for t in g.targets])
        return st

    for l, (seg, ev) in enumerate(zip(spec.segments, spec.events)):
        state = run(seg, state)
        state = premeasure(state, S(ev.target), A(l), ev.basis_matrix())
    return run(spec.segments[-1], state)


def history_density_matrix(spec: HistorySpec) -> HistoryDensityMatrix:
    """``D[alpha, alpha'] = Tr_S(C_alpha rho0 C_alpha'^H)`` by operator sums."""
    ops = all_history_operators(spec)
    dim = 1 << spec.d
    if spec.init is None:
        flat = ops.reshape(ops.shape[0], dim * dim)
        d = flat @ flat.conj().T / dim
    else:
        v = ops @ np.asarray(spec.init, dtype=complex)
        d = v @ v.conj().T
    return HistoryDensityMatrix(0.5 * (d + d.conj().T), spec.labels)


def explicit_history_density_matrix(spec: HistorySpec, max_qubits: int | None = None) -> HistoryDensityMatrix:
    """``Tr_S |Psi><Psi|`` from the circuit state (pure init only)."""
    state = build_history_state(spec, max_qubits)
    reduced = partial_trace(state, [S(i) for i in range(spec.d)])
    return HistoryDensityMatrix(reduced.matrix, spec.labels)


# ---------------------------------------------------------------------------
# branching


Measured = Union[Mapping[str, RotationParams], Iterable[tuple[str, RotationParams]], Iterable[str]]


def _measured_list(measured: Measured, labels: Sequence[str]) -> list[tuple[str, RotationParams]]:
    if isinstance(measured, Mapping):
        items = list(measured.items())
    else:
        items = [(m, PROJECTIVE) if isinstance(m, str) else tuple(m) for m in measured]
    seen = set()
    for label, _ in items:
        if label not in labels:
            raise MMSError(f"unknown event label {label!r} in measured subset")
        if label in seen:
            raise MMSError(f"event {label!r} listed twice in measured subset")
        seen.add(label)
    return items


def apply_mms_to_history(
    source: HistorySpec | HistoryDensityMatrix,
    measured: Measured | None = None,
) -> BranchTree:
    """Read out a subset of A-qubits and split the history matrix into branches.

    Each measured A-qubit gets its readout gate ``conj(R)``; then every block
    between different outcome vectors ``beta`` is discarded.  ``beta`` lists
    outcomes in the order the measured labels were given; ``gamma`` runs
    over the unmeasured events in time order.
    """
    if isinstance(source, HistorySpec):
        D = history_density_matrix(source)
        if measured is None:
            measured = source.measured
    else:
        D = source
        if measured is None:
            raise MMSError("a measured subset is required when starting from a history matrix")
    labels = D.labels
    n = len(labels)
    items = _measured_list(measured, labels)
    mlabels = [l for l, _ in items]
    ulabels = [l for l in labels if l not in mlabels]

    t = D.entries.reshape((2,) * (2 * n))
    for label, rot in items:
        g = rotation_matrix(rot.theta, rot.phi).conj()
        ax = labels.index(label)
        t = np.moveaxis(np.tensordot(g, t, axes=([1], [ax])), 0, ax)
        t = np.moveaxis(np.tensordot(g.conj(), t, axes=([1], [n + ax])), 0, n + ax)
    order = [labels.index(l) for l in mlabels + ulabels]
    t = t.transpose(order + [n + o for o in order])
    m, u = len(mlabels), len(ulabels)
    t = t.reshape(1 << m, 1 << u, 1 << m, 1 << u)

    branches, dropped = {}, []
    for b in range(1 << m):
        beta = tuple(int(c) for c in format(b, f"0{m}b")) if m else ()
        block = t[b, :, b, :]
        block = 0.5 * (block + block.conj().T)
        p = float(np.trace(block).real)
        if p < ZERO_BRANCH:
            dropped.append(beta)
            continue
        block.flags.writeable = False
        branches[beta] = Branch(p, block)
    return BranchTree(tuple(labels), tuple(mlabels), tuple(ulabels), branches, tuple(dropped))


def _branch(tree: BranchTree, beta: Sequence[int]) -> Branch:
    beta = tuple(int(b) for b in beta)
    if len(beta) != len(tree.measured):
        raise DimensionError(f"beta of length {len(beta)} for {len(tree.measured)} measured events")
    if beta not in tree.branches:
        raise ZeroProbabilityError(f"branch {beta} has zero probability")
    return tree.branches[beta]


def conditional_table(tree: BranchTree, beta: Sequence[int]) -> np.ndarray:
    """``p(gamma | beta)`` for every ``gamma``."""
    b = _branch(tree, beta)
    return np.clip(np.diag(b.residual).real, 0.0, None) / b.probability


def conditional_probability(tree: BranchTree, beta: Sequence[int], gamma: Sequence[int]) -> float:
    """Probability of the unmeasured sub-history ``gamma`` given the branch ``beta``."""
    idx = _alpha_index(gamma, len(tree.unmeasured))
    return float(conditional_table(tree, beta)[idx])


def marginalize(tree: BranchTree, label: str) -> BranchTree:
    """Trace one unmeasured event out of every branch's residual matrix."""
    if label in tree.measured:
        raise MMSError(f"event {label!r} is measured; only unmeasured events can be traced out")
    if label not in tree.unmeasured:
        raise MMSError(f"unknown event label {label!r}")
    u = len(tree.unmeasured)
    ax = tree.unmeasured.index(label)
    new = {}
    for beta, b in tree.branches.items():
        t = b.residual.reshape((2,) * (2 * u))
        r = np.trace(t, axis1=ax, axis2=u + ax).reshape(1 << (u - 1), 1 << (u - 1))
        r.flags.writeable = False
        new[beta] = Branch(b.probability, r)
    labels = tuple(l for l in tree.labels if l != label)
    unmeasured = tuple(l for l in tree.unmeasured if l != label)
    return BranchTree(labels, tree.measured, unmeasured, new, tree.dropped)


class Consistency(NamedTuple):
    consistent: bool
    max_offdiag: float


def consistency_check(D: HistoryDensityMatrix | BranchTree | np.ndarray, tol: float = 1e-12) -> Consistency:
    """Whether every off-diagonal entry is below ``tol`` in magnitude."""
    if isinstance(D, HistoryDensityMatrix):
        m = D.entries
    elif isinstance(D, BranchTree):
        m = D.full_matrix()
    else:
        m = np.asarray(D)
    off = np.abs(m - np.diag(np.diag(m)))
    worst = float(off.max(initial=0.0))
    return Consistency(worst < tol, worst)
