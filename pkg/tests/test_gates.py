import math

import numpy as np
import pytest

from mmsim.errors import DimensionError, LabelCollisionError, ValidationError
from mmsim.gates import (
    RotationParams,
    embed,
    hadamard,
    reversed_layout,
    rotation_gate,
    standard_gate,
)
from mmsim.mms import kraus_ops
from mmsim.qstate import A, S, X, StateVector, apply_unitary, tensor


def test_rotation_zero_is_identity():
    for phi in (0.0, 1.3, -2.0):
        np.testing.assert_allclose(rotation_gate(RotationParams(0.0, phi)).matrix, np.eye(2), atol=0)


def test_rotation_pi_4_in_reversed_layout():
    m = reversed_layout(rotation_gate(RotationParams(math.pi / 4, 0.0)).matrix)
    np.testing.assert_allclose(m, np.array([[1, 1], [-1, 1]]) / math.sqrt(2), atol=1e-15)


def test_rotation_pi_2_is_antidiagonal():
    m = reversed_layout(rotation_gate(RotationParams(math.pi / 2, 0.0)).matrix)
    np.testing.assert_allclose(m, [[0, 1], [-1, 0]], atol=1e-15)


def test_rotation_matches_written_form():
    theta, phi = 0.7, 0.4
    c, s = math.cos(theta), math.sin(theta)
    written = np.array([[c, np.exp(1j * phi) * s], [-np.exp(-1j * phi) * s, c]])
    np.testing.assert_allclose(reversed_layout(rotation_gate(RotationParams(theta, phi)).matrix), written, atol=1e-15)


def test_rotation_unitary_for_random_params(rng):
    for _ in range(1000):
        u = rotation_gate(RotationParams(rng.uniform(-10, 10), rng.uniform(-10, 10))).matrix
        assert np.max(np.abs(u.conj().T @ u - np.eye(2))) < 1e-14


def test_rotation_params_finite():
    with pytest.raises(ValidationError):
        RotationParams(math.nan, 0.0)
    with pytest.raises(ValidationError):
        RotationParams(0.0, math.inf)


def test_hadamard_gives_erasure_kraus():
    k = kraus_ops(RotationParams(math.pi / 4, 0.0))
    np.testing.assert_allclose(k.m1, np.eye(2) / math.sqrt(2), atol=1e-15)
    np.testing.assert_allclose(k.m0, np.diag([1, -1]) / math.sqrt(2), atol=1e-15)
    np.testing.assert_allclose(hadamard().matrix, rotation_gate(RotationParams(math.pi / 4)).matrix)


def test_cnot_flips_on_one():
    out = apply_unitary(StateVector.basis([S(0), A(0)], [1, 0]), standard_gate("cnot"), [S(0), A(0)])
    np.testing.assert_array_equal(out.amplitudes, StateVector.basis([S(0), A(0)], [1, 1]).amplitudes)


def test_pauli_z_on_one():
    out = apply_unitary(StateVector.basis([S(0)], [1]), standard_gate("PauliZ"), [S(0)])
    np.testing.assert_array_equal(out.amplitudes, [0, -1])


def test_cnot_involution():
    c = standard_gate("cnot").matrix
    np.testing.assert_array_equal(c @ c, np.eye(4))


@pytest.mark.parametrize("name", ["CNOT", "PauliX", "pauli_z", "Identity", "x", "i"])
def test_standard_gate_aliases(name):
    assert standard_gate(name).num_qubits in (1, 2)


def test_unknown_gate():
    with pytest.raises(ValueError):
        standard_gate("toffoli")


def test_embed_single_qubit():
    reg = (S(0), A(0), A(1))
    z = standard_gate("z").matrix
    want = np.kron(np.kron(np.eye(2), np.eye(2)), z)
    np.testing.assert_array_equal(embed(z, [A(1)], reg).matrix, want)


def test_embed_cnot_reproduces_premeasurement():
    reg = (S(0), A(0))
    u = embed(standard_gate("cnot"), [S(0), A(0)], reg)
    psi = tensor(StateVector.from_amplitudes([S(0)], [0.8, 0.6]), StateVector.zero([A(0)]))
    np.testing.assert_allclose(u.matrix @ psi.amplitudes, [0.8, 0, 0, 0.6], atol=1e-15)


def test_embed_reversed_cnot():
    reg = (S(0), A(0))
    u = embed(standard_gate("cnot"), [A(0), S(0)], reg)
    # control A, target S: |0,1> -> |1,1>
    assert u.matrix[3, 1] == 1


def test_embed_identity():
    reg = (S(0), S(1), X(0))
    np.testing.assert_array_equal(embed(np.eye(4), [X(0), S(0)], reg).matrix, np.eye(8))


def test_embed_commutes_with_tensor():
    r1 = (S(0), A(1))
    r2 = (A(0), X(0))
    u = rotation_gate(RotationParams(0.4, 1.1))
    lhs = embed(u, [A(1)], tuple(sorted(r1 + r2)))
    rhs = tensor(embed(u, [A(1)], r1), embed(standard_gate("i"), [A(0)], r2))
    np.testing.assert_allclose(lhs.matrix, rhs.matrix, atol=1e-15)


def test_embed_errors():
    with pytest.raises(DimensionError):
        embed(standard_gate("cnot"), [S(0)], (S(0), A(0)))
    with pytest.raises(LabelCollisionError):
        embed(standard_gate("z"), [X(0)], (S(0), A(0)))
    with pytest.raises(LabelCollisionError):
        embed(standard_gate("cnot"), [S(0), S(0)], (S(0), A(0)))
