"""Acceptance criteria, one test each; results are summarised at the end of the run."""

import math
from pathlib import Path

import numpy as np

from helpers import random_amplitudes, random_params, random_spec
from mmsim.cli import main
from mmsim.collapse import (
    asymptotic_nstar,
    default_theta_grid,
    estimate_nstar,
    explicit_collapse_oracle,
    extraction_curve,
    nstar_curve_length,
    outcome_distribution,
    small_x_extraction,
)
from mmsim.gates import HADAMARD_PARAMS, PROJECTIVE, RotationParams, rotation_matrix, standard_gate
from mmsim.history import (
    all_history_operators,
    apply_mms_to_history,
    build_history_state,
    consistency_check,
    explicit_history_density_matrix,
    generalized_history_operator,
    history_density_matrix,
)
from mmsim.mms import (
    ancilla_projectors,
    fidelity,
    kraus_ops,
    mms_measure,
    premeasure,
    readout_gate,
    von_neumann_collapse_oracle,
)
from mmsim.qstate import A, S, X, StateVector, apply_unitary, shannon_entropy, tensor, von_neumann_entropy
from mmsim.specfile import parse_history_spec, serialize_history_spec

SPECS = Path(__file__).parent / "data" / "specs"
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)


def premeasured(c):
    psi = StateVector.from_amplitudes([S(0)], c)
    return premeasure(tensor(psi, StateVector.zero([A(0)])), S(0), A(0))


def bits(k, n):
    return tuple(int(c) for c in format(k, f"0{n}b")) if n else ()


def test_01_mms_matches_von_neumann(criterion):
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(100):
        state = premeasured(random_amplitudes(rng, 2))
        mms = mms_measure(state, A(0), PROJECTIVE).rho_sa.matrix
        oracle = von_neumann_collapse_oracle(state.density(), ancilla_projectors(state.register, A(0))).matrix
        worst = max(worst, np.max(np.abs(mms - oracle)))
    assert criterion(1, "theta=0 MMS equals projective collapse", worst < 1e-12, f"max dev {worst:.2e}, tol 1e-12")


def test_02_kraus_matches_explicit_three_qubits(criterion):
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(100):
        c = random_amplitudes(rng, 2)
        p = RotationParams(rng.uniform(-math.pi, math.pi), rng.uniform(-math.pi, math.pi))
        # hand-built S A X circuit
        psi = np.kron(np.kron(c, [1, 0]), [1, 0])
        u = np.kron(np.eye(2), CNOT) @ np.kron(np.kron(np.eye(2), rotation_matrix(p.theta, p.phi).conj()), np.eye(2))
        u = u @ np.kron(CNOT, np.eye(2))
        t = (u @ psi).reshape(2, 2, 2)
        for r, m in enumerate(kraus_ops(p)):
            v = m @ c
            prob = np.vdot(v, v).real
            block = t[:, r, r]
            worst = max(worst, abs(np.vdot(block, block).real - prob))
            if prob > 1e-14:
                worst = max(worst, np.max(np.abs(block / np.linalg.norm(block) - v / math.sqrt(prob))))
        ops = list(kraus_ops(p))
        for b in mms_measure(premeasured(c), A(0), p).branches:
            v = ops[b.r] @ c
            worst = max(worst, abs(b.probability - np.vdot(v, v).real))
            worst = max(worst, np.max(np.abs(b.post_state.amplitudes - v / np.linalg.norm(v))))
    assert criterion(2, "Kraus formula equals explicit S-A-X circuit", worst < 1e-12, f"max dev {worst:.2e}, tol 1e-12")


def test_03_entropy_identity(criterion):
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(100):
        res = mms_measure(premeasured(random_amplitudes(rng, 2)), A(0), random_params(rng))
        s_vn = von_neumann_entropy(res.rho_sa)
        s_sh = shannon_entropy([b.probability for b in res.branches])
        worst = max(worst, abs(s_vn - s_sh))
    assert criterion(3, "S_vN(rho_sa) equals Shannon entropy of outcomes", worst < 1e-10, f"max dev {worst:.2e}, tol 1e-10")


def test_04_erasure(criterion):
    rng = np.random.default_rng(4)
    worst_f, worst_p = 0.0, 0.0
    z = np.diag([1.0, -1.0])
    for _ in range(50):
        psi = StateVector.from_amplitudes([S(0)], random_amplitudes(rng, 2))
        res = mms_measure(premeasured(psi.amplitudes), A(0), HADAMARD_PARAMS)
        assert [b.r for b in res.branches] == [0, 1]
        for b in res.branches:
            worst_p = max(worst_p, abs(b.probability - 0.5))
            post = apply_unitary(b.post_state, z, [S(0)]) if b.r == 0 else b.post_state
            worst_f = max(worst_f, 1 - fidelity(post, psi))
    ok = worst_f <= 1e-10 and worst_p < 1e-12
    assert criterion(4, "erasure recovers the state on both branches", ok,
                     f"max 1-F {worst_f:.2e} tol 1e-10, max |p-1/2| {worst_p:.2e} tol 1e-12")


def test_05_weak_distribution_oracle(criterion):
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(50):
        c = random_amplitudes(rng, 2)
        N = int(rng.integers(1, 9))
        theta, phi = rng.uniform(0, math.pi / 2), rng.uniform(-math.pi, math.pi)
        got = explicit_collapse_oracle(c[0], c[1], theta, phi, N)
        want = outcome_distribution(abs(c[0]) ** 2, 1 - abs(c[0]) ** 2, theta, N)
        worst = max(worst, np.max(np.abs(got - want)))
    assert criterion(5, "explicit N-round circuit equals binomial mixture", worst < 1e-10, f"max dev {worst:.2e}, tol 1e-10")


def test_06_figure_properties(criterion):
    grid = default_theta_grid()
    # (a)
    flat = extraction_curve(0.5, 0.5, math.pi / 4, 500).fractions
    a_ok = np.max(np.abs(flat)) < 1e-9
    # (b), (c), (d)
    worst_b, b_count, c_fail, d_fail, worst_d = 0.0, 0, [], [], 0.0
    for theta in grid:
        n_star = asymptotic_nstar(theta)
        reach = max(1, int(math.floor(10 * n_star)))
        fits = {}
        for c0_sq in (0.5, 0.1):
            curve = extraction_curve(c0_sq, 1 - c0_sq, theta, nstar_curve_length(theta))
            f = curve.fractions
            if np.any(np.diff(f) < -1e-9) or f[reach - 1] < 0.99:
                (c_fail if c0_sq == 0.5 else d_fail).append(round(theta, 3))
            if 0.05 <= abs(theta - math.pi / 4) <= 0.6:
                fits[c0_sq] = estimate_nstar(curve, min_points=3)
        if fits:
            b_count += 1
            worst_b = max(worst_b, fits[0.5].rel_err)
            worst_d = max(worst_d, abs(fits[0.1].n_star_fit - fits[0.5].n_star_fit) / fits[0.5].n_star_fit)
    ok = a_ok and worst_b < 0.25 and not c_fail and not d_fail and worst_d < 0.30
    detail = (f"(a) max|f| at pi/4 {np.max(np.abs(flat)):.1e}; (b) {b_count} thetas, worst rel err {worst_b:.3f} < 0.25; "
              f"(c) failures {c_fail}; (d) failures {d_fail}, worst N* shift {worst_d:.3f} < 0.30")
    assert criterion(6, "extraction curves reproduce the figure", ok, detail)


def test_07_small_x_law(criterion):
    x = 0.05
    theta = math.pi / 4 + x
    n_max = int(math.floor(0.5 * asymptotic_nstar(theta)))
    curve = extraction_curve(0.5, 0.5, theta, n_max)
    worst, at = 0.0, 0
    for pt in curve.points:
        approx = small_x_extraction(x, pt.N)
        dev = abs((pt.S_total - pt.S_binom) - approx) / approx
        if dev > worst:
            worst, at = dev, pt.N
    assert criterion(7, "small-x law within 15% for N <= N*/2", worst < 0.15,
                     f"worst rel dev {worst:.3f} at N={at} of {n_max}, tol 0.15")


def test_08_history_completeness(criterion):
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(20):
        spec = random_spec(rng, int(rng.integers(1, 4)), int(rng.integers(1, 6)))
        ops = all_history_operators(spec)
        eye = np.eye(1 << spec.d)
        worst = max(worst, np.max(np.abs(np.einsum("aji,ajk->ik", ops.conj(), ops) - eye)))
        rot = [random_params(rng) for _ in range(spec.n)]
        total = sum(g.conj().T @ g for g in (generalized_history_operator(spec, bits(k, spec.n), rot) for k in range(1 << spec.n)))
        worst = max(worst, np.max(np.abs(total - eye)))
    assert criterion(8, "chain and generalised history operators are complete", worst < 1e-10, f"max dev {worst:.2e}, tol 1e-10")


def test_09_purity_cross_check(criterion):
    rng = np.random.default_rng(9)
    worst = 0.0
    for _ in range(20):
        d = int(rng.integers(1, 4))
        spec = random_spec(rng, d, int(rng.integers(1, 11 - d)))
        dev = np.max(np.abs(history_density_matrix(spec).entries - explicit_history_density_matrix(spec).entries))
        worst = max(worst, dev)
    assert criterion(9, "operator-sum D equals explicit circuit trace", worst < 1e-10, f"max dev {worst:.2e}, tol 1e-10")


def test_10_consistency_emerges(criterion):
    spec = parse_history_spec((SPECS / "valid" / "consistency_pi8.hist").read_text())
    before = consistency_check(history_density_matrix(spec)).max_offdiag
    after = consistency_check(apply_mms_to_history(spec, spec.labels)).max_offdiag
    ok = before > 0.01 and after < 1e-12
    assert criterion(10, "interference present before MMS, gone after", ok,
                     f"max offdiag {before:.4f} > 0.01 before, {after:.1e} < 1e-12 after")


def _joint_oracle(spec, label, params):
    state = build_history_state(spec)
    i = spec.index(label)
    state = apply_unitary(state, readout_gate(params), [A(i)])
    state = apply_unitary(tensor(state, StateVector.zero([X(0)])), standard_gate("cnot"), [A(i), X(0)])
    probs = np.abs(state.amplitudes.reshape(1 << spec.d, 1 << spec.n, 2)) ** 2
    joint = probs.sum(axis=(0, 2)).reshape(2, 2)
    return joint if i == 0 else joint.T


def test_11_branches_and_conditionals(criterion):
    rng = np.random.default_rng(11)
    worst_sum, worst_cond = 0.0, 0.0
    for k in range(20):
        spec = random_spec(rng, int(rng.integers(1, 4)), 2)
        label = spec.labels[k % 2]
        p = random_params(rng)
        tree = apply_mms_to_history(spec, {label: p})
        worst_sum = max(worst_sum, abs(tree.total_probability() - 1))
        joint = _joint_oracle(spec, label, p)  # [beta, gamma]
        for (beta,), branch in tree.branches.items():
            table = np.diag(branch.residual).real / branch.probability
            worst_cond = max(worst_cond, np.max(np.abs(table - joint[beta] / joint[beta].sum())))
    ok = worst_sum < 1e-9 and worst_cond < 1e-9
    assert criterion(11, "branch probabilities add up and conditionals match the joint oracle", ok,
                     f"|sum-1| {worst_sum:.1e}, conditional dev {worst_cond:.1e}, tol 1e-9")


def test_12_in_history_erasure(criterion):
    rng = np.random.default_rng(12)
    worst = 0.0
    for k in range(20):
        spec = random_spec(rng, int(rng.integers(1, 4)), int(rng.integers(2, 5)), pure=bool(k % 2))
        label = spec.labels[int(rng.integers(spec.n))]
        branch = apply_mms_to_history(spec, {label: HADAMARD_PARAMS}).branches[(1,)]
        want = history_density_matrix(spec.without_event(label)).entries
        worst = max(worst, np.max(np.abs(branch.residual / branch.probability - want)))
    assert criterion(12, "Hadamard readout with beta=1 deletes the event", worst < 1e-10, f"max dev {worst:.2e}, tol 1e-10")


def test_13_cli_determinism_and_roundtrip(criterion, capsys, tmp_path):
    runs = [
        ["mms-demo", "--theta", "0.3", "--seed", "7"],
        ["collapse-sweep", "--theta-step", "0.25", "--n-max", "40"],
        ["nstar", "--theta-step", "0.1"],
        ["history-run", str(SPECS / "valid" / "three_events_partial.hist")],
    ]
    identical = True
    for argv in runs:
        outs = []
        for rep in range(2):
            target = tmp_path / f"out{rep}.csv"
            assert main(argv + ["-o", str(target)]) == 0
            outs.append(target.read_bytes())
        identical &= outs[0] == outs[1]
    capsys.readouterr()
    valid = sorted((SPECS / "valid").glob("*.hist"))
    invalid = sorted((SPECS / "invalid").glob("*.hist"))
    fixed = 0
    for path in valid:
        spec = parse_history_spec(path.read_text())
        text = serialize_history_spec(spec)
        fixed += parse_history_spec(text) == spec and serialize_history_spec(parse_history_spec(text)) == text
    ok = identical and fixed == len(valid) and len(valid) + len(invalid) >= 10
    assert criterion(13, "CLI output byte-identical, parser round-trip fixed point", ok,
                     f"{len(runs)} subcommands identical={identical}; {fixed}/{len(valid)} valid files fixed, "
                     f"{len(invalid)} error files")
