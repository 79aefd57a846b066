"""Gradual collapse under N repeated weak measurements.

Every round premeasures the System onto a fresh A-qubit, reads it out with
the same rotation ``R(theta, phi)`` and discards a fresh X-qubit.  Only the
number ``l`` of ``r = 1`` outcomes matters for the aggregate Kraus operator,
so the outcome distribution over ``l`` is a mixture of two binomials,

    p_l = c1_sq * B_l(q^2, N) + c0_sq * B_l(1 - q^2, N),    q = cos(theta).

Binomial weights are accumulated in log space (``gammaln``) so N up to
1e4 is safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.special import gammaln

from .errors import DegenerateInputError, InsufficientDataError, ValidationError
from .gates import RotationParams, standard_gate
from .mms import P0, P1, readout_gate
from .qstate import A, S, X, StateVector, apply_unitary, check_size, shannon_entropy, tensor

FIT_WINDOW = (0.01, 0.99)
ORACLE_MAX_QUBITS = 21
LN2 = math.log(2.0)


@dataclass(frozen=True)
class CurvePoint:
    N: int
    S_total: float
    S_binom: float
    fraction: float


@dataclass(frozen=True)
class CollapseCurve:
    theta: float
    q_squared: float
    c0_sq: float
    c1_sq: float
    s0: float
    points: tuple[CurvePoint, ...] = field(default_factory=tuple)

    @property
    def N(self) -> np.ndarray:
        return np.array([p.N for p in self.points])

    @property
    def fractions(self) -> np.ndarray:
        return np.array([p.fraction for p in self.points])


@dataclass(frozen=True)
class NStarEstimate:
    theta: float
    n_star_fit: float
    n_star_asymptotic: float
    fit_points_used: int

    @property
    def rel_err(self) -> float:
        return abs(self.n_star_fit - self.n_star_asymptotic) / self.n_star_asymptotic


def total_kraus(l: int, N: int, p: RotationParams) -> np.ndarray:
    """Aggregate Kraus operator for any outcome string with ``l`` ones out of ``N``."""
    if N < 0 or not 0 <= l <= N:
        raise ValueError(f"need 0 <= l <= N, got l={l}, N={N}")
    c, s = math.cos(p.theta), math.sin(p.theta)
    e = complex(math.cos(p.phi), math.sin(p.phi))
    # python's 0**0 == 1 keeps the projective limit exact
    return P1 * (c**l * (-e * s) ** (N - l)) + P0 * (c ** (N - l) * (s / e) ** l)


def log_binom_pmf(N: int, q_sq: float) -> np.ndarray:
    """Natural-log binomial pmf over ``l = 0..N``; ``-inf`` where the weight is zero."""
    if not 0.0 <= q_sq <= 1.0:
        raise ValidationError(f"binomial parameter {q_sq!r} outside [0, 1]")
    l = np.arange(N + 1)
    out = gammaln(N + 1) - gammaln(l + 1) - gammaln(N - l + 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        lq = l * np.log(q_sq) if q_sq > 0 else np.where(l == 0, 0.0, -np.inf)
        lr = (N - l) * np.log1p(-q_sq) if q_sq < 1 else np.where(l == N, 0.0, -np.inf)
    return out + lq + lr


def binomial_pmf(N: int, q_sq: float) -> np.ndarray:
    return np.exp(log_binom_pmf(N, q_sq))


def _entropy_bits(p: np.ndarray) -> float:
    nz = p[p > 0]
    return float(-np.sum(nz * np.log2(nz)))


def _check_probs(c0_sq: float, c1_sq: float) -> None:
    if c0_sq < 0 or c1_sq < 0 or abs(c0_sq + c1_sq - 1.0) > 1e-10:
        raise ValidationError(f"initial probabilities ({c0_sq}, {c1_sq}) are not a distribution")


def outcome_distribution(c0_sq: float, c1_sq: float, theta: float, N: int) -> np.ndarray:
    """``p_l`` for ``l = 0..N`` ones among ``N`` weak measurements."""
    _check_probs(c0_sq, c1_sq)
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    q_sq = math.cos(theta) ** 2
    b1 = binomial_pmf(N, q_sq)
    return c1_sq * b1 + c0_sq * b1[::-1]


def binomial_entropy(q_sq: float, N: int) -> float:
    """Entropy (bits) of ``Binomial(N, q_sq)``."""
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    logp = log_binom_pmf(N, q_sq)
    finite = np.isfinite(logp)
    p = np.exp(logp[finite])
    return float(-np.sum(p * logp[finite]) / LN2)


def extraction_curve(
    c0_sq: float,
    c1_sq: float,
    theta: float,
    N_max: int,
    N_values: Iterable[int] | None = None,
) -> CollapseCurve:
    """Information extracted after ``N = 1..N_max`` measurements (or ``N_values``)."""
    _check_probs(c0_sq, c1_sq)
    s0 = shannon_entropy([c0_sq, c1_sq])
    if s0 <= 1e-9:
        raise DegenerateInputError("initial state is a basis state: nothing to extract")
    q_sq = math.cos(theta) ** 2
    Ns = range(1, N_max + 1) if N_values is None else sorted(set(int(n) for n in N_values))
    points = []
    for N in Ns:
        p = outcome_distribution(c0_sq, c1_sq, theta, N)
        s_total = _entropy_bits(p)
        s_b = binomial_entropy(q_sq, N)
        points.append(CurvePoint(N, s_total, s_b, (s_total - s_b) / s0))
    return CollapseCurve(theta, q_sq, c0_sq, c1_sq, s0, tuple(points))


def asymptotic_nstar(theta: float) -> float:
    """``ln2 / (2 (theta - pi/4)^2)``; infinite at ``pi/4``."""
    x = theta - math.pi / 4
    return math.inf if x == 0 else LN2 / (2 * x * x)


def fit_nstar(N: Sequence[float], fraction: Sequence[float], window=FIT_WINDOW, min_points: int = 10) -> tuple[float, int]:
    """Least-squares slope of ``ln(1 - f)`` against ``N`` through the origin.

    Returns ``(N*, points used)``; only points with ``f`` strictly inside
    ``window`` take part.
    """
    N = np.asarray(N, dtype=float)
    f = np.asarray(fraction, dtype=float)
    mask = (f > window[0]) & (f < window[1])
    used = int(mask.sum())
    if used < min_points:
        raise InsufficientDataError(
            f"only {used} points with fraction in {window}; need {min_points}"
        )
    x, y = N[mask], np.log1p(-f[mask])
    slope = float(np.dot(x, y) / np.dot(x, x))
    if slope >= 0:
        raise InsufficientDataError("extraction does not grow with N")
    return -1.0 / slope, used


def estimate_nstar(curve: CollapseCurve, min_points: int = 10) -> NStarEstimate:
    """Fit ``f(N) = 1 - exp(-N/N*)`` to a curve and compare with the asymptotic law."""
    n_fit, used = fit_nstar(curve.N, curve.fractions, min_points=min_points)
    return NStarEstimate(curve.theta, n_fit, asymptotic_nstar(curve.theta), used)


def default_theta_grid(step: float = 0.02, margin: float = 0.02, exclude: float = 0.05) -> np.ndarray:
    """Sweep grid from ``margin`` to ``pi/2 - margin``, minus ``|theta - pi/4| < exclude``."""
    n = int(math.floor((math.pi / 2 - 2 * margin) / step + 1e-9)) + 1
    grid = margin + step * np.arange(n)
    return grid[np.abs(grid - math.pi / 4) >= exclude]


def nstar_curve_length(theta: float, factor: float = 10.0, minimum: int = 20) -> int:
    """Default ``N_max`` for a sweep point: ``factor`` times the asymptotic ``N*``."""
    n_star = asymptotic_nstar(theta)
    if math.isinf(n_star):
        raise DegenerateInputError("theta = pi/4 extracts nothing; N* is infinite")
    return max(minimum, int(math.ceil(factor * n_star)))


def nstar_sweep(
    thetas: Iterable[float],
    c0_sq: float = 0.5,
    factor: float = 10.0,
    min_points: int = 3,
) -> list[NStarEstimate | None]:
    """Fitted vs asymptotic ``N*`` over a theta grid, in input order.

    ``None`` marks a theta whose curve saturates too fast to fit.
    """
    out = []
    for theta in thetas:
        curve = extraction_curve(c0_sq, 1.0 - c0_sq, theta, nstar_curve_length(theta, factor))
        try:
            out.append(estimate_nstar(curve, min_points=min_points))
        except InsufficientDataError:
            out.append(None)
    return out


def small_x_extraction(x: float, N: int) -> float:
    """Leading small-``x`` information gain ``2 x^2 N / ln 2`` (bits, equal-weight state)."""
    return 2.0 * x * x * N / LN2


def explicit_collapse_oracle(
    c0: complex,
    c1: complex,
    theta: float,
    phi: float,
    N: int,
    max_qubits: int = ORACLE_MAX_QUBITS,
) -> np.ndarray:
    """Brute-force ``p_l`` from the full S + N(A, X) circuit.

    Each round: CNOT(S, A_i), readout rotation on A_i, CNOT(A_i, X_i).  The
    joint A-string probabilities are read off the final state vector and
    grouped by the number of ones.
    """
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    n_qubits = 1 + 2 * N
    check_size(n_qubits, max_qubits)
    p = RotationParams(theta, phi)
    cnot = standard_gate("cnot")
    g = readout_gate(p)
    state = StateVector.from_amplitudes([S(0)], [c0, c1])
    for i in range(N):
        fresh = StateVector.zero([A(i), X(i)])
        state = tensor(state, fresh, max_qubits=max_qubits)
        state = apply_unitary(state, cnot, [S(0), A(i)])
        state = apply_unitary(state, g, [A(i)])
        state = apply_unitary(state, cnot, [A(i), X(i)])
    # register: S0, A0..A_{N-1}, X0..X_{N-1}
    probs = (np.abs(state.amplitudes) ** 2).reshape(2, 1 << N, 1 << N).sum(axis=(0, 2))
    ones = np.array([bin(k).count("1") for k in range(1 << N)])
    return np.bincount(ones, weights=probs, minlength=N + 1)
