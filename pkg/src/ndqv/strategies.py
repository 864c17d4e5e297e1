"""Verification strategies: weighted projective settings and their spectral gaps.

A strategy is a convex mixture of projective pass tests that all accept the
target state with certainty. Its detection power on a copy-by-copy source is
governed by the gap between the top two eigenvalues of the mixed operator.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import linalg, states
from .states import StabilizerGroupSpec, TargetState

ATOL_FIX = 1e-9       # settings must fix the target this tightly
ATOL_WEIGHTS = 1e-12  # weight normalization

_GROUP_MAX_QUBITS = 6  # full group enumeration is 2^n settings


@dataclass(frozen=True)
class Setting:
    """One projective pass test with its sampling weight."""

    label: str
    weight: float
    projector: np.ndarray


@dataclass
class Strategy:
    """Weighted collection of projective settings verifying one target."""

    label: str
    target: TargetState
    settings: list[Setting]
    theta: float | None = None
    analytic_nu: float | None = None

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if not self.settings:
            raise ValueError("a strategy needs at least one setting")
        total = 0.0
        psi = self.target.vector
        for s in self.settings:
            if s.weight <= 0:
                raise ValueError(f"setting {s.label!r} has non-positive weight")
            total += s.weight
            p = linalg.as_matrix(s.projector)
            if p.shape[0] != self.target.dim:
                raise ValueError(f"setting {s.label!r} dimension mismatch")
            if not linalg.is_projector(p):
                raise ValueError(f"setting {s.label!r} is not a projector")
            if linalg.max_abs(p @ psi - psi) > ATOL_FIX:
                raise ValueError(f"setting {s.label!r} does not fix the target")
        if abs(total - 1.0) > ATOL_WEIGHTS:
            raise ValueError(f"weights sum to {total!r}, expected 1")

    def mixed_operator(self) -> np.ndarray:
        """The weighted strategy operator sum_i mu_i Omega_i."""
        out = np.zeros((self.target.dim, self.target.dim), dtype=complex)
        for s in self.settings:
            out += s.weight * s.projector
        return out


@dataclass(frozen=True)
class GapReport:
    """Spectral gap of a strategy operator.

    nu = 1 - lambda2, and witness is a unit vector orthogonal to the target
    achieving the second eigenvalue (the direction detected most slowly).
    """

    nu: float
    lambda2: float
    witness: np.ndarray


def spectral_gap(strategy: Strategy) -> GapReport:
    """Gap between the top two eigenvalues of the strategy operator.

    The target must be the unique fixed point direction contributing the top
    eigenvalue 1; the second eigenvalue is extracted after deflating the
    target component.
    """
    omega = strategy.mixed_operator()
    psi = strategy.target.vector
    if linalg.max_abs(omega @ psi - psi) > ATOL_FIX:
        raise ValueError("target is not a fixed point of the strategy operator")
    deflated = omega - linalg.projector_onto(psi)
    eig = linalg.hermitian_eigs(deflated)
    lambda2 = float(min(max(eig.values[0], 0.0), 1.0))
    witness = _orthogonal_witness(eig.vectors[:, 0], strategy.target)
    return GapReport(nu=1.0 - lambda2, lambda2=lambda2, witness=witness)


def _orthogonal_witness(candidate: np.ndarray, target: TargetState) -> np.ndarray:
    """Unit witness orthogonal to the target, phase-fixed for determinism.

    When the deflated operator is numerically zero (gap 1) its top eigenvector
    is arbitrary and may align with the target; any orthogonal direction is
    equally slow then, so fall back to the first basis complement.
    """
    psi = target.vector
    resid = candidate - psi * np.vdot(psi, candidate)
    if np.linalg.norm(resid) < 1e-8:
        return states.first_orthogonal_complement(target)
    return states.canonical_phase(states.normalize(resid))


def sample_complexity(nu: float, epsilon: float, delta: float) -> tuple[int, int]:
    """Copies needed to certify infidelity below epsilon with confidence delta.

    Returns (exact, approximate): the exact count inverts the failure bound
    (1 - nu*epsilon)^N <= delta, the approximate count is the familiar
    1/(nu*epsilon) * ln(1/delta) ceiling. delta = 1 needs no copies.
    """
    if not 0.0 < nu <= 1.0:
        raise ValueError(f"nu must lie in (0, 1], got {nu}")
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    if not 0.0 < delta <= 1.0:
        raise ValueError(f"delta must lie in (0, 1], got {delta}")
    if delta == 1.0:
        return 0, 0
    log_inv_delta = -math.log(delta)
    x = nu * epsilon
    exact = math.ceil(log_inv_delta / -math.log1p(-x))
    approx = math.ceil(log_inv_delta / x)
    return exact, approx


# ---------------------------------------------------------------------------
# catalog builders
# ---------------------------------------------------------------------------


def _pz_pair() -> np.ndarray:
    """Projector onto span{|00>, |11>}, the even-parity Z subspace."""
    return (linalg.identity(4) + states.pauli_operator("+ZZ")) / 2.0


def bell_minimal() -> Strategy:
    """Two-setting Bell verification: even parity in Z and in X, weight 1/2 each."""
    target = states.bell_state()
    half = float(Fraction(1, 2))
    eye = linalg.identity(4)
    settings = [
        Setting("+ZZ", half, _pz_pair()),
        Setting("+XX", half, (eye + states.pauli_operator("+XX")) / 2.0),
    ]
    return Strategy(
        label="bell_minimal",
        target=target,
        settings=settings,
        analytic_nu=0.5,
    )


def bell_stabilizer_group() -> Strategy:
    """Bell verification over the full stabilizer group, weight 1/3 each."""
    strat = stabilizer_full_group(StabilizerGroupSpec(("+ZZ", "+XX")))
    strat.label = "bell_group"
    return strat


def _plus() -> np.ndarray:
    return np.array([1.0, 1.0], dtype=complex) / math.sqrt(2.0)


def _minus() -> np.ndarray:
    return np.array([1.0, -1.0], dtype=complex) / math.sqrt(2.0)


def two_qubit_three(theta: float) -> Strategy:
    """Three-setting strategy for sin|00> + cos|11>, gap 1/3 at every theta."""
    target = states.two_qubit_pure(theta)
    c, s = math.cos(theta), math.sin(theta)
    eye = linalg.identity(4)
    phi_p = np.array([c, -s], dtype=complex)
    phi_m = np.array([c, s], dtype=complex)
    omega2 = eye - np.kron(linalg.projector_onto(_plus()), linalg.projector_onto(phi_p))
    omega3 = eye - np.kron(linalg.projector_onto(_minus()), linalg.projector_onto(phi_m))
    third = float(Fraction(1, 3))
    settings = [
        Setting("parity", third, _pz_pair()),
        Setting("reject_plus", third, omega2),
        Setting("reject_minus", third, omega3),
    ]
    return Strategy(
        label="two_qubit_three",
        target=target,
        settings=settings,
        theta=theta,
        analytic_nu=1.0 / 3.0,
    )


def two_qubit_four(theta: float) -> Strategy:
    """Weighted four-setting strategy with gap 1/(2 + sin cos)."""
    target = states.two_qubit_pure(theta)
    eye = linalg.identity(4)
    a = 1.0 / math.sqrt(1.0 + math.tan(theta))
    b = 1.0 / math.sqrt(1.0 + 1.0 / math.tan(theta))

    def local(phase_first: complex, phase_second: complex) -> np.ndarray:
        v1 = np.array([a, phase_first * b], dtype=complex)
        v2 = np.array([a, phase_second * b], dtype=complex)
        return np.kron(v1, v2)

    w = cmath.exp(1j * math.pi / 3.0)
    rejected = [
        local(w**2, w),
        local(w**4, w**5),
        local(1.0, -1.0),
    ]
    alpha = (2.0 - math.sin(2.0 * theta)) / (4.0 + math.sin(2.0 * theta))
    rest = (1.0 - alpha) / 3.0
    settings = [Setting("parity", alpha, _pz_pair())]
    for k, vec in enumerate(rejected, start=1):
        settings.append(
            Setting(f"reject_{k}", rest, eye - linalg.projector_onto(vec))
        )
    return Strategy(
        label="two_qubit_four",
        target=target,
        settings=settings,
        theta=theta,
        analytic_nu=1.0 / (2.0 + math.sin(theta) * math.cos(theta)),
    )


def _branch_projector(theta: float, power: int) -> np.ndarray:
    """Rank-2 projector sum of |phi_k><phi_k| for k in {power, power + 2}.

    phi_k = g^k phi_0 with g = diag(1, i) (x) diag(1, -i) and
    phi_0 = |+> (x) (sin|0> + cos|1>).
    """
    s, c = math.sin(theta), math.cos(theta)
    phi0 = np.kron(_plus(), np.array([s, c], dtype=complex))
    g = np.kron(np.diag([1.0, 1j]), np.diag([1.0, -1j]))
    vec = np.linalg.matrix_power(g, power) @ phi0
    vec2 = np.linalg.matrix_power(g, power + 2) @ phi0
    return linalg.projector_onto(vec) + linalg.projector_onto(vec2)


def adaptive_x_projector(theta: float) -> np.ndarray:
    """Projector measured by the adaptive branch circuit: X-basis paired checks."""
    return _branch_projector(theta, 0)


def adaptive_y_projector(theta: float) -> np.ndarray:
    """Companion projector, the X check conjugated by the local phase gates."""
    return _branch_projector(theta, 1)


def adaptive_two(theta: float) -> Strategy:
    """Two-setting adaptive strategy: parity check plus the branch projector."""
    target = states.two_qubit_pure(theta)
    half = float(Fraction(1, 2))
    settings = [
        Setting("parity", half, _pz_pair()),
        Setting("adaptive_x", half, adaptive_x_projector(theta)),
    ]
    return Strategy(
        label="adaptive_two",
        target=target,
        settings=settings,
        theta=theta,
        analytic_nu=0.5,
    )


def adaptive_three(theta: float) -> Strategy:
    """Three-setting adaptive strategy with gap 1/(1 + cos^2)."""
    target = states.two_qubit_pure(theta)
    c2 = math.cos(theta) ** 2
    norm = 1.0 + c2
    settings = [
        Setting("parity", c2 / norm, _pz_pair()),
        Setting("adaptive_x", 0.5 / norm, adaptive_x_projector(theta)),
        Setting("adaptive_y", 0.5 / norm, adaptive_y_projector(theta)),
    ]
    return Strategy(
        label="adaptive_three",
        target=target,
        settings=settings,
        theta=theta,
        analytic_nu=1.0 / norm,
    )


def stabilizer_generators(spec: StabilizerGroupSpec) -> Strategy:
    """Uniform strategy over the generator checks, gap 1/n."""
    target = states.stabilizer_state(spec)
    n = len(spec.generators)
    w = float(Fraction(1, n))
    settings = [
        Setting(g, w, p)
        for g, p in zip(spec.generators, states.stabilizer_projectors(spec))
    ]
    return Strategy(
        label="stabilizer_generators",
        target=target,
        settings=settings,
        analytic_nu=1.0 / n,
    )


def stabilizer_full_group(spec: StabilizerGroupSpec) -> Strategy:
    """Uniform strategy over every non-identity group element.

    Gap 2^(n-1)/(2^n - 1). Enumeration is exponential, so the group form is
    limited to 6 qubits.
    """
    n = spec.n_qubits
    if n > _GROUP_MAX_QUBITS:
        raise ValueError(
            f"full group strategies support up to {_GROUP_MAX_QUBITS} qubits, got {n}"
        )
    target = states.stabilizer_state(spec)
    members = spec.elements()[1:]  # identity dropped
    w = float(Fraction(1, len(members)))
    eye = linalg.identity(target.dim)
    settings = [
        Setting(word, w, (eye + states.pauli_operator(word)) / 2.0)
        for word in members
    ]
    return Strategy(
        label="stabilizer_group",
        target=target,
        settings=settings,
        analytic_nu=2.0 ** (n - 1) / (2.0**n - 1.0),
    )


def ghz_generator_spec(n: int) -> StabilizerGroupSpec:
    """Standard GHZ generators: the all-X word plus Z-parity pairs."""
    if not 2 <= n <= 10:
        raise ValueError(f"ghz supports 2..10 qubits, got {n}")
    gens = ["+" + "X" * n]
    for k in range(1, n):
        body = ["I"] * n
        body[0] = "Z"
        body[k] = "Z"
        gens.append("+" + "".join(body))
    return StabilizerGroupSpec(tuple(gens))


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def _matrix_pairs(m: np.ndarray) -> list[list[float]]:
    """Row-major [re, im] pairs, the portable matrix encoding."""
    flat = np.asarray(m, dtype=complex).reshape(-1)
    return [[float(z.real), float(z.imag)] for z in flat]


def _pairs_matrix(pairs: list[list[float]], dim: int) -> np.ndarray:
    if len(pairs) != dim * dim:
        raise ValueError(f"expected {dim * dim} entries, got {len(pairs)}")
    flat = np.array([complex(re, im) for re, im in pairs], dtype=complex)
    return flat.reshape(dim, dim)


def _vector_pairs(v: np.ndarray) -> list[list[float]]:
    return [[float(z.real), float(z.imag)] for z in np.asarray(v, dtype=complex)]


def _pairs_vector(pairs: list[list[float]]) -> np.ndarray:
    return np.array([complex(re, im) for re, im in pairs], dtype=complex)


def strategy_to_dict(strategy: Strategy) -> dict:
    """JSON-ready dict; floats survive a round trip bit for bit."""
    return {
        "schema": 1,
        "kind": "strategy",
        "label": strategy.label,
        "target_label": strategy.target.label,
        "n_qubits": strategy.target.n_qubits,
        "theta": strategy.theta,
        "analytic_nu": strategy.analytic_nu,
        "target_amplitudes": _vector_pairs(strategy.target.vector),
        "settings": [
            {
                "label": s.label,
                "mu": float(s.weight),
                "matrix": _matrix_pairs(s.projector),
            }
            for s in strategy.settings
        ],
    }


def strategy_from_dict(data: dict) -> Strategy:
    if data.get("kind") != "strategy":
        raise ValueError("not a strategy document")
    n = int(data["n_qubits"])
    dim = 2**n
    target = TargetState(
        label=data["target_label"],
        n_qubits=n,
        vector=_pairs_vector(data["target_amplitudes"]),
    )
    settings = [
        Setting(
            label=s.get("label", f"setting_{i}"),
            weight=float(s["mu"]),
            projector=_pairs_matrix(s["matrix"], dim),
        )
        for i, s in enumerate(data["settings"])
    ]
    return Strategy(
        label=data.get("label", "strategy"),
        target=target,
        settings=settings,
        theta=data.get("theta"),
        analytic_nu=data.get("analytic_nu"),
    )
