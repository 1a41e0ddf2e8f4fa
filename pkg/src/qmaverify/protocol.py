"""The measurement-only verifier built on MBQC, and its completeness/soundness numbers.

With probability ``q`` the verifier runs the compiled circuit on the received
state; otherwise it runs the stabilizer test. The closed forms below give the
honest acceptance ``alpha``, the two cheating bounds ``beta1``/``beta2``, the
balancing ``q*`` and the resulting gap.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from qmaverify import graphstate as gs
from qmaverify.mbqc import MeasurementPattern, circuit_accept_operator, execute_pattern, sample_accept_count
from qmaverify.quantumstate import QuantumState

MAX_OPERATOR_QUBITS = 10


class ProtocolError(ValueError):
    """Raised for invalid parameters or degenerate gap configurations."""


@dataclass(frozen=True)
class ProtocolParams:
    q: float = 0.5
    epsilon: float = 0.1
    a: float = 2 / 3
    b: float = 1 / 3
    x_size: int | None = None

    def __post_init__(self) -> None:
        if not 0 <= self.q <= 1:
            raise ProtocolError(f"q={self.q} outside [0, 1]")
        if not 0 < self.epsilon < 1:
            raise ProtocolError(f"epsilon={self.epsilon} outside (0, 1)")
        if not 0 <= self.b < self.a <= 1:
            raise ProtocolError(f"need 0 <= b < a <= 1, got a={self.a}, b={self.b}")

    def with_q(self, q: float) -> ProtocolParams:
        return replace(self, q=q)


def standard_params(x_size: int, a: float = 2 / 3, b: float = 1 / 3) -> ProtocolParams:
    """a=2/3, b=1/3, eps = 1/(2|x|^2) and the balancing q."""
    eps = 1.0 / (2 * x_size**2)
    base = ProtocolParams(q=0.0, epsilon=eps, a=a, b=b, x_size=x_size)
    return base.with_q(optimal_q(base))


def alpha(p: ProtocolParams) -> float:
    return p.q * p.a + (1 - p.q)


def beta1(p: ProtocolParams) -> float:
    return p.q * (p.b + np.sqrt(2 * p.epsilon)) + (1 - p.q)


def beta2(p: ProtocolParams) -> float:
    return p.q + (1 - p.q) * (1 - p.epsilon)


def delta1(p: ProtocolParams) -> float:
    return p.q * p.a - p.q * (p.b + np.sqrt(2 * p.epsilon))


def delta2(p: ProtocolParams) -> float:
    return p.q * p.a - p.q + p.epsilon * (1 - p.q)


def soundness_bound(p: ProtocolParams) -> float:
    """Upper bound on any cheating acceptance at this q and epsilon."""
    return max(beta1(p), beta2(p))


def optimal_q(p: ProtocolParams) -> float:
    denom = 1 + p.epsilon - p.b - np.sqrt(2 * p.epsilon)
    if denom <= 0:
        raise ProtocolError(f"degenerate q*: b + sqrt(2 eps) >= 1 + eps (denominator {denom})")
    return p.epsilon / denom


def protocol_gap(p: ProtocolParams) -> float:
    """Completeness-soundness gap at the balancing q."""
    root = np.sqrt(2 * p.epsilon)
    if p.a - p.b - root <= 0:
        raise ProtocolError(f"a - b - sqrt(2 eps) = {p.a - p.b - root} is not positive")
    return p.epsilon * (p.a - p.b - root) / (1 + p.epsilon - p.b - root)


def gap_lower_bound(x_size: int) -> float:
    return 1.0 / (48 * x_size**2)


# ---------------------------------------------------------------- verifier


def arthur_verify(
    pattern: MeasurementPattern, params: ProtocolParams, state: QuantumState, rng: np.random.Generator
) -> bool:
    """One round: computation branch with probability q, else the stabilizer test."""
    if rng.random() < params.q:
        accept, _ = execute_pattern(pattern, state, rng)
        return accept
    return gs.run_stabilizer_test(pattern.graph, state, rng).passed


def sample_verify_count(
    pattern: MeasurementPattern, params: ProtocolParams, state: QuantumState, shots: int, rng
) -> int:
    n_comp = int(rng.binomial(shots, params.q))
    accepted = sample_accept_count(pattern, state, n_comp, rng) if n_comp else 0
    accepted += gs.sample_pass_count(pattern.graph, state, shots - n_comp, rng)
    return accepted


def acceptance_operator(pattern: MeasurementPattern, q: float) -> np.ndarray:
    """A with p_acc(rho) = Tr(A rho): q * circuit-accept + (1 - q) * stabilizer-pass."""
    n = pattern.graph.n_total
    if n > MAX_OPERATOR_QUBITS:
        raise ProtocolError(f"dense acceptance operator capped at {MAX_OPERATOR_QUBITS} qubits, got {n}")
    a = q * circuit_accept_operator(pattern) + (1 - q) * gs.pass_operator(pattern.graph)
    return (a + a.conj().T) / 2


def exact_acceptance(op: np.ndarray, state: QuantumState) -> float:
    if state.is_pure:
        return float(np.vdot(state.data, op @ state.data).real)
    return float(np.trace(op @ state.data).real)


def optimal_cheat(op: np.ndarray) -> tuple[float, QuantumState]:
    """Top eigenpair: no prover state is accepted with probability above lambda_max."""
    w, v = np.linalg.eigh(op)
    vec = v[:, -1]
    n = int(np.log2(len(vec)))
    return float(w[-1]), QuantumState._unchecked(n, vec / np.linalg.norm(vec))
