"""Dense pure-state / density-matrix simulator for up to 12 qubits.

States are immutable values: every operation returns a new ``QuantumState``.
Qubit 0 is the most significant tensor factor.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from qmaverify import pauli
from qmaverify.pauli import PauliString

MAX_QUBITS = 12
STATE_TOL = 1e-10
EIG_CLAMP = 1e-12


class StateError(ValueError):
    """Raised for invalid states, indices or gates."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class QuantumState:
    n: int
    data: np.ndarray
    kind: Literal["pure", "mixed"] = "pure"

    def __post_init__(self) -> None:
        if not 0 <= self.n <= MAX_QUBITS:
            raise StateError(f"qubit count {self.n} outside 0..{MAX_QUBITS}")
        dim = 1 << self.n
        data = _frozen(self.data)
        if self.kind == "pure":
            if data.shape != (dim,):
                raise StateError(f"pure state needs shape ({dim},), got {data.shape}")
            if abs(np.vdot(data, data).real - 1) > STATE_TOL:
                raise StateError("pure state is not normalized")
        elif self.kind == "mixed":
            if data.shape != (dim, dim):
                raise StateError(f"density matrix needs shape ({dim}, {dim}), got {data.shape}")
            if np.max(np.abs(data - data.conj().T)) > STATE_TOL:
                raise StateError("density matrix is not Hermitian")
            if abs(np.trace(data).real - 1) > STATE_TOL:
                raise StateError("density matrix does not have unit trace")
            if np.linalg.eigvalsh(data)[0] < -STATE_TOL:
                raise StateError("density matrix is not positive semidefinite")
        else:
            raise StateError(f"unknown state kind {self.kind!r}")
        object.__setattr__(self, "data", data)

    @classmethod
    def _unchecked(cls, n: int, data: np.ndarray, kind: str = "pure") -> QuantumState:
        # internal results of norm-preserving operations skip re-validation
        obj = object.__new__(cls)
        object.__setattr__(obj, "n", n)
        object.__setattr__(obj, "data", _frozen(data))
        object.__setattr__(obj, "kind", kind)
        return obj

    @property
    def dim(self) -> int:
        return 1 << self.n

    @property
    def is_pure(self) -> bool:
        return self.kind == "pure"

    def density_matrix(self) -> np.ndarray:
        if self.is_pure:
            return np.outer(self.data, self.data.conj())
        return np.array(self.data)

    def to_mixed(self) -> QuantumState:
        if not self.is_pure:
            return self
        return QuantumState._unchecked(self.n, self.density_matrix(), "mixed")

    def to_json(self) -> dict:
        flat = self.data.reshape(-1) if self.is_pure else self.data
        if self.is_pure:
            payload = [[float(c.real), float(c.imag)] for c in flat]
        else:
            payload = [[[float(c.real), float(c.imag)] for c in row] for row in flat]
        return {"n": self.n, "kind": self.kind, "data": payload}

    @classmethod
    def from_json(cls, obj: dict) -> QuantumState:
        try:
            n = int(obj["n"])
            kind = obj.get("kind", "pure")
            raw = np.asarray(obj["data"], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise StateError(f"malformed state object: {exc}") from exc
        if raw.shape[-1] != 2:
            raise StateError("state entries must be [re, im] pairs")
        return cls(n, raw[..., 0] + 1j * raw[..., 1], kind)


def _normalized_pure(n: int, vec: np.ndarray) -> QuantumState:
    return QuantumState._unchecked(n, vec / np.linalg.norm(vec), "pure")


def _check_n(n: int) -> None:
    if not 0 <= n <= MAX_QUBITS:
        raise StateError(f"qubit count {n} outside 0..{MAX_QUBITS}")


def plus_state(n: int) -> QuantumState:
    _check_n(n)
    return QuantumState._unchecked(n, np.full(1 << n, 2 ** (-n / 2), dtype=complex))


def basis_state(bits: str) -> QuantumState:
    n = len(bits)
    _check_n(n)
    if set(bits) - {"0", "1"}:
        raise StateError(f"bitstring {bits!r} must contain only 0/1")
    vec = np.zeros(1 << n, dtype=complex)
    vec[int(bits, 2) if bits else 0] = 1
    return QuantumState._unchecked(n, vec)


def maximally_mixed(n: int) -> QuantumState:
    _check_n(n)
    return QuantumState._unchecked(n, np.eye(1 << n, dtype=complex) / (1 << n), "mixed")


def tensor(*states: QuantumState) -> QuantumState:
    """Tensor product; the first argument holds the lowest qubit indices."""
    n = sum(s.n for s in states)
    _check_n(n)
    if all(s.is_pure for s in states):
        vec = np.ones(1, dtype=complex)
        for s in states:
            vec = np.kron(vec, s.data)
        return QuantumState._unchecked(n, vec)
    rho = np.ones((1, 1), dtype=complex)
    for s in states:
        rho = np.kron(rho, s.density_matrix())
    return QuantumState._unchecked(n, rho, "mixed")


def mix(states, weights) -> QuantumState:
    states = list(states)
    weights = np.asarray(weights, dtype=float)
    if len(states) != len(weights) or not states:
        raise StateError("need one weight per state")
    if np.any(weights < 0) or abs(weights.sum() - 1) > STATE_TOL:
        raise StateError("mixture weights must be a probability vector")
    n = states[0].n
    if any(s.n != n for s in states):
        raise StateError("cannot mix states of different sizes")
    rho = sum(w * s.density_matrix() for w, s in zip(weights, states))
    return QuantumState._unchecked(n, rho, "mixed")


def _check_qubit(state: QuantumState, q: int) -> None:
    if not 0 <= q < state.n:
        raise StateError(f"qubit {q} out of range for {state.n}-qubit state")


def _check_unitary(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2):
        raise StateError(f"single-qubit gate must be 2x2, got {u.shape}")
    if np.max(np.abs(u @ u.conj().T - np.eye(2))) > STATE_TOL:
        raise StateError("gate is not unitary")
    return u


def _apply_to_axis(t: np.ndarray, u: np.ndarray, axis: int) -> np.ndarray:
    return np.moveaxis(np.tensordot(u, t, axes=([1], [axis])), 0, axis)


def apply_single_qubit_gate(state: QuantumState, qubit: int, u) -> QuantumState:
    _check_qubit(state, qubit)
    u = _check_unitary(u)
    n = state.n
    if state.is_pure:
        t = state.data.reshape((2,) * n)
        t = _apply_to_axis(t, u, qubit)
        return QuantumState._unchecked(n, t.reshape(-1))
    t = state.data.reshape((2,) * (2 * n))
    t = _apply_to_axis(t, u, qubit)
    t = _apply_to_axis(t, u.conj(), n + qubit)
    return QuantumState._unchecked(n, t.reshape(1 << n, 1 << n), "mixed")


def cz_diagonal(n: int, pairs) -> np.ndarray:
    """Diagonal of the product of CZ gates on ``pairs`` (entries +-1)."""
    idx = np.arange(1 << n, dtype=np.int64)
    parity = np.zeros(1 << n, dtype=np.int64)
    for a, b in pairs:
        parity ^= ((idx >> (n - 1 - a)) & 1) & ((idx >> (n - 1 - b)) & 1)
    return (1 - 2 * parity).astype(complex)


def apply_diagonal(state: QuantumState, diag: np.ndarray) -> QuantumState:
    if state.is_pure:
        return QuantumState._unchecked(state.n, diag * state.data)
    return QuantumState._unchecked(state.n, diag[:, None] * state.data * diag.conj()[None, :], "mixed")


def apply_cz(state: QuantumState, qubit_a: int, qubit_b: int) -> QuantumState:
    _check_qubit(state, qubit_a)
    _check_qubit(state, qubit_b)
    if qubit_a == qubit_b:
        raise StateError("CZ needs two distinct qubits")
    return apply_diagonal(state, cz_diagonal(state.n, [(qubit_a, qubit_b)]))


def apply_czs(state: QuantumState, pairs) -> QuantumState:
    pairs = list(pairs)
    for a, b in pairs:
        _check_qubit(state, a)
        _check_qubit(state, b)
        if a == b:
            raise StateError("CZ needs two distinct qubits")
    return apply_diagonal(state, cz_diagonal(state.n, pairs))


HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
# rows are <+b| for the +1/-1 eigenvectors, so R maps them onto |0>, |1>
_AXIS_ROTATION = {
    "Z": np.eye(2, dtype=complex),
    "X": HADAMARD,
    "Y": np.array([[1, -1j], [1, 1j]], dtype=complex) / np.sqrt(2),
}


@dataclass(frozen=True, eq=False)
class MeasurementBasis:
    """Observable with eigenvalues +-1, given by a Pauli axis or a 2x2 involution."""

    axis: str | None = None
    matrix: np.ndarray | None = None

    def __post_init__(self) -> None:
        if (self.axis is None) == (self.matrix is None):
            raise StateError("give exactly one of axis or matrix")
        if self.axis is not None:
            if self.axis not in _AXIS_ROTATION:
                raise StateError(f"unknown axis {self.axis!r}")
            object.__setattr__(self, "matrix", _frozen(pauli.LETTER_MATRIX[self.axis]))
        else:
            m = _frozen(self.matrix)
            if m.shape != (2, 2):
                raise StateError("basis matrix must be 2x2")
            if np.max(np.abs(m - m.conj().T)) > STATE_TOL:
                raise StateError("basis matrix must be Hermitian")
            if np.max(np.abs(m @ m - np.eye(2))) > STATE_TOL:
                raise StateError("basis matrix must square to identity")
            if abs(np.trace(m)) > STATE_TOL:
                raise StateError("basis matrix must have eigenvalues +1 and -1")
            object.__setattr__(self, "matrix", m)

    @classmethod
    def xy_plane(cls, angle: float) -> MeasurementBasis:
        """cos(angle) X + sin(angle) Y, whose +1 eigenvector is (|0> + e^{i angle}|1>)/sqrt 2."""
        return cls(matrix=np.cos(angle) * pauli.X2 + np.sin(angle) * pauli.Y2)

    def rotation(self) -> np.ndarray:
        """Unitary taking the +1 (-1) eigenvector of the observable to |0> (|1>)."""
        if self.axis is not None:
            return _AXIS_ROTATION[self.axis]
        w, v = np.linalg.eigh(self.matrix)
        # eigh sorts ascending: column 1 is the +1 eigenvector
        return np.stack([v[:, 1].conj(), v[:, 0].conj()])

    def projector(self, outcome: int) -> np.ndarray:
        return (np.eye(2) + outcome * self.matrix) / 2


Z_BASIS = MeasurementBasis("Z")


def _qubit_marginal_one(state: QuantumState, qubit: int) -> float:
    """Probability that ``qubit`` reads 1 in the computational basis."""
    n = state.n
    if state.is_pure:
        t = np.abs(state.data.reshape((2,) * n)) ** 2
    else:
        t = np.real(np.diagonal(state.data)).reshape((2,) * n)
    return float(np.clip(np.take(t, 1, axis=qubit).sum(), 0.0, 1.0))


def _project_z(state: QuantumState, qubit: int, bit: int) -> tuple[float, QuantumState | None]:
    n = state.n
    shift = n - 1 - qubit
    keep = ((np.arange(1 << n) >> shift) & 1) == bit
    if state.is_pure:
        vec = np.where(keep, state.data, 0)
        prob = float(np.vdot(vec, vec).real)
        if prob <= 0:
            return 0.0, None
        return prob, QuantumState._unchecked(n, vec / np.sqrt(prob))
    rho = state.data * np.outer(keep, keep)
    prob = float(np.trace(rho).real)
    if prob <= 0:
        return 0.0, None
    return prob, QuantumState._unchecked(n, rho / prob, "mixed")


def outcome_probability(state: QuantumState, qubit: int, basis: MeasurementBasis = Z_BASIS) -> float:
    """Born probability of outcome +1."""
    _check_qubit(state, qubit)
    rotated = apply_single_qubit_gate(state, qubit, basis.rotation())
    return 1.0 - _qubit_marginal_one(rotated, qubit)


def project(
    state: QuantumState, qubit: int, basis: MeasurementBasis, outcome: int
) -> tuple[float, QuantumState | None]:
    """Probability of ``outcome`` and the renormalized post-measurement state (None if impossible)."""
    _check_qubit(state, qubit)
    if outcome not in (1, -1):
        raise StateError(f"outcome must be +1 or -1, got {outcome}")
    r = basis.rotation()
    rotated = apply_single_qubit_gate(state, qubit, r)
    prob, post = _project_z(rotated, qubit, 0 if outcome == 1 else 1)
    if post is None:
        return 0.0, None
    return prob, apply_single_qubit_gate(post, qubit, r.conj().T)


def measure_single_qubit(
    state: QuantumState,
    qubit: int,
    basis: MeasurementBasis = Z_BASIS,
    rng: np.random.Generator | None = None,
    *,
    force: int | None = None,
) -> tuple[int, QuantumState]:
    """Born-rule measurement of one qubit; returns (outcome +-1, post-state).

    ``force`` selects a branch instead of sampling and raises if that branch
    has zero probability.
    """
    _check_qubit(state, qubit)
    r = basis.rotation()
    rotated = apply_single_qubit_gate(state, qubit, r)
    p_minus = _qubit_marginal_one(rotated, qubit)
    if force is None:
        if rng is None:
            raise StateError("a random generator is required unless force is given")
        outcome = -1 if rng.random() < p_minus else 1
    else:
        outcome = force
    _, post = _project_z(rotated, qubit, 0 if outcome == 1 else 1)
    if post is None:
        raise StateError(f"outcome {outcome} on qubit {qubit} has zero probability")
    return outcome, apply_single_qubit_gate(post, qubit, r.conj().T)


def rotate_all(state: QuantumState, rotations: dict[int, np.ndarray]) -> QuantumState:
    for q, r in rotations.items():
        state = apply_single_qubit_gate(state, q, r)
    return state


def computational_distribution(state: QuantumState) -> np.ndarray:
    """Probabilities of every computational-basis bitstring (index order)."""
    if state.is_pure:
        p = np.abs(state.data) ** 2
    else:
        p = np.clip(np.real(np.diagonal(state.data)), 0, None)
    return p / p.sum()


def expectation(state: QuantumState, p: PauliString) -> float:
    if p.n != state.n:
        raise StateError(f"size mismatch: {p.n}-qubit operator on {state.n}-qubit state")
    target, coeff = pauli.action(p)
    if state.is_pure:
        val = np.vdot(state.data[target], coeff * state.data)
    else:
        # Tr(P rho) = sum_c <target[c]| P |c> rho[c, target[c]]
        val = np.sum(coeff * state.data[np.arange(state.dim), target])
    return float(val.real)


def expectation_matrix(state: QuantumState, op: np.ndarray) -> float:
    op = np.asarray(op)
    if op.shape != (state.dim, state.dim):
        raise StateError("operator dimension does not match state")
    if state.is_pure:
        return float(np.vdot(state.data, op @ state.data).real)
    return float(np.trace(op @ state.data).real)


def partial_trace(state: QuantumState, keep) -> QuantumState:
    """Reduced state on ``keep``; kept qubits are renumbered in ascending order."""
    keep = sorted(set(keep))
    for q in keep:
        _check_qubit(state, q)
    n = state.n
    traced = [q for q in range(n) if q not in keep]
    if not traced:
        return state
    m = len(keep)
    if state.is_pure:
        t = state.data.reshape((2,) * n)
        t = np.transpose(t, keep + traced).reshape(1 << m, -1)
        rho = t @ t.conj().T
    else:
        t = state.data.reshape((2,) * (2 * n))
        t = np.transpose(t, keep + traced + [n + q for q in keep] + [n + q for q in traced])
        t = t.reshape(1 << m, 1 << (n - m), 1 << m, 1 << (n - m))
        rho = np.einsum("ajbj->ab", t)
    return QuantumState._unchecked(m, (rho + rho.conj().T) / 2, "mixed")


def _psd_sqrt(a: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh((a + a.conj().T) / 2)
    w = np.where(w < EIG_CLAMP, 0.0, w)
    return (v * np.sqrt(w)) @ v.conj().T


def _check_same_dim(a: QuantumState, b: QuantumState) -> None:
    if a.n != b.n:
        raise StateError(f"dimension mismatch: {a.n} vs {b.n} qubits")


def fidelity(a: QuantumState, b: QuantumState) -> float:
    """Root fidelity Tr sqrt(sqrt(a) b sqrt(a))."""
    _check_same_dim(a, b)
    if a.is_pure and b.is_pure:
        f = abs(np.vdot(a.data, b.data))
    elif a.is_pure:
        f = np.sqrt(max(expectation_matrix(b, np.outer(a.data, a.data.conj())), 0.0))
    elif b.is_pure:
        f = np.sqrt(max(expectation_matrix(a, np.outer(b.data, b.data.conj())), 0.0))
    else:
        s = _psd_sqrt(a.data)
        w = np.linalg.eigvalsh(s @ b.data @ s)
        f = np.sum(np.sqrt(np.clip(w, 0, None)))
    return float(np.clip(f, 0.0, 1.0))


def trace_distance(a: QuantumState, b: QuantumState) -> float:
    _check_same_dim(a, b)
    d = a.density_matrix() - b.density_matrix()
    w = np.linalg.eigvalsh((d + d.conj().T) / 2)
    return float(np.clip(0.5 * np.sum(np.abs(w)), 0.0, 1.0))


def random_state(
    n: int, purity: Literal["pure", "mixed"] = "pure", rng: np.random.Generator | None = None,
    rank: int | None = None,
) -> QuantumState:
    """Haar-random pure state, or a Ginibre-random density matrix of given rank."""
    _check_n(n)
    rng = np.random.default_rng() if rng is None else rng
    dim = 1 << n
    if purity == "pure":
        vec = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        return _normalized_pure(n, vec)
    if purity != "mixed":
        raise StateError(f"unknown purity {purity!r}")
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    rho = rho / np.trace(rho).real
    return QuantumState._unchecked(n, (rho + rho.conj().T) / 2, "mixed")
