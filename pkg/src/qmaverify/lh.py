"""Local Hamiltonian verification with single-qubit Pauli measurements.

A k-local Hamiltonian is expanded in Pauli strings and merged into
``H = sum_S d_S S``. Writing ``T = sum_S |d_S|``, the rescaled operator
``(H + T) / 2T = sum_S pi_S P_S`` with ``pi_S = |d_S| / T`` and
``P_S = (I + sign(d_S) S) / 2`` is a convex mixture of projectors. A round
draws ``S`` from ``pi``, measures the qubits of ``S`` one at a time and
accepts when the signed outcome product is ``-1`` (``r = 0``), so

    P(accept) = 1 - (<H> + T) / 2T = 1/2 - <H> / 2T.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Union

import numpy as np

from qmaverify import pauli
from qmaverify import quantumstate as qs
from qmaverify.graphstate import sample_product_outcomes
from qmaverify.pauli import PauliString, WeightedPauliTerm
from qmaverify.quantumstate import MeasurementBasis, QuantumState

MAX_MATRIX_LOCALITY = 6
MAX_DENSE_QUBITS = 10
DROP_TOL = 1e-12


class HamiltonianError(ValueError):
    """Raised for malformed Hamiltonians, ensembles or promises."""


@dataclass(frozen=True, eq=False)
class HamiltonianTerm:
    support: tuple[int, ...]
    matrix: np.ndarray | None = None
    paulis: tuple[tuple[str, float], ...] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "support", tuple(int(s) for s in self.support))
        if len(set(self.support)) != len(self.support):
            raise HamiltonianError(f"repeated qubit in support {self.support}")
        if (self.matrix is None) == (self.paulis is None):
            raise HamiltonianError("a term needs exactly one of matrix or paulis")
        if self.paulis is not None:
            terms = tuple((str(s), float(c)) for s, c in self.paulis)
            for s, c in terms:
                if len(s) != len(self.support) or set(s) - set("IXYZ"):
                    raise HamiltonianError(f"Pauli label {s!r} does not fit support {self.support}")
                if not np.isfinite(c):
                    raise HamiltonianError(f"non-finite coefficient for {s!r}")
            object.__setattr__(self, "paulis", terms)
        else:
            m = np.array(self.matrix, dtype=complex)
            k = len(self.support)
            if k > MAX_MATRIX_LOCALITY:
                raise HamiltonianError(f"matrix terms capped at locality {MAX_MATRIX_LOCALITY}, got {k}")
            if m.shape != (1 << k, 1 << k):
                raise HamiltonianError(f"matrix shape {m.shape} does not match support {self.support}")
            if np.max(np.abs(m - m.conj().T)) > pauli.HERMITIAN_TOL:
                raise HamiltonianError(f"term on {self.support} is not Hermitian")
            m.setflags(write=False)
            object.__setattr__(self, "matrix", m)

    def pauli_terms(self, n: int) -> list[WeightedPauliTerm]:
        if self.matrix is not None:
            return pauli.decompose(self.matrix, self.support, n)
        return [
            WeightedPauliTerm(pauli.embed(PauliString.from_label(s), self.support, n), c)
            for s, c in self.paulis
        ]

    def to_json(self) -> dict:
        if self.paulis is not None:
            return {"support": list(self.support), "pauli": [{"string": s, "coeff": c} for s, c in self.paulis]}
        return {
            "support": list(self.support),
            "matrix": [[[float(z.real), float(z.imag)] for z in row] for row in self.matrix],
        }


@dataclass(frozen=True)
class LocalHamiltonian:
    n: int
    terms: tuple[HamiltonianTerm, ...]
    k: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "terms", tuple(self.terms))
        locality = max((len(t.support) for t in self.terms), default=0)
        if self.k is None:
            object.__setattr__(self, "k", locality)
        elif locality > self.k:
            raise HamiltonianError(f"term of locality {locality} exceeds k={self.k}")
        for t in self.terms:
            if any(not 0 <= s < self.n for s in t.support):
                raise HamiltonianError(f"support {t.support} out of range for n={self.n}")

    def dense(self) -> np.ndarray:
        if self.n > MAX_DENSE_QUBITS:
            raise HamiltonianError(f"dense form capped at {MAX_DENSE_QUBITS} qubits")
        out = np.zeros((1 << self.n, 1 << self.n), dtype=complex)
        for t in self.terms:
            out += pauli.reconstruct(t.pauli_terms(self.n), self.n)
        return out

    def scaled(self, c: float) -> LocalHamiltonian:
        terms = []
        for t in self.terms:
            if t.matrix is not None:
                terms.append(HamiltonianTerm(t.support, matrix=c * t.matrix))
            else:
                terms.append(HamiltonianTerm(t.support, paulis=tuple((s, c * v) for s, v in t.paulis)))
        return LocalHamiltonian(self.n, tuple(terms), self.k)

    def to_json(self) -> dict:
        return {"n": self.n, "k": self.k, "terms": [t.to_json() for t in self.terms]}

    @classmethod
    def from_json(cls, obj: dict) -> LocalHamiltonian:
        if not isinstance(obj, dict) or "n" not in obj or "terms" not in obj:
            raise HamiltonianError("hamiltonian file needs fields 'n' and 'terms'")
        terms = []
        for i, raw in enumerate(obj["terms"]):
            try:
                support = tuple(raw["support"])
                if "pauli" in raw:
                    terms.append(HamiltonianTerm(
                        support, paulis=tuple((p["string"], p["coeff"]) for p in raw["pauli"])
                    ))
                elif "matrix" in raw:
                    arr = np.asarray(raw["matrix"], dtype=float)
                    terms.append(HamiltonianTerm(support, matrix=arr[..., 0] + 1j * arr[..., 1]))
                else:
                    raise HamiltonianError("term needs 'pauli' or 'matrix'")
            except (KeyError, TypeError, ValueError, IndexError) as exc:
                raise HamiltonianError(f"terms[{i}]: {exc}") from exc
        return cls(int(obj["n"]), tuple(terms), obj.get("k"))

    @classmethod
    def load(cls, path) -> LocalHamiltonian:
        with open(Path(path)) as fh:
            return cls.from_json(json.load(fh))


def from_pauli_sum(n: int, items) -> LocalHamiltonian:
    """Build from ``[(label, coeff), ...]`` with full-length labels such as ``"XZI"``."""
    terms = []
    for label, c in items:
        s = PauliString.from_label(label)
        if s.n != n:
            raise HamiltonianError(f"label {label!r} is not {n} qubits long")
        support = s.support or (0,)
        local = "".join(s.letter(q) for q in support)
        terms.append(HamiltonianTerm(support, paulis=((local, c),)))
    return LocalHamiltonian(n, tuple(terms))


# ---------------------------------------------------------------- builtins


def zz_toy() -> LocalHamiltonian:
    return from_pauli_sum(2, [("ZZ", 1.0)])


def x_plus_zz_toy() -> LocalHamiltonian:
    return from_pauli_sum(2, [("XI", 1.0), ("ZZ", 1.0)])


def tfim_chain(n: int, coupling: float = 1.0, field: float = 1.0, periodic: bool = False) -> LocalHamiltonian:
    """-J sum Z_i Z_{i+1} - h sum X_i."""
    items = []
    bonds = n if periodic and n > 2 else n - 1
    for i in range(bonds):
        j = (i + 1) % n
        items.append(HamiltonianTerm((i, j), paulis=(("ZZ", -coupling),)))
    for i in range(n):
        items.append(HamiltonianTerm((i,), paulis=(("X", -field),)))
    return LocalHamiltonian(n, tuple(items))


def heisenberg_chain(n: int, coupling: float = 1.0, periodic: bool = False) -> LocalHamiltonian:
    """J sum (XX + YY + ZZ) on nearest neighbours."""
    items = []
    bonds = n if periodic and n > 2 else n - 1
    for i in range(bonds):
        j = (i + 1) % n
        items.append(HamiltonianTerm(
            (i, j), paulis=(("XX", coupling), ("YY", coupling), ("ZZ", coupling))
        ))
    return LocalHamiltonian(n, tuple(items))


BUILTINS = {
    "zz": zz_toy,
    "x+zz": x_plus_zz_toy,
    "tfim4": lambda: tfim_chain(4),
    "heisenberg4": lambda: heisenberg_chain(4),
}


# ---------------------------------------------------------------- ensemble


@dataclass(frozen=True)
class PauliEntry:
    string: PauliString
    d: float

    @property
    def sign(self) -> int:
        return 1 if self.d > 0 else -1


@dataclass(frozen=True, eq=False)
class PauliEnsemble:
    n: int
    entries: tuple[PauliEntry, ...]

    def __post_init__(self) -> None:
        if not self.entries:
            raise HamiltonianError("empty ensemble: the Hamiltonian is zero")
        keys = [(e.string.x, e.string.z) for e in self.entries]
        if len(set(keys)) != len(keys):
            raise HamiltonianError("duplicate Pauli string in ensemble")
        if any(e.string.phase != 0 for e in self.entries):
            raise HamiltonianError("ensemble strings must carry phase +1")

    @property
    def total_weight(self) -> float:
        return float(sum(abs(e.d) for e in self.entries))

    @property
    def pi(self) -> np.ndarray:
        w = np.array([abs(e.d) for e in self.entries])
        return w / w.sum()

    def __len__(self) -> int:
        return len(self.entries)

    def hamiltonian(self) -> np.ndarray:
        return pauli.reconstruct([WeightedPauliTerm(e.string, e.d) for e in self.entries], self.n)

    def projector(self, i: int) -> np.ndarray:
        e = self.entries[i]
        return (np.eye(1 << self.n) + e.sign * pauli.to_dense(e.string)) / 2

    def shifted(self) -> np.ndarray:
        """H + T I = sum_S 2|d_S| P_S."""
        return self.hamiltonian() + self.total_weight * np.eye(1 << self.n)

    def rescaled(self) -> np.ndarray:
        """(H + T) / 2T = sum_S pi_S P_S."""
        return self.shifted() / (2 * self.total_weight)

    def scaled(self, c: float) -> PauliEnsemble:
        if c <= 0:
            raise HamiltonianError("scale must be positive")
        return PauliEnsemble(self.n, tuple(PauliEntry(e.string, c * e.d) for e in self.entries))


def assemble_ensemble(h: LocalHamiltonian) -> PauliEnsemble:
    """Merge all Pauli coefficients into d_S, dropping cancelled strings."""
    merged: dict[tuple[int, int], float] = {}
    for term in h.terms:
        for wt in term.pauli_terms(h.n):
            key = (wt.string.x, wt.string.z)
            merged[key] = merged.get(key, 0.0) + wt.coeff
    entries = tuple(
        PauliEntry(PauliString(h.n, x, z), d) for (x, z), d in merged.items() if abs(d) >= DROP_TOL
    )
    if not entries:
        raise HamiltonianError("empty ensemble: the Hamiltonian is zero")
    return PauliEnsemble(h.n, entries)


def sample_term(ensemble: PauliEnsemble, rng: np.random.Generator) -> PauliEntry:
    return ensemble.entries[int(rng.choice(len(ensemble), p=ensemble.pi))]


def measure_term(state: QuantumState, entry: PauliEntry, rng: np.random.Generator) -> int:
    """Measure qubit by qubit; return r = (1 + sign(d) x_1 ... x_k) / 2.

    Qubits outside the string's support are measured in Z and discarded.
    """
    if state.n != entry.string.n:
        raise HamiltonianError(f"state has {state.n} qubits, term acts on {entry.string.n}")
    product = 1
    for q in range(state.n):
        letter = entry.string.letter(q)
        out, state = qs.measure_single_qubit(state, q, MeasurementBasis("Z" if letter == "I" else letter), rng)
        if letter != "I":
            product *= out
    return (1 + entry.sign * product) // 2


def verify_once(state: QuantumState, ensemble: PauliEnsemble, rng: np.random.Generator) -> bool:
    return measure_term(state, sample_term(ensemble, rng), rng) == 0


def sample_r(state: QuantumState, ensemble: PauliEnsemble, shots: int, rng: np.random.Generator) -> np.ndarray:
    """r values for ``shots`` rounds on i.i.d. copies of ``state``, in shot order."""
    choice = rng.choice(len(ensemble), size=shots, p=ensemble.pi)
    r = np.empty(shots, dtype=np.int64)
    for i in np.unique(choice):
        mask = choice == i
        e = ensemble.entries[int(i)]
        prod = sample_product_outcomes(state, e.string, int(mask.sum()), rng)
        r[mask] = (1 + e.sign * prod) // 2
    return r


def exact_r_mean(state: QuantumState, ensemble: PauliEnsemble) -> float:
    """E[r] = sum_S pi_S <P_S>."""
    pi = ensemble.pi
    return float(sum(
        p * 0.5 * (1 + e.sign * qs.expectation(state, e.string)) for p, e in zip(pi, ensemble.entries)
    ))


def exact_acceptance(state: QuantumState, ensemble: PauliEnsemble) -> float:
    return 1.0 - exact_r_mean(state, ensemble)


def acceptance_from_energy(energy: float, total_weight: float) -> float:
    return 1.0 - (energy + total_weight) / (2 * total_weight)


def energy_from_r_mean(r_mean: float, total_weight: float) -> float:
    return 2 * total_weight * r_mean - total_weight


@dataclass(frozen=True)
class EnergyEstimate:
    energy: float
    std_error: float
    shots: int
    r_mean: float


StateSource = Union[QuantumState, Callable[[int], QuantumState]]


def estimate_energy(
    state_source: StateSource, ensemble: PauliEnsemble, shots: int, rng: np.random.Generator
) -> EnergyEstimate:
    """Invert E[r] = (<H> + T)/2T from ``shots`` single-copy rounds.

    ``state_source`` is either a fixed state (i.i.d. copies) or a callable
    ``shot_index -> state`` for copies that may differ between rounds.
    """
    if shots < 1:
        raise HamiltonianError("need at least one shot")
    if isinstance(state_source, QuantumState):
        r = sample_r(state_source, ensemble, shots, rng)
    else:
        r = np.array([
            measure_term(state_source(i), sample_term(ensemble, rng), rng) for i in range(shots)
        ])
    return summarize_r(r, ensemble.total_weight)


def summarize_r(r: np.ndarray, total_weight: float) -> EnergyEstimate:
    shots = len(r)
    mean = float(np.mean(r))
    sd = float(np.std(r, ddof=1)) if shots > 1 else float("inf")
    return EnergyEstimate(
        energy=energy_from_r_mean(mean, total_weight),
        std_error=float(2 * total_weight * sd / np.sqrt(shots)),
        shots=shots,
        r_mean=mean,
    )


def ground_energy_exact(h: LocalHamiltonian | PauliEnsemble) -> tuple[float, QuantumState]:
    m = h.dense() if isinstance(h, LocalHamiltonian) else h.hamiltonian()
    w, v = np.linalg.eigh(m)
    n = int(np.log2(len(w)))
    return float(w[0]), QuantumState._unchecked(n, v[:, 0] / np.linalg.norm(v[:, 0]))


@dataclass(frozen=True)
class EnergyPromise:
    e_a: float
    e_b: float
    oracle_generated: bool = False

    def __post_init__(self) -> None:
        if not self.e_b - self.e_a > 0:
            raise HamiltonianError(f"promise gap must be positive, got E_a={self.e_a}, E_b={self.e_b}")


def lh_gap(ensemble: PauliEnsemble, promise: EnergyPromise) -> float:
    """Lower bound (E_b - E_a) / 2T on the yes/no acceptance gap."""
    return (promise.e_b - promise.e_a) / (2 * ensemble.total_weight)


def yes_acceptance_bound(ensemble: PauliEnsemble, e_a: float) -> float:
    return 0.5 - e_a / (2 * ensemble.total_weight)


def no_acceptance_bound(ensemble: PauliEnsemble, e_b: float) -> float:
    return 0.5 - e_b / (2 * ensemble.total_weight)


def no_instance(ensemble: PauliEnsemble, t: float = 0.5) -> PauliEnsemble:
    """(1 - t) H + t T I, a Hamiltonian with the same total weight and a raised ground energy.

    Used to pair a yes-instance with a no-instance that shares T, so both
    acceptance bounds refer to the same normalization.
    """
    if not 0 < t < 1:
        raise HamiltonianError("t must lie in (0, 1)")
    T = ensemble.total_weight
    ident = PauliString.identity(ensemble.n)
    entries, have_identity = [], False
    for e in ensemble.entries:
        d = (1 - t) * e.d
        if e.string == ident:
            d += t * T
            have_identity = True
        if abs(d) >= DROP_TOL:
            entries.append(PauliEntry(e.string, d))
    if not have_identity:
        entries.append(PauliEntry(ident, t * T))
    out = PauliEnsemble(ensemble.n, tuple(entries))
    if abs(out.total_weight - T) > 1e-9 * max(1.0, T):
        raise HamiltonianError("identity term too negative to keep the total weight fixed")
    return out
