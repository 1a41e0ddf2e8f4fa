"""Verifier circuits over {J(theta), CZ} and their one-way (measurement) patterns.

``J(theta) = H diag(1, e^{i theta})``. A J gate on a logical wire adds one
resource vertex: the wire's current vertex is measured in the X-Y plane at
angle ``-theta`` and the wire moves to the new vertex. CZ gates become edges
between the current vertices of two wires.

Pauli byproducts follow the flow of the chain: after measuring ``i`` with
successor ``f(i)``, the outcome ``s_i`` implies ``X`` on ``f(i)`` and ``Z`` on
every other neighbour of ``f(i)``. Those corrections are never applied as
gates; they are folded into later measurements as sign (``s_deps``) and
``+pi`` (``t_deps``) dependencies, or into the final readout bit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from qmaverify import pauli
from qmaverify import quantumstate as qs
from qmaverify.graphstate import VerificationGraph, coupled_state
from qmaverify.quantumstate import MeasurementBasis, QuantumState

MAX_LOGICAL = 3
MAX_PHYSICAL = 12


class CircuitError(ValueError):
    """Raised for unsupported gates or oversized circuits."""


def j_matrix(theta: float) -> np.ndarray:
    return qs.HADAMARD @ np.diag([1, np.exp(1j * theta)])


@dataclass(frozen=True)
class Gate:
    name: str
    qubits: tuple[int, ...]
    theta: float = 0.0

    def __post_init__(self) -> None:
        if self.name == "J":
            if len(self.qubits) != 1:
                raise CircuitError("J acts on exactly one qubit")
            if not np.isfinite(self.theta):
                raise CircuitError(f"non-finite angle {self.theta}")
        elif self.name == "CZ":
            if len(self.qubits) != 2 or self.qubits[0] == self.qubits[1]:
                raise CircuitError("CZ needs two distinct qubits")
        else:
            raise CircuitError(f"unsupported gate {self.name!r}; use J or CZ")

    def to_json(self) -> dict:
        if self.name == "J":
            return {"g": "J", "q": self.qubits[0], "theta": self.theta}
        return {"g": "CZ", "q": list(self.qubits)}


def J(q: int, theta: float = 0.0) -> Gate:
    return Gate("J", (q,), float(theta))


def CZ(a: int, b: int) -> Gate:
    return Gate("CZ", (a, b))


def hadamard(q: int) -> list[Gate]:
    return [J(q, 0.0)]


def rz(q: int, theta: float) -> list[Gate]:
    """diag(1, e^{i theta}) = J(0) J(theta): apply J(theta) first."""
    return [J(q, theta), J(q, 0.0)]


@dataclass(frozen=True)
class VerifierCircuit:
    n_witness: int
    m_ancilla: int = 0
    gates: tuple[Gate, ...] = ()
    accept_qubit: int = 0
    accept_value: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "gates", tuple(self.gates))
        width = self.n_witness + self.m_ancilla
        if self.n_witness < 0 or self.m_ancilla < 0 or width == 0:
            raise CircuitError("circuit needs at least one qubit")
        for gate in self.gates:
            if any(not 0 <= q < width for q in gate.qubits):
                raise CircuitError(f"gate {gate} out of range for {width} qubits")
        if not 0 <= self.accept_qubit < width:
            raise CircuitError(f"accept qubit {self.accept_qubit} out of range")
        if self.accept_value not in (0, 1):
            raise CircuitError("accept value must be 0 or 1")

    @property
    def width(self) -> int:
        return self.n_witness + self.m_ancilla

    def to_json(self) -> dict:
        return {
            "n_witness": self.n_witness,
            "m_ancilla": self.m_ancilla,
            "gates": [g.to_json() for g in self.gates],
            "accept_qubit": self.accept_qubit,
            "accept_value": self.accept_value,
        }

    @classmethod
    def from_json(cls, obj: dict) -> VerifierCircuit:
        if not isinstance(obj, dict):
            raise CircuitError("circuit file must hold a JSON object")
        for key in ("n_witness", "gates", "accept_qubit"):
            if key not in obj:
                raise CircuitError(f"circuit file is missing field {key!r}")
        gates = []
        for i, raw in enumerate(obj["gates"]):
            try:
                if raw["g"] == "J":
                    gates.append(J(int(raw["q"]), float(raw.get("theta", 0.0))))
                elif raw["g"] == "CZ":
                    a, b = raw["q"]
                    gates.append(CZ(int(a), int(b)))
                else:
                    raise CircuitError(f"unsupported gate {raw['g']!r}")
            except (KeyError, TypeError, ValueError) as exc:
                raise CircuitError(f"gates[{i}]: {exc}") from exc
        return cls(
            int(obj["n_witness"]),
            int(obj.get("m_ancilla", 0)),
            tuple(gates),
            int(obj["accept_qubit"]),
            int(obj.get("accept_value", 1)),
        )

    @classmethod
    def load(cls, path) -> VerifierCircuit:
        with open(Path(path)) as fh:
            return cls.from_json(json.load(fh))


def random_circuit(
    rng: np.random.Generator, n_witness: int = 1, m_ancilla: int = 1, n_gates: int = 4, cz_prob: float = 0.3
) -> VerifierCircuit:
    """Random {J, CZ} circuit; CZ only appears when there are two or more wires."""
    width = n_witness + m_ancilla
    gates = []
    for _ in range(n_gates):
        if width > 1 and rng.random() < cz_prob:
            a, b = rng.choice(width, size=2, replace=False)
            gates.append(CZ(int(a), int(b)))
        else:
            gates.append(J(int(rng.integers(width)), float(rng.uniform(0, 2 * np.pi))))
    return VerifierCircuit(n_witness, m_ancilla, tuple(gates), accept_qubit=int(rng.integers(width)))


# ---------------------------------------------------------------- direct simulation


def circuit_input(circuit: VerifierCircuit, witness: QuantumState) -> QuantumState:
    if witness.n != circuit.n_witness:
        raise CircuitError(f"witness has {witness.n} qubits, circuit expects {circuit.n_witness}")
    if circuit.m_ancilla == 0:
        return witness
    return qs.tensor(witness, qs.plus_state(circuit.m_ancilla))


def apply_circuit(circuit: VerifierCircuit, state: QuantumState) -> QuantumState:
    for gate in circuit.gates:
        if gate.name == "J":
            state = qs.apply_single_qubit_gate(state, gate.qubits[0], j_matrix(gate.theta))
        else:
            state = qs.apply_cz(state, *gate.qubits)
    return state


def circuit_unitary(circuit: VerifierCircuit) -> np.ndarray:
    dim = 1 << circuit.width
    cols = []
    for b in range(dim):
        vec = np.zeros(dim, dtype=complex)
        vec[b] = 1
        cols.append(apply_circuit(circuit, QuantumState._unchecked(circuit.width, vec)).data)
    return np.array(cols).T


def circuit_accept_probability(circuit: VerifierCircuit, witness: QuantumState) -> float:
    out = apply_circuit(circuit, circuit_input(circuit, witness))
    p_one = 1.0 - qs.outcome_probability(out, circuit.accept_qubit)
    return p_one if circuit.accept_value == 1 else 1.0 - p_one


def witness_accept_operator(circuit: VerifierCircuit) -> np.ndarray:
    """Operator M on the witness with accept probability Tr(M w)."""
    u = circuit_unitary(circuit)
    n, m = circuit.n_witness, circuit.m_ancilla
    bits = (np.arange(1 << circuit.width) >> (circuit.width - 1 - circuit.accept_qubit)) & 1
    proj = np.diag((bits == circuit.accept_value).astype(complex))
    full = u.conj().T @ proj @ u
    plus = np.full(1 << m, 2 ** (-m / 2))
    iso = np.kron(np.eye(1 << n), plus[:, None])
    return iso.conj().T @ full @ iso


def max_accept_probability(circuit: VerifierCircuit) -> float:
    """Largest acceptance over all witnesses (the circuit's soundness value)."""
    return float(np.linalg.eigvalsh(witness_accept_operator(circuit))[-1])


# ---------------------------------------------------------------- patterns


@dataclass(frozen=True)
class MeasurementPattern:
    graph: VerificationGraph
    order: tuple
    angle: dict
    s_deps: dict
    t_deps: dict
    output_vertices: tuple
    output_x_deps: dict
    output_z_deps: dict
    witness_vertices: tuple
    accept_vertex: object
    accept_value: int = 1

    def __post_init__(self) -> None:
        seen = set()
        outputs = set(self.output_vertices)
        for v in self.order:
            if v in outputs:
                raise CircuitError(f"output vertex {v} is measured by the pattern")
            for dep in set(self.s_deps.get(v, ())) | set(self.t_deps.get(v, ())):
                if dep not in seen:
                    raise CircuitError(f"vertex {v} depends on {dep}, which is not measured earlier")
            seen.add(v)
        for v in self.output_vertices:
            for dep in self.output_x_deps.get(v, ()) | self.output_z_deps.get(v, ()):
                if dep not in seen:
                    raise CircuitError(f"output {v} depends on unmeasured vertex {dep}")
        if self.accept_vertex not in outputs:
            raise CircuitError("accept vertex must be an output vertex")

    def to_json(self) -> dict:
        deps = lambda d: {str(k): sorted(v) for k, v in d.items()}  # noqa: E731
        return {
            "graph": self.graph.to_json(),
            "order": list(self.order),
            "angle": {str(k): v for k, v in self.angle.items()},
            "s_deps": deps(self.s_deps),
            "t_deps": deps(self.t_deps),
            "output_vertices": list(self.output_vertices),
            "output_x_deps": deps(self.output_x_deps),
            "output_z_deps": deps(self.output_z_deps),
            "witness_vertices": list(self.witness_vertices),
            "accept_vertex": self.accept_vertex,
            "accept_value": self.accept_value,
        }

    @classmethod
    def from_json(cls, obj: dict) -> MeasurementPattern:
        deps = lambda d: {int(k): frozenset(v) for k, v in d.items()}  # noqa: E731
        return cls(
            graph=VerificationGraph.from_json(obj["graph"]),
            order=tuple(obj["order"]),
            angle={int(k): float(v) for k, v in obj["angle"].items()},
            s_deps=deps(obj["s_deps"]),
            t_deps=deps(obj["t_deps"]),
            output_vertices=tuple(obj["output_vertices"]),
            output_x_deps=deps(obj["output_x_deps"]),
            output_z_deps=deps(obj["output_z_deps"]),
            witness_vertices=tuple(obj["witness_vertices"]),
            accept_vertex=obj["accept_vertex"],
            accept_value=int(obj.get("accept_value", 1)),
        )


def compile(circuit: VerifierCircuit) -> MeasurementPattern:
    """Compile a {J, CZ} circuit into a flow-based pattern.

    Witness wires start on witness-region vertices; ancilla wires start on
    fresh resource vertices (already |+>). A witness wire is teleported into
    the resource region by J(0) J(0) before its first CZ, and at the end if it
    never left the witness region, so CZ edges and outputs live in the
    resource region only.
    """
    if circuit.width > MAX_LOGICAL:
        raise CircuitError(f"compile handles at most {MAX_LOGICAL} logical qubits")
    counter = iter(range(10**6))
    v2 = [next(counter) for _ in range(circuit.n_witness)]
    v1 = []
    current = list(v2)
    for _ in range(circuit.m_ancilla):
        v = next(counter)
        v1.append(v)
        current.append(v)
    edges = set()
    order, angle, flow = [], {}, {}
    witness_region = set(v2)

    def toggle(a, b):
        e = (min(a, b), max(a, b))
        edges.symmetric_difference_update({e})

    def apply_j(w, theta):
        u = next(counter)
        v1.append(u)
        toggle(current[w], u)
        order.append(current[w])
        angle[current[w]] = -theta
        flow[current[w]] = u
        current[w] = u

    def leave_witness_region(w):
        if current[w] in witness_region:
            apply_j(w, 0.0)
            apply_j(w, 0.0)

    for gate in circuit.gates:
        if gate.name == "J":
            apply_j(gate.qubits[0], gate.theta)
        else:
            a, b = gate.qubits
            leave_witness_region(a)
            leave_witness_region(b)
            toggle(current[a], current[b])
    for w in range(circuit.width):
        leave_witness_region(w)

    total = len(v1) + len(v2)
    if total > MAX_PHYSICAL:
        raise CircuitError(f"pattern needs {total} vertices; cap is {MAX_PHYSICAL}")

    adjacency = {v: set() for v in v1 + v2}
    for a, b in edges:
        adjacency[a].add(b)
        adjacency[b].add(a)

    x_acc = {v: frozenset() for v in adjacency}
    z_acc = {v: frozenset() for v in adjacency}
    s_deps, t_deps = {}, {}
    position = {v: i for i, v in enumerate(order)}
    for i in order:
        s_deps[i] = x_acc[i]
        t_deps[i] = z_acc[i]
        f = flow[i]
        x_acc[f] = x_acc[f] ^ {i}
        for k in adjacency[f] - {i}:
            if k in position and position[k] <= position[i]:
                raise CircuitError(f"flow violated: neighbour {k} of {f} measured before {i}")
            z_acc[k] = z_acc[k] ^ {i}

    outputs = tuple(current)
    graph = VerificationGraph(
        tuple(v1), tuple(v2), tuple(sorted(edges)), tuple(order) + outputs
    )
    return MeasurementPattern(
        graph=graph,
        order=tuple(order),
        angle=angle,
        s_deps=s_deps,
        t_deps=t_deps,
        output_vertices=outputs,
        output_x_deps={v: x_acc[v] for v in outputs},
        output_z_deps={v: z_acc[v] for v in outputs},
        witness_vertices=tuple(v2),
        accept_vertex=outputs[circuit.accept_qubit],
        accept_value=circuit.accept_value,
    )


def honest_prover_state(pattern: MeasurementPattern, witness: QuantumState) -> QuantumState:
    """The state an honest prover sends: the resource graph state coupled to the witness."""
    return coupled_state(pattern.graph, witness)


# ---------------------------------------------------------------- execution


def _parity(outcomes: dict, deps) -> int:
    """XOR of the bits (0 for +1, 1 for -1) of the listed outcomes."""
    return sum(outcomes[d] == -1 for d in deps) % 2


def adapted_angle(pattern: MeasurementPattern, v, outcomes: dict) -> float:
    s = _parity(outcomes, pattern.s_deps.get(v, ()))
    t = _parity(outcomes, pattern.t_deps.get(v, ()))
    return (-1) ** s * pattern.angle[v] + t * np.pi


def readout_bit(pattern: MeasurementPattern, outcomes: dict) -> int:
    """Logical value of the accept wire after undoing its X byproduct."""
    raw = 0 if outcomes[pattern.accept_vertex] == 1 else 1
    return raw ^ _parity(outcomes, pattern.output_x_deps.get(pattern.accept_vertex, ()))


@dataclass
class PatternTranscript:
    outcomes: dict = field(default_factory=dict)
    angles: dict = field(default_factory=dict)
    readout: int = 0
    accept: bool = False


def execute_pattern(
    pattern: MeasurementPattern, state: QuantumState, rng: np.random.Generator
) -> tuple[bool, PatternTranscript]:
    """Measure every qubit as it arrives; the accept vertex is read in Z."""
    g = pattern.graph
    if state.n != g.n_total:
        raise CircuitError(f"state has {state.n} qubits, pattern graph has {g.n_total}")
    transcript = PatternTranscript()
    measured = set(pattern.order)
    for v in g.arrival_order:
        if v in measured:
            theta = adapted_angle(pattern, v, transcript.outcomes)
            transcript.angles[v] = theta
            basis = MeasurementBasis.xy_plane(theta)
        else:
            basis = qs.Z_BASIS
        out, state = qs.measure_single_qubit(state, g.index(v), basis, rng)
        transcript.outcomes[v] = out
    transcript.readout = readout_bit(pattern, transcript.outcomes)
    transcript.accept = transcript.readout == pattern.accept_value
    return transcript.accept, transcript


def _adaptive_sequence(pattern: MeasurementPattern) -> list:
    """Pattern measurements in order, then the accept vertex."""
    return list(pattern.order) + [pattern.accept_vertex]


def _basis_for(pattern: MeasurementPattern, v, outcomes: dict) -> MeasurementBasis:
    if v == pattern.accept_vertex:
        return qs.Z_BASIS
    return MeasurementBasis.xy_plane(adapted_angle(pattern, v, outcomes))


def sample_accept_count(
    pattern: MeasurementPattern, state: QuantumState, shots: int, rng: np.random.Generator
) -> int:
    """Accepted runs among ``shots`` fresh copies.

    Walks the adaptive measurement tree once, splitting the shot count at each
    node with a binomial draw from the Born probability of that branch. This
    samples the same joint outcome distribution as ``execute_pattern``; the
    remaining outputs are Z-measured and discarded, which cannot change the
    accept statistics.
    """
    g = pattern.graph
    if state.n != g.n_total:
        raise CircuitError(f"state has {state.n} qubits, pattern graph has {g.n_total}")
    seq = _adaptive_sequence(pattern)

    def walk(depth, st, outcomes, count):
        if count == 0:
            return 0
        if depth == len(seq):
            return count if readout_bit(pattern, outcomes) == pattern.accept_value else 0
        v = seq[depth]
        basis = _basis_for(pattern, v, outcomes)
        p_plus, post_plus = qs.project(st, g.index(v), basis, 1)
        n_plus = int(rng.binomial(count, min(max(p_plus, 0.0), 1.0)))
        total = 0
        if n_plus:
            total += walk(depth + 1, post_plus, {**outcomes, v: 1}, n_plus)
        if count - n_plus:
            _, post_minus = qs.project(st, g.index(v), basis, -1)
            total += walk(depth + 1, post_minus, {**outcomes, v: -1}, count - n_plus)
        return total

    return walk(0, state, {}, int(shots))


def exact_accept_probability(pattern: MeasurementPattern, state: QuantumState) -> float:
    """Acceptance of the computation branch, summed over the adaptive measurement tree."""
    g = pattern.graph
    if state.n != g.n_total:
        raise CircuitError(f"state has {state.n} qubits, pattern graph has {g.n_total}")
    seq = _adaptive_sequence(pattern)

    def walk(depth, st, outcomes):
        if depth == len(seq):
            return 1.0 if readout_bit(pattern, outcomes) == pattern.accept_value else 0.0
        v = seq[depth]
        basis = _basis_for(pattern, v, outcomes)
        total = 0.0
        for out in (1, -1):
            p, post = qs.project(st, g.index(v), basis, out)
            if post is not None and p > 1e-15:
                total += p * walk(depth + 1, post, {**outcomes, v: out})
        return total

    return float(walk(0, state, {}))


def branch_outputs(pattern: MeasurementPattern, state: QuantumState):
    """Yield (probability, outcomes, post-state) for every measurement history of ``order``."""
    g = pattern.graph
    seq = list(pattern.order)

    def walk(depth, st, outcomes, prob):
        if depth == len(seq):
            yield prob, outcomes, st
            return
        v = seq[depth]
        basis = _basis_for(pattern, v, outcomes)
        for out in (1, -1):
            p, post = qs.project(st, g.index(v), basis, out)
            if post is not None and p > 1e-15:
                yield from walk(depth + 1, post, {**outcomes, v: out}, prob * p)

    yield from walk(0, state, {}, 1.0)


def corrected_output(pattern: MeasurementPattern, outcomes: dict, post: QuantumState) -> QuantumState:
    """Undo the byproducts on the output vertices and return the logical register."""
    g = pattern.graph
    for v in pattern.output_vertices:
        q = g.index(v)
        if _parity(outcomes, pattern.output_x_deps.get(v, ())):
            post = qs.apply_single_qubit_gate(post, q, pauli.X2)
        if _parity(outcomes, pattern.output_z_deps.get(v, ())):
            post = qs.apply_single_qubit_gate(post, q, pauli.Z2)
    keep = [g.index(v) for v in pattern.output_vertices]
    reduced = qs.partial_trace(post, keep)
    # partial_trace sorts kept qubits; restore logical wire order
    perm = np.argsort(np.argsort(keep))
    m = len(keep)
    t = reduced.data.reshape((2,) * (2 * m))
    t = np.transpose(t, list(perm) + [m + p for p in perm])
    return QuantumState._unchecked(m, t.reshape(1 << m, 1 << m), "mixed")


def circuit_accept_operator(pattern: MeasurementPattern) -> np.ndarray:
    """POVM element of acceptance in the computation branch, on the full graph."""
    g = pattern.graph
    seq = _adaptive_sequence(pattern)
    rest = [v for v in g.qubits if v not in set(seq)]

    def build(depth, outcomes):
        if depth == len(seq):
            return np.array([[1.0 if readout_bit(pattern, outcomes) == pattern.accept_value else 0.0]])
        v = seq[depth]
        basis = _basis_for(pattern, v, outcomes)
        return sum(
            np.kron(basis.projector(out), build(depth + 1, {**outcomes, v: out}))
            for out in (1, -1)
        )

    op = np.kron(build(0, {}), np.eye(1 << len(rest)))
    layout = seq + rest
    n = g.n_total
    t = op.reshape((2,) * (2 * n))
    axes = [layout.index(v) for v in g.qubits]
    t = np.transpose(t, axes + [n + a for a in axes])
    return t.reshape(1 << n, 1 << n)
