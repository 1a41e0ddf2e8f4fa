"""Graph states on a resource/witness bipartition and the stabilizer test.

Vertices are split into a resource region ``v1`` (size N) and a witness
region ``v2``. Qubit ``i`` of every state on the graph is vertex
``graph.qubits[i]``, i.e. resource vertices first, then witness vertices.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from qmaverify import pauli
from qmaverify import quantumstate as qs
from qmaverify.pauli import PauliString
from qmaverify.quantumstate import MeasurementBasis, QuantumState

MAX_ENUMERATE_N = 10


class GraphError(ValueError):
    """Raised for malformed graphs or graph/state mismatches."""


def _edge(a, b) -> tuple:
    return (a, b) if repr(a) <= repr(b) else (b, a)


@dataclass(frozen=True)
class VerificationGraph:
    v1: tuple
    v2: tuple = ()
    edges: tuple = ()
    arrival_order: tuple = ()
    allow_witness_edges: bool = False

    def __post_init__(self) -> None:
        v1, v2 = tuple(self.v1), tuple(self.v2)
        if len(set(v1)) != len(v1) or len(set(v2)) != len(v2):
            raise GraphError("duplicate vertex id")
        if set(v1) & set(v2):
            raise GraphError(f"v1 and v2 overlap: {sorted(set(v1) & set(v2), key=repr)}")
        vertices = set(v1) | set(v2)
        seen = set()
        edges = []
        for e in self.edges:
            a, b = tuple(e)
            if a not in vertices or b not in vertices:
                raise GraphError(f"edge {a}-{b} references an unknown vertex")
            if a == b:
                raise GraphError(f"self-loop on vertex {a}")
            key = _edge(a, b)
            if key in seen:
                raise GraphError(f"duplicate edge {a}-{b}")
            if a in v2 and b in v2 and not self.allow_witness_edges:
                raise GraphError(f"edge {a}-{b} lies inside the witness region")
            seen.add(key)
            edges.append(key)
        order = tuple(self.arrival_order) or v1 + v2
        if sorted(order, key=repr) != sorted(v1 + v2, key=repr) or len(order) != len(v1 + v2):
            raise GraphError("arrival_order must be a permutation of all vertices")
        object.__setattr__(self, "v1", v1)
        object.__setattr__(self, "v2", v2)
        object.__setattr__(self, "edges", tuple(edges))
        object.__setattr__(self, "arrival_order", order)

    @property
    def qubits(self) -> tuple:
        return self.v1 + self.v2

    @property
    def N(self) -> int:
        return len(self.v1)

    @property
    def n_total(self) -> int:
        return len(self.v1) + len(self.v2)

    @cached_property
    def _index(self) -> dict:
        return {v: i for i, v in enumerate(self.qubits)}

    def index(self, v) -> int:
        try:
            return self._index[v]
        except KeyError:
            raise GraphError(f"unknown vertex {v!r}") from None

    @cached_property
    def _adjacency(self) -> dict:
        adj = {v: set() for v in self.qubits}
        for a, b in self.edges:
            adj[a].add(b)
            adj[b].add(a)
        return adj

    def neighbors(self, v) -> set:
        return set(self._adjacency[v])

    @property
    def resource_edges(self) -> tuple:
        s1 = set(self.v1)
        return tuple(e for e in self.edges if e[0] in s1 and e[1] in s1)

    @property
    def connecting_edges(self) -> tuple:
        s1 = set(self.v1)
        return tuple(e for e in self.edges if (e[0] in s1) != (e[1] in s1))

    def resource_only(self) -> VerificationGraph:
        return VerificationGraph(self.v1, (), self.resource_edges)

    def edge_qubits(self, edges=None) -> list[tuple[int, int]]:
        edges = self.edges if edges is None else edges
        return [(self.index(a), self.index(b)) for a, b in edges]

    def to_json(self) -> dict:
        out = {
            "v1": list(self.v1),
            "v2": list(self.v2),
            "edges": [list(e) for e in self.edges],
            "arrival_order": list(self.arrival_order),
        }
        if self.allow_witness_edges:
            out["allow_witness_edges"] = True
        return out

    @classmethod
    def from_json(cls, obj: dict) -> VerificationGraph:
        if not isinstance(obj, dict):
            raise GraphError("graph file must hold a JSON object")
        for key in ("v1", "edges"):
            if key not in obj:
                raise GraphError(f"graph file is missing field {key!r}")
        try:
            edges = [tuple(e) for e in obj["edges"]]
        except TypeError as exc:
            raise GraphError(f"field 'edges': {exc}") from exc
        if any(len(e) != 2 for e in edges):
            raise GraphError("field 'edges': every edge needs exactly two endpoints")
        return cls(
            tuple(obj["v1"]),
            tuple(obj.get("v2", ())),
            tuple(edges),
            tuple(obj.get("arrival_order", ())),
            bool(obj.get("allow_witness_edges", False)),
        )

    @classmethod
    def load(cls, path) -> VerificationGraph:
        with open(Path(path)) as fh:
            return cls.from_json(json.load(fh))


# ---------------------------------------------------------------- builders


def path_graph(n: int) -> VerificationGraph:
    return VerificationGraph(tuple(range(n)), (), tuple((i, i + 1) for i in range(n - 1)))


def cycle_graph(n: int) -> VerificationGraph:
    return VerificationGraph(tuple(range(n)), (), tuple((i, (i + 1) % n) for i in range(n)))


def star_graph(n: int) -> VerificationGraph:
    """Centre 0 joined to leaves 1..n-1."""
    return VerificationGraph(tuple(range(n)), (), tuple((0, i) for i in range(1, n)))


def grid_graph(rows: int, cols: int, witness_rows=()) -> VerificationGraph:
    """rows x cols square lattice; each row in ``witness_rows`` gets a witness
    vertex attached to its left-most site (the layout of a witness feeding a cluster)."""
    vid = lambda r, c: r * cols + c  # noqa: E731
    v1 = tuple(range(rows * cols))
    edges = []
    for r in range(rows):
        for c in range(cols):
            if c + 1 < cols:
                edges.append((vid(r, c), vid(r, c + 1)))
            if r + 1 < rows:
                edges.append((vid(r, c), vid(r + 1, c)))
    v2 = []
    for i, r in enumerate(witness_rows):
        w = rows * cols + i
        v2.append(w)
        edges.append((w, vid(r, 0)))
    return VerificationGraph(v1, tuple(v2), tuple(edges))


# ---------------------------------------------------------------- states


def graph_state(g: VerificationGraph) -> QuantumState:
    """|G> on the resource region with its internal edges (witness ignored)."""
    if g.N > qs.MAX_QUBITS:
        raise GraphError(f"graph state capped at {qs.MAX_QUBITS} vertices, got {g.N}")
    r = g.resource_only()
    return qs.apply_czs(qs.plus_state(r.N), r.edge_qubits())


def coupled_state(g: VerificationGraph, witness: QuantumState | None = None) -> QuantumState:
    """W (|+>^N (x) witness), i.e. |G> coupled to the witness along the connecting edges.

    With an empty witness region the witness may be omitted.
    """
    if witness is None:
        if g.v2:
            raise GraphError(f"graph has {len(g.v2)} witness vertices but no witness was given")
    elif witness.n != len(g.v2):
        raise GraphError(f"witness has {witness.n} qubits, graph expects {len(g.v2)}")
    if g.n_total > qs.MAX_QUBITS:
        raise GraphError(f"total size capped at {qs.MAX_QUBITS} qubits, got {g.n_total}")
    base = qs.tensor(qs.plus_state(g.N), witness) if g.v2 else qs.plus_state(g.N)
    return qs.apply_czs(base, g.edge_qubits())


def cz_all(g: VerificationGraph, state: QuantumState) -> QuantumState:
    """Apply W, the CZ product over every edge (W is its own inverse)."""
    _check_state(g, state)
    return qs.apply_czs(state, g.edge_qubits())


def _check_state(g: VerificationGraph, state: QuantumState) -> None:
    if state.n != g.n_total:
        raise GraphError(f"state has {state.n} qubits, graph has {g.n_total} vertices")


# ---------------------------------------------------------------- stabilizers


def stabilizer_generator(g: VerificationGraph, j) -> PauliString:
    if j not in set(g.v1):
        raise GraphError(f"generator vertex {j!r} is not in the resource region")
    letters = {g.index(j): "X"}
    for nb in g.neighbors(j):
        letters[g.index(nb)] = "Z"
    return PauliString.from_letters(g.n_total, letters)


def generators(g: VerificationGraph) -> list[PauliString]:
    return [stabilizer_generator(g, j) for j in g.v1]


def _k_tuple(g: VerificationGraph, k_bits) -> tuple[int, ...]:
    if isinstance(k_bits, str):
        bits = tuple(int(c) for c in k_bits)
    else:
        bits = tuple(int(b) for b in k_bits)
    if len(bits) != g.N:
        raise GraphError(f"k has length {len(bits)}, expected N={g.N}")
    if set(bits) - {0, 1}:
        raise GraphError("k must be a bitstring")
    return bits


def stabilizer_product(g: VerificationGraph, k_bits) -> PauliString:
    """s_k, the ordered product of generators g_j with k_j = 1 (j over v1)."""
    bits = _k_tuple(g, k_bits)
    gens = [stabilizer_generator(g, j) for j, b in zip(g.v1, bits) if b]
    return pauli.product(gens, n=g.n_total)


def all_k(N: int):
    for value in range(1 << N):
        yield tuple((value >> (N - 1 - i)) & 1 for i in range(N))


def stabilizer_projector(g: VerificationGraph) -> np.ndarray:
    """Dense prod_j (I + g_j)/2."""
    dim = 1 << g.n_total
    out = np.eye(dim, dtype=complex)
    for gen in generators(g):
        out = out @ ((np.eye(dim) + pauli.to_dense(gen)) / 2)
    return out


def stabilizer_average(g: VerificationGraph) -> np.ndarray:
    """Dense 2^-N sum_k s_k."""
    dim = 1 << g.n_total
    out = np.zeros((dim, dim), dtype=complex)
    for k in all_k(g.N):
        out += pauli.to_dense(stabilizer_product(g, k))
    return out / (1 << g.N)


def honest_projector(g: VerificationGraph) -> np.ndarray:
    """Dense W (|+><+|^N (x) I) W."""
    plus = np.full((2, 2), 0.5, dtype=complex)
    m = np.ones((1, 1), dtype=complex)
    for _ in range(g.N):
        m = np.kron(m, plus)
    m = np.kron(m, np.eye(1 << len(g.v2)))
    d = qs.cz_diagonal(g.n_total, g.edge_qubits()).real
    return d[:, None] * m * d[None, :]


def pass_operator(g: VerificationGraph) -> np.ndarray:
    """POVM element of passing: 2^-N sum_k (I + s_k)/2 = (I + W(|+><+|^N (x) I)W)/2."""
    return (np.eye(1 << g.n_total) + honest_projector(g)) / 2


def honest_overlap(g: VerificationGraph, rho: QuantumState) -> float:
    """Tr[W(|+><+|^N (x) I)W rho], the squared fidelity with the nearest honest state."""
    _check_state(g, rho)
    sigma = cz_all(g, rho)
    return _plus_block(g, sigma)[1]


def _plus_block(g: VerificationGraph, sigma: QuantumState) -> tuple[np.ndarray, float]:
    """(<+|^N (x) I) sigma (|+>^N (x) I) on the witness region, and its trace."""
    N, m = g.N, len(g.v2)
    plus = np.full(1 << N, 2 ** (-N / 2))
    if sigma.is_pure:
        amp = plus @ sigma.data.reshape(1 << N, 1 << m)
        block = np.outer(amp, amp.conj())
    else:
        t = sigma.data.reshape(1 << N, 1 << m, 1 << N, 1 << m)
        block = np.einsum("a,aibj,b->ij", plus, t, plus)
    return block, float(np.trace(block).real)


def exact_pass_probability(g: VerificationGraph, rho: QuantumState, method: str = "auto") -> float:
    """Probability that a uniformly random s_k measures +1 on ``rho``.

    ``method="sum"`` averages (1 + <s_k>)/2 over all 2^N strings;
    ``method="projector"`` uses (1 + Tr[W(|+><+|^N (x) I)W rho])/2.
    """
    _check_state(g, rho)
    if method == "auto":
        method = "sum" if g.N <= MAX_ENUMERATE_N else "projector"
    if method == "sum":
        if g.N > MAX_ENUMERATE_N:
            raise GraphError(f"enumeration over 2^N strings capped at N={MAX_ENUMERATE_N}")
        total = sum(qs.expectation(rho, stabilizer_product(g, k)) for k in all_k(g.N))
        p = 0.5 + 0.5 * total / (1 << g.N)
    elif method == "projector":
        p = 0.5 + 0.5 * honest_overlap(g, rho)
    else:
        raise ValueError(f"unknown method {method!r}")
    return float(np.clip(p, 0.0, 1.0))


# ---------------------------------------------------------------- sampled test


@dataclass
class StabilizerTestRecord:
    k_bits: str
    per_qubit_bases: dict
    outcomes: dict = field(default_factory=dict)
    product_sign: int = 1
    passed: bool = True


def measurement_plan(g: VerificationGraph, s: PauliString) -> dict:
    """vertex -> letter of s at that vertex, or "skip" for identity."""
    plan = {}
    for v in g.qubits:
        letter = s.letter(g.index(v))
        plan[v] = "skip" if letter == "I" else letter
    return plan


def run_stabilizer_test(
    g: VerificationGraph, state: QuantumState, rng: np.random.Generator
) -> StabilizerTestRecord:
    """One round: draw k, then measure each qubit as it arrives.

    Identity positions are still measured (in Z) and the outcome is dropped.
    """
    _check_state(g, state)
    k = tuple(int(b) for b in rng.integers(0, 2, size=g.N))
    s = stabilizer_product(g, k)
    plan = measurement_plan(g, s)
    outcomes = {}
    parity = 1
    for v in g.arrival_order:
        letter = plan[v]
        basis = MeasurementBasis("Z" if letter == "skip" else letter)
        out, state = qs.measure_single_qubit(state, g.index(v), basis, rng)
        outcomes[v] = out
        if letter != "skip":
            parity *= out
    sign = s.sign
    return StabilizerTestRecord(
        k_bits="".join(map(str, k)),
        per_qubit_bases=plan,
        outcomes=outcomes,
        product_sign=sign,
        passed=sign * parity == 1,
    )


def sample_product_outcomes(state: QuantumState, s: PauliString, shots: int, rng) -> np.ndarray:
    """Sample the +-1 product of single-qubit outcomes for ``shots`` independent copies.

    Every qubit is measured (identity positions in Z); the joint outcome
    distribution of these commuting single-qubit measurements is the
    computational distribution of the basis-rotated state.
    """
    rotations = {}
    for q in range(s.n):
        letter = s.letter(q)
        if letter in ("X", "Y"):
            rotations[q] = MeasurementBasis(letter).rotation()
    rotated = qs.rotate_all(state, rotations)
    probs = qs.computational_distribution(rotated)
    idx = rng.choice(len(probs), size=shots, p=probs)
    support_mask, _ = pauli._dense_masks(PauliString(s.n, s.x | s.z, 0))
    parity = np.bitwise_count(idx.astype(np.int64) & support_mask).astype(np.int64) & 1
    return s.sign * (1 - 2 * parity)


def sample_pass_count(g: VerificationGraph, state: QuantumState, shots: int, rng) -> int:
    """Number of passed stabilizer-test rounds over ``shots`` fresh copies."""
    _check_state(g, state)
    if shots <= 0:
        return 0
    ks = rng.integers(0, 2, size=(shots, g.N))
    codes = ks @ (1 << np.arange(g.N - 1, -1, -1)) if g.N else np.zeros(shots, dtype=int)
    passed = 0
    for code, count in zip(*np.unique(codes, return_counts=True)):
        k = tuple((int(code) >> (g.N - 1 - i)) & 1 for i in range(g.N))
        s = stabilizer_product(g, k)
        passed += int(np.sum(sample_product_outcomes(state, s, int(count), rng) == 1))
    return passed


# ---------------------------------------------------------------- soundness geometry


@dataclass(frozen=True)
class HonestDistance:
    epsilon: float
    bound: float
    distance: float
    fidelity_sq: float
    optimal_witness: QuantumState | None
    closest_honest: QuantumState

    @property
    def holds(self) -> bool:
        return self.distance <= self.bound + 1e-9


def closest_honest_state_bound(g: VerificationGraph, rho: QuantumState) -> HonestDistance:
    """Distance from ``rho`` to the nearest W(|+><+|^N (x) w)W versus sqrt(2 eps).

    The maximizing witness is the witness-region block of W rho W after
    projecting the resource onto |+>^N, renormalized.
    """
    _check_state(g, rho)
    sigma = cz_all(g, rho)
    block, overlap = _plus_block(g, sigma)
    m = len(g.v2)
    if m == 0:
        witness = None
        honest = graph_state(g)
    else:
        if overlap > 1e-14:
            w = block / overlap
            w = (w + w.conj().T) / 2
        else:
            w = np.eye(1 << m, dtype=complex) / (1 << m)
        witness = QuantumState(m, w, "mixed")
        honest = coupled_state(g, witness)
    p_pass = 0.5 + 0.5 * overlap
    eps = max(0.0, 1.0 - p_pass)
    return HonestDistance(
        epsilon=eps,
        bound=float(np.sqrt(2 * eps)),
        distance=qs.trace_distance(honest, rho),
        fidelity_sq=overlap,
        optimal_witness=witness,
        closest_honest=honest,
    )
