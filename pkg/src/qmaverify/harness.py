"""Experiment orchestration: instance loading, seeded shot streams, reports.

Shots are cut into fixed-size chunks. Chunk ``c`` of stream ``s`` always
draws from ``SeedSequence(seed, spawn_key=(s, c))``, so results depend only
on the master seed, never on how chunks are scheduled across workers.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import itertools
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from qmaverify import graphstate as gs
from qmaverify import lh
from qmaverify import mbqc
from qmaverify import protocol as proto
from qmaverify import quantumstate as qs
from qmaverify.quantumstate import QuantumState

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
CHUNK_SHOTS = 4096
SIGMA = 4.0
# exact-oracle cap for dense trace distances / acceptance operators
DENSE_ORACLE_QUBITS = 10

STREAM_STAB = 1
STREAM_MBQC = 2
STREAM_LH = 3
STREAM_SWEEP = 4


class InputError(ValueError):
    """Bad instance file, flag value or infeasible size. Maps to exit code 1."""


# ---------------------------------------------------------------- seeding


def chunk_rng(seed: int, stream: int, chunk: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(stream, chunk))))


def chunk_sizes(shots: int, chunk: int = CHUNK_SHOTS) -> list[int]:
    full, rest = divmod(shots, chunk)
    return [chunk] * full + ([rest] if rest else [])


def run_chunked(
    fn: Callable[[int, np.random.Generator], object],
    shots: int,
    seed: int,
    stream: int,
    workers: int = 1,
) -> list:
    """Evaluate ``fn(count, rng)`` per chunk; results are returned in chunk order."""
    jobs = list(enumerate(chunk_sizes(shots)))
    call = lambda job: fn(job[1], chunk_rng(seed, stream, job[0]))  # noqa: E731
    if workers <= 1 or len(jobs) <= 1:
        return [call(j) for j in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(call, jobs))


def binomial_sigma(p: float, shots: int) -> float:
    return math.sqrt(max(p * (1 - p), 0.0) / shots)


def within_sigma(rate: float, exact: float, shots: int, k: float = SIGMA) -> bool:
    sigma = binomial_sigma(exact, shots)
    if sigma == 0:
        return abs(rate - exact) <= 1e-12
    return abs(rate - exact) <= k * sigma


# ---------------------------------------------------------------- reports


@dataclass
class ReportRow:
    experiment: str
    protocol: str
    instance: str = ""
    x_size: int | None = None
    q: float | None = None
    epsilon: float | None = None
    a: float | None = None
    b: float | None = None
    noise: float | None = None
    p_pass: float | None = None
    honest_distance: float | None = None
    distance_bound: float | None = None
    p_acc: float | None = None
    lambda_max: float | None = None
    alpha: float | None = None
    beta1: float | None = None
    beta2: float | None = None
    q_star: float | None = None
    delta: float | None = None
    delta1: float | None = None
    delta2: float | None = None
    gap_bound: float | None = None
    energy: float | None = None
    energy_estimate: float | None = None
    energy_std_error: float | None = None
    mc_rate: float | None = None
    mc_std_error: float | None = None
    shots: int | None = None
    oracle_promise: bool | None = None
    checks: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(all(self.checks.values()))

    def flat(self) -> dict:
        out = {f.name: _plain(getattr(self, f.name)) for f in dataclasses.fields(self) if f.name != "checks"}
        out["checks"] = ";".join(f"{k}={'ok' if v else 'FAIL'}" for k, v in self.checks.items())
        out["passed"] = self.passed
        return out


def _plain(v):
    return v.item() if isinstance(v, np.generic) else v


COLUMNS = [f.name for f in dataclasses.fields(ReportRow)] + ["passed"]


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def to_csv(rows: list[ReportRow]) -> str:
    buf = io.StringIO()
    buf.write(f"#schema={SCHEMA_VERSION}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for row in rows:
        flat = row.flat()
        writer.writerow([_cell(flat[c]) for c in COLUMNS])
    return buf.getvalue()


def to_json(rows: list[ReportRow]) -> str:
    payload = {"schema": SCHEMA_VERSION, "rows": [r.flat() for r in rows]}
    return json.dumps(payload, indent=2, sort_keys=False) + "\n"


def render(rows: list[ReportRow], fmt: str) -> str:
    if fmt == "csv":
        return to_csv(rows)
    if fmt == "json":
        return to_json(rows)
    raise InputError(f"unknown format {fmt!r}; use csv or json")


def write_report(rows: list[ReportRow], path, fmt: str) -> None:
    text = render(rows, fmt)
    with open(Path(path), "w", newline="") as fh:
        fh.write(text)


# ---------------------------------------------------------------- instances


def _load_json(path, what: str) -> dict:
    try:
        with open(Path(path)) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise InputError(f"{what} file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None


GRAPH_BUILTINS: dict[str, Callable[[], gs.VerificationGraph]] = {
    "path4": lambda: gs.path_graph(4),
    "cycle4": lambda: gs.cycle_graph(4),
    "star5": lambda: gs.star_graph(5),
    "grid2x2": lambda: gs.grid_graph(2, 2),
    "grid2x3": lambda: gs.grid_graph(2, 3),
    "grid2x3w2": lambda: gs.grid_graph(2, 3, witness_rows=(0, 1)),
}


def toy_no_circuit() -> mbqc.VerifierCircuit:
    """One witness qubit, max acceptance exactly 1/2."""
    return mbqc.VerifierCircuit(1, 1, (mbqc.CZ(0, 1), mbqc.J(1, np.pi / 2)), accept_qubit=1)


def qma1_circuit() -> mbqc.VerifierCircuit:
    """Accepts |1> on the witness with certainty: H H on the wire, read the witness."""
    return mbqc.VerifierCircuit(1, 0, tuple(mbqc.hadamard(0) + mbqc.hadamard(0)), accept_qubit=0)


CIRCUIT_BUILTINS: dict[str, Callable[[], mbqc.VerifierCircuit]] = {
    "toy-no": toy_no_circuit,
    "qma1": qma1_circuit,
}


def load_graph(path) -> gs.VerificationGraph:
    if path in GRAPH_BUILTINS:
        return GRAPH_BUILTINS[path]()
    try:
        return gs.VerificationGraph.from_json(_load_json(path, "graph"))
    except gs.GraphError as exc:
        raise InputError(f"{path}: {exc}") from None


def load_circuit(path) -> mbqc.VerifierCircuit:
    if path in CIRCUIT_BUILTINS:
        return CIRCUIT_BUILTINS[path]()
    try:
        return mbqc.VerifierCircuit.from_json(_load_json(path, "circuit"))
    except mbqc.CircuitError as exc:
        raise InputError(f"{path}: {exc}") from None


def load_hamiltonian(ref: str) -> lh.LocalHamiltonian:
    """A builtin name (see ``lh.BUILTINS``) or a JSON file path."""
    if ref in lh.BUILTINS:
        return lh.BUILTINS[ref]()
    try:
        return lh.LocalHamiltonian.from_json(_load_json(ref, "hamiltonian"))
    except lh.HamiltonianError as exc:
        raise InputError(f"{ref}: {exc}") from None


def resolve_state(ref: str | None, n: int, default: str = "zero", ground: QuantumState | None = None) -> QuantumState:
    """``zero``, ``one``, ``plus``, ``ground``, ``random:<seed>``, ``mixed:<seed>`` or a JSON file."""
    ref = default if ref is None else ref
    if ref == "zero":
        return qs.basis_state("0" * n)
    if ref == "one":
        return qs.basis_state("1" * n)
    if ref == "plus":
        return qs.plus_state(n)
    if ref == "ground":
        if ground is None:
            raise InputError("'ground' witness only applies to Hamiltonian experiments")
        return ground
    for prefix, purity in (("random:", "pure"), ("mixed:", "mixed")):
        if ref.startswith(prefix):
            try:
                seed = int(ref[len(prefix):])
            except ValueError:
                raise InputError(f"bad witness seed in {ref!r}") from None
            return qs.random_state(n, purity, np.random.default_rng(seed))
    try:
        state = QuantumState.from_json(_load_json(ref, "witness"))
    except qs.StateError as exc:
        raise InputError(f"{ref}: {exc}") from None
    if state.n != n:
        raise InputError(f"{ref}: witness has {state.n} qubits, instance expects {n}")
    return state


def add_noise(state: QuantumState, noise: float) -> QuantumState:
    if not 0 <= noise <= 1:
        raise InputError(f"noise weight {noise} outside [0, 1]")
    if noise == 0:
        return state
    return qs.mix([state.to_mixed(), qs.maximally_mixed(state.n)], [1 - noise, noise])


def _check_size(n: int, cap: int, what: str) -> None:
    if n > cap:
        raise InputError(f"{what} needs {n} qubits; the cap is {cap}")


# ---------------------------------------------------------------- experiments


@dataclass
class ExperimentSpec:
    protocol: str
    graph: str | None = None
    circuit: str | None = None
    hamiltonian: str | None = None
    witness: str | None = None
    noise: float = 0.0
    params: proto.ProtocolParams | None = None
    promise: lh.EnergyPromise | None = None
    q: float | None = None
    shots: int = 10_000
    seed: int = 0
    workers: int = 1
    experiment_id: str = "exp"

    def __post_init__(self) -> None:
        if self.protocol not in {"stab-only", "mbqc", "lh", "estimate-energy"}:
            raise InputError(f"unknown protocol {self.protocol!r}")
        if self.shots < 1:
            raise InputError("shots must be at least 1")
        if not 0 <= self.seed < 2**64:
            raise InputError("seed must be a 64-bit unsigned integer")


def run(spec: ExperimentSpec) -> list[ReportRow]:
    """Exact oracles first, then Monte Carlo; deterministic in ``spec.seed``."""
    if spec.protocol == "stab-only":
        return [_run_stab(spec)]
    if spec.protocol == "mbqc":
        return [_run_mbqc(spec)]
    if spec.protocol == "lh":
        return [_run_lh(spec)]
    return [_run_energy(spec)]


def _run_stab(spec: ExperimentSpec) -> ReportRow:
    if spec.graph is None:
        raise InputError("stab-only needs --graph")
    g = load_graph(spec.graph)
    _check_size(g.n_total, qs.MAX_QUBITS, "graph")
    witness = resolve_state(spec.witness, len(g.v2)) if g.v2 else None
    state = gs.coupled_state(g, witness) if g.v2 else gs.graph_state(g)
    state = add_noise(state, spec.noise)
    p_pass = gs.exact_pass_probability(g, state)
    row = ReportRow(spec.experiment_id, "stab-only", Path(spec.graph).name, noise=spec.noise, p_pass=p_pass)
    if g.n_total <= DENSE_ORACLE_QUBITS:
        dist = gs.closest_honest_state_bound(g, state)
        row.epsilon = dist.epsilon
        row.honest_distance = dist.distance
        row.distance_bound = dist.bound
        row.checks["distance_le_sqrt_2eps"] = dist.holds
    counts = run_chunked(lambda n, rng: gs.sample_pass_count(g, state, n, rng), spec.shots, spec.seed,
                         STREAM_STAB, spec.workers)
    rate = sum(counts) / spec.shots
    row.mc_rate = rate
    row.mc_std_error = binomial_sigma(rate, spec.shots)
    row.shots = spec.shots
    row.checks["mc_within_4sigma"] = within_sigma(rate, p_pass, spec.shots)
    if spec.noise == 0:
        row.checks["honest_pass_is_one"] = abs(p_pass - 1) <= 1e-10
    return row


def _run_mbqc(spec: ExperimentSpec) -> ReportRow:
    """Full verifier on a compiled circuit.

    The circuit's maximum acceptance ``c`` is computed exactly. When ``c`` is
    below the requested completeness ``a`` the instance is treated as a
    no-instance with ``b = c`` and the soundness bound is checked; otherwise
    ``c`` is the completeness and the honest-acceptance bound is checked.
    """
    if spec.circuit is None:
        raise InputError("mbqc needs --circuit")
    circuit = load_circuit(spec.circuit)
    try:
        pattern = mbqc.compile(circuit)
    except mbqc.CircuitError as exc:
        raise InputError(str(exc)) from None
    _check_size(pattern.graph.n_total, qs.MAX_QUBITS, "compiled pattern")
    base = spec.params or proto.ProtocolParams()
    witness = resolve_state(spec.witness, circuit.n_witness)
    c_max = mbqc.max_accept_probability(circuit)
    no_instance = c_max < base.a
    try:
        params = (replace_params(base, b=c_max) if no_instance else replace_params(base, a=c_max))
    except proto.ProtocolError as exc:
        raise InputError(f"{spec.circuit}: {exc}") from None
    q_star = _clamped_q_star(params)
    q = spec.q if spec.q is not None else q_star
    params = params.with_q(q)

    state = add_noise(mbqc.honest_prover_state(pattern, witness), spec.noise)
    p_circ = mbqc.exact_accept_probability(pattern, state)
    p_pass = gs.exact_pass_probability(pattern.graph, state)
    row = ReportRow(spec.experiment_id, "mbqc", Path(spec.circuit).name, q=q, epsilon=params.epsilon,
                    a=params.a, b=params.b, noise=spec.noise, p_pass=p_pass,
                    p_acc=q * p_circ + (1 - q) * p_pass, q_star=q_star)
    row.alpha, row.beta1, row.beta2 = proto.alpha(params), proto.beta1(params), proto.beta2(params)
    row.delta1, row.delta2 = proto.delta1(params), proto.delta2(params)
    if spec.noise == 0:
        direct = mbqc.circuit_accept_probability(circuit, witness)
        row.checks["pattern_matches_circuit"] = abs(p_circ - direct) <= 1e-9
        row.checks["honest_pass_is_one"] = abs(p_pass - 1) <= 1e-10
    if pattern.graph.n_total <= DENSE_ORACLE_QUBITS:
        op = proto.acceptance_operator(pattern, q)
        row.lambda_max, _ = proto.optimal_cheat(op)
        row.checks["operator_matches_branches"] = abs(proto.exact_acceptance(op, state) - row.p_acc) <= 1e-10
        if no_instance:
            row.checks["lambda_max_le_bound"] = row.lambda_max <= proto.soundness_bound(params) + 1e-9
        else:
            row.checks["lambda_max_ge_alpha"] = row.lambda_max >= row.alpha - 1e-9

    counts = run_chunked(
        lambda n, rng: proto.sample_verify_count(pattern, params, state, n, rng),
        spec.shots, spec.seed, STREAM_MBQC, spec.workers,
    )
    rate = sum(counts) / spec.shots
    row.mc_rate, row.mc_std_error, row.shots = rate, binomial_sigma(rate, spec.shots), spec.shots
    row.checks["mc_within_4sigma"] = within_sigma(rate, row.p_acc, spec.shots)
    return row


def replace_params(p: proto.ProtocolParams, **changes) -> proto.ProtocolParams:
    return dataclasses.replace(p, **changes)


def _clamped_q_star(p: proto.ProtocolParams) -> float:
    """Balancing q, capped at 1 where the closed form leaves [0, 1]."""
    try:
        return min(proto.optimal_q(p), 1.0)
    except proto.ProtocolError:
        return 1.0


def _lh_instance(spec: ExperimentSpec):
    if spec.hamiltonian is None:
        raise InputError(f"{spec.protocol} needs --hamiltonian")
    h = load_hamiltonian(spec.hamiltonian)
    _check_size(h.n, lh.MAX_DENSE_QUBITS, "hamiltonian")
    try:
        ens = lh.assemble_ensemble(h)
    except lh.HamiltonianError as exc:
        raise InputError(str(exc)) from None
    e0, ground = lh.ground_energy_exact(ens)
    state = add_noise(resolve_state(spec.witness, h.n, default="ground", ground=ground), spec.noise)
    return h, ens, e0, state


def _run_lh(spec: ExperimentSpec) -> ReportRow:
    h, ens, e0, state = _lh_instance(spec)
    T = ens.total_weight
    energy = qs.expectation_matrix(state, ens.hamiltonian())
    p_acc = lh.exact_acceptance(state, ens)
    row = ReportRow(spec.experiment_id, "lh", spec.hamiltonian, energy=energy, p_acc=p_acc)
    row.checks["acceptance_matches_energy"] = abs(p_acc - lh.acceptance_from_energy(energy, T)) <= 1e-10
    promise = spec.promise
    if promise is None:
        no = lh.no_instance(ens)
        e_b, _ = lh.ground_energy_exact(no)
        promise = lh.EnergyPromise(e0, e_b, oracle_generated=True)
        no_max = lh.exact_acceptance(lh.ground_energy_exact(no)[1], no)
        row.checks["no_instance_below_bound"] = no_max <= lh.no_acceptance_bound(no, e_b) + 1e-10
        if energy <= promise.e_a + 1e-12:
            row.checks["measured_gap_ge_bound"] = p_acc - no_max >= lh.lh_gap(ens, promise) - 1e-10
    else:
        row.checks["promise_holds"] = e0 <= promise.e_a + 1e-12 or e0 >= promise.e_b - 1e-12
        if e0 >= promise.e_b - 1e-12:
            row.checks["no_acc_le_bound"] = (
                lh.exact_acceptance(lh.ground_energy_exact(ens)[1], ens)
                <= lh.no_acceptance_bound(ens, promise.e_b) + 1e-10
            )
    row.oracle_promise = promise.oracle_generated
    row.gap_bound = lh.lh_gap(ens, promise)
    if energy <= promise.e_a + 1e-12:
        row.checks["yes_acc_ge_bound"] = p_acc >= lh.yes_acceptance_bound(ens, promise.e_a) - 1e-10
    rs = run_chunked(lambda n, rng: lh.sample_r(state, ens, n, rng), spec.shots, spec.seed, STREAM_LH, spec.workers)
    r = np.concatenate(rs)
    rate = float(np.mean(r == 0))
    row.mc_rate, row.mc_std_error, row.shots = rate, binomial_sigma(rate, spec.shots), spec.shots
    row.checks["mc_within_4sigma"] = within_sigma(rate, p_acc, spec.shots)
    return row


def _run_energy(spec: ExperimentSpec) -> ReportRow:
    h, ens, e0, state = _lh_instance(spec)
    energy = qs.expectation_matrix(state, ens.hamiltonian())
    rs = run_chunked(lambda n, rng: lh.sample_r(state, ens, n, rng), spec.shots, spec.seed, STREAM_LH, spec.workers)
    est = lh.summarize_r(np.concatenate(rs), ens.total_weight)
    row = ReportRow(spec.experiment_id, "estimate-energy", spec.hamiltonian, energy=energy,
                    energy_estimate=est.energy, energy_std_error=est.std_error, shots=est.shots,
                    p_acc=lh.exact_acceptance(state, ens), mc_rate=1 - est.r_mean)
    err = abs(est.energy - energy)
    row.checks["estimate_within_4se"] = err <= 1e-12 if est.std_error == 0 else err <= SIGMA * est.std_error
    return row


# ---------------------------------------------------------------- gap report & sweep


def gap_report(x_min: int = 4, x_max: int = 100, a: float = 2 / 3, b: float = 1 / 3) -> list[ReportRow]:
    if x_min < 1 or x_max < x_min:
        raise InputError(f"bad |x| range {x_min}..{x_max}")
    rows = []
    for x in range(x_min, x_max + 1):
        p = proto.standard_params(x, a, b)
        row = ReportRow(f"x{x}", "gap-report", x_size=x, q=p.q, epsilon=p.epsilon, a=a, b=b)
        row.q_star = p.q
        row.alpha, row.beta1, row.beta2 = proto.alpha(p), proto.beta1(p), proto.beta2(p)
        row.delta1, row.delta2 = proto.delta1(p), proto.delta2(p)
        row.delta = proto.protocol_gap(p)
        row.gap_bound = proto.gap_lower_bound(x)
        row.checks["q_star_balances"] = abs(row.delta1 - row.delta2) <= 1e-12
        row.checks["delta_matches_closed_form"] = abs(row.delta - row.delta1) <= 1e-12
        if x >= 4:
            row.checks["delta_ge_bound"] = row.delta >= row.gap_bound
        rows.append(row)
    return rows


def crossing_point(qs_grid, d1, d2) -> float | None:
    """Linear interpolation of the first sign change of d1 - d2 on the grid."""
    diff = np.asarray(d1) - np.asarray(d2)
    for i in range(len(diff) - 1):
        if diff[i] == 0:
            return float(qs_grid[i])
        if diff[i] * diff[i + 1] < 0:
            t = diff[i] / (diff[i] - diff[i + 1])
            return float(qs_grid[i] + t * (qs_grid[i + 1] - qs_grid[i]))
    if len(diff) and diff[-1] == 0:
        return float(qs_grid[-1])
    return None


def sweep(
    q_values=(), eps_values=(), x_values=(), noise_values=(),
    a: float = 2 / 3, b: float = 1 / 3,
    graph: str | None = None, circuit: str | None = None, witness: str | None = None,
) -> list[ReportRow]:
    """Cross-product evaluation of the gap surfaces and of noisy acceptance.

    ``q`` x ``epsilon`` rows carry Delta_1/Delta_2 and, per epsilon, the
    interpolated crossing versus q*; ``|x|`` rows use the standard settings;
    ``noise`` rows (with a graph or circuit) track exact p_pass, which must not
    increase with the mixing weight.
    """
    q_values, eps_values = list(q_values), list(eps_values)
    x_values, noise_values = list(x_values), list(noise_values)
    if not (q_values and eps_values) and not x_values and not noise_values:
        raise InputError("empty sweep grid")
    rows: list[ReportRow] = []
    if q_values and eps_values:
        grid = sorted(q_values)
        for eps in eps_values:
            d1s, d2s = [], []
            for q in grid:
                p = proto.ProtocolParams(q=q, epsilon=eps, a=a, b=b)
                d1s.append(proto.delta1(p))
                d2s.append(proto.delta2(p))
                rows.append(ReportRow(f"q{q}_e{eps}", "sweep-gap", q=q, epsilon=eps, a=a, b=b,
                                      alpha=proto.alpha(p), beta1=proto.beta1(p), beta2=proto.beta2(p),
                                      delta1=d1s[-1], delta2=d2s[-1]))
            try:
                q_star = proto.optimal_q(proto.ProtocolParams(q=0, epsilon=eps, a=a, b=b))
            except proto.ProtocolError:
                q_star = None
            cross = crossing_point(grid, d1s, d2s)
            row = ReportRow(f"cross_e{eps}", "sweep-crossing", epsilon=eps, a=a, b=b, q_star=q_star, q=cross)
            if q_star is not None and grid[0] <= q_star <= grid[-1]:
                row.checks["crossing_at_q_star"] = cross is not None and abs(cross - q_star) <= 1e-9
            rows.append(row)
    for x in x_values:
        rows.extend(r for r in gap_report(x, x, a, b))
    if noise_values:
        rows.extend(_noise_rows(sorted(noise_values), graph, circuit, witness))
    return rows


def _noise_rows(noise_values, graph, circuit, witness) -> list[ReportRow]:
    if circuit is not None:
        c = load_circuit(circuit)
        pattern = mbqc.compile(c)
        g = pattern.graph
        base = mbqc.honest_prover_state(pattern, resolve_state(witness, c.n_witness))
        name = Path(circuit).name
    elif graph is not None:
        g = load_graph(graph)
        w = resolve_state(witness, len(g.v2)) if g.v2 else None
        base = gs.coupled_state(g, w) if g.v2 else gs.graph_state(g)
        name = Path(graph).name
    else:
        raise InputError("noise sweep needs --graph or --circuit")
    rows, previous = [], None
    for noise in noise_values:
        p = gs.exact_pass_probability(g, add_noise(base, noise))
        row = ReportRow(f"noise{noise}", "sweep-noise", name, noise=noise, p_pass=p)
        if previous is not None:
            row.checks["p_pass_non_increasing"] = p <= previous + 1e-12
        previous = p
        rows.append(row)
    return rows


def q_affine_rows(pattern: mbqc.MeasurementPattern, state: QuantumState, q_values) -> list[ReportRow]:
    """Exact acceptance along q for a fixed state; must be affine in q."""
    p_circ = mbqc.exact_accept_probability(pattern, state)
    p_pass = gs.exact_pass_probability(pattern.graph, state)
    return [
        ReportRow(f"q{q}", "sweep-q", q=q, p_acc=q * p_circ + (1 - q) * p_pass, p_pass=p_pass)
        for q in q_values
    ]


def parse_grid(text: str | None) -> list[float]:
    """``"0,0.1,0.5"`` or ``"start:stop:count"`` (inclusive linspace)."""
    if not text:
        return []
    try:
        if ":" in text:
            start, stop, count = text.split(":")
            return [float(v) for v in np.linspace(float(start), float(stop), int(count))]
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise InputError(f"cannot parse grid {text!r}") from None


def product_grid(**axes) -> list[dict]:
    keys = [k for k, v in axes.items() if v]
    return [dict(zip(keys, combo)) for combo in itertools.product(*(axes[k] for k in keys))]
