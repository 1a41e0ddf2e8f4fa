"""Acceptance criteria, one test each; every test prints a single PASS/FAIL line.

Run standalone with ``python tests/test_acceptance.py`` for just the summary.
"""

from __future__ import annotations

import time

import numpy as np
import pytest

from qmaverify import graphstate as gs
from qmaverify import harness as hx
from qmaverify import lh
from qmaverify import mbqc
from qmaverify import protocol as proto
from qmaverify import quantumstate as qs
from qmaverify.graphstate import VerificationGraph

SEED = 1234


def five_graphs() -> dict[str, VerificationGraph]:
    return {
        "path-4": gs.path_graph(4),
        "4-cycle": gs.cycle_graph(4),
        "2x3 grid": gs.grid_graph(2, 3),
        "grid + 2 witnesses": gs.grid_graph(2, 3, witness_rows=(0, 1)),
        "star-5": gs.star_graph(5),
    }


def report(number: int, ok: bool, detail: str) -> None:
    print(f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}")


# ---------------------------------------------------------------- criteria


def criterion_1():
    rng = np.random.default_rng(SEED)
    start = time.perf_counter()
    worst_exact, rates = 1.0, []
    for name, g in five_graphs().items():
        witness = qs.random_state(len(g.v2), "pure", rng) if g.v2 else None
        state = gs.coupled_state(g, witness)
        worst_exact = min(worst_exact, gs.exact_pass_probability(g, state))
        rates.append(gs.sample_pass_count(g, state, 10_000, rng) / 10_000)
    elapsed = time.perf_counter() - start
    ok = abs(worst_exact - 1) <= 1e-10 and all(r == 1.0 for r in rates) and elapsed < 10
    return ok, f"min exact p_pass={worst_exact:.15f}, sampled rates={rates}, {elapsed:.2f}s"


def criterion_2():
    worst = 0.0
    for g in five_graphs().values():
        worst = max(worst, float(np.max(np.abs(gs.stabilizer_projector(g) - gs.stabilizer_average(g)))))
    return worst <= 1e-12, f"max entrywise deviation {worst:.2e} over all five graphs"


def criterion_3():
    rng = np.random.default_rng(SEED + 3)
    layouts = [
        VerificationGraph([0], [1], [(0, 1)]),
        VerificationGraph([0, 1], [2], [(0, 1), (1, 2)]),
        VerificationGraph([0, 1, 2], [3], [(0, 1), (1, 2), (2, 3)]),
        VerificationGraph([0, 1, 2], [3, 4], [(0, 1), (1, 2), (0, 3), (2, 4)]),
        gs.grid_graph(2, 2, witness_rows=(0,)),
    ]
    worst_margin, failures = np.inf, 0
    for i in range(200):
        g = layouts[i % len(layouts)]
        kind = i % 4
        if kind == 0:
            rho = qs.random_state(g.n_total, "pure", rng)
        elif kind == 1:
            rho = qs.random_state(g.n_total, "mixed", rng, rank=int(rng.integers(1, 4)))
        else:
            # near-honest states probe the small-epsilon end of the bound
            honest = gs.coupled_state(g, qs.random_state(len(g.v2), "mixed", rng))
            noise = qs.random_state(g.n_total, "pure" if kind == 2 else "mixed", rng)
            w = float(rng.uniform(0, 0.3))
            rho = qs.mix([honest.to_mixed(), noise.to_mixed()], [1 - w, w])
        d = gs.closest_honest_state_bound(g, rho)
        eps = 1 - gs.exact_pass_probability(g, rho)
        margin = np.sqrt(2 * max(eps, 0.0)) + 1e-9 - d.distance
        worst_margin = min(worst_margin, margin)
        failures += margin < 0
    return failures == 0, f"200 states, {failures} violations, smallest slack {worst_margin:.3e}"


def criterion_4():
    worst_balance, worst_bound_slack = 0.0, np.inf
    for x in range(4, 1001):
        p = proto.standard_params(x)
        worst_balance = max(worst_balance, abs(proto.delta1(p) - proto.delta2(p)))
        worst_bound_slack = min(worst_bound_slack, proto.protocol_gap(p) - proto.gap_lower_bound(x))
    p4 = proto.standard_params(4)
    q_err = abs(p4.q - 3 / 43)
    d_err = abs(proto.protocol_gap(p4) - 1 / 172)
    ok = worst_balance <= 1e-12 and worst_bound_slack >= 0 and q_err <= 1e-12 and d_err <= 1e-12
    return ok, (f"|D1-D2| <= {worst_balance:.1e}, min(D - 1/48x^2) = {worst_bound_slack:.3e}, "
                f"|q*-3/43| = {q_err:.1e}, |D-1/172| = {d_err:.1e}")


def criterion_5():
    circuit = hx.toy_no_circuit()
    pattern = mbqc.compile(circuit)
    b = mbqc.max_accept_probability(circuit)
    shape_ok = (pattern.graph.N == 4 and len(pattern.graph.v2) == 1 and abs(b - 0.5) <= 1e-12)
    eps_values = (0.3, 0.2, 0.1, 0.05, 0.02)
    lines, ok = [], shape_ok
    for eps in eps_values:
        base = proto.ProtocolParams(epsilon=eps, b=0.5)
        # q* exceeds 1 for the two largest epsilons; the computation branch then always runs
        q = min(proto.optimal_q(base), 1.0)
        lam, _ = proto.optimal_cheat(proto.acceptance_operator(pattern, q))
        bound = min(proto.soundness_bound(proto.ProtocolParams(q=q, epsilon=e, b=0.5)) for e in eps_values)
        ok = ok and lam <= bound + 1e-9
        lines.append(f"eps={eps}: q={q:.4f} lam={lam:.4f} <= {bound:.4f}")
    return ok, f"b={b:.12f}, |V1|={pattern.graph.N}; " + "; ".join(lines)


def criterion_6():
    rng = np.random.default_rng(SEED + 6)
    shapes = [(1, 0), (1, 1), (2, 0)]
    worst_fid, worst_z, shots = 1.0, 0.0, 100_000
    for i in range(50):
        c = mbqc.random_circuit(rng, *shapes[i % 3], n_gates=int(rng.integers(1, 6)))
        witness = qs.random_state(c.n_witness, "pure", rng)
        pattern = mbqc.compile(c)
        state = mbqc.honest_prover_state(pattern, witness)
        target = mbqc.apply_circuit(c, mbqc.circuit_input(c, witness))
        for _, outcomes, post in mbqc.branch_outputs(pattern, state):
            worst_fid = min(worst_fid, qs.fidelity(mbqc.corrected_output(pattern, outcomes, post), target))
        p = mbqc.circuit_accept_probability(c, witness)
        rate = mbqc.sample_accept_count(pattern, state, shots, rng) / shots
        sigma = np.sqrt(p * (1 - p) / shots)
        worst_z = max(worst_z, abs(rate - p) / sigma if sigma > 0 else (0.0 if rate == p else np.inf))
    perfect = mbqc.compile(hx.qma1_circuit())
    honest = mbqc.honest_prover_state(perfect, qs.basis_state("1"))
    qma1_rate = proto.sample_verify_count(perfect, proto.ProtocolParams(q=1.0, a=1.0), honest, shots, rng) / shots
    ok = worst_fid >= 1 - 1e-9 and worst_z <= 4 and qma1_rate == 1.0
    return ok, f"min branch fidelity {worst_fid:.15f}, max |z| {worst_z:.2f}, QMA1 rate {qma1_rate}"


def criterion_7():
    rng = np.random.default_rng(SEED + 7)
    details, ok = [], True
    for name in ("zz", "x+zz", "tfim4", "heisenberg4"):
        h = lh.BUILTINS[name]()
        ens = lh.assemble_ensemble(h)
        T = ens.total_weight
        recon = float(np.max(np.abs(ens.hamiltonian() - h.dense())))
        rel_err = 0.0
        for _ in range(20):
            s = qs.random_state(h.n, "mixed", rng)
            energy = qs.expectation_matrix(s, h.dense())
            rel_err = max(rel_err, abs(lh.exact_acceptance(s, ens) - (1 - (energy + T) / (2 * T))))
        e0, ground = lh.ground_energy_exact(h)
        worst_se = 0.0
        for s in (ground, qs.random_state(h.n, "pure", rng)):
            est = lh.estimate_energy(s, ens, 100_000, rng)
            exact = qs.expectation_matrix(s, h.dense())
            err = abs(est.energy - exact)
            worst_se = max(worst_se, err / est.std_error if est.std_error > 0 else (0.0 if err <= 1e-12 else np.inf))
        no = lh.no_instance(ens)
        e_b, no_ground = lh.ground_energy_exact(no)
        gap = lh.exact_acceptance(ground, ens) - lh.exact_acceptance(no_ground, no)
        bound = lh.lh_gap(ens, lh.EnergyPromise(e0, e_b))
        row_ok = recon <= 1e-10 and rel_err <= 1e-10 and worst_se <= 4 and gap >= bound - 1e-12
        ok = ok and row_ok
        details.append(f"{name}: recon {recon:.0e}, accept err {rel_err:.0e}, est {worst_se:.2f} se, "
                       f"gap {gap:.4f} >= {bound:.4f}")
    _, g = lh.ground_energy_exact(lh.x_plus_zz_toy())
    p = lh.exact_acceptance(g, lh.assemble_ensemble(lh.x_plus_zz_toy()))
    value_ok = abs(p - (0.5 + np.sqrt(2) / 4)) <= 1e-10
    details.append(f"X0+Z0Z1 ground acceptance {p:.12f}")
    return ok and value_ok, "; ".join(details)


def criterion_8():
    h = lh.x_plus_zz_toy()
    _, ground = lh.ground_energy_exact(h)
    p = lh.exact_acceptance(ground, lh.assemble_ensemble(h))
    return p < 1, f"ground-state acceptance {p:.12f} < 1"


def criterion_9():
    specs = [
        hx.ExperimentSpec("stab-only", graph="grid2x3w2", witness="random:5", noise=0.05, shots=12_000, seed=77),
        hx.ExperimentSpec("mbqc", circuit="toy-no", witness="plus", shots=12_000, seed=77),
        hx.ExperimentSpec("lh", hamiltonian="heisenberg4", shots=12_000, seed=77),
        hx.ExperimentSpec("estimate-energy", hamiltonian="tfim4", shots=12_000, seed=77),
    ]

    def render(workers: int) -> str:
        rows = []
        for spec in specs:
            spec.workers = workers
            rows += hx.run(spec)
        return hx.to_csv(rows)

    first, second, parallel = render(1), render(1), render(4)
    ok = first == second == parallel
    return ok, f"{len(first)} bytes; serial repeat identical={first == second}, 4 workers identical={first == parallel}"


CRITERIA = {i: globals()[f"criterion_{i}"] for i in range(1, 10)}


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, capsys):
    ok, detail = CRITERIA[number]()
    with capsys.disabled():
        print()
        report(number, ok, detail)
    assert ok, detail


if __name__ == "__main__":
    for number, fn in CRITERIA.items():
        report(number, *fn())
