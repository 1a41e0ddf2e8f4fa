from __future__ import annotations

import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import binomial_ok
from qmaverify import graphstate as gs
from qmaverify import pauli
from qmaverify import quantumstate as qs
from qmaverify.graphstate import GraphError, VerificationGraph

SMALL_GRAPHS = {
    "path4": gs.path_graph(4),
    "cycle4": gs.cycle_graph(4),
    "grid2x3": gs.grid_graph(2, 3),
    "grid2x3w2": gs.grid_graph(2, 3, witness_rows=(0, 1)),
    "star5": gs.star_graph(5),
}


@st.composite
def random_graphs(draw, max_v1=4, max_v2=2):
    n1 = draw(st.integers(1, max_v1))
    n2 = draw(st.integers(0, max_v2))
    v1, v2 = list(range(n1)), list(range(n1, n1 + n2))
    pairs = [(a, b) for a, b in itertools.combinations(v1 + v2, 2) if not (a in v2 and b in v2)]
    edges = [e for e in pairs if draw(st.booleans())]
    return VerificationGraph(v1, v2, edges)


class TestGraphValidation:
    def test_overlap_rejected(self):
        with pytest.raises(GraphError):
            VerificationGraph([0, 1], [1])

    def test_self_loop_rejected(self):
        with pytest.raises(GraphError):
            VerificationGraph([0], (), [(0, 0)])

    def test_witness_internal_edge(self):
        with pytest.raises(GraphError):
            VerificationGraph([0], [1, 2], [(1, 2)])
        VerificationGraph([0], [1, 2], [(1, 2)], allow_witness_edges=True)

    def test_unknown_vertex(self):
        with pytest.raises(GraphError):
            VerificationGraph([0], (), [(0, 5)])

    def test_json_roundtrip(self, tmp_path):
        g = SMALL_GRAPHS["grid2x3w2"]
        path = tmp_path / "g.json"
        path.write_text(json.dumps(g.to_json()))
        back = VerificationGraph.load(path)
        assert back.v1 == g.v1 and back.v2 == g.v2
        assert {frozenset(e) for e in back.edges} == {frozenset(e) for e in g.edges}

    def test_grid_witness_layout(self):
        g = SMALL_GRAPHS["grid2x3w2"]
        assert g.N == 6 and len(g.v2) == 2 and g.n_total == 8
        assert len(g.connecting_edges) == 2


class TestGraphState:
    def test_single_vertex(self):
        np.testing.assert_allclose(gs.graph_state(VerificationGraph([0])).data, qs.plus_state(1).data)

    def test_single_edge(self):
        np.testing.assert_allclose(gs.graph_state(gs.path_graph(2)).data, np.array([1, 1, 1, -1]) / 2)

    @pytest.mark.parametrize("name", list(SMALL_GRAPHS))
    def test_generators_stabilize(self, name):
        g = SMALL_GRAPHS[name].resource_only()
        state = gs.graph_state(g)
        for gen in gs.generators(g):
            assert qs.expectation(state, gen) == pytest.approx(1, abs=1e-10)

    @settings(max_examples=25, deadline=None)
    @given(random_graphs(max_v1=8, max_v2=0))
    def test_generators_stabilize_random(self, g):
        state = gs.graph_state(g)
        for gen in gs.generators(g):
            assert abs(qs.expectation(state, gen) - 1) < 1e-10

    def test_coupled_trivial_on_zero(self):
        g = VerificationGraph([0], [1], [(0, 1)])
        out = gs.coupled_state(g, qs.basis_state("0"))
        np.testing.assert_allclose(out.data, qs.tensor(qs.plus_state(1), qs.basis_state("0")).data, atol=1e-12)

    def test_coupled_without_witness_is_graph_state(self):
        g = gs.path_graph(3)
        np.testing.assert_allclose(gs.coupled_state(g).data, gs.graph_state(g).data)
        with pytest.raises(GraphError):
            gs.coupled_state(VerificationGraph([0], [1], [(0, 1)]))


class TestStabilizers:
    def test_path_middle(self):
        g = VerificationGraph(["a", "b", "c"], (), [("a", "b"), ("b", "c")])
        assert gs.stabilizer_generator(g, "b").letters == "ZXZ"

    def test_isolated(self):
        g = VerificationGraph([0, 1])
        assert gs.stabilizer_generator(g, 1).letters == "IX"

    def test_includes_witness_neighbour(self):
        g = VerificationGraph([0], [1], [(0, 1)])
        assert gs.stabilizer_generator(g, 0).letters == "XZ"

    def test_generator_outside_v1(self):
        with pytest.raises(GraphError):
            gs.stabilizer_generator(VerificationGraph([0], [1], [(0, 1)]), 1)

    def test_k_zero_identity(self):
        assert gs.stabilizer_product(gs.path_graph(3), "000").is_identity

    def test_single_edge_k11(self):
        g = gs.path_graph(2)
        s = gs.stabilizer_product(g, "11")
        assert s.letters == "YY"
        gens = [x.to_dense() for x in gs.generators(g)]
        np.testing.assert_allclose(s.to_dense(), gens[0] @ gens[1])

    def test_wrong_length(self):
        with pytest.raises(GraphError):
            gs.stabilizer_product(gs.path_graph(2), "1")

    def test_random_k_on_grid(self, rng):
        g = gs.grid_graph(3, 2)
        state = gs.graph_state(g)
        for _ in range(10):
            k = rng.integers(0, 2, size=g.N)
            s = gs.stabilizer_product(g, k)
            d = s.to_dense()
            np.testing.assert_allclose(d @ d, np.eye(len(d)), atol=1e-12)
            np.testing.assert_allclose(d @ state.data, state.data, atol=1e-12)
            assert all(pauli.commutes(s, gen) for gen in gs.generators(g))

    @pytest.mark.parametrize("name", [n for n, g in SMALL_GRAPHS.items() if g.N <= 4])
    def test_projector_identity(self, name):
        g = SMALL_GRAPHS[name]
        assert np.max(np.abs(gs.stabilizer_projector(g) - gs.stabilizer_average(g))) < 1e-12


class TestPassProbability:
    @pytest.mark.parametrize("name", list(SMALL_GRAPHS))
    def test_honest_is_one(self, name, rng):
        g = SMALL_GRAPHS[name]
        w = qs.random_state(len(g.v2), "pure", rng) if g.v2 else None
        state = gs.coupled_state(g, w) if g.v2 else gs.graph_state(g)
        assert gs.exact_pass_probability(g, state) == pytest.approx(1, abs=1e-10)

    def test_single_vertex_zero_state(self):
        assert gs.exact_pass_probability(VerificationGraph([0]), qs.basis_state("0")) == pytest.approx(0.75)

    def test_maximally_mixed_edge(self):
        assert gs.exact_pass_probability(gs.path_graph(2), qs.maximally_mixed(2)) == pytest.approx(5 / 8)

    @settings(max_examples=25, deadline=None)
    @given(random_graphs(), st.integers(0, 2**32 - 1))
    def test_sum_matches_projector(self, g, seed):
        rho = qs.random_state(g.n_total, "mixed", np.random.default_rng(seed))
        a = gs.exact_pass_probability(g, rho, method="sum")
        b = gs.exact_pass_probability(g, rho, method="projector")
        assert a == pytest.approx(b, abs=1e-10)
        op = gs.pass_operator(g)
        assert a == pytest.approx(np.trace(op @ rho.data).real, abs=1e-10)


class TestSampledTest:
    def test_honest_always_passes(self, rng):
        g = SMALL_GRAPHS["grid2x3w2"]
        state = gs.coupled_state(g, qs.random_state(2, "pure", rng))
        assert gs.sample_pass_count(g, state, 10_000, rng) == 10_000
        assert all(gs.run_stabilizer_test(g, state, rng).passed for _ in range(200))

    def test_zero_state_rate(self, rng):
        g = VerificationGraph([0])
        shots = 100_000
        assert binomial_ok(gs.sample_pass_count(g, qs.basis_state("0"), shots, rng), shots, 0.75, k=3)

    def test_sequential_rate(self, rng):
        g = VerificationGraph([0])
        shots = 4000
        hits = sum(gs.run_stabilizer_test(g, qs.basis_state("0"), rng).passed for _ in range(shots))
        assert binomial_ok(hits, shots, 0.75, k=4)

    def test_k_zero_record(self):
        g = gs.path_graph(2)

        class ZeroRng:
            def __init__(self):
                self.inner = np.random.default_rng(0)

            def integers(self, *args, size=None, **kw):
                return np.zeros(size, dtype=int)

            def random(self):
                return self.inner.random()

        rec = gs.run_stabilizer_test(g, qs.maximally_mixed(2), ZeroRng())
        assert rec.k_bits == "00"
        assert set(rec.per_qubit_bases.values()) == {"skip"}
        assert rec.passed

    def test_sampled_matches_exact_random_state(self, rng):
        g = gs.cycle_graph(3)
        rho = qs.random_state(3, "mixed", rng)
        shots = 50_000
        p = gs.exact_pass_probability(g, rho)
        assert binomial_ok(gs.sample_pass_count(g, rho, shots, rng), shots, p)
        seq_shots = 3000
        seq = sum(gs.run_stabilizer_test(g, rho, rng).passed for _ in range(seq_shots))
        assert binomial_ok(seq, seq_shots, p)

    def test_y_sign_handled(self, rng):
        # s_11 on an edge is YY with +1 sign; honest state must still always pass
        g = gs.path_graph(2)
        s = gs.stabilizer_product(g, "11")
        out = gs.sample_product_outcomes(gs.graph_state(g), s, 1000, rng)
        assert np.all(out == 1)


class TestHonestDistance:
    def test_honest_state(self, rng):
        g = SMALL_GRAPHS["grid2x3w2"]
        d = gs.closest_honest_state_bound(g, gs.coupled_state(g, qs.random_state(2, "pure", rng)))
        assert d.epsilon == pytest.approx(0, abs=1e-10)
        assert d.distance == pytest.approx(0, abs=1e-6)

    def test_noisy_state(self, rng):
        g = VerificationGraph([0, 1], [2], [(0, 1), (1, 2)])
        honest = gs.coupled_state(g, qs.random_state(1, "pure", rng))
        rho = qs.mix([honest.to_mixed(), qs.maximally_mixed(3)], [0.9, 0.1])
        d = gs.closest_honest_state_bound(g, rho)
        assert 0 < d.epsilon < 0.1
        assert d.holds

    @settings(max_examples=40, deadline=None)
    @given(random_graphs(max_v1=3, max_v2=2), st.integers(0, 2**32 - 1), st.sampled_from(["pure", "mixed"]))
    def test_bound_random(self, g, seed, kind):
        rho = qs.random_state(g.n_total, kind, np.random.default_rng(seed))
        d = gs.closest_honest_state_bound(g, rho)
        assert d.epsilon == pytest.approx(1 - gs.exact_pass_probability(g, rho), abs=1e-10)
        assert d.distance <= np.sqrt(2 * d.epsilon) + 1e-9
