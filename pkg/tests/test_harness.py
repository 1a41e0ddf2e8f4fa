from __future__ import annotations

import json

import numpy as np
import pytest

from qmaverify import cli
from qmaverify import harness as hx
from qmaverify import lh
from qmaverify import mbqc
from qmaverify import protocol as proto
from qmaverify import quantumstate as qs
from qmaverify.harness import ExperimentSpec, InputError


class TestSeeding:
    def test_chunk_sizes(self):
        assert hx.chunk_sizes(10, 4) == [4, 4, 2]
        assert hx.chunk_sizes(8, 4) == [4, 4]

    def test_streams_independent_of_workers(self):
        fn = lambda n, rng: rng.integers(0, 1 << 30, size=n)  # noqa: E731
        serial = np.concatenate(hx.run_chunked(fn, 20_000, 7, 1, workers=1))
        parallel = np.concatenate(hx.run_chunked(fn, 20_000, 7, 1, workers=4))
        np.testing.assert_array_equal(serial, parallel)
        other = np.concatenate(hx.run_chunked(fn, 20_000, 7, 2, workers=1))
        assert not np.array_equal(serial, other)

    def test_prefix_stable(self):
        fn = lambda n, rng: rng.random(n)  # noqa: E731
        short = np.concatenate(hx.run_chunked(fn, 5000, 3, 1))
        long = np.concatenate(hx.run_chunked(fn, 9000, 3, 1))
        np.testing.assert_array_equal(short[: hx.CHUNK_SHOTS], long[: hx.CHUNK_SHOTS])


class TestRun:
    def test_stab_honest_grid(self):
        (row,) = hx.run(ExperimentSpec("stab-only", graph="grid2x2", shots=10_000))
        assert row.p_pass == 1.0
        assert row.mc_rate == 1.0 and row.passed

    def test_lh_zz_01(self, tmp_path):
        path = tmp_path / "w.json"
        path.write_text(json.dumps(qs.basis_state("01").to_json()))
        (row,) = hx.run(ExperimentSpec("lh", hamiltonian="zz", witness=str(path), shots=2000))
        assert row.p_acc == pytest.approx(1.0) and row.mc_rate == 1.0
        (est,) = hx.run(ExperimentSpec("estimate-energy", hamiltonian="zz", witness=str(path), shots=2000))
        assert est.energy_estimate == -1.0 and est.energy_std_error == 0.0

    def test_mbqc_toy_rows(self):
        params = proto.ProtocolParams(epsilon=0.1)
        (row,) = hx.run(ExperimentSpec("mbqc", circuit="toy-no", witness="plus", params=params, shots=5000))
        assert row.b == pytest.approx(0.5)
        assert row.lambda_max <= max(row.beta1, row.beta2) + 1e-9
        assert row.passed

    def test_mbqc_perfect_completeness(self):
        (row,) = hx.run(ExperimentSpec("mbqc", circuit="qma1", witness="one", q=1.0, shots=5000))
        assert row.mc_rate == 1.0 and row.p_acc == pytest.approx(1.0)

    def test_promise_user_supplied(self):
        (row,) = hx.run(ExperimentSpec("lh", hamiltonian="x+zz", promise=lh.EnergyPromise(-np.sqrt(2), -1),
                                       shots=1000))
        assert row.oracle_promise is False
        assert row.gap_bound == pytest.approx((np.sqrt(2) - 1) / 4)

    def test_every_mc_has_error_and_shots(self):
        rows = hx.run(ExperimentSpec("stab-only", graph="cycle4", noise=0.2, shots=3000))
        rows += hx.run(ExperimentSpec("lh", hamiltonian="tfim4", shots=3000))
        for r in rows:
            assert r.mc_rate is not None and r.mc_std_error is not None and r.shots == 3000

    def test_noise_reduces_pass(self):
        (row,) = hx.run(ExperimentSpec("stab-only", graph="path4", noise=0.3, shots=2000))
        assert row.p_pass < 1 and row.honest_distance <= row.distance_bound + 1e-9


class TestInputErrors:
    def test_missing_file(self, tmp_path):
        with pytest.raises(InputError, match="not found"):
            hx.run(ExperimentSpec("stab-only", graph=str(tmp_path / "none.json")))

    def test_json_line_diagnostic(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{\n  "v1": [0,\n}')
        with pytest.raises(InputError, match="line 3"):
            hx.load_graph(str(path))

    def test_field_diagnostic(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"n_witness": 1, "gates": [{"g": "J"}], "accept_qubit": 0}))
        with pytest.raises(InputError, match=r"gates\[0\]"):
            hx.load_circuit(str(path))

    def test_zero_shots(self):
        with pytest.raises(InputError):
            ExperimentSpec("stab-only", graph="path4", shots=0)

    def test_size_cap_named(self, tmp_path):
        path = tmp_path / "big.json"
        path.write_text(json.dumps({"v1": list(range(13)), "v2": [], "edges": []}))
        with pytest.raises(InputError, match="cap is 12"):
            hx.run(ExperimentSpec("stab-only", graph=str(path)))

    def test_unknown_protocol(self):
        with pytest.raises(InputError):
            ExperimentSpec("blind")


class TestReports:
    def test_gap_report(self):
        rows = hx.gap_report(4, 100)
        assert len(rows) == 97 and all(r.passed for r in rows)
        assert all(r.delta >= r.gap_bound for r in rows)
        assert rows[0].q_star == pytest.approx(3 / 43) and rows[0].delta == pytest.approx(1 / 172)

    def test_sweep_crossing(self):
        rows = hx.sweep(q_values=hx.parse_grid("0:1:201"), eps_values=[0.1, 1 / 32, 0.01])
        crossings = [r for r in rows if r.protocol == "sweep-crossing"]
        assert len(crossings) == 3
        for r in crossings:
            assert abs(r.q - r.q_star) <= 1e-9

    def test_noise_sweep_monotone(self):
        rows = hx.sweep(noise_values=hx.parse_grid("0:1:6"), graph="grid2x3w2", witness="random:1")
        p = [r.p_pass for r in rows]
        assert p[0] == pytest.approx(1) and all(a >= b - 1e-12 for a, b in zip(p, p[1:]))
        assert all(r.passed for r in rows)

    def test_q_affine(self):
        pattern = mbqc.compile(hx.toy_no_circuit())
        state = qs.random_state(pattern.graph.n_total, "mixed", np.random.default_rng(2))
        rows = hx.q_affine_rows(pattern, state, np.linspace(0, 1, 6))
        acc = np.array([r.p_acc for r in rows])
        np.testing.assert_allclose(np.diff(acc, 2), 0, atol=1e-12)
        op_vals = [proto.exact_acceptance(proto.acceptance_operator(pattern, r.q), state) for r in rows]
        np.testing.assert_allclose(acc, op_vals, atol=1e-10)

    def test_empty_grid(self):
        with pytest.raises(InputError):
            hx.sweep()

    def test_csv_schema_line(self):
        text = hx.to_csv(hx.gap_report(4, 5))
        lines = text.splitlines()
        assert lines[0] == "#schema=1"
        assert lines[1].split(",") == hx.COLUMNS
        assert "np." not in text

    def test_json_schema(self):
        payload = json.loads(hx.to_json(hx.gap_report(4, 5)))
        assert payload["schema"] == 1 and len(payload["rows"]) == 2

    def test_byte_identical(self):
        def once(workers):
            spec = ExperimentSpec("lh", hamiltonian="heisenberg4", shots=20_000, seed=99, workers=workers)
            return hx.to_csv(hx.run(spec))

        assert once(1) == once(1) == once(4)


class TestCli:
    def run(self, capsys, *argv):
        code = cli.main(list(argv))
        out = capsys.readouterr()
        return code, out.out, out.err

    def test_stab_test_ok(self, capsys):
        code, out, _ = self.run(capsys, "stab-test", "--graph", "grid2x2", "--shots", "500")
        assert code == 0 and out.startswith("#schema=1")

    def test_json_output_file(self, capsys, tmp_path):
        target = tmp_path / "r.json"
        code, _, _ = self.run(capsys, "lh-verify", "--hamiltonian", "x+zz", "--promise=-1.4142135623730951,-1",
                              "--shots", "500", "--format", "json", "--out", str(target))
        assert code == 0
        assert json.loads(target.read_text())["rows"][0]["oracle_promise"] is False

    def test_input_error_exit_one(self, capsys):
        code, _, err = self.run(capsys, "stab-test", "--graph", "missing.json")
        assert code == 1 and "not found" in err

    def test_argparse_error_exit_one(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.main(["stab-test"])
        assert exc.value.code == 1

    def test_bound_failure_exit_two(self, capsys):
        # Z0Z1 has ground energy -1, which sits inside the claimed (E_a, E_b) = (-2, -0.5) gap
        code, out, err = self.run(capsys, "lh-verify", "--hamiltonian", "zz", "--promise=-2,-0.5", "--shots", "500")
        assert code == 2 and "promise_holds" in err
        assert "promise_holds=FAIL" in out

    def test_valid_user_promise(self, capsys):
        code, _, _ = self.run(capsys, "lh-verify", "--hamiltonian", "zz", "--promise=-1,0", "--shots", "500")
        assert code == 0

    def test_gap_report_and_sweep(self, capsys):
        code, out, _ = self.run(capsys, "gap-report", "--x-min", "4", "--x-max", "8")
        assert code == 0 and len(out.splitlines()) == 2 + 5
        code, out, _ = self.run(capsys, "sweep", "--q", "0:1:11", "--epsilon", "0.1", "--x", "4,5")
        assert code == 0

    def test_seed_determinism(self, capsys):
        args = ["estimate-energy", "--hamiltonian", "tfim4", "--shots", "9000", "--seed", "5"]
        _, a, _ = self.run(capsys, *args)
        _, b, _ = self.run(capsys, *args, "--workers", "3")
        assert a == b
