import csv
import io
import json
import os

import pytest

from otgerase.cli import LANDAUER_COLUMNS, main
from otgerase.erasure import witness_from_promise_k
from otgerase.groups import span
from otgerase.instances import (
    BUILTINS,
    ConfigError,
    builtin,
    load_oracle,
    load_witness,
    oracle_to_dict,
    parse_element,
    save_oracle,
    save_witness,
)


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def report(capsys, *argv):
    code, out, _ = run_cli(capsys, *argv)
    return code, json.loads(out)


class TestInstances:
    def test_names(self):
        assert sorted(BUILTINS) == ["dlog8-a3", "pfa16", "pfa8", "z2z4"]

    def test_promised_k_contains_h(self):
        for name in BUILTINS:
            f = builtin(name)
            assert f.hidden <= f.promise_k

    def test_unknown(self):
        with pytest.raises(ConfigError):
            builtin("pfa9")

    def test_parse_element(self):
        f = builtin("dlog8-a3")
        assert parse_element(f.domain, "3,1").coords == (3, 1)
        assert parse_element(builtin("pfa8").domain, "4").coords == (4,)
        with pytest.raises(ConfigError):
            parse_element(f.domain, "9,1")

    def test_oracle_roundtrip(self, tmp_path):
        for name in BUILTINS:
            f = builtin(name)
            path = tmp_path / f"{name}.json"
            save_oracle(f, path)
            g = load_oracle(path)
            assert g.table == f.table and g.hidden == f.hidden and g.promise_k == f.promise_k

    def test_witness_roundtrip(self, tmp_path):
        f = builtin("pfa16")
        w = witness_from_promise_k(f, f.promise_k)
        save_witness(w, tmp_path / "w.json")
        v = load_witness(tmp_path / "w.json", f.domain)
        assert v.U_G == w.U_G and v.U_S == w.U_S and v.ell == w.ell and v.K == w.K

    def test_malformed_file(self, tmp_path):
        p = tmp_path / "x.json"
        p.write_text("{not json")
        with pytest.raises(ConfigError):
            load_oracle(p)
        p.write_text(json.dumps({"group": "Z8"}))
        with pytest.raises(ConfigError):
            load_oracle(p)


class TestRun:
    def test_brute(self, capsys):
        code, rep = report(capsys, "run", "--instance", "pfa8", "--strategy", "brute", "--seed", "1")
        assert code == 0 and rep["ledger"]["total"] == 3 and rep["schema"] == 1
        assert rep["recovered_subgroup"] == [0, 4]
        assert rep["qubits"] == 6

    def test_side_info(self, capsys):
        code, rep = report(capsys, "run", "--instance", "pfa8", "--strategy", "side-info", "--k-generators", "2", "--seed", "1")
        assert code == 0 and rep["ledger"]["total"] == 1

    @pytest.mark.parametrize("strategy", ["standard", "brute", "side-info", "battery", "simplified"])
    def test_every_strategy_on_dlog(self, capsys, strategy):
        code, rep = report(capsys, "run", "--instance", "dlog8-a3", "--strategy", strategy, "--seed", "2")
        assert code == 0
        assert rep["recovered_subgroup"] == rep["hidden_subgroup"]

    def test_non_coset_constant_oracle(self, capsys, tmp_path):
        d = oracle_to_dict(builtin("pfa8"))
        d["table"][7] = 0
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(d))
        code, _, err = run_cli(capsys, "run", "--oracle-file", str(path), "--seed", "1")
        assert code == 3 and "validation" in err

    def test_factorization_failure(self, capsys, tmp_path):
        f = builtin("pfa8")
        w = witness_from_promise_k(f, span(f.domain, [2]))
        d = {"U_G": list(w.U_G.perm), "U_S": [0, 1, 4, 3, 2, 5, 6, 7], "ell": 1}
        path = tmp_path / "w.json"
        path.write_text(json.dumps(d))
        code, _, _ = run_cli(capsys, "run", "--instance", "pfa8", "--strategy", "side-info", "--witness-file", str(path), "--seed", "1")
        assert code == 4

    def test_config_errors(self, capsys):
        assert run_cli(capsys, "run", "--instance", "pfa8")[0] == 2  # seed missing
        assert run_cli(capsys, "run", "--seed", "1")[0] == 2
        assert run_cli(capsys, "run", "--instance", "pfa8", "--seed", "1", "--shots", "0")[0] == 2
        side = ("run", "--instance", "pfa8", "--strategy", "side-info", "--seed", "1", "--k-generators")
        assert run_cli(capsys, *side, "1,2")[0] == 2
        assert run_cli(capsys, *side, "0")[0] == 2
        assert run_cli(capsys, *side, "4")[0] == 0

    def test_mismatch_exit_code(self, capsys):
        code, rep = report(capsys, "run", "--instance", "pfa16", "--shots", "1", "--seed", "0")
        assert code == (0 if rep["success"] else 1)
        assert code == 1

    def test_csv(self, capsys):
        code, out, _ = run_cli(capsys, "run", "--instance", "z2z4", "--seed", "0", "--format", "csv")
        rows = list(csv.DictReader(io.StringIO(out)))
        assert code == 0 and len(rows) == 8
        assert list(rows[0]) == ["index", "element", "probability", "count"]
        assert sum(int(r["count"]) for r in rows) == 24

    def test_byte_identical_and_atomic(self, capsys, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        main(["run", "--instance", "pfa16", "--strategy", "battery", "--seed", "9", "--out", str(a)])
        main(["run", "--instance", "pfa16", "--strategy", "battery", "--seed", "9", "--out", str(b)])
        assert a.read_bytes() == b.read_bytes()
        assert sorted(os.listdir(tmp_path)) == ["a.json", "b.json"]

    def test_no_partial_file_on_failure(self, capsys, tmp_path):
        out = tmp_path / "r.json"
        main(["run", "--instance", "pfa8", "--strategy", "side-info", "--k-generators", "1,2", "--seed", "1", "--out", str(out)])
        assert not out.exists() and os.listdir(tmp_path) == []


class TestEntangle:
    def test_pfa8(self, capsys):
        code, rep = report(capsys, "entangle", "--instance", "pfa8")
        assert code == 0 and rep["ell_max"] == 2
        assert rep["conditional_entropy"] == pytest.approx(-2)
        assert {row["order"]: row["ell"] for row in rep["k_table"]} == {8: 0, 4: 1, 2: 2}

    def test_dlog(self, capsys):
        assert report(capsys, "entangle", "--instance", "dlog8-a3")[1]["ell_max"] == 3

    def test_constant(self, capsys, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"group": "Z4", "codomain_bits": 1, "table": [1, 1, 1, 1], "hidden_generators": [1]}))
        assert report(capsys, "entangle", "--oracle-file", str(path))[1]["ell_max"] == 0


class TestSimplify:
    def test_pfa8(self, capsys):
        code, rep = report(capsys, "simplify", "--instance", "pfa8", "--seed", "3", "--mode", "open-circuit")
        assert code == 0
        assert rep["qubits"]["savings"] == 2 and rep["qubits"]["physical"] == 4
        assert rep["ledger"]["total"] == 1 and rep["recovered"] == [0, 4]
        assert rep["reduced_table"] == [1, 2, 1, 2]
        assert rep["comparison"]["brute"]["ledger"] == 3


class TestLandauer:
    def test_quantum_single(self, capsys):
        code, out, _ = run_cli(capsys, "landauer", "--n", "1", "--beta-delta", "1", "--mode", "quantum")
        rows = list(csv.DictReader(io.StringIO(out)))
        assert code == 0 and list(rows[0]) == LANDAUER_COLUMNS
        assert float(rows[0]["p"]) == pytest.approx(0.2689414213699951)

    def test_sweep_final_only(self, capsys):
        code, out, _ = run_cli(capsys, "landauer", "--n", "10", "100", "--beta-delta", "0.5", "0.1", "--final-only")
        rows = list(csv.DictReader(io.StringIO(out)))
        assert len(rows) == 4
        assert [(r["n"], r["beta_delta"]) for r in rows] == [("10", "0.5"), ("10", "0.1"), ("100", "0.5"), ("100", "0.1")]

    def test_bad_config(self, capsys):
        assert run_cli(capsys, "landauer", "--n", "0", "--beta-delta", "1")[0] == 2
        assert run_cli(capsys, "landauer", "--n", "3", "--beta-delta", "1", "--p-init", "2")[0] == 2
        assert run_cli(capsys, "landauer", "--n", "20", "--beta-delta", "1", "--mode", "quantum")[0] == 2
