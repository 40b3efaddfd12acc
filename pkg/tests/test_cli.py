"""End-to-end CLI runs over temporary document files."""

import json

import pytest

from opcsp.cli import dispatch
from opcsp.csp_core import load_instance, make_instance, serialize_instance
from opcsp.gap_instances import magic_square, pauli_fixture
from opcsp.operators import OperatorAssignment, operator_assignment_to_json


@pytest.fixture()
def magic_path(tmp_path):
    path = tmp_path / "magic.inst"
    path.write_text(serialize_instance(magic_square()))
    return str(path)


@pytest.fixture()
def pauli_path(tmp_path):
    path = tmp_path / "pauli.ops"
    fixture = OperatorAssignment(4, pauli_fixture())
    path.write_text(operator_assignment_to_json(fixture))
    return str(path)


def unsat_two_unary(tmp_path):
    inst = make_instance(
        2, ["x"], [(("x",), "only0"), (("x",), "only1")],
        {"only0": [(0,)], "only1": [(1,)]},
    )
    path = tmp_path / "conflict.inst"
    path.write_text(serialize_instance(inst))
    return str(path)


def test_solve_magic_square(magic_path):
    result = dispatch(["solve", magic_path])
    assert result.exit_code == 1
    assert result.stdout.strip() == "UNSAT (512 assignments)"


def test_solve_satisfiable(tmp_path):
    inst = make_instance(2, ["x", "y"], [(("x", "y"), "neq")], {"neq": [(0, 1), (1, 0)]})
    path = tmp_path / "sat.inst"
    path.write_text(serialize_instance(inst))
    result = dispatch(["solve", str(path)])
    assert result.exit_code == 0
    assert result.stdout.splitlines()[0] == "SAT"
    assert "x = 0" in result.stdout


def test_slac_magic_square(magic_path, tmp_path):
    trace = tmp_path / "trace.json"
    result = dispatch(["slac", magic_path, "--trace", str(trace)])
    assert result.exit_code == 0
    assert result.stdout.splitlines()[0] == "SLAC-consistent; domains full"
    parsed = json.loads(trace.read_text())
    assert parsed["consistent"] is True


def test_slac_refuted(tmp_path):
    path = unsat_two_unary(tmp_path)
    result = dispatch(["slac", path])
    assert result.exit_code == 1
    assert result.stdout.startswith("SLAC-refuted")


def test_verify_ops_fixture(magic_path, pauli_path):
    result = dispatch(["verify-ops", magic_path, pauli_path])
    assert result.exit_code == 0
    assert "verdict: SATISFYING" in result.stdout


def test_verify_ops_violating(magic_path, tmp_path):
    import numpy as np

    ident = OperatorAssignment(4, {f"x{i}": np.eye(4) for i in range(1, 10)})
    path = tmp_path / "ident.ops"
    path.write_text(operator_assignment_to_json(ident))
    result = dispatch(["verify-ops", magic_path, str(path)])
    assert result.exit_code == 1
    assert "verdict: VIOLATING" in result.stdout


def test_audit_not_applicable(magic_path):
    result = dispatch(["audit", magic_path])
    assert result.exit_code == 2
    assert "not applicable" in result.stderr


def test_audit_build_and_check(tmp_path):
    path = unsat_two_unary(tmp_path)
    cert_path = tmp_path / "cert.json"
    result = dispatch(["audit", path, "--out", str(cert_path)])
    assert result.exit_code == 0, result.stderr
    assert "certified" in result.stderr
    # the same certificate comes out of a previously exported trace
    trace = tmp_path / "trace.json"
    assert dispatch(["slac", path, "--trace", str(trace)]).exit_code == 1
    via_trace = dispatch(["audit", path, "--trace", str(trace)])
    assert via_trace.exit_code == 0
    assert via_trace.stdout.strip() == cert_path.read_text().strip()
    check = dispatch(["audit", path, "--check", str(cert_path)])
    assert check.exit_code == 0
    assert check.stdout.strip() == "ACCEPT"
    # tamper: wrong instance
    other = tmp_path / "other.inst"
    other.write_text(serialize_instance(magic_square()))
    mismatch = dispatch(["audit", str(other), "--check", str(cert_path)])
    assert mismatch.exit_code == 1
    assert mismatch.stdout.startswith("REJECT")


def test_poly_command(magic_path):
    result = dispatch(["poly", magic_path, "--rel", "Rminus"])
    assert result.exit_code == 0
    lines = result.stdout.splitlines()
    assert lines[0] == "P[Rminus] d=2 arity=3"
    assert "(1,1,1): -1" in result.stdout


def test_gen_magic_square_round_trip(tmp_path):
    out = tmp_path / "magic.inst"
    result = dispatch(["gen", "magic-square", "--out", str(out)])
    assert result.exit_code == 0
    assert load_instance(out.read_text()) == magic_square()


def test_gen_linsys(tmp_path):
    eqs = tmp_path / "eqs.txt"
    eqs.write_text("x1 + x2 + x3 = 1\n")
    result = dispatch(["gen", "linsys", "--p", "2", "--file", str(eqs)])
    assert result.exit_code == 0
    inst = load_instance(result.stdout)
    assert inst.d == 2 and len(inst.constraints) == 1


def test_reduce_collapse_with_transport(tmp_path):
    inst = make_instance(
        2,
        ["x", "y"],
        [(("x", "y"), "="), (("x",), "one")],
        {"=": [(0, 0), (1, 1)], "one": [(1,)]},
    )
    path = tmp_path / "eq.inst"
    path.write_text(serialize_instance(inst))
    ops_in = tmp_path / "in.ops"
    from opcsp.operators import embed_classical

    ops_in.write_text(operator_assignment_to_json(embed_classical([{"x": 1, "y": 1}], 2)))
    out_inst = tmp_path / "out.inst"
    ops_out = tmp_path / "out.ops"
    result = dispatch(
        [
            "reduce", "collapse", str(path),
            "--out", str(out_inst),
            "--transport-ops", str(ops_in), str(ops_out),
        ]
    )
    assert result.exit_code == 0, result.stderr
    collapsed = load_instance(out_inst.read_text())
    assert collapsed.variables == ("x",)
    carried = json.loads(ops_out.read_text())
    assert set(carried["assign"]) == {"x"}


def test_reduce_restrict_cli(tmp_path):
    inst = make_instance(2, ["x", "y"], [(("x", "y"), "neq")], {"neq": [(0, 1), (1, 0)]})
    path = tmp_path / "inst.json"
    path.write_text(serialize_instance(inst))
    result = dispatch(["reduce", "restrict", str(path), "--image", "0,2", "--dto", "4"])
    assert result.exit_code == 0, result.stderr
    mapped = load_instance(result.stdout)
    assert mapped.d == 4
    assert mapped.language["neq"].tuples == frozenset({(0, 2), (2, 0)})


def test_reduce_factor_cli(tmp_path):
    inst = make_instance(2, ["x", "y"], [(("x", "y"), "eq2")], {"eq2": [(0, 0), (1, 1)]})
    path = tmp_path / "inst.json"
    path.write_text(serialize_instance(inst))
    result = dispatch(["reduce", "factor", str(path), "--classes", "0,2|1,3"])
    assert result.exit_code == 0, result.stderr
    mapped = load_instance(result.stdout)
    assert mapped.d == 4
    assert (0, 2) in mapped.language["eq2"].tuples


def test_reduce_gadget_cli(tmp_path):
    rels = {"neq": [(0, 1), (1, 0)], "eqd": [(0, 0), (1, 1)]}
    inst = make_instance(2, ["a", "b"], [(("a", "b"), "eqd")], rels)
    ipath = tmp_path / "inst.json"
    ipath.write_text(serialize_instance(inst))
    formula = {
        "arity": 2,
        "exists": 1,
        "atoms": [{"rel": "neq", "vars": [0, 2]}, {"rel": "neq", "vars": [2, 1]}],
    }
    fpath = tmp_path / "formula.json"
    fpath.write_text(json.dumps(formula))
    result = dispatch(["reduce", "gadget", str(ipath), "--formula", str(fpath), "--target", "eqd"])
    assert result.exit_code == 0, result.stderr
    mapped = load_instance(result.stdout)
    assert len(mapped.variables) == 3
    assert len(mapped.constraints) == 2


def test_reduce_gadget_transport_cli(tmp_path):
    rels = {"neq": [(0, 1), (1, 0)], "eqd": [(0, 0), (1, 1)]}
    inst = make_instance(2, ["a", "b"], [(("a", "b"), "eqd")], rels)
    ipath = tmp_path / "inst.json"
    ipath.write_text(serialize_instance(inst))
    formula = {
        "arity": 2,
        "exists": 1,
        "atoms": [{"rel": "neq", "vars": [0, 2]}, {"rel": "neq", "vars": [2, 1]}],
    }
    fpath = tmp_path / "formula.json"
    fpath.write_text(json.dumps(formula))
    from opcsp.operators import embed_classical

    ops_in = tmp_path / "in.ops"
    ops_in.write_text(
        operator_assignment_to_json(embed_classical([{"a": 0, "b": 0}, {"a": 1, "b": 1}], 2))
    )
    out_inst = tmp_path / "out.inst"
    ops_out = tmp_path / "out.ops"
    result = dispatch(
        [
            "--seed", "3",
            "reduce", "gadget", str(ipath),
            "--formula", str(fpath), "--target", "eqd",
            "--out", str(out_inst),
            "--transport-ops", str(ops_in), str(ops_out),
        ]
    )
    assert result.exit_code == 0, result.stderr
    from opcsp.operators import operator_assignment_from_json, verify_assignment

    expanded = load_instance(out_inst.read_text())
    carried = operator_assignment_from_json(ops_out.read_text())
    assert verify_assignment(expanded, carried).verdict == "SATISFYING"


def test_reduce_core_cli(tmp_path):
    inst = make_instance(3, ["x"], [(("x",), "b")], {"b": [(0,), (1,)]})
    path = tmp_path / "inst.json"
    path.write_text(serialize_instance(inst))
    result = dispatch(["reduce", "core", str(path)])
    assert result.exit_code == 0, result.stderr
    mapped = load_instance(result.stdout)
    assert mapped.d == 1


def test_reduce_commgadget_and_constants_cli(tmp_path):
    from opcsp.operators import embed_classical, operator_assignment_from_json, verify_assignment

    rels = {
        "tri": [(0, 1, 0), (1, 0, 1)],
        "full": [(a, b) for a in range(2) for b in range(2)],
        "neq": [(0, 1), (1, 0)],
        "c0": [(0,)],
    }
    inst = make_instance(2, ["a", "b", "c"], [(("a", "b", "c"), "tri")], rels)
    path = tmp_path / "inst.json"
    path.write_text(serialize_instance(inst))
    result = dispatch(["reduce", "commgadget", str(path)])
    assert result.exit_code == 0, result.stderr
    padded = load_instance(result.stdout)
    assert len(padded.constraints) == 4

    const_inst = make_instance(
        2, ["a", "b"], [(("a", "b"), "neq"), (("a",), "c0")],
        {"neq": rels["neq"], "c0": rels["c0"]},
    )
    cpath = tmp_path / "const.json"
    cpath.write_text(serialize_instance(const_inst))
    ops_in = tmp_path / "c_in.ops"
    ops_in.write_text(operator_assignment_to_json(embed_classical([{"a": 0, "b": 1}], 2)))
    out_inst = tmp_path / "c_out.inst"
    ops_out = tmp_path / "c_out.ops"
    result = dispatch(
        ["reduce", "constants", str(cpath), "--out", str(out_inst),
         "--transport-ops", str(ops_in), str(ops_out)]
    )
    assert result.exit_code == 0, result.stderr
    reduced = load_instance(out_inst.read_text())
    carried = operator_assignment_from_json(ops_out.read_text())
    assert verify_assignment(reduced, carried).verdict == "SATISFYING"


def test_usage_errors_exit_two(tmp_path):
    assert dispatch(["nonsense"]).exit_code == 2
    missing = dispatch(["solve", str(tmp_path / "missing.inst")])
    assert missing.exit_code == 2
    assert "error:" in missing.stderr
    bad = tmp_path / "bad.inst"
    bad.write_text("{ not json")
    assert dispatch(["solve", str(bad)]).exit_code == 2


def test_seed_reproducibility(magic_path):
    a = dispatch(["--seed", "7", "slac", magic_path])
    b = dispatch(["--seed", "7", "slac", magic_path])
    assert a.stdout == b.stdout and a.exit_code == b.exit_code
