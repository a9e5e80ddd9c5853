from __future__ import annotations

import json
from fractions import Fraction

from chunkwise.cli import main


def run(capsys, *argv) -> tuple[int, str, str]:
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_fan_then_simulate(tmp_path, capsys):
    fan_path = tmp_path / "fan.json"
    code, _, _ = run(capsys, "fan", "-n", "3", "-c", "3/2", "-o", str(fan_path))
    assert code == 0
    code, out, _ = run(capsys, "simulate", "-g", str(fan_path), "-b", "2")
    assert code == 0
    trace = json.loads(out)
    assert trace["total"] == "27/8"
    assert trace["path"][0] == "v0" and trace["path"][-1] == "t"


def test_fan_dot_output(capsys):
    code, out, _ = run(capsys, "fan", "-n", "2", "-c", "2", "--format", "dot")
    assert code == 0
    assert out.startswith("digraph")


def test_chunk_edge_golden(s32_path, capsys):
    code, out, _ = run(
        capsys, "chunk-edge", "-g", str(s32_path), "-e", "u,v", "-b", "2", "-k", "3"
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["chunks"] == ["211/60", "211/60", "209/30"]
    assert payload["report"]["bottleneck"] == "2221/30"
    assert payload["report"]["perceived"] == ["2221/30"] * 3


def test_chunk_edge_k2_golden(s32_path, capsys):
    code, out, _ = run(
        capsys, "chunk-edge", "-g", str(s32_path), "-e", "u,v", "-b", "2", "-k", "2"
    )
    payload = json.loads(out)
    assert payload["chunks"] == ["211/40", "349/40"]
    assert payload["report"]["bottleneck"] == "1551/20"


def test_byte_identical_outputs(s32_path, capsys):
    _, first, _ = run(
        capsys, "chunk-edge", "-g", str(s32_path), "-e", "u,v", "-b", "2", "-k", "3"
    )
    _, second, _ = run(
        capsys, "chunk-edge", "-g", str(s32_path), "-e", "u,v", "-b", "2", "-k", "3"
    )
    assert first == second


def test_chunk_graph_plan_round_trip(s32_path, tmp_path, capsys):
    plan_path = tmp_path / "plan.json"
    code, _, _ = run(
        capsys,
        "chunk-graph",
        "-g",
        str(s32_path),
        "--biases",
        "2",
        "-k",
        "3",
        "-o",
        str(plan_path),
    )
    assert code == 0
    plan = json.loads(plan_path.read_text())
    assert plan["predicted_cost"] == "741/10"
    code, out, _ = run(
        capsys, "simulate", "-g", str(s32_path), "-b", "2", "--plan", str(plan_path)
    )
    assert code == 0
    assert json.loads(out)["total"] == plan["predicted_cost"]


def test_chunk_graph_two_biases(s32_path, capsys):
    code, out, _ = run(
        capsys, "chunk-graph", "-g", str(s32_path), "--biases", "2,10", "-k", "3"
    )
    assert code == 0
    payload = json.loads(out)
    totals = sorted(t["total"] for t in payload["traces"])
    assert totals == ["741/10", "76"]


def test_chunk_graph_single_path(s32_path, capsys):
    code, out, _ = run(
        capsys,
        "chunk-graph",
        "-g",
        str(s32_path),
        "--biases",
        "2,3",
        "-k",
        "3",
        "--single-path",
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["planned_paths"] == [["u", "z", "t"], ["u", "z", "t"]]


def test_split_edge(s32_path, capsys):
    code, out, _ = run(
        capsys,
        "split-edge",
        "-g",
        str(s32_path),
        "-e",
        "u,v",
        "--biases",
        "2,10",
        "-k",
        "3",
    )
    assert code == 0
    payload = json.loads(out)
    assert Fraction(payload["repelled_bottleneck"]) > 76


def test_same_path_edge_infeasible_is_data_not_crash(s32_path, capsys):
    code, out, _ = run(
        capsys,
        "same-path-edge",
        "-g",
        str(s32_path),
        "-e",
        "u,v",
        "--biases",
        "2,3",
        "-k",
        "3",
    )
    assert code == 1
    payload = json.loads(out)
    assert payload["infeasible"] == "same-path"


def test_usage_errors_exit_two(s32_path, capsys, tmp_path):
    assert run(capsys, "chunk-edge", "-g", str(s32_path), "-e", "nope", "-b", "2", "-k", "3")[0] == 2
    assert run(capsys, "simulate", "-g", str(tmp_path / "missing.json"), "-b", "2")[0] == 2
    assert run(capsys, "simulate", "-g", str(s32_path), "-b", "1")[0] == 2
    assert run(capsys, "wat")[0] == 2


def test_verify_suites_pass(capsys):
    code, out, _ = run(
        capsys, "verify", "--suite", "all", "--seed", "7", "--trials", "4", "-k", "3", "-d", "16"
    )
    assert code == 0
    assert out.count("[ok]") == 3


def test_experiment_cost_ratio_csv(capsys):
    code, out, _ = run(
        capsys, "experiment", "cost-ratio", "-b", "2", "-c", "9/8", "-k", "3", "--n-max", "4"
    )
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "n,b,c,k,ratio_num,ratio_den,bound_num,bound_den"
    assert len(lines) == 5
    n, b, c, k, rn, rd, bn, bd = lines[4].split(",")
    assert (n, b, c, k) == ("4", "2", "9/8", "3")
    assert Fraction(int(rn), int(rd)) == Fraction(9, 8) ** 4


def test_experiment_chunks_needed_csv(capsys):
    code, out, _ = run(
        capsys,
        "experiment",
        "chunks-needed",
        "-b",
        "2",
        "-c",
        "2",
        "--n-min",
        "8",
        "--n-max",
        "8",
    )
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[1].split(",")[3] == "4"


def test_decimal_flag_adds_columns(s32_path, capsys):
    _, out, _ = run(
        capsys,
        "chunk-edge",
        "-g",
        str(s32_path),
        "-e",
        "u,v",
        "-b",
        "2",
        "-k",
        "2",
        "--decimal",
    )
    payload = json.loads(out)
    assert payload["report"]["bottleneck_decimal"] == 77.55


def test_golden_output_fixture_matches(s32_path, capsys):
    from conftest import FIXTURES

    _, out, _ = run(
        capsys, "chunk-edge", "-g", str(s32_path), "-e", "u,v", "-b", "2", "-k", "3"
    )
    assert out == (FIXTURES / "golden_chunk_edge_uv_k3.json").read_text()


def test_split_edge_taker_refuses_is_data(s32_path, capsys):
    # bias 10 cannot be persuaded onto (u, v) with three chunks
    code, out, _ = run(
        capsys,
        "split-edge",
        "-g",
        str(s32_path),
        "-e",
        "u,v",
        "--biases",
        "2,10",
        "--taker",
        "2",
        "-k",
        "3",
    )
    assert code == 1
    assert json.loads(out)["infeasible"] == "taker-refuses"


def test_cli_biases_are_order_insensitive(s32_path, capsys):
    _, a, _ = run(capsys, "chunk-graph", "-g", str(s32_path), "--biases", "2,10", "-k", "3")
    _, b, _ = run(capsys, "chunk-graph", "-g", str(s32_path), "--biases", "10,2", "-k", "3")
    assert a == b


def test_pair_plan_round_trip(s32_path, tmp_path, capsys):
    plan_path = tmp_path / "pair.json"
    code, _, _ = run(
        capsys,
        "chunk-graph",
        "-g",
        str(s32_path),
        "--biases",
        "2,10",
        "-k",
        "3",
        "-o",
        str(plan_path),
    )
    assert code == 0
    plan = json.loads(plan_path.read_text())
    _, out2, _ = run(
        capsys, "simulate", "-g", str(s32_path), "-b", "2", "--plan", str(plan_path)
    )
    _, out10, _ = run(
        capsys, "simulate", "-g", str(s32_path), "-b", "10", "--plan", str(plan_path)
    )
    assert json.loads(out2)["total"] == "741/10"
    assert json.loads(out10)["total"] == "76"
    totals = Fraction("741/10") + Fraction(76)
    assert Fraction(plan["predicted_cost"]) == totals


def test_verify_exit_code_on_violation(monkeypatch, capsys):
    import chunkwise.verify as v

    monkeypatch.setitem(
        v.SUITES, "edge-oracle", lambda **kw: (False, ["edge-oracle: forced failure"])
    )
    code, out, _ = run(capsys, "verify", "--suite", "edge-oracle", "--trials", "1")
    assert code == 1
    assert "[FAIL]" in out
