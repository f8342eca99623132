import json
import os
import subprocess
import sys

import pytest

from helpers import poly, reference
from pfaffian_tau.cli import EXIT_FAILED, EXIT_INVALID, EXIT_NONCONVERGED, EXIT_OK, main
from pfaffian_tau.drinfeld_sokolov import example_configs, example_problem


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def config(tmp_path):
    def write(cfg, name="cfg.json"):
        path = tmp_path / name
        path.write_text(json.dumps(cfg))
        return str(path)

    return write


@pytest.mark.parametrize("name", ["J1", "J2", "J4"])
def test_ds_tau_json(capsys, config, name):
    code, out, _ = run(capsys, "ds-tau", config(example_configs()[name]), "--output", "json")
    assert code == EXIT_OK
    payload = json.loads(out)
    pb = example_problem(name)
    assert pb.ring.parse(payload["tau_o"]) == poly(reference()[name]["tau"], pb.ring)
    assert payload["exact"] is True


def test_ds_tau_with_widom(capsys, config):
    code, out, _ = run(capsys, "ds-tau", config(example_configs()["J1"]), "--widom", "--output", "json")
    pb = example_problem("J1")
    assert code == EXIT_OK
    assert pb.ring.parse(json.loads(out)["tau_w"]) == poly("(1 - a*t1/4)**4", pb.ring)


def test_ds_tau_text(capsys, config):
    code, out, _ = run(capsys, "ds-tau", config(example_configs()["J4"]))
    assert (code, out) == (EXIT_OK, "tau_O = 1 - 1/2*a*t1\n")


def test_sparse_initial_condition_and_substitution(capsys, config):
    cfg = {
        "algebra": {"series": "B", "rank": 1},
        "parameters": ["a"],
        "times": {"t1": None, "t3": None, "t5": 0},
        "substitute": {"a": 4},
        "initial_condition": [[2, 1, -1, "a"], [3, 2, -1, "a"]],
    }
    code, out, _ = run(capsys, "ds-tau", config(cfg))
    assert (code, out) == (EXIT_OK, "tau_O = 1 - 2*t1 + t1^2\n")


def test_tables_json_q_labels(capsys, config):
    code, out, _ = run(capsys, "tables", config(example_configs()["J2"]), "--output", "json")
    assert code == EXIT_OK
    rows = json.loads(out)["rows"]
    assert [r["q_label"] for r in rows] == ["1/2*Q(2,1)", "-1/2*Q(4,2)"]
    assert [r["tuple"] for r in rows] == [r["tuple"] for r in reference()["J2"]["rows"]]


def test_tables_empty_initial_condition(capsys, config):
    cfg = {"algebra": {"series": "B", "rank": 1}, "X": {}}
    code, out, _ = run(capsys, "tables", config(cfg), "--output", "json")
    assert code == EXIT_OK
    assert json.loads(out)["rows"] == [{"tuple": "(∅,∅,∅)", "weight": 0, "pf_d": "1", "pf_a": "1", "q_label": None}]


def test_qschur(capsys):
    code, out, _ = run(capsys, "qschur", "--partition", "(2,1)")
    assert (code, out) == (EXIT_OK, "Q(2,1) = -2*t3 + 1/6*t1^3\n")


def test_square_check(capsys, config):
    code, out, _ = run(capsys, "square-check", config(example_configs()["J4"]), "--output", "json")
    assert code == EXIT_OK
    assert json.loads(out)["agrees"] is True


def test_algebra_dump(capsys):
    code, out, _ = run(capsys, "algebra", "--series", "D", "--rank", "4")
    data = json.loads(out)
    assert code == EXIT_OK
    assert (data["N"], data["coxeter"], len(data["E"])) == (8, 6, 5)


def test_example(capsys):
    code, out, _ = run(capsys, "example", "J3")
    assert code == EXIT_OK
    assert json.loads(out) == example_configs()["J3"]


@pytest.mark.parametrize(
    "argv",
    [
        ["qschur", "--partition", "(2,2)"],
        ["ds-tau", "/nonexistent/config.json"],
        ["example", "J9"],
        ["algebra", "--series", "C", "--rank", "2"],
        ["nosuchcommand"],
        ["tables"],
    ],
)
def test_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == EXIT_INVALID


def test_non_orthogonal_config_fails_validation(capsys, config):
    cfg = {"algebra": {"series": "B", "rank": 1}, "parameters": ["a"], "initial_condition": [[2, 1, -1, "a"]]}
    code, _, err = run(capsys, "ds-tau", config(cfg))
    assert code == EXIT_INVALID
    assert "orthogonal" in err


def test_bad_json(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert run(capsys, "ds-tau", str(path))[0] == EXIT_INVALID


def test_iso_without_block(capsys, config):
    assert run(capsys, "iso", config({"other": 1}))[0] == EXIT_INVALID


def test_iso_nonconvergence_exit_code(capsys, config):
    # two modes cannot resolve the kernels: residual far above tolerance
    cfg = {"iso": {"theta0": 0.1, "thetat": 0.15, "theta1": 0.2, "thetainf": 0.45, "sigma": 0.35, "M": 1}}
    assert run(capsys, "iso", config(cfg))[0] == EXIT_NONCONVERGED


def test_iso_small_report(capsys, config):
    cfg = {"iso": {"theta0": 0.1, "thetat": 0.15, "theta1": 0.2, "thetainf": 0.45, "sigma": 0.35, "M": 8, "quad_nodes": 128}}
    code, out, _ = run(capsys, "iso", config(cfg), "--output", "json", "--convergence")
    rep = json.loads(out)
    assert code == EXIT_OK
    assert set(rep) >= {"tau_w_sl2", "tau_o_so3", "residual", "exponent", "convergence_table"}
    assert [row["M"] for row in rep["convergence_table"]] == [4, 6, 8]
    assert float(rep["residual"]) <= 1e-6


def test_square_check_failure_exit_code(capsys, config, monkeypatch):
    import pfaffian_tau.cli as cli

    monkeypatch.setattr(cli, "square_check", lambda *a, **k: dict(
        max_weight=1, tau_w=1, tau_o=1, tau_o_squared=1, difference=1, tau_w_exact=True, tau_o_exact=True, agrees=False
    ))
    assert run(capsys, "square-check", config(example_configs()["J1"]))[0] == EXIT_FAILED


def test_negative_weight(capsys, config):
    assert run(capsys, "ds-tau", config(example_configs()["J1"]), "--max-weight", "-1")[0] == EXIT_INVALID


@pytest.mark.parametrize("name", ["J1", "J2", "J4"])
def test_output_is_independent_of_hash_seed(tmp_path, name):
    path = tmp_path / f"{name}.json"
    path.write_text(json.dumps(example_configs()[name]))
    outs = set()
    for seed in ("0", "1", "12345"):
        env = dict(os.environ, PYTHONHASHSEED=seed)
        for sub in (["tables", str(path), "--output", "json"], ["ds-tau", str(path), "--widom"]):
            proc = subprocess.run(
                [sys.executable, "-m", "pfaffian_tau.cli", *sub], env=env, capture_output=True, check=True
            )
            outs.add((tuple(sub[:1]), proc.stdout))
    assert len(outs) == 2
