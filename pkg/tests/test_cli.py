import json

import pytest

from conftest import fixture_path
from robustreach.cli import main

S1 = str(fixture_path("s1.json"))
S2 = str(fixture_path("s2.json"))
PALINDROME = str(fixture_path("palindrome.tm"))
MARKER = str(fixture_path("marker.tm"))
IMMEDIATE = str(fixture_path("immediate_accept.tm"))
RIGHT_MOVER = str(fixture_path("right_mover.tm"))
GOLDEN_PGM = fixture_path("golden/s2_x1_n4.pgm")


def run_json(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    assert code == 0, out
    return json.loads(out)


# -- reach ---------------------------------------------------------------------


def test_reach_unreachable(capsys):
    tree = run_json(
        capsys, ["reach", "--system", S2, "--x", "3/4", "--y", "1/4"]
    )
    assert tree["verdict"] == "robustly-unreachable"
    assert tree["witness"] == {"m": 3, "epsExp": 3, "cells": [[5], [6], [7]]}


def test_reach_ball_hit(capsys):
    tree = run_json(
        capsys, ["reach", "--system", S1, "--x", "1", "--y", "1/8", "--p", "4"]
    )
    assert tree["verdict"] == "reached"
    assert tree["steps"] == 3
    assert tree["trajectory"] == [["1"], ["1/2"], ["1/4"], ["1/8"]]


def test_reach_unknown_with_budget_flags(capsys):
    tree = run_json(
        capsys,
        [
            "reach", "--system", S1, "--x", "1", "--y", "0",
            "--max-m", "3", "--max-steps", "16",
        ],
    )
    assert tree["verdict"] == "unknown"
    assert tree["budget"]["maxM"] == 3
    # the simulation never outruns what max-m rounds can use: 2^3 steps
    assert tree["budget"]["stepsSimulated"] == 8
    tree = run_json(
        capsys,
        [
            "reach", "--system", S1, "--x", "1", "--y", "0",
            "--max-m", "3", "--max-steps", "5",
        ],
    )
    assert tree["budget"]["stepsSimulated"] == 5


def test_reach_env_budgets(capsys, monkeypatch):
    monkeypatch.setenv("ROBUSTREACH_MAX_M", "3")
    monkeypatch.setenv("ROBUSTREACH_MAX_STEPS", "5")
    tree = run_json(capsys, ["reach", "--system", S1, "--x", "1", "--y", "0"])
    assert tree["budget"] == {"maxM": 3, "stepsSimulated": 5, "simulationStopped": None}

    # flags beat the environment
    tree = run_json(
        capsys,
        ["reach", "--system", S1, "--x", "1", "--y", "0", "--max-steps", "3"],
    )
    assert tree["budget"]["stepsSimulated"] == 3

    monkeypatch.setenv("ROBUSTREACH_MAX_M", "three")
    assert main(["reach", "--system", S1, "--x", "1", "--y", "0"]) == 1


def test_reach_output_is_deterministic(capsys):
    code = main(["reach", "--system", S2, "--x", "3/4", "--y", "1/4"])
    first = capsys.readouterr().out
    code = main(["reach", "--system", S2, "--x", "3/4", "--y", "1/4"])
    second = capsys.readouterr().out
    assert code == 0
    assert first == second


def test_reach_out_file(tmp_path, capsys):
    out = tmp_path / "verdict.json"
    code = main(
        ["reach", "--system", S2, "--x", "3/4", "--y", "1/4", "--out", str(out)]
    )
    assert code == 0
    assert capsys.readouterr().out == ""
    assert json.loads(out.read_text())["verdict"] == "robustly-unreachable"


def test_reach_rejects_bad_input(capsys):
    assert main(["reach", "--system", S1, "--x", "0.5", "--y", "0"]) == 1
    assert "error:" in capsys.readouterr().err
    assert main(["reach", "--system", "/nowhere.json", "--x", "1", "--y", "0"]) == 1
    assert main(["reach", "--system", S1, "--x", "1,1", "--y", "0"]) == 1


def test_cli_requires_a_command():
    with pytest.raises(SystemExit):
        main([])


# -- delta-decide ----------------------------------------------------------------


def test_delta_decide_both_sides(capsys):
    tree = run_json(
        capsys,
        ["delta-decide", "--system", S1, "--x", "1", "--y", "1/8", "--p", "4", "--n", "2"],
    )
    assert tree == {"verdict": "true-at-eps", "eps": "1/4", "epsExp": 2}

    tree = run_json(
        capsys,
        ["delta-decide", "--system", S2, "--x", "3/4", "--y", "1/4", "--p", "3", "--n", "2"],
    )
    assert tree == {"verdict": "false-at-eps", "eps": "1/16", "epsExp": 4}


# -- witness-check -----------------------------------------------------------------


def test_witness_check_round_trip(tmp_path, capsys):
    verdict_file = tmp_path / "verdict.json"
    assert (
        main(
            ["reach", "--system", S2, "--x", "3/4", "--y", "1/4", "--out", str(verdict_file)]
        )
        == 0
    )
    # the reach output itself is a valid witness file (wrapped form)
    tree = run_json(
        capsys,
        [
            "witness-check", "--system", S2, "--x", "3/4", "--y", "1/4",
            "--witness", str(verdict_file),
        ],
    )
    assert tree["valid"] is True
    assert tree["witness"]["cells"] == [[5], [6], [7]]

    # tamper with it: claim one cell fewer
    doc = json.loads(verdict_file.read_text())
    doc["witness"]["cells"] = [[5], [6]]
    bad_file = tmp_path / "tampered.json"
    bad_file.write_text(json.dumps(doc))
    tree = run_json(
        capsys,
        [
            "witness-check", "--system", S2, "--x", "3/4", "--y", "1/4",
            "--witness", str(bad_file),
        ],
    )
    assert tree["valid"] is False


# -- plot ---------------------------------------------------------------------------


def test_plot_stdout_matches_golden(capsysbinary):
    assert main(["plot", "--system", S2, "--x", "1", "--n", "4"]) == 0
    assert capsysbinary.readouterr().out == GOLDEN_PGM.read_bytes()


def test_plot_out_file_matches_golden(tmp_path):
    out = tmp_path / "plot.pgm"
    assert main(["plot", "--system", S2, "--x", "1", "--n", "4", "--out", str(out)]) == 0
    assert out.read_bytes() == GOLDEN_PGM.read_bytes()


def test_plot_rejects_bad_axes(capsys):
    assert main(["plot", "--system", S2, "--x", "1", "--n", "2", "--axes", "0,0"]) == 1
    assert "error:" in capsys.readouterr().err
    assert main(["plot", "--system", S2, "--x", "1", "--n", "2", "--axes", "zero"]) == 1


# -- machine commands -----------------------------------------------------------------


def test_tm_run(capsys):
    tree = run_json(capsys, ["tm-run", "--machine", PALINDROME, "--word", "0110"])
    assert tree == {"outcome": "accept", "steps": 15}
    tree = run_json(capsys, ["tm-run", "--machine", PALINDROME, "--word", "01"])
    assert tree == {"outcome": "reject", "steps": 4}
    tree = run_json(
        capsys, ["tm-run", "--machine", RIGHT_MOVER, "--word", "0", "--max-steps", "7"]
    )
    assert tree == {"outcome": "running", "steps": 7}


def test_tm_run_rejects_foreign_letters(capsys):
    assert main(["tm-run", "--machine", PALINDROME, "--word", "abc"]) == 1
    assert "error:" in capsys.readouterr().err


def test_tm_perturbed(capsys):
    # the marker machine rejects the empty word exactly, but one cell of
    # fog is enough to make it accept
    tree = run_json(
        capsys,
        ["tm-perturbed", "--machine", MARKER, "--word", "", "--mode", "space", "--n", "1"],
    )
    assert tree == {"accepts": True, "mode": "space", "n": 1}
    tree = run_json(
        capsys,
        ["tm-perturbed", "--machine", PALINDROME, "--word", "01", "--mode", "time", "--n", "4"],
    )
    assert tree == {"accepts": False, "mode": "time", "n": 4}
    tree = run_json(
        capsys,
        ["tm-perturbed", "--machine", PALINDROME, "--word", "01", "--mode", "time", "--n", "3"],
    )
    assert tree["accepts"] is True


def test_tm_length(capsys):
    tree = run_json(
        capsys, ["tm-length", "--machine", PALINDROME, "--word", "", "--bound", "6"]
    )
    assert tree == {
        "acceptsWithinLength": True,
        "bound": "6",
        "trajectoryLength": "6",
    }
    tree = run_json(
        capsys, ["tm-length", "--machine", PALINDROME, "--word", "", "--bound", "5"]
    )
    assert tree["acceptsWithinLength"] is False


def test_tm_length_runaway_budget(capsys):
    # the walker blows past a small bound: an honest False
    tree = run_json(
        capsys, ["tm-length", "--machine", RIGHT_MOVER, "--word", "", "--bound", "2"]
    )
    assert tree["acceptsWithinLength"] is False

    # under a huge bound the step budget runs out first: undecidable here
    assert (
        main(
            [
                "tm-length", "--machine", RIGHT_MOVER, "--word", "",
                "--bound", "1000000000", "--max-steps", "100",
            ]
        )
        == 1
    )
    assert "error:" in capsys.readouterr().err


# -- embed ------------------------------------------------------------------------------


def test_embed_writes_pam_and_sidecar(tmp_path, capsys):
    out = tmp_path / "machine.pam.json"
    tree = run_json(
        capsys, ["embed", "--machine", IMMEDIATE, "--out", str(out)]
    )
    assert tree == {
        "pam": str(out),
        "sidecar": str(out) + ".sidecar.json",
        "pieces": 18,
    }

    from robustreach import embed as embed_mod
    from robustreach.formats import load_pam, load_tm

    machine = load_tm(IMMEDIATE)
    scheme = embed_mod.EncodingScheme.for_machine(machine)
    assert load_pam(str(out)) == embed_mod.build_pam(machine, scheme)

    sidecar = json.loads((tmp_path / (out.name + ".sidecar.json")).read_text())
    assert sidecar["base"] == scheme.base
    assert "states" in sidecar and "digits" in sidecar


def test_embed_custom_sidecar_and_base(tmp_path, capsys):
    out = tmp_path / "m.json"
    side = tmp_path / "side.json"
    tree = run_json(
        capsys,
        [
            "embed", "--machine", IMMEDIATE, "--base", "7",
            "--out", str(out), "--sidecar", str(side),
        ],
    )
    assert tree["sidecar"] == str(side)
    assert json.loads(side.read_text())["base"] == 7
