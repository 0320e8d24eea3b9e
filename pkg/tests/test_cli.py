from __future__ import annotations

import os
from fractions import Fraction

import pytest

from lll_toolkit.cli import dispatch

F = Fraction

M3_SYSTEM = """\
var 0 2 1/2 1/2
var 1 2 1/2 1/2
var 2 2 1/2 1/2
var 3 2 1/2 1/2
var 4 2 1/2 1/2
var 5 2 1/2 1/2
var 6 2 1/2 1/2
event 0 vbl 0 1 2 forbid 1 1 1
event 1 vbl 2 3 4 forbid 1 1 1
event 2 vbl 0 5 6 forbid 1 1 1
z 0 1/2
z 1 1/2
z 2 1/2
alpha 1
"""

ONE_BIT = """\
var 0 2 1/2 1/2
event 0 vbl 0 forbid 1
"""

DIMACS_M3 = """\
p cnf 7 3
1 2 3 0
-3 -4 -5 0
1 6 7 0
"""


@pytest.fixture
def m3_file(tmp_path):
    path = tmp_path / "m3.system"
    path.write_text(M3_SYSTEM)
    return str(path)


@pytest.fixture
def one_bit_file(tmp_path):
    path = tmp_path / "one.system"
    path.write_text(ONE_BIT)
    return str(path)


def run_cli(capsys, *argv):
    code = dispatch(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_check_equality_case(m3_file, capsys):
    code, out, _ = run_cli(capsys, "check", "--input", m3_file)
    assert code == 0
    assert "event=0 lhs=1/8(0.125) rhs=1/8(0.125) holds=true" in out
    assert "holds=true" in out.splitlines()[-1]


def test_check_dimacs_with_z_flag(tmp_path, capsys):
    path = tmp_path / "m3.cnf"
    path.write_text(DIMACS_M3)
    code, out, _ = run_cli(capsys, "check", "--input", str(path),
                           "--z-all", "1/2")
    assert code == 0
    assert "avoid_bound=1/8(0.125)" in out


def test_check_failing_condition(one_bit_file, capsys):
    code, out, _ = run_cli(capsys, "check", "--input", one_bit_file,
                           "--z-all", "1/4")
    assert code == 1
    assert "holds=false" in out


def test_check_manifest_line(m3_file, capsys):
    _, out, _ = run_cli(capsys, "check", "--input", m3_file)
    manifest = out.splitlines()[0]
    assert manifest.startswith("manifest ")
    assert "subcommand=check" in manifest
    assert "version=0.1.0" in manifest


def test_manifest_file_matches_line(m3_file, tmp_path, capsys):
    out_path = str(tmp_path / "run.manifest")
    _, out, _ = run_cli(capsys, "check", "--input", m3_file,
                        "--manifest-out", out_path)
    with open(out_path) as handle:
        assert handle.read().strip() == out.splitlines()[0]


def test_unknown_subcommand(capsys):
    code, _, _ = run_cli(capsys, "frobnicate")
    assert code == 2


def test_missing_file_is_usage_error(capsys):
    code, _, err = run_cli(capsys, "check", "--input", "/nonexistent")
    assert code == 2
    assert "error" in err


def test_solve_deterministic_replay(m3_file, capsys):
    code, out1, _ = run_cli(capsys, "solve", "--input", m3_file,
                            "--seed", "7")
    assert code == 0
    code, out2, _ = run_cli(capsys, "solve", "--input", m3_file,
                            "--seed", "7")
    assert out1 == out2
    assert "status=satisfied" in out1
    assert any(line.startswith("resamples=") for line in out1.splitlines())


def test_solve_with_explicit_tape(one_bit_file, capsys):
    code, out, _ = run_cli(capsys, "solve", "--input", one_bit_file,
                           "--tape-hex", "2:2", "--max-steps", "5")
    # bits "10": initial 1 (event true), resample to 0
    assert code == 0
    assert "resamples=1 status=satisfied" in out
    assert "assignment=0" in out


def test_solve_log_out_and_witness(m3_file, tmp_path, capsys):
    log_path = str(tmp_path / "run.log")
    code, _, _ = run_cli(capsys, "solve", "--input", m3_file,
                         "--seed", "6", "--log-out", log_path)
    assert code == 0
    assert os.path.exists(log_path)
    code, out, _ = run_cli(capsys, "witness", "--input", m3_file,
                           "--log", log_path)
    assert code == 0


def test_stream_subcommand(capsys):
    code, out, _ = run_cli(capsys, "stream", "--family",
                           "chain:m=3,overlap=1,polarity=4", "--k", "4",
                           "--seed", "2", "--max-steps", "200")
    assert code == 0
    assert "status=satisfied" in out
    assert "stable_time k=0 t=0" in out


def test_stream_certificate_line(capsys):
    code, out, _ = run_cli(capsys, "stream", "--family",
                           "chain:m=4,overlap=1,polarity=7", "--k", "8",
                           "--seed", "1", "--max-steps", "500",
                           "--certify-cell", "0", "--delta", "1/16",
                           "--z-all", "1/4", "--alpha", "1/2")
    assert code == 0
    assert "cell=0 delta=1/16 N=54 m=4 k=5" in out


def test_gw_check_subcommand(one_bit_file, capsys):
    code, out, _ = run_cli(capsys, "gw", "--input", one_bit_file,
                           "--z-all", "3/4", "--bit-budget", "12")
    assert code == 0
    lines = [l for l in out.splitlines() if l.startswith("tree=")]
    assert lines
    assert all("ok=true" in l for l in lines)
    assert "gw_total root=0" in out
    assert "certified=true" in out


def test_gw_sample_subcommand(one_bit_file, capsys):
    code, out, _ = run_cli(capsys, "gw", "--input", one_bit_file,
                           "--z-all", "1/2", "--sample", "--samples", "5",
                           "--seed", "3")
    assert code == 0
    assert len([l for l in out.splitlines() if l.startswith("sample=")]) == 5


def test_extract_point_oracle(capsys):
    code, out, _ = run_cli(capsys, "extract", "--oracle", "point:01",
                           "--count", "6")
    assert code == 0
    assert "cells=010101" in out


def test_extract_pair_oracle_heavy_branch(capsys):
    code, out, _ = run_cli(capsys, "extract", "--oracle",
                           "pair:1:3/5:0:2/5", "--r", "2/5", "--count", "4")
    assert code == 0
    assert "cells=1111" in out


def test_extract_contract_violation(capsys):
    code, _, err = run_cli(capsys, "extract", "--oracle",
                           "pair:1:3/5:0:2/5", "--r", "1/10", "--count", "2")
    assert code == 1
    assert "failed" in err


def test_prefix_exact(one_bit_file, capsys):
    code, out, _ = run_cli(capsys, "prefix", "--input", one_bit_file,
                           "--length", "1", "--mode", "exact")
    assert code == 0
    assert "cells=0" in out
    assert "interval lo=" in out


def test_avoid_subcommand(tmp_path, capsys):
    patterns = tmp_path / "patterns.txt"
    patterns.write_text("".join(f"{'0' * m}\n{'1' * m}\n"
                                for m in range(2, 13)))
    code, out, _ = run_cli(capsys, "avoid", "--forbidden", str(patterns),
                           "--gamma", "1/2", "--length", "64", "--seed", "1")
    assert code == 0
    assert "M=22" in out
    assert "beta=3/4(0.75)" in out
    assert "scan_ok=true" in out


def test_prefix_budget_refusal_exit_code(tmp_path, capsys):
    # a non-dyadic marginal leaves 2^-B mass unresolved at every budget, so
    # an unreachable width must be refused with exit code 3
    path = tmp_path / "thirds.system"
    path.write_text("var 0 2 1/3 2/3\nevent 0 vbl 0 forbid 1\n")
    code, _, err = run_cli(capsys, "prefix", "--input", str(path),
                           "--length", "1", "--mode", "exact",
                           "--delta", "1/1125899906842624",
                           "--branch-guard", "20000")
    assert code == 3
    assert "refused" in err


def test_fireworks_game(capsys):
    code, out, _ = run_cli(capsys, "fireworks", "--n", "100")
    assert code == 0
    assert "win_probability=99/100(0.99)" in out


def test_fireworks_play_and_beat(capsys):
    code, out, _ = run_cli(capsys, "fireworks", "--n", "4", "--seller-k",
                           "2", "--seed", "1")
    assert code == 0
    assert "outcome=" in out
    code, out, _ = run_cli(capsys, "fireworks", "--beat", "--oracle",
                           "const:5", "--epsilon", "1/4", "--seed", "2")
    assert code == 0
    assert "status=" in out


def test_selftest(capsys):
    code, out, _ = run_cli(capsys, "selftest")
    assert code == 0
    assert "selftest=pass" in out
    assert out.count("ok=true") == 6


# event 0 shares a variable with each of events 1 and 2 (two proper
# neighbors: rhs = z(1-z)^2 = 1/8); events 1 and 2 see only event 0
# (rhs = z(1-z) = 1/4)
GOLDEN_CHECK = """\
manifest input={path} subcommand=check version=0.1.0
event=0 lhs=1/8(0.125) rhs=1/8(0.125) holds=true
event=1 lhs=1/8(0.125) rhs=1/4(0.25) holds=true
event=2 lhs=1/8(0.125) rhs=1/4(0.25) holds=true
avoid_bound=1/8(0.125) alpha=1(1) holds=true
"""


def test_check_report_grammar_golden(m3_file, capsys):
    _, out, _ = run_cli(capsys, "check", "--input", m3_file)
    assert out == GOLDEN_CHECK.format(path=m3_file)
