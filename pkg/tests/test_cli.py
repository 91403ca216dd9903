"""End-to-end command-line behaviour, one test per exit path."""

import subprocess
import sys
from pathlib import Path

import pytest

from dcbound.cli import main

DATA = Path(__file__).parent / "data"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_analyze_example_a_free(capsys):
    code, out, err = run(capsys, "analyze", DATA / "exampleA.dcp", "--mode", "free")
    assert code == 0
    assert out.endswith("complexity = 2*n\n")
    assert "TB(t1) = n" in out and "TB(t2) = n" in out


def test_analyze_defaults_to_ctx(capsys):
    code, out, _ = run(capsys, "analyze", DATA / "exampleC.dcp")
    assert code == 0
    assert "TB(t2) = n" in out  # the context-sensitive value, not n*n


def test_analyze_vb_lines(capsys):
    code, out, _ = run(capsys, "analyze", DATA / "exampleB.dcp",
                       "--mode", "free", "--vb")
    assert code == 0
    assert "VB(k) = n" in out


def test_analyze_prog_input(capsys):
    code, out, err = run(capsys, "analyze", DATA / "example3.prog",
                         "--mode", "opt", "-v")
    assert code == 0
    assert "TB(t4) = l" in out
    assert "complexity = 2*l" in out
    assert "dcp" in err  # -v prints the abstracted program to stderr


def test_analyze_undefined_complexity_exit_2(capsys):
    code, out, _ = run(capsys, "analyze", DATA / "cyclic.dcp", "--mode", "free")
    assert code == 2
    assert out.endswith("complexity = undef\n")


def test_parse_error_exit_1(tmp_path, capsys):
    bad = tmp_path / "bad.dcp"
    bad.write_text("dcp\nvars: x\nentry: a\nexit: b\ntrans t: a -> b { x' <= }\n")
    code, _, err = run(capsys, "analyze", bad)
    assert code == 1
    assert "bad.dcp" in err and ":5:" in err


def test_usage_error_exit_1(capsys, tmp_path):
    unknown = tmp_path / "mystery.txt"
    unknown.write_text("???\n")
    code, _, err = run(capsys, "analyze", unknown)
    assert code == 1
    assert "--format" in err


def test_byte_identical_output(capsys):
    _, out1, _ = run(capsys, "analyze", DATA / "example2.dcp", "--mode", "free", "--vb")
    _, out2, _ = run(capsys, "analyze", DATA / "example2.dcp", "--mode", "free", "--vb")
    assert out1 == out2


def test_abstract_writes_dcp(tmp_path, capsys):
    out_path = tmp_path / "out.dcp"
    code, _, _ = run(capsys, "abstract", DATA / "example3.prog", "-o", out_path)
    assert code == 0
    text = out_path.read_text()
    assert text.startswith("#")
    code2, out, _ = run(capsys, "analyze", out_path, "--mode", "opt")
    assert code2 == 0
    assert "complexity = 2*l" in out


def test_abstract_keep_names(capsys):
    code, out, _ = run(capsys, "abstract", DATA / "example3.prog", "--keep-names")
    assert code == 0
    assert "(l-i)' <= (l-i) - 1" in out


def test_abstract_rejects_dcp_input(capsys):
    code, _, err = run(capsys, "abstract", DATA / "exampleA.dcp")
    assert code == 1
    assert "expects a .prog" in err


def test_validate_pass(capsys):
    code, out, _ = run(capsys, "validate", DATA / "exampleA.dcp",
                       "--assign", "n=3", "--assign", "n=4")
    assert code == 0
    assert out.strip().endswith("PASS")
    assert "# n=3" in out and "# n=4" in out
    assert "t1  3  3  OK" in out


def test_validate_sweep(capsys):
    code, out, _ = run(capsys, "validate", DATA / "exampleC.dcp",
                       "--sweep", "0..2", "--mode", "ctx")
    assert code == 0
    assert out.count("#") == 3


def test_validate_injected_fault_exit_3(capsys):
    code, out, _ = run(capsys, "validate", DATA / "exampleA.dcp",
                       "--assign", "n=1", "--override-bound", "t2=0")
    assert code == 3
    assert "VIOLATION" in out
    assert out.strip().endswith("FAIL")


def test_validate_partial_exit_3(capsys):
    code, out, _ = run(capsys, "validate", DATA / "cyclic.dcp",
                       "--assign", "n=1", "--max-steps", "500")
    assert code == 3
    assert out.strip().endswith("PASS-PARTIAL")


def test_validate_missing_constant_exit_1(capsys):
    code, _, err = run(capsys, "validate", DATA / "example2.dcp",
                       "--assign", "n=1")
    assert code == 1
    assert "misses constants" in err


def test_resets_listing(capsys):
    code, out, _ = run(capsys, "resets", DATA / "example1.dcp")
    assert code == 0
    assert "R(p):" in out
    assert "0 -[t0]-> r -[t2a]-> p" in out
    assert "0 -[t4]-> r -[t2a]-> p" in out


def test_resets_dot(tmp_path, capsys):
    dot_path = tmp_path / "g.dot"
    code, _, _ = run(capsys, "resets", DATA / "exampleB.dcp", "--dot", dot_path)
    assert code == 0
    text = dot_path.read_text()
    assert '"k" -> "j" [label="t2"];' in text


def test_cycle_cap_exit_2(capsys):
    code, _, err = run(capsys, "analyze", DATA / "example1.dcp", "--max-cycles", "1")
    assert code == 2
    assert "simple cycles" in err


def test_format_sniffed_from_content(tmp_path, capsys):
    oddly_named = tmp_path / "a_program"
    oddly_named.write_text((DATA / "exampleA.dcp").read_text())
    code, out, _ = run(capsys, "analyze", oddly_named, "--mode", "free")
    assert code == 0 and out.endswith("complexity = 2*n\n")
    code, out, _ = run(capsys, "analyze", oddly_named, "--format", "dcp",
                       "--mode", "free")
    assert code == 0


def test_version_and_help():
    # argparse handles these via SystemExit(0)
    with pytest.raises(SystemExit) as ei:
        main(["--version"])
    assert ei.value.code == 0
    with pytest.raises(SystemExit) as ei:
        main(["--help"])
    assert ei.value.code == 0


def test_console_script_entry():
    proc = subprocess.run(
        [sys.executable, "-m", "dcbound.cli", str(DATA / "exampleA.dcp")],
        capture_output=True, text=True)
    assert proc.returncode != 0  # missing subcommand is a usage error
    proc = subprocess.run(
        [sys.executable, "-m", "dcbound.cli", "analyze",
         str(DATA / "exampleA.dcp"), "--mode", "free"],
        capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.endswith("complexity = 2*n\n")


def test_resets_var_filter(capsys):
    code, out, _ = run(capsys, "resets", DATA / "example1.dcp", "--var", "p")
    assert code == 0
    assert "R(p):" in out and "R(x):" not in out
    code, _, err = run(capsys, "resets", DATA / "example1.dcp", "--var", "zz")
    assert code == 1


def test_validate_prog_input(capsys):
    code, out, _ = run(capsys, "validate", DATA / "example3.prog",
                       "--mode", "opt", "--sweep", "0..3")
    assert code == 0
    assert out.strip().endswith("PASS")
