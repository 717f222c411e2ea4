import io
import json
import subprocess
import sys
from importlib import resources

import pytest

from reachlogic.cli import INPUT_ERROR, NO_RESULT, OK, main
from reachlogic.sat import _check_sat_cached


def corpus(name: str) -> str:
    return str(resources.files("reachlogic") / "corpus" / name / "program.jmp")


def cli(*argv):
    out = io.StringIO()
    code = main(list(argv), out)
    return code, out.getvalue()


def test_run_examples():
    code, text = cli("run", corpus("division"), "--init", "x=4,y=1")
    assert code == OK and "i=3" in text and "x=1" in text
    code, text = cli("run", corpus("indirect"), "--init", "x=2")
    assert code == OK and "y=5" in text
    code, text = cli("run", corpus("ndloop"), "--init", "n=5", "--fuel", "10", "--seed", "1")
    assert code == NO_RESULT and text.startswith("OutOfFuel")


def test_run_faults():
    code, text = cli("run", corpus("division"), "--init", "x=4")
    assert code == INPUT_ERROR and "unbound" in text
    code, text = cli("run", corpus("division"), "--init", "x=4,y=0", "--fuel", "5")
    assert code == NO_RESULT


def test_run_json():
    code, text = cli("run", corpus("division"), "--init", "x=4,y=1", "--format", "json")
    rec = json.loads(text)
    assert rec["outcome"] == "exited" and rec["state"]["x"] == 1 and rec["trace"] == [0, 1, 2, 2, 3]
    assert rec["config"]["fuel"] == 64


def test_check_examples():
    args = ["check", corpus("division"), "--post", "x >= y", "--domain", "0..8"]
    code, text = cli(*args, "--pre", "x == 4*y && y > 0")
    assert code == OK and "confirmed" in text
    code, text = cli(*args, "--pre", "x == y + 1 && y > 1")
    assert code == NO_RESULT and "counterexample" in text
    code, text = cli(*args, "--pre", "0")
    assert code == OK and "0 state" in text


def test_gen_text_and_exit_codes():
    code, text = cli("gen", corpus("indirect"), "--post", "y > 0")
    assert code == OK and "1 satisfiable" in text
    code, _ = cli("gen", corpus("indirect"), "--post", "y > 100", "--max-depth", "2")
    assert code == NO_RESULT


def test_gen_json_lines():
    code, text = cli("gen", corpus("doublestore"), "--post", "[e] == z", "--max-depth", "0", "--format", "json")
    lines = [json.loads(line) for line in text.splitlines()]
    assert "config" in lines[0] and "report" in lines[-1]
    assert len(lines) == 6 and lines[-1]["report"]["emitted"] == 4


def test_gen_json_is_byte_identical():
    args = ["gen", corpus("division"), "--post", "x >= y", "--domain", "0..16", "--max-depth", "6", "--format", "json"]
    _check_sat_cached.cache_clear()
    first = cli(*args)
    _check_sat_cached.cache_clear()
    second = cli(*args)
    assert first == second


def test_gen_dot():
    code, text = cli("gen", corpus("doublestore"), "--post", "[e] == z", "--max-depth", "0", "--format", "dot")
    assert code == OK and text.startswith("digraph")


def test_negative_domain_is_accepted():
    code, text = cli("gen", corpus("indirect"), "--post", "y > 0", "--domain", "-8..8", "--format", "json")
    assert json.loads(text.splitlines()[0])["config"]["domain"] == [-8, 8]


@pytest.mark.parametrize(
    "argv",
    [
        ["gen", "/nonexistent.jmp", "--post", "1"],
        ["gen", "PROGRAM", "--post", "x +"],
        ["check", "PROGRAM", "--post", "1", "--pre", "(("],
        ["run", "PROGRAM", "--init", "x"],
    ],
)
def test_input_errors(argv, capsys):
    argv = [corpus("division") if a == "PROGRAM" else a for a in argv]
    code, _ = cli(*argv)
    assert code == INPUT_ERROR
    assert capsys.readouterr().err.startswith("error:")


def test_bad_program_reports_position(tmp_path, capsys):
    bad = tmp_path / "bad.jmp"
    bad.write_text("entry 0\nblock 0: jump x 0 4\n")
    code, _ = cli("run", str(bad), "--init", "x=1")
    assert code == INPUT_ERROR
    assert f"{bad}:2:" in capsys.readouterr().err


def test_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["gen"], io.StringIO())
    assert exc.value.code == 2


def test_test_command():
    code, text = cli("test", "litmus")
    assert code == OK and text.count("PASS") == 4
    code, text = cli("test", "axioms", "--format", "json")
    assert code == OK and json.loads(text)["passed"]


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "reachlogic", "run", corpus("indirect"), "--init", "x=2"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0 and "y=5" in proc.stdout
