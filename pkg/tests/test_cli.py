import json
import subprocess
import sys

import pytest

from malcev.cli import main


def run(*args):
    return main(list(args))


def test_good_copy_writes_a_verifiable_trace(tmp_path):
    trace = tmp_path / "t.jsonl"
    diagram = tmp_path / "d.csv"
    assert run("good-copy", "--stages=8", "--scramble=default", f"--trace={trace}", f"--diagram={diagram}") == 0
    assert diagram.read_text()
    assert run("verify", str(trace)) == 0


def test_identical_configs_give_identical_traces(tmp_path):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    assert run("good-copy", "--stages=6", f"--trace={a}") == 0
    assert run("good-copy", "--stages=6", f"--trace={b}") == 0
    assert a.read_bytes() == b.read_bytes()


def test_config_file(tmp_path):
    cfg = tmp_path / "c.json"
    trace = tmp_path / "t.jsonl"
    cfg.write_text(json.dumps({"schema": 1, "class": "aoag", "stages": 4, "trace": str(trace)}))
    assert run("good-copy", f"--config={cfg}") == 0
    head = json.loads(trace.read_text().splitlines()[0])
    assert head["class"] == "aoag" and "trace" not in head


def test_corrupted_trace_fails_verification(tmp_path, capsys):
    trace = tmp_path / "t.jsonl"
    assert run("good-copy", "--stages=4", f"--trace={trace}") == 0
    lines = trace.read_text().splitlines()
    events = [json.loads(x) for x in lines]
    stage = [ev for ev in events if ev["event"] == "stage"][3]
    stage["tau"][0], stage["tau"][1] = stage["tau"][1], stage["tau"][0]
    trace.write_text("".join(json.dumps(ev) + "\n" for ev in events))
    capsys.readouterr()
    assert run("verify", str(trace)) == 3
    first = capsys.readouterr().out.splitlines()[0]
    assert first.startswith("stage 3:") and "P3" in first.split()


def test_empty_trace(tmp_path):
    trace = tmp_path / "empty.jsonl"
    trace.write_text("")
    assert run("verify", str(trace)) == 0


def test_resumable_exit(tmp_path):
    assert run("good-copy", "--stages=5", "--scramble=default", "--max_t_steps=1") == 2


def test_bad_copy_replays(tmp_path):
    log = tmp_path / "b.jsonl"
    assert run("bad-copy", "--stages=60", f"--trace={log}") == 0
    assert run("verify", str(log)) == 0
    lines = log.read_text().splitlines()
    log.write_text("\n".join(lines[:-1]) + "\n")
    assert run("verify", str(log)) == 3


def test_bad_copy_plugin(tmp_path):
    g = json.dumps([{"kind": "plugin", "path": "sample_guessers:make_patient"}])
    assert run("bad-copy", "--stages=50", f"--guessers={g}") == 0


def test_bad_plugin_exits_4(capsys):
    g = json.dumps([{"kind": "plugin", "path": "sample_guessers:not_a_guesser"}])
    assert run("bad-copy", "--stages=5", f"--guessers={g}") == 4
    assert json.loads(capsys.readouterr().out)["reason"] == "plugin"


@pytest.mark.parametrize(
    "args",
    [
        ("good-copy", "--nonsense=1"),
        ("good-copy", "--class=rings"),
        ("good-copy", "positional"),
        ("bad-copy", "--scramble=default"),
        ("verify", "/no/such/trace"),
        ("frobnicate",),
    ],
)
def test_usage_errors(args):
    with pytest.raises(SystemExit) as info:
        sys.exit(run(*args))
    assert info.value.code == 64


def test_empty_grid_list(capsys):
    assert run("oracle-compare", "--grids=[]") == 0
    assert json.loads(capsys.readouterr().out) == {}


def test_small_dependence_grid(capsys):
    assert run("oracle-compare", '--grids=["dependence"]', "--fragment=6") == 0
    rep = json.loads(capsys.readouterr().out)["dependence"]
    assert rep["disagree"] == 0 and rep["agree"] > 0


def test_diagram_command(capsys):
    assert run("diagram", "--size=4") == 0
    assert capsys.readouterr().out


def test_console_script():
    out = subprocess.run([sys.executable, "-m", "malcev.cli", "diagram", "--size=3"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout
