import io
import json
import subprocess
import sys

import pytest

from ofabs.cli import EXIT_BUDGET, EXIT_INPUT, EXIT_OK, EXIT_UNREALIZABLE, run
from ofabs.models import fig3_chain

from oracles import systems


def call(*argv):
    out = io.StringIO()
    code = run([str(a) for a in argv], stdout=out)
    text = out.getvalue()
    return code, (json.loads(text) if text else None), text


def write(path, obj):
    path.write_text(json.dumps(obj))
    return path


def test_model_writes_finite_json(tmp_path):
    code, rep, _ = call("model", "--name", "fig3", "--param", "n=3", "--out", tmp_path / "f.json",
                        "--dot", tmp_path / "f.dot")
    assert code == EXIT_OK and rep["states"] == 5 and rep["finite"]
    assert json.loads((tmp_path / "f.json").read_text()) == fig3_chain(3).to_json()
    assert "digraph" in (tmp_path / "f.dot").read_text()


def test_symbolic_model_reference_round_trips(tmp_path):
    call("model", "--name", "sigma1", "--out", tmp_path / "s.json")
    ref = json.loads((tmp_path / "s.json").read_text())
    assert ref["model"] == "sigma1" and ref["symbolic"]
    code, rep, _ = call("abstract", "--algo", "grid", "--eta", "1/5", "--system", tmp_path / "s.json")
    assert code == EXIT_OK and rep["abstraction"]["states"] == 225


def test_kam_trace_through_the_cli(tmp_path):
    code, rep, _ = call("abstract", "--algo", "kam", "--model", "fig4", "--budget", 5,
                        "--emit-tree", tmp_path / "tree.json",
                        "--emit-iterations", tmp_path / "it", "--out", tmp_path / "hat.json")
    assert code == EXIT_OK
    assert rep["termcond"] == "budget" and rep["iterations"] == 5
    assert rep["cover_additions"]["3"] == ["c[1+2*i]", "b[1+2*i]"]
    assert rep["abstraction"] == {"states": 9, "initial": 1, "transitions": 13}
    assert sorted(p.name for p in (tmp_path / "it").iterdir())[:2] == ["iter1.dot", "iter1.json"]
    tree = json.loads((tmp_path / "tree.json").read_text())
    assert tree["iteration"] == 5 and tree["nodes"][0]["parent"] is None


def test_abstract_algorithms_on_the_chain():
    code, rep, _ = call("abstract", "--algo", "bisim", "--model", "fig3")
    assert (code, rep["abstraction"]["states"]) == (EXIT_OK, 3)
    code, rep, _ = call("abstract", "--algo", "ka", "--model", "fig3", "--budget", 6)
    assert code == EXIT_OK and rep["terminated"] is False
    code, rep, _ = call("abstract", "--algo", "lcomplete", "--l", 2, "--model", "fig3",
                        "--param", "n=6")
    assert (code, rep["abstraction"]["states"]) == (EXIT_OK, 5)


def test_reports_are_deterministic():
    argv = ("abstract", "--algo", "kam", "--model", "fig4", "--budget", 4)
    assert call(*argv)[2] == call(*argv)[2]
    _, rep, _ = call(*argv, "--timing")
    assert "timing_s" in rep
    assert "timing_s" not in call(*argv)[1]


@pytest.mark.parametrize("argv", [
    ("abstract", "--algo", "grid", "--eta", "1/5", "--model", "fig3"),
    ("abstract", "--algo", "ka", "--model", "fig3", "--eta", "1/5"),
    ("abstract", "--algo", "grid", "--eta", "3/10", "--model", "sigma1"),
    ("abstract", "--algo", "ka", "--model", "nowhere"),
    ("abstract", "--algo", "ka", "--model", "fig3", "--budget", "0"),
    ("abstract", "--algo", "ka"),
    ("abstract", "--algo", "teleport", "--model", "fig3"),
])
def test_input_errors_exit_4(argv):
    code, rep, _ = call(*argv)
    assert code == EXIT_INPUT
    if rep is not None:
        assert rep["exit_code"] == EXIT_INPUT and rep["error"]["type"]


def test_state_cap_exits_3(monkeypatch):
    monkeypatch.setenv("OFABS_MAX_STATES", "100")
    code, rep, _ = call("abstract", "--algo", "grid", "--eta", "1/5", "--model", "sigma1")
    assert code == EXIT_BUDGET and rep["error"]["type"] == "ResourceBudgetExceeded"


def test_synthesize_simulate_round_trip(tmp_path):
    call("model", "--name", "tank", "--out", tmp_path / "tank.json")
    call("abstract", "--algo", "lcomplete", "--l", 1, "--system", tmp_path / "tank.json",
         "--out", tmp_path / "abs.json")
    spec = write(tmp_path / "safe.json", {"kind": "safety", "forbidden": ["l5/o0", "l5/o1"]})
    code, rep, _ = call("synthesize", "--system", tmp_path / "abs.json", "--spec", spec,
                        "--emit-strategy", tmp_path / "ctrl.json")
    assert code == EXIT_OK and rep["realizable"]
    code, rep, _ = call("simulate", "--system", tmp_path / "tank.json",
                        "--controller", tmp_path / "ctrl.json", "--steps", 500, "--seed", 3,
                        "--trace", tmp_path / "trace.jsonl")
    assert code == EXIT_OK
    assert rep["verdict"] == {"steps": 500, "observer_desync": False, "violations": 0}
    assert len((tmp_path / "trace.jsonl").read_text().splitlines()) == 501


def test_unrealizable_exits_2(tmp_path):
    s = fig3_chain(3).to_json()
    path = write(tmp_path / "c.json", s)
    spec = write(tmp_path / "never_b.json", {"kind": "safety", "forbidden": ["B"]})
    code, rep, _ = call("synthesize", "--system", path, "--spec", spec)
    assert code == EXIT_UNREALIZABLE and rep["realizable"] is False and rep["witness"] == "a1"


def test_output_feedback_flag_determinizes(tmp_path):
    s = {"states": ["x", "y", "z"], "initial": ["x"], "inputs": ["u"], "outputs": ["A", "B"],
         "output_map": {"x": "A", "y": "B", "z": "B"},
         "transitions": [{"from": "x", "input": "u", "to": ["y", "z"]},
                         {"from": "y", "input": "u", "to": ["y"]},
                         {"from": "z", "input": "u", "to": ["z"]}]}
    path = write(tmp_path / "nd.json", s)
    spec = write(tmp_path / "spec.json", {"kind": "safety", "forbidden": ["A"], "start": ["A"]})
    _, rep, _ = call("synthesize", "--system", path, "--spec", spec, "--output-feedback")
    assert rep["game"]["states"] == 2


def test_check_relation_modes(tmp_path):
    s = systems(seed=4, count=1)[0]
    c = write(tmp_path / "s.json", s.to_json())
    m = write(tmp_path / "id.json", {"alpha": {x: [x] for x in s.states}})
    for mode in ("sound", "realization", "frr"):
        code, rep, _ = call("check-relation", "--concrete", c, "--abstract", c, "--map", m,
                            "--mode", mode)
        assert code == EXIT_OK and rep["passed"]
    bad = write(tmp_path / "bad.json", {"alpha": {"ghost": ["s0"]}})
    code, _, _ = call("check-relation", "--concrete", c, "--abstract", c, "--map", bad)
    assert code == EXIT_INPUT


def test_chain_exhaustion_exits_3(tmp_path):
    spec = write(tmp_path / "fg.json", {"kind": "gbuchi", "families": [["F"], ["G"]]})
    code, rep, _ = call("chain", "--model", "fig4", "--spec", spec, "--L", 3)
    assert code == EXIT_BUDGET and rep["found"] is False and rep["iterations_tried"] == 3


def test_chain_success_on_the_chain_model(tmp_path):
    spec = write(tmp_path / "reach.json", {"kind": "reachability", "target": ["A"]})
    code, rep, _ = call("chain", "--model", "fig3", "--spec", spec, "--L", 4,
                        "--emit-strategy", tmp_path / "ctrl.json")
    assert code == EXIT_OK and rep["found"] and rep["realizable"]
    assert "strategy" in json.loads((tmp_path / "ctrl.json").read_text())


def test_report_file_and_module_entry_point(tmp_path):
    code, rep, text = call("abstract", "--algo", "bisim", "--model", "fig3",
                           "--report", tmp_path / "r.json")
    assert code == EXIT_OK and text == ""
    assert json.loads((tmp_path / "r.json").read_text())["abstraction"]["states"] == 3
    proc = subprocess.run([sys.executable, "-m", "ofabs", "abstract", "--algo", "ka",
                           "--model", "nowhere"], capture_output=True, text=True)
    assert proc.returncode == EXIT_INPUT and "UnknownModel" in proc.stderr
