import json

import pytest

from netsup.automata import Automaton, cmd_in, obs_in, plain
from netsup.cli import main
from netsup.errors import AlphabetConflict, ParseError
from netsup.formats import (
    AutomatonFile,
    merge_flags,
    parse_automaton,
    parse_problem,
    serialize_automaton,
    serialize_problem,
)

SAMPLE = """\
# one train
alphabet
in:12 c o l
14
in:16 o
states 4 A Track1 Track2 B
initial 0
marked 3
trans
0 in:12 1
1 14 2
2 in:16 3
"""


def test_parse_sample():
    f = parse_automaton(SAMPLE)
    a = f.automaton
    assert (a.num_states, a.num_transitions) == (4, 3)
    assert a.state_names == ("A", "Track1", "Track2", "B")
    assert f.flags == {"12": frozenset("col"), "16": frozenset("o")}
    assert a.successors(0, obs_in("12")) == (1,)


def test_round_trip():
    f = parse_automaton(SAMPLE)
    again = parse_automaton(serialize_automaton(f.automaton, f.flags))
    assert again.automaton == f.automaton
    assert again.flags == f.flags
    assert again.automaton.state_names == f.automaton.state_names


@pytest.mark.parametrize(
    "text",
    [
        "states 1\ninitial 0\nmarked\ntrans\n",
        "alphabet\na\nstates x\ninitial 0\nmarked\ntrans\n",
        "alphabet\na\nstates 1\ninitial 0\nmarked\ntrans\n0 b 0\n",
        "alphabet\na\nstates 1\ninitial 0\nmarked\ntrans\n0 a\n",
        "alphabet\na z\nstates 1\ninitial 0\nmarked\ntrans\n",
        "alphabet\ncmd_in:{a} c\nstates 1\ninitial 0\nmarked\ntrans\n",
        "alphabet\na\na\nstates 1\ninitial 0\nmarked\ntrans\n",
        "alphabet\na\nstates 2 X\ninitial 0\nmarked\ntrans\n",
    ],
)
def test_parse_errors(text):
    with pytest.raises(ParseError):
        parse_automaton(text)


def test_conflicting_flags():
    a = Automaton(1, frozenset({plain("a")}), ())
    with pytest.raises(AlphabetConflict):
        merge_flags([AutomatonFile(a, {"a": frozenset("o")}), AutomatonFile(a, {"a": frozenset("co")})])


def test_command_labels_serialize():
    a = Automaton(2, frozenset({cmd_in({"x", "y"})}), ((0, cmd_in({"x", "y"}), 1),))
    text = serialize_automaton(a)
    assert "0 cmd_in:{x,y} 1" in text
    assert parse_automaton(text).automaton == a


def test_problem_round_trip(tmp_path):
    (tmp_path / "v.aut").write_text(SAMPLE)
    text = "plant v.aut\nnum_o 1\nnum_c 0\nm 0\nmechanism first\nbad 1 2\nconstraint networked\n"
    p = parse_problem(text, tmp_path)
    assert p.params.num_o == 1
    assert p.bad_indices == frozenset({1, 2})
    again = parse_problem(serialize_problem(p, tmp_path), tmp_path)
    assert again == p


@pytest.mark.parametrize(
    "text",
    ["num_o 1\n", "plant missing.aut\n", "plant v.aut\nfoo 1\n", "plant v.aut\nnum_o x\n", "plant v.aut\nm 1\nm 2\n"],
)
def test_problem_errors(tmp_path, text):
    (tmp_path / "v.aut").write_text(SAMPLE)
    with pytest.raises(ParseError):
        parse_problem(text, tmp_path)


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def test_cli_gen_oc(tmp_path, capsys):
    out = tmp_path / "oc.aut"
    code, _ = run(capsys, "gen", "oc", "--sigma-o", "a,b", "--num-o", "1", "--out", str(out))
    assert code == 0
    assert parse_automaton(out.read_text()).automaton.num_states == 9


def test_cli_gen_to_stdout(capsys):
    code, text = run(capsys, "gen", "sk", "--sigma-c", "g", "--sigma-o", "g", "--k", "3")
    assert code == 0
    assert parse_automaton(text).automaton.num_states == 4


def test_cli_compose(tmp_path, capsys):
    (tmp_path / "a.aut").write_text("alphabet\na\nstates 2\ninitial 0\nmarked\ntrans\n0 a 1\n")
    (tmp_path / "b.aut").write_text("alphabet\na\nb\nstates 2\ninitial 0\nmarked\ntrans\n0 a 1\n1 b 0\n")
    code, text = run(capsys, "compose", str(tmp_path / "a.aut"), str(tmp_path / "b.aut"))
    assert code == 0
    assert text.startswith("states=3 transitions=2")


def test_cli_compose_conflict(tmp_path, capsys):
    (tmp_path / "a.aut").write_text("alphabet\na o\nstates 1\ninitial 0\nmarked\ntrans\n")
    (tmp_path / "b.aut").write_text("alphabet\na c o\nstates 1\ninitial 0\nmarked\ntrans\n")
    code, _ = run(capsys, "compose", str(tmp_path / "a.aut"), str(tmp_path / "b.aut"))
    assert code == 3


def test_cli_bad_input(tmp_path, capsys):
    (tmp_path / "x.aut").write_text("nonsense\n")
    assert main(["stats", str(tmp_path / "x.aut")]) == 3
    assert main(["stats", str(tmp_path / "nope.aut")]) == 3


@pytest.fixture(scope="module")
def guideway_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("gw")
    assert main(["gen", "guideway", "--out", str(out)]) == 0
    return out


def test_cli_guideway_files(guideway_dir, capsys):
    files = sorted(p.name for p in guideway_dir.iterdir())
    assert files == ["cc.aut", "ce.aut", "guideway.problem", "names.txt", "oc.aut", "v1.aut", "v2.aut"]
    code, text = run(capsys, "compose", *(str(guideway_dir / f) for f in ["oc.aut", "cc.aut", "ce.aut", "v1.aut", "v2.aut"]))
    assert code == 0
    assert text.startswith("states=960 ")


def test_cli_tiny_synthesis(tmp_path, capsys):
    # three-state chain with a bad end; zero delays
    (tmp_path / "g.aut").write_text(
        "alphabet\nc c o\nu o\nstates 3\ninitial 0\nmarked 0 1\ntrans\n0 c 1\n1 u 2\n"
    )
    (tmp_path / "p.problem").write_text("plant g.aut\nbad 2\n")
    code, text = run(capsys, "synthesize", str(tmp_path / "p.problem"), "--maximality")
    assert code == 0
    assert "safety=ok controllability=ok normality=ok nonblocking=ok local-maximality=ok" in text


def test_cli_guideway_pipeline(guideway_dir, tmp_path, capsys):
    problem = str(guideway_dir / "guideway.problem")
    sup = str(tmp_path / "sup.aut")
    code, text = run(capsys, "synthesize", problem, "--out", sup)
    assert code == 0
    assert "plant states=960" in text
    code, text = run(capsys, "verify", problem, "--supervisor", sup, "--checks", "safety,nonblocking,queue-bound")
    assert code == 0
    assert json.loads(text)["passed"]
    code, text = run(capsys, "verify", problem, "--checks", "safety")
    assert code == 1
    report = json.loads(text)
    assert report["checks"]["safety"]["witness"][1]
    code, text = run(capsys, "simulate", problem, "--supervisor", sup, "--steps", "2000", "--seed", "5")
    assert code == 0
    assert json.loads(text)["violations"] == []
    code, text = run(capsys, "stats", sup)
    assert code == 0
    assert "deterministic=true" in text
