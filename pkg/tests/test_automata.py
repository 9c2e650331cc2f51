import pytest

from netsup.automata import (
    AlphabetSpec,
    Automaton,
    EventLabel,
    Kind,
    cmd_in,
    determinize,
    is_isomorphic,
    is_nonblocking,
    language_equal,
    language_included,
    minimize,
    obs_in,
    observer,
    plain,
    project,
    reachable,
    sync_product,
    trim,
)
from netsup.errors import InvalidParams, MalformedAutomaton

a, b, u, o = plain("a"), plain("b"), plain("u"), plain("o")


def aut(n, trans, marked=(), alphabet=None, initial=0):
    alphabet = alphabet or {lab for _, lab, _ in trans}
    return Automaton(n, frozenset(alphabet), tuple(trans), initial, frozenset(marked))


def test_label_round_trip():
    for text in ["a", "in:12", "out:16", "loss:22", "cmd_in:{12,22}", "cmd_out:{12}", "cmd_loss:{22}"]:
        assert str(EventLabel.parse(text)) == text
    assert EventLabel.parse("cmd_in:{22,12}") == cmd_in({"12", "22"})
    assert EventLabel.parse("in:12").kind is Kind.OBS_IN


@pytest.mark.parametrize("text", ["cmd_in:{}", "in:", "cmd_out:12", ""])
def test_label_parse_rejects(text):
    with pytest.raises(MalformedAutomaton):
        EventLabel.parse(text)


def test_alphabet_subsets_checked():
    with pytest.raises(InvalidParams):
        AlphabetSpec(frozenset({"a"}), sigma_o=frozenset({"a"}), sigma_ol=frozenset({"b"}))
    with pytest.raises(InvalidParams):
        AlphabetSpec(frozenset({"a"}), sigma_c=frozenset({"z"}))


def test_commands_are_nonempty_subsets():
    alph = AlphabetSpec(frozenset("abc"), sigma_c=frozenset("ab"), sigma_o=frozenset("ab"))
    assert alph.commands == (frozenset("a"), frozenset("ab"), frozenset("b"))
    assert alph.plant_label("a") == obs_in("a")
    assert alph.plant_label("c") == plain("c")


def test_malformed_automata_rejected():
    with pytest.raises(MalformedAutomaton):
        aut(2, [(0, a, 2)])
    with pytest.raises(MalformedAutomaton):
        Automaton(1, frozenset(), ((0, a, 0),))
    with pytest.raises(MalformedAutomaton):
        Automaton(0, frozenset(), ())


def test_product_hand_example():
    g1 = aut(2, [(0, a, 1)], alphabet={a})
    g2 = aut(2, [(0, a, 1), (1, b, 0)], alphabet={a, b})
    p = sync_product([g1, g2])
    # joint states (0,0), (1,1), (1,0)
    assert p.num_states == 3
    names = p.state_names
    trans = {(names[s], str(lab), names[d]) for s, lab, d in p.transitions}
    assert trans == {((0, 0), "a", (1, 1)), ((1, 1), "b", (1, 0))}
    (q10,) = [q for q, n in enumerate(names) if n == (1, 0)]
    assert a not in p.enabled(q10)


def test_product_interleaves_private_events():
    g1 = aut(2, [(0, a, 1)])
    g2 = aut(2, [(0, b, 1)])
    p = sync_product([g1, g2])
    assert (p.num_states, p.num_transitions) == (4, 4)


def test_reachable_drops_orphans():
    g = aut(4, [(0, a, 1), (1, a, 2), (3, a, 0)])
    r = reachable(g)
    assert r.num_states == 3
    assert r.num_transitions == 2


def test_nonblocking_cycle_with_one_marked_state():
    g = aut(3, [(0, a, 1), (1, a, 2), (2, a, 0)], marked={2})
    assert is_nonblocking(g)
    g = aut(3, [(0, a, 1), (1, a, 2), (0, b, 0)], marked={0})
    res = is_nonblocking(g)
    assert not res
    assert trim(g).num_states == 1


def test_observer_hand_example():
    g = aut(4, [(0, u, 1), (0, o, 2), (1, o, 3)])
    obs, cells = observer(g, {o})
    assert cells[obs.initial] == frozenset({0, 1})
    (nxt,) = obs.successors(obs.initial, o)
    assert cells[nxt] == frozenset({2, 3})


def test_determinize_and_languages():
    nfa = aut(3, [(0, a, 1), (0, a, 2), (1, b, 1)], marked={1, 2})
    d = determinize(nfa)
    assert d.is_deterministic
    assert language_equal(nfa, d)
    smaller = aut(2, [(0, a, 1)], marked={1})
    assert language_included(smaller, nfa)
    res = language_included(nfa, smaller)
    assert not res
    assert res.witness == ("closed", (a, b))


def test_marked_language_distinguished():
    x = aut(2, [(0, a, 1)], marked={1})
    y = aut(2, [(0, a, 1)], marked={0})
    res = language_equal(x, y)
    assert not res
    assert res.witness[0] == "marked"


def test_minimize_merges_equivalent_states():
    g = aut(4, [(0, a, 1), (0, b, 2), (1, a, 3), (2, a, 3)], marked={3})
    m = minimize(g)
    assert (m.num_states, m.num_transitions) == (3, 3)
    assert language_equal(g, m)


def test_project_erases_unmapped_labels():
    g = aut(3, [(0, u, 1), (1, a, 2)], marked={2})
    p = project(g, {a: b})
    assert p.alphabet == frozenset({b})
    assert language_equal(p, aut(2, [(0, b, 1)], marked={1}))


def test_isomorphism_ignores_numbering():
    g = aut(3, [(0, a, 1), (1, b, 2)], marked={2})
    h = aut(3, [(0, a, 2), (2, b, 1)], marked={1})
    assert is_isomorphic(g, h)
    assert g != h
    assert not is_isomorphic(g, aut(3, [(0, a, 1), (1, b, 2)], marked={1}))
