"""Two-train guideway benchmark.

Each train runs A -> Track1 -> Track2 -> B.  Train 1 uses events 12/14/16,
train 2 uses 22/24/26.  Entering the guideway (12, 22) is controllable and
observable over a lossy link; 16 and 26 are observed reliably; 14 and 24 are
unobservable.  A collision is both trains on the same track section.
"""

from __future__ import annotations

from dataclasses import dataclass

from .automata import AlphabetSpec, Automaton, plain, sync_product
from .channels import ChannelParams, TransformedPlant, build_transformed_plant, relabel_plant

TRAIN_STATES = ("A", "Track1", "Track2", "B")

# TCT-style numeric event names, keyed by lifted label text
NUMERIC_NAMES = {
    "cmd_in:{12}": "31",
    "cmd_out:{12}": "32",
    "cmd_in:{22}": "33",
    "cmd_out:{22}": "34",
    "cmd_in:{12,22}": "35",
    "cmd_out:{12,22}": "36",
    "loss:12": "18",
    "loss:22": "28",
    "out:12": "42",
    "out:22": "52",
    "out:16": "46",
    "out:26": "56",
}


def guideway_alphabet() -> AlphabetSpec:
    return AlphabetSpec(
        sigma=frozenset({"12", "14", "16", "22", "24", "26"}),
        sigma_c=frozenset({"12", "22"}),
        sigma_o=frozenset({"12", "22", "16", "26"}),
        sigma_ol=frozenset({"12", "22"}),
    )


def train(index: int) -> Automaton:
    """Base model of one train (index 1 or 2)."""
    e = [f"{index}{d}" for d in (2, 4, 6)]
    trans = tuple((i, plain(ev), i + 1) for i, ev in enumerate(e))
    return Automaton(4, frozenset(plain(x) for x in e), trans, 0, frozenset({3}), TRAIN_STATES)


def guideway_plant() -> Automaton:
    """Base plant ``V1 || V2`` over PLAIN events."""
    return sync_product([train(1), train(2)])


def guideway_bad(g: Automaton) -> frozenset[int]:
    """Collision states: both trains on Track1 or both on Track2."""
    out = set()
    for q, (a, b) in enumerate(g.state_names):
        if a == b and a in (1, 2):
            out.add(q)
    return frozenset(out)


@dataclass(frozen=True)
class Guideway:
    alph: AlphabetSpec
    base: Automaton
    relabelled: Automaton
    bad_base: frozenset[int]


def guideway() -> Guideway:
    alph = guideway_alphabet()
    base = guideway_plant()
    rel = sync_product([relabel_plant(train(1), alph), relabel_plant(train(2), alph)])
    return Guideway(alph, base, rel, guideway_bad(rel))


def guideway_transformed(params: ChannelParams | None = None) -> tuple[TransformedPlant, frozenset[int]]:
    """Transformed guideway plant and its bad states (default ``num_o=1, num_c=0, m=0``)."""
    gw = guideway()
    params = params or ChannelParams(num_o=1)
    tp = build_transformed_plant(gw.relabelled, gw.alph, params)
    return tp, tp.bad_states(gw.bad_base)
