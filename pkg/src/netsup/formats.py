"""Plain-text automaton and problem files.

Automaton file, sections in this order::

    # comment
    alphabet
    in:12 c o l        # label, then optional flags of its base event
    14
    cmd_in:{12,22}
    states 4 A Track1 Track2 B   # count, then optional state names
    initial 0
    marked 3
    trans
    0 in:12 1

Problem file, one ``key value...`` pair per line::

    plant v1.aut v2.aut
    num_o 1
    num_c 0
    m 0
    capacity 4
    mechanism first
    bad collision Track1 Track2      # or: bad 5 6 7 (indices of the composed plant)
    constraint networked
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path

from .automata import AlphabetSpec, Automaton, EventLabel, Kind, sync_product
from .channels import ChannelParams, Mechanism
from .errors import AlphabetConflict, InvalidParams, MalformedAutomaton, ParseError

FLAGS = ("c", "o", "l")


@dataclass(frozen=True, eq=False)
class AutomatonFile:
    automaton: Automaton
    flags: dict[str, frozenset[str]] = field(default_factory=dict)


def _strip(line: str) -> str:
    return line.split("#", 1)[0].strip()


def parse_automaton(text: str) -> AutomatonFile:
    lines = [(i + 1, _strip(raw)) for i, raw in enumerate(text.splitlines())]
    lines = [(n, ln) for n, ln in lines if ln]
    pos = 0

    def expect(keyword: str) -> list[str]:
        nonlocal pos
        if pos >= len(lines):
            raise ParseError(f"missing section {keyword!r}")
        n, ln = lines[pos]
        parts = ln.split()
        if parts[0] != keyword:
            raise ParseError(f"line {n}: expected {keyword!r}, found {parts[0]!r}")
        pos += 1
        return parts[1:]

    if expect("alphabet"):
        raise ParseError("'alphabet' takes no arguments")
    alphabet: list[EventLabel] = []
    flags: dict[str, frozenset[str]] = {}
    while pos < len(lines) and not lines[pos][1].startswith("states"):
        n, ln = lines[pos]
        label_text, *fl = ln.split()
        try:
            label = EventLabel.parse(label_text)
        except MalformedAutomaton as exc:
            raise ParseError(f"line {n}: {exc}") from None
        if fl:
            if label.is_command:
                raise ParseError(f"line {n}: flags apply to base events, not commands")
            bad = set(fl) - set(FLAGS)
            if bad:
                raise ParseError(f"line {n}: unknown flags {sorted(bad)}")
            got = frozenset(fl)
            if flags.get(label.payload, got) != got:
                raise AlphabetConflict(f"line {n}: conflicting flags for {label.payload}")
            flags[label.payload] = got
        alphabet.append(label)
        pos += 1
    if len(set(alphabet)) != len(alphabet):
        raise ParseError("duplicate alphabet entry")
    head = expect("states")
    try:
        num_states = int(head[0])
    except (IndexError, ValueError):
        raise ParseError("'states' needs a count") from None
    names = tuple(head[1:]) or None
    if names is not None and len(names) != num_states:
        raise ParseError("state name count does not match 'states'")
    init = expect("initial")
    if len(init) != 1:
        raise ParseError("'initial' takes one state")
    try:
        initial = int(init[0])
        marked = [int(x) for x in expect("marked")]
    except ValueError as exc:
        raise ParseError(f"bad state index: {exc}") from None
    if expect("trans"):
        raise ParseError("'trans' takes no arguments")
    trans = []
    by_text = {str(e): e for e in alphabet}
    for n, ln in lines[pos:]:
        parts = ln.split()
        if len(parts) != 3:
            raise ParseError(f"line {n}: transition needs 'src label dst'")
        try:
            label = EventLabel.parse(parts[1])
            src, dst = int(parts[0]), int(parts[2])
        except (ValueError, MalformedAutomaton) as exc:
            raise ParseError(f"line {n}: {exc}") from None
        if str(label) not in by_text:
            raise ParseError(f"line {n}: label {parts[1]} not declared in alphabet")
        trans.append((src, label, dst))
    if len(set(trans)) != len(trans):
        raise MalformedAutomaton("duplicate transition")
    aut = Automaton(num_states, frozenset(alphabet), tuple(trans), initial, frozenset(marked), names)
    return AutomatonFile(aut, flags)


def serialize_automaton(a: Automaton, flags: dict[str, frozenset[str]] | None = None, names: bool = True) -> str:
    flags = flags or {}
    out = ["alphabet"]
    for e in sorted(a.alphabet):
        fl = flags.get(e.payload) if not e.is_command else None
        out.append(f"{e} {' '.join(f for f in FLAGS if f in fl)}".rstrip() if fl else str(e))
    head = f"states {a.num_states}"
    if names and a.state_names is not None and all(_plain_name(x) for x in a.state_names):
        head += " " + " ".join(a.state_names)
    out.append(head)
    out.append(f"initial {a.initial}")
    out.append(" ".join(["marked"] + [str(q) for q in sorted(a.marked)]))
    out.append("trans")
    out.extend(f"{s} {lab} {d}" for s, lab, d in a.transitions)
    return "\n".join(out) + "\n"


def _plain_name(x) -> bool:
    return isinstance(x, str) and x and not any(ch.isspace() or ch == "#" for ch in x)


def read_automaton(path: str | Path) -> AutomatonFile:
    return parse_automaton(Path(path).read_text(encoding="utf-8"))


def write_automaton(path: str | Path, a: Automaton, flags: dict[str, frozenset[str]] | None = None) -> None:
    Path(path).write_text(serialize_automaton(a, flags), encoding="utf-8")


def merge_flags(files: list[AutomatonFile]) -> dict[str, frozenset[str]]:
    merged: dict[str, frozenset[str]] = {}
    for f in files:
        for name, fl in f.flags.items():
            if merged.get(name, fl) != fl:
                raise AlphabetConflict(f"event {name} has flags {sorted(merged[name])} and {sorted(fl)}")
            merged[name] = fl
    return merged


def alphabet_from_flags(flags: dict[str, frozenset[str]], events: set[str]) -> AlphabetSpec:
    """AlphabetSpec over ``events``; events without flags are uncontrollable and unobservable."""
    get = lambda f: frozenset(e for e in events if f in flags.get(e, ()))  # noqa: E731
    return AlphabetSpec(frozenset(events), get("c"), get("o"), get("l"))


def compose_files(files: list[AutomatonFile]) -> tuple[Automaton, dict[str, frozenset[str]]]:
    flags = merge_flags(files)
    product = sync_product([f.automaton for f in files])
    return product, flags


@dataclass(frozen=True)
class ProblemFile:
    plants: tuple[Path, ...]
    params: ChannelParams
    bad_indices: frozenset[int] | None = None
    collision: tuple[str, ...] | None = None
    constraint: str = "networked"


def parse_problem(text: str, base: Path | None = None) -> ProblemFile:
    base = base or Path(".")
    values: dict[str, list[str]] = {}
    for n, raw in enumerate(text.splitlines(), 1):
        ln = _strip(raw)
        if not ln:
            continue
        key, *rest = ln.split()
        if key in values:
            raise ParseError(f"line {n}: repeated key {key!r}")
        values[key] = rest
    known = {"plant", "num_o", "num_c", "m", "capacity", "mechanism", "bad", "constraint"}
    unknown = set(values) - known
    if unknown:
        raise ParseError(f"unknown problem keys {sorted(unknown)}")
    if not values.get("plant"):
        raise ParseError("problem needs a 'plant' line")
    plants = tuple(base / p for p in values["plant"])
    for p in plants:
        if not p.exists():
            raise ParseError(f"plant file {p} not found")

    def number(key: str, default: int | None) -> int | None:
        if key not in values:
            return default
        try:
            (v,) = values[key]
            return int(v)
        except ValueError:
            raise ParseError(f"{key!r} needs one integer") from None

    try:
        mech = Mechanism(values.get("mechanism", ["first"])[0])
    except ValueError:
        raise ParseError("mechanism must be 'first' or 'last'") from None
    params = ChannelParams(number("num_o", 0), number("num_c", 0), number("m", 0), number("capacity", None), mech)
    bad_indices = collision = None
    bad = values.get("bad", [])
    if bad and bad[0] == "collision":
        collision = tuple(bad[1:]) or ("Track1", "Track2")
    elif bad:
        try:
            bad_indices = frozenset(int(x) for x in bad)
        except ValueError:
            raise ParseError("'bad' takes state indices or 'collision'") from None
    constraint = values.get("constraint", ["networked"])[0]
    if constraint != "networked":
        raise InvalidParams(f"unsupported constraint mode {constraint!r}")
    return ProblemFile(plants, params, bad_indices, collision, constraint)


def serialize_problem(p: ProblemFile, base: Path | None = None) -> str:
    rel = [str(x.relative_to(base)) if base else str(x) for x in p.plants]
    out = [
        "plant " + " ".join(rel),
        f"num_o {p.params.num_o}",
        f"num_c {p.params.num_c}",
        f"m {p.params.m}",
    ]
    if p.params.cc_capacity is not None:
        out.append(f"capacity {p.params.cc_capacity}")
    out.append(f"mechanism {p.params.mechanism.value}")
    if p.collision is not None:
        out.append("bad collision " + " ".join(p.collision))
    elif p.bad_indices:
        out.append("bad " + " ".join(str(q) for q in sorted(p.bad_indices)))
    out.append(f"constraint {p.constraint}")
    return "\n".join(out) + "\n"


def read_problem(path: str | Path) -> ProblemFile:
    path = Path(path)
    return parse_problem(path.read_text(encoding="utf-8"), path.parent)


def collision_states(plant: Automaton, components: list[Automaton], sections: tuple[str, ...]) -> frozenset[int]:
    """Composed-plant states where two components occupy the same named section."""
    for c in components:
        if c.state_names is None:
            raise ParseError("collision predicate needs named states in every plant file")
    out = set()
    for q, tup in enumerate(plant.state_names):
        names = [components[i].state_names[x] for i, x in enumerate(tup)]
        if any(a == b and a in sections for a, b in combinations(names, 2)):
            out.add(q)
    return frozenset(out)


def base_events(a: Automaton) -> set[str]:
    return {e.payload for e in a.alphabet if e.kind in (Kind.PLAIN, Kind.OBS_IN)}
