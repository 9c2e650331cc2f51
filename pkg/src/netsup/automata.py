"""Finite automata over the lifted event alphabet.

States are integers ``0..n-1`` numbered breadth-first from the initial state,
expanding successors in a fixed total order on labels (kind rank, then
payload).  Every construction in the package goes through :func:`explore`, so
building the same automaton twice yields identical objects.
"""

from __future__ import annotations

import enum
from collections import defaultdict, deque
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from typing import Any, Callable, Hashable, Iterable, Iterator, Mapping

from .errors import ConstraintViolation, EmptyList, InvalidParams, MalformedAutomaton, UnknownEvent


class Kind(enum.IntEnum):
    PLAIN = 0
    OBS_IN = 1
    OBS_OUT = 2
    OBS_LOSS = 3
    CMD_IN = 4
    CMD_OUT = 5
    CMD_LOSS = 6


CMD_KINDS = frozenset({Kind.CMD_IN, Kind.CMD_OUT, Kind.CMD_LOSS})
OBS_KINDS = frozenset({Kind.OBS_IN, Kind.OBS_OUT, Kind.OBS_LOSS})

_PREFIX = {
    Kind.PLAIN: "",
    Kind.OBS_IN: "in:",
    Kind.OBS_OUT: "out:",
    Kind.OBS_LOSS: "loss:",
    Kind.CMD_IN: "cmd_in:",
    Kind.CMD_OUT: "cmd_out:",
    Kind.CMD_LOSS: "cmd_loss:",
}


@dataclass(frozen=True)
class EventLabel:
    """One event of the lifted alphabet.

    ``payload`` is a base event name for PLAIN and OBS_* labels and a nonempty
    frozenset of controllable base events (a control command) for CMD_* labels.
    """

    kind: Kind
    payload: Any

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", Kind(self.kind))
        if self.kind in CMD_KINDS:
            if isinstance(self.payload, str):
                raise MalformedAutomaton(f"command label needs a set payload, got {self.payload!r}")
            cmd = frozenset(self.payload)
            if not cmd:
                raise MalformedAutomaton("command payload must be nonempty")
            object.__setattr__(self, "payload", cmd)
        elif not isinstance(self.payload, str) or not self.payload:
            raise MalformedAutomaton(f"event label needs a base event name, got {self.payload!r}")

    @cached_property
    def sort_key(self) -> tuple:
        if self.kind in CMD_KINDS:
            return (int(self.kind), tuple(sorted(self.payload)))
        return (int(self.kind), self.payload)

    def __lt__(self, other: "EventLabel") -> bool:
        return self.sort_key < other.sort_key

    @property
    def is_command(self) -> bool:
        return self.kind in CMD_KINDS

    def __str__(self) -> str:
        if self.kind in CMD_KINDS:
            body = "{" + ",".join(sorted(self.payload)) + "}"
        else:
            body = self.payload
        return _PREFIX[self.kind] + body

    def __repr__(self) -> str:
        return f"EventLabel({self})"

    @classmethod
    def parse(cls, text: str) -> "EventLabel":
        text = text.strip()
        for kind in sorted(Kind, key=lambda k: -len(_PREFIX[k])):
            prefix = _PREFIX[kind]
            if prefix and text.startswith(prefix):
                body = text[len(prefix):]
                if kind in CMD_KINDS:
                    if not (body.startswith("{") and body.endswith("}")):
                        raise MalformedAutomaton(f"bad command label {text!r}")
                    names = [n.strip() for n in body[1:-1].split(",") if n.strip()]
                    return cls(kind, frozenset(names))
                return cls(kind, body)
        if any(ch in text for ch in ":{},") or not text:
            raise MalformedAutomaton(f"bad event label {text!r}")
        return cls(Kind.PLAIN, text)


def plain(name: str) -> EventLabel:
    return EventLabel(Kind.PLAIN, name)


def obs_in(name: str) -> EventLabel:
    return EventLabel(Kind.OBS_IN, name)


def obs_out(name: str) -> EventLabel:
    return EventLabel(Kind.OBS_OUT, name)


def obs_loss(name: str) -> EventLabel:
    return EventLabel(Kind.OBS_LOSS, name)


def cmd_in(cmd: Iterable[str]) -> EventLabel:
    return EventLabel(Kind.CMD_IN, frozenset(cmd))


def cmd_out(cmd: Iterable[str]) -> EventLabel:
    return EventLabel(Kind.CMD_OUT, frozenset(cmd))


def cmd_loss(cmd: Iterable[str]) -> EventLabel:
    return EventLabel(Kind.CMD_LOSS, frozenset(cmd))


@dataclass(frozen=True)
class AlphabetSpec:
    """Base alphabet with controllable, observable and lossy subsets."""

    sigma: frozenset[str]
    sigma_c: frozenset[str] = frozenset()
    sigma_o: frozenset[str] = frozenset()
    sigma_ol: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        for name in ("sigma", "sigma_c", "sigma_o", "sigma_ol"):
            object.__setattr__(self, name, frozenset(getattr(self, name)))
        if not self.sigma_c <= self.sigma:
            raise InvalidParams("sigma_c must be a subset of sigma")
        if not self.sigma_o <= self.sigma:
            raise InvalidParams("sigma_o must be a subset of sigma")
        if not self.sigma_ol <= self.sigma_o:
            raise InvalidParams("sigma_ol must be a subset of sigma_o")

    @property
    def sigma_uo(self) -> frozenset[str]:
        return self.sigma - self.sigma_o

    @property
    def sigma_uc(self) -> frozenset[str]:
        return self.sigma - self.sigma_c

    @cached_property
    def commands(self) -> tuple[frozenset[str], ...]:
        """All nonempty subsets of sigma_c, in label order."""
        names = sorted(self.sigma_c)
        cmds = []
        for mask in range(1, 1 << len(names)):
            cmds.append(frozenset(n for i, n in enumerate(names) if mask >> i & 1))
        return tuple(sorted(cmds, key=lambda c: tuple(sorted(c))))

    def plant_label(self, name: str) -> EventLabel:
        """Label carried by base event ``name`` in the relabelled plant."""
        return obs_in(name) if name in self.sigma_o else plain(name)


@dataclass(frozen=True)
class ControlConstraint:
    controllable: frozenset[EventLabel]
    observable: frozenset[EventLabel]

    def __post_init__(self) -> None:
        object.__setattr__(self, "controllable", frozenset(self.controllable))
        object.__setattr__(self, "observable", frozenset(self.observable))

    def check(self) -> None:
        if not self.controllable <= self.observable:
            extra = sorted(self.controllable - self.observable)
            raise ConstraintViolation(f"controllable labels not observable: {[str(e) for e in extra]}")

    @classmethod
    def networked(cls, alph: AlphabetSpec) -> "ControlConstraint":
        """The supervisor controls command sends and observes them plus receipts."""
        sends = frozenset(cmd_in(c) for c in alph.commands)
        receipts = frozenset(obs_out(s) for s in alph.sigma_o)
        return cls(sends, sends | receipts)


Transition = tuple[int, EventLabel, int]


def _transition_key(t: Transition) -> tuple:
    return (t[0], t[1].sort_key, t[2])


@dataclass(frozen=True, eq=False)
class Automaton:
    """A possibly non-deterministic finite automaton.

    ``state_names`` optionally records what each state stands for (component
    state tuples of a product, channel contents, observer cells, ...).
    """

    num_states: int
    alphabet: frozenset[EventLabel]
    transitions: tuple[Transition, ...]
    initial: int = 0
    marked: frozenset[int] = frozenset()
    state_names: tuple | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "alphabet", frozenset(self.alphabet))
        object.__setattr__(self, "marked", frozenset(self.marked))
        if self.num_states < 1:
            raise MalformedAutomaton("automaton needs at least one state")
        if not 0 <= self.initial < self.num_states:
            raise MalformedAutomaton(f"initial state {self.initial} out of range")
        if any(not 0 <= q < self.num_states for q in self.marked):
            raise MalformedAutomaton("marked state out of range")
        trans = tuple(sorted(self.transitions, key=_transition_key))
        for i, (src, label, dst) in enumerate(trans):
            if not (0 <= src < self.num_states and 0 <= dst < self.num_states):
                raise MalformedAutomaton(f"transition {src} {label} {dst} has an out-of-range state")
            if label not in self.alphabet:
                raise MalformedAutomaton(f"transition label {label} not in alphabet")
            if i and trans[i - 1] == (src, label, dst):
                raise MalformedAutomaton(f"duplicate transition {src} {label} {dst}")
        object.__setattr__(self, "transitions", trans)
        if self.state_names is not None and len(self.state_names) != self.num_states:
            raise MalformedAutomaton("state_names length does not match num_states")

    @property
    def num_transitions(self) -> int:
        return len(self.transitions)

    @cached_property
    def adjacency(self) -> tuple[dict[EventLabel, tuple[int, ...]], ...]:
        adj: list[dict[EventLabel, list[int]]] = [defaultdict(list) for _ in range(self.num_states)]
        for src, label, dst in self.transitions:
            adj[src][label].append(dst)
        return tuple({lab: tuple(d) for lab, d in row.items()} for row in adj)

    def enabled(self, state: int) -> frozenset[EventLabel]:
        return frozenset(self.adjacency[state])

    def successors(self, state: int, label: EventLabel) -> tuple[int, ...]:
        return self.adjacency[state].get(label, ())

    @cached_property
    def is_deterministic(self) -> bool:
        return all(len(d) == 1 for row in self.adjacency for d in row.values())

    def signature(self) -> tuple:
        """Hashable structural fingerprint (numbering-dependent)."""
        return (
            self.num_states,
            tuple(sorted(e.sort_key for e in self.alphabet)),
            tuple((s, lab.sort_key, d) for s, lab, d in self.transitions),
            self.initial,
            tuple(sorted(self.marked)),
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Automaton):
            return NotImplemented
        return self.signature() == other.signature()

    def __hash__(self) -> int:
        return hash(self.signature())


@dataclass(frozen=True)
class CheckResult:
    """Outcome of a verification predicate; falsy on failure."""

    ok: bool
    witness: Any = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.ok


def explore(
    initial: Hashable,
    successors: Callable[[Any], Iterable[tuple[EventLabel, Any]]],
    alphabet: Iterable[EventLabel],
    is_marked: Callable[[Any], bool],
) -> Automaton:
    """Breadth-first construction of the reachable part of an implicit automaton.

    Successor keys must be mutually comparable; they break ties between
    non-deterministic moves on the same label.
    """
    index = {initial: 0}
    names = [initial]
    queue = deque([initial])
    trans: list[Transition] = []
    while queue:
        key = queue.popleft()
        src = index[key]
        for label, nxt in sorted(set(successors(key)), key=lambda e: (e[0].sort_key, e[1])):
            dst = index.get(nxt)
            if dst is None:
                dst = index[nxt] = len(names)
                names.append(nxt)
                queue.append(nxt)
            trans.append((src, label, dst))
    marked = frozenset(i for i, n in enumerate(names) if is_marked(n))
    return Automaton(len(names), frozenset(alphabet), tuple(trans), 0, marked, tuple(names))


def sync_product(components: Iterable[Automaton]) -> Automaton:
    """Reachable synchronous product; ``state_names`` are component state tuples."""
    comps = list(components)
    if not comps:
        raise EmptyList("sync_product needs at least one automaton")
    alphabet = frozenset().union(*(c.alphabet for c in comps))
    owners = {lab: tuple(i for i, c in enumerate(comps) if lab in c.alphabet) for lab in alphabet}
    adjs = [c.adjacency for c in comps]

    def succ(key: tuple[int, ...]) -> Iterator[tuple[EventLabel, tuple[int, ...]]]:
        candidates = set()
        for i, q in enumerate(key):
            candidates.update(adjs[i][q])
        for lab in candidates:
            own = owners[lab]
            choices = []
            for i in own:
                dsts = adjs[i][key[i]].get(lab)
                if not dsts:
                    break
                choices.append(dsts)
            else:
                for combo in product(*choices):
                    nxt = list(key)
                    for i, dst in zip(own, combo):
                        nxt[i] = dst
                    yield lab, tuple(nxt)

    init = tuple(c.initial for c in comps)
    return explore(init, succ, alphabet, lambda key: all(q in comps[i].marked for i, q in enumerate(key)))


def _renumbered(a: Automaton, keep: Callable[[int, EventLabel, int], bool] | None = None) -> Automaton:
    adj = a.adjacency

    def succ(q: int) -> Iterator[tuple[EventLabel, int]]:
        for lab, dsts in adj[q].items():
            for d in dsts:
                if keep is None or keep(q, lab, d):
                    yield lab, d

    out = explore(a.initial, succ, a.alphabet, lambda q: q in a.marked)
    names = out.state_names if a.state_names is None else tuple(a.state_names[q] for q in out.state_names)
    return Automaton(out.num_states, out.alphabet, out.transitions, 0, out.marked, names)


def reachable(a: Automaton) -> Automaton:
    """Restriction to states reachable from the initial state, renumbered canonically."""
    return _renumbered(a)


def restrict(a: Automaton, states: Iterable[int]) -> Automaton:
    """Reachable part of the sub-automaton induced by ``states`` (which must hold the initial)."""
    keep = frozenset(states)
    if a.initial not in keep:
        raise MalformedAutomaton("restriction must keep the initial state")
    return _renumbered(a, lambda s, _l, d: s in keep and d in keep)


def reachable_states(a: Automaton) -> set[int]:
    seen = {a.initial}
    stack = [a.initial]
    adj = a.adjacency
    while stack:
        q = stack.pop()
        for dsts in adj[q].values():
            for d in dsts:
                if d not in seen:
                    seen.add(d)
                    stack.append(d)
    return seen


def coreachable_states(a: Automaton, targets: Iterable[int] | None = None) -> set[int]:
    """States from which some state in ``targets`` (default: marked) is reachable."""
    pred: list[list[int]] = [[] for _ in range(a.num_states)]
    for src, _lab, dst in a.transitions:
        pred[dst].append(src)
    seen = set(a.marked if targets is None else targets)
    stack = list(seen)
    while stack:
        q = stack.pop()
        for p in pred[q]:
            if p not in seen:
                seen.add(p)
                stack.append(p)
    return seen


def path_to(a: Automaton, targets: Iterable[int] | Callable[[int], bool]) -> tuple[int, tuple[EventLabel, ...]] | None:
    """Shortest label path from the initial state to a target, in canonical BFS order."""
    hit = targets if callable(targets) else frozenset(targets).__contains__
    parent: dict[int, tuple[int, EventLabel] | None] = {a.initial: None}
    queue = deque([a.initial])
    found = None
    while queue:
        q = queue.popleft()
        if hit(q):
            found = q
            break
        for lab in sorted(a.adjacency[q]):
            for d in a.adjacency[q][lab]:
                if d not in parent:
                    parent[d] = (q, lab)
                    queue.append(d)
    if found is None:
        return None
    labels = []
    q = found
    while parent[q] is not None:
        q, lab = parent[q]
        labels.append(lab)
    return found, tuple(reversed(labels))


def is_nonblocking(a: Automaton) -> CheckResult:
    """Every reachable state can reach a marked state; witness is ``(state, path)``."""
    bad = reachable_states(a) - coreachable_states(a)
    if not bad:
        return CheckResult(True)
    found = path_to(a, bad)
    assert found is not None
    return CheckResult(False, found, f"state {found[0]} cannot reach a marked state")


def trim(a: Automaton) -> Automaton:
    """Reachable and coreachable part; the initial state is kept even when blocking."""
    keep = coreachable_states(a) | {a.initial}
    return restrict(a, keep)


def _bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _subset_construction(
    a: Automaton, visible: Mapping[EventLabel, EventLabel], alphabet: Iterable[EventLabel]
) -> Automaton:
    # labels absent from ``visible`` are erased (epsilon moves); cells are bitmasks
    # and closure distributes over union, so per-state closures are precomputed
    adj = a.adjacency
    closure = [0] * a.num_states
    for q in range(a.num_states):
        seen = {q}
        stack = [q]
        while stack:
            x = stack.pop()
            for lab, dsts in adj[x].items():
                if lab not in visible:
                    for d in dsts:
                        if d not in seen:
                            seen.add(d)
                            stack.append(d)
        closure[q] = sum(1 << x for x in seen)
    step: list[list[tuple[EventLabel, int]]] = []
    for q in range(a.num_states):
        row: dict[EventLabel, int] = defaultdict(int)
        for lab, dsts in adj[q].items():
            out = visible.get(lab)
            if out is not None:
                for d in dsts:
                    row[out] |= closure[d]
        step.append(list(row.items()))

    def succ(cell: int) -> Iterator[tuple[EventLabel, int]]:
        moves: dict[EventLabel, int] = defaultdict(int)
        for q in _bits(cell):
            for lab, dst in step[q]:
                moves[lab] |= dst
        return iter(moves.items())

    marked = sum(1 << q for q in a.marked)
    result = explore(closure[a.initial], succ, alphabet, lambda cell: bool(cell & marked))
    names = tuple(tuple(_bits(c)) for c in result.state_names)
    return Automaton(result.num_states, result.alphabet, result.transitions, 0, result.marked, names)


def observer(a: Automaton, observable: Iterable[EventLabel]) -> tuple[Automaton, tuple[frozenset[int], ...]]:
    """Subset construction w.r.t. ``observable``.

    Returns the deterministic observer and, per observer state, the cell of
    ``a``-states it stands for.  A cell is marked iff it holds a marked state.
    """
    obs = frozenset(observable)
    unknown = obs - a.alphabet
    if unknown:
        raise UnknownEvent(f"observable labels not in alphabet: {sorted(str(e) for e in unknown)}")
    result = _subset_construction(a, {e: e for e in obs}, obs)
    cells = tuple(frozenset(c) for c in result.state_names)
    return result, cells


def determinize(a: Automaton) -> Automaton:
    """Language-equivalent deterministic automaton (closed and marked)."""
    return _subset_construction(a, {e: e for e in a.alphabet}, a.alphabet)


def minimize(a: Automaton) -> Automaton:
    """Minimal trim-free DFA of L(a) and Lm(a) by Moore partition refinement."""
    d = determinize(a) if not a.is_deterministic else reachable(a)
    adj = d.adjacency
    block = [int(q in d.marked) for q in range(d.num_states)]
    while True:
        sig = {}
        new = []
        for q in range(d.num_states):
            key = (block[q], tuple(sorted((lab.sort_key, block[ds[0]]) for lab, ds in adj[q].items())))
            new.append(sig.setdefault(key, len(sig)))
        if len(sig) == len(set(block)):
            break
        block = new
    block = new

    def succ(b: int):
        q = rep[b]
        for lab, (dst,) in adj[q].items():
            yield lab, block[dst]

    rep = {}
    for q in range(d.num_states):
        rep.setdefault(block[q], q)
    out = explore(block[d.initial], succ, d.alphabet, lambda b: rep[b] in d.marked)
    return Automaton(out.num_states, out.alphabet, out.transitions, 0, out.marked)


def project(a: Automaton, mapping: Mapping[EventLabel, EventLabel]) -> Automaton:
    """Deterministic automaton of the image of L(a) under a relabelling projection.

    Labels missing from ``mapping`` are erased.
    """
    return _subset_construction(a, dict(mapping), frozenset(mapping.values()))


def relabel(a: Automaton, mapping: Mapping[EventLabel, EventLabel]) -> Automaton:
    """Rename labels (labels absent from ``mapping`` keep their name)."""
    rename = lambda e: mapping.get(e, e)  # noqa: E731
    trans = sorted({(s, rename(lab), d) for s, lab, d in a.transitions}, key=_transition_key)
    return Automaton(a.num_states, frozenset(map(rename, a.alphabet)), tuple(trans), a.initial, a.marked, a.state_names)


def language_included(a: Automaton, b: Automaton) -> CheckResult:
    """L(a) ⊆ L(b) and Lm(a) ⊆ Lm(b).  Witness is ``(kind, string)``."""
    da, db = determinize(a), determinize(b)
    adj_a, adj_b = da.adjacency, db.adjacency
    parent: dict[tuple[int, int], tuple[tuple[int, int], EventLabel] | None] = {(0, 0): None}
    queue = deque([(0, 0)])

    def trace(pair: tuple[int, int], last: EventLabel | None = None) -> tuple[EventLabel, ...]:
        out = [] if last is None else [last]
        while parent[pair] is not None:
            pair, lab = parent[pair]
            out.append(lab)
        return tuple(reversed(out))

    while queue:
        pair = queue.popleft()
        qa, qb = pair
        if qa in da.marked and qb not in db.marked:
            return CheckResult(False, ("marked", trace(pair)), "marked string of a not marked in b")
        for lab in sorted(adj_a[qa]):
            (na,) = adj_a[qa][lab]
            nb = adj_b[qb].get(lab)
            if nb is None:
                return CheckResult(False, ("closed", trace(pair, lab)), "string of a not generated by b")
            nxt = (na, nb[0])
            if nxt not in parent:
                parent[nxt] = (pair, lab)
                queue.append(nxt)
    return CheckResult(True)


def language_equal(a: Automaton, b: Automaton) -> CheckResult:
    fwd = language_included(a, b)
    if not fwd:
        return fwd
    back = language_included(b, a)
    if not back:
        return CheckResult(False, back.witness, "b has a string a lacks: " + back.detail)
    return CheckResult(True)


def is_isomorphic(a: Automaton, b: Automaton) -> bool:
    """Graph isomorphism preserving labels, marking and the initial state."""
    import networkx as nx
    from networkx.algorithms.isomorphism import categorical_multiedge_match

    if (a.num_states, a.num_transitions, a.alphabet, len(a.marked)) != (
        b.num_states,
        b.num_transitions,
        b.alphabet,
        len(b.marked),
    ):
        return False

    def graph(x: Automaton) -> "nx.MultiDiGraph":
        g = nx.MultiDiGraph()
        for q in range(x.num_states):
            g.add_node(q, tag=(q in x.marked, q == x.initial))
        for s, lab, d in x.transitions:
            g.add_edge(s, d, label=lab.sort_key)
        return g

    return nx.is_isomorphic(
        graph(a),
        graph(b),
        node_match=lambda u, v: u["tag"] == v["tag"],
        edge_match=categorical_multiedge_match("label", None),
    )
