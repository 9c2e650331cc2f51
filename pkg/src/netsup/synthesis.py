"""Supremal safe, controllable, normal, nonblocking supervisors.

Controllable labels are required to be observable, so a supervisor only needs
to know the observer cell (the set of plant states consistent with what it has
seen).  Synthesis prunes the plant's observer to a fixpoint; the pruned cell
automaton, with self-loops on every unobservable label, is the supervisor.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from itertools import product
from typing import Iterable

from .automata import (
    AlphabetSpec,
    Automaton,
    CheckResult,
    ControlConstraint,
    EventLabel,
    Kind,
    coreachable_states,
    explore,
    is_nonblocking,
    observer,
    path_to,
    plain,
    reachable_states,
    sync_product,
)
from .errors import InvalidParams, LimitExceeded, MalformedAutomaton


@dataclass(frozen=True, eq=False)
class SynthesisProblem:
    plant: Automaton
    constraint: ControlConstraint
    bad: frozenset[int] = frozenset()

    def __post_init__(self) -> None:
        object.__setattr__(self, "bad", frozenset(self.bad))
        if any(not 0 <= q < self.plant.num_states for q in self.bad):
            raise MalformedAutomaton("bad state index out of range")

    @property
    def observable(self) -> frozenset[EventLabel]:
        return self.constraint.observable & self.plant.alphabet

    @property
    def controllable(self) -> frozenset[EventLabel]:
        return self.constraint.controllable & self.plant.alphabet


@dataclass(frozen=True, eq=False)
class Supervisor:
    """Deterministic supervisor over the plant alphabet.

    ``cells`` gives, per supervisor state, the plant states it cannot tell
    apart (present when the supervisor was built from an observer).
    """

    automaton: Automaton
    constraint: ControlConstraint
    cells: tuple[frozenset[int], ...] | None = field(default=None, repr=False)

    def __bool__(self) -> bool:
        return True

    def enabled_commands(self, state: int) -> frozenset[EventLabel]:
        return self.automaton.enabled(state) & self.constraint.controllable

    def closed_loop(self, plant: Automaton) -> Automaton:
        return sync_product([self.automaton, plant])


@dataclass(frozen=True)
class EmptySupervisor:
    """No supervisor exists.  ``reason`` explains why the initial cell was pruned."""

    reason: str
    cell: frozenset[int] = frozenset()

    def __bool__(self) -> bool:
        return False


def _cell_supervisor(
    plant: Automaton,
    constraint: ControlConstraint,
    obs: Automaton,
    cells: tuple[frozenset[int], ...],
    keep_edge,
) -> Supervisor:
    # observer restricted to kept edges, plus unobservable self-loops
    unobservable = sorted(plant.alphabet - obs.alphabet)
    adj = obs.adjacency

    def succ(c: int):
        for lab, (d,) in adj[c].items():
            if keep_edge(c, lab, d):
                yield lab, d
        for lab in unobservable:
            yield lab, c

    sup = explore(obs.initial, succ, plant.alphabet, lambda _c: True)
    sup_cells = tuple(cells[c] for c in sup.state_names)
    named = Automaton(sup.num_states, sup.alphabet, sup.transitions, 0, sup.marked, sup_cells)
    return Supervisor(named, constraint, sup_cells)


def synthesize_supremal(problem: SynthesisProblem) -> Supervisor | EmptySupervisor:
    """Supremal supervisor for ``problem``, or :class:`EmptySupervisor`."""
    problem.constraint.check()
    plant = problem.plant
    observable = problem.observable
    controllable = problem.controllable
    obs, cells = observer(plant, observable)
    n = obs.num_states
    oadj = obs.adjacency
    padj = plant.adjacency

    reason: dict[int, str] = {}
    for c, cell in enumerate(cells):
        if cell & problem.bad:
            reason[c] = "bad-containment"

    preds: list[list[tuple[int, EventLabel]]] = [[] for _ in range(n)]
    for c in range(n):
        for lab, (d,) in oadj[c].items():
            preds[d].append((c, lab))

    def propagate(seeds: Iterable[int]) -> None:
        # a cell with an uncontrollable edge into a pruned cell is pruned too
        stack = list(seeds)
        while stack:
            d = stack.pop()
            for c, lab in preds[d]:
                if c not in reason and lab not in controllable:
                    reason[c] = f"uncontrollable-reach via {lab}"
                    stack.append(c)

    propagate(list(reason))
    while True:
        alive = [c for c in range(n) if c not in reason]
        if obs.initial in reason:
            break
        blocking = _blocking_cells(plant, padj, oadj, cells, alive, reason, observable)
        if not blocking:
            break
        for c in blocking:
            reason[c] = "blocking"
        propagate(blocking)

    if obs.initial in reason:
        return EmptySupervisor(reason[obs.initial], cells[obs.initial])
    return _cell_supervisor(plant, problem.constraint, obs, cells, lambda _c, _l, d: d not in reason)


def _blocking_cells(plant, padj, oadj, cells, alive, dead, observable) -> list[int]:
    """Alive cells holding a plant state that cannot reach a marked state in the pair graph."""
    index: dict[tuple[int, int], int] = {}
    for c in alive:
        for q in cells[c]:
            index[(c, q)] = len(index)
    pred: list[list[int]] = [[] for _ in range(len(index))]
    marked = []
    for (c, q), i in index.items():
        if q in plant.marked:
            marked.append(i)
        for lab, dsts in padj[q].items():
            if lab in observable:
                nxt = oadj[c].get(lab)
                if nxt is None or nxt[0] in dead:
                    continue
                c2 = nxt[0]
            else:
                c2 = c
            for q2 in dsts:
                pred[index[(c2, q2)]].append(i)
    seen = set(marked)
    stack = list(marked)
    while stack:
        j = stack.pop()
        for i in pred[j]:
            if i not in seen:
                seen.add(i)
                stack.append(i)
    out = set()
    for (c, q), i in index.items():
        if i not in seen:
            out.add(c)
    return sorted(out)


# ---------------------------------------------------------------------------
# verification predicates


def _closed_loop(sup: Supervisor | Automaton, plant: Automaton) -> Automaton:
    aut = sup.automaton if isinstance(sup, Supervisor) else sup
    return sync_product([aut, plant])


def check_controllability(sup: Supervisor | Automaton, plant: Automaton, constraint: ControlConstraint) -> CheckResult:
    """No uncontrollable label the plant offers is refused by the supervisor.

    Witness: ``((sup_state, plant_state), label, path)``.
    """
    aut = sup.automaton if isinstance(sup, Supervisor) else sup
    cl = _closed_loop(aut, plant)
    sadj = aut.adjacency
    for x in range(cl.num_states):
        s, q = cl.state_names[x]
        for lab in sorted(plant.adjacency[q]):
            if lab in constraint.controllable or lab not in aut.alphabet:
                continue
            if lab not in sadj[s]:
                found = path_to(cl, [x])
                return CheckResult(False, ((s, q), lab, found[1]), f"uncontrollable {lab} refused")
    return CheckResult(True)


def _twin_witness(cl: Automaton, observable, left: int, right: int):
    # two strings with equal projection reaching closed-loop states left / right
    start = (cl.initial, cl.initial)
    parent = {start: None}
    queue = deque([start])
    adj = cl.adjacency
    while queue:
        pair = queue.popleft()
        if pair == (left, right):
            s1, s2 = [], []
            while parent[pair] is not None:
                pair, (l1, l2) = parent[pair]
                if l1 is not None:
                    s1.append(l1)
                if l2 is not None:
                    s2.append(l2)
            return tuple(reversed(s1)), tuple(reversed(s2))
        a, b = pair
        moves = []
        for lab, dsts in adj[a].items():
            if lab not in observable:
                moves += [((d, b), (lab, None)) for d in dsts]
            else:
                for d2 in adj[b].get(lab, ()):
                    moves += [((d, d2), (lab, lab)) for d in dsts]
        for lab, dsts in adj[b].items():
            if lab not in observable:
                moves += [((a, d), (None, lab)) for d in dsts]
        for nxt, labs in moves:
            if nxt not in parent:
                parent[nxt] = (pair, labs)
                queue.append(nxt)
    return None


def check_normality(sup: Supervisor | Automaton, plant: Automaton, constraint: ControlConstraint) -> CheckResult:
    """Strings with equal observable projection receive the same control decisions.

    Checked on the closed loop's observer: within one cell, a label the plant
    offers must be enabled for every member or for none, and unobservable
    labels must never be refused.  Witness: two strings ``(s1, s2)`` with equal
    projection where ``s1`` can continue with ``label`` in the closed loop and
    ``s2`` cannot, although the plant allows it.
    """
    aut = sup.automaton if isinstance(sup, Supervisor) else sup
    cl = _closed_loop(aut, plant)
    observable = constraint.observable & cl.alphabet
    sadj, padj = aut.adjacency, plant.adjacency
    _obs, cells = observer(cl, observable)

    def refuses(x: int, lab: EventLabel) -> bool:
        s, q = cl.state_names[x]
        return lab in padj[q] and lab in aut.alphabet and lab not in sadj[s]

    for cell in cells:
        members = sorted(cell)
        for x in members:
            s, q = cl.state_names[x]
            for lab in padj[q]:
                if lab not in observable and refuses(x, lab):
                    return CheckResult(False, (path_to(cl, [x])[1], lab), f"unobservable {lab} refused")
        offered: dict[EventLabel, list[int]] = {}
        for x in members:
            for lab in cl.adjacency[x]:
                if lab in observable:
                    offered.setdefault(lab, []).append(x)
        for lab in sorted(offered):
            for y in members:
                if refuses(y, lab):
                    x = offered[lab][0]
                    strings = _twin_witness(cl, observable, x, y)
                    return CheckResult(False, (strings, lab), f"decision on {lab} differs within one observation")
    return CheckResult(True)


def check_safety(sup: Supervisor | Automaton, plant: Automaton, bad: Iterable[int]) -> CheckResult:
    """No closed-loop state has its plant component in ``bad``.  Witness: ``(state, path)``."""
    bad = frozenset(bad)
    if not bad:
        return CheckResult(True)
    cl = _closed_loop(sup, plant)
    found = path_to(cl, lambda x: cl.state_names[x][1] in bad)
    if found is None:
        return CheckResult(True)
    return CheckResult(False, (cl.state_names[found[0]][1], found[1]), "bad plant state reachable")


def check_closed_loop_nonblocking(sup: Supervisor | Automaton, plant: Automaton) -> CheckResult:
    return is_nonblocking(_closed_loop(sup, plant))


def verify(sup: Supervisor, problem: SynthesisProblem) -> dict[str, CheckResult]:
    plant = problem.plant
    return {
        "safety": check_safety(sup, plant, problem.bad),
        "controllability": check_controllability(sup, plant, problem.constraint),
        "normality": check_normality(sup, plant, problem.constraint),
        "nonblocking": check_closed_loop_nonblocking(sup, plant),
    }


def _valid(sup: Supervisor | Automaton, problem: SynthesisProblem) -> bool:
    plant = problem.plant
    return bool(
        check_safety(sup, plant, problem.bad)
        and check_controllability(sup, plant, problem.constraint)
        and check_normality(sup, plant, problem.constraint)
        and check_closed_loop_nonblocking(sup, plant)
    )


def check_local_maximality(sup: Supervisor, problem: SynthesisProblem) -> CheckResult:
    """Re-enabling any single refused controllable decision breaks a required property.

    The re-enabled label leads to the supervisor state tracking the resulting
    observation cell when one exists; otherwise to a fresh state for that cell
    whose continuations stay inside the supervisor's existing cells.  Witness
    on failure: ``(sup_state, label)`` that could be safely re-enabled.
    """
    if sup.cells is None:
        raise InvalidParams("local maximality needs a cell-based supervisor")
    plant = problem.plant
    observable = problem.observable
    controllable = problem.controllable
    aut = sup.automaton
    obs, cells = observer(plant, observable)
    cell_of_obs = {cell: i for i, cell in enumerate(cells)}
    sup_of_cell = {cell: x for x, cell in enumerate(sup.cells)}
    cl = sup.closed_loop(plant)
    live = sorted({cl.state_names[i][0] for i in range(cl.num_states)})
    unobservable = sorted(plant.alphabet - observable)

    for x in live:
        oc = cell_of_obs.get(sup.cells[x])
        if oc is None:
            continue
        for lab in sorted(obs.adjacency[oc]):
            if lab not in controllable or lab in aut.adjacency[x]:
                continue
            target = cells[obs.adjacency[oc][lab][0]]
            trans = list(aut.transitions)
            n = aut.num_states
            y = sup_of_cell.get(target)
            if y is None:
                y = n
                n += 1
                ty = cell_of_obs[target]
                for lab2, (d,) in obs.adjacency[ty].items():
                    d_sup = sup_of_cell.get(cells[d])
                    if d_sup is not None:
                        trans.append((y, lab2, d_sup))
                trans += [(y, u, y) for u in unobservable]
            trans.append((x, lab, y))
            candidate = Automaton(n, aut.alphabet, tuple(trans), aut.initial, frozenset(range(n)))
            if _valid(candidate, problem):
                return CheckResult(False, (x, lab), f"re-enabling {lab} at state {x} stays valid")
    return CheckResult(True)


# ---------------------------------------------------------------------------
# brute-force oracle


@dataclass(frozen=True)
class BruteForceLimits:
    max_states: int = 8
    max_labels: int = 4
    max_policies: int = 1 << 16


def brute_force_supremal(
    problem: SynthesisProblem, limits: BruteForceLimits = BruteForceLimits()
) -> Supervisor | EmptySupervisor:
    """Union of every valid observation-based control policy, for tiny plants.

    Enumerates all maps from observer cells to sets of enabled controllable
    labels, keeps the policies whose closed loop is safe, controllable, normal
    and nonblocking, and returns a deterministic supervisor for the union of
    their closed-loop languages.
    """
    plant = problem.plant
    problem.constraint.check()
    if plant.num_states > limits.max_states or len(plant.alphabet) > limits.max_labels:
        raise LimitExceeded(
            f"brute force limited to {limits.max_states} states and {limits.max_labels} labels"
        )
    observable = problem.observable
    controllable = problem.controllable
    obs, cells = observer(plant, observable)
    choices = []
    for c in range(obs.num_states):
        ctrl = sorted(lab for lab in obs.adjacency[c] if lab in controllable)
        subsets = [frozenset(lab for i, lab in enumerate(ctrl) if mask >> i & 1) for mask in range(1 << len(ctrl))]
        choices.append(subsets)
    total = 1
    for ch in choices:
        total *= len(ch)
    if total > limits.max_policies:
        raise LimitExceeded(f"{total} policies exceed the limit of {limits.max_policies}")

    valid_loops = []
    for policy in product(*choices):
        sup = _cell_supervisor(
            plant,
            problem.constraint,
            obs,
            cells,
            lambda c, lab, _d, policy=policy: lab not in controllable or lab in policy[c],
        )
        if _valid(sup, problem):
            valid_loops.append(sup.closed_loop(plant))
    if not valid_loops:
        return EmptySupervisor("no valid policy")
    union = _language_union(valid_loops, plant.alphabet)
    return Supervisor(union, problem.constraint)


def _language_union(automata: list[Automaton], alphabet: frozenset[EventLabel]) -> Automaton:
    """Deterministic, all-marked acceptor of the union of the closed languages."""
    adjs = [a.adjacency for a in automata]

    def succ(key: tuple[tuple[int, int], ...]):
        moves: dict[EventLabel, set[tuple[int, int]]] = {}
        for i, q in key:
            for lab, dsts in adjs[i][q].items():
                moves.setdefault(lab, set()).update((i, d) for d in dsts)
        for lab, nxt in moves.items():
            yield lab, tuple(sorted(nxt))

    init = tuple((i, a.initial) for i, a in enumerate(automata))
    out = explore(init, succ, alphabet, lambda _k: True)
    return Automaton(out.num_states, out.alphabet, out.transitions, 0, out.marked)


# ---------------------------------------------------------------------------
# eventual observability


def check_eventual_observability(g: Automaton, alph: AlphabetSpec) -> CheckResult:
    """Every lossy observable event is eventually followed by a reliable uncontrollable one.

    ``g`` is the original plant over base events (PLAIN labels).  After each
    transition on a lossy event, uncontrollable continuations must be able to
    reach, and cannot avoid, an uncontrollable observable non-lossy event:
    a dead end or a cycle of uncontrollable events that avoids every such event
    is a violation.  Witness: ``((q, event, q2), string)``.
    """
    reliable = alph.sigma_uc & (alph.sigma_o - alph.sigma_ol)
    adj = g.adjacency
    for q, lab, q2 in g.transitions:
        if lab.kind is not Kind.PLAIN:
            raise InvalidParams("eventual observability is checked on the base plant")
        if lab.payload not in alph.sigma_ol:
            continue
        # walk uncontrollable, non-reliable moves; record parents for witnesses
        parent: dict[int, tuple[int, EventLabel] | None] = {q2: None}
        order = [q2]
        queue = deque([q2])
        found_reliable = False
        while queue:
            s = queue.popleft()
            for e, dsts in adj[s].items():
                if e.payload not in alph.sigma_uc:
                    continue
                if e.payload in reliable:
                    found_reliable = True
                    continue
                for d in dsts:
                    if d not in parent:
                        parent[d] = (s, e)
                        order.append(d)
                        queue.append(d)

        def trace(s: int) -> tuple[str, ...]:
            out = []
            while parent[s] is not None:
                s, e = parent[s]
                out.append(e.payload)
            return tuple(reversed(out))

        if not found_reliable:
            return CheckResult(False, ((q, lab.payload, q2), ()), "no reliable observation reachable")
        for s in order:
            if not any(e.payload in alph.sigma_uc for e in adj[s]):
                return CheckResult(False, ((q, lab.payload, q2), trace(s)), "maximal string without reliable observation")
        region = set(order)
        cycle = _find_cycle(
            region,
            lambda s: [d for e, ds in adj[s].items() if e.payload in alph.sigma_uc and e.payload not in reliable for d in ds],
        )
        if cycle is not None:
            return CheckResult(False, ((q, lab.payload, q2), trace(cycle)), "uncontrollable cycle avoids reliable observations")
    return CheckResult(True)


def _find_cycle(nodes: set[int], succ) -> int | None:
    color = {v: 0 for v in nodes}
    for root in sorted(nodes):
        if color[root]:
            continue
        stack = [(root, iter(succ(root)))]
        color[root] = 1
        while stack:
            v, it = stack[-1]
            for w in it:
                if w not in color:
                    continue
                if color[w] == 1:
                    return w
                if color[w] == 0:
                    color[w] = 1
                    stack.append((w, iter(succ(w))))
                    break
            else:
                color[v] = 2
                stack.pop()
    return None


def base_projection(alph: AlphabetSpec) -> dict[EventLabel, EventLabel]:
    """Map plant-event labels of the lifted alphabet back to PLAIN base events."""
    mapping = {}
    for s in alph.sigma:
        mapping[alph.plant_label(s)] = plain(s)
    return mapping


def classical_problem(g: Automaton, alph: AlphabetSpec, bad: Iterable[int]) -> SynthesisProblem:
    """Non-networked problem on the base plant under ``(sigma_c, sigma_o)``."""
    constraint = ControlConstraint(
        frozenset(plain(s) for s in alph.sigma_c), frozenset(plain(s) for s in alph.sigma_o)
    )
    return SynthesisProblem(g, constraint, frozenset(bad))


__all__ = [
    "BruteForceLimits",
    "EmptySupervisor",
    "SynthesisProblem",
    "Supervisor",
    "base_projection",
    "brute_force_supremal",
    "check_closed_loop_nonblocking",
    "check_controllability",
    "check_eventual_observability",
    "check_local_maximality",
    "check_normality",
    "check_safety",
    "classical_problem",
    "coreachable_states",
    "reachable_states",
    "synthesize_supremal",
    "verify",
]
