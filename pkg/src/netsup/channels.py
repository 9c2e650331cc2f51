"""Channel, command-execution and counter automata, and the transformed plant.

Channel automata are built directly on their contents and only the reachable
part is materialized.  A message's time-to-leave drops by one on every plant
event; while any message sits at time-to-leave 0 no plant event may occur.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator

from .automata import (
    AlphabetSpec,
    Automaton,
    EventLabel,
    Kind,
    cmd_in,
    cmd_loss,
    cmd_out,
    explore,
    obs_in,
    obs_loss,
    obs_out,
    plain,
    sync_product,
)
from .errors import InvalidCapacity, InvalidParams, UnknownEvent

ObsContent = tuple[tuple[str, int], ...]
Command = tuple[str, ...]
CtrlContent = tuple[tuple[Command, int], ...]


class Mechanism(enum.Enum):
    FIRST_WINS = "first"
    LAST_WINS = "last"


@dataclass(frozen=True)
class ChannelParams:
    """Delay bounds, loss bound and control-queue capacity.

    ``cc_capacity`` left as ``None`` resolves to the queue bound
    ``(num_o + num_c + 2) * k`` whenever the counters ``S^k``/``A^m`` are part of
    the composition, and to 1 (the two-state-per-command zero-delay channel)
    otherwise.
    """

    num_o: int = 0
    num_c: int = 0
    m: int = 0
    cc_capacity: int | None = None
    mechanism: Mechanism = Mechanism.FIRST_WINS

    def __post_init__(self) -> None:
        if min(self.num_o, self.num_c, self.m) < 0:
            raise InvalidParams("num_o, num_c and m must be nonnegative")
        if self.cc_capacity is not None and self.cc_capacity < 1:
            raise InvalidCapacity("control channel capacity must be positive")

    @property
    def k(self) -> int:
        return self.m + 1

    @property
    def uses_counters(self) -> bool:
        return self.num_c >= 1 or self.m >= 1

    @property
    def queue_bound(self) -> int:
        return (self.num_o + self.num_c + 2) * self.k

    def capacity(self, counters: bool | None = None) -> int:
        if self.cc_capacity is not None:
            return self.cc_capacity
        if self.uses_counters if counters is None else counters:
            return self.queue_bound
        return 1


def _plant_events(alph: AlphabetSpec) -> list[EventLabel]:
    return [plain(s) for s in sorted(alph.sigma_uo)] + [obs_in(s) for s in sorted(alph.sigma_o)]


def relabel_plant(g: Automaton, alph: AlphabetSpec) -> Automaton:
    """Turn a base-event plant into ``G^mod``: observable events become ``in:`` sends.

    The alphabet is the image of ``g``'s own alphabet, so relabelled
    components still compose over their private events.
    """
    mapping = {}
    for lab in g.alphabet:
        if lab.kind is not Kind.PLAIN or lab.payload not in alph.sigma:
            raise UnknownEvent(f"plant event {lab} is not a base event of the alphabet")
        mapping[lab] = alph.plant_label(lab.payload)
    trans = tuple((s, mapping[lab], d) for s, lab, d in g.transitions)
    return Automaton(g.num_states, frozenset(mapping.values()), trans, g.initial, g.marked, g.state_names)


def _check_obs_content(content: ObsContent) -> None:
    ttls = [t for _, t in content]
    if len(set(content)) != len(content):
        raise AssertionError(f"observation message with multiplicity > 1 in {content}")
    if len(set(ttls)) != len(ttls):
        raise AssertionError(f"observation messages share a time-to-leave in {content}")


def build_observation_channel(alph: AlphabetSpec, num_o: int) -> Automaton:
    """Non-FIFO, possibly lossy observation channel with delay bound ``num_o``.

    State names are the channel contents: sorted ``(event, time_to_leave)`` pairs.
    """
    if num_o < 0:
        raise InvalidParams("num_o must be nonnegative")
    observable = sorted(alph.sigma_o)
    lossy = sorted(alph.sigma_ol)
    unobservable = sorted(alph.sigma_uo)
    alphabet = (
        [plain(s) for s in unobservable]
        + [obs_in(s) for s in observable]
        + [obs_out(s) for s in observable]
        + [obs_loss(s) for s in lossy]
    )

    def succ(content: ObsContent) -> Iterator[tuple[EventLabel, ObsContent]]:
        _check_obs_content(content)
        can_tick = not content or min(t for _, t in content) >= 1
        if can_tick:
            aged = [(s, t - 1) for s, t in content]
            for s in observable:
                yield obs_in(s), tuple(sorted(aged + [(s, num_o)]))
            for s in unobservable:
                yield plain(s), tuple(sorted(aged))
        for i, (s, _t) in enumerate(content):
            rest = content[:i] + content[i + 1:]
            yield obs_out(s), rest
            if s in alph.sigma_ol:
                yield obs_loss(s), rest

    return explore((), succ, alphabet, lambda _c: True)


def build_control_channel(alph: AlphabetSpec, num_c: int, capacity: int, lossy: bool = True) -> Automaton:
    """FIFO control channel with delay bound ``num_c`` and queue length cap ``capacity``.

    With ``lossy`` false no ``cmd_loss`` labels are built.  State names are the
    queue contents, head first, as ``(command, time_to_leave)`` pairs.
    """
    if capacity < 1:
        raise InvalidCapacity("control channel capacity must be positive")
    if num_c < 0:
        raise InvalidParams("num_c must be nonnegative")
    if not alph.sigma_c:
        warnings.warn("empty sigma_c: control channel has no commands", stacklevel=2)
    commands = [tuple(sorted(c)) for c in alph.commands]
    plant_events = _plant_events(alph)
    alphabet = plant_events + [cmd_in(c) for c in commands] + [cmd_out(c) for c in commands]
    if lossy:
        alphabet += [cmd_loss(c) for c in commands]

    def succ(queue: CtrlContent) -> Iterator[tuple[EventLabel, CtrlContent]]:
        if len(queue) < capacity:
            for c in commands:
                yield cmd_in(c), queue + ((c, num_c),)
        if queue:
            yield cmd_out(queue[0][0]), queue[1:]
        if lossy:
            for i, (c, _t) in enumerate(queue):
                yield cmd_loss(c), queue[:i] + queue[i + 1:]
        if not queue or min(t for _, t in queue) >= 1:
            aged = tuple((c, t - 1) for c, t in queue)
            for e in plant_events:
                yield e, aged

    return explore((), succ, alphabet, lambda _q: True)


def build_command_execution(alph: AlphabetSpec, mechanism: Mechanism = Mechanism.FIRST_WINS) -> Automaton:
    """Command execution automaton.

    State names: ``()`` is the waiting state, otherwise the sorted command being
    executed.  Under FIRST_WINS later receipts are ignored until an observable
    event fires; under LAST_WINS each receipt overwrites the stored command.
    """
    commands = [tuple(sorted(c)) for c in alph.commands]
    plant_events = _plant_events(alph)
    alphabet = plant_events + [cmd_out(c) for c in commands]

    def succ(state: Command) -> Iterator[tuple[EventLabel, Command]]:
        if not state:
            for c in commands:
                yield cmd_out(c), c
            for e in plant_events:
                if e.payload not in alph.sigma_c:
                    yield e, ()
            return
        for c in commands:
            yield cmd_out(c), (c if mechanism is Mechanism.LAST_WINS else state)
        allowed = set(state) | alph.sigma_uc
        for e in plant_events:
            if e.payload in allowed:
                yield e, (() if e.kind is Kind.OBS_IN else state)

    return explore((), succ, alphabet, lambda _s: True)


def build_sk_counter(k: int, alph: AlphabetSpec) -> Automaton:
    """At most ``k`` command sends between consecutive observation receipts."""
    if k < 1:
        raise InvalidParams("k must be at least 1")
    sends = [cmd_in(c) for c in alph.commands]
    receipts = [obs_out(s) for s in sorted(alph.sigma_o)]

    def succ(i: int) -> Iterator[tuple[EventLabel, int]]:
        if i < k:
            for e in sends:
                yield e, i + 1
        for e in receipts:
            yield e, 0

    return explore(0, succ, sends + receipts, lambda _i: True)


def build_am_counter(m: int, alph: AlphabetSpec) -> Automaton:
    """At most ``m`` consecutive command losses; a delivery resets the count."""
    if m < 0:
        raise InvalidParams("m must be nonnegative")
    losses = [cmd_loss(c) for c in alph.commands]
    deliveries = [cmd_out(c) for c in alph.commands]

    def succ(i: int) -> Iterator[tuple[EventLabel, int]]:
        if i < m:
            for e in losses:
                yield e, i + 1
        for e in deliveries:
            yield e, 0

    return explore(0, succ, losses + deliveries, lambda _i: True)


@dataclass(frozen=True)
class StateAnnotation:
    """Monitor quantities of one transformed-plant state."""

    l_cc: int
    l_oc: int
    m_ttl: int
    sk: int | None
    am: int | None
    g_state: int


@dataclass(frozen=True, eq=False)
class TransformedPlant:
    """Composition of channels, command execution, plant and (optionally) counters.

    ``roles`` maps each component role (``oc``, ``cc``, ``am``, ``ce``, ``g``,
    ``sk``) to its position in the product's component tuples.
    """

    automaton: Automaton
    alph: AlphabetSpec
    params: ChannelParams
    components: tuple[Automaton, ...]
    roles: dict[str, int]

    def component_state(self, state: int, role: str) -> int:
        return self.automaton.state_names[state][self.roles[role]]

    def g_state(self, state: int) -> int:
        return self.component_state(state, "g")

    def annotate(self, state: int) -> StateAnnotation:
        names = self.automaton.state_names[state]
        oc = self.components[self.roles["oc"]].state_names[names[self.roles["oc"]]]
        cc = self.components[self.roles["cc"]].state_names[names[self.roles["cc"]]]
        sk = names[self.roles["sk"]] if "sk" in self.roles else None
        am = names[self.roles["am"]] if "am" in self.roles else None
        return StateAnnotation(
            l_cc=len(cc),
            l_oc=len(oc),
            m_ttl=min((t for _, t in cc), default=0),
            sk=None if sk is None else self.components[self.roles["sk"]].state_names[sk],
            am=None if am is None else self.components[self.roles["am"]].state_names[am],
            g_state=names[self.roles["g"]],
        )

    @cached_property
    def annotations(self) -> tuple[StateAnnotation, ...]:
        return tuple(self.annotate(q) for q in range(self.automaton.num_states))

    def bad_states(self, g_bad: frozenset[int] | set[int]) -> frozenset[int]:
        """Product states whose plant component is in ``g_bad``."""
        pos = self.roles["g"]
        return frozenset(q for q, names in enumerate(self.automaton.state_names) if names[pos] in g_bad)


def build_transformed_plant(
    g: Automaton, alph: AlphabetSpec, p: ChannelParams, counters: bool | None = None
) -> TransformedPlant:
    """Compose the transformed plant.

    Without counters this is ``OC || CC || CE || G``; with counters (default
    whenever ``num_c >= 1`` or ``m >= 1``) it is
    ``OC || CC || A^m || CE || G || S^k`` with ``k = m + 1``.
    """
    allowed = frozenset(_plant_events(alph))
    if not g.alphabet <= allowed:
        extra = sorted(str(e) for e in g.alphabet - allowed)
        raise InvalidParams(f"plant is not relabelled over the lifted alphabet: {extra}")
    # events the plant never offers must still be blocked by it
    g = Automaton(g.num_states, allowed, g.transitions, g.initial, g.marked, g.state_names)
    use_counters = p.uses_counters if counters is None else counters
    capacity = p.capacity(use_counters)
    oc = build_observation_channel(alph, p.num_o)
    cc = build_control_channel(alph, p.num_c, capacity, lossy=p.m >= 1)
    ce = build_command_execution(alph, p.mechanism)
    if use_counters:
        am = build_am_counter(p.m, alph)
        sk = build_sk_counter(p.k, alph)
        comps = (oc, cc, am, ce, g, sk)
        roles = {"oc": 0, "cc": 1, "am": 2, "ce": 3, "g": 4, "sk": 5}
    else:
        comps = (oc, cc, ce, g)
        roles = {"oc": 0, "cc": 1, "ce": 2, "g": 3}
    return TransformedPlant(sync_product(comps), alph, p, comps, roles)


def build_tightness_witness(p: ChannelParams) -> tuple[Automaton, AlphabetSpec, int]:
    """Plant on which the control queue reaches its bound ``(num_o + num_c + 2) * k``.

    A chain of ``num_o + num_c + 1`` uncontrollable, observable, non-lossy
    events ending in a marked sink.  A single controllable event ``c`` (never
    enabled by the plant) supplies the one available command ``{c}``.
    Returns the relabelled plant, its alphabet and the expected maximum queue
    length.
    """
    length = p.num_o + p.num_c + 1
    chain = [f"t{i}" for i in range(1, length + 1)]
    alph = AlphabetSpec(frozenset(chain) | {"c"}, frozenset({"c"}), frozenset(chain) | {"c"}, frozenset())
    trans = tuple((i, plain(e), i + 1) for i, e in enumerate(chain))
    base = Automaton(length + 1, frozenset(plain(s) for s in alph.sigma), trans, 0, frozenset({length}))
    return relabel_plant(base, alph), alph, p.queue_bound
