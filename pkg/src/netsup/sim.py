"""Seeded random walks and exhaustive sweeps over networked closed loops.

Both run the same monitors.  The walk is a falsification aid: loss
transitions get a weight of ``loss_bias`` and everything else weight 1.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import IO, Iterable

import numpy as np

from .automata import Automaton, Kind, sync_product
from .channels import StateAnnotation, TransformedPlant
from .errors import InvalidParams, MissingAnnotations

MONITORS = ("bad", "inductive-invariant", "queue-bound", "obs-in-flight", "consecutive-losses", "capacity-truncation")
ALL_MONITORS = MONITORS + ("deadlock",)
LOSS_KINDS = (Kind.OBS_LOSS, Kind.CMD_LOSS)


@dataclass(frozen=True, eq=False)
class ClosedLoop:
    """Closed loop ``sup || P`` with access to the transformed-plant annotations.

    ``plant_pos`` is the position of the plant state in the loop's state names;
    a loop built from the plant alone uses ``None`` (identity).
    """

    automaton: Automaton
    plant: TransformedPlant
    bad: frozenset[int] = frozenset()
    plant_pos: int | None = 1

    @classmethod
    def build(cls, sup_automaton: Automaton | None, plant: TransformedPlant, bad: Iterable[int] = ()) -> "ClosedLoop":
        if sup_automaton is None:
            return cls(plant.automaton, plant, frozenset(bad), None)
        return cls(sync_product([sup_automaton, plant.automaton]), plant, frozenset(bad), 1)

    def plant_state(self, state: int) -> int:
        if self.plant_pos is None:
            return state
        return self.automaton.state_names[state][self.plant_pos]

    def annotate(self, state: int) -> StateAnnotation:
        return self.plant.annotations[self.plant_state(state)]


@dataclass(frozen=True)
class SimConfig:
    seed: int = 0
    steps: int = 1000
    loss_bias: float = 0.5
    trace: bool = False

    def __post_init__(self) -> None:
        if self.steps < 1:
            raise InvalidParams("steps must be positive")
        if not 0.0 <= self.loss_bias <= 1.0:
            raise InvalidParams("loss_bias must lie in [0, 1]")
        if not 0 <= self.seed < 1 << 64:
            raise InvalidParams("seed must be a 64-bit unsigned integer")


@dataclass
class Violation:
    step: int
    monitor: str
    state: int
    annotation: tuple


@dataclass
class MonitorReport:
    steps_executed: int = 0
    violations: list[Violation] = field(default_factory=list)
    max_queue_seen: int = 0
    max_obs_in_flight: int = 0
    deadlocked_at: int | None = None
    terminated_at: int | None = None

    @property
    def passed(self) -> bool:
        return not self.violations and self.deadlocked_at is None

    def to_json(self) -> str:
        data = asdict(self)
        data["passed"] = self.passed
        return json.dumps(data, sort_keys=True, indent=2)


def _annotation_tuple(a: StateAnnotation) -> tuple:
    return (a.l_cc, a.l_oc, a.m_ttl, a.sk, a.am, a.g_state)


def check_state(loop: ClosedLoop, state: int, losses: int | None = None) -> list[str]:
    """Names of the monitors violated at ``state``.

    ``losses`` is the run's count of consecutive command losses; when omitted
    the ``A^m`` counter annotation stands in for it.
    """
    p = loop.plant.params
    a = loop.annotate(state)
    k = p.k
    failed = []
    if loop.plant_state(state) in loop.bad:
        failed.append("bad")
    if a.sk is not None and a.l_cc + (a.l_oc + a.m_ttl) * k > (p.num_o + p.num_c + 1) * k + a.sk:
        failed.append("inductive-invariant")
    if a.l_cc > p.queue_bound:
        failed.append("queue-bound")
    if a.l_oc > p.num_o + 1:
        failed.append("obs-in-flight")
    count = a.am if losses is None else losses
    if count is not None and count > p.m:
        failed.append("consecutive-losses")
    capacity = p.capacity("sk" in loop.plant.roles)
    if a.sk is not None and a.sk < k and a.l_cc >= capacity:
        failed.append("capacity-truncation")
    return failed


def _require_annotations(loop) -> ClosedLoop:
    if not isinstance(loop, ClosedLoop):
        raise MissingAnnotations("simulation needs a ClosedLoop built from a transformed plant")
    return loop


def _trace_line(step: int, src: int, label, dst: int, a: StateAnnotation) -> str:
    sk = "-" if a.sk is None else a.sk
    return f"{step} {src} --{label}--> {dst} | {a.l_cc} {a.l_oc} {a.m_ttl} {sk}"


def simulate(loop: ClosedLoop, cfg: SimConfig, out: IO[str] | None = None) -> MonitorReport:
    """Random walk of ``cfg.steps`` transitions with every monitor checked at each state."""
    loop = _require_annotations(loop)
    aut = loop.automaton
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    report = MonitorReport()
    state = aut.initial
    losses = 0

    def observe(step: int, x: int) -> None:
        a = loop.annotate(x)
        report.max_queue_seen = max(report.max_queue_seen, a.l_cc)
        report.max_obs_in_flight = max(report.max_obs_in_flight, a.l_oc)
        for name in check_state(loop, x, losses):
            report.violations.append(Violation(step, name, x, _annotation_tuple(a)))

    observe(0, state)
    moves_cache: dict[int, tuple[list, np.ndarray]] = {}
    for step in range(1, cfg.steps + 1):
        moves = moves_cache.get(state)
        if moves is None:
            out_edges = [(lab, d) for lab, dsts in sorted(aut.adjacency[state].items()) for d in dsts]
            weights = np.array([cfg.loss_bias if lab.kind in LOSS_KINDS else 1.0 for lab, _ in out_edges])
            if out_edges and weights.sum() == 0:
                weights = np.ones(len(out_edges))
            moves = moves_cache[state] = (out_edges, weights / weights.sum() if out_edges else weights)
        out_edges, probs = moves
        if not out_edges:
            if state in aut.marked:
                report.terminated_at = step - 1
            else:
                report.deadlocked_at = step - 1
            break
        lab, nxt = out_edges[int(rng.choice(len(out_edges), p=probs))]
        if lab.kind is Kind.CMD_LOSS:
            losses += 1
        elif lab.kind is Kind.CMD_OUT:
            losses = 0
        if cfg.trace and out is not None:
            out.write(_trace_line(step, state, lab, nxt, loop.annotate(nxt)) + "\n")
        state = nxt
        report.steps_executed = step
        observe(step, state)
    return report


@dataclass(frozen=True)
class ExhaustiveResult:
    ok: bool
    witness: tuple | None
    max_queue: int
    max_obs_in_flight: int
    states: int

    def __bool__(self) -> bool:
        return self.ok


def exhaustive_check(loop: ClosedLoop, monitors: Iterable[str] = ALL_MONITORS) -> ExhaustiveResult:
    """Check ``monitors`` on every reachable state of the loop.

    Witness on failure: ``(state, monitor, annotation)``.
    """
    loop = _require_annotations(loop)
    wanted = set(monitors)
    unknown = wanted - set(ALL_MONITORS)
    if unknown:
        raise InvalidParams(f"unknown monitors: {sorted(unknown)}")
    aut = loop.automaton
    max_q = max_o = 0
    witness = None
    for x in range(aut.num_states):
        a = loop.annotate(x)
        max_q = max(max_q, a.l_cc)
        max_o = max(max_o, a.l_oc)
        if witness is not None:
            continue
        failed = [m for m in check_state(loop, x) if m in wanted]
        if "deadlock" in wanted and not aut.adjacency[x] and x not in aut.marked:
            failed.append("deadlock")
        if failed:
            witness = (x, failed[0], _annotation_tuple(a))
    return ExhaustiveResult(witness is None, witness, max_q, max_o, aut.num_states)
