"""Seeded random plants and problems for oracle cross-checks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .automata import AlphabetSpec, Automaton, plain, reachable_states


@dataclass(frozen=True)
class RandomPlantConfig:
    max_states: int = 4
    max_events: int = 3
    density: float = 0.7
    bad_prob: float = 0.25
    lossy: bool = False
    # the networked observer grows exponentially in the number of commands
    max_controllable: int = 2


@dataclass(frozen=True)
class RandomInstance:
    g: Automaton
    alph: AlphabetSpec
    bad: frozenset[int]


def random_instance(seed: int, cfg: RandomPlantConfig = RandomPlantConfig()) -> RandomInstance:
    """Random plant over PLAIN base events with random flags and bad states.

    Controllable events are always observable.  The initial state is never bad.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    n = int(rng.integers(min(2, cfg.max_states), cfg.max_states + 1))
    k = int(rng.integers(1, cfg.max_events + 1))
    events = [chr(ord("a") + i) for i in range(k)]
    trans = set()
    for s in range(n):
        for e in events:
            if rng.random() < cfg.density:
                trans.add((s, plain(e), int(rng.integers(n))))
    # the first event is always controllable so most instances need control
    sigma_o = {events[0]} | {e for e in events[1:] if rng.random() < 0.6}
    extra = [e for e in sorted(sigma_o - {events[0]}) if rng.random() < 0.5]
    sigma_c = {events[0], *extra[: cfg.max_controllable - 1]}
    sigma_ol = {e for e in sigma_o if cfg.lossy and rng.random() < 0.5}
    marked = frozenset(q for q in range(n) if rng.random() < 0.4) or frozenset({int(rng.integers(n))})
    used = frozenset(plain(e) for e in events)
    g = Automaton(n, used, tuple(sorted(trans, key=lambda t: (t[0], t[1].sort_key, t[2]))), 0, marked)
    live = sorted(reachable_states(g) - {0})
    bad = frozenset(q for q in live if rng.random() < cfg.bad_prob)
    alph = AlphabetSpec(frozenset(events), frozenset(sigma_c), frozenset(sigma_o), frozenset(sigma_ol))
    return RandomInstance(g, alph, bad)
