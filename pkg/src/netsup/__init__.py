"""Networked supervisor synthesis over lossy, delay-bounded channels."""

from .automata import (
    AlphabetSpec,
    Automaton,
    CheckResult,
    ControlConstraint,
    EventLabel,
    Kind,
    determinize,
    is_isomorphic,
    is_nonblocking,
    language_equal,
    language_included,
    minimize,
    observer,
    project,
    sync_product,
    trim,
)
from .channels import (
    ChannelParams,
    Mechanism,
    TransformedPlant,
    build_am_counter,
    build_command_execution,
    build_control_channel,
    build_observation_channel,
    build_sk_counter,
    build_tightness_witness,
    build_transformed_plant,
    relabel_plant,
)
from .errors import NetsupError
from .sim import ClosedLoop, MonitorReport, SimConfig, exhaustive_check, simulate
from .synthesis import (
    EmptySupervisor,
    Supervisor,
    SynthesisProblem,
    brute_force_supremal,
    check_controllability,
    check_eventual_observability,
    check_local_maximality,
    check_normality,
    check_safety,
    synthesize_supremal,
)

__all__ = [name for name in dir() if not name.startswith("_")]
