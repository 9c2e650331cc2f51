"""Command-line interface: gen, compose, synthesize, verify, simulate, stats.

Exit codes: 0 ok, 1 verification failure, 2 empty synthesis, 3 input error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
import warnings
from dataclasses import dataclass
from pathlib import Path

from .automata import (
    AlphabetSpec,
    Automaton,
    ControlConstraint,
    EventLabel,
    Kind,
    coreachable_states,
    minimize,
    plain,
    relabel,
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
    build_transformed_plant,
)
from .errors import InvalidParams, NetsupError
from .formats import (
    AutomatonFile,
    ProblemFile,
    alphabet_from_flags,
    base_events,
    collision_states,
    compose_files,
    read_automaton,
    read_problem,
    serialize_problem,
    write_automaton,
)
from .guideway import NUMERIC_NAMES, guideway_alphabet, train
from .sim import ClosedLoop, SimConfig, exhaustive_check, simulate
from .synthesis import (
    SynthesisProblem,
    check_closed_loop_nonblocking,
    check_controllability,
    check_eventual_observability,
    check_local_maximality,
    check_normality,
    check_safety,
    synthesize_supremal,
)

EXIT_OK, EXIT_VERIFY, EXIT_EMPTY, EXIT_INPUT = 0, 1, 2, 3
CHECKS = ("safety", "controllability", "normality", "nonblocking", "queue-bound", "inductive-invariant", "eventual-obs")


def _names(text: str | None) -> frozenset[str]:
    return frozenset(x for x in (text or "").split(",") if x)


def _flags_of(alph: AlphabetSpec) -> dict[str, frozenset[str]]:
    out = {}
    for s in alph.sigma:
        fl = {f for f, sset in (("c", alph.sigma_c), ("o", alph.sigma_o), ("l", alph.sigma_ol)) if s in sset}
        out[s] = frozenset(fl)
    return out


def _alphabet_args(args) -> AlphabetSpec:
    o, c, ol, uo = (_names(x) for x in (args.sigma_o, args.sigma_c, args.sigma_ol, args.sigma_uo))
    return AlphabetSpec(o | c | uo, c, o, ol)


def _params(args) -> ChannelParams:
    return ChannelParams(args.num_o, args.num_c, args.m, args.capacity, Mechanism(args.mechanism))


# ---------------------------------------------------------------------------
# problem loading


@dataclass(frozen=True, eq=False)
class LoadedProblem:
    pf: ProblemFile
    alph: AlphabetSpec
    base: Automaton
    plant: TransformedPlant
    bad_base: frozenset[int]
    bad: frozenset[int]

    @property
    def synthesis(self) -> SynthesisProblem:
        return SynthesisProblem(self.plant.automaton, ControlConstraint.networked(self.alph), self.bad)


def _to_relabelled(g: Automaton, alph: AlphabetSpec) -> Automaton:
    mapping = {}
    for e in g.alphabet:
        if e.kind not in (Kind.PLAIN, Kind.OBS_IN):
            raise InvalidParams(f"plant label {e} is neither a base event nor an observation send")
        mapping[e] = alph.plant_label(e.payload)
    return relabel(g, mapping)


def load_problem(path: str | Path, params: ChannelParams | None = None) -> LoadedProblem:
    pf = read_problem(path)
    files = [read_automaton(p) for p in pf.plants]
    g, flags = compose_files(files)
    alph = alphabet_from_flags(flags, base_events(g))
    g = _to_relabelled(g, alph)
    if pf.collision is not None:
        bad_base = collision_states(g, [f.automaton for f in files], pf.collision)
    else:
        bad_base = pf.bad_indices or frozenset()
    tp = build_transformed_plant(g, alph, params or pf.params)
    return LoadedProblem(pf, alph, g, tp, bad_base, tp.bad_states(bad_base))


def _load_supervisor(path: str | None, lp: LoadedProblem) -> Automaton:
    if path is None:
        p = lp.plant.automaton
        return Automaton(1, p.alphabet, tuple((0, e, 0) for e in sorted(p.alphabet)), 0, frozenset({0}))
    sup = read_automaton(path).automaton
    if not sup.alphabet <= lp.plant.automaton.alphabet:
        raise InvalidParams("supervisor alphabet is not part of the plant alphabet")
    return sup


# ---------------------------------------------------------------------------
# commands


def cmd_gen(args) -> int:
    out = Path(args.out) if args.out else None
    if args.kind == "guideway":
        return _gen_guideway(out or Path("guideway"), args)
    alph = _alphabet_args(args)
    if args.kind == "oc":
        a = build_observation_channel(alph, args.num_o)
    elif args.kind == "cc":
        a = build_control_channel(alph, args.num_c, args.capacity or 1, lossy=args.m >= 1)
    elif args.kind == "ce":
        a = build_command_execution(alph, Mechanism(args.mechanism))
    elif args.kind == "sk":
        a = build_sk_counter(args.k, alph)
    else:
        a = build_am_counter(args.m, alph)
    flags = _flags_of(alph)
    if out is None:
        from .formats import serialize_automaton

        sys.stdout.write(serialize_automaton(a, flags, names=False))
    else:
        write_automaton(out, Automaton(a.num_states, a.alphabet, a.transitions, a.initial, a.marked), flags)
        print(f"wrote {out} states={a.num_states} transitions={a.num_transitions}")
    return EXIT_OK


def _gen_guideway(out: Path, args) -> int:
    out.mkdir(parents=True, exist_ok=True)
    alph = guideway_alphabet()
    flags = _flags_of(alph)
    p = ChannelParams(num_o=1, num_c=0, m=0, mechanism=Mechanism(args.mechanism))
    for i in (1, 2):
        t = train(i)
        rel = relabel(t, {e: alph.plant_label(e.payload) for e in t.alphabet})
        write_automaton(out / f"v{i}.aut", rel, flags)
    write_automaton(out / "oc.aut", _strip_names(build_observation_channel(alph, p.num_o)), flags)
    write_automaton(out / "cc.aut", _strip_names(build_control_channel(alph, p.num_c, 1, lossy=False)), flags)
    write_automaton(out / "ce.aut", _strip_names(build_command_execution(alph, p.mechanism)), flags)
    pf = ProblemFile((out / "v1.aut", out / "v2.aut"), p, None, ("Track1", "Track2"))
    (out / "guideway.problem").write_text(serialize_problem(pf, out), encoding="utf-8")
    table = ["# lifted label -> numeric event name in the TCT-style numbering"]
    table += [f"{k} {v}" for k, v in NUMERIC_NAMES.items()]
    table += [
        "# alphabet",
        "sigma_c " + ",".join(sorted(alph.sigma_c)),
        "sigma_o " + ",".join(sorted(alph.sigma_o)),
        "sigma_ol " + ",".join(sorted(alph.sigma_ol)),
        "sigma_uo " + ",".join(sorted(alph.sigma_uo)),
        f"num_o {p.num_o}",
        f"num_c {p.num_c}",
    ]
    (out / "names.txt").write_text("\n".join(table) + "\n", encoding="utf-8")
    print(f"wrote guideway files to {out}")
    return EXIT_OK


def _strip_names(a: Automaton) -> Automaton:
    return Automaton(a.num_states, a.alphabet, a.transitions, a.initial, a.marked)


def cmd_compose(args) -> int:
    files: list[AutomatonFile] = [read_automaton(p) for p in args.inputs]
    start = time.perf_counter()
    product, flags = compose_files(files)
    elapsed = time.perf_counter() - start
    if args.out:
        write_automaton(args.out, _strip_names(product), flags)
    print(f"states={product.num_states} transitions={product.num_transitions} seconds={elapsed:.3f}")
    return EXIT_OK


def cmd_synthesize(args) -> int:
    lp = load_problem(args.problem, _override_params(args))
    start = time.perf_counter()
    sup = synthesize_supremal(lp.synthesis)
    elapsed = time.perf_counter() - start
    p = lp.plant.automaton
    print(f"plant states={p.num_states} transitions={p.num_transitions}")
    if not sup:
        print(f"EMPTY reason={sup.reason} initial_cell_size={len(sup.cell)}")
        return EXIT_EMPTY
    a = sup.automaton
    observable = lp.synthesis.observable
    obs_trans = sum(1 for _s, e, _d in a.transitions if e in observable)
    cl = sup.closed_loop(p)
    canon = minimize(cl)
    print(f"supervisor states={a.num_states} transitions={a.num_transitions} observable_transitions={obs_trans}")
    print(f"closed_loop states={cl.num_states} transitions={cl.num_transitions}")
    print(f"canonical_closed_loop states={canon.num_states} transitions={canon.num_transitions}")
    print(f"synthesis_seconds={elapsed:.3f}")
    results = {
        "safety": check_safety(sup, p, lp.bad),
        "controllability": check_controllability(sup, p, lp.synthesis.constraint),
        "normality": check_normality(sup, p, lp.synthesis.constraint),
        "nonblocking": check_closed_loop_nonblocking(sup, p),
    }
    if args.maximality:
        results["local-maximality"] = check_local_maximality(sup, lp.synthesis)
    print(" ".join(f"{k}={'ok' if v else 'FAIL'}" for k, v in results.items()))
    if args.out:
        write_automaton(args.out, _strip_names(a), _flags_of(lp.alph))
    return EXIT_OK if all(results.values()) else EXIT_VERIFY


def _override_params(args) -> ChannelParams | None:
    given = [args.num_o, args.num_c, args.m, args.capacity]
    if all(x is None for x in given) and args.mechanism is None:
        return None
    pf = read_problem(args.problem).params
    return ChannelParams(
        pf.num_o if args.num_o is None else args.num_o,
        pf.num_c if args.num_c is None else args.num_c,
        pf.m if args.m is None else args.m,
        pf.cc_capacity if args.capacity is None else args.capacity,
        pf.mechanism if args.mechanism is None else Mechanism(args.mechanism),
    )


def _witness_text(w) -> object:
    def fmt(x):
        if isinstance(x, EventLabel):
            return str(x)
        if isinstance(x, (tuple, list)):
            return [fmt(y) for y in x]
        if isinstance(x, frozenset):
            return sorted(fmt(y) for y in x)
        return x

    return fmt(w)


def cmd_verify(args) -> int:
    lp = load_problem(args.problem, _override_params(args))
    sup = _load_supervisor(args.supervisor, lp)
    checks = [c for c in (args.checks.split(",") if args.checks is not None else CHECKS) if c]
    unknown = set(checks) - set(CHECKS)
    if unknown:
        raise InvalidParams(f"unknown checks {sorted(unknown)}")
    p = lp.plant.automaton
    constraint = lp.synthesis.constraint
    report: dict[str, dict] = {}
    loop = None
    for name in checks:
        if name == "safety":
            r = check_safety(sup, p, lp.bad)
        elif name == "controllability":
            r = check_controllability(sup, p, constraint)
        elif name == "normality":
            r = check_normality(sup, p, constraint)
        elif name == "nonblocking":
            r = check_closed_loop_nonblocking(sup, p)
        elif name == "eventual-obs":
            base = relabel(lp.base, {e: plain(e.payload) for e in lp.base.alphabet})
            r = check_eventual_observability(base, lp.alph)
        else:
            loop = loop or ClosedLoop.build(sup, lp.plant, lp.bad)
            r = exhaustive_check(loop, [name])
        report[name] = {"ok": bool(r), "witness": _witness_text(r.witness), "detail": getattr(r, "detail", "")}
    passed = all(v["ok"] for v in report.values())
    print(json.dumps({"passed": passed, "checks": report}, sort_keys=True, indent=2))
    return EXIT_OK if passed else EXIT_VERIFY


def cmd_simulate(args) -> int:
    lp = load_problem(args.problem, _override_params(args))
    if args.supervisor:
        sup_aut = _load_supervisor(args.supervisor, lp)
    else:
        sup = synthesize_supremal(lp.synthesis)
        if not sup:
            print(f"EMPTY reason={sup.reason}")
            return EXIT_EMPTY
        sup_aut = sup.automaton
    loop = ClosedLoop.build(sup_aut, lp.plant, lp.bad)
    cfg = SimConfig(args.seed, args.steps, args.loss_bias, args.trace)
    if args.trace and args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            report = simulate(loop, cfg, fh)
    else:
        report = simulate(loop, cfg, sys.stdout if args.trace else None)
    print(report.to_json())
    return EXIT_OK if report.passed else EXIT_VERIFY


def cmd_stats(args) -> int:
    a = read_automaton(args.file).automaton
    blocking = a.num_states - len(coreachable_states(a))
    kinds: dict[str, int] = {}
    for e in a.alphabet:
        kinds[e.kind.name] = kinds.get(e.kind.name, 0) + 1
    print(f"states={a.num_states} transitions={a.num_transitions}")
    print(f"deterministic={str(a.is_deterministic).lower()} blocking_states={blocking} marked={len(a.marked)}")
    print("alphabet " + " ".join(f"{k}={v}" for k, v in sorted(kinds.items())))
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="netsup", description="Networked supervisor synthesis toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def channel_flags(p, defaults: bool) -> None:
        d = (lambda v: v) if defaults else (lambda _v: None)
        p.add_argument("--num-o", type=int, default=d(0))
        p.add_argument("--num-c", type=int, default=d(0))
        p.add_argument("--m", type=int, default=d(0))
        p.add_argument("--capacity", type=int, default=None)
        p.add_argument("--mechanism", choices=["first", "last"], default=d("first"))

    g = sub.add_parser("gen", help="generate channel, counter or guideway automata")
    g.add_argument("kind", choices=["oc", "cc", "ce", "sk", "am", "guideway"])
    g.add_argument("--sigma-o", default="")
    g.add_argument("--sigma-c", default="")
    g.add_argument("--sigma-ol", default="")
    g.add_argument("--sigma-uo", default="")
    g.add_argument("--k", type=int, default=1)
    channel_flags(g, True)
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)

    c = sub.add_parser("compose", help="synchronous product of automaton files")
    c.add_argument("inputs", nargs="+")
    c.add_argument("--out")
    c.set_defaults(func=cmd_compose)

    s = sub.add_parser("synthesize", help="supremal networked supervisor for a problem file")
    s.add_argument("problem")
    channel_flags(s, False)
    s.add_argument("--maximality", action="store_true", help="also check local maximality")
    s.add_argument("--out")
    s.set_defaults(func=cmd_synthesize)

    v = sub.add_parser("verify", help="check a supervisor (default: permissive) against a problem")
    v.add_argument("problem")
    v.add_argument("--supervisor")
    v.add_argument("--checks", help="comma-separated subset of " + ",".join(CHECKS))
    channel_flags(v, False)
    v.set_defaults(func=cmd_verify)

    m = sub.add_parser("simulate", help="seeded random walk of the closed loop with monitors")
    m.add_argument("problem")
    m.add_argument("--supervisor")
    m.add_argument("--seed", type=int, default=42)
    m.add_argument("--steps", type=int, default=100_000)
    m.add_argument("--loss-bias", type=float, default=0.5)
    m.add_argument("--trace", action="store_true")
    m.add_argument("--out", help="trace file (default standard output)")
    channel_flags(m, False)
    m.set_defaults(func=cmd_simulate)

    t = sub.add_parser("stats", help="size, determinism and blocking summary of an automaton file")
    t.add_argument("file")
    t.set_defaults(func=cmd_stats)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return args.func(args)
    except NetsupError as exc:
        print(f"error {exc.code}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error IO: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
