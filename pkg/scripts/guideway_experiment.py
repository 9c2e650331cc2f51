"""Guideway case study: plant size, supremal supervisor and a seeded run.

Prints the transformed-plant size, the supervisor in its three forms
(observer cells, closed loop, minimal closed loop) and the property checks.
"""

import argparse
import time

from netsup.automata import ControlConstraint, minimize
from netsup.channels import ChannelParams, Mechanism
from netsup.guideway import guideway_transformed
from netsup.sim import ClosedLoop, SimConfig, simulate
from netsup.synthesis import SynthesisProblem, check_local_maximality, synthesize_supremal, verify


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--num-o", type=int, default=1)
    ap.add_argument("--mechanism", choices=["first", "last"], default="first")
    ap.add_argument("--steps", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args()

    t0 = time.perf_counter()
    tp, bad = guideway_transformed(ChannelParams(num_o=args.num_o, mechanism=Mechanism(args.mechanism)))
    p = tp.automaton
    print(f"plant states={p.num_states} transitions={p.num_transitions} bad={len(bad)} "
          f"deterministic={p.is_deterministic} seconds={time.perf_counter() - t0:.2f}")

    problem = SynthesisProblem(p, ControlConstraint.networked(tp.alph), bad)
    t0 = time.perf_counter()
    sup = synthesize_supremal(problem)
    print(f"synthesis seconds={time.perf_counter() - t0:.2f}")
    if not sup:
        print(f"EMPTY: {sup.reason}")
        return
    cl = sup.closed_loop(p)
    canon = minimize(cl)
    print(f"supervisor states={sup.automaton.num_states} transitions={sup.automaton.num_transitions}")
    print(f"closed loop states={cl.num_states} transitions={cl.num_transitions}")
    print(f"minimal closed loop states={canon.num_states} transitions={canon.num_transitions}")

    checks = {k: bool(v) for k, v in verify(sup, problem).items()}
    checks["local-maximality"] = bool(check_local_maximality(sup, problem))
    print(" ".join(f"{k}={'ok' if v else 'FAIL'}" for k, v in checks.items()))

    report = simulate(ClosedLoop.build(sup.automaton, tp, bad), SimConfig(args.seed, args.steps))
    print(f"simulation steps={report.steps_executed} violations={len(report.violations)} "
          f"max_queue={report.max_queue_seen} max_obs_in_flight={report.max_obs_in_flight}")


if __name__ == "__main__":
    main()
