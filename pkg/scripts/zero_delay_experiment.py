"""Zero-delay recovery on random plants.

With num_o = num_c = 0 the networked supremal supervisor, projected back to
base events, should contain the classical supremal result.  This script also
counts how often the two are equal.
"""

import argparse
from collections import Counter

from netsup.automata import ControlConstraint, language_equal, language_included, project
from netsup.channels import ChannelParams, build_transformed_plant, relabel_plant
from netsup.randgen import RandomPlantConfig, random_instance
from netsup.synthesis import (
    SynthesisProblem,
    base_projection,
    brute_force_supremal,
    classical_problem,
    synthesize_supremal,
)


def compare(seed: int, cfg: RandomPlantConfig) -> str:
    inst = random_instance(seed, cfg)
    classical = brute_force_supremal(classical_problem(inst.g, inst.alph, inst.bad))
    tp = build_transformed_plant(relabel_plant(inst.g, inst.alph), inst.alph, ChannelParams())
    networked = synthesize_supremal(
        SynthesisProblem(tp.automaton, ControlConstraint.networked(inst.alph), tp.bad_states(inst.bad))
    )
    if not classical:
        return "both-empty" if not networked else "classical-empty"
    if not networked:
        return "networked-empty"
    proj = project(networked.closed_loop(tp.automaton), base_projection(inst.alph))
    ref = classical.closed_loop(inst.g)
    if language_equal(ref, proj):
        return "equal"
    return "strict-containment" if language_included(ref, proj) else "NOT-CONTAINED"


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=60)
    ap.add_argument("--lossy", action="store_true", help="let observable events be lossy")
    args = ap.parse_args()
    cfg = RandomPlantConfig(lossy=args.lossy)
    tally = Counter()
    for seed in range(args.seeds):
        outcome = compare(seed, cfg)
        tally[outcome] += 1
        if outcome in ("NOT-CONTAINED", "strict-containment", "networked-empty"):
            print(f"seed {seed}: {outcome}")
    for k, v in sorted(tally.items()):
        print(f"{k}: {v}")


if __name__ == "__main__":
    main()
