"""Watch the bargaining dynamics settle on three tiny networks.

Each player keeps a running claim of what she could earn elsewhere,
offers her neighbors an even split of whatever surplus those claims
leave, and relaxes her claims toward the best competing offer. On a
single edge the split is 50/50. On the path 2-1 the middle player
leverages her weak outside option into 1.5 of the heavy edge. On the
unit triangle nobody can pair up profitably and everyone's estimate
settles at 1/2 without any agreement forming.
"""

import numpy as np

from netbargain import DynamicsConfig, Instance, extract_pairing, run

EXAMPLES = {
    "single edge (w=1)": Instance(2, ((0, 1, 1.0),)),
    "path 0-1-2 (w=2,1)": Instance(3, ((0, 1, 2.0), (1, 2, 1.0))),
    "unit triangle": Instance(3, ((0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0))),
}

for name, inst in EXAMPLES.items():
    state, iters, trace, converged = run(inst, DynamicsConfig(kappa=0.5))
    print(f"== {name}")
    print(f"   converged={converged} after {iters} steps")
    print(f"   earnings: {np.round(state.gamma, 6)}")
    print(f"   messages: { {k: round(v, 6) for k, v in state.alpha_map().items()} }")
    pairs, ambiguous, unpaired = extract_pairing(state, margin=0.05)
    print(f"   pairing: pairs={sorted(pairs)} ambiguous={sorted(ambiguous)} unpaired={sorted(unpaired)}")
    print(f"   late-step changes: {[f'{c:.1e}' for c in trace.step_change[-3:]]}")
    print()
