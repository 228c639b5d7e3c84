"""The comparison machinery that controls convergence on path structures.

Three exhibits on the 2-1 path's structure (and a standalone path):

1. The simplified dynamics, with no max, no clamping, and two boundary
   inputs, has an explicit fixed point pinned to the boundary values,
   reached at a diffusive rate.
2. Checkerboard-shifted copies of the real fixed point evolve under the
   simplified dynamics into companion processes that bracket the real
   trajectory coordinate by coordinate, while keeping the matched /
   unmatched sign pattern of every edge.
3. The absolute difference of two simplified runs is dominated,
   pointwise and forever, by a non-negative random-walk mass that decays
   only through the path's ends.
"""

import numpy as np

from netbargain import Instance, decompose, fp_from_nb, nb_oracle
from netbargain.pathlab import (
    BoundingConfig,
    PathSpec,
    SimplifiedPathState,
    bounding_fixed_point,
    bounding_process,
    domination_test,
    mass_step,
    run_simplified,
    sandwich_test,
    simplified_fixed_point,
    structure_path,
)

print("== simplified dynamics on one matched edge, boundaries 0.3 / 0.2")
p1 = PathSpec((1.0,), (True,))
star = simplified_fixed_point(p1, 0.3, 0.2)
print(f"   fixed point {star} (equals the boundary inputs), offer {p1.offers(star)[0]:.3f}")
state, trace, converged = run_simplified(SimplifiedPathState(p1, np.zeros(2), 0.3, 0.2), 2000)
print(f"   reached it to 1e-12 in {len(trace)} steps")

print("\n== companion processes bracket the real dynamics (path 2-1)")
inst = Instance(3, ((0, 1, 2.0), (1, 2, 1.0)))
(sol,) = nb_oracle(inst).solutions
fp = fp_from_nb(sol, inst)
dec = decompose(fp, sol, inst)
seq, weights, matched, slots = structure_path(dec, 0, fp.index)
spec = PathSpec(weights, matched)
star = tuple(float(x) for x in fp.alpha[slots])
for sign in (+1, -1):
    cfg = BoundingConfig(sign, 0.4, 0.2, star)
    states = bounding_process(cfg, spec, 2000)  # raises if a sign condition breaks
    err = np.abs(states[-1] - bounding_fixed_point(cfg)).max()
    print(f"   sign {sign:+d}: signs held for 2000 steps, {err:.1e} from the companion's own fixed point")
print(f"   sandwich holds for 10^4 steps: {sandwich_test(fp, dec, 0, 0.4, 0.2, 10**4)}")

print("\n== mass envelope dominates the difference of two runs (length 6)")
rng = np.random.default_rng(0)
p6 = PathSpec(tuple(rng.uniform(0.8, 1.8, 6)), tuple(k % 2 == 0 for k in range(6)))
log = []
ok = domination_test(p6, 0.1, rng.uniform(-1, 1, 12), 5000, log=log)
print(f"   dominated at every step: {ok}; worst margin {min(log):.3e}")
rho = np.ones(12)
for _ in range(1000):
    rho = mass_step(rho, p6, injection="both")
print(f"   dual injection stays at exactly one unit per slot: max|rho-1| = {np.abs(rho - 1).max():.1e}")
