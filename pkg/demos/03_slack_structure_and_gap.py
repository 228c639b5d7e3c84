"""Decompose a fixed point into slack levels and read off the gap.

On the 4-node path with weights 2, 1.5, 0.8 the outcome splits into two
structures: the weak right-hand pair settles at slack 0.4, the strong
left-hand pair at 0.45, coupled to the middle by a second-best-offer
edge. The gap (the smallest of the first level, the level spacings,
and the cross-edge surpluses) is 0.05, and it controls how cleanly the
dynamics separates the structures. The per-edge message identities
(matched edges undershoot by twice the level, second-best edges
overshoot by the level) are verified exactly.
"""

from netbargain import Instance, check_fp_identities, decompose, fp_from_nb, nb_oracle

inst = Instance(4, ((0, 1, 2.0), (1, 2, 1.5), (2, 3, 0.8)))
(sol,) = nb_oracle(inst).solutions
print(f"allocation: {[round(g, 6) for g in sol.gamma]}")

fp = fp_from_nb(sol, inst)
dec = decompose(fp, sol, inst)
print(dec.summary())
print()
report = check_fp_identities(dec, fp, inst)
print(report.table())
print(f"\nall identities hold: {report.passed}")
