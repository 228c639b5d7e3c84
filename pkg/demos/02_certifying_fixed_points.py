"""Certify converged states as balanced outcomes, or explain why not.

A converged message state is audited against the full fixed-point
property list: partner consistency, offers determined by earnings,
balance at every edge, optimality for the covering dual, and agreement
between the message labels (dotted edges) and the matching-LP optimum
(solid edges). On the 2-1 path everything passes and the strong-dotted
edge carries a stable, balanced outcome. The unit triangle is pointed
but not tight: the relaxation prefers the half-integral cycle, no
stable outcome exists, yet the same properties still hold with every
edge weakly dotted.
"""

from netbargain import Instance, classify, fp_property_suite, nb_from_fp, run
from netbargain.matching import classification_report

for name, inst in {
    "path 0-1-2 (w=2,1)": Instance(3, ((0, 1, 2.0), (1, 2, 1.0))),
    "unit triangle": Instance(3, ((0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0))),
}.items():
    print(f"== {name}")
    cls = classify(inst)
    print(classification_report(cls, inst))
    state, _, _, _ = run(inst)
    report = fp_property_suite(state, inst, cls)
    print(report.summary())
    print(f"edge labels: {report.labels}")
    if report.nb_exists:
        sol = nb_from_fp(state, inst, report)
        print(f"outcome: matching={sorted(sol.matching)} gamma={[round(g, 6) for g in sol.gamma]}")
        print(f"certified stable={sol.stable} balanced={sol.balanced}")
    else:
        print("no stable outcome exists here; the earnings still solve the dual optimally")
    print()
