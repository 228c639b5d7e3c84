import numpy as np
import pytest

from netbargain.instance import GeneratorSpec, Instance, generate
from netbargain.slack import DecompositionError, check_fp_identities, compute_gap, decompose
from netbargain.matching import classify
from netbargain.nb import NBSolution, certify, fp_from_nb, nb_oracle, solve_balance


def _fp_and_sol(inst, matching=None):
    if matching is None:
        sols = nb_oracle(inst).solutions
        assert len(sols) == 1
        sol = sols[0]
    else:
        g = solve_balance(inst, matching)
        sol = certify(NBSolution(matching, tuple(np.maximum(g, 0.0))), inst)
    return fp_from_nb(sol, inst), sol


def test_decompose_e2(e2):
    fp, sol = _fp_and_sol(e2)
    dec = decompose(fp, sol, e2)
    assert dec.c0 == frozenset({2})
    (s,) = dec.structures
    assert s.nodes == frozenset({0, 1})
    assert s.e1 == frozenset({(0, 1)}) and s.e2 == frozenset({(1, 2)})
    assert s.v_ext == frozenset({0, 1, 2})
    assert s.topology == "path"
    assert s.sigma == pytest.approx(0.5, abs=1e-9)
    assert dec.gap == pytest.approx(0.5, abs=1e-9)


def test_decompose_single_edge(single_edge):
    sol = certify(NBSolution(frozenset({(0, 1)}), (0.5, 0.5)), single_edge)
    fp = fp_from_nb(sol, single_edge)
    dec = decompose(fp, sol, single_edge)
    assert dec.c0 == frozenset()
    (s,) = dec.structures
    assert s.e1 == frozenset({(0, 1)}) and not s.e2
    assert s.sigma == pytest.approx(0.5)
    assert dec.gap == pytest.approx(0.5)


def test_decompose_e4_two_levels(e4):
    fp, sol = _fp_and_sol(e4)
    dec = decompose(fp, sol, e4)
    assert len(dec.structures) == 2
    low, high = dec.structures
    assert low.sigma == pytest.approx(0.4, abs=1e-9)
    assert low.e1 == frozenset({(2, 3)}) and not low.e2
    assert high.sigma == pytest.approx(0.45, abs=1e-9)
    assert high.e1 == frozenset({(0, 1)}) and high.e2 == frozenset({(1, 2)})
    assert dec.levels == pytest.approx((0.4, 0.45), abs=1e-9)
    assert dec.gap == pytest.approx(0.05, abs=1e-9)


def test_decompose_e3_shared_level(e3):
    fp, sol = _fp_and_sol(e3)
    dec = decompose(fp, sol, e3)
    assert len(dec.structures) == 2
    assert all(s.sigma == pytest.approx(1.5, abs=1e-9) for s in dec.structures)
    assert len(dec.levels) == 1
    assert dec.gap == pytest.approx(1.5, abs=1e-9)


def test_decompose_p9_single_structure(p9):
    fp, sol = _fp_and_sol(p9, frozenset({(0, 1), (2, 3), (4, 5), (6, 7), (8, 9)}))
    dec = decompose(fp, sol, p9)
    (s,) = dec.structures
    assert s.topology == "path" and len(s.nodes) == 10
    assert s.sigma == pytest.approx(0.5, abs=1e-9)
    assert dec.gap == pytest.approx(0.5, abs=1e-9)


def test_decompose_b1_cycle_has_no_gap(b1):
    sol = certify(NBSolution(frozenset({(0, 1), (2, 3)}), (5.0, 5.0, 5.0, 5.0)), b1)
    fp = fp_from_nb(sol, b1)
    dec = decompose(fp, sol, b1)
    (s,) = dec.structures
    assert s.topology == "cycle"
    assert dec.gap is None
    with pytest.raises(DecompositionError):
        compute_gap(dec, sol, b1)


def test_blossom_topology():
    inst = generate(GeneratorSpec("blossom", (1, 5), weights=(1.2, 2.0, 1.2, 2.0, 1.2, 1.9)))
    matching = frozenset({(1, 2), (3, 4), (0, 5)})
    fp, sol = _fp_and_sol(inst, matching)
    dec = decompose(fp, sol, inst)
    (s,) = dec.structures
    assert s.topology == "blossom"
    assert len(dec.levels) == 1


def test_bicycle_topology():
    inst = generate(
        GeneratorSpec("bicycle", (3, 1, 3), weights=(1.2, 2.0, 1.2, 2.1, 1.2, 2.0, 1.2))
    )
    ref_matching = frozenset({(1, 2), (0, 3), (4, 5)})
    fp, sol = _fp_and_sol(inst, ref_matching)
    dec = decompose(fp, sol, inst)
    (s,) = dec.structures
    assert s.topology == "bicycle"


def test_check_fp_identities_e2(e2):
    fp, sol = _fp_and_sol(e2)
    dec = decompose(fp, sol, e2)
    rep = check_fp_identities(dec, fp, e2)
    assert rep.passed
    rows = {(r[0], r[1]): r for r in rep.rows}
    assert rows[((0, 1), "msg_matched")][2] == pytest.approx(-1.0, abs=1e-9)  # -2 sigma
    assert rows[((1, 2), "msg_second_best")][2] == pytest.approx(0.5, abs=1e-9)  # +sigma


def test_check_fp_identities_single_edge(single_edge):
    sol = certify(NBSolution(frozenset({(0, 1)}), (0.5, 0.5)), single_edge)
    fp = fp_from_nb(sol, single_edge)
    dec = decompose(fp, sol, single_edge)
    rep = check_fp_identities(dec, fp, single_edge)
    assert rep.passed
    (row,) = [r for r in rep.rows if r[1] == "msg_matched"]
    assert row[2] == pytest.approx(-1.0, abs=1e-12)  # 0 + 0 - 1 = -2 * 0.5


def test_identities_cover_cross_edges(e3):
    fp, sol = _fp_and_sol(e3)
    dec = decompose(fp, sol, e3)
    rep = check_fp_identities(dec, fp, e3)
    assert rep.passed
    kinds = {r[1] for r in rep.rows}
    assert "msg_cross" in kinds  # the two light edges join distinct structures


def test_dual_objective_consistency(e4):
    fp, sol = _fp_and_sol(e4)
    decompose(fp, sol, e4)
    assert sum(sol.gamma) == pytest.approx(classify(e4).optimum.weight, abs=1e-9)


def test_levels_sorted_and_relabeling_invariance(e4):
    fp, sol = _fp_and_sol(e4)
    dec = decompose(fp, sol, e4)
    assert list(dec.levels) == sorted(dec.levels)

    perm = [3, 1, 2, 0]
    other = e4.relabeled(perm)
    sols = nb_oracle(other).solutions
    assert len(sols) == 1
    fp2 = fp_from_nb(sols[0], other)
    dec2 = decompose(fp2, sols[0], other)
    assert [round(l, 9) for l in dec2.levels] == [round(l, 9) for l in dec.levels]
    assert sorted(s.topology for s in dec2.structures) == sorted(s.topology for s in dec.structures)
    assert dec2.gap == pytest.approx(dec.gap, abs=1e-9)


def test_unstable_clustering_detected():
    # two slack levels a few tolerances apart must be refused, not merged
    eps = 1.2e-5
    inst = Instance(4, ((0, 1, 2.0), (1, 2, 1.5), (2, 3, 1.0 - eps)))
    matching = frozenset({(0, 1), (2, 3)})
    g = solve_balance(inst, matching)
    sol = certify(NBSolution(matching, tuple(np.maximum(g, 0.0))), inst)
    fp = fp_from_nb(sol, inst)
    with pytest.raises(DecompositionError, match="clustering"):
        decompose(fp, sol, inst)


def test_decompose_requires_certified(e2):
    fp, sol = _fp_and_sol(e2)
    with pytest.raises(DecompositionError):
        decompose(fp, NBSolution(sol.matching, sol.gamma), e2)


def test_identity_table_text(e2):
    fp, sol = _fp_and_sol(e2)
    dec = decompose(fp, sol, e2)
    from netbargain.slack import check_fp_identities as _ci

    table = _ci(dec, fp, e2).table()
    assert "msg_matched" in table and "msg_second_best" in table


def test_identities_hold_across_random_corpus():
    # every unique-outcome random instance must satisfy the per-edge
    # message identities of its own decomposition at construction accuracy
    from netbargain.instance import GeneratorSpec, generate
    from netbargain.matching import classify as _classify

    checked = 0
    skipped = 0
    for seed in range(40):
        inst = generate(
            GeneratorSpec("erdos_renyi", (4 + seed % 3,), base=(1.0, 1.6, 2.3), jitter=0.15, seed=seed)
        )
        if _classify(inst).kind != "tight":
            continue
        res = nb_oracle(inst)
        if res.family or len(res.solutions) != 1:
            continue
        sol = res.solutions[0]
        fp = fp_from_nb(sol, inst)
        try:
            dec = decompose(fp, sol, inst)
        except DecompositionError:
            skipped += 1  # jitter can land two levels inside the guard band
            continue
        if any(s.topology == "cycle" for s in dec.structures):
            continue
        rep = check_fp_identities(dec, fp, inst, tol=1e-8)
        assert rep.passed, rep.failures()
        assert dec.gap is not None and dec.gap > 0
        checked += 1
    assert checked >= 15
