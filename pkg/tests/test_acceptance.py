"""One test per acceptance criterion; each prints a PASS/FAIL line."""

import itertools
import json
import math
import time
from fractions import Fraction as F

import numpy as np
import pytest

from artifact.abgroup import Group
from artifact.classification import classify_involutive
from artifact.exactnum import Phase
from artifact.families import (FamilyInput, admissibility_report, family_build, family_closed_fs, family_closed_verlinde,
                               family_instance_make, fusion_prefactor)
from artifact.metric import QuadraticForm, as_phase, enumerate_quadratic_forms, gauss_sum
from artifact.moddata import (Label, check_fs2, check_fs3, find_label_bijection, pointed, tensor, verify_relations,
                              verlinde_numeric)
from artifact.workbench import SearchSpec, involutive_classes, reproduce, search

from conftest import family_examples, form


def _instances():
    out = {name: family_instance_make(inp) for name, inp in family_examples().items()}
    for i, hit in enumerate(search(SearchSpec("A", ((5,),), ((9,), (3, 3))))):
        out[f"A-z5-order9-{i}"] = hit.instance
    out["A-haagerup-x-semion"] = family_instance_make(
        "A", form((3, 3, 2), (F(1, 3), F(2, 3), F(1, 4))), form((13, 2), (F(2, 13), F(1, 4))))
    return out


@pytest.fixture(scope="module")
def instances():
    start = time.perf_counter()
    built = {}
    for name, inst in _instances().items():
        built[name] = (inst, family_build(inst))
    return built, time.perf_counter() - start


@pytest.fixture
def report(capsys):
    lines = []

    def emit(number, ok, detail):
        lines.append(f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}")
        with capsys.disabled():
            print("\n" + lines[-1])
        assert ok, detail
    return emit


def test_criterion_1_relations(instances, report):
    built, elapsed = instances
    worst = 0.0
    bad = []
    for name, (_, md) in built.items():
        rel = verify_relations(md, 1e-9)
        worst = max(worst, rel.residuals["unitarity"], rel.residuals["s_squared"], rel.residuals["st_cubed"])
        if not rel.ok:
            bad.append(name)
    ok = len(built) >= 12 and not bad and elapsed <= 30
    report(1, ok, f"{len(built)} instances, worst residual {worst:.1e}, {elapsed:.1f}s, failing {bad}")


def test_criterion_2_verlinde(instances, report):
    built, _ = instances
    start = time.perf_counter()
    worst, bad = 0.0, []
    for name, (inst, md) in built.items():
        fusion = verlinde_numeric(md, 1e-6)
        worst = max(worst, fusion.residual)
        closed = family_closed_verlinde(inst)
        if not np.array_equal(closed.N, fusion.N) or fusion.symmetry_defect(md.duality):
            bad.append(name)
    elapsed = time.perf_counter() - start
    top = max(md.rank for _, md in built.values())
    ok = not bad and worst <= 1e-6 and top <= 40 and elapsed <= 60
    report(2, ok, f"closed = numeric on {len(built)} instances, max rank {top}, residual {worst:.1e}, "
                  f"{elapsed:.1f}s, failing {bad}")


# (G shape, Gamma shapes) with |Gamma| - |G| equal to 1 or 3 times the fixed-point count
GAP_PAIRS = [((3,), [(4,), (2, 2)]), ((5,), [(6,)]), ((9,), [(10,)]), ((3, 3), [(10,)]), ((2,), [(3,), (5,)]),
             ((7,), [(8,), (2, 4), (2, 2, 2)]), ((3,), [(6,)]), ((5,), [(8,), (2, 4), (2, 2, 2)]),
             ((2, 2), [(5,), (7,)]), ((4,), [(5,), (7,)])]


def test_criterion_3_size_necessity(report):
    three = fusion_prefactor("A", 9, 12, 1), fusion_prefactor("A", 8, 14, 2)
    tried, admitted, unflagged = 0, 0, 0
    for g, targets in GAP_PAIRS:
        for a in involutive_classes(g, "enumerate"):
            for shape in targets:
                for b in involutive_classes(shape, "enumerate"):
                    rep = admissibility_report(FamilyInput("A", a, b))
                    tried += 1
                    admitted += rep.ok
                    unflagged += "integrality" not in [c.name for c in rep.failures()]
    d_pref = fusion_prefactor("D", 4, 6)
    d_rep = admissibility_report("D", form((2, 2), (F(1, 2), F(1, 2)), {(0, 1): F(1, 2)}),
                                 form((2, 3), (F(1, 4), F(1, 3))))
    failing = [c.name for c in d_rep.failures()]
    ok = (all(v.denominator != 1 for v in three) and tried and not admitted and not unflagged
          and d_pref == 2 and not d_rep.ok and "Gamma odd" in failing)
    report(3, ok, f"family A ratio 3 prefactors {[str(v) for v in three]}; ratio 1 and 3 pairs: {admitted} of "
                  f"{tried} admissible; family D gap 2 prefactor {d_pref}, rejected by {failing}")


def test_criterion_4_indicators(instances, report):
    built, _ = instances
    bad = []
    for name, (inst, md) in built.items():
        fusion = verlinde_numeric(md)
        if not (all(c.ok for c in check_fs2(md, fusion)) and all(c.ok for c in check_fs3(md, fusion))):
            bad.append(name)
    # odd pair with 3-rank 3 on the first side: Z3^3 against Z31
    ctrl = family_instance_make("A", form((3, 3, 3), (F(1, 3),) * 3), form((31,), (F(1, 31),)))
    md = family_build(ctrl)
    fusion = verlinde_numeric(md)
    pi = md.index(Label("upi", (0, 0, 0)))
    fs3 = {str(c.label): c for c in check_fs3(md, fusion)}
    nu = fs3["(000,pi)"].value
    flagged = fusion[pi, pi, pi] == 1 and not fs3["(000,pi)"].ok and not family_closed_fs(ctrl, 3).predicates["FS3"]
    ok = not bad and flagged
    report(4, ok, f"FS2/FS3 pass on {len(built) - len(bad)}/{len(built)}; control Z3^3/Z31: "
                  f"N_pipipi = {fusion[pi, pi, pi]}, nu3(pi) = {nu.real:.3f}, flagged {flagged}")


def test_criterion_5_search_counts(report):
    times = []
    start = time.perf_counter()
    z5 = search(SearchSpec("A", ((5,),), ((9,), (3, 3))))
    times.append(time.perf_counter() - start)
    start = time.perf_counter()
    hg = search(SearchSpec("A", ((3, 3),), ((13,),)))
    times.append(time.perf_counter() - start)
    start = time.perf_counter()
    b = search(SearchSpec("B", ((2,),), ((4,),)))
    times.append(time.perf_counter() - start)
    hg_gauss = {str(as_phase(gauss_sum(h.instance.first.form))) for h in hg}
    ok = len(z5) == 3 and hg and hg_gauss == {"0/1"} and len(b) == 2 and max(times) <= 120
    report(5, ok, f"Z5: {len(z5)} solutions; Z3^2/Z13: G(q1) in {sorted(hg_gauss)}; B Z2/Z4: {len(b)} classes; "
                  f"slowest {max(times):.1f}s")


def test_criterion_6_rank7_fixture(report):
    rep = reproduce("appendix-e-rank7")
    ok = rep.passed
    report(6, ok, "; ".join(f"{what}: {'ok' if good else 'FAIL'}" for what, good, _ in rep.checks))


def test_criterion_7_classification(report):
    start = time.perf_counter()
    reps = [classify_involutive(p, 16) for p in ("z2", "z2z2")]
    elapsed = time.perf_counter() - start
    ok = all(r.ok for r in reps) and elapsed <= 300
    report(7, ok, ", ".join(f"{r.pattern}: {len(r.classes)} classes, {len(r.unmatched)} unmatched" for r in reps)
           + f", {elapsed:.1f}s")


def test_criterion_8_factorization(report):
    semion = form((2,), (F(1, 4),))
    md = family_build(family_instance_make("A", form((3, 3, 2), (F(1, 3), F(2, 3), F(1, 4))),
                                           form((13, 2), (F(2, 13), F(1, 4)))))
    ref = tensor(pointed(semion), family_build(family_instance_make(family_examples()["A-haagerup"])))
    perm = find_label_bijection(ref, md, 1e-9)
    err = float(np.max(np.abs(md.S[np.ix_(perm, perm)] - ref.S))) if perm else math.inf
    ok = perm is not None and err <= 1e-9
    report(8, ok, f"Haagerup x semion, rank {md.rank}, max entry error after bijection {err:.1e}")


def test_criterion_9_gauss_laws(instances, report):
    built, _ = instances
    odd_bad = [] if as_phase(gauss_sum(QuadraticForm.trivial())) == Phase(0, 1) else ["trivial"]
    for n in range(3, 26, 2):
        shapes = [(n,)] + [(p, p) for p in (3, 5) if p * p == n]
        allowed = {"0/1", "1/2"} if n % 4 == 1 else {"1/4", "3/4"}
        for shape in shapes:
            for f in enumerate_quadratic_forms(Group(shape)):
                if str(as_phase(gauss_sum(f))) not in allowed:
                    odd_bad.append(str(f))
    two_bad = []
    for n in range(1, 6):
        for r in range(1, 2 ** (n + 1), 2):
            got = as_phase(gauss_sum(form((2 ** n,), (F(r, 2 ** (n + 1)),))))
            want = Phase(r, 8) * Phase(1, 2) ** (n * (r * r - 1) // 8)
            if got != want:
                two_bad.append((n, r))
    c_bad = []
    for name, (inst, md) in built.items():
        g1, g2 = as_phase(gauss_sum(inst.first.form)), as_phase(gauss_sum(inst.second.form))
        if not (g1 == inst.c and g2 == inst.c * Phase(1, 2)):
            c_bad.append(name)
    ok = not (odd_bad or two_bad or c_bad)
    report(9, ok, f"odd groups {len(odd_bad)} bad, 2-group formula {len(two_bad)} bad, "
                  f"c = G(q1) = -G(q2) fails on {c_bad}")
