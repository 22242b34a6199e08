import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from artifact.errors import InvalidArgument, ParseError, Rejected
from artifact.exactnum import Phase
from artifact.families import (FamilyInput, admissibility_report, family_build, family_closed_fs, family_closed_verlinde,
                               family_instance_make, fusion_prefactor, haagerup_type_identities, with_sections)
from artifact.metric import InvolutiveMetricGroup, gauss_sum
from artifact.moddata import (Label, find_label_bijection, fs_numeric, pointed, tensor, verify_relations,
                              verlinde_numeric)

from conftest import EXPECTED_RANKS, family_examples, form

NAMES = sorted(EXPECTED_RANKS)


@pytest.fixture(scope="module")
def built():
    out = {}
    for name, inp in family_examples().items():
        inst = family_instance_make(inp)
        md = family_build(inst)
        out[name] = (inst, md, verlinde_numeric(md))
    return out


@pytest.mark.parametrize("name", NAMES)
def test_rank(built, name):
    inst, md, _ = built[name]
    assert inst.rank == md.rank == EXPECTED_RANKS[name]


@pytest.mark.parametrize("name", NAMES)
def test_relations(built, name):
    _, md, _ = built[name]
    rep = verify_relations(md, 1e-9)
    assert rep.ok, rep.failures()


@pytest.mark.parametrize("name", NAMES)
def test_closed_verlinde_matches_numeric(built, name):
    inst, md, fusion = built[name]
    closed = family_closed_verlinde(inst)
    assert closed.labels == md.labels
    assert np.array_equal(closed.N, fusion.N)
    assert closed.symmetry_defect(md.duality) == []


@pytest.mark.parametrize("name", NAMES)
@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_closed_indicators_match_numeric(built, name, m):
    inst, md, fusion = built[name]
    closed = family_closed_fs(inst, m)
    assert np.allclose(np.asarray(closed.values), fs_numeric(md, m, fusion), atol=1e-8)
    if m == 1:
        assert np.allclose(np.asarray(closed.values), np.eye(md.rank)[0])
    if m in (2, 3):
        assert all(closed.predicates.values()), closed.predicates


def test_haagerup_dimension(built):
    _, md, _ = built["A-haagerup"]
    d = (3 + math.sqrt(13)) / 2
    assert abs(md.S[0, 0] - 1 / (3 + 3 * d * d)) < 1e-12


def test_haagerup_labels(built):
    _, md, fusion = built["A-haagerup"]
    assert [str(l) for l in md.labels[:3]] == ["(00,0)", "(00,pi)", "g01"]
    pi = md.index(Label("upi", (0, 0)))
    assert fusion[pi, pi, pi] == 1


def test_central_charge_is_the_first_gauss_sum(built):
    for name in ("A-near-group", "A-z4", "A-haagerup", "B", "D"):
        inst, md, _ = built[name]
        assert md.c_exact == inst.c
    inst, md, _ = built["B"]
    assert inst.c == Phase(1, 8)


def test_family_e_flips_the_central_charge(built):
    inst, md, _ = built["E"]
    g1 = gauss_sum(inst.first.form).value
    assert abs(md.c + g1) < 1e-12
    assert md.c_exact == inst.c * Phase(1, 2)
    assert np.all(md.S[0].real > 0)


def test_family_b_s_squared(built):
    inst, _, _ = built["B"]
    g0 = inst.G.elements[inst.marked["g0"]]
    assert inst.s ** 2 == inst.first.form.pair(g0, g0)


def test_family_c_identities(built):
    inst, _, _ = built["C"]
    assert all(haagerup_type_identities(inst).values())
    assert inst.size_gap == 4
    with pytest.raises(InvalidArgument):
        haagerup_type_identities(built["B"][0])


def test_family_d_size_gap(built):
    for name in ("D", "D-asaeda-haagerup"):
        assert built[name][0].size_gap == 1
    assert built["E"][0].size_gap == -1


def test_asaeda_haagerup_gauss_sum(built):
    inst, md, fusion = built["D-asaeda-haagerup"]
    assert gauss_sum(inst.second.form).value == pytest.approx(-1)
    pi = md.index(Label("pi"))
    assert fusion[pi, pi, pi] == 4


def test_conjugate_input_gives_conjugate_data(built):
    _, a, _ = built["B"]
    _, b, _ = built["B-conjugate"]
    conj = type(a)(a.labels, a.S.conj(), tuple(t.inverse() for t in a.T), a.duality, complex(a.c).conjugate())
    assert find_label_bijection(conj, b) is not None


@pytest.mark.parametrize("name", NAMES)
def test_admissibility_reports(built, name):
    inst, _, _ = built[name]
    rep = inst.report
    assert rep.ok and rep.failures() == []
    assert rep.to_json()["ok"] is True
    assert "admissible" in rep.summary()


def test_input_json_roundtrip(examples):
    for inp in examples.values():
        again = FamilyInput.from_json(inp.to_json())
        assert again.to_json() == inp.to_json()
    with pytest.raises(ParseError):
        FamilyInput.from_json({"family": "A"})


def test_rejects_equal_gauss_sums():
    rep = admissibility_report("B", form((2,), (F(1, 4),)), form((4,), (F(1, 8),)))
    assert not rep.ok
    assert "opposite Gauss sums" in [c.name for c in rep.failures()]
    with pytest.raises(Rejected) as err:
        family_instance_make("B", form((2,), (F(1, 4),)), form((4,), (F(1, 8),)))
    assert err.value.report is not None


def test_rejects_wrong_two_torsion():
    rep = admissibility_report("D", form((4,), (F(1, 8),)), form((5,), (F(1, 5),)))
    assert "K = Z2 x Z2" in [c.name for c in rep.failures()]


def test_rejects_non_integral_prefactor():
    # |Gamma| - |G| = 2 with the right 2-torsion in G
    rep = admissibility_report("D", form((2, 2), (F(1, 2), F(1, 2)), {(0, 1): F(1, 2)}), form((3, 2), (F(1, 3), F(1, 4))))
    assert not rep.ok


def test_rejects_unknown_family():
    with pytest.raises((InvalidArgument, ParseError)):
        FamilyInput.of("Z", form((2,), (F(1, 4),)), form((4,), (F(5, 8),)))


@pytest.mark.parametrize("gap,size_u,integral", [(1, 1, True), (2, 1, True), (4, 1, True), (3, 1, False),
                                                  (8, 2, True), (3, 3, True), (5, 1, False)])
def test_family_a_prefactor(gap, size_u, integral):
    v = fusion_prefactor("A", 9, 9 + gap, size_u)
    assert v == F(4 * size_u, gap)
    assert (v.denominator == 1) == integral


def test_prefactor_signs():
    assert fusion_prefactor("E", 12, 11) == 4
    assert fusion_prefactor("D", 4, 5) == 4
    assert fusion_prefactor("C", 4, 8) == 1
    with pytest.raises(InvalidArgument):
        fusion_prefactor("B", 4, 4)


def test_section_validation(built):
    inst, _, _ = built["A-haagerup"]
    with pytest.raises(InvalidArgument):
        with_sections(inst, inst.sections[0][:-1], inst.sections[1])


@settings(max_examples=15)
@given(st.sampled_from(["A-haagerup", "A-near-group", "B", "D", "C"]), st.data())
def test_other_orbit_representatives_give_the_same_data(built, name, data):
    inst, md, _ = built[name]
    picks = []
    for img, sec in ((inst.first, inst.sections[0]), (inst.second, inst.sections[1])):
        p = img.involution.perm
        flips = data.draw(st.lists(st.booleans(), min_size=len(sec), max_size=len(sec)))
        picks.append([int(p[i]) if f else i for i, f in zip(sec, flips)])
    other = family_build(with_sections(inst, *picks))
    assert find_label_bijection(md, other) is not None


def test_product_with_a_pointed_factor():
    """Enlarging both groups by the same metric group factors off a pointed tensor factor."""
    semion = form((2,), (F(1, 4),))
    hg = family_examples()["A-haagerup"]
    big = FamilyInput.of("A", form((3, 3, 2), (F(1, 3), F(2, 3), F(1, 4))), form((13, 2), (F(2, 13), F(1, 4))))
    inst = family_instance_make(big)
    md = family_build(inst)
    ref = tensor(pointed(semion), family_build(family_instance_make(hg)))
    assert md.rank == ref.rank == 24
    assert find_label_bijection(ref, md) is not None
