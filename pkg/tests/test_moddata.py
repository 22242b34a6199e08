import cmath
import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from artifact.abgroup import Group
from artifact.errors import IntegralityViolation, InvalidArgument, ParseError, PreconditionViolated
from artifact.exactnum import Phase
from artifact.families import family_build, family_instance_make
from artifact.metric import enumerate_quadratic_forms
from artifact.moddata import (Label, ModularData, check_fs2, check_fs3, find_label_bijection, from_matrices, fs3_decomposition,
                              fs_numeric, pointed, tensor, verify_relations, verlinde_numeric)

from conftest import HYPERBOLIC, form

SEMION = form((2,), (F(1, 4),))
NONDEGENERATE = [f for shape in [(2,), (3,), (4,), (5,), (2, 2), (2, 4), (3, 3), (8,)]
                 for f in enumerate_quadratic_forms(Group(shape)) if f.nondegenerate()]


def _loop_fs(md, fusion, n):
    """Indicator by direct triple loop, used as a reference."""
    s0 = md.S[0]
    t = md.T_values
    out = []
    for k in range(md.rank):
        total = 0
        for i in range(md.rank):
            for j in range(md.rank):
                total += fusion.N[i, j, md.duality[k]] * s0[i] * s0[j] * (t[j] / t[i]) ** n
        out.append(total)
    return np.array(out)


def test_semion_data():
    md = pointed(SEMION)
    assert np.allclose(md.S, np.array([[1, 1], [1, -1]]) / math.sqrt(2))
    assert md.T == (Phase(0, 1), Phase(1, 4))
    assert md.c_exact == Phase(1, 8)
    assert verify_relations(md).ok


def test_pointed_rejects_degenerate():
    with pytest.raises(PreconditionViolated):
        pointed(form((2, 2), (0, 0)))


@pytest.mark.parametrize("f", NONDEGENERATE, ids=str)
def test_pointed_relations_and_fusion(f):
    md = pointed(f)
    rep = verify_relations(md)
    assert rep.ok, rep.failures()
    N = verlinde_numeric(md)
    g = f.group
    els = g.elements
    for i, x in enumerate(els):
        for j, y in enumerate(els):
            z = g.index(g.neg(g.add(x, y)))
            assert N[i, j, z] == 1
            assert N.N[i, j].sum() == 1
    assert N.symmetry_defect(md.duality) == []


@pytest.mark.parametrize("f", NONDEGENERATE, ids=str)
def test_pointed_indicators(f):
    md = pointed(f)
    fusion = verlinde_numeric(md)
    nu1 = fs_numeric(md, 1, fusion)
    assert np.allclose(nu1, np.eye(md.rank)[0])
    for n in (2, 3, 4):
        assert np.allclose(fs_numeric(md, n, fusion), _loop_fs(md, fusion, n))
    assert all(c.ok for c in check_fs2(md, fusion))
    assert all(c.ok for c in check_fs3(md, fusion))
    nu2 = fs_numeric(md, 2, fusion)
    for k, x in enumerate(f.group.elements):
        if md.duality[k] == k:
            assert abs(nu2[k] - f.pair(x, x).value()) < 1e-9


def test_known_two_indicators():
    semion = pointed(SEMION)
    assert np.allclose(fs_numeric(semion, 2), [1, -1])
    toric = pointed(form(*HYPERBOLIC))
    assert np.allclose(fs_numeric(toric, 2), [1, 1, 1, 1])


def test_tensor_product():
    a, b = pointed(SEMION), pointed(form((3,), (F(1, 3),)))
    ab = tensor(a, b)
    assert ab.rank == 6
    assert verify_relations(ab).ok
    assert ab.c_exact == a.c_exact * b.c_exact
    assert str(ab.labels[4]) == "1*1"


def test_tensor_with_family_data(examples):
    fam = family_build(family_instance_make(examples["D"]))
    md = tensor(pointed(SEMION), fam)
    assert md.rank == 2 * fam.rank
    assert verify_relations(md).ok
    assert verlinde_numeric(md).symmetry_defect(md.duality) == []


def test_relations_detect_perturbation():
    md = pointed(form(*HYPERBOLIC))
    S = md.S.copy()
    S[1, 2] += 1e-3
    S[2, 1] += 1e-3
    bad = ModularData(md.labels, S, md.T, md.duality, md.c)
    rep = verify_relations(bad)
    assert not rep.ok and "unitarity" in rep.failures()
    wrong_t = ModularData(md.labels, md.S, (Phase(0, 1),) * 4, md.duality, md.c)
    assert "st_cubed" in verify_relations(wrong_t).failures()


def test_verlinde_rejects_non_integral():
    theta = 0.3
    S = np.array([[math.cos(theta), math.sin(theta)], [math.sin(theta), -math.cos(theta)]])
    md = from_matrices(S, ["0", "1/4"], [0, 1])
    with pytest.raises(IntegralityViolation):
        verlinde_numeric(md)


def test_from_matrices_reads_duality():
    md = pointed(form((3,), (F(1, 3),)))
    raw = from_matrices(md.S, md.T)
    assert raw.duality == (0, 2, 1)
    assert abs(raw.c - md.c) < 1e-12
    assert find_label_bijection(md, raw) == [0, 1, 2]


def test_find_label_bijection_after_relabelling():
    md = pointed(form((2, 4), (F(1, 4), F(3, 8)), {(0, 1): 0}))
    rng = np.random.default_rng(3)
    perm = [0] + list(rng.permutation(np.arange(1, md.rank)))
    inv = np.argsort(perm)
    S = md.S[np.ix_(inv, inv)]
    T = [md.T[i] for i in inv]
    dual = [perm[md.duality[i]] for i in inv]
    other = ModularData(md.labels, S, T, dual, md.c)
    found = find_label_bijection(md, other)
    assert found is not None
    assert np.allclose(other.S[np.ix_(found, found)], md.S)
    assert find_label_bijection(md, pointed(form((8,), (F(1, 16),)))) is None


@given(st.integers(0, 6), st.integers(0, 6), st.integers(0, 6))
def test_fs3_decomposition_recovers_counts(a, b, c):
    w = cmath.exp(2j * math.pi / 3)
    value = a + b * w + c * w.conjugate()
    assert fs3_decomposition(value, a + b + c) == (a, b, c)


def test_fs3_decomposition_rejects():
    assert fs3_decomposition(complex(2, 0), 1) is None
    assert fs3_decomposition(complex(0.5, 0), 1) is None


def test_json_roundtrip(examples):
    md = family_build(family_instance_make(examples["B"]))
    again = ModularData.from_json(md.to_json())
    assert again.labels == md.labels and again.T == md.T and again.duality == md.duality
    assert np.allclose(again.S, md.S)
    assert again.c_exact == md.c_exact


def test_json_rejects_malformed():
    md = pointed(SEMION).to_json()
    with pytest.raises(ParseError):
        ModularData.from_json({k: v for k, v in md.items() if k != "T"})
    bad = dict(md, duality=[1, 0])
    with pytest.raises(ParseError):
        ModularData.from_json(bad)
    with pytest.raises(ParseError):
        Label.from_json({"tag": "nope"})


def test_constructor_checks():
    md = pointed(SEMION)
    with pytest.raises(InvalidArgument):
        ModularData(md.labels, md.S, md.T[:1], md.duality, md.c)
    with pytest.raises(InvalidArgument):
        ModularData((md.labels[0],) * 2, md.S, md.T, md.duality, md.c)
    with pytest.raises(InvalidArgument):
        ModularData(md.labels, md.S, (Phase(1, 2), Phase(1, 4)), md.duality, md.c)
