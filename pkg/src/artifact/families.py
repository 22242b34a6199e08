"""The five two-group constructions of candidate modular data.

Every family takes a pair of involutive metric groups (G, q1, theta1) and
(Gamma, q2, theta2) whose Gauss sums are opposite, c = G(q1) = -G(q2):

    A  near-group type: the fixed subgroups agree, U = G^theta = Gamma^theta
    B  both groups have 2-torsion Z2 and theta = -1
    C  even generalized Haagerup type: fixed subgroups of order 4 sharing U = Z2
    D  Asaeda-Haagerup type: G even, Gamma odd, theta = -1
    E  family D with the roles of the two blocks switched by a sign twist

``admissibility_report`` evaluates every standing assumption and the
integrality criterion, ``family_instance_make`` fixes the combinatorial
data, ``family_build`` produces the matrices, and the ``family_closed_*``
functions evaluate the known closed formulas for fusion rules and
Frobenius-Schur indicators exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .abgroup import Group, GroupMap, Subgroup, enumerate_isomorphisms, two_torsion
from .errors import (AdmissibilityContradiction, ConstructionImpossible, InternalConsistency,
                     InvalidArgument, ParseError, Rejected)
from .exactnum import ONE, Phase, PhaseSum
from .metric import (GaussData, InvolutiveMetricGroup, QuadraticForm, are_isomorphic, as_phase,
                     gauss_sum, twisted_gauss_sum)
from .moddata import (DEFAULT_TOL_INT, DEFAULT_TOL_REL, FusionTensor, Label, ModularData,
                      fs3_decomposition, verify_relations)

__all__ = [
    "FAMILIES",
    "FamilyInput",
    "Condition",
    "AdmissibilityReport",
    "FamilyInstance",
    "ClosedIndicators",
    "admissibility_report",
    "family_instance_make",
    "f_function_make",
    "haagerup_type_identities",
    "with_sections",
    "family_build",
    "family_closed_verlinde",
    "family_closed_fs",
    "fusion_prefactor",
    "fs_gauss_predicates",
]

FAMILIES = ("A", "B", "C", "D", "E")

MINUS_ONE = Phase(1, 2)
I_PHASE = Phase(1, 4)


# ---------------------------------------------------------------- inputs


def _point(g: Group, x) -> tuple:
    try:
        return g.element(x)
    except (TypeError, ValueError) as exc:
        raise InvalidArgument(f"{x!r} is not an element of {g}: {exc}") from None


@dataclass(frozen=True)
class FamilyInput:
    """Raw input of a family: two involutive metric groups plus optional markings.

    ``u_map`` lists pairs (g, gamma) generating the identification of the
    fixed subgroups (families A and C; found automatically when absent).
    ``marked`` may name k0 and sigma0 for family C.  ``case`` optionally
    pins the family C case tag "A1" or "A2".
    """

    family: str
    first: InvolutiveMetricGroup
    second: InvolutiveMetricGroup
    u_map: tuple | None = None
    marked: Mapping | None = None
    case: str | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidArgument(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if self.case not in (None, "A1", "A2"):
            raise InvalidArgument(f"case must be A1 or A2, got {self.case!r}")

    @classmethod
    def of(cls, family: str, first, second, **kw) -> "FamilyInput":
        """Bare quadratic forms are promoted with theta = -1."""
        if isinstance(first, QuadraticForm):
            first = InvolutiveMetricGroup.minus(first)
        if isinstance(second, QuadraticForm):
            second = InvolutiveMetricGroup.minus(second)
        return cls(family, first, second, **kw)

    def to_json(self) -> dict:
        d: dict = {"family": self.family, "first": self.first.to_json(), "second": self.second.to_json()}
        if self.u_map is not None:
            d["u_map"] = [[list(a), list(b)] for a, b in self.u_map]
        if self.marked:
            d["marked"] = {k: list(v) for k, v in self.marked.items()}
        if self.case:
            d["case"] = self.case
        return d

    @classmethod
    def from_json(cls, data: Mapping) -> "FamilyInput":
        try:
            fam = data["family"]
            first = InvolutiveMetricGroup.from_json(data["first"])
            second = InvolutiveMetricGroup.from_json(data["second"])
            u_map = data.get("u_map")
            if u_map is not None:
                u_map = tuple((tuple(int(v) for v in a), tuple(int(v) for v in b)) for a, b in u_map)
            marked = data.get("marked")
            if marked is not None:
                marked = {str(k): tuple(int(v) for v in x) for k, x in marked.items()}
            return cls(fam, first, second, u_map, marked, data.get("case"))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(f"malformed family input: {exc!r}") from None


# ---------------------------------------------------------------- reports


@dataclass(frozen=True)
class Condition:
    name: str
    anchor: str
    satisfied: bool
    detail: str = ""

    def to_json(self) -> dict:
        return {"name": self.name, "anchor": self.anchor, "satisfied": self.satisfied, "detail": self.detail}


@dataclass(frozen=True)
class AdmissibilityReport:
    family: str
    conditions: tuple[Condition, ...]
    data: Mapping = field(default_factory=dict, compare=False, repr=False)

    @property
    def ok(self) -> bool:
        return all(c.satisfied for c in self.conditions)

    def failures(self) -> list[Condition]:
        return [c for c in self.conditions if not c.satisfied]

    def get(self, name: str) -> Condition:
        for c in self.conditions:
            if c.name == name:
                return c
        raise KeyError(name)

    def summary(self) -> str:
        lines = [f"family {self.family}: {'admissible' if self.ok else 'rejected'}"]
        for c in self.conditions:
            mark = "ok  " if c.satisfied else "FAIL"
            lines.append(f"  [{mark}] {c.name}: {c.detail}")
        return "\n".join(lines)

    def to_json(self) -> dict:
        return {"family": self.family, "ok": self.ok, "conditions": [c.to_json() for c in self.conditions]}


class _Checks:
    def __init__(self):
        self.items: list[Condition] = []

    def add(self, name: str, anchor: str, ok, detail: str = "") -> bool:
        self.items.append(Condition(name, anchor, bool(ok), detail))
        return bool(ok)


# ---------------------------------------------------------------- helpers


def _gauss_phase(f: QuadraticForm, k: int = 1) -> Phase | None:
    return as_phase(gauss_sum(f, k))


def _exact_phase(numerator: PhaseSum, square_scale: int) -> Phase | None:
    """The root of unity equal to numerator / sqrt(square_scale), if it is one."""
    val = numerator.value() / math.sqrt(square_scale)
    return as_phase(GaussData(val, numerator, math.sqrt(square_scale), square_scale))


def _sign(p: Phase) -> int:
    if p.den == 1:
        return 1
    if p.den == 2:
        return -1
    raise AdmissibilityContradiction(f"expected a sign, got the phase {p}")


def _fixed_indices(img: InvolutiveMetricGroup) -> list[int]:
    p = img.involution.perm
    return [i for i in range(img.group.size) if p[i] == i]


def _section(img: InvolutiveMetricGroup, skip: Iterable[int]) -> list[int]:
    """Least element of every theta-orbit {x, theta x} outside ``skip``."""
    p = img.involution.perm
    skip = set(int(i) for i in skip)
    return [i for i in range(img.group.size) if i not in skip and i < p[i]]


def _is_inversion(img: InvolutiveMetricGroup) -> bool:
    return bool(np.array_equal(img.involution.perm, img.group.neg_table))


def _subgroup_copy(sub: Subgroup) -> tuple[Group, GroupMap]:
    if sub.size == 1:
        g = Group(())
        return g, GroupMap(g, sub.parent, ())
    return sub.as_group()


def _identify_fixed(first: InvolutiveMetricGroup, second: InvolutiveMetricGroup, u_map=None):
    """Index map G^theta -> Gamma^theta preserving q, or (None, reason)."""
    f1, f2 = first.form, second.form
    g1, g2 = first.group, second.group
    fix1, fix2 = first.fixed, second.fixed
    if fix1.size != fix2.size:
        return None, f"|G^theta| = {fix1.size} but |Gamma^theta| = {fix2.size}"
    if u_map is not None:
        table = {g1.index(g1.zero): g2.index(g2.zero)}
        pairs = [(g1.index(_point(g1, a)), g2.index(_point(g2, b))) for a, b in u_map]
        frontier = list(table)
        while frontier:
            nxt = []
            for x in frontier:
                for a, b in pairs:
                    y, z = int(g1.add_table[x, a]), int(g2.add_table[table[x], b])
                    if y in table:
                        if table[y] != z:
                            return None, "u_map does not extend to a homomorphism"
                    else:
                        table[y] = z
                        nxt.append(y)
            frontier = nxt
        if set(table) != set(fix1.indices.tolist()) or set(table.values()) != set(fix2.indices.tolist()):
            return None, "u_map does not identify the two fixed subgroups"
        if len(set(table.values())) != len(table):
            return None, "u_map is not injective"
        for x, y in table.items():
            if f1.exps[x] * (math.lcm(f1.level, f2.level) // f1.level) % math.lcm(f1.level, f2.level) != \
                    f2.exps[y] * (math.lcm(f1.level, f2.level) // f2.level) % math.lcm(f1.level, f2.level):
                return None, "u_map does not preserve the quadratic forms"
        return table, "given"
    u1, e1 = _subgroup_copy(fix1)
    u2, e2 = _subgroup_copy(fix2)
    if u1.orders != u2.orders:
        return None, f"fixed subgroups have shapes {u1.orders} and {u2.orders}"
    if u1.size == 1:
        return {g1.index(g1.zero): g2.index(g2.zero)}, "trivial"
    phi = are_isomorphic(f1.pullback(e1), f2.pullback(e2))
    if phi is None:
        return None, "restricted forms on the fixed subgroups are not isomorphic"
    table = {int(e1.perm[i]): int(e2.perm[phi.perm[i]]) for i in range(u1.size)}
    return table, "found"


# ---------------------------------------------------------------- admissibility


def _opposite_gauss(ch: _Checks, f1: QuadraticForm, f2: QuadraticForm):
    c1, c2 = _gauss_phase(f1), _gauss_phase(f2)
    ok = c1 is not None and c2 is not None and c1 == -c2
    ch.add("opposite Gauss sums", "standing assumption c = G(q1) = -G(q2)", ok,
           f"G(q1) = {c1}, G(q2) = {c2} (as fractions of a turn)")
    return c1 if ok else None


def _report_a(inp: FamilyInput, ch: _Checks, data: dict):
    c = _opposite_gauss(ch, inp.first.form, inp.second.form)
    table, why = _identify_fixed(inp.first, inp.second, inp.u_map)
    ch.add("fixed subgroups isomorphic", "standing assumption (G^theta, q1) = (Gamma^theta, q2)",
           table is not None, why)
    n1, n2 = inp.first.group.size, inp.second.group.size
    nu = inp.first.fixed.size
    diff = n2 - n1
    ok = diff == 4 * nu or (diff == 2 * nu and (n1 // nu) % 2 == 0)
    ch.add("integrality", "|Gamma| = |G| + 4|U|, or |Gamma| = |G| + 2|U| with |G|/|U| even", ok,
           f"|G| = {n1}, |Gamma| = {n2}, |U| = {nu}")
    data.update(c=c, u_table=table)


def _report_b(inp: FamilyInput, ch: _Checks, data: dict):
    f1, f2 = inp.first.form, inp.second.form
    g1, g2 = inp.first.group, inp.second.group
    ch.add("inversion involutions", "theta = -1 on both groups",
           _is_inversion(inp.first) and _is_inversion(inp.second))
    c = _opposite_gauss(ch, f1, f2)
    t1, t2 = two_torsion(g1), two_torsion(g2)
    ok = ch.add("2-torsion is Z2", "G_2 = Gamma_2 = Z2", t1.size == 2 and t2.size == 2,
                f"|G_2| = {t1.size}, |Gamma_2| = {t2.size}")
    s = None
    if ok:
        g0 = next(int(i) for i in t1.indices if i != 0)
        c0 = next(int(i) for i in t2.indices if i != 0)
        p1, p2 = f1.pair(g1.elements[g0], g1.elements[g0]), f2.pair(g2.elements[c0], g2.elements[c0])
        ch.add("self-pairings opposite", "<g0,g0> = -<gamma0,gamma0>", p1 == -p2, f"{p1} vs {p2}")
        q1g, q2g = Phase(int(f1.exps[g0]), f1.level), Phase(int(f2.exps[c0]), f2.level)
        if c is not None:
            ch.add("c squared", "c^2 = q1(g0)^-1 q2(gamma0)", c ** 2 == q1g.inverse() * q2g,
                   f"c^2 = {c ** 2}, q1(g0)^-1 q2(gamma0) = {q1g.inverse() * q2g}")
            num = PhaseSum.of(c * q1g.inverse()) + PhaseSum.of(c * q2g.inverse())
            s = _exact_phase(num, 2)
            ch.add("s is a root of unity", "s = c (q1(g0)^-1 + q2(gamma0)^-1) / sqrt 2", s is not None,
                   f"s = {s}")
            if s is not None:
                ch.add("s squared", "s^2 = <g0,g0>", s ** 2 == p1, f"s^2 = {s ** 2}, <g0,g0> = {p1}")
        data.update(g0=g0, gamma0=c0)
    ch.add("integrality", "|Gamma| - |G| = 2", g2.size - g1.size == 2,
           f"|G| = {g1.size}, |Gamma| = {g2.size}")
    data.update(c=c, s=s)


def _report_de(inp: FamilyInput, ch: _Checks, data: dict):
    f1, f2 = inp.first.form, inp.second.form
    g1, g2 = inp.first.group, inp.second.group
    ch.add("inversion involutions", "theta = -1 on both groups",
           _is_inversion(inp.first) and _is_inversion(inp.second))
    c = _opposite_gauss(ch, f1, f2)
    ch.add("G even", "G has even order", g1.size % 2 == 0, f"|G| = {g1.size}")
    ch.add("Gamma odd", "Gamma has odd order", g2.size % 2 == 1, f"|Gamma| = {g2.size}")
    k = two_torsion(g1)
    ch.add("K = Z2 x Z2", "2-torsion of G is Z2 x Z2", k.size == 4, f"|G_2| = {k.size}")
    if inp.family == "D":
        ch.add("integrality", "|Gamma| = |G| + 1", g2.size == g1.size + 1,
               f"|G| = {g1.size}, |Gamma| = {g2.size}")
    else:
        ch.add("integrality", "|Gamma| = |G| - 1", g2.size == g1.size - 1,
               f"|G| = {g1.size}, |Gamma| = {g2.size}")
    data.update(c=c, K=[int(i) for i in k.indices])


def _c_candidates(inp: FamilyInput):
    f1, f2 = inp.first.form, inp.second.form
    g1, g2 = inp.first.group, inp.second.group
    if inp.marked and "k0" in inp.marked and "sigma0" in inp.marked:
        yield g1.index(_point(g1, inp.marked["k0"])), g2.index(_point(g2, inp.marked["sigma0"]))
        return
    L = math.lcm(f1.level, f2.level)
    t1, t2 = f1.table_over(L), f2.table_over(L)
    for k0 in _fixed_indices(inp.first):
        if g1.element_orders[k0] != 2:
            continue
        for s0 in _fixed_indices(inp.second):
            if g2.element_orders[s0] == 2 and t1[k0] == t2[s0]:
                yield k0, s0


def _c_conditions(inp: FamilyInput, k0: int, s0: int, c: Phase | None):
    """Conditions of family C for one choice of (k0, sigma0): (conditions, data)."""
    f1, f2 = inp.first.form, inp.second.form
    g1, g2 = inp.first.group, inp.second.group
    ch = _Checks()
    data: dict = {"k0": k0, "sigma0": s0}
    ch.add("marked elements", "k0, sigma0 fixed of order 2 with q1(k0) = q2(sigma0)",
           g1.element_orders[k0] == 2 and g2.element_orders[s0] == 2
           and inp.first.involution.perm[k0] == k0 and inp.second.involution.perm[s0] == s0
           and f1(g1.elements[k0]) == f2(g2.elements[s0]),
           f"k0 = {g1.elements[k0]}, sigma0 = {g2.elements[s0]}")
    q0u = f1(g1.elements[k0])
    self_pair = f1.pair(g1.elements[k0], g1.elements[k0])
    if not ch.add("u0 pairs trivially with itself", "<u0,u0> = 1", self_pair.is_one(),
                  "<u0,u0> = -1: split off U and use family B" if not self_pair.is_one() else ""):
        return ch.items, data
    kst = [i for i in _fixed_indices(inp.first) if i not in (0, k0)]
    sst = [i for i in _fixed_indices(inp.second) if i not in (0, s0)]
    data.update(K=kst, Sigma=sst, q0u=q0u)
    if len(kst) != 2 or len(sst) != 2:
        return ch.items, data
    q = lambda f, g, i: Phase(int(f.exps[i]), f.level)  # noqa: E731
    qk = [q(f1, g1, i) for i in kst]
    qs = [q(f2, g2, i) for i in sst]
    a1 = qk[0] == qk[1] and qs[0] == -qs[1]
    a2 = qk[0] == -qk[1] and qs[0] == qs[1]
    tag = "A1" if a1 else "A2" if a2 else None
    ch.add("case", "(A1) q1(k1) = q1(k2), q2(s1) = -q2(s2) or (A2) q1(k1) = -q1(k2), q2(s1) = q2(s2)",
           tag is not None and (inp.case is None or inp.case == tag),
           f"q1 on K_* = {[str(p) for p in qk]}, q2 on Sigma_* = {[str(p) for p in qs]}, case {tag}"
           + (f" but {inp.case} was requested" if inp.case and tag and inp.case != tag else ""))
    data["case"] = tag
    if tag is None or c is None:
        return ch.items, data
    s = c / qk[0] if tag == "A1" else c / qs[0]
    data["s"] = s
    ch.add("s^4 = 1", "s = c/q1(k1) under A1, c/q2(s1) under A2", (s ** 4).is_one(), f"s = {s}")
    lhs = PhaseSum.total([qk[0], qk[1], qs[0], qs[1]]) * s
    ch.add("E4", "s (q1(k1) + q1(k2) + q2(s1) + q2(s2)) = 2c", lhs == PhaseSum.of(c, 2))
    ch.add("E3", "q0(u0) = +-1", q0u.den <= 2, f"q0(u0) = {q0u}")
    s2 = s ** 2
    ok5 = all(f1.pair(g1.elements[k0], g1.elements[k]).den == 2 or
              (s2 * f1.pair(g1.elements[k], g1.elements[k])).is_one() for k in kst)
    ch.add("E5", "(1 + <u0,k>)(1 - s^2 <k,k>) = 0 on K_*", ok5)
    ok6 = all(f2.pair(g2.elements[s0], g2.elements[x]).den == 2 or
              (s2 * f2.pair(g2.elements[x], g2.elements[x])) == MINUS_ONE for x in sst)
    ch.add("E6", "(1 + <u0,sigma>)(1 + s^2 <sigma,sigma>) = 0 on Sigma_*", ok6)
    ch.add("integrality", "|Gamma| = |G| + 4", g2.size == g1.size + 4,
           f"|G| = {g1.size}, |Gamma| = {g2.size}")
    fix1, fix2 = inp.first.fixed, inp.second.fixed
    if fix1.shape == (4,):
        ch.add("cyclic G^theta", "G^theta = Z4 forces q0(u0) = -1", q0u == MINUS_ONE)
    if fix2.shape == (4,):
        ch.add("cyclic Gamma^theta", "Gamma^theta = Z4 forces q0(u0) = -1", q0u == MINUS_ONE)
    return ch.items, data


def _report_c(inp: FamilyInput, ch: _Checks, data: dict):
    c = _opposite_gauss(ch, inp.first.form, inp.second.form)
    n1, n2 = inp.first.fixed.size, inp.second.fixed.size
    ch.add("fixed subgroups of order 4", "|G^theta| = |Gamma^theta| = 4", n1 == 4 and n2 == 4,
           f"|G^theta| = {n1}, |Gamma^theta| = {n2}")
    if n1 != 4 or n2 != 4:
        return
    tried = []
    for k0, s0 in _c_candidates(inp):
        items, d = _c_conditions(inp, k0, s0, c)
        tried.append((items, d))
    if not tried:
        ch.add("marked elements", "k0, sigma0 fixed of order 2 with q1(k0) = q2(sigma0)", False,
               "no such pair")
        return
    passing = [(items, d) for items, d in tried if all(x.satisfied for x in items)]
    tags = sorted({d["case"] for _, d in passing})
    if len(tags) > 1:
        ch.add("case", "exactly one of (A1), (A2)", False,
               "ambiguous: choices of (k0, sigma0) realize both " + " and ".join(tags))
        return
    items, d = passing[0] if passing else tried[0]
    ch.items.extend(items)
    data.update(d)
    data["c"] = c


def admissibility_report(family: str | FamilyInput, first=None, second=None, **kw) -> AdmissibilityReport:
    """Evaluate every assumption of the family on the given input; never raises on failure."""
    inp = family if isinstance(family, FamilyInput) else FamilyInput.of(family, first, second, **kw)
    ch = _Checks()
    data: dict = {}
    {"A": _report_a, "B": _report_b, "C": _report_c, "D": _report_de, "E": _report_de}[inp.family](inp, ch, data)
    return AdmissibilityReport(inp.family, tuple(ch.items), data)


# ---------------------------------------------------------------- instances


@dataclass(frozen=True, eq=False)
class FamilyInstance:
    family: str
    first: InvolutiveMetricGroup
    second: InvolutiveMetricGroup
    c: Phase
    u_table: Mapping | None  # G-index -> Gamma-index on the common subgroup U (A, C)
    marked: Mapping
    s: Phase | None
    f_table: Mapping | None
    case_tag: str | None
    sections: tuple[tuple[int, ...], tuple[int, ...]]
    report: AdmissibilityReport = field(repr=False)
    source: FamilyInput = field(repr=False)

    @property
    def G(self) -> Group:
        return self.first.group

    @property
    def Gamma(self) -> Group:
        return self.second.group

    @property
    def rank(self) -> int:
        return len(_layout(self))

    @property
    def size_gap(self) -> int:
        return self.Gamma.size - self.G.size

    def summary(self) -> str:
        return (f"family {self.family}: G = {self.G} with {self.first.form}, "
                f"Gamma = {self.Gamma} with {self.second.form}, c = {self.c}, rank {self.rank}")

    def to_json(self) -> dict:
        return self.source.to_json()


def f_function_make(first: InvolutiveMetricGroup, second: InvolutiveMetricGroup,
                    k0: int, sigma0: int, kstar: Sequence[int], sstar: Sequence[int], s: Phase) -> dict:
    """Sign function f on K_* x Sigma_* with the two shift rules and f(k1, s1) = s.

    Elements are given by index.  The shifts are
    f(k + k0, sigma) = f(k, sigma) conj<u0, sigma> and f(k, sigma + sigma0) = f(k, sigma) conj<k, u0>.
    """
    f1, f2 = first.form, second.form
    g1, g2 = first.group, second.group
    p1 = lambda x, y: Phase(int(f1.pair_exps[x, y]), f1.level)  # noqa: E731
    p2 = lambda x, y: Phase(int(f2.pair_exps[x, y]), f2.level)  # noqa: E731
    k1, s1 = kstar[0], sstar[0]
    table: dict = {(k1, s1): s}
    frontier = [(k1, s1)]
    while frontier:
        nxt = []
        for k, x in frontier:
            v = table[(k, x)]
            moves = [((int(g1.add_table[k, k0]), x), v * p2(sigma0, x).inverse()),
                     ((k, int(g2.add_table[x, sigma0])), v * p1(k, k0).inverse())]
            for key, val in moves:
                if key in table:
                    if table[key] != val:
                        raise ConstructionImpossible(
                            f"shift rules disagree at {g1.elements[key[0]]}, {g2.elements[key[1]]}")
                else:
                    table[key] = val
                    nxt.append(key)
        frontier = nxt
    if set(table) != {(k, x) for k in kstar for x in sstar}:
        raise ConstructionImpossible("shift rules do not reach every pair of K_* x Sigma_*")
    for key, val in table.items():
        if val != s and val != -s:
            raise ConstructionImpossible(f"f takes the value {val}, not +-s")
    return table


def haagerup_type_identities(inst: FamilyInstance) -> dict[str, bool]:
    """The six exact identities linking f with the pairings on K_* and Sigma_* (family C)."""
    if inst.family != "C":
        raise InvalidArgument("only family C carries an f-function")
    f1, f2 = inst.first.form, inst.second.form
    g1, g2 = inst.G, inst.Gamma
    p1 = lambda x, y: Phase(int(f1.pair_exps[x, y]), f1.level)  # noqa: E731
    p2 = lambda x, y: Phase(int(f2.pair_exps[x, y]), f2.level)  # noqa: E731
    q1 = lambda x: Phase(int(f1.exps[x]), f1.level)  # noqa: E731
    q2 = lambda x: Phase(int(f2.exps[x]), f2.level)  # noqa: E731
    K, Sg = inst.marked["K"], inst.marked["Sigma"]
    f, s, c = inst.f_table, inst.s, inst.c
    add1, add2, sub1, sub2 = g1.add_table, g2.add_table, None, None
    neg1, neg2 = g1.neg_table, g2.neg_table
    out = {}
    ok = True
    for k in K:
        for k2 in K:
            d = int(add1[k2, neg1[k]])
            lhs = PhaseSum.total([p1(d, l) for l in K] + [f[(k, x)] * f[(k2, x)].inverse() for x in Sg])
            ok &= lhs == PhaseSum.rational(4 if k == k2 else 0)
    out["orthogonality on K_*"] = bool(ok)
    ok = True
    for x in Sg:
        for x2 in Sg:
            d = int(add2[x2, neg2[x]])
            lhs = PhaseSum.total([p2(d, t) for t in Sg] + [f[(k, x)] * f[(k, x2)].inverse() for k in K])
            ok &= lhs == PhaseSum.rational(4 if x == x2 else 0)
    out["orthogonality on Sigma_*"] = bool(ok)
    ok = True
    for k in K:
        for x in Sg:
            lhs = PhaseSum.total([s * p1(k, l).inverse() * f[(l, x)].inverse() for l in K]
                                 + [s.inverse() * p2(x, t) * f[(k, t)] for t in Sg])
            ok &= lhs.is_zero()
    out["mixed orthogonality"] = bool(ok)
    ok = True
    for k in K:
        for k2 in K:
            kk = int(add1[k, k2])
            lhs = PhaseSum.total([s ** 2 * p1(kk, l).inverse() * q1(l) for l in K]
                                 + [f[(k, x)] * f[(k2, x)] * q2(x) for x in Sg])
            rhs = PhaseSum.of(c * s * (p1(k, k2) * q1(k) * q1(k2)).inverse(), 2)
            ok &= lhs == rhs
    out["T-twisted on K_*"] = bool(ok)
    ok = True
    for k in K:
        for x in Sg:
            lhs = PhaseSum.total([f[(l, x)] * p1(k, l).inverse() * q1(l) for l in K]
                                 + [f[(k, t)] * p2(x, t).inverse() * q2(t) for t in Sg]) * s
            rhs = PhaseSum.of(c * f[(k, x)] * (q1(k) * q2(x)).inverse(), 2)
            ok &= lhs == rhs
    out["T-twisted mixed"] = bool(ok)
    ok = True
    for x in Sg:
        for x2 in Sg:
            xx = int(add2[x, x2])
            lhs = PhaseSum.total([f[(l, x)] * f[(l, x2)] * q1(l) for l in K]
                                 + [s ** 2 * p2(xx, t).inverse() * q2(t) for t in Sg])
            rhs = PhaseSum.of(c * s * (p2(x, x2) * q2(x) * q2(x2)).inverse(), 2)
            ok &= lhs == rhs
    out["T-twisted on Sigma_*"] = bool(ok)
    del sub1, sub2
    return out


def family_instance_make(family: str | FamilyInput, first=None, second=None, **kw) -> FamilyInstance:
    inp = family if isinstance(family, FamilyInput) else FamilyInput.of(family, first, second, **kw)
    rep = admissibility_report(inp)
    if not rep.ok:
        names = ", ".join(c.name for c in rep.failures())
        raise Rejected(f"family {inp.family} input rejected: {names}", rep)
    d = rep.data
    a, b = inp.first, inp.second
    fam = inp.family
    s = f_table = case = None
    u_table = None
    marked: dict = {}
    if fam == "A":
        u_table = dict(d["u_table"])
        sections = (tuple(_section(a, u_table.keys())), tuple(_section(b, u_table.values())))
    elif fam == "B":
        s = d["s"]
        marked = {"g0": d["g0"], "gamma0": d["gamma0"]}
        sections = (tuple(_section(a, [0, d["g0"]])), tuple(_section(b, [0, d["gamma0"]])))
    elif fam == "C":
        s, case = d["s"], d["case"]
        k0, s0 = d["k0"], d["sigma0"]
        u_table = {0: 0, k0: s0}
        marked = {"k0": k0, "sigma0": s0, "u0": k0, "K": list(d["K"]), "Sigma": list(d["Sigma"])}
        f_table = f_function_make(a, b, k0, s0, d["K"], d["Sigma"], s)
        sections = (tuple(_section(a, _fixed_indices(a))), tuple(_section(b, _fixed_indices(b))))
    else:
        marked = {"K": list(d["K"])}
        sections = (tuple(_section(a, d["K"])), tuple(_section(b, [0])))
    inst = FamilyInstance(fam, a, b, d["c"], u_table, marked, s, f_table, case, sections, rep, inp)
    if fam == "C":
        bad = [k for k, v in haagerup_type_identities(inst).items() if not v]
        if bad:
            raise InternalConsistency(f"f-function identities fail: {bad}")
    return inst


def with_sections(inst: FamilyInstance, first: Sequence[int], second: Sequence[int]) -> FamilyInstance:
    """The same instance with another choice of orbit representatives (given by index)."""
    for img, chosen, default in ((inst.first, first, inst.sections[0]), (inst.second, second, inst.sections[1])):
        p = img.involution.perm
        want = {frozenset((int(i), int(p[i]))) for i in default}
        got = [frozenset((int(i), int(p[i]))) for i in chosen]
        if len(set(got)) != len(got) or set(got) != want:
            raise InvalidArgument("replacement does not pick one element from each orbit")
    return replace(inst, sections=(tuple(int(i) for i in first), tuple(int(i) for i in second)))


# ---------------------------------------------------------------- layout and matrices

# block codes, in the order the blocks appear in J
U0, UPI, KP, GB, SP, GM = range(6)
_TAG = {U0: "u0", UPI: "upi", KP: "kpair", GB: "G", SP: "spair", GM: "Gamma"}
_TAG_BDE = {U0: "zero", UPI: "pi"}


@dataclass(frozen=True)
class _Entry:
    block: int
    idx: int  # index in G for U0/UPI/KP/GB, in Gamma for SP/GM; -1 for the two points
    sign: int = 0


def _layout(inst: FamilyInstance) -> list[_Entry]:
    fam = inst.family
    gs, cs = inst.sections
    out: list[_Entry] = []
    if fam in ("A", "C"):
        us = sorted(inst.u_table)
        out += [_Entry(U0, u) for u in us] + [_Entry(UPI, u) for u in us]
    else:
        out += [_Entry(U0, -1), _Entry(UPI, -1)]
    if fam == "B":
        out += [_Entry(KP, inst.marked["g0"], e) for e in (1, -1)]
    elif fam == "C":
        out += [_Entry(KP, k, e) for k in inst.marked["K"] for e in (1, -1)]
    elif fam in ("D", "E"):
        out += [_Entry(KP, k, e) for k in inst.marked["K"] if k != 0 for e in (1, -1)]
    out += [_Entry(GB, g) for g in gs]
    if fam == "B":
        out += [_Entry(SP, inst.marked["gamma0"], e) for e in (1, -1)]
    elif fam == "C":
        out += [_Entry(SP, x, e) for x in inst.marked["Sigma"] for e in (1, -1)]
    out += [_Entry(GM, x) for x in cs]
    return out


def _label(inst: FamilyInstance, e: _Entry) -> Label:
    g1, g2 = inst.G, inst.Gamma
    if e.idx < 0:
        return Label(_TAG_BDE[e.block])
    el = g2.elements[e.idx] if e.block in (SP, GM) else g1.elements[e.idx]
    return Label(_TAG[e.block], tuple(el), e.sign if e.block in (KP, SP) else None)


class _Ctx:
    """Cached numeric and exact views of the two forms of an instance."""

    def __init__(self, inst: FamilyInstance):
        self.inst = inst
        f1, f2 = inst.first.form, inst.second.form
        self.f1, self.f2 = f1, f2
        self.g1, self.g2 = inst.G, inst.Gamma
        self.pv1, self.pv2 = f1.pair_value_matrix(), f2.pair_value_matrix()
        self.th1, self.th2 = inst.first.involution.perm, inst.second.involution.perm
        self.add1, self.add2 = self.g1.add_table, self.g2.add_table
        self.neg1, self.neg2 = self.g1.neg_table, self.g2.neg_table
        self.a = 1 / math.sqrt(self.g1.size)
        self.b = 1 / math.sqrt(self.g2.size)
        self.u12 = dict(inst.u_table or {})
        self.u21 = {v: k for k, v in self.u12.items()}
        gs, cs = inst.sections
        self.rep1 = self._reps(gs, self.th1)
        self.rep2 = self._reps(cs, self.th2)

    @staticmethod
    def _reps(section, theta) -> dict:
        rep = {}
        for x in section:
            rep[int(x)] = int(x)
            rep[int(theta[x])] = int(x)
        return rep

    def p1(self, x: int, y: int) -> Phase:
        return Phase(int(self.f1.pair_exps[x, y]), self.f1.level)

    def p2(self, x: int, y: int) -> Phase:
        return Phase(int(self.f2.pair_exps[x, y]), self.f2.level)

    def q1(self, x: int) -> Phase:
        return Phase(int(self.f1.exps[x]), self.f1.level)

    def q2(self, x: int) -> Phase:
        return Phase(int(self.f2.exps[x]), self.f2.level)


def _s_entry(ctx: _Ctx, x: _Entry, y: _Entry) -> complex:
    fam = ctx.inst.family
    if fam in ("D", "E"):
        v = _s_entry_d(ctx, x, y)
        if fam == "E":
            rx = 1 if x.block == U0 else -1
            ry = 1 if y.block == U0 else -1
            v = -rx * ry * v
        return v
    return {"A": _s_entry_a, "B": _s_entry_b, "C": _s_entry_c}[fam](ctx, x, y)


def _s_entry_a(ctx: _Ctx, x: _Entry, y: _Entry) -> complex:
    a, b = ctx.a, ctx.b
    if x.block > y.block:
        x, y = y, x
    bx, by = x.block, y.block
    pv1, pv2 = ctx.pv1, ctx.pv2
    if bx in (U0, UPI) and by in (U0, UPI):
        w = np.conj(pv1[x.idx, y.idx])
        return (a - b) / 2 * w if bx == by else (a + b) / 2 * w
    if bx in (U0, UPI) and by == GB:
        return a * np.conj(pv1[x.idx, y.idx])
    if bx in (U0, UPI) and by == GM:
        sgn = 1 if bx == U0 else -1
        return sgn * b * np.conj(pv2[ctx.u12[x.idx], y.idx])
    if bx == GB and by == GB:
        return a * np.conj(pv1[x.idx, y.idx] + pv1[ctx.th1[x.idx], y.idx])
    if bx == GM and by == GM:
        return -b * np.conj(pv2[x.idx, y.idx] + pv2[ctx.th2[x.idx], y.idx])
    return 0.0


def _s_entry_b(ctx: _Ctx, x: _Entry, y: _Entry) -> complex:
    a, b = ctx.a, ctx.b
    s = ctx.inst.s.value()
    r2 = math.sqrt(2)
    if x.block > y.block:
        x, y = y, x
    bx, by = x.block, y.block
    pv1, pv2 = ctx.pv1, ctx.pv2
    if bx in (U0, UPI) and by in (U0, UPI):
        return (a - b) / 2 if bx == by else (a + b) / 2
    if bx in (U0, UPI):
        sgn = 1 if bx == U0 else -1
        return {KP: a / 2, GB: a, SP: sgn * b / 2, GM: sgn * b}[by]
    if bx == KP and by == KP:
        return (a / 2 + x.sign * y.sign * s / (2 * r2)) * pv1[x.idx, x.idx]
    if bx == KP and by == GB:
        return a * pv1[x.idx, y.idx]
    if bx == KP and by == SP:
        return x.sign * y.sign * s / (2 * r2)
    if bx == GB and by == GB:
        return a * 2 * pv1[x.idx, y.idx].real
    if bx == SP and by == SP:
        return -(b / 2 - x.sign * y.sign * s / (2 * r2)) * pv2[x.idx, x.idx]
    if bx == SP and by == GM:
        return -b * pv2[x.idx, y.idx]
    if bx == GM and by == GM:
        return -b * 2 * pv2[x.idx, y.idx].real
    return 0.0


def _s_entry_c(ctx: _Ctx, x: _Entry, y: _Entry) -> complex:
    a, b = ctx.a, ctx.b
    s = ctx.inst.s.value()
    if x.block > y.block:
        x, y = y, x
    bx, by = x.block, y.block
    c1 = lambda i, j: np.conj(ctx.pv1[i, j])  # noqa: E731
    c2 = lambda i, j: np.conj(ctx.pv2[i, j])  # noqa: E731
    if bx in (U0, UPI):
        sgn = 1 if bx == U0 else -1
        if by in (U0, UPI):
            w = c1(x.idx, y.idx)
            return (a - b) / 2 * w if bx == by else (a + b) / 2 * w
        if by == KP:
            return a / 2 * c1(x.idx, y.idx)
        if by == GB:
            return a * c1(x.idx, y.idx)
        if by == SP:
            return sgn * b / 2 * c2(ctx.u12[x.idx], y.idx)
        return sgn * b * c2(ctx.u12[x.idx], y.idx)
    ee = x.sign * y.sign
    if bx == KP:
        if by == KP:
            return (a / 2 + ee * s / 4) * c1(x.idx, y.idx)
        if by == GB:
            return a * c1(x.idx, y.idx)
        if by == SP:
            return ee * ctx.inst.f_table[(x.idx, y.idx)].value() / 4
        return 0.0
    if bx == GB:
        if by == GB:
            return a * (c1(x.idx, y.idx) + c1(x.idx, ctx.th1[y.idx]))
        return 0.0
    if bx == SP:
        if by == SP:
            return -(b / 2 - ee * s / 4) * c2(x.idx, y.idx)
        return -b * c2(x.idx, y.idx)
    return -b * (c2(x.idx, y.idx) + c2(x.idx, ctx.th2[y.idx]))


def _s_entry_d(ctx: _Ctx, x: _Entry, y: _Entry) -> complex:
    a, b = ctx.a, ctx.b
    c = ctx.inst.c.value()
    if x.block > y.block:
        x, y = y, x
    bx, by = x.block, y.block
    pv1, pv2 = ctx.pv1, ctx.pv2
    if bx in (U0, UPI) and by in (U0, UPI):
        return (a - b) / 2 if bx == by else (a + b) / 2
    if bx in (U0, UPI):
        sgn = 1 if bx == U0 else -1
        return {KP: a / 2, GB: a, GM: sgn * b}[by]
    if bx == KP and by == KP:
        extra = c * x.sign * y.sign * ctx.q1(x.idx).value() if x.idx == y.idx else 0
        return (a * pv1[x.idx, y.idx] + extra) / 2
    if bx == KP and by == GB:
        return a * pv1[x.idx, y.idx]
    if bx == GB and by == GB:
        return a * 2 * pv1[x.idx, y.idx].real
    if bx == GM and by == GM:
        return -b * 2 * pv2[x.idx, y.idx].real
    return 0.0


def _dual(ctx: _Ctx, e: _Entry) -> _Entry:
    inst = ctx.inst
    fam = inst.family
    if e.block in (U0, UPI):
        if e.idx < 0 or fam == "C":
            return e
        return _Entry(e.block, int(ctx.neg1[e.idx]))
    if e.block == GB:
        return _Entry(GB, ctx.rep1[int(ctx.neg1[e.idx])])
    if e.block == GM:
        return _Entry(GM, ctx.rep2[int(ctx.neg2[e.idx])])
    if fam == "B":
        g0 = inst.marked["g0"]
        return _Entry(e.block, e.idx, e.sign * _sign(ctx.p1(g0, g0)))
    if fam == "C":
        neg = ctx.neg1 if e.block == KP else ctx.neg2
        return _Entry(e.block, int(neg[e.idx]), e.sign * _sign(inst.s ** 2))
    # families D and E
    return _Entry(e.block, e.idx, e.sign * _sign(inst.c ** 2 * ctx.p1(e.idx, e.idx)))


def _t_value(ctx: _Ctx, e: _Entry) -> Phase:
    if e.block in (U0, UPI):
        return ONE if e.idx < 0 else ctx.q1(e.idx)
    if e.block in (KP, GB):
        return ctx.q1(e.idx)
    return ctx.q2(e.idx)


def family_build(inst: FamilyInstance, tol: float = DEFAULT_TOL_REL) -> ModularData:
    ctx = _Ctx(inst)
    ents = _layout(inst)
    n = len(ents)
    S = np.zeros((n, n), dtype=complex)
    for i in range(n):
        for j in range(i, n):
            S[i, j] = S[j, i] = _s_entry(ctx, ents[i], ents[j])
    pos = {e: i for i, e in enumerate(ents)}
    try:
        dual = tuple(pos[_dual(ctx, e)] for e in ents)
    except KeyError as exc:
        raise InternalConsistency(f"dual label outside J: {exc}") from None
    T = tuple(_t_value(ctx, e) for e in ents)
    c = inst.c if inst.family != "E" else -inst.c
    labels = tuple(_label(inst, e) for e in ents)
    md = ModularData(labels, S, T, dual, c.value(), c, name=f"family {inst.family}, rank {n}")
    rep = verify_relations(md, tol)
    if not rep.ok:
        raise InternalConsistency(f"family {inst.family} data fails {rep.failures()} "
                                  f"(residuals {rep.residuals})")
    return md


# ---------------------------------------------------------------- closed-form fusion rules


def fusion_prefactor(family: str, size_g: int, size_gamma: int, size_u: int = 1) -> Fraction:
    """The rational prefactor of the closed fusion rules.

    Family A uses 4|U|/(|Gamma|-|G|); B, C and D use 4/(|Gamma|-|G|) (C writes
    8/(|Gamma|-|G|) for the triple (u,pi)); E uses 4/(|G|-|Gamma|).
    """
    gap = size_gamma - size_g
    if family == "E":
        gap = -gap
    if gap == 0:
        raise InvalidArgument("the two groups have equal order")
    return Fraction(4 * (size_u if family == "A" else 1), gap)


def _rat(x) -> Fraction:
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, Phase):
        x = PhaseSum.of(x)
    terms = x.terms
    if all(p.den <= 2 for p in terms):
        return sum((c if p.den == 1 else -c for p, c in terms.items()), Fraction(0))
    r = x.as_rational()
    if r is None:
        raise AdmissibilityContradiction(f"closed-form value {x!r} is not rational")
    return r


def _delta(cond) -> int:
    return 1 if cond else 0


class _Closed:
    """Closed fusion rules; ``value(x, y, z)`` expects entries sorted by block."""

    def __init__(self, inst: FamilyInstance):
        self.ctx = _Ctx(inst)
        self.inst = inst
        self.gap = inst.Gamma.size - inst.G.size

    def unit(self, y: _Entry, z: _Entry) -> int:
        return _delta(_dual(self.ctx, y) == z)


class _ClosedA(_Closed):
    def __init__(self, inst):
        super().__init__(inst)
        self.P = fusion_prefactor("A", inst.G.size, inst.Gamma.size, len(inst.u_table))
        self.us = sorted(inst.u_table)

    def avg(self, g: int | None, gm: int | None) -> int:
        """(1/|U|) sum_v <g, v><gm, v>: 1 when the character is trivial on U."""
        ctx = self.ctx
        for v in self.us:
            p = ONE
            if g is not None:
                p = p * ctx.p1(g, v)
            if gm is not None:
                p = p * ctx.p2(gm, ctx.u12[v])
            if not p.is_one():
                return 0
        return 1

    def value(self, x: _Entry, y: _Entry, z: _Entry) -> Fraction:
        ctx = self.ctx
        A1, A2, T1, T2 = ctx.add1, ctx.add2, ctx.th1, ctx.th2
        P = self.P
        key = (x.block, y.block, z.block)
        g3 = lambda i, j, k: int(A1[A1[i, j], k])  # noqa: E731
        h3 = lambda i, j, k: int(A2[A2[i, j], k])  # noqa: E731
        if key in ((U0, U0, U0), (U0, UPI, UPI)):
            return Fraction(_delta(g3(x.idx, y.idx, z.idx) == 0))
        if key[0] == U0 and key[1:] in ((GB, GB),):
            return Fraction(_delta(g3(x.idx, y.idx, z.idx) == 0) + _delta(g3(x.idx, T1[y.idx], z.idx) == 0))
        if key[0] == U0 and key[1:] == (GM, GM):
            u = ctx.u12[x.idx]
            return Fraction(_delta(h3(u, y.idx, z.idx) == 0) + _delta(h3(u, T2[y.idx], z.idx) == 0))
        if key[0] == U0:
            return Fraction(0)
        if key == (UPI, UPI, UPI):
            return P * self.avg(g3(x.idx, y.idx, z.idx), None)
        if key == (UPI, UPI, GB):
            return P * self.avg(g3(x.idx, y.idx, z.idx), None)
        if key == (UPI, UPI, GM):
            return P * self.avg(None, h3(ctx.u12[x.idx], ctx.u12[y.idx], z.idx))
        if key == (UPI, GB, GB):
            d = _delta(g3(x.idx, y.idx, z.idx) == 0) + _delta(g3(x.idx, T1[y.idx], z.idx) == 0)
            return P * self.avg(g3(x.idx, y.idx, z.idx), None) + d
        if key == (UPI, GB, GM):
            return P * self.avg(int(A1[x.idx, y.idx]), z.idx)
        if key == (UPI, GM, GM):
            u = ctx.u12[x.idx]
            d = _delta(h3(u, y.idx, z.idx) == 0) + _delta(h3(u, T2[y.idx], z.idx) == 0)
            return P * self.avg(None, h3(u, y.idx, z.idx)) - d
        if key == (GB, GB, GB):
            i, j, k = x.idx, y.idx, z.idx
            d = sum(_delta(v == 0) for v in (g3(i, j, k), g3(T1[i], j, k), g3(i, T1[j], k), g3(i, j, T1[k])))
            return P * self.avg(g3(i, j, k), None) + d
        if key == (GB, GB, GM):
            return P * self.avg(int(A1[x.idx, y.idx]), z.idx)
        if key == (GB, GM, GM):
            return P * self.avg(x.idx, int(A2[y.idx, z.idx]))
        if key == (GM, GM, GM):
            i, j, k = x.idx, y.idx, z.idx
            d = sum(_delta(v == 0) for v in (h3(i, j, k), h3(T2[i], j, k), h3(i, T2[j], k), h3(i, j, T2[k])))
            return P * self.avg(None, h3(i, j, k)) - d
        raise AssertionError(key)  # pragma: no cover


class _ClosedB(_Closed):
    def value(self, x: _Entry, y: _Entry, z: _Entry) -> Fraction:
        if x.block == U0:
            return Fraction(self.unit(y, z))
        ctx = self.ctx
        D = Fraction(self.gap)
        g0, c0 = self.inst.marked["g0"], self.inst.marked["gamma0"]
        A1, A2, N1, N2 = ctx.add1, ctx.add2, ctx.neg1, ctx.neg2
        s1 = lambda i, j: _sign(ctx.p1(i, j))  # noqa: E731
        s2 = lambda i, j: _sign(ctx.p2(i, j))  # noqa: E731
        w = s1(g0, g0)
        key = (x.block, y.block, z.block)
        if x.block == UPI:
            rest = key[1:]
            table = {(UPI, UPI): 4 / D, (UPI, KP): 2 / D, (UPI, GB): 4 / D, (UPI, SP): 2 / D,
                     (UPI, GM): 4 / D, (KP, GB): 2 / D, (KP, GM): 2 / D, (GB, SP): 2 / D,
                     (GB, GM): 4 / D, (SP, GM): 2 / D}
            if rest in table:
                return table[rest]
            if rest == (KP, KP):
                return 1 / D + Fraction(1, 2)
            if rest == (KP, SP):
                return 1 / D + Fraction(y.sign * z.sign, 2)
            if rest == (GB, GB):
                return 4 / D + _delta(y.idx == z.idx)
            if rest == (SP, SP):
                return 1 / D - Fraction(1, 2)
            if rest == (GM, GM):
                return 4 / D - _delta(y.idx == z.idx)
        e1, e2, e3 = x.sign, y.sign, z.sign
        if key == (KP, KP, KP) or key == (SP, SP, SP):
            return 1 / (2 * D) + Fraction(e1 * e2 + e2 * e3 + e3 * e1, 4)
        if key == (KP, KP, GB):
            return 1 / D + Fraction(e1 * e2 * s1(int(A1[g0, z.idx]), g0), 2)
        if key == (KP, KP, SP):
            return 1 / (2 * D) + Fraction(e3 * (e1 + e2) * w + e1 * e2, 4)
        if key == (KP, KP, GM):
            return 1 / D - Fraction(e1 * e2 * w * s2(c0, z.idx), 2)
        if key == (KP, GB, GB):
            i, j = y.idx, z.idx
            return 2 / D + _delta(A1[A1[g0, i], j] == 0) + _delta(A1[A1[g0, i], N1[j]] == 0)
        if key == (KP, GB, SP):
            return 1 / D + Fraction(x.sign * z.sign * s1(y.idx, g0), 2)
        if key in ((KP, GB, GM), (KP, GM, GM), (GB, GB, SP), (GB, SP, GM)):
            return 2 / D
        if key == (KP, SP, SP):
            return 1 / (2 * D) + Fraction(e2 * e3 - e1 * (e2 + e3) * w, 4)
        if key == (KP, SP, GM):
            return 1 / D + Fraction(x.sign * y.sign * s2(z.idx, c0), 2)
        if key == (GB, GB, GB):
            i, j, k = x.idx, y.idx, z.idx
            d = sum(_delta(A1[A1[a, b_], c_] == 0) for a, b_, c_ in
                    ((i, j, k), (N1[i], j, k), (i, N1[j], k), (i, j, N1[k])))
            return 4 / D + d
        if key in ((GB, GB, GM), (GB, GM, GM)):
            return 4 / D
        if key == (GB, SP, SP):
            return 1 / D + Fraction(y.sign * z.sign * s1(int(A1[g0, x.idx]), g0), 2)
        if key == (SP, SP, GM):
            return 1 / D + Fraction(e1 * e2 * s2(int(A2[c0, z.idx]), c0), 2)
        if key == (SP, GM, GM):
            i, j = y.idx, z.idx
            return 2 / D - _delta(A2[A2[c0, i], j] == 0) - _delta(A2[A2[c0, i], N2[j]] == 0)
        if key == (GM, GM, GM):
            i, j, k = x.idx, y.idx, z.idx
            d = sum(_delta(A2[A2[a, b_], c_] == 0) for a, b_, c_ in
                    ((i, j, k), (N2[i], j, k), (i, N2[j], k), (i, j, N2[k])))
            return 4 / D - d
        raise AssertionError(key)  # pragma: no cover


class _ClosedD(_Closed):
    def value(self, x: _Entry, y: _Entry, z: _Entry) -> Fraction:
        if x.block == U0:
            return Fraction(self.unit(y, z))
        ctx = self.ctx
        D = Fraction(self.gap)
        c2 = _sign(self.inst.c ** 2)
        A1, A2, N1, N2 = ctx.add1, ctx.add2, ctx.neg1, ctx.neg2
        s1 = lambda i, j: _sign(ctx.p1(i, j))  # noqa: E731
        key = (x.block, y.block, z.block)
        if key in ((UPI, UPI, UPI), (UPI, UPI, GM), (UPI, UPI, GB), (UPI, GB, GM), (GB, GM, GM),
                   (GB, GB, GM)):
            return 4 / D
        if key in ((UPI, UPI, KP), (UPI, KP, GM), (KP, GM, GM), (UPI, KP, GB), (KP, GB, GM)):
            return 2 / D
        if key == (UPI, GM, GM):
            return 4 / D - _delta(y.idx == z.idx)
        if key == (UPI, KP, KP):
            return _delta(_dual(ctx, y) == z) + 1 / D
        if key == (KP, KP, GM):
            return 1 / D
        if key == (UPI, GB, GB):
            return _delta(y.idx == z.idx) + 4 / D
        if key == (GM, GM, GM):
            i, j, k = x.idx, y.idx, z.idx
            d = sum(_delta(A2[A2[a, b_], c_] == 0) for a, b_, c_ in
                    ((i, j, k), (N2[i], j, k), (i, N2[j], k), (i, j, N2[k])))
            return 4 / D - d
        if key == (KP, KP, KP):
            k, k2, k3 = x.idx, y.idx, z.idx
            e1, e2, e3 = x.sign, y.sign, z.sign
            base = (1 / D + _delta(A1[A1[k, k2], k3] == 0)) / 2
            t = 0
            if k == k2:
                t += e1 * e2 * s1(k, int(A1[k, k3]))
            if k2 == k3:
                t += e2 * e3 * s1(k2, int(A1[k2, k]))
            if k3 == k:
                t += e3 * e1 * s1(k3, int(A1[k3, k2]))
            return base + Fraction(c2 * t, 2)
        if key == (KP, KP, GB):
            t = x.sign * y.sign * s1(x.idx, int(A1[x.idx, z.idx])) if x.idx == y.idx else 0
            return 1 / D + c2 * t
        if key == (KP, GB, GB):
            k, i, j = x.idx, y.idx, z.idx
            return 2 / D + _delta(A1[A1[k, i], j] == 0) + _delta(A1[A1[k, i], N1[j]] == 0)
        if key == (GB, GB, GB):
            i, j, k = x.idx, y.idx, z.idx
            d = sum(_delta(A1[A1[a, b_], c_] == 0) for a, b_, c_ in
                    ((i, j, k), (N1[i], j, k), (i, N1[j], k), (i, j, N1[k])))
            return 4 / D + d
        raise AssertionError(key)  # pragma: no cover


class _ClosedE(_ClosedD):
    """N' = f f f N with f = 1 on the unit and -1 elsewhere, N the family D rules."""

    def value(self, x, y, z):
        sign = 1
        for e in (x, y, z):
            if e.block != U0:
                sign = -sign
        return sign * super().value(x, y, z)


class _ClosedC(_Closed):
    def __init__(self, inst):
        super().__init__(inst)
        ctx = self.ctx
        m = inst.marked
        self.u0 = m["u0"]
        self.s0 = inst.u_table[self.u0]
        self.k1 = m["K"][0]
        self.sg1 = m["Sigma"][0]
        self.s = inst.s
        self.f = inst.f_table
        del ctx

    # pairings of a G-element / Gamma-element with u0
    def cu1(self, g: int) -> Phase:
        return self.ctx.p1(g, self.u0)

    def cu2(self, x: int) -> Phase:
        return self.ctx.p2(x, self.s0)

    def to2(self, u: int) -> int:
        return self.ctx.u12[u]

    def to1(self, u: int) -> int:
        return self.ctx.u21[u]

    def value(self, x: _Entry, y: _Entry, z: _Entry) -> Fraction:
        ctx = self.ctx
        D = Fraction(self.gap)
        A1, A2, T1, T2 = ctx.add1, ctx.add2, ctx.th1, ctx.th2
        N1, N2 = ctx.neg1, ctx.neg2
        s, f = self.s, self.f
        s2 = s ** 2
        k1, sg1 = self.k1, self.sg1
        p1, p2, cu1, cu2 = ctx.p1, ctx.p2, self.cu1, self.cu2
        g3 = lambda i, j, k: int(A1[A1[i, j], k])  # noqa: E731
        h3 = lambda i, j, k: int(A2[A2[i, j], k])  # noqa: E731
        PS = PhaseSum.of
        one = PhaseSum.rational(1)
        key = (x.block, y.block, z.block)
        if x.block == U0:
            rest = key[1:]
            u = x.idx
            if rest in ((U0, U0), (UPI, UPI)):
                return Fraction(_delta(g3(u, y.idx, z.idx) == 0))
            if rest == (KP, KP):
                return Fraction(_delta(g3(u, y.idx, z.idx) == 0 and z.sign == _sign(s2) * y.sign))
            if rest == (SP, SP):
                return Fraction(_delta(h3(self.to2(u), y.idx, z.idx) == 0 and z.sign == _sign(s2) * y.sign))
            if rest == (GB, GB):
                return Fraction(_delta(g3(u, y.idx, z.idx) == 0) + _delta(g3(u, T1[y.idx], z.idx) == 0))
            if rest == (GM, GM):
                uu = self.to2(u)
                return Fraction(_delta(h3(uu, y.idx, z.idx) == 0) + _delta(h3(uu, T2[y.idx], z.idx) == 0))
            return Fraction(0)
        if x.block == UPI:
            u = x.idx
            rest = key[1:]
            if rest == (UPI, UPI):
                return 8 / D
            if rest == (UPI, KP):
                return 2 / D * _rat(one + cu1(z.idx))
            if rest == (UPI, GB):
                return 4 / D * _rat(one + cu1(z.idx))
            if rest == (UPI, SP):
                return 2 / D * _rat(one + cu2(z.idx))
            if rest == (UPI, GM):
                return 4 / D * _rat(one + cu2(z.idx))
            if rest == (KP, KP):
                k, kk = y.idx, z.idx
                w = g3(u, k, kk)  # lies in U
                two_k = int(A1[k, k])
                val = (PhaseSum.rational(2 / D + Fraction(_delta(w == 0), 2))
                       + (PS(p1(w, k1)) - PS(p2(self.to2(w), sg1) * p2(self.to2(two_k), sg1)))
                       * s2 * Fraction(y.sign * z.sign, 4))
                return _rat(val)
            if rest == (KP, GB):
                return 2 / D * _rat(one + cu1(int(A1[y.idx, z.idx])))
            if rest == (KP, SP):
                return Fraction(0)
            if rest == (KP, GM):
                return 2 / D * _rat(one + cu1(y.idx) * cu2(z.idx))
            if rest == (GB, GB):
                d = _delta(g3(u, y.idx, z.idx) == 0) + _delta(g3(u, y.idx, T1[z.idx]) == 0)
                return 4 / D * _rat(one + cu1(int(A1[y.idx, z.idx]))) + d
            if rest == (GB, SP):
                return 2 / D * _rat(one + cu1(y.idx) * cu2(z.idx))
            if rest == (GB, GM):
                return 4 / D * _rat(one + cu1(y.idx) * cu2(z.idx))
            if rest == (SP, SP):
                x1, x2 = y.idx, z.idx
                w = h3(self.to2(u), x1, x2)  # lies in U
                two_x = int(A2[x1, x1])
                val = (PhaseSum.rational(2 / D - Fraction(_delta(w == 0), 2))
                       + (PS(p1(self.to1(w), k1) * p1(k1, self.to1(two_x))) - PS(p2(w, x1)))
                       * s2 * Fraction(y.sign * z.sign, 4))
                return _rat(val)
            if rest == (SP, GM):
                return 2 / D * _rat(one + cu2(int(A2[y.idx, z.idx])))
            if rest == (GM, GM):
                uu = self.to2(u)
                d = _delta(h3(uu, y.idx, z.idx) == 0) + _delta(h3(uu, y.idx, T2[z.idx]) == 0)
                return 4 / D * _rat(one + cu2(int(A2[y.idx, z.idx]))) - d
            raise AssertionError(key)  # pragma: no cover
        e1, e2, e3 = x.sign, y.sign, z.sign
        if key == (KP, KP, KP):
            t = g3(x.idx, y.idx, z.idx)
            val = (one + cu1(t)) * (PhaseSum.rational(1 / (2 * D))
                                    + PS(p1(t, t).inverse()) * s2 * Fraction(e1 * e2 + e2 * e3 + e3 * e1, 8))
            return _rat(val)
        if key == (KP, KP, GB):
            k, kk, g = x.idx, y.idx, z.idx
            val = (PhaseSum.rational(1 / D) + PS(s2 * p1(k, g3(k, kk, g)).inverse()) * Fraction(e1 * e2, 4)) \
                * (one + cu1(g))
            return _rat(val)
        if key == (KP, KP, SP):
            k, kk, sg = x.idx, y.idx, z.idx
            diff = self.to2(int(A1[k, N1[kk]]))
            val = (one + cu2(sg)) * (PhaseSum.rational(1 / (2 * D))
                                     + PS(p1(int(A1[k, kk]), k) * f[(k, sg)]) * s * Fraction(e3 * (e1 + e2), 8)
                                     - PS(p2(diff, sg) * p2(sg, sg).inverse()) * s2 * Fraction(e1 * e2, 8))
            return _rat(val)
        if key == (KP, KP, GM):
            k, kk, gm = x.idx, y.idx, z.idx
            diff = self.to2(int(A1[k, N1[kk]]))
            val = (one + cu2(gm)) * (PhaseSum.rational(1 / D)
                                     - PS(p2(diff, sg1) * p2(gm, sg1).inverse()) * s2 * Fraction(e1 * e2, 4))
            return _rat(val)
        if key == (KP, GB, GB):
            k, g, gg = x.idx, y.idx, z.idx
            d = _delta(g3(k, g, gg) == 0) + _delta(g3(k, g, T1[gg]) == 0)
            return 2 / D * _rat(one + cu1(g3(k, g, gg))) + d
        if key == (KP, GB, SP):
            k, g, sg = x.idx, y.idx, z.idx
            val = (PhaseSum.rational(1 / D)
                   + PS(f[(k, sg)] * p1(int(A1[k, g]), k).inverse()) * s * Fraction(e1 * e3, 4)) \
                * (one - cu1(g))
            return _rat(val)
        if key == (KP, GB, GM):
            return 2 / D * _rat(one + cu1(int(A1[x.idx, y.idx])) * cu2(z.idx))
        if key == (KP, SP, SP):
            k, sg, sg2 = x.idx, y.idx, z.idx
            e0 = e1
            ea, eb = e2, e3
            diff = self.to1(int(A2[sg, N2[sg2]]))
            val = (PhaseSum.rational(1 / (2 * D))
                   + PS(p1(diff, k) * p1(k, k).inverse()) * s2 * Fraction(ea * eb, 8)
                   - PS(f[(k, sg)] * p2(int(A2[sg, sg2]), sg).inverse()) * s * Fraction(e0 * (ea + eb), 8)) \
                * (one + cu1(k))
            return _rat(val)
        if key == (KP, SP, GM):
            k, sg, gm = x.idx, y.idx, z.idx
            val = (PhaseSum.rational(1 / D)
                   - PS(f[(k, sg)] * p2(int(A2[sg, gm]), sg).inverse()) * s * Fraction(e1 * e2, 4)) \
                * (one - cu2(gm))
            return _rat(val)
        if key == (KP, GM, GM):
            return 2 / D * _rat(one + cu1(x.idx) * cu2(int(A2[y.idx, z.idx])))
        if key == (GB, GB, GB):
            i, j, k = x.idx, y.idx, z.idx
            d = sum(_delta(v == 0) for v in (g3(i, j, k), g3(T1[i], j, k), g3(i, T1[j], k), g3(i, j, T1[k])))
            return 4 / D * _rat(one + cu1(g3(i, j, k))) + d
        if key == (GB, GB, SP):
            return 2 / D * _rat(one + cu1(int(A1[x.idx, y.idx])) * cu2(z.idx))
        if key == (GB, GB, GM):
            return 4 / D * _rat(one + cu1(int(A1[x.idx, y.idx])) * cu2(z.idx))
        if key == (GB, SP, SP):
            g, sg, sg2 = x.idx, y.idx, z.idx
            diff = self.to1(int(A2[sg, N2[sg2]]))
            val = (PhaseSum.rational(1 / D)
                   + PS(s2 * p1(g, k1).inverse() * p1(k1, diff)) * Fraction(e2 * e3, 4)) * (one + cu1(g))
            return _rat(val)
        if key == (GB, SP, GM):
            return 2 / D * _rat(one + cu1(x.idx) * cu2(int(A2[y.idx, z.idx])))
        if key == (GB, GM, GM):
            return 4 / D * _rat(one + cu1(x.idx) * cu2(int(A2[y.idx, z.idx])))
        if key == (SP, SP, SP):
            t = h3(x.idx, y.idx, z.idx)
            val = (one + cu2(t)) * (PhaseSum.rational(1 / (2 * D))
                                    - PS(p2(t, t).inverse()) * s2 * Fraction(e1 * e2 + e2 * e3 + e3 * e1, 8))
            return _rat(val)
        if key == (SP, SP, GM):
            t = h3(x.idx, y.idx, z.idx)
            val = (PhaseSum.rational(1 / D) - PS(s2 * p2(t, x.idx).inverse()) * Fraction(e1 * e2, 4)) \
                * (one + cu2(t))
            return _rat(val)
        if key == (SP, GM, GM):
            sg, gm, gm2 = x.idx, y.idx, z.idx
            d = _delta(h3(sg, gm, gm2) == 0) + _delta(h3(sg, gm, T2[gm2]) == 0)
            return 2 / D * _rat(one + cu2(h3(sg, gm, gm2))) - d
        if key == (GM, GM, GM):
            i, j, k = x.idx, y.idx, z.idx
            d = sum(_delta(v == 0) for v in (h3(i, j, k), h3(T2[i], j, k), h3(i, T2[j], k), h3(i, j, T2[k])))
            return 4 / D * _rat(one + cu2(h3(i, j, k))) - d
        raise AssertionError(key)  # pragma: no cover


_CLOSED = {"A": _ClosedA, "B": _ClosedB, "C": _ClosedC, "D": _ClosedD, "E": _ClosedE}


def _closed_tensor(inst: FamilyInstance, *, check: bool = True) -> tuple[np.ndarray, list[_Entry]]:
    ev = _CLOSED[inst.family](inst)
    ents = _layout(inst)
    n = len(ents)
    N = np.zeros((n, n, n), dtype=np.int64)
    for i in range(n):
        for j in range(i, n):
            for k in range(j, n):
                v = ev.value(ents[i], ents[j], ents[k])
                if check and (v.denominator != 1 or v < 0):
                    lab = tuple(str(_label(inst, ents[t])) for t in (i, j, k))
                    raise AdmissibilityContradiction(f"closed-form N{lab} = {v} is not a non-negative integer")
                iv = int(v)
                for a, b, c in ((i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)):
                    N[a, b, c] = iv
    return N, ents


def family_closed_verlinde(inst: FamilyInstance) -> FusionTensor:
    """Exact fusion tensor N_{ijk} (all indices lower) from the family's closed formulas."""
    N, ents = _closed_tensor(inst)
    return FusionTensor(N, 0.0, tuple(_label(inst, e) for e in ents))


def _closed_diagonal(inst: FamilyInstance) -> list[Fraction]:
    ev = _CLOSED[inst.family](inst)
    return [ev.value(e, e, e) for e in _layout(inst)]


# ---------------------------------------------------------------- closed-form indicators


@dataclass(frozen=True)
class ClosedIndicators:
    """Indicator values per label plus the family's FS2/FS3 admissibility predicates."""

    m: int
    labels: tuple
    values: np.ndarray
    predicates: Mapping[str, bool]

    def __len__(self):
        return len(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def __iter__(self):
        return iter(self.values)


def _combined(ctx: _Ctx, u: int | None, m: int) -> complex:
    """G(q1, q2, v, m) for v in U, given by its G-index (0 for v = 0)."""
    inst = ctx.inst
    v1 = ctx.g1.elements[u or 0]
    v2 = ctx.g2.elements[ctx.u12[u] if u else 0]
    return twisted_gauss_sum(inst.first.form, v1, m).value + twisted_gauss_sum(inst.second.form, v2, m).value


def fs_gauss_predicates(inst: FamilyInstance) -> dict[str, bool]:
    """Named Gauss-sum forms of the FS2/FS3 conditions (families B, D and E)."""
    f1, f2 = inst.first.form, inst.second.form
    x2 = abs(gauss_sum(f1, 2).value + gauss_sum(f2, 2).value)
    x3 = abs(gauss_sum(f1, 3).value + gauss_sum(f2, 3).value)
    tol = DEFAULT_TOL_INT
    if inst.family == "B":
        return {"C1": abs(x2 - math.sqrt(2)) <= tol, "C2": abs(x3 - 2) <= tol}
    if inst.family in ("D", "E"):
        return {"D1": abs(x2 - 1) <= tol, "D2": abs(x3 - 2) <= tol}
    return {}


def family_closed_fs(inst: FamilyInstance, m: int) -> ClosedIndicators:
    ctx = _Ctx(inst)
    ents = _layout(inst)
    fam = inst.family
    g1, g2 = ctx.g1, ctx.g2

    def dpow(order: int, q: Phase) -> complex:
        return (q ** m).value() if m % order == 0 else 0.0

    vals = []
    if fam in ("B", "D", "E"):
        X = abs(gauss_sum(inst.first.form, m).value + gauss_sum(inst.second.form, m).value) ** 2
        for e in ents:
            if e.block == U0:
                vals.append(1.0)
                continue
            if e.block == UPI:
                base = {"B": X / 2, "D": X, "E": X}[fam]
                vals.append(base)
                continue
            if e.block == GB:
                t = dpow(int(g1.element_orders[e.idx]), ctx.q1(e.idx))
                base = X / 2 if fam == "B" else X
                vals.append(base - t if fam == "E" else base + t)
                continue
            if e.block == GM:
                t = dpow(int(g2.element_orders[e.idx]), ctx.q2(e.idx))
                base = X / 2 if fam == "B" else X
                vals.append(base + t if fam == "E" else base - t)
                continue
            if e.block == KP:
                t = dpow(int(g1.element_orders[e.idx]), ctx.q1(e.idx))
                if fam == "B":
                    vals.append(X / 4 + t / 2)
                else:
                    vals.append((X - t) / 2 if fam == "E" else (X + t) / 2)
                continue
            # SP only occurs in B
            t = dpow(int(g2.element_orders[e.idx]), ctx.q2(e.idx))
            vals.append(X / 4 - t / 2)
    else:
        us = sorted(inst.u_table)
        gsum = {u: abs(_combined(ctx, u, m)) ** 2 for u in us}
        gap = inst.size_gap
        w_pi = 1 / gap if fam == "A" else 1 / 4
        w_pair = 1 / 8
        for e in ents:
            if e.block == U0:
                vals.append(dpow(int(g1.element_orders[e.idx]), ctx.q1(e.idx)))
                continue
            if e.block in (UPI, GB, KP):
                avg = sum(ctx.p1(e.idx, u).value() * gsum[u] for u in us)
            else:
                avg = sum(ctx.p2(e.idx, inst.u_table[u]).value() * gsum[u] for u in us)
            if e.block == UPI:
                vals.append(w_pi * avg)
            elif e.block == GB:
                vals.append(w_pi * avg + dpow(int(g1.element_orders[e.idx]), ctx.q1(e.idx)))
            elif e.block == GM:
                vals.append(w_pi * avg - dpow(int(g2.element_orders[e.idx]), ctx.q2(e.idx)))
            elif e.block == KP:
                vals.append(w_pair * avg + dpow(int(g1.element_orders[e.idx]), ctx.q1(e.idx)) / 2)
            else:
                vals.append(w_pair * avg - dpow(int(g2.element_orders[e.idx]), ctx.q2(e.idx)) / 2)
    values = np.array(vals, dtype=complex)
    preds = dict(fs_gauss_predicates(inst))
    preds.update(_generic_fs_predicates(inst, ctx, ents, m, values))
    return ClosedIndicators(m, tuple(_label(inst, e) for e in ents), values, preds)


def _generic_fs_predicates(inst, ctx, ents, m, values) -> dict[str, bool]:
    tol = DEFAULT_TOL_INT
    out = {}
    if m == 2:
        ok = True
        for e, v in zip(ents, values):
            if _dual(ctx, e) == e:
                ok &= min(abs(v - 1), abs(v + 1)) <= tol
            else:
                ok &= abs(v) <= tol
        out["FS2"] = bool(ok)
    if m == 3:
        diag = _closed_diagonal(inst)
        ok = all(d.denominator == 1 and d >= 0 and fs3_decomposition(complex(v), int(d), tol) is not None
                 for d, v in zip(diag, values))
        out["FS3"] = bool(ok)
    return out
