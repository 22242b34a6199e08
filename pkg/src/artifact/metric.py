"""Quadratic forms on finite abelian groups, Gauss sums and involutive metric groups.

A form is stored by its Gram data: the value on each generator and the pairing
of each pair of generators.  Every other value follows from

    q(x) = prod_i q(e_i)^(x_i^2) * prod_{i<j} <e_i, e_j>^(x_i x_j).

Internally all values of a form are kept as integer exponents over a common
denominator ``level`` so that whole value tables are numpy arrays.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from .abgroup import (
    DEFAULT_ORDER_BOUND,
    Group,
    GroupMap,
    Subgroup,
    enumerate_isomorphisms,
    even_odd_split,
    fixed_subgroup,
)
from .errors import InvalidArgument, ParseError, PreconditionViolated, ResourceLimit
from .exactnum import ONE, Phase, PhaseSum

__all__ = [
    "QuadraticForm",
    "InvolutiveMetricGroup",
    "GaussData",
    "q_eval",
    "pairing",
    "is_nondegenerate",
    "gauss_sum",
    "twisted_gauss_sum",
    "combined_gauss_sum",
    "orthogonal_complement",
    "restrict",
    "split",
    "canonical_decomposition",
    "enumerate_quadratic_forms",
    "are_isomorphic",
    "as_phase",
    "classify_involutive",
]

DEFAULT_FORM_CAP = 200_000


def _coerce_phase(v) -> Phase:
    if isinstance(v, Phase):
        return v
    if isinstance(v, str):
        return Phase.parse(v)
    if isinstance(v, (int, Fraction)):
        return Phase.from_fraction(v)
    if isinstance(v, tuple) and len(v) == 2:
        return Phase(int(v[0]), int(v[1]))
    raise InvalidArgument(f"cannot read {v!r} as a phase")


def _pairs(rank: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(rank) for j in range(i + 1, rank)]


@dataclass(frozen=True, eq=False)
class QuadraticForm:
    group: Group
    diag: tuple[Phase, ...]
    offdiag: tuple[Phase, ...]  # one entry per pair i<j, in _pairs order

    def __post_init__(self):
        g = self.group
        diag = tuple(_coerce_phase(p) for p in self.diag)
        off = tuple(_coerce_phase(p) for p in self.offdiag)
        if len(diag) != g.rank or len(off) != len(_pairs(g.rank)):
            raise InvalidArgument("Gram data does not match the group rank")
        for d, p in zip(g.orders, diag):
            bound = d if d % 2 else 2 * d
            if bound % p.den:
                raise InvalidArgument(f"generator value {p} has order not dividing {bound}")
        for (i, j), p in zip(_pairs(g.rank), off):
            if math.gcd(g.orders[i], g.orders[j]) % p.den:
                raise InvalidArgument(f"pairing of generators {i},{j} has order {p.den}, "
                                      f"not dividing gcd({g.orders[i]}, {g.orders[j]})")
        object.__setattr__(self, "diag", diag)
        object.__setattr__(self, "offdiag", off)

    @classmethod
    def make(cls, group: Group, diag: Sequence, offdiag=None) -> "QuadraticForm":
        """``offdiag`` may be a mapping {(i, j): phase} or a list of [i, j, phase]; missing pairs are 1."""
        table = {pair: ONE for pair in _pairs(group.rank)}
        if offdiag:
            items = offdiag.items() if isinstance(offdiag, Mapping) else ((tuple(e[:2]), e[2]) for e in offdiag)
            for (i, j), p in items:
                i, j = int(i), int(j)
                if i == j or not (0 <= i < group.rank and 0 <= j < group.rank):
                    raise InvalidArgument(f"bad generator pair ({i}, {j})")
                table[(min(i, j), max(i, j))] = _coerce_phase(p)
        return cls(group, tuple(diag), tuple(table[pair] for pair in _pairs(group.rank)))

    @classmethod
    def from_table(cls, group: Group, exps: np.ndarray, level: int) -> "QuadraticForm":
        """Recover Gram data from a full table of exponents over ``level``."""
        gens = [group.index(group.generator(i)) for i in range(group.rank)]
        diag = tuple(Phase(int(exps[k]), level) for k in gens)
        off = []
        for i, j in _pairs(group.rank):
            s = group.add_table[gens[i], gens[j]]
            off.append(Phase(int(exps[s] - exps[gens[i]] - exps[gens[j]]), level))
        form = cls(group, diag, tuple(off))
        common = math.lcm(level, form.level)
        if not np.array_equal(form.table_over(common), exps * (common // level) % common):
            raise InvalidArgument("table is not a quadratic form")
        return form

    @classmethod
    def trivial(cls) -> "QuadraticForm":
        return cls(Group(()), (), ())

    # value tables

    @cached_property
    def level(self) -> int:
        return math.lcm(1, *(p.den for p in self.diag), *(p.den for p in self.offdiag))

    @cached_property
    def exps(self) -> np.ndarray:
        """Exponent of q at every element, as integers mod ``level``."""
        g, L = self.group, self.level
        c = g.coords
        out = np.zeros(g.size, dtype=np.int64)
        for i, p in enumerate(self.diag):
            out += (p.num * (L // p.den)) * (c[:, i] * c[:, i] % (2 * g.orders[i]))
        for (i, j), p in zip(_pairs(g.rank), self.offdiag):
            out += (p.num * (L // p.den)) * (c[:, i] * c[:, j] % g.orders[i])
        return out % L

    def table_over(self, level: int) -> np.ndarray:
        if level % self.level:
            raise InvalidArgument(f"level {level} is not a multiple of {self.level}")
        return self.exps * (level // self.level) % level

    @cached_property
    def pair_exps(self) -> np.ndarray:
        """Matrix of pairing exponents mod ``level``."""
        e = self.exps
        return (e[self.group.add_table] - e[:, None] - e[None, :]) % self.level

    @cached_property
    def values(self) -> np.ndarray:
        return np.exp(2j * np.pi * self.exps / self.level)

    def __call__(self, x) -> Phase:
        return Phase(int(self.exps[self.group.index(x)]), self.level)

    def pair(self, x, y) -> Phase:
        g = self.group
        return Phase(int(self.pair_exps[g.index(x), g.index(y)]), self.level)

    def pair_value_matrix(self) -> np.ndarray:
        return np.exp(2j * np.pi * self.pair_exps / self.level)

    # structure

    @cached_property
    def radical(self) -> np.ndarray:
        """Indices of the elements pairing trivially with everything."""
        return np.nonzero(~self.pair_exps.any(axis=1))[0]

    def nondegenerate(self) -> bool:
        return len(self.radical) == 1

    def pullback(self, phi: GroupMap) -> "QuadraticForm":
        """q composed with phi, a form on phi.source."""
        if phi.target != self.group:
            raise InvalidArgument("map does not land in the form's group")
        return QuadraticForm.from_table(phi.source, self.exps[phi.perm], self.level)

    def conjugate(self) -> "QuadraticForm":
        return QuadraticForm(self.group, tuple(p.inverse() for p in self.diag),
                             tuple(p.inverse() for p in self.offdiag))

    def direct_sum(self, other: "QuadraticForm") -> "QuadraticForm":
        g = Group(self.group.orders + other.group.orders)
        r1, r2 = self.group.rank, other.group.rank
        off = {}
        for (i, j), p in zip(_pairs(r1), self.offdiag):
            off[(i, j)] = p
        for (i, j), p in zip(_pairs(r2), other.offdiag):
            off[(i + r1, j + r1)] = p
        return QuadraticForm.make(g, self.diag + other.diag, off)

    def same_values(self, other: "QuadraticForm") -> bool:
        if self.group != other.group:
            return False
        L = math.lcm(self.level, other.level)
        return bool(np.array_equal(self.table_over(L), other.table_over(L)))

    def __eq__(self, other):
        if not isinstance(other, QuadraticForm):
            return NotImplemented
        return self.group == other.group and self.diag == other.diag and self.offdiag == other.offdiag

    def __hash__(self):
        return hash((self.group, self.diag, self.offdiag))

    def __str__(self):
        parts = [f"q(e{i})={p}" for i, p in enumerate(self.diag)]
        parts += [f"<e{i},e{j}>={p}" for (i, j), p in zip(_pairs(self.group.rank), self.offdiag) if not p.is_one()]
        return f"{self.group}[{', '.join(parts)}]"

    def to_json(self) -> dict:
        return {
            "group": self.group.to_json(),
            "diag": [str(p) for p in self.diag],
            "offdiag": [[i, j, str(p)] for (i, j), p in zip(_pairs(self.group.rank), self.offdiag)
                        if not p.is_one()],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "QuadraticForm":
        try:
            g = Group(tuple(data["group"]["orders"]))
            return cls.make(g, [Phase.parse(str(p)) for p in data["diag"]], data.get("offdiag") or [])
        except (KeyError, TypeError) as exc:
            raise ParseError(f"bad form spec: missing or malformed {exc}") from None


@dataclass(frozen=True, eq=False)
class InvolutiveMetricGroup:
    form: QuadraticForm
    involution: GroupMap

    def __post_init__(self):
        g = self.form.group
        t = self.involution
        if t.source != g or t.target != g:
            raise InvalidArgument("involution must be an endomorphism of the form's group")
        p = t.perm
        if not t.is_bijective() or not np.array_equal(p[p], np.arange(g.size)):
            raise InvalidArgument("involution does not square to the identity")
        if not np.array_equal(self.form.exps[p], self.form.exps):
            raise InvalidArgument("involution does not preserve the form")
        if not self.form.nondegenerate():
            raise InvalidArgument(f"form {self.form} is degenerate")

    @classmethod
    def minus(cls, form: QuadraticForm) -> "InvolutiveMetricGroup":
        return cls(form, GroupMap.scalar(form.group, -1))

    @classmethod
    def plus(cls, form: QuadraticForm) -> "InvolutiveMetricGroup":
        return cls(form, GroupMap.identity(form.group))

    @classmethod
    def trivial(cls) -> "InvolutiveMetricGroup":
        g = Group(())
        return cls(QuadraticForm.trivial(), GroupMap.identity(g))

    @property
    def group(self) -> Group:
        return self.form.group

    @cached_property
    def fixed(self) -> Subgroup:
        return fixed_subgroup(self.group, self.involution)

    def theta(self, x):
        return self.involution(x)

    def product(self, other: "InvolutiveMetricGroup") -> "InvolutiveMetricGroup":
        form = self.form.direct_sum(other.form)
        g = form.group
        r1 = self.group.rank
        imgs = [tuple(h) + other.group.zero for h in self.involution.images]
        imgs += [self.group.zero + tuple(h) for h in other.involution.images]
        return InvolutiveMetricGroup(form, GroupMap(g, g, tuple(imgs)))

    def __str__(self):
        return f"({self.form}, theta={self.involution})"

    def to_json(self) -> dict:
        d = self.form.to_json()
        d["involution"] = self.involution.to_json()
        return d

    @classmethod
    def from_json(cls, data: Mapping) -> "InvolutiveMetricGroup":
        form = QuadraticForm.from_json(data)
        g = form.group
        inv = data.get("involution", -1)
        try:
            if isinstance(inv, int):
                t = GroupMap.scalar(g, inv)
            else:
                t = GroupMap(g, g, tuple(tuple(int(v) for v in row) for row in inv))
        except (TypeError, ValueError) as exc:
            raise ParseError(f"bad involution: {exc}") from None
        return cls(form, t)


@dataclass(frozen=True)
class GaussData:
    value: complex
    numerator: PhaseSum = field(compare=False)
    normalizer: float
    size: int

    def phase(self) -> Phase | None:
        return as_phase(self)


def as_phase(g: GaussData) -> Phase | None:
    """The exact root of unity equal to the normalized sum, if there is one.

    The candidate is read off numerically and then confirmed exactly by
    checking numerator^2 == |G| * candidate^2.  The numeric reading already
    fixes the sign, which the squared identity cannot see.
    """
    if abs(abs(g.value) - 1) > 1e-6:
        return None
    levels = [p.den for p in g.numerator.terms] or [1]
    den = math.lcm(8, *levels)
    k = round(cmath.phase(g.value) / (2 * math.pi) * den)
    cand = Phase(k, den)
    if abs(cand.value() - g.value) > 1e-6:
        return None
    if (g.numerator * g.numerator - PhaseSum.of(cand ** 2, g.size)).is_zero():
        return cand
    return None


def q_eval(f: QuadraticForm, x) -> Phase:
    return f(x)


def pairing(f: QuadraticForm, g, h) -> Phase:
    return f.pair(g, h)


def is_nondegenerate(f: QuadraticForm, bound: int = DEFAULT_ORDER_BOUND) -> bool:
    if f.group.size > bound:
        raise ResourceLimit(f"|G| = {f.group.size} exceeds the bound {bound}")
    return f.nondegenerate()


def _gauss(f: QuadraticForm, weights: np.ndarray, m: int) -> GaussData:
    """Sum over g of exp(weights[g]/level) * q(g)^m, with exponents over f.level."""
    L = f.level
    exps = (weights + m * f.exps) % L
    counts = np.bincount(exps, minlength=L)
    num = PhaseSum({Phase(k, L): int(c) for k, c in enumerate(counts) if c})
    norm = math.sqrt(f.group.size)
    val = complex(np.sum(np.exp(2j * np.pi * exps / L))) / norm
    return GaussData(val, num, norm, f.group.size)


def gauss_sum(f: QuadraticForm, k: int = 1) -> GaussData:
    return _gauss(f, np.zeros(f.group.size, dtype=np.int64), k)


def twisted_gauss_sum(f: QuadraticForm, u, m: int) -> GaussData:
    """(1/sqrt|G|) sum_g <u, g> q(g)^m."""
    return _gauss(f, f.pair_exps[f.group.index(u)], m)


def combined_gauss_sum(f1: QuadraticForm, u1, f2: QuadraticForm, u2, m: int) -> complex:
    """Sum of the two twisted sums, with u given by its image in each group."""
    return twisted_gauss_sum(f1, u1, m).value + twisted_gauss_sum(f2, u2, m).value


def _as_form(x) -> QuadraticForm:
    return x.form if isinstance(x, InvolutiveMetricGroup) else x


def orthogonal_complement(img, h: Subgroup) -> Subgroup:
    f = _as_form(img)
    if h.parent != f.group:
        raise InvalidArgument("subgroup does not live in the form's group")
    block = f.pair_exps[:, h.indices]
    return Subgroup.from_indices(f.group, np.nonzero(~block.any(axis=1))[0])


def restrict(img: InvolutiveMetricGroup, h: Subgroup) -> tuple[InvolutiveMetricGroup, GroupMap]:
    """The involutive metric group induced on a theta-stable nondegenerate subgroup."""
    g = img.group
    p = img.involution.perm
    if not set(p[h.indices].tolist()) <= set(h.indices.tolist()):
        raise PreconditionViolated("subgroup is not stable under the involution")
    if h.size == 1:
        return InvolutiveMetricGroup.trivial(), GroupMap(Group(()), g, ())
    sub, emb = h.as_group()
    form = img.form.pullback(emb)
    if not form.nondegenerate():
        raise PreconditionViolated("form restricted to the subgroup is degenerate")
    back = {int(v): i for i, v in enumerate(emb.perm)}
    imgs = tuple(sub.elements[back[int(p[g.index(emb(sub.generator(i)))])]] for i in range(sub.rank))
    return InvolutiveMetricGroup(form, GroupMap(sub, sub, imgs)), emb


def split(img: InvolutiveMetricGroup, l: Subgroup):
    """Split off a theta-stable subgroup on which the form is nondegenerate."""
    first, _ = restrict(img, l)
    second, _ = restrict(img, orthogonal_complement(img, l))
    return first, second


def canonical_decomposition(img: InvolutiveMetricGroup):
    """(2-part, odd part where theta = 1, odd part where theta = -1)."""
    g = img.group
    even, odd = even_odd_split(g)
    p = img.involution.perm
    odd_idx = odd.indices
    plus = [i for i in odd_idx if p[i] == i]
    minus = [i for i in odd_idx if p[i] == g.neg_table[i]]
    e, _ = restrict(img, even)
    op, _ = restrict(img, Subgroup.from_indices(g, plus))
    om, _ = restrict(img, Subgroup.from_indices(g, minus))
    return e, op, om


def _form_choices(g: Group):
    diag = [[Phase(k, d if d % 2 else 2 * d) for k in range(d if d % 2 else 2 * d)] for d in g.orders]
    off = [[Phase(k, math.gcd(g.orders[i], g.orders[j])) for k in range(math.gcd(g.orders[i], g.orders[j]))]
           for i, j in _pairs(g.rank)]
    return diag, off


def enumerate_quadratic_forms(g: Group, nondegenerate_only: bool = True, *,
                              bound: int = DEFAULT_ORDER_BOUND,
                              cap: int = DEFAULT_FORM_CAP) -> list[QuadraticForm]:
    if g.size > bound:
        raise ResourceLimit(f"|G| = {g.size} exceeds the bound {bound}")
    diag, off = _form_choices(g)
    total = math.prod(len(c) for c in diag + off)
    if total > cap:
        raise ResourceLimit(f"{total} candidate forms on {g} exceed the cap {cap}")
    out = []
    for d in itertools.product(*diag):
        for o in itertools.product(*off):
            f = QuadraticForm(g, d, o)
            if not nondegenerate_only or f.nondegenerate():
                out.append(f)
    return out


def are_isomorphic(a, b, *, bound: int = DEFAULT_ORDER_BOUND) -> GroupMap | None:
    """A group isomorphism phi with q_b(phi x) = q_a(x) and phi theta_a = theta_b phi.

    Accepts bare forms too, in which case only the form is matched.
    """
    fa, fb = _as_form(a), _as_form(b)
    ga, gb = fa.group, fb.group
    if max(ga.size, gb.size) > bound:
        raise ResourceLimit(f"group order exceeds the bound {bound}")
    if ga.size != gb.size:
        return None
    L = math.lcm(fa.level, fb.level)
    ta, tb = fa.table_over(L), fb.table_over(L)
    if sorted(ta.tolist()) != sorted(tb.tolist()):
        return None
    gens = [ga.index(ga.generator(i)) for i in range(ga.rank)]
    allowed = [np.nonzero(tb == ta[k])[0] for k in gens]
    for phi in enumerate_isomorphisms(ga, gb, candidates=allowed):
        p = phi.perm
        if not np.array_equal(tb[p], ta):
            continue
        if isinstance(a, InvolutiveMetricGroup) and isinstance(b, InvolutiveMetricGroup):
            # phi(theta_a x) == theta_b(phi x)
            if not np.array_equal(p[a.involution.perm], b.involution.perm[p]):
                continue
        return phi
    return None


def classify_involutive(fixed_pattern: str, max_order: int, **kwargs):
    """Isomorphism classes of involutive metric 2-groups with fixed points Z2 ("z2") or Z2xZ2 ("z2z2")."""
    from .classification import classify_involutive as run
    return run(fixed_pattern, max_order, **kwargs)
