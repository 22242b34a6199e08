"""Finite abelian groups given as products of cyclic groups.

Elements are plain tuples of residues.  The element order used everywhere is
lexicographic on coordinates, which is also the order of ``Group.elements``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import InvalidArgument, ResourceLimit

__all__ = [
    "Group",
    "GroupMap",
    "Subgroup",
    "group_make",
    "two_torsion",
    "even_odd_split",
    "enumerate_automorphisms",
    "enumerate_isomorphisms",
    "fixed_subgroup",
    "elementary_divisors",
    "DEFAULT_ORDER_BOUND",
    "DEFAULT_AUTOMORPHISM_CAP",
]

DEFAULT_ORDER_BOUND = 64
DEFAULT_AUTOMORPHISM_CAP = 250_000

Element = tuple


def _prime_factors(n: int) -> list[int]:
    out, p = [], 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


@dataclass(frozen=True)
class Group:
    """Z_{d_1} x ... x Z_{d_r}; the shape is kept exactly as given."""

    orders: tuple[int, ...]

    def __post_init__(self):
        orders = tuple(int(d) for d in self.orders)
        if any(d < 2 for d in orders):
            raise InvalidArgument(f"cyclic factor orders must be >= 2, got {list(orders)}")
        object.__setattr__(self, "orders", orders)

    @property
    def rank(self) -> int:
        return len(self.orders)

    @property
    def size(self) -> int:
        return math.prod(self.orders)

    def __len__(self):
        return self.size

    @cached_property
    def elements(self) -> tuple[Element, ...]:
        return tuple(itertools.product(*(range(d) for d in self.orders)))

    @cached_property
    def coords(self) -> np.ndarray:
        if not self.orders:
            return np.zeros((1, 0), dtype=np.int64)
        return np.array(self.elements, dtype=np.int64)

    @cached_property
    def strides(self) -> np.ndarray:
        s, acc = [], 1
        for d in reversed(self.orders):
            s.append(acc)
            acc *= d
        return np.array(list(reversed(s)), dtype=np.int64)

    @cached_property
    def _orders_arr(self) -> np.ndarray:
        return np.array(self.orders, dtype=np.int64)

    def index(self, x: Sequence[int]) -> int:
        return int(sum(int(c) % d * s for c, d, s in zip(x, self.orders, self.strides)))

    def indices(self, coords: np.ndarray) -> np.ndarray:
        if not self.orders:
            return np.zeros(coords.shape[0], dtype=np.int64)
        return (np.mod(coords, self._orders_arr) @ self.strides).astype(np.int64)

    def element(self, coords: Iterable[int]) -> Element:
        c = tuple(int(v) for v in coords)
        if len(c) != self.rank:
            raise InvalidArgument(f"element {c} does not match group shape {self.orders}")
        return tuple(v % d for v, d in zip(c, self.orders))

    @property
    def zero(self) -> Element:
        return (0,) * self.rank

    def add(self, x: Element, y: Element) -> Element:
        return tuple((a + b) % d for a, b, d in zip(x, y, self.orders))

    def sub(self, x: Element, y: Element) -> Element:
        return tuple((a - b) % d for a, b, d in zip(x, y, self.orders))

    def neg(self, x: Element) -> Element:
        return tuple((-a) % d for a, d in zip(x, self.orders))

    def scale(self, k: int, x: Element) -> Element:
        return tuple((k * a) % d for a, d in zip(x, self.orders))

    def total(self, xs: Iterable[Element]) -> Element:
        acc = self.zero
        for x in xs:
            acc = self.add(acc, x)
        return acc

    def order_of(self, x: Element) -> int:
        o = 1
        for a, d in zip(x, self.orders):
            o = math.lcm(o, d // math.gcd(a, d))
        return o

    @cached_property
    def element_orders(self) -> np.ndarray:
        return np.array([self.order_of(x) for x in self.elements], dtype=np.int64)

    @cached_property
    def add_table(self) -> np.ndarray:
        if not self.orders:
            return np.zeros((1, 1), dtype=np.int64)
        c = self.coords
        return self.indices((c[:, None, :] + c[None, :, :]).reshape(-1, self.rank)).reshape(
            self.size, self.size
        )

    @cached_property
    def neg_table(self) -> np.ndarray:
        return self.indices(-self.coords)

    @property
    def exponent(self) -> int:
        return math.lcm(*self.orders) if self.orders else 1

    def generator(self, i: int) -> Element:
        return tuple(1 if j == i else 0 for j in range(self.rank))

    def is_odd(self) -> bool:
        return self.size % 2 == 1

    def __str__(self):
        if not self.orders:
            return "0"
        return "x".join(f"Z{d}" for d in self.orders)

    def to_json(self) -> dict:
        return {"orders": list(self.orders)}


def group_make(orders: Iterable[int]) -> Group:
    return Group(tuple(orders))


def elementary_divisors(size: int, element_orders: Iterable[int]) -> tuple[int, ...]:
    """Prime-power cyclic factors of an abelian group from its element orders."""
    orders = list(element_orders)
    out = []
    for p in _prime_factors(size) if size > 1 else []:
        # at_least[k] = number of cyclic factors of order >= p^(k+1)
        at_least, prev, pk = [], 1, p
        while True:
            n_k = sum(1 for o in orders if pk % o == 0)
            if n_k == prev:
                break
            r = 0
            while prev * p ** (r + 1) <= n_k:
                r += 1
            at_least.append(r)
            prev, pk = n_k, pk * p
        for k, r in enumerate(at_least):
            nxt = at_least[k + 1] if k + 1 < len(at_least) else 0
            out.extend([p ** (k + 1)] * (r - nxt))
    return tuple(sorted(out))


@dataclass(frozen=True)
class GroupMap:
    """A homomorphism given by the images of the source generators."""

    source: Group
    target: Group
    images: tuple[Element, ...]

    def __post_init__(self):
        if len(self.images) != self.source.rank:
            raise InvalidArgument("one image per source generator is required")
        imgs = tuple(self.target.element(h) for h in self.images)
        object.__setattr__(self, "images", imgs)
        for d, h in zip(self.source.orders, imgs):
            if d % self.target.order_of(h) != 0:
                raise InvalidArgument(f"image {h} has order not dividing {d}")

    @classmethod
    def identity(cls, g: Group) -> "GroupMap":
        return cls(g, g, tuple(g.generator(i) for i in range(g.rank)))

    @classmethod
    def scalar(cls, g: Group, k: int) -> "GroupMap":
        return cls(g, g, tuple(g.scale(k, g.generator(i)) for i in range(g.rank)))

    @classmethod
    def from_matrix(cls, g: Group, rows: Sequence[Sequence[int]]) -> "GroupMap":
        """rows[i] is the image of generator i."""
        return cls(g, g, tuple(tuple(r) for r in rows))

    def __call__(self, x: Element) -> Element:
        acc = [0] * self.target.rank
        for a, h in zip(x, self.images):
            if a:
                for j, v in enumerate(h):
                    acc[j] += a * v
        return self.target.element(acc)

    @cached_property
    def perm(self) -> np.ndarray:
        """Index of the image of every source element."""
        src = self.source
        if not self.images:
            return np.zeros(src.size, dtype=np.int64)
        h = np.array(self.images, dtype=np.int64).reshape(src.rank, self.target.rank)
        return self.target.indices(src.coords @ h)

    def is_bijective(self) -> bool:
        return self.source.size == self.target.size and len(set(self.perm.tolist())) == self.source.size

    def compose(self, other: "GroupMap") -> "GroupMap":
        """self after other."""
        return GroupMap(other.source, self.target, tuple(self(h) for h in other.images))

    def inverse(self) -> "GroupMap":
        if not self.is_bijective():
            raise InvalidArgument("map is not invertible")
        inv = np.empty(self.source.size, dtype=np.int64)
        inv[self.perm] = np.arange(self.source.size)
        tgt = self.target
        return GroupMap(tgt, self.source, tuple(
            self.source.elements[inv[tgt.index(tgt.generator(i))]] for i in range(tgt.rank)))

    def is_identity(self) -> bool:
        return self.source == self.target and bool(np.all(self.perm == np.arange(self.source.size)))

    def order(self) -> int:
        if self.source != self.target:
            raise InvalidArgument("order is defined for endomorphisms only")
        p = self.perm
        cur, k = p.copy(), 1
        ident = np.arange(self.source.size)
        while not np.array_equal(cur, ident):
            cur, k = p[cur], k + 1
            if k > self.source.size * 4:
                raise InvalidArgument("map is not invertible")
        return k

    def to_json(self) -> list[list[int]]:
        return [list(h) for h in self.images]

    def __str__(self):
        return "(" + ", ".join(str(list(h)) for h in self.images) + ")"


@dataclass(frozen=True)
class Subgroup:
    parent: Group
    members: tuple[Element, ...]
    generators: tuple[Element, ...] = field(default=())

    @classmethod
    def from_indices(cls, parent: Group, idx: Iterable[int], generators=()) -> "Subgroup":
        members = tuple(parent.elements[i] for i in sorted(set(int(i) for i in idx)))
        return cls(parent, members, tuple(generators))

    @classmethod
    def generated_by(cls, parent: Group, gens: Iterable[Element]) -> "Subgroup":
        gens = tuple(parent.element(g) for g in gens)
        seen = {parent.index(parent.zero)}
        frontier = list(seen)
        gidx = [parent.index(g) for g in gens]
        table = parent.add_table
        while frontier:
            nxt = []
            for x in frontier:
                for g in gidx:
                    y = int(table[x, g])
                    if y not in seen:
                        seen.add(y)
                        nxt.append(y)
            frontier = nxt
        return cls.from_indices(parent, seen, gens)

    @classmethod
    def trivial(cls, parent: Group) -> "Subgroup":
        return cls(parent, (parent.zero,), ())

    @classmethod
    def whole(cls, parent: Group) -> "Subgroup":
        return cls(parent, parent.elements, tuple(parent.generator(i) for i in range(parent.rank)))

    @property
    def size(self) -> int:
        return len(self.members)

    def __len__(self):
        return self.size

    def __contains__(self, x) -> bool:
        return tuple(x) in self._set

    def __iter__(self) -> Iterator[Element]:
        return iter(self.members)

    @cached_property
    def _set(self) -> frozenset:
        return frozenset(self.members)

    @cached_property
    def indices(self) -> np.ndarray:
        return np.array([self.parent.index(x) for x in self.members], dtype=np.int64)

    def is_subgroup(self) -> bool:
        g = self.parent
        return g.zero in self._set and all(
            g.sub(x, y) in self._set for x in self.members for y in self.members)

    @cached_property
    def shape(self) -> tuple[int, ...]:
        """Elementary divisors, e.g. (2, 2) or (4,) or (3, 4)."""
        return elementary_divisors(self.size, (self.parent.order_of(x) for x in self.members))

    def as_group(self) -> tuple[Group, GroupMap]:
        """A standalone copy of the subgroup with its embedding into the parent."""
        shape = self.shape
        g = Group(shape)
        for emb in enumerate_isomorphisms(g, self.parent, target_members=self.indices):
            return g, emb
        raise AssertionError("no basis found for subgroup")  # pragma: no cover

    def __str__(self):
        return "{" + ", ".join(str(list(x)) for x in self.members) + "}"


def two_torsion(g: Group) -> Subgroup:
    return Subgroup.from_indices(g, np.nonzero(2 % g.element_orders == 0)[0])


def even_odd_split(g: Group) -> tuple[Subgroup, Subgroup]:
    orders = g.element_orders
    even = [i for i, o in enumerate(orders) if o & (o - 1) == 0]
    odd = [i for i, o in enumerate(orders) if o % 2 == 1]
    return Subgroup.from_indices(g, even), Subgroup.from_indices(g, odd)


def enumerate_isomorphisms(source: Group, target: Group, *, target_members=None,
                           candidates=None, cap: int | None = None) -> Iterator[GroupMap]:
    """Injective homomorphisms from ``source`` onto the given members of ``target``.

    With ``target_members`` omitted the image must be all of ``target``.
    ``candidates`` optionally restricts the image of each generator to a set
    of target indices.
    Generator images are chosen one at a time and a branch is abandoned as
    soon as the partial map stops being injective.
    """
    if target_members is None:
        allowed = np.arange(target.size)
    else:
        allowed = np.asarray(target_members, dtype=np.int64)
    if len(allowed) != source.size:
        return
    allowed_set = set(allowed.tolist())
    t_orders = target.element_orders
    if candidates is None:
        candidates = [allowed] * source.rank
    candidates = [[int(i) for i in cand if int(i) in allowed_set and d % t_orders[i] == 0]
                  for d, cand in zip(source.orders, candidates)]
    tcoords = target.coords
    count = 0

    def extend(level: int, images: list[int], image_set: np.ndarray):
        nonlocal count
        if level == source.rank:
            count += 1
            if cap is not None and count > cap:
                raise ResourceLimit(f"more than {cap} isomorphisms")
            yield GroupMap(source, target, tuple(target.elements[i] for i in images))
            return
        d = source.orders[level]
        for h in candidates[level]:
            multiples = target.indices(np.arange(d)[:, None] * tcoords[h][None, :])
            new = target.add_table[np.ix_(image_set, multiples)].reshape(-1)
            if len(set(new.tolist())) != len(new):
                continue
            if not allowed_set.issuperset(new.tolist()):
                continue
            yield from extend(level + 1, images + [h], new)

    start = np.array([target.index(target.zero)], dtype=np.int64)
    yield from extend(0, [], start)


def automorphism_count(g: Group) -> int:
    """|Aut(G)| via the standard formula for abelian p-groups."""
    total = 1
    for p in _prime_factors(g.size) if g.size > 1 else []:
        exps = sorted(int(round(math.log(d, p))) for d in elementary_divisors(g.size, g.element_orders)
                      if d % p == 0)
        # Hillar and Rhea: |Aut| = prod (p^{d_k}-p^{k-1}) prod p^{e_j (n - d_j)} prod p^{(e_i - 1)(n - c_i + 1)}
        n = len(exps)
        e = [0] + exps
        d_ = [0] * (n + 1)
        c_ = [0] * (n + 1)
        for k in range(1, n + 1):
            d_[k] = max(l for l in range(1, n + 1) if e[l] == e[k])
            c_[k] = min(l for l in range(1, n + 1) if e[l] == e[k])
        prod = 1
        for k in range(1, n + 1):
            prod *= p ** d_[k] - p ** (k - 1)
        for j in range(1, n + 1):
            prod *= p ** (e[j] * (n - d_[j]))
        for i in range(1, n + 1):
            prod *= p ** ((e[i] - 1) * (n - c_[i] + 1))
        total *= prod
    return total


def enumerate_automorphisms(g: Group, order_filter: int | None = None, *,
                            bound: int = DEFAULT_ORDER_BOUND,
                            cap: int = DEFAULT_AUTOMORPHISM_CAP) -> list[GroupMap]:
    if g.size > bound:
        raise ResourceLimit(f"|G| = {g.size} exceeds the bound {bound}")
    if automorphism_count(g) > cap:
        raise ResourceLimit(f"|Aut({g})| = {automorphism_count(g)} exceeds the cap {cap}")
    autos = list(enumerate_isomorphisms(g, g))
    if order_filter is not None:
        autos = [a for a in autos if a.order() == order_filter]
    return autos


def fixed_subgroup(g: Group, t: GroupMap) -> Subgroup:
    if t.source != g or t.target != g:
        raise InvalidArgument("map is not an endomorphism of the group")
    p = t.perm
    return Subgroup.from_indices(g, np.nonzero(p == np.arange(g.size))[0])
