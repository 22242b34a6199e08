"""Classification of involutive metric 2-groups whose fixed points are Z2 or Z2 x Z2.

Isomorphism classes are found by brute force.  For each group shape the
involutions are split into conjugacy classes under Aut(A); for a class
representative theta the classes of pairs (q, theta) are the orbits of the
centralizer of theta on theta-invariant nondegenerate forms.

The result is compared with a catalogue of explicit normal forms.  Each
catalogue entry is a family of parameterized (A, q, theta); an entry matches a
class when one of its members lands in it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .abgroup import (
    DEFAULT_AUTOMORPHISM_CAP,
    Group,
    GroupMap,
    enumerate_automorphisms,
    enumerate_isomorphisms,
)
from .errors import InvalidArgument, ResourceLimit
from .exactnum import Phase
from .metric import InvolutiveMetricGroup, QuadraticForm, _pairs

__all__ = ["ClassificationReport", "ClassRecord", "CatalogueEntry", "classify_involutive", "two_group_shapes"]

PATTERNS = {"z2": (2,), "z2z2": (2, 2)}


def _partitions(n: int, largest: int | None = None):
    largest = n if largest is None else largest
    if n == 0:
        yield ()
        return
    for k in range(min(n, largest), 0, -1):
        for rest in _partitions(n - k, k):
            yield (k,) + rest


def two_group_shapes(max_order: int) -> list[tuple[int, ...]]:
    """Every abelian 2-group of order <= max_order, as ascending cyclic orders."""
    out = []
    k = 1
    while 2 ** k <= max_order:
        for part in _partitions(k):
            out.append(tuple(sorted(2 ** e for e in part)))
        k += 1
    return out


@dataclass
class ClassRecord:
    group: Group
    form: QuadraticForm
    involution: GroupMap
    fixed_values: tuple[Phase, ...]
    entries: list[str] = field(default_factory=list)

    def describe(self) -> str:
        vals = ", ".join(str(p) for p in self.fixed_values)
        return f"{self.form} theta={self.involution} fixed q-values [{vals}]"

    def to_json(self) -> dict:
        return {
            "form": self.form.to_json(),
            "involution": self.involution.to_json(),
            "fixed_values": [str(p) for p in self.fixed_values],
            "entries": sorted(set(self.entries)),
        }


@dataclass
class CatalogueEntry:
    key: str
    description: str
    members: int = 0
    skipped: list[str] = field(default_factory=list)
    classes: set = field(default_factory=set)

    def to_json(self) -> dict:
        return {"key": self.key, "description": self.description, "members": self.members,
                "classes": sorted(self.classes), "skipped": self.skipped}


@dataclass
class ClassificationReport:
    pattern: str
    max_order: int
    classes: list[ClassRecord]
    entries: list[CatalogueEntry]
    skipped_shapes: list[str]
    deferred: dict[str, str]

    @property
    def unmatched(self) -> list[int]:
        return [i for i, c in enumerate(self.classes) if not c.entries]

    def overlaps(self) -> list[int]:
        """Classes claimed by two entries, other than the deferred overlap."""
        out = []
        for i, c in enumerate(self.classes):
            keys = set(c.entries) - set(self.deferred)
            if len(keys) > 1:
                out.append(i)
        return out

    @property
    def unrealized(self) -> list[str]:
        """Entries with members at this order that matched no class."""
        return [e.key for e in self.entries if e.members and not e.classes]

    @property
    def ok(self) -> bool:
        return not (self.unmatched or self.overlaps() or self.unrealized or self.skipped_shapes)

    def summary(self) -> str:
        lines = [f"fixed points {self.pattern}, |A| <= {self.max_order}: {len(self.classes)} classes"]
        for i, c in enumerate(self.classes):
            tag = ",".join(sorted(set(c.entries))) or "UNMATCHED"
            lines.append(f"  [{i}] {tag}: {c.describe()}")
        for e in self.entries:
            lines.append(f"  entry {e.key}: {e.members} members -> classes {sorted(e.classes)}")
        for key, note in self.deferred.items():
            lines.append(f"  deferred {key}: {note}")
        for s in self.skipped_shapes:
            lines.append(f"  skipped {s}")
        lines.append("  result: " + ("ok" if self.ok else "MISMATCH"))
        return "\n".join(lines)

    def to_json(self) -> dict:
        return {
            "pattern": self.pattern,
            "max_order": self.max_order,
            "classes": [c.to_json() for c in self.classes],
            "entries": [e.to_json() for e in self.entries],
            "unmatched": self.unmatched,
            "overlaps": self.overlaps(),
            "unrealized": self.unrealized,
            "skipped_shapes": self.skipped_shapes,
            "deferred": self.deferred,
            "ok": self.ok,
        }


# catalogue of normal forms

FLIP_FORMS = {
    "hyperbolic": (("0", "0"), "1/2"),
    "anisotropic": (("1/2", "1/2"), "1/2"),
    "i(x2+y2)": (("1/4", "1/4"), "0"),
    "-i(x2+y2)": (("3/4", "3/4"), "0"),
}


def _odd(n: int):
    return range(1, n, 2)


def _member(orders, diag, offdiag, theta):
    g = Group(tuple(orders))
    form = QuadraticForm.make(g, diag, offdiag)
    if theta == -1:
        t = GroupMap.scalar(g, -1)
    elif isinstance(theta, int):
        t = GroupMap.scalar(g, theta)
    else:
        t = GroupMap(g, g, tuple(tuple(r) for r in theta))
    return InvolutiveMetricGroup(form, t)


def _catalogue_z2(max_order: int):
    yield "1", "A=Z2, q=i^(+-x^2), theta=-1", [
        (f"sign={s}", lambda s=s: _member([2], [f"{s}/4"], {}, -1)) for s in (1, 3)]
    yield "2a", "A=Z4, q=zeta8^(r x^2), r odd, theta=-1", [
        (f"r={r}", lambda r=r: _member([4], [f"{r}/8"], {}, -1)) for r in _odd(8)]
    yield "2b", "A=Z2xZ2 with a flip-invariant form, theta=flip", [
        (name, lambda d=d, o=o: _member([2, 2], d, {(0, 1): o}, [[0, 1], [1, 0]]))
        for name, (d, o) in FLIP_FORMS.items()]
    members = []
    n = 3
    while 2 ** n <= max_order:
        members += [(f"n={n},r={r}", lambda n=n, r=r: _member([2 ** n], [f"{r}/{2 ** (n + 1)}"], {}, -1))
                    for r in _odd(2 ** (n + 1))]
        n += 1
    yield "3", "A=Z_2^n (n>=3), q=zeta_{2^(n+1)}^(r x^2), theta=-1", members


def _catalogue_z2z2(max_order: int):
    yield "1", "Z2^2, (-1)^(xy), theta=-1", [("", lambda: _member([2, 2], ["0", "0"], {(0, 1): "1/2"}, -1))]
    yield "2", "Z2^2, (-1)^(x^2+xy+y^2), theta=-1", [
        ("", lambda: _member([2, 2], ["1/2", "1/2"], {(0, 1): "1/2"}, -1))]
    yield "3", "Z2^2, i^(+-(x^2+y^2)), theta=-1", [
        (f"sign={s}", lambda s=s: _member([2, 2], [f"{s}/4", f"{s}/4"], {}, -1)) for s in (1, 3)]
    yield "4", "Z2^2, i^(x^2-y^2), theta=-1", [("", lambda: _member([2, 2], ["1/4", "3/4"], {}, -1))]
    yield "5a", "Z2xZ4, zeta4^(r1 x^2) zeta8^(r2 y^2), theta=-1", [
        (f"r1={r1},r2={r2}", lambda r1=r1, r2=r2: _member([2, 4], [f"{r1}/4", f"{r2}/8"], {}, -1))
        for r1 in _odd(4) for r2 in _odd(8)]
    yield "5b", "Z2^3, zeta4^(r x^2) q'(y,z), theta=(x,z,y)", [
        (f"r={r},q'={name}", lambda r=r, d=d, o=o: _member(
            [2, 2, 2], [f"{r}/4", *d], {(1, 2): o}, [[1, 0, 0], [0, 0, 1], [0, 1, 0]]))
        for r in _odd(4) for name, (d, o) in FLIP_FORMS.items()]

    six_a = []
    m = 2
    while 4 * 2 ** m <= max_order:
        M = 2 ** m
        for r1 in _odd(8):
            for r2 in _odd(2 * M):
                diag = [f"{r1}/8", f"{r2}/{2 * M}"]
                six_a.append((f"m={m},r1={r1},r2={r2},theta=-1",
                              lambda diag=diag, M=M: _member([4, M], diag, {}, -1)))
                if m >= 3:
                    theta = [[-1, M // 2], [2, -1 + M // 2]]
                    six_a.append((f"m={m},r1={r1},r2={r2},theta=twisted",
                                  lambda diag=diag, M=M, theta=theta: _member([4, M], diag, {}, theta)))
        m += 1
    yield "6a", "Z4xZ_2^m (m>=2), zeta8^(r1 x^2) zeta_{2^(m+1)}^(r2 y^2), theta=-1 or the twisted involution", six_a

    def six_b(m_values):
        out = []
        for m in m_values:
            M = 2 ** m
            for r in _odd(2 * M):
                for name, (d, o) in FLIP_FORMS.items():
                    out.append((f"m={m},r={r},q'={name}", lambda d=d, o=o, r=r, M=M: _member(
                        [2, 2, M], [*d, f"{r}/{2 * M}"], {(0, 1): o}, [[0, 1, 0], [1, 0, 0], [0, 0, -1]])))
        return out

    ms = []
    m = 2
    while 4 * 2 ** m <= max_order:
        ms.append(m)
        m += 1
    yield "6b", "Z2xZ2xZ_2^m (m>=2), q'(x,y) zeta_{2^(m+1)}^(r z^2), theta=(y,x,-z)", six_b(ms)
    if 8 <= max_order:
        yield "6b[m=1]", "the same family read at m=1", six_b([1])
    yield "6c", "Z2^4, q'(x1,x3) q''(x2,x4), theta=(x3,x4,x1,x2)", [
        (f"q'={n1},q''={n2}", lambda d1=d1, o1=o1, d2=d2, o2=o2: _member(
            [2, 2, 2, 2], [d1[0], d2[0], d1[1], d2[1]], {(0, 2): o1, (1, 3): o2},
            [[0, 0, 1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, 1, 0, 0]]))
        for n1, (d1, o1) in FLIP_FORMS.items() for n2, (d2, o2) in FLIP_FORMS.items()]

    seven = []
    n = 3
    while 2 * 2 ** n <= max_order:
        N = 2 ** n
        seven += [(f"n={n},sign={s},r={r}", lambda s=s, r=r, N=N: _member([2, N], [f"{s}/4", f"{r}/{2 * N}"], {}, -1))
                  for s in (1, 3) for r in _odd(2 * N)]
        n += 1
    yield "7", "Z2xZ_2^n (n>=3), i^(+-x^2) zeta_{2^(n+1)}^(r y^2), theta=-1", seven

    eight_a = []
    n = 2
    while 4 ** n <= max_order:
        N = 2 ** n
        for name, diag in (("xy", ["0", "0"]), ("x2+xy+y2", [f"1/{N}", f"1/{N}"])):
            eight_a.append((f"n={n},{name},theta=-1", lambda diag=diag, N=N: _member([N, N], diag, {(0, 1): f"1/{N}"}, -1)))
            if n >= 3:
                eight_a.append((f"n={n},{name},theta=-1+2^(n-1)", lambda diag=diag, N=N: _member(
                    [N, N], diag, {(0, 1): f"1/{N}"}, N // 2 - 1)))
        n += 1
    yield "8a", "Z_2^n x Z_2^n (n>=2), zeta_{2^n}^(xy) or zeta_{2^n}^(x^2+xy+y^2), theta=-1 or -1+2^(n-1)", eight_a

    eight_b = []
    for m in range(3, 7):
        for n in range(m, 7):
            M, N = 2 ** m, 2 ** n
            if M * N > max_order:
                continue
            for r1 in _odd(2 * M):
                for r2 in _odd(2 * N):
                    diag = [f"{r1}/{2 * M}", f"{r2}/{2 * N}"]
                    eight_b.append((f"m={m},n={n},r1={r1},r2={r2},theta=-1",
                                    lambda diag=diag, M=M, N=N: _member([M, N], diag, {}, -1)))
                    theta = [[-1, N // 2], [M // 2, -1]]
                    eight_b.append((f"m={m},n={n},r1={r1},r2={r2},theta=twisted",
                                    lambda diag=diag, M=M, N=N, theta=theta: _member([M, N], diag, {}, theta)))
    yield "8b", "Z_2^m x Z_2^n (3<=m<=n), zeta_{2^(m+1)}^(r1 x^2) zeta_{2^(n+1)}^(r2 y^2), theta=-1 or twisted", eight_b

    swap = [[0, 0, 1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, 1, 0, 0]]
    yield "8c", "Z2^4, (-1)^(x1x4+x2x3) or (-1)^(x1x4+x2x3) i^((x1+x3)^2), theta=(x3,x4,x1,x2)", [
        ("plain", lambda: _member([2, 2, 2, 2], ["0"] * 4, {(0, 3): "1/2", (1, 2): "1/2"}, swap)),
        ("twisted", lambda: _member([2, 2, 2, 2], ["1/4", "0", "1/4", "0"],
                                    {(0, 3): "1/2", (1, 2): "1/2", (0, 2): "1/2"}, swap)),
    ]


DEFERRED = {
    "6b[m=1]": "the family with theta=(y,x,-z) read at m=1 lands on Z2^3; "
               "the class it hits is reported under both keys",
}


# orbit computation

def _all_forms(g: Group) -> tuple[np.ndarray, int]:
    """Value tables (exponents over a common level) of every nondegenerate form on g."""
    L = 2 * g.exponent
    c = g.coords
    feats, steps, counts = [], [], []
    for i, d in enumerate(g.orders):
        feats.append(c[:, i] * c[:, i])
        steps.append(L // (2 * d))
        counts.append(2 * d)
    for i, j in _pairs(g.rank):
        e = math.gcd(g.orders[i], g.orders[j])
        feats.append(c[:, i] * c[:, j])
        steps.append(L // e)
        counts.append(e)
    grids = np.stack(np.meshgrid(*[np.arange(k) for k in counts], indexing="ij"), -1).reshape(-1, len(counts))
    coeff = grids * np.array(steps)
    F = np.stack(feats, 1)
    tables = (coeff @ F.T) % L
    # nondegenerate iff only x = 0 pairs trivially with everything
    add = g.add_table
    keep = np.zeros(len(tables), dtype=bool)
    for start in range(0, len(tables), 2048):
        t = tables[start:start + 2048]
        pair = (t[:, add] - t[:, :, None] - t[:, None, :]) % L
        keep[start:start + 2048] = (~pair.any(axis=2)).sum(axis=1) == 1
    return tables[keep], L


@dataclass
class _ShapeData:
    group: Group
    level: int
    perms: np.ndarray
    reps: list[int]
    conj_lookup: dict  # conjugate-involution bytes -> (rep position, automorphism index)
    orbit_lookup: dict  # (rep position, table bytes) -> class index


def _fixed_shape(g: Group, perm: np.ndarray):
    from .abgroup import Subgroup
    return Subgroup.from_indices(g, np.nonzero(perm == np.arange(g.size))[0]).shape


def _analyse_shape(g: Group, target_fixed, classes: list, cap: int) -> _ShapeData | None:
    autos = enumerate_automorphisms(g, bound=max(64, g.size), cap=cap)
    P = np.stack([a.perm for a in autos])
    n = g.size
    Pinv = np.argsort(P, axis=1)
    ident = np.arange(n)
    invol = [k for k in range(len(P)) if np.array_equal(P[k][P[k]], ident)
             and _fixed_shape(g, P[k]) == target_fixed]
    if not invol:
        return None
    tables, L = _all_forms(g)
    reps, conj_lookup, orbit_lookup = [], {}, {}
    for k in invol:
        theta = P[k]
        if theta.tobytes() in conj_lookup:
            continue
        pos = len(reps)
        reps.append(k)
        conj = np.take_along_axis(P, theta[Pinv], axis=1)
        for a in range(len(P)):
            conj_lookup.setdefault(conj[a].tobytes(), (pos, a))
        centralizer = P[np.all(conj == theta, axis=1)]
        inv_tables = tables[np.all(tables[:, theta] == tables, axis=1)]
        seen = set()
        for t in inv_tables:
            if t.tobytes() in seen:
                continue
            orbit = np.unique(t[centralizer], axis=0)
            rep = orbit[0]
            idx = len(classes)
            for o in orbit:
                seen.add(o.tobytes())
                orbit_lookup[(pos, o.tobytes())] = idx
            form = QuadraticForm.from_table(g, rep, L)
            inv = GroupMap(g, g, tuple(g.elements[theta[g.index(g.generator(i))]] for i in range(g.rank)))
            fixed = [x for x in np.nonzero(theta == ident)[0] if x != 0]
            vals = tuple(sorted(Phase(int(rep[x]), L) for x in fixed))
            classes.append(ClassRecord(g, form, inv, vals))
    return _ShapeData(g, L, P, reps, conj_lookup, orbit_lookup)


def _locate(member: InvolutiveMetricGroup, shapes: dict) -> int | None:
    g0 = member.group
    canon = Group(tuple(sorted(g0.orders)))
    data = shapes.get(canon.orders)
    if data is None:
        return None
    g = data.group
    psi = next(enumerate_isomorphisms(g, g0))  # canonical group -> member group
    if data.level % member.form.level:
        return None
    table = member.form.table_over(data.level)[psi.perm]
    inv = np.argsort(psi.perm)
    theta = inv[member.involution.perm[psi.perm]]
    hit = data.conj_lookup.get(theta.astype(np.int64).tobytes())
    if hit is None:
        return None
    pos, a = hit
    # theta = phi theta_rep phi^-1, so q o phi is invariant under theta_rep
    moved = table[data.perms[a]]
    return data.orbit_lookup.get((pos, moved.astype(np.int64).tobytes()))


def classify_involutive(fixed_pattern: str, max_order: int, *,
                        cap: int = DEFAULT_AUTOMORPHISM_CAP) -> ClassificationReport:
    if fixed_pattern not in PATTERNS:
        raise InvalidArgument(f"fixed pattern must be one of {sorted(PATTERNS)}")
    if max_order > 64:
        raise InvalidArgument("max_order must be at most 64")
    target = PATTERNS[fixed_pattern]
    classes: list[ClassRecord] = []
    shapes: dict = {}
    skipped = []
    for orders in two_group_shapes(max_order):
        g = Group(orders)
        try:
            data = _analyse_shape(g, target, classes, cap)
        except ResourceLimit as exc:
            skipped.append(f"{g}: {exc}")
            continue
        if data is not None:
            shapes[orders] = data

    source = _catalogue_z2 if fixed_pattern == "z2" else _catalogue_z2z2
    entries = []
    for key, desc, members in source(max_order):
        entry = CatalogueEntry(key, desc)
        for label, build in members:
            try:
                m = build()
            except InvalidArgument as exc:
                entry.skipped.append(f"{label}: {exc}")
                continue
            if m.group.size > max_order:
                continue
            if m.fixed.shape != target:
                entry.skipped.append(f"{label}: fixed points {m.fixed.shape}")
                continue
            entry.members += 1
            idx = _locate(m, shapes)
            if idx is None:
                entry.skipped.append(f"{label}: not located among the enumerated classes")
                continue
            entry.classes.add(idx)
            classes[idx].entries.append(key)
        entries.append(entry)

    deferred = {k: v for k, v in DEFERRED.items() if any(e.key == k for e in entries)}
    return ClassificationReport(fixed_pattern, max_order, classes, entries, skipped, deferred)
