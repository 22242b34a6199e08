"""Modular data (S, T) on a labeled index set and the generic checks on it.

Fusion coefficients are stored with all three indices lower:
N_{ijk} = sum_a S_{ai} S_{aj} S_{ak} / S_{0a}, so N_{ij}^k = N_{i j dual(k)}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Iterable, Sequence

import numpy as np

from .errors import IntegralityViolation, InvalidArgument, ParseError, PreconditionViolated
from .exactnum import Phase
from .metric import QuadraticForm, as_phase, gauss_sum

__all__ = [
    "Label",
    "ModularData",
    "FusionTensor",
    "RelationReport",
    "IndicatorCheck",
    "pointed",
    "tensor",
    "verify_relations",
    "verlinde_numeric",
    "fs_numeric",
    "check_fs2",
    "check_fs3",
    "find_label_bijection",
    "DEFAULT_TOL_REL",
    "DEFAULT_TOL_INT",
]

DEFAULT_TOL_REL = 1e-9
DEFAULT_TOL_INT = 1e-6

TAGS = ("u0", "upi", "zero", "pi", "kpair", "G", "spair", "Gamma", "pt", "prod", "raw")


@dataclass(frozen=True)
class Label:
    """One simple object.

    ``tag`` names the block it belongs to: (u,0) is "u0", (u,pi) is "upi",
    the two extra points of the B/D/E families are "zero" and "pi", paired
    labels (k, eps) and (sigma, eps) are "kpair" and "spair", and the
    group-like labels are "G" and "Gamma".  Pointed data uses "pt" and
    tensor products use "prod" with the two factors in ``parts``.
    """

    tag: str
    element: tuple | None = None
    sign: int | None = None
    parts: tuple | None = None

    def __post_init__(self):
        if self.tag not in TAGS:
            raise InvalidArgument(f"unknown label tag {self.tag!r}")

    def __str__(self):
        el = "" if self.element is None else "".join(str(v) for v in self.element)
        if self.tag == "u0":
            return f"({el},0)"
        if self.tag == "upi":
            return f"({el},pi)"
        if self.tag in ("zero", "pi"):
            return {"zero": "0", "pi": "pi"}[self.tag]
        if self.tag in ("kpair", "spair"):
            side = "k" if self.tag == "kpair" else "s"
            return f"({side}{el},{'+' if self.sign > 0 else '-'})"
        if self.tag == "G":
            return f"g{el}"
        if self.tag == "Gamma":
            return f"c{el}"
        if self.tag == "prod":
            return f"{self.parts[0]}*{self.parts[1]}"
        if self.tag == "raw":
            return f"#{self.element[0]}"
        return el

    def to_json(self) -> Any:
        d: dict = {"tag": self.tag}
        if self.element is not None:
            d["element"] = list(self.element)
        if self.sign is not None:
            d["sign"] = self.sign
        if self.parts is not None:
            d["parts"] = [p.to_json() for p in self.parts]
        return d

    @classmethod
    def from_json(cls, data) -> "Label":
        try:
            parts = tuple(cls.from_json(p) for p in data["parts"]) if "parts" in data else None
            el = tuple(int(v) for v in data["element"]) if "element" in data else None
            return cls(data["tag"], el, data.get("sign"), parts)
        except (KeyError, TypeError, InvalidArgument) as exc:
            raise ParseError(f"bad label {data!r}: {exc}") from None


@dataclass(frozen=True, eq=False)
class ModularData:
    labels: tuple[Label, ...]
    S: np.ndarray
    T: tuple[Phase, ...]
    duality: tuple[int, ...]
    c: complex
    c_exact: Phase | None = None
    name: str = ""

    def __post_init__(self):
        n = len(self.labels)
        S = np.asarray(self.S, dtype=complex)
        if S.shape != (n, n) or len(self.T) != n or len(self.duality) != n:
            raise InvalidArgument("labels, S, T and duality have inconsistent sizes")
        if len(set(self.labels)) != n:
            raise InvalidArgument("labels are not pairwise distinct")
        dual = tuple(int(d) for d in self.duality)
        if sorted(dual) != list(range(n)) or any(dual[dual[i]] != i for i in range(n)) or dual[0] != 0:
            raise InvalidArgument("duality is not an involution fixing the unit")
        if not self.T[0].is_one():
            raise InvalidArgument("T[0] must be 1")
        S.setflags(write=False)
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "duality", dual)
        object.__setattr__(self, "T", tuple(self.T))

    @property
    def rank(self) -> int:
        return len(self.labels)

    @cached_property
    def T_values(self) -> np.ndarray:
        return np.array([p.value() for p in self.T])

    @cached_property
    def C(self) -> np.ndarray:
        C = np.zeros((self.rank, self.rank))
        C[np.arange(self.rank), self.duality] = 1
        return C

    def index(self, label: Label) -> int:
        return self.labels.index(label)

    def validate(self, tol: float = DEFAULT_TOL_REL) -> None:
        """Numeric invariants: S symmetric, positive unit row."""
        S = self.S
        if np.max(np.abs(S - S.T)) > tol:
            raise InvalidArgument("S is not symmetric")
        row = S[0]
        if np.max(np.abs(row.imag)) > tol or np.min(row.real) <= 0:
            raise InvalidArgument("first row of S is not strictly positive")

    def to_json(self) -> dict:
        c = complex(self.c)
        d = {
            "labels": [lab.to_json() for lab in self.labels],
            "S_float": [[[float(z.real), float(z.imag)] for z in row] for row in self.S],
            "T": [str(p) for p in self.T],
            "duality": list(self.duality),
            "c": [c.real, c.imag],
        }
        if self.c_exact is not None:
            d["c_exact"] = str(self.c_exact)
        if self.name:
            d["name"] = self.name
        return d

    @classmethod
    def from_json(cls, data: dict) -> "ModularData":
        try:
            labels = tuple(Label.from_json(x) for x in data["labels"])
            S = np.array([[complex(re, im) for re, im in row] for row in data["S_float"]])
            T = tuple(Phase.parse(str(t)) for t in data["T"])
            dual = tuple(int(v) for v in data["duality"])
            c = complex(*data["c"])
            cx = Phase.parse(data["c_exact"]) if "c_exact" in data else None
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed modular data: {exc!r}") from None
        try:
            return cls(labels, S, T, dual, c, cx, data.get("name", ""))
        except InvalidArgument as exc:
            raise ParseError(f"invalid modular data: {exc}") from None


@dataclass(frozen=True)
class RelationReport:
    residuals: dict
    passes: dict
    c_formula: complex
    t_order: int
    tol: float

    @property
    def ok(self) -> bool:
        return all(self.passes.values())

    def failures(self) -> list[str]:
        return [k for k, v in self.passes.items() if not v]

    def to_json(self) -> dict:
        return {
            "residuals": {k: float(v) for k, v in self.residuals.items()},
            "passes": dict(self.passes),
            "c": [self.c_formula.real, self.c_formula.imag],
            "t_order": self.t_order,
            "tol": self.tol,
            "ok": self.ok,
        }


@dataclass(frozen=True)
class FusionTensor:
    N: np.ndarray
    residual: float
    labels: tuple = field(default=(), compare=False)

    def __getitem__(self, idx):
        return int(self.N[idx])

    def symmetry_defect(self, duality: Sequence[int]) -> list[str]:
        """Names of the structural identities that fail."""
        N = self.N
        bad = []
        for perm in ((1, 0, 2), (0, 2, 1), (2, 1, 0), (1, 2, 0), (2, 0, 1)):
            if not np.array_equal(N, N.transpose(perm)):
                bad.append(f"S3 symmetry {perm}")
                break
        d = np.asarray(duality)
        if not np.array_equal(N, N[np.ix_(d, d, d)]):
            bad.append("duality invariance")
        n = len(d)
        unit = np.zeros((n, n), dtype=N.dtype)
        unit[np.arange(n), d] = 1
        if not np.array_equal(N[0], unit):
            bad.append("unit row")
        if (N < 0).any():
            bad.append("negative entry")
        return bad


def _c_formula(md: ModularData) -> complex:
    s0 = md.S[0]
    return complex(np.sum(s0 * s0 * md.T_values) / s0[0])


def verify_relations(md: ModularData, tol: float = DEFAULT_TOL_REL) -> RelationReport:
    S = md.S
    n = md.rank
    I = np.eye(n)
    T = np.diag(md.T_values)
    C = md.C
    c = _c_formula(md)
    ST = S @ T
    res = {
        "unitarity": float(np.max(np.abs(S @ S.conj().T - I))),
        "symmetry": float(np.max(np.abs(S - S.T))),
        "s_squared": float(np.max(np.abs(S @ S - C))),
        "st_cubed": float(np.max(np.abs(ST @ ST @ ST - c * C))),
        "unit_row": float(max(np.max(np.abs(S[0].imag)), -np.min(S[0].real) if np.min(S[0].real) <= 0 else 0.0)),
        "c_modulus": abs(abs(c) - 1),
        "c_stored": abs(c - complex(md.c)),
        "ct_commute": float(sum(md.T[i] != md.T[md.duality[i]] for i in range(n))),
    }
    passes = {k: v <= tol for k, v in res.items()}
    passes["unit_row"] = passes["unit_row"] and bool(np.min(S[0].real) > 0)
    passes["ct_commute"] = res["ct_commute"] == 0
    order = math.lcm(*(p.den for p in md.T))
    return RelationReport(res, passes, c, order, tol)


def verlinde_numeric(md: ModularData, tol: float = DEFAULT_TOL_INT) -> FusionTensor:
    S = md.S
    raw = np.einsum("ai,aj,ak,a->ijk", S, S, S, 1.0 / S[0], optimize=True)
    rounded = np.rint(raw.real)
    err = np.abs(raw - rounded)
    worst = np.unravel_index(int(np.argmax(err)), err.shape)
    residual = float(err[worst])
    if residual > tol:
        lab = tuple(str(md.labels[i]) for i in worst)
        raise IntegralityViolation(f"N{lab} = {raw[worst]:.6g} is not an integer", worst, residual)
    if (rounded < 0).any():
        neg = np.unravel_index(int(np.argmin(rounded)), rounded.shape)
        lab = tuple(str(md.labels[i]) for i in neg)
        raise IntegralityViolation(f"N{lab} = {raw[neg]:.6g} is negative", neg, residual)
    return FusionTensor(rounded.astype(np.int64), residual, md.labels)


def fs_numeric(md: ModularData, n: int, fusion: FusionTensor | None = None) -> np.ndarray:
    """nu_n(k) = sum_{ij} N_ij^k S_0i S_0j (T_j / T_i)^n for every label k."""
    N = (fusion or verlinde_numeric(md)).N
    upper = N[:, :, list(md.duality)]
    s0 = md.S[0]
    tn = md.T_values ** n
    weight = np.outer(s0 / tn, s0 * tn)
    return np.einsum("ijk,ij->k", upper, weight)


@dataclass(frozen=True)
class IndicatorCheck:
    label: Label
    value: complex
    ok: bool
    detail: str = ""


def check_fs2(md: ModularData, fusion: FusionTensor | None = None,
              tol: float = DEFAULT_TOL_INT) -> list[IndicatorCheck]:
    nu = fs_numeric(md, 2, fusion)
    out = []
    for k, v in enumerate(nu):
        if md.duality[k] == k:
            ok = min(abs(v - 1), abs(v + 1)) <= tol
            detail = "self-dual: expected +1 or -1"
        else:
            ok = abs(v) <= tol
            detail = "not self-dual: expected 0"
        out.append(IndicatorCheck(md.labels[k], complex(v), bool(ok), detail))
    return out


def fs3_decomposition(value: complex, count: int, tol: float = DEFAULT_TOL_INT):
    """Non-negative (a, b, c) with a+b+c = count and a + b w + c w^2 = value, w = exp(2 pi i/3)."""
    diff = 2 * value.imag / math.sqrt(3)  # b - c
    total = 2 * (count - value.real) / 3  # b + c
    b2, c2 = total + diff, total - diff
    b, c = round(b2 / 2), round(c2 / 2)
    a = count - b - c
    if min(a, b, c) < 0:
        return None
    w = complex(-0.5, math.sqrt(3) / 2)
    if abs(a + b * w + c * w.conjugate() - value) > tol:
        return None
    return a, b, c


def check_fs3(md: ModularData, fusion: FusionTensor | None = None,
              tol: float = DEFAULT_TOL_INT) -> list[IndicatorCheck]:
    fusion = fusion or verlinde_numeric(md)
    nu = fs_numeric(md, 3, fusion)
    out = []
    for k, v in enumerate(nu):
        count = int(fusion.N[k, k, k])
        dec = fs3_decomposition(complex(v), count, tol)
        detail = f"N_kkk={count}, split={dec}" if dec else f"N_kkk={count}, no split"
        out.append(IndicatorCheck(md.labels[k], complex(v), dec is not None, detail))
    return out


def pointed(form: QuadraticForm) -> ModularData:
    if not form.nondegenerate():
        raise PreconditionViolated("pointed data needs a nondegenerate form")
    g = form.group
    labels = tuple(Label("pt", x) for x in g.elements)
    S = np.conj(form.pair_value_matrix()) / math.sqrt(g.size)
    T = tuple(form(x) for x in g.elements)
    gs = gauss_sum(form)
    return ModularData(labels, S, T, tuple(int(v) for v in g.neg_table), gs.value, as_phase(gs),
                       name=f"pointed {form}")


def tensor(a: ModularData, b: ModularData) -> ModularData:
    labels = tuple(Label("prod", parts=(x, y)) for x in a.labels for y in b.labels)
    S = np.kron(a.S, b.S)
    T = tuple(s * t for s in a.T for t in b.T)
    nb = b.rank
    dual = tuple(a.duality[i] * nb + b.duality[j] for i in range(a.rank) for j in range(nb))
    cx = a.c_exact * b.c_exact if a.c_exact is not None and b.c_exact is not None else None
    return ModularData(labels, S, T, dual, complex(a.c) * complex(b.c), cx, name=f"({a.name}) x ({b.name})")


def from_matrices(S, T: Iterable, duality: Iterable[int] | None = None, name: str = "") -> ModularData:
    """Wrap raw matrices with placeholder labels; duality defaults to the one read off S."""
    S = np.asarray(S, dtype=complex)
    n = S.shape[0]
    T = tuple(t if isinstance(t, Phase) else Phase.parse(str(t)) for t in T)
    if duality is None:
        # S_{i, dual j} = conj(S_{ij}) determines the dual column
        duality = []
        for j in range(n):
            hits = [k for k in range(n) if np.max(np.abs(S[:, k] - S[:, j].conj())) < 1e-8]
            if len(hits) != 1:
                raise InvalidArgument(f"cannot read the dual of column {j} from S")
            duality.append(hits[0])
    labels = tuple(Label("raw", (i,)) for i in range(n))
    md = ModularData(labels, S, T, tuple(duality), 0j, name=name)
    return ModularData(labels, S, T, tuple(duality), _c_formula(md), name=name)


def find_label_bijection(a: ModularData, b: ModularData, tol: float = DEFAULT_TOL_REL) -> list[int] | None:
    """perm with b.S[perm[i], perm[j]] == a.S[i, j], matching T values and duality, or None."""
    n = a.rank
    if b.rank != n:
        return None
    order = sorted(range(n), key=lambda i: (i != 0, -abs(a.S[0, i])))
    perm = [-1] * n
    used = [False] * n

    def fits(i: int, x: int) -> bool:
        if used[x] or a.T[i] != b.T[x]:
            return False
        if (i == 0) != (x == 0):
            return False
        if abs(a.S[i, i] - b.S[x, x]) > tol:
            return False
        for j in range(n):
            y = perm[j]
            if y >= 0 and abs(a.S[i, j] - b.S[x, y]) > tol:
                return False
        dj = a.duality[i]
        if perm[dj] >= 0 and b.duality[x] != perm[dj]:
            return False
        return True

    def extend(pos: int) -> bool:
        if pos == n:
            return True
        i = order[pos]
        for x in range(n):
            if fits(i, x):
                perm[i], used[x] = x, True
                if extend(pos + 1):
                    return True
                perm[i], used[x] = -1, False
        return False

    if not extend(0):
        return None
    if any(b.duality[perm[i]] != perm[a.duality[i]] for i in range(n)):
        return None
    return perm
