"""Parameter search, reproduction fixtures and JSON I/O."""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Mapping, NamedTuple, Sequence

import numpy as np

from .abgroup import Group, GroupMap, enumerate_automorphisms
from .errors import (ArtifactError, IntegralityViolation, InvalidArgument, NotFound, ParseError, Rejected,
                     ResourceLimit)
from .exactnum import Phase
from .families import (FAMILIES, AdmissibilityReport, FamilyInput, FamilyInstance, admissibility_report,
                       family_build, family_closed_fs, family_closed_verlinde, family_instance_make)
from .metric import InvolutiveMetricGroup, QuadraticForm, are_isomorphic, as_phase, enumerate_quadratic_forms, gauss_sum
from .moddata import (DEFAULT_TOL_INT, DEFAULT_TOL_REL, ModularData, check_fs2, check_fs3, find_label_bijection,
                      fs_numeric, verify_relations, verlinde_numeric)

__all__ = [
    "MAX_ORDER",
    "CORPUS_VERSION",
    "SearchSpec",
    "SearchHit",
    "search",
    "involutive_classes",
    "Fixture",
    "fixture_names",
    "load_fixture",
    "ReproReport",
    "reproduce",
    "export_json",
    "import_json",
    "default_threads",
]

MAX_ORDER = 64
CORPUS_VERSION = "v1"
THREADS_ENV = "ARTIFACT_THREADS"


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


# ---------------------------------------------------------------- search


@dataclass(frozen=True)
class SearchSpec:
    """Which pairs of involutive metric groups to try for one family.

    ``involution`` is "minus" (theta = -1 only) or "enumerate" (every
    involutive automorphism preserving the form, up to isomorphism).
    """

    family: str
    first_shapes: tuple[tuple[int, ...], ...]
    second_shapes: tuple[tuple[int, ...], ...]
    involution: str = "minus"
    fs_filters: bool = True
    dedup: bool = True
    max_order: int = MAX_ORDER

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidArgument(f"unknown family {self.family!r}")
        if self.involution not in ("minus", "enumerate"):
            raise InvalidArgument("involution must be 'minus' or 'enumerate'")
        if self.max_order > MAX_ORDER:
            raise ResourceLimit(f"order bound {self.max_order} exceeds {MAX_ORDER}")
        shapes = tuple(tuple(int(d) for d in s) for s in self.first_shapes), \
            tuple(tuple(int(d) for d in s) for s in self.second_shapes)
        object.__setattr__(self, "first_shapes", shapes[0])
        object.__setattr__(self, "second_shapes", shapes[1])
        for s in shapes[0] + shapes[1]:
            if any(d < 1 for d in s):
                raise InvalidArgument(f"bad group shape {s}")
            if int(np.prod(s, dtype=np.int64)) > self.max_order:
                raise ResourceLimit(f"group of shape {s} exceeds the order bound {self.max_order}")

    def to_json(self) -> dict:
        return {"family": self.family, "first_shapes": [list(s) for s in self.first_shapes],
                "second_shapes": [list(s) for s in self.second_shapes], "involution": self.involution,
                "fs_filters": self.fs_filters, "dedup": self.dedup, "max_order": self.max_order}

    @classmethod
    def from_json(cls, data: Mapping) -> "SearchSpec":
        try:
            return cls(data["family"], tuple(tuple(s) for s in data["first_shapes"]),
                       tuple(tuple(s) for s in data["second_shapes"]), data.get("involution", "minus"),
                       bool(data.get("fs_filters", True)), bool(data.get("dedup", True)),
                       int(data.get("max_order", MAX_ORDER)))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ArtifactError):
                raise
            raise ParseError(f"malformed search spec: {exc!r}") from None


class SearchHit(NamedTuple):
    instance: FamilyInstance
    report: AdmissibilityReport


def _invariant(img: InvolutiveMetricGroup) -> tuple:
    f = img.form
    vals = tuple(sorted(f.table_over(f.level).tolist()))
    fixed = tuple(sorted(int(f.exps[i]) for i in img.fixed.indices))
    return f.level, vals, fixed, str(as_phase(gauss_sum(f)))


def _dedup(items: list[InvolutiveMetricGroup]) -> list[InvolutiveMetricGroup]:
    buckets: dict = {}
    out = []
    for img in items:
        key = _invariant(img)
        bucket = buckets.setdefault(key, [])
        if any(are_isomorphic(img, other) is not None for other in bucket):
            continue
        bucket.append(img)
        out.append(img)
    return out


def involutive_classes(shape: Sequence[int], involution: str = "minus", dedup: bool = True,
                       max_order: int = MAX_ORDER) -> list[InvolutiveMetricGroup]:
    """Nondegenerate forms on Z_shape with involutions, one per isomorphism class when ``dedup``."""
    g = Group(tuple(shape))
    if g.size > max_order:
        raise ResourceLimit(f"|G| = {g.size} exceeds the bound {max_order}")
    forms = enumerate_quadratic_forms(g, bound=max_order)
    if involution == "minus":
        items = [InvolutiveMetricGroup.minus(f) for f in forms]
    else:
        autos = [GroupMap.identity(g)] + enumerate_automorphisms(g, 2, bound=max_order)
        items = []
        for f in forms:
            for t in autos:
                if np.array_equal(f.exps[t.perm], f.exps):
                    items.append(InvolutiveMetricGroup(f, t))
    return _dedup(items) if dedup else items


def _fs_ok(inst: FamilyInstance) -> bool:
    preds = {}
    for m in (2, 3):
        preds.update(family_closed_fs(inst, m).predicates)
    return all(preds.values())


def _try_pair(family: str, a: InvolutiveMetricGroup, b: InvolutiveMetricGroup, fs: bool):
    rep = admissibility_report(FamilyInput(family, a, b))
    if not rep.ok:
        return None
    try:
        inst = family_instance_make(FamilyInput(family, a, b))
    except (Rejected, ArtifactError):
        return None
    if fs and not _fs_ok(inst):
        return None
    return SearchHit(inst, rep)


def _sort_key(hit: SearchHit) -> str:
    return json.dumps([hit.instance.G.orders, hit.instance.Gamma.orders,
                       hit.instance.first.to_json(), hit.instance.second.to_json()], sort_keys=True)


def search(spec: SearchSpec, threads: int | None = None) -> list[SearchHit]:
    """Admissible pairs for the family (FS-filtered if requested), in canonical order."""
    firsts = [img for s in spec.first_shapes for img in involutive_classes(s, spec.involution, spec.dedup,
                                                                          spec.max_order)]
    seconds = [img for s in spec.second_shapes for img in involutive_classes(s, spec.involution, spec.dedup,
                                                                            spec.max_order)]
    pairs = [(a, b) for a in firsts for b in seconds]
    threads = threads or default_threads()
    run = lambda ab: _try_pair(spec.family, ab[0], ab[1], spec.fs_filters)  # noqa: E731
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            found = list(pool.map(run, pairs))
    else:
        found = [run(p) for p in pairs]
    return sorted((h for h in found if h is not None), key=_sort_key)


# ---------------------------------------------------------------- fixtures


@dataclass(frozen=True)
class Fixture:
    name: str
    mode: str  # exact | numeric-with-permutation | count
    description: str
    payload: Mapping = field(repr=False)

    @classmethod
    def from_json(cls, data: Mapping) -> "Fixture":
        try:
            mode = data["mode"]
            if mode not in ("exact", "numeric-with-permutation", "count"):
                raise ParseError(f"unknown fixture mode {mode!r}")
            return cls(data["name"], mode, data.get("description", ""), data)
        except KeyError as exc:
            raise ParseError(f"fixture lacks {exc}") from None


def _corpus():
    return resources.files("artifact").joinpath("corpus", CORPUS_VERSION)


def fixture_names() -> list[str]:
    return sorted(p.name[:-5] for p in _corpus().iterdir() if p.name.endswith(".json"))


def load_fixture(name: str) -> Fixture:
    path = _corpus().joinpath(f"{name}.json")
    if not path.is_file():
        raise NotFound(f"no fixture named {name!r}; known: {', '.join(fixture_names())}")
    try:
        return Fixture.from_json(json.loads(path.read_text()))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{name}.json line {exc.lineno}: {exc.msg}") from None


@dataclass
class ReproReport:
    name: str
    checks: list[tuple[str, bool, str]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(ok for _, ok, _ in self.checks)

    def add(self, what: str, ok, detail: str = "") -> None:
        self.checks.append((what, bool(ok), detail))

    def summary(self) -> str:
        lines = [f"{self.name}: {'PASS' if self.passed else 'FAIL'}"]
        lines += [f"  [{'ok  ' if ok else 'FAIL'}] {w}{': ' + d if d else ''}" for w, ok, d in self.checks]
        return "\n".join(lines)

    def to_json(self) -> dict:
        return {"name": self.name, "passed": self.passed,
                "checks": [{"check": w, "ok": ok, "detail": d} for w, ok, d in self.checks]}


def _parse_complex(x) -> complex:
    if isinstance(x, str):
        return complex(x.replace("i", "j"))
    re, im = x
    return complex(re, im)


def _full_checks(rep: ReproReport, inst: FamilyInstance, tol_rel: float, tol_int: float) -> ModularData | None:
    try:
        md = family_build(inst, tol_rel)
    except ArtifactError as exc:
        rep.add("relations", False, str(exc))
        return None
    rel = verify_relations(md, tol_rel)
    rep.add("relations", rel.ok, ", ".join(f"{k}={v:.1e}" for k, v in rel.residuals.items()))
    try:
        num = verlinde_numeric(md, tol_int)
    except IntegralityViolation as exc:
        rep.add("Verlinde integrality", False, str(exc))
        return md
    closed = family_closed_verlinde(inst)
    rep.add("closed fusion rules = Verlinde", np.array_equal(closed.N, num.N), f"residual {num.residual:.1e}")
    rep.add("fusion symmetries", not num.symmetry_defect(md.duality))
    worst = max(float(np.max(np.abs(fs_numeric(md, m, num) - family_closed_fs(inst, m).values)))
                for m in (1, 2, 3, 4))
    rep.add("closed indicators = numeric", worst <= tol_int, f"max deviation {worst:.1e}")
    rep.add("FS2", all(c.ok for c in check_fs2(md, num, tol_int)))
    rep.add("FS3", all(c.ok for c in check_fs3(md, num, tol_int)))
    return md


def _run_exact(fx: Fixture, rep: ReproReport, tol_rel: float, tol_int: float) -> None:
    p = fx.payload
    exp = p["expected"]
    inp = FamilyInput.from_json(p["input"])
    adm = admissibility_report(inp)
    rep.add("admissible", adm.ok == exp.get("admissible", True),
            "; ".join(c.name for c in adm.failures()))
    if not adm.ok:
        for name in exp.get("failing", ()):
            rep.add(f"fails '{name}'", any(c.name == name for c in adm.failures()))
        return
    inst = family_instance_make(inp)
    if "rank" in exp:
        rep.add("rank", inst.rank == exp["rank"], f"{inst.rank} (expected {exp['rank']})")
    if "c" in exp:
        rep.add("central charge", str(inst.c) == exp["c"], f"{inst.c}")
    for key, form in (("gauss_first", inst.first.form), ("gauss_second", inst.second.form)):
        if key in exp:
            g = as_phase(gauss_sum(form))
            rep.add(key.replace("_", " "), str(g) == exp[key], f"{g}")
    md = _full_checks(rep, inst, tol_rel, tol_int)
    if md is None:
        return
    closed = family_closed_verlinde(inst).N
    for triple, want in exp.get("fusion", ()):
        idx = tuple(md.index(_label_from_text(md, t)) for t in triple)
        got = int(closed[idx])
        rep.add(f"N[{', '.join(triple)}]", got == want, f"{got} (expected {want})")


def _label_from_text(md: ModularData, text: str):
    for lab in md.labels:
        if str(lab) == text.strip():
            return lab
    raise NotFound(f"no label {text!r} in {[str(l) for l in md.labels]}")


def _run_matrix(fx: Fixture, rep: ReproReport, tol_rel: float, tol_int: float) -> None:
    p = fx.payload
    targets = [(t["name"], np.array([[_parse_complex(z) for z in row] for row in t["S"]]),
                tuple(Phase.parse(x) for x in t["T"])) for t in p["expected"]["choices"]]
    for entry in p["inputs"]:
        inst = family_instance_make(FamilyInput.from_json(entry))
        md = _full_checks(rep, inst, tol_rel, tol_int)
        if md is None:
            continue
        matched = []
        for name, S, T in targets:
            other = ModularData(md.labels, S, T, _duality_from_S(S), md.c, md.c_exact)
            if find_label_bijection(md, other, tol_rel) is not None:
                matched.append(name)
        rep.add(f"{inst.first.form} / {inst.second.form} matches exactly one sign choice",
                len(matched) == 1, f"matched {matched}")


def _duality_from_S(S: np.ndarray) -> tuple[int, ...]:
    """C = S^2 for unitary symmetric S."""
    C = np.rint((S @ S).real).astype(int)
    return tuple(int(np.argmax(C[i])) for i in range(len(S)))


def _run_count(fx: Fixture, rep: ReproReport) -> None:
    p = fx.payload
    spec = SearchSpec.from_json(p["search"])
    hits = search(spec)
    exp = p["expected"]
    rep.add("solutions", len(hits) == exp["count"], f"{len(hits)} (expected {exp['count']})")
    if "gauss_first" in exp:
        got = sorted({str(as_phase(gauss_sum(h.instance.first.form))) for h in hits})
        rep.add("Gauss sums of first form", got == sorted(exp["gauss_first"]), f"{got}")
    if "gauss_second" in exp:
        got = sorted(str(as_phase(gauss_sum(h.instance.second.form))) for h in hits)
        rep.add("Gauss sums of second form", got == sorted(exp["gauss_second"]), f"{got}")
    if "second_shapes" in exp:
        got = sorted(str(list(h.instance.Gamma.orders)) for h in hits)
        rep.add("second groups", got == sorted(str(s) for s in exp["second_shapes"]), f"{got}")
    if "unfiltered_count" in exp:
        loose = search(SearchSpec(spec.family, spec.first_shapes, spec.second_shapes, spec.involution,
                                  False, spec.dedup, spec.max_order))
        rep.add("admissible before indicator filters", len(loose) == exp["unfiltered_count"], f"{len(loose)}")


def reproduce(name: str, tol_rel: float = DEFAULT_TOL_REL, tol_int: float = DEFAULT_TOL_INT) -> ReproReport:
    fx = load_fixture(name)
    rep = ReproReport(name)
    if fx.mode == "exact":
        _run_exact(fx, rep, tol_rel, tol_int)
    elif fx.mode == "numeric-with-permutation":
        _run_matrix(fx, rep, tol_rel, tol_int)
    else:
        _run_count(fx, rep)
    return rep


# ---------------------------------------------------------------- JSON I/O


def export_json(md: ModularData, path: str | os.PathLike) -> None:
    Path(path).write_text(json.dumps(md.to_json(), indent=1) + "\n")


def import_json(path: str | os.PathLike, tol: float = DEFAULT_TOL_REL) -> ModularData:
    """Read modular data and reject it unless the modular relations hold."""
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror}") from None
    md = ModularData.from_json(data)
    rel = verify_relations(md, tol)
    if not rel.ok:
        raise ParseError(f"{path}: data fails {', '.join(rel.failures())}")
    return md
