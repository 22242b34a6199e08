"""Exact arithmetic on roots of unity and rational combinations of them.

A :class:`Phase` is ``exp(2*pi*i*num/den)`` kept as a reduced fraction in
``[0, 1)``.  A :class:`PhaseSum` is a finite rational combination of phases;
zero testing lifts everything to a common conductor ``N`` and reduces the
resulting polynomial modulo the ``N``-th cyclotomic polynomial.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache, reduce
from numbers import Rational
from typing import Iterable, Mapping

from .errors import InvalidArgument, ParseError

__all__ = [
    "Phase",
    "PhaseSum",
    "RationalPolynomial",
    "phase_make",
    "phase_eval",
    "cyclotomic_polynomial",
    "phasesum_is_zero",
    "phasesum_as_rational",
    "jacobi_symbol",
    "zeta",
]


@dataclass(frozen=True, order=True)
class Phase:
    """The root of unity exp(2*pi*i*num/den), normalized so 0 <= num < den."""

    num: int
    den: int

    def __post_init__(self):
        if not isinstance(self.num, int) or not isinstance(self.den, int):
            raise InvalidArgument("phase exponent must be integral")
        if self.den <= 0:
            raise InvalidArgument(f"phase denominator must be positive, got {self.den}")
        n = self.num % self.den
        g = math.gcd(n, self.den)
        object.__setattr__(self, "num", n // g)
        object.__setattr__(self, "den", self.den // g)

    @classmethod
    def from_fraction(cls, x) -> "Phase":
        x = Fraction(x)
        return cls(x.numerator, x.denominator)

    @classmethod
    def parse(cls, text: str) -> "Phase":
        try:
            if "/" in text:
                a, b = text.split("/")
                return cls(int(a), int(b))
            return cls(int(text), 1)
        except (ValueError, InvalidArgument) as exc:
            raise ParseError(f"bad phase {text!r}: {exc}") from None

    @property
    def exponent(self) -> Fraction:
        return Fraction(self.num, self.den)

    @property
    def order(self) -> int:
        return self.den

    def value(self) -> complex:
        if self.den <= 8 and (8 % self.den == 0):
            # exact values for the eighth roots keep rounding noise out of the matrices
            return _EIGHTH[(self.num * (8 // self.den)) % 8]
        return cmath.exp(2j * math.pi * self.num / self.den)

    __complex__ = value

    def __mul__(self, other):
        if isinstance(other, Phase):
            return Phase.from_fraction(self.exponent + other.exponent)
        if isinstance(other, PhaseSum):
            return PhaseSum({self: Fraction(1)}) * other
        if isinstance(other, (int, Fraction)):
            return PhaseSum({self: Fraction(other)})
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return PhaseSum({self: Fraction(other)})
        return NotImplemented

    def __truediv__(self, other: "Phase") -> "Phase":
        if not isinstance(other, Phase):
            return NotImplemented
        return Phase.from_fraction(self.exponent - other.exponent)

    def __pow__(self, k: int) -> "Phase":
        return Phase.from_fraction(self.exponent * k)

    def __neg__(self) -> "Phase":
        return Phase.from_fraction(self.exponent + Fraction(1, 2))

    def inverse(self) -> "Phase":
        return Phase.from_fraction(-self.exponent)

    conjugate = inverse

    def is_one(self) -> bool:
        return self.num == 0

    def __str__(self):
        return f"{self.num}/{self.den}"

    def __repr__(self):
        return f"Phase({self.num}/{self.den})"


_S = math.sqrt(0.5)
_EIGHTH = (1 + 0j, complex(_S, _S), 1j, complex(-_S, _S), -1 + 0j,
           complex(-_S, -_S), -1j, complex(_S, -_S))

ONE = Phase(0, 1)


def phase_make(num: int, den: int) -> Phase:
    if den == 0:
        raise InvalidArgument("den must be nonzero")
    return Phase(num, den)


def phase_eval(p: Phase) -> complex:
    return p.value()


def zeta(n: int, k: int = 1) -> Phase:
    """The phase zeta_n^k."""
    return Phase(k, n)


class RationalPolynomial:
    """Polynomial with rational coefficients, lowest degree first."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        cs = [Fraction(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs = tuple(cs)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def __eq__(self, other):
        if isinstance(other, RationalPolynomial):
            return self.coeffs == other.coeffs
        return NotImplemented

    def __hash__(self):
        return hash(self.coeffs)

    def __add__(self, other: "RationalPolynomial") -> "RationalPolynomial":
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (Fraction(0),) * (n - len(self.coeffs))
        b = other.coeffs + (Fraction(0),) * (n - len(other.coeffs))
        return RationalPolynomial(x + y for x, y in zip(a, b))

    def __neg__(self):
        return RationalPolynomial(-c for c in self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other: "RationalPolynomial") -> "RationalPolynomial":
        if self.is_zero() or other.is_zero():
            return RationalPolynomial()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return RationalPolynomial(out)

    def divmod(self, divisor: "RationalPolynomial"):
        if divisor.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dd = divisor.degree
        lead = divisor.coeffs[-1]
        quot = [Fraction(0)] * max(len(rem) - dd, 0)
        for k in range(len(rem) - 1, dd - 1, -1):
            c = rem[k]
            if c:
                q = c / lead
                quot[k - dd] = q
                for j, d in enumerate(divisor.coeffs):
                    rem[k - dd + j] -= q * d
        return RationalPolynomial(quot), RationalPolynomial(rem[:dd])

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __repr__(self):
        return f"RationalPolynomial({[str(c) for c in self.coeffs]})"


@lru_cache(maxsize=None)
def cyclotomic_polynomial(n: int) -> RationalPolynomial:
    """Phi_n, obtained by dividing x^n - 1 by Phi_d for the proper divisors d."""
    if n < 1:
        raise InvalidArgument("n must be positive")
    poly = RationalPolynomial([-1] + [0] * (n - 1) + [1])
    for d in range(1, n):
        if n % d == 0:
            poly, rem = poly.divmod(cyclotomic_polynomial(d))
            assert rem.is_zero()
    return poly


@lru_cache(maxsize=None)
def _cyclotomic_ints(n: int) -> tuple[int, ...]:
    return tuple(int(c) for c in cyclotomic_polynomial(n).coeffs)


def _lcm(values: Iterable[int]) -> int:
    return reduce(lambda a, b: a * b // math.gcd(a, b), values, 1)


def _reduce_mod_cyclotomic(terms: Mapping[Phase, Fraction]) -> tuple[int, list[int], int]:
    """Return (N, integer remainder coefficients, common denominator).

    The represented number is ``sum(rem[k] * zeta_N**k) / scale``.
    """
    if not terms:
        return 1, [], 1
    n = _lcm(p.den for p in terms)
    scale = _lcm(c.denominator for c in terms.values())
    coeffs = [0] * n
    for p, c in terms.items():
        coeffs[p.num * (n // p.den)] += int(c * scale)
    phi = _cyclotomic_ints(n)
    deg = len(phi) - 1
    for k in range(n - 1, deg - 1, -1):
        c = coeffs[k]
        if c:
            # phi is monic, so integer coefficients stay integral
            base = k - deg
            for j in range(deg + 1):
                coeffs[base + j] -= c * phi[j]
    return n, coeffs[:deg], scale


class PhaseSum:
    """A finite rational linear combination of roots of unity."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Phase, object] | None = None):
        clean: dict[Phase, Fraction] = {}
        for p, c in (terms or {}).items():
            c = Fraction(c)
            if c:
                clean[p] = clean.get(p, Fraction(0)) + c
                if not clean[p]:
                    del clean[p]
        self.terms = clean

    @classmethod
    def of(cls, p: Phase, coeff=1) -> "PhaseSum":
        return cls({p: coeff})

    @classmethod
    def rational(cls, r) -> "PhaseSum":
        return cls({ONE: r})

    @classmethod
    def total(cls, items: Iterable) -> "PhaseSum":
        acc: dict[Phase, Fraction] = {}
        for it in items:
            for p, c in _as_sum(it).terms.items():
                acc[p] = acc.get(p, Fraction(0)) + c
        return cls(acc)

    def _combine(self, other, sign):
        other = _as_sum(other)
        acc = dict(self.terms)
        for p, c in other.terms.items():
            acc[p] = acc.get(p, Fraction(0)) + sign * c
        return PhaseSum(acc)

    def __add__(self, other):
        return self._combine(other, 1)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, -1)

    def __rsub__(self, other):
        return _as_sum(other) - self

    def __neg__(self):
        return PhaseSum({p: -c for p, c in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return PhaseSum({p: c * other for p, c in self.terms.items()})
        if isinstance(other, Phase):
            return PhaseSum({p * other: c for p, c in self.terms.items()})
        if isinstance(other, PhaseSum):
            acc: dict[Phase, Fraction] = {}
            for p, c in self.terms.items():
                for q, d in other.terms.items():
                    r = p * q
                    acc[r] = acc.get(r, Fraction(0)) + c * d
            return PhaseSum(acc)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * (Fraction(1) / Fraction(other))
        if isinstance(other, Phase):
            return self * other.inverse()
        return NotImplemented

    def conjugate(self) -> "PhaseSum":
        return PhaseSum({p.inverse(): c for p, c in self.terms.items()})

    def value(self) -> complex:
        return sum((float(c) * p.value() for p, c in self.terms.items()), 0j)

    __complex__ = value

    def is_zero(self) -> bool:
        _, rem, _ = _reduce_mod_cyclotomic(self.terms)
        return not any(rem)

    def as_rational(self) -> Fraction | None:
        _, rem, scale = _reduce_mod_cyclotomic(self.terms)
        if any(rem[1:]):
            return None
        return Fraction(rem[0] if rem else 0, scale)

    def __eq__(self, other):
        try:
            other = _as_sum(other)
        except TypeError:
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None  # equality is algebraic, so no cheap consistent hash

    def __bool__(self):
        return not self.is_zero()

    def to_json(self) -> list[dict]:
        return [{"phase": str(p), "coeff": str(c)} for p, c in sorted(self.terms.items())]

    @classmethod
    def from_json(cls, data) -> "PhaseSum":
        try:
            return cls({Phase.parse(t["phase"]): Fraction(t["coeff"]) for t in data})
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad phase sum: {exc}") from None

    def __repr__(self):
        inner = " + ".join(f"{c}*[{p}]" for p, c in sorted(self.terms.items()))
        return f"PhaseSum({inner or '0'})"


def _as_sum(x) -> PhaseSum:
    if isinstance(x, PhaseSum):
        return x
    if isinstance(x, Phase):
        return PhaseSum.of(x)
    if isinstance(x, (int, Rational)):
        return PhaseSum.rational(Fraction(x))
    raise TypeError(f"cannot interpret {type(x).__name__} as a phase sum")


def phasesum_is_zero(s: PhaseSum) -> bool:
    return s.is_zero()


def phasesum_as_rational(s: PhaseSum) -> Fraction | None:
    return s.as_rational()


def jacobi_symbol(a: int, n: int) -> int:
    """The Jacobi symbol (a/n) for odd positive n."""
    if n <= 0 or n % 2 == 0:
        raise InvalidArgument(f"Jacobi symbol needs odd positive n, got {n}")
    a %= n
    result = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0
