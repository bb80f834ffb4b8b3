"""Exact arithmetic for sums of square roots of rationals.

Angular-momentum coefficients are signed square roots of rationals, and
contracting networks of them produces sums of such terms.  A ``Radical``
keeps those sums exact as a map from squarefree integers r to rational
coefficients, representing sum(q_r * sqrt(r)); the squarefree keys never
interact under addition, so equality, rationality, and conversion back to
``Fraction`` are all decidable without floating point.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational


def sqrt_decompose(n: int) -> tuple[int, int]:
    """Write n = s**2 * r with r squarefree; return (s, r)."""
    if n < 0:
        raise ValueError("negative argument has no real square root")
    if n == 0:
        return 0, 1
    s, r = 1, 1
    d = 2
    while d * d <= n:
        if n % d == 0:
            power = 0
            while n % d == 0:
                n //= d
                power += 1
            s *= d ** (power // 2)
            if power % 2:
                r *= d
        d += 1 if d == 2 else 2
    return s, r * n


class Radical:
    """An exact sum of rational multiples of square roots of integers."""

    __slots__ = ("_terms",)

    def __init__(self, value: Rational | Radical = 0):
        if isinstance(value, Radical):
            self._terms = dict(value._terms)
        else:
            q = Fraction(value)
            self._terms = {1: q} if q else {}

    @classmethod
    def _from_terms(cls, terms: dict[int, Fraction]) -> Radical:
        out = cls.__new__(cls)
        out._terms = {r: q for r, q in terms.items() if q}
        return out

    @classmethod
    def sqrt(cls, value: Rational) -> Radical:
        """Exact square root of a nonnegative rational."""
        q = Fraction(value)
        if q < 0:
            raise ValueError("negative argument has no real square root")
        # sqrt(p/d) = sqrt(p*d)/d
        s, r = sqrt_decompose(q.numerator * q.denominator)
        return cls._from_terms({r: Fraction(s, q.denominator)})

    # -- ring operations --------------------------------------------------

    def __add__(self, other) -> Radical:
        other = other if isinstance(other, Radical) else Radical(other)
        terms = dict(self._terms)
        for r, q in other._terms.items():
            terms[r] = terms.get(r, Fraction(0)) + q
        return Radical._from_terms(terms)

    __radd__ = __add__

    def __neg__(self) -> Radical:
        return Radical._from_terms({r: -q for r, q in self._terms.items()})

    def __sub__(self, other) -> Radical:
        return self + (-(other if isinstance(other, Radical) else Radical(other)))

    def __rsub__(self, other) -> Radical:
        return Radical(other) + (-self)

    def __mul__(self, other) -> Radical:
        other = other if isinstance(other, Radical) else Radical(other)
        terms: dict[int, Fraction] = {}
        for r1, q1 in self._terms.items():
            for r2, q2 in other._terms.items():
                # sqrt(r1)*sqrt(r2) = g*sqrt(r1*r2/g^2) with g = gcd(r1,r2)
                g = math.gcd(r1, r2)
                r = (r1 // g) * (r2 // g)
                q = q1 * q2 * g
                terms[r] = terms.get(r, Fraction(0)) + q
        return Radical._from_terms(terms)

    __rmul__ = __mul__

    def __truediv__(self, other) -> Radical:
        other = other if isinstance(other, Radical) else Radical(other)
        if len(other._terms) != 1:
            raise ZeroDivisionError("division only by a single-term radical") \
                if not other._terms else ValueError(
                    "division by a multi-term radical is not supported")
        ((r, q),) = other._terms.items()
        # 1/(q*sqrt(r)) = sqrt(r)/(q*r)
        return self * Radical._from_terms({r: Fraction(1, 1) / (q * r)})

    # -- inspection --------------------------------------------------------

    def is_zero(self) -> bool:
        return not self._terms

    def is_rational(self) -> bool:
        return all(r == 1 for r in self._terms)

    def as_fraction(self) -> Fraction:
        if not self._terms:
            return Fraction(0)
        if not self.is_rational():
            raise ValueError(f"{self} is irrational")
        return self._terms[1]

    def __float__(self) -> float:
        return float(sum(float(q) * math.sqrt(r) for r, q in self._terms.items()))

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __eq__(self, other) -> bool:
        if isinstance(other, Radical):
            return self._terms == other._terms
        if isinstance(other, Rational):
            return self._terms == Radical(other)._terms
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def __repr__(self) -> str:
        if not self._terms:
            return "Radical(0)"
        parts = []
        for r in sorted(self._terms):
            q = self._terms[r]
            parts.append(str(q) if r == 1 else f"{q}*sqrt({r})")
        return f"Radical({' + '.join(parts)})"
