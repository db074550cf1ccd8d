"""Discriminants, binary quadratic forms, class numbers, Kronecker symbols.

Discriminants of imaginary quadratic orders are negative integers congruent
to 0 or 1 mod 4, written Delta = f^2 * Delta_K with conductor f and
fundamental discriminant Delta_K.  Primitive reduced forms (a, b, c) of
discriminant Delta give one representative per class of the form class
group, so class numbers fall out of plain enumeration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import gmpy2

from . import intarith


def is_discriminant(n: int) -> bool:
    """True iff n is the discriminant of an imaginary quadratic order."""
    return n < 0 and n % 4 in (0, 1)


def is_fundamental_discriminant(d: int) -> bool:
    """Fundamental: d = 1 mod 4 squarefree, or d = 4m with m squarefree, m = 2,3 mod 4."""
    if not is_discriminant(d):
        return False
    if d % 4 == 1:
        return _squarefree(-d)
    m = d // 4
    return m % 4 in (2, 3) and _squarefree(-m)


def _squarefree(n: int) -> bool:
    return all(e == 1 for e in intarith.factor(n).factors.values())


def decompose(delta: int) -> tuple[int, int]:
    """Split delta = f^2 * delta_K with delta_K fundamental; returns (f, delta_K)."""
    if not is_discriminant(delta):
        raise ValueError(f"{delta} is not a discriminant")
    f = 1
    for p, e in intarith.factor(-delta).factors.items():
        f *= p ** (e // 2)
    m = delta // (f * f)
    if m % 4 != 1:
        # m = 2,3 mod 4: the fundamental part is 4m and f was even
        f //= 2
        m *= 4
    return f, m


@dataclass(frozen=True)
class Discriminant:
    """A discriminant together with its conductor/fundamental split."""

    value: int
    conductor: int
    fundamental: int

    @classmethod
    def of(cls, value: int) -> "Discriminant":
        f, dk = decompose(value)
        return cls(value, f, dk)

    def __int__(self) -> int:
        return self.value


class QuadForm(NamedTuple):
    """Integral binary quadratic form a*x^2 + b*x*y + c*y^2."""

    a: int
    b: int
    c: int

    @property
    def discriminant(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    @property
    def is_reduced(self) -> bool:
        a, b, c = self
        if not (abs(b) <= a <= c):
            return False
        if (abs(b) == a or a == c) and b < 0:
            return False
        return True


def reduced_forms(delta: int) -> list[QuadForm]:
    """All primitive reduced forms of discriminant delta, sorted by (a, b, c).

    Enumeration: a <= sqrt(|delta|/3) by reduction theory; for each a, pick
    the b of the right parity with b^2 = delta mod 4a and |b| <= a, and keep
    c = (b^2 - delta)/(4a) >= a with gcd(a, b, c) = 1.
    """
    if not is_discriminant(delta):
        raise ValueError(f"{delta} is not a discriminant")
    forms = []
    for a in range(1, math.isqrt(-delta // 3) + 1):
        for b in range(delta & 1, a + 1, 2):
            t = b * b - delta
            if t % (4 * a):
                continue
            c = t // (4 * a)
            if c < a:
                continue
            if math.gcd(math.gcd(a, b), c) != 1:
                continue
            forms.append(QuadForm(a, b, c))
            if 0 < b < a < c:
                forms.append(QuadForm(a, -b, c))
    forms.sort()
    return forms


def class_number(delta: int) -> int:
    """Class number of the order of discriminant delta."""
    return len(reduced_forms(delta))


def kronecker(D: int, p: int) -> int:
    """Kronecker symbol (D/p); 0 iff p divides D."""
    return int(gmpy2.kronecker(D, p))
