"""Ternary quadratic forms of Gross lattices: representation tests, the
valuation caps they imply for norms of j - j0, and witness discriminants
whose norms attain those caps.

The forms handled here come from quaternionic orders attached to the
supersingular reduction of CM curves.  For a base discriminant Delta0 prime
to ell and a depth n >= 0 the lattice form is

    Q(X,Y,Z) = |Delta0| X^2 + 4 ell^(2n+1) Y^2
               + ell^(2n+1) (Delta0^2 + |Delta0|) Z^2 + 4 ell^(2n+1) Delta0 YZ,

and for the j0 = 0 order (ell = 2 mod 3, ell >= 5)

    Q(X,Y,Z) = 3 X^2 + ell^(2n) (4 ell + 1)/3 Y^2 + 4 ell^(2n+1) Z^2
               + 2 ell^n XY - 4 ell^(2n+1) YZ.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .intarith import is_probable_prime, valuation
from .modfun import norm_difference
from .quadclass import decompose, is_discriminant


class CaseUndefined(ValueError):
    """The requested valuation cap is outside the covered case split."""


@dataclass(frozen=True)
class TernaryForm:
    """Q(X,Y,Z) = q11 X^2 + q22 Y^2 + q33 Z^2 + q12 XY + q13 XZ + q23 YZ.

    Coefficients are integers or half-integers; the form must be positive
    definite.
    """

    q11: Fraction
    q22: Fraction
    q33: Fraction
    q12: Fraction
    q13: Fraction
    q23: Fraction

    @classmethod
    def of(cls, q11, q22, q33, q12, q13, q23) -> "TernaryForm":
        vals = [Fraction(q) for q in (q11, q22, q33, q12, q13, q23)]
        if any(v.denominator > 2 for v in vals):
            raise ValueError("coefficients must be integers or half-integers")
        return cls(*vals)

    def __call__(self, x: int, y: int, z: int):
        v = (
            self.q11 * x * x
            + self.q22 * y * y
            + self.q33 * z * z
            + self.q12 * x * y
            + self.q13 * x * z
            + self.q23 * y * z
        )
        return int(v) if v.denominator == 1 else v

    def gram(self) -> list[list[Fraction]]:
        return [
            [self.q11, self.q12 / 2, self.q13 / 2],
            [self.q12 / 2, self.q22, self.q23 / 2],
            [self.q13 / 2, self.q23 / 2, self.q33],
        ]

    @property
    def is_positive_definite(self) -> bool:
        g = self.gram()
        m1 = g[0][0]
        m2 = g[0][0] * g[1][1] - g[0][1] * g[1][0]
        m3 = (
            g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1])
            - g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0])
            + g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0])
        )
        return m1 > 0 and m2 > 0 and m3 > 0


def gross_form(delta0: int, ell: int, n: int) -> TernaryForm:
    """Lattice form at depth n for base discriminant delta0, ell prime to delta0."""
    if not is_discriminant(delta0):
        raise ValueError(f"{delta0} is not a discriminant")
    if delta0 % ell == 0:
        raise ValueError("ell must not divide delta0")
    if n < 0:
        raise ValueError("depth n must be >= 0")
    a = -delta0
    lp = ell ** (2 * n + 1)
    return TernaryForm.of(a, 4 * lp, lp * (delta0 * delta0 + a), 0, 0, 4 * lp * delta0)


def gross_form_j0(ell: int, n: int) -> TernaryForm:
    """Lattice form at depth n for the j0 = 0 order; needs ell >= 5, ell = 2 mod 3."""
    if ell < 5 or ell % 3 != 2 or not is_probable_prime(ell):
        raise ValueError("ell must be a prime >= 5 congruent to 2 mod 3")
    if n < 0:
        raise ValueError("depth n must be >= 0")
    if (4 * ell + 1) % 3:
        raise ValueError("(4*ell + 1)/3 is not integral")
    ln = ell**n
    lp = ell ** (2 * n + 1)
    return TernaryForm.of(3, ln * ln * (4 * ell + 1) // 3, 4 * lp, 2 * ln, 0, -4 * lp)


def _axis_bounds(Q: TernaryForm, m: int) -> list[int]:
    # x_i^2 <= m * (G^-1)_ii for any point with Q <= m
    g = Q.gram()
    det = (
        g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1])
        - g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0])
        + g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0])
    )
    bounds = []
    for i in range(3):
        j, k = [t for t in range(3) if t != i]
        cof = g[j][j] * g[k][k] - g[j][k] * g[k][j]
        lim = Fraction(m) * cof / det
        bounds.append(math.isqrt(int(lim)))
    return bounds


def represents(Q: TernaryForm, m: int, primitive: bool = False) -> Optional[tuple[int, int, int]]:
    """A triple with Q(x,y,z) = m (gcd 1 if primitive), or None.

    The search is exhaustive over the ellipsoid Q <= m: x and y run over
    their exact axis bounds and z is solved from the remaining quadratic.
    Among all solutions the canonical one is returned: smallest max |coord|,
    then smallest absolute triple, preferring nonnegative entries.
    """
    if not Q.is_positive_definite:
        raise ValueError("form is not positive definite")
    if m <= 0:
        raise ValueError("m must be positive")
    # clear denominators: work with the integer form 2*Q
    s11, s22, s33, s12, s13, s23 = (int(2 * q) for q in
                                    (Q.q11, Q.q22, Q.q33, Q.q12, Q.q13, Q.q23))
    xb, yb, _ = _axis_bounds(Q, m)
    sols = []
    for x in range(-xb, xb + 1):
        for y in range(-yb, yb + 1):
            # (2Q)(x,y,z) = 2m as a quadratic in z
            A = s33
            B = s13 * x + s23 * y
            C = s11 * x * x + s22 * y * y + s12 * x * y - 2 * m
            disc = B * B - 4 * A * C
            if disc < 0:
                continue
            r = math.isqrt(disc)
            if r * r != disc:
                continue
            for sign in ((r, -r) if r else (r,)):
                num = -B + sign
                if num % (2 * A):
                    continue
                z = num // (2 * A)
                if primitive and math.gcd(math.gcd(abs(x), abs(y)), abs(z)) != 1:
                    continue
                sols.append((x, y, z))
    if not sols:
        return None
    key = lambda v: (max(abs(t) for t in v),
                     tuple(abs(t) for t in v),
                     tuple(t < 0 for t in v))
    return min(sols, key=key)


@dataclass(frozen=True)
class ValuationBoundQuery:
    """Inputs of the valuation cap: base delta0, target delta, prime ell,
    and the automorphism count d0 of the reduced base curve (2, 4 or 6)."""

    delta0: int
    delta: int
    ell: int
    d0: int

    def validate(self) -> None:
        if self.delta0 % self.ell == 0:
            raise ValueError("ell must not divide delta0")
        if self.delta == self.delta0:
            raise ValueError("delta must differ from delta0")
        if self.d0 not in (2, 4, 6):
            raise ValueError("d0 must be one of 2, 4, 6")


def order_contains(delta0: int, delta: int) -> bool:
    """True iff O_{delta0} is a subring of O_{delta}.

    Containment criterion for quadratic orders in one field: same
    fundamental discriminant, and the conductor of the larger order divides
    the conductor of the smaller (here conductor(delta) | conductor(delta0)).
    """
    f0, dk0 = decompose(delta0)
    f, dk = decompose(delta)
    return dk0 == dk and f0 % f == 0


def valuation_bound(q: ValuationBoundQuery) -> float:
    """Cap on the valuation of j - j0 at a prime above ell.

    (d0/2) * (log(delta0^2 |delta|) / (2 log ell) + 1/2) when ell does not
    divide delta (and O_{delta0} is not contained in O_{delta}); d0/2 when
    ell divides delta.
    """
    q.validate()
    if q.delta % q.ell == 0:
        return q.d0 / 2
    if order_contains(q.delta0, q.delta):
        raise CaseUndefined("base order contained in target order: cap not defined")
    log_term = math.log(q.delta0 * q.delta0 * abs(q.delta)) / (2 * math.log(q.ell))
    return (q.d0 / 2) * (log_term + 0.5)


def witness_discriminant(ell: int, n: int) -> int:
    """D = -(3 + 4 ell^(2n+1)); the depth-n form represents |D| at (1,0,1)."""
    Q = gross_form_j0(ell, n)  # validates ell, n
    D = -Q(1, 0, 1)
    assert D % 4 == 1 and D % ell != 0
    return D


@dataclass(frozen=True)
class WitnessReport:
    ell: int
    n: int
    discriminant: int
    predicted: int
    observed: int

    @property
    def passed(self) -> bool:
        return self.observed >= self.predicted


def verify_witness(ell: int, n: int) -> WitnessReport:
    """Check that v_ell(|norm of j|) >= 3(n+1) at the witness discriminant.

    The ell-valuation is taken by repeated exact division of the norm of the
    singular moduli (never by full factorization).
    """
    D = witness_discriminant(ell, n)
    N = norm_difference(D, 0)
    observed = valuation(N, ell)
    return WitnessReport(ell, n, D, 3 * (n + 1), observed)
