"""Exact integer arithmetic: factoring, valuations, polynomials over Z and F_ell.

Everything here is deterministic.  The Pollard rho stage is seeded from its
input, so repeated runs (and parallel workers) factor the same number the
same way.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import gmpy2
from gmpy2 import mpz

# Miller-Rabin with these bases is a proven primality test below 3.317e24;
# above that it is a strong probable-prime test.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)

_sieve_limit = 0
_sieve_primes: list[int] = []


def primes_up_to(limit: int) -> list[int]:
    """Primes <= limit, cached and grown on demand."""
    global _sieve_limit, _sieve_primes
    if limit <= _sieve_limit:
        i = len(_sieve_primes)
        # bisect would do; the tail is short in practice
        while i > 0 and _sieve_primes[i - 1] > limit:
            i -= 1
        return _sieve_primes[:i]
    n = max(limit, 2 * _sieve_limit, 1 << 16)
    sieve = bytearray(b"\x01") * (n + 1)
    sieve[:2] = b"\x00\x00"
    for p in range(2, math.isqrt(n) + 1):
        if sieve[p]:
            start = p * p
            sieve[start : n + 1 : p] = b"\x00" * ((n - start) // p + 1)
    _sieve_primes = [i for i, v in enumerate(sieve) if v]
    _sieve_limit = n
    return [p for p in _sieve_primes if p <= limit]


def is_probable_prime(n: int) -> bool:
    """Strong probable-prime test (deterministic below 3.317e24)."""
    n = int(n)
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d = n - 1
    s = (d & -d).bit_length() - 1
    d >>= s
    nz = mpz(n)
    for a in _MR_BASES:
        x = gmpy2.powmod(a, d, nz)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % nz
            if x == n - 1:
                break
        else:
            return False
    return True


def _rho_seed(n: int, seed: Optional[int]) -> int:
    # derive a reproducible starting state from the input itself
    if seed is not None:
        return seed & 0xFFFFFFFF
    return (abs(n) * 0x9E3779B97F4A7C15 + 0x12345) % ((1 << 32) - 5)


def pollard_rho(n: int, budget: int = 200_000, seed: Optional[int] = None) -> Optional[int]:
    """Brent-cycle Pollard rho; returns a nontrivial factor of composite n or None.

    The walk parameters are derived deterministically from n (or from an
    explicit seed), and candidates are retried with shifted constants within
    the same overall iteration budget.
    """
    n = int(n)
    if n % 2 == 0:
        return 2
    if n % 3 == 0:
        return 3
    nz = mpz(n)
    mask = (1 << 64) - 1
    state = _rho_seed(n, seed)
    spent = 0
    m = 128
    while spent < budget:
        state = (state * 6364136223846793005 + 1442695040888963407) & mask
        c = state % (n - 3) + 1
        y = mpz(((state * 0x9E3779B97F4A7C15) & mask) % (n - 2) + 2)
        r, q, g = 1, mpz(1), mpz(1)
        x = ys = y
        while g == 1 and spent < budget:
            x = y
            for _ in range(r):
                y = (y * y + c) % nz
            spent += r
            k = 0
            while k < r and g == 1:
                ys = y
                steps = min(m, r - k)
                for _ in range(steps):
                    y = (y * y + c) % nz
                    q = q * abs(x - y) % nz
                spent += steps
                g = gmpy2.gcd(q, nz)
                k += steps
            r *= 2
        if g == n:
            # the batch overshot a factor; redo the last segment one gcd at a time
            g = mpz(1)
            while g == 1:
                ys = (ys * ys + c) % nz
                g = gmpy2.gcd(abs(x - ys), nz)
        if 1 < g < n:
            return int(g)
    return None


@dataclass
class Factorization:
    """sign * prod(p^e) * cofactor == the factored integer, exactly.

    Every key of ``factors`` passes a strong probable-prime test; the
    cofactor is 1 when the factorization is complete, otherwise a composite
    remnant that exceeded the factoring budget.
    """

    sign: int
    factors: dict[int, int] = field(default_factory=dict)
    cofactor: int = 1

    @property
    def complete(self) -> bool:
        return self.cofactor == 1

    @property
    def distinct_primes(self) -> list[int]:
        return sorted(self.factors)

    def reconstruct(self) -> int:
        n = mpz(self.sign) * self.cofactor
        for p, e in self.factors.items():
            n *= mpz(p) ** e
        return int(n)

    def valuation(self, p: int) -> int:
        return self.factors.get(p, 0)

    def __str__(self) -> str:
        return format_factorization(self)


def format_factorization(f: Factorization) -> str:
    """Render as e.g. '-2^15', '3^6*7', '1'; incomplete cofactor marked 'C...'."""
    parts = []
    for p in sorted(f.factors):
        e = f.factors[p]
        parts.append(f"{p}^{e}" if e > 1 else f"{p}")
    if not f.complete:
        parts.append(f"C{f.cofactor}")
    body = "*".join(parts) if parts else "1"
    return ("-" if f.sign < 0 else "") + body


def factor(
    n: int,
    trial_limit: int = 1_000_000,
    rho_budget: int = 200_000,
    seed: Optional[int] = None,
) -> Factorization:
    """Factor n by trial division, probable-prime tests and Pollard rho.

    Raises ValueError on n == 0.  A cofactor that survives the budget is
    returned composite and flagged rather than silently dropped.
    """
    n = int(n)
    if n == 0:
        raise ValueError("cannot factor 0")
    sign = -1 if n < 0 else 1
    m = mpz(abs(n))
    out: dict[int, int] = {}
    if m == 1:
        return Factorization(sign, out, 1)
    for p in primes_up_to(trial_limit):
        if p * p > m:
            break
        if m % p == 0:
            m, e = gmpy2.remove(m, p)
            out[p] = int(e)
            if m == 1:
                break
    if m > 1:
        if m <= trial_limit * trial_limit or is_probable_prime(m):
            # below the square of the trial bound any survivor is prime
            out[int(m)] = out.get(int(m), 0) + 1
            m = mpz(1)
        else:
            stack = [m]
            m = mpz(1)
            while stack:
                c = stack.pop()
                if is_probable_prime(c):
                    out[int(c)] = out.get(int(c), 0) + 1
                    continue
                root = gmpy2.isqrt(c)
                if root * root == c:
                    stack.extend([root, root])
                    continue
                d = pollard_rho(int(c), budget=rho_budget, seed=seed)
                if d is None:
                    m *= c
                else:
                    stack.extend([mpz(d), c // d])
    return Factorization(sign, dict(sorted(out.items())), int(m))


def valuation(n: int, p: int) -> int:
    """Largest e with p^e | n.  Raises ValueError on n == 0."""
    if n == 0:
        raise ValueError("valuation of 0 is undefined")
    _, e = gmpy2.remove(mpz(abs(n)), mpz(p))
    return int(e)


# ---------------------------------------------------------------------------
# Integer polynomials


class IntPolynomial:
    """Dense integer polynomial, coefficients ascending by degree."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        cs = [int(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs = cs

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1  # -1 for the zero polynomial

    @property
    def lc(self) -> int:
        return self.coeffs[-1] if self.coeffs else 0

    @property
    def is_monic(self) -> bool:
        return self.lc == 1

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __eq__(self, other) -> bool:
        return isinstance(other, IntPolynomial) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(tuple(self.coeffs))

    def __call__(self, x):
        """Horner evaluation; exact for int input."""
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def derivative(self) -> "IntPolynomial":
        return IntPolynomial([i * c for i, c in enumerate(self.coeffs)][1:])

    def __repr__(self) -> str:
        return f"IntPolynomial({self.coeffs!r})"

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        terms = []
        for i in range(self.degree, -1, -1):
            c = self.coeffs[i]
            if c == 0:
                continue
            if i == 0:
                body = str(abs(c))
            else:
                xs = "x" if i == 1 else f"x^{i}"
                body = xs if abs(c) == 1 else f"{abs(c)}*{xs}"
            if not terms:
                terms.append(("-" if c < 0 else "") + body)
            else:
                terms.append(("- " if c < 0 else "+ ") + body)
        return " ".join(terms)


def _prem(f: list[int], g: list[int]) -> list[int]:
    # pseudo-remainder: lc(g)^(deg f - deg g + 1) * f  mod  g, all in Z
    r = list(f)
    dg = len(g) - 1
    lg = g[-1]
    e = len(r) - 1 - dg + 1
    while r and len(r) - 1 >= dg:
        k = len(r) - 1 - dg
        lr = r[-1]
        r = [lg * c for c in r]
        for i in range(dg + 1):
            r[i + k] -= lr * g[i]
        r.pop()
        while r and r[-1] == 0:
            r.pop()
        e -= 1
    if e > 0 and r:
        m = lg**e
        r = [c * m for c in r]
    return r


def _content(cs: list[int]) -> int:
    g = 0
    for c in cs:
        g = math.gcd(g, abs(c))
        if g == 1:
            break
    return g or 1


def resultant(f: IntPolynomial, g: IntPolynomial) -> int:
    """Exact resultant Res(f, g) via the subresultant remainder sequence.

    Convention: for monic f, Res(f, g) = prod g(alpha) over the roots alpha
    of f, so Res(f, g) = (-1)^(deg f * deg g) Res(g, f).
    """
    if not f or not g:
        raise ValueError("resultant of the zero polynomial")
    fc, gc = list(f.coeffs), list(g.coeffs)
    df, dg = len(fc) - 1, len(gc) - 1
    if df == 0:
        return fc[0] ** dg
    if dg == 0:
        return gc[0] ** df
    ca, cb = _content(fc), _content(gc)
    fc = [c // ca for c in fc]
    gc = [c // cb for c in gc]
    t = ca**dg * cb**df
    s = 1
    if df < dg:
        fc, gc = gc, fc
        if df % 2 == 1 and dg % 2 == 1:
            s = -1
    g1, h = 1, 1
    while True:
        df, dg = len(fc) - 1, len(gc) - 1
        delta = df - dg
        if df % 2 == 1 and dg % 2 == 1:
            s = -s
        r = _prem(fc, gc)
        if not r:
            return 0  # common factor
        fc = gc
        div = g1 * h**delta
        gc = [c // div for c in r]
        g1 = fc[-1]
        if delta >= 1:
            h = g1**delta // h ** (delta - 1)
        if len(gc) - 1 <= 0:
            break
    dfinal = len(fc) - 1
    h = gc[0] ** dfinal // h ** (dfinal - 1)
    return s * t * h


# ---------------------------------------------------------------------------
# Polynomial arithmetic over F_ell (for complete-splitting tests)


def _mod_trim(cs: list[int], ell: int) -> list[int]:
    cs = [c % ell for c in cs]
    while cs and cs[-1] == 0:
        cs.pop()
    return cs


def _polymod_rem(a: list[int], b: list[int], ell: int) -> list[int]:
    # a mod b over F_ell, b nonzero
    a = [c % ell for c in a]
    db = len(b) - 1
    inv = pow(b[-1], -1, ell)
    while len(a) - 1 >= db and a:
        k = len(a) - 1 - db
        q = a[-1] * inv % ell
        for i in range(db + 1):
            a[i + k] = (a[i + k] - q * b[i]) % ell
        while a and a[-1] == 0:
            a.pop()
    return a


def _polymod_mul(a: list[int], b: list[int], mod: list[int], ell: int) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] + ai * bj) % ell
    return _polymod_rem(out, mod, ell)


def _polymod_gcd(a: list[int], b: list[int], ell: int) -> list[int]:
    a, b = _mod_trim(a, ell), _mod_trim(b, ell)
    while b:
        a, b = b, _polymod_rem(a, b, ell)
    if a:
        inv = pow(a[-1], -1, ell)
        a = [c * inv % ell for c in a]
    return a


def splits_completely(H: IntPolynomial, ell: int) -> bool:
    """True iff H mod ell is squarefree and a product of deg(H) linear factors.

    Test: gcd(H, H') = 1 over F_ell, and x^ell == x in F_ell[x]/(H).
    """
    hbar = _mod_trim(H.coeffs, ell)
    if len(hbar) - 1 != H.degree:
        raise ValueError("leading coefficient vanishes mod ell")
    if H.degree == 0:
        return True
    g = _polymod_gcd(hbar, H.derivative().coeffs, ell)
    if len(g) - 1 > 0:
        return False
    # x^ell mod (hbar, ell) by square and multiply
    x = _polymod_rem([0, 1], hbar, ell)
    acc = _polymod_rem([1], hbar, ell)
    base = x
    e = ell
    while e:
        if e & 1:
            acc = _polymod_mul(acc, base, hbar, ell)
        e >>= 1
        if e:
            base = _polymod_mul(base, base, hbar, ell)
    return acc == x
