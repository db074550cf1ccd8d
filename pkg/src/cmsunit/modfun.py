"""Evaluation of the modular j-function at CM points, exact class polynomials
and exact norms of j - j0, with certified integer rounding.

All floating work uses MPFR/MPC (via gmpy2) inside a local precision
context, so evaluations at different discriminants are independent and can
run in parallel processes.

The j-function is computed from the Dedekind eta quotient

    lambda(tau) = 2^12 * (eta(2 tau) / eta(tau))^24,
    j(tau)      = (lambda + 16)^3 / lambda,

with eta summed by its pentagonal-number series, whose exponents grow
quadratically; the truncation point is chosen so the dropped tail is below
the target accuracy.
"""

from __future__ import annotations

import math
from typing import Optional

import gmpy2
from gmpy2 import mpc, mpfr

from .intarith import IntPolynomial, resultant
from .quadclass import QuadForm, is_discriminant, reduced_forms

DEFAULT_MARGIN_BITS = 64
MAX_RETRIES = 3

# j-invariants of the thirteen rational singular moduli, by discriminant
RATIONAL_SINGULAR_MODULI = {
    -3: 0,
    -4: 1728,
    -7: -3375,
    -8: 8000,
    -11: -32768,
    -12: 54000,
    -16: 287496,
    -19: -884736,
    -27: -12288000,
    -28: 16581375,
    -43: -884736000,
    -67: -147197952000,
    -163: -262537412640768000,
}


class PrecisionExhausted(ArithmeticError):
    """Raised when certified rounding keeps failing after precision doubling."""


def required_precision(delta: int, margin: int = DEFAULT_MARGIN_BITS) -> int:
    """Initial working precision for exact work at discriminant delta.

    pi*sqrt(|delta|)*sum(1/a) / ln 2 bounds the bit size of the class
    polynomial coefficients (each root has |j| ~ exp(pi*sqrt(|delta|)/a));
    the margin absorbs rounding noise and is doubled on retry.
    """
    forms = reduced_forms(delta)
    est = math.pi * math.sqrt(-delta) * sum(1.0 / f.a for f in forms) / math.log(2)
    return int(est) + margin


def cm_points(delta: int, precision_bits: Optional[int] = None) -> list[mpc]:
    """CM points tau = (-b + sqrt(delta)) / (2a), one per reduced form.

    Each lies in the standard fundamental domain (|Re| <= 1/2, |tau| >= 1).
    """
    if not is_discriminant(delta):
        raise ValueError(f"{delta} is not a discriminant")
    prec = precision_bits or required_precision(delta)
    with gmpy2.context(precision=prec):
        return _cm_points(reduced_forms(delta))


def _cm_points(forms: list[QuadForm]) -> list[mpc]:
    root = gmpy2.sqrt(mpfr(-forms[0].discriminant)) if forms else None
    pts = []
    for a, b, _ in forms:
        pts.append(mpc(mpfr(-b) / (2 * a), root / (2 * a)))
    return pts


def _pentagonal_sum(q: mpc, emax: float) -> mpc:
    """sum over k of (-1)^k (q^(k(3k-1)/2) + q^(k(3k+1)/2)), 1 for k = 0,
    truncated once the exponents pass emax (tail below the kept bits)."""
    s = mpc(1)
    q3 = q * q * q
    p = q  # q^(3k-2)
    qk = q  # q^k
    t1 = mpc(1)
    k = 1
    while k * (3 * k - 1) // 2 <= emax:
        t1 = t1 * p  # q^(k(3k-1)/2)
        term = t1 + t1 * qk
        s = s - term if k & 1 else s + term
        p = p * q3
        qk = qk * q
        k += 1
    return s


def _j_from_q(q: mpc, y: float, prec: int) -> mpc:
    """j in terms of q = exp(2 pi i tau) with Im tau = y.

    The eta prefactors cancel in the quotient, leaving a single q factor:
    lambda = 2^12 q (S(q^2)/S(q))^24 with S the pentagonal series of eta.
    """
    emax = (prec + 16) * math.log(2) / (2 * math.pi * y) + 1
    s1 = _pentagonal_sum(q, emax)
    s2 = _pentagonal_sum(q * q, emax / 2)
    lam = 4096 * q * (s2 / s1) ** 24
    x = lam + 16
    return x * x * x / lam


def _j(tau: mpc, prec: int) -> mpc:
    y = float(tau.imag)
    if y <= 0:
        raise ValueError("j requires Im tau > 0")
    pi = gmpy2.const_pi()
    q = gmpy2.exp(2j * pi * tau)
    return _j_from_q(q, y, prec)


def eval_j(tau, precision_bits: int) -> mpc:
    """j(tau) to roughly precision_bits of relative accuracy (Im tau > 0)."""
    guard = 32
    with gmpy2.context(precision=precision_bits + guard):
        t = mpc(tau)
        if not t.imag > 0:
            raise ValueError("eval_j requires Im tau > 0")
        v = _j(t, precision_bits + guard)
    with gmpy2.context(precision=precision_bits):
        return mpc(v)


def _conjugates(delta: int, prec: int) -> list[mpc]:
    """j at every CM point of delta, one per reduced form.

    q is assembled per form as u^(1/a) * exp(-i pi b / a) with a single
    shared u = exp(-pi sqrt(|delta|)): integer roots are far cheaper than
    one full-precision complex exp per point.  Mirror forms (a, -b, c) and
    (a, b, c) have conjugate q, and every operation here commutes with
    conjugation under correct rounding, so each pair is computed once.
    """
    forms = reduced_forms(delta)
    pi = gmpy2.const_pi()
    root = gmpy2.sqrt(mpfr(-delta))
    u = gmpy2.exp(-pi * root)
    roots_cache: dict[int, mpfr] = {1: u}
    mirror: dict[tuple[int, int, int], mpc] = {}
    out = []
    for a, b, c in forms:
        partner = mirror.pop((a, -b, c), None)
        if partner is not None:
            out.append(mpc(partner.real, -partner.imag))
            continue
        mag = roots_cache.get(a)
        if mag is None:
            mag = roots_cache[a] = gmpy2.rootn(u, a)
        if b == 0:
            q = mpc(mag, 0)
        else:
            sn, cs = gmpy2.sin_cos(-pi * b / a)
            q = mpc(mag * cs, mag * sn)
        j = _j_from_q(q, float(root) / (2 * a), prec)
        mirror[(a, b, c)] = j
        out.append(j)
    return out


def _round_certified(value) -> Optional[int]:
    """Round an mpfr/mpc to the nearest integer if within 1/4, else None."""
    if isinstance(value, mpc):
        if not abs(value.imag) < 0.25:
            return None
        value = value.real
    r = gmpy2.rint(value)
    if not abs(value - r) < 0.25:
        return None
    return int(r)


def hilbert_class_polynomial(delta: int, margin: int = DEFAULT_MARGIN_BITS) -> IntPolynomial:
    """Monic integer polynomial whose roots are the singular moduli of delta.

    Every coefficient must round to an integer at distance < 1/4; otherwise
    the working precision is doubled, up to 3 retries.
    """
    if not is_discriminant(delta):
        raise ValueError(f"{delta} is not a discriminant")
    prec = required_precision(delta, margin)
    for _ in range(MAX_RETRIES + 1):
        with gmpy2.context(precision=prec):
            roots = _conjugates(delta, prec)
            coeffs = [mpc(1)]
            for r in roots:
                coeffs = [mpc(0)] + coeffs
                for i in range(len(coeffs) - 1):
                    coeffs[i] -= r * coeffs[i + 1]
            out = []
            for c in coeffs:
                n = _round_certified(c)
                if n is None:
                    break
                out.append(n)
            else:
                return IntPolynomial(out)
        prec *= 2
    raise PrecisionExhausted(f"class polynomial for {delta} did not stabilize")


def norm_difference(delta: int, j0: int, method: str = "product",
                    margin: int = DEFAULT_MARGIN_BITS) -> int:
    """Absolute norm of j - j0 over Q, i.e. prod(j_i - j0) over the conjugates.

    Equals (-1)^deg * H_delta(j0); the sign of the actual product is kept.
    method='product' rounds the certified floating product (no coefficient
    blowup); method='poly' evaluates the exact class polynomial.
    """
    if not is_discriminant(delta):
        raise ValueError(f"{delta} is not a discriminant")
    j0 = int(j0)
    if method == "poly":
        H = hilbert_class_polynomial(delta, margin)
        return (-1) ** H.degree * H(j0)
    if method != "product":
        raise ValueError(f"unknown method {method!r}")
    prec = required_precision(delta, margin) + max(0, abs(j0).bit_length())
    for _ in range(MAX_RETRIES + 1):
        with gmpy2.context(precision=prec):
            prod = mpc(1)
            for j in _conjugates(delta, prec):
                prod *= j - j0
            n = _round_certified(prod)
            if n is not None:
                return n
        prec *= 2
    raise PrecisionExhausted(f"norm of j - {j0} at {delta} did not stabilize")


def resultant_norm(delta: int, delta0: int, margin: int = DEFAULT_MARGIN_BITS) -> int:
    """Res(H_delta, H_delta0) = prod over both Galois orbits of (j_i - j0_k).

    Norm of j - j0 through the compositum when j0 is not rational; the sign
    follows the convention Res(f, g) = prod g(alpha_i) over the roots of f.
    """
    if delta == delta0:
        raise ValueError("resultant_norm requires distinct discriminants")
    f = hilbert_class_polynomial(delta, margin)
    g = hilbert_class_polynomial(delta0, margin)
    return resultant(f, g)


def weil_height_singular(delta: int, precision_bits: int = 64) -> mpfr:
    """Logarithmic Weil height of the singular moduli of delta.

    For an algebraic integer this is the average of log max(1, |j_i|) over
    the conjugates; computed with a 3x working precision cushion so the
    result carries the requested number of certified bits.
    """
    if not is_discriminant(delta):
        raise ValueError(f"{delta} is not a discriminant")
    work = 3 * precision_bits + 64
    with gmpy2.context(precision=work):
        total = mpfr(0)
        js = _conjugates(delta, work)
        for j in js:
            a = abs(j)
            if a > 1:
                total += gmpy2.log(a)
        avg = total / len(js)
    with gmpy2.context(precision=precision_bits):
        return mpfr(avg)
