"""The effective height-bound calculus: the F majorant, the four-way
majorant split of 1 <= A + B + C + D against the height floor Y, threshold
searches, the archimedean/non-archimedean upper bounds for j - 1728 and
j - 0, and the conductor terms of the Faltings-height floor.

Real arithmetic here runs at 128-bit precision; every comparison against a
literal constant is meant at 1e-9 resolution.  The Robin constant c1 is
configuration, not a hard-coded literal: thresholds depend on it, so every
scan result records the c1 it used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

import gmpy2
from gmpy2 import mpfr

from .config import Config, load_config
from .intarith import factor, primes_up_to

PRECISION = 128

_default_config: Optional[Config] = None


def _cfg() -> Config:
    global _default_config
    if _default_config is None:
        _default_config = load_config()
    return _default_config


class GridExhausted(RuntimeError):
    """Threshold scan hit the grid ceiling without the majorant sum dropping below 1."""


def _ctx():
    return gmpy2.context(precision=PRECISION)


def compute_F(abs_delta: int) -> int:
    """max 2^omega(a) over a <= sqrt(abs_delta).

    Equals 2^k for the largest k whose primorial fits under sqrt(abs_delta):
    the primorial is the least integer with k distinct prime factors.
    """
    if abs_delta < 1:
        raise ValueError("abs_delta must be >= 1")
    root = math.isqrt(int(abs_delta))
    k = 0
    prod = 1
    for p in primes_up_to(200):
        prod *= p
        if prod > root:
            break
        k += 1
    else:
        raise ValueError("abs_delta out of supported range")
    return 1 << k


@dataclass
class BoundBreakdown:
    """All quantities of one majorant evaluation at a given |Delta|."""

    abs_delta: float
    F: int
    Y: mpfr
    A: mpfr
    B: mpfr
    C: mpfr
    D: mpfr
    K: mpfr
    c1: float
    gamma: mpfr
    epsilon_sum: mpfr
    total: mpfr  # A + B + C + D, summed at full working precision

    def as_dict(self) -> dict:
        return {
            "abs_delta": float(self.abs_delta),
            "F": self.F,
            "Y": float(self.Y),
            "A": float(self.A),
            "B": float(self.B),
            "C": float(self.C),
            "D": float(self.D),
            "K": float(self.K),
            "c1": self.c1,
            "gamma": float(self.gamma),
            "epsilon_sum": float(self.epsilon_sum),
            "total": float(self.total),
        }


def _log_f_bound(lnD: mpfr, c1) -> mpfr:
    # log F <= (log 2 / 2) * log|D| / (log log |D| - c1 - log 2)
    ln2 = gmpy2.log(mpfr(2))
    den = gmpy2.log(lnD) - mpfr(c1) - ln2
    if den <= 0:
        raise ValueError("abs_delta too small for the F majorant")
    return (ln2 / 2) * lnD / den


def _y_floor(lnD: mpfr) -> mpfr:
    # (3/sqrt 5) log|D| - 9.78
    return 3 / gmpy2.sqrt(mpfr(5)) * lnD - mpfr("9.78")


def _terms_generic(lnD: mpfr, delta0: int, C0: int, h_j0, ell: int, L: int, c1) -> dict:
    pi = gmpy2.const_pi()
    ln2 = gmpy2.log(mpfr(2))
    s53 = gmpy2.sqrt(mpfr(5)) / 3
    Y = _y_floor(lnD)
    K = 4 * gmpy2.log(mpfr(abs(delta0))) + mpfr(h_j0) + mpfr("1.33") + ln2
    A = (8 * C0 / pi) * gmpy2.exp(mpfr("-0.1908") * lnD)
    B = (_log_f_bound(lnD, c1) + gmpy2.log(lnD) + K) / Y
    C = gmpy2.log(Y / pi) / Y
    eps_D = (s53 * mpfr("9.78")
             + gmpy2.log(mpfr(L)) * (gmpy2.log(mpfr(delta0 * delta0)) / gmpy2.log(mpfr(ell)) + 1)) / Y
    D = s53 + eps_D
    return {"Y": Y, "K": K, "A": A, "B": B, "C": C, "D": D,
            "epsilon_sum": A + B + C + eps_D}


def _terms_1728(lnD: mpfr, ell: int, c1) -> dict:
    pi = gmpy2.const_pi()
    ln2 = gmpy2.log(mpfr(2))
    s53 = gmpy2.sqrt(mpfr(5)) / 3
    Y = _y_floor(lnD)
    # h(1728) + log 2 + 1 - 2.68, the constant part once Y is divided out
    K = gmpy2.log(mpfr(1728)) + ln2 + 1 - mpfr("2.68")
    A = (4 / pi) * gmpy2.exp(mpfr("-0.1908") * lnD)
    B = (2 * (_log_f_bound(lnD, c1) + gmpy2.log(lnD)) + K) / Y
    C = 2 * gmpy2.log(Y / pi) / Y
    eps_D = (s53 * mpfr("9.78") + gmpy2.log(mpfr(16)) + gmpy2.log(mpfr(ell))) / Y
    D = s53 + eps_D
    return {"Y": Y, "K": K, "A": A, "B": B, "C": C, "D": D,
            "epsilon_sum": A + B + C + eps_D}


def _terms_j0(lnD: mpfr, ell: int, k, c1) -> dict:
    pi = gmpy2.const_pi()
    Y = mpfr("1.509") * lnD + pk_offset(k)
    if Y <= 0:
        raise ValueError("height floor not positive at this |Delta|")
    # the sqrt branch of the floor gives |Delta|^(1/2)/C <= (Y + 0.01)/pi
    A = (12 / pi) * gmpy2.exp(mpfr("-0.1908") * lnD) * (1 + mpfr("0.01") / Y)
    B = (3 * (_log_f_bound(lnD, c1) + gmpy2.log(lnD)) - mpfr("3.77")) / Y
    C = 3 * gmpy2.log((Y + mpfr("0.01")) / pi) / Y
    arch = mpfr("1.5") * (gmpy2.log(mpfr(9)) + lnD + gmpy2.log(mpfr(ell)))
    D = max(arch, 3 * gmpy2.log(mpfr(ell))) / Y
    return {"Y": Y, "K": mpfr("-3.77"), "A": A, "B": B, "C": C, "D": D,
            "epsilon_sum": A + B + C + D - mpfr("1.5") / mpfr("1.509")}


def majorants(delta0: int, C0: int, h_j0, ell: int, L: int, abs_delta, c1=None) -> BoundBreakdown:
    """The four explicit majorants of the normalized height inequality.

    Requires abs_delta > 1e15 (validity of the A bound) and
    abs_delta >= log(ell)/delta0^2 (validity of the D expansion);
    ell and L are the smaller and larger prime of the pair.
    """
    if c1 is None:
        c1 = _cfg().c1
    if ell > L:
        raise ValueError("ell must be the smaller prime of the pair")
    with _ctx():
        lnD = gmpy2.log(mpfr(abs_delta))
        if not abs_delta > 1e15:
            raise ValueError("majorants require abs_delta > 1e15")
        if not abs_delta >= math.log(ell) / (delta0 * delta0):
            raise ValueError("abs_delta below the D-expansion range")
        t = _terms_generic(lnD, delta0, C0, h_j0, ell, L, c1)
        return BoundBreakdown(
            abs_delta=float(abs_delta),
            F=compute_F(int(abs_delta)),
            Y=t["Y"],
            A=t["A"],
            B=t["B"],
            C=t["C"],
            D=t["D"],
            K=t["K"],
            c1=float(c1),
            gamma=gmpy2.const_euler(),
            epsilon_sum=t["epsilon_sum"],
            total=t["A"] + t["B"] + t["C"] + t["D"],
        )


@dataclass
class ThresholdScan:
    """Result of a majorant-sum threshold search, in log space."""

    variant: str
    log_bound: mpfr  # natural log of the bound B
    c1: float
    params: dict
    terms: dict  # majorant terms evaluated at the bound

    @property
    def log10_bound(self) -> float:
        with _ctx():
            return float(self.log_bound / gmpy2.log(mpfr(10)))

    def bound_int(self) -> int:
        if self.log10_bound > 400:
            raise OverflowError("bound too large to materialize as an integer")
        with _ctx():
            return int(gmpy2.ceil(gmpy2.exp(self.log_bound)))

    def terms_dict(self) -> dict:
        return {k: float(v) for k, v in self.terms.items()}


def _scan(sum_fn: Callable[[mpfr], mpfr], grid_ratio, ceiling_log10,
          start_log10=15.0, bracket="grid") -> mpfr:
    """Smallest lnB with sum < 1, found on a search grid and bisection-refined,
    then verified non-increasing on a geometric follow-up grid up to 10*B.

    bracket='grid' walks |Delta| by the geometric ratio; bracket='double'
    doubles ln|Delta| per step, for thresholds far beyond any feasible grid
    (the j0 = 0 pipeline's bound is doubly exponential).
    """
    with _ctx():
        ln10 = gmpy2.log(mpfr(10))
        step = gmpy2.log(mpfr(grid_ratio))
        L = mpfr(start_log10) * ln10
        Lmax = mpfr(ceiling_log10) * ln10
        if sum_fn(L) >= 1:
            found = None
            while L < Lmax:
                prev = L
                L = L + step if bracket == "grid" else 2 * L
                if sum_fn(L) < 1:
                    found = (prev, L)
                    break
            if found is None:
                raise GridExhausted(f"no threshold below 1e{float(ceiling_log10):g}")
            lo, hi = found
            while hi - lo > mpfr("1e-20") * hi:
                mid = (lo + hi) / 2
                if sum_fn(mid) < 1:
                    hi = mid
                else:
                    lo = mid
            L = hi
        # monotonicity audit beyond the threshold
        probe = L
        last = sum_fn(probe)
        for _ in range(32):
            probe = probe + ln10 / 32
            cur = sum_fn(probe)
            if cur > last + mpfr("1e-12"):
                raise ArithmeticError("majorant sum not decreasing beyond threshold")
            last = cur
        return L


def find_threshold(delta0: int, C0: int, h_j0, ell: int, L: int, c1=None,
                   grid_ratio=None, grid_ceiling=None) -> int:
    """Smallest B >= 1e15 on the search grid with majorant sum < 1 at B.

    Raises GridExhausted when the sum stays >= 1 up to the grid ceiling.
    """
    cfg = _cfg()
    c1 = cfg.c1 if c1 is None else c1
    grid_ratio = cfg.grid_ratio if grid_ratio is None else grid_ratio
    grid_ceiling = cfg.grid_ceiling if grid_ceiling is None else grid_ceiling
    with _ctx():
        fn = lambda lnD: (lambda t: t["A"] + t["B"] + t["C"] + t["D"])(
            _terms_generic(lnD, delta0, C0, h_j0, ell, L, c1))
        lnB = _scan(fn, grid_ratio, math.log10(grid_ceiling))
        return int(gmpy2.ceil(gmpy2.exp(lnB)))


def threshold_scan_1728(ell: int, c1=None, grid_ratio=None, ceiling_log10=200.0) -> ThresholdScan:
    """Threshold for the j - 1728 pipeline: the (5.2)+(5.4)-style upper bound
    against the Y floor, aggregated exactly like the generic majorants."""
    cfg = _cfg()
    c1 = cfg.c1 if c1 is None else c1
    grid_ratio = cfg.grid_ratio if grid_ratio is None else grid_ratio
    with _ctx():
        fn = lambda lnD: (lambda t: t["A"] + t["B"] + t["C"] + t["D"])(
            _terms_1728(lnD, ell, c1))
        lnB = _scan(fn, grid_ratio, ceiling_log10)
        return ThresholdScan("1728", lnB, float(c1), {"ell": ell},
                             _terms_1728(lnB, ell, c1))


def threshold_scan_j0(ell: int, k=None, c1=None, grid_ratio=None,
                      ceiling_log10=1e55) -> ThresholdScan:
    """Threshold for the j - 0 pipeline under the L'/L slope hypothesis.

    The asymptotic majorant sum tends to 1.5/1.509 < 1, so a threshold
    exists but is enormous (doubly exponential in practice): the scan runs
    entirely in log space and the result usually cannot be materialized as
    an integer.
    """
    cfg = _cfg()
    c1 = cfg.c1 if c1 is None else c1
    k = cfg.k if k is None else k
    grid_ratio = cfg.grid_ratio if grid_ratio is None else grid_ratio
    with _ctx():
        fn = lambda lnD: (lambda t: t["A"] + t["B"] + t["C"] + t["D"])(
            _terms_j0(lnD, ell, k, c1))
        lnB = _scan(fn, grid_ratio, ceiling_log10, bracket="double")
        return ThresholdScan("j0", lnB, float(c1), {"ell": ell, "k": float(k)},
                             _terms_j0(lnB, ell, k, c1))


def height_upper_1728(abs_delta, class_number: int, F: int, ell: int) -> mpfr:
    """Upper bound for h(j - 1728) when it is an {ell}-unit: archimedean part
    plus the valuation cap aggregated over primes above ell.

    Valid for abs_delta >= 1e14 and ell >= 5; the non-archimedean branch
    keeps the factor 16 of the valuation cap.
    """
    if not abs_delta >= 1e14:
        raise ValueError("height_upper_1728 requires abs_delta >= 1e14")
    if ell < 5:
        raise ValueError("ell must be >= 5")
    with _ctx():
        lnD = gmpy2.log(mpfr(abs_delta))
        lnF = gmpy2.log(mpfr(F))
        lnell = gmpy2.log(mpfr(ell))
        arch = (4 * F * lnD / class_number
                + 2 * (lnF + lnD / 2 + gmpy2.log(lnD) - gmpy2.log(mpfr(class_number)))
                - mpfr("2.68"))
        nonarch = max(gmpy2.log(mpfr(16)) + lnD + lnell, 2 * lnell)
        return arch + nonarch


def height_upper_0(abs_delta, class_number: int, F: int, ell: int) -> mpfr:
    """Upper bound for h(j) when j is an {ell}-unit; conservative 9|Delta|
    form of the valuation cap."""
    if not abs_delta >= 1e14:
        raise ValueError("height_upper_0 requires abs_delta >= 1e14")
    if ell < 5:
        raise ValueError("ell must be >= 5")
    with _ctx():
        lnD = gmpy2.log(mpfr(abs_delta))
        lnF = gmpy2.log(mpfr(F))
        lnell = gmpy2.log(mpfr(ell))
        arch = (12 * F * lnD / class_number
                + 3 * (lnF + lnD / 2 + gmpy2.log(lnD) - gmpy2.log(mpfr(class_number)))
                - mpfr("3.77"))
        nonarch = max(mpfr("1.5") * (gmpy2.log(mpfr(9)) + lnD + lnell), 3 * lnell)
        return arch + nonarch


def e_f(p: int, chi_p: int, vpf: int) -> Fraction:
    """Local conductor term (1-chi(p))/(p-chi(p)) * (1-p^-v)/(1-p^-1), exact."""
    if chi_p not in (-1, 0, 1):
        raise ValueError("chi_p must be -1, 0 or 1")
    if vpf < 1:
        raise ValueError("vpf must be >= 1")
    pv = p**vpf
    return Fraction(1 - chi_p, p - chi_p) * Fraction(pv - 1, pv) * Fraction(p, p - 1)


def delta_fn(n: int) -> float:
    """0.2485 log n minus the summed local conductor penalties of n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if n == 1:
        return 0.0
    total = 0.0
    for p, e in factor(n).factors.items():
        total += math.log(p) / (p + 1) * (1 - p ** float(-e)) / (1 - 1 / p)
    return 0.2485 * math.log(n) - total


@dataclass(frozen=True)
class PkParams:
    """Slope offset k of the assumed L'/L lower bound -0.2485 log|D| - k."""

    k: float

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("k must be nonnegative")


def pk_constant(k) -> mpfr:
    """C0(k) = (gamma + log(2 pi) + k)/2 + 0.0605."""
    with _ctx():
        g = gmpy2.const_euler()
        return (g + gmpy2.log(2 * gmpy2.const_pi()) + mpfr(k)) / 2 + mpfr("0.0605")


def pk_offset(k) -> mpfr:
    """Additive constant of the height floor: 8.64 - 12*C0(k)."""
    with _ctx():
        return mpfr("8.64") - 12 * pk_constant(k)


def height_lower_pk(abs_delta, params) -> mpfr:
    """Height floor 1.509 log|Delta| + (8.64 - 12 C0(k)) under the slope hypothesis."""
    k = params.k if isinstance(params, PkParams) else float(params)
    if k < 0:
        raise ValueError("k must be nonnegative")
    if not abs_delta >= 3:
        raise ValueError("abs_delta must be >= 3")
    with _ctx():
        return mpfr("1.509") * gmpy2.log(mpfr(abs_delta)) + pk_offset(k)
