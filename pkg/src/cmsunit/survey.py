"""Large-scale S-unit scans over imaginary quadratic discriminants.

A scan fixes a rational singular modulus j0, walks every discriminant
3 <= |Delta| <= A (excluding the discriminant of j0 itself), computes the
exact norm of j - j0 by certified rounding of the conjugate product, and
factors it.  Records aggregate into survey tables: for each s, the number
of Galois orbits whose norm uses at most s distinct primes, the largest
such discriminant, and the union of primes seen.

Norm factorizations here are complete by construction: a prime p >= 5
dividing the norm either divides Delta or makes Delta0^2 |Delta| represented
by a depth-0 lattice form, so p <= Delta0^2 |Delta|; trial division up to
that bound (plus a rho fallback that never fires in practice) settles every
record.  Records that would still be incomplete are flagged, never dropped.
"""

from __future__ import annotations

import json
import multiprocessing
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

import gmpy2

from . import modfun
from .intarith import (Factorization, IntPolynomial, factor,
                       format_factorization, is_probable_prime, primes_up_to,
                       resultant, splits_completely)
from .modfun import (RATIONAL_SINGULAR_MODULI, hilbert_class_polynomial,
                     norm_difference, resultant_norm, weil_height_singular)
from .quadclass import is_discriminant, reduced_forms

CHECKPOINT_CHUNK = 1000


class IncompleteScan(RuntimeError):
    """A record in range is not fully factored at the requested s threshold."""


@dataclass
class SurveyRecord:
    """One discriminant of a scan: class number, norm factorization, prime count."""

    delta: int
    class_number: int
    norm_factorization: Factorization
    s: Optional[int]  # distinct primes dividing the norm; None if unsettled
    complete: bool

    def to_json_dict(self) -> dict:
        f = self.norm_factorization
        return {
            "delta": self.delta,
            "class_number": self.class_number,
            "norm_sign": f.sign,
            "factors": [[str(p), f.factors[p]] for p in sorted(f.factors)],
            "cofactor": str(f.cofactor),
            "s": self.s,
            "complete": self.complete,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "SurveyRecord":
        f = Factorization(d["norm_sign"],
                          {int(p): e for p, e in d["factors"]},
                          int(d["cofactor"]))
        return cls(d["delta"], d["class_number"], f, d["s"], d["complete"])

    def csv_row(self) -> str:
        f = self.norm_factorization
        body = format_factorization(Factorization(1, f.factors, f.cofactor))
        s = "" if self.s is None else str(self.s)
        return f"{self.delta},{self.class_number},{f.sign},{body},{s},{str(self.complete).lower()}"


CSV_HEADER = "delta,class_number,norm_sign,factorization,s,complete"


def singular_modulus_discriminant(j0: int) -> int:
    """Discriminant whose unique singular modulus is the rational integer j0."""
    for d, j in RATIONAL_SINGULAR_MODULI.items():
        if j == j0:
            return d
    raise ValueError(f"{j0} is not a rational singular modulus")


def _record_for(delta: int, j0: int, delta0: int, margin: int) -> SurveyRecord:
    forms = reduced_forms(delta)
    n = norm_difference(delta, j0, margin=margin)
    sign = -1 if n < 0 else 1
    if abs(n) == 1:
        # a difference of singular moduli is never a unit; count loudly if hit
        warnings.warn(f"norm of j - {j0} at delta={delta} is a unit (s = 0)")
        fz = Factorization(sign, {}, 1)
        return SurveyRecord(delta, len(forms), fz, 0, True)
    bound = delta0 * delta0 * abs(delta)
    m = gmpy2.mpz(abs(n))
    factors: dict[int, int] = {}
    for p in primes_up_to(bound):
        if m % p == 0:
            m, e = gmpy2.remove(m, p)
            factors[p] = int(e)
            if m == 1:
                break
    if m != 1:
        # out-of-range prime factor: fall back to the generic stack
        tail = factor(int(m))
        for p, e in tail.factors.items():
            factors[p] = factors.get(p, 0) + e
        m = tail.cofactor
    fz = Factorization(sign, dict(sorted(factors.items())), int(m))
    s = len(fz.factors) if fz.complete else None
    return SurveyRecord(delta, len(forms), fz, s, fz.complete)


def _scan_chunk(args) -> list[dict]:
    j0, delta0, deltas, margin = args
    return [_record_for(d, j0, delta0, margin).to_json_dict() for d in deltas]


def scan(
    j0: int,
    max_abs_delta: int,
    jobs: int = 1,
    checkpoint_dir: Optional[str] = None,
    margin: int = modfun.DEFAULT_MARGIN_BITS,
) -> list[SurveyRecord]:
    """Survey records for all discriminants 3 <= |Delta| <= max_abs_delta.

    The discriminant of j0 itself is excluded (norm 0).  Results come back
    ordered by |Delta| regardless of worker count; with a checkpoint
    directory, completed chunks of 1000 discriminants are streamed to disk
    and reloaded on resume.
    """
    if max_abs_delta < 3:
        raise ValueError("max_abs_delta must be >= 3")
    delta0 = singular_modulus_discriminant(j0)
    deltas = [-n for n in range(3, max_abs_delta + 1)
              if is_discriminant(-n) and -n != delta0]
    chunks = [deltas[i : i + CHECKPOINT_CHUNK]
              for i in range(0, len(deltas), CHECKPOINT_CHUNK)]
    ckdir = Path(checkpoint_dir) if checkpoint_dir else None
    if ckdir:
        ckdir.mkdir(parents=True, exist_ok=True)

    def chunk_path(i: int) -> Optional[Path]:
        if ckdir is None:
            return None
        return ckdir / f"scan_j{j0}_chunk{i:05d}.jsonl"

    results: dict[int, list[dict]] = {}
    pending = []
    for i, chunk in enumerate(chunks):
        path = chunk_path(i)
        if path is not None and path.exists():
            with path.open() as fh:
                rows = [json.loads(line) for line in fh]
            if len(rows) == len(chunk):
                results[i] = rows
                continue
        pending.append((i, chunk))

    def store(i: int, rows: list[dict]) -> None:
        results[i] = rows
        path = chunk_path(i)
        if path is not None:
            tmp = path.with_suffix(".tmp")
            with tmp.open("w") as fh:
                for row in rows:
                    fh.write(json.dumps(row, sort_keys=True) + "\n")
            tmp.replace(path)

    args = [(j0, delta0, chunk, margin) for _, chunk in pending]
    if jobs > 1 and len(pending) > 1:
        with multiprocessing.Pool(jobs) as pool:
            for (i, _), rows in zip(pending, pool.imap(_scan_chunk, args)):
                store(i, rows)
    else:
        for (i, _), a in zip(pending, args):
            store(i, _scan_chunk(a))

    out: list[SurveyRecord] = []
    for i in range(len(chunks)):
        out.extend(SurveyRecord.from_json_dict(row) for row in results[i])
    return out


# ---------------------------------------------------------------------------
# Tables


@dataclass
class TableRow:
    s: int
    count: int
    delta_max: Optional[int]
    primes: list[int]


@dataclass
class TableSummary:
    """Survey table: per s, the orbit count, extreme discriminant and primes.

    ``rows`` uses the cumulative reading (an orbit with t distinct norm
    primes is an S-unit orbit for every s >= t); ``rows_exact`` counts
    orbits with exactly s primes.  The published survey tables follow the
    cumulative reading.
    """

    s_max: int
    rows: list[TableRow]
    rows_exact: list[TableRow]

    def to_json_dict(self) -> dict:
        def rows_out(rows):
            return [{"s": r.s, "count": r.count, "delta_max": r.delta_max,
                     "primes": r.primes} for r in rows]

        return {"s_max": self.s_max, "rows": rows_out(self.rows),
                "rows_exact": rows_out(self.rows_exact)}

    def to_csv(self) -> str:
        lines = ["s,count,delta_max,primes"]
        for r in self.rows:
            dm = "" if r.delta_max is None else str(r.delta_max)
            primes = " ".join(str(p) for p in r.primes)
            lines.append(f"{r.s},{r.count},{dm},{primes}")
        return "\n".join(lines) + "\n"

    def render(self) -> str:
        lines = [f"{'s':>2}  {'count':>6}  {'delta_max':>10}  primes"]
        for r in self.rows:
            dm = "-" if r.delta_max is None else str(r.delta_max)
            primes = ",".join(str(p) for p in r.primes)
            lines.append(f"{r.s:>2}  {r.count:>6}  {dm:>10}  {primes}")
        return "\n".join(lines)


def table(records: Iterable[SurveyRecord], s_max: int) -> TableSummary:
    """Aggregate records into the survey table for s = 1..s_max.

    Refuses if any incomplete record could belong to some J_s with
    s <= s_max (its known prime count alone is not above the cutoff).
    """
    recs = list(records)
    for r in recs:
        if not r.complete and len(r.norm_factorization.factors) <= s_max:
            raise IncompleteScan(
                f"record at delta={r.delta} is incomplete with >= "
                f"{len(r.norm_factorization.factors)} primes; cannot settle s <= {s_max}"
            )

    def build(select) -> list[TableRow]:
        rows = []
        for s in range(1, s_max + 1):
            members = [r for r in recs if r.s is not None and select(r.s, s)]
            count = len(members)
            delta_max = min((r.delta for r in members), default=None)
            primes: set[int] = set()
            for r in members:
                primes.update(r.norm_factorization.factors)
            rows.append(TableRow(s, count, delta_max, sorted(primes)))
        return rows

    return TableSummary(s_max,
                        build(lambda t, s: t <= s),
                        build(lambda t, s: t == s))


# ---------------------------------------------------------------------------
# Nice pairs and structural audits


@dataclass
class NicePair:
    """Outcome of the two nice-pair conditions for (j0 of delta0, S)."""

    delta0: int
    class_polynomial: IntPolynomial
    primes: frozenset[int]
    height_j0: float
    valid: bool
    failures: list[str] = field(default_factory=list)


def check_nice_pair(delta0: int, primes: Iterable[int]) -> NicePair:
    """Check that every ell in S splits completely in Q(j0) and divides
    neither norm(j0), norm(j0 - 1728) nor delta0."""
    S = frozenset(int(p) for p in primes)
    H = hilbert_class_polynomial(delta0)
    n0 = norm_difference(delta0, 0)
    n1728 = norm_difference(delta0, 1728)
    height = float(weil_height_singular(delta0))
    failures = []
    for ell in sorted(S):
        if not is_probable_prime(ell):
            failures.append(f"not-prime:{ell}")
            continue
        if not splits_completely(H, ell):
            failures.append(f"not-split:{ell}")
        for label, val in (("norm-j0", n0), ("norm-j0-1728", n1728), ("delta0", delta0)):
            if val % ell == 0:
                failures.append(f"divides-{label}:{ell}")
    return NicePair(delta0, H, S, height, not failures, failures)


def probably_galois(H: IntPolynomial, trials: int = 60) -> bool:
    """Heuristic Galois test for the root field of monic squarefree H.

    In a Galois extension an unramified prime with one root mod ell splits
    completely, so any ell with 0 < #roots < deg witnesses non-Galois.
    Finding no witness among the sampled primes suggests (not proves) Galois.
    """
    if H.degree <= 2:
        return True
    disc = resultant(H, H.derivative())
    seen = 0
    for ell in primes_up_to(10_000):
        if disc % ell == 0:
            continue
        roots = _root_count_mod(H, ell)
        if 0 < roots < H.degree:
            return False
        seen += 1
        if seen >= trials:
            break
    return True


def _root_count_mod(H: IntPolynomial, ell: int) -> int:
    from .intarith import _mod_trim, _polymod_gcd, _polymod_mul, _polymod_rem

    hbar = _mod_trim(H.coeffs, ell)
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
    # deg gcd(x^ell - x, H) = number of distinct roots in F_ell
    diff = [(a - b) % ell for a, b in
            zip(acc + [0] * len(x), x + [0] * len(acc))]
    g = _polymod_gcd(hbar, diff, ell)
    return len(g) - 1 if g else H.degree


@dataclass
class PnViolation:
    delta: int
    norm_factors: dict[int, int]
    reason: str


def audit_pn_structure(records: Iterable[SurveyRecord], delta0: int,
                       primes: Iterable[int],
                       assume_non_galois: bool = False) -> list[PnViolation]:
    """Report records whose norm against delta0 is an S-unit although
    Delta != p^n * Delta0 for every p in S.

    Meaningful when Q(j0)/Q is not Galois; the caller can assert that or
    let the heuristic test run.  The S-unit check divides out S exactly, so
    no full factorization is needed.
    """
    S = sorted(set(int(p) for p in primes))
    pair = check_nice_pair(delta0, S)
    if not pair.valid:
        raise ValueError(f"not a nice pair: {pair.failures}")
    if not assume_non_galois:
        if pair.class_polynomial.degree < 3 or probably_galois(pair.class_polynomial):
            raise ValueError("root field looks Galois; pattern audit does not apply")
    out = []
    for r in records:
        if r.delta == delta0:
            continue
        n = abs(resultant_norm(r.delta, delta0))
        if n == 0:
            continue
        parts = {}
        for p in S:
            n_, e = gmpy2.remove(gmpy2.mpz(n), p)
            n = int(n_)
            if e:
                parts[p] = int(e)
        if n != 1:
            continue  # not an S-unit
        if not matches_prime_power_pattern(r.delta, delta0, S):
            out.append(PnViolation(r.delta, parts,
                                   f"delta != p^n * {delta0} for p in {S}"))
    return out


def matches_prime_power_pattern(delta: int, delta0: int, S: Iterable[int]) -> bool:
    """True iff delta = p^n * delta0 for some prime p in S and n >= 0."""
    if delta % delta0:
        return False
    q = delta // delta0
    if q == 1:
        return True
    for p in S:
        m, _ = gmpy2.remove(gmpy2.mpz(q), p)
        if m == 1:
            return True
    return False


@dataclass
class Mod4Violation:
    delta: int
    prime_1mod4: int
    others: list[int]


def audit_mod4(records: Iterable[SurveyRecord]) -> list[Mod4Violation]:
    """For j0 = 1728 scans: whenever a prime p = 1 mod 4 divides the norm,
    at least 3 distinct primes != 1 mod 4 must divide it too."""
    out = []
    for r in records:
        if not r.complete:
            raise IncompleteScan(f"record at delta={r.delta} lacks a complete factorization")
        primes = r.norm_factorization.distinct_primes
        ones = [p for p in primes if p % 4 == 1]
        others = [p for p in primes if p % 4 != 1]
        if ones and len(others) < 3:
            out.append(Mod4Violation(r.delta, ones[0], others))
    return out
