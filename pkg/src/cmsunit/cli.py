"""Command-line surface: hcp, norm, survey, bound, witness.

Exit codes: 0 ok, 2 usage/invalid input, 3 precision exhaustion,
4 incomplete result (factorization or grid search), 5 failed precondition
(e.g. a bad nice pair).  Every command accepts --json for machine-readable
output; big integers are serialized as decimal strings.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import grosslattice, heights, survey
from .config import Config, load_config
from .heights import GridExhausted
from .intarith import format_factorization, is_probable_prime
from .modfun import (RATIONAL_SINGULAR_MODULI, PrecisionExhausted,
                     hilbert_class_polynomial, norm_difference,
                     weil_height_singular)
from .quadclass import class_number, is_discriminant

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PRECISION = 3
EXIT_INCOMPLETE = 4
EXIT_PRECONDITION = 5


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _emit(args, payload: dict, text: str) -> None:
    if args.json:
        print(json.dumps(payload, sort_keys=True))
    else:
        print(text)


def _require_discriminant(value: int) -> int:
    if not is_discriminant(value):
        raise CliError(EXIT_USAGE, f"{value} is not an imaginary quadratic discriminant")
    return value


def cmd_hcp(args, cfg: Config) -> int:
    delta = _require_discriminant(args.disc)
    H = hilbert_class_polynomial(delta, margin=cfg.precision_margin_bits)
    payload = {
        "discriminant": delta,
        "degree": H.degree,
        "coefficients": [str(c) for c in H.coeffs],
        "text": str(H),
    }
    _emit(args, payload, str(H))
    return EXIT_OK


def cmd_norm(args, cfg: Config) -> int:
    delta = _require_discriminant(args.disc)
    n = norm_difference(delta, args.jzero, margin=cfg.precision_margin_bits)
    if n == 0:
        _emit(args, {"discriminant": delta, "j0": str(args.jzero), "norm": "0"}, "0")
        return EXIT_OK
    from .intarith import factor

    f = factor(n, rho_budget=cfg.factor_budget, seed=args.seed)
    text = format_factorization(f)
    payload = {
        "discriminant": delta,
        "j0": str(args.jzero),
        "norm": str(n),
        "sign": f.sign,
        "factors": [[str(p), f.factors[p]] for p in sorted(f.factors)],
        "cofactor": str(f.cofactor),
        "complete": f.complete,
        "s": len(f.factors) if f.complete else None,
        "text": text,
    }
    _emit(args, payload, text)
    return EXIT_OK


def cmd_survey(args, cfg: Config) -> int:
    if args.jzero not in RATIONAL_SINGULAR_MODULI.values():
        raise CliError(EXIT_USAGE, f"{args.jzero} is not a rational singular modulus")
    records = survey.scan(
        args.jzero,
        args.max,
        jobs=args.jobs,
        checkpoint_dir=args.checkpoint,
        margin=cfg.precision_margin_bits,
    )
    try:
        summary = survey.table(records, args.smax)
    except survey.IncompleteScan as exc:
        raise CliError(EXIT_INCOMPLETE, str(exc))
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    if args.format in ("csv", "both"):
        path = outdir / "records.csv"
        with path.open("w") as fh:
            fh.write(survey.CSV_HEADER + "\n")
            for r in records:
                fh.write(r.csv_row() + "\n")
        written.append(str(path))
        tpath = outdir / "table.csv"
        tpath.write_text(summary.to_csv())
        written.append(str(tpath))
    if args.format in ("json", "both"):
        path = outdir / "records.json"
        with path.open("w") as fh:
            json.dump([r.to_json_dict() for r in records], fh, sort_keys=True)
        written.append(str(path))
        tpath = outdir / "table.json"
        tpath.write_text(json.dumps(summary.to_json_dict(), sort_keys=True))
        written.append(str(tpath))
    payload = {
        "j0": str(args.jzero),
        "max": args.max,
        "smax": args.smax,
        "records": len(records),
        "files": written,
        "table": summary.to_json_dict(),
    }
    _emit(args, payload, summary.render() + "\nwrote: " + ", ".join(written))
    return EXIT_OK


def _rational_j0_for(delta0: int, jzero) -> tuple[int, float]:
    """(class number, height of j0); validates an explicitly given rational j0."""
    c0 = class_number(delta0)
    if jzero is not None:
        if c0 != 1:
            raise CliError(EXIT_USAGE,
                           f"delta0={delta0} has class number {c0}; omit --jzero")
        expected = RATIONAL_SINGULAR_MODULI.get(delta0)
        if expected != jzero:
            raise CliError(EXIT_USAGE,
                           f"the singular modulus of {delta0} is {expected}, not {jzero}")
    return c0, float(weil_height_singular(delta0))


def cmd_bound(args, cfg: Config) -> int:
    c1 = cfg.c1 if args.c1 is None else args.c1
    ceiling = cfg.grid_ceiling if args.ceiling is None else args.ceiling
    if args.variant == "generic":
        if args.delta0 is None or not args.primes:
            raise CliError(EXIT_USAGE, "generic variant needs --delta0 and --primes")
        delta0 = _require_discriminant(args.delta0)
        primes = sorted({int(p) for p in args.primes.split(",")})
        if not 1 <= len(primes) <= 2:
            raise CliError(EXIT_USAGE, "need one or two primes")
        pair = survey.check_nice_pair(delta0, primes)
        if not pair.valid:
            raise CliError(EXIT_PRECONDITION,
                           "not a nice pair: " + ", ".join(pair.failures))
        c0, h_j0 = _rational_j0_for(delta0, args.jzero)
        ell, L = primes[0], primes[-1]
        try:
            B = heights.find_threshold(delta0, c0, h_j0, ell, L, c1,
                                       grid_ratio=cfg.grid_ratio,
                                       grid_ceiling=ceiling)
        except GridExhausted as exc:
            raise CliError(EXIT_INCOMPLETE, str(exc))
        bd = heights.majorants(delta0, c0, h_j0, ell, L, B, c1)
        payload = {
            "variant": "generic",
            "delta0": delta0,
            "primes": primes,
            "c1": c1,
            "threshold": str(B),
            "log10_threshold": len(str(B)) - 1,
            "breakdown": bd.as_dict(),
        }
        text = (f"threshold |Delta| <= {B:.6e}  (c1 = {c1})\n"
                f"breakdown at threshold: A={float(bd.A):.6g} B={float(bd.B):.6g} "
                f"C={float(bd.C):.6g} D={float(bd.D):.6g} "
                f"epsilon_sum={float(bd.epsilon_sum):.6g}")
        _emit(args, payload, text)
        return EXIT_OK

    # the j - 1728 and j - 0 pipelines
    if args.ell is None:
        raise CliError(EXIT_USAGE, f"variant {args.variant} needs --ell")
    if args.ell < 5 or not is_probable_prime(args.ell):
        raise CliError(EXIT_USAGE, "ell must be a prime >= 5")
    import math

    try:
        if args.variant == "1728":
            scan_res = heights.threshold_scan_1728(
                args.ell, c1, grid_ratio=cfg.grid_ratio,
                ceiling_log10=math.log10(ceiling) if args.ceiling else 200.0)
        else:
            k = cfg.k if args.k is None else args.k
            scan_res = heights.threshold_scan_j0(
                args.ell, k, c1, grid_ratio=cfg.grid_ratio,
                ceiling_log10=math.log10(ceiling) if args.ceiling else 1e55)
    except GridExhausted as exc:
        raise CliError(EXIT_INCOMPLETE, str(exc))
    payload = {
        "variant": scan_res.variant,
        "c1": c1,
        "params": scan_res.params,
        "log10_threshold": scan_res.log10_bound,
        "breakdown": scan_res.terms_dict(),
    }
    _emit(args, payload,
          f"threshold |Delta| <= 10^{scan_res.log10_bound:.6g}  "
          f"(variant {scan_res.variant}, c1 = {c1}, params {scan_res.params})")
    return EXIT_OK


def cmd_witness(args, cfg: Config) -> int:
    ell, n = args.ell, args.n
    if ell < 5 or ell % 3 != 2 or not is_probable_prime(ell):
        raise CliError(EXIT_USAGE, "ell must be a prime >= 5 congruent to 2 mod 3")
    if n < 0:
        raise CliError(EXIT_USAGE, "n must be >= 0")
    report = grosslattice.verify_witness(ell, n)
    verdict = "PASS" if report.passed else "FAIL"
    payload = {
        "ell": ell,
        "n": n,
        "discriminant": report.discriminant,
        "predicted": report.predicted,
        "observed": report.observed,
        "pass": report.passed,
    }
    text = (f"D = {report.discriminant}  predicted v_{ell} >= {report.predicted}  "
            f"observed {report.observed}  {verdict}")
    _emit(args, payload, text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cmsunit",
        description="singular moduli, exact norms of j - j0 and S-unit surveys",
    )
    parser.add_argument("--config", default=None,
                        help="key=value config file (or set CM_SUNIT_CONFIG)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("hcp", help="print the Hilbert class polynomial")
    p.add_argument("--disc", type=int, required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_hcp)

    p = sub.add_parser("norm", help="factored norm of j - j0")
    p.add_argument("--disc", type=int, required=True)
    p.add_argument("--jzero", type=int, required=True)
    p.add_argument("--seed", type=int, default=None,
                   help="override the deterministic rho seed (stress testing)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_norm)

    p = sub.add_parser("survey", help="S-unit scan and table")
    p.add_argument("--jzero", type=int, required=True)
    p.add_argument("--max", type=int, required=True)
    p.add_argument("--smax", type=int, required=True)
    p.add_argument("--out", default="survey-out")
    p.add_argument("--format", choices=("csv", "json", "both"), default="both")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--checkpoint", default=None,
                   help="directory for resumable per-1000 chunk files")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_survey)

    p = sub.add_parser("bound", help="effective discriminant threshold")
    p.add_argument("--variant", choices=("generic", "1728", "j0"), default="generic")
    p.add_argument("--delta0", type=int, default=None)
    p.add_argument("--jzero", type=int, default=None)
    p.add_argument("--primes", default=None, help="comma-separated, at most two")
    p.add_argument("--ell", type=int, default=None)
    p.add_argument("--k", type=float, default=None)
    p.add_argument("--c1", type=float, default=None)
    p.add_argument("--ceiling", type=float, default=None,
                   help="grid ceiling for the threshold search")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_bound)

    p = sub.add_parser("witness", help="verify a large-valuation witness discriminant")
    p.add_argument("--ell", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_witness)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: bad config: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.fn(args, cfg)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except PrecisionExhausted as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except survey.IncompleteScan as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INCOMPLETE


if __name__ == "__main__":
    sys.exit(main())
