import json

import pytest

from cmsunit.intarith import Factorization
from cmsunit.survey import (CSV_HEADER, IncompleteScan, SurveyRecord,
                            audit_mod4, audit_pn_structure, check_nice_pair,
                            matches_prime_power_pattern, probably_galois,
                            scan, singular_modulus_discriminant, table)


def test_singular_modulus_discriminant():
    assert singular_modulus_discriminant(0) == -3
    assert singular_modulus_discriminant(1728) == -4
    assert singular_modulus_discriminant(-3375) == -7
    with pytest.raises(ValueError):
        singular_modulus_discriminant(5)


def test_scan_basics():
    rs = scan(0, 100)
    deltas = [r.delta for r in rs]
    assert deltas == sorted(deltas, key=abs)
    assert -3 not in deltas  # the discriminant of j0 itself
    by = {r.delta: r for r in rs}
    assert by[-11].norm_factorization.factors == {2: 15}
    assert by[-11].norm_factorization.sign == -1
    assert by[-11].s == 1
    assert by[-4].norm_factorization.factors == {2: 6, 3: 3}
    assert all(r.complete for r in rs)
    # norms reconstruct exactly
    from cmsunit.modfun import norm_difference

    for r in rs[:20]:
        assert r.norm_factorization.reconstruct() == norm_difference(r.delta, 0)


def test_scan_1728_excludes_minus4():
    rs = scan(1728, 50)
    deltas = [r.delta for r in rs]
    assert -4 not in deltas and -3 in deltas
    by = {r.delta: r for r in rs}
    assert by[-7].norm_factorization.factors == {3: 6, 7: 1}  # -3375-1728 = -5103
    assert by[-8].norm_factorization.factors == {2: 7, 7: 2}  # 8000-1728 = 6272


def test_scan_determinism_and_serialization():
    a = scan(0, 300)
    b = scan(0, 300)
    ser_a = json.dumps([r.to_json_dict() for r in a], sort_keys=True)
    ser_b = json.dumps([r.to_json_dict() for r in b], sort_keys=True)
    assert ser_a == ser_b
    csv_a = "\n".join(r.csv_row() for r in a)
    csv_b = "\n".join(r.csv_row() for r in b)
    assert csv_a == csv_b
    # round-trip
    back = [SurveyRecord.from_json_dict(d) for d in json.loads(ser_a)]
    assert back == a


def test_scan_jobs_independent():
    a = scan(0, 2200)
    b = scan(0, 2200, jobs=3)
    assert a == b


def test_scan_checkpoint_resume(tmp_path):
    ck = tmp_path / "ck"
    a = scan(0, 2500, checkpoint_dir=str(ck))
    files = sorted(ck.glob("scan_j0_chunk*.jsonl"))
    assert len(files) == 2  # 1249 records in chunks of 1000
    # resume must reuse the files (byte-identical output either way)
    before = [f.stat().st_mtime_ns for f in files]
    b = scan(0, 2500, checkpoint_dir=str(ck))
    after = [f.stat().st_mtime_ns for f in sorted(ck.glob("scan_j0_chunk*.jsonl"))]
    assert a == b and before == after


def test_csv_header_and_row_shape():
    assert CSV_HEADER == "delta,class_number,norm_sign,factorization,s,complete"
    r = scan(0, 20)[-1]
    row = r.csv_row()
    assert row.split(",")[0] == str(r.delta)
    assert row.endswith("true")


def test_table_membership_semantics():
    rs = scan(0, 100)
    t = table(rs, 3)
    # cumulative rows: J_1 subset J_2 subset J_3
    assert t.rows[0].count <= t.rows[1].count <= t.rows[2].count
    # counts of exact rows sum to the cumulative count
    assert sum(r.count for r in t.rows_exact) == t.rows[2].count
    # prime inventories nest
    assert set(t.rows[0].primes) <= set(t.rows[1].primes) <= set(t.rows[2].primes)


def test_table_refuses_incomplete_records():
    rec = SurveyRecord(-9999, 1, Factorization(1, {2: 1}, 1234567), None, False)
    with pytest.raises(IncompleteScan):
        table([rec], 3)
    # but an incomplete record already above the cutoff is fine
    rec2 = SurveyRecord(
        -9999, 1, Factorization(1, {2: 1, 3: 1, 5: 1, 7: 1}, 1234567), None, False
    )
    t = table([rec2], 3)
    assert t.rows[-1].count == 0


def test_table_norm_one_counts_as_s_zero():
    rec = SurveyRecord(-9998, 1, Factorization(1, {}, 1), 0, True)
    t = table([rec], 1)
    assert t.rows[0].count == 1 and t.rows[0].primes == []


def test_check_nice_pair_examples():
    assert check_nice_pair(-7, {13, 17}).valid
    p = check_nice_pair(-7, {7})
    assert not p.valid and any("delta0" in f for f in p.failures)
    p = check_nice_pair(-7, {3})
    assert not p.valid and any(f == "divides-norm-j0:3" for f in p.failures)
    assert not check_nice_pair(-7, {4}).valid  # not prime


def test_nice_pair_height():
    import math

    p = check_nice_pair(-7, {13, 17})
    assert abs(p.height_j0 - math.log(3375)) < 1e-9


def test_probably_galois():
    from cmsunit.modfun import hilbert_class_polynomial

    assert probably_galois(hilbert_class_polynomial(-15))  # degree 2
    assert not probably_galois(hilbert_class_polynomial(-23))  # cubic, non-Galois
    # -severe Galois case: class group (2,2) gives a Galois quartic
    assert probably_galois(hilbert_class_polynomial(-84))


def test_prime_power_pattern():
    assert matches_prime_power_pattern(-23 * 13**2, -23, [13, 17])
    assert matches_prime_power_pattern(-23, -23, [13])
    assert not matches_prime_power_pattern(-23 * 6, -23, [2, 3])  # 6 not a power
    assert not matches_prime_power_pattern(-23 * 13 * 17, -23, [13, 17])
    assert not matches_prime_power_pattern(-24, -23, [13])


def test_audit_pn_structure_small_range():
    rs = scan(0, 300)
    # (j of -23, {59}) is a nice pair with a non-Galois cubic field
    violations = audit_pn_structure(rs, -23, [59])
    assert violations == []
    with pytest.raises(ValueError):
        audit_pn_structure(rs, -15, [19], assume_non_galois=False)


def test_audit_mod4_examples():
    bad = SurveyRecord(-991, 1, Factorization(1, {5: 1, 2: 1}), 2, True)
    good = SurveyRecord(-992, 1, Factorization(1, {5: 1, 2: 1, 3: 1, 7: 1, 11: 1}), 5, True)
    none_1mod4 = SurveyRecord(-993, 1, Factorization(1, {2: 3, 3: 1}), 2, True)
    out = audit_mod4([bad, good, none_1mod4])
    assert len(out) == 1 and out[0].delta == -991 and out[0].prime_1mod4 == 5
    with pytest.raises(IncompleteScan):
        audit_mod4([SurveyRecord(-1, 1, Factorization(1, {}, 35), None, False)])
