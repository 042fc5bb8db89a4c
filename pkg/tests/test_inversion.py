"""Unit tests for the moment-inversion tail estimators.

The recurrence tables are validated from first principles: the polynomials
rebuilt from the B rows must be orthogonal for the weight (1-t^2)^a with
the exact norms h0 eta_j, evaluate to 1 at t = 1, and have partial weight
integrals q1 g_j.  The tail coefficients are then cross-checked against an
independent assembly from those tables.
"""

import math
from fractions import Fraction

import mpmath
import pytest

import sepprob.inversion as inversion
from oracles import tail_coeffs_from_tables
from sepprob.errors import DomainError
from sepprob.exactnum import gamma_half
from sepprob.inversion import METHOD_GEGENBAUER, METHOD_LEGENDRE, \
    MODE_EXACT, MODE_FLOAT, build_tables, convergence_profile, \
    gegenbauer_tail, legendre_tail
from sepprob.moments import DIFF_INTERVAL, PT_INTERVAL, Scenario, Variable, \
    moment_sequence

HALF = Fraction(1, 2)


def monomial_coeffs(row, c0):
    """Convert a Taylor row around c0 into plain t-monomial coefficients."""
    out = [Fraction(0)] * len(row)
    for i, b in enumerate(row):
        for r in range(i + 1):
            out[r] += b * math.comb(i, r) * (-c0) ** (i - r)
    return out


def poly_mul(p, q):
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] += a * b
    return out


def weight_integral(coeffs, a):
    """integral of poly(t) (1-t^2)^a over [-1, 1], exactly."""
    total = Fraction(0)
    for r, c in enumerate(coeffs):
        if r % 2 or c == 0:
            continue
        total += c * sum(Fraction(math.comb(a, s) * (-1) ** s * 2,
                                  r + 2 * s + 1) for s in range(a + 1))
    return total


def partial_weight_integral(coeffs, a, zeta):
    """integral of poly(t) (1-t^2)^a over [zeta, 1], exactly."""
    total = Fraction(0)
    for r, c in enumerate(coeffs):
        if c == 0:
            continue
        total += c * sum(Fraction(math.comb(a, s) * (-1) ** s, r + 2 * s + 1)
                         * (1 - zeta ** (r + 2 * s + 1))
                         for s in range(a + 1))
    return total


def test_interval_map_constants():
    pt = build_tables(PT_INTERVAL, 0, 1)
    assert (pt.c0, pt.c1) == (Fraction(15, 17), Fraction(512, 17))
    diff = build_tables(DIFF_INTERVAL, 0, 1)
    assert (diff.c0, diff.c1) == (Fraction(13, 14), Fraction(216, 7))


def test_tables_shape():
    t = build_tables(PT_INTERVAL, 2, 7)
    assert len(t.B) == 8 and len(t.B[5]) == 6
    assert len(t.eta) == 8 and t.eta[0] == 1
    assert len(t.g) == 7 and t.g[0] == 1 and t.g[1] == t.c0
    t0 = build_tables(PT_INTERVAL, 0, 0)
    assert t0.B == ((Fraction(1),),) and t0.g == ()


def test_polynomials_normalized_at_one():
    for a in (0, 1, 3):
        t = build_tables(PT_INTERVAL, a, 12)
        for row in t.B:
            assert sum(b * (1 - t.c0) ** i for i, b in enumerate(row)) == 1


def test_orthogonality_and_norms():
    # the defining property of the tables, checked by exact integration
    for a in (0, 1, 2):
        t = build_tables(PT_INTERVAL, a, 6)
        h0 = (gamma_half(HALF) * gamma_half(a + 1)
              / gamma_half(a + Fraction(3, 2))).to_rational()
        polys = [monomial_coeffs(row, t.c0) for row in t.B]
        for i in range(7):
            for j in range(i, 7):
                integral = weight_integral(poly_mul(polys[i], polys[j]), a)
                if i == j:
                    assert integral == h0 * t.eta[i]
                else:
                    assert integral == 0


def test_same_polynomials_on_both_intervals():
    # B rows depend on the interval only through the expansion point
    pt = build_tables(PT_INTERVAL, 1, 8)
    diff = build_tables(DIFF_INTERVAL, 1, 8)
    for j in range(9):
        assert monomial_coeffs(pt.B[j], pt.c0) == \
            monomial_coeffs(diff.B[j], diff.c0)


def test_partial_integrals_match_g():
    for interval in (PT_INTERVAL, DIFF_INTERVAL):
        for a in (0, 1, 2):
            t = build_tables(interval, a, 6)
            zeta = t.c0
            q1 = (1 - zeta * zeta) ** (a + 1) / (2 * (a + 1))
            for j in range(1, 7):
                poly = monomial_coeffs(t.B[j], t.c0)
                assert partial_weight_integral(poly, a, zeta) == q1 * t.g[j - 1]


def test_build_tables_validation():
    with pytest.raises(DomainError):
        build_tables(PT_INTERVAL, -1, 3)
    with pytest.raises(DomainError):
        build_tables(PT_INTERVAL, True, 3)
    with pytest.raises(DomainError):
        build_tables(PT_INTERVAL, 0, -1)
    with pytest.raises(DomainError):
        build_tables((Fraction(1), Fraction(1)), 0, 3)


def test_exact_coeffs_match_table_assembly():
    # the streamed scaled-integer evaluator against the direct formula
    seq = moment_sequence(Scenario(Variable.PT_DET, Fraction(1), Fraction(0)), 40)
    dseq = moment_sequence(Scenario(Variable.DIFF, Fraction(1), Fraction(0)), 40)
    for moments, interval in ((seq, PT_INTERVAL), (dseq, DIFF_INTERVAL)):
        for a in (0, 2):
            for m in (0, 1, 13, 40):
                est = gegenbauer_tail(moments, a, 0, m, mode=MODE_EXACT)
                expect = tail_coeffs_from_tables(build_tables(interval, a, m))
                assert est.coeffs == expect
                assert est.value == sum(
                    A * mu for A, mu in zip(expect, moments.mu))


def test_coeffs_do_not_depend_on_the_moments():
    a_seq = moment_sequence(Scenario(Variable.PT_DET, Fraction(1), Fraction(0)), 25)
    b_seq = moment_sequence(Scenario(Variable.PT_DET, Fraction(3, 2), Fraction(2)), 25)
    ea = gegenbauer_tail(a_seq, 0, 0, 25)
    eb = gegenbauer_tail(b_seq, 0, 0, 25)
    assert ea.coeffs == eb.coeffs
    assert ea.value != eb.value


def test_truncation_order_zero_baselines():
    pt = moment_sequence(Scenario(Variable.PT_DET, Fraction(1), Fraction(0)), 0)
    diff = moment_sequence(Scenario(Variable.DIFF, Fraction(1), Fraction(0)), 0)
    assert legendre_tail(pt, 0, 0).value == Fraction(1, 17)
    assert legendre_tail(diff, 0, 0).value == Fraction(1, 28)


def test_endpoint_tails_are_exact():
    for variable, interval in ((Variable.PT_DET, PT_INTERVAL),
                               (Variable.DIFF, DIFF_INTERVAL)):
        seq = moment_sequence(Scenario(variable, Fraction(1), Fraction(0)), 30)
        lo, hi = interval
        for a in (0, 2):
            for m in (0, 1, 2, 9, 30):
                assert gegenbauer_tail(seq, a, lo, m).value == 1
                assert gegenbauer_tail(seq, a, hi, m).value == 0


def test_legendre_is_weight_zero_gegenbauer():
    seq = moment_sequence(Scenario(Variable.PT_DET, Fraction(1), Fraction(0)), 30)
    for m in (0, 11, 30):
        leg = legendre_tail(seq, 0, m)
        geg = gegenbauer_tail(seq, 0, 0, m)
        assert leg.value == geg.value
        assert leg.coeffs == geg.coeffs
        assert leg.method == METHOD_LEGENDRE
        assert geg.method == METHOD_GEGENBAUER
        assert leg.alpha_w == 0


def test_stream_reuse_after_larger_order():
    # a fresh weight so the shared bank has not streamed this case yet;
    # asking for a smaller order after a larger one must not disturb it
    seq = moment_sequence(Scenario(Variable.PT_DET, Fraction(1), Fraction(0)), 30)
    first30 = gegenbauer_tail(seq, 1, 0, 30).coeffs
    ten = gegenbauer_tail(seq, 1, 0, 10).coeffs
    assert ten == tail_coeffs_from_tables(build_tables(PT_INTERVAL, 1, 10))
    assert gegenbauer_tail(seq, 1, 0, 30).coeffs == first30


def test_float_mode_tracks_exact_mode():
    seq = moment_sequence(Scenario(Variable.PT_DET, Fraction(1), Fraction(0)), 200)
    for m, digits in ((117, 30), (200, 60)):
        exact = legendre_tail(seq, 0, m, mode=MODE_EXACT)
        approx = legendre_tail(seq, 0, m, mode=MODE_FLOAT, precision=digits)
        assert approx.mode == MODE_FLOAT and approx.precision == digits
        with mpmath.mp.workdps(digits + 20):
            err = abs(approx.value - inversion._mpf_of(exact.value))
            assert err < mpmath.mpf(10) ** -(digits - 10)


def test_auto_mode_switches_at_the_limit(monkeypatch):
    monkeypatch.setattr(inversion, "AUTO_EXACT_LIMIT", 10)
    seq = moment_sequence(Scenario(Variable.PT_DET, Fraction(1), Fraction(0)), 11)
    assert legendre_tail(seq, 0, 10).mode == MODE_EXACT
    est = legendre_tail(seq, 0, 11)
    assert est.mode == MODE_FLOAT
    assert est.precision == inversion.DEFAULT_FLOAT_DIGITS


def test_tail_validation_errors():
    seq = moment_sequence(Scenario(Variable.PT_DET, Fraction(1), Fraction(0)), 5)
    with pytest.raises(DomainError):
        gegenbauer_tail(seq, -1, 0, 3)
    with pytest.raises(DomainError):
        gegenbauer_tail(seq, 0, 0, -1)
    with pytest.raises(DomainError):
        gegenbauer_tail(seq, 0, 0, "3")
    with pytest.raises(DomainError):
        gegenbauer_tail(seq, 0, 0, 6)  # needs 7 moments, has 6
    with pytest.raises(DomainError):
        gegenbauer_tail(seq, 0, Fraction(1, 2), 3)  # outside support
    with pytest.raises(DomainError):
        gegenbauer_tail(seq, 0, 0, 3, mode="symbolic")


def test_convergence_profile_matches_single_calls():
    scenario = Scenario(Variable.DIFF, Fraction(2), Fraction(1))
    profile = convergence_profile(scenario, METHOD_LEGENDRE, 0, [5, 12, 20])
    seq = moment_sequence(scenario, 20)
    for m, value in profile:
        assert value == legendre_tail(seq, 0, m).value
    assert [m for m, _ in profile] == [5, 12, 20]


def test_convergence_profile_validation():
    scenario = Scenario(Variable.PT_DET, Fraction(1), Fraction(0))
    assert convergence_profile(scenario, METHOD_LEGENDRE, 0, []) == []
    with pytest.raises(DomainError):
        convergence_profile(scenario, METHOD_LEGENDRE, 0, [5, 5])
    with pytest.raises(DomainError):
        convergence_profile(scenario, METHOD_LEGENDRE, 0, [5, -1])
    with pytest.raises(DomainError):
        convergence_profile(scenario, "jacobi", 0, [5, 10])
