"""Closed-form separability probabilities and their polynomial structure.

Three cases have known closed forms, indexed by the Dyson-like parameter
alpha: 1/2 (real), 1 (complex), 2 (quaternionic).  Each complementary
probability F(alpha, k) = 1 - P(alpha, k) is a ratio of gamma values at
integer and half-integer points times a polynomial in the induced-measure
index k, so P is an exact rational for every integer k and the sqrt(pi)
factors must cancel identically (this module asserts that rather than
assuming it).

Beyond plain evaluation the module exposes the scaffolding common to all
three formulas: the gamma kernel G(alpha, k), the polynomial p_alpha with
F = p * G (integer alpha) or F = p / (k + 2 alpha + 1)_{alpha + 1/2} * G
(half-integer alpha), predictions for p's degree, leading and next-order
coefficients, and a check of the extracted polynomial against those
predictions.  A log-domain evaluator covers the large-k regime, where F
underflows anything but a big float and the ratio log P_{k+1} / log P_k
approaches 16/27.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import mpmath

from .errors import DomainError, PrecisionError, SingularityError, \
    StructureViolation
from .exactnum import RationalLike, SqrtPiScaled, as_rational, gamma_half, \
    is_half_integer, pochhammer

HALF = Fraction(1, 2)


@dataclass(frozen=True)
class _ClosedForm:
    """F(k) = const * 4^(k+shift) * poly(k) * G(k+u) G(2k+v) / (sqrt(pi) G(3k+w))."""

    const: Fraction
    shift: int
    poly: Tuple[int, ...]          # ascending coefficients, all positive
    u: Fraction
    v: Fraction
    w: Fraction


_FORMULAS: Dict[Fraction, _ClosedForm] = {
    HALF: _ClosedForm(Fraction(1), 1, (15, 8),
                      Fraction(2), Fraction(9, 2), Fraction(7)),
    Fraction(1): _ClosedForm(Fraction(3), 3, (25, 14, 2),
                             Fraction(7, 2), Fraction(9), Fraction(13)),
    Fraction(2): _ClosedForm(Fraction(1, 3), 6, (2430, 1452, 355, 42, 2),
                             Fraction(13, 2), Fraction(15), Fraction(22)),
}

MODE_EXACT = "exact"
MODE_FLOAT = "float"

DEFAULT_LOG_DIGITS = 200
ASYMPTOTE = Fraction(16, 27)


def _poly_eval(coeffs, x):
    out = coeffs[-1] * 0 if coeffs else 0
    for c in reversed(coeffs):
        out = out * x + c
    return out


def _check_alpha_case(alpha: RationalLike) -> Fraction:
    alpha = as_rational(alpha)
    if alpha not in _FORMULAS:
        raise DomainError(
            f"no closed form for alpha={alpha}; supported: 1/2, 1, 2")
    return alpha


def _f_exact(alpha: Fraction, k: int) -> Fraction:
    cf = _FORMULAS[alpha]
    args = (k + cf.u, 2 * k + cf.v, 3 * k + cf.w)
    for arg in args:
        if arg <= 0:
            raise SingularityError(
                f"gamma argument {arg} <= 0 at alpha={alpha}, k={k}")
    rat = cf.const * Fraction(4) ** (k + cf.shift) * _poly_eval(cf.poly, k)
    num = gamma_half(args[0]) * gamma_half(args[1]) * rat
    den = gamma_half(args[2]) * SqrtPiScaled(Fraction(1), 1)
    return (num / den).to_rational()


def _log_f(alpha: Fraction, k: int) -> mpmath.mpf:
    """log F(alpha, k) at the ambient working precision."""
    cf = _FORMULAS[alpha]
    args = [k + cf.u, 2 * k + cf.v, 3 * k + cf.w]
    for arg in args:
        if arg <= 0:
            raise SingularityError(
                f"gamma argument {arg} <= 0 at alpha={alpha}, k={k}")
    am = [mpmath.mpf(a.numerator) / a.denominator for a in args]
    pv = _poly_eval(cf.poly, k)
    return (mpmath.log(mpmath.mpf(cf.const.numerator) / cf.const.denominator)
            + (k + cf.shift) * mpmath.log(4)
            + mpmath.log(pv)
            + mpmath.loggamma(am[0]) + mpmath.loggamma(am[1])
            - mpmath.log(mpmath.pi) / 2 - mpmath.loggamma(am[2]))


def sep_prob(alpha: RationalLike, k: int, mode: str = MODE_EXACT,
             precision: Optional[int] = None):
    """Separability probability 1 - F(alpha, k), exact by default.

    k may be any integer >= -2 whose gamma arguments stay positive; the
    one excluded point is (alpha, k) = (1/2, -2), where the formula hits
    Gamma(0).  Float mode evaluates 1 - exp(log F) instead and is meant
    for k large enough that the factorials are unwieldy.
    """
    alpha = _check_alpha_case(alpha)
    if isinstance(k, bool) or not isinstance(k, int):
        raise DomainError(f"k must be an integer, got {k!r}")
    if k < -2:
        raise DomainError(f"k must be >= -2, got {k}")
    if mode == MODE_EXACT:
        return 1 - _f_exact(alpha, k)
    if mode != MODE_FLOAT:
        raise DomainError(f"unknown mode {mode!r}")
    digits = precision or 50
    with mpmath.mp.workdps(digits + 10):
        value = 1 - mpmath.exp(_log_f(alpha, k))
    with mpmath.mp.workdps(digits):
        value = +value
    return value


def G(alpha: RationalLike, k: int) -> Fraction:
    """The gamma kernel 4^k G(k+3a+3/2) G(2k+5a+2) / (G(1/2) G(3k+10a+2))."""
    alpha = as_rational(alpha)
    if not is_half_integer(alpha) or alpha < HALF:
        raise DomainError(f"alpha must be a half-integer >= 1/2, got {alpha}")
    if isinstance(k, bool) or not isinstance(k, int):
        raise DomainError(f"k must be an integer, got {k!r}")
    args = (k + 3 * alpha + Fraction(3, 2), 2 * k + 5 * alpha + 2,
            3 * k + 10 * alpha + 2)
    for arg in args:
        if arg <= 0:
            raise DomainError(
                f"gamma argument {arg} <= 0 at alpha={alpha}, k={k}")
    num = gamma_half(args[0]) * gamma_half(args[1]) * Fraction(4) ** k
    den = gamma_half(args[2]) * SqrtPiScaled(Fraction(1), 1)
    return (num / den).to_rational()


@dataclass(frozen=True)
class StructuralPrediction:
    """Predicted shape of p_alpha.

    g1/g2 bound the consecutive linear-factor chain (k+g1)...(k+g2), c2 the
    second coefficient of monic p, c2_prime the sum g1+...+g2, c3 the third
    coefficient of monic p; all four plus reduced_degree apply to integer
    alpha only, and c3 additionally only when alpha is not divisible by 4.
    half_integer_pochhammer is the (k + base)_count correction dividing p
    in the half-integer case.
    """

    alpha: Fraction
    degree: int
    leading_coeff: Fraction
    g1: Optional[int] = None
    g2: Optional[int] = None
    c2: Optional[Fraction] = None
    c2_prime: Optional[Fraction] = None
    c3: Optional[Fraction] = None
    reduced_degree: Optional[int] = None
    half_integer_pochhammer: Optional[Tuple[Fraction, int]] = None


def structural_prediction(alpha: RationalLike) -> StructuralPrediction:
    """Predicted degree, leading and next coefficients of p_alpha."""
    alpha = as_rational(alpha)
    if not is_half_integer(alpha) or alpha < HALF:
        raise DomainError(f"alpha must be a half-integer >= 1/2, got {alpha}")
    leading = Fraction(2 ** int(8 * alpha + 1), math.factorial(int(2 * alpha - 1)))
    if alpha.denominator == 2:
        return StructuralPrediction(
            alpha=alpha,
            degree=int(5 * alpha - Fraction(3, 2)),
            leading_coeff=leading,
            half_integer_pochhammer=(2 * alpha + 1, int(alpha + HALF)))
    a = int(alpha)
    g1 = 2 * a + 1 + (a + 1) // 2
    g2 = 3 * a + (a + 1) // 3
    if a % 4 == 0:
        c2 = -4 - a + Fraction(17, 2) * a * a
    else:
        c2 = -3 + Fraction(3, 2) * a + Fraction(17, 2) * a * a
    c2_prime = Fraction((g1 + g2) * (g2 - g1 + 1), 2)
    c3 = None
    if a % 4 != 0:
        c3 = (11 - Fraction(389, 24) * a - Fraction(333, 16) * a ** 2
              + Fraction(115, 48) * a ** 3 + Fraction(289, 8) * a ** 4)
    return StructuralPrediction(
        alpha=alpha,
        degree=4 * a - 2,
        leading_coeff=leading,
        g1=g1, g2=g2, c2=c2, c2_prime=c2_prime, c3=c3,
        reduced_degree=3 * a + (a + 1) // 2 - (a + 1) // 3 - 2)


def extract_p(alpha: RationalLike) -> Tuple[Fraction, ...]:
    """p_alpha as ascending coefficients, by exact interpolation of F/G.

    Samples k = 0..degree plus one witness point; a witness mismatch means
    the predicted degree is wrong for this formula and raises
    StructureViolation rather than returning a bogus polynomial.
    """
    alpha = _check_alpha_case(alpha)
    deg = structural_prediction(alpha).degree
    values = [(k, 1 - _f_exact(alpha, k)) for k in range(deg + 2)]
    return extract_p_from_values(alpha, values)


def extract_p_from_values(alpha: RationalLike,
                          sep_probs) -> Tuple[Fraction, ...]:
    """p_alpha interpolated from supplied probabilities [(k, P(alpha,k))].

    The closed-form route above is a special case; this one also accepts
    reconstructed pipeline values, or any alpha for which the caller has a
    rational sequence.  Needs degree+2 samples at distinct integer k; all
    samples beyond the first degree+1 act as consistency witnesses.
    """
    alpha = as_rational(alpha)
    pred = structural_prediction(alpha)
    deg = pred.degree
    pairs = [(kk, as_rational(p)) for kk, p in sep_probs]
    if len(set(kk for kk, _ in pairs)) != len(pairs):
        raise DomainError("duplicate k samples")
    if len(pairs) < deg + 2:
        raise DomainError(
            f"need {deg + 2} samples for degree {deg} plus a witness, "
            f"got {len(pairs)}")

    def sample(kk: int, p: Fraction) -> Fraction:
        val = (1 - p) / G(alpha, kk)
        if pred.half_integer_pochhammer is not None:
            base, count = pred.half_integer_pochhammer
            val *= pochhammer(kk + base, count)
        return val

    nodes, witnesses = pairs[:deg + 1], pairs[deg + 1:]
    coeffs = _interpolate([kk for kk, _ in nodes],
                          [sample(kk, p) for kk, p in nodes])
    for kk, p in witnesses:
        if _poly_eval(coeffs, kk) != sample(kk, p):
            raise StructureViolation(
                f"degree-{deg} interpolant fails at witness k={kk} "
                f"for alpha={alpha}")
    return tuple(coeffs)


def _interpolate(xs: List[int], ys: List[Fraction]) -> List[Fraction]:
    """Newton divided differences, expanded to ascending coefficients."""
    n = len(xs)
    dd = [as_rational(y) for y in ys]
    for level in range(1, n):
        for i in range(n - 1, level - 1, -1):
            dd[i] = (dd[i] - dd[i - 1]) / (xs[i] - xs[i - level])
    poly = [dd[-1]]
    for i in range(n - 2, -1, -1):
        shifted = [Fraction(0)] + poly
        for j in range(len(poly)):
            shifted[j] -= xs[i] * poly[j]
        shifted[0] += dd[i]
        poly = shifted
    return poly


def _deflate(coeffs: List[Fraction], root: Fraction) -> List[Fraction]:
    """Divide by (k - root); the remainder must vanish."""
    desc = list(reversed(coeffs))
    out = [desc[0]]
    for c in desc[1:]:
        out.append(c + root * out[-1])
    if out[-1] != 0:
        raise StructureViolation(f"nonzero remainder dividing by k - {root}")
    return list(reversed(out[:-1]))


@dataclass(frozen=True)
class StructureCheck:
    name: str
    expected: object
    actual: object
    ok: bool


@dataclass(frozen=True)
class StructureReport:
    alpha: Fraction
    prediction: StructuralPrediction
    coeffs: Tuple[Fraction, ...]
    checks: Tuple[StructureCheck, ...]

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)


def verify_structure(alpha: RationalLike) -> StructureReport:
    """Compare the extracted p_alpha against every structural prediction."""
    alpha = _check_alpha_case(alpha)
    pred = structural_prediction(alpha)
    coeffs = extract_p(alpha)
    return StructureReport(alpha=alpha, prediction=pred, coeffs=coeffs,
                           checks=structure_checks(pred, coeffs))


def structure_checks(pred: StructuralPrediction,
                     coeffs) -> Tuple[StructureCheck, ...]:
    """The individual prediction-vs-polynomial comparisons.

    Split out from verify_structure so a polynomial fitted from pipeline
    approximants can be screened the same way.
    """
    coeffs = tuple(as_rational(c) for c in coeffs)
    deg = len(coeffs) - 1
    while deg > 0 and coeffs[deg] == 0:
        deg -= 1
    coeffs = coeffs[:deg + 1]
    checks = [
        StructureCheck("degree", pred.degree, deg, deg == pred.degree),
        StructureCheck("leading_coeff", pred.leading_coeff, coeffs[deg],
                       coeffs[deg] == pred.leading_coeff),
    ]
    if pred.g1 is not None:
        chain = list(range(pred.g1, pred.g2 + 1))
        divisible = all(_poly_eval(coeffs, -i) == 0 for i in chain)
        checks.append(StructureCheck("factor_chain", True, divisible, divisible))
        monic2 = coeffs[deg - 1] / coeffs[deg]
        checks.append(StructureCheck("monic_second", pred.c2, monic2,
                                     monic2 == pred.c2))
        if divisible:
            reduced = list(coeffs)
            for i in chain:
                reduced = _deflate(reduced, Fraction(-i))
            rdeg = len(reduced) - 1
            checks.append(StructureCheck("reduced_degree", pred.reduced_degree,
                                         rdeg, rdeg == pred.reduced_degree))
            red2 = reduced[rdeg - 1] / reduced[rdeg]
            expect = pred.c2 - pred.c2_prime
            checks.append(StructureCheck("reduced_second", expect, red2,
                                         red2 == expect))
        else:
            checks.append(StructureCheck("reduced_degree", pred.reduced_degree,
                                         None, False))
            checks.append(StructureCheck("reduced_second",
                                         pred.c2 - pred.c2_prime, None, False))
        if pred.c3 is not None:
            monic3 = coeffs[deg - 2] / coeffs[deg]
            checks.append(StructureCheck("monic_third", pred.c3, monic3,
                                         monic3 == pred.c3))
    return tuple(checks)


def log_ratio(alpha: RationalLike, k: int, precision: int = DEFAULT_LOG_DIGITS) -> mpmath.mpf:
    """log P(alpha, k+1) / log P(alpha, k) via log-gamma.

    F is astronomically small at large k, so both logs are taken as
    log1p(-exp(log F)) with log F assembled from loggamma; big-float
    exponents keep exp(log F) representable at any k.  The a-priori error
    bound 10^(12 - precision) * (1 + |log F_k| + |log F_{k+1}|) must stay
    below 10^-3 or the call refuses to answer.
    """
    alpha = _check_alpha_case(alpha)
    if isinstance(k, bool) or not isinstance(k, int) or k < 1:
        raise DomainError(f"k must be an integer >= 1, got {k!r}")
    if not isinstance(precision, int) or precision < 15:
        raise DomainError(f"precision must be an integer >= 15, got {precision!r}")
    with mpmath.mp.workdps(precision):
        lf_k = _log_f(alpha, k)
        lf_k1 = _log_f(alpha, k + 1)
        bound = mpmath.mpf(10) ** (12 - precision) * (1 + abs(lf_k) + abs(lf_k1))
        if bound > mpmath.mpf("1e-3"):
            raise PrecisionError(
                f"precision {precision} cannot resolve the ratio at k={k}: "
                f"error bound {mpmath.nstr(bound, 3)}")
        value = mpmath.log1p(-mpmath.exp(lf_k1)) / mpmath.log1p(-mpmath.exp(lf_k))
        value = +value
    return value
