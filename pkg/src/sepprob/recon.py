"""Recovery of exact rationals from high-precision decimal approximants.

A moment-based tail estimate that agrees with some p/q "to N decimal
places" only supports the claim P = p/q if no other small-denominator
rational sits inside the error window.  reconstruct makes that inference
explicit: it finds the best rational approximation under a denominator
bound via the continued-fraction expansion, then decides uniqueness by
checking that both Farey neighbors of the candidate fall strictly outside
[x - eps, x + eps].  The neighbors are the closest bounded-denominator
rationals on either side, so no exhaustive scan is needed.
"""

from __future__ import annotations

import decimal
import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import mpmath

from .errors import DomainError, NoCandidateError

DEFAULT_BOUND = 10 ** 7

ApproxLike = Union[Fraction, int, float, str, decimal.Decimal, mpmath.mpf]


class Confidence(enum.Enum):
    UNIQUE = "unique"
    AMBIGUOUS = "ambiguous"


@dataclass(frozen=True)
class RationalGuess:
    value: Fraction
    denominator_bound: int
    residual: mpmath.mpf
    confidence: Confidence


def _exact_value(x: ApproxLike) -> Tuple[Fraction, Optional[Fraction]]:
    """Exact rational reading of x plus the default error radius, if any.

    Decimal renderings (str, Decimal, float via its shortest repr) carry a
    last reported digit, and the default radius is ten units of it.  Exact
    rationals and binary big floats have no such digit, so they get no
    default and the caller must state a radius.
    """
    if isinstance(x, bool):
        raise DomainError(f"not a numeric approximant: {x!r}")
    if isinstance(x, Fraction):
        return x, None
    if isinstance(x, int):
        return Fraction(x), None
    if isinstance(x, mpmath.mpf):
        if not mpmath.isfinite(x):
            raise DomainError(f"approximant must be finite, got {x}")
        sign, man, exp, _ = x._mpf_
        val = Fraction(man) * Fraction(2) ** exp
        return (-val if sign else val), None
    if isinstance(x, float):
        x = repr(x)
    if isinstance(x, str):
        try:
            x = decimal.Decimal(x)
        except decimal.InvalidOperation as exc:
            raise DomainError(f"unparseable decimal string: {x!r}") from exc
    if isinstance(x, decimal.Decimal):
        if not x.is_finite():
            raise DomainError(f"approximant must be finite, got {x}")
        exponent = x.as_tuple().exponent
        return Fraction(x), Fraction(10) ** (exponent + 1)
    raise DomainError(f"not a numeric approximant: {x!r}")


def _best_within(x: Fraction, bound: int) -> Fraction:
    """Best rational approximation to x with denominator <= bound.

    Walks the continued fraction of x; the answer is the last convergent
    that fits the bound or the deepest semiconvergent past it, whichever
    is closer (ties go to the smaller denominator).
    """
    if x.denominator <= bound:
        return x
    num, den = x.numerator, x.denominator
    hm2, km2, hm1, km1 = 0, 1, 1, 0
    while den:
        a, rem = divmod(num, den)
        h, k = a * hm1 + hm2, a * km1 + km2
        if k > bound:
            cands = [Fraction(hm1, km1)]
            t = (bound - km2) // km1
            if t >= 1:
                cands.append(Fraction(t * hm1 + hm2, t * km1 + km2))
            return min(cands, key=lambda c: (abs(x - c), c.denominator))
        hm2, km2, hm1, km1 = hm1, km1, h, k
        num, den = den, rem
    return Fraction(hm1, km1)


def _farey_neighbors(value: Fraction, bound: int) -> Tuple[Fraction, Fraction]:
    """The adjacent fractions on both sides of value in the Farey set F_bound."""
    p, q = value.numerator, value.denominator
    if q == 1:
        return Fraction(p * bound - 1, bound), Fraction(p * bound + 1, bound)
    inv = pow(p % q, -1, q)
    s_left = inv % q
    s_left += ((bound - s_left) // q) * q
    s_right = (-inv) % q
    s_right += ((bound - s_right) // q) * q
    return (Fraction((p * s_left - 1) // q, s_left),
            Fraction((p * s_right + 1) // q, s_right))


def reconstruct(x: ApproxLike, error_radius: Optional[ApproxLike] = None,
                denominator_bound: int = DEFAULT_BOUND) -> RationalGuess:
    """Best bounded-denominator rational within error_radius of x.

    Raises NoCandidateError when even the best approximation misses the
    window.  The result is Unique exactly when no other rational under the
    bound lies within the window, by the Farey neighbor criterion.
    """
    if isinstance(denominator_bound, bool) or \
            not isinstance(denominator_bound, int) or denominator_bound < 1:
        raise DomainError(
            f"denominator bound must be an integer >= 1, got {denominator_bound!r}")
    xf, default_radius = _exact_value(x)
    if error_radius is None:
        if default_radius is None:
            raise DomainError(
                "input carries no decimal rendering; an explicit error "
                "radius is required")
        eps = default_radius
    else:
        eps = _exact_value(error_radius)[0]
    if eps <= 0:
        raise DomainError(f"error radius must be positive, got {eps}")
    cand = _best_within(xf, denominator_bound)
    dist = abs(xf - cand)
    if dist > eps:
        raise NoCandidateError(
            f"no rational with denominator <= {denominator_bound} lies "
            f"within {eps} of the approximant (best miss: {cand})")
    left, right = _farey_neighbors(cand, denominator_bound)
    unique = left < xf - eps and xf + eps < right
    with mpmath.mp.workdps(30):
        residual = mpmath.mpf(dist.numerator) / dist.denominator
    return RationalGuess(value=cand, denominator_bound=denominator_bound,
                         residual=residual,
                         confidence=Confidence.UNIQUE if unique
                         else Confidence.AMBIGUOUS)


def reconstruct_sequence(values: Iterable[Tuple[object, ApproxLike]],
                         error_radii: Union[None, ApproxLike,
                                            Sequence[Optional[ApproxLike]]] = None,
                         denominator_bound: int = DEFAULT_BOUND
                         ) -> List[Optional[RationalGuess]]:
    """Element-wise reconstruction of labeled approximants (k, x).

    error_radii may be absent (per-element defaults), a single radius for
    all elements, or a sequence matching the input length.  A failed
    element is recorded as None instead of aborting the rest.
    """
    pairs = list(values)
    if error_radii is None or isinstance(error_radii, (str, decimal.Decimal)) \
            or not isinstance(error_radii, Sequence):
        radii = [error_radii] * len(pairs)
    else:
        radii = list(error_radii)
        if len(radii) != len(pairs):
            raise DomainError(
                f"{len(radii)} radii for {len(pairs)} approximants")
    out: List[Optional[RationalGuess]] = []
    for (_, x), eps in zip(pairs, radii):
        try:
            out.append(reconstruct(x, eps, denominator_bound))
        except NoCandidateError:
            out.append(None)
    return out
