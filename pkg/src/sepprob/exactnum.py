"""Exact arithmetic primitives.

Everything here is built on Python's fractions.Fraction (used throughout the
package as the universal exact value type, aliased BigRational).  The module
provides rising factorials, gamma at positive half-integer arguments carried
symbolically as (rational) * pi^(e/2), and a factor-level ratio evaluator
whose zero-cancellation rule is the basis for evaluating degenerate
terminating hypergeometric terms.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Union

from .errors import DomainError, UncancelledPole

# The universal exact number type.  Always in lowest terms, denominator > 0,
# arithmetic never rounds; all invariants are guaranteed by Fraction itself.
BigRational = Fraction

RationalLike = Union[Fraction, int, str]


def as_rational(x: RationalLike) -> Fraction:
    """Coerce ints, "p/q" / decimal strings and Fractions to Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, str)):
        return Fraction(x)
    raise DomainError(f"not an exact rational: {x!r}")


def is_half_integer(x: Fraction) -> bool:
    """True when 2x is an integer (integers included)."""
    return (2 * x).denominator == 1


def pochhammer(a: RationalLike, n: int) -> Fraction:
    """Rising factorial (a)_n = a (a+1) ... (a+n-1); (a)_0 = 1."""
    if n < 0:
        raise DomainError(f"pochhammer needs n >= 0, got {n}")
    a = as_rational(a)
    out = Fraction(1)
    for i in range(n):
        out *= a + i
    return out


@dataclass(frozen=True)
class SqrtPiScaled:
    """A rational multiple of an integer power of sqrt(pi).

    Represents coeff * pi^(sqrtpi_exponent / 2).  Products and quotients add
    and subtract exponents; sums are only defined between equal exponents.
    Conversion to a plain rational is allowed exactly when the exponent is 0,
    which is how formulas assert (rather than assume) that their sqrt(pi)
    factors cancel.
    """

    coeff: Fraction
    sqrtpi_exponent: int = 0

    def __mul__(self, other: "SqrtPiScaled | RationalLike") -> "SqrtPiScaled":
        if isinstance(other, SqrtPiScaled):
            return SqrtPiScaled(self.coeff * other.coeff,
                                self.sqrtpi_exponent + other.sqrtpi_exponent)
        return SqrtPiScaled(self.coeff * as_rational(other), self.sqrtpi_exponent)

    __rmul__ = __mul__

    def __truediv__(self, other: "SqrtPiScaled | RationalLike") -> "SqrtPiScaled":
        if isinstance(other, SqrtPiScaled):
            if other.coeff == 0:
                raise ZeroDivisionError("division by zero SqrtPiScaled")
            return SqrtPiScaled(self.coeff / other.coeff,
                                self.sqrtpi_exponent - other.sqrtpi_exponent)
        return SqrtPiScaled(self.coeff / as_rational(other), self.sqrtpi_exponent)

    def __rtruediv__(self, other: RationalLike) -> "SqrtPiScaled":
        return SqrtPiScaled(as_rational(other), 0) / self

    def __add__(self, other: "SqrtPiScaled") -> "SqrtPiScaled":
        if not isinstance(other, SqrtPiScaled):
            return NotImplemented
        if self.coeff == 0:
            return other
        if other.coeff == 0:
            return self
        if self.sqrtpi_exponent != other.sqrtpi_exponent:
            raise DomainError(
                "cannot add sqrt(pi) grades "
                f"{self.sqrtpi_exponent} and {other.sqrtpi_exponent}")
        return SqrtPiScaled(self.coeff + other.coeff, self.sqrtpi_exponent)

    def __neg__(self) -> "SqrtPiScaled":
        return SqrtPiScaled(-self.coeff, self.sqrtpi_exponent)

    def to_rational(self) -> Fraction:
        """Exact rational value; requires the sqrt(pi) exponent to be 0."""
        if self.coeff != 0 and self.sqrtpi_exponent != 0:
            raise DomainError(
                f"sqrt(pi) exponent {self.sqrtpi_exponent} did not cancel")
        return self.coeff


def gamma_half(x: RationalLike) -> SqrtPiScaled:
    """Exact Gamma(x) for positive integer or half-odd-integer x.

    Gamma(1/2) = sqrt(pi), so half-odd arguments carry exponent 1 and
    integer arguments exponent 0.
    """
    x = as_rational(x)
    if x <= 0 or not is_half_integer(x):
        raise DomainError(f"gamma_half needs a positive half-integer, got {x}")
    if x.denominator == 1:
        coeff = Fraction(1)
        n = int(x)
        for i in range(2, n):
            coeff *= i
        return SqrtPiScaled(coeff, 0)
    # descend x-1, x-2, ..., 1/2 and attach Gamma(1/2) = pi^(1/2)
    coeff = Fraction(1)
    t = x - 1
    while t > 0:
        coeff *= t
        t -= 1
    return SqrtPiScaled(coeff, 1)


@dataclass(frozen=True)
class FactorList:
    """An ordered list of exact linear-factor values.

    The order matters: factored_ratio pairs zero factors positionally, so a
    caller building numerator and denominator lists must arrange them so that
    matching zeros (those arising from the same summation index) occupy the
    same zero-rank on both sides.
    """

    factors: tuple[Fraction, ...]

    @classmethod
    def of(cls, *values: RationalLike) -> "FactorList":
        return cls(tuple(as_rational(v) for v in values))

    @classmethod
    def rising(cls, a: RationalLike, n: int) -> "FactorList":
        """The n unit-step factors of (a)_n: a, a+1, ..., a+n-1."""
        if n < 0:
            raise DomainError(f"rising needs n >= 0, got {n}")
        a = as_rational(a)
        return cls(tuple(a + i for i in range(n)))

    @classmethod
    def constant(cls, value: RationalLike, count: int) -> "FactorList":
        return cls((as_rational(value),) * count)

    def __add__(self, other: "FactorList") -> "FactorList":
        return FactorList(self.factors + other.factors)

    def __len__(self) -> int:
        return len(self.factors)

    def __iter__(self) -> Iterable[Fraction]:
        return iter(self.factors)

    def product(self) -> Fraction:
        out = Fraction(1)
        for f in self.factors:
            out *= f
        return out

    def zero_count(self) -> int:
        return sum(1 for f in self.factors if f == 0)


def factored_ratio(numer: FactorList, denom: FactorList) -> Fraction:
    """Ratio of two factor products with explicit zero-cancellation.

    Let z_n and z_d be the zero counts.  With z_d = 0 this is the plain
    product ratio (zero if the numerator has any zero factor).  With
    z_n >= z_d > 0 the first z_d zeros of each list are removed pairwise in
    list order and the ratio of the remaining products is returned; this is
    the cancellation limit used for degenerate hypergeometric terms whose
    paired zeros vanish at the same rate.  z_n < z_d has no finite limit.
    """
    z_n = numer.zero_count()
    z_d = denom.zero_count()
    if z_d == 0:
        num = numer.product()
        if num == 0:
            return Fraction(0)
        return num / denom.product()
    if z_n < z_d:
        raise UncancelledPole(
            f"{z_d} zero factors below vs {z_n} above: no finite limit")
    if z_n > z_d:
        # after removing z_d pairs a genuine zero remains on top
        return Fraction(0)
    num = Fraction(1)
    for f in numer:
        if f != 0:
            num *= f
    den = Fraction(1)
    for f in denom:
        if f != 0:
            den *= f
    return num / den
