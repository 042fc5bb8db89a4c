"""Exact determinantal moments of random induced generalized two-qubit states.

Two moment families are evaluated, both normalized by <|rho|^k> and both
terminating hypergeometric sums:

* pt_moment: <|rho^PT|^n |rho|^k> / <|rho|^k>, a 5F4-type sum over j = 0..n
  whose prefactor is (k+1)_n (k+1+a)_n (k+1+2a)_n /
  [2^(6n) (k+3a+3/2)_n (2k+6a+5/2)_(2n)] with a the Dyson-like parameter.
* diff_moment: <|rho|^k (|rho^PT| - |rho|)^n> / <|rho|^k>, a 4F3-type sum
  that terminates at floor(n/2).

For integer k < n the 5F4 sum degenerates: terms with k+1 <= j <= (k+n)/2
vanish outright, while terms with j > (k+n)/2 are 0/0 forms whose finite
cancellation limits contribute.  Each summand is therefore built as one
numerator/denominator FactorList pair, expanded per unit step and aligned by
j, and evaluated through factored_ratio so those limits are taken exactly.

The underlying random variables are supported on [-1/16, 1/256] (pt) and
[-1/16, 1/432] (diff), so the bound |mu_n| <= (1/16)^n holds for every n.
"""

from __future__ import annotations

import enum
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Tuple

from .errors import DomainError, SepprobError
from .exactnum import FactorList, RationalLike, as_rational, factored_ratio, \
    is_half_integer, pochhammer

HALF = Fraction(1, 2)

PT_INTERVAL = (Fraction(-1, 16), Fraction(1, 256))
DIFF_INTERVAL = (Fraction(-1, 16), Fraction(1, 432))


class Variable(enum.Enum):
    """Which determinantal functional the moments refer to."""

    PT_DET = "pt"        # |rho^PT|, weighted by |rho|^k
    DIFF = "diff"        # |rho^PT| - |rho|, weighted by |rho|^k

    def __str__(self) -> str:
        return self.value


def _check_params(alpha: Fraction, k: Fraction, n: int) -> None:
    if not is_half_integer(alpha) or alpha < HALF:
        raise DomainError(f"alpha must be a half-integer >= 1/2, got {alpha}")
    if not is_half_integer(k) or k < 0:
        raise DomainError(f"k must be a half-integer >= 0, got {k}")
    if not isinstance(n, int) or n < 0:
        raise DomainError(f"moment order must be an integer >= 0, got {n!r}")


@dataclass(frozen=True)
class Scenario:
    """A moment scenario: variable, Dyson-like parameter alpha and measure
    exponent k.  The support interval is determined by the variable."""

    variable: Variable
    alpha: Fraction
    k: Fraction

    def __post_init__(self) -> None:
        if not isinstance(self.variable, Variable):
            object.__setattr__(self, "variable", Variable(self.variable))
        object.__setattr__(self, "alpha", as_rational(self.alpha))
        object.__setattr__(self, "k", as_rational(self.k))
        _check_params(self.alpha, self.k, 0)

    @property
    def interval(self) -> Tuple[Fraction, Fraction]:
        if self.variable is Variable.PT_DET:
            return PT_INTERVAL
        return DIFF_INTERVAL


@dataclass(frozen=True)
class MomentSequence:
    """Exact moments mu_0..mu_m of one scenario (mu_0 = 1)."""

    scenario: Scenario
    mu: Tuple[Fraction, ...]

    def __post_init__(self) -> None:
        if not self.mu or self.mu[0] != 1:
            raise DomainError("a moment sequence must start with mu_0 = 1")

    def __len__(self) -> int:
        return len(self.mu)

    @property
    def order(self) -> int:
        return len(self.mu) - 1


# ---------------------------------------------------------------------------
# Contract evaluation through FactorList pairs
# ---------------------------------------------------------------------------

def pt_moment(alpha: RationalLike, k: RationalLike, n: int) -> Fraction:
    """<|rho^PT|^n |rho|^k> / <|rho|^k>, exactly.

    The 5F4 bottom pair -(k+n)/2, -(k+n-1)/2 is expanded through the
    duplication identity (x/2)_j ((x+1)/2)_j = (x)_(2j) / 4^j with x = -k-n.
    This is what makes positional zero pairing exact: the unit-step factors
    of (-k-n)_(2j) move at the same unit rate in k as the (-k)_j factor on
    top, so each removed pair is a limit of two factors with equal slope.
    The half-argument factors themselves move at rate 1/2 and must not be
    paired directly against a rate-1 zero.
    """
    alpha, k = as_rational(alpha), as_rational(k)
    _check_params(alpha, k, n)
    pref = (pochhammer(k + 1, n) * pochhammer(k + 1 + alpha, n)
            * pochhammer(k + 1 + 2 * alpha, n)) / (
        Fraction(2) ** (6 * n) * pochhammer(k + 3 * alpha + Fraction(3, 2), n)
        * pochhammer(2 * k + 6 * alpha + Fraction(5, 2), 2 * n))
    total = Fraction(0)
    for j in range(n + 1):
        numer = (FactorList.rising(-n, j)
                 + FactorList.rising(-k, j)
                 + FactorList.rising(alpha, j)
                 + FactorList.rising(alpha + HALF, j)
                 + FactorList.rising(-2 * k - 2 * n - 1 - 5 * alpha, j)
                 + FactorList.constant(4, j))
        denom = (FactorList.rising(-k - n - alpha, j)
                 + FactorList.rising(-k - n - 2 * alpha, j)
                 + FactorList.rising(-k - n, 2 * j)
                 + FactorList.rising(1, j))
        total += factored_ratio(numer, denom)
    return pref * total


def diff_moment(alpha: RationalLike, k: RationalLike, n: int) -> Fraction:
    """<|rho|^k (|rho^PT| - |rho|)^n> / <|rho|^k>, exactly.

    The 4F3 top pair -n/2, (1-n)/2 merges to (-n)_(2j) / 4^j, so every term
    with 2j > n carries an unmatched numerator zero and the sum terminates at
    floor(n/2).  No denominator factor can vanish for alpha >= 1/2, k >= 0,
    which is why this variable never needs the cancellation limit.
    """
    alpha, k = as_rational(alpha), as_rational(k)
    _check_params(alpha, k, n)
    pref = Fraction(-1) ** n * (
        pochhammer(alpha, n) * pochhammer(alpha + HALF, n)
        * pochhammer(n + 2 * k + 2 + 5 * alpha, n)) / (
        Fraction(2) ** (4 * n) * pochhammer(k + 3 * alpha + Fraction(3, 2), n)
        * pochhammer(2 * k + 6 * alpha + Fraction(5, 2), 2 * n))
    total = Fraction(0)
    for j in range(n // 2 + 1):
        numer = (FactorList.rising(-n, 2 * j)
                 + FactorList.rising(k + 1 + alpha, j)
                 + FactorList.rising(k + 1 + 2 * alpha, j))
        denom = (FactorList.rising(1 - n - alpha, j)
                 + FactorList.rising(HALF - n - alpha, j)
                 + FactorList.rising(n + 2 * k + 2 + 5 * alpha, j)
                 + FactorList.rising(1, j)
                 + FactorList.constant(4, j))
        total += factored_ratio(numer, denom)
    return pref * total


# ---------------------------------------------------------------------------
# Doubled-integer fast paths (internal optimization, contract-equal)
# ---------------------------------------------------------------------------
#
# All parameters are half-integers, so doubling every linear factor turns the
# whole computation into big-int arithmetic with a single Fraction reduction
# at the end.  Numerator and denominator always carry equally many doubled
# factors, so the introduced powers of 2 cancel.  The running series sum is
# kept as Sn/Sd with the current term's denominator nested into Sd, which
# avoids per-term gcd work.

def _pt_series_fast(a2: int, k2: int, n: int) -> Fraction:
    def step(j: int) -> tuple[int, int]:
        sn = 4 * ((-2 * n + 2 * j) * (-k2 + 2 * j) * (a2 + 2 * j)
                  * (a2 + 1 + 2 * j) * (-2 * k2 - 4 * n - 2 - 5 * a2 + 2 * j))
        sd = ((-k2 - 2 * n - a2 + 2 * j) * (-k2 - 2 * n - 2 * a2 + 2 * j)
              * (-k2 - 2 * n + 4 * j) * (-k2 - 2 * n + 4 * j + 2) * (2 * j + 2))
        return sn, sd

    tn = td = sum_n = sum_d = 1
    degenerate = (k2 % 2 == 0) and (k2 // 2 < n)
    if not degenerate:
        for j in range(n):
            sn, sd = step(j)
            tn *= sn
            td *= sd
            sum_n = sum_n * sd + tn
            sum_d = td
        return Fraction(sum_n, sum_d)

    kk = k2 // 2
    for j in range(kk):
        sn, sd = step(j)
        tn *= sn
        td *= sd
        sum_n = sum_n * sd + tn
        sum_d = td
    # terms kk+1 .. (kk+n)//2 are exactly zero; the next nonzero term is the
    # 0/0 limit at jstar, computed directly with the paired zero factors
    # (i = kk on top, i = kk+n below) skipped
    jstar = (kk + n) // 2 + 1
    num = 4 ** jstar
    for i in range(jstar):
        num *= ((-2 * n + 2 * i) * (a2 + 2 * i) * (a2 + 1 + 2 * i)
                * (-2 * k2 - 4 * n - 2 - 5 * a2 + 2 * i))
        if i != kk:
            num *= -k2 + 2 * i
    den = 1
    for i in range(jstar):
        den *= ((-k2 - 2 * n - a2 + 2 * i) * (-k2 - 2 * n - 2 * a2 + 2 * i)
                * (2 * i + 2))
    for i in range(2 * jstar):
        if i != kk + n:
            den *= -k2 - 2 * n + 2 * i
    old_d = sum_d
    sum_n = sum_n * den + num * old_d
    sum_d = old_d * den
    tn, td = num * old_d, sum_d
    for j in range(jstar, n):
        sn, sd = step(j)
        tn *= sn
        td *= sd
        sum_n = sum_n * sd + tn
        sum_d = td
    return Fraction(sum_n, sum_d)


def _fast_moment(variable: Variable, alpha: Fraction, k: Fraction, n: int) -> Fraction:
    a2, k2 = int(2 * alpha), int(2 * k)
    if variable is Variable.PT_DET:
        num = den = 1
        for i in range(n):
            num *= ((k2 + 2 + 2 * i) * (k2 + 2 + a2 + 2 * i)
                    * (k2 + 2 + 2 * a2 + 2 * i))
            den *= k2 + 3 * a2 + 3 + 2 * i
        for i in range(2 * n):
            den *= 2 * k2 + 6 * a2 + 5 + 2 * i
        pref = Fraction(num, den * 2 ** (6 * n))
        return pref * _pt_series_fast(a2, k2, n)

    num = den = 1
    for i in range(n):
        num *= ((a2 + 2 * i) * (a2 + 1 + 2 * i)
                * (2 * n + 2 * k2 + 4 + 5 * a2 + 2 * i))
        den *= k2 + 3 * a2 + 3 + 2 * i
    for i in range(2 * n):
        den *= 2 * k2 + 6 * a2 + 5 + 2 * i
    pref = Fraction((-1) ** n * num, den * 2 ** (4 * n))
    tn = td = sum_n = sum_d = 1
    for j in range(n // 2):
        sn = ((-2 * n + 4 * j) * (-2 * n + 4 * j + 2)
              * (k2 + 2 + a2 + 2 * j) * (k2 + 2 + 2 * a2 + 2 * j))
        sd = 4 * ((2 - 2 * n - a2 + 2 * j) * (1 - 2 * n - a2 + 2 * j)
                  * (2 * n + 2 * k2 + 4 + 5 * a2 + 2 * j) * (2 * j + 2))
        tn *= sn
        td *= sd
        sum_n = sum_n * sd + tn
        sum_d = td
    return pref * Fraction(sum_n, sum_d)


# ---------------------------------------------------------------------------
# Batch driver with memoization
# ---------------------------------------------------------------------------

_SEQ_MEMO: dict[tuple[Variable, Fraction, Fraction], list[Fraction]] = {}
_SEQ_LOCK = threading.Lock()


def moment_sequence(scenario: Scenario, m: int) -> MomentSequence:
    """mu_0..mu_m for a scenario; extends a cached sequence incrementally."""
    if not isinstance(m, int) or m < 0:
        raise DomainError(f"sequence order must be an integer >= 0, got {m!r}")
    key = (scenario.variable, scenario.alpha, scenario.k)
    with _SEQ_LOCK:
        known = list(_SEQ_MEMO.get(key, ()))
    if len(known) <= m:
        for n in range(len(known), m + 1):
            try:
                known.append(_fast_moment(scenario.variable, scenario.alpha,
                                          scenario.k, n))
            except SepprobError as exc:
                raise type(exc)(f"moment index n={n}: {exc}") from exc
        with _SEQ_LOCK:
            if len(_SEQ_MEMO.get(key, ())) < len(known):
                _SEQ_MEMO[key] = known
    return MomentSequence(scenario, tuple(known[:m + 1]))


def seed_sequence(scenario: Scenario, values) -> None:
    """Install a precomputed moment prefix mu_0..mu_{len(values)-1}.

    The values are trusted; callers (the CLI cache loader) are expected to
    have verified them first.  A longer prefix already in memory wins.
    """
    vals = [as_rational(v) for v in values]
    if not vals:
        return
    if vals[0] != 1:
        raise DomainError("mu_0 must be 1")
    key = (scenario.variable, scenario.alpha, scenario.k)
    with _SEQ_LOCK:
        if len(_SEQ_MEMO.get(key, ())) < len(vals):
            _SEQ_MEMO[key] = vals
