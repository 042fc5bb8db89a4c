"""Tail-probability reconstruction from truncated moment sequences.

The density f on [a, b] is expanded in orthogonal polynomials for the weight
(1 - t^2)^w after mapping t = c0 + c1 x with c0 = -(a+b)/(b-a),
c1 = 2/(b-a).  Writing the normalized Gegenbauer polynomials (value 1 at
t = 1) around the point c0,

    P_j(c0 + y) = sum_i B[j][i] y^i,

the tail integral over [xi, b] becomes a plain linear functional of the
moments,

    Pr{X > xi} ~= sum_i A_i mu_i,
    A_0 = q0/h0 + (q1/h0) sum_j (g_j / eta_j) B[j][0],
    A_i = c1^i (q1/h0) sum_{j>=i} (g_j / eta_j) B[j][i],

where h_j = h0 eta_j are the structure constants, q_j = q1 g_j the partial
weight integrals from zeta = c0 + c1 xi to 1, and g_j the degree-(j-1)
polynomials of the shifted weight evaluated at zeta.  w = 0 is the Legendre
case.  All quantities are rational when the interval, w and xi are rational,
so the truncated tail estimate is computed exactly by default.

The exact evaluator below streams the B rows in scaled-integer form (one
big-int row per degree, no per-entry gcd) and keeps the accumulated sums
S_i at a common running scale, reducing to Fractions only when a truncation
order is emitted.  Streams are cached per (interval, w, zeta) so increasing
truncation orders and further scenarios on the same interval reuse all
previous rows; the A_i do not depend on the moments at all.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import mpmath

from .errors import DomainError
from .exactnum import RationalLike, as_rational
from .moments import MomentSequence, Scenario, moment_sequence

METHOD_LEGENDRE = "legendre"
METHOD_GEGENBAUER = "gegenbauer"

MODE_EXACT = "exact"
MODE_FLOAT = "float"
MODE_AUTO = "auto"

# exact rationals stay affordable up to about this truncation order; past it
# the automatic mode switches to big floats at this many digits
AUTO_EXACT_LIMIT = 500
DEFAULT_FLOAT_DIGITS = 300


@dataclass(frozen=True)
class GegenbauerTables:
    """Exact recurrence tables for one (interval, weight exponent, order).

    B is the lower-triangular coefficient table of the shifted polynomials
    around c0, eta the normalized structure constants (eta_0 = 1) and g the
    shifted-weight polynomial values at zeta = c0, i.e. for xi = 0.
    """

    alpha_w: int
    m: int
    c0: Fraction
    c1: Fraction
    B: Tuple[Tuple[Fraction, ...], ...]
    eta: Tuple[Fraction, ...]
    g: Tuple[Fraction, ...]


@dataclass(frozen=True)
class TailEstimate:
    """A truncated tail reconstruction sum_i A_i mu_i."""

    scenario: Scenario
    method: str
    alpha_w: int
    m: int
    mode: str
    precision: Optional[int]
    value: Union[Fraction, mpmath.mpf]
    coeffs: Tuple[Union[Fraction, mpmath.mpf], ...]


def _map_constants(lo: Fraction, hi: Fraction) -> Tuple[Fraction, Fraction]:
    if not lo < hi:
        raise DomainError(f"empty interval [{lo}, {hi}]")
    return -(lo + hi) / (hi - lo), 2 / (hi - lo)


def _check_weight(alpha_w: int) -> int:
    if isinstance(alpha_w, bool) or not isinstance(alpha_w, int) or alpha_w < 0:
        raise DomainError(
            f"weight exponent must be a nonnegative integer, got {alpha_w!r}")
    return alpha_w


def build_tables(interval: Tuple[RationalLike, RationalLike],
                 alpha_w: int, m: int) -> GegenbauerTables:
    """Compute the B / eta / g tables by their defining recurrences."""
    alpha_w = _check_weight(alpha_w)
    if m < 0:
        raise DomainError(f"truncation order must be >= 0, got {m}")
    lo, hi = as_rational(interval[0]), as_rational(interval[1])
    c0, c1 = _map_constants(lo, hi)
    a = alpha_w

    rows: List[Tuple[Fraction, ...]] = [(Fraction(1),)]
    if m >= 1:
        rows.append((c0, Fraction(1)))
    for n in range(2, m + 1):
        prev, prev2 = rows[n - 1], rows[n - 2]
        lead = Fraction(2 * n + 2 * a - 1, n + 2 * a)
        drag = Fraction(n - 1, n + 2 * a)
        row = []
        for j in range(n + 1):
            t = c0 * prev[j] if j <= n - 1 else Fraction(0)
            if j >= 1:
                t += prev[j - 1]
            t *= lead
            if j <= n - 2:
                t -= drag * prev2[j]
            row.append(t)
        rows.append(tuple(row))

    eta = [Fraction(1)]
    for n in range(1, m + 1):
        eta.append(eta[-1] * Fraction(n * (2 * n + 2 * a - 1),
                                      (2 * n + 2 * a + 1) * (n + 2 * a)))

    g: List[Fraction] = []
    if m >= 1:
        g.append(Fraction(1))
    if m >= 2:
        g.append(c0)
    for n in range(3, m + 1):
        g.append((Fraction(2 * n + 2 * a - 1, n + 2 * a + 1) * c0 * g[-1]
                  - Fraction(n - 2, n + 2 * a + 1) * g[-2]))

    return GegenbauerTables(alpha_w=a, m=m, c0=c0, c1=c1,
                            B=tuple(rows), eta=tuple(eta), g=tuple(g))


def _h0(a: int) -> Fraction:
    # Gamma(1/2) Gamma(a+1) / Gamma(a+3/2) = a! 2^(a+1) / (1*3*...*(2a+1))
    return Fraction(math.factorial(a) * 2 ** (a + 1),
                    math.prod(range(1, 2 * a + 2, 2)))


def _q0(a: int, zeta: Fraction) -> Fraction:
    # integral of (1-t^2)^a over [zeta, 1], expanded binomially
    return sum((Fraction(math.comb(a, r) * (-1) ** r, 2 * r + 1)
                * (1 - zeta ** (2 * r + 1))) for r in range(a + 1))


def _q1(a: int, zeta: Fraction) -> Fraction:
    return (1 - zeta * zeta) ** (a + 1) / (2 * (a + 1))


# ---------------------------------------------------------------------------
# Exact coefficient streaming
# ---------------------------------------------------------------------------

class _ExactCoeffStream:
    """Resumable scaled-integer stream of the A coefficient vectors.

    Scales chosen so every recurrence stays in big ints:
      B row n       scaled by D_n = q^n * prod_{i=1..n} (i + 2a)
      g_n           scaled by E_n = Q^(n-1) * prod_{i=2..n} (i + 2a + 1)
      accumulators  at V_j = E_j * j! * (2a+1) * D_j
    with c0 = p/q and zeta = P/Q.  A row's contribution to S_i is
    u * N[j][i] / V_j with u = Ghat_j * (2a+1)_j * (2j + 2a + 1), because
    (g_j / eta_j) B[j][i] expands to exactly that after inserting the three
    scale factors.
    """

    def __init__(self, lo: Fraction, hi: Fraction, alpha_w: int,
                 zeta: Fraction) -> None:
        self.lo, self.hi, self.a = lo, hi, alpha_w
        self.zeta = zeta
        self.c0, self.c1 = _map_constants(lo, hi)
        self.p, self.q = self.c0.numerator, self.c0.denominator
        self.P, self.Q = zeta.numerator, zeta.denominator
        self.h0 = _h0(alpha_w)
        self.q0 = _q0(alpha_w, zeta)
        self.q1 = _q1(alpha_w, zeta)
        self.j = 0
        self.shat: List[int] = [0]
        self.V: Optional[int] = None
        self._nprev: List[int] = [1]
        self._ncur: List[int] = []
        self._ghat_prev: Optional[int] = None
        self._ghat_cur: Optional[int] = None
        self._poch = 1            # (2a+1)_j
        self._cache: dict[int, Tuple[Fraction, ...]] = {}
        self._lock = threading.Lock()

    def _advance_row(self) -> None:
        a, p, q, P, Q = self.a, self.p, self.q, self.P, self.Q
        j = self.j + 1
        if j == 1:
            self._ncur = [p * (1 + 2 * a), q * (1 + 2 * a)]
            self._ghat_cur = 1
            self._poch = 1 + 2 * a
            self.V = (2 * a + 1) * q * (1 + 2 * a)
        else:
            prev, prev2 = self._ncur, self._nprev
            lead = 2 * j + 2 * a - 1
            drag = q * q * (j - 1) * (j - 1 + 2 * a)
            row = []
            for i in range(j + 1):
                t = p * prev[i] if i <= j - 1 else 0
                if i >= 1:
                    t += q * prev[i - 1]
                t *= lead
                if i <= j - 2:
                    t -= drag * prev2[i]
                row.append(t)
            self._nprev, self._ncur = prev, row
            if j == 2:
                self._ghat_prev, self._ghat_cur = self._ghat_cur, P * (2 * a + 3)
            else:
                self._ghat_prev, self._ghat_cur = self._ghat_cur, (
                    (2 * j + 2 * a - 1) * P * self._ghat_cur
                    - (j - 2) * (j + 2 * a) * Q * Q * self._ghat_prev)
            self._poch *= 2 * a + j
            ratio = Q * (j + 2 * a + 1) * j * q * (j + 2 * a)
            self.V *= ratio
            for i in range(j):
                self.shat[i] *= ratio
        u = self._ghat_cur * self._poch * (2 * j + 2 * a + 1)
        self.shat.append(0)
        for i in range(j + 1):
            self.shat[i] += u * self._ncur[i]
        self.j = j

    def _emit(self) -> Tuple[Fraction, ...]:
        qh = self.q1 / self.h0
        if self.j == 0:
            return (self.q0 / self.h0,)
        out = [self.q0 / self.h0 + qh * Fraction(self.shat[0], self.V)]
        ci = Fraction(1)
        for i in range(1, self.j + 1):
            ci *= self.c1
            out.append(ci * qh * Fraction(self.shat[i], self.V))
        return tuple(out)

    def coeffs(self, m: int) -> Tuple[Fraction, ...]:
        with self._lock:
            hit = self._cache.get(m)
            if hit is not None:
                return hit
            if m < self.j:
                # already streamed past this order; rebuild just for it
                side = _ExactCoeffStream(self.lo, self.hi, self.a, self.zeta)
                while side.j < m:
                    side._advance_row()
                vec = side._emit()
            else:
                while self.j < m:
                    self._advance_row()
                vec = self._emit()
            self._cache[m] = vec
            return vec


_BANKS: dict[Tuple[Fraction, Fraction, int, Fraction], _ExactCoeffStream] = {}
_BANKS_LOCK = threading.Lock()


def _exact_coeffs(lo: Fraction, hi: Fraction, alpha_w: int, zeta: Fraction,
                  m: int) -> Tuple[Fraction, ...]:
    key = (lo, hi, alpha_w, zeta)
    with _BANKS_LOCK:
        bank = _BANKS.get(key)
        if bank is None:
            bank = _ExactCoeffStream(lo, hi, alpha_w, zeta)
            _BANKS[key] = bank
    return bank.coeffs(m)


# ---------------------------------------------------------------------------
# Big-float evaluation
# ---------------------------------------------------------------------------

def _mpf_of(x: Fraction) -> mpmath.mpf:
    return mpmath.mpf(x.numerator) / mpmath.mpf(x.denominator)


def _float_coeffs(lo: Fraction, hi: Fraction, a: int, zeta: Fraction,
                  m: int) -> List[mpmath.mpf]:
    """A_0..A_m by the plain recurrences at the ambient working precision."""
    c0f, c1f = (_mpf_of(x) for x in _map_constants(lo, hi))
    zf = _mpf_of(zeta)
    h0 = _mpf_of(_h0(a))
    q0 = sum(mpmath.mpf(math.comb(a, r) * (-1) ** r) / (2 * r + 1)
             * (1 - zf ** (2 * r + 1)) for r in range(a + 1))
    q1 = (1 - zf * zf) ** (a + 1) / (2 * (a + 1))
    if m == 0:
        return [q0 / h0]
    S = [mpmath.mpf(0)] * (m + 1)
    prev = [mpmath.mpf(1)]
    cur = [c0f, mpmath.mpf(1)]
    g_prev, g_cur = None, mpmath.mpf(1)
    eta = mpmath.mpf(1)
    for j in range(1, m + 1):
        if j > 1:
            lead = mpmath.mpf(2 * j + 2 * a - 1) / (j + 2 * a)
            drag = mpmath.mpf(j - 1) / (j + 2 * a)
            row = []
            for i in range(j + 1):
                t = c0f * cur[i] if i <= j - 1 else mpmath.mpf(0)
                if i >= 1:
                    t += cur[i - 1]
                t *= lead
                if i <= j - 2:
                    t -= drag * prev[i]
                row.append(t)
            prev, cur = cur, row
            if j == 2:
                g_prev, g_cur = g_cur, zf
            else:
                g_prev, g_cur = g_cur, (
                    mpmath.mpf(2 * j + 2 * a - 1) / (j + 2 * a + 1) * zf * g_cur
                    - mpmath.mpf(j - 2) / (j + 2 * a + 1) * g_prev)
        eta *= mpmath.mpf(j * (2 * j + 2 * a - 1)) / (
            (2 * j + 2 * a + 1) * (j + 2 * a))
        w = g_cur / eta
        for i in range(j + 1):
            S[i] += w * cur[i]
    qh = q1 / h0
    out = [q0 / h0 + qh * S[0]]
    ci = mpmath.mpf(1)
    for i in range(1, m + 1):
        ci *= c1f
        out.append(ci * qh * S[i])
    return out


def _float_tail(lo: Fraction, hi: Fraction, a: int, zeta: Fraction, m: int,
                mu: Sequence[Fraction], precision: int):
    """Float coefficients plus dot product, with adaptive guard digits.

    The final sum cancels heavily (|A_i mu_i| grows roughly like
    (c1/16)^i while the tail stays order one), so the work runs at
    precision + guard digits and is repeated with a larger guard whenever
    the observed cancellation comes too close to it.
    """
    guard = 40 + m // 4
    for _ in range(4):
        with mpmath.mp.workdps(precision + guard):
            A = _float_coeffs(lo, hi, a, zeta, m)
            terms = [A[i] * _mpf_of(mu[i]) for i in range(m + 1)]
            value = mpmath.fsum(terms)
            peak = max(abs(t) for t in terms) if terms else mpmath.mpf(0)
            if peak == 0 or value == 0:
                loss = 0.0
            else:
                loss = float(mpmath.log10(peak / abs(value)))
        if loss + 12 <= guard:
            break
        guard = int(loss) + 40
    with mpmath.mp.workdps(precision):
        value = +value
        A = [+x for x in A]
    return A, value


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------

def _resolve_mode(mode: str, m: int, precision: Optional[int]):
    if mode == MODE_AUTO:
        mode = MODE_EXACT if m <= AUTO_EXACT_LIMIT else MODE_FLOAT
    if mode == MODE_EXACT:
        return MODE_EXACT, None
    if mode == MODE_FLOAT:
        return MODE_FLOAT, precision or DEFAULT_FLOAT_DIGITS
    raise DomainError(f"unknown mode {mode!r}")


def gegenbauer_tail(moments: MomentSequence, alpha_w: int, xi: RationalLike,
                    m: int, mode: str = MODE_AUTO,
                    precision: Optional[int] = None) -> TailEstimate:
    """Truncated tail estimate Pr{X > xi} from mu_0..mu_m."""
    alpha_w = _check_weight(alpha_w)
    if not isinstance(m, int) or m < 0:
        raise DomainError(f"truncation order must be an integer >= 0, got {m!r}")
    if len(moments) < m + 1:
        raise DomainError(
            f"need {m + 1} moments, sequence has {len(moments)}")
    lo, hi = moments.scenario.interval
    xi = as_rational(xi)
    if not lo <= xi <= hi:
        raise DomainError(f"xi={xi} outside support [{lo}, {hi}]")
    c0, c1 = _map_constants(lo, hi)
    zeta = c0 + c1 * xi
    mode, precision = _resolve_mode(mode, m, precision)
    if mode == MODE_EXACT:
        A = _exact_coeffs(lo, hi, alpha_w, zeta, m)
        value = Fraction(0)
        for i in range(m + 1):
            value += A[i] * moments.mu[i]
    else:
        A, value = _float_tail(lo, hi, alpha_w, zeta, m, moments.mu, precision)
    return TailEstimate(scenario=moments.scenario, method=METHOD_GEGENBAUER,
                        alpha_w=alpha_w, m=m, mode=mode, precision=precision,
                        value=value, coeffs=tuple(A))


def legendre_tail(moments: MomentSequence, xi: RationalLike, m: int,
                  mode: str = MODE_AUTO,
                  precision: Optional[int] = None) -> TailEstimate:
    """The flat-weight (w = 0) tail estimate, the primary instrument here.

    Identical by definition to gegenbauer_tail with alpha_w = 0; exposed on
    its own and reported under its own method name.
    """
    est = gegenbauer_tail(moments, 0, xi, m, mode, precision)
    return TailEstimate(scenario=est.scenario, method=METHOD_LEGENDRE,
                        alpha_w=0, m=est.m, mode=est.mode,
                        precision=est.precision, value=est.value,
                        coeffs=est.coeffs)


def convergence_profile(scenario: Scenario, method: str, xi: RationalLike,
                        m_list: Iterable[int], mode: str = MODE_AUTO,
                        precision: Optional[int] = None,
                        alpha_w: int = 0) -> List[Tuple[int, Union[Fraction, mpmath.mpf]]]:
    """Tail estimates at increasing truncation orders, sharing all tables."""
    orders = list(m_list)
    if any(not isinstance(m, int) or m < 0 for m in orders):
        raise DomainError("truncation orders must be integers >= 0")
    if any(b <= a for a, b in zip(orders, orders[1:])):
        raise DomainError("truncation orders must be strictly increasing")
    if method == METHOD_LEGENDRE:
        alpha_w = 0
    elif method != METHOD_GEGENBAUER:
        raise DomainError(f"unknown method {method!r}")
    if not orders:
        return []
    moments = moment_sequence(scenario, orders[-1])
    out = []
    for m in orders:
        est = gegenbauer_tail(moments, alpha_w, xi, m, mode, precision)
        out.append((m, est.value))
    return out
