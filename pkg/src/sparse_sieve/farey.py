"""Farey fractions with denominators from a moduli set.

Counting in short intervals (P(alpha)), the circular sup-count K(Delta),
and Dirichlet rational approximations.
"""

from __future__ import annotations

import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import List, Optional, Sequence

from .errors import CapacityExceeded, max_work
from .modmath import euler_phi


@dataclass(frozen=True, order=False)
class FareyPoint:
    a: int
    q: int

    @property
    def value(self) -> Fraction:
        return Fraction(self.a, self.q)

    def __float__(self):
        return self.a / self.q


@dataclass(frozen=True)
class FareyQuery:
    alpha: object
    Delta: object

    def __post_init__(self):
        if not 0 < self.Delta <= Fraction(1, 2):
            raise ValueError(f"Delta must lie in (0, 1/2], got {self.Delta}")

    @property
    def interval(self):
        return (self.alpha - self.Delta, self.alpha + self.Delta)


@dataclass(frozen=True)
class DirichletApprox:
    """alpha = b/r + z with r <= tau, gcd(b, r) = 1 and |z| <= 1/(r tau)."""

    b: int
    r: int
    z: Fraction
    tau: object


def enumerate_farey(S, limit: Optional[int] = None) -> List[FareyPoint]:
    """All reduced a/q with q in S and 1 <= a <= q, sorted by value."""
    moduli = sorted(getattr(S, "elements", S))
    limit = max_work() if limit is None else limit
    work = sum(euler_phi(q) for q in moduli)
    if work > limit:
        raise CapacityExceeded(f"{work} Farey fractions exceed the work guard {limit}")
    points = [FareyPoint(a, q) for q in moduli for a in range(1, q + 1) if math.gcd(a, q) == 1]
    points.sort(key=lambda p: p.a / p.q)
    # floats separate fractions with denominators below ~6e7; repair any inversion exactly
    for left, right in zip(points, points[1:]):
        if left.a * right.q >= right.a * left.q:
            points.sort(key=lambda p: p.value)
            break
    return points


def _is_exact(x) -> bool:
    return isinstance(x, Rational)


def _values(points: Sequence[FareyPoint]) -> List[Fraction]:
    return [p.value for p in points]


def count_in_interval(points: Sequence[FareyPoint], query: FareyQuery) -> int:
    """P(alpha): the number of reduced a/q (a any integer) in [alpha-Delta, alpha+Delta].

    ``points`` is one period (a in [1, q]); integer translates are counted
    too, so P is 1-periodic and even. Rational inputs are compared exactly;
    float inputs use endpoints widened outward by one ulp.
    """
    if _is_exact(query.alpha) and _is_exact(query.Delta):
        alpha, delta = Fraction(query.alpha), Fraction(query.Delta)
        lo, hi = alpha - delta, alpha + delta
        values = _values(points)
    else:
        alpha, delta = float(query.alpha), float(query.Delta)
        lo = math.nextafter(alpha - delta, -math.inf)
        hi = math.nextafter(alpha + delta, math.inf)
        values = [float(p) for p in points]
    total = 0
    for shift in range(math.floor(lo) - 1, math.ceil(hi) + 1):
        total += bisect_right(values, hi - shift) - bisect_left(values, lo - shift)
    return total


def k_delta(points: Sequence[FareyPoint], Delta) -> int:
    """K(Delta): max over alpha of #{points within circular distance Delta of alpha}.

    Circular two-pointer sweep over the sorted values, with the list
    duplicated and shifted by one to handle wraparound. Comparisons are
    exact (a float Delta is taken at its exact binary value).
    """
    delta = Fraction(Delta)
    if not 0 < delta <= Fraction(1, 2):
        raise ValueError(f"Delta must lie in (0, 1/2], got {Delta}")
    n = len(points)
    if n == 0:
        return 0
    num, den = (2 * delta).numerator, (2 * delta).denominator
    a = [p.a for p in points] + [p.a + p.q for p in points]
    q = [p.q for p in points] * 2
    best, j = 0, 0
    for i in range(n):
        if j < i:
            j = i
        # extend while value[j+1] - value[i] <= 2 Delta
        while j + 1 < i + n and (a[j + 1] * q[i] - a[i] * q[j + 1]) * den <= num * q[i] * q[j + 1]:
            j += 1
        best = max(best, j - i + 1)
        if best == n:
            break
    return best


def dirichlet_approx(alpha, tau) -> DirichletApprox:
    """Rational b/r with r <= tau and |alpha - b/r| <= 1/(r tau).

    Walks the continued-fraction convergents of ``alpha`` (taken exactly)
    and keeps the last one whose denominator does not exceed ``tau``.
    """
    x = Fraction(alpha)
    t = Fraction(tau)
    if t < 1:
        raise ValueError(f"tau must be at least 1, got {tau}")
    p0, q0, p1, q1 = 1, 0, math.floor(x), 1
    rest = x - p1
    while rest != 0:
        x = 1 / rest
        c = math.floor(x)
        rest = x - c
        p2, q2 = c * p1 + p0, c * q1 + q0
        if q2 > t:
            break
        p0, q0, p1, q1 = p1, q1, p2, q2
    b, r = p1, q1
    z = Fraction(alpha) - Fraction(b, r)
    if abs(z) * r * t > 1:
        b, r, z = _best_intermediate(Fraction(alpha), t)
    return DirichletApprox(b=b, r=r, z=z, tau=tau)


def _best_intermediate(alpha: Fraction, tau: Fraction):
    # exhaustive fallback; unreachable for exact inputs but kept as a safety net
    best = None
    for r in range(1, math.floor(tau) + 1):
        b = round(alpha * r)
        z = alpha - Fraction(b, r)
        if math.gcd(b, r) == 1 and abs(z) * r * tau <= 1:
            if best is None or abs(z) < abs(best[2]):
                best = (b, r, z)
    if best is None:
        raise ArithmeticError(f"no Dirichlet approximation for {alpha} at tau={tau}")
    return best
