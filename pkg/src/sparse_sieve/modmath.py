"""Exact integer and modular arithmetic.

Factorization, multiplicative functions, modular inverses and the full
solution sets of quadratic congruences modulo arbitrary composites.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import List, Tuple

from .errors import NotCoprimeError

Factorization = List[Tuple[int, int]]

_MAX_INPUT = 2**63 - 1
_TRIAL_LIMIT = 1 << 16
# deterministic for n < 3.3e24
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


def is_probable_prime(n: int) -> bool:
    """Deterministic Miller-Rabin for n below 3.3e24."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _pollard_brent(n: int) -> int:
    """Return a nontrivial factor of the odd composite n."""
    for c in range(1, n):
        y, m, g, r, q = 2, 128, 1, 1, 1
        f = lambda v: (v * v + c) % n  # noqa: E731
        while g == 1:
            x = y
            for _ in range(r):
                y = f(y)
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = f(y)
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = f(ys)
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g
    raise ArithmeticError(f"no factor found for {n}")


def _split(n: int, out: dict) -> None:
    if n == 1:
        return
    if is_probable_prime(n):
        out[n] = out.get(n, 0) + 1
        return
    d = _pollard_brent(n)
    _split(d, out)
    _split(n // d, out)


@lru_cache(maxsize=1 << 16)
def _factor_tuple(n: int) -> Tuple[Tuple[int, int], ...]:
    pairs = []
    for p in (2, 3):
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            pairs.append((p, e))
    p, step = 5, 2
    while p * p <= n and p < _TRIAL_LIMIT:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            pairs.append((p, e))
        p += step
        step = 6 - step
    if n > 1:
        rest: dict = {}
        if p * p > n:
            rest[n] = 1
        else:
            _split(n, rest)
        pairs.extend(sorted(rest.items()))
    return tuple(pairs)


def factorize(n: int) -> Factorization:
    """Return the prime factorization of ``n`` as sorted ``(prime, exponent)`` pairs.

    >>> factorize(12)
    [(2, 2), (3, 1)]
    """
    n = int(n)
    if n < 1 or n > _MAX_INPUT:
        raise ValueError(f"factorize expects 1 <= n <= 2**63-1, got {n}")
    return list(_factor_tuple(n))


def euler_phi(n: int) -> int:
    result = n
    for p, _ in factorize(n):
        result -= result // p
    return result


def omega(n: int) -> int:
    """Number of distinct prime divisors."""
    return len(factorize(n))


def mobius(n: int) -> int:
    pairs = factorize(n)
    if any(e > 1 for _, e in pairs):
        return 0
    return -1 if len(pairs) % 2 else 1


def divisors(n: int) -> List[int]:
    divs = [1]
    for p, e in factorize(n):
        divs = [d * p**j for d in divs for j in range(e + 1)]
    return sorted(divs)


def mod_inverse(a: int, m: int) -> int:
    """Return x in [0, m) with a*x = 1 (mod m); for m = 1 the answer is 0."""
    if m < 1:
        raise ValueError(f"modulus must be positive, got {m}")
    if m == 1:
        return 0
    try:
        return pow(a, -1, m)
    except ValueError:
        raise NotCoprimeError(f"{a} is not invertible modulo {m}") from None


def crt_pair(r1: int, m1: int, r2: int, m2: int) -> int:
    """Combine x = r1 (mod m1), x = r2 (mod m2) for coprime moduli."""
    return (r1 + m1 * ((r2 - r1) * mod_inverse(m1, m2) % m2)) % (m1 * m2)


def _tonelli_shanks(a: int, p: int) -> int:
    """One square root of the quadratic residue a modulo the odd prime p."""
    a %= p
    if a == 0:
        return 0
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while pow(z, (p - 1) // 2, p) != p - 1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c = i, b * b % p
        t, r = t * c % p, r * b % p
    return r


def _unit_roots_prime_power(a: int, p: int, e: int) -> List[int]:
    """Roots of x^2 = a (mod p^e) for a coprime to p."""
    pe = p**e
    a %= pe
    if p == 2:
        if e <= 3:
            return [x for x in range(1, pe, 2) if x * x % pe == a]
        if a % 8 != 1:
            return []
        # lift one root from 2^i to 2^(i+1); the other preimage is r + 2^(i-1)
        r = 1
        for i in range(3, e):
            if (r * r - a) % (1 << (i + 1)):
                r += 1 << (i - 1)
        half = pe >> 1
        return sorted({r % pe, -r % pe, (r + half) % pe, (-r + half) % pe})
    if pow(a % p, (p - 1) // 2, p) != 1:
        return []
    r = _tonelli_shanks(a, p)
    pk = p
    for _ in range(1, e):
        pk *= p
        r = (r - (r * r - a) * mod_inverse(2 * r, pk)) % pk
    return sorted({r, (-r) % pe})


def _roots_prime_power(a: int, p: int, e: int) -> List[int]:
    """All roots of x^2 = a (mod p^e), any a."""
    pe = p**e
    a %= pe
    if a == 0:
        step = p ** ((e + 1) // 2)
        return list(range(0, pe, step))
    v = 0
    while a % p == 0:
        a //= p
        v += 1
    if v % 2:
        return []
    half = v // 2
    base = _unit_roots_prime_power(a, p, e - v)
    # x = p^(v/2) * y with y determined modulo p^(e-v); spread over p^(v/2) lifts
    mod_y = p ** (e - v)
    scale = p**half
    return sorted({(scale * (y + j * mod_y)) % pe for y in base for j in range(scale)})


def _combine(parts: List[Tuple[List[int], int]]) -> List[int]:
    sols, mod = [0], 1
    for roots, pe in parts:
        if not roots:
            return []
        sols = [crt_pair(s, mod, r, pe) for s in sols for r in roots]
        mod *= pe
    return sorted(sols)


def sqrt_solutions_mod(a: int, k: int) -> List[int]:
    """All x in [0, k) with x^2 = a (mod k), sorted.

    Tonelli-Shanks plus Hensel lifting on each prime power of ``k``,
    combined by the Chinese remainder theorem.
    """
    if k < 1:
        raise ValueError(f"modulus must be positive, got {k}")
    if k == 1:
        return [0]
    return _combine([(_roots_prime_power(a, p, e), p**e) for p, e in factorize(k)])


def _scaled_roots_prime_power(g: int, l: int, p: int, e: int) -> List[int]:
    """All x mod p^e with g*x^2 = l (mod p^e)."""
    pe = p**e
    g %= pe
    l %= pe
    w = 0
    while g % p == 0 and w < e:
        g //= p
        w += 1
    if w >= e:
        return list(range(pe)) if l == 0 else []
    if l % p**w:
        return []
    low = p ** (e - w)
    target = (l // p**w) * mod_inverse(g, low) % low
    base = _roots_prime_power(target, p, e - w)
    return sorted(y + j * low for y in base for j in range(p**w))


@lru_cache(maxsize=1 << 18)
def _scaled_count_prime_power(g: int, l: int, p: int, e: int) -> int:
    pe = p**e
    g %= pe
    l %= pe
    w = 0
    while g % p == 0 and w < e:
        g //= p
        w += 1
    if w >= e:
        return pe if l == 0 else 0
    if l % p**w:
        return 0
    low = p ** (e - w)
    target = (l // p**w) * mod_inverse(g, low) % low
    return len(_roots_prime_power(target, p, e - w)) * p**w


def quadratic_solutions(g: int, l: int, k: int) -> List[int]:
    """All x in [0, k) with g*x^2 = l (mod k)."""
    if k < 1:
        raise ValueError(f"modulus must be positive, got {k}")
    if k == 1:
        return [0]
    return _combine([(_scaled_roots_prime_power(g, l, p, e), p**e) for p, e in factorize(k)])


def quadratic_count(g: int, l: int, k: int) -> int:
    """Number of x mod k with g*x^2 = l (mod k), by multiplicativity over k."""
    if k < 1:
        raise ValueError(f"modulus must be positive, got {k}")
    count = 1
    for p, e in factorize(k):
        pe = p**e
        count *= _scaled_count_prime_power(g % pe, l % pe, p, e)
        if count == 0:
            return 0
    return count


@dataclass(frozen=True)
class SquareDivisorPair:
    """``f`` is minimal with t | q^2 iff f | q; ``g = f^2 / t``."""

    f: int
    g: int
    t: int


@lru_cache(maxsize=1 << 14)
def square_divisor_pair(t: int) -> SquareDivisorPair:
    if t < 1:
        raise ValueError(f"t must be positive, got {t}")
    f = 1
    for p, v in factorize(t):
        f *= p ** ((v + 1) // 2)
    g, rem = divmod(f * f, t)
    assert rem == 0
    return SquareDivisorPair(f=f, g=g, t=t)


def sigma_r(r: int) -> Fraction:
    """Exact value of sum over t | r of 1/f_t.

    Evaluated as a product over prime powers: for p^v the local factor
    is sum_{j<=v} p^(-ceil(j/2)).
    """
    if r < 1:
        raise ValueError(f"r must be positive, got {r}")
    total = Fraction(1)
    for p, v in factorize(r):
        total *= sum(Fraction(1, p ** ((j + 1) // 2)) for j in range(v + 1))
    return total
