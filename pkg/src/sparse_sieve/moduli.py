"""Sparse moduli sets, their t-slices and window-maximum counts."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from pathlib import Path
from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import InputFormatError
from .modmath import euler_phi, quadratic_count, quadratic_solutions, square_divisor_pair

Real = Union[int, float, Fraction]


def _exact(x: Real) -> Fraction:
    """Exact rational value of a number (floats convert without rounding)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, Rational):
        return Fraction(int(x.numerator), int(x.denominator))
    return Fraction(float(x))


@dataclass(frozen=True)
class ModuliSet:
    """A finite set of moduli inside the window (M, M+Q]."""

    elements: Tuple[int, ...]
    M: int
    Q: int
    family: str = field(default="file", compare=False)

    def __post_init__(self):
        elems = tuple(sorted(set(int(q) for q in self.elements)))
        object.__setattr__(self, "elements", elems)
        if self.Q < 1:
            raise ValueError(f"window width Q must be positive, got {self.Q}")
        if not 0 <= self.M <= self.Q:
            raise ValueError(f"need 0 <= M <= Q, got M={self.M}, Q={self.Q}")
        for q in elems:
            if not self.M < q <= self.M + self.Q:
                raise ValueError(f"modulus {q} outside ({self.M}, {self.M + self.Q}]")

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, q):
        return q in self._lookup

    @property
    def _lookup(self):
        # frozen dataclass: cache the set on first use
        try:
            return self.__dict__["_set"]
        except KeyError:
            s = frozenset(self.elements)
            object.__setattr__(self, "_set", s)
            return s

    @property
    def lo(self) -> Fraction:
        return Fraction(self.M)

    @property
    def hi(self) -> Fraction:
        return Fraction(self.M + self.Q)

    def farey_size(self) -> int:
        """Number of reduced fractions a/q, q in the set (sum of phi)."""
        return sum(euler_phi(q) for q in self.elements)


@dataclass(frozen=True)
class SubsetT:
    """The t-slice {q : t*q in S}; elements lie in (lo, hi] = (M/t, (M+Q)/t]."""

    t: int
    elements: Tuple[int, ...]
    lo: Fraction
    hi: Fraction

    @property
    def size(self) -> int:
        return len(self.elements)

    def __len__(self):
        return len(self.elements)

    @property
    def array(self) -> np.ndarray:
        try:
            return self.__dict__["_array"]
        except KeyError:
            arr = np.asarray(self.elements, dtype=np.int64)
            object.__setattr__(self, "_array", arr)
            return arr


@dataclass(frozen=True)
class WindowQuery:
    u: Real
    k: int
    l: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be positive, got {self.k}")
        if not self.u > 0:
            raise ValueError(f"window length must be positive, got {self.u}")


def squares_in_window(Q: int) -> ModuliSet:
    """Perfect squares in (Q, 2Q], as a set with M = Q and width Q."""
    if Q < 1:
        raise ValueError(f"Q must be positive, got {Q}")
    lo = math.isqrt(Q) + 1
    hi = math.isqrt(2 * Q)
    return ModuliSet(tuple(j * j for j in range(lo, hi + 1)), M=Q, Q=Q, family="squares")


def squares_up_to(Q1: int) -> ModuliSet:
    """Squares q^2 with q <= Q1, inside (0, Q1^2]."""
    if Q1 < 1:
        raise ValueError(f"Q1 must be positive, got {Q1}")
    return ModuliSet(tuple(j * j for j in range(1, Q1 + 1)), M=0, Q=Q1 * Q1, family="squares")


def _prime_sieve(n: int) -> np.ndarray:
    is_prime = np.ones(n + 1, dtype=bool)
    is_prime[:2] = False
    for i in range(2, math.isqrt(n) + 1):
        if is_prime[i]:
            is_prime[i * i :: i] = False
    return np.flatnonzero(is_prime)


def primes_up_to(Q: int) -> ModuliSet:
    """All primes in [2, Q], with M = 0 and width Q."""
    if Q < 2:
        raise ValueError(f"Q must be at least 2, got {Q}")
    return ModuliSet(tuple(int(p) for p in _prime_sieve(Q)), M=0, Q=Q, family="primes")


def subset_t(S, t: int) -> SubsetT:
    """Exact t-slice of a ModuliSet or of another SubsetT."""
    if t < 1:
        raise ValueError(f"t must be positive, got {t}")
    elems = tuple(q // t for q in S.elements if q % t == 0)
    return SubsetT(t=getattr(S, "t", 1) * t, elements=elems, lo=S.lo / t, hi=S.hi / t)


def _sorted_class(elements: Sequence[int], k: int, l: int) -> np.ndarray:
    arr = np.asarray(elements, dtype=np.int64)
    if k > 1:
        arr = arr[arr % k == l % k]
    return arr


def _max_window_fill(arr: np.ndarray, width: int) -> int:
    """max over i of #{j : 0 <= arr[i] - arr[j] <= width} for sorted arr."""
    if arr.size == 0:
        return 0
    start = np.searchsorted(arr, arr - width, side="left")
    return int((np.arange(arr.size) - start).max() + 1)


def count_window_max(sub, query: WindowQuery, y_range: Optional[Tuple[Real, Real]] = None) -> int:
    """A_t(u, k, l): the largest number of residue-class members in a window (y, y+u].

    ``y`` ranges over ``y_range`` (default: the slice's own window
    ``[lo, hi]``). The count is a right-continuous step function of ``y``,
    so the maximum sits at ``y_lo`` or at some ``y = e - u`` with ``e`` in
    the class.
    """
    elements = sub.elements if hasattr(sub, "elements") else sub
    if y_range is None:
        y_range = (sub.lo, sub.hi)
    y_lo, y_hi = _exact(y_range[0]), _exact(y_range[1])
    if y_lo > y_hi:
        raise ValueError(f"empty y range [{y_lo}, {y_hi}]")
    u = _exact(query.u)
    arr = _sorted_class(elements, query.k, query.l)
    if arr.size == 0:
        return 0
    arr = np.sort(arr)
    # for integers d: d < u  <=>  d <= ceil(u) - 1
    width = math.ceil(u) - 1
    # window anchored at y_lo holds e with floor(y_lo) < e <= floor(y_lo + u)
    best = int(
        np.searchsorted(arr, math.floor(y_lo + u), side="right")
        - np.searchsorted(arr, math.floor(y_lo), side="right")
    )
    # anchors y = e - u inside [y_lo, y_hi]
    first = np.searchsorted(arr, math.ceil(y_lo + u), side="left")
    last = np.searchsorted(arr, math.floor(y_hi + u), side="right")
    if first < last:
        start = np.searchsorted(arr, arr[first:last] - width, side="left")
        best = max(best, int((np.arange(first, last) - start).max() + 1))
    return best


@lru_cache(maxsize=1 << 16)
def _residue_window_table(elements: Tuple[int, ...], k: int, width: int) -> np.ndarray:
    arr = np.asarray(elements, dtype=np.int64)
    table = np.zeros(k, dtype=np.int64)
    if arr.size == 0:
        return table
    if k == 1:
        table[0] = _max_window_fill(arr, width)
        return table
    res = arr % k
    order = np.lexsort((arr, res))
    arr, res = arr[order], res[order]
    cuts = np.flatnonzero(np.diff(res)) + 1
    for block in np.split(np.arange(arr.size), cuts):
        table[res[block[0]]] = _max_window_fill(arr[block], width)
    return table


def window_max_by_residue(sub: SubsetT, u: Real, k: int) -> np.ndarray:
    """A_t(u, k, l) for every residue l mod k at once.

    Valid when every element lies in (lo, hi] (always true for slices built
    by :func:`subset_t`); then the y-constraint never binds.
    """
    width = math.ceil(_exact(u)) - 1
    if width < 0:
        return np.zeros(k, dtype=np.int64)
    return _residue_window_table(sub.elements, k, width)


def delta_squares(t: int, k: int, l: int) -> int:
    """Number of x mod k with x^2 * g_t = l (mod k)."""
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    return quadratic_count(square_divisor_pair(t).g, l, k)


def delta_squares_solutions(t: int, k: int, l: int):
    return quadratic_solutions(square_divisor_pair(t).g, l, k)


def delta_primes(t: int, k: int, l: int) -> Fraction:
    """Weight used for the all-primes family: k/phi(k) for t = 1, else 1."""
    if t == 1:
        return Fraction(k, euler_phi(k))
    return Fraction(1)


def load_moduli(path: Union[str, Path]) -> ModuliSet:
    """Read a moduli file: header ``# M=<int> Q=<int>``, then one integer per line."""
    text = Path(path).read_text().splitlines()
    lines = [ln.strip() for ln in text if ln.strip()]
    if not lines or not lines[0].startswith("#"):
        raise InputFormatError(f"{path}: missing '# M=<int> Q=<int>' header")
    header = {}
    for tok in lines[0].lstrip("#").split():
        key, sep, val = tok.partition("=")
        if not sep:
            raise InputFormatError(f"{path}: bad header token {tok!r}")
        try:
            header[key] = int(val)
        except ValueError:
            raise InputFormatError(f"{path}: header value {tok!r} is not an integer") from None
    if set(header) != {"M", "Q"}:
        raise InputFormatError(f"{path}: header must define exactly M and Q")
    M, Q = header["M"], header["Q"]
    if Q < 1 or not 0 <= M <= Q:
        raise InputFormatError(f"{path}: need 0 <= M <= Q and Q >= 1, got M={M}, Q={Q}")
    elems = []
    for lineno, ln in enumerate(lines[1:], start=2):
        if ln.startswith("#"):
            continue
        try:
            q = int(ln)
        except ValueError:
            raise InputFormatError(f"{path}:{lineno}: not an integer: {ln!r}") from None
        if not M < q <= M + Q:
            raise InputFormatError(f"{path}:{lineno}: {q} outside ({M}, {M + Q}]")
        elems.append(q)
    return ModuliSet(tuple(elems), M=M, Q=Q, family="file")


def save_moduli(S: ModuliSet, path: Union[str, Path]) -> None:
    body = "\n".join(str(q) for q in S.elements)
    Path(path).write_text(f"# M={S.M} Q={S.Q}\n{body}\n" if body else f"# M={S.M} Q={S.Q}\n")


def from_iterable(values: Iterable[int], M: int, Q: int) -> ModuliSet:
    return ModuliSet(tuple(values), M=M, Q=Q)
