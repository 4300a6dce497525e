"""Exponential sums S(alpha) and the large-sieve left-hand side.

The left-hand side over a moduli set is assembled from full residue sums
F(q) = sum_{a=1}^{q} |S(a/q)|^2, which fold the coefficient sequence modulo
q (discrete Parseval), and Moebius inversion G(q) = sum_{d|q} mu(d) F(q/d)
for the sum over reduced fractions only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Dict, Iterable, Optional, Union

import numpy as np

from .errors import InputFormatError
from .modmath import divisors, mobius

RENORM_BLOCK = 1 << 10


@dataclass(frozen=True, eq=False)
class CoefficientSequence:
    """Complex weights a_1..a_N (stored 0-based: ``values[n-1] = a_n``)."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.ascontiguousarray(self.values, dtype=np.complex128)
        if vals.ndim != 1 or vals.size == 0:
            raise ValueError("coefficients must be a nonempty 1-d sequence")
        if not np.all(np.isfinite(vals)):
            raise ValueError("coefficients must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def N(self) -> int:
        return int(self.values.size)

    @property
    def Z(self) -> float:
        return norm_Z(self)

    def __len__(self):
        return self.N


def ones(N: int) -> CoefficientSequence:
    if N < 1:
        raise ValueError(f"N must be positive, got {N}")
    return CoefficientSequence(np.ones(N))


def spike(N: int, position: int = 1) -> CoefficientSequence:
    if N < 1 or not 1 <= position <= N:
        raise ValueError(f"need 1 <= position <= N, got position={position}, N={N}")
    vals = np.zeros(N, dtype=np.complex128)
    vals[position - 1] = 1.0
    return CoefficientSequence(vals)


def random_disk(N: int, seed: int) -> CoefficientSequence:
    """Independent points uniform on the closed unit disk."""
    if N < 1:
        raise ValueError(f"N must be positive, got {N}")
    rng = np.random.default_rng(seed)
    radius = np.sqrt(rng.random(N))
    angle = 2 * np.pi * rng.random(N)
    return CoefficientSequence(radius * np.exp(1j * angle))


FAMILIES = ("ones", "spike", "random")


def make_sequence(family: str, N: int, seed: Optional[int] = None) -> CoefficientSequence:
    if family == "ones":
        return ones(N)
    if family == "spike":
        return spike(N)
    if family == "random":
        if seed is None:
            raise ValueError("the random family needs an explicit seed")
        return random_disk(N, seed)
    raise ValueError(f"unknown coefficient family {family!r}")


def _unit_phases(start: int, count: int, alpha) -> np.ndarray:
    """e(n*alpha) for n = start .. start+count-1, one exact phase per block."""
    out = np.empty(count, dtype=np.complex128)
    if isinstance(alpha, Fraction):
        step = complex(np.exp(2j * np.pi * float(alpha - math.floor(alpha))))
    else:
        step = complex(np.exp(2j * np.pi * (alpha - math.floor(alpha))))
    for lo in range(0, count, RENORM_BLOCK):
        n0 = start + lo
        if isinstance(alpha, Fraction):
            frac = (n0 * alpha.numerator % alpha.denominator) / alpha.denominator
        else:
            frac = math.fmod(n0 * alpha, 1.0)
        width = min(RENORM_BLOCK, count - lo)
        block = np.full(width, step)
        block[0] = np.exp(2j * np.pi * frac)
        out[lo : lo + width] = np.cumprod(block)
    return out


def eval_S(seq: CoefficientSequence, alpha) -> complex:
    """S(alpha) = sum a_n e(n alpha) via the multiplicative recurrence.

    The running phase is reset to an exactly computed value every
    ``RENORM_BLOCK`` terms. Pass ``alpha`` as a Fraction for exact phase
    reduction.
    """
    if not isinstance(alpha, Fraction):
        alpha = float(alpha)
    phases = _unit_phases(1, seq.N, alpha)
    return complex(np.dot(seq.values, phases))


def eval_S_direct(seq: CoefficientSequence, alpha) -> complex:
    """Per-term evaluation with one transcendental call per n."""
    n = np.arange(1, seq.N + 1)
    if isinstance(alpha, Fraction):
        frac = (n * alpha.numerator % alpha.denominator) / alpha.denominator
    else:
        frac = np.fmod(n * float(alpha), 1.0)
    return complex(np.dot(seq.values, np.exp(2j * np.pi * frac)))


def norm_Z(seq: CoefficientSequence) -> float:
    """Z = sum |a_n|^2, compensated summation."""
    return math.fsum((seq.values.real**2 + seq.values.imag**2).tolist())


def fold(seq: CoefficientSequence, q: int) -> np.ndarray:
    """c_r = sum of a_n over n = r (mod q), for r = 0..q-1."""
    idx = np.arange(1, seq.N + 1) % q
    re = np.bincount(idx, weights=seq.values.real, minlength=q)
    im = np.bincount(idx, weights=seq.values.imag, minlength=q)
    return re + 1j * im


def full_residue_sum(seq: CoefficientSequence, q: int) -> float:
    """F(q) = sum_{a=1}^{q} |S(a/q)|^2 = q * sum_r |c_r|^2."""
    if q < 1:
        raise ValueError(f"q must be positive, got {q}")
    c = fold(seq, q)
    return q * math.fsum((c.real**2 + c.imag**2).tolist())


def reduced_residue_sum(seq: CoefficientSequence, q: int, cache: Optional[Dict[int, float]] = None) -> float:
    """G(q) = sum over a coprime to q of |S(a/q)|^2, by Moebius inversion of F."""
    if cache is None:
        cache = {}
    terms = []
    for d in divisors(q):
        mu = mobius(d)
        if mu == 0:
            continue
        m = q // d
        if m not in cache:
            cache[m] = full_residue_sum(seq, m)
        terms.append(mu * cache[m])
    return max(math.fsum(terms), 0.0)


def _phase_table(q: int) -> np.ndarray:
    return np.exp(2j * np.pi * np.arange(q) / q)


def reduced_residue_sum_direct(seq: CoefficientSequence, q: int) -> float:
    """G(q) by evaluating S at every reduced fraction a/q."""
    table = _phase_table(q)
    n = np.arange(1, seq.N + 1, dtype=np.int64)
    units = np.array([a for a in range(1, q + 1) if math.gcd(a, q) == 1], dtype=np.int64)
    total = []
    for chunk in np.array_split(units, max(1, units.size * seq.N // (1 << 22) + 1)):
        if chunk.size == 0:
            continue
        vals = table[np.outer(chunk, n) % q] @ seq.values
        total.extend((vals.real**2 + vals.imag**2).tolist())
    return math.fsum(total)


def sieve_lhs(seq: CoefficientSequence, S: Iterable[int], method: str = "fold") -> float:
    """sum over q in S of G(q); ``method`` is ``"fold"`` or ``"direct"``."""
    moduli = sorted(getattr(S, "elements", S))
    if method == "direct":
        return math.fsum(reduced_residue_sum_direct(seq, q) for q in moduli)
    if method != "fold":
        raise ValueError(f"unknown method {method!r}")
    cache: Dict[int, float] = {}
    return math.fsum(reduced_residue_sum(seq, q, cache) for q in moduli)


def load_coefficients(path: Union[str, Path]) -> CoefficientSequence:
    """Read ``# N=<int>`` followed by N lines ``<re> <im>``."""
    lines = [ln.strip() for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("#"):
        raise InputFormatError(f"{path}: missing '# N=<int>' header")
    key, sep, val = lines[0].lstrip("#").strip().partition("=")
    if key.strip() != "N" or not sep:
        raise InputFormatError(f"{path}: header must be '# N=<int>'")
    try:
        N = int(val)
    except ValueError:
        raise InputFormatError(f"{path}: N is not an integer: {val!r}") from None
    rows = lines[1:]
    if N < 1 or len(rows) != N:
        raise InputFormatError(f"{path}: header says N={N} but found {len(rows)} rows")
    vals = np.empty(N, dtype=np.complex128)
    for i, row in enumerate(rows):
        parts = row.split()
        if len(parts) != 2:
            raise InputFormatError(f"{path}:{i + 2}: expected '<re> <im>', got {row!r}")
        try:
            vals[i] = complex(float(parts[0]), float(parts[1]))
        except ValueError:
            raise InputFormatError(f"{path}:{i + 2}: not numeric: {row!r}") from None
    if not np.all(np.isfinite(vals)):
        raise InputFormatError(f"{path}: non-finite coefficient")
    return CoefficientSequence(vals)


def save_coefficients(seq: CoefficientSequence, path: Union[str, Path]) -> None:
    rows = [f"# N={seq.N}"] + [f"{v.real!r} {v.imag!r}" for v in seq.values.tolist()]
    Path(path).write_text("\n".join(rows) + "\n")
