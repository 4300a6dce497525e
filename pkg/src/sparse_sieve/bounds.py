"""Right-hand sides of the large-sieve bounds, the condition checker and ratio reports.

Absolute constants are set to 1 throughout; the observed LHS/RHS ratios
are reported as fitted constants, never asserted.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from .errors import GridTooCoarse
from .expsum import CoefficientSequence, sieve_lhs
from .modmath import divisors, euler_phi, omega
from .moduli import ModuliSet, SubsetT, delta_squares, subset_t, window_max_by_residue

FORMULAS = (
    "classical",
    "Z1",
    "Z2",
    "zhao",
    "thm2",
    "thm3",
    "corollary",
    "elliott_a",
    "elliott_b",
    "wolke",
    "thm1",
)
REWRITE_RTOL = 1e-9


@dataclass(frozen=True)
class BoundParams:
    N: int
    Q: int
    Z: float
    M: int = 0
    Q1: Optional[int] = None
    eps: float = 0.1
    C: float = 1.0
    X: Optional[float] = None

    def __post_init__(self):
        if self.N < 1 or self.Q < 1:
            raise ValueError(f"N and Q must be positive, got N={self.N}, Q={self.Q}")
        if not 0 < self.eps <= 0.25:
            raise ValueError(f"eps must lie in (0, 1/4], got {self.eps}")

    @property
    def U(self) -> int:
        """1 iff M < sqrt(N)."""
        return 1 if self.M * self.M < self.N else 0


def loglog(x: float) -> float:
    return math.log(math.log(x))


def rhs_classical(p: BoundParams) -> float:
    """(N + Q^2) Z with Q the largest admissible modulus M + Q."""
    qmax = p.M + p.Q
    return (p.N + qmax * qmax) * p.Z


def rhs_square_family(p: BoundParams) -> Dict[str, float]:
    if p.Q1 is None or p.Q1 < 1:
        raise ValueError("square-family bounds need Q1 >= 1")
    N, Q1, Z, eps = p.N, p.Q1, p.Z, p.eps
    return {
        "Z1": (N + Q1**4) * Z,
        "Z2": Q1 * (N + Q1**2) * Z,
        "zhao": math.log(2 * Q1) * (Q1**3 + (N * math.sqrt(Q1) + math.sqrt(N) * Q1**2) * N**eps) * Z,
        # the double logarithm takes Q = Q1^2, the top of the square moduli range
        "thm3": loglog(10 * N * Q1 * Q1) ** 2 * (Q1**3 + N + N ** (0.5 + eps) * Q1**2) * Z,
    }


def slice_sizes(S: ModuliSet, t_max: int) -> List[int]:
    """|S_t| for t = 0..t_max (index 0 unused)."""
    arr = np.asarray(S.elements, dtype=np.int64)
    sizes = [0] * (t_max + 1)
    for t in range(1, t_max + 1):
        sizes[t] = int(np.count_nonzero(arr % t == 0)) if arr.size else 0
    return sizes


def max_divisor_slice_sum(S: ModuliSet, N: int) -> int:
    """max over r <= sqrt(N) of sum_{t | r} |S_t|."""
    r_max = math.isqrt(N)
    sizes = slice_sizes(S, r_max)
    return max(sum(sizes[t] for t in divisors(r)) for r in range(1, r_max + 1))


def rhs_thm2(p: BoundParams, S: ModuliSet) -> float:
    X = p.X if p.X is not None else fitted_X(S, p.N)
    N, Q = p.N, p.Q
    inner = math.sqrt(N) * loglog(10 * N) + max_divisor_slice_sum(S, N)
    return p.C * (N * p.U + (min(Q * X, N) + Q) * inner) * p.Z


def rhs_corollary(p: BoundParams, S: ModuliSet) -> float:
    X = p.X if p.X is not None else fitted_X(S, p.N)
    return (p.N + p.Q * p.N**p.eps * X * (math.sqrt(p.N) + len(S))) * p.Z


def rhs_elliott_a(p: BoundParams, S: ModuliSet) -> Optional[float]:
    if p.N < 2:
        return None
    return (p.N**2 / math.log(p.N) + p.Q * len(S)) * p.Z


def rhs_elliott_b(p: BoundParams, S: ModuliSet) -> float:
    """Elliott's conjectured shape (N + QS) Z; emitted for comparison only."""
    return (p.N + p.Q * len(S)) * p.Z


def rhs_wolke(p: BoundParams) -> Optional[float]:
    """Wolke's bound for all primes up to Q; None unless Q >= 10 and N = Q^(1+d), 0 < d < 1."""
    Q, N = p.Q, p.N
    if Q < 10 or not Q < N < Q * Q:
        return None
    d = math.log(N) / math.log(Q) - 1
    return Q * Q * loglog(Q) / math.log(Q) / (1 - d) * p.Z


# ---------------------------------------------------------------------------
# window-sum search over (r, z, h)


@dataclass(frozen=True)
class Thm1SearchPoint:
    r: int
    z: Fraction
    h: int
    inner: int


@dataclass
class SearchResult:
    inner: int
    point: Optional[Thm1SearchPoint]
    evaluations: int = 0


def _ceil_sqrt_ratio(a: int, b: int) -> int:
    """Smallest integer n >= 0 with n^2 * b >= a."""
    n = math.isqrt(a // b)
    while n * n * b < a:
        n += 1
    return n


class _WindowSum:
    """Evaluates sum_{t|r} sum_{0<m<=4rzQ/t, (m,r/t)=1} A_t(Delta Q/(t z), r/t, h m) for all h."""

    def __init__(self, S: ModuliSet, Delta: Fraction):
        self.S = S
        self.Q = S.Q
        self.Delta = Delta
        self._slices: Dict[int, SubsetT] = {}

    def slice(self, t: int) -> SubsetT:
        if t not in self._slices:
            self._slices[t] = subset_t(self.S, t)
        return self._slices[t]

    def all_h(self, r: int, z: Fraction) -> Tuple[np.ndarray, np.ndarray]:
        units_r = np.array([h for h in range(r) if math.gcd(h, r) == 1], dtype=np.int64)
        total = np.zeros(units_r.size, dtype=np.int64)
        for t in divisors(r):
            sub = self.slice(t)
            if not sub.elements:
                continue
            k = r // t
            mmax = math.floor(4 * r * z * self.Q / t)
            if mmax < 1:
                continue
            table = window_max_by_residue(sub, self.Delta * self.Q / (t * z), k)
            if not table.any():
                continue
            s = np.array([v for v in range(1, k + 1) if math.gcd(v, k) == 1], dtype=np.int64)
            counts = np.where(s <= mmax, (mmax - s) // k + 1, 0)
            total += table[np.outer(units_r, s) % k] @ counts
        return units_r, total


def _z_candidates(r: int, Q: int, Delta: Fraction, per_octave: int, divs: List[int]) -> List[Fraction]:
    """z in [Delta, sqrt(Delta)/r]: the left end, the breakpoints j t/(4 r Q), and a geometric grid."""

    def inside(z: Fraction) -> bool:
        return Delta <= z and z * z * r * r <= Delta

    zs = {Delta}
    for t in divs:
        # j t / (4 r Q) >= Delta  and  (j t)^2 <= 16 Q^2 Delta
        j_lo = math.ceil(Delta * 4 * r * Q / t)
        bound = 16 * Q * Q * Delta / (t * t)
        j_hi = math.isqrt(bound.numerator // bound.denominator)
        for j in range(max(j_lo, 1), j_hi + 1):
            z = Fraction(j * t, 4 * r * Q)
            if inside(z):
                zs.add(z)
    if per_octave > 0:
        lo = float(Delta)
        hi = math.sqrt(float(Delta)) / r
        if hi > lo:
            steps = max(1, math.ceil(per_octave * math.log2(hi / lo)))
            for g in np.geomspace(lo, hi, steps + 1):
                z = Fraction(float(g))
                if inside(z):
                    zs.add(z)
    return sorted(zs)


def window_sum_search(S: ModuliSet, Delta, z_grid_per_octave: int = 4, breakpoints: bool = True) -> SearchResult:
    """Max over r <= Delta^(-1/2), Delta <= z <= sqrt(Delta)/r and h mod r of the window sum.

    Between consecutive breakpoints 4rzQ/t in Z the number of m-terms is
    fixed while every A_t term is nonincreasing in z, so the left ends of
    those pieces realise the maximum; the geometric grid only adds
    redundant points.
    """
    Delta = Fraction(Delta)
    if not 0 < Delta <= Fraction(1, 2):
        raise ValueError(f"Delta must lie in (0, 1/2], got {Delta}")
    if not S.elements:
        return SearchResult(0, None, 0)
    ws = _WindowSum(S, Delta)
    best = SearchResult(0, None, 0)
    r = 1
    while r * r * Delta <= 1:
        divs = divisors(r)
        zs = _z_candidates(r, S.Q, Delta, z_grid_per_octave, divs if breakpoints else [])
        for z in zs:
            units, totals = ws.all_h(r, z)
            best.evaluations += 1
            i = int(np.argmax(totals))
            if totals[i] > best.inner:
                best.inner = int(totals[i])
                best.point = Thm1SearchPoint(r=r, z=z, h=int(units[i]), inner=int(totals[i]))
        r += 1
    return best


def thm1_inner(S: ModuliSet, N: int, z_grid_per_octave: int = 4, breakpoints: bool = True) -> SearchResult:
    if N < 4:
        raise ValueError(f"the window-sum search needs N >= 4, got {N}")
    return window_sum_search(S, Fraction(1, N), z_grid_per_octave, breakpoints)


def rhs_thm1_search(p: BoundParams, S: ModuliSet, z_grid_per_octave: int = 4) -> float:
    """N Z (U + max window sum), constant 1; warns GridTooCoarse if refining the grid moves it by over 1%."""
    coarse = thm1_inner(S, p.N, z_grid_per_octave)
    fine = thm1_inner(S, p.N, 2 * z_grid_per_octave)
    a, b = p.U + coarse.inner, p.U + fine.inner
    if abs(b - a) > 0.01 * max(a, b, 1e-300):
        warnings.warn(
            f"z-grid refinement moved the window-sum search from {a} to {b}",
            GridTooCoarse,
            stacklevel=2,
        )
    return p.N * p.Z * b


def lemma2_fit(S: ModuliSet, Delta, k_value: int, z_grid_per_octave: int = 4) -> Dict[str, float]:
    """Compare K(Delta) with U + window-sum search at spacing Delta; the ratio is the fitted c11."""
    Delta = Fraction(Delta)
    U = 1 if S.M * S.M * Delta < 1 else 0
    rhs = U + window_sum_search(S, Delta, z_grid_per_octave).inner
    return {"Delta": float(Delta), "K": k_value, "rhs": rhs, "c11_fit": k_value / rhs if rhs else math.inf}


# ---------------------------------------------------------------------------
# distribution conditions


@dataclass
class ConditionReport:
    holds5: bool
    holds6: bool
    holds7: bool
    C: float
    X: float
    C_min: float
    X_min: float
    checked: int = 0
    worst5: Optional[dict] = None
    worst6: Optional[dict] = None

    def to_dict(self) -> dict:
        return {
            "condition5": {"pass": self.holds5, "C": self.C, "C_fit": _json_num(self.C_min), "worst": self.worst5},
            "condition6": {"pass": self.holds6, "worst": self.worst6},
            "condition7": {"pass": self.holds7, "X": self.X, "X_fit": _json_num(self.X_min)},
            "checked": self.checked,
        }


def _json_num(x):
    if isinstance(x, Fraction):
        return float(x)
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    return x


def _u_candidates(u_lo: float, width_lo: int, u_hi: Fraction, per_octave: int) -> List[Tuple[float, int]]:
    """(u, width) pairs covering [u_lo, u_hi]: endpoints, a geometric sample, and every
    integer n in (u_lo, u_hi) paired with the width it opens (the right-limit at u = n)."""
    cands = [(u_lo, width_lo), (float(u_hi), math.ceil(u_hi) - 1)]
    n = width_lo + 1
    while n < u_hi:
        cands.append((float(n), n))
        n += 1
    if per_octave > 0 and float(u_hi) > u_lo:
        steps = max(1, math.ceil(per_octave * math.log2(float(u_hi) / u_lo)))
        for g in np.geomspace(u_lo, float(u_hi), steps + 1)[1:-1]:
            cands.append((float(g), math.ceil(Fraction(float(g))) - 1))
    return cands


def check_conditions(
    S: ModuliSet,
    N: int,
    delta_fn: Callable[[int, int, int], object],
    C: float = 1.0,
    X: float = math.inf,
    u_per_octave: int = 4,
) -> ConditionReport:
    """Exhaustively test the three distribution conditions for t <= sqrt(N), k <= sqrt(N)/t.

    Window lengths u run over [kQ/sqrt(N), Q/t]: both endpoints, a
    geometric sample, and each integer jump of A_t (where the ratio in the
    first condition is largest). Returns the minimal C and X that pass.
    """
    Q = S.Q
    C_min, X_min = 0.0, Fraction(0)
    worst5 = worst6 = None
    ok6 = True
    checked = 0
    t = 1
    while t * t <= N:
        sub = subset_t(S, t)
        St = len(sub)
        k = 1
        while k * k * t * t <= N:
            units = [l for l in range(1, k + 1) if math.gcd(l, k) == 1]
            deltas = {l: delta_fn(t, k, l) for l in units}
            total = sum(deltas.values())
            if total > k:
                ok6 = False
            if worst6 is None or total - k > worst6["excess"]:
                worst6 = {"t": t, "k": k, "sum": float(total), "excess": float(total - k)}
            X_min = max(X_min, max(deltas.values()))
            if St:
                u_lo = k * Q / math.sqrt(N)
                width_lo = _ceil_sqrt_ratio(k * k * Q * Q, N) - 1
                u_hi = Fraction(Q, t)
                for u, width in _u_candidates(u_lo, width_lo, u_hi, u_per_octave):
                    table = window_max_by_residue(sub, width + 1, k) if width >= 0 else np.zeros(k, dtype=np.int64)
                    scale = 1 + (St / k) / (Q / t) * u
                    for l in units:
                        A = int(table[l % k])
                        checked += 1
                        if A == 0:
                            continue
                        d = float(deltas[l])
                        ratio = math.inf if d == 0 else A / (scale * d)
                        if ratio > C_min:
                            C_min = ratio
                            worst5 = {"t": t, "k": k, "l": l, "u": u, "A": A, "delta": d}
            else:
                checked += len(units)
            k += 1
        t += 1
    return ConditionReport(
        holds5=C_min <= C,
        holds6=ok6,
        holds7=X_min <= X,
        C=C,
        X=X,
        C_min=C_min,
        X_min=float(X_min),
        checked=checked,
        worst5=worst5,
        worst6=worst6,
    )


def square_family_X(N: int) -> int:
    """2^(omega_max + 1), omega_max = max omega(k) over k <= sqrt(N)."""
    return 2 ** (max(omega(k) for k in range(1, math.isqrt(N) + 1)) + 1)


def fitted_X(S: ModuliSet, N: int) -> float:
    """Smallest X satisfying the third condition for the family of S."""
    r_max = math.isqrt(N)
    if S.family == "primes":
        return max(k / euler_phi(k) for k in range(1, r_max + 1))
    if S.family == "squares":
        best = 0
        t = 1
        while t * t <= N:
            k = 1
            while k * k * t * t <= N:
                for l in range(1, k + 1):
                    if math.gcd(l, k) == 1:
                        best = max(best, delta_squares(t, k, l))
                k += 1
            t += 1
        return float(best)
    return 1.0


def brun_titchmarsh_check(Q: int, N: int, per_octave: int = 4) -> Dict[str, float]:
    """Empirical check of A_1(u,k,l) <= 2u/(k log(u/k)) * k/phi(k) for the primes up to Q."""
    from .moduli import primes_up_to

    S = primes_up_to(Q)
    sub = subset_t(S, 1)
    worst, violations, checked = 0.0, 0, 0
    k = 1
    while k * k <= N:
        u_lo = max(k * Q / math.sqrt(N), k * 1.0)
        if u_lo < Q:
            us = sorted({*np.geomspace(u_lo, Q, max(2, per_octave * 8)).tolist(), *(n + 0.5 for n in range(math.ceil(u_lo), Q))})
            for u in us:
                if u <= k:
                    continue
                table = window_max_by_residue(sub, Fraction(u), k)
                bound = 2 * u / (k * math.log(u / k)) * k / euler_phi(k)
                for l in range(1, k + 1):
                    if math.gcd(l, k) != 1:
                        continue
                    checked += 1
                    ratio = table[l % k] / bound
                    worst = max(worst, float(ratio))
                    violations += ratio > 1
        k += 1
    return {"Q": Q, "N": N, "checked": checked, "violations": int(violations), "max_ratio": worst}


# ---------------------------------------------------------------------------
# reports


@dataclass
class BoundReport:
    N: int
    Q: int
    M: int
    family: str
    lhs: float
    rhs: Dict[str, Optional[float]]
    Q1: Optional[int] = None
    seed: Optional[int] = None
    Z: float = 0.0
    fitted_constants: Dict[str, object] = field(default_factory=dict)

    @property
    def ratios(self) -> Dict[str, Optional[float]]:
        return {k: (None if v is None or v == 0 else self.lhs / v) for k, v in self.rhs.items()}

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "Q": self.Q,
            "Q1": self.Q1,
            "M": self.M,
            "family": self.family,
            "seed": self.seed,
            "lhs": self.lhs,
            "rhs": dict(self.rhs),
            "ratios": self.ratios,
            "fitted_constants": dict(self.fitted_constants),
        }


def rewrite_sides(seq: CoefficientSequence, Q1: int) -> Tuple[float, float]:
    """Both sides of the square-moduli rewrite.

    Left: sum over q <= Q1 and a <= q^2 with gcd(a, q) = 1 of |S(a/q^2)|^2,
    evaluated point by point. Right: the folded left-hand side over the set
    of squares up to Q1^2.
    """
    left = math.fsum(_direct_square_denominator(seq, q) for q in range(1, Q1 + 1))
    right = sieve_lhs(seq, [q * q for q in range(1, Q1 + 1)])
    return left, right


def _direct_square_denominator(seq: CoefficientSequence, q: int) -> float:
    qq = q * q
    table = np.exp(2j * np.pi * np.arange(qq) / qq)
    n = np.arange(1, seq.N + 1, dtype=np.int64)
    a = np.array([a for a in range(1, qq + 1) if math.gcd(a, q) == 1], dtype=np.int64)
    out = []
    for chunk in np.array_split(a, max(1, a.size * seq.N // (1 << 22) + 1)):
        if chunk.size:
            vals = table[np.outer(chunk, n) % qq] @ seq.values
            out.extend((vals.real**2 + vals.imag**2).tolist())
    return math.fsum(out)


def ratio_report(
    seq: CoefficientSequence,
    S: ModuliSet,
    p: BoundParams,
    seed: Optional[int] = None,
    verify_rewrite: bool = True,
    thm1_grid: Optional[int] = None,
    formulas: Optional[Tuple[str, ...]] = None,
) -> BoundReport:
    """LHS once, every applicable RHS, and the ratios between them.

    For the square family the rewrite over a/q^2 is recomputed directly and
    must agree with the folded LHS to 1e-9 relative.
    """
    lhs = sieve_lhs(seq, S)
    fitted: Dict[str, object] = {}
    if S.family == "squares" and verify_rewrite and p.Q1 is not None and S.M == 0 and S.Q == p.Q1**2:
        left, _ = rewrite_sides(seq, p.Q1)
        residual = abs(left - lhs) / max(abs(lhs), 1e-300)
        if residual > REWRITE_RTOL:
            raise ArithmeticError(f"square-moduli rewrite mismatch: {left} vs {lhs} (rel {residual:.3e})")
        fitted["rewrite_residual"] = residual
    if p.X is None:
        p = replace(p, X=fitted_X(S, p.N))
    fitted["X"] = p.X
    fitted["C"] = p.C
    rhs: Dict[str, Optional[float]] = {name: None for name in FORMULAS}
    rhs["classical"] = rhs_classical(p)
    if S.family == "squares" and p.Q1 is not None:
        rhs.update(rhs_square_family(p))
    rhs["thm2"] = rhs_thm2(p, S)
    rhs["corollary"] = rhs_corollary(p, S)
    rhs["elliott_b"] = rhs_elliott_b(p, S)
    if S.family == "primes":
        rhs["elliott_a"] = rhs_elliott_a(p, S)
        rhs["wolke"] = rhs_wolke(p)
    if thm1_grid is not None and p.N >= 4:
        rhs["thm1"] = rhs_thm1_search(p, S, thm1_grid)
    if formulas is not None:
        rhs = {k: (v if k in formulas else None) for k, v in rhs.items()}
    return BoundReport(
        N=p.N, Q=p.Q, M=p.M, family=S.family, lhs=lhs, rhs=rhs, Q1=p.Q1, seed=seed, Z=p.Z, fitted_constants=fitted
    )
