import math
import random
import warnings
from fractions import Fraction

import numpy as np
import pytest

from sparse_sieve.bounds import (
    BoundParams,
    brun_titchmarsh_check,
    check_conditions,
    fitted_X,
    lemma2_fit,
    max_divisor_slice_sum,
    ratio_report,
    rewrite_sides,
    rhs_classical,
    rhs_corollary,
    rhs_elliott_a,
    rhs_elliott_b,
    rhs_square_family,
    rhs_thm1_search,
    rhs_thm2,
    rhs_wolke,
    square_family_X,
    thm1_inner,
    window_sum_search,
)
from sparse_sieve.errors import GridTooCoarse
from sparse_sieve.expsum import CoefficientSequence, norm_Z, ones, random_disk, sieve_lhs
from sparse_sieve.farey import enumerate_farey, k_delta
from sparse_sieve.modmath import euler_phi, omega
from sparse_sieve.moduli import (
    ModuliSet,
    delta_primes,
    delta_squares,
    primes_up_to,
    squares_in_window,
    squares_up_to,
)

from . import oracles


def test_classical_examples():
    assert rhs_classical(BoundParams(N=100, Q=10, Z=1)) == 200
    assert rhs_classical(BoundParams(N=100, Q=10, Z=0)) == 0
    assert rhs_classical(BoundParams(N=4096, Q=64, Z=4096)) == 33_554_432


def test_classical_uses_top_modulus():
    # with a window (M, M+Q] the largest modulus is M+Q
    assert rhs_classical(BoundParams(N=10, Q=5, M=5, Z=1)) == 10 + 100


def test_square_family_examples():
    assert rhs_square_family(BoundParams(N=100, Q=81, Q1=3, Z=2))["Z1"] == 362
    # Z2 has no epsilon dependence
    assert rhs_square_family(BoundParams(N=1, Q=1, Q1=1, Z=1, eps=1e-9))["Z2"] == 2
    with pytest.raises(ValueError):
        rhs_square_family(BoundParams(N=1, Q=1, Z=1))


def _square_family_dual(N, Q1, Z, eps):
    # expanded forms, evaluated in a different order from the library
    Nf, Qf = float(N), float(Q1)
    z1 = Nf * Z + Qf**4 * Z
    z2 = Qf * Nf * Z + Qf**3 * Z
    zhao = Z * math.log(2 * Qf) * (Qf**3 + Nf**eps * Nf * Qf**0.5 + Nf**eps * Nf**0.5 * Qf * Qf)
    ll = math.log(math.log(10.0) + math.log(Nf) + 2 * math.log(Qf))
    thm3 = Z * ll * ll * (Qf**3 + Nf + math.exp((0.5 + eps) * math.log(Nf)) * Qf * Qf)
    return {"Z1": z1, "Z2": z2, "zhao": zhao, "thm3": thm3}


@pytest.mark.parametrize("N,Q1,Z,eps", [(256, 4, 1, 0.1), (1024, 8, 3.5, 0.05), (2**14, 20, 0.25, 0.25), (1, 1, 1, 0.1)])
def test_square_family_dual_implementation(N, Q1, Z, eps):
    got = rhs_square_family(BoundParams(N=N, Q=Q1 * Q1, Q1=Q1, Z=Z, eps=eps))
    want = _square_family_dual(N, Q1, Z, eps)
    for key in want:
        assert got[key] == pytest.approx(want[key], rel=1e-12)


def test_eps_range():
    with pytest.raises(ValueError):
        BoundParams(N=1, Q=1, Z=1, eps=0)
    with pytest.raises(ValueError):
        BoundParams(N=1, Q=1, Z=1, eps=0.3)
    with pytest.raises(ValueError):
        BoundParams(N=0, Q=1, Z=1)


def test_U_toggle():
    assert BoundParams(N=16, Q=16, M=0, Z=1).U == 1
    assert BoundParams(N=16, Q=16, M=3, Z=1).U == 1
    assert BoundParams(N=16, Q=16, M=4, Z=1).U == 0


def test_thm2_examples():
    empty = ModuliSet((), M=0, Q=16)
    p = BoundParams(N=16, Q=16, Z=3, C=2.5, X=1)
    # all slices empty: only the N U term and the sqrt(N) log log term survive
    inner = math.sqrt(16) * math.log(math.log(160))
    assert rhs_thm2(p, empty) == pytest.approx(2.5 * (16 + (16 + 16) * inner) * 3)
    S = squares_in_window(16)
    assert S.elements == (25,)
    assert max_divisor_slice_sum(S, 16) == 1


def test_thm2_divisor_sum_oracle():
    rng = random.Random(8)
    for _ in range(20):
        S = ModuliSet(tuple(rng.sample(range(1, 501), 60)), M=0, Q=500)
        N = rng.randint(1, 400)
        want = max(
            sum(1 for q in S.elements for t in range(1, r + 1) if r % t == 0 and q % t == 0)
            for r in range(1, math.isqrt(N) + 1)
        )
        assert max_divisor_slice_sum(S, N) == want


def test_thm2_U_switch_changes_leading_term():
    S = squares_in_window(16)
    a = rhs_thm2(BoundParams(N=16, Q=16, M=0, Z=1, X=1), S)
    S4 = ModuliSet((25,), M=4, Q=28)
    b = rhs_thm2(BoundParams(N=16, Q=28, M=4, Z=1, X=1), S4)
    c = rhs_thm2(BoundParams(N=16, Q=28, M=3, Z=1, X=1), ModuliSet((25,), M=3, Q=28))
    assert a > 0 and c - b == pytest.approx(16)


def test_other_evaluators():
    S = primes_up_to(20)
    p = BoundParams(N=50, Q=20, Z=2, X=1)
    assert rhs_elliott_b(p, S) == (50 + 20 * 8) * 2
    assert rhs_elliott_a(p, S) == pytest.approx((2500 / math.log(50) + 160) * 2)
    assert rhs_elliott_a(BoundParams(N=1, Q=20, Z=1), S) is None
    assert rhs_corollary(p, S) == pytest.approx((50 + 20 * 50**0.1 * (math.sqrt(50) + 8)) * 2)
    assert rhs_wolke(BoundParams(N=100, Q=5, Z=1)) is None
    assert rhs_wolke(BoundParams(N=100, Q=10, Z=1)) is None  # N = Q^2 is outside 0 < d < 1
    d = math.log(200) / math.log(20) - 1
    want = 400 * math.log(math.log(20)) / math.log(20) / (1 - d)
    assert rhs_wolke(BoundParams(N=200, Q=20, Z=1)) == pytest.approx(want)
    assert rhs_wolke(BoundParams(N=500, Q=20, Z=1)) is None


# ---------------------------------------------------------------------------
# window-sum search


def _search_brute(S, Delta, L=8, h_span=3):
    """Dense z grid containing every breakpoint, h over a range of integers, and
    the window count evaluated from its definition with exact rationals."""
    Delta = Fraction(Delta)
    Q, M = S.Q, S.M
    best = 0
    r = 1
    while r * r * Delta <= 1:
        den = 4 * r * Q * L
        i_lo = math.ceil(Delta * den)
        zs = [Fraction(i, den) for i in range(i_lo, den) if Fraction(i, den) ** 2 * r * r <= Delta]
        for z in zs:
            for h in range(-h_span * r, h_span * r + 1):
                if math.gcd(h, r) != 1:
                    continue
                total = 0
                for t in range(1, r + 1):
                    if r % t:
                        continue
                    St = [q // t for q in S.elements if q % t == 0]
                    k = r // t
                    u = Delta * Q / (t * z)
                    m = 1
                    while m * t <= 4 * r * z * Q:
                        if math.gcd(m, k) == 1:
                            total += oracles.window_max_exact(St, u, k, h * m, Fraction(M, t), Fraction(M + Q, t))
                        m += 1
                best = max(best, total)
        r += 1
    return best


def test_thm1_empty_set():
    p = BoundParams(N=16, Q=10, Z=2.0)
    assert rhs_thm1_search(p, ModuliSet((), M=0, Q=10)) == 16 * 2.0 * 1


def test_thm1_single_modulus_by_hand():
    S = ModuliSet((4,), M=0, Q=4)
    # r = 1, z = 1/2 gives 8 terms each equal to 1; r = 2 is capped at 4
    res = thm1_inner(S, 4)
    assert res.inner == 8 == _search_brute(S, Fraction(1, 4))
    assert res.point.r == 1 and res.point.z == Fraction(1, 2)
    assert rhs_thm1_search(BoundParams(N=4, Q=4, Z=1.5), S) == 4 * 1.5 * 9


def test_thm1_rejects_small_N():
    with pytest.raises(ValueError):
        thm1_inner(ModuliSet((4,), M=0, Q=4), 3)


@pytest.mark.parametrize("seed", range(6))
def test_search_matches_brute_force(seed):
    rng = random.Random(seed)
    Q = rng.randint(6, 20)
    M = rng.choice([0, 0, Q // 2])
    S = ModuliSet(tuple(rng.sample(range(M + 1, M + Q + 1), rng.randint(1, 5))), M=M, Q=Q)
    Delta = Fraction(1, rng.randint(4, 16))
    assert window_sum_search(S, Delta, 0).inner == _search_brute(S, Delta)


@pytest.mark.parametrize("seed", range(5))
def test_search_monotone_in_set(seed):
    rng = random.Random(100 + seed)
    pool = rng.sample(range(1, 201), 60)
    N = rng.choice([16, 49, 100])
    prev = -1
    for size in (0, 5, 15, 30, 60):
        S = ModuliSet(tuple(pool[:size]), M=0, Q=200)
        value = thm1_inner(S, N).inner
        assert value >= prev
        prev = value


@pytest.mark.parametrize(
    "S,N",
    [
        (squares_up_to(6), 64),
        (squares_in_window(50), 100),
        (primes_up_to(60), 256),
        (ModuliSet(tuple(range(30, 61, 3)), M=29, Q=32), 81),
    ],
)
def test_search_grid_doubling_invariant(S, N):
    base = thm1_inner(S, N, 0).inner
    for g in (1, 2, 4, 8):
        assert thm1_inner(S, N, g).inner == base
    with warnings.catch_warnings():
        warnings.simplefilter("error", GridTooCoarse)
        rhs_thm1_search(BoundParams(N=N, Q=S.Q, M=S.M, Z=1), S, 2)


def test_search_point_ranges():
    S = squares_up_to(6)
    res = thm1_inner(S, 64)
    pt = res.point
    assert pt.r * pt.r <= 64
    assert Fraction(1, 64) <= pt.z and (pt.z * pt.r) ** 2 * 64 <= 1
    assert math.gcd(pt.h, pt.r) == 1


def test_lemma2_fit_bounds_k_delta():
    S = squares_up_to(4)
    pts = enumerate_farey(S)
    for Delta in (Fraction(1, 400), Fraction(1, 100), Fraction(1, 20)):
        K = k_delta(pts, Delta)
        fit = lemma2_fit(S, Delta, K)
        assert fit["K"] == K and fit["rhs"] >= 1
        assert fit["c11_fit"] == K / fit["rhs"]


# ---------------------------------------------------------------------------
# distribution conditions


def test_conditions_square_family_small():
    S = squares_up_to(8)
    rep = check_conditions(S, 16, delta_squares, X=square_family_X(16))
    assert rep.holds6 and rep.holds7
    assert rep.checked > 0
    # exhaustive delta sums agree with the report
    for t in range(1, 5):
        for k in range(1, 4 // t + 1):
            assert sum(delta_squares(t, k, l) for l in range(1, k + 1) if math.gcd(l, k) == 1) <= k


def test_conditions_prime_family():
    S = primes_up_to(100)
    N = 1000
    X = max(k / euler_phi(k) for k in range(1, math.isqrt(N) + 1))
    rep = check_conditions(S, N, delta_primes, X=X)
    assert rep.holds6 and rep.holds7
    assert rep.X_min == pytest.approx(X)
    assert fitted_X(S, N) == pytest.approx(X)


def test_conditions_empty_set():
    rep = check_conditions(ModuliSet((), M=0, Q=50), 100, delta_squares, C=0.0)
    assert rep.holds5 and rep.C_min == 0


def test_square_family_X():
    assert square_family_X(16) == 2 ** (omega(2) + 1) == 4
    assert square_family_X(900) == 2 ** (omega(30) + 1) == 16
    for N in (16, 64, 256):
        rep = check_conditions(squares_up_to(math.isqrt(N)), N, delta_squares, X=square_family_X(N))
        assert rep.holds6 and rep.holds7


def _condition5_sup_oracle(S, N, delta_fn):
    """Largest A/(scale*delta) found by probing u just right of every integer and at
    both ends, with the window count taken from its definition."""
    Q = S.Q
    best = 0.0
    t = 1
    while t * t <= N:
        St = [q // t for q in S.elements if q % t == 0]
        k = 1
        while k * k * t * t <= N and St:
            u_lo = Fraction(k * Q) / Fraction(math.sqrt(N))
            u_hi = Fraction(Q, t)
            probes = {u_lo, u_hi} | {Fraction(n) + Fraction(1, 10**9) for n in range(math.floor(u_lo), math.ceil(u_hi))}
            for u in sorted(p for p in probes if u_lo <= p <= u_hi):
                for l in range(1, k + 1):
                    if math.gcd(l, k) != 1:
                        continue
                    A = oracles.window_max_exact(St, u, k, l, Fraction(S.M, t), Fraction(S.M + Q, t))
                    if A:
                        scale = 1 + (len(St) / k) / (Q / t) * float(u)
                        d = float(delta_fn(t, k, l))
                        best = max(best, math.inf if d == 0 else A / (scale * d))
            k += 1
        t += 1
    return best


@pytest.mark.parametrize(
    "S,N,fn",
    [
        (squares_up_to(8), 16, delta_squares),
        (squares_up_to(10), 49, delta_squares),
        (primes_up_to(40), 64, delta_primes),
        (ModuliSet((3, 7, 8, 12, 13, 20, 21), M=0, Q=24), 36, delta_squares),
    ],
)
def test_condition5_fitted_C_is_supremum(S, N, fn):
    rep = check_conditions(S, N, fn)
    sup = _condition5_sup_oracle(S, N, fn)
    assert sup <= rep.C_min * (1 + 1e-12)
    assert sup >= rep.C_min * (1 - 1e-6)


def test_brun_titchmarsh_no_violations():
    out = brun_titchmarsh_check(500, 2000)
    assert out["checked"] > 0 and out["violations"] == 0
    assert 0 < out["max_ratio"] <= 1


# ---------------------------------------------------------------------------
# reports


def test_report_single_modulus():
    seq = random_disk(40, 2)
    S = ModuliSet((1,), M=0, Q=1)
    p = BoundParams(N=40, Q=1, Z=norm_Z(seq))
    rep = ratio_report(seq, S, p)
    total = abs(complex(seq.values.sum())) ** 2
    assert rep.lhs == pytest.approx(total)
    for key, val in rep.rhs.items():
        if val is not None:
            assert rep.ratios[key] == pytest.approx(total / val)


def test_rewrite_identity_example():
    seq = random_disk(100, 17)
    left, right = rewrite_sides(seq, 5)
    brute = 0.0
    for q in range(1, 6):
        for a in range(1, q * q + 1):
            if math.gcd(a, q) == 1:
                brute += abs(oracles.S_at(seq.values, a, q * q)) ** 2
    assert left == pytest.approx(brute, rel=1e-9)
    assert right == pytest.approx(left, rel=1e-9)
    assert right == pytest.approx(sieve_lhs(seq, [1, 4, 9, 16, 25]), rel=1e-12)


def test_report_square_family_fields():
    seq = ones(256)
    S = squares_up_to(4)
    p = BoundParams(N=256, Q=16, Q1=4, Z=norm_Z(seq))
    rep = ratio_report(seq, S, p, seed=None, thm1_grid=2)
    d = rep.to_dict()
    assert set(d) == {"N", "Q", "Q1", "M", "family", "seed", "lhs", "rhs", "ratios", "fitted_constants"}
    for key in ("classical", "Z1", "Z2", "zhao", "thm2", "thm3", "corollary", "thm1"):
        assert d["rhs"][key] > 0
        assert d["ratios"][key] == pytest.approx(d["lhs"] / d["rhs"][key])
    assert d["rhs"]["wolke"] is None
    assert d["fitted_constants"]["rewrite_residual"] <= 1e-9
    assert d["ratios"]["classical"] <= 1 + 1e-9


def test_report_rewrite_mismatch_raises(monkeypatch):
    import sparse_sieve.bounds as b

    monkeypatch.setattr(b, "rewrite_sides", lambda seq, Q1: (1.0, 1.0))
    seq = ones(64)
    with pytest.raises(ArithmeticError):
        ratio_report(seq, squares_up_to(3), BoundParams(N=64, Q=9, Q1=3, Z=64.0))


def test_report_prime_family():
    seq = random_disk(500, 4)
    S = primes_up_to(30)
    rep = ratio_report(seq, S, BoundParams(N=500, Q=30, Z=norm_Z(seq)))
    assert rep.rhs["wolke"] is not None and rep.rhs["elliott_a"] is not None
    assert rep.rhs["Z1"] is None
    assert rep.fitted_constants["X"] == pytest.approx(max(k / euler_phi(k) for k in range(1, 23)))


def test_classical_ratio_random_instances():
    rng = np.random.default_rng(77)
    for _ in range(30):
        N = int(rng.integers(1, 1025))
        Q = int(rng.integers(1, 33))
        moduli = sorted(set(rng.integers(1, Q + 1, size=int(rng.integers(1, Q + 1))).tolist()))
        seq = CoefficientSequence(rng.normal(size=N) + 1j * rng.normal(size=N))
        S = ModuliSet(tuple(moduli), M=0, Q=Q)
        rep = ratio_report(seq, S, BoundParams(N=N, Q=Q, Z=norm_Z(seq)), formulas=("classical",))
        assert rep.ratios["classical"] <= 1 + 1e-9
        assert all(v is None for k, v in rep.rhs.items() if k != "classical")

