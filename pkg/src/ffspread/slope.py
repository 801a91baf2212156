"""Asymptotic slope of the despreader transfer function and the BER
prediction built on it.

The closed form for the slope g(s, L) is evaluated in exact big-integer
rational arithmetic: the inner counts are raised to the 2^(s-1) power
against a (2^s - 1)^((L-1) 2^(s-1)) denominator, which overflows doubles
long before the parameter ranges of interest.

An independent oracle computes the same quantity from its probabilistic
definition,

    g = s(L-1) - E[ max_j  sum_i weight(r_{j,i}) ],

with r_{j,i} drawn i.i.d. uniformly from the length-s binary vectors
excluding all-ones (j = 1..2^(s-1), i = 1..L-1), either by full
enumeration of the joint realizations (exact, as a rational) or by
Monte Carlo.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np
from scipy.special import erfc

EXACT_ENUM_BUDGET = 10**7


def _weight_cdf_counts(s: int, L: int) -> list[int]:
    """counts[j] = number of (L-1)-tuples over the excluded-all-ones vectors
    whose total weight is <= j, weighted by nothing (plain counts)."""
    coeffs = [comb(s, n) for n in range(s)]  # weight-n vectors, n <= s-1
    poly = [1]
    for _ in range(L - 1):
        nxt = [0] * (len(poly) + len(coeffs) - 1)
        for i, a in enumerate(poly):
            if a:
                for j, b in enumerate(coeffs):
                    nxt[i + j] += a * b
        poly = nxt
    kmax = (s - 1) * (L - 1)
    counts, acc = [], 0
    for t in range(kmax + 1):
        acc += poly[t] if t < len(poly) else 0
        counts.append(acc)
    return counts


def g_closed_form(s: int, L: int) -> Fraction:
    """Closed-form asymptotic slope g(s, L) as an exact rational.

    g = L - 1 + (2^s-1)^(-(L-1) 2^(s-1)) *
        sum_{k=1}^{(s-1)(L-1)} (#{weight sum <= k-1})^(2^(s-1))

    For s = 1 the sum is empty, giving L - 1; for L = 1 the slope is 0.
    """
    if s < 1 or L < 1:
        raise ValueError("s and L must be >= 1")
    if L == 1:
        return Fraction(0)
    kmax = (s - 1) * (L - 1)
    if kmax == 0:
        return Fraction(L - 1)
    counts = _weight_cdf_counts(s, L)
    power = 1 << (s - 1)
    denom = (2**s - 1) ** ((L - 1) * power)
    total = sum(counts[k - 1] ** power for k in range(1, kmax + 1))
    return Fraction(L - 1) + Fraction(total, denom)


@dataclass(frozen=True)
class OracleResult:
    value: Fraction | float
    method: str                 # "exact enumeration" or "monte carlo"
    std_error: float | None = None


def g_oracle(s: int, L: int, mode: str = "exact", samples: int = 200_000,
             seed=0) -> OracleResult:
    """Slope from the probabilistic definition, independent of the closed form.

    ``exact`` enumerates every joint realization of the (L-1) * 2^(s-1)
    uniform draws (refused above EXACT_ENUM_BUDGET realizations);
    ``montecarlo`` samples them.
    """
    if s < 1 or L < 1:
        raise ValueError("s and L must be >= 1")
    if L == 1:
        return OracleResult(Fraction(0), "exact enumeration")
    m = 2**s - 1                       # alphabet: vectors 0 .. 2^s-2 (all-ones excluded)
    n_j = 1 << (s - 1)
    n_draws = (L - 1) * n_j
    weights = np.array([v.bit_count() for v in range(m)], dtype=np.int16)

    if mode == "exact":
        count = m**n_draws
        if count > EXACT_ENUM_BUDGET:
            raise ValueError(
                f"exact enumeration needs {count} joint realizations "
                f"(> {EXACT_ENUM_BUDGET}); use mode='montecarlo'"
            )
        cur = np.arange(count, dtype=np.int64)
        per_j = np.zeros((n_j, count), dtype=np.int16)
        for pos in range(n_draws):
            digit = cur % m
            cur //= m
            per_j[pos // (L - 1)] += weights[digit]
        total = int(np.max(per_j, axis=0).sum(dtype=np.int64))
        value = Fraction(s * (L - 1)) - Fraction(total, count)
        return OracleResult(value, "exact enumeration")

    if mode == "montecarlo":
        rng = np.random.default_rng(seed)
        chunk = 1 << 14
        n_done, acc, acc2 = 0, 0.0, 0.0
        while n_done < samples:
            b = min(chunk, samples - n_done)
            draws = rng.integers(0, m, size=(b, n_j, L - 1))
            w = weights[draws].sum(axis=2, dtype=np.int64)    # (b, n_j)
            vals = s * (L - 1) - w.max(axis=1).astype(np.float64)
            acc += vals.sum()
            acc2 += (vals * vals).sum()
            n_done += b
        mean = acc / samples
        if samples > 1:
            var = max(acc2 - samples * mean * mean, 0.0) / (samples - 1)
            se = float(np.sqrt(var / samples))
        else:
            se = float("nan")
        return OracleResult(mean, "monte carlo", se)

    raise ValueError(f"mode must be 'exact' or 'montecarlo', got {mode!r}")


def standard_slope_exact(s: int, L: int) -> Fraction:
    """g(s, L+1) / L as an exact rational."""
    return g_closed_form(s, L + 1) / L


def standard_slope(s: int, L: int) -> float:
    """Predicted absolute slope of ln(BER) versus linear Eb/N0 at low BER."""
    return float(standard_slope_exact(s, L))


def _qfunc(x: float) -> float:
    return 0.5 * erfc(x / np.sqrt(2.0))


def predict_ber(s: int, L: int, eb_n0_linear) -> tuple[np.ndarray, np.ndarray]:
    """Asymptotic hard-decision BER estimate and its exponential upper bound.

    estimate = Q(sqrt(2 g(s, L+1) Eb / (L N0))),  bound = exp(-gstd(s, L) Eb/N0).
    """
    x = np.asarray(eb_n0_linear, dtype=np.float64)
    if np.any(x <= 0):
        raise ValueError("eb_n0_linear must be > 0")
    g_dec = float(g_closed_form(s, L + 1))
    est = 0.5 * erfc(np.sqrt(2.0 * g_dec * x / L) / np.sqrt(2.0))
    bound = np.exp(-standard_slope(s, L) * x)
    return est, bound


@dataclass(frozen=True)
class SlopeReport:
    s: int
    L: int
    g_closed: Fraction
    g_closed_float: float
    g_oracle: OracleResult
    g_std: float


def slope_report(s: int, L: int, oracle_mode: str = "auto",
                 samples: int = 200_000, seed=0) -> SlopeReport:
    """Closed form, oracle cross-check, and standard slope for one (s, L)."""
    if oracle_mode == "auto":
        feasible = L == 1 or (2**s - 1) ** ((L - 1) * 2 ** (s - 1)) <= EXACT_ENUM_BUDGET
        oracle_mode = "exact" if feasible else "montecarlo"
    g = g_closed_form(s, L)
    return SlopeReport(
        s=s, L=L, g_closed=g, g_closed_float=float(g),
        g_oracle=g_oracle(s, L, mode=oracle_mode, samples=samples, seed=seed),
        g_std=standard_slope(s, L),
    )
