"""Probability primitives shared by all detectors.

Everything NFA-related is handled in base-10 log domain: detections
routinely have NFAs around 1e-50, far too small to compare reliably as
plain floats once multiplied by large test counts.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
from scipy.special import betainc, gammaln

LOG10_E = math.log10(math.e)


def _check_tail_params(n: int, k: int, p: float) -> None:
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    if not 0 <= k <= n:
        raise ValueError(f"k must be in [0, n], got k={k}, n={n}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")


def log10_binom_tail(n: int, k: int, p: float) -> float:
    """log10 of the binomial tail B(n, k, p) = P[X >= k], X ~ Bin(n, p).

    Uses log-gamma terms and a log-sum reduction so the result stays
    finite well below the double-precision underflow threshold.
    Accepts a non-integer ``n`` (needed by the refined detector, where
    the local count is area-renormalized); the sum then runs over
    j = k .. floor(n) with gamma-function binomial weights.
    """
    if n < 0 or k < 0 or k > n or not 0.0 <= p <= 1.0:
        raise ValueError(f"invalid tail parameters n={n}, k={k}, p={p}")
    if k <= 0:
        return 0.0
    if p <= 0.0:
        return -math.inf
    if p >= 1.0:
        return 0.0
    j = np.arange(k, math.floor(n) + 1, dtype=float)
    if j.size == 0:
        return -math.inf
    log_terms = (
        gammaln(n + 1.0)
        - gammaln(j + 1.0)
        - gammaln(n - j + 1.0)
        + j * math.log(p)
        + (n - j) * math.log1p(-p)
    )
    m = float(np.max(log_terms))
    total = m + math.log(float(np.sum(np.exp(log_terms - m))))
    # Clamp tiny positive drift: the tail is a probability.
    return min(total * LOG10_E, 0.0)


def binom_tail(n: int, k: int, p: float) -> float:
    """Binomial tail B(n, k, p) as a plain probability in [0, 1]."""
    return 10.0 ** log10_binom_tail(n, k, p)


def binom_tail_exact(n: int, k: int, p: Fraction) -> Fraction:
    """Exact rational binomial tail, for testing (n <= 30)."""
    if n > 30:
        raise ValueError("exact path is intended for n <= 30")
    _check_tail_params(n, k, float(p))
    p = Fraction(p)
    q = 1 - p
    return sum(
        Fraction(math.comb(n, j)) * p**j * q ** (n - j) for j in range(k, n + 1)
    )


def log10_binom_tail_arr(n, k, p) -> np.ndarray:
    """Vectorized log10 binomial tail over broadcastable arrays.

    Fast path through the regularized incomplete beta function; entries
    that underflow it (tails below ~1e-308) fall back to the log-domain
    scalar path, so the result is always finite for k >= 1, p > 0.
    """
    n = np.asarray(n, dtype=float)
    k = np.asarray(k, dtype=float)
    p = np.asarray(p, dtype=float)
    n, k, p = np.broadcast_arrays(n, k, p)
    out = np.zeros(n.shape, dtype=float)
    trivial = (k <= 0) | (p >= 1.0)
    impossible = (p <= 0.0) & (k > 0)
    out[impossible] = -np.inf
    rest = ~trivial & ~impossible
    if np.any(rest):
        t = betainc(k[rest], n[rest] - k[rest] + 1.0, p[rest])
        vals = np.full(t.shape, -np.inf)
        pos = t > 0.0
        vals[pos] = np.log10(t[pos])
        if np.any(~pos):
            ns, ks, ps = n[rest][~pos], k[rest][~pos], p[rest][~pos]
            vals[~pos] = [
                log10_binom_tail(float(a), int(b), float(c))
                for a, b, c in zip(ns, ks, ps)
            ]
        out[rest] = np.minimum(vals, 0.0)
    return out


def nfa_from(tests: float, tail_log10: float) -> float:
    """Assemble log10(NFA) = log10(number of tests) + log10(tail)."""
    if tests <= 0:
        raise ValueError(f"number of tests must be positive, got {tests}")
    return math.log10(tests) + tail_log10


def is_meaningful(log_nfa: float, epsilon: float = 1.0) -> bool:
    """True iff NFA < epsilon, compared in log domain (strict inequality)."""
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    return log_nfa < math.log10(epsilon)
