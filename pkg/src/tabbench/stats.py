"""Small numerics kept in-tree: chi-square tail probability and the
critical constants for the Nemenyi post-hoc test.

The q constants are the (1 - alpha) quantiles of the studentized range
of k standard normals divided by sqrt(2).  `scripts/regen_nemenyi_q.py`
re-derives the table by brute-force Monte Carlo.
"""

from __future__ import annotations

import math

from .errors import UnsupportedAlpha, UnsupportedK

_MAX_ITER = 800
_EPS = 1e-16


def _gamma_p_series(s: float, x: float) -> float:
    """Lower regularized incomplete gamma P(s, x) by its power series."""
    term = 1.0 / s
    total = term
    n = s
    for _ in range(_MAX_ITER):
        n += 1.0
        term *= x / n
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return total * math.exp(-x + s * math.log(x) - math.lgamma(s))

def _gamma_q_contfrac(s: float, x: float) -> float:
    """Upper regularized incomplete gamma Q(s, x) by Lentz's continued fraction."""
    tiny = 1e-300
    b = x + 1.0 - s
    c = 1.0 / tiny
    d = 1.0 / b if b != 0 else 1.0 / tiny
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - s)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return math.exp(-x + s * math.log(x) - math.lgamma(s)) * h


def chi2_sf(x: float, dof: int) -> float:
    """Survival function of the chi-square distribution."""
    if dof < 1:
        raise ValueError("dof must be >= 1")
    if x <= 0:
        return 1.0
    s = dof / 2.0
    half = x / 2.0
    if half < s + 1.0:
        return max(0.0, min(1.0, 1.0 - _gamma_p_series(s, half)))
    return max(0.0, min(1.0, _gamma_q_contfrac(s, half)))


# studentized range quantile / sqrt(2), k = 2..20
_NEMENYI_Q = {
    0.05: (
        1.960, 2.343, 2.569, 2.728, 2.850, 2.949, 3.031, 3.102, 3.164,
        3.219, 3.268, 3.313, 3.354, 3.391, 3.426, 3.458, 3.489, 3.517, 3.544,
    ),
    0.10: (
        1.645, 2.052, 2.291, 2.459, 2.589, 2.693, 2.780, 2.855, 2.920,
        2.978, 3.030, 3.077, 3.120, 3.159, 3.196, 3.230, 3.261, 3.291, 3.319,
    ),
}


def nemenyi_q(k: int, alpha: float) -> float:
    if alpha not in _NEMENYI_Q:
        raise UnsupportedAlpha(f"alpha must be 0.05 or 0.10, got {alpha}")
    if not 2 <= k <= 20:
        raise UnsupportedK(f"k must be in 2..20, got {k}")
    return _NEMENYI_Q[alpha][k - 2]
