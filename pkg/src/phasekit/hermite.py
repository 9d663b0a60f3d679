"""Physicists' Hermite polynomials and the Hermite-Gaussian normalization.

All evaluations use the three-term recurrence

    H_{n+1}(x) = 2x H_n(x) - 2n H_{n-1}(x),   H_0 = 1,  H_1 = 2x,

which is stable in the forward direction for the orders used here (n <= 60).
Normalization constants are kept in log-space so that ``2**n * n!`` is never
formed explicitly.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import gammaln

__all__ = [
    "hermite_eval",
    "hermite_sequence",
    "generating_function_partial_sum",
    "log_prefactor",
    "log_norm",
]

MAX_TESTED_ORDER = 60


def _check_order(n: int) -> int:
    if int(n) != n or n < 0:
        raise ValueError(f"Hermite order must be a non-negative integer, got {n!r}")
    return int(n)


def hermite_sequence(n_max: int, x):
    """Return ``[H_0(x), ..., H_{n_max}(x)]``.

    ``x`` may be a scalar or an array; the result has shape
    ``(n_max + 1,) + np.shape(x)``.
    """
    n_max = _check_order(n_max)
    x = np.asarray(x, dtype=float)
    out = np.empty((n_max + 1,) + x.shape)
    out[0] = 1.0
    if n_max >= 1:
        out[1] = 2.0 * x
    for k in range(1, n_max):
        out[k + 1] = 2.0 * x * out[k] - 2.0 * k * out[k - 1]
    return out


def hermite_eval(n: int, x):
    """Evaluate H_n(x) by forward recurrence.

    Examples
    --------
    >>> hermite_eval(4, 0.5)
    1.0
    """
    n = _check_order(n)
    x = np.asarray(x, dtype=float)
    h_prev = np.ones_like(x)
    if n == 0:
        return h_prev[()]
    h = 2.0 * x
    for k in range(1, n):
        h_prev, h = h, 2.0 * x * h - 2.0 * k * h_prev
    return h[()]


def generating_function_partial_sum(x: float, u: float, N: int) -> float:
    """Truncated generating series sum_{n<=N} u**n / n! * H_n(x).

    The full series equals ``exp(2 x u - u**2)``; this is used as an oracle for
    the recurrence, so ``u`` should be small enough that the tail past ``N`` is
    negligible.
    """
    N = _check_order(N)
    hs = hermite_sequence(N, x)
    total = 0.0
    coef = 1.0
    for n in range(N + 1):
        total += coef * float(hs[n])
        coef *= u / (n + 1)
    return total


def log_norm(n: int) -> float:
    """Return ``log(2**n * n!)``."""
    n = _check_order(n)
    return n * math.log(2.0) + float(gammaln(n + 1))


def log_prefactor(n: int, a: float) -> float:
    """Log of the Hermite-Gaussian normalization ``1 / sqrt(2**n n! sqrt(2 pi) a)``.

    ``a`` is the coordinate half-width of the state (for the momentum-space
    function pass the momentum half-width instead).
    """
    if not a > 0:
        raise ValueError(f"scale must be positive, got {a!r}")
    return -0.5 * (log_norm(n) + 0.5 * math.log(2.0 * math.pi) + math.log(a))
