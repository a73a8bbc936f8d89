"""Stable evaluation of q-ratios near ``q = 1`` and for large exponents.

Everything is expressed through ``t = log q`` and ``expm1`` so that
``(1 - q^a) / (1 - q^b)`` neither cancels for ``q = 1 + c/n`` nor overflows for
``q = 2, b = 10^4``.
"""

from __future__ import annotations

import math

import numpy as np

# below this |t| * j the q = 1 branch with a first-order correction is used
NEAR_ONE = 1e-8


def log_q(q: float) -> float:
    if not q > 0:
        raise ValueError(f"q must be positive, got {q}")
    return math.log1p(q - 1.0)


def qratio(a, b, q: float):
    """``(1 - q^a) / (1 - q^b)`` for ``0 <= a <= b``, ``b >= 1``.  Array-friendly."""
    t = log_q(q)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if t == 0.0:
        return a / b
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        if t > 0:
            # (q^a - 1)/(q^b - 1) = q^(a-b) * (1 - q^-a)/(1 - q^-b)
            out = np.exp((a - b) * t) * np.expm1(-a * t) / np.expm1(-b * t)
        else:
            out = np.expm1(a * t) / np.expm1(b * t)
        near = np.abs(t) * b < NEAR_ONE
        if np.any(near):
            # (1-q^a)/(1-q^b) = (a/b) * (1 + (a-b) t / 2 + O(t^2 b^2))
            approx = (a / b) * (1.0 + (a - b) * t / 2.0)
            out = np.where(near, approx, out)
    return out[()] if out.ndim == 0 else out


def bern_param(j, k: int, q: float):
    """``P(code_j = k) = (1-q) q^(k-1) / (1-q^j)`` for ``k <= j``.  Array-friendly in ``j``."""
    t = log_q(q)
    j = np.asarray(j, dtype=float)
    if t == 0.0:
        out = 1.0 / j
    else:
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            if t > 0:
                # (q-1) q^(k-1)/(q^j-1) = q^(k-j) (1 - 1/q)/(1 - q^-j)
                out = np.exp((k - j) * t) * np.expm1(-t) / np.expm1(-j * t)
            else:
                out = np.exp((k - 1) * t) * np.expm1(t) / np.expm1(j * t)
            near = np.abs(t) * j < NEAR_ONE
            if np.any(near):
                approx = (1.0 / j) * (1.0 + (k - 1) * t - (j - 1) * t / 2.0)
                out = np.where(near, approx, out)
    out = np.where(j < k, 0.0, out)
    return out[()] if out.ndim == 0 else out


def log_qint(j, q: float):
    """``log [j]_q`` with ``[j]_q = 1 + q + ... + q^(j-1)``."""
    t = log_q(q)
    j = np.asarray(j, dtype=float)
    if t == 0.0:
        out = np.log(j)
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            if t > 0:
                out = (j - 1) * t + np.log(np.expm1(-j * t) / np.expm1(-t))
            else:
                out = np.log(np.expm1(j * t) / np.expm1(t))
            near = np.abs(t) * j < NEAR_ONE
            if np.any(near):
                out = np.where(near, np.log(j) + (j - 1) * t / 2.0, out)
    return out[()] if out.ndim == 0 else out
