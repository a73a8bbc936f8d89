"""Closed-form limit laws for the first coordinate and the value counts.

The infinite Bernoulli sums arising for ``q > 1`` are truncated once the
remaining expected count (a geometric series in ``1/q``) is below ``tol / 10``;
that expected count bounds the truncated probability mass and is returned as
a :class:`TailBound`.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.special import gammaln

from .exact import poisson_binomial
from .pmf import DiscretePMF


@dataclass(frozen=True)
class ContinuousLaw:
    name: str
    cdf: Callable[[float], float]
    density: Callable[[float], float] | None = None
    upper: float = 1.0

    def cdf_array(self, xs) -> np.ndarray:
        return np.array([self.cdf(float(x)) for x in np.asarray(xs, dtype=float)])


@dataclass(frozen=True)
class TailBound:
    truncation: int
    bound: float


def _check_unit(x: float, open_left: bool = False) -> None:
    if open_left:
        if not 0 < x <= 1:
            raise ValueError(f"x={x} outside (0, 1]")
    elif not 0 <= x <= 1:
        raise ValueError(f"x={x} outside [0, 1]")


def law_q1_cdf(x: float) -> float:
    """``x - x log x`` on [0, 1], the limit of ``pi_1 / n`` at ``q = 1``."""
    _check_unit(x)
    if x == 0:
        return 0.0
    return x - x * math.log(x)


def law_q1_density(x: float) -> float:
    _check_unit(x, open_left=True)
    return -math.log(x)


def _log_ratio(c: float, x: float) -> float:
    # log((1 - e^-c)/(1 - e^-cx)) as a difference of logs of |expm1|; valid for c of either sign
    return math.log(abs(math.expm1(-c))) - math.log(abs(math.expm1(-c * x)))


def law_Fc(x: float, c: float) -> float:
    """Limit CDF of ``pi_1 / n`` for ``q_n = 1 + c/n``.

    Both sign branches reduce to ``x + expm1(cx)/c * log((1-e^-c)/(1-e^-cx))``.
    """
    _check_unit(x)
    if c == 0:
        return law_q1_cdf(x)
    if x == 0:
        return 0.0
    if x == 1:
        return 1.0
    return x + math.expm1(c * x) / c * _log_ratio(c, x)


def law_fc(x: float, c: float) -> float:
    _check_unit(x, open_left=True)
    if c == 0:
        return law_q1_density(x)
    if x == 1:
        return 0.0
    return math.exp(c * x) * _log_ratio(c, x)


def law_exponential_cdf(x: float, c: float) -> float:
    if c <= 0:
        raise ValueError(f"rate must be positive, got {c}")
    if x < 0:
        raise ValueError(f"x={x} is negative")
    return -math.expm1(-c * x)


def law_uniform_cdf(x: float) -> float:
    return min(max(x, 0.0), 1.0)


def law_geometric_pmf(k: int, q: float) -> float:
    if k < 1:
        raise ValueError(f"k={k} must be >= 1")
    if not 0 < q < 1:
        raise ValueError(f"q={q} outside (0, 1)")
    return (1 - q) * q ** (k - 1)


def corner_upper_q(n: int, q: float, k: int) -> float:
    """Asymptotic ``P(pi_1 = n - k) ~ (1 - q^-(k+1)) / n`` for fixed ``q > 1``."""
    if q <= 1:
        raise ValueError(f"q={q} must exceed 1")
    if not 0 <= k < n:
        raise ValueError(f"k={k} outside 0..{n - 1}")
    return -math.expm1(-(k + 1) * math.log(q)) / n


def lambda_c(c: float, d: float) -> float:
    """Poisson parameter of the limit of ``N_{dn}`` when ``q_n = 1 + c/n``.

    Equals ``law_fc(d, c)`` for every ``c != 0`` and ``-log d`` at ``c = 0``.
    """
    if not 0 < d < 1:
        raise ValueError(f"d={d} outside (0, 1)")
    if c == 0:
        return -math.log(d)
    return math.exp(c * d) * _log_ratio(c, d)


def _truncation(q: float, tol: float) -> int:
    # smallest M with q^-M / (1 - 1/q) <= tol / 10; both tail bounds below are at most that
    if q <= 1:
        raise ValueError(f"q={q} must exceed 1")
    if tol <= 0:
        raise ValueError("tol must be positive")
    lq = math.log(q)
    return max(1, math.ceil((math.log(10.0 / tol) - math.log1p(-1.0 / q)) / lq) + 1)


def _pmf_from_bernoullis(ps: np.ndarray, bound: float, M: int) -> tuple[DiscretePMF, TailBound]:
    dist = poisson_binomial(ps, cap=len(ps))
    keep = np.nonzero(dist > 0)[0]
    pmf = DiscretePMF.from_arrays(keep, dist[keep])
    return pmf, TailBound(M, bound)


def zsum_params(q: float, k: int, terms: int) -> np.ndarray:
    """``(q-1) q^(k-1)/(q^j - 1)``, ``j = k..k+terms-1``."""
    j = np.arange(k, k + terms, dtype=float)
    t = math.log(q)
    return np.exp((k - j) * t) * -math.expm1(-t) / -np.expm1(-j * t)


def law_Zsum(q: float, k: int, tol: float = 1e-12) -> tuple[DiscretePMF, TailBound]:
    """Law of ``sum_{j>=k} Z_{j;k}`` with ``Z_{j;k} ~ Bernoulli((q-1) q^(k-1)/(q^j-1))``."""
    if k < 1:
        raise ValueError(f"k={k} must be >= 1")
    M = _truncation(q, tol)
    ps = zsum_params(q, k, M)
    # sum_{j >= k+M} p_j <= (q-1) q^(k-1) sum_j q^-j / (1 - q^-(k+M)) = q^-M / (1 - q^-(k+M))
    bound = q**-M / (1 - q ** -(k + M))
    return _pmf_from_bernoullis(ps, bound, M)


def ysum_params(q: float, terms: int) -> np.ndarray:
    i = np.arange(terms, dtype=float)
    return (q - 1) / q * np.exp(-i * math.log(q))


def law_Ysum(q: float, kmax: int | float = math.inf, tol: float = 1e-12) -> tuple[DiscretePMF, TailBound]:
    """Law of ``sum_{i=0}^{kmax} Y_i`` with ``Y_i ~ Bernoulli((q-1)/q^(i+1))``.

    Finite ``kmax`` is exact (bound 0); ``kmax = inf`` is truncated.
    """
    if q <= 1:
        raise ValueError(f"q={q} must exceed 1")
    if math.isinf(kmax):
        M = _truncation(q, tol)
        # sum_{i >= M} (q-1) q^-(i+1) = q^-M
        return _pmf_from_bernoullis(ysum_params(q, M), q ** -M, M)
    kmax = int(kmax)
    if kmax < 0:
        raise ValueError(f"kmax={kmax} must be >= 0")
    return _pmf_from_bernoullis(ysum_params(q, kmax + 1), 0.0, kmax + 1)


def borel_pmf(j: int) -> float:
    """``e^-j j^(j-1) / j!`` via log-gamma."""
    if j < 1:
        raise ValueError(f"j={j} must be >= 1")
    return math.exp(-j + (j - 1) * math.log(j) - float(gammaln(j + 1)))


def borel_pmf_direct(j: int) -> float:
    if not 1 <= j <= 20:
        raise ValueError("direct factorial form is only for 1 <= j <= 20")
    return math.exp(-j) * j ** (j - 1) / math.factorial(j)


def borel_cdf(k: int) -> float:
    """``P(X <= k)``, ``X`` Borel."""
    if k < 1:
        return 0.0
    return math.fsum(borel_pmf(j) for j in range(1, k + 1))


def dh_corner(k: int, side: Literal["low", "high"]) -> float:
    """Uniform-measure corner coefficients: ``n P(pi_1 = k) -> 1 + P(X >= k)`` and
    ``n P(pi_1 = n - k) -> P(X <= k + 1)`` with ``X`` Borel."""
    if side == "low":
        if k < 1:
            raise ValueError("low side needs k >= 1")
        return 1.0 + (1.0 - borel_cdf(k - 1))
    if side == "high":
        if k < 0:
            raise ValueError("high side needs k >= 0")
        return borel_cdf(k + 1)
    raise ValueError(f"side must be 'low' or 'high', got {side!r}")


def continuous_law(name: str, **params) -> ContinuousLaw:
    """Look up a limit law by name: ``q1``, ``Fc`` (c), ``exponential`` (c), ``uniform``."""
    if name == "q1":
        return ContinuousLaw("q1", law_q1_cdf, law_q1_density)
    if name == "Fc":
        c = float(params["c"])
        return ContinuousLaw(f"Fc(c={c:g})", lambda x: law_Fc(min(max(x, 0.0), 1.0), c),
                             lambda x: law_fc(x, c))
    if name == "exponential":
        c = float(params.get("c", 1.0))
        return ContinuousLaw(f"exp(c={c:g})", lambda x: law_exponential_cdf(max(x, 0.0), c),
                             lambda x: c * math.exp(-c * x), upper=math.inf)
    if name == "uniform":
        return ContinuousLaw("uniform", law_uniform_cdf, lambda x: 1.0)
    raise ValueError(f"unknown continuous law {name!r}")
