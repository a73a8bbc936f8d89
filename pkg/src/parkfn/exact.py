"""Exact finite-n laws of the first coordinate and of value counts.

``q`` may be a float or a :class:`fractions.Fraction`; with a Fraction every
function here returns exact rationals, which is how the closed forms are
checked against the brute-force pushforward measure.
"""

from __future__ import annotations

import math
from collections import defaultdict
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations as _itperms

import numpy as np

from .parking import ParkingFunction
from .perms import all_codes
from .pmf import DiscretePMF
from .qmath import bern_param, log_q, qratio

MAX_BRUTEFORCE_N = 6
CHERNOFF_TAIL = 1e-15


def _is_exact(q) -> bool:
    return isinstance(q, (Fraction, int))


def _check_k(n: int, k: int, lo: int = 1) -> None:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not lo <= k <= n:
        raise ValueError(f"k={k} outside {lo}..{n}")


def _trunc_geom_exact(q: Fraction, j: int, i: int) -> Fraction:
    if q == 1:
        return Fraction(1, j)
    return (1 - q) * q ** (i - 1) / (1 - q**j)


def pi1_pmf(n: int, q, k: int):
    """``P(pi_1 = k) = (1/n) sum_{j=k}^n (1-q) q^(k-1) / (1-q^j)``."""
    _check_k(n, k)
    if _is_exact(q):
        q = Fraction(q)
        return sum((_trunc_geom_exact(q, j, k) for j in range(k, n + 1)), Fraction(0)) / n
    return math.fsum(bern_param(np.arange(k, n + 1), k, float(q))) / n


def pi1_pmf_vector(n: int, q: float) -> np.ndarray:
    """All of ``P(pi_1 = k)``, ``k = 1..n``, in O(n).

    ``A_k = sum_{j>=k} p(j, k)`` obeys ``A_k = p(k, k) + A_{k+1} / q``; that
    recursion is run backwards for ``q >= 1``.  For ``q < 1`` it would amplify
    rounding, so suffix sums of ``1/(1-q^j)`` are scaled instead.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    q = float(q)
    t = log_q(q)
    ks = np.arange(1, n + 1)
    if t >= 0:
        # p(k, k) = (1-q) q^(k-1)/(1-q^k) = (1 - 1/q)/(1 - q^-k)
        diag = 1.0 / ks if t == 0 else np.expm1(-t) / np.expm1(-ks * t)
        out = np.empty(n)
        acc = 0.0
        inv_q = 1.0 / q
        for i in range(n - 1, -1, -1):
            acc = diag[i] + acc * inv_q
            out[i] = acc
    else:
        with np.errstate(divide="ignore"):
            inv = 1.0 / -np.expm1(ks * t)
        suffix = np.cumsum(inv[::-1])[::-1]
        out = np.exp((ks - 1) * t) * -np.expm1(t) * suffix
    return out / n


def pi1_cdf(n: int, q, k: int):
    """``P(pi_1 <= k) = k/n + (1/n)(1-q^k) sum_{j=k+1}^n 1/(1-q^j)``."""
    _check_k(n, k, lo=0)
    if _is_exact(q):
        q = Fraction(q)
        if q == 1:
            tail = sum((Fraction(1, j) for j in range(k + 1, n + 1)), Fraction(0))
            return Fraction(k, n) + Fraction(k, n) * tail
        tail = sum((1 / (1 - q**j) for j in range(k + 1, n + 1)), Fraction(0))
        return Fraction(k, n) + (1 - q**k) * tail / n
    if k == n:
        return 1.0
    js = np.arange(k + 1, n + 1)
    return k / n + math.fsum(qratio(k, js, float(q))) / n


def pi1_mean(n: int, q) -> float:
    if _is_exact(q):
        return sum((k * pi1_pmf(n, q, k) for k in range(1, n + 1)), Fraction(0))
    pm = pi1_pmf_vector(n, q)
    return math.fsum(np.arange(1, n + 1) * pm)


def pi1_law(n: int, q) -> DiscretePMF:
    if _is_exact(q):
        return DiscretePMF(tuple(range(1, n + 1)), tuple(pi1_pmf(n, q, k) for k in range(1, n + 1)))
    pm = pi1_pmf_vector(n, q)
    return DiscretePMF(tuple(range(1, n + 1)), tuple((pm / pm.sum()).tolist()))


def nk_bernoulli_params(n: int, q, k: int):
    """Success probabilities of ``1{code_j = k}``, ``j = k..n``."""
    _check_k(n, k)
    if _is_exact(q):
        q = Fraction(q)
        return [_trunc_geom_exact(q, j, k) for j in range(k, n + 1)]
    return np.asarray(bern_param(np.arange(k, n + 1), k, float(q)), dtype=float)


def _chernoff_cap(ps: np.ndarray, tail: float = CHERNOFF_TAIL) -> int:
    mu = float(ps.sum())
    m = len(ps)
    if mu <= 0:
        return 0
    lo = max(1, math.ceil(mu))
    log_tail = math.log(tail)
    # P(S >= x) <= exp(-mu) (e mu / x)^x for x > mu
    for x in range(lo, m + 1):
        if x > mu and -mu + x * (1 + math.log(mu / x)) < log_tail:
            return x
    return m


def poisson_binomial(ps: Sequence, cap: int | None = None) -> list | np.ndarray:
    """Law of a sum of independent Bernoulli(p_i) by sequential convolution."""
    if len(ps) and isinstance(ps[0], Fraction):
        dist = [Fraction(1)]
        for p in ps:
            nxt = [Fraction(0)] * (len(dist) + 1)
            for m, w in enumerate(dist):
                nxt[m] += w * (1 - p)
                nxt[m + 1] += w * p
            dist = nxt
        return dist
    ps = np.asarray(ps, dtype=float)
    top = _chernoff_cap(ps) if cap is None else cap
    dist = np.zeros(top + 1)
    dist[0] = 1.0
    hi = 0
    for p in ps:
        if p == 0.0:
            continue
        new_hi = min(hi + 1, top)
        seg = dist[: new_hi + 1].copy()
        dist[: new_hi + 1] *= 1.0 - p
        dist[1: new_hi + 1] += seg[:new_hi] * p
        hi = new_hi
    return dist / dist.sum()


def nk_pmf(n: int, q, k: int) -> DiscretePMF:
    """Exact law of ``N_k``, the number of coordinates equal to ``k``."""
    ps = nk_bernoulli_params(n, q, k)
    if _is_exact(q):
        dist = poisson_binomial(ps)
        keep = [(m, w) for m, w in enumerate(dist) if w != 0]
        return DiscretePMF(tuple(m for m, _ in keep), tuple(w for _, w in keep))
    dist = poisson_binomial(ps)
    # keep zero-mass labels out so the support reflects what can occur
    return DiscretePMF.from_arrays(range(len(dist)), dist, drop_zeros=True)


def nk_laplace(n: int, q, k: int, t: float) -> float:
    """``E exp(-t N_k) = prod_j (1 - p_j (1 - e^-t))``."""
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    ps = np.asarray(nk_bernoulli_params(n, q, k), dtype=float)
    return float(np.exp(np.sum(np.log1p(-ps * -math.expm1(-t)))))


@dataclass(frozen=True)
class DominanceResult:
    holds: bool
    witness: int | None = None
    min_gap: float = math.inf

    def __bool__(self) -> bool:
        return self.holds


def dominance_check(n: int, q_lo, q_hi) -> DominanceResult:
    """Is ``P^{q_lo}(pi_1 >= k) < P^{q_hi}(pi_1 >= k)`` for every ``k = 2..n``?"""
    if n < 2:
        raise ValueError("dominance needs n >= 2")
    if not 0 < q_lo < q_hi:
        raise ValueError(f"need 0 < q_lo < q_hi, got {q_lo}, {q_hi}")
    min_gap = math.inf
    for k in range(2, n + 1):
        # P(pi_1 >= k) = 1 - P(pi_1 <= k - 1)
        gap = pi1_cdf(n, q_lo, k - 1) - pi1_cdf(n, q_hi, k - 1)
        min_gap = min(min_gap, float(gap))
        if not gap > 0:
            return DominanceResult(False, witness=k, min_gap=min_gap)
    return DominanceResult(True, min_gap=min_gap)


@dataclass
class InducedMeasure:
    n: int
    q: object
    mass: dict[tuple[int, ...], object]

    def total(self):
        vals = list(self.mass.values())
        return sum(vals, Fraction(0)) if _is_exact(self.q) else math.fsum(vals)

    def coordinate_marginal(self, i: int = 0) -> DiscretePMF:
        acc: dict[int, object] = defaultdict(lambda: Fraction(0) if _is_exact(self.q) else 0.0)
        for pf, w in self.mass.items():
            acc[pf[i]] += w
        return DiscretePMF.from_mapping(dict(acc))

    def count_marginal(self, k: int) -> DiscretePMF:
        acc: dict[int, object] = defaultdict(lambda: Fraction(0) if _is_exact(self.q) else 0.0)
        for pf, w in self.mass.items():
            acc[pf.count(k)] += w
        return DiscretePMF.from_mapping(dict(acc))

    def is_exchangeable(self, rel_tol: float = 0.0) -> bool:
        groups: dict[tuple[int, ...], list] = defaultdict(list)
        for pf, w in self.mass.items():
            groups[tuple(sorted(pf))].append((pf, w))
        for key, members in groups.items():
            perms = set(_itperms(key))
            if len(perms) != len(members):
                return False
            w0 = members[0][1]
            for _, w in members:
                if rel_tol == 0.0:
                    if w != w0:
                        return False
                elif abs(w - w0) > rel_tol * abs(w0):
                    return False
        return True

    def as_pmf_over(self, pfs: Sequence[tuple[int, ...]]) -> list:
        return [self.mass.get(tuple(p), 0) for p in pfs]


def induced_measure_bruteforce(n: int, q) -> InducedMeasure:
    """Push ``Mallows(q) x Uniform`` through ``(sigma, tau) -> code(sigma)[tau]``.

    Enumerates every (code, tau) pair, so it is independent of the closed
    forms it is used to check.  Fractions in, Fractions out.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if n > MAX_BRUTEFORCE_N:
        raise ValueError(f"n={n} exceeds the brute-force cap {MAX_BRUTEFORCE_N}")
    exact = _is_exact(q)
    if exact:
        q = Fraction(q)
        coord = [[_trunc_geom_exact(q, j, i) for i in range(1, j + 1)] for j in range(1, n + 1)]
        inv_nfact = Fraction(1, math.factorial(n))
        zero = Fraction(0)
    else:
        q = float(q)
        coord = []
        for j in range(1, n + 1):
            w = np.array([q ** (i - 1) for i in range(1, j + 1)])
            coord.append((w / w.sum()).tolist())
        inv_nfact = 1.0 / math.factorial(n)
        zero = 0.0
    taus = list(_itperms(range(n)))
    mass: dict[tuple[int, ...], object] = defaultdict(lambda: zero)
    for code in all_codes(n):
        w = inv_nfact
        for j, c in enumerate(code):
            w = w * coord[j][c - 1]
        for tau in taus:
            mass[tuple(code[t] for t in tau)] += w
    out = dict(mass)
    for pf in out:
        ParkingFunction(pf)
    return InducedMeasure(n, q, out)
