"""Lower bounds on the limiting total variation distance to the uniform measure.

For fixed ``q > 1`` the limit laws of ``N_1`` and ``N_n`` are known under both
the q-measure and the uniform measure on parking functions, so any event built
from them bounds the TV distance from below.  The bound for an event set ``A``
is ``max(|P_q(N_n = 1) - 1/e|, |P_q(N_1 in A) - P_unif(N_1 in A)|)``.
"""

from __future__ import annotations

import math
from collections.abc import Iterable
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .limits import _truncation, law_Ysum, law_Zsum

TOL = 1e-12
INV_E = math.exp(-1.0)
EVENT_VALUES = (1, 2, 3, 4)


@dataclass(frozen=True)
class BoundSpec:
    events: frozenset[int]
    include_nn: bool = True
    q_range: tuple[float, float] = (1.01, 10.0)

    def __init__(self, events: Iterable[int], include_nn: bool = True,
                 q_range: tuple[float, float] = (1.01, 10.0)):
        ev = frozenset(int(m) for m in events)
        if not ev or not ev <= set(EVENT_VALUES):
            raise ValueError(f"event set must be a nonempty subset of {set(EVENT_VALUES)}, got {set(ev)}")
        lo, hi = q_range
        if not 1 < lo < hi:
            raise ValueError(f"degenerate q-range {q_range}")
        object.__setattr__(self, "events", ev)
        object.__setattr__(self, "include_nn", include_nn)
        object.__setattr__(self, "q_range", (float(lo), float(hi)))

    def label(self) -> str:
        return "{" + ",".join(str(m) for m in sorted(self.events)) + "}"


def limit_unif_N1_pmf(m: int) -> float:
    """Uniform measure: ``N_1 -> 1 + Poisson(1)``, so ``P(N_1 = m) -> e^-1 / (m-1)!``."""
    if m < 1:
        raise ValueError(f"m={m} must be >= 1")
    return math.exp(-1.0 - math.lgamma(m))


def limit_q_N1_pmf(q: float, m: int, tol: float = TOL) -> float:
    if q <= 1:
        raise ValueError(f"q={q} must exceed 1")
    if m < 1:
        raise ValueError(f"m={m} must be >= 1")
    pmf, _ = law_Zsum(q, 1, tol)
    return float(pmf.prob(m))


def limit_q_N1_closed(q: float, m: int) -> float:
    """Series forms for ``m = 1, 2``: ``(q-1)/q`` and ``((q-1)/q)^2 sum_l 1/(q^l - 1)``."""
    if m == 1:
        return (q - 1) / q
    if m == 2:
        L = _truncation(q, TOL)
        ls = np.arange(1, L + 1, dtype=float)
        return ((q - 1) / q) ** 2 * math.fsum(1.0 / np.expm1(ls * math.log(q)))
    raise ValueError("closed forms are only available for m = 1, 2")


def limit_q_Nn_one(q: float) -> float:
    """``lim P_q(N_n = 1) = (q-1)/q`` (single Bernoulli ``Y_0``)."""
    if q <= 1:
        raise ValueError(f"q={q} must exceed 1")
    return (q - 1) / q


def n1_limit_table(qs, mmax: int = 4, tol: float = TOL, block: int = 256) -> np.ndarray:
    """``P_q(N_1 = m)`` limits for ``m = 0..mmax`` on a grid of ``q > 1``.

    Same Bernoulli sum as :func:`law_Zsum` with ``k = 1``, run for a block of
    ``q`` values at once and capped at ``mmax`` (mass above the cap is
    dropped).  Blocks are formed in sorted order so only the block nearest
    ``q = 1`` pays for a long truncation.
    """
    qs = np.asarray(qs, dtype=float)
    if np.any(qs <= 1):
        raise ValueError("all q must exceed 1")
    order = np.argsort(qs, kind="stable")
    out = np.empty((len(qs), mmax + 1))
    for start in range(0, len(qs), block):
        idx = order[start:start + block]
        qb = qs[idx]
        terms = _truncation(float(qb.min()), tol)
        t = np.log(qb)[:, None]
        j = np.arange(1, terms + 1, dtype=float)[None, :]
        with np.errstate(over="ignore", under="ignore"):
            ps = np.exp((1 - j) * t) * -np.expm1(-t) / -np.expm1(-j * t)
        dist = np.zeros((len(qb), mmax + 1))
        dist[:, 0] = 1.0
        for col in range(terms):
            p = ps[:, col:col + 1]
            nxt = dist * (1 - p)
            nxt[:, 1:] += dist[:, :-1] * p
            dist = nxt
        out[idx] = dist
    return out


def _bound_from_probs(q: float, pq: np.ndarray, spec: BoundSpec) -> float:
    a = sum(pq[m] for m in spec.events)
    b = sum(limit_unif_N1_pmf(m) for m in spec.events)
    terms = [abs(a - b)]
    if spec.include_nn:
        terms.append(abs(limit_q_Nn_one(q) - INV_E))
    return float(max(terms))


def lower_bound(q: float, spec: BoundSpec) -> float:
    if q <= 1:
        raise ValueError(f"q={q} must exceed 1")
    pq = np.zeros(max(EVENT_VALUES) + 1)
    for m in spec.events:
        pq[m] = limit_q_N1_pmf(q, m)
    return _bound_from_probs(q, pq, spec)


def bound_grid(spec: BoundSpec, qs) -> np.ndarray:
    qs = np.asarray(qs, dtype=float)
    table = n1_limit_table(qs)
    return np.array([_bound_from_probs(q, row, spec) for q, row in zip(qs, table)])


def _golden(f, a: float, b: float, xtol: float) -> float:
    invphi = (math.sqrt(5) - 1) / 2
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > xtol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return (a + b) / 2


@dataclass(frozen=True)
class BoundMinimum:
    spec: BoundSpec
    q_star: float
    value: float


def minimize_bound(spec: BoundSpec, q_range: tuple[float, float] | None = None,
                   step: float = 1e-3, xtol: float = 1e-6) -> BoundMinimum:
    """Grid scan at ``step`` then golden-section refinement to ``xtol`` in ``q``."""
    lo, hi = q_range if q_range is not None else spec.q_range
    if not 1 < lo < hi:
        raise ValueError(f"degenerate q-range ({lo}, {hi})")
    qs = np.arange(lo, hi + step / 2, step)
    vals = bound_grid(spec, qs)
    i = int(np.argmin(vals))
    a, b = qs[max(i - 1, 0)], qs[min(i + 1, len(qs) - 1)]
    q_star = _golden(lambda q: lower_bound(q, spec), float(a), float(b), xtol)
    value = lower_bound(q_star, spec)
    if vals[i] < value:
        q_star, value = float(qs[i]), lower_bound(float(qs[i]), spec)
    return BoundMinimum(spec, q_star, value)


def all_event_sets() -> list[frozenset[int]]:
    return [frozenset(c) for r in range(1, 5) for c in combinations(EVENT_VALUES, r)]


def minimize_all(q_range: tuple[float, float] = (1.01, 10.0), include_nn: bool = True,
                 step: float = 1e-3) -> list[BoundMinimum]:
    """Minimum of the bound for each of the 15 nonempty event sets, smallest first."""
    lo, hi = q_range
    qs = np.arange(lo, hi + step / 2, step)
    table = n1_limit_table(qs)
    out = []
    for ev in all_event_sets():
        spec = BoundSpec(ev, include_nn, q_range)
        vals = np.array([_bound_from_probs(q, row, spec) for q, row in zip(qs, table)])
        i = int(np.argmin(vals))
        a, b = qs[max(i - 1, 0)], qs[min(i + 1, len(qs) - 1)]
        q_star = _golden(lambda q: lower_bound(q, spec), float(a), float(b), 1e-6)
        out.append(BoundMinimum(spec, q_star, lower_bound(q_star, spec)))
    out.sort(key=lambda r: r.value)
    return out


def nn_limit_check(q: float) -> float:
    """``P(Y_0 = 1)`` from the ``k = 0`` Y-sum, to compare with :func:`limit_q_Nn_one`."""
    pmf, _ = law_Ysum(q, 0)
    return float(pmf.prob(1))


__all__ = [
    "BoundSpec", "BoundMinimum", "limit_unif_N1_pmf", "limit_q_N1_pmf", "limit_q_N1_closed",
    "limit_q_Nn_one", "lower_bound", "minimize_bound", "minimize_all", "bound_grid",
    "n1_limit_table", "all_event_sets", "nn_limit_check",
]
