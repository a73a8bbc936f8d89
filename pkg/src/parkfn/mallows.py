"""The Mallows measure on permutations, tilted by the inversion count.

Under ``P(sigma) ∝ q^inv(sigma)`` the shifted Lehmer code entries are
independent, entry ``j`` being a truncated geometric on ``1..j`` with mass
proportional to ``q^(i-1)``.  Sampling a code entry-wise and decoding it gives
an exact O(n log n) sampler.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .perms import Permutation, inversions, lehmer_decode
from .qmath import NEAR_ONE, log_q, log_qint
from .rng import RandomStream

ScheduleKind = Literal["fixed", "one_plus_c_over_n", "one_plus_c_over_n_alpha"]


@dataclass(frozen=True)
class QSchedule:
    """A rule ``n -> q_n``: fixed ``q``, ``1 + c/n`` or ``1 + c/n^alpha``.

    ``1 - c/n`` style schedules are stored with a negated ``c``.
    """

    kind: ScheduleKind
    q: float = 1.0
    c: float = 0.0
    alpha: float = 1.0

    def __post_init__(self):
        if self.kind == "fixed" and not self.q > 0:
            raise ValueError(f"fixed q must be positive, got {self.q}")
        if self.kind == "one_plus_c_over_n_alpha":
            if self.c == 0:
                raise ValueError("c must be nonzero for a 1 + c/n^alpha schedule")
            if not 0 < self.alpha < 1:
                raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")

    @classmethod
    def fixed(cls, q: float) -> QSchedule:
        return cls("fixed", q=float(q))

    @classmethod
    def one_plus_over_n(cls, c: float) -> QSchedule:
        return cls("one_plus_c_over_n", c=float(c))

    @classmethod
    def one_plus_over_n_alpha(cls, c: float, alpha: float) -> QSchedule:
        return cls("one_plus_c_over_n_alpha", c=float(c), alpha=float(alpha))

    def __call__(self, n: int) -> float:
        return self.evaluate(n)

    def evaluate(self, n: int) -> float:
        if self.kind == "fixed":
            q = self.q
        elif self.kind == "one_plus_c_over_n":
            q = 1.0 + self.c / n
        else:
            q = 1.0 + self.c / n**self.alpha
        if not q > 0:
            raise ValueError(f"schedule {self} gives q={q} <= 0 at n={n}")
        return q

    def check(self, ns: Sequence[int]) -> None:
        for n in ns:
            self.evaluate(n)

    @classmethod
    def parse(cls, text: str) -> QSchedule:
        """Parse ``q=0.5`` (or ``q=3/2``), ``q=1+c/n:c=2``, ``q=1-c/n^a:c=1,a=0.5`` (or a bare number)."""
        s = text.replace(" ", "")
        if s.startswith("q="):
            s = s[2:]
        try:
            return cls.fixed(float(Fraction(s)))
        except (ValueError, ZeroDivisionError):
            pass
        m = re.fullmatch(r"1([+-])c/n(\^a)?(?::(.*))?", s)
        if not m:
            raise ValueError(f"unrecognised q-schedule {text!r}")
        sign = 1.0 if m.group(1) == "+" else -1.0
        params: dict[str, float] = {}
        if m.group(3):
            for item in m.group(3).split(","):
                key, _, val = item.partition("=")
                if not val:
                    raise ValueError(f"bad parameter {item!r} in {text!r}")
                params[key.strip()] = float(val)
        if "c" not in params:
            raise ValueError(f"q-schedule {text!r} needs c=...")
        c = sign * params["c"]
        if m.group(2):
            if "a" not in params:
                raise ValueError(f"q-schedule {text!r} needs a=...")
            return cls.one_plus_over_n_alpha(c, params["a"])
        return cls.one_plus_over_n(c)

    def __str__(self) -> str:
        if self.kind == "fixed":
            return f"q={self.q:g}"
        sign = "+" if self.c >= 0 else "-"
        if self.kind == "one_plus_c_over_n":
            return f"q=1{sign}c/n:c={abs(self.c):g}"
        return f"q=1{sign}c/n^a:c={abs(self.c):g},a={self.alpha:g}"


@dataclass(frozen=True)
class TruncGeomParams:
    j: int
    q: float

    def __post_init__(self):
        if self.j < 1:
            raise ValueError(f"support size must be >= 1, got {self.j}")
        if not self.q > 0:
            raise ValueError(f"q must be positive, got {self.q}")

    def pmf(self) -> np.ndarray:
        i = np.arange(1, self.j + 1, dtype=float)
        t = log_q(self.q)
        logw = (i - 1) * t
        w = np.exp(logw - logw.max())
        return w / w.sum()


def log_q_normalizer(n: int, q: float) -> float:
    """``log sum_sigma q^inv(sigma) = sum_j log [j]_q``."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return float(np.sum(log_qint(np.arange(1, n + 1), q)))


def q_normalizer(n: int, q: float) -> float:
    """``prod_{j<=n} (1 + q + ... + q^(j-1))``; raises OverflowError past float range."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    log_q(q)
    if q == 1.0:
        return float(math.factorial(n)) if n <= 170 else _overflow(n, q)
    out = 1.0
    for j in range(1, n + 1):
        # [j]_q = (1 - q^j)/(1 - q), computed as a plain geometric sum when short
        if j <= 64:
            term = math.fsum(q**i for i in range(j))
        else:
            term = math.exp(float(log_qint(j, q)))
        out *= term
        if math.isinf(out):
            _overflow(n, q)
    return out


def _overflow(n: int, q: float) -> float:
    raise OverflowError(f"normalizer overflows for n={n}, q={q}; use log_q_normalizer")


def log_mallows_pmf(sigma: Permutation | Sequence[int], q: float) -> float:
    s = sigma if isinstance(sigma, Permutation) else Permutation(sigma)
    return inversions(s) * log_q(q) - log_q_normalizer(s.n, q)


def mallows_pmf(sigma: Permutation | Sequence[int], q: float) -> float:
    return math.exp(log_mallows_pmf(sigma, q))


def sample_trunc_geom(params: TruncGeomParams, rng: RandomStream) -> int:
    return int(sample_trunc_geom_array(np.array([params.j]), params.q, rng)[0])


def sample_trunc_geom_array(j, q: float, rng: RandomStream, size=None) -> np.ndarray:
    """Vectorised inverse-CDF draws, entry ``i`` supported on ``1..j[i]``.

    For ``q > 1`` the draw is reflected (``j + 1 - X`` with ``X`` drawn at
    ``1/q``) so ``q^j`` is never formed.
    """
    j = np.asarray(j, dtype=np.int64)
    if size is not None:
        j = np.broadcast_to(j, size)
    t = log_q(q)
    u = rng.random(j.shape)
    jf = j.astype(float)
    if t == 0.0:
        x = 1 + np.floor(jf * u)
    else:
        s = -abs(t)
        with np.errstate(divide="ignore", invalid="ignore"):
            # 1 - U (1 - r^j) with r = e^s < 1
            x = 1 + np.floor(np.log1p(u * np.expm1(jf * s)) / s)
        near = abs(t) * jf < NEAR_ONE
        if np.any(near):
            x = np.where(near, 1 + np.floor(jf * u), x)
    x = np.clip(x, 1, jf).astype(np.int64)
    if t > 0:
        x = j + 1 - x
    return x


def sample_code(n: int, q: float, rng: RandomStream) -> np.ndarray:
    return sample_trunc_geom_array(np.arange(1, n + 1), q, rng)


def sample_mallows(n: int, q: float, rng: RandomStream) -> Permutation:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return lehmer_decode(sample_code(n, q, rng).tolist())


def _expected_below(j: np.ndarray, t: float) -> np.ndarray:
    """Mean of ``code_j - 1`` (truncated geometric on ``0..j-1``, ratio ``e^t``)."""
    j = j.astype(float)
    if t == 0.0:
        return (j - 1) / 2
    small = np.abs(t) * j < 1e-3
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        closed = 1.0 / np.expm1(-t) - j / np.expm1(-j * t)
    # cumulant expansion around the uniform law; the t^2 term vanishes by symmetry
    series = (j - 1) / 2 + t * (j * j - 1) / 12 - t**3 * (j**4 - 1) / 720
    return np.where(small, series, closed)


def expected_inversions(n: int, q: float) -> float:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    t = log_q(q)
    return float(math.fsum(_expected_below(np.arange(1, n + 1), t)))
