"""Finite discrete laws on integer labels."""

from __future__ import annotations

import io
import math
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

MASS_TOL = 1e-10


@dataclass(frozen=True)
class DiscretePMF:
    """Probabilities ``probs[i]`` on strictly increasing integer labels ``support[i]``.

    ``probs`` may hold :class:`fractions.Fraction` values (exact mode); the
    mass check is then exact.  ``deficit`` records mass knowingly dropped by
    truncation (0 for a complete law).
    """

    support: tuple[int, ...]
    probs: tuple
    deficit: float = 0.0
    exact: bool = field(default=False, compare=False)

    def __post_init__(self):
        if len(self.support) != len(self.probs):
            raise ValueError("support and probs differ in length")
        if any(b <= a for a, b in zip(self.support, self.support[1:])):
            raise ValueError("support must be strictly increasing")
        if any(p < 0 for p in self.probs):
            raise ValueError("negative probability")
        exact = bool(self.probs) and all(isinstance(p, (Fraction, int)) for p in self.probs)
        object.__setattr__(self, "exact", exact)
        total = sum(self.probs) if exact else math.fsum(self.probs)
        if exact and self.deficit == 0:
            if total != 1:
                raise ValueError(f"exact mass is {total}, not 1")
        elif abs(total + self.deficit - 1.0) > max(MASS_TOL, 1e-12 * len(self.probs)):
            raise ValueError(f"mass {total} (+ deficit {self.deficit}) is not 1")

    @classmethod
    def from_mapping(cls, mass: Mapping[int, float], deficit: float = 0.0) -> DiscretePMF:
        keys = sorted(mass)
        return cls(tuple(int(k) for k in keys), tuple(mass[k] for k in keys), deficit)

    @classmethod
    def from_arrays(cls, support: Iterable[int], probs: Iterable[float], deficit: float = 0.0,
                    drop_zeros: bool = False) -> DiscretePMF:
        s = [int(x) for x in support]
        p = [float(x) for x in probs]
        if drop_zeros:
            s, p = zip(*[(a, b) for a, b in zip(s, p) if b > 0]) if any(p) else ((), ())
        return cls(tuple(s), tuple(p), deficit)

    @classmethod
    def point(cls, k: int) -> DiscretePMF:
        return cls((int(k),), (1.0,))

    def as_dict(self) -> dict[int, float]:
        return dict(zip(self.support, self.probs))

    def prob(self, k: int):
        try:
            return self.probs[self.support.index(k)]
        except ValueError:
            return Fraction(0) if self.exact else 0.0

    def __len__(self) -> int:
        return len(self.support)

    def mean(self) -> float:
        if self.exact:
            return sum(k * p for k, p in zip(self.support, self.probs))
        return math.fsum(k * p for k, p in zip(self.support, self.probs))

    def variance(self) -> float:
        m = self.mean()
        if self.exact:
            return sum((k - m) ** 2 * p for k, p in zip(self.support, self.probs))
        return math.fsum((k - m) ** 2 * p for k, p in zip(self.support, self.probs))

    def cdf(self, x: float):
        """``P(X <= x)``."""
        acc = Fraction(0) if self.exact else 0.0
        for k, p in zip(self.support, self.probs):
            if k > x:
                break
            acc += p
        return acc

    def to_float(self) -> DiscretePMF:
        if not self.exact:
            return self
        return DiscretePMF(self.support, tuple(float(p) for p in self.probs), self.deficit)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("support,prob\n")
        for k, p in zip(self.support, self.probs):
            buf.write(f"{k},{p if self.exact else repr(float(p))}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> DiscretePMF:
        lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
        if not lines or lines[0].strip() != "support,prob":
            raise ValueError("expected header 'support,prob'")
        mass: dict[int, object] = {}
        for ln in lines[1:]:
            k, p = ln.split(",")
            mass[int(k)] = Fraction(p) if "/" in p else float(p)
        return cls.from_mapping(mass)


def tv_distance(p: DiscretePMF | Mapping[int, float], r: DiscretePMF | Mapping[int, float]) -> float:
    """Half the l1 distance over the union of the supports."""
    a = p.as_dict() if isinstance(p, DiscretePMF) else dict(p)
    b = r.as_dict() if isinstance(r, DiscretePMF) else dict(r)
    keys = set(a) | set(b)
    return 0.5 * math.fsum(abs(float(a.get(k, 0.0)) - float(b.get(k, 0.0))) for k in keys)


def poisson_pmf(lam: float, tail: float = 1e-15) -> DiscretePMF:
    from scipy.stats import poisson

    if lam <= 0:
        return DiscretePMF.point(0)
    hi = int(poisson.isf(tail, lam)) + 1
    ks = np.arange(0, hi + 1)
    pr = poisson.pmf(ks, lam)
    return DiscretePMF.from_arrays(ks, pr, deficit=float(poisson.sf(hi, lam)))
