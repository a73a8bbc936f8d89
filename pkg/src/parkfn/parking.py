"""Parking functions: validity, the car process, enumeration, and the map
``(sigma, tau) -> (code_{tau_1}(sigma), ..., code_{tau_n}(sigma))``.
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass

import numpy as np

from .perms import Permutation, lehmer_encode

MAX_ENUMERATE_N = 8


class NotAParkingFunction(ValueError):
    pass


class EnumerationTooLarge(ValueError):
    pass


def _check_range(prefs: Sequence[int]) -> int:
    n = len(prefs)
    for v in prefs:
        if not 1 <= v <= n:
            raise ValueError(f"preference {v} outside 1..{n}")
    return n


def is_parking(prefs: Sequence[int]) -> bool:
    """At least ``j`` entries are ``<= j`` for every ``j`` (counting-sort check)."""
    n = _check_range(prefs)
    counts = [0] * (n + 1)
    for v in prefs:
        counts[v] += 1
    running = 0
    for j in range(1, n + 1):
        running += counts[j]
        if running < j:
            return False
    return True


def is_parking_batch(rows: np.ndarray) -> np.ndarray:
    """Row-wise :func:`is_parking` for an ``(m, n)`` integer array."""
    rows = np.asarray(rows)
    m, n = rows.shape
    if rows.size and (rows.min() < 1 or rows.max() > n):
        raise ValueError(f"preferences outside 1..{n}")
    counts = np.zeros((m, n + 1), dtype=np.int64)
    np.add.at(counts, (np.repeat(np.arange(m), n), rows.ravel()), 1)
    running = np.cumsum(counts[:, 1:], axis=1)
    return np.all(running >= np.arange(1, n + 1), axis=1)


@dataclass(frozen=True)
class CarResult:
    parked: bool
    spots: tuple[int, ...] | None = None
    failed_car: int | None = None


def simulate_cars(prefs: Sequence[int]) -> CarResult:
    """Run the one-way street: car ``i`` takes the first free spot ``>= prefs[i]``."""
    n = _check_range(prefs)
    taken = [False] * (n + 2)
    spots = []
    for car, p in enumerate(prefs, start=1):
        s = p
        while s <= n and taken[s]:
            s += 1
        if s > n:
            return CarResult(False, failed_car=car)
        taken[s] = True
        spots.append(s)
    return CarResult(True, spots=tuple(spots))


@dataclass(frozen=True)
class ParkingFunction:
    prefs: tuple[int, ...]

    def __init__(self, prefs: Iterable[int]):
        p = tuple(int(v) for v in prefs)
        if not is_parking(p):
            raise NotAParkingFunction(f"{p!r} is not a parking function")
        object.__setattr__(self, "prefs", p)

    @property
    def n(self) -> int:
        return len(self.prefs)

    def __len__(self) -> int:
        return len(self.prefs)

    def __iter__(self) -> Iterator[int]:
        return iter(self.prefs)

    def __getitem__(self, i: int) -> int:
        return self.prefs[i]

    def to_csv(self) -> str:
        return format_pf(self.prefs)


def format_pf(prefs: Iterable[int]) -> str:
    return ",".join(str(int(v)) for v in prefs)


def parse_pf(line: str) -> tuple[int, ...]:
    return tuple(int(tok) for tok in line.strip().split(","))


def from_pair(
    sigma: Permutation | Sequence[int], tau: Permutation | Sequence[int]
) -> ParkingFunction:
    s = sigma if isinstance(sigma, Permutation) else Permutation(sigma)
    t = tau if isinstance(tau, Permutation) else Permutation(tau)
    if s.n != t.n:
        raise ValueError(f"sigma has length {s.n} but tau has length {t.n}")
    code = lehmer_encode(s).code
    return ParkingFunction(code[v - 1] for v in t.word)


def enumerate_parking(n: int, unsafe_large: bool = False) -> Iterator[tuple[int, ...]]:
    """Yield every parking function of length ``n`` once, lexicographically.

    Walks all ``n^n`` preference words depth-first and prunes a prefix as soon
    as the remaining cars cannot repair a deficit.  Refuses ``n > 8`` unless
    ``unsafe_large`` is set.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if n > MAX_ENUMERATE_N and not unsafe_large:
        raise EnumerationTooLarge(
            f"n={n} exceeds the enumeration cap {MAX_ENUMERATE_N}; pass unsafe_large"
        )
    # cnt_le[j] = #prefix entries <= j; a prefix of length L is completable iff
    # cnt_le[j] + (n - L) >= j for every j.  Appending v only raises counts at
    # j >= v, so v is admissible iff every j < v already has slack.
    cnt_le = [0] * (n + 1)
    prefix = [0] * n

    def rec(depth: int) -> Iterator[tuple[int, ...]]:
        remaining = n - depth - 1
        v_max = n
        for j in range(1, n + 1):
            if cnt_le[j] + remaining < j:
                v_max = j
                break
        if remaining == 0:
            head = tuple(prefix[:depth])
            for v in range(1, v_max + 1):
                yield (*head, v)
            return
        for v in range(1, v_max + 1):
            for j in range(v, n + 1):
                cnt_le[j] += 1
            prefix[depth] = v
            yield from rec(depth + 1)
            for j in range(v, n + 1):
                cnt_le[j] -= 1

    yield from rec(0)


def parking_count(n: int) -> int:
    return (n + 1) ** (n - 1)


def count_value(prefs: ParkingFunction | Sequence[int], k: int) -> int:
    p = prefs.prefs if isinstance(prefs, ParkingFunction) else tuple(prefs)
    n = len(p)
    if not 1 <= k <= n:
        raise ValueError(f"k={k} outside 1..{n}")
    return sum(1 for v in p if v == k)
