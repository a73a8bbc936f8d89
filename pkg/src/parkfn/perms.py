"""Permutations, inversion counts and the Lehmer code.

Values are 1-indexed (a permutation of ``n`` is a word over ``1..n``) but are
stored in ordinary 0-indexed tuples.  The Lehmer code used throughout the
package is the *shifted* one: ``code[j-1] = 1 + #{i < j : i appears after j}``,
so ``1 <= code[j-1] <= j``.
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass
from itertools import permutations as _itperms


class InvalidPermutation(ValueError):
    pass


class InvalidLehmerCode(ValueError):
    pass


@dataclass(frozen=True)
class Permutation:
    word: tuple[int, ...]

    def __init__(self, word: Iterable[int]):
        w = tuple(int(v) for v in word)
        n = len(w)
        seen = bytearray(n + 1)
        for v in w:
            if not 1 <= v <= n or seen[v]:
                raise InvalidPermutation(f"not a permutation of 1..{n}: {w!r}")
            seen[v] = 1
        object.__setattr__(self, "word", w)

    @classmethod
    def identity(cls, n: int) -> Permutation:
        return cls(range(1, n + 1))

    @classmethod
    def reversal(cls, n: int) -> Permutation:
        return cls(range(n, 0, -1))

    @property
    def n(self) -> int:
        return len(self.word)

    def __len__(self) -> int:
        return len(self.word)

    def __iter__(self) -> Iterator[int]:
        return iter(self.word)

    def __getitem__(self, i: int) -> int:
        return self.word[i]

    def inverse(self) -> Permutation:
        inv = [0] * self.n
        for pos, v in enumerate(self.word, start=1):
            inv[v - 1] = pos
        return Permutation(inv)


@dataclass(frozen=True)
class LehmerCode:
    code: tuple[int, ...]

    def __init__(self, code: Iterable[int]):
        c = tuple(int(v) for v in code)
        for j, v in enumerate(c, start=1):
            if not 1 <= v <= j:
                raise InvalidLehmerCode(f"code[{j}]={v} outside 1..{j}")
        object.__setattr__(self, "code", c)

    @property
    def n(self) -> int:
        return len(self.code)

    def __len__(self) -> int:
        return len(self.code)

    def __iter__(self) -> Iterator[int]:
        return iter(self.code)

    def __getitem__(self, i: int) -> int:
        return self.code[i]


def _as_perm(sigma: Permutation | Sequence[int]) -> Permutation:
    return sigma if isinstance(sigma, Permutation) else Permutation(sigma)


def _merge_count(a: list[int]) -> tuple[list[int], int]:
    if len(a) <= 1:
        return a, 0
    mid = len(a) // 2
    left, x = _merge_count(a[:mid])
    right, y = _merge_count(a[mid:])
    out: list[int] = []
    inv = x + y
    i = j = 0
    nl = len(left)
    while i < nl and j < len(right):
        if right[j] < left[i]:
            out.append(right[j])
            inv += nl - i
            j += 1
        else:
            out.append(left[i])
            i += 1
    out.extend(left[i:])
    out.extend(right[j:])
    return out, inv


def inversions(sigma: Permutation | Sequence[int]) -> int:
    """Number of pairs ``i < j`` with ``sigma_j < sigma_i`` (merge count)."""
    return _merge_count(list(_as_perm(sigma).word))[1]


def inversions_naive(sigma: Permutation | Sequence[int]) -> int:
    w = _as_perm(sigma).word
    n = len(w)
    return sum(1 for i in range(n) for j in range(i + 1, n) if w[j] < w[i])


class _Fenwick:
    """Binary indexed tree over positions 1..n holding 0/1 occupancy."""

    def __init__(self, n: int, fill: int = 0):
        self.n = n
        self.tree = [0] * (n + 1)
        if fill:
            for i in range(1, n + 1):
                self.tree[i] += 1
                parent = i + (i & -i)
                if parent <= n:
                    self.tree[parent] += self.tree[i]
        self._top = 1 << (n.bit_length() - 1) if n else 0

    def add(self, i: int, delta: int) -> None:
        tree, n = self.tree, self.n
        while i <= n:
            tree[i] += delta
            i += i & -i

    def prefix(self, i: int) -> int:
        s = 0
        tree = self.tree
        while i > 0:
            s += tree[i]
            i -= i & -i
        return s

    def select(self, r: int) -> int:
        """Smallest position whose prefix sum reaches ``r`` (1-based rank)."""
        pos = 0
        step = self._top
        tree, n = self.tree, self.n
        while step:
            nxt = pos + step
            if nxt <= n and tree[nxt] < r:
                pos = nxt
                r -= tree[nxt]
            step >>= 1
        return pos + 1


def inversions_below(sigma: Permutation | Sequence[int], j: int) -> int:
    """``I_{n,<j}``: how many values smaller than ``j`` appear after ``j``."""
    s = _as_perm(sigma)
    if not 1 <= j <= s.n:
        raise ValueError(f"j={j} outside 1..{s.n}")
    pos_j = s.word.index(j)
    return sum(1 for v in s.word[pos_j + 1:] if v < j)


def lehmer_encode(sigma: Permutation | Sequence[int]) -> LehmerCode:
    s = _as_perm(sigma)
    n = s.n
    # scan right to left; the tree counts values already seen (to the right)
    fw = _Fenwick(n)
    code = [0] * n
    for v in reversed(s.word):
        code[v - 1] = fw.prefix(v - 1) + 1
        fw.add(v, 1)
    return LehmerCode(code)


def lehmer_decode(code: LehmerCode | Sequence[int]) -> Permutation:
    """Inverse of :func:`lehmer_encode` in O(n log n).

    Values are placed from ``n`` down to ``1``; value ``j`` must have
    ``j - code[j]`` smaller values to its left, and those smaller values fill
    exactly the slots still free, so ``j`` takes the ``(j - code[j] + 1)``-th
    free slot.
    """
    c = code if isinstance(code, LehmerCode) else LehmerCode(code)
    n = c.n
    fw = _Fenwick(n, fill=1)
    word = [0] * n
    for j in range(n, 0, -1):
        slot = fw.select(j - c.code[j - 1] + 1)
        word[slot - 1] = j
        fw.add(slot, -1)
    return Permutation(word)


def lehmer_decode_naive(code: LehmerCode | Sequence[int]) -> Permutation:
    c = code if isinstance(code, LehmerCode) else LehmerCode(code)
    word: list[int] = []
    # insert j so that exactly code[j]-1 smaller values end up after it
    for j, v in enumerate(c.code, start=1):
        word.insert(len(word) - (v - 1), j)
    return Permutation(word)


def reverse(sigma: Permutation | Sequence[int]) -> Permutation:
    return Permutation(reversed(_as_perm(sigma).word))


def all_permutations(n: int) -> Iterator[Permutation]:
    for w in _itperms(range(1, n + 1)):
        yield Permutation(w)


def all_codes(n: int) -> Iterator[tuple[int, ...]]:
    """Every valid shifted Lehmer code of length ``n`` (``n!`` of them)."""
    if n == 0:
        yield ()
        return
    for head in all_codes(n - 1):
        for v in range(1, n + 1):
            yield (*head, v)
