from dataclasses import dataclass
from itertools import product
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from snlab.core.errors import SNLabError


@dataclass(frozen=True, order=True)
class Signature:
    """Weakly decreasing integer tuple (lambda_1 >= ... >= lambda_n)"""
    parts: Tuple[int, ...]

    def __init__(self, parts: Sequence[int] = ()):
        parts = tuple(int(p) for p in parts)
        for a, b in zip(parts, parts[1:]):
            if a < b:
                raise SNLabError(f"signature {parts} is not weakly decreasing", "validation", "symfunc")
        object.__setattr__(self, "parts", parts)

    def __len__(self) -> int:
        return len(self.parts)

    def __iter__(self):
        return iter(self.parts)

    def __getitem__(self, i):
        return self.parts[i]

    def __repr__(self) -> str:
        return f"Signature{self.parts}"

    @property
    def size(self) -> int:
        """|lambda|"""
        return sum(self.parts)

    @property
    def n_stat(self) -> int:
        """n(lambda) = sum (i-1) lambda_i"""
        return sum(i * p for i, p in enumerate(self.parts))

    @property
    def length(self) -> int:
        """Number of nonzero parts"""
        return sum(1 for p in self.parts if p != 0)

    @property
    def is_nonnegative(self) -> bool:
        return not self.parts or self.parts[-1] >= 0

    def multiplicities(self) -> Dict[int, int]:
        m: Dict[int, int] = {}
        for p in self.parts:
            m[p] = m.get(p, 0) + 1
        return m

    def mult(self, k: int) -> int:
        return sum(1 for p in self.parts if p == k)

    def shift(self, d: int) -> "Signature":
        return Signature(tuple(p + d for p in self.parts))

    def negate(self) -> "Signature":
        return Signature(tuple(-p for p in reversed(self.parts)))

    def pad(self, n: int) -> "Signature":
        """Append zeros up to length n (nonnegative signatures only)"""
        if len(self.parts) > n:
            raise SNLabError(f"cannot pad {self.parts} to length {n}", "argument", "symfunc")
        return Signature(self.parts + (0,) * (n - len(self.parts)))

    def to_json(self) -> List[int]:
        return list(self.parts)


def zeros(n: int) -> Signature:
    return Signature((0,) * n)


def interlaces_P(lam: Signature, mu: Signature) -> bool:
    """mu <_P lam: len(mu) = len(lam) - 1 and lam_i >= mu_i >= lam_{i+1}"""
    if len(mu) != len(lam) - 1:
        return False
    return all(lam[i] >= mu[i] >= lam[i + 1] for i in range(len(mu)))


def interlaces_Q(lower: Signature, upper: Signature) -> bool:
    """lower <_Q upper: same length, upper_i >= lower_i >= upper_{i+1}"""
    if len(lower) != len(upper):
        return False
    n = len(upper)
    for i in range(n):
        if lower[i] > upper[i]:
            return False
        if i + 1 < n and lower[i] < upper[i + 1]:
            return False
    return True


def p_branches(lam: Signature) -> Iterator[Signature]:
    """All mu with mu <_P lam"""
    ranges = [range(lam[i + 1], lam[i] + 1) for i in range(len(lam) - 1)]
    for parts in product(*ranges):
        yield Signature(parts)


def q_predecessors(lam: Signature, floor: Optional[Signature] = None) -> Iterator[Signature]:
    """All kappa with kappa <_Q lam and kappa >= floor coordinatewise"""
    n = len(lam)
    ranges = []
    for i in range(n):
        lo = lam[i + 1] if i + 1 < n else None
        if floor is not None:
            lo = floor[i] if lo is None else max(lo, floor[i])
        if lo is None:
            raise SNLabError("unbounded predecessor enumeration needs a floor", "argument", "symfunc")
        if lo > lam[i]:
            return
        ranges.append(range(lo, lam[i] + 1))
    for parts in product(*ranges):
        yield Signature(parts)


def q_successors(lam: Signature, max_growth: int) -> Iterator[Signature]:
    """All nu with lam <_Q nu and |nu| - |lam| <= max_growth"""
    n = len(lam)

    def rec(i: int, room: int, acc: Tuple[int, ...]):
        if i == n:
            yield Signature(acc)
            return
        hi = lam[i] + room if i == 0 else min(lam[i - 1], lam[i] + room)
        for v in range(lam[i], hi + 1):
            yield from rec(i + 1, room - (v - lam[i]), acc + (v,))

    yield from rec(0, max_growth, ())


def signatures_of_size(n: int, total: int, top: Optional[int] = None) -> Iterator[Signature]:
    """Nonnegative signatures of length n and size total, in reverse lex order"""
    if n == 0:
        if total == 0:
            yield Signature(())
        return
    top = total if top is None else min(top, total)
    for first in range(top, -1, -1):
        if first * n < total:
            break
        for rest in signatures_of_size(n - 1, total - first, first):
            yield Signature((first,) + rest.parts)


def dominated_between(lower: Signature, upper: Signature) -> Iterator[Signature]:
    """Signatures nu with lower <= nu <= upper coordinatewise"""
    ranges = [range(lower[i], upper[i] + 1) for i in range(len(lower))]
    for parts in product(*ranges):
        if all(parts[i] >= parts[i + 1] for i in range(len(parts) - 1)):
            yield Signature(parts)


def reachable_Q(lower: Signature, upper: Signature, steps) -> bool:
    """upper is reached from lower by `steps` Q-interlacing moves (steps may be inf):
    upper >= lower coordinatewise and upper_{i+steps} <= lower_i"""
    if len(lower) != len(upper):
        return False
    n = len(upper)
    if any(upper[i] < lower[i] for i in range(n)):
        return False
    if steps == float("inf") or steps >= n:
        return True
    return all(upper[i + steps] <= lower[i] for i in range(n - steps))
