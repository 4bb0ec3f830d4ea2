from dataclasses import dataclass, field
from typing import Any, Dict, List, Sequence, Union

from snlab.core.errors import SNLabError
from snlab.core.signature import Signature, reachable_Q

# non-interacting walks carry plain integer vectors, which need not be ordered
Step = Union[Signature, tuple]


@dataclass
class Trajectory:
    """Steps lambda(0), ..., lambda(k) plus provenance"""
    n: int
    steps: List[Step] = field(default_factory=list)
    meta: Dict[str, Any] = field(default_factory=dict)

    @property
    def k(self) -> int:
        return len(self.steps) - 1

    @property
    def final(self) -> Step:
        return self.steps[-1]

    def append(self, lam: Step):
        if len(lam) != self.n:
            raise SNLabError(f"step has length {len(lam)}, expected {self.n}", "validation", "hlproc")
        self.steps.append(lam)

    def part(self, i: int) -> List[int]:
        """lambda_i(0), ..., lambda_i(k), i is 1-indexed"""
        return [lam[i - 1] for lam in self.steps]

    def is_consistent(self, strips=1) -> bool:
        """Each move is at most `strips` Q-interlacing steps (1 for a single variable)"""
        return all(reachable_Q(a, b, strips) for a, b in zip(self.steps, self.steps[1:]))

    def header(self) -> List[str]:
        return ["k"] + [f"lambda_{i + 1}" for i in range(self.n)]

    def rows(self) -> List[List[int]]:
        return [[j] + [int(v) for v in lam] for j, lam in enumerate(self.steps)]

    def to_json(self) -> Dict[str, Any]:
        return {"n": self.n, "steps": [[int(v) for v in lam] for lam in self.steps], "meta": self.meta}

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], meta=None) -> "Trajectory":
        steps = [Signature(r[1:]) for r in rows]
        n = len(steps[0]) if steps else 0
        return cls(n, steps, dict(meta or {}))
