import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, Hashable, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from rich.console import Console
from rich.table import Table
from scipy import special
from scipy import stats as sps

from snlab.core.errors import SNLabError
from snlab.core.hlproc import ExactLaw

console = Console()

DEFAULT_TOL_TV = 0.02
DEFAULT_TOL_P = 0.001
SUPPORT_TAIL = 1e-9


@dataclass
class EmpiricalDist:
    """Sample counts per outcome"""
    counts: Dict[Hashable, int] = field(default_factory=dict)
    total: int = 0

    @classmethod
    def from_samples(cls, samples: Iterable[Hashable]) -> "EmpiricalDist":
        dist = cls()
        for s in samples:
            dist.counts[s] = dist.counts.get(s, 0) + 1
            dist.total += 1
        return dist

    def merge(self, other: "EmpiricalDist") -> "EmpiricalDist":
        counts = dict(self.counts)
        for s, c in other.counts.items():
            counts[s] = counts.get(s, 0) + c
        return EmpiricalDist(counts, self.total + other.total)

    def frequencies(self) -> Dict[Hashable, float]:
        self._require_samples()
        return {s: c / self.total for s, c in self.counts.items()}

    def frequency(self, s: Hashable) -> float:
        self._require_samples()
        return self.counts.get(s, 0) / self.total

    def _require_samples(self):
        if self.total <= 0:
            raise SNLabError("empirical distribution has no samples", "argument", "stats")

    def to_json(self) -> List[dict]:
        return [
            {"signature": s.to_json() if hasattr(s, "to_json") else s, "count": c}
            for s, c in sorted(self.counts.items(), key=lambda kv: -kv[1])
        ]


@dataclass
class GofReport:
    """One comparison and its verdict"""
    label: str
    kind: str
    value: float
    threshold: Optional[float] = None
    passed: bool = True
    dof: Optional[int] = None
    p_value: Optional[float] = None
    note: str = ""

    def to_json(self) -> Dict[str, Any]:
        return {
            "label": self.label,
            "kind": self.kind,
            "value": self.value,
            "threshold": self.threshold,
            "passed": self.passed,
            "dof": self.dof,
            "p_value": self.p_value,
            "note": self.note,
        }


def _tail_of(exact: Mapping) -> Fraction:
    tail = getattr(exact, "tail", None)
    if tail is not None:
        return Fraction(tail)
    rest = 1 - sum((Fraction(v) for v in exact.values()), Fraction(0))
    if rest < 0:
        raise SNLabError(f"exact law sums to more than 1 (excess {-rest})", "argument", "stats")
    return rest


def tv_distance(emp: EmpiricalDist, exact: Mapping) -> float:
    """1/2 sum |emp - exact| over the union support, plus the unlisted exact mass"""
    freqs = emp.frequencies()
    support = set(freqs) | set(exact)
    total = sum(abs(freqs.get(s, 0.0) - float(exact.get(s, 0))) for s in support)
    return min(1.0, 0.5 * total + float(_tail_of(exact)))


def tv_report(label: str, emp: EmpiricalDist, exact: Mapping, tol: float = DEFAULT_TOL_TV) -> GofReport:
    value = tv_distance(emp, exact)
    return GofReport(label, "tv", value, tol, value <= tol, note=f"n={emp.total}")


def chi_square(
    emp: EmpiricalDist,
    exact: Mapping,
    min_expected: float = 5.0,
    label: str = "chi2",
    tol_p: float = DEFAULT_TOL_P,
) -> GofReport:
    """Pearson statistic after pooling cells (largest first) until each expects min_expected"""
    emp._require_samples()
    n = emp.total
    atoms = sorted(exact.items(), key=lambda kv: -kv[1])
    cells: List[Tuple[float, int]] = []
    used = 0
    exp_acc, obs_acc = 0.0, 0
    for s, prob in atoms:
        exp_acc += n * float(prob)
        obs_acc += emp.counts.get(s, 0)
        if exp_acc >= min_expected:
            cells.append((exp_acc, obs_acc))
            used += obs_acc
            exp_acc, obs_acc = 0.0, 0
    # leftover atoms, the unlisted tail and outcomes outside the table share one cell
    rest_exp = exp_acc + n * float(_tail_of(exact))
    rest_obs = n - used
    if rest_exp >= min_expected or not cells:
        cells.append((rest_exp, rest_obs))
    else:
        e, o = cells.pop()
        cells.append((e + rest_exp, o + rest_obs))
    note = f"{len(cells)} cells, n={n}"
    if len(cells) < 2:
        return GofReport(label, "chi2", 0.0, tol_p, True, 0, 1.0, note + ", degenerate")
    stat = 0.0
    for e, o in cells:
        if e <= 0:
            if o > 0:
                stat = math.inf
            continue
        stat += (o - e) ** 2 / e
    dof = len(cells) - 1
    p = float(special.gammaincc(dof / 2, stat / 2)) if math.isfinite(stat) else 0.0
    return GofReport(label, "chi2", stat, tol_p, p >= tol_p, dof, p, note)


def chi_square_two_sample(
    a: EmpiricalDist,
    b: EmpiricalDist,
    min_expected: float = 5.0,
    label: str = "chi2 two-sample",
    tol_p: float = DEFAULT_TOL_P,
) -> GofReport:
    """2 x K homogeneity test with cells pooled until both rows expect min_expected"""
    a._require_samples()
    b._require_samples()
    share_a = a.total / (a.total + b.total)
    share = min(share_a, 1 - share_a)
    support = sorted(set(a.counts) | set(b.counts), key=lambda s: -(a.counts.get(s, 0) + b.counts.get(s, 0)))
    rows: List[List[int]] = []
    ca = cb = 0
    for s in support:
        ca += a.counts.get(s, 0)
        cb += b.counts.get(s, 0)
        if (ca + cb) * share >= min_expected:
            rows.append([ca, cb])
            ca = cb = 0
    if ca + cb:
        if rows:
            rows[-1][0] += ca
            rows[-1][1] += cb
        else:
            rows.append([ca, cb])
    note = f"{len(rows)} cells, n={a.total}+{b.total}"
    if len(rows) < 2:
        return GofReport(label, "chi2-2sample", 0.0, tol_p, True, 0, 1.0, note + ", degenerate")
    table = np.array(rows, dtype=float).T
    stat, p, dof, _ = sps.chi2_contingency(table, correction=False)
    return GofReport(label, "chi2-2sample", float(stat), tol_p, float(p) >= tol_p, int(dof), float(p), note)


def tv_two_sample(a: EmpiricalDist, b: EmpiricalDist) -> float:
    fa, fb = a.frequencies(), b.frequencies()
    return 0.5 * sum(abs(fa.get(s, 0.0) - fb.get(s, 0.0)) for s in set(fa) | set(fb))


def truncate_support(exact: Mapping, tol: float = SUPPORT_TAIL) -> ExactLaw:
    """Largest atoms until the remaining exact mass is below tol; the rest becomes tail"""
    _tail_of(exact)
    law = ExactLaw()
    remaining = Fraction(1)
    for s, prob in sorted(exact.items(), key=lambda kv: -kv[1]):
        if remaining < tol:
            break
        law[s] = Fraction(prob)
        remaining -= Fraction(prob)
    law.tail = remaining
    return law


def atom_report(label: str, emp: EmpiricalDist, atom: Hashable, expected, tol: float) -> GofReport:
    """|empirical frequency of atom - expected| <= tol"""
    freq = emp.frequency(atom)
    gap = abs(freq - float(expected))
    return GofReport(label, "atom", freq, tol, gap <= tol, note=f"expected {float(expected):.5f}, n={emp.total}")


def bound_report(label: str, value: float, lo: Optional[float] = None, hi: Optional[float] = None) -> GofReport:
    ok = (lo is None or value >= lo) and (hi is None or value <= hi)
    band = f"[{'-inf' if lo is None else lo}, {'inf' if hi is None else hi}]"
    return GofReport(label, "bound", float(value), hi if hi is not None else lo, ok, note=band)


# ---------------------------------------------------------------------------
# Fluctuation diagnostics

MIN_DIAGNOSTIC_SAMPLES = 100


@dataclass
class NormalityReport:
    n: int
    mean: float
    variance: float
    skewness: float
    excess_kurtosis: float
    ks: float
    mean_se: float
    variance_se: float
    skew_se: float
    kurt_se: float
    degenerate: bool = False

    def checks(self, label: str, var_band=(0.9, 1.1), skew=0.1, kurt=0.25, ks=0.03) -> List[GofReport]:
        if self.degenerate:
            return [GofReport(f"{label} variance", "bound", 0.0, None, False, note="degenerate samples")]
        return [
            bound_report(f"{label} variance", self.variance, *var_band),
            bound_report(f"{label} |skew|", abs(self.skewness), None, skew),
            bound_report(f"{label} |excess kurtosis|", abs(self.excess_kurtosis), None, kurt),
            bound_report(f"{label} KS to N(0,1)", self.ks, None, ks),
        ]

    def to_json(self) -> Dict[str, Any]:
        return dict(self.__dict__)


def normality_report(samples: Sequence[float]) -> NormalityReport:
    """Moments with standard-error bands and the KS distance to N(0,1)"""
    xs = np.asarray(samples, dtype=float)
    n = xs.size
    if n < MIN_DIAGNOSTIC_SAMPLES:
        raise SNLabError(f"normality diagnostics need at least {MIN_DIAGNOSTIC_SAMPLES} samples, got {n}", "argument", "stats")
    var = float(np.var(xs, ddof=1))
    ks = float(sps.kstest(xs, "norm").statistic)
    if var == 0:
        return NormalityReport(n, float(xs.mean()), 0.0, 0.0, 0.0, ks, 0.0, 0.0, 0.0, 0.0, degenerate=True)
    return NormalityReport(
        n=n,
        mean=float(xs.mean()),
        variance=var,
        skewness=float(sps.skew(xs)),
        excess_kurtosis=float(sps.kurtosis(xs, fisher=True)),
        ks=ks,
        mean_se=math.sqrt(var / n),
        variance_se=var * math.sqrt(2 / (n - 1)),
        skew_se=math.sqrt(6 / n),
        kurt_se=math.sqrt(24 / n),
    )


@dataclass
class IndependenceReport:
    n: int
    correlation: Optional[float]
    ci_low: Optional[float]
    ci_high: Optional[float]
    degenerate: bool = False

    def check(self, label: str, bound: float) -> GofReport:
        if self.degenerate:
            return GofReport(label, "bound", 0.0, bound, False, note="degenerate variance")
        return bound_report(label, abs(self.correlation), None, bound)

    def to_json(self) -> Dict[str, Any]:
        return dict(self.__dict__)


def independence_report(pairs: Sequence[Tuple[float, float]]) -> IndependenceReport:
    """Pearson correlation with a Fisher-z 99% interval"""
    arr = np.asarray(pairs, dtype=float)
    n = len(arr)
    if n < MIN_DIAGNOSTIC_SAMPLES:
        raise SNLabError(f"independence diagnostics need at least {MIN_DIAGNOSTIC_SAMPLES} pairs, got {n}", "argument", "stats")
    xs, ys = arr[:, 0], arr[:, 1]
    if np.std(xs) == 0 or np.std(ys) == 0:
        return IndependenceReport(n, None, None, None, degenerate=True)
    r = float(np.clip(np.corrcoef(xs, ys)[0, 1], -1.0, 1.0))
    if abs(r) == 1.0:
        return IndependenceReport(n, r, r, r)
    z = math.atanh(r)
    half = sps.norm.ppf(0.995) / math.sqrt(n - 3)
    return IndependenceReport(n, r, math.tanh(z - half), math.tanh(z + half))


# ---------------------------------------------------------------------------
# Output

def _fmt(v: Optional[float]) -> str:
    if v is None:
        return "-"
    return f"{v:.4g}"


def render_markdown(reports: Sequence[GofReport], title: str = "snlab report") -> str:
    lines = [f"# {title}", "", "| check | kind | value | threshold | p-value | dof | result | note |", "|---|---|---|---|---|---|---|---|"]
    for r in reports:
        lines.append(
            f"| {r.label} | {r.kind} | {_fmt(r.value)} | {_fmt(r.threshold)} | {_fmt(r.p_value)} | "
            f"{'-' if r.dof is None else r.dof} | {'PASS' if r.passed else 'FAIL'} | {r.note} |"
        )
    passed = sum(1 for r in reports if r.passed)
    lines += ["", f"{passed}/{len(reports)} checks passed."]
    return "\n".join(lines) + "\n"


def show_reports(reports: Sequence[GofReport], title: str = "📊 Results"):
    """Display reports as a rich table."""
    table = Table(title=title)
    table.add_column("Check", style="cyan")
    table.add_column("Kind", style="magenta")
    table.add_column("Value", style="green")
    table.add_column("Threshold")
    table.add_column("p-value")
    table.add_column("Result")

    for r in reports:
        verdict = "[green]✅ pass[/green]" if r.passed else "[red]❌ fail[/red]"
        table.add_row(r.label, r.kind, _fmt(r.value), _fmt(r.threshold), _fmt(r.p_value), verdict)

    console.print(table)
