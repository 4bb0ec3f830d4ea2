"""
Closed-form asymptotics of the particle system and the matrix products it models.

Per-step jump moments telescope: for u = t^{i-1} x and a generalized variable of
length m, the mean is g(u) - g(t^m u) with g(u) = u/(1-u) and the variance is
h(u) - h(t^m u) with h(u) = u/(1-u)^2. The *_series versions sum the raw terms
and serve as the cross-check.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from snlab.core.errors import SNLabError
from snlab.core.hlproc import GeneralizedVariable, Specialization
from snlab.core.trajectory import Trajectory

Count = Union[int, float]
SERIES_TOL = Fraction(1, 10 ** 15)
MAX_SERIES_TERMS = 100_000


@dataclass
class AsymSpec:
    """p (t = 1/p), particle count n, corner sizes N_j and their frequency profile"""
    p: int
    n: int
    Ns: List[Count] = field(default_factory=lambda: [math.inf])
    profile: Optional[Dict[Count, Fraction]] = None

    def __post_init__(self):
        if self.p < 2:
            raise SNLabError(f"p must be a prime >= 2, got {self.p}", "argument", "asym")
        if self.n < 1:
            raise SNLabError(f"n must be positive, got {self.n}", "argument", "asym")
        if self.profile is None:
            self.profile = {}
            for N in self.Ns:
                self.profile[N] = self.profile.get(N, Fraction(0)) + Fraction(1, len(self.Ns))
        self.profile = {N: Fraction(w) for N, w in self.profile.items()}
        check_profile(self.n, self.profile)

    @property
    def t(self) -> Fraction:
        return Fraction(1, self.p)

    def specialization(self) -> Specialization:
        return Specialization.matrix(self.n, self.Ns, self.t)


def check_profile(n: int, profile: Dict[Count, Fraction]):
    for N, w in profile.items():
        if w < 0:
            raise SNLabError(f"negative frequency {w} at N = {N}", "argument", "asym")
        if N != math.inf and N <= n:
            raise SNLabError(f"profile puts mass on N = {N} <= n = {n}", "argument", "asym")
    if sum(profile.values(), Fraction(0)) > 1:
        raise SNLabError("profile frequencies sum to more than 1", "argument", "asym")


# ---------------------------------------------------------------------------
# Jump moments

def _base(i: int, xhat: GeneralizedVariable, t: Fraction) -> Fraction:
    if i < 1:
        raise SNLabError(f"particle index must be >= 1, got {i}", "argument", "asym")
    return Fraction(t) ** (i - 1) * xhat.x


def _g(u: Fraction) -> Fraction:
    return u / (1 - u)


def _h(u: Fraction) -> Fraction:
    return u / (1 - u) ** 2


def mean_jump(i: int, xhat: GeneralizedVariable, t) -> Fraction:
    """E of the i-th coordinate increment under one generalized variable"""
    t = Fraction(t)
    u = _base(i, xhat, t)
    if xhat.is_infinite:
        return _g(u)
    return _g(u) - _g(t ** int(xhat.m) * u)


def var_jump(i: int, xhat: GeneralizedVariable, t) -> Fraction:
    t = Fraction(t)
    u = _base(i, xhat, t)
    if xhat.is_infinite:
        return _h(u)
    return _h(u) - _h(t ** int(xhat.m) * u)


def _series(term, m: Count, tail_bound) -> Tuple[Fraction, Fraction]:
    total = Fraction(0)
    j = 0
    while j < m:
        total += term(j)
        j += 1
        if m == math.inf and tail_bound(j) < SERIES_TOL * total:
            return total, tail_bound(j)
        if j > MAX_SERIES_TERMS:
            raise SNLabError("jump series did not reach its tolerance", "resource", "asym")
    return total, Fraction(0)


def mean_jump_series(i: int, xhat: GeneralizedVariable, t) -> Tuple[Fraction, Fraction]:
    """(partial sum, tail bound) of sum_j t^{j+i-1} x (1-t) / ((1-t^{j+i} x)(1-t^{j+i-1} x))"""
    t = Fraction(t)
    u = _base(i, xhat, t)

    def term(j):
        y = t ** j * u
        return y * (1 - t) / ((1 - t * y) * (1 - y))

    return _series(term, xhat.m, lambda J: t ** J * u / (1 - u) ** 2)


def var_jump_series(i: int, xhat: GeneralizedVariable, t) -> Tuple[Fraction, Fraction]:
    t = Fraction(t)
    u = _base(i, xhat, t)

    def term(j):
        y = t ** j * u
        return y * (1 - t) * (1 - t * y * y) / ((1 - y) ** 2 * (1 - t * y) ** 2)

    return _series(term, xhat.m, lambda J: t ** J * u / (1 - u) ** 4)


def lln_center(i: int, spec: Specialization, k: int) -> Fraction:
    """sum_{j <= k} mean_jump(i, xhat_j)"""
    return sum((mean_jump(i, spec.at(j), spec.t) for j in range(k)), Fraction(0))


def clt_variance(i: int, spec: Specialization, k: int) -> Fraction:
    return sum((var_jump(i, spec.at(j), spec.t) for j in range(k)), Fraction(0))


def clt_scale(i: int, spec: Specialization, k: int) -> float:
    return math.sqrt(clt_variance(i, spec, k))


def matrix_rate(i: int, N: Count, n: int, p: int) -> Fraction:
    """sum_l p^{-i-l}(1-1/p) / ((1-p^{-i-l-1})(1-p^{-i-l})) over l < N - n"""
    if N != math.inf and N <= n:
        raise SNLabError(f"N must exceed n, got N={N}, n={n}", "argument", "asym")
    if N == math.inf:
        return Fraction(1, p ** i - 1)
    q = Fraction(1, p)
    total = Fraction(0)
    for ell in range(int(N) - n):
        total += q ** (i + ell) * (1 - q) / ((1 - q ** (i + ell + 1)) * (1 - q ** (i + ell)))
    return total


# ---------------------------------------------------------------------------
# Rescaled fluctuation paths

@dataclass
class PiecewiseLinear:
    """Linear interpolation through (xs, ys) on [0, 1]"""
    xs: List[float]
    ys: List[float]

    def __call__(self, s: float) -> float:
        if not 0 <= s <= 1:
            raise SNLabError(f"path is defined on [0,1], got {s}", "argument", "asym")
        return float(np.interp(s, self.xs, self.ys))

    @property
    def knots(self) -> List[Tuple[float, float]]:
        return list(zip(self.xs, self.ys))


def rescale_path(traj: Trajectory, i: int, spec: Specialization) -> PiecewiseLinear:
    """f(j/k) = (lambda_i(j) - center(j)) / scale(k), linear in between"""
    k = traj.k
    if k < 1:
        raise SNLabError("trajectory needs at least one step", "argument", "asym")
    scale = clt_scale(i, spec, k)
    part = traj.part(i)
    xs, ys = [], []
    center = Fraction(0)
    for j in range(k + 1):
        if j > 0:
            center += mean_jump(i, spec.at(j - 1), spec.t)
        xs.append(j / k)
        ys.append(float(part[j] - center) / scale)
    return PiecewiseLinear(xs, ys)


# ---------------------------------------------------------------------------
# Lyapunov exponents

@dataclass
class LyapunovRow:
    i: int
    lyapunov: Fraction
    normalized_ratio: Fraction
    limit: int

    def to_json(self) -> dict:
        return {
            "i": self.i,
            "lyapunov": str(self.lyapunov),
            "normalized_ratio": str(self.normalized_ratio),
            "normalized_ratio_float": float(self.normalized_ratio),
            "limit": self.limit,
        }


def corner_constant(n: int, profile: Dict[Count, Fraction], p: int) -> Fraction:
    """c(n) = sum_N rho(N) p^{-(N-n)}"""
    return sum((w * Fraction(1, p) ** (int(N) - n) for N, w in profile.items() if N != math.inf), Fraction(0))


def lyapunov_predict(n: int, profile: Dict[Count, Fraction], p: int) -> List[LyapunovRow]:
    """L_i = sum_N rho(N) mean_jump(n-i+1, (t, m=N-n)) and L_i / (p^{-n}(1 - c(n))) for i = 1..n"""
    profile = {N: Fraction(w) for N, w in profile.items()}
    check_profile(n, profile)
    t = Fraction(1, p)
    c = corner_constant(n, profile, p)
    if c >= 1:
        raise SNLabError(f"corner constant c(n) = {c} leaves no normalization", "domain", "asym")
    rows = []
    for i in range(1, n + 1):
        L = Fraction(0)
        for N, w in profile.items():
            xhat = GeneralizedVariable(t, math.inf if N == math.inf else int(N) - n)
            L += w * mean_jump(n - i + 1, xhat, t)
        rows.append(LyapunovRow(i, L, L / (t ** n * (1 - c)), p ** (i - 1)))
    return rows


@dataclass
class SweepReport:
    i: int
    p: int
    ratios: Dict[int, Fraction]
    constant: float

    @property
    def monotone(self) -> bool:
        target = self.p ** (self.i - 1)
        gaps = [abs(self.ratios[n] - target) for n in sorted(self.ratios)]
        return all(a >= b for a, b in zip(gaps, gaps[1:]))

    def to_json(self) -> dict:
        return {
            "i": self.i,
            "p": self.p,
            "ratios": {str(n): float(r) for n, r in sorted(self.ratios.items())},
            "constant": self.constant,
            "monotone": self.monotone,
        }


def lyapunov_sweep(i: int, p: int, ns: Sequence[int]) -> SweepReport:
    """Normalized ratio of L_i over n with all N = inf, and the smallest C with
    |ratio - p^{i-1}| <= p^{i-1} C p^{-n+i} on the sweep"""
    ratios = {}
    constant = 0.0
    target = p ** (i - 1)
    for n in ns:
        if n < i:
            raise SNLabError(f"sweep needs n >= i, got n={n}, i={i}", "argument", "asym")
        ratio = lyapunov_predict(n, {math.inf: Fraction(1)}, p)[i - 1].normalized_ratio
        ratios[n] = ratio
        constant = max(constant, float(abs(ratio - target) / (target * Fraction(1, p) ** (n - i))))
    return SweepReport(i, p, ratios, constant)


def prediction_report(spec: AsymSpec, k: int) -> dict:
    """{i, center, scale, lyapunov, normalized_ratio} arrays; empty for k = 0"""
    if k < 0:
        raise SNLabError(f"k must be nonnegative, got {k}", "argument", "asym")
    if k == 0:
        return {"i": [], "center": [], "scale": [], "lyapunov": [], "normalized_ratio": []}
    special = spec.specialization()
    rows = lyapunov_predict(spec.n, spec.profile, spec.p)
    idx = list(range(1, spec.n + 1))
    return {
        "i": idx,
        "center": [str(lln_center(i, special, k)) for i in idx],
        "center_rate": [float(lln_center(i, special, k)) / k for i in idx],
        "scale": [clt_scale(i, special, k) for i in idx],
        "lyapunov": [str(r.lyapunov) for r in rows],
        "normalized_ratio": [str(r.normalized_ratio) for r in rows],
    }
