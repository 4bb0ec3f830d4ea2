"""
Hall-Littlewood measures, Markov kernels and processes.

The particle sampler moves n particles by the insertion map with G_x impulses,
one array of impulses per specialization value; a generalized variable
(x, tx, t^2 x, ...) inserts its arrays in order. Exact kernel probabilities
come from symfunc so sampled laws can be checked against them.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np

from snlab.core.errors import SNLabError
from snlab.core.rng import ExactUniform
from snlab.core.signature import Signature, dominated_between, interlaces_Q, signatures_of_size, zeros
from snlab.core.symfunc import (
    HLParams,
    cauchy_kernel,
    cauchy_kernel_geometric,
    hl_eval,
    hl_eval_Q,
    hl_skew,
    principal_P,
    principal_Q,
    structure_coeffs,
)
from snlab.core.trajectory import Trajectory

Count = Union[int, float]

# per-coordinate cutoff of the brute-force sampler for infinite generalized variables
TRUNCATION_CUTOFF = Fraction(1, 10 ** 12)
MAX_GROWTH = 400


class ExactLaw(dict):
    """Signature -> exact probability, plus the exact mass left outside the table"""

    def __init__(self, probs=None, tail: Fraction = Fraction(0)):
        super().__init__(probs or {})
        self.tail = Fraction(tail)

    @property
    def total(self) -> Fraction:
        return sum(self.values(), Fraction(0))

    def to_json(self) -> List[dict]:
        return [
            {"signature": sig.to_json(), "prob_num": str(p.numerator), "prob_den": str(p.denominator)}
            for sig, p in sorted(self.items(), reverse=True)
        ]


@dataclass(frozen=True)
class GeneralizedVariable:
    """(x, tx, ..., t^{m-1} x); m may be math.inf"""
    x: Fraction
    m: Count = 1

    def __post_init__(self):
        x = Fraction(self.x)
        if not 0 < x < 1:
            raise SNLabError(f"generalized variable needs 0 < x < 1, got {x}", "argument", "hlproc")
        if self.m != math.inf and (int(self.m) != self.m or self.m < 1):
            raise SNLabError(f"generalized variable length must be a positive integer or inf, got {self.m}", "argument", "hlproc")
        object.__setattr__(self, "x", x)

    @property
    def is_infinite(self) -> bool:
        return self.m == math.inf

    def values(self, t: Fraction) -> List[Fraction]:
        if self.is_infinite:
            raise SNLabError("an infinite generalized variable has no finite value list", "argument", "hlproc")
        return [self.x * t ** j for j in range(int(self.m))]

    def to_json(self) -> dict:
        return {"x": str(self.x), "m": "inf" if self.is_infinite else int(self.m)}


@dataclass(frozen=True)
class Specialization:
    """Parameter t and the generalized variables used step by step (cycled)"""
    t: Fraction
    vars: Tuple[GeneralizedVariable, ...] = field(default_factory=tuple)

    def __post_init__(self):
        t = Fraction(self.t)
        if not 0 < t < 1:
            raise SNLabError(f"t must lie in (0,1), got {t}", "argument", "hlproc")
        if not self.vars:
            raise SNLabError("a specialization needs at least one generalized variable", "argument", "hlproc")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "vars", tuple(self.vars))

    @classmethod
    def matrix(cls, n: int, Ns: Sequence[Count], t: Fraction) -> "Specialization":
        """Dictionary for corners of Haar GL_N: x = t, m = N - n"""
        xs = []
        for N in Ns:
            if N != math.inf and N <= n:
                raise SNLabError(f"corner sizes must exceed n = {n}, got N = {N}", "argument", "hlproc")
            xs.append(GeneralizedVariable(Fraction(t), math.inf if N == math.inf else int(N) - n))
        return cls(Fraction(t), tuple(xs))

    def at(self, j: int) -> GeneralizedVariable:
        return self.vars[j % len(self.vars)]

    def to_json(self) -> dict:
        return {"t": str(self.t), "vars": [v.to_json() for v in self.vars]}


# ---------------------------------------------------------------------------
# The G_x impulse law

def _check_xt(x: Fraction, t: Fraction):
    if not (0 < x < 1 and 0 < t < 1):
        raise SNLabError(f"G_x needs 0 < x, t < 1, got x={x}, t={t}", "argument", "hlproc")


def gx_pmf(ell: int, x, t) -> Fraction:
    """G_x(l) = (1-x)/(1-tx) (1-t)^{[l>0]} x^l"""
    x, t = Fraction(x), Fraction(t)
    _check_xt(x, t)
    if ell < 0:
        return Fraction(0)
    out = (1 - x) / (1 - t * x) * x ** ell
    return out * (1 - t) if ell > 0 else out


def gx_mean(x, t) -> Fraction:
    x, t = Fraction(x), Fraction(t)
    return x * (1 - t) / ((1 - t * x) * (1 - x))


def _geometric(r: Fraction, rng: np.random.Generator) -> int:
    # P(k) = (1-r) r^k, exact inverse CDF
    u = ExactUniform(rng)
    k, tail = 0, r
    while not u.less_than(1 - tail):
        k += 1
        tail *= r
    return k


def sample_gx(x, t, rng: np.random.Generator) -> int:
    """Exact draw from G_x"""
    x, t = Fraction(x), Fraction(t)
    _check_xt(x, t)
    u = ExactUniform(rng)
    if u.less_than((1 - x) / (1 - t * x)):
        return 0
    # P(Z >= l) = (1-t) x^l / (1-tx) for l >= 1
    scale = (1 - t) / (1 - t * x)
    ell, power = 1, x * x
    while not u.less_than(1 - scale * power):
        ell += 1
        power *= x
    return ell


# ---------------------------------------------------------------------------
# Insertion

def insert(impulses: Sequence[int], lam) -> Signature:
    """iota(a; lam): particle i jumps a_i, is blocked by old lam_{i-1} and hands the rest on"""
    lam = lam if isinstance(lam, Signature) else Signature(lam)
    a = [int(v) for v in impulses]
    n = len(lam)
    if len(a) != n:
        raise SNLabError(f"need {n} impulses, got {len(a)}", "argument", "hlproc")
    if any(v < 0 for v in a):
        raise SNLabError(f"impulses must be nonnegative, got {a}", "argument", "hlproc")
    out = [0] * n
    for i in range(n - 1, -1, -1):
        best, acc = None, 0
        for j in range(i, n):
            acc += a[j]
            cand = lam[j] + acc
            best = cand if best is None else max(best, cand)
        out[i] = best if i == 0 else min(lam[i - 1], best)
    return Signature(out)


def _arrays_finite(n: int, xhat: GeneralizedVariable, t: Fraction, rng, m: int) -> List[List[int]]:
    arrays = []
    for j in range(m):
        arrays.append([sample_gx(xhat.x * t ** (j + i), t, rng) for i in range(n)])
    return arrays


def _arrays_index_skipping(n: int, xhat: GeneralizedVariable, t: Fraction, rng) -> List[List[int]]:
    # for each coordinate, jump straight to the next index with a nonzero draw
    hits: Dict[int, List[int]] = {}
    for i in range(n):
        y = xhat.x * t ** i
        J = 0
        while True:
            u = ExactUniform(rng)
            floor = 1 - t ** J * y
            if u.less_than(floor):
                break
            # P(first nonzero >= i') = (1 - t^J y)/(1 - t^i' y)
            first = J
            while u.less_than(floor / (1 - t ** (first + 1) * y)):
                first += 1
            value = 1 + _geometric(t ** first * y, rng)
            hits.setdefault(first, [0] * n)[i] = value
            J = first + 1
    return [hits[j] for j in sorted(hits)]


def impulse_arrays(n: int, xhat: GeneralizedVariable, t, rng: np.random.Generator) -> List[List[int]]:
    """Impulse arrays of one generalized variable in insertion order; all-zero arrays may be dropped"""
    t = Fraction(t)
    if xhat.is_infinite:
        return _arrays_index_skipping(n, xhat, t, rng)
    return _arrays_finite(n, xhat, t, rng, int(xhat.m))


def step_generalized(lam, xhat: GeneralizedVariable, t, rng: np.random.Generator) -> Signature:
    """One step of the Cauchy dynamics with specialization xhat"""
    lam = lam if isinstance(lam, Signature) else Signature(lam)
    for arr in impulse_arrays(len(lam), xhat, t, rng):
        lam = insert(arr, lam)
    return lam


def step_generalized_truncated(lam, xhat: GeneralizedVariable, t, rng: np.random.Generator) -> Signature:
    """Brute-force reference: insert every array until t^j x < 1e-12"""
    lam = lam if isinstance(lam, Signature) else Signature(lam)
    t = Fraction(t)
    if not xhat.is_infinite:
        return step_generalized(lam, xhat, t, rng)
    m = 0
    while xhat.x * t ** m >= TRUNCATION_CUTOFF:
        m += 1
    for arr in _arrays_finite(len(lam), xhat, t, rng, m):
        lam = insert(arr, lam)
    return lam


def noninteracting_step(v: Sequence[int], xhat: GeneralizedVariable, t, rng: np.random.Generator) -> Tuple[int, ...]:
    """Coordinatewise sum of the same impulses, no blocking"""
    out = list(int(c) for c in v)
    for arr in impulse_arrays(len(out), xhat, t, rng):
        out = [c + a for c, a in zip(out, arr)]
    return tuple(out)


# ---------------------------------------------------------------------------
# Exact kernels

def _principal_values(n: int, t: Fraction) -> List[Fraction]:
    return [t ** i for i in range(n)]


def _kernel_direct(lam: Signature, nu: Signature, x: Fraction, t: Fraction) -> Fraction:
    n = len(lam)
    if not interlaces_Q(lam, nu):
        return Fraction(0)
    out = (1 - x) / (1 - t ** n * x)
    ml, mn = lam.multiplicities(), nu.multiplicities()
    for j, m in ml.items():
        if m == mn.get(j, 0) + 1:
            out *= 1 - t ** m
    for i in range(n):
        out *= (x * t ** i) ** (nu[i] - lam[i])
    return out


def _kernel_symmetric(lam: Signature, nu: Signature, x: Fraction, t: Fraction) -> Fraction:
    n = len(lam)
    params = HLParams(t)
    ones = _principal_values(n, t)
    q = hl_skew(nu, lam, [x], "Q", params)
    if q == 0:
        return Fraction(0)
    return q * hl_eval(nu, ones, params) / (hl_eval(lam, ones, params) * cauchy_kernel([x], ones, params))


def cauchy_kernel_prob_forms(lam, nu, x, t) -> Tuple[Fraction, Fraction]:
    """(direct multiplicity form, skew-Q / principal form) of Pr(lam -> nu)"""
    lam = lam if isinstance(lam, Signature) else Signature(lam)
    nu = nu if isinstance(nu, Signature) else Signature(nu)
    if len(lam) != len(nu):
        raise SNLabError("kernel needs signatures of equal length", "argument", "hlproc")
    x, t = Fraction(x), Fraction(t)
    _check_xt(x, t)
    return _kernel_direct(lam, nu, x, t), _kernel_symmetric(lam, nu, x, t)


def cauchy_kernel_prob(lam, nu, x, t) -> Fraction:
    """Pr(iota(X; lam) = nu) with X_i ~ G_{x t^{i-1}}"""
    direct, symmetric = cauchy_kernel_prob_forms(lam, nu, x, t)
    if direct != symmetric:
        raise SNLabError(f"kernel forms disagree at {lam} -> {nu}: {direct} vs {symmetric}", "internal", "hlproc")
    return direct


def _grown(lam: Signature, growth: int, strips: Count):
    # nu reachable from lam by `strips` Q-steps with |nu| - |lam| = growth
    n = len(lam)

    def rec(i: int, room: int, acc: Tuple[int, ...]):
        if i == n:
            if room == 0:
                yield Signature(acc)
            return
        hi = lam[i] + room
        if i > 0:
            hi = min(hi, acc[i - 1])
        if strips != math.inf and i - strips >= 0:
            hi = min(hi, lam[i - int(strips)])
        for v in range(lam[i], hi + 1):
            yield from rec(i + 1, room - (v - lam[i]), acc + (v,))

    yield from rec(0, growth, ())


def kernel_support(lam, x, t, tol: float = 1e-12) -> ExactLaw:
    """Kernel law from lam, enumerated by growth until the exact tail is below tol"""
    lam = lam if isinstance(lam, Signature) else Signature(lam)
    law = ExactLaw()
    total = Fraction(0)
    for g in range(MAX_GROWTH + 1):
        for nu in _grown(lam, g, 1):
            p = cauchy_kernel_prob(lam, nu, x, t)
            if p:
                law[nu] = p
                total += p
        if 1 - total < tol:
            break
    else:
        raise SNLabError(f"kernel tail still above {tol} after growth {MAX_GROWTH}", "resource", "hlproc")
    law.tail = 1 - total
    return law


def generalized_kernel_prob(lam, nu, xhat: GeneralizedVariable, t) -> Fraction:
    """Pr(lam -> nu) for a finite generalized variable: Q_{nu/lam}(xhat) P_nu(1..) / (P_lam(1..) Pi(xhat; 1..))"""
    lam = lam if isinstance(lam, Signature) else Signature(lam)
    nu = nu if isinstance(nu, Signature) else Signature(nu)
    t = Fraction(t)
    params = HLParams(t)
    n = len(lam)
    values = xhat.values(t)
    q = hl_skew(nu, lam, values, "Q", params)
    if q == 0:
        return Fraction(0)
    ones = _principal_values(n, t)
    return q * principal_P(nu, 1, params) / (principal_P(lam, 1, params) * cauchy_kernel(values, ones, params))


# ---------------------------------------------------------------------------
# Measures

def _principal_P1(lam: Signature, params: HLParams) -> Fraction:
    return principal_P(lam, 1, params)


def product_convolution_dist(lam, mu, t) -> ExactLaw:
    """Law of SN(AB) for independent bi-invariant A, B with SN lam and mu"""
    lam = lam if isinstance(lam, Signature) else Signature(lam)
    mu = mu if isinstance(mu, Signature) else Signature(mu)
    params = HLParams(Fraction(t))
    coeffs = structure_coeffs(lam, mu, params)
    denom = _principal_P1(lam, params) * _principal_P1(mu, params)
    law = ExactLaw({nu: c * _principal_P1(nu, params) / denom for nu, c in coeffs.items() if c})
    if law.total != 1:
        raise SNLabError(f"product law sums to {law.total}", "internal", "hlproc")
    return law


def corner_sn_measure(n: int, m: int, N: Count, t, tol: float = 1e-9) -> ExactLaw:
    """SN law of the top-left n x m corner of Haar GL_N (N = inf: iid additive Haar entries)"""
    t = Fraction(t)
    params = HLParams(t)
    if not (1 <= n <= m and (N == math.inf or m <= N)):
        raise SNLabError(f"need 1 <= n <= m <= N, got n={n}, m={m}, N={N}", "argument", "hlproc")
    base = t ** (m - n + 1)
    nvars = math.inf if N == math.inf else int(N) - m
    ones = _principal_values(n, t)
    if nvars == math.inf:
        norm = cauchy_kernel_geometric(ones, base, t)
    else:
        norm = cauchy_kernel(ones, [base * t ** j for j in range(nvars)], params)
    law = ExactLaw()
    total = Fraction(0)
    for size in range(MAX_GROWTH + 1):
        for lam in signatures_of_size(n, size):
            p = _principal_P1(lam, params) * principal_Q(lam, base, params, nvars) / norm
            if p:
                law[lam] = p
                total += p
        if 1 - total < tol:
            break
    else:
        raise SNLabError(f"corner law tail still above {tol}", "resource", "hlproc")
    law.tail = 1 - total
    return law


def matrix_step_prob(lam, nu, N: int, t) -> Fraction:
    """Pr(SN(A B) = nu | SN(B) = lam), A the n x n corner of Haar GL_N, via corner law and product law"""
    lam = lam if isinstance(lam, Signature) else Signature(lam)
    nu = nu if isinstance(nu, Signature) else Signature(nu)
    t = Fraction(t)
    params = HLParams(t)
    n = len(lam)
    growth = nu.size - lam.size
    if growth < 0:
        return Fraction(0)
    base = t
    nvars = int(N) - n
    norm = cauchy_kernel(_principal_values(n, t), [base * t ** j for j in range(nvars)], params)
    total = Fraction(0)
    for mu in signatures_of_size(n, growth):
        p_mu = _principal_P1(mu, params) * principal_Q(mu, base, params, nvars) / norm
        if p_mu:
            total += p_mu * product_convolution_dist(lam, mu, t).get(nu, Fraction(0))
    return total


def hl_measure(avals: Sequence, bvals: Sequence, t, K: int) -> ExactLaw:
    """P_lam(a) Q_lam(b) / Pi(a; b) for nonnegative lam with |lam| <= K"""
    params = HLParams(Fraction(t))
    norm = cauchy_kernel(avals, bvals, params)
    law = ExactLaw()
    for size in range(K + 1):
        for lam in signatures_of_size(len(avals), size):
            p = hl_eval(lam, avals, params) * hl_eval_Q(lam, bvals, params) / norm
            if p:
                law[lam] = p
    law.tail = 1 - law.total
    return law


def corners_kernel_dist(lam, n: int, N: int, k_or_d: int, mode: str, t, tol: float = 1e-9) -> ExactLaw:
    """SN law after removing k columns (column mode) or d rows (row mode) of an n x N Haar row block with SN lam"""
    lam = lam if isinstance(lam, Signature) else Signature(lam)
    t = Fraction(t)
    params = HLParams(t)
    if len(lam) != n or not lam.is_nonnegative:
        raise SNLabError(f"lam must be a nonnegative signature of length n = {n}", "argument", "hlproc")
    if mode == "row":
        d = k_or_d
        if not 0 <= d <= n:
            raise SNLabError(f"row mode needs 0 <= d <= n, got d={d}", "argument", "hlproc")
        if d == 0:
            return ExactLaw({lam: Fraction(1)})
        ones = _principal_values(n, t)
        denom = hl_eval(lam, ones, params)
        law = ExactLaw()
        lower = Signature(lam.parts[d:])
        upper = Signature(lam.parts[: n - d])
        for mu in dominated_between(lower, upper):
            p = hl_skew(lam, mu, ones[:d], "P", params) * hl_eval(mu, ones[d:], params) / denom
            if p:
                law[mu] = p
        if law.total != 1:
            raise SNLabError(f"row corner law sums to {law.total}", "internal", "hlproc")
        return law
    if mode == "column":
        k = k_or_d
        if not 0 <= k <= N - n:
            raise SNLabError(f"column mode needs 0 <= k <= N - n, got k={k}", "argument", "hlproc")
        if k == 0:
            return ExactLaw({lam: Fraction(1)})
        inv = [t ** -j for j in range(k)]
        tops = [t ** (N - n + i) for i in range(n)]
        denom = hl_eval(lam, tops, params) * cauchy_kernel(inv, tops, params)
        law = ExactLaw()
        total = Fraction(0)
        for g in range(MAX_GROWTH + 1):
            for nu in _grown(lam, g, k):
                p = hl_skew(nu, lam, inv, "Q", params) * hl_eval(nu, tops, params) / denom
                if p:
                    law[nu] = p
                    total += p
            if 1 - total < tol:
                break
        else:
            raise SNLabError(f"column corner tail still above {tol}", "resource", "hlproc")
        law.tail = 1 - total
        return law
    raise SNLabError(f"unknown corner mode '{mode}'", "argument", "hlproc")


# ---------------------------------------------------------------------------
# Processes

def run_process(n: int, spec: Specialization, k: int, rng: np.random.Generator) -> Trajectory:
    """lambda(0) = 0, then one step_generalized per generalized variable (specialization cycled)"""
    if n < 1 or k < 1:
        raise SNLabError(f"need n >= 1 and k >= 1, got n={n}, k={k}", "argument", "hlproc")
    lam = zeros(n)
    traj = Trajectory(n, [lam], {"source": "particle", "spec": spec.to_json()})
    for j in range(k):
        lam = step_generalized(lam, spec.at(j), spec.t, rng)
        traj.append(lam)
    return traj


def run_noninteracting(n: int, spec: Specialization, k: int, rng: np.random.Generator) -> Trajectory:
    """Reference walk v(0) = 0 with independent coordinates"""
    if n < 1 or k < 1:
        raise SNLabError(f"need n >= 1 and k >= 1, got n={n}, k={k}", "argument", "hlproc")
    v: Tuple[int, ...] = (0,) * n
    traj = Trajectory(n, [v], {"source": "noninteracting", "spec": spec.to_json()})
    for j in range(k):
        v = noninteracting_step(v, spec.at(j), spec.t, rng)
        traj.append(v)
    return traj
