"""
Exact Hall-Littlewood engine.

Polynomials P_lambda, Q_lambda and their skew versions are evaluated by summing
over Gelfand-Tsetlin patterns through the one-variable branching rule, memoized
on (signature, remaining values). General-q Macdonald branching coefficients are
reduced to finite q-Pochhammer products so everything stays in Fractions.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import permutations
from typing import Dict, Iterator, List, Sequence, Tuple, Union

import mpmath

from snlab.core.errors import SNLabError
from snlab.core.laurent import LaurentPolynomial
from snlab.core.signature import (
    Signature,
    interlaces_P,
    interlaces_Q,
    p_branches,
    q_predecessors,
    signatures_of_size,
    zeros,
)

Number = Union[int, Fraction]

MAX_VARIABLES = 6
MAX_PART_SIZE = 20
MAX_PRODUCT_DEGREE = 48


@dataclass(frozen=True)
class HLParams:
    """Parameters (q, t); q = 0 is the Hall-Littlewood case"""
    t: Fraction
    q: Fraction = Fraction(0)

    def __post_init__(self):
        t, q = Fraction(self.t), Fraction(self.q)
        if not 0 < t < 1:
            raise SNLabError(f"t must lie in (0,1), got {t}", "domain", "symfunc")
        if not 0 <= q < 1:
            raise SNLabError(f"q must lie in [0,1), got {q}", "domain", "symfunc")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "q", q)

    @property
    def is_hl(self) -> bool:
        return self.q == 0


def _sig(x) -> Signature:
    return x if isinstance(x, Signature) else Signature(x)


def _fracs(values: Sequence[Number]) -> Tuple[Fraction, ...]:
    return tuple(Fraction(v) for v in values)


# ---------------------------------------------------------------------------
# q-Pochhammer symbols

def qpoch(a: Number, q: Number, n: int) -> Fraction:
    """(a;q)_n for finite n, exact"""
    a, q = Fraction(a), Fraction(q)
    out = Fraction(1)
    power = Fraction(1)
    for _ in range(n):
        out *= 1 - a * power
        power *= q
    return out


def pochhammer_inf(a: float, q: float, tol: float = 1e-12) -> Tuple[float, float]:
    """(a;q)_inf truncated once |a q^m| < tol; returns (value, relative tail bound)"""
    a, q = float(a), float(q)
    if abs(q) >= 1:
        raise SNLabError(f"(a;q)_inf needs |q| < 1, got q={q}", "domain", "symfunc")
    value, term = 1.0, a
    while abs(term) >= tol:
        value *= 1.0 - term
        term *= q
    # remaining factors differ from 1 by at most sum |a q^m| = |term|/(1-|q|)
    tail = abs(term) / (1.0 - abs(q))
    return value, tail


def pochhammer_with_tail(a: Number, q: Number, n: Union[int, float], tol: float = 1e-12) -> Tuple[Union[Fraction, float], float]:
    """(a;q)_n with the relative truncation bound (0 for finite n)"""
    if n == math.inf:
        return pochhammer_inf(a, q, tol)
    if n < 0:
        raise SNLabError("pochhammer length must be nonnegative", "argument", "symfunc")
    return qpoch(a, q, int(n)), 0.0


def pochhammer(a: Number, q: Number, n: Union[int, float], tol: float = 1e-12) -> Union[Fraction, float]:
    """(a;q)_n; exact for finite n, truncated float product for n = inf"""
    return pochhammer_with_tail(a, q, n, tol)[0]


def pochhammer_mp(a: Number, q: Number) -> float:
    """(a;q)_inf through mpmath; float cross-check of the truncated product"""
    return float(mpmath.qp(mpmath.mpf(float(a)), mpmath.mpf(float(q))))


# ---------------------------------------------------------------------------
# Branching coefficients

def psi_hl(lam: Signature, mu: Signature, t: Fraction) -> Fraction:
    """psi_{lam/mu}(0,t) = prod over k with m_k(mu) = m_k(lam)+1 of (1 - t^{m_k(mu)})"""
    if not interlaces_P(lam, mu):
        return Fraction(0)
    ml, mm = lam.multiplicities(), mu.multiplicities()
    out = Fraction(1)
    for k, m in mm.items():
        if m == ml.get(k, 0) + 1:
            out *= 1 - t ** m
    return out


def phi_hl(lam: Signature, nu: Signature, t: Fraction) -> Fraction:
    """phi_{lam/nu}(0,t) = prod over k with m_k(lam) = m_k(nu)+1 of (1 - t^{m_k(lam)})"""
    if not interlaces_Q(nu, lam):
        return Fraction(0)
    ml, mn = lam.multiplicities(), nu.multiplicities()
    out = Fraction(1)
    for k, m in ml.items():
        if m == mn.get(k, 0) + 1:
            out *= 1 - t ** m
    return out


def _shifted_ratio(z: Fraction, q: Fraction, a: int, c: int) -> Fraction:
    # (z q^a; q)_inf / (z q^c; q)_inf for integers a, c >= 0
    if a <= c:
        return qpoch(z * q ** a, q, c - a)
    return 1 / qpoch(z * q ** c, q, a - c)


def _f_ratio(s: int, a: int, c: int, q: Fraction, t: Fraction) -> Fraction:
    # f(t^s q^a) / f(t^s q^c) with f(u) = (tu;q)_inf / (qu;q)_inf
    return _shifted_ratio(t ** (s + 1), q, a, c) * _shifted_ratio(t ** s * q, q, c, a)


def macdonald_branch(outer, inner, kind: str, q: Number, t: Number) -> Fraction:
    """psi_{outer/inner}(q,t) or phi_{outer/inner}(q,t); 0 off interlacing"""
    lam, mu = _sig(outer), _sig(inner)
    q, t = Fraction(q), Fraction(t)
    HLParams(t, q)
    kind = {"ψ": "psi", "φ": "phi"}.get(kind, kind)
    if kind == "psi":
        if not interlaces_P(lam, mu):
            return Fraction(0)
        n = len(lam)
        out = Fraction(1)
        for i in range(n - 1):
            for j in range(i, n - 1):
                s = j - i
                out *= _f_ratio(s, mu[i] - mu[j], lam[i] - mu[j], q, t)
                out *= _f_ratio(s, lam[i] - lam[j + 1], mu[i] - lam[j + 1], q, t)
        return out
    if kind == "phi":
        nu = mu
        if not interlaces_Q(nu, lam):
            return Fraction(0)
        n = len(lam)
        out = Fraction(1)
        for i in range(n):
            for j in range(i, n):
                out *= _f_ratio(j - i, lam[i] - lam[j], lam[i] - nu[j], q, t)
            for j in range(i, n - 1):
                out *= _f_ratio(j - i, nu[i] - nu[j + 1], nu[i] - lam[j + 1], q, t)
        return out
    raise SNLabError(f"unknown branching kind '{kind}'", "argument", "symfunc")


def psi(lam: Signature, mu: Signature, params: HLParams) -> Fraction:
    if params.is_hl:
        return psi_hl(lam, mu, params.t)
    return macdonald_branch(lam, mu, "psi", params.q, params.t)


def phi(lam: Signature, nu: Signature, params: HLParams) -> Fraction:
    if params.is_hl:
        return phi_hl(lam, nu, params.t)
    return macdonald_branch(lam, nu, "phi", params.q, params.t)


# ---------------------------------------------------------------------------
# Gelfand-Tsetlin patterns

@dataclass(frozen=True)
class GTPattern:
    """Interlacing chain rows[0] < rows[1] < ... (bottom to top)"""
    rows: Tuple[Signature, ...]
    kind: str = "P"

    def __post_init__(self):
        for lower, upper in zip(self.rows, self.rows[1:]):
            ok = interlaces_P(upper, lower) if self.kind == "P" else interlaces_Q(lower, upper)
            if not ok:
                raise SNLabError(f"rows {lower} and {upper} do not interlace", "validation", "symfunc")

    def weight(self, values: Sequence[Number]) -> Fraction:
        out = Fraction(1)
        for x, lower, upper in zip(values, self.rows, self.rows[1:]):
            out *= Fraction(x) ** (upper.size - lower.size)
        return out

    def coefficient(self, params: HLParams) -> Fraction:
        branch = psi if self.kind == "P" else phi
        out = Fraction(1)
        for lower, upper in zip(self.rows, self.rows[1:]):
            out *= branch(upper, lower, params)
        return out


def gt_patterns(lam, inner, steps: int, kind: str = "P") -> Iterator[GTPattern]:
    """All patterns from inner up to lam in the given number of steps"""
    lam, inner = _sig(lam), _sig(inner)

    def rec(top: Signature, k: int) -> Iterator[Tuple[Signature, ...]]:
        if k == 0:
            if top == inner:
                yield (top,)
            return
        below = p_branches(top) if kind == "P" else q_predecessors(top, inner)
        for kappa in below:
            for chain in rec(kappa, k - 1):
                yield chain + (top,)

    for rows in rec(lam, steps):
        yield GTPattern(rows, kind)


def gt_sum(lam, inner, values: Sequence[Number], kind: str, params: HLParams) -> Fraction:
    """Brute-force pattern sum; oracle for hl_skew"""
    return sum(
        (g.coefficient(params) * g.weight(values) for g in gt_patterns(lam, inner, len(values), kind)),
        Fraction(0),
    )


# ---------------------------------------------------------------------------
# Evaluation

def _check_caps(lam: Signature, where: str):
    if len(lam) > MAX_VARIABLES:
        raise SNLabError(f"{where}: {len(lam)} variables exceeds the cap {MAX_VARIABLES}", "resource", "symfunc")


@lru_cache(maxsize=200_000)
def _p_eval(parts: Tuple[int, ...], values: Tuple[Fraction, ...], params: HLParams) -> Fraction:
    # P_lam(values) for nonnegative lam with len(values) = len(lam)
    if not parts:
        return Fraction(1)
    lam = Signature(parts)
    x = values[-1]
    total = Fraction(0)
    for mu in p_branches(lam):
        c = psi(lam, mu, params)
        if c == 0:
            continue
        total += c * x ** (lam.size - mu.size) * _p_eval(mu.parts, values[:-1], params)
    return total


def _shift_to_nonnegative(lam: Signature) -> Tuple[Signature, int]:
    d = lam[-1] if lam.parts and lam[-1] < 0 else 0
    return lam.shift(-d), d


def _product_power(values: Sequence[Fraction], d: int) -> Fraction:
    out = Fraction(1)
    for v in values:
        if v == 0 and d < 0:
            raise SNLabError("negative power of a zero value", "domain", "symfunc")
        out *= v ** d
    return out


def hl_eval(lam, values: Sequence[Number], params: HLParams) -> Fraction:
    """P_lam(values; q, t) by GT branching"""
    lam = _sig(lam)
    if len(values) != len(lam):
        raise SNLabError(f"P_{lam.parts} needs {len(lam)} values, got {len(values)}", "argument", "symfunc")
    _check_caps(lam, "hl_eval")
    vals = _fracs(values)
    base, d = _shift_to_nonnegative(lam)
    return _product_power(vals, d) * _p_eval(base.parts, vals, params)


def b_lambda(lam: Signature, t: Fraction) -> Fraction:
    """Q_lam / P_lam at q = 0; zero parts do not contribute"""
    out = Fraction(1)
    for k, m in lam.multiplicities().items():
        if k != 0:
            out *= qpoch(t, t, m)
    return out


def hl_eval_Q(lam, values: Sequence[Number], params: HLParams) -> Fraction:
    """Q_lam(values) for nonnegative lam, any number of values"""
    lam = _sig(lam)
    if not lam.is_nonnegative:
        raise SNLabError("Q_lam needs a nonnegative signature", "argument", "symfunc")
    if params.is_hl and len(values) >= len(lam):
        return b_lambda(lam, params.t) * hl_eval(lam.pad(len(values)), values, params)
    if params.is_hl and lam.length > len(values):
        return Fraction(0)
    return hl_skew(lam, zeros(len(lam)), values, "Q", params)


@lru_cache(maxsize=200_000)
def _skew_p(lam: Tuple[int, ...], mu: Tuple[int, ...], values: Tuple[Fraction, ...], params: HLParams) -> Fraction:
    if not values:
        return Fraction(1) if lam == mu else Fraction(0)
    top = Signature(lam)
    k = len(values)
    x = values[-1]
    total = Fraction(0)
    for kappa in p_branches(top):
        # kappa must still reach mu in k-1 steps
        if any(kappa[i] < mu[i] for i in range(len(mu))):
            continue
        if any(kappa[i + k - 1] > mu[i] for i in range(len(mu)) if i + k - 1 < len(kappa)):
            continue
        c = psi(top, kappa, params)
        if c == 0:
            continue
        total += c * x ** (top.size - kappa.size) * _skew_p(kappa.parts, mu, values[:-1], params)
    return total


@lru_cache(maxsize=200_000)
def _skew_q(lam: Tuple[int, ...], nu: Tuple[int, ...], values: Tuple[Fraction, ...], params: HLParams) -> Fraction:
    if not values:
        return Fraction(1) if lam == nu else Fraction(0)
    top, floor = Signature(lam), Signature(nu)
    x = values[-1]
    total = Fraction(0)
    for kappa in q_predecessors(top, floor):
        c = phi(top, kappa, params)
        if c == 0:
            continue
        total += c * x ** (top.size - kappa.size) * _skew_q(kappa.parts, nu, values[:-1], params)
    return total


def hl_skew(lam, inner, values: Sequence[Number], kind: str, params: HLParams) -> Fraction:
    """Skew P_{lam/inner} or Q_{lam/inner} at the given values"""
    lam, inner = _sig(lam), _sig(inner)
    vals = _fracs(values)
    if kind == "P":
        if len(lam) != len(inner) + len(vals):
            raise SNLabError(
                f"P_{lam.parts}/{inner.parts} needs {len(lam) - len(inner)} values, got {len(vals)}",
                "argument", "symfunc",
            )
        _check_caps(lam, "hl_skew")
        d = min([p for p in lam.parts + inner.parts] + [0])
        return _product_power(vals, d) * _skew_p(lam.shift(-d).parts, inner.shift(-d).parts, vals, params)
    if kind == "Q":
        if len(lam) != len(inner):
            raise SNLabError(f"Q_{lam.parts}/{inner.parts} needs equal lengths", "argument", "symfunc")
        if any(inner[i] > lam[i] for i in range(len(lam))):
            return Fraction(0)
        _check_caps(lam, "hl_skew")
        return _skew_q(lam.parts, inner.parts, vals, params)
    raise SNLabError(f"unknown skew kind '{kind}'", "argument", "symfunc")


def hl_symmetrize(lam, values: Sequence[Number], t: Number) -> Fraction:
    """P_lam by the symmetrization formula; values must be distinct"""
    lam = _sig(lam)
    vals = _fracs(values)
    t = Fraction(t)
    n = len(lam)
    if len(set(vals)) != n:
        raise SNLabError("symmetrization needs distinct values", "domain", "symfunc")
    v_lam = Fraction(1)
    for m in lam.multiplicities().values():
        v_lam *= qpoch(t, t, m) / (1 - t) ** m
    total = Fraction(0)
    for perm in permutations(range(n)):
        x = [vals[j] for j in perm]
        term = Fraction(1)
        for i in range(n):
            term *= x[i] ** lam[i]
        for i in range(n):
            for j in range(i + 1, n):
                term *= (x[i] - t * x[j]) / (x[i] - x[j])
        total += term
    return total / v_lam


# ---------------------------------------------------------------------------
# Principal specializations

def principal_P(lam, base: Number, params: HLParams) -> Fraction:
    """P_lam(x, xt, ..., xt^{n-1}) = x^|lam| t^n(lam) (t;t)_n / prod_k (t;t)_{m_k}"""
    if not params.is_hl:
        raise SNLabError("principal formulas are implemented at q = 0", "domain", "symfunc")
    lam = _sig(lam)
    t, x = params.t, Fraction(base)
    n = len(lam)
    nonneg, d = _shift_to_nonnegative(lam)
    value = x ** nonneg.size * t ** nonneg.n_stat * qpoch(t, t, n)
    for m in nonneg.multiplicities().values():
        value /= qpoch(t, t, m)
    if d:
        value *= _product_power([x * t ** i for i in range(n)], d)
    return value


def principal_Q(lam, base: Number, params: HLParams, nvars: Union[int, float, None] = None) -> Fraction:
    """Q_lam(a, at, ..., at^{k-1}) = a^|lam| t^n(lam) (t;t)_k/(t;t)_{k-l(lam)}; k may be inf"""
    if not params.is_hl:
        raise SNLabError("principal formulas are implemented at q = 0", "domain", "symfunc")
    lam = _sig(lam)
    if not lam.is_nonnegative:
        raise SNLabError("principal_Q needs a nonnegative signature", "argument", "symfunc")
    t, a = params.t, Fraction(base)
    k = len(lam) if nvars is None else nvars
    ell = lam.length
    if ell > k:
        return Fraction(0)
    value = a ** lam.size * t ** lam.n_stat
    if k != math.inf:
        k = int(k)
        value *= qpoch(t, t, k) / qpoch(t, t, k - ell)
    return value


# ---------------------------------------------------------------------------
# Cauchy kernel

def cauchy_kernel_with_tail(
    avals: Sequence[Number], bvals: Sequence[Number], params: HLParams, tol: float = 1e-12
) -> Tuple[Union[Fraction, float], float]:
    """Pi_{(q,t)}(a; b) and a bound on its relative truncation error (0 when exact)"""
    out: Union[Fraction, float] = Fraction(1)
    log_err = 0.0
    for a in avals:
        for b in bvals:
            z = Fraction(a) * Fraction(b)
            if abs(z) >= 1:
                raise SNLabError(f"Cauchy kernel diverges: a*b = {z} >= 1", "divergence", "symfunc")
            if params.is_hl:
                out *= (1 - params.t * z) / (1 - z)
                continue
            num, num_tail = pochhammer_with_tail(params.t * z, params.q, math.inf, tol)
            den, den_tail = pochhammer_with_tail(z, params.q, math.inf, tol)
            out = float(out) * num / den
            # dropped factors multiply each product by exp(+-r/(1-r)) at most
            log_err += num_tail / (1.0 - num_tail) + den_tail / (1.0 - den_tail)
    return out, math.expm1(log_err)


def cauchy_kernel(avals: Sequence[Number], bvals: Sequence[Number], params: HLParams, tol: float = 1e-12):
    """Pi_{(q,t)}(a; b) = prod (t a_i b_j; q)_inf / (a_i b_j; q)_inf"""
    return cauchy_kernel_with_tail(avals, bvals, params, tol)[0]


def cauchy_kernel_geometric(avals: Sequence[Number], base: Number, t: Number) -> Fraction:
    """Pi_{(0,t)}(a; base, base t, base t^2, ...), telescoped to prod 1/(1 - a_i base)"""
    out = Fraction(1)
    for a in avals:
        z = Fraction(a) * Fraction(base)
        if abs(z) >= 1:
            raise SNLabError(f"Cauchy kernel diverges: a*base = {z} >= 1", "divergence", "symfunc")
        out /= 1 - z
    return out


def cauchy_partial_sums(avals: Sequence[Number], bvals: Sequence[Number], params: HLParams, K: int) -> List[Fraction]:
    """Partial sums of sum_lam P_lam(a) Q_lam(b) over |lam| <= 0..K"""
    n = len(avals)
    sums: List[Fraction] = []
    running = Fraction(0)
    for size in range(K + 1):
        for lam in signatures_of_size(n, size):
            running += hl_eval(lam, avals, params) * hl_eval_Q(lam, bvals, params)
        sums.append(running)
    return sums


# ---------------------------------------------------------------------------
# Polynomials and structure coefficients

@lru_cache(maxsize=4096)
def _p_poly(parts: Tuple[int, ...], params: HLParams) -> LaurentPolynomial:
    n = len(parts)
    if n == 0:
        return LaurentPolynomial.constant(0)
    lam = Signature(parts)
    out = LaurentPolynomial(n)
    for mu in p_branches(lam):
        c = psi(lam, mu, params)
        if c == 0:
            continue
        lower = _p_poly(mu.parts, params)
        power = lam.size - mu.size
        for exp, coef in lower.terms.items():
            out.add_term(exp + (power,), coef * c)
    return out


def hl_polynomial(lam, params: HLParams) -> LaurentPolynomial:
    """P_lam(x_1..x_n; q, t) as a Laurent polynomial"""
    lam = _sig(lam)
    _check_caps(lam, "hl_polynomial")
    base, d = _shift_to_nonnegative(lam)
    poly = _p_poly(base.parts, params)
    return poly.shift((d,) * len(lam)) if d else poly


def expand_in_P(f: LaurentPolynomial, params: HLParams) -> Dict[Signature, Fraction]:
    """Coefficients c_lam with f = sum c_lam P_lam"""
    if not f.is_symmetric():
        raise SNLabError("expand_in_P needs a symmetric polynomial", "validation", "symfunc")
    rest = f.copy()
    out: Dict[Signature, Fraction] = {}
    guard = 0
    while rest:
        guard += 1
        if guard > 1_000_000:
            raise SNLabError("expand_in_P did not terminate", "internal", "symfunc")
        lead = rest.leading_exponent()
        lam = Signature(lead)
        c = rest.coefficient(lead)
        out[lam] = out.get(lam, Fraction(0)) + c
        rest = rest - hl_polynomial(lam, params) * c
    return out


def structure_coeffs(lam, mu, params: HLParams) -> Dict[Signature, Fraction]:
    """c^nu_{lam,mu} with P_lam P_mu = sum_nu c^nu P_nu"""
    lam, mu = _sig(lam), _sig(mu)
    if len(lam) != len(mu):
        raise SNLabError("structure_coeffs needs signatures of equal length", "argument", "symfunc")
    _check_caps(lam, "structure_coeffs")
    a, da = _shift_to_nonnegative(lam)
    b, db = _shift_to_nonnegative(mu)
    if a.size > MAX_PART_SIZE or b.size > MAX_PART_SIZE:
        raise SNLabError(f"|lam| or |mu| above {MAX_PART_SIZE}", "resource", "symfunc")
    if a.size + b.size > MAX_PRODUCT_DEGREE:
        raise SNLabError(f"product degree {a.size + b.size} above {MAX_PRODUCT_DEGREE}", "resource", "symfunc")
    return dict(_structure_coeffs(a.parts, b.parts, params, da + db))


@lru_cache(maxsize=1024)
def _structure_coeffs(a: Tuple[int, ...], b: Tuple[int, ...], params: HLParams, d: int) -> Dict[Signature, Fraction]:
    if not any(b):
        return {Signature(a).shift(d): Fraction(1)}
    if not any(a):
        return {Signature(b).shift(d): Fraction(1)}
    product = _p_poly(a, params) * _p_poly(b, params)
    coeffs = expand_in_P(product, params)
    return {nu.shift(d): c for nu, c in coeffs.items()}
