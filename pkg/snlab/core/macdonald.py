"""
Limit checks built on structure coefficients: coefficient stabilization of
P_{lam(D)} as the gaps between blocks grow, and the large-D limits of
structure-coefficient measures with one argument pushed to infinity.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from snlab.core.errors import SNLabError
from snlab.core.laurent import LaurentPolynomial, potential
from snlab.core.signature import Signature
from snlab.core.symfunc import (
    HLParams,
    cauchy_kernel,
    hl_eval,
    hl_polynomial,
    hl_skew,
    qpoch,
    structure_coeffs,
)

Block = Tuple[int, Signature]


@dataclass
class FactorizationReport:
    """Per-D coefficients of P_{lam(D)} / x^{lam_hat(D)} against the factorized limit"""
    monomial: Tuple[int, ...]
    coefficients: Dict[int, Fraction]
    limit: Fraction
    stabilized_at: Optional[int] = None

    @property
    def matches_limit(self) -> bool:
        if not self.coefficients:
            return False
        last = self.coefficients[max(self.coefficients)]
        return last == self.limit

    @property
    def passed(self) -> bool:
        return self.stabilized_at is not None and self.matches_limit

    def errors(self) -> Dict[int, float]:
        return {D: float(abs(c - self.limit)) for D, c in self.coefficients.items()}

    def to_json(self) -> dict:
        return {
            "monomial": list(self.monomial),
            "coefficients": {str(D): str(c) for D, c in self.coefficients.items()},
            "limit": str(self.limit),
            "stabilized_at": self.stabilized_at,
            "passed": self.passed,
        }


@dataclass
class LimitReport:
    """Distance between an exact finite-D measure and its D -> inf limit"""
    label: str
    errors: Dict[int, Fraction] = field(default_factory=dict)

    @property
    def decreasing(self) -> bool:
        vals = [self.errors[D] for D in sorted(self.errors)]
        return all(b <= a for a, b in zip(vals, vals[1:]))

    @property
    def final_error(self) -> float:
        return float(self.errors[max(self.errors)]) if self.errors else float("inf")

    def passed(self, tol: float = 1e-3) -> bool:
        return self.decreasing and self.final_error < tol

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "errors": {str(D): float(e) for D, e in self.errors.items()},
            "decreasing": self.decreasing,
            "final_error": self.final_error,
        }


def _normalize_blocks(blocks: Sequence[Tuple[int, Sequence[int]]]) -> List[Block]:
    out = [(int(L), b if isinstance(b, Signature) else Signature(b)) for L, b in blocks]
    if not out:
        raise SNLabError("need at least one block", "argument", "symfunc")
    for (L1, _), (L2, _) in zip(out, out[1:]):
        if L1 <= L2:
            raise SNLabError(f"block rates must strictly decrease, got {L1} then {L2}", "argument", "symfunc")
    return out


def _lam_at(blocks: List[Block], D: int) -> Optional[Signature]:
    parts: List[int] = []
    for L, lam in blocks:
        parts.extend(L * D + p for p in lam)
    if any(a < b for a, b in zip(parts, parts[1:])):
        return None
    return Signature(parts)


def _lam_hat(blocks: List[Block], D: int) -> Tuple[int, ...]:
    out: List[int] = []
    for L, lam in blocks:
        out.extend([L * D] * len(lam))
    return tuple(out)


def _kernel_series(k: int, params: HLParams) -> Fraction:
    # coefficient of z^k in (tz;q)_inf / (z;q)_inf
    return qpoch(params.t, params.q, k) / qpoch(params.q, params.q, k)


def factorized_coefficient(blocks: Sequence[Tuple[int, Sequence[int]]], monomial: Sequence[int], params: HLParams) -> Fraction:
    """Coefficient of x^monomial in prod_i P_{lam^(i)}(block i) * prod_{i<j} Pi(block_i^{-1}; block_j)"""
    blocks = _normalize_blocks(blocks)
    N = sum(len(lam) for _, lam in blocks)
    target = tuple(monomial)
    if len(target) != N:
        raise SNLabError(f"monomial needs {N} exponents", "argument", "symfunc")
    bound = potential(target)

    poly = LaurentPolynomial.constant(N)
    starts = []
    pos = 0
    for _, lam in blocks:
        starts.append(pos)
        positions = list(range(pos, pos + len(lam)))
        poly = poly * hl_polynomial(lam, params).embed(positions, N)
        pos += len(lam)

    def prune(p: LaurentPolynomial) -> LaurentPolynomial:
        return LaurentPolynomial(N, {e: c for e, c in p.terms.items() if potential(e) <= bound})

    poly = prune(poly)
    for bi, (_, lam) in enumerate(blocks):
        later = range(starts[bi] + len(lam), N)
        for a in range(starts[bi], starts[bi] + len(lam)):
            for b in later:
                # each power of x_a^{-1} x_b raises the potential by b - a >= 1
                if not poly:
                    return Fraction(0)
                lowest = min(potential(e) for e in poly.terms)
                K = max(0, (bound - lowest) // (b - a))
                series = LaurentPolynomial(N)
                for k in range(K + 1):
                    exp = [0] * N
                    exp[a], exp[b] = -k, k
                    series.add_term(tuple(exp), _kernel_series(k, params))
                poly = prune(poly * series)
    return poly.coefficient(target)


def verify_factorization(
    blocks: Sequence[Tuple[int, Sequence[int]]],
    Dmax: int,
    monomial: Sequence[int],
    q=0,
    t=Fraction(1, 2),
    Dmin: int = 0,
) -> FactorizationReport:
    """Track the coefficient of x^{lam_hat(D) + monomial} in P_{lam(D)} for D up to Dmax"""
    params = HLParams(Fraction(t), Fraction(q))
    norm = _normalize_blocks(blocks)
    target = tuple(monomial)
    coeffs: Dict[int, Fraction] = {}
    for D in range(Dmin, Dmax + 1):
        lam = _lam_at(norm, D)
        if lam is None:
            continue
        hat = _lam_hat(norm, D)
        poly = hl_polynomial(lam, params)
        coeffs[D] = poly.coefficient(tuple(h + m for h, m in zip(hat, target)))
    if not coeffs:
        raise SNLabError(f"no D <= {Dmax} gives a valid signature", "argument", "symfunc")
    limit = factorized_coefficient(norm, target, params)

    stabilized_at = None
    Ds = sorted(coeffs)
    last = coeffs[Ds[-1]]
    for D in reversed(Ds):
        if coeffs[D] != last:
            break
        stabilized_at = D
    # a single trailing value is no evidence of stabilization
    if stabilized_at == Ds[-1]:
        stabilized_at = None
    return FactorizationReport(target, coeffs, limit, stabilized_at)


def _tv_against(measure: Dict[Signature, Fraction], limit: Dict[Signature, Fraction]) -> Fraction:
    # limit sums to 1, so mass it puts outside measure's support is 1 - sum over the support
    inside = Fraction(0)
    dist = Fraction(0)
    for nu, p in measure.items():
        r = limit.get(nu, Fraction(0))
        inside += r
        dist += abs(p - r)
    return (dist + (1 - inside)) / 2


def cauchy_limit_check(lam, n: int, m: int, N: int, avals: Sequence, Ds: Sequence[int], t=Fraction(1, 2)) -> LimitReport:
    """Structure-coefficient measure on the last n parts of (D[N-n], lam) x (D[N-m], 0[m])"""
    params = HLParams(Fraction(t))
    lam = lam if isinstance(lam, Signature) else Signature(lam)
    a = [Fraction(v) for v in avals]
    if len(lam) != n or len(a) != N or not (n <= m <= N):
        raise SNLabError("need len(lam) = n, len(a) = N and n <= m <= N", "argument", "symfunc")
    inv = [1 / v for v in a[: N - m]]
    tail = a[N - n:]
    norm = hl_eval(lam, tail, params) * cauchy_kernel(inv, tail, params)

    def limit_prob(nu: Signature) -> Fraction:
        return hl_skew(nu, lam, inv, "Q", params) * hl_eval(nu, tail, params) / norm

    report = LimitReport("cauchy")
    for D in Ds:
        alpha = Signature((D,) * (N - n) + lam.parts)
        beta = Signature((D,) * (N - m) + (0,) * m)
        denom = hl_eval(alpha, a, params) * hl_eval(beta, a, params)
        measure: Dict[Signature, Fraction] = {}
        for kappa, c in structure_coeffs(alpha, beta, params).items():
            nu = Signature(kappa.parts[N - n:])
            measure[nu] = measure.get(nu, Fraction(0)) + c * hl_eval(kappa, a, params) / denom
        limit = {nu: limit_prob(nu) for nu in measure}
        report.errors[D] = _tv_against(measure, limit)
    return report


def branching_limit_check(lam, k: int, avals: Sequence, Ds: Sequence[int], t=Fraction(1, 2)) -> LimitReport:
    """Structure-coefficient measure on the last n-k parts of lam x (D[k], 0[n-k])"""
    params = HLParams(Fraction(t))
    lam = lam if isinstance(lam, Signature) else Signature(lam)
    n = len(lam)
    a = [Fraction(v) for v in avals]
    if len(a) != n or not (0 <= k <= n):
        raise SNLabError("need len(a) = len(lam) and 0 <= k <= n", "argument", "symfunc")
    p_lam = hl_eval(lam, a, params)

    def limit_prob(mu: Signature) -> Fraction:
        return hl_skew(lam, mu, a[:k], "P", params) * hl_eval(mu, a[k:], params) / p_lam

    report = LimitReport("branching")
    for D in Ds:
        beta = Signature((D,) * k + (0,) * (n - k))
        denom = p_lam * hl_eval(beta, a, params)
        measure: Dict[Signature, Fraction] = {}
        for kappa, c in structure_coeffs(lam, beta, params).items():
            mu = Signature(kappa.parts[k:])
            measure[mu] = measure.get(mu, Fraction(0)) + c * hl_eval(kappa, a, params) / denom
        limit = {mu: limit_prob(mu) for mu in measure}
        report.errors[D] = _tv_against(measure, limit)
    return report
