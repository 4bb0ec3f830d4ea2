"""
Experiments behind `snlab compare`, `snlab verify` and `snlab predict`.

Each experiment samples (through sources.map_trials, so results do not depend on
the worker count), computes the exact answer, and returns an ExperimentResult
holding GofReports plus whatever should be written to disk.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, List, Tuple

import numpy as np

from snlab.core.asym import AsymSpec, clt_scale, lln_center, lyapunov_predict, lyapunov_sweep, prediction_report, rescale_path
from snlab.core.config import ExperimentConfig
from snlab.core.errors import SNLabError
from snlab.core.hlproc import (
    ExactLaw,
    GeneralizedVariable,
    cauchy_kernel_prob_forms,
    corner_sn_measure,
    corners_kernel_dist,
    generalized_kernel_prob,
    kernel_support,
    matrix_step_prob,
    product_convolution_dist,
    step_generalized,
)
from snlab.core.macdonald import branching_limit_check, cauchy_limit_check, verify_factorization
from snlab.core.padic import bi_invariant, corner, haar_additive, haar_gl, matmul, smith
from snlab.core.rng import make_stream
from snlab.core.signature import Signature, q_successors, signatures_of_size, zeros
from snlab.core.sources import SourceManager, map_trials, run_trials
from snlab.core.stats import (
    SUPPORT_TAIL,
    EmpiricalDist,
    GofReport,
    atom_report,
    bound_report,
    chi_square,
    chi_square_two_sample,
    independence_report,
    normality_report,
    tv_report,
    tv_two_sample,
)
from snlab.core.symfunc import (
    HLParams,
    cauchy_kernel,
    cauchy_kernel_with_tail,
    cauchy_partial_sums,
    hl_eval,
    hl_eval_Q,
    hl_symmetrize,
    pochhammer_mp,
    principal_P,
    principal_Q,
    qpoch,
)

CENSORED = "censored"
DEFAULT_MATRIX_PRECISION = 16
PRECISION_SLACK = 8
ATOM_TOL = 0.015


@dataclass
class ExperimentResult:
    title: str
    reports: List[GofReport] = field(default_factory=list)
    details: Dict[str, Any] = field(default_factory=dict)
    laws: Dict[str, ExactLaw] = field(default_factory=dict)
    samples: Dict[str, EmpiricalDist] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.reports)


def _precision(cfg: ExperimentConfig, target: int = 0) -> int:
    """Fixed --precision, or the default raised to leave 8 digits above target"""
    if cfg.precision == "auto":
        return max(DEFAULT_MATRIX_PRECISION, target + PRECISION_SLACK)
    return int(cfg.precision)


def _sn_key(A):
    sn = smith(A)
    return CENSORED if sn.is_censored else sn.to_signature()


def _signature_arg(cfg: ExperimentConfig, key: str, default: Tuple[int, ...]) -> Signature:
    value = cfg.extras.get(key)
    if value is None:
        return Signature(default + (0,) * (cfg.n - len(default))) if cfg.n >= len(default) else Signature(default[: cfg.n])
    return value if isinstance(value, Signature) else Signature(value)


# ---------------------------------------------------------------------------
# Sampling jobs (module level so worker processes can pickle them)

def corner_job(job) -> Any:
    seed, index, n, m, N, p, D = job
    rng = make_stream(seed, index)
    if N == math.inf:
        return _sn_key(haar_additive(n, m, p, D, rng))
    return _sn_key(corner(haar_gl(int(N), p, D, rng), n, m))


def product_job(job) -> Any:
    seed, index, lam, mu, p, D = job
    rng = make_stream(seed, index)
    A = bi_invariant(lam, p, D, rng)
    B = bi_invariant(mu, p, D, rng)
    return _sn_key(matmul(A, B))


def kernel_job(job) -> Signature:
    seed, index, lam, x, t = job
    return step_generalized(lam, GeneralizedVariable(x, 1), t, make_stream(seed, index))


def _corner_samples(cfg: ExperimentConfig, n: int, m: int, N) -> EmpiricalDist:
    D = _precision(cfg)
    jobs = [(cfg.seed, i, n, m, N, cfg.p, D) for i in range(cfg.trials)]
    return EmpiricalDist.from_samples(map_trials(corner_job, jobs, cfg.workers, "🎲 Sampling Haar corners"))


def _fit_reports(label: str, emp: EmpiricalDist, exact, cfg: ExperimentConfig) -> List[GofReport]:
    return [
        chi_square(emp, exact, label=f"{label} chi2", tol_p=cfg.tol_p),
        tv_report(f"{label} TV", emp, exact, cfg.tol_tv),
    ]


# ---------------------------------------------------------------------------
# compare modes

def compare_corners(cfg: ExperimentConfig) -> ExperimentResult:
    """SN law of the n x m corner of Haar GL_N against the exact HL measure"""
    n = cfg.n
    m = int(cfg.extras.get("cols") or n)
    N = cfg.Ns[0]
    if N != math.inf and N < m:
        raise SNLabError(f"corner needs m <= N, got m={m}, N={N}", "argument", "harness")
    exact = corner_sn_measure(n, m, N, cfg.t_value, SUPPORT_TAIL)
    emp = _corner_samples(cfg, n, m, N)
    label = f"{n}x{m} corner of GL_{N}" if N != math.inf else f"{n}x{m} iid additive"
    return ExperimentResult(
        f"Corner singular numbers ({label}, p={cfg.p})",
        _fit_reports(label, emp, exact, cfg),
        {"censored": emp.counts.get(CENSORED, 0), "tail": str(exact.tail)},
        {"exact.json": exact},
        {"samples.json": emp},
    )


def compare_ginibre(cfg: ExperimentConfig) -> ExperimentResult:
    """iid additive Haar entries: the N = inf corner law"""
    cfg.Ns = [math.inf]
    return compare_corners(cfg)


def compare_atom(cfg: ExperimentConfig) -> ExperimentResult:
    """Pr(SN = (0)) for the 1 x 1 corner of Haar GL_N (N = 2 unless given)"""
    N = cfg.Ns[0] if cfg.Ns[0] != math.inf else 2
    exact = corner_sn_measure(1, 1, N, cfg.t_value, SUPPORT_TAIL)
    emp = _corner_samples(cfg, 1, 1, N)
    zero = zeros(1)
    tol = float(cfg.extras.get("tol_atom") or ATOM_TOL)
    report = atom_report(f"Pr(SN=(0)), 1x1 corner of GL_{N}", emp, zero, exact[zero], tol)
    return ExperimentResult(f"Single-atom check (p={cfg.p})", [report], {"exact": str(exact[zero])}, {}, {"samples.json": emp})


def compare_product(cfg: ExperimentConfig) -> ExperimentResult:
    """SN(AB) for bi-invariant A, B with fixed SN against the structure-coefficient law"""
    lam = _signature_arg(cfg, "lam", (1,))
    mu = _signature_arg(cfg, "mu", (1,))
    if len(lam) != len(mu):
        raise SNLabError("--lam and --mu need the same length", "argument", "harness")
    exact = product_convolution_dist(lam, mu, cfg.t_value)
    D = _precision(cfg, lam[0] + mu[0])
    if D <= lam[0] + mu[0]:
        raise SNLabError(f"precision {D} cannot resolve parts up to {lam[0] + mu[0]}", "argument", "harness")
    jobs = [(cfg.seed, i, lam.parts, mu.parts, cfg.p, D) for i in range(cfg.trials)]
    emp = EmpiricalDist.from_samples(map_trials(product_job, jobs, cfg.workers, "🎲 Sampling matrix products"))
    label = f"{lam.parts} x {mu.parts}"
    reports = _fit_reports(label, emp, exact, cfg)
    tol = float(cfg.extras.get("tol_atom") or ATOM_TOL)
    for nu, prob in sorted(exact.items(), reverse=True):
        reports.append(atom_report(f"Pr(SN(AB)={nu.parts})", emp, nu, prob, tol))
    return ExperimentResult(f"Product law (p={cfg.p})", reports, {}, {"exact.json": exact}, {"samples.json": emp})


def compare_kernel(cfg: ExperimentConfig) -> ExperimentResult:
    """Sampled insertion steps against the exact one-step kernel"""
    lam = _signature_arg(cfg, "lam", (2, 1, 0))
    x = cfg.x if cfg.x is not None else Fraction(1, 2)
    t = cfg.t_value
    exact = kernel_support(lam, x, t)
    jobs = [(cfg.seed, i, lam, x, t) for i in range(cfg.trials)]
    emp = EmpiricalDist.from_samples(map_trials(kernel_job, jobs, cfg.workers, "🎲 Sampling kernel steps"))
    return ExperimentResult(
        f"Insertion kernel from {lam.parts} (x={x}, t={t})",
        _fit_reports("kernel", emp, exact, cfg),
        {"tail": str(exact.tail)},
        {"exact.json": exact},
        {"samples.json": emp},
    )


def compare_process_vs_matrix(cfg: ExperimentConfig) -> ExperimentResult:
    """Time-k marginals of the matrix chain and the particle process"""
    matrix = run_trials(cfg, "matrix", description="🎲 Sampling matrix chains")
    particle = run_trials(cfg, "process", offset=cfg.trials, description="🎲 Sampling particle processes")
    emp_m = EmpiricalDist.from_samples(CENSORED if tr.meta.get("censored") else tr.final for tr in matrix)
    emp_p = EmpiricalDist.from_samples(tr.final for tr in particle)
    tv = tv_two_sample(emp_m, emp_p)
    reports = [
        chi_square_two_sample(emp_m, emp_p, label="matrix vs particle chi2", tol_p=cfg.tol_p),
        GofReport("matrix vs particle TV", "tv-2sample", tv, None, True, note="informational"),
    ]
    return ExperimentResult(
        f"Matrix chain vs particle process (n={cfg.n}, k={cfg.k})",
        reports,
        {"censored": emp_m.counts.get(CENSORED, 0)},
        {},
        {"matrix.json": emp_m, "particle.json": emp_p},
    )


def _trajectories(cfg: ExperimentConfig):
    name = cfg.extras.get("source") or "process"
    source = SourceManager().get_source(cfg, name)
    return run_trials(cfg, name), source.specialization()


def compare_lln(cfg: ExperimentConfig) -> ExperimentResult:
    """lambda_i(k)/k against the summed jump means, within 5 CLT scales"""
    trajs, spec = _trajectories(cfg)
    k = cfg.k
    reports = []
    rates = {}
    for i in range(1, cfg.n + 1):
        center = lln_center(i, spec, k)
        rate = float(np.mean([tr.final[i - 1] for tr in trajs])) / k
        bound = 5 * clt_scale(i, spec, k) / (k * math.sqrt(len(trajs)))
        rates[i] = {"empirical": rate, "predicted": float(center) / k}
        reports.append(bound_report(f"|lambda_{i}(k)/k - center/k|", abs(rate - float(center) / k), None, bound))
    return ExperimentResult(f"Law of large numbers (n={cfg.n}, k={k})", reports, {"rates": rates})


def compare_clt(cfg: ExperimentConfig) -> ExperimentResult:
    """Rescaled fluctuation paths: marginal normality, cross-particle and increment independence"""
    trajs, spec = _trajectories(cfg)
    paths = {i: [rescale_path(tr, i, spec) for tr in trajs] for i in range(1, cfg.n + 1)}
    reports: List[GofReport] = []
    details: Dict[str, Any] = {}
    for i, fs in paths.items():
        norm = normality_report([f(1.0) for f in fs])
        details[f"normality_{i}"] = norm.to_json()
        reports.extend(norm.checks(f"f_{i}(1)"))
    if cfg.n >= 2:
        cross = independence_report([(f1(1.0), f2(1.0)) for f1, f2 in zip(paths[1], paths[2])])
        details["cross"] = cross.to_json()
        reports.append(cross.check("corr(f_1(1), f_2(1))", 0.05))
    inc = independence_report([(f(0.5), f(1.0) - f(0.5)) for f in paths[1]])
    details["increments"] = inc.to_json()
    reports.append(inc.check("corr(f_1(1/2), f_1(1) - f_1(1/2))", 0.05))
    return ExperimentResult(f"Central limit theorem (n={cfg.n}, k={cfg.k})", reports, details)


def compare_lyapunov(cfg: ExperimentConfig) -> ExperimentResult:
    """Empirical growth of the smallest parts against the predicted Lyapunov exponents"""
    spec = AsymSpec(cfg.p, cfg.n, list(cfg.Ns))
    rows = lyapunov_predict(cfg.n, spec.profile, cfg.p)
    trajs, _ = _trajectories(cfg)
    reports = []
    for row in rows[: int(cfg.extras.get("indices") or 2)]:
        part = cfg.n - row.i + 1
        rate = float(np.mean([tr.final[part - 1] for tr in trajs])) / cfg.k
        rel = abs(rate - float(row.lyapunov)) / float(row.lyapunov)
        reports.append(bound_report(f"L_{row.i}: lambda_{part}(k)/k relative error", rel, None, 0.10))
    return ExperimentResult(
        f"Lyapunov exponents (n={cfg.n}, p={cfg.p})",
        reports,
        {"predicted": [r.to_json() for r in rows]},
    )


def compare_friedman_washington(cfg: ExperimentConfig) -> ExperimentResult:
    """Square iid additive matrix: Pr(SN = 0) = (t;t)_n"""
    n = cfg.n
    emp = _corner_samples(cfg, n, n, math.inf)
    t = cfg.t_value
    exact = qpoch(t, t, n)
    limit = pochhammer_mp(t, t)
    tol = float(cfg.extras.get("tol_atom") or ATOM_TOL)
    report = atom_report(f"Pr(SN=0), {n}x{n} iid additive", emp, zeros(n), exact, tol)
    report.note += f", (t;t)_inf = {limit:.5f}"
    return ExperimentResult(f"Invertibility probability (p={cfg.p})", [report], {"exact": str(exact), "limit": limit}, {}, {"samples.json": emp})


COMPARE_MODES: Dict[str, Callable[[ExperimentConfig], ExperimentResult]] = {
    "corners": compare_corners,
    "ginibre": compare_ginibre,
    "atom": compare_atom,
    "product": compare_product,
    "kernel": compare_kernel,
    "process-vs-matrix": compare_process_vs_matrix,
    "lln": compare_lln,
    "clt": compare_clt,
    "lyapunov": compare_lyapunov,
    "friedman-washington": compare_friedman_washington,
}


def run_compare(mode: str, cfg: ExperimentConfig) -> ExperimentResult:
    if mode not in COMPARE_MODES:
        raise SNLabError(f"Unknown compare mode '{mode}'. Valid options: {', '.join(COMPARE_MODES)}", "argument", "harness")
    return COMPARE_MODES[mode](cfg)


# ---------------------------------------------------------------------------
# verify suites

def _identity(label: str, checked: int, failures: List[str]) -> GofReport:
    note = "all exact" if not failures else f"counterexample: {failures[0]}"
    return GofReport(label, "identity", float(checked), None, not failures, note=note)


def verify_identities(cfg: ExperimentConfig) -> ExperimentResult:
    t = cfg.t_value
    params = HLParams(t)
    nmax = int(cfg.extras.get("nmax") or 4)
    smax = int(cfg.extras.get("size") or 6)
    reports = []

    checked, failures = 0, []
    for n in range(1, nmax + 1):
        ones = [t ** i for i in range(n)]
        for size in range(smax + 1):
            for lam in signatures_of_size(n, size):
                checked += 1
                if principal_P(lam, 1, params) != hl_eval(lam, ones, params):
                    failures.append(f"P_{lam.parts}(1..t^{n - 1})")
                if principal_Q(lam, t, params, n) != hl_eval_Q(lam, [t * v for v in ones], params):
                    failures.append(f"Q_{lam.parts}(t..t^{n})")
    reports.append(_identity("principal specialization = branching", checked, failures))

    checked, failures = 0, []
    distinct = [Fraction(1, 2 * i + 1) for i in range(nmax)]
    for n in range(1, nmax + 1):
        for size in range(min(smax, 4) + 1):
            for lam in signatures_of_size(n, size):
                checked += 1
                if hl_symmetrize(lam, distinct[:n], t) != hl_eval(lam, distinct[:n], params):
                    failures.append(f"P_{lam.parts}{tuple(str(v) for v in distinct[:n])}")
    reports.append(_identity("symmetrization = branching", checked, failures))

    checked, failures = 0, []
    for n in range(1, 4):
        sigs = [lam for size in range(5) for lam in signatures_of_size(n, size)]
        for i, lam in enumerate(sigs):
            for mu in sigs[i:]:
                checked += 1
                try:
                    law = product_convolution_dist(lam, mu, t)
                except SNLabError as e:
                    failures.append(f"{lam.parts} x {mu.parts}: {e.message}")
                    continue
                if any(nu.size != lam.size + mu.size or nu[0] > lam[0] + mu[0] for nu in law):
                    failures.append(f"{lam.parts} x {mu.parts}: support")
    reports.append(_identity("product law sums to 1", checked, failures))

    a, b = [Fraction(1), t], [t, t * t]
    K = int(cfg.extras.get("cauchy_degree") or 40)
    defect = cauchy_kernel(a, b, params) - cauchy_partial_sums(a, b, params, K)[-1]
    reports.append(bound_report(f"Cauchy identity defect at degree {K}", float(defect), 0.0, 1e-9))

    q = Fraction(cfg.extras.get("q") or Fraction(1, 3))
    value, bound = cauchy_kernel_with_tail([t], [t], HLParams(t, q))
    reference = pochhammer_mp(t ** 3, q) / pochhammer_mp(t ** 2, q)
    rel_err = abs(value - reference) / reference
    reports.append(bound_report(f"(q,t) Cauchy kernel truncation (q={q})", rel_err, 0.0, bound + 1e-14))
    return ExperimentResult("Exact identities", reports)


def verify_factorization_suite(cfg: ExperimentConfig) -> ExperimentResult:
    blocks = cfg.extras.get("blocks") or [(2, (1,)), (1, (0, 0))]
    monomial = cfg.extras.get("monomial") or (0, 1, 0)
    dmax = int(cfg.extras.get("dmax") or 12)
    q = cfg.extras.get("q") or 0
    report = verify_factorization(blocks, dmax, monomial, q=q, t=cfg.t_value)
    ok = report.passed
    note = f"stabilized at D={report.stabilized_at}, limit {report.limit}" if ok else f"coefficients {report.to_json()['coefficients']}"
    gof = GofReport("coefficient stabilization", "identity", float(report.stabilized_at or -1), float(dmax), ok, note=note)
    return ExperimentResult("Factorization of P_{lam(D)}", [gof], {"factorization": report.to_json()})


def verify_kernel(cfg: ExperimentConfig) -> ExperimentResult:
    t = cfg.t_value
    rng = make_stream(cfg.seed, 0)
    n = cfg.n
    count = int(cfg.extras.get("instances") or 100)
    reports = []

    failures = []
    for _ in range(count):
        lam = Signature(sorted((int(v) for v in rng.integers(-2, 5, size=n)), reverse=True))
        succ = list(q_successors(lam, 3))
        nu = succ[int(rng.integers(0, len(succ)))]
        x = Fraction(int(rng.integers(1, 10)), 10)
        direct, symmetric = cauchy_kernel_prob_forms(lam, nu, x, t)
        if direct != symmetric:
            failures.append(f"{lam.parts} -> {nu.parts} at x={x}")
    reports.append(_identity("direct kernel = skew-Q kernel", count, failures))

    checked, failures = 0, []
    for lam in [zeros(n), Signature((1,) + (0,) * (n - 1))]:
        law = kernel_support(lam, Fraction(1, 2), t, 1e-12)
        checked += 1
        if not 0 <= law.tail < Fraction(1, 10 ** 12):
            failures.append(f"tail {float(law.tail)} from {lam.parts}")
    reports.append(_identity("kernel support normalization", checked, failures))

    checked, failures = 0, []
    for N in (n + 1, n + 2):
        xhat = GeneralizedVariable(t, N - n)
        for lam in [zeros(n), Signature((1,) + (0,) * (n - 1))]:
            for growth in range(3):
                for nu in signatures_of_size(n, lam.size + growth):
                    checked += 1
                    if matrix_step_prob(lam, nu, N, t) != generalized_kernel_prob(lam, nu, xhat, t):
                        failures.append(f"N={N}: {lam.parts} -> {nu.parts}")
    reports.append(_identity("matrix step = generalized kernel", checked, failures))

    checked, failures = 0, []
    lam = Signature((2,) + (1,) * (n - 1)) if n > 1 else Signature((2,))
    for d in range(n + 1):
        checked += 1
        try:
            corners_kernel_dist(lam, n, n + 2, d, "row", t)
        except SNLabError as e:
            failures.append(f"row d={d}: {e.message}")
    for k in range(3):
        checked += 1
        law = corners_kernel_dist(lam, n, n + 2, k, "column", t, SUPPORT_TAIL)
        if not 0 <= law.tail < SUPPORT_TAIL:
            failures.append(f"column k={k}: tail {float(law.tail)}")
    reports.append(_identity("corner kernels normalize", checked, failures))
    return ExperimentResult(f"Kernel identities (n={n})", reports)


def verify_convergence(cfg: ExperimentConfig) -> ExperimentResult:
    t = cfg.t_value
    Ds = cfg.extras.get("Ds") or [2, 4, 6, 8]
    tol = float(cfg.extras.get("tol_limit") or 1e-3)
    cauchy = cauchy_limit_check((0,), 1, 2, 3, [t ** i for i in range(3)], Ds, t)
    branch = branching_limit_check((1, 0), 1, [Fraction(1), t], Ds, t)
    reports = []
    for rep in (cauchy, branch):
        reports.append(
            GofReport(
                f"{rep.label} limit", "limit", rep.final_error, tol, rep.passed(tol) and rep.decreasing,
                note="decreasing" if rep.decreasing else "not decreasing",
            )
        )
    return ExperimentResult("Structure-coefficient limits", reports, {"cauchy": cauchy.to_json(), "branching": branch.to_json()})


VERIFY_SUITES: Dict[str, Callable[[ExperimentConfig], ExperimentResult]] = {
    "identities": verify_identities,
    "factorization": verify_factorization_suite,
    "kernel": verify_kernel,
    "convergence": verify_convergence,
}


def run_verify(suite: str, cfg: ExperimentConfig) -> ExperimentResult:
    if suite not in VERIFY_SUITES:
        raise SNLabError(f"Unknown verify suite '{suite}'. Valid options: {', '.join(VERIFY_SUITES)}", "argument", "harness")
    return VERIFY_SUITES[suite](cfg)


# ---------------------------------------------------------------------------
# predict

def run_predict(cfg: ExperimentConfig) -> Tuple[dict, ExperimentResult]:
    spec = AsymSpec(cfg.p, cfg.n, list(cfg.Ns))
    prediction = prediction_report(spec, cfg.k)
    rows = lyapunov_predict(cfg.n, spec.profile, cfg.p)
    prediction["lyapunov_table"] = [r.to_json() for r in rows]
    sweep = lyapunov_sweep(1, cfg.p, range(3, 13))
    prediction["sweep"] = sweep.to_json()
    report = GofReport("ratio of L_1 approaches 1 monotonically", "bound", sweep.constant, None, sweep.monotone, note="n = 3..12")
    return prediction, ExperimentResult(f"Predictions (p={cfg.p}, n={cfg.n}, k={cfg.k})", [report])
