# test_stats.py - distances, tests and report rendering

from fractions import Fraction

import numpy as np
import pytest
from scipy import stats

from snlab.core.errors import SNLabError
from snlab.core.hlproc import ExactLaw
from snlab.core.stats import (
    EmpiricalDist,
    GofReport,
    atom_report,
    bound_report,
    chi_square,
    chi_square_two_sample,
    independence_report,
    normality_report,
    render_markdown,
    truncate_support,
    tv_distance,
    tv_two_sample,
)


def _coin(heads: int, tails: int) -> EmpiricalDist:
    return EmpiricalDist.from_samples(["h"] * heads + ["t"] * tails)


def test_empirical_counts():
    emp = _coin(30, 10).merge(_coin(10, 0))
    assert emp.total == 50
    assert emp.frequency("h") == 0.8
    assert emp.frequency("x") == 0.0
    assert emp.to_json()[0] == {"signature": "h", "count": 40}
    with pytest.raises(SNLabError):
        EmpiricalDist().frequencies()


def test_tv_distance():
    fair = {"h": Fraction(1, 2), "t": Fraction(1, 2)}
    assert tv_distance(_coin(50, 50), fair) == 0.0
    assert tv_distance(_coin(75, 25), fair) == pytest.approx(0.25)
    # mass missing from the table counts in full
    partial = ExactLaw({"h": Fraction(1, 2)}, tail=Fraction(1, 2))
    assert tv_distance(_coin(50, 50), partial) == pytest.approx(0.75)
    assert tv_two_sample(_coin(50, 50), _coin(100, 0)) == pytest.approx(0.5)


def test_tv_rejects_overfull_law():
    with pytest.raises(SNLabError):
        tv_distance(_coin(1, 1), {"h": Fraction(2, 3), "t": Fraction(2, 3)})


def test_chi_square_fit():
    rng = np.random.default_rng(0)
    probs = [Fraction(1, 2), Fraction(1, 4), Fraction(1, 8), Fraction(1, 16), Fraction(1, 32), Fraction(1, 32)]
    draws = rng.choice(len(probs), size=10000, p=[float(p) for p in probs])
    emp = EmpiricalDist.from_samples(int(d) for d in draws)
    exact = {i: p for i, p in enumerate(probs)}
    good = chi_square(emp, exact)
    assert good.passed
    assert good.dof == len(probs) - 1
    skewed = {0: Fraction(1, 4), 1: Fraction(1, 2), 2: Fraction(1, 8), 3: Fraction(1, 16), 4: Fraction(1, 32), 5: Fraction(1, 32)}
    assert not chi_square(emp, skewed).passed


def test_chi_square_pools_small_cells():
    emp = EmpiricalDist.from_samples([0] * 95 + [1] * 3 + [2] * 2)
    exact = {0: Fraction(95, 100), 1: Fraction(3, 100), 2: Fraction(2, 100)}
    report = chi_square(emp, exact)
    assert report.dof == 1
    assert report.passed


def test_chi_square_degenerate():
    report = chi_square(_coin(10, 0), {"h": Fraction(1)})
    assert report.passed
    assert "degenerate" in report.note


def test_two_sample_homogeneity():
    rng = np.random.default_rng(1)
    a = EmpiricalDist.from_samples(int(v) for v in rng.geometric(0.5, size=5000))
    b = EmpiricalDist.from_samples(int(v) for v in rng.geometric(0.5, size=5000))
    c = EmpiricalDist.from_samples(int(v) for v in rng.geometric(0.3, size=5000))
    assert chi_square_two_sample(a, b).passed
    assert not chi_square_two_sample(a, c).passed


def test_truncate_support():
    law = {0: Fraction(1, 2), 1: Fraction(1, 4), 2: Fraction(1, 8), 3: Fraction(1, 8)}
    cut = truncate_support(law, 0.2)
    assert set(cut) == {0, 1, 2}
    assert cut.tail == Fraction(1, 8)


def test_atom_and_bound_reports():
    assert atom_report("heads", _coin(66, 34), "h", Fraction(2, 3), 0.015).passed
    assert not atom_report("heads", _coin(50, 50), "h", Fraction(2, 3), 0.015).passed
    assert bound_report("x", 0.5, 0.0, 1.0).passed
    assert not bound_report("x", 1.5, None, 1.0).passed


def test_normality_diagnostics():
    rng = np.random.default_rng(7)
    report = normality_report(rng.standard_normal(20000))
    assert all(r.passed for r in report.checks("z"))
    shifted = normality_report(rng.exponential(size=20000))
    assert not all(r.passed for r in shifted.checks("e"))
    with pytest.raises(SNLabError):
        normality_report([0.0] * 10)
    assert normality_report([1.0] * 200).degenerate


def test_independence_diagnostics():
    rng = np.random.default_rng(9)
    x = rng.standard_normal(20000)
    y = rng.standard_normal(20000)
    free = independence_report(list(zip(x, y)))
    assert free.check("xy", 0.05).passed
    assert free.ci_low < 0 < free.ci_high
    tied = independence_report(list(zip(x, x + 0.1 * y)))
    assert not tied.check("xx", 0.05).passed


def test_render_markdown():
    reports = [GofReport("a", "tv", 0.01, 0.02, True), GofReport("b", "chi2", 9.0, 0.001, False, 3, 0.0002)]
    md = render_markdown(reports, "demo")
    assert md.startswith("# demo")
    assert "| a | tv |" in md
    assert "FAIL" in md
    assert "1/2 checks passed." in md


def test_tv_two_sample_is_a_metric():
    rng = np.random.default_rng(3)
    samples = [
        EmpiricalDist.from_samples(int(v) for v in rng.geometric(prob, size=400))
        for prob in (0.2, 0.5, 0.8)
    ] + [_coin(30, 10), _coin(5, 5)]
    for a in samples:
        assert tv_two_sample(a, a) == 0.0
        for b in samples:
            assert tv_two_sample(a, b) == pytest.approx(tv_two_sample(b, a))
            assert 0.0 <= tv_two_sample(a, b) <= 1.0
            for c in samples:
                assert tv_two_sample(a, c) <= tv_two_sample(a, b) + tv_two_sample(b, c) + 1e-12


def test_chi_square_p_values_are_uniform_under_the_null():
    rng = np.random.default_rng(11)
    probs = [Fraction(1, 2), Fraction(1, 4), Fraction(1, 8), Fraction(1, 8)]
    exact = {i: p for i, p in enumerate(probs)}
    p_values = []
    for _ in range(200):
        draws = rng.choice(len(probs), size=500, p=[float(p) for p in probs])
        p_values.append(chi_square(EmpiricalDist.from_samples(int(d) for d in draws), exact).p_value)
    assert stats.kstest(p_values, "uniform").statistic < 0.12
