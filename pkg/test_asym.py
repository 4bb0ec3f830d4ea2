# test_asym.py - moments, centers, scales and Lyapunov exponents

import math
from fractions import Fraction

import pytest

from snlab.core.asym import (
    AsymSpec,
    PiecewiseLinear,
    check_profile,
    clt_scale,
    clt_variance,
    corner_constant,
    lln_center,
    lyapunov_predict,
    lyapunov_sweep,
    matrix_rate,
    mean_jump,
    mean_jump_series,
    prediction_report,
    rescale_path,
    var_jump,
    var_jump_series,
)
from snlab.core.errors import SNLabError
from snlab.core.hlproc import GeneralizedVariable, Specialization, gx_mean, gx_pmf, run_process
from snlab.core.rng import make_stream

HALF = Fraction(1, 2)


def test_single_variable_moments():
    one = GeneralizedVariable(HALF)
    assert mean_jump(1, one, HALF) == Fraction(2, 3)
    assert mean_jump(1, one, HALF) == gx_mean(HALF, HALF)
    assert var_jump(1, one, HALF) == Fraction(14, 9)
    second = sum(ell * ell * gx_pmf(ell, HALF, HALF) for ell in range(400))
    assert float(second - gx_mean(HALF, HALF) ** 2) == pytest.approx(14 / 9, abs=1e-12)


def test_infinite_variable_means():
    inf = GeneralizedVariable(HALF, math.inf)
    assert mean_jump(1, inf, HALF) == 1
    assert mean_jump(2, inf, HALF) == Fraction(1, 3)
    assert var_jump(1, inf, HALF) == 2


def test_means_decrease_in_the_index():
    xhat = GeneralizedVariable(Fraction(1, 3), 5)
    means = [mean_jump(i, xhat, Fraction(1, 3)) for i in range(1, 6)]
    assert all(a > b for a, b in zip(means, means[1:]))


def test_series_agree_with_closed_forms():
    t = Fraction(1, 3)
    for m in (1, 3, 7):
        xhat = GeneralizedVariable(HALF, m)
        for i in (1, 2, 4):
            assert mean_jump_series(i, xhat, t) == (mean_jump(i, xhat, t), 0)
            assert var_jump_series(i, xhat, t) == (var_jump(i, xhat, t), 0)
    inf = GeneralizedVariable(HALF, math.inf)
    value, tail = mean_jump_series(2, inf, t)
    assert 0 <= mean_jump(2, inf, t) - value <= tail
    value, tail = var_jump_series(2, inf, t)
    assert 0 <= var_jump(2, inf, t) - value <= tail


def test_matrix_rate():
    for i in (1, 2, 3):
        assert matrix_rate(i, math.inf, 3, 2) == Fraction(1, 2 ** i - 1)
        for N in (4, 6):
            assert matrix_rate(i, N, 3, 2) == mean_jump(i, GeneralizedVariable(HALF, N - 3), HALF)
    with pytest.raises(SNLabError):
        matrix_rate(1, 3, 3, 2)


def test_centers_and_scales():
    spec = Specialization.matrix(2, [4, math.inf], HALF)
    k = 10
    expected = 5 * mean_jump(1, GeneralizedVariable(HALF, 2), HALF) + 5 * mean_jump(1, GeneralizedVariable(HALF, math.inf), HALF)
    assert lln_center(1, spec, k) == expected
    assert clt_scale(2, spec, k) == pytest.approx(math.sqrt(clt_variance(2, spec, k)))


def test_lyapunov_ratios():
    rows = lyapunov_predict(6, {math.inf: Fraction(1)}, 2)
    assert [r.normalized_ratio for r in rows[:2]] == [Fraction(64, 63), Fraction(64, 31)]
    assert [r.limit for r in rows] == [1, 2, 4, 8, 16, 32]
    assert rows[0].lyapunov == Fraction(1, 63)


def test_lyapunov_with_finite_corners():
    profile = {8: HALF, math.inf: HALF}
    c = corner_constant(6, profile, 2)
    assert c == HALF * Fraction(1, 4)
    rows = lyapunov_predict(6, profile, 2)
    assert rows[0].normalized_ratio == rows[0].lyapunov / (Fraction(1, 64) * (1 - c))


def test_lyapunov_sweep_converges():
    sweep = lyapunov_sweep(1, 2, range(3, 13))
    assert sweep.monotone
    assert sweep.constant < 1
    assert sweep.ratios[12] == Fraction(4096, 4095)


def test_profile_validation():
    with pytest.raises(SNLabError):
        check_profile(3, {3: Fraction(1)})
    with pytest.raises(SNLabError):
        check_profile(3, {5: Fraction(2, 3), 6: Fraction(2, 3)})
    with pytest.raises(SNLabError):
        AsymSpec(1, 2)
    spec = AsymSpec(2, 3, [4, 4, math.inf])
    assert spec.profile == {4: Fraction(2, 3), math.inf: Fraction(1, 3)}


def test_prediction_report():
    spec = AsymSpec(2, 3, [math.inf])
    empty = prediction_report(spec, 0)
    assert all(v == [] for v in empty.values())
    report = prediction_report(spec, 50)
    assert report["i"] == [1, 2, 3]
    assert report["center"][0] == str(50 * mean_jump(1, GeneralizedVariable(HALF, math.inf), HALF))


def test_rescaled_paths():
    spec = Specialization(HALF, (GeneralizedVariable(HALF),))
    traj = run_process(2, spec, 40, make_stream(12, 0))
    path = rescale_path(traj, 1, spec)
    assert path(0.0) == 0.0
    assert len(path.knots) == 41
    assert path(1.0) == pytest.approx(float(traj.final[0] - lln_center(1, spec, 40)) / clt_scale(1, spec, 40))
    with pytest.raises(SNLabError):
        path(1.5)
    assert PiecewiseLinear([0.0, 1.0], [0.0, 2.0])(0.25) == 0.5
