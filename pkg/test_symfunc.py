# test_symfunc.py - Hall-Littlewood engine against hand-computed values

import math
from fractions import Fraction

import pytest

from snlab.core.errors import SNLabError
from snlab.core.hlproc import product_convolution_dist
from snlab.core.laurent import LaurentPolynomial
from snlab.core.macdonald import factorized_coefficient, verify_factorization
from snlab.core.signature import Signature, interlaces_P, interlaces_Q, q_successors, reachable_Q, signatures_of_size
from snlab.core.symfunc import (
    HLParams,
    cauchy_kernel,
    cauchy_kernel_with_tail,
    cauchy_partial_sums,
    gt_sum,
    hl_eval,
    hl_eval_Q,
    hl_polynomial,
    hl_skew,
    hl_symmetrize,
    macdonald_branch,
    phi_hl,
    pochhammer,
    pochhammer_mp,
    pochhammer_with_tail,
    principal_P,
    principal_Q,
    psi_hl,
    qpoch,
    structure_coeffs,
)

T = Fraction(1, 2)
HL = HLParams(T)


def test_signature_validation():
    with pytest.raises(SNLabError):
        Signature((0, 1))
    lam = Signature((3, 1, 1, 0))
    assert lam.size == 5
    assert lam.n_stat == 0 * 3 + 1 * 1 + 2 * 1 + 3 * 0
    assert lam.length == 3
    assert lam.multiplicities() == {3: 1, 1: 2, 0: 1}


def test_interlacing():
    assert interlaces_P(Signature((3, 1)), Signature((2,)))
    assert not interlaces_P(Signature((3, 1)), Signature((0,)))
    assert interlaces_Q(Signature((2, 0)), Signature((3, 1)))
    assert not interlaces_Q(Signature((2, 0)), Signature((3, 3)))
    assert set(q_successors(Signature((0, 0)), 1)) == {Signature((0, 0)), Signature((1, 0))}
    # two Q-steps can lift both parts past the old top
    assert reachable_Q(Signature((0, 0)), Signature((2, 2)), 2)
    assert not reachable_Q(Signature((0, 0)), Signature((2, 2)), 1)


def test_qpoch():
    assert qpoch(T, T, 0) == 1
    assert qpoch(T, T, 2) == Fraction(3, 8)
    assert pochhammer(T, T, 3) == Fraction(3, 8) * Fraction(7, 8)
    assert pochhammer(0.5, 0.5, math.inf) == pytest.approx(pochhammer_mp(T, T), abs=1e-11)


def test_small_polynomials():
    a, b = Fraction(1, 3), Fraction(2, 5)
    assert hl_eval((1, 0), [a, b], HL) == a + b
    assert hl_eval((1, 1), [a, b], HL) == a * b
    assert hl_eval((2, 0), [a, b], HL) == a * a + b * b + (1 - T) * a * b
    # negative parts shift by a power of x_1 x_2
    assert hl_eval((0, -1), [a, b], HL) == (a + b) / (a * b)


def test_q_and_skew():
    x = Fraction(1, 3)
    assert hl_eval_Q((1,), [x], HL) == (1 - T) * x
    assert hl_skew((1, 0), (0, 0), [x], "Q", HL) == (1 - T) * x
    assert hl_skew((1, 0), (0, 0), [x, x], "Q", HL) == hl_eval_Q((1, 0), [x, x], HL)
    assert phi_hl(Signature((1, 0)), Signature((0, 0)), T) == 1 - T
    assert psi_hl(Signature((1, 1)), Signature((1,)), T) == 1


def test_branching_matches_pattern_sums():
    vals = [Fraction(1, 2), Fraction(1, 3), Fraction(1, 5)]
    for lam in [Signature((2, 1, 0)), Signature((3, 1, 1)), Signature((2, 2, 0))]:
        assert hl_skew(lam, (), vals, "P", HL) == gt_sum(lam, (), vals, "P", HL)
        assert hl_skew(lam, (0, 0, 0), vals[:2], "Q", HL) == gt_sum(lam, (0, 0, 0), vals[:2], "Q", HL)


def test_symmetrization_matches_branching():
    vals = [Fraction(1, 2), Fraction(1, 3), Fraction(1, 7)]
    for size in range(5):
        for lam in signatures_of_size(3, size):
            assert hl_symmetrize(lam, vals, T) == hl_eval(lam, vals, HL)


def test_principal_specializations():
    ones = [T ** i for i in range(3)]
    for size in range(6):
        for lam in signatures_of_size(3, size):
            assert principal_P(lam, 1, HL) == hl_eval(lam, ones, HL)
            assert principal_Q(lam, T, HL, 3) == hl_eval_Q(lam, [T * v for v in ones], HL)
    assert principal_P((1, 0), 1, HL) == 1 + T


def test_cauchy_identity_partial_sums():
    a, b = [Fraction(1), T], [T, T * T]
    sums = cauchy_partial_sums(a, b, HL, 30)
    kernel = cauchy_kernel(a, b, HL)
    assert all(s2 >= s1 for s1, s2 in zip(sums, sums[1:]))
    assert 0 <= kernel - sums[-1] < Fraction(1, 10 ** 6)


def test_cauchy_kernel_diverges():
    with pytest.raises(SNLabError) as e:
        cauchy_kernel([Fraction(2)], [Fraction(1, 2)], HL)
    assert e.value.error_type == "divergence"


def test_structure_coefficients():
    coeffs = structure_coeffs((1, 0), (1, 0), HL)
    assert coeffs == {Signature((2, 0)): Fraction(1), Signature((1, 1)): 1 + T}
    # expanding the product back reproduces it
    product = hl_polynomial((1, 0), HL) * hl_polynomial((1, 0), HL)
    rebuilt = LaurentPolynomial(2)
    for nu, c in coeffs.items():
        rebuilt = rebuilt + hl_polynomial(nu, HL) * c
    assert rebuilt == product


def test_structure_coefficients_size_cap():
    for lam, mu in [((21, 0), (1, 0)), ((1, 0), (21, 0))]:
        with pytest.raises(SNLabError) as e:
            structure_coeffs(lam, mu, HL)
        assert e.value.error_type == "resource"
    with pytest.raises(SNLabError) as e:
        product_convolution_dist((21, 0), (1, 0), T)
    assert e.value.error_type == "resource"
    assert structure_coeffs((20, 0), (0, 0), HL) == {Signature((20, 0)): Fraction(1)}


def test_macdonald_branching():
    q, t = Fraction(1, 3), Fraction(1, 2)
    params = HLParams(t, q)
    a, b = Fraction(1, 2), Fraction(1, 3)
    assert hl_eval((1, 0), [a, b], params) == a + b
    expected = a * a + b * b + (1 + q) * (1 - t) / (1 - q * t) * a * b
    assert hl_eval((2, 0), [a, b], params) == expected
    # q = 0 falls back to the Hall-Littlewood coefficients
    lam, mu = Signature((3, 1, 0)), Signature((2, 1))
    assert macdonald_branch(lam, mu, "psi", 0, t) == psi_hl(lam, mu, t)


def test_macdonald_cauchy_kernel_is_float():
    params = HLParams(Fraction(1, 2), Fraction(1, 3))
    value = cauchy_kernel([Fraction(1, 2)], [Fraction(1, 2)], params)
    expected = pochhammer_mp(Fraction(1, 8), Fraction(1, 3)) / pochhammer_mp(Fraction(1, 4), Fraction(1, 3))
    assert value == pytest.approx(expected, rel=1e-10)


def test_truncation_bounds():
    assert pochhammer_with_tail(T, T, 3) == (Fraction(21, 64), 0.0)
    value, tail = pochhammer_with_tail(0.5, 0.5, math.inf)
    assert 0 < tail < 1e-11
    assert abs(value - pochhammer_mp(T, T)) <= tail * value + 1e-15

    params = HLParams(Fraction(1, 2), Fraction(1, 3))
    value, bound = cauchy_kernel_with_tail([Fraction(1, 2)], [Fraction(1, 2)], params)
    expected = pochhammer_mp(Fraction(1, 8), Fraction(1, 3)) / pochhammer_mp(Fraction(1, 4), Fraction(1, 3))
    assert 0 < bound < 1e-10
    assert abs(value - expected) <= bound * expected + 1e-14
    # q = 0 is exact
    assert cauchy_kernel_with_tail([T], [T], HL) == (Fraction(7, 6), 0.0)


def test_parameter_domain():
    with pytest.raises(SNLabError):
        HLParams(Fraction(1))
    with pytest.raises(SNLabError):
        HLParams(Fraction(1, 2), Fraction(1))


def test_variable_cap():
    with pytest.raises(SNLabError) as e:
        hl_eval((0,) * 7, [Fraction(1, 2)] * 7, HL)
    assert e.value.error_type == "resource"


def test_factorization_stabilizes():
    blocks = [(2, (1,)), (1, (0, 0))]
    report = verify_factorization(blocks, 12, (0, 1, 0))
    assert report.passed
    assert report.coefficients[12] == factorized_coefficient(blocks, (0, 1, 0), HL)


def test_factorization_rejects_bad_blocks():
    with pytest.raises(SNLabError):
        verify_factorization([(1, (0,)), (2, (0,))], 4, (0, 0))
