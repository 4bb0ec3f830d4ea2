# test_padic.py - p-adic matrices, Smith form and product chains

import math
from fractions import Fraction

import pytest

from snlab.core.errors import SNLabError
from snlab.core.padic import (
    ExtendedSignature,
    PadicMatrix,
    auto_precision,
    bi_invariant,
    corner,
    diag_matrix,
    haar_additive,
    haar_gl,
    haar_gl_with_attempts,
    is_prime,
    matmul,
    smith,
    sn_product_chain,
    unit_inverse,
    valuation,
)
from snlab.core.rng import ExactUniform, make_stream
from snlab.core.signature import Signature, zeros
from snlab.core.symfunc import qpoch


def test_primes():
    assert [p for p in range(20) if is_prime(p)] == [2, 3, 5, 7, 11, 13, 17, 19]


def test_valuation_and_inverse():
    assert valuation(12, 2, 5) == 2
    assert valuation(0, 2, 5) == 5
    assert valuation(27, 3, 2) == 2
    for u in (1, 3, 5, 31):
        assert u * unit_inverse(u, 2, 5) % 32 == 1
    assert 7 * unit_inverse(7, 5, 6) % 5 ** 6 == 1
    with pytest.raises(SNLabError):
        unit_inverse(6, 3, 4)


def test_smith_of_diagonal():
    sn = smith(diag_matrix((3, 1, 0), 2, 8))
    assert sn.finite == (3, 1, 0)
    assert not sn.is_censored
    assert sn.to_signature() == Signature((3, 1, 0))


def test_smith_censors_deep_parts():
    sn = smith(diag_matrix((9, 1), 2, 8))
    assert sn.censored == 1
    assert sn.finite == (1,)
    assert sn.to_json() == [">=8", 1]
    assert sn.parts == (None, 1)
    with pytest.raises(SNLabError) as e:
        sn.to_signature()
    assert e.value.error_type == "resource"


def test_smith_is_bi_invariant():
    rng = make_stream(3, 0)
    for lam in [(2, 1, 0), (4, 4, 1), (0, 0, 0)]:
        A = bi_invariant(lam, 3, 10, rng)
        assert smith(A).to_signature() == Signature(lam)


def test_haar_gl_is_invertible():
    rng = make_stream(5, 0)
    for N in (1, 2, 4):
        assert smith(haar_gl(N, 2, 6, rng)).to_signature() == zeros(N)


@pytest.mark.parametrize("p, rate", [(2, Fraction(3, 8)), (3, Fraction(16, 27))])
def test_haar_gl_acceptance_rate(p, rate):
    # a uniform 2x2 residue matrix is invertible mod p with probability (1/p; 1/p)_2
    assert rate == qpoch(Fraction(1, p), Fraction(1, p), 2)
    rng = make_stream(17, p)
    trials = 4000
    attempts = sum(haar_gl_with_attempts(2, p, 3, rng)[1] for _ in range(trials))
    assert trials / attempts == pytest.approx(float(rate), abs=0.02)


def test_corner_and_matmul_shapes():
    rng = make_stream(1, 0)
    A = haar_gl(4, 3, 5, rng)
    C = corner(A, 2, 3)
    assert (C.rows, C.cols) == (2, 3)
    B = haar_additive(3, 2, 3, 5, rng)
    assert (matmul(C, B).rows, matmul(C, B).cols) == (2, 2)
    with pytest.raises(SNLabError):
        matmul(C, C)
    with pytest.raises(SNLabError):
        corner(A, 5, 1)


def test_large_precision_residues():
    M = haar_additive(2, 2, 3, 50, make_stream(9, 0))
    assert all(0 <= x < 3 ** 50 for row in M.entries for x in row)


def test_matrix_validation():
    with pytest.raises(SNLabError):
        PadicMatrix.from_rows([[1, 2]], 4, 3)
    with pytest.raises(SNLabError):
        PadicMatrix.from_rows([[1, 2], [3]], 2, 3)
    with pytest.raises(SNLabError):
        ExtendedSignature((1, 2), 0, 5)


def test_unit_corner_frequency():
    """1x1 corner of Haar GL_2(Z_2) is a unit with probability 2/3"""
    rng = make_stream(2024, 0)
    trials = 20000
    units = sum(1 for _ in range(trials) if valuation(haar_gl(2, 2, 4, rng).entries[0][0], 2, 4) == 0)
    assert abs(units / trials - 2 / 3) < 0.015


def test_product_chain_is_reproducible():
    a = sn_product_chain(2, [4], 2, 6, 24, make_stream(7, 3))
    b = sn_product_chain(2, [4], 2, 6, 24, make_stream(7, 3))
    assert a.steps == b.steps
    assert a.k == 6
    assert a.steps[0] == zeros(2)
    assert a.is_consistent(2)
    assert all(nxt.size >= prev.size for prev, nxt in zip(a.steps, a.steps[1:]))


def test_product_chain_auto_precision():
    traj = sn_product_chain(2, [math.inf], 3, 5, "auto", make_stream(1, 0))
    assert traj.k == 5
    assert traj.meta["precision"] >= auto_precision(5, 3)


def test_auto_precision_leaves_room_for_target():
    assert auto_precision(5, 3, target=12) == auto_precision(5, 3) + 12
    with pytest.raises(SNLabError):
        auto_precision(5, 3, target=-1)
    traj = sn_product_chain(2, [math.inf], 3, 5, "auto", make_stream(1, 0), target=12)
    assert traj.meta["precision"] >= auto_precision(5, 3, 12)

def test_product_chain_rejects_small_corners():
    with pytest.raises(SNLabError):
        sn_product_chain(3, [3], 2, 2, 8, make_stream(0, 0))


def test_exact_uniform_comparisons():
    u = ExactUniform(make_stream(0, 0))
    assert u.less_than(Fraction(1))
    assert not u.less_than(Fraction(0))
    assert u.less_than(Fraction(1, 2)) == (float(u) < 0.5)
