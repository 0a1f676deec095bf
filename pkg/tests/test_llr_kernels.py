import numpy as np
import pytest
from hypothesis import given, strategies as st

from llr_kernels import (LlrTriple, OpCounter, add_triple, blacktriangle_right, decision_penalty,
                         dottriangle_right, f_minus, f_plus, lozenge_right, lozenge_triple, swap_triple,
                         vartriangle_right)

llr_values = st.floats(-50, 50, allow_nan=False)
bits = st.integers(0, 1)


def test_single_bit_kernel_examples():
    assert f_minus(2.0, -3.0) == -2.0
    assert f_minus(5.0, 4.0) == 4.0
    assert f_plus(1.5, 2.0, 0) == 3.5
    assert f_plus(1.5, 2.0, 1) == 0.5


def test_triple_examples():
    assert swap_triple(1.0, 2.0, -1.0) == (2.0, -1.0, 1.0)
    assert add_triple(1.0, 2.0, -1.0) == (1.0, 0.0, 2.0)


def test_lozenge_right_example():
    ta = LlrTriple(0.0, 3.0, 0.0)
    tb = LlrTriple(0.0, -2.0, 0.0)
    assert lozenge_right(ta, tb, 0, 0) == -2.0


@given(llr_values, llr_values)
def test_f_plus_pair_identity(a, b):
    assert f_plus(a, b, 0) + f_plus(a, b, 1) == pytest.approx(2 * b)


@given(llr_values, llr_values)
def test_f_minus_magnitude_and_sign(a, b):
    value = f_minus(a, b)
    assert abs(value) == min(abs(a), abs(b))
    if value != 0:
        assert np.sign(value) == np.sign(a) * np.sign(b)


@given(llr_values, llr_values)
def test_right_kernels_agree_on_all_zero_bits(r0a, r0b):
    ta, tb = LlrTriple(0.0, r0a, -r0a), LlrTriple(0.0, r0b, -r0b)
    for kernel in (vartriangle_right, blacktriangle_right, dottriangle_right):
        assert kernel(ta, tb, 0, 0, 0) == r0a + r0b


@given(llr_values, llr_values, llr_values, llr_values, bits, bits, bits)
def test_swap_right_kernel_is_plain_kernel_with_bits_exchanged(r0a, r1a, r0b, r1b, u1, u2, b):
    ta, tb = LlrTriple(0.0, r0a, r1a), LlrTriple(0.0, r0b, r1b)
    assert blacktriangle_right(ta, tb, u1, u2, b) == vartriangle_right(ta, tb, u1, b, u2)


@given(llr_values, llr_values, llr_values)
def test_triples_on_zero_stay_at_zero(l, r0, r1):
    for triple in (swap_triple, add_triple):
        assert triple(0.0, 0.0, 0.0) == (0.0, 0.0, 0.0)
        m0, m1, rout = triple(l, r0, r1)
        assert np.isfinite([m0, m1, rout]).all()


def test_kernels_broadcast_over_arrays():
    a = np.array([2.0, -1.0, 0.5])
    b = np.array([-3.0, -4.0, 0.25])
    np.testing.assert_array_equal(f_minus(a, b), [-2.0, 1.0, 0.25])
    u = np.array([0, 1, 1], dtype=np.uint8)
    np.testing.assert_array_equal(f_plus(a, b, u), [-1.0, -3.0, -0.25])
    triple = LlrTriple(a, b, -b)
    np.testing.assert_array_equal(triple.r(u), [-3.0, 4.0, -0.25])


def test_op_counter_charges_per_element():
    ops = OpCounter()
    f_minus(np.zeros(4), np.zeros(4), ops)
    assert (ops.additions, ops.comparisons) == (0, 4)
    f_plus(np.zeros(4), np.zeros(4), 1, ops)
    assert (ops.additions, ops.comparisons) == (4, 4)
    swap_triple(1.0, 2.0, -1.0, ops)
    assert (ops.additions, ops.comparisons, ops.negations) == (10, 10, 0)
    add_triple(1.0, 2.0, -1.0, ops)
    assert ops.to_dict() == {'additions': 16, 'comparisons': 16, 'negations': 2}


def test_op_counter_merge():
    first, second = OpCounter(1, 2, 3), OpCounter(10, 20, 30)
    assert first.merge(second) == OpCounter(11, 22, 33)


def test_lozenge_triple_components():
    ta = LlrTriple(1.0, 2.0, -3.0)
    tb = LlrTriple(-0.5, 4.0, 1.0)
    l, r0, r1 = lozenge_triple(ta, tb, 1)
    assert l == f_plus(1.0, -0.5, 1)
    assert r0 == lozenge_right(ta, tb, 1, 0)
    assert r1 == lozenge_right(ta, tb, 1, 1)


def test_decision_penalty():
    assert decision_penalty(-2.0, 1) == 0.0
    assert decision_penalty(-2.0, 0) == 2.0
    assert decision_penalty(3.0, 1) == 3.0
    assert decision_penalty(0.0, 0) == 0.0
    assert decision_penalty(0.0, 1) == 0.0
