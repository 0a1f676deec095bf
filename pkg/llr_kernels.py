"""Min-sum LLR kernels for single-bit and double-bit-input (DBI) subchannels.

Every kernel works elementwise on floats or numpy arrays and optionally charges
its work to an OpCounter. Bits are 0/1 integers or uint8 arrays.
"""
from dataclasses import dataclass

import numpy as np


@dataclass
class OpCounter:
    """Additions, comparisons and negations performed on LLR values."""

    additions: int = 0
    comparisons: int = 0
    negations: int = 0

    def charge(self, size, additions=0, comparisons=0, negations=0):
        self.additions += additions * size
        self.comparisons += comparisons * size
        self.negations += negations * size

    def merge(self, other):
        self.additions += other.additions
        self.comparisons += other.comparisons
        self.negations += other.negations
        return self

    def to_dict(self):
        return {'additions': self.additions, 'comparisons': self.comparisons, 'negations': self.negations}


@dataclass(frozen=True)
class LlrTriple:
    """A DBI subchannel in the log domain: L and the two conditional values R(.; 0), R(.; 1)."""

    l: object
    r0: object
    r1: object

    def r(self, bit):
        return np.where(bit, self.r1, self.r0)[()]


def _size(*values):
    return int(np.broadcast(*values).size)


def f_minus(a, b, ops=None):
    """sgn(a) sgn(b) min(|a|, |b|)."""
    if ops is not None:
        ops.charge(_size(a, b), comparisons=1)
    return (np.sign(a) * np.sign(b) * np.minimum(np.abs(a), np.abs(b)))[()]


def f_plus(a, b, u, ops=None):
    """(-1)^u a + b."""
    if ops is not None:
        ops.charge(_size(a, b, u), additions=1)
    return (np.where(u, np.negative(a), a) + b)[()]


def swap_triple(l, r0, r1, ops=None):
    """Split a lozenge-type value set across a swap transform.

    Returns (m0, m1, rout): m_b is the log-ratio conditioned on the swapped-out
    bit being b, rout is the log-ratio of the swapped-out bit itself.
    """
    if ops is not None:
        ops.charge(_size(l, r0, r1), additions=6, comparisons=6)
    m0 = l + np.minimum(0, r0) - np.minimum(0, r1)
    m1 = l - np.maximum(0, r0) + np.maximum(0, r1)
    rout = r1 + np.maximum(0, m0) - np.maximum(0, m1)
    return m0[()], m1[()], rout[()]


def add_triple(l, r0, r1, ops=None):
    """Split a lozenge-type value set across an add transform.

    The variant m0 = l + min(0, r0) + min(0, r1), m1 = -l + max(0, r0) + max(0, r1)
    disagrees with exhaustive max-probability tables and is not used.
    """
    if ops is not None:
        ops.charge(_size(l, r0, r1), additions=6, comparisons=6, negations=2)
    m0 = l + np.minimum(0, r0) + np.maximum(0, r1)
    m1 = -l + np.maximum(0, r0) + np.minimum(0, r1)
    rout = -r1 + np.maximum(0, m0) + np.minimum(0, m1)
    return m0[()], m1[()], rout[()]


def lozenge_right(ta, tb, u1, u2, ops=None):
    return f_minus(ta.r(u1 ^ u2), tb.r(u2), ops)


def vartriangle_right(ta, tb, u1, u2, b, ops=None):
    return f_plus(ta.r(u1 ^ u2), tb.r(u2), b, ops)


def blacktriangle_right(ta, tb, u1, u2, b, ops=None):
    return f_plus(ta.r(u1 ^ b), tb.r(b), u2, ops)


def dottriangle_right(ta, tb, u1, u2, b, ops=None):
    return f_plus(ta.r(u1 ^ u2 ^ b), tb.r(u2 ^ b), b, ops)


TRIPLES = {'swap': swap_triple, 'add': add_triple}
RIGHT_KERNELS = {'swap': blacktriangle_right, 'add': dottriangle_right}


def lozenge_triple(ta, tb, u1, ops=None):
    """The lozenge value set conditioned on u1: (L, R(u1; 0), R(u1; 1))."""
    return (f_plus(ta.l, tb.l, u1, ops),
            lozenge_right(ta, tb, u1, 0, ops),
            lozenge_right(ta, tb, u1, 1, ops))


def decision_penalty(alpha, bit):
    """|alpha| when the decided bit disagrees with the sign of alpha, else 0."""
    return np.where((np.asarray(alpha) < 0) != np.asarray(bit, dtype=bool), np.abs(alpha), 0.0)[()]
