"""LLR-domain successive-cancellation decoding of ABS+ polar codes.

The decoder walks the recursion tree depth-first. Every per-layer array carries
a leading path axis, so one traversal decodes a batch of frames (SC), a list of
paths (SCL) or a genie-aided construction batch; what happens at a leaf is
decided by a LeafPolicy.

Per layer lam (N = 2**(m - lam) coordinates, P paths):
    L(lam)  (P, N)        single-bit LLRs of the current node
    R(lam)  (P, N, 2)     conditional LLR pairs, only for nodes that are not right-separated
    B(lam)  (P, N)        decided components of the current node
    H(lam)  (P, N/2)      bit kept for the next phase when that phase skips its left child
    M(lam)  (P, N/2, 2, 2) swap/add split values, indexed [u1][u2]
    S(lam)  (P, N)        R at the decided bit, kept for the next phase's reuse
"""
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Optional

import numpy as np

import config
from codespec import require_valid
from llr_kernels import (LlrTriple, OpCounter, RIGHT_KERNELS, TRIPLES, decision_penalty,
                         f_minus, f_plus, lozenge_right, lozenge_triple)

MODES = {
    'default': (True, True),
    'no-reuse': (False, True),
    'no-prune': (True, False),
    'full': (False, False),
}


class DecoderInvariantError(RuntimeError):
    """A debug-mode check found the decoder reading or reusing a wrong value."""


class UnsetValueError(DecoderInvariantError):
    pass


class ReuseMismatchError(DecoderInvariantError):
    pass


@dataclass(frozen=True)
class DecoderOptions:
    reuse: bool = True
    prune: bool = True
    debug: bool = config.DEBUG_CHECKS
    trace: bool = False
    llr_clamp: Optional[float] = config.LLR_CLAMP

    @classmethod
    def for_mode(cls, mode, **overrides):
        """Options for a named computation mode: default, no-reuse, no-prune or full."""
        if mode not in MODES:
            raise ValueError(f"Unknown computation mode '{mode}'. Expected one of: {', '.join(MODES)}")
        reuse, prune = MODES[mode]
        return cls(reuse=reuse, prune=prune, **overrides)


@dataclass(frozen=True)
class NodeVisit:
    layer: int
    phase: int
    llr: np.ndarray
    rpair: Optional[np.ndarray]


@dataclass(frozen=True)
class HeldBitEvent:
    kind: str
    layer: int
    phase: int


class LeafPolicy(ABC):
    """Decision rule applied at every leaf of the recursion tree."""

    @abstractmethod
    def decide(self, state, spec, phase):
        """Return the decided bit per path (uint8, shape (P,)); may reorder state paths first."""
        pass


class HardDecision(LeafPolicy):
    """Plain SC: 1 iff the position is not frozen and the leaf LLR is negative."""

    def decide(self, state, spec, phase):
        alpha = state.L(spec.m)[:, 0]
        if phase in spec.frozen:
            bits = np.zeros(state.paths, dtype=np.uint8)
        else:
            bits = (alpha < 0).astype(np.uint8)
        state.metric += decision_penalty(alpha, bits)
        return bits


class GenieDecision(LeafPolicy):
    """Feeds the true bits back and records per-position decision statistics."""

    def __init__(self, truth):
        self.truth = np.asarray(truth, dtype=np.uint8)
        n = self.truth.shape[-1]
        self.errors = np.zeros(n, dtype=np.int64)
        self.signed_llr_sum = np.zeros(n)

    def decide(self, state, spec, phase):
        alpha = state.L(spec.m)[:, 0]
        truth = self.truth[:, phase - 1]
        self.errors[phase - 1] += int(np.count_nonzero((alpha < 0) != truth.astype(bool)))
        self.signed_llr_sum[phase - 1] += float(np.sum(np.where(truth, -alpha, alpha)))
        return truth.copy()


def _offsets(sizes):
    return np.concatenate(([0], np.cumsum(sizes))).astype(np.intp)


class DecoderState:
    """All arrays of one decoder run, stacked over P paths."""

    _FLOAT_ARRAYS = ('llr', 'rpair', 'stored', 'mid', 'leaf_llr', 'metric', 'leaf_metric')
    _BIT_ARRAYS = ('bits', 'held', 'message')

    def __init__(self, m, paths, options=None, ops=None, policy=None):
        self.m = m
        self.n = 1 << m
        self.options = options or DecoderOptions()
        self.ops = ops if ops is not None else OpCounter()
        self.policy = policy or HardDecision()
        self.trace = [] if self.options.trace else None
        self._full = _offsets([1 << (m - lam) for lam in range(m + 1)])
        self._half = _offsets([1 << (m - lam - 1) for lam in range(m)])
        fill = np.nan if self.options.debug else 0.0
        total, half_total = int(self._full[-1]), int(self._half[-1])
        self.llr = np.full((paths, total), fill)
        self.rpair = np.full((paths, total, 2), fill)
        self.stored = np.full((paths, total), fill)
        self.mid = np.full((paths, half_total, 2, 2), fill)
        self.bits = np.zeros((paths, total), dtype=np.uint8)
        self.held = np.zeros((paths, half_total), dtype=np.uint8)
        self.message = np.zeros((paths, self.n), dtype=np.uint8)
        self.leaf_llr = np.zeros((paths, self.n))
        self.metric = np.zeros(paths)
        self.leaf_metric = np.zeros((paths, self.n))

    @property
    def paths(self):
        return self.llr.shape[0]

    def L(self, lam):
        return self.llr[:, self._full[lam]:self._full[lam + 1]]

    def R(self, lam):
        return self.rpair[:, self._full[lam]:self._full[lam + 1]]

    def S(self, lam):
        return self.stored[:, self._full[lam]:self._full[lam + 1]]

    def B(self, lam):
        return self.bits[:, self._full[lam]:self._full[lam + 1]]

    def H(self, lam):
        return self.held[:, self._half[lam]:self._half[lam + 1]]

    def M(self, lam):
        return self.mid[:, self._half[lam]:self._half[lam + 1]]

    def take(self, rows):
        """Replace every path by a copy of path ``rows[p]`` (paths may be dropped or duplicated)."""
        rows = np.asarray(rows, dtype=np.intp)
        for name in self._FLOAT_ARRAYS + self._BIT_ARRAYS:
            setattr(self, name, getattr(self, name)[rows])

    def separated(self, spec, lam, i):
        if self.options.prune:
            return spec.right_separated(lam, i)
        return i == 1 << lam

    # --- debug-mode checks ---

    def poison(self, array):
        if self.options.debug:
            array[...] = np.nan

    def require_set(self, values, what, lam, i):
        if self.options.debug and np.isnan(values).any():
            raise UnsetValueError(f"{what} read before it was computed at node ({lam}, {i})")

    def cross_check(self, reused, recomputed, what, lam, i):
        if self.options.debug and not np.allclose(reused, recomputed, rtol=0.0, atol=config.DEBUG_TOLERANCE):
            worst = float(np.max(np.abs(np.asarray(reused) - np.asarray(recomputed))))
            raise ReuseMismatchError(f"Reused {what} differs from recomputation by {worst} at node ({lam}, {i})")


def _select(bits, pair):
    """pair[..., bits] for a trailing axis of size 2."""
    return np.where(bits.astype(bool), pair[..., 1], pair[..., 0])


def _parent_triples(state, lam, i):
    h = 1 << (state.m - lam - 1)
    llr, rpair = state.L(lam), state.R(lam)
    state.require_set(rpair, 'R', lam, i)
    return (LlrTriple(llr[:, :h], rpair[:, :h, 0], rpair[:, :h, 1]),
            LlrTriple(llr[:, h:], rpair[:, h:, 0], rpair[:, h:, 1]))


def _conditioned_triple(state, lam, i, kind, u1, ops):
    ta, tb = _parent_triples(state, lam, i)
    return TRIPLES[kind](*lozenge_triple(ta, tb, u1, ops), ops)


def _mid_row(mid, u1):
    return np.where(u1.astype(bool)[..., None], mid[:, :, 1, :], mid[:, :, 0, :])


def _store_mid_row(mid, u1, m0, m1):
    values = np.stack((m0, m1), axis=-1)
    picked = u1.astype(bool)[..., None]
    mid[:, :, 0, :] = np.where(picked, mid[:, :, 0, :], values)
    mid[:, :, 1, :] = np.where(picked, values, mid[:, :, 1, :])


def calc_left(state, spec, lam, i):
    """Prepare L (and R when needed) of the left child (lam+1, 2i-1)."""
    ops, child, h = state.ops, lam + 1, 1 << (state.m - lam - 1)
    llr = state.L(lam)
    la, lb = llr[:, :h], llr[:, h:]
    target = state.L(child)
    if state.options.reuse and i > 1 and not state.separated(spec, child, 2 * i - 2):
        reused = state.S(child)
        state.require_set(reused, 'stored R', lam, i)
        state.cross_check(reused, f_minus(la, lb), 'left L', lam, i)
        target[...] = reused
    else:
        target[...] = f_minus(la, lb, ops)

    out = state.R(child)
    if state.separated(spec, child, 2 * i - 1):
        state.poison(out)
        return
    kind = spec.transform_at(child, 2 * i)
    if kind is None:
        out[..., 0] = f_plus(la, lb, 0, ops)
        out[..., 1] = f_plus(la, lb, 1, ops)
        return
    mid = state.M(lam)
    for b in (0, 1):
        m0, m1, rout = _conditioned_triple(state, lam, i, kind, b, ops)
        mid[:, :, b, 0] = m0
        mid[:, :, b, 1] = m1
        out[..., b] = rout


def calc_middle(state, spec, lam, i):
    """Prepare the middle child (lam+1, 2i) once B(lam)[:, :h] holds its partner bits."""
    ops, child, h = state.ops, lam + 1, 1 << (state.m - lam - 1)
    llr = state.L(lam)
    la, lb = llr[:, :h], llr[:, h:]
    # partner bits: the decided left child, or the held bit when the left child was skipped
    u1 = state.B(lam)[:, :h].copy()
    kind = spec.transform_at(child, 2 * i)
    left_separated = state.separated(spec, child, 2 * i - 1)
    mid = state.M(lam)
    rout = None
    if kind is not None and (left_separated or not state.options.reuse):
        m0, m1, rout = _conditioned_triple(state, lam, i, kind, u1, ops)
        _store_mid_row(mid, u1, m0, m1)

    target = state.L(child)
    if state.options.reuse and not left_separated:
        reused = state.S(child)
        state.require_set(reused, 'stored R', lam, i)
        if state.options.debug:
            expected = (_conditioned_triple(state, lam, i, kind, u1, None)[2] if kind
                        else f_plus(la, lb, u1))
            state.cross_check(reused, expected, 'middle L', lam, i)
        target[...] = reused
    elif kind is None:
        target[...] = f_plus(la, lb, u1, ops)
    else:
        target[...] = rout

    out = state.R(child)
    if state.separated(spec, child, 2 * i):
        state.poison(out)
        return
    if kind is None:
        ta, tb = _parent_triples(state, lam, i)
        out[..., 0] = lozenge_right(ta, tb, u1, 0, ops)
        out[..., 1] = lozenge_right(ta, tb, u1, 1, ops)
        return
    row = _mid_row(mid, u1)
    state.require_set(row, 'M', lam, i)
    if state.options.debug and rout is None:
        m0, m1, _ = _conditioned_triple(state, lam, i, kind, u1, None)
        state.cross_check(row, np.stack((m0, m1), axis=-1), 'middle R', lam, i)
    out[...] = row


def calc_right(state, spec, lam, i):
    """Prepare the extra right child (lam+1, 2i+1) of a swap/add phase."""
    ops, child, h = state.ops, lam + 1, 1 << (state.m - lam - 1)
    bits = state.B(lam)
    u1, u2 = bits[:, :h].copy(), bits[:, h:].copy()
    kind = spec.transform_at(child, 2 * i)
    target = state.L(child)
    if state.options.reuse:
        reused = _select(u2, _mid_row(state.M(lam), u1))
        state.require_set(reused, 'M', lam, i)
        if state.options.debug:
            m0, m1, _ = _conditioned_triple(state, lam, i, kind, u1, None)
            state.cross_check(reused, np.where(u2.astype(bool), m1, m0), 'right L', lam, i)
        target[...] = reused
    else:
        m0, m1, _ = _conditioned_triple(state, lam, i, kind, u1, ops)
        target[...] = np.where(u2.astype(bool), m1, m0)

    out = state.R(child)
    if state.separated(spec, child, 2 * i + 1):
        state.poison(out)
        return
    ta, tb = _parent_triples(state, lam, i)
    right = RIGHT_KERNELS[kind]
    out[..., 0] = right(ta, tb, u1, u2, 0, ops)
    out[..., 1] = right(ta, tb, u1, u2, 1, ops)


def _keep_decided_r(state, spec, lam, i):
    """S(lam) = R(lam) at the decided bits, for the next phase of this layer."""
    if state.separated(spec, lam, i):
        state.poison(state.S(lam))
        return
    rpair = state.R(lam)
    state.require_set(rpair, 'R', lam, i)
    state.S(lam)[...] = _select(state.B(lam), rpair)


def _record_visit(state, spec, lam, i):
    rpair = None if state.separated(spec, lam, i) else state.R(lam).copy()
    state.trace.append(NodeVisit(lam, i, state.L(lam).copy(), rpair))


def _decide_leaf(state, spec, i):
    m = spec.m
    alpha = state.L(m)[:, 0]
    state.require_set(alpha, 'L', m, i)
    state.leaf_llr[:, i - 1] = alpha
    bits = state.policy.decide(state, spec, i)
    # the policy may have replaced the state arrays
    state.B(m)[:, 0] = bits
    state.message[:, i - 1] = bits
    state.leaf_metric[:, i - 1] = state.metric
    _keep_decided_r(state, spec, m, i)


def decode_node(state, spec, lam, i):
    """Decode node (lam, i); afterwards B(lam) holds its decided components."""
    if state.trace is not None:
        _record_visit(state, spec, lam, i)
    if lam == spec.m:
        _decide_leaf(state, spec, i)
        return
    child, h = lam + 1, 1 << (spec.m - lam - 1)
    state.poison(state.M(lam))
    union = spec.union(child)

    if i > 1 and 2 * (i - 1) in union:
        state.B(lam)[:, :h] = state.H(lam)
        if state.trace is not None:
            state.trace.append(HeldBitEvent('read', lam, i))
    else:
        calc_left(state, spec, lam, i)
        decode_node(state, spec, child, 2 * i - 1)
        state.B(lam)[:, :h] = state.B(child)

    calc_middle(state, spec, lam, i)
    decode_node(state, spec, child, 2 * i)
    kind = spec.transform_at(child, 2 * i)
    if kind is None:
        bits, r2 = state.B(lam), state.B(child)
        bits[:, :h] ^= r2
        bits[:, h:] = r2
    else:
        state.B(lam)[:, h:] = state.B(child)
        calc_right(state, spec, lam, i)
        decode_node(state, spec, child, 2 * i + 1)
        bits = state.B(lam)
        r1, r2, r3 = bits[:, :h].copy(), bits[:, h:].copy(), state.B(child)
        if kind == 'swap':
            bits[:, :h] = r1 ^ r3
            bits[:, h:] = r3
            state.H(lam)[...] = r2
        else:
            bits[:, :h] = r1 ^ r2 ^ r3
            bits[:, h:] = r2 ^ r3
            state.H(lam)[...] = r3
        if state.trace is not None:
            state.trace.append(HeldBitEvent('write', lam, i))
    _keep_decided_r(state, spec, lam, i)


def prepare_llrs(spec, channel_llrs, options, check_finite=True):
    llrs = np.array(channel_llrs, dtype=np.float64, copy=True)
    if llrs.ndim == 1:
        llrs = llrs[None, :]
    if llrs.ndim != 2 or llrs.shape[1] != spec.n:
        raise ValueError(f"Channel LLRs must have length n={spec.n}, got shape {np.shape(channel_llrs)}")
    if check_finite and not np.all(np.isfinite(llrs)):
        raise ValueError("Channel LLRs must be finite")
    if options.llr_clamp:
        np.clip(llrs, -options.llr_clamp, options.llr_clamp, out=llrs)
    return llrs


def decode_frames(spec, channel_llrs, policy, options=None, ops=None, check_finite=True):
    """Run the recursion for a batch of frames (one path per frame) and return the final state."""
    require_valid(spec)
    options = options or DecoderOptions()
    llrs = prepare_llrs(spec, channel_llrs, options, check_finite)
    state = DecoderState(spec.m, llrs.shape[0], options, ops, policy)
    state.L(0)[...] = llrs
    decode_node(state, spec, 0, 1)
    logging.debug(f"Decoded {llrs.shape[0]} frame(s) of length {spec.n}")
    return state


def sc_decode(spec, channel_llrs, options=None, ops=None):
    """(message, codeword) for one frame, or stacked arrays for a (F, n) batch."""
    state = decode_frames(spec, channel_llrs, HardDecision(), options, ops)
    message, codeword = state.message, state.B(0).copy()
    if np.ndim(channel_llrs) == 1:
        return message[0], codeword[0]
    return message, codeword
