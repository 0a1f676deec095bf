"""Classical polar SC / SCL min-sum decoding, kept independent of the ABS+ decoder.

Used as the differential reference for codes without swap/add transforms and
as the baseline decoder in simulation campaigns.
"""
from typing import NamedTuple

import numpy as np

from llr_kernels import OpCounter, f_minus, f_plus
from utils.crc import crc_check_batch


class ArikanPath(NamedTuple):
    message: np.ndarray
    codeword: np.ndarray
    metric: float
    crc_ok: bool


class ArikanState:
    """Per-layer LLRs and partial sums, each with a leading path axis."""

    def __init__(self, m, paths):
        self.m = m
        self.llr = [np.zeros((paths, 1 << (m - lam))) for lam in range(m + 1)]
        self.psum = [np.zeros((paths, 1 << (m - lam)), dtype=np.uint8) for lam in range(m + 1)]
        self.message = np.zeros((paths, 1 << m), dtype=np.uint8)
        self.metric = np.zeros(paths)

    def keep(self, rows):
        self.llr = [a[rows] for a in self.llr]
        self.psum = [a[rows] for a in self.psum]
        self.message = self.message[rows]
        self.metric = self.metric[rows]


def _frame_llrs(channel_llrs, n):
    llrs = np.array(channel_llrs, dtype=np.float64)
    if llrs.shape[-1] != n or llrs.ndim not in (1, 2):
        raise ValueError(f"Channel LLRs must have length n={n}, got shape {llrs.shape}")
    if not np.all(np.isfinite(llrs)):
        raise ValueError("Channel LLRs must be finite")
    return np.atleast_2d(llrs)


def _length(channel_llrs):
    n = np.shape(channel_llrs)[-1]
    m = n.bit_length() - 1
    if n < 2 or 1 << m != n:
        raise ValueError(f"Code length must be a power of two >= 2, got {n}")
    return m


class _Decoder:
    def __init__(self, m, frozen, state, ops, decide):
        self.m = m
        self.frozen = frozenset(frozen)
        self.state = state
        self.ops = ops
        self.decide = decide

    def descend(self, lam, phase):
        st = self.state
        if lam == self.m:
            self.decide(st.llr[lam][:, 0], phase)
            return
        half = 1 << (self.m - lam - 1)
        llr = st.llr[lam]
        st.llr[lam + 1][...] = f_minus(llr[:, :half], llr[:, half:], self.ops)
        self.descend(lam + 1, 2 * phase - 1)
        st = self.state
        st.psum[lam][:, :half] = st.psum[lam + 1]
        llr = st.llr[lam]
        st.llr[lam + 1][...] = f_plus(llr[:, :half], llr[:, half:], st.psum[lam][:, :half], self.ops)
        self.descend(lam + 1, 2 * phase)
        st = self.state
        st.psum[lam][:, :half] ^= st.psum[lam + 1]
        st.psum[lam][:, half:] = st.psum[lam + 1]


def arikan_sc(frozen, channel_llrs, ops=None):
    """(message, codeword) by classical min-sum SC; batches on a leading axis."""
    m = _length(channel_llrs)
    llrs = _frame_llrs(channel_llrs, 1 << m)
    state = ArikanState(m, llrs.shape[0])
    state.llr[0][...] = llrs
    frozen = frozenset(frozen)

    def decide(alpha, phase):
        bit = np.zeros(alpha.shape, dtype=np.uint8) if phase in frozen else (alpha < 0).astype(np.uint8)
        state.psum[m][:, 0] = bit
        state.message[:, phase - 1] = bit

    _Decoder(m, frozen, state, ops if ops is not None else OpCounter(), decide).descend(0, 1)
    if np.ndim(channel_llrs) == 1:
        return state.message[0], state.psum[0][0]
    return state.message, state.psum[0]


def _run_list(frozen, channel_llrs, list_size, ops):
    m = _length(channel_llrs)
    llrs = _frame_llrs(channel_llrs, 1 << m)
    frames = llrs.shape[0]
    frozen = frozenset(frozen)
    decoder = _Decoder(m, frozen, ArikanState(m, frames), ops if ops is not None else OpCounter(), None)
    decoder.state.llr[0][...] = llrs

    def decide(alpha, phase):
        st = decoder.state
        magnitude = np.abs(alpha)
        if phase in frozen:
            st.metric = st.metric + np.where(alpha < 0, magnitude, 0.0)
            bits = np.zeros(alpha.shape, dtype=np.uint8)
        else:
            paths = st.metric.size // frames
            # candidate c = 2 * path + bit
            cost = np.empty((frames, 2 * paths))
            cost[:, 0::2] = (st.metric + np.where(alpha < 0, magnitude, 0.0)).reshape(frames, paths)
            cost[:, 1::2] = (st.metric + np.where(alpha < 0, 0.0, magnitude)).reshape(frames, paths)
            survivors = min(list_size, 2 * paths)
            picked = np.sort(np.argsort(cost, axis=1, kind='stable')[:, :survivors], axis=1)
            decoder.state.keep((picked // 2 + paths * np.arange(frames)[:, None]).ravel())
            st = decoder.state
            st.metric = np.take_along_axis(cost, picked, axis=1).ravel()
            bits = (picked % 2).astype(np.uint8).ravel()
        st.psum[m][:, 0] = bits
        st.message[:, phase - 1] = bits

    decoder.decide = decide
    decoder.descend(0, 1)
    return decoder.state, frames, m


def _crc_flags(frozen, crc, messages, n):
    if crc is None:
        return np.ones(messages.shape[:-1], dtype=bool)
    info = np.array([i for i in range(n) if i + 1 not in frozen], dtype=np.intp)
    return crc_check_batch(messages[..., info], crc)


def _best_first(metric, ok):
    order = sorted(range(metric.size), key=lambda p: (metric[p], p))
    passing = [p for p in order if ok[p]]
    if passing:
        order.remove(passing[0])
        order.insert(0, passing[0])
    return order


def arikan_scl(frozen, channel_llrs, cfg, ops=None):
    """Ranked surviving paths of one frame, best first."""
    if np.ndim(channel_llrs) != 1:
        raise ValueError("arikan_scl takes a single frame; use arikan_scl_batch for batches")
    frozen = frozenset(frozen)
    state, _, m = _run_list(frozen, channel_llrs, cfg.list_size, ops)
    ok = _crc_flags(frozen, cfg.crc, state.message, 1 << m)
    return [ArikanPath(state.message[p].copy(), state.psum[0][p].copy(), float(state.metric[p]), bool(ok[p]))
            for p in _best_first(state.metric, ok)]


def arikan_scl_batch(frozen, channel_llrs, cfg, ops=None):
    """(messages, codewords, metrics) of the best path of every frame."""
    frozen = frozenset(frozen)
    state, frames, m = _run_list(frozen, channel_llrs, cfg.list_size, ops)
    n = 1 << m
    paths = state.metric.size // frames
    messages = state.message.reshape(frames, paths, n)
    codewords = state.psum[0].reshape(frames, paths, n)
    metrics = state.metric.reshape(frames, paths)
    ok = _crc_flags(frozen, cfg.crc, messages, n)
    best = np.array([_best_first(metrics[f], ok[f])[0] for f in range(frames)], dtype=np.intp)
    pick = np.arange(frames)
    return messages[pick, best], codewords[pick, best], metrics[pick, best]
