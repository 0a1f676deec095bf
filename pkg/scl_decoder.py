"""Successive-cancellation list decoding of ABS+ polar codes.

Paths are rows of a shared DecoderState. Each path row carries its own B, H, L,
R, M and stored-R history, so copying a row on a split copies the whole path.
A batch of F frames with P paths each occupies F * P rows, frame-major.
"""
import heapq
from dataclasses import dataclass
from typing import Optional

import numpy as np

from codespec import CrcSpec, require_valid
from llr_kernels import decision_penalty
from sc_decoder import DecoderOptions, LeafPolicy, decode_node, DecoderState, prepare_llrs
from utils.crc import crc_attach, crc_check, crc_check_batch

__all__ = ['ListConfig', 'DecodedPath', 'ListDecision', 'BatchListResult', 'path_metric_update',
           'split_and_prune', 'prune_frames', 'scl_decode', 'scl_decode_batch', 'crc_attach', 'crc_check']


@dataclass(frozen=True)
class ListConfig:
    list_size: int = 1
    crc: Optional[CrcSpec] = None

    def __post_init__(self):
        if not isinstance(self.list_size, (int, np.integer)) or self.list_size < 1:
            raise ValueError(f"List size must be a positive integer, got {self.list_size}")

    @classmethod
    def for_spec(cls, spec, list_size=1):
        return cls(list_size=list_size, crc=spec.crc)


@dataclass(frozen=True)
class DecodedPath:
    message: np.ndarray
    codeword: np.ndarray
    metric: float
    crc_ok: bool


@dataclass(frozen=True)
class BatchListResult:
    """Best path per frame."""

    messages: np.ndarray
    codewords: np.ndarray
    metrics: np.ndarray
    crc_ok: np.ndarray


def path_metric_update(metric, alpha, bit):
    """Metric after deciding ``bit`` on a leaf with LLR ``alpha``."""
    return metric + decision_penalty(alpha, bit)


def split_and_prune(metrics, alphas, list_size):
    """Heap selection of the ``list_size`` best extensions of one frame's paths.

    Returns (parents, bits, metrics) of the survivors in (parent, bit) order.
    Ties go to the lower parent index, then to bit 0.
    """
    candidates = []
    for parent, (metric, alpha) in enumerate(zip(metrics, alphas)):
        for bit in (0, 1):
            candidates.append((float(path_metric_update(metric, alpha, bit)), parent, bit))
    survivors = sorted(heapq.nsmallest(list_size, candidates), key=lambda c: (c[1], c[2]))
    return (np.array([c[1] for c in survivors], dtype=np.intp),
            np.array([c[2] for c in survivors], dtype=np.uint8),
            np.array([c[0] for c in survivors]))


def prune_frames(metrics, alphas, list_size):
    """split_and_prune for every frame at once; ``metrics`` and ``alphas`` are (F, P)."""
    frames, paths = metrics.shape
    candidates = np.stack((path_metric_update(metrics, alphas, 0),
                           path_metric_update(metrics, alphas, 1)), axis=-1).reshape(frames, 2 * paths)
    keep = min(list_size, 2 * paths)
    chosen = np.sort(np.argsort(candidates, axis=1, kind='stable')[:, :keep], axis=1)
    return chosen // 2, (chosen % 2).astype(np.uint8), np.take_along_axis(candidates, chosen, axis=1)


class ListDecision(LeafPolicy):
    """Frozen leaves extend every path with 0; information leaves split and prune."""

    def __init__(self, list_size, frames):
        self.list_size = list_size
        self.frames = frames

    def decide(self, state, spec, phase):
        alpha = state.L(spec.m)[:, 0]
        if phase in spec.frozen:
            bits = np.zeros(state.paths, dtype=np.uint8)
            state.metric = path_metric_update(state.metric, alpha, bits)
            return bits
        per_frame = state.paths // self.frames
        parents, bits, metrics = prune_frames(state.metric.reshape(self.frames, per_frame),
                                              alpha.reshape(self.frames, per_frame), self.list_size)
        rows = (parents + per_frame * np.arange(self.frames)[:, None]).ravel()
        state.take(rows)
        state.metric = metrics.ravel()
        return bits.ravel()


def _run_list(spec, channel_llrs, cfg, options, ops, check_finite=True):
    require_valid(spec)
    options = options or DecoderOptions()
    llrs = prepare_llrs(spec, channel_llrs, options, check_finite)
    frames = llrs.shape[0]
    state = DecoderState(spec.m, frames, options, ops, ListDecision(cfg.list_size, frames))
    state.L(0)[...] = llrs
    decode_node(state, spec, 0, 1)
    per_frame = state.paths // frames
    return state, frames, per_frame


def _crc_flags(spec, cfg, messages):
    if cfg.crc is None:
        return np.ones(messages.shape[:-1], dtype=bool)
    info = messages[..., np.array(spec.info_positions, dtype=np.intp) - 1]
    return crc_check_batch(info, cfg.crc)


def _ranking(metrics, crc_ok):
    """Per frame, path order by metric with the best CRC-passing path moved to the front."""
    order = np.argsort(metrics, axis=1, kind='stable')
    passing = np.take_along_axis(crc_ok, order, axis=1)
    first = np.where(passing.any(axis=1), passing.argmax(axis=1), 0)
    ranked = order.copy()
    for f, pos in enumerate(first):
        if pos:
            ranked[f] = np.concatenate(([order[f, pos]], np.delete(order[f], pos)))
    return ranked


def scl_decode(spec, channel_llrs, cfg, options=None, ops=None):
    """Ranked surviving paths of one frame, best first."""
    if np.ndim(channel_llrs) != 1:
        raise ValueError("scl_decode takes a single frame; use scl_decode_batch for batches")
    state, _, per_frame = _run_list(spec, channel_llrs, cfg, options, ops)
    crc_ok = _crc_flags(spec, cfg, state.message)
    ranked = _ranking(state.metric[None, :], crc_ok[None, :])[0]
    codewords = state.B(0)
    return [DecodedPath(state.message[p].copy(), codewords[p].copy(), float(state.metric[p]), bool(crc_ok[p]))
            for p in ranked]


def scl_decode_batch(spec, channel_llrs, cfg, options=None, ops=None, check_finite=True):
    """Best path of every frame of a (F, n) batch."""
    state, frames, per_frame = _run_list(spec, channel_llrs, cfg, options, ops, check_finite)
    messages = state.message.reshape(frames, per_frame, spec.n)
    codewords = state.B(0).reshape(frames, per_frame, spec.n)
    metrics = state.metric.reshape(frames, per_frame)
    crc_ok = _crc_flags(spec, cfg, messages)
    best = _ranking(metrics, crc_ok)[:, 0]
    pick = np.arange(frames)
    return BatchListResult(messages[pick, best], codewords[pick, best], metrics[pick, best], crc_ok[pick, best])
