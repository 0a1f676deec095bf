"""Brute-force references for the LLR recursions.

Everything here is exhaustive and only meant for short codes (n <= 16) and small
output alphabets. Channels are explicit probability tables; "approximate"
channel values take the max over all continuations of the message instead of
the sum, which is what makes the min-sum recursions exact.
"""
import itertools
import logging
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache

import numpy as np

from codespec import CodeSpec
from encoder import build_message, encode, gen_matrix
from llr_kernels import (LlrTriple, TRIPLES, RIGHT_KERNELS, f_minus, f_plus, lozenge_right,
                         lozenge_triple, vartriangle_right)

MAX_ORACLE_LENGTH = 16
MAX_ML_BITS = 20


@dataclass(frozen=True)
class DbiChannelTable:
    """V(y | a, b) for a finite output alphabet; probs has shape (q, 2, 2)."""

    outputs: tuple
    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=np.float64)
        if probs.ndim != 3 or probs.shape[1:] != (2, 2) or probs.shape[0] != len(self.outputs):
            raise ValueError(f"Channel table needs shape ({len(self.outputs)}, 2, 2), got {probs.shape}")
        if np.any(probs < 0):
            raise ValueError("Channel probabilities must be non-negative")
        object.__setattr__(self, 'probs', probs)

    @property
    def size(self):
        return len(self.outputs)

    def is_normalized(self, tol=1e-12):
        return bool(np.allclose(self.probs.sum(axis=0), 1.0, atol=tol))


def random_table(q, rng, low=0.05):
    """A normalized table with strictly positive entries."""
    probs = rng.uniform(low, 1.0, size=(q, 2, 2))
    probs /= probs.sum(axis=0, keepdims=True)
    return DbiChannelTable(tuple(range(q)), probs)


class Transform(Enum):
    """The nine double-bit-input transforms: (kind of adjacent-bit transform, role of the child)."""

    DOWN = ('plain', 'left')
    LOZENGE = ('plain', 'middle')
    UP = ('plain', 'right')
    SWAP_DOWN = ('swap', 'left')
    SWAP_LOZENGE = ('swap', 'middle')
    SWAP_UP = ('swap', 'right')
    ADD_DOWN = ('add', 'left')
    ADD_LOZENGE = ('add', 'middle')
    ADD_UP = ('add', 'right')

    @property
    def kind(self):
        return self.value[0]

    @property
    def role(self):
        return self.value[1]

    @property
    def conditioning_bits(self):
        return {'left': 0, 'middle': 1, 'right': 2}[self.role]

    @classmethod
    def of(cls, kind, role):
        return cls((kind, role))


def _parent_inputs(kind, u1, u2, u3, u4):
    """Inputs (x1, x2) of the first parent and (x3, x4) of the second for message bits u1..u4."""
    if kind == 'swap':
        return u1 ^ u3, u2 ^ u4, u3, u4
    if kind == 'add':
        return u1 ^ u2 ^ u3, u3 ^ u4, u2 ^ u3, u4
    return u1 ^ u2, u3 ^ u4, u2, u4


def combine(transform, first, second, fixed=()):
    """Max-product combination of two parent value arrays (..., 2, 2) into the child's (..., 2, 2).

    ``fixed`` holds the conditioning bits: () for left, (u1,) for middle, (u1, u2) for right.
    """
    shape = np.broadcast_shapes(first.shape, second.shape)
    out = np.zeros(shape)
    for u in itertools.product((0, 1), repeat=4):
        if tuple(u[:len(fixed)]) != tuple(fixed):
            continue
        x1, x2, x3, x4 = _parent_inputs(transform.kind, *u)
        a, b = u[len(fixed)], u[len(fixed) + 1]
        np.maximum(out[..., a, b], first[..., x1, x2] * second[..., x3, x4], out=out[..., a, b])
    return out


def transform_table(table, transform):
    """The table of the child channel; outputs are (y1, y2, *conditioning bits)."""
    first, second = table.probs[:, None], table.probs[None, :]
    outputs, blocks = [], []
    for fixed in itertools.product((0, 1), repeat=transform.conditioning_bits):
        blocks.append(combine(transform, first, second, fixed))
    q = table.size
    probs = np.empty((q, q, len(blocks), 2, 2))
    for c, block in enumerate(blocks):
        probs[:, :, c] = block
    conds = list(itertools.product((0, 1), repeat=transform.conditioning_bits))
    for y1, y2 in itertools.product(range(q), repeat=2):
        for fixed in conds:
            outputs.append((table.outputs[y1], table.outputs[y2]) + fixed)
    return DbiChannelTable(tuple(outputs), probs.reshape(-1, 2, 2))


def table_llrs(table):
    """Exact log-ratios of a table: L per output, and R[:, a] conditioned on the first input."""
    with np.errstate(divide='ignore'):
        logs = np.log(table.probs)
    llr = logs[:, 0, :].max(axis=1) - logs[:, 1, :].max(axis=1)
    rpair = logs[:, :, 0] - logs[:, :, 1]
    return llr, rpair


def kernel_llrs(table, transform):
    """(L, R) of ``transform_table(table, transform)`` predicted by the min-sum kernels."""
    base_l, base_r = table_llrs(table)
    q = table.size
    y1, y2 = np.meshgrid(np.arange(q), np.arange(q), indexing='ij')
    ta = LlrTriple(base_l[y1], base_r[y1, 0], base_r[y1, 1])
    tb = LlrTriple(base_l[y2], base_r[y2, 0], base_r[y2, 1])
    kind = transform.kind
    blocks = []
    for fixed in itertools.product((0, 1), repeat=transform.conditioning_bits):
        if transform.role == 'left':
            llr = f_minus(ta.l, tb.l)
            if kind == 'plain':
                r = [f_plus(ta.l, tb.l, a) for a in (0, 1)]
            else:
                r = [TRIPLES[kind](*lozenge_triple(ta, tb, a))[2] for a in (0, 1)]
        elif transform.role == 'middle':
            (u1,) = fixed
            if kind == 'plain':
                llr = f_plus(ta.l, tb.l, u1)
                r = [lozenge_right(ta, tb, u1, a) for a in (0, 1)]
            else:
                m0, m1, llr = TRIPLES[kind](*lozenge_triple(ta, tb, u1))
                r = [m0, m1]
        else:
            u1, u2 = fixed
            if kind == 'plain':
                llr = lozenge_right(ta, tb, u1, u2)
                r = [vartriangle_right(ta, tb, u1, u2, a) for a in (0, 1)]
            else:
                m0, m1, _ = TRIPLES[kind](*lozenge_triple(ta, tb, u1))
                llr = m1 if u2 else m0
                r = [RIGHT_KERNELS[kind](ta, tb, u1, u2, a) for a in (0, 1)]
        blocks.append((llr, np.stack(r, axis=-1)))
    llr = np.stack([b[0] for b in blocks], axis=2).reshape(-1)
    rpair = np.stack([b[1] for b in blocks], axis=2).reshape(-1, 2)
    return llr, rpair


def kernel_discrepancy(table, transform):
    """Largest |kernel - exhaustive| over all outputs of the transformed table."""
    exact_l, exact_r = table_llrs(transform_table(table, transform))
    kernel_l, kernel_r = kernel_llrs(table, transform)
    return float(max(np.max(np.abs(exact_l - kernel_l)), np.max(np.abs(exact_r - kernel_r))))


# --- Exhaustive sub-code evaluation ---

def subcode_spec(spec, lam):
    """The code formed by layers 1..lam of ``spec`` (no frozen positions)."""
    return CodeSpec(m=lam, k=1 << lam, frozen=frozenset(),
                    swap_sets={l: spec.swap_sets.get(l, ()) for l in range(2, lam + 1)},
                    add_sets={l: spec.add_sets.get(l, ()) for l in range(2, lam + 1)})


@lru_cache(maxsize=32)
def subcode_codewords(spec, lam):
    """Codewords of every message of the layer-``lam`` sub-code; message index has u_1 as MSB."""
    size = 1 << lam
    if size > MAX_ORACLE_LENGTH:
        raise ValueError(f"Exhaustive evaluation is limited to length {MAX_ORACLE_LENGTH}, got {size}")
    generator = np.array([[1]], dtype=np.int64) if lam == 0 else gen_matrix(subcode_spec(spec, lam)).astype(np.int64)
    messages = (np.arange(1 << size)[:, None] >> np.arange(size - 1, -1, -1)) & 1
    codewords = (messages @ generator) % 2
    codewords.setflags(write=False)
    return codewords


def _prefix_block(codewords, prefix, phase):
    size = codewords.shape[1]
    start = int(''.join(str(int(b)) for b in prefix) or '0', 2) << (size - phase + 1)
    return codewords[start:start + (1 << (size - phase + 1))]


def _phase_values(scores, phase, size):
    """[a, b] max over continuations of a prefix block of scores; constant in b at the last phase."""
    if phase == size:
        return np.repeat(scores.reshape(2)[:, None], 2, axis=1)
    return scores.reshape(2, 2, -1).max(axis=2)


def node_llrs(spec, channel_llrs, lam, phase, prefix):
    """Exact max-log (L, R) of node (lam, phase) for every coordinate.

    ``prefix`` has shape (phase - 1, 2**(m - lam)): the decided layer-lam
    components 1..phase-1 per coordinate.
    """
    llrs = np.asarray(channel_llrs, dtype=np.float64)
    coords = 1 << (spec.m - lam)
    codewords = subcode_codewords(spec, lam).astype(np.float64)
    prefix = np.asarray(prefix, dtype=np.uint8).reshape(phase - 1, coords)
    out_l, out_r = np.empty(coords), np.empty((coords, 2))
    for beta in range(coords):
        block = _prefix_block(codewords, prefix[:, beta], phase)
        values = _phase_values(-(block @ llrs[beta::coords]), phase, 1 << lam)
        out_l[beta] = values[0].max() - values[1].max()
        out_r[beta] = values[:, 0] - values[:, 1]
    return out_l, out_r


def brute_sequential_decode(spec, channel_llrs, return_llrs=False):
    """Bit-by-bit decisions maximizing the approximate channel value, frozen bits forced to 0."""
    llrs = np.atleast_2d(np.asarray(channel_llrs, dtype=np.float64))
    codewords = subcode_codewords(spec, spec.m).astype(np.float64)
    n = spec.n
    decisions = np.zeros((llrs.shape[0], n), dtype=np.uint8)
    leaf_llrs = np.zeros((llrs.shape[0], n))
    for f, frame in enumerate(llrs):
        scores = -(codewords @ frame)
        start = 0
        for j in range(1, n + 1):
            size = 1 << (n - j + 1)
            block = scores[start:start + size]
            alpha = block[:size // 2].max() - block[size // 2:].max()
            bit = 0 if j in spec.frozen else int(alpha < 0)
            leaf_llrs[f, j - 1] = alpha
            decisions[f, j - 1] = bit
            start += bit * (size // 2)
    if np.ndim(channel_llrs) == 1:
        decisions, leaf_llrs = decisions[0], leaf_llrs[0]
    return (decisions, leaf_llrs) if return_llrs else decisions


def brute_ml(spec, channel_llrs):
    """(message, codeword) maximizing the channel likelihood over every codeword."""
    bits = spec.k
    if bits > MAX_ML_BITS:
        raise ValueError(f"Exhaustive ML is limited to {MAX_ML_BITS} payload bits, got {bits}")
    payloads = ((np.arange(1 << bits)[:, None] >> np.arange(bits - 1, -1, -1)) & 1).astype(np.uint8)
    messages = build_message(spec, payloads)
    codewords = encode(spec, messages)
    best = int(np.argmax(-(codewords.astype(np.float64) @ np.asarray(channel_llrs, dtype=np.float64))))
    return messages[best], codewords[best]


# --- Recursive evaluation of approximate channels ---

@dataclass(frozen=True)
class LemmaSource:
    """One relation expressing phase ``phase`` at layer ``layer`` through parent phase ``parent``."""

    case: str
    layer: int
    phase: int
    parent: int
    transform: Transform


def _parent_case(spec, lam, i):
    swaps, union = spec.swap_sets.get(lam, ()), spec.union(lam)
    if 2 * i in swaps:
        return 'i', 'swap', ('left', 'middle', 'right')
    if 2 * i in union:
        return 'ii', 'add', ('left', 'middle', 'right')
    if 2 * (i - 1) in swaps and 2 * (i + 1) in union:
        return 'iii', 'plain', ('middle',)
    if 2 * (i - 1) in swaps:
        return 'iv', 'plain', ('middle', 'right')
    # a left child whose left neighbour was added into it has an input-dependent parent output
    left = () if 2 * (i - 1) in union else ('left',)
    if 2 * (i + 1) in union:
        return 'v', 'plain', left + ('middle',)
    return 'vi', 'plain', left + ('middle', 'right')


def lemma_sources(spec, lam, phase):
    """All relations that give the layer-``lam`` channel of ``phase`` from a layer lam-1 channel."""
    if phase % 2 == 0:
        candidates = [(phase // 2, 'middle')]
    else:
        candidates = [((phase + 1) // 2, 'left'), ((phase - 1) // 2, 'right')]
    sources = []
    for parent, role in candidates:
        if not 1 <= parent <= 1 << (lam - 1):
            continue
        case, kind, roles = _parent_case(spec, lam, parent)
        if role in roles:
            sources.append(LemmaSource(case, lam, phase, parent, Transform.of(kind, role)))
    return sources


def _mixed_prefix(spec, lam, prefix):
    """v = prefix . Q_lam on the known prefix (unknown tail padded with zeros)."""
    v = np.zeros(1 << lam, dtype=np.uint8)
    v[:len(prefix)] = prefix
    rows = v.reshape(-1, 1)
    for i in sorted(spec.swap_sets.get(lam, ())):
        rows[[i - 1, i]] = rows[[i, i - 1]]
    for i in sorted(spec.add_sets.get(lam, ())):
        rows[i - 1] ^= rows[i]
    return v


def base_values(w, y):
    """Padded layer-0 value table [a, b] = W(y | a)."""
    return np.repeat(np.asarray(w, dtype=np.float64)[y][:, None], 2, axis=1)


def direct_values(spec, w, lam, phase, ys, prefix):
    """[a, b] = max over continuations of the layer-``lam`` sub-code likelihood."""
    size = 1 << lam
    block = _prefix_block(subcode_codewords(spec, lam), prefix, phase)
    probs = np.asarray(w, dtype=np.float64)[np.asarray(ys)]
    likelihood = probs[np.arange(size)[None, :], block].prod(axis=1)
    return _phase_values(likelihood, phase, size)


def apply_source(spec, source, ys, prefix, parent_values):
    """Evaluate one relation; ``parent_values(layer, phase, ys, prefix)`` supplies the parent tables."""
    i, lam, transform = source.parent, source.layer, source.transform
    v = _mixed_prefix(spec, lam, prefix)
    known = v[:2 * i - 2]
    p1, p2 = tuple(known[0::2] ^ known[1::2]), tuple(known[1::2])
    first = parent_values(lam - 1, i, tuple(ys[0::2]), p1)
    second = parent_values(lam - 1, i, tuple(ys[1::2]), p2)
    fixed = ()
    if transform.role != 'left':
        fixed = (int(v[2 * i - 2]),)
    if transform.role == 'right':
        fixed += (int(prefix[2 * i - 1]),)
    return combine(transform, first, second, fixed)


class ApproxChannelEval:
    """Approximate channel values computed layer by layer through the first applicable relation."""

    def __init__(self, spec, w, memoize=True):
        self.spec = spec
        self.w = np.asarray(w, dtype=np.float64)
        self.memoize = memoize
        self._memo = {}

    def values(self, lam, phase, ys, prefix):
        key = (lam, phase, tuple(ys), tuple(prefix))
        if self.memoize and key in self._memo:
            return self._memo[key]
        if lam == 0:
            result = base_values(self.w, ys[0])
        else:
            source = lemma_sources(self.spec, lam, phase)[0]
            result = apply_source(self.spec, source, ys, prefix, self.values)
        if self.memoize:
            self._memo[key] = result
        return result


@dataclass
class Lemma1Report:
    max_discrepancy: float = 0.0
    checks: int = 0
    cases_covered: set = field(default_factory=set)
    memo_consistent: bool = True

    def to_dict(self):
        return {'max_discrepancy': self.max_discrepancy, 'checks': self.checks,
                'cases_covered': sorted(self.cases_covered), 'memo_consistent': self.memo_consistent}


def _samples(rng, q, lam, phase, count, cap=256):
    size = 1 << lam
    if q ** size * 2 ** (phase - 1) <= cap:
        for ys in itertools.product(range(q), repeat=size):
            for prefix in itertools.product((0, 1), repeat=phase - 1):
                yield ys, prefix
        return
    for _ in range(count):
        yield (tuple(int(y) for y in rng.integers(0, q, size)),
               tuple(int(b) for b in rng.integers(0, 2, phase - 1)))


def verify_lemma1(spec, w, samples=20, seed=0):
    """Compare every relation, and the full recursion, against direct evaluation."""
    if spec.n > MAX_ORACLE_LENGTH:
        raise ValueError(f"Lemma verification is limited to length {MAX_ORACLE_LENGTH}, got {spec.n}")
    w = np.asarray(w, dtype=np.float64)
    rng = np.random.default_rng(seed)
    memoized, plain = ApproxChannelEval(spec, w), ApproxChannelEval(spec, w, memoize=False)
    report = Lemma1Report()

    def direct(lam, phase, ys, prefix):
        if lam == 0:
            return base_values(w, ys[0])
        return direct_values(spec, w, lam, phase, ys, prefix)

    for lam in range(1, spec.m + 1):
        for phase in range(1, (1 << lam) + 1):
            sources = lemma_sources(spec, lam, phase)
            for ys, prefix in _samples(rng, w.shape[0], lam, phase, samples):
                truth = direct(lam, phase, ys, prefix)
                for source in sources:
                    local = apply_source(spec, source, ys, prefix, direct)
                    report.max_discrepancy = max(report.max_discrepancy, float(np.max(np.abs(local - truth))))
                    report.cases_covered.add(source.case)
                    report.checks += 1
                recursive = memoized.values(lam, phase, ys, prefix)
                report.max_discrepancy = max(report.max_discrepancy, float(np.max(np.abs(recursive - truth))))
                if not np.array_equal(recursive, plain.values(lam, phase, ys, prefix)):
                    report.memo_consistent = False
    logging.info(f"Lemma check on m={spec.m}: {report.checks} relations, cases {sorted(report.cases_covered)}, "
                 f"max discrepancy {report.max_discrepancy:.3e}")
    return report
