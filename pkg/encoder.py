"""Layered ABS+ encoder, generator matrices and payload placement.

Message vectors are uint8 arrays of length n = 2**m (or batches with a leading
frame axis). Position j of the message is the 1-based index j + 1.
"""
from functools import lru_cache

import numpy as np
from scipy import sparse

from codespec import require_valid
from utils.crc import crc_attach_batch, crc_check_batch

F_KERNEL = np.array([[1, 0], [1, 1]], dtype=np.uint8)
MAX_MATRIX_M = 16


def _as_bits(spec, u):
    bits = np.array(u, dtype=np.uint8, copy=True)
    if bits.ndim == 0 or bits.shape[-1] != spec.n:
        raise ValueError(f"Message must have length n={spec.n}, got shape {bits.shape}")
    if np.any(bits > 1):
        raise ValueError("Message entries must be 0 or 1")
    return bits


def _apply_transforms(rows, swaps, adds):
    """Q on the component axis (-2) of ``rows``: swaps first, then adds."""
    for i in sorted(swaps):
        rows[..., [i - 1, i], :] = rows[..., [i, i - 1], :]
    for i in sorted(adds):
        rows[..., i - 1, :] ^= rows[..., i, :]


def _run_layers(spec, x, stop):
    lead = x.shape[:-1]
    for lam in range(spec.m - 1, stop - 1, -1):
        half = 1 << (spec.m - lam - 1)
        rows = x.reshape(*lead, 1 << (lam + 1), half)
        _apply_transforms(rows, spec.swap_sets.get(lam + 1, ()), spec.add_sets.get(lam + 1, ()))
        pairs = x.reshape(*lead, 1 << lam, 2, half)
        pairs[..., 0, :] ^= pairs[..., 1, :]
    return x


def encode(spec, u):
    """Codeword of message ``u``; frozen positions of ``u`` must be zero."""
    require_valid(spec)
    bits = _as_bits(spec, u)
    frozen = np.array(sorted(spec.frozen), dtype=np.intp) - 1
    if frozen.size and np.any(bits[..., frozen]):
        raise ValueError("Message has a nonzero frozen bit")
    return _run_layers(spec, bits, 0)


def layer_components(spec, u, lam):
    """Layer-``lam`` components of the layered encoding, shape (..., 2**lam, 2**(m-lam))."""
    if not 0 <= lam <= spec.m:
        raise ValueError(f"Layer {lam} is out of range for m={spec.m}")
    bits = _as_bits(spec, u)
    x = _run_layers(spec, bits, lam)
    return x.reshape(*x.shape[:-1], 1 << lam, 1 << (spec.m - lam))


def encode_arikan(m, u):
    """Classical polar encoding c = u F^(kron m) by butterfly stages."""
    x = np.array(u, dtype=np.uint8, copy=True)
    n = 1 << m
    if x.shape[-1] != n:
        raise ValueError(f"Message must have length n={n}, got shape {x.shape}")
    lead = x.shape[:-1]
    step = 1
    while step < n:
        stage = x.reshape(*lead, n // (2 * step), 2, step)
        stage[..., 0, :] ^= stage[..., 1, :]
        step *= 2
    return x


def q_matrix(spec, lam):
    """Q_lam = product of the swap matrices, then the add matrices, of layer lam."""
    size = 1 << lam
    q = np.eye(size, dtype=np.uint8)
    # column operations on the identity, since messages multiply from the left
    _apply_transforms(q.T, spec.swap_sets.get(lam, ()), spec.add_sets.get(lam, ()))
    return q


@lru_cache(maxsize=64)
def gen_matrix(spec):
    """G_1 = F, G_lam = Q_lam (G_(lam-1) kron F) over GF(2).

    Q_lam has at most two ones per row, so the product is taken as a sparse
    matrix times a dense one.
    """
    if spec.m > MAX_MATRIX_M:
        raise ValueError(f"Generator matrices are limited to m <= {MAX_MATRIX_M}, got m={spec.m}")
    g = F_KERNEL.copy()
    for lam in range(2, spec.m + 1):
        q = sparse.csr_matrix(q_matrix(spec, lam))
        g = np.asarray(q @ np.kron(g, F_KERNEL)) % 2
        g = g.astype(np.uint8)
    g.setflags(write=False)
    return g


def build_message(spec, payload):
    """Place payload bits (plus CRC when the spec carries one) on the information positions."""
    bits = np.asarray(payload, dtype=np.uint8)
    if bits.shape[-1] != spec.k:
        raise ValueError(f"Payload must have k={spec.k} bits, got shape {bits.shape}")
    if spec.crc is not None:
        bits = crc_attach_batch(bits, spec.crc)
    u = np.zeros(bits.shape[:-1] + (spec.n,), dtype=np.uint8)
    u[..., np.array(spec.info_positions, dtype=np.intp) - 1] = bits
    return u


def extract_payload(spec, u):
    """(payload, crc_ok) from decoded message vectors; crc_ok is True without a CRC."""
    bits = np.asarray(u, dtype=np.uint8)[..., np.array(spec.info_positions, dtype=np.intp) - 1]
    if spec.crc is None:
        return bits, np.ones(bits.shape[:-1], dtype=bool)[()]
    return bits[..., :spec.k], crc_check_batch(bits, spec.crc)[()]
