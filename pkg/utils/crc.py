from functools import lru_cache

import numpy as np


def _check_lengths(k, crc):
    if crc.width >= k:
        raise ValueError(f"CRC width {crc.width} must be smaller than the payload length {k}")


def crc_remainder(bits, poly, width):
    """Shift-register CRC over ``bits`` (MSB first, zero initial register, no final XOR)."""
    mask = (1 << width) - 1
    r = 0
    for bit in bits:
        fb = ((r >> (width - 1)) & 1) ^ int(bit)
        r = (r << 1) & mask
        if fb:
            r ^= poly
    return r


def _register_bits(r, width):
    return np.array([(r >> (width - 1 - i)) & 1 for i in range(width)], dtype=np.uint8)


def crc_attach(info_bits, crc):
    """info_bits followed by their CRC, MSB first."""
    bits = np.asarray(info_bits, dtype=np.uint8)
    _check_lengths(bits.size, crc)
    return np.concatenate([bits, _register_bits(crc_remainder(bits, crc.poly, crc.width), crc.width)])


def crc_check(bits, crc):
    """True iff the trailing ``crc.width`` bits are the CRC of the leading ones."""
    bits = np.asarray(bits, dtype=np.uint8)
    payload, tail = bits[:-crc.width], bits[-crc.width:]
    _check_lengths(payload.size, crc)
    return bool(np.array_equal(_register_bits(crc_remainder(payload, crc.poly, crc.width), crc.width), tail))


@lru_cache(maxsize=32)
def crc_matrix(k, poly, width):
    """(k, width) GF(2) matrix mapping a payload to its CRC bits (the CRC is linear with zero init)."""
    rows = np.zeros((k, width), dtype=np.uint8)
    unit = np.zeros(k, dtype=np.uint8)
    for j in range(k):
        unit[j] = 1
        rows[j] = _register_bits(crc_remainder(unit, poly, width), width)
        unit[j] = 0
    rows.setflags(write=False)
    return rows


def _parity(payload, crc):
    matrix = crc_matrix(payload.shape[-1], crc.poly, crc.width).astype(np.int64)
    return (payload.astype(np.int64) @ matrix % 2).astype(np.uint8)


def crc_attach_batch(payload, crc):
    """Vectorized crc_attach over leading axes."""
    payload = np.asarray(payload, dtype=np.uint8)
    _check_lengths(payload.shape[-1], crc)
    return np.concatenate([payload, _parity(payload, crc)], axis=-1)


def crc_check_batch(bits, crc):
    """Vectorized crc_check over leading axes; returns a boolean array."""
    bits = np.asarray(bits, dtype=np.uint8)
    payload, tail = bits[..., :-crc.width], bits[..., -crc.width:]
    _check_lengths(payload.shape[-1], crc)
    return np.all(_parity(payload, crc) == tail, axis=-1)
