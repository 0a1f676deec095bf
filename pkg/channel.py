"""BPSK over AWGN and a binary symmetric channel, both returning channel LLRs.

Randomness is drawn per frame: frame f of a run seeded with s uses
Generator(Philox(SeedSequence([s, f, stream]))). Any frame can be regenerated
on its own, so batches may be split across workers without changing results.
"""
import math
from dataclasses import dataclass

import numpy as np

import config

NOISE_STREAM = 0
PAYLOAD_STREAM = 1


def frame_rng(seed, frame, stream=NOISE_STREAM):
    """Counter-based generator for one frame and one purpose."""
    if seed < 0 or frame < 0:
        raise ValueError(f"Seed and frame index must be non-negative, got seed={seed}, frame={frame}")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(frame), int(stream)])))


def random_bits(seed, first_frame, frames, width):
    """(frames, width) uniform bits from the payload stream of each frame."""
    out = np.empty((frames, width), dtype=np.uint8)
    for f in range(frames):
        out[f] = frame_rng(seed, first_frame + f, PAYLOAD_STREAM).integers(0, 2, width, dtype=np.uint8)
    return out


@dataclass(frozen=True)
class AwgnConfig:
    ebno_db: float
    rate: float
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.rate <= 1:
            raise ValueError(f"Code rate must lie in (0, 1], got {self.rate}")
        if not math.isfinite(self.ebno_db):
            raise ValueError(f"Eb/N0 must be finite, got {self.ebno_db}")
        if self.seed < 0:
            raise ValueError(f"Seed must be non-negative, got {self.seed}")

    @classmethod
    def for_spec(cls, spec, ebno_db, seed=0):
        """Rate k/n: CRC bits count as overhead."""
        return cls(ebno_db=float(ebno_db), rate=spec.k / spec.n, seed=seed)

    @property
    def sigma2(self):
        return 1.0 / (2.0 * self.rate * 10 ** (self.ebno_db / 10))


def awgn_transmit(codeword, cfg, first_frame=0):
    """Channel LLRs 2y/sigma^2 for y = (1 - 2c) + noise; a (F, n) batch uses frames first_frame.."""
    bits = np.asarray(codeword, dtype=np.uint8)
    batch = np.atleast_2d(bits)
    sigma2 = cfg.sigma2
    sigma = math.sqrt(sigma2)
    llrs = np.empty(batch.shape)
    for f, row in enumerate(batch):
        noise = frame_rng(cfg.seed, first_frame + f).standard_normal(row.size)
        llrs[f] = 2.0 * (1.0 - 2.0 * row + sigma * noise) / sigma2
    return llrs[0] if bits.ndim == 1 else llrs


def bsc_llr_magnitude(p, clamp=None):
    """ln((1 - p) / p), capped at the configured surrogate for infinity."""
    clamp = config.BSC_LLR_CLAMP if clamp is None else clamp
    if p == 0:
        return clamp
    return min(math.log((1 - p) / p), clamp)


def bsc_transmit(codeword, p, seed, first_frame=0, clamp=None):
    """Flip every bit independently with probability p; LLR = +-ln((1 - p) / p)."""
    if not 0 <= p < 0.5:
        raise ValueError(f"Crossover probability must lie in [0, 0.5), got {p}")
    bits = np.asarray(codeword, dtype=np.uint8)
    batch = np.atleast_2d(bits)
    magnitude = bsc_llr_magnitude(p, clamp)
    llrs = np.empty(batch.shape)
    for f, row in enumerate(batch):
        flips = frame_rng(seed, first_frame + f).random(row.size) < p
        llrs[f] = magnitude * (1.0 - 2.0 * (row ^ flips))
    return llrs[0] if bits.ndim == 1 else llrs
