"""Frame-batch workers for simulation campaigns.

A batch is fully described by its BatchJob: frame f of the batch draws its
payload and noise from the per-frame streams of (seed, first_frame + f), so a
batch gives the same result in any process.
"""
import contextlib
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from channel import AwgnConfig, awgn_transmit, random_bits
from codespec import CodeSpec
from decoder_registry import DecoderFactory
from encoder import build_message, encode
from llr_kernels import OpCounter
from sc_decoder import DecoderOptions


class CampaignError(RuntimeError):
    """A batch could not be simulated."""


@dataclass(frozen=True)
class BatchJob:
    spec: CodeSpec
    decoder: str
    list_size: int
    ebno_db: float
    seed: int
    first_frame: int
    frames: int
    mode: str = 'default'


@dataclass(frozen=True)
class BatchResult:
    first_frame: int
    frames: int
    frame_errors: int
    additions: int
    comparisons: int


def simulate_frames(job, ops=None):
    """(transmitted codewords, decoded codewords) of one batch."""
    spec = job.spec
    options = DecoderOptions.for_mode(job.mode, debug=False)
    decoder = DecoderFactory.get_decoder(job.decoder, spec, job.list_size, options)
    if decoder is None:
        raise ValueError(f"Unknown decoder '{job.decoder}'")
    payload = random_bits(job.seed, job.first_frame, job.frames, spec.k)
    sent = encode(spec, build_message(spec, payload))
    llrs = awgn_transmit(sent, AwgnConfig.for_spec(spec, job.ebno_db, job.seed), first_frame=job.first_frame)
    _, decoded = decoder.decode_batch(llrs, ops)
    return sent, decoded


def process_batch(job):
    """Simulate one batch and count its frame errors and LLR operations."""
    try:
        ops = OpCounter()
        sent, decoded = simulate_frames(job, ops)
        errors = int(np.count_nonzero(np.any(sent != decoded, axis=1)))
        return BatchResult(job.first_frame, job.frames, errors, ops.additions, ops.comparisons)
    except Exception as e:
        logging.error(f"Batch at frame {job.first_frame} ({job.decoder}, {job.ebno_db} dB) failed: {e}",
                      exc_info=True)
        raise CampaignError(f"Batch at frame {job.first_frame} failed: {e}") from e


def open_pool(workers):
    """A process pool for more than one worker, otherwise an inline runner."""
    if workers > 1:
        return ProcessPoolExecutor(max_workers=workers)
    return contextlib.nullcontext(None)


def run_batches(jobs, pool=None):
    """Results of ``jobs`` in job order."""
    if pool is None:
        return [process_batch(job) for job in jobs]
    return list(pool.map(process_batch, jobs))
