"""FER campaigns, operation counting and the oracle-backed self-check of a spec."""
import csv
import logging
import math
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.stats import norm
from tqdm import tqdm

import config
from channel import AwgnConfig, awgn_transmit, random_bits
from codespec import CodeSpec, children, load_spec, require_valid
from decoder_registry import DECODER_NAMES, DecoderFactory
from encoder import build_message, encode, gen_matrix
from llr_kernels import OpCounter
from oracle import (Transform, brute_ml, brute_sequential_decode, kernel_discrepancy, random_table,
                    verify_lemma1)
from sc_decoder import MODES, DecoderOptions, sc_decode
from scl_decoder import ListConfig, scl_decode_batch
from worker import BatchJob, open_pool, run_batches

CSV_COLUMNS = ('snr_db', 'list', 'frames', 'frame_errors', 'fer', 'ci_lo', 'ci_hi',
               'mean_adds', 'mean_cmps', 'seconds')

KERNEL_TOLERANCE = 1e-9
LEMMA_TOLERANCE = 1e-12
MAX_ENCODER_CHECK_M = 12


@dataclass(frozen=True)
class CampaignConfig:
    spec: CodeSpec
    decoder: str = 'scl'
    list_sizes: tuple = (1,)
    snr_grid: tuple = (2.0,)
    max_frames: int = config.MAX_FRAMES
    min_frame_errors: int = config.MIN_FRAME_ERRORS
    seed: int = 0
    output: Optional[str] = None
    batch_frames: int = config.BATCH_FRAMES
    workers: int = config.WORKERS
    mode: str = 'default'
    timing: bool = True
    progress: bool = False

    def __post_init__(self):
        require_valid(self.spec)
        if self.decoder.lower() not in DECODER_NAMES:
            raise ValueError(f"Unknown decoder '{self.decoder}'. Expected one of: {', '.join(DECODER_NAMES)}")
        if self.mode not in MODES:
            raise ValueError(f"Unknown computation mode '{self.mode}'")
        if not self.snr_grid or not all(math.isfinite(s) for s in self.snr_grid):
            raise ValueError(f"SNR grid must be a non-empty list of finite values, got {self.snr_grid}")
        if not self.list_sizes or any(int(s) != s or s < 1 for s in self.list_sizes):
            raise ValueError(f"List sizes must be positive integers, got {self.list_sizes}")
        if self.max_frames < 1 or self.batch_frames < 1 or self.workers < 1:
            raise ValueError("max_frames, batch_frames and workers must be positive")
        if self.min_frame_errors < config.MIN_ERRORS_FLOOR:
            raise ValueError(f"min_frame_errors must be at least {config.MIN_ERRORS_FLOOR} "
                             f"for a meaningful confidence interval, got {self.min_frame_errors}")
        if self.seed < 0:
            raise ValueError(f"Seed must be non-negative, got {self.seed}")
        object.__setattr__(self, 'decoder', self.decoder.lower())
        object.__setattr__(self, 'snr_grid', tuple(float(s) for s in self.snr_grid))
        object.__setattr__(self, 'list_sizes', tuple(int(s) for s in self.list_sizes))

    @classmethod
    def from_spec_file(cls, path, **kwargs):
        return cls(spec=load_spec(path), **kwargs)

    @property
    def effective_list_sizes(self):
        """List sizes of the sweep; SC decoders have a single point with list 1."""
        if self.decoder in ('sc', 'arikan-sc'):
            return (1,)
        return self.list_sizes


@dataclass
class ResultRow:
    snr_db: float
    list: int
    frames: int
    frame_errors: int
    fer: float
    ci_lo: float
    ci_hi: float
    mean_adds: float
    mean_cmps: float
    seconds: float
    max_adds: float = 0.0
    max_cmps: float = 0.0

    def to_dict(self):
        return {name: getattr(self, name) for name in CSV_COLUMNS}

    def csv_fields(self):
        return [f"{self.snr_db:.2f}", str(self.list), str(self.frames), str(self.frame_errors),
                f"{self.fer:.6e}", f"{self.ci_lo:.6e}", f"{self.ci_hi:.6e}",
                f"{self.mean_adds:.1f}", f"{self.mean_cmps:.1f}", f"{self.seconds:.3f}"]


def wilson_interval(errors, frames, confidence=0.95):
    """Wilson score interval for the error probability."""
    if frames <= 0:
        return 0.0, 1.0
    z = float(norm.ppf(1 - (1 - confidence) / 2))
    p = errors / frames
    denom = 1 + z * z / frames
    centre = (p + z * z / (2 * frames)) / denom
    half = z * math.sqrt(p * (1 - p) / frames + z * z / (4 * frames * frames)) / denom
    # the endpoints cancel exactly in theory but not in floating point
    lo = 0.0 if errors == 0 else max(0.0, centre - half)
    hi = 1.0 if errors == frames else min(1.0, centre + half)
    return lo, hi


def write_csv(rows, path):
    with open(path, 'w', newline='', encoding='utf-8') as fh:
        writer = csv.writer(fh, lineterminator='\n')
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow(row.csv_fields())


def _run_point(cfg, pool, ebno_db, list_size, progress):
    frames = errors = 0
    additions = comparisons = 0
    max_adds = max_cmps = 0.0
    start = time.perf_counter()
    next_frame = 0
    done = False
    wave = max(1, cfg.workers)
    while not done:
        jobs = []
        for _ in range(wave):
            size = min(cfg.batch_frames, cfg.max_frames - next_frame)
            if size <= 0:
                break
            jobs.append(BatchJob(cfg.spec, cfg.decoder, list_size, ebno_db, cfg.seed, next_frame, size, cfg.mode))
            next_frame += size
        if not jobs:
            break
        for result in run_batches(jobs, pool):
            frames += result.frames
            errors += result.frame_errors
            additions += result.additions
            comparisons += result.comparisons
            max_adds = max(max_adds, result.additions / result.frames)
            max_cmps = max(max_cmps, result.comparisons / result.frames)
            progress.update(result.frames)
            progress.set_postfix(errors=errors)
            # later batches of the same wave are discarded so results do not depend on the wave size
            if errors >= cfg.min_frame_errors or frames >= cfg.max_frames:
                done = True
                break
    seconds = time.perf_counter() - start if cfg.timing else 0.0
    lo, hi = wilson_interval(errors, frames)
    return ResultRow(ebno_db, list_size, frames, errors, errors / frames, lo, hi,
                     additions / frames, comparisons / frames, seconds, max_adds, max_cmps)


def run_fer_campaign(cfg):
    """One ResultRow per (SNR, list size), in grid order; written to cfg.output when set."""
    rows = []
    with open_pool(cfg.workers) as pool:
        for ebno_db in cfg.snr_grid:
            for list_size in cfg.effective_list_sizes:
                logging.info(f"Simulating {cfg.decoder} L={list_size} at {ebno_db:.2f} dB")
                with tqdm(total=cfg.max_frames, unit='frame', disable=not cfg.progress, leave=False,
                          desc=f"{ebno_db:.2f} dB L={list_size}") as progress:
                    row = _run_point(cfg, pool, ebno_db, list_size, progress)
                logging.info(f"{ebno_db:.2f} dB L={list_size}: {row.frame_errors} errors in {row.frames} frames, "
                             f"FER {row.fer:.3e}")
                rows.append(row)
    if cfg.output:
        write_csv(rows, cfg.output)
        logging.info(f"Wrote {len(rows)} rows to {cfg.output}")
    return rows


@dataclass(frozen=True)
class OpCountResult:
    mean_additions: float
    mean_comparisons: float
    frames: int

    def to_dict(self):
        return {'mean_adds': self.mean_additions, 'mean_cmps': self.mean_comparisons, 'frames': self.frames}


def _noisy_frames(spec, trials, seed, ebno_db):
    payload = random_bits(seed, 0, trials, spec.k)
    sent = encode(spec, build_message(spec, payload))
    return sent, awgn_transmit(sent, AwgnConfig.for_spec(spec, ebno_db, seed))


def count_ops(spec, decoder='sc', list_size=1, trials=100, seed=0, mode='default', ebno_db=2.0):
    """Mean LLR additions and comparisons per decoded frame."""
    if trials < 1:
        raise ValueError(f"Need at least one trial, got {trials}")
    instance = DecoderFactory.get_decoder(decoder, spec, list_size, DecoderOptions.for_mode(mode, debug=False))
    if instance is None:
        raise ValueError(f"Unknown decoder '{decoder}'. Expected one of: {', '.join(DECODER_NAMES)}")
    _, llrs = _noisy_frames(spec, trials, seed, ebno_db)
    ops = OpCounter()
    instance.decode_batch(llrs, ops)
    return OpCountResult(ops.additions / trials, ops.comparisons / trials, trials)


# --- self-check ---

@dataclass
class CheckResult:
    name: str
    passed: Optional[bool]
    detail: str = ''

    def to_dict(self):
        return {'name': self.name, 'passed': self.passed, 'detail': self.detail}


def _walk_right_separated(spec, lam, i):
    node = (lam, i)
    while node[0] < spec.m:
        last = children(spec, node)[-1]
        if last[1] != 2 * node[1]:
            return False
        node = last
    return True


def _check_kernels(rng, tables):
    worst = 0.0
    for transform in Transform:
        for _ in range(tables):
            table = random_table(int(rng.integers(2, 5)), rng)
            worst = max(worst, kernel_discrepancy(table, transform))
    return CheckResult('kernels', worst <= KERNEL_TOLERANCE, f"max |kernel - table| = {worst:.2e}")


def _check_encoder(spec, rng, trials):
    if spec.m > MAX_ENCODER_CHECK_M:
        return CheckResult('encoder', None, f"skipped for m > {MAX_ENCODER_CHECK_M}")
    payload = rng.integers(0, 2, (trials, spec.k), dtype=np.uint8)
    messages = build_message(spec, payload)
    # float64 sums of at most n ones are exact and go through BLAS
    expected = (messages.astype(np.float64) @ gen_matrix(spec).astype(np.float64)) % 2
    ok = np.array_equal(encode(spec, messages), expected.astype(np.uint8))
    return CheckResult('encoder', ok, f"{trials} messages against the generator matrix")


def _check_separation(spec):
    if spec.m > 8:
        return CheckResult('right-separation', None, "skipped for m > 8")
    bad = [(lam, i) for lam in range(spec.m + 1) for i in range(1, (1 << lam) + 1)
           if spec.right_separated(lam, i) != _walk_right_separated(spec, lam, i)]
    return CheckResult('right-separation', not bad, f"mismatches at {bad[:5]}" if bad else "closed form = tree walk")


def _check_lemma(spec, rng, samples):
    if spec.m > 4:
        return CheckResult('lemma', None, "skipped for m > 4")
    table = random_table(3, rng)
    w = table.probs[:, :, 0]
    report = verify_lemma1(spec, w, samples=samples, seed=int(rng.integers(2 ** 31)))
    ok = report.max_discrepancy <= LEMMA_TOLERANCE and report.memo_consistent
    return CheckResult('lemma', ok, f"cases {sorted(report.cases_covered)}, "
                                    f"max discrepancy {report.max_discrepancy:.2e}")


def _check_sc_oracle(spec, rng, trials):
    if spec.m > 4:
        return CheckResult('sc-vs-brute', None, "skipped for m > 4")
    llrs = rng.normal(1.0, 2.0, (trials, spec.n))
    decoded, _ = sc_decode(spec, llrs, DecoderOptions(debug=True))
    expected = brute_sequential_decode(spec, llrs)
    mismatches = int(np.count_nonzero(np.any(decoded != expected, axis=1)))
    return CheckResult('sc-vs-brute', mismatches == 0, f"{mismatches} of {trials} frames differ")


def _check_modes(spec, seed, trials):
    _, llrs = _noisy_frames(spec, trials, seed, 1.0)
    results = {}
    for mode in MODES:
        ops = OpCounter()
        results[mode] = (sc_decode(spec, llrs, DecoderOptions.for_mode(mode, debug=spec.m <= 6), ops)[0], ops)
    same = all(np.array_equal(results[mode][0], results['default'][0]) for mode in MODES)
    default_ops = results['default'][1]
    full_ops = results['full'][1]
    cheaper = default_ops.additions + default_ops.comparisons < full_ops.additions + full_ops.comparisons
    ok = same and (cheaper or spec.is_classical)
    return CheckResult('reuse-prune', ok, f"decisions {'agree' if same else 'differ'} across modes; "
                                          f"default {default_ops.additions + default_ops.comparisons} ops, "
                                          f"full {full_ops.additions + full_ops.comparisons} ops")


def _check_list_ml(spec, seed, trials):
    info = spec.k + spec.crc_width
    if info > 8 or spec.n > 16:
        return CheckResult('scl-vs-ml', None, "skipped unless n <= 16 and k + crc <= 8")
    _, llrs = _noisy_frames(spec, trials, seed, 1.0)
    result = scl_decode_batch(spec, llrs, ListConfig.for_spec(spec, 1 << info), DecoderOptions(debug=False))
    mismatches = sum(not np.array_equal(result.codewords[f], brute_ml(spec, llrs[f])[1]) for f in range(trials))
    return CheckResult('scl-vs-ml', mismatches == 0, f"{mismatches} of {trials} frames differ")


def verify_spec(spec, trials=200, seed=0):
    """Run every oracle-backed check that fits the code size."""
    require_valid(spec)
    rng = np.random.default_rng(seed)
    checks = [
        _check_kernels(rng, max(1, min(trials, 1000) // 10)),
        _check_encoder(spec, rng, trials),
        _check_separation(spec),
        _check_lemma(spec, rng, samples=10),
        _check_sc_oracle(spec, rng, trials),
        _check_modes(spec, seed, trials),
        _check_list_ml(spec, seed, min(trials, 100)),
    ]
    for check in checks:
        status = 'skipped' if check.passed is None else ('passed' if check.passed else 'FAILED')
        logging.info(f"Check {check.name} {status}: {check.detail}")
    return checks
