"""Monte-Carlo code construction.

Frozen sets come from genie-aided decoding: the decoder is fed the true past
bits, so the count of wrong hard decisions at a position estimates the error
rate of that subchannel alone. Swap/add sets are chosen greedily from the same
statistics. A Gaussian-approximation construction for classical codes is kept
as an independent cross-check.
"""
import logging
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq

import config
from channel import AwgnConfig, awgn_transmit, random_bits
from codespec import CodeSpec, require_valid
from encoder import encode
from sc_decoder import DecoderOptions, GenieDecision, decode_frames


@dataclass(frozen=True)
class GenieStatistics:
    errors: np.ndarray
    mean_llr: np.ndarray
    trials: int

    @property
    def error_rates(self):
        return self.errors / self.trials


def _open_spec(spec):
    """The same layers with every position carrying information."""
    return replace(spec, k=spec.n, frozen=frozenset(), crc=None)


def genie_statistics(spec, design_ebno_db, trials, seed=0, rate=None, all_zero=False,
                     batch=config.CONSTRUCTION_BATCH):
    """Per-position wrong-decision counts and mean signed leaf LLRs under genie-aided SC."""
    if trials < 1:
        raise ValueError(f"Need at least one trial, got {trials}")
    open_spec = _open_spec(spec)
    n = spec.n
    channel = AwgnConfig(float(design_ebno_db), rate if rate is not None else spec.k / n, seed)
    options = DecoderOptions(debug=False)
    errors = np.zeros(n, dtype=np.int64)
    signed = np.zeros(n)
    for start in range(0, trials, batch):
        size = min(batch, trials - start)
        if all_zero:
            messages = np.zeros((size, n), dtype=np.uint8)
        else:
            messages = random_bits(seed, start, size, n)
        llrs = awgn_transmit(encode(open_spec, messages), channel, first_frame=start)
        genie = GenieDecision(messages)
        decode_frames(open_spec, llrs, genie, options)
        errors += genie.errors
        signed += genie.signed_llr_sum
    return GenieStatistics(errors, signed / trials, trials)


def _require_trials(trials):
    if trials < config.MIN_CONSTRUCTION_TRIALS:
        raise ValueError(f"Construction needs at least {config.MIN_CONSTRUCTION_TRIALS} trials, got {trials}")


def mc_frozen_set(spec, design_ebno_db, trials=config.CONSTRUCTION_TRIALS, seed=0):
    """The n - k - crc_width least reliable positions of ``spec``'s layers (its frozen set is ignored)."""
    n_frozen = spec.n - spec.k - spec.crc_width
    if n_frozen < 0:
        raise ValueError(f"k={spec.k} plus {spec.crc_width} CRC bits exceeds n={spec.n}")
    if n_frozen == 0:
        return frozenset()
    _require_trials(trials)
    stats = genie_statistics(spec, design_ebno_db, trials, seed)
    # most errors first, ties by the weakest mean signed LLR
    order = np.lexsort((stats.mean_llr, -stats.errors))
    unreliable = int(np.count_nonzero(stats.errors))
    if unreliable < n_frozen:
        logging.warning(f"Only {unreliable} of {n_frozen} frozen positions saw errors in {trials} trials; "
                        f"ranking the rest by mean LLR")
    return frozenset(int(i) + 1 for i in order[:n_frozen])


def _cost(rates, info_count):
    """Sum of the info_count smallest error rates."""
    return float(np.sort(rates)[:info_count].sum())


def _admissible(i, lam, taken):
    return 2 <= i <= (1 << lam) - 2 and all(abs(i - j) >= 4 for j in taken)


def _candidate_scores(rates, info_count, m, lam):
    """Error mass on information positions below nodes i-1..i+1 of layer lam, per even i."""
    span = 1 << (m - lam)
    info = np.zeros(rates.size, dtype=bool)
    info[np.argsort(rates, kind='stable')[:info_count]] = True
    weighted = np.where(info, rates, 0.0)
    scores = {}
    for i in range(2, (1 << lam) - 1, 2):
        scores[i] = float(weighted[(i - 2) * span:(i + 1) * span].sum())
    return scores


def greedy_abs_sets(m, design_ebno_db, budget, k=None, crc=None, trials=config.CONSTRUCTION_TRIALS, seed=0):
    """Heuristic swap/add sets: per layer, try the ``budget`` most promising positions.

    Every trial reuses the same noise (all-zero codeword, same seed), so cost
    differences between candidates are not swamped by sampling noise.
    """
    n = 1 << m
    swaps = {lam: set() for lam in range(2, m + 1)}
    adds = {lam: set() for lam in range(2, m + 1)}
    if budget <= 0 or m < 2:
        return swaps, adds
    _require_trials(trials)
    k = n // 2 if k is None else k
    info_count = k + (crc.width if crc is not None else 0)
    rate = k / n

    def rates_for(swap_sets, add_sets):
        spec = CodeSpec(m=m, k=n, frozen=frozenset(), swap_sets=swap_sets, add_sets=add_sets)
        return genie_statistics(spec, design_ebno_db, trials, seed, rate=rate, all_zero=True).error_rates

    rates = rates_for(swaps, adds)
    cost = _cost(rates, info_count)
    for lam in range(2, m + 1):
        scores = _candidate_scores(rates, info_count, m, lam)
        ranked = sorted(scores, key=lambda i: (-scores[i], i))
        tried = 0
        for i in ranked:
            if tried >= budget:
                break
            if not _admissible(i, lam, swaps[lam] | adds[lam]):
                continue
            tried += 1
            options = []
            for target in (swaps, adds):
                target[lam].add(i)
                trial_rates = rates_for(swaps, adds)
                options.append((_cost(trial_rates, info_count), target is adds, trial_rates))
                target[lam].discard(i)
            best_cost, is_add, best_rates = min(options, key=lambda o: (o[0], o[1]))
            if best_cost <= cost:
                (adds if is_add else swaps)[lam].add(i)
                cost, rates = best_cost, best_rates
        logging.info(f"Layer {lam}: swaps {sorted(swaps[lam])}, adds {sorted(adds[lam])}, cost {cost:.4g}")
    return swaps, adds


# --- Gaussian approximation (classical codes only) ---

def _log_phi(x):
    if x <= 0:
        return 0.0
    if x <= 10:
        return -0.4527 * x ** 0.86 + 0.0218
    return 0.5 * math.log(math.pi / x) - x / 4 + math.log1p(-10 / (7 * x))


_LOG_PHI_10 = _log_phi(10.0)


def _inverse_log_phi(target):
    if target >= 0:
        return 0.0
    if target >= _LOG_PHI_10:
        return ((0.0218 - target) / 0.4527) ** (1 / 0.86)
    upper = 100.0 - 8.0 * target
    return brentq(lambda x: _log_phi(x) - target, 10.0, upper, xtol=1e-12)


def ga_means(m, design_ebno_db, rate):
    """Mean LLR of every subchannel under the Gaussian approximation, natural index order."""
    sigma2 = 1.0 / (2.0 * rate * 10 ** (design_ebno_db / 10))
    means = np.array([2.0 / sigma2])
    for _ in range(m):
        nxt = np.empty(2 * means.size)
        for idx, mu in enumerate(means):
            log_phi = _log_phi(mu)
            # 1 - (1 - phi)^2 = phi (2 - phi)
            nxt[2 * idx] = _inverse_log_phi(log_phi + math.log(2.0 - math.exp(log_phi)))
            nxt[2 * idx + 1] = 2.0 * mu
        means = nxt
    return means


def ga_frozen_set(m, k, design_ebno_db, crc_width=0):
    """The n - k - crc_width subchannels with the smallest mean LLR."""
    n = 1 << m
    n_frozen = n - k - crc_width
    if n_frozen < 0:
        raise ValueError(f"k={k} plus {crc_width} CRC bits exceeds n={n}")
    means = ga_means(m, design_ebno_db, k / n)
    return frozenset(int(i) + 1 for i in np.argsort(means, kind='stable')[:n_frozen])


def construct_spec(m, k, design_ebno_db, budget=0, trials=config.CONSTRUCTION_TRIALS, seed=0, crc=None):
    """Greedy swap/add sets, then the Monte-Carlo frozen set for those layers."""
    swaps, adds = greedy_abs_sets(m, design_ebno_db, budget, k=k, crc=crc, trials=trials, seed=seed)
    draft = CodeSpec(m=m, k=k, frozen=frozenset(), swap_sets=swaps, add_sets=adds, crc=crc)
    frozen = mc_frozen_set(draft, design_ebno_db, trials, seed)
    spec = require_valid(replace(draft, frozen=frozen))
    logging.info(f"Constructed ({spec.n}, {k}) code at {design_ebno_db} dB with "
                 f"{sum(len(s) for s in swaps.values())} swaps and {sum(len(s) for s in adds.values())} adds")
    return spec
