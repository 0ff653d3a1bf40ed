"""Joint ML detection over two slots and the Monte Carlo SER engine.

Randomness discipline: every block of trials draws from its own generator,
keyed by ``(seed, stream tag, block index)`` through ``numpy``'s
``SeedSequence``. Block results are merged by summation in block order, so
estimates depend only on the seed, the trial count and the block size,
never on how many threads executed the blocks.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channel import sample_pairs, sample
from .link import HYPOTHESES, codebook, homodyne_observe, rotate

__all__ = [
    "SerEstimate",
    "block_rng",
    "ml_detect",
    "ml_detect_index",
    "symbol_by_symbol_detect",
    "run_monte_carlo",
    "run_monte_carlo_baseline",
    "pairwise_error_frequency",
    "STREAM_QRD",
    "STREAM_BASELINE",
    "STREAM_PAIRWISE",
]

STREAM_QRD = 1
STREAM_BASELINE = 2
STREAM_PAIRWISE = 3

DEFAULT_BLOCK = 1 << 16
Z95 = 1.96


@dataclass(frozen=True)
class SerEstimate:
    errors: int
    trials: int
    seed: int

    def __post_init__(self):
        if self.trials <= 0:
            raise ValueError("an estimate needs at least one trial")
        if not 0 <= self.errors <= self.trials:
            raise ValueError(f"errors ({self.errors}) outside [0, trials={self.trials}]")

    @property
    def ser(self):
        return self.errors / self.trials

    @property
    def ci_half_width(self):
        p = self.ser
        return Z95 * math.sqrt(p * (1.0 - p) / self.trials)

    @property
    def std_error(self):
        return self.ci_half_width / Z95

    def merge(self, other):
        if other.seed != self.seed:
            raise ValueError("cannot merge estimates produced from different seeds")
        return SerEstimate(self.errors + other.errors, self.trials + other.trials, self.seed)


def block_rng(seed, tag, index):
    """Independent generator for block ``index`` of stream ``tag``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(tag), int(index)))
    return np.random.Generator(np.random.PCG64(ss))


def ml_detect_index(y, fading, cfg):
    """Index into :data:`~qrd.link.HYPOTHESES` minimizing ``||y - H x||^2``.

    Vectorized over a leading axis of ``y`` and ``fading``; ties resolve to
    the lowest index.
    """
    y = np.asarray(y, dtype=float)
    gain = np.sqrt(cfg.eta * np.asarray(fading, dtype=float))
    cw = codebook(cfg.design).codewords
    predicted = gain[..., None, :] * cw
    dist = ((y[..., None, :] - predicted) ** 2).sum(axis=-1)
    return np.argmin(dist, axis=-1)


def ml_detect(y, fading, cfg):
    """Detected symbol pair(s) in {+alpha, -alpha}^2."""
    return cfg.design.alpha * HYPOTHESES[ml_detect_index(y, fading, cfg)]


def symbol_by_symbol_detect(y, alpha):
    """Per-slot sign decision (zero goes to +alpha)."""
    y = np.asarray(y, dtype=float)
    return np.where(y >= 0.0, alpha, -alpha)


def _qrd_block(cfg, n, rng):
    sent = rng.integers(0, 4, size=n)
    x = cfg.design.alpha * HYPOTHESES[sent]
    fading = sample_pairs(cfg.channel, rng, n)
    y = homodyne_observe(cfg, rotate(cfg.design.theta, x), fading, rng)
    got = ml_detect_index(y, fading, cfg)
    return int((HYPOTHESES[sent] != HYPOTHESES[got]).sum())


def _baseline_block(cfg, n, rng):
    signs = np.where(rng.integers(0, 2, size=n) == 0, 1.0, -1.0)
    fading = sample(cfg.channel, rng, n)
    y = homodyne_observe(cfg, cfg.design.alpha * signs, fading, rng)
    return int((np.where(y >= 0.0, 1.0, -1.0) != signs).sum())


def _block_sizes(trials, block_size):
    full, rest = divmod(trials, block_size)
    return [block_size] * full + ([rest] if rest else [])


def _run_blocks(cfg, trials, block_size, threads, tag, body, symbols_per_trial,
                min_errors):
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if block_size < 1:
        raise ValueError(f"block_size must be >= 1, got {block_size}")
    sizes = _block_sizes(int(trials), int(block_size))
    threads = max(1, int(threads))

    def work(i):
        return body(cfg, sizes[i], block_rng(cfg.seed, tag, i))

    errors = used = 0
    with ThreadPoolExecutor(max_workers=threads) as pool:
        # waves of `threads` blocks; the stop rule only looks at the block-order
        # prefix, so extra blocks computed in the last wave are discarded
        for start in range(0, len(sizes), threads):
            wave = range(start, min(start + threads, len(sizes)))
            for i, err in zip(wave, pool.map(work, wave)):
                errors += err
                used += sizes[i]
                if min_errors is not None and errors >= min_errors:
                    return SerEstimate(errors, used * symbols_per_trial, int(cfg.seed))
    return SerEstimate(errors, used * symbols_per_trial, int(cfg.seed))


def run_monte_carlo(cfg, trials, block_size=DEFAULT_BLOCK, threads=1, min_errors=200):
    """Symbol error rate of the rotated scheme under joint ML detection.

    ``trials`` counts codeword transmissions; each contributes two symbols
    to the estimate. Simulation stops at the first block boundary where the
    accumulated symbol errors reach ``min_errors`` (``None`` runs the full
    ``trials``).
    """
    return _run_blocks(cfg, trials, block_size, threads, STREAM_QRD, _qrd_block, 2,
                       min_errors)


def run_monte_carlo_baseline(cfg, trials, block_size=DEFAULT_BLOCK, threads=1,
                             min_errors=200):
    """Single-slot, unrotated BPSK with sign detection (same budget accounting)."""
    return _run_blocks(cfg, trials, block_size, threads, STREAM_BASELINE,
                       _baseline_block, 1, min_errors)


def pairwise_error_frequency(cfg, positions, trials, block_size=DEFAULT_BLOCK,
                             threads=1):
    """Monte Carlo frequency of the pairwise event ``x -> x~``.

    ``x = (alpha, alpha)`` is sent and ``x~`` flips the first symbol
    (``positions=1``) or both (``positions=2``). Counts the trials where
    ``||y - H x~||^2 < ||y - H x||^2`` with fading and noise both random.
    """
    if positions not in (1, 2):
        raise ValueError("positions must be 1 or 2")
    alpha = cfg.design.alpha
    x = rotate(cfg.design.theta, [alpha, alpha])
    x_alt = rotate(cfg.design.theta, [-alpha, alpha] if positions == 1 else [-alpha, -alpha])

    def body(cfg_, n, rng):
        fading = sample_pairs(cfg_.channel, rng, n)
        y = homodyne_observe(cfg_, x, fading, rng)
        gain = np.sqrt(cfg_.eta * fading)
        d_true = ((y - gain * x) ** 2).sum(axis=1)
        d_alt = ((y - gain * x_alt) ** 2).sum(axis=1)
        return int((d_alt < d_true).sum())

    return _run_blocks(cfg, trials, block_size, threads, STREAM_PAIRWISE * 10 + positions,
                       body, 1, None)
