"""Seeding and summary statistics shared by the Monte-Carlo experiments.

Substream rule
--------------
Trials are grouped into consecutive blocks of ``BLOCK_SIZE``.  Block ``b`` of a
run with master seed ``s`` draws from

    numpy.random.default_rng(numpy.random.SeedSequence(s, spawn_key=(b,)))

Within a block, trials consume the generator in trial order (or take their
slice of a batched draw sized for the full block).  Raising the trial count
therefore never changes the outcome of an earlier trial.

Randomness that is not per-trial (building a random instance, say) comes from
``auxiliary_rng(s, tag)``, whose spawn key ``(AUX_BASE + tag,)`` lies far
outside any block index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

BLOCK_SIZE = 1024


def block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(block),)))


AUX_BASE = 1 << 62


def auxiliary_rng(seed: int, tag: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(AUX_BASE + int(tag),)))


def trial_blocks(seed: int, trials: int) -> Iterator[tuple[int, int, np.random.Generator]]:
    """Yield ``(first_trial, count, rng)`` for each block covering ``trials``."""
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    for block in range(math.ceil(trials / BLOCK_SIZE)):
        start = block * BLOCK_SIZE
        yield start, min(BLOCK_SIZE, trials - start), block_rng(seed, block)


def trial_rngs(seed: int, trials: int) -> Iterator[np.random.Generator]:
    """One generator handle per trial, shared sequentially inside each block."""
    for _, count, rng in trial_blocks(seed, trials):
        for _ in range(count):
            yield rng


def wilson_interval(successes: int, n: int, z: float = 3.0) -> tuple[float, float]:
    if n <= 0:
        raise ValueError("n must be positive")
    p = successes / n
    denom = 1.0 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


@dataclass(frozen=True)
class BernoulliEstimate:
    successes: int
    trials: int

    @property
    def estimate(self) -> float:
        return self.successes / self.trials

    @property
    def stderr(self) -> float:
        p = self.estimate
        return math.sqrt(p * (1 - p) / self.trials)

    def interval(self, z: float = 3.0) -> tuple[float, float]:
        return wilson_interval(self.successes, self.trials, z)

    def consistent_with_lower_bound(self, bound: float, z: float = 3.0) -> bool:
        """True unless the data rule out ``p >= bound`` at ``z`` sigma."""
        return self.interval(z)[1] >= bound


@dataclass(frozen=True)
class MeanEstimate:
    mean: float
    stderr: float
    trials: int

    @classmethod
    def from_samples(cls, samples) -> "MeanEstimate":
        x = np.asarray(samples, dtype=float)
        n = x.size
        se = float(x.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        return cls(float(x.mean()), se, n)

    def within(self, target: float, z: float = 3.0, atol: float = 1e-12) -> bool:
        return abs(self.mean - target) <= z * self.stderr + atol

    def at_most(self, bound: float, z: float = 3.0) -> bool:
        return self.mean - z * self.stderr <= bound
