"""Explicit verifiers: a table of acceptance probabilities, one per witness.

Interval conventions are fixed here for every promise check in the package:
the no-interval is ``[0, p1]``, the gap is ``(p1, p2)`` and the yes-interval
is ``[p2, 1]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.stats import binom

from .hashfam import AffineHash

MAX_WITNESS_BITS = 20
TAIL_TOL = 1e-12  # slack for binomial tails that hit a target exactly


class Verdict(str, Enum):
    TMAPP_YES = "TmappYes"
    TMAPP_NO = "TmappNo"
    PROMISE_VIOLATED = "PromiseViolated"


class UniqueVerdict(str, Enum):
    UMAPP_YES = "UmappYes"
    UMAPP_NO = "UmappNo"
    NEITHER = "Neither"


class AmplificationRangeError(ArithmeticError):
    """Binomial tails lost all resolution at the requested repetition count."""


@dataclass(frozen=True, eq=False)
class WitnessTable:
    l: int
    probs: np.ndarray

    def __post_init__(self):
        if not 1 <= self.l <= MAX_WITNESS_BITS:
            raise ValueError(f"l={self.l} outside [1, {MAX_WITNESS_BITS}]")
        p = np.array(self.probs, dtype=float).reshape(-1)
        if p.size != 1 << self.l:
            raise ValueError(f"expected {1 << self.l} probabilities, got {p.size}")
        if not np.all(np.isfinite(p)) or p.min() < 0.0 or p.max() > 1.0:
            raise ValueError("acceptance probabilities must lie in [0, 1]")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @classmethod
    def from_witnesses(cls, l: int, accepting: Sequence[int], value: float = 1.0,
                       rest: float = 0.0) -> "WitnessTable":
        p = np.full(1 << l, rest, dtype=float)
        p[list(accepting)] = value
        return cls(l, p)

    @property
    def size(self) -> int:
        return self.probs.size

    def is_deterministic(self) -> bool:
        return bool(np.all((self.probs == 0.0) | (self.probs == 1.0)))

    def accepting(self) -> np.ndarray:
        """Indices with probability exactly 1 (the set W of a deterministic verifier)."""
        return np.flatnonzero(self.probs == 1.0)

    def __eq__(self, other):
        if not isinstance(other, WitnessTable):
            return NotImplemented
        return self.l == other.l and np.array_equal(self.probs, other.probs)


@dataclass(frozen=True)
class PromiseInstance:
    table: WitnessTable
    p1: float
    p2: float

    def __post_init__(self):
        if not 0.0 <= self.p1 < self.p2 <= 1.0:
            raise ValueError(f"need 0 <= p1 < p2 <= 1, got p1={self.p1}, p2={self.p2}")

    @property
    def l(self) -> int:
        return self.table.l

    @property
    def probs(self) -> np.ndarray:
        return self.table.probs

    def yes_set(self) -> np.ndarray:
        return np.flatnonzero(self.probs >= self.p2)

    def gap_set(self) -> np.ndarray:
        return np.flatnonzero((self.probs > self.p1) & (self.probs < self.p2))

    def no_set(self) -> np.ndarray:
        return np.flatnonzero(self.probs <= self.p1)

    def with_thresholds(self, p1: float, p2: float) -> "PromiseInstance":
        return PromiseInstance(self.table, p1, p2)


def classify(inst: PromiseInstance) -> Verdict:
    top = inst.probs.max()
    if top >= inst.p2:
        return Verdict.TMAPP_YES
    if top <= inst.p1:
        return Verdict.TMAPP_NO
    return Verdict.PROMISE_VIOLATED


def classify_unique(inst: PromiseInstance) -> UniqueVerdict:
    p = inst.probs
    above_no = int(np.count_nonzero(p > inst.p1))
    if above_no == 0:
        return UniqueVerdict.UMAPP_NO
    if above_no == 1 and np.count_nonzero(p >= inst.p2) == 1:
        return UniqueVerdict.UMAPP_YES
    return UniqueVerdict.NEITHER


def restrict(inst: PromiseInstance, h: AffineHash) -> PromiseInstance:
    """Zero out every witness outside ``h^{-1}(0)``; thresholds are kept."""
    if h.cols != inst.l:
        raise ValueError(f"hash takes {h.cols} bits but witnesses have {inst.l}")
    keep = h.zero_mask(np.arange(inst.table.size))
    return PromiseInstance(WitnessTable(inst.l, np.where(keep, inst.probs, 0.0)), inst.p1, inst.p2)


def tail_threshold(reps: int, threshold_fraction: float) -> int:
    return math.ceil(threshold_fraction * reps)


def amplified_value(f, reps: int, threshold_fraction: float):
    """``Pr[Binomial(reps, f) >= ceil(threshold_fraction * reps)]``."""
    c = tail_threshold(reps, threshold_fraction)
    return binom.sf(c - 1, reps, f)


def exact_amplified_value(f: Fraction, reps: int, threshold_fraction: Fraction) -> Fraction:
    """Rational binomial tail, summed term by term."""
    c = math.ceil(Fraction(threshold_fraction) * reps)
    f = Fraction(f)
    return sum((math.comb(reps, i) * f**i * (1 - f) ** (reps - i) for i in range(c, reps + 1)),
               Fraction(0))


def amplify(inst: PromiseInstance, reps: int, threshold_fraction: float) -> PromiseInstance:
    """Majority-style error reduction: repeat ``reps`` times, accept on enough successes."""
    if reps < 1:
        raise ValueError("reps must be >= 1")
    if not inst.p1 < threshold_fraction < inst.p2:
        raise ValueError("threshold_fraction must lie strictly between p1 and p2")
    probs = np.clip(amplified_value(inst.probs, reps, threshold_fraction), 0.0, 1.0)
    q1 = float(amplified_value(inst.p1, reps, threshold_fraction))
    q2 = float(amplified_value(inst.p2, reps, threshold_fraction))
    if (inst.p1 > 0 and q1 == 0.0) or (inst.p2 < 1 and q2 == 1.0):
        raise AmplificationRangeError(f"binomial tail saturated at reps={reps}")
    return PromiseInstance(WitnessTable(inst.l, probs), q1, q2)


def amplification_reps(p1: float, p2: float, target: float,
                       threshold_fraction: float | None = None) -> int:
    """Smallest ``reps`` pushing ``p1`` to ``<= target`` and ``p2`` to ``>= 1 - target``.

    The Hoeffding count ``ln(1/target) / (2 eps^2)`` caps the linear search.
    """
    if threshold_fraction is None:
        threshold_fraction = (p1 + p2) / 2
    eps = min(threshold_fraction - p1, p2 - threshold_fraction)
    if eps <= 0:
        raise ValueError("threshold_fraction must lie strictly between p1 and p2")
    cap = math.ceil(math.log(1 / target) / (2 * eps * eps)) + 2
    for reps in range(1, cap + 1):
        if (amplified_value(p1, reps, threshold_fraction) <= target + TAIL_TOL
                and amplified_value(p2, reps, threshold_fraction) >= 1 - target - TAIL_TOL):
            return reps
    raise AmplificationRangeError("no repetition count within the Hoeffding cap")


@dataclass(frozen=True)
class BucketCounts:
    """``below`` counts probabilities under ``1/L``; ``ranges[j-1]`` is ``|Y_j|``."""

    below: int
    ranges: tuple[int, ...]

    @property
    def n_ranges(self) -> int:
        return len(self.ranges) + 1


def bucket_index(p, l_ranges: int):
    """Range index ``j`` with ``p`` in ``[j/L, (j+1)/L)``; ``p = 1`` goes to ``L-1``."""
    return np.minimum(np.floor(np.asarray(p) * l_ranges).astype(int), l_ranges - 1)


def partition_buckets(inst: PromiseInstance, l_ranges: int) -> BucketCounts:
    if l_ranges < 2:
        raise ValueError("need at least two ranges")
    counts = np.bincount(bucket_index(inst.probs, l_ranges), minlength=l_ranges)
    return BucketCounts(int(counts[0]), tuple(int(c) for c in counts[1:]))


def find_lightweight_index(counts) -> int | None:
    """Smallest range index ``j`` (1-based) with ``|Y_j| < 3 |Y_{j+1}|``.

    ``counts`` is either a :class:`BucketCounts` or the sequence
    ``(|Y_1|, |Y_2|, ...)``.
    """
    ranges = counts.ranges if isinstance(counts, BucketCounts) else tuple(counts)
    for j in range(1, len(ranges)):
        if ranges[j - 1] < 3 * ranges[j]:
            return j
    return None


def lightweight_guaranteed(l: int, l_ranges: int) -> bool:
    """Whether a top-range witness forces a lightweight index by counting alone.

    If no index qualifies then ``|Y_j| >= 3^(L-1-j)``, so the ranges hold at
    least ``(3^(L-1) - 1) / 2`` witnesses; this must exceed ``2^l``.
    """
    return (3 ** (l_ranges - 1) - 1) // 2 > (1 << l)


# -- file format ---------------------------------------------------------

def dumps_table(table: WitnessTable, p1: float | None = None, p2: float | None = None) -> str:
    lines = [f"l={table.l}"]
    if p1 is not None:
        lines += [f"p1={p1!r}", f"p2={p2!r}"]
    lines += [repr(float(v)) for v in table.probs]
    return "\n".join(lines) + "\n"


def dumps_instance(inst: PromiseInstance) -> str:
    return dumps_table(inst.table, inst.p1, inst.p2)


def _parse(text: str) -> tuple[dict[str, str], list[float]]:
    keys: dict[str, str] = {}
    values: list[float] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" in line:
            k, v = line.split("=", 1)
            keys[k.strip()] = v.strip()
        else:
            values.append(float(line))
    if "l" not in keys:
        raise ValueError("missing 'l=' header")
    return keys, values


def loads_table(text: str) -> WitnessTable:
    keys, values = _parse(text)
    return WitnessTable(int(keys["l"]), np.array(values))


def loads_instance(text: str) -> PromiseInstance:
    keys, values = _parse(text)
    if "p1" not in keys or "p2" not in keys:
        raise ValueError("instance needs 'p1=' and 'p2=' lines")
    return PromiseInstance(WitnessTable(int(keys["l"]), np.array(values)),
                           float(keys["p1"]), float(keys["p2"]))
