"""Witness-isolation reductions against exact unique-promise oracles.

The NP reduction samples one hash per size guess; the MA and QCMA reductions
first amplify to thresholds ``(1/l, 1 - 1/l)``, then try every narrow
interval ``(k/l, (k+1)/l)`` with every hash size.  Oracles are computed by
enumerating the (restricted) witness table.  Hash sizes are indexed from 0:
guess ``b`` uses ``m = b + 2`` output bits, and ``b = 0 .. l-1`` covers every
witness count ``1 .. 2^l``.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from . import hashfam
from .stats import BLOCK_SIZE, BernoulliEstimate, trial_blocks, trial_rngs
from .verifier import (
    TAIL_TOL,
    PromiseInstance,
    UniqueVerdict,
    Verdict,
    WitnessTable,
    amplification_reps,
    amplify,
    classify,
)


class OraclePolicy(str, Enum):
    """Oracle answer on queries outside the unique promise."""

    ANSWER_NO = "AnswerNo"
    ANSWER_YES = "AnswerYes"
    ANSWER_RANDOM = "AnswerRandom"


@dataclass(frozen=True)
class Query:
    k: int | None  # interval index; None for the NP reduction
    b: int  # hash size index, m = b + 2
    classification: str
    answer: bool


@dataclass
class ReductionReport:
    accepted: bool = False
    queries: list[Query] = field(default_factory=list)
    unique_yes_hits: int = 0

    def record(self, query: Query) -> None:
        self.queries.append(query)
        self.accepted |= query.answer
        self.unique_yes_hits += query.classification == UniqueVerdict.UMAPP_YES.value

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def oracle_answer(verdict: UniqueVerdict, policy: OraclePolicy, rng: np.random.Generator) -> bool:
    if verdict is UniqueVerdict.UMAPP_YES:
        return True
    if verdict is UniqueVerdict.UMAPP_NO:
        return False
    if policy is OraclePolicy.ANSWER_YES:
        return True
    if policy is OraclePolicy.ANSWER_RANDOM:
        return bool(rng.integers(0, 2))
    return False


def component1_success_prob(w: int) -> float:
    """Chance that a density-``1/w`` random filter keeps exactly one of ``w`` witnesses."""
    if w < 1:
        raise ValueError("w must be >= 1")
    return (1.0 - 1.0 / w) ** (w - 1)


def size_guess(count: int) -> int:
    """The ``k`` with ``2^k <= count < 2^(k+1)``."""
    if count < 1:
        raise ValueError("count must be >= 1")
    return count.bit_length() - 1


def _unique_verdicts(probs: np.ndarray, masks: np.ndarray, lo: np.ndarray,
                     hi: np.ndarray) -> list[UniqueVerdict]:
    """classify_unique of each restricted table, from survivor masks."""
    above = (masks & (probs[None, :] > lo[:, None])).sum(axis=1)
    yes = (masks & (probs[None, :] >= hi[:, None])).sum(axis=1)
    out = []
    for n_above, n_yes in zip(above, yes):
        if n_above == 0:
            out.append(UniqueVerdict.UMAPP_NO)
        elif n_above == 1 and n_yes == 1:
            out.append(UniqueVerdict.UMAPP_YES)
        else:
            out.append(UniqueVerdict.NEITHER)
    return out


def _query_verdicts(probs: np.ndarray, sizes: list[int], lo: np.ndarray, hi: np.ndarray,
                    rng: np.random.Generator) -> list[UniqueVerdict]:
    """Sample one hash per query and classify each restricted table.

    Witnesses at or below every ``lo`` cannot change any verdict, so the
    hashes are evaluated on the others only.
    """
    l = int(probs.size).bit_length() - 1
    stack = hashfam.sample_stack(l, sizes, rng)
    live = np.flatnonzero(probs > lo.min())
    masks = hashfam.stack_zero_masks(stack, sizes, hashfam.witness_bits(l, live))
    return _unique_verdicts(probs[live], masks, lo, hi)


def vv_np_run(table: WitnessTable, oracle_policy: OraclePolicy = OraclePolicy.ANSWER_NO,
              rng: np.random.Generator | None = None) -> ReductionReport:
    """One pass of the NP reduction: ``l`` hash guesses, one oracle query each."""
    if not table.is_deterministic():
        raise ValueError("the NP reduction needs a 0/1 witness table")
    rng = np.random.default_rng() if rng is None else rng
    l = table.l
    verdicts = _query_verdicts(table.probs, [b + 2 for b in range(l)], np.zeros(l), np.ones(l), rng)
    report = ReductionReport()
    for b, verdict in enumerate(verdicts):
        report.record(Query(None, b, verdict.value, oracle_answer(verdict, oracle_policy, rng)))
    return report


@dataclass(frozen=True)
class Amplified:
    instance: PromiseInstance
    reps: int | None
    threshold_fraction: float | None


def amplify_to_target(inst: PromiseInstance, reps: int | None = None,
                      threshold_fraction: float | None = None) -> Amplified:
    """Bring the thresholds to ``(<= 1/l, >= 1 - 1/l)``; no-op if already there."""
    target = 1.0 / inst.l
    if reps is None and inst.p1 <= target and inst.p2 >= 1 - target:
        return Amplified(inst, None, None)
    if threshold_fraction is None:
        threshold_fraction = (inst.p1 + inst.p2) / 2
    if reps is None:
        reps = amplification_reps(inst.p1, inst.p2, target, threshold_fraction)
    amp = amplify(inst, reps, threshold_fraction)
    if amp.p1 > target + TAIL_TOL or amp.p2 < 1 - target - TAIL_TOL:
        raise ValueError(f"reps={reps} does not reach thresholds (1/l, 1-1/l)")
    return Amplified(amp, reps, threshold_fraction)


def _interval_run(inst: PromiseInstance, oracle_policy: OraclePolicy,
                  rng: np.random.Generator) -> ReductionReport:
    l = inst.l
    pairs = [(k, b) for k in range(1, l - 1) for b in range(l)]
    lo = np.array([k / l for k, _ in pairs])
    hi = np.array([(k + 1) / l for k, _ in pairs])
    verdicts = _query_verdicts(inst.probs, [b + 2 for _, b in pairs], lo, hi, rng)
    report = ReductionReport()
    for (k, b), verdict in zip(pairs, verdicts):
        report.record(Query(k, b, verdict.value, oracle_answer(verdict, oracle_policy, rng)))
    return report


def _check_promise(inst: PromiseInstance) -> None:
    if inst.l < 3:
        raise ValueError("interval reductions need l >= 3")
    if classify(inst) is Verdict.PROMISE_VIOLATED:
        raise ValueError("input violates the promise (max probability inside the gap)")


def vv_ma_run(inst: PromiseInstance, reps: int | None = None,
              oracle_policy: OraclePolicy = OraclePolicy.ANSWER_NO,
              rng: np.random.Generator | None = None,
              threshold_fraction: float | None = None) -> ReductionReport:
    """One pass of the MA reduction; ``reps=None`` picks the smallest sufficient count."""
    _check_promise(inst)
    rng = np.random.default_rng() if rng is None else rng
    amp = amplify_to_target(inst, reps, threshold_fraction)
    return _interval_run(amp.instance, oracle_policy, rng)


def vv_qcma_run(q_table: PromiseInstance, oracle_policy: OraclePolicy = OraclePolicy.ANSWER_NO,
                rng: np.random.Generator | None = None, reps: int | None = None) -> ReductionReport:
    """The QCMA reduction on a basis-witness table.

    The restricted circuit answers "no" before running ``U`` whenever
    ``h(y) != 0``, so its table is the classical restriction of ``q_table``.
    Basis witnesses can be measured and copied, so amplification is classical
    too.
    """
    _check_promise(q_table)
    rng = np.random.default_rng() if rng is None else rng
    amp = amplify_to_target(q_table, reps)
    return _interval_run(amp.instance, oracle_policy, rng)


# -- Monte-Carlo ---------------------------------------------------------

Runner = Callable[[np.random.Generator], ReductionReport]


def np_runner(table: WitnessTable, oracle_policy: OraclePolicy) -> Runner:
    return lambda rng: vv_np_run(table, oracle_policy, rng)


def ma_runner(inst: PromiseInstance, oracle_policy: OraclePolicy, reps: int | None = None,
              threshold_fraction: float | None = None) -> Runner:
    """``vv_ma_run`` with the amplification hoisted out of the trial loop."""
    _check_promise(inst)
    amp = amplify_to_target(inst, reps, threshold_fraction).instance
    return lambda rng: _interval_run(amp, oracle_policy, rng)


qcma_runner = ma_runner


@dataclass(frozen=True)
class RunStatistics:
    accepted: BernoulliEstimate
    unique_hit: BernoulliEstimate


def monte_carlo(run: Runner, trials: int,
                seed: int) -> RunStatistics:
    acc = hits = 0
    for rng in trial_rngs(seed, trials):
        report = run(rng)
        acc += report.accepted
        hits += report.unique_yes_hits > 0
    return RunStatistics(BernoulliEstimate(acc, trials), BernoulliEstimate(hits, trials))


def _as_witnesses(s, l: int) -> np.ndarray:
    arr = np.unique(np.asarray(list(s), dtype=np.int64))
    if arr.size != len(list(s)):
        raise ValueError("witness sets must not repeat elements")
    if arr.size and (arr.min() < 0 or arr.max() >= 1 << l):
        raise ValueError(f"witness outside [0, 2^{l})")
    return arr


def estimate_isolation_probability(s1: Sequence[int], s2: Sequence[int], l: int, m: int,
                                   trials: int, seed: int) -> BernoulliEstimate:
    """Frequency of ``|h^-1(0) & S1| = 1`` and ``|h^-1(0) & S2| = 0`` over sampled hashes.

    Each block of trials draws its hash bits in one batch: trial ``t`` of a
    block uses ``A = bits[t, :, :l]`` and ``b = bits[t, :, l]``.
    """
    a1, a2 = _as_witnesses(s1, l), _as_witnesses(s2, l)
    if np.intersect1d(a1, a2).size:
        raise ValueError("S1 and S2 must be disjoint")
    if a1.size == 0:
        return BernoulliEstimate(0, trials)
    pts = np.concatenate([a1, a2])
    ext = np.hstack([hashfam.witness_bits(l, pts), np.ones((pts.size, 1))]).astype(np.int64)
    in1 = np.arange(pts.size) < a1.size
    hits = 0
    for _, count, rng in trial_blocks(seed, trials):
        bits = rng.integers(0, 2, size=(BLOCK_SIZE, m, l + 1), dtype=np.uint8)[:count]
        zero = np.all(((bits.astype(np.int64) @ ext.T) & 1) == 0, axis=1)  # (count, |S|)
        hits += int(np.count_nonzero((zero[:, in1].sum(axis=1) == 1) & ~zero[:, ~in1].any(axis=1)))
    return BernoulliEstimate(hits, trials)


def isolation_bound(a: int, b: int) -> float:
    """Lower bound ``a / (8 b)`` for ``|S1| = a`` and ``|S1 u S2| = b``."""
    return a / (8 * b)


# -- instances -----------------------------------------------------------

def problematic_instance(l: int, yes_witnesses: Sequence[int] = (0, 1), mid: float = 0.5,
                         p1: float = 1 / 3, p2: float = 2 / 3) -> PromiseInstance:
    """Two sure witnesses; every other witness sits inside the gap."""
    return PromiseInstance(WitnessTable.from_witnesses(l, yes_witnesses, 1.0, mid), p1, p2)


def single_witness_instance(l: int, y: int = 0, p1: float = 1 / 3,
                            p2: float = 2 / 3) -> PromiseInstance:
    return PromiseInstance(WitnessTable.from_witnesses(l, [y]), p1, p2)


def no_instance(l: int, value: float = 0.0, p1: float = 1 / 3, p2: float = 2 / 3) -> PromiseInstance:
    return PromiseInstance(WitnessTable(l, np.full(1 << l, value)), p1, p2)


def random_witness_set(l: int, size: int, rng: np.random.Generator) -> np.ndarray:
    return np.sort(rng.choice(1 << l, size=size, replace=False))


def expected_queries(l: int, interval: bool) -> int:
    return (l - 2) * l if interval else l

