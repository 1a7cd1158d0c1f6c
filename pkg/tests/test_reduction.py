import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vvlab import hashfam
from vvlab.qsim.circuit import point_acceptor, rejector
from vvlab.qsim.qoperator import basis_witness_table
from vvlab.reduction import (
    OraclePolicy,
    amplify_to_target,
    component1_success_prob,
    estimate_isolation_probability,
    expected_queries,
    isolation_bound,
    ma_runner,
    monte_carlo,
    no_instance,
    np_runner,
    oracle_answer,
    problematic_instance,
    qcma_runner,
    single_witness_instance,
    size_guess,
    vv_ma_run,
    vv_np_run,
    vv_qcma_run,
)
from vvlab.stats import wilson_interval
from vvlab.verifier import (
    PromiseInstance,
    UniqueVerdict,
    WitnessTable,
    classify_unique,
    restrict,
)

POLICIES = list(OraclePolicy)


def exact_isolation(s1, s2, l, m):
    """Probability of isolating one element of S1 and none of S2, over the whole family."""
    pts = np.concatenate([np.asarray(s1, dtype=np.int64), np.asarray(s2, dtype=np.int64)])
    zero = hashfam.family_outputs(l, m, pts) == 0
    a = len(s1)
    hits = (zero[:, :a].sum(axis=1) == 1) & ~zero[:, a:].any(axis=1)
    return Fraction(int(hits.sum()), zero.shape[0])


# -- component 1 -----------------------------------------------------------

def test_component1_examples():
    assert component1_success_prob(1) == 1.0
    assert component1_success_prob(2) == 0.5
    v = component1_success_prob(10**6)
    assert v >= 1 / math.e
    assert abs(v - 1 / math.e) <= 1e-5


@given(st.integers(1, 300))
def test_component1_matches_rational_oracle(w):
    exact = Fraction(w - 1, w) ** (w - 1)
    assert component1_success_prob(w) == pytest.approx(float(exact), rel=1e-12)
    assert component1_success_prob(w) >= 1 / math.e


def test_component1_rejects_zero():
    with pytest.raises(ValueError):
        component1_success_prob(0)


def test_size_guess():
    assert [size_guess(w) for w in (1, 2, 3, 4, 5, 9, 17)] == [0, 1, 1, 2, 2, 3, 4]


# -- oracle policy ---------------------------------------------------------

def test_oracle_answers():
    rng = np.random.default_rng(0)
    for pol in POLICIES:
        assert oracle_answer(UniqueVerdict.UMAPP_YES, pol, rng) is True
        assert oracle_answer(UniqueVerdict.UMAPP_NO, pol, rng) is False
    assert oracle_answer(UniqueVerdict.NEITHER, OraclePolicy.ANSWER_NO, rng) is False
    assert oracle_answer(UniqueVerdict.NEITHER, OraclePolicy.ANSWER_YES, rng) is True
    draws = {oracle_answer(UniqueVerdict.NEITHER, OraclePolicy.ANSWER_RANDOM, rng)
             for _ in range(64)}
    assert draws == {True, False}


# -- NP reduction ----------------------------------------------------------

@pytest.mark.parametrize("policy", POLICIES)
def test_np_empty_table_always_rejects(policy):
    stats = monte_carlo(np_runner(WitnessTable(8, np.zeros(256)), policy), 500, 3)
    assert stats.accepted.successes == 0


def test_np_report_shape():
    report = vv_np_run(WitnessTable.from_witnesses(6, [5]), rng=np.random.default_rng(1))
    assert len(report.queries) == expected_queries(6, interval=False)
    assert [q.b for q in report.queries] == list(range(6))
    assert all(q.k is None for q in report.queries)
    assert report.unique_yes_hits <= len(report.queries)
    assert report.accepted == any(q.answer for q in report.queries)
    data = json.loads(report.to_json())
    assert set(data) == {"accepted", "queries", "unique_yes_hits"}
    assert set(data["queries"][0]) == {"k", "b", "classification", "answer"}


def test_np_needs_deterministic_table():
    with pytest.raises(ValueError):
        vv_np_run(WitnessTable(2, [0.5, 0, 0, 0]))


@pytest.mark.parametrize("w", [1, 5])
def test_np_completeness(w):
    rng = np.random.default_rng(w)
    table = WitnessTable.from_witnesses(10, rng.choice(1024, w, replace=False))
    stats = monte_carlo(np_runner(table, OraclePolicy.ANSWER_NO), 2000, 17)
    assert stats.unique_hit.consistent_with_lower_bound(1 / 8)
    assert stats.accepted.consistent_with_lower_bound(1 / 8)


# -- interval reductions ---------------------------------------------------

def _random_no(l, seed):
    rng = np.random.default_rng(seed)
    return PromiseInstance(WitnessTable(l, rng.uniform(0, 1 / 3, 1 << l)), 1 / 3, 2 / 3)


@pytest.mark.parametrize("policy", POLICIES)
def test_ma_no_instance_always_rejects(policy):
    stats = monte_carlo(ma_runner(_random_no(8, 1), policy), 300, 5)
    assert stats.accepted.successes == 0


def test_ma_report_shape():
    report = vv_ma_run(single_witness_instance(7, 3), rng=np.random.default_rng(0))
    assert len(report.queries) == expected_queries(7, interval=True)
    assert {(q.k, q.b) for q in report.queries} == {(k, b) for k in range(1, 6) for b in range(7)}


def test_ma_rejects_bad_input():
    with pytest.raises(ValueError):
        vv_ma_run(PromiseInstance(WitnessTable(4, np.full(16, 0.5)), 1 / 3, 2 / 3))
    with pytest.raises(ValueError):
        vv_ma_run(single_witness_instance(2))


@pytest.mark.parametrize("seed", range(5))
def test_batched_queries_match_explicit_restriction(seed):
    """The survivor-count path agrees with restrict + classify_unique per query."""
    inst = problematic_instance(6, (3, 40), mid=0.5)
    amp = amplify_to_target(inst).instance
    report = vv_ma_run(inst, rng=np.random.default_rng(seed))
    l = inst.l
    pairs = [(k, b) for k in range(1, l - 1) for b in range(l)]
    sizes = [b + 2 for _, b in pairs]
    hashes = hashfam.split_stack(hashfam.sample_stack(l, sizes, np.random.default_rng(seed)), sizes)
    for (k, b), h, q in zip(pairs, hashes, report.queries):
        narrowed = amp.with_thresholds(k / l, (k + 1) / l)
        assert (q.k, q.b) == (k, b)
        assert q.classification == classify_unique(restrict(narrowed, h)).value


@pytest.mark.parametrize("policy", POLICIES)
def test_unique_hit_implies_accept(policy):
    run = ma_runner(problematic_instance(6), policy)
    for seed in range(40):
        report = run(np.random.default_rng(seed))
        if report.unique_yes_hits:
            assert report.accepted


def test_ma_single_witness_completeness():
    stats = monte_carlo(ma_runner(single_witness_instance(8, 77), OraclePolicy.ANSWER_NO), 1000, 4)
    assert stats.accepted.consistent_with_lower_bound(1 / 8)


def test_amplification_skipped_when_thresholds_already_tight():
    inst = single_witness_instance(4).with_thresholds(0.1, 0.9)
    assert amplify_to_target(inst).reps is None


def test_explicit_reps_too_small():
    with pytest.raises(ValueError):
        amplify_to_target(problematic_instance(10), reps=1)


# -- circuit-derived tables ------------------------------------------------

def test_qcma_rejecting_circuit_never_accepts():
    table = basis_witness_table(rejector(6, 0.25), 1 / 3, 2 / 3)
    for policy in POLICIES:
        assert monte_carlo(qcma_runner(table, policy), 300, 2).accepted.successes == 0


def test_qcma_point_circuit_completeness():
    table = basis_witness_table(point_acceptor(5, 19), 1 / 3, 2 / 3)
    stats = monte_carlo(qcma_runner(table, OraclePolicy.ANSWER_NO), 1000, 8)
    assert stats.accepted.consistent_with_lower_bound(1 / 8)
    report = vv_qcma_run(table, rng=np.random.default_rng(1))
    assert len(report.queries) == expected_queries(5, interval=True)


def test_filtered_witness_contributes_nothing():
    table = basis_witness_table(point_acceptor(4, 6), 1 / 3, 2 / 3)
    h = hashfam.AffineHash(np.eye(4), [0, 1, 1, 0])  # preimage of 0 is y = 6
    kept = restrict(table, h).probs
    assert kept[6] == table.probs[6] == pytest.approx(1.0, abs=1e-12)
    assert np.count_nonzero(kept) == 1
    h = hashfam.AffineHash(np.eye(4), [0, 0, 0, 0])  # only y = 0 survives
    kept = restrict(table, h).probs
    assert kept[6] == 0.0
    assert np.flatnonzero(kept).tolist() in ([], [0])


# -- isolation -------------------------------------------------------------

def test_isolation_empty_s1():
    assert estimate_isolation_probability([], [1, 2], 4, 2, 100, 0).successes == 0


def test_isolation_rejects_overlap_and_repeats():
    with pytest.raises(ValueError):
        estimate_isolation_probability([1, 2], [2], 4, 2, 10, 0)
    with pytest.raises(ValueError):
        estimate_isolation_probability([1, 1], [], 4, 2, 10, 0)
    with pytest.raises(ValueError):
        estimate_isolation_probability([16], [], 4, 2, 10, 0)


@pytest.mark.parametrize("s1,s2,m", [([1, 6, 9], [], 3), ([0, 3], [5, 12], 4), ([2, 7, 8, 11], [1, 4, 14, 15], 4)])
def test_isolation_estimate_matches_enumeration(s1, s2, m):
    exact = exact_isolation(s1, s2, 4, m)
    est = estimate_isolation_probability(s1, s2, 4, m, 40_000, 21)
    lo, hi = est.interval()
    assert lo <= float(exact) <= hi


@settings(max_examples=60, deadline=None)
@given(st.integers(3, 4), st.data())
def test_isolation_bound_holds_exactly(l, data):
    # keeps the family at 2^20 members or fewer
    b = data.draw(st.integers(1, 8 if l == 3 else 7))
    m = size_guess(b) + 2
    pts = data.draw(st.lists(st.integers(0, (1 << l) - 1), min_size=b, max_size=b, unique=True))
    a = data.draw(st.integers(1, b))
    assert exact_isolation(pts[:a], pts[a:], l, m) >= Fraction(a, 8 * b)
    assert isolation_bound(a, b) == a / (8 * b)


def test_isolation_prefix_stable():
    a = estimate_isolation_probability([1, 2, 3], [9], 6, 4, 1500, 5)
    b = estimate_isolation_probability([1, 2, 3], [9], 6, 4, 1024, 5)
    c = estimate_isolation_probability([1, 2, 3], [9], 6, 4, 1024, 5)
    assert b == c
    assert a.successes >= b.successes


def test_instances():
    p = problematic_instance(5)
    assert p.yes_set().tolist() == [0, 1]
    assert p.gap_set().size == 30
    assert no_instance(4).probs.max() == 0.0
    _, hi = wilson_interval(0, 10)
    assert hi > 0
