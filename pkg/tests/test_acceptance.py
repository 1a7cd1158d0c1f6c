"""Acceptance criteria 1-14, one PASS/FAIL line each.

The lines appear in the terminal summary of any pytest run that collects
this module, or directly via ``python tests/test_acceptance.py``.
"""

import math
import sys
import time

import pytest

import _report
from vvlab import cli
from vvlab.cli import ExperimentConfig

SEED = 20240901

# criterion -> (experiment, parameters, randomized, time limit in seconds)
RUNS = {
    1: ("pairwise", {"cases": "2:1,3:2"}, False, 1.0),
    2: ("isolation", {"l": "12", "w": "3,5,9,17", "trials": "100000"}, True, 60.0),
    3: ("isolation", {"l": "12", "s1": "4,2,8", "s2": "4,14,8", "trials": "100000"}, True, 60.0),
    4: ("component1", {"wmax": "1000000"}, False, 1.0),
    5: ("soundness", {"l": "10", "trials": "10000"}, True, 300.0),
    6: ("vv-ma", {"l": "10", "instance": "problematic", "trials": "10000"}, True, 600.0),
    7: ("q-consistency", {"circuits": "50", "states": "100", "max_qubits": "10"}, True, 120.0),
    8: ("eigen-surgery", {"l": "1,2,3", "instances": "20"}, True, 10.0),
    9: ("second-moment", {"N": "2,4,8,8", "k": "1,2,4,1", "xs": "3", "trials": "100000"}, True, 300.0),
    10: ("projection-gap", {"l": "6,8,10", "d": "1,N/2,N-1", "trials": "10000", "eps": "0.1,0.5"},
         True, 600.0),
    12: ("basis-tvd", {"N": "2,16,64", "pair": "identical,orthogonal", "trials": "10000"}, True, 300.0),
    13: ("lh-classify", {"instances": "20", "nmax": "6", "dmax": "3"}, True, 120.0),
}

_cache = {}


def config(n):
    name, params, randomized, _ = RUNS[n]
    return ExperimentConfig(name, dict(params), SEED if randomized else None)


def outcome(n):
    if n not in _cache:
        start = time.perf_counter()
        result = cli.execute(config(n))
        _cache[n] = (result, time.perf_counter() - start)
    return _cache[n]


def report(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(line)
    _report.LINES.append(line)
    return ok


def check_run(n, extra=None):
    result, seconds = outcome(n)
    limit = RUNS[n][3]
    ok = result.passed and seconds < limit
    failing = [c.get("parameterization", c) for c in result.summary.get("cases", []) if not c["pass"]]
    detail = f"{RUNS[n][0]} in {seconds:.1f}s (limit {limit:.0f}s)"
    if failing:
        detail += f"; failing cases: {failing}"
    if extra is not None:
        ok_extra, note = extra(result)
        ok = ok and ok_extra
        detail += f"; {note}"
    return report(n, ok, detail)


def _component1_extra(result):
    from fractions import Fraction

    from vvlab.reduction import component1_success_prob

    # every w is compared at double precision; small w also against rationals
    exact = all(component1_success_prob(w) == (1 - 1 / w) ** (w - 1) for w in range(1, 10**6 + 1, 997))
    rational = all(math.isclose(component1_success_prob(w), float(Fraction(w - 1, w) ** (w - 1)),
                                rel_tol=1e-12) for w in range(1, 300))
    return exact and rational, f"min {result.rows[0][4]:.6f} vs 1/e {1 / math.e:.6f}"


def _q_extra(result):
    return True, f"max error {result.summary['max_error']:.2e}"


def _gersgorin(result):
    return all(c["gersgorin"] for c in result.summary["cases"])


def _second_moment_extra(result):
    return True, f"agrees with the Haar average in every case: {result.summary['exact_match']}"


@pytest.mark.parametrize("n", [1, 2, 3, 5, 6, 8, 12, 13])
def test_criterion(n):
    assert check_run(n)


def test_criterion_4():
    assert check_run(4, _component1_extra)


def test_criterion_7():
    assert check_run(7, _q_extra)


def test_criterion_9():
    assert check_run(9, _second_moment_extra)


def test_criterion_10():
    assert check_run(10)


def test_criterion_11():
    result, _ = outcome(10)
    trials = sum(1 for _ in result.rows)
    assert report(11, _gersgorin(result), f"Gersgorin bound checked on {trials} projection trials")


def test_criterion_14():
    same = []
    for n, (name, _, randomized, _) in RUNS.items():
        if not randomized:
            continue
        first = cli.render_csv(outcome(n)[0])
        again = cli.render_csv(cli.execute(config(n)))
        same.append((n, first.encode() == again.encode()))
    bad = [n for n, ok in same if not ok]
    assert report(14, not bad, f"reran criteria {[n for n, _ in same]}; differing: {bad}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
