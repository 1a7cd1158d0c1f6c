"""Batch driver: every experiment as a seeded, reproducible subcommand.

Exit status is 0 when every bound check passes, 1 when one fails and 2 for
usage or configuration errors.  Config files hold ``key=value`` lines; flags
given on the command line override them.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from . import hamiltonian as ham
from . import hashfam
from .qsim import circuit as qc
from .qsim import haar, projection
from .qsim import qoperator as qop
from .reduction import (
    OraclePolicy,
    component1_success_prob,
    estimate_isolation_probability,
    isolation_bound,
    ma_runner,
    monte_carlo,
    np_runner,
    problematic_instance,
    qcma_runner,
    single_witness_instance,
    size_guess,
)
from .stats import BernoulliEstimate, auxiliary_rng, trial_rngs
from .verifier import MAX_WITNESS_BITS, PromiseInstance, WitnessTable

MAX_TRIALS = 10**7
MAX_SEED = 2**64
AGGREGATE_COLUMNS = ["experiment", "l", "parameterization", "trials", "estimate", "stderr",
                     "bound", "pass"]


class ConfigError(ValueError):
    def __init__(self, name: str, message: str):
        super().__init__(f"{name}: {message}")
        self.field = name


# -- parameter parsing ---------------------------------------------------

def _int(text: str) -> int:
    return int(float(text)) if "e" in text.lower() else int(text)


def _int_list(text: str) -> list[int]:
    return [_int(t) for t in text.split(",") if t.strip()]


def _float_list(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t.strip()]


def _str_list(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _fraction_float(text: str) -> float:
    return float(Fraction(text.strip()))


def _policies(text: str) -> list[OraclePolicy]:
    if text.strip().lower() == "all":
        return list(OraclePolicy)
    return [OraclePolicy(t) for t in _str_list(text)]


def resolve_rank(token: str, n: int) -> int:
    """``N``, ``N/<k>``, ``N-<k>`` or a plain integer, for dimension ``n``."""
    t = token.strip().replace(" ", "")
    if t == "N":
        return n
    if t.startswith("N/"):
        return n // int(t[2:])
    if t.startswith("N-"):
        return n - int(t[2:])
    return int(t)


@dataclass(frozen=True)
class Param:
    name: str
    parse: Callable[[str], Any]
    default: str | None
    help: str
    check: Callable[[Any], str | None] | None = None
    required: bool = False


def _in_range(lo, hi):
    def check(v):
        values = v if isinstance(v, list) else [v]
        bad = [x for x in values if not lo <= x <= hi]
        return f"{bad[0]} outside [{lo}, {hi}]" if bad else None
    return check


def _choice(*options):
    def check(v):
        values = v if isinstance(v, list) else [v]
        bad = [x for x in values if x not in options]
        return f"{bad[0]!r} is not one of {', '.join(options)}" if bad else None
    return check


def _nonempty(v):
    return None if v else "must not be empty"


def TRIALS(default: int) -> Param:
    return Param("trials", _int, str(default), "Monte-Carlo trials", _in_range(1, MAX_TRIALS))


def L_RED(default: int, lo: int = 3) -> Param:
    return Param("l", _int, str(default), "witness bits", _in_range(lo, MAX_WITNESS_BITS))


POLICY = Param("policy", _policies, "all", "oracle policy list or 'all'", _nonempty)


# -- outcomes and config -------------------------------------------------

@dataclass
class Outcome:
    columns: list[str]
    rows: list[list[Any]]
    summary: dict[str, Any]
    passed: bool


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def render_csv(outcome: Outcome) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(outcome.columns)
    for row in outcome.rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(v)
    return v


def render_json(outcome: Outcome) -> str:
    return json.dumps(_jsonable(outcome.summary), sort_keys=True, indent=2) + "\n"


@dataclass
class ExperimentConfig:
    experiment: str
    params: dict[str, str] = field(default_factory=dict)
    seed: int | None = None
    out: str | None = None

    def to_text(self) -> str:
        lines = [f"experiment={self.experiment}"]
        if self.seed is not None:
            lines.append(f"seed={self.seed}")
        if self.out is not None:
            lines.append(f"out={self.out}")
        lines += [f"{k}={v}" for k, v in sorted(self.params.items())]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ExperimentConfig":
        values: dict[str, str] = {}
        for n, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {n}", f"expected key=value, got {line!r}")
            k, v = line.split("=", 1)
            values[k.strip().replace("-", "_")] = v.strip()
        experiment = values.pop("experiment", "")
        seed = values.pop("seed", None)
        out = values.pop("out", None)
        return cls(experiment, values, _parse_seed(seed), out)

    def validate(self) -> dict[str, Any]:
        """Typed parameter values; raises :class:`ConfigError` naming the bad field."""
        exp = REGISTRY.get(self.experiment)
        if exp is None:
            raise ConfigError("experiment", f"unknown experiment {self.experiment!r}")
        known = {p.name for p in exp.params}
        for k in self.params:
            if k not in known:
                raise ConfigError(k, f"not a parameter of {exp.name}")
        if exp.randomized(self.params) and self.seed is None:
            raise ConfigError("seed", "required for randomized experiments")
        typed = {}
        for p in exp.params:
            raw = self.params.get(p.name, p.default)
            if raw is None:
                if p.required:
                    raise ConfigError(p.name, "missing")
                typed[p.name] = None
                continue
            try:
                value = p.parse(str(raw))
            except (ValueError, ZeroDivisionError) as exc:
                raise ConfigError(p.name, f"cannot parse {raw!r} ({exc})") from None
            problem = p.check(value) if p.check else None
            if problem:
                raise ConfigError(p.name, problem)
            typed[p.name] = value
        if exp.validate:
            exp.validate(typed)
        return typed


def _parse_seed(text) -> int | None:
    if text is None:
        return None
    try:
        seed = int(text)
    except ValueError:
        raise ConfigError("seed", f"not an integer: {text!r}") from None
    if not 0 <= seed < MAX_SEED:
        raise ConfigError("seed", "must be an unsigned 64-bit integer")
    return seed


@dataclass(frozen=True)
class Experiment:
    name: str
    summary: str
    params: tuple[Param, ...]
    body: Callable[[dict[str, Any], int | None], Outcome]
    randomized: Callable[[dict[str, str]], bool] = lambda raw: True
    validate: Callable[[dict[str, Any]], None] | None = None


# -- reductions ----------------------------------------------------------

def _bernoulli_row(name, l, label, est: BernoulliEstimate, bound, passed):
    return [name, l, label, est.trials, est.estimate, est.stderr, bound, passed]


def _aggregate(rows) -> Outcome:
    passed = all(r[-1] for r in rows)
    cases = [dict(zip(AGGREGATE_COLUMNS, r)) for r in rows]
    return Outcome(AGGREGATE_COLUMNS, rows, {"cases": cases, "pass": passed}, passed)


def _random_no_instance(l, p1, p2, rng) -> PromiseInstance:
    return PromiseInstance(WitnessTable(l, rng.uniform(0.0, p1, size=1 << l)), p1, p2)


def _completeness_or_soundness(name, l, label, stats, yes: bool, bound_yes: float):
    est = stats.accepted
    if yes:
        return _bernoulli_row(name, l, label, est, bound_yes,
                              est.consistent_with_lower_bound(bound_yes))
    return _bernoulli_row(name, l, label, est, 0.0, est.successes == 0)


def _vv_np(p, seed):
    l = p["l"]
    rng = auxiliary_rng(seed)
    if p["instance"] == "no":
        table = WitnessTable(l, np.zeros(1 << l))
    else:
        table = WitnessTable.from_witnesses(l, rng.choice(1 << l, p["w"], replace=False))
    rows = []
    for pol in p["policy"]:
        stats = monte_carlo(np_runner(table, pol), p["trials"], seed)
        label = f"instance={p['instance']} w={len(table.accepting())} policy={pol.value}"
        rows.append(_completeness_or_soundness("vv-np", l, label, stats, p["instance"] != "no",
                                               1 / 8))
    return _aggregate(rows)


def _ma_instance(p, rng) -> PromiseInstance:
    l, p1, p2 = p["l"], p["p1"], p["p2"]
    if p["instance"] == "no":
        return _random_no_instance(l, p1, p2, rng)
    if p["instance"] == "single":
        return single_witness_instance(l, int(rng.integers(0, 1 << l)), p1, p2)
    return problematic_instance(l, (0, 1), p["mid"], p1, p2)


def _vv_ma(p, seed):
    inst = _ma_instance(p, auxiliary_rng(seed))
    rows = []
    for pol in p["policy"]:
        stats = monte_carlo(ma_runner(inst, pol, p["reps"]), p["trials"], seed)
        label = f"instance={p['instance']} policy={pol.value}"
        rows.append(_completeness_or_soundness("vv-ma", p["l"], label, stats,
                                               p["instance"] != "no", 1 / 24))
    return _aggregate(rows)


def _qcma_table(p, rng) -> PromiseInstance:
    l = p["l"]
    if p["instance"] == "no":
        circuit = qc.rejector(l, p["value"])
    else:
        circuit = qc.point_acceptor(l, int(rng.integers(0, 1 << l)))
    return qop.basis_witness_table(circuit, p["p1"], p["p2"])


def _vv_qcma(p, seed):
    table = _qcma_table(p, auxiliary_rng(seed))
    rows = []
    for pol in p["policy"]:
        stats = monte_carlo(qcma_runner(table, pol), p["trials"], seed)
        label = f"instance={p['instance']} policy={pol.value}"
        rows.append(_completeness_or_soundness("vv-qcma", p["l"], label, stats,
                                               p["instance"] != "no", 1 / 24))
    return _aggregate(rows)


def _check_qcma(p):
    limit = qc.MAX_QUBITS - 1 if p["instance"] == "no" else (qc.MAX_QUBITS + 1) // 2
    if p["l"] > limit:
        raise ConfigError("l", f"{p['instance']} circuits need l <= {limit} to fit "
                               f"{qc.MAX_QUBITS} qubits")
    if p["instance"] == "no" and not 0 <= p["value"] <= p["p1"]:
        raise ConfigError("value", "a no-instance accepts with probability at most p1")


def _check_thresholds(p):
    if not 0 <= p["p1"] < p["p2"] <= 1:
        raise ConfigError("p2", "need 0 <= p1 < p2 <= 1")


def _soundness(p, seed):
    l, trials = p["l"], p["trials"]
    rng = auxiliary_rng(seed)
    zero = WitnessTable(l, np.zeros(1 << l))
    ma_inst = _random_no_instance(l, 1 / 3, 2 / 3, rng)
    q_table = qop.basis_witness_table(qc.rejector(l, p["value"]), 1 / 3, 2 / 3)
    rows = []
    for pol in p["policy"]:
        for name, runner in (("vv-np", np_runner(zero, pol)), ("vv-ma", ma_runner(ma_inst, pol)),
                             ("vv-qcma", qcma_runner(q_table, pol))):
            stats = monte_carlo(runner, trials, seed)
            rows.append(_completeness_or_soundness(name, l, f"instance=no policy={pol.value}",
                                                   stats, False, 0.0))
    return _aggregate(rows)


def _isolation(p, seed):
    l, trials = p["l"], p["trials"]
    if p["s1"] is not None:
        if p["s2"] is None or len(p["s2"]) != len(p["s1"]):
            raise ConfigError("s2", "needs one entry per s1 entry")
        cases = list(zip(p["s1"], p["s2"]))
    else:
        cases = [(w, 0) for w in p["w"]]
    rng = auxiliary_rng(seed)
    rows = []
    for a, extra in cases:
        b = a + extra
        if a < 1 or b > 1 << l:
            raise ConfigError("s1" if p["s1"] else "w", f"set sizes ({a}, {extra}) do not fit l={l}")
        m = p["m"] if p["m"] is not None else size_guess(b) + 2
        points = rng.choice(1 << l, size=b, replace=False)
        est = estimate_isolation_probability(points[:a], points[a:], l, m, trials, seed)
        bound = isolation_bound(a, b)
        label = f"s1={a} s2={extra} m={m}"
        rows.append(_bernoulli_row("isolation", l, label, est, bound,
                                   est.consistent_with_lower_bound(bound)))
    return _aggregate(rows)


def _pairwise(p, seed):
    rows = []
    for case in p["cases"]:
        l, m = (int(v) for v in case.split(":"))
        if not 1 <= l or family_too_big(l, m):
            raise ConfigError("cases", f"family for l={l}, m={m} is too large to enumerate")
        ys = np.arange(1 << l)
        out = hashfam.family_outputs(l, m, ys)
        size = out.shape[0]
        worst = 0.0
        exact = True
        for y1 in range(1 << l):
            for y2 in range(1 << l):
                if y1 == y2:
                    continue
                joint = out[:, y1] * (1 << m) + out[:, y2]
                counts = np.bincount(joint, minlength=1 << (2 * m))
                exact &= bool(np.all(counts * (1 << (2 * m)) == size))
                worst = max(worst, float(np.abs(counts / size - 2.0 ** (-2 * m)).max()))
        rows.append(["pairwise", l, f"m={m} family={size}", size, worst, 0.0, 2.0 ** (-2 * m), exact])
    return _aggregate(rows)


def family_too_big(l: int, m: int) -> bool:
    return hashfam.family_size_bits(l, m) > hashfam.MAX_ENUMERATION_BITS


def _component1(p, seed):
    ws = range(1, p["wmax"] + 1)
    values = np.fromiter(map(component1_success_prob, ws), dtype=float, count=p["wmax"])
    # rational oracle on small w; floating evaluation may differ by rounding only
    exact = all(math.isclose(values[w - 1], float(Fraction(w - 1, w) ** (w - 1)), rel_tol=1e-12)
                for w in range(1, min(p["wmax"], 200) + 1))
    low = float(values.min())
    passed = bool(low >= 1 / math.e) and exact
    rows = [["component1", "", f"w=1..{p['wmax']}", p["wmax"], low, 0.0, 1 / math.e, passed]]
    return _aggregate(rows)


# -- quantum experiments -------------------------------------------------

SECOND_MOMENT_COLUMNS = AGGREGATE_COLUMNS + ["exact", "exact_match"]


def _second_moment(p, seed):
    """Pass means agreement with the closed form; agreement with the Haar average is reported too."""
    if len(p["N"]) != len(p["k"]):
        raise ConfigError("k", "needs one entry per N entry")
    rng = auxiliary_rng(seed)
    rows = []
    for n, k in zip(p["N"], p["k"]):
        if not 0 <= k <= n:
            raise ConfigError("k", f"k={k} outside [0, {n}]")
        for x_index in range(p["xs"]):
            x = haar.random_traceless_hermitian(n, rng)
            closed = haar.second_moment_formula(n, k, x)
            exact = haar.exact_second_moment(n, k, x)
            est = haar.mc_second_moment(n, k, x, p["trials"], seed)
            label = f"N={n} k={k} x={x_index}"
            rows.append(["second-moment", int(n).bit_length() - 1, label, est.trials, est.mean,
                         est.stderr, closed, est.within(closed), exact, est.within(exact)])
    passed = all(r[7] for r in rows)
    cases = [dict(zip(SECOND_MOMENT_COLUMNS, r)) for r in rows]
    summary = {"cases": cases, "pass": passed, "exact_match": all(r[9] for r in rows)}
    return Outcome(SECOND_MOMENT_COLUMNS, rows, summary, passed)


def _check_power_of_two(name):
    def check(values):
        bad = [v for v in values if v < 1 or v & (v - 1) or v > 2**qc.MAX_QUBITS]
        return f"{bad[0]} is not a power of two up to 2^{qc.MAX_QUBITS}" if bad else None
    return check


def _subspace(kind: str, l: int, rng) -> np.ndarray | None:
    if kind == "basis":
        return None
    n = 2**l
    if kind == "random":
        return haar.haar_isometry(n, 2, rng)
    # top two eigenvectors of an operator with a planted pair of large eigenvalues
    spectrum = np.concatenate([[0.9, 0.7], rng.uniform(0.0, 0.3, n - 2)])
    _, vecs = np.linalg.eigh(qop.QOperator.from_spectrum(spectrum, rng).matrix)
    return vecs[:, -2:]


def _projection_gap(p, seed):
    rows, cases = [], []
    rng = auxiliary_rng(seed)
    for l in p["l"]:
        n = 2**l
        v = _subspace(p["subspace"], l, rng)
        for token in p["d"]:
            try:
                d = resolve_rank(token, n)
            except (ValueError, ZeroDivisionError):
                raise ConfigError("d", f"cannot parse rank {token!r}") from None
            if not 1 <= d <= n:
                raise ConfigError("d", f"{token} gives d={d} outside [1, {n}] at l={l}")
            res = projection.projection_gap_experiment(l, d, p["trials"], seed, subspace=v,
                                                       method=p["method"])
            rows += [[l, d, t, g] for t, g in enumerate(res.gaps)]
            tails = {str(e): res.tail_fraction(res.bound / e) for e in p["eps"]}
            ok = (res.mean_gap <= res.bound and res.gersgorin_ok()
                  and all(res.markov_tail_ok(e) for e in p["eps"]))
            cases.append({"l": l, "d": d, "mean": res.mean_gap, "stderr": res.summary.stderr,
                          "bound": res.bound, "tails": tails, "gersgorin": res.gersgorin_ok(),
                          "pass": ok})
    return _qsim_outcome(["l", "d", "trial", "gap"], rows, cases)


def _qsim_outcome(columns, rows, cases) -> Outcome:
    passed = all(c["pass"] for c in cases)
    summary = {"cases": cases, "pass": passed}
    if len(cases) == 1:
        summary.update({k: v for k, v in cases[0].items() if k != "pass"})
    return Outcome(columns, rows, summary, passed)


def _basis_tvd(p, seed):
    rows, cases = [], []
    for n in p["N"]:
        for pair in p["pair"]:
            a = np.zeros(n, dtype=complex)
            a[0] = 1
            b = a.copy() if pair == "identical" else np.roll(a, 1)
            res = projection.random_basis_tvd(a, b, p["trials"], seed, p["floor"])
            rows += [[n, pair, t, v] for t, v in enumerate(res.values)]
            if pair == "identical":
                ok, bound = bool(np.all(res.values == 0.0)), 0.0
            else:
                ok, bound = res.mean >= p["floor"], p["floor"]
            cases.append({"N": n, "pair": pair, "mean": res.mean, "stderr": res.stderr,
                          "min": res.min, "fraction_below": res.fraction_below,
                          "bound": bound, "pass": ok})
    return _qsim_outcome(["N", "pair", "trial", "tvd"], rows, cases)


def _surgery(p, seed):
    rng = auxiliary_rng(seed)
    rows, cases = [], []
    for l in p["l"]:
        worst = 0.0
        for i in range(p["instances"]):
            q = qop.QOperator.from_spectrum(rng.uniform(0, 1, 2**l), rng)
            out = qop.add_third_eigenvalue(q)
            expected = np.sort(np.concatenate([q.eigenvalues(), [1 / 3], np.zeros(2**l - 1)]))
            err = float(np.abs(np.sort(out.eigenvalues()) - expected).max())
            worst = max(worst, err)
            rows.append([l, i, err, err <= 1e-8])
        cases.append({"l": l, "max_error": worst, "bound": 1e-8, "pass": worst <= 1e-8})
    return _qsim_outcome(["l", "instance", "max_error", "pass"], rows, cases)


def _q_consistency(p, seed):
    rows, worst = [], 0.0
    rng_iter = trial_rngs(seed, p["circuits"])
    for i, rng in enumerate(rng_iter):
        n = int(rng.integers(1, p["max_qubits"] + 1))
        l = int(rng.integers(1, n + 1))
        circuit = qc.random_circuit(l, n - l, p["depth"], rng)
        q = qop.build_q_operator(circuit)
        err = 0.0
        for _ in range(p["states"]):
            psi = rng.standard_normal(2**l) + 1j * rng.standard_normal(2**l)
            psi /= np.linalg.norm(psi)
            err = max(err, abs(q.expectation(psi) - qc.simulate(circuit, psi)))
        worst = max(worst, err)
        rows.append([i, l, n - l, err, err <= 1e-9])
    case = {"max_error": worst, "bound": 1e-9, "pass": worst <= 1e-9}
    return _qsim_outcome(["circuit", "l", "m", "max_error", "pass"], rows, [case])


def _lh_classify(p, seed):
    if p["hamiltonian"] is not None:
        try:
            h = ham.loads(Path(p["hamiltonian"]).read_text())
        except (OSError, ValueError, KeyError) as exc:
            raise ConfigError("hamiltonian", str(exc)) from None
        if p["a"] is None or p["b"] is None or not p["a"] < p["b"]:
            raise ConfigError("b", "a file run needs thresholds a < b")
        instances = [("file", h, [(p["a"], p["b"])])]
    else:
        rng = auxiliary_rng(seed)
        instances = [("heisenberg-2", ham.uniform_chain(2, 2, ham.heisenberg_term()), [(-2.0, 0.0)])]
        for i in range(p["instances"]):
            d = int(rng.integers(2, p["dmax"] + 1))
            nmax = max(2, min(p["nmax"], int(math.log(ham.MAX_DIM, d))))
            n = int(rng.integers(2, nmax + 1))
            h = ham.random_chain(n, d, rng)
            l0, l1 = ham.low_spectrum(h, 2)
            scale = max(l1 - l0, 1.0)
            thresholds = [tuple(sorted(rng.uniform(l0 - scale, l1 + scale, 2))) for _ in range(5)]
            instances.append((f"random-{i}", h, thresholds))
    rows, passed = [], True
    for name, h, thresholds in instances:
        direct = ham.low_spectrum(h, 2)
        embedded = ham.low_spectrum(h, 2, "real-embedding")
        norm = max(np.linalg.norm(ham.assemble_dense(h), 2), 1.0)
        diff = float(np.abs(direct - embedded).max())
        ok_solver = diff <= 1e-8 * norm
        if name == "heisenberg-2":
            full = ham.low_spectrum(h, 4)
            ok_solver &= bool(np.abs(full - [-3, 1, 1, 1]).max() <= 1e-8)
        for a, b in thresholds:
            rep = ham.classify_lh(h, a, b, p["gap_threshold"])
            implied = (ham.LhFlag.UNIQUE_LH_YES not in rep.flags) or rep.gap > b - a
            ok = bool(ok_solver and implied)
            passed &= ok
            flags = "|".join(sorted(f.value for f in rep.flags))
            rows.append([name, h.n, h.d, rep.lambda0, rep.lambda1, rep.gap, diff, a, b, flags, ok])
    columns = ["instance", "n", "d", "lambda0", "lambda1", "gap", "solver_diff", "a", "b",
               "flags", "pass"]
    summary = {"instances": len(instances), "checks": len(rows), "pass": passed}
    return Outcome(columns, rows, summary, passed)


def _lh_randomized(raw):
    return raw.get("hamiltonian") is None


def _opt_float(name: str, help: str) -> Param:
    return Param(name, float, None, help)


_P1 = Param("p1", _fraction_float, "1/3", "no-threshold")
_P2 = Param("p2", _fraction_float, "2/3", "yes-threshold")

EXPERIMENTS = [
    Experiment("vv-np", "NP witness-isolation reduction, Monte-Carlo acceptance",
               (L_RED(10, 1), TRIALS(10000),
                Param("instance", str, "no", "no | witnesses", _choice("no", "witnesses")),
                Param("w", _int, "1", "accepting witnesses for instance=witnesses",
                      _in_range(1, 1 << MAX_WITNESS_BITS)),
                POLICY), _vv_np),
    Experiment("vv-ma", "MA reduction with exact unique-promise oracle",
               (L_RED(10), TRIALS(10000),
                Param("instance", str, "problematic", "no | single | problematic",
                      _choice("no", "single", "problematic")),
                Param("mid", float, "0.5", "gap value of the problematic instance",
                      _in_range(0.0, 1.0)),
                _P1, _P2, Param("reps", _int, None, "amplification repetitions",
                                _in_range(1, 10**4)),
                POLICY), _vv_ma, validate=_check_thresholds),
    Experiment("vv-qcma", "QCMA reduction on a circuit's basis-witness table",
               (L_RED(10), TRIALS(10000),
                Param("instance", str, "no", "no | point", _choice("no", "point")),
                Param("value", float, "0.25", "acceptance probability of the no-circuit",
                      _in_range(0.0, 1.0)),
                _P1, _P2, POLICY), _vv_qcma,
               validate=lambda p: (_check_thresholds(p), _check_qcma(p))),
    Experiment("soundness", "all three reductions on no-instances, every policy",
               (L_RED(10), TRIALS(10000),
                Param("value", float, "0.25", "acceptance probability of the no-circuit",
                      _in_range(0.0, 1 / 3)),
                POLICY), _soundness,
               validate=lambda p: _check_qcma({**p, "instance": "no", "p1": 1 / 3})),
    Experiment("isolation", "isolation frequency of sampled hashes against a/(8b)",
               (Param("l", _int, "12", "witness bits", _in_range(1, MAX_WITNESS_BITS)),
                TRIALS(100000),
                Param("w", _int_list, "3,5,9,17", "witness-set sizes (single-set mode)",
                      _in_range(1, 1 << MAX_WITNESS_BITS)),
                Param("s1", _int_list, None, "sizes of S1 (two-set mode)", _in_range(1, 1 << 20)),
                Param("s2", _int_list, None, "sizes of S2 (two-set mode)", _in_range(0, 1 << 20)),
                Param("m", _int, None, "output bits; default k+2 with 2^k <= |S|",
                      _in_range(0, 64))), _isolation),
    Experiment("pairwise", "exact pairwise independence by family enumeration",
               (Param("cases", _str_list, "2:1,3:2", "l:m pairs", _nonempty),), _pairwise,
               randomized=lambda raw: False),
    Experiment("component1", "closed-form single-survivor probability against 1/e",
               (Param("wmax", _int, "1000000", "largest w", _in_range(1, 10**7)),), _component1,
               randomized=lambda raw: False),
    Experiment("second-moment", "Haar second moment of tr(U P_k U^dagger X)",
               (Param("N", _int_list, "2,4,8,8", "dimensions", _check_power_of_two("N")),
                Param("k", _int_list, "1,2,4,1", "projector ranks, paired with N",
                      _in_range(0, 2**qc.MAX_QUBITS)),
                Param("xs", _int, "3", "random traceless X per case", _in_range(1, 100)),
                TRIALS(100000)), _second_moment),
    Experiment("projection-gap", "gap of a random rank-d projection on a fixed 2-dim subspace",
               (Param("l", _int_list, "8", "qubit counts", _in_range(1, qc.MAX_QUBITS)),
                Param("d", _str_list, "N/2", "ranks: integers or N, N/k, N-k", _nonempty),
                TRIALS(10000),
                Param("eps", _float_list, "0.1,0.5", "Markov tail levels", _in_range(1e-9, 1.0)),
                Param("method", str, "frame", "frame | unitary", _choice(*projection.METHODS)),
                Param("subspace", str, "basis", "basis | eigen | random",
                      _choice("basis", "eigen", "random"))),
               _projection_gap),
    Experiment("basis-tvd", "outcome distance under a Haar-random measurement basis",
               (Param("N", _int_list, "2,16,64", "dimensions", _check_power_of_two("N")),
                Param("pair", _str_list, "identical,orthogonal", "state pairs",
                      _choice("identical", "orthogonal")),
                TRIALS(10000),
                Param("floor", float, "0.2", "mean-distance floor", _in_range(0.0, 1.0))),
               _basis_tvd),
    Experiment("lh-classify", "chain Hamiltonian spectra, dual solvers and promise flags",
               (Param("instances", _int, "20", "random chains", _in_range(0, 10**4)),
                Param("nmax", _int, "6", "largest chain length", _in_range(2, 12)),
                Param("dmax", _int, "3", "largest site dimension", _in_range(2, 64)),
                Param("hamiltonian", str, None, "file to classify instead of the random suite"),
                _opt_float("a", "yes threshold (file mode)"),
                _opt_float("b", "no threshold (file mode)"),
                _opt_float("gap_threshold", "spectral-gap threshold")),
               _lh_classify, randomized=_lh_randomized),
    Experiment("eigen-surgery", "padding with a 1/3 eigenvalue, spectrum multiset check",
               (Param("l", _int_list, "1,2,3", "witness qubits", _in_range(1, qc.MAX_QUBITS - 1)),
                Param("instances", _int, "20", "random operators per l", _in_range(1, 10**4))),
               _surgery),
    Experiment("q-consistency", "acceptance operator against direct simulation",
               (Param("circuits", _int, "50", "random circuits", _in_range(1, 10**4)),
                Param("states", _int, "100", "random states per circuit", _in_range(1, 10**5)),
                Param("max_qubits", _int, "10", "largest l+m", _in_range(1, qc.MAX_QUBITS)),
                Param("depth", _int, "40", "gates per circuit", _in_range(0, 10**4))),
               _q_consistency),
]
REGISTRY = {e.name: e for e in EXPERIMENTS}


def list_experiments() -> dict[str, dict]:
    return {
        e.name: {
            "summary": e.summary,
            "params": {p.name: {"default": p.default, "help": p.help} for p in e.params},
        }
        for e in EXPERIMENTS
    }


def execute(config: ExperimentConfig) -> Outcome:
    params = config.validate()
    return REGISTRY[config.experiment].body(params, config.seed)


def run(config: ExperimentConfig, stdout=None) -> int:
    """Run one configured experiment; returns the exit status."""
    stdout = sys.stdout if stdout is None else stdout
    outcome = execute(config)
    if config.out is not None:
        out = Path(config.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{config.experiment}.csv").write_text(render_csv(outcome))
        (out / f"{config.experiment}.json").write_text(render_json(outcome))
    stdout.write(render_json(outcome))
    return 0 if outcome.passed else 1


# -- command line --------------------------------------------------------

def _common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--seed", help="master seed (unsigned 64-bit)")
    sub.add_argument("--out", help="directory for CSV and JSON output")
    sub.add_argument("--config", help="file of key=value lines; flags override it")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vvlab", description=__doc__.splitlines()[0])
    subs = parser.add_subparsers(dest="command", required=True, metavar="command")
    subs.add_parser("list", help="print the experiment catalog as JSON")
    run_p = subs.add_parser("run", help="run the experiment named in a config file")
    _common(run_p)
    for e in EXPERIMENTS:
        sub = subs.add_parser(e.name, help=e.summary)
        _common(sub)
        for p in e.params:
            flag = "--" + p.name.replace("_", "-")
            sub.add_argument(flag, dest=f"param_{p.name}", help=f"{p.help} (default {p.default})")
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    base = ExperimentConfig(args.command if args.command != "run" else "")
    if args.config:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise ConfigError("config", str(exc)) from None
        base = ExperimentConfig.from_text(text)
        if args.command != "run" and base.experiment and base.experiment != args.command:
            raise ConfigError("experiment",
                              f"config names {base.experiment!r} but command is {args.command!r}")
        if args.command != "run":
            base.experiment = args.command
    elif args.command == "run":
        raise ConfigError("config", "run needs --config")
    for key, value in vars(args).items():
        if key.startswith("param_") and value is not None:
            base.params[key[len("param_"):]] = value
    if args.seed is not None:
        base.seed = _parse_seed(args.seed)
    if args.out is not None:
        base.out = args.out
    return base


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and 2
    if args.command == "list":
        print(json.dumps(list_experiments(), indent=2, sort_keys=True))
        return 0
    try:
        return run(config_from_args(args))
    except ConfigError as exc:
        print(f"vvlab: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
