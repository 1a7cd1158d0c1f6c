"""Random-projection gap and random-basis distinguishability experiments."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..stats import BLOCK_SIZE, MeanEstimate, trial_blocks
from .haar import haar_isometry, haar_unitary

ORTHONORMAL_TOL = 1e-10
GERSGORIN_TOL = 1e-10
METHODS = ("frame", "unitary")


def gap_bound(l: int) -> float:
    """Mean-gap ceiling ``2^(-l/2 + 2)``."""
    return 2.0 ** (-l / 2 + 2)


@dataclass(frozen=True)
class ProjectionExperimentResult:
    l: int
    d: int
    gaps: np.ndarray
    gersgorin: np.ndarray  # per-trial |V11 - V22| + 2 |V12|
    method: str = "frame"
    summary: MeanEstimate = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "summary", MeanEstimate.from_samples(self.gaps))

    @property
    def N(self) -> int:
        return 2**self.l

    @property
    def trials(self) -> int:
        return self.gaps.size

    @property
    def mean_gap(self) -> float:
        return self.summary.mean

    @property
    def bound(self) -> float:
        return gap_bound(self.l)

    def tail_fraction(self, threshold: float) -> float:
        return float(np.mean(self.gaps > threshold))

    def mean_within_bound(self, z: float = 3.0) -> bool:
        return self.summary.at_most(self.bound, z)

    def markov_tail_ok(self, eps: float) -> bool:
        """Fraction of gaps above ``bound / eps`` is at most ``eps``."""
        return self.tail_fraction(self.bound / eps) <= eps

    def gersgorin_ok(self) -> bool:
        return bool(np.all(self.gaps <= self.gersgorin + GERSGORIN_TOL))


def default_subspace(l: int) -> np.ndarray:
    """``|0>`` and ``|1>`` as the columns of an ``N x 2`` matrix."""
    v = np.zeros((2**l, 2), dtype=complex)
    v[0, 0] = v[1, 1] = 1.0
    return v


def _check_subspace(v, n: int) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    if v.shape != (n, 2):
        raise ValueError(f"subspace must be an ({n}, 2) matrix, got {v.shape}")
    if np.abs(v.conj().T @ v - np.eye(2)).max() > ORTHONORMAL_TOL:
        raise ValueError("subspace columns are not orthonormal")
    return v


def _two_by_two_gap(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalue spread of each Hermitian 2x2 block, and its Gersgorin ceiling."""
    ev = np.linalg.eigvalsh(m)
    gaps = np.clip(ev[..., 1] - ev[..., 0], 0.0, 1.0)
    gers = np.abs(m[..., 0, 0] - m[..., 1, 1]).real + 2 * np.abs(m[..., 0, 1])
    return gaps, gers


def projection_gap_experiment(l: int, d: int, trials: int, seed: int, subspace=None,
                              method: str = "frame") -> ProjectionExperimentResult:
    """Per trial, the spread of ``V^dagger U P_d U^dagger V`` for Haar ``U``.

    ``method="unitary"`` samples a full ``N x N`` unitary.  The default
    ``"frame"`` samples only ``F = U^dagger V``, which is a Haar-random
    orthonormal pair whatever ``V`` is; the block is then ``F^dagger P_d F``,
    the Gram matrix of the first ``d`` rows of ``F``.
    """
    n = 2**l
    if not 1 <= d <= n:
        raise ValueError(f"d={d} outside [1, {n}]")
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}")
    v = _check_subspace(default_subspace(l) if subspace is None else subspace, n)
    gaps = np.empty(trials)
    gers = np.empty(trials)
    for start, count, rng in trial_blocks(seed, trials):
        if d == n:
            # P_N is the identity, so the block is V's Gram matrix
            block = np.broadcast_to(v.conj().T @ v, (count, 2, 2))
        elif method == "frame":
            f = haar_isometry(n, 2, rng, batch=BLOCK_SIZE)[:count, :d, :]
            block = f.conj().transpose(0, 2, 1) @ f
        else:
            rows = np.empty((count, d, 2), dtype=complex)
            for t in range(count):
                u = haar_unitary(n, rng)
                rows[t] = u[:, :d].conj().T @ v
            block = rows.conj().transpose(0, 2, 1) @ rows
        g, b = _two_by_two_gap(block)
        gaps[start:start + count] = g
        gers[start:start + count] = b
    return ProjectionExperimentResult(l, d, gaps, gers, method)


@dataclass(frozen=True)
class TVDSummary:
    values: np.ndarray
    floor: float

    @property
    def mean(self) -> float:
        return float(self.values.mean())

    @property
    def min(self) -> float:
        return float(self.values.min())

    @property
    def stderr(self) -> float:
        return MeanEstimate.from_samples(self.values).stderr

    @property
    def fraction_below(self) -> float:
        return float(np.mean(self.values < self.floor))


TVD_FLOOR = 0.2
MAX_BATCHED_DIM = 64


def total_variation(p, q) -> np.ndarray:
    return 0.5 * np.abs(np.asarray(p) - np.asarray(q)).sum(axis=-1)


def random_basis_tvd(psi1, psi2, trials: int, seed: int, floor: float = TVD_FLOOR) -> TVDSummary:
    """Distance between outcome distributions of measuring both states in a Haar basis."""
    a = np.asarray(psi1, dtype=complex).reshape(-1)
    b = np.asarray(psi2, dtype=complex).reshape(-1)
    if a.size != b.size:
        raise ValueError(f"dimension mismatch: {a.size} vs {b.size}")
    for s in (a, b):
        if abs(np.linalg.norm(s) - 1.0) > 1e-8:
            raise ValueError("states must be normalised")
    n = a.size
    values = np.empty(trials)
    for start, count, rng in trial_blocks(seed, trials):
        if n <= MAX_BATCHED_DIM:
            basis = haar_unitary(n, rng, batch=BLOCK_SIZE)[:count]
        else:
            basis = np.stack([haar_unitary(n, rng) for _ in range(count)])
        # outcome j has probability |<e_j|psi>|^2 with e_j the j-th basis column
        pa = np.abs(np.einsum("bij,i->bj", basis.conj(), a)) ** 2
        pb = np.abs(np.einsum("bij,i->bj", basis.conj(), b)) ** 2
        values[start:start + count] = total_variation(pa, pb)
    return TVDSummary(values, floor)
