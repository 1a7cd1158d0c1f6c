"""Haar-random unitaries and isometries, and the second moment of ``tr(U P_k U^dagger X)``."""

from __future__ import annotations

import numpy as np

from ..stats import BLOCK_SIZE, MeanEstimate, trial_blocks

TRACE_TOL = 1e-10


def _ginibre(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def _phase_fixed_qr(z: np.ndarray) -> np.ndarray:
    """Q factor with the phases of diag(R) moved into Q, so the law is Haar."""
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    phase = np.where(np.abs(d) > 0, d / np.abs(d), 1.0)
    return q * phase[..., None, :]


def haar_isometry(n: int, k: int, rng: np.random.Generator, batch: int | None = None) -> np.ndarray:
    """First ``k`` columns of a Haar unitary on ``C^n``; optionally a leading batch axis."""
    if n < 1 or not 0 <= k <= n:
        raise ValueError(f"need n >= 1 and 0 <= k <= n, got n={n}, k={k}")
    shape = (n, k) if batch is None else (batch, n, k)
    if k == 0:
        return np.zeros(shape, dtype=complex)
    return _phase_fixed_qr(_ginibre(rng, shape))


def haar_unitary(n: int, rng: np.random.Generator, batch: int | None = None) -> np.ndarray:
    return haar_isometry(n, n, rng, batch)


def random_traceless_hermitian(n: int, rng: np.random.Generator) -> np.ndarray:
    g = _ginibre(rng, (n, n))
    x = (g + g.conj().T) / 2
    return x - np.trace(x).real / n * np.eye(n)


def _check_traceless(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise ValueError("X must be square")
    if np.abs(x - x.conj().T).max() > TRACE_TOL:
        raise ValueError("X must be Hermitian")
    if abs(np.trace(x)) > TRACE_TOL:
        raise ValueError(f"X must be traceless, tr X = {np.trace(x):.3g}")
    return x


def _ranks_ok(n: int, k: int) -> None:
    if not 0 <= k <= n:
        raise ValueError("need 0 <= k <= n")


def second_moment_formula(n: int, k: int, x) -> float:
    """``tr(X^2) (k(k+1)/(n(n+1)) - k(k-1)/(n(n-1)))`` for traceless Hermitian ``X``.

    The two ratios are the weights of ``P_k (x) P_k`` on the symmetric and
    antisymmetric subspaces taken without the factor 1/2 of the projectors
    ``(I +- F)/2``, so the value is exactly twice the Haar average
    (:func:`exact_second_moment`).
    """
    x = _check_traceless(x)
    _ranks_ok(n, k)
    if k in (0, n):
        return 0.0
    sym = k * (k + 1) / (n * (n + 1))
    anti = k * (k - 1) / (n * (n - 1))
    return float(np.vdot(x, x).real) * (sym - anti)


def exact_second_moment(n: int, k: int, x) -> float:
    """Haar average of ``|tr(U P_k U^dagger X)|^2`` for traceless Hermitian ``X``.

    Averaging ``P_k (x) P_k`` over the unitary group leaves ``alpha I + beta F``
    (``F`` the swap); tracelessness kills ``alpha`` and
    ``beta = k(n-k)/(n(n^2-1))``.
    """
    x = _check_traceless(x)
    _ranks_ok(n, k)
    if k in (0, n):
        return 0.0
    return float(np.vdot(x, x).real) * k * (n - k) / (n * (n * n - 1))


def mc_second_moment(n: int, k: int, x, trials: int, seed: int) -> MeanEstimate:
    """Monte-Carlo estimate of ``E |tr(U P_k U^dagger X)|^2``.

    Only the span of ``U``'s first ``k`` columns matters, so each trial draws a
    Haar ``n x k`` isometry ``W`` and uses ``tr(W^dagger X W)``.
    """
    x = _check_traceless(x)
    if k in (0, n):
        # U P_n U^dagger = I and P_0 = 0: the trace vanishes identically
        value = abs(np.trace(x)) ** 2 if k == n else 0.0
        return MeanEstimate.from_samples(np.full(trials, value))
    samples = np.empty(trials)
    for start, count, rng in trial_blocks(seed, trials):
        w = haar_isometry(n, k, rng, batch=BLOCK_SIZE)[:count]
        tr = np.einsum("bik,ij,bjk->b", w.conj(), x, w)
        samples[start:start + count] = np.abs(tr) ** 2
    return MeanEstimate.from_samples(samples)
