"""The acceptance operator ``Q`` and promise classification of its spectrum."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from ..verifier import PromiseInstance, WitnessTable
from .circuit import MAX_QUBITS, Circuit, accepting_block

HERMITIAN_TOL = 1e-10
SPECTRUM_TOL = 1e-9
ONE_THIRD = 1 / 3
TWO_THIRDS = 2 / 3


@dataclass(frozen=True, eq=False)
class QOperator:
    matrix: np.ndarray

    def __post_init__(self):
        q = np.array(self.matrix, dtype=complex)
        if q.ndim != 2 or q.shape[0] != q.shape[1]:
            raise ValueError("Q must be square")
        dim = q.shape[0]
        if dim < 2 or dim & (dim - 1):
            raise ValueError(f"dimension {dim} is not 2^l with l >= 1")
        if np.abs(q - q.conj().T).max() > HERMITIAN_TOL:
            raise ValueError("Q is not Hermitian")
        q = (q + q.conj().T) / 2
        ev = np.linalg.eigvalsh(q)
        if ev[0] < -SPECTRUM_TOL or ev[-1] > 1 + SPECTRUM_TOL:
            raise ValueError(f"spectrum [{ev[0]}, {ev[-1]}] leaves [0, 1]")
        q.setflags(write=False)
        object.__setattr__(self, "matrix", q)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def l(self) -> int:
        return self.dim.bit_length() - 1

    def eigenvalues(self) -> np.ndarray:
        """Spectrum in descending order, ``lambda_1 >= lambda_2 >= ...``."""
        return np.linalg.eigvalsh(self.matrix)[::-1]

    def expectation(self, psi) -> float:
        psi = np.asarray(psi, dtype=complex)
        return float(np.vdot(psi, self.matrix @ psi).real)

    @classmethod
    def from_spectrum(cls, eigenvalues, rng: np.random.Generator | None = None) -> "QOperator":
        """``V diag(eigenvalues) V^dagger`` with ``V`` Haar random (identity if no rng)."""
        ev = np.asarray(eigenvalues, dtype=float)
        if rng is None:
            return cls(np.diag(ev).astype(complex))
        from .haar import haar_unitary

        v = haar_unitary(ev.size, rng)
        return cls((v * ev) @ v.conj().T)


def build_q_operator(circuit: Circuit) -> QOperator:
    """``Q = M^dagger M`` where ``M`` is the accepting half of ``U (I (x) |0^m>)``."""
    block = accepting_block(circuit, np.eye(2**circuit.l, dtype=complex))
    q = block.conj().T @ block
    return QOperator((q + q.conj().T) / 2)


def basis_witness_table(circuit: Circuit, p1: float, p2: float) -> PromiseInstance:
    """Acceptance probability of every basis witness, as a promise instance."""
    block = accepting_block(circuit, np.eye(2**circuit.l, dtype=complex))
    probs = np.clip(np.einsum("ij,ij->j", block.conj(), block).real, 0.0, 1.0)
    return PromiseInstance(WitnessTable(circuit.l, probs), p1, p2)


class QLabel(str, Enum):
    QMA_YES = "QmaYes"
    QMA_NO = "QmaNo"
    UQMA_YES = "UqmaYes"
    UQMA_NO = "UqmaNo"
    PGQMA_YES = "PgqmaYes"
    PGQMA_NO = "PgqmaNo"
    NONE = "NoneOfPromise"


def classify_spectrum(eigenvalues, a: float = ONE_THIRD, b: float = TWO_THIRDS,
                      delta: float | None = None) -> frozenset[QLabel]:
    """Every promise label consistent with a spectrum.

    QMA looks at ``lambda_1`` alone; the unique promise adds ``lambda_2 <= a``
    on yes-inputs; the gapped promise adds ``lambda_1 - lambda_2 >= delta``
    on both sides.  No-inputs of the unique promise are QMA no-inputs.
    """
    ev = np.sort(np.asarray(eigenvalues, dtype=float))[::-1]
    l1 = ev[0]
    l2 = ev[1] if ev.size > 1 else -np.inf
    labels = set()
    if l1 >= b:
        labels.add(QLabel.QMA_YES)
        if l2 <= a:
            labels.add(QLabel.UQMA_YES)
    elif l1 <= a:
        labels |= {QLabel.QMA_NO, QLabel.UQMA_NO}
    if delta is not None and l1 - l2 >= delta:
        if l1 >= b:
            labels.add(QLabel.PGQMA_YES)
        elif l1 <= a:
            labels.add(QLabel.PGQMA_NO)
    return frozenset(labels) if labels else frozenset({QLabel.NONE})


def classify_q(q: QOperator, a: float = ONE_THIRD, b: float = TWO_THIRDS,
               delta: float | None = None) -> frozenset[QLabel]:
    return classify_spectrum(q.eigenvalues(), a, b, delta)


def add_third_eigenvalue(q: QOperator) -> QOperator:
    """Pad with one extra witness qubit: ``Q (+) diag(0, ..., 0, 1/3)``.

    The new qubit is the most significant one.  On its ``|0>`` half the
    original verifier runs; on its ``|1>`` half the witness is accepted with
    probability 1/3 only when every other qubit is 1.
    """
    if q.l + 1 > MAX_QUBITS:
        raise ValueError(f"padding to {q.l + 1} witness qubits exceeds the cap of {MAX_QUBITS}")
    n = q.dim
    out = np.zeros((2 * n, 2 * n), dtype=complex)
    out[:n, :n] = q.matrix
    out[-1, -1] = ONE_THIRD
    return QOperator(out)


def uqma_to_pgqma(q: QOperator, delta: float) -> tuple[QOperator, tuple[float, float, float]]:
    """Map a unique-promise instance to a gapped one with thresholds ``(1/3, 2/3, delta)``.

    Accepts only inputs already amplified to ``lambda_1 <= 1/3 - delta`` (no)
    or ``lambda_1 >= 2/3`` with ``lambda_2 <= 1/3 - delta`` (yes).
    """
    if not 0 < delta < ONE_THIRD:
        raise ValueError("delta must lie in (0, 1/3)")
    ev = q.eigenvalues()
    l1 = ev[0]
    l2 = ev[1] if ev.size > 1 else 0.0
    low = ONE_THIRD - delta + SPECTRUM_TOL
    if not (l1 <= low or (l1 >= TWO_THIRDS - SPECTRUM_TOL and l2 <= low)):
        raise ValueError(
            f"precondition violated: spectrum starts ({l1:.6g}, {l2:.6g}); need "
            f"lambda_1 <= 1/3 - delta, or lambda_1 >= 2/3 with lambda_2 <= 1/3 - delta")
    return add_third_eigenvalue(q), (ONE_THIRD, TWO_THIRDS, delta)


@dataclass(frozen=True)
class SweepResult:
    chosen_j: int
    interval: tuple[float, float]
    labels: frozenset[QLabel]
    successes: tuple[int, ...]  # every j whose interval gives UqmaYes
    admissible: tuple[int, int]  # inclusive j range


def sweep_interval(j: int, delta: float) -> tuple[float, float]:
    return (TWO_THIRDS + j * delta / 2, TWO_THIRDS + (j + 1) * delta / 2)


def admissible_j(delta: float) -> tuple[int, int]:
    """Indices whose interval stays inside ``[1/3, 1]``."""
    half = delta / 2
    span = int(np.floor(ONE_THIRD / half + 1e-9))
    return -span, span - 1


def pgqma_threshold_sweep(q: QOperator, delta: float,
                          rng: np.random.Generator) -> SweepResult:
    """Random-threshold direction of the gapped-to-unique reduction.

    Tries every ``j`` with interval ``(2/3 + j delta/2, 2/3 + (j+1) delta/2)``
    and reports the ones that give a unique yes-instance; ``chosen_j`` is
    drawn uniformly from the admissible range.
    """
    if not 0 < delta <= 2 * ONE_THIRD:
        raise ValueError("delta must lie in (0, 2/3]")
    ev = q.eigenvalues()
    lo_j, hi_j = admissible_j(delta)
    successes = []
    for j in range(lo_j, hi_j + 1):
        lo, hi = sweep_interval(j, delta)
        if QLabel.UQMA_YES in classify_spectrum(ev, lo, hi):
            successes.append(j)
    chosen = int(rng.integers(lo_j, hi_j + 1))
    lo, hi = sweep_interval(chosen, delta)
    return SweepResult(chosen, (lo, hi), classify_spectrum(ev, lo, hi), tuple(successes),
                       (lo_j, hi_j))


def max_orthogonal_acceptance(q: QOperator, psi) -> float:
    """Largest acceptance probability over states orthogonal to ``psi``."""
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    proj = np.eye(q.dim) - np.outer(psi, psi.conj())
    restricted = proj @ q.matrix @ proj
    return float(np.linalg.eigvalsh((restricted + restricted.conj().T) / 2)[-1])


def uqma_state_condition(q: QOperator, psi, a: float = ONE_THIRD, b: float = TWO_THIRDS) -> bool:
    """``psi`` is accepted with probability >= b and every state orthogonal to it with <= a."""
    return q.expectation(psi) >= b and max_orthogonal_acceptance(q, psi) <= a


def uqma_condition_exists(q: QOperator, a: float = ONE_THIRD, b: float = TWO_THIRDS) -> bool:
    """Whether some witness state meets :func:`uqma_state_condition`.

    Trying the top eigenvector suffices: if any ``psi`` works, min-max gives
    ``lambda_2 <= a`` on its complement, and then the top eigenvector works too.
    """
    _, vecs = np.linalg.eigh(q.matrix)
    return uqma_state_condition(q, vecs[:, -1], a, b)
