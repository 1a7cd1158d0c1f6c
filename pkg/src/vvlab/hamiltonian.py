"""Nearest-neighbour Hamiltonians on open chains of ``d``-level sites.

Sites are numbered ``1 .. n``.  A term on site ``i`` acts on sites ``i`` and
``i + 1``; site 1 is the most significant factor of the tensor product.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np
import scipy.linalg

MAX_DIM = 4096
HERMITIAN_TOL = 1e-10

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


@dataclass(frozen=True)
class Term:
    site: int
    matrix: np.ndarray

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.matrix, 2))


@dataclass(frozen=True)
class ChainHamiltonian:
    n: int
    d: int
    terms: tuple[Term, ...] = ()

    def __post_init__(self):
        if self.n < 2 or self.d < 2:
            raise ValueError("need n >= 2 sites of dimension d >= 2")
        if self.d**self.n > MAX_DIM:
            raise ValueError(f"d^n = {self.d ** self.n} exceeds the cap of {MAX_DIM}")
        terms = []
        for t in self.terms:
            site, mat = (t.site, t.matrix) if isinstance(t, Term) else t
            mat = np.array(mat, dtype=complex)
            if not 1 <= site <= self.n - 1:
                raise ValueError(f"term site {site} outside [1, {self.n - 1}]")
            if mat.shape != (self.d**2, self.d**2):
                raise ValueError(f"term on site {site} has shape {mat.shape}")
            if not np.all(np.isfinite(mat)):
                raise ValueError(f"term on site {site} has non-finite entries")
            if np.abs(mat - mat.conj().T).max() > HERMITIAN_TOL:
                raise ValueError(f"term on site {site} is not Hermitian")
            mat.setflags(write=False)
            terms.append(Term(int(site), mat))
        object.__setattr__(self, "terms", tuple(terms))

    @property
    def dim(self) -> int:
        return self.d**self.n

    def term_norms(self) -> tuple[float, ...]:
        return tuple(t.norm for t in self.terms)

    def add(self, site: int, matrix) -> "ChainHamiltonian":
        return ChainHamiltonian(self.n, self.d, self.terms + (Term(site, matrix),))


def heisenberg_term() -> np.ndarray:
    return sum(np.kron(p, p) for p in (PAULI_X, PAULI_Y, PAULI_Z))


def uniform_chain(n: int, d: int, term) -> ChainHamiltonian:
    return ChainHamiltonian(n, d, tuple(Term(i, term) for i in range(1, n)))


def random_chain(n: int, d: int, rng: np.random.Generator) -> ChainHamiltonian:
    terms = []
    for i in range(1, n):
        g = rng.standard_normal((d * d, d * d)) + 1j * rng.standard_normal((d * d, d * d))
        terms.append(Term(i, (g + g.conj().T) / 2))
    return ChainHamiltonian(n, d, tuple(terms))


def embed(term: Term, n: int, d: int) -> np.ndarray:
    """``I_(d^(i-1)) (x) h (x) I_(d^(n-i-1))``."""
    left = np.eye(d ** (term.site - 1))
    right = np.eye(d ** (n - term.site - 1))
    return np.kron(np.kron(left, term.matrix), right)


def assemble_dense(h: ChainHamiltonian) -> np.ndarray:
    out = np.zeros((h.dim, h.dim), dtype=complex)
    for t in h.terms:
        out += embed(t, h.n, h.d)
    return (out + out.conj().T) / 2


SOLVERS = ("eigh", "real-embedding")


def low_spectrum(h: ChainHamiltonian, count: int = 2, method: str = "eigh") -> np.ndarray:
    """Smallest ``count`` eigenvalues, ascending.

    ``"real-embedding"`` diagonalises the real symmetric matrix
    ``[[Re H, -Im H], [Im H, Re H]]`` with LAPACK's MRRR driver; each
    eigenvalue of ``H`` appears there twice.
    """
    if not 1 <= count <= h.dim:
        raise ValueError(f"count must lie in [1, {h.dim}]")
    mat = assemble_dense(h)
    if method == "eigh":
        return np.linalg.eigvalsh(mat)[:count]
    if method == "real-embedding":
        re, im = mat.real, mat.imag
        big = np.block([[re, -im], [im, re]])
        ev = scipy.linalg.eigh(big, eigvals_only=True, driver="evr",
                               subset_by_index=[0, 2 * count - 1])
        return ev[::2]
    raise ValueError(f"method must be one of {SOLVERS}")


class LhFlag(str, Enum):
    LH_YES = "LhYes"
    LH_NO = "LhNo"
    UNIQUE_LH_YES = "UniqueLhYes"
    POLY_GAP_OK = "PolyGapPromiseOk"
    PROMISE_VIOLATED = "PromiseViolated"


@dataclass(frozen=True)
class GapReport:
    lambda0: float
    lambda1: float
    flags: frozenset[LhFlag]

    @property
    def gap(self) -> float:
        return self.lambda1 - self.lambda0


def classify_lh(h: ChainHamiltonian, a: float, b: float,
                gap_threshold: float | None = None) -> GapReport:
    if not a < b:
        raise ValueError(f"need a < b, got a={a}, b={b}")
    l0, l1 = (float(v) for v in low_spectrum(h, 2))
    flags = set()
    if l0 <= a:
        flags.add(LhFlag.LH_YES)
        if l1 > b:
            flags.add(LhFlag.UNIQUE_LH_YES)
    elif l0 > b:
        flags.add(LhFlag.LH_NO)
    else:
        flags.add(LhFlag.PROMISE_VIOLATED)
    if gap_threshold is not None and l1 - l0 >= gap_threshold:
        flags.add(LhFlag.POLY_GAP_OK)
    return GapReport(l0, l1, frozenset(flags))


def uqma_yes_gap_witness(h: ChainHamiltonian, a: float, b: float) -> bool:
    """On a unique yes-instance, whether the spectral gap is at least ``b - a``."""
    report = classify_lh(h, a, b)
    if LhFlag.UNIQUE_LH_YES not in report.flags:
        raise ValueError("instance is not a unique yes-instance")
    return report.gap >= b - a


# -- file format ---------------------------------------------------------

def dumps(h: ChainHamiltonian) -> str:
    lines = [f"n={h.n} d={h.d}"]
    for t in h.terms:
        lines.append(f"site={t.site}")
        for row in t.matrix:
            lines.append(" ".join(f"{float(z.real)!r},{float(z.imag)!r}" for z in row))
    return "\n".join(lines) + "\n"


def loads(text: str) -> ChainHamiltonian:
    rows = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows:
        raise ValueError("empty Hamiltonian description")
    header = dict(tok.split("=", 1) for tok in rows[0].split())
    n, d = int(header["n"]), int(header["d"])
    terms: list[Term] = []
    site: int | None = None
    entries: list[complex] = []

    def flush():
        if site is not None:
            if len(entries) != d**4:
                raise ValueError(f"term on site {site} has {len(entries)} entries, expected {d ** 4}")
            terms.append(Term(site, np.array(entries).reshape(d * d, d * d)))

    for row in rows[1:]:
        if row.startswith("site="):
            flush()
            site, entries = int(row.split("=", 1)[1]), []
        else:
            for pair in row.split():
                re, im = pair.split(",")
                entries.append(complex(float(re), float(im)))
    flush()
    return ChainHamiltonian(n, d, tuple(terms))


def from_terms(n: int, d: int, terms: Sequence[tuple[int, np.ndarray]]) -> ChainHamiltonian:
    return ChainHamiltonian(n, d, tuple(Term(i, m) for i, m in terms))
