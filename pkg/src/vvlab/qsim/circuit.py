"""Dense state-vector simulation of verification circuits.

Qubit 0 is the most significant bit of a basis-state index.  The witness
register is qubits ``0 .. l-1`` and the ancillas are ``l .. l+m-1``, so the
input ``|y> (x) |0^m>`` has index ``y * 2**m``.  A circuit accepts when
qubit 0 measures 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

MAX_QUBITS = 12

_S2 = 1 / np.sqrt(2)
FIXED_GATES = {
    "h": np.array([[1, 1], [1, -1]], dtype=complex) * _S2,
    "s": np.array([[1, 0], [0, 1j]], dtype=complex),
    "t": np.array([[1, 0], [0, np.exp(1j * np.pi / 4)]], dtype=complex),
    "tdg": np.array([[1, 0], [0, np.exp(-1j * np.pi / 4)]], dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
    "cnot": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex),
    "cz": np.diag([1, 1, 1, -1]).astype(complex),
    "swap": np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex),
}
ALIASES = {"cx": "cnot", "phase": "s", "pi8": "t", "hadamard": "h"}


def _rotation(axis: str, theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    if axis == "x":
        return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)
    if axis == "y":
        return np.array([[c, -s], [s, c]], dtype=complex)
    return np.array([[np.exp(-1j * theta / 2), 0], [0, np.exp(1j * theta / 2)]], dtype=complex)


ROTATIONS = ("rx", "ry", "rz")


@dataclass(frozen=True, eq=False)
class Gate:
    name: str
    qubits: tuple[int, ...]
    matrix: np.ndarray
    params: tuple[float, ...] = ()

    def __post_init__(self):
        k = len(self.qubits)
        if k not in (1, 2) or len(set(self.qubits)) != k:
            raise ValueError(f"gate {self.name!r} needs 1 or 2 distinct qubits")
        mat = np.array(self.matrix, dtype=complex)
        if mat.shape != (2**k, 2**k):
            raise ValueError(f"gate {self.name!r} matrix has shape {mat.shape}")
        if not np.allclose(mat.conj().T @ mat, np.eye(2**k), atol=1e-10):
            raise ValueError(f"gate {self.name!r} is not unitary")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)


def gate(name: str, *qubits: int, params: Sequence[float] = (), matrix=None) -> Gate:
    """Build a gate by name; ``"u"`` takes an explicit 2x2 or 4x4 unitary."""
    key = ALIASES.get(name.lower(), name.lower())
    qubits = tuple(int(q) for q in qubits)
    if key == "u":
        if matrix is None:
            raise ValueError("gate 'u' needs a matrix")
        return Gate("u", qubits, matrix)
    if key in ROTATIONS:
        if len(params) != 1:
            raise ValueError(f"{key} takes one angle")
        return Gate(key, qubits, _rotation(key[1], float(params[0])), (float(params[0]),))
    if key not in FIXED_GATES:
        raise ValueError(f"unknown gate {name!r}")
    return Gate(key, qubits, FIXED_GATES[key])


@dataclass(frozen=True)
class Circuit:
    l: int
    m: int
    gates: tuple[Gate, ...] = ()

    def __post_init__(self):
        if self.l < 1 or self.m < 0:
            raise ValueError("need l >= 1 and m >= 0")
        if self.n > MAX_QUBITS:
            raise ValueError(f"{self.n} qubits exceeds the cap of {MAX_QUBITS}")
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            if max(g.qubits) >= self.n or min(g.qubits) < 0:
                raise ValueError(f"gate {g.name} targets {g.qubits} outside {self.n} qubits")

    @property
    def n(self) -> int:
        return self.l + self.m

    def then(self, *more: Gate) -> "Circuit":
        return Circuit(self.l, self.m, self.gates + tuple(more))


def _apply(state: np.ndarray, g: Gate, n: int) -> np.ndarray:
    k = len(g.qubits)
    op = g.matrix.reshape((2,) * (2 * k))
    out = np.tensordot(op, state, axes=(list(range(k, 2 * k)), list(g.qubits)))
    return np.moveaxis(out, list(range(k)), list(g.qubits))


def run_batch(circuit: Circuit, states: np.ndarray) -> np.ndarray:
    """Apply the circuit to columns of ``states`` (shape ``(2**n, batch)``)."""
    n = circuit.n
    t = np.asarray(states, dtype=complex).reshape((2,) * n + (-1,))
    for g in circuit.gates:
        t = _apply(t, g, n)
    return t.reshape(2**n, -1)


def _embed_witness_batch(circuit: Circuit, psis: np.ndarray) -> np.ndarray:
    """``psi (x) |0^m>`` for each column ``psi``."""
    full = np.zeros((2**circuit.l, 2**circuit.m, psis.shape[1]), dtype=complex)
    full[:, 0, :] = psis
    return full.reshape(2**circuit.n, -1)


def accepting_block(circuit: Circuit, psis: np.ndarray) -> np.ndarray:
    """Rows of ``U (psi (x) |0^m>)`` whose first qubit is 1."""
    out = run_batch(circuit, _embed_witness_batch(circuit, psis))
    return out[2 ** (circuit.n - 1):]


def simulate(circuit: Circuit, input_state) -> float:
    """Acceptance probability ``|| Pi_1 U (psi (x) |0^m>) ||^2``."""
    psi = np.asarray(input_state, dtype=complex).reshape(-1)
    if psi.size != 2**circuit.l:
        raise ValueError(f"input has dimension {psi.size}, expected {2**circuit.l}")
    if abs(np.linalg.norm(psi) - 1.0) > 1e-8:
        raise ValueError("input state is not normalised")
    block = accepting_block(circuit, psi[:, None])
    return float(np.clip(np.vdot(block, block).real, 0.0, 1.0))


def basis_state(l: int, y: int) -> np.ndarray:
    v = np.zeros(2**l, dtype=complex)
    v[y] = 1.0
    return v


# -- circuit library -------------------------------------------------------

def toffoli_gates(c1: int, c2: int, target: int) -> list[Gate]:
    """Toffoli from H, T, T^dagger and CNOT (the standard 7-T network)."""
    return [
        gate("h", target),
        gate("cnot", c2, target), gate("tdg", target),
        gate("cnot", c1, target), gate("t", target),
        gate("cnot", c2, target), gate("tdg", target),
        gate("cnot", c1, target), gate("t", c2), gate("t", target),
        gate("h", target),
        gate("cnot", c1, c2), gate("t", c1), gate("tdg", c2),
        gate("cnot", c1, c2),
    ]


def point_acceptor(l: int, y0: int) -> Circuit:
    """Circuit accepting basis witness ``|y0>`` with probability 1 and all others with 0.

    Flips witness bits so ``y0`` becomes all-ones, ANDs them into ancillas with
    Toffolis, then swaps the result onto qubit 0.
    """
    if not 0 <= y0 < 2**l:
        raise ValueError("y0 out of range")
    flips = [gate("x", q) for q in range(l) if not (y0 >> (l - 1 - q)) & 1]
    if l == 1:
        return Circuit(1, 0, flips)
    m = l - 1
    gates = list(flips)
    gates += toffoli_gates(0, 1, l)
    for j in range(2, l):
        gates += toffoli_gates(j, l + j - 2, l + j - 1)
    result = l + m - 1
    gates += [gate("cnot", 0, result), gate("cnot", result, 0), gate("cnot", 0, result)]
    return Circuit(l, m, gates)


def rejector(l: int, accept_prob: float = 0.0) -> Circuit:
    """Accepts every basis witness with the same probability (an ancilla rotation)."""
    theta = 2 * np.arcsin(np.sqrt(accept_prob))
    return Circuit(l, 1, [gate("ry", l, params=[theta]), gate("swap", 0, l)])


def random_circuit(l: int, m: int, depth: int, rng: np.random.Generator) -> Circuit:
    from .haar import haar_unitary

    n = l + m
    gates = []
    for _ in range(depth):
        kind = rng.integers(0, 6)
        if n == 1 or kind < 3:
            q = int(rng.integers(0, n))
            if kind == 0:
                gates.append(gate(("h", "s", "t", "x")[rng.integers(0, 4)], q))
            elif kind == 1:
                gates.append(gate(ROTATIONS[rng.integers(0, 3)], q, params=[rng.uniform(0, 2 * np.pi)]))
            else:
                gates.append(gate("u", q, matrix=haar_unitary(2, rng)))
        else:
            q1, q2 = (int(v) for v in rng.choice(n, size=2, replace=False))
            if kind == 3:
                gates.append(gate("cnot", q1, q2))
            else:
                gates.append(gate("u", q1, q2, matrix=haar_unitary(4, rng)))
    return Circuit(l, m, gates)


# -- file format ---------------------------------------------------------

def dumps(circuit: Circuit) -> str:
    lines = [f"l={circuit.l} m={circuit.m}"]
    for g in circuit.gates:
        parts = [g.name, *map(str, g.qubits)]
        if g.name in ROTATIONS:
            parts.append(repr(float(g.params[0])))
        elif g.name == "u":
            parts += [f"{float(z.real)!r} {float(z.imag)!r}" for z in g.matrix.reshape(-1)]
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


def loads(text: str) -> Circuit:
    rows = [ln.split("#", 1)[0].split() for ln in text.splitlines()]
    rows = [r for r in rows if r]
    if not rows:
        raise ValueError("empty circuit description")
    header = dict(tok.split("=", 1) for tok in rows[0])
    l, m = int(header["l"]), int(header.get("m", 0))
    gates = []
    for r in rows[1:]:
        name = r[0].lower()
        key = ALIASES.get(name, name)
        if key == "u":
            # a k-qubit unitary line carries k indices and 2 * 4^k floats
            nq = {9: 1, 34: 2}.get(len(r) - 1)
            if nq is None:
                raise ValueError(f"malformed u gate line: {' '.join(r)!r}")
            vals = np.array([float(v) for v in r[1 + nq:]])
            mat = (vals[0::2] + 1j * vals[1::2]).reshape(2**nq, 2**nq)
            gates.append(gate("u", *map(int, r[1:1 + nq]), matrix=mat))
        elif key in ROTATIONS:
            gates.append(gate(key, int(r[1]), params=[float(r[2])]))
        else:
            gates.append(gate(key, *map(int, r[1:])))
    return Circuit(l, m, gates)


def concat(l: int, m: int, parts: Iterable[Sequence[Gate]]) -> Circuit:
    return Circuit(l, m, [g for p in parts for g in p])
