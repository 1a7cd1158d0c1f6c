"""Independent reference computations shared by the test modules."""

import numpy as np


def dense_unitary(circuit):
    """Full 2^n x 2^n unitary, built gate by gate from basis-index arithmetic."""
    n = circuit.n
    dim = 2**n
    u = np.eye(dim, dtype=complex)
    for g in circuit.gates:
        k = len(g.qubits)
        step = np.zeros((dim, dim), dtype=complex)
        for col in range(dim):
            bits = [(col >> (n - 1 - q)) & 1 for q in g.qubits]
            local_in = int("".join(map(str, bits)), 2)
            for local_out in range(2**k):
                amp = g.matrix[local_out, local_in]
                if amp == 0:
                    continue
                row = col
                for pos, q in enumerate(g.qubits):
                    bit = (local_out >> (k - 1 - pos)) & 1
                    row = (row & ~(1 << (n - 1 - q))) | (bit << (n - 1 - q))
                step[row, col] += amp
        u = step @ u
    return u


def dense_q(circuit):
    """(I (x) <0^m|) U^dagger Pi_1 U (I (x) |0^m>) by explicit matrices."""
    l, m, n = circuit.l, circuit.m, circuit.n
    u = dense_unitary(circuit)
    embed = np.kron(np.eye(2**l), np.eye(2**m)[:, :1])
    pi1 = np.kron(np.diag([0.0, 1.0]), np.eye(2 ** (n - 1)))
    return embed.T @ u.conj().T @ pi1 @ u @ embed


def dense_acceptance(circuit, psi):
    q = dense_q(circuit)
    return float(np.vdot(psi, q @ psi).real)


def random_state(dim, rng):
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def commutant_second_moment(n, k, x):
    """Haar average of |tr(U P U^dagger X)|^2 from the invariant-subspace ansatz.

    The average of (U P U^dagger)^(x2) commutes with every V (x) V, so it is
    a I + b F (F the swap).  Matching tr(.) and tr(. F) against P (x) P
    fixes a and b; the moment is then a tr(X)^2 + b tr(X^2).
    """
    p = np.diag([1.0] * k + [0.0] * (n - k))
    swap = np.zeros((n * n, n * n))
    for i in range(n):
        for j in range(n):
            swap[i * n + j, j * n + i] = 1.0
    pp = np.kron(p, p)
    eye = np.eye(n * n)
    lhs = np.array([[np.trace(eye), np.trace(swap)], [np.trace(swap), np.trace(swap @ swap)]])
    rhs = np.array([np.trace(pp), np.trace(pp @ swap)])
    a, b = np.linalg.solve(lhs, rhs)
    xx = np.kron(x, x)
    return float((a * np.trace(xx) + b * np.trace(xx @ swap)).real)
