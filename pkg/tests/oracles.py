"""Brute-force reference implementations used only by the test suite.

Everything here is built from dense matrices and explicit formulas, on
purpose sharing as little as possible with the package internals.
"""

from __future__ import annotations

import math

import numpy as np

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)

PAULI = {"I": I2, "X": X, "Y": Y, "Z": Z}


def kron_chain(mats) -> np.ndarray:
    out = np.array([[1.0 + 0j]])
    for m in mats:
        out = np.kron(out, m)
    return out


def pauli_matrix(word: str) -> np.ndarray:
    return kron_chain(PAULI[ch] for ch in word)


def embed_single(u: np.ndarray, qubit: int, n: int) -> np.ndarray:
    return kron_chain(u if q == qubit else I2 for q in range(n))


def cnot_matrix(ctrl: int, tgt: int, n: int) -> np.ndarray:
    dim = 2**n
    out = np.zeros((dim, dim), dtype=complex)
    for i in range(dim):
        bits = [(i >> (n - 1 - q)) & 1 for q in range(n)]
        if bits[ctrl] == 1:
            bits[tgt] ^= 1
        j = sum(b << (n - 1 - q) for q, b in enumerate(bits))
        out[j, i] = 1.0
    return out


def rz_matrix(theta: float) -> np.ndarray:
    return np.array(
        [[np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]], dtype=complex
    )


def ry_matrix(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rzz_matrix(theta: float) -> np.ndarray:
    """exp(-i theta/2 Z(x)Z) built directly from its diagonal."""
    d = np.exp(-0.5j * theta * np.array([1, -1, -1, 1]))
    return np.diag(d)


def finite_difference_gradient(loss_fn, values: np.ndarray, slots,
                               h: float = 1e-5) -> np.ndarray:
    """Central differences of loss_fn(values) at the listed (i, k, j) slots."""
    grad = np.zeros_like(values)
    for i, k, j in slots:
        up = values.copy()
        up[i, k, j] += h
        down = values.copy()
        down[i, k, j] -= h
        grad[i, k, j] = (loss_fn(up) - loss_fn(down)) / (2 * h)
    return grad


def statevector_expectation(psi: np.ndarray, matrix: np.ndarray) -> float:
    return float(np.real(np.vdot(psi, matrix @ psi)))
