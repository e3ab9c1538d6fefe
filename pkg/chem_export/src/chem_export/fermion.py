"""Second quantization and the Jordan-Wigner transform.

Spin orbitals interleave spins: qubit 2i holds the alpha spin of spatial
orbital i, qubit 2i+1 the beta spin. Occupied qubits read |1>.
"""

from __future__ import annotations

import numpy as np


def mo_transform(h_ao: np.ndarray, eri_ao: np.ndarray,
                 mo_coeff: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Rotate core Hamiltonian and (pq|rs) into the MO basis."""
    c = mo_coeff
    h = c.T @ h_ao @ c
    g = np.einsum("pqrs,pi->iqrs", eri_ao, c, optimize=True)
    g = np.einsum("iqrs,qj->ijrs", g, c, optimize=True)
    g = np.einsum("ijrs,rk->ijks", g, c, optimize=True)
    g = np.einsum("ijks,sl->ijkl", g, c, optimize=True)
    return h, g


def active_space(h_mo: np.ndarray, eri_mo: np.ndarray, num_electrons: int,
                 active_electrons: int, active_orbitals: int
                 ) -> tuple[float, np.ndarray, np.ndarray]:
    """Freeze core orbitals, returning (core energy, h_eff, eri) on the
    active window.

    Core orbitals are the lowest (num_electrons - active_electrons) / 2
    MOs; their mean field folds into h_eff and a constant shift.
    """
    n_orb = h_mo.shape[0]
    frozen_electrons = num_electrons - active_electrons
    if frozen_electrons < 0 or frozen_electrons % 2 != 0:
        raise ValueError(
            f"cannot freeze {frozen_electrons} electrons out of {num_electrons}")
    n_frozen = frozen_electrons // 2
    if n_frozen + active_orbitals > n_orb:
        raise ValueError(
            f"active space ({n_frozen} frozen + {active_orbitals} active) "
            f"exceeds {n_orb} orbitals")
    core = list(range(n_frozen))
    act = list(range(n_frozen, n_frozen + active_orbitals))

    e_core = 0.0
    for i in core:
        e_core += 2.0 * h_mo[i, i]
        for j in core:
            e_core += 2.0 * eri_mo[i, i, j, j] - eri_mo[i, j, j, i]

    h_eff = h_mo[np.ix_(act, act)].copy()
    for a, p in enumerate(act):
        for b, q in enumerate(act):
            for i in core:
                h_eff[a, b] += 2.0 * eri_mo[p, q, i, i] - eri_mo[p, i, i, q]
    g_act = eri_mo[np.ix_(act, act, act, act)].copy()
    return e_core, h_eff, g_act


# single-qubit Pauli products: (left, right) -> (phase, result)
_PAULI_MUL = {
    ("I", "I"): (1, "I"), ("I", "X"): (1, "X"),
    ("I", "Y"): (1, "Y"), ("I", "Z"): (1, "Z"),
    ("X", "I"): (1, "X"), ("X", "X"): (1, "I"),
    ("X", "Y"): (1j, "Z"), ("X", "Z"): (-1j, "Y"),
    ("Y", "I"): (1, "Y"), ("Y", "X"): (-1j, "Z"),
    ("Y", "Y"): (1, "I"), ("Y", "Z"): (1j, "X"),
    ("Z", "I"): (1, "Z"), ("Z", "X"): (1j, "Y"),
    ("Z", "Y"): (-1j, "X"), ("Z", "Z"): (1, "I"),
}


def _multiply_words(wa: str, wb: str) -> tuple[complex, str]:
    phase = 1.0 + 0.0j
    chars = []
    for ca, cb in zip(wa, wb):
        ph, c = _PAULI_MUL[(ca, cb)]
        phase *= ph
        chars.append(c)
    return phase, "".join(chars)


def _ladder(index: int, num_qubits: int, dagger: bool) -> list[tuple[complex, str]]:
    """Jordan-Wigner image of a_index (or its dagger) as two Pauli strings."""
    prefix = "Z" * index
    suffix = "I" * (num_qubits - index - 1)
    sign = -0.5j if dagger else 0.5j
    return [
        (0.5 + 0.0j, prefix + "X" + suffix),
        (sign, prefix + "Y" + suffix),
    ]


def _accumulate_product(terms: dict, coeff: complex, operators) -> None:
    """Add coeff times a product of ladder operators, each a Pauli pair."""
    products = [(coeff, None)]
    for op in operators:
        next_products = []
        for acc_coeff, acc_word in products:
            for ph, word in op:
                if acc_word is None:
                    next_products.append((acc_coeff * ph, word))
                else:
                    mul_phase, merged = _multiply_words(acc_word, word)
                    next_products.append((acc_coeff * ph * mul_phase, merged))
        products = next_products
    for c, word in products:
        if word is None:
            continue
        terms[word] = terms.get(word, 0.0 + 0.0j) + c


def jordan_wigner(constant: float, h_eff: np.ndarray, eri_act: np.ndarray
                  ) -> list[tuple[float, str]]:
    """Map an active-space Hamiltonian to a qubit Pauli sum.

    Input tensors are spatial; spins are attached here. Returns real
    coefficients with Pauli words sorted lexicographically.
    """
    n_spatial = h_eff.shape[0]
    n = 2 * n_spatial
    terms: dict[str, complex] = {"I" * n: complex(constant)}

    def spin_orbital(spatial: int, spin: int) -> int:
        return 2 * spatial + spin

    for p in range(n_spatial):
        for q in range(n_spatial):
            if abs(h_eff[p, q]) < 1e-14:
                continue
            for sigma in (0, 1):
                _accumulate_product(
                    terms, complex(h_eff[p, q]),
                    [_ladder(spin_orbital(p, sigma), n, True),
                     _ladder(spin_orbital(q, sigma), n, False)])

    # 1/2 sum (pq|rs) a+_{p,sigma} a+_{r,tau} a_{s,tau} a_{q,sigma}
    for p in range(n_spatial):
        for q in range(n_spatial):
            for r in range(n_spatial):
                for s in range(n_spatial):
                    g = eri_act[p, q, r, s]
                    if abs(g) < 1e-14:
                        continue
                    for sigma in (0, 1):
                        for tau in (0, 1):
                            i = spin_orbital(p, sigma)
                            j = spin_orbital(r, tau)
                            k = spin_orbital(s, tau)
                            l = spin_orbital(q, sigma)
                            if i == j or k == l:
                                continue
                            _accumulate_product(
                                terms, 0.5 * complex(g),
                                [_ladder(i, n, True), _ladder(j, n, True),
                                 _ladder(k, n, False), _ladder(l, n, False)])

    out = []
    for word in sorted(terms):
        coeff = terms[word]
        if abs(coeff.imag) > 1e-10:
            raise ArithmeticError(
                f"non-Hermitian term {word}: imaginary part {coeff.imag}")
        if abs(coeff.real) > 1e-12:
            out.append((float(coeff.real), word))
    return out


def diagonal_expectation(terms, bitstring: str) -> float:
    """<z|H|z> for a computational basis state, qubit 0 first."""
    total = 0.0
    for coeff, word in terms:
        value = coeff
        for char, bit in zip(word, bitstring):
            if char in ("X", "Y"):
                value = 0.0
                break
            if char == "Z" and bit == "1":
                value = -value
        total += value
    return total
