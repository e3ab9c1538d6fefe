"""Restricted Hartree-Fock with DIIS convergence acceleration."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import ATOMIC_NUMBER, build_basis
from .integrals import eri_tensor, kinetic_matrix, nuclear_matrix, overlap_matrix


class ScfError(RuntimeError):
    pass


@dataclass
class RhfResult:
    energy: float               # total energy including nuclear repulsion
    nuclear_repulsion: float
    mo_coeff: np.ndarray        # columns are MOs, AO x MO
    mo_energies: np.ndarray
    h_core: np.ndarray
    overlap: np.ndarray
    eri: np.ndarray             # (pq|rs), chemists' notation, AO basis
    num_electrons: int


def nuclear_repulsion(atoms) -> float:
    e = 0.0
    for i, (sym_i, ri) in enumerate(atoms):
        for j in range(i):
            sym_j, rj = atoms[j]
            r = np.linalg.norm(np.asarray(ri, float) - np.asarray(rj, float))
            e += ATOMIC_NUMBER[sym_i] * ATOMIC_NUMBER[sym_j] / r
    return e


def _fock(h, eri, density):
    j = np.einsum("pqrs,rs->pq", eri, density)
    k = np.einsum("prqs,rs->pq", eri, density)
    return h + j - 0.5 * k


def run_rhf(atoms, charge: int = 0, max_iterations: int = 200,
            energy_tol: float = 1e-11, error_tol: float = 1e-9) -> RhfResult:
    """Solve RHF for `atoms` given as (symbol, xyz in Bohr)."""
    num_electrons = sum(ATOMIC_NUMBER[s] for s, _ in atoms) - charge
    if num_electrons <= 0 or num_electrons % 2 != 0:
        raise ScfError(f"restricted HF needs a positive even electron count, "
                       f"got {num_electrons}")
    n_occ = num_electrons // 2

    aos = build_basis([(s, np.asarray(r, float)) for s, r in atoms])
    if n_occ > len(aos):
        raise ScfError("more electron pairs than basis functions")
    s = overlap_matrix(aos)
    h = kinetic_matrix(aos) + nuclear_matrix(aos, atoms)
    eri = eri_tensor(aos)
    e_nuc = nuclear_repulsion(atoms)

    # symmetric orthogonalization
    s_val, s_vec = np.linalg.eigh(s)
    if s_val.min() < 1e-10:
        raise ScfError("linearly dependent basis")
    x = s_vec @ np.diag(s_val ** -0.5) @ s_vec.T

    def solve(f):
        fp = x.T @ f @ x
        eps, cp = np.linalg.eigh(fp)
        return eps, x @ cp

    eps, c = solve(h)
    density = 2.0 * c[:, :n_occ] @ c[:, :n_occ].T
    energy = 0.0
    fock_history: list[np.ndarray] = []
    error_history: list[np.ndarray] = []

    for _ in range(max_iterations):
        f = _fock(h, eri, density)
        error = x.T @ (f @ density @ s - s @ density @ f) @ x
        fock_history.append(f)
        error_history.append(error.ravel())
        if len(fock_history) > 8:
            fock_history.pop(0)
            error_history.pop(0)

        if len(fock_history) > 1:
            # DIIS: least-squares combination of stored Fock matrices
            m = len(fock_history)
            b = -np.ones((m + 1, m + 1))
            b[m, m] = 0.0
            for i in range(m):
                for j in range(m):
                    b[i, j] = error_history[i] @ error_history[j]
            rhs = np.zeros(m + 1)
            rhs[m] = -1.0
            try:
                weights = np.linalg.solve(b, rhs)[:m]
                f = sum(w * fi for w, fi in zip(weights, fock_history))
            except np.linalg.LinAlgError:
                pass

        eps, c = solve(f)
        density = 2.0 * c[:, :n_occ] @ c[:, :n_occ].T
        f_current = _fock(h, eri, density)
        new_energy = 0.5 * np.sum(density * (h + f_current)) + e_nuc
        converged = (abs(new_energy - energy) < energy_tol
                     and np.linalg.norm(error) < error_tol)
        energy = new_energy
        if converged:
            return RhfResult(
                energy=float(energy),
                nuclear_repulsion=e_nuc,
                mo_coeff=c,
                mo_energies=eps,
                h_core=h,
                overlap=s,
                eri=eri,
                num_electrons=num_electrons,
            )
    raise ScfError(f"SCF did not converge in {max_iterations} iterations")
