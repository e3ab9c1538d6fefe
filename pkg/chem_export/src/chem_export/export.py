"""End-to-end Hamiltonian construction and the shared JSON output format."""

from __future__ import annotations

import json

from .fermion import active_space, diagonal_expectation, jordan_wigner, mo_transform
from .molecules import MoleculeSpec
from .scf import run_rhf


def build_hamiltonian(spec: MoleculeSpec) -> dict:
    """Run the full pipeline for `spec` and return the output document."""
    atoms = spec.atoms_bohr()
    rhf = run_rhf(atoms, charge=spec.charge)
    h_mo, eri_mo = mo_transform(rhf.h_core, rhf.eri, rhf.mo_coeff)
    e_core, h_eff, eri_act = active_space(
        h_mo, eri_mo, rhf.num_electrons,
        spec.active_electrons, spec.active_orbitals)
    terms = jordan_wigner(rhf.nuclear_repulsion + e_core, h_eff, eri_act)

    num_qubits = spec.num_qubits
    # HF determinant: lowest active orbitals doubly occupied
    hf_bits = "1" * spec.active_electrons + "0" * (num_qubits - spec.active_electrons)
    hf_from_terms = diagonal_expectation(terms, hf_bits)
    if abs(hf_from_terms - rhf.energy) > 1e-7:
        raise ArithmeticError(
            f"mapped Hamiltonian disagrees with SCF: <HF|H|HF> = "
            f"{hf_from_terms!r} vs {rhf.energy!r}")

    n_frozen = (rhf.num_electrons - spec.active_electrons) // 2
    return {
        "num_qubits": num_qubits,
        "terms": [{"coeff": coeff, "pauli": word} for coeff, word in terms],
        "metadata": {
            "molecule": spec.name or None,
            "geometry": [{"symbol": s, "x": x, "y": y, "z": z}
                         for s, x, y, z in spec.atoms],
            "units": spec.units,
            "charge": spec.charge,
            "basis": "sto-3g",
            "mapping": "jordan_wigner",
            "active_electrons": spec.active_electrons,
            "active_orbitals": spec.active_orbitals,
            "frozen_orbitals": n_frozen,
            "hf_energy": rhf.energy,
            "nuclear_repulsion": rhf.nuclear_repulsion,
        },
    }


def export_hamiltonian(spec: MoleculeSpec, out_path) -> dict:
    document = build_hamiltonian(spec)
    with open(out_path, "w", encoding="utf-8") as fh:
        json.dump(document, fh, indent=1)
        fh.write("\n")
    return document
