"""Qubit-Hamiltonian exporter for small molecules.

Pipeline: STO-3G atomic integrals -> restricted Hartree-Fock -> frozen-core
active space -> Jordan-Wigner Pauli sum, written in the JSON format the
circuit-search engine consumes.
"""

from .molecules import MoleculeSpec, PRESETS, load_spec
from .export import build_hamiltonian, export_hamiltonian

__all__ = [
    "MoleculeSpec",
    "PRESETS",
    "load_spec",
    "build_hamiltonian",
    "export_hamiltonian",
]
