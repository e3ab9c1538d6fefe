import json

import numpy as np
import pytest

from chem_export.export import build_hamiltonian
from chem_export.fermion import (
    active_space,
    diagonal_expectation,
    jordan_wigner,
)
from chem_export.molecules import MoleculeSpec, PRESETS

_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def dense(terms, num_qubits):
    h = np.zeros((2 ** num_qubits, 2 ** num_qubits), dtype=complex)
    for coeff, word in terms:
        m = np.eye(1, dtype=complex)
        for char in word:
            m = np.kron(m, _PAULI[char])
        h += coeff * m
    return h


@pytest.fixture(scope="module")
def documents():
    return {name: build_hamiltonian(PRESETS[name]) for name in ("h2", "lih", "h2o")}


def terms_of(doc):
    return [(t["coeff"], t["pauli"]) for t in doc["terms"]]


def test_one_body_number_operator():
    e = 0.37
    terms = jordan_wigner(0.0, np.array([[e]]), np.zeros((1, 1, 1, 1)))
    assert terms == [
        (pytest.approx(e), "II"),
        (pytest.approx(-e / 2), "IZ"),
        (pytest.approx(-e / 2), "ZI"),
    ]


def test_two_body_density_density():
    g = 0.61
    eri = np.full((1, 1, 1, 1), g)
    terms = jordan_wigner(0.0, np.zeros((1, 1)), eri)
    assert terms == [
        (pytest.approx(g / 4), "II"),
        (pytest.approx(-g / 4), "IZ"),
        (pytest.approx(-g / 4), "ZI"),
        (pytest.approx(g / 4), "ZZ"),
    ]


def test_terms_sorted_lexicographically(documents):
    for doc in documents.values():
        words = [t["pauli"] for t in doc["terms"]]
        assert words == sorted(words)
        assert len(words) == len(set(words))


def test_hamiltonians_hermitian(documents):
    for name in ("h2", "h2o"):
        doc = documents[name]
        h = dense(terms_of(doc), doc["num_qubits"])
        assert np.allclose(h, h.conj().T, atol=1e-12)
        assert np.max(np.abs(h.imag)) < 1e-12  # real symmetric in this basis


def test_commutes_with_number_parity(documents):
    # electron count is conserved, so H commutes with sum_q Z_q
    for name in ("h2", "h2o"):
        doc = documents[name]
        n = doc["num_qubits"]
        h = dense(terms_of(doc), n)
        z_total = dense([(1.0, "I" * q + "Z" + "I" * (n - q - 1))
                         for q in range(n)], n)
        assert np.max(np.abs(h @ z_total - z_total @ h)) < 1e-8


def test_hf_determinant_matches_scf_energy(documents):
    for doc in documents.values():
        md = doc["metadata"]
        n = doc["num_qubits"]
        occupied = md["active_electrons"]
        hf_bits = "1" * occupied + "0" * (n - occupied)
        value = diagonal_expectation(terms_of(doc), hf_bits)
        assert value == pytest.approx(md["hf_energy"], abs=1e-7)


def test_h2_ground_energy_matches_literature_fci(documents):
    # full CI for H2/STO-3G at 0.7 Angstrom separation
    doc = documents["h2"]
    h = dense(terms_of(doc), 4)
    assert np.linalg.eigvalsh(h)[0] == pytest.approx(-1.136189454, abs=1e-5)


def test_ground_energy_below_hf(documents):
    for doc in documents.values():
        if doc["num_qubits"] > 8:
            continue
        h = dense(terms_of(doc), doc["num_qubits"])
        e0 = np.linalg.eigvalsh(h)[0]
        assert e0 <= doc["metadata"]["hf_energy"] + 1e-10


def test_active_space_zero_frozen_is_identity():
    h = np.array([[1.0, 0.2], [0.2, -0.3]])
    g = np.arange(16, dtype=float).reshape(2, 2, 2, 2)
    e_core, h_eff, g_act = active_space(h, g, 2, 2, 2)
    assert e_core == 0.0
    assert np.array_equal(h_eff, h)
    assert np.array_equal(g_act, g)


def test_active_space_rejects_odd_frozen_count():
    with pytest.raises(ValueError, match="freeze"):
        active_space(np.eye(2), np.zeros((2, 2, 2, 2)), 2, 1, 2)


def test_active_space_rejects_oversized_window():
    with pytest.raises(ValueError, match="exceeds"):
        active_space(np.eye(2), np.zeros((2, 2, 2, 2)), 2, 2, 3)


def test_unit_round_trip(documents):
    bohr_doc = documents["h2"]
    scale = 0.529177210903
    angstrom = MoleculeSpec(
        atoms=tuple((s, x * scale, y * scale, z * scale)
                    for s, x, y, z in PRESETS["h2"].atoms),
        units="angstrom",
        active_electrons=2,
        active_orbitals=2,
    )
    other = build_hamiltonian(angstrom)
    assert [t["pauli"] for t in other["terms"]] == \
        [t["pauli"] for t in bohr_doc["terms"]]
    for a, b in zip(other["terms"], bohr_doc["terms"]):
        assert a["coeff"] == pytest.approx(b["coeff"], abs=1e-8)


def test_rebuild_is_deterministic(documents):
    again = build_hamiltonian(PRESETS["h2"])
    assert json.dumps(again) == json.dumps(documents["h2"])


def test_diagonal_expectation_rules():
    terms = [(2.0, "ZI"), (3.0, "XZ"), (0.5, "II")]
    assert diagonal_expectation(terms, "00") == pytest.approx(2.5)
    assert diagonal_expectation(terms, "10") == pytest.approx(-1.5)


def test_molecule_spec_validation():
    with pytest.raises(ValueError, match="units"):
        MoleculeSpec((("H", 0, 0, 0),), "parsec", 2, 2)
    with pytest.raises(ValueError, match="element"):
        MoleculeSpec((("Q", 0, 0, 0),), "bohr", 2, 2)
    with pytest.raises(ValueError, match="finite"):
        MoleculeSpec((("H", 0, 0, float("nan")),), "bohr", 2, 2)
    with pytest.raises(ValueError, match="positive"):
        MoleculeSpec((("H", 0, 0, 0),), "bohr", 0, 2)
    with pytest.raises(ValueError, match="fit"):
        MoleculeSpec((("H", 0, 0, 0),), "bohr", 5, 2)
    with pytest.raises(ValueError, match="atom"):
        MoleculeSpec((), "bohr", 2, 2)


def test_qubit_count_is_twice_active_orbitals(documents):
    for name, expected in (("h2", 4), ("lih", 10), ("h2o", 8)):
        assert documents[name]["num_qubits"] == expected
        assert PRESETS[name].num_qubits == expected
