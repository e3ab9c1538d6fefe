import numpy as np
import pytest

from chem_export.molecules import PRESETS
from chem_export.scf import ScfError, nuclear_repulsion, run_rhf


def test_nuclear_repulsion_h2():
    atoms = [("H", np.zeros(3)), ("H", np.array([0.0, 0.0, 1.4]))]
    assert nuclear_repulsion(atoms) == pytest.approx(1.0 / 1.4, abs=1e-14)


def test_h2_rhf_energy_textbook():
    # Szabo & Ostlund quote -1.1167 Ha for H2/STO-3G at 1.4 Bohr
    atoms = [("H", np.zeros(3)), ("H", np.array([0.0, 0.0, 1.4]))]
    result = run_rhf(atoms)
    assert result.energy == pytest.approx(-1.1167, abs=1e-3)
    assert result.num_electrons == 2


def test_lih_rhf_energy_window():
    result = run_rhf(PRESETS["lih"].atoms_bohr())
    assert -7.88 < result.energy < -7.84


def test_h2o_converges_at_paper_geometry():
    result = run_rhf(PRESETS["h2o"].atoms_bohr())
    assert -75.5 < result.energy < -74.0
    # stretched geometry sits above the usual equilibrium energy
    assert result.energy > -74.97


def test_mo_orthonormality():
    result = run_rhf(PRESETS["lih"].atoms_bohr())
    identity = result.mo_coeff.T @ result.overlap @ result.mo_coeff
    assert np.allclose(identity, np.eye(identity.shape[0]), atol=1e-9)


def test_energy_above_electronic_plus_nuclear_sanity():
    result = run_rhf(PRESETS["h2"].atoms_bohr())
    assert result.energy < result.nuclear_repulsion  # binding


def test_odd_electron_count_rejected():
    with pytest.raises(ScfError, match="even"):
        run_rhf([("H", np.zeros(3))])
    with pytest.raises(ScfError, match="even"):
        run_rhf([("H", np.zeros(3)), ("H", np.array([0.0, 0.0, 1.4]))],
                charge=1)


def test_mo_energies_sorted():
    result = run_rhf(PRESETS["lih"].atoms_bohr())
    assert np.all(np.diff(result.mo_energies) >= -1e-12)
