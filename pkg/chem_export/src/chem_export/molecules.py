"""Molecule specifications and the built-in geometries."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .basis import ATOMIC_NUMBER

BOHR_PER_ANGSTROM = 1.0 / 0.529177210903


@dataclass(frozen=True)
class MoleculeSpec:
    atoms: tuple[tuple[str, float, float, float], ...]
    units: str  # "bohr" or "angstrom"
    active_electrons: int
    active_orbitals: int
    charge: int = 0
    name: str = ""

    def __post_init__(self):
        if self.units not in ("bohr", "angstrom"):
            raise ValueError(f"units must be bohr or angstrom, got {self.units!r}")
        if not self.atoms:
            raise ValueError("molecule needs at least one atom")
        normalized = []
        for entry in self.atoms:
            symbol, x, y, z = entry
            if symbol not in ATOMIC_NUMBER:
                raise ValueError(f"unsupported element {symbol!r}")
            coords = (float(x), float(y), float(z))
            if not all(math.isfinite(c) for c in coords):
                raise ValueError(f"non-finite coordinate for {symbol}")
            normalized.append((symbol, *coords))
        object.__setattr__(self, "atoms", tuple(normalized))
        if self.active_electrons <= 0 or self.active_orbitals <= 0:
            raise ValueError("active space must be positive")
        if self.active_electrons > 2 * self.active_orbitals:
            raise ValueError(
                f"{self.active_electrons} electrons do not fit in "
                f"{self.active_orbitals} spatial orbitals")

    def atoms_bohr(self) -> list[tuple[str, tuple[float, float, float]]]:
        scale = 1.0 if self.units == "bohr" else BOHR_PER_ANGSTROM
        return [(s, (x * scale, y * scale, z * scale))
                for s, x, y, z in self.atoms]

    @property
    def num_qubits(self) -> int:
        return 2 * self.active_orbitals


PRESETS = {
    "h2": MoleculeSpec(
        atoms=(("H", 0.0, 0.0, -0.66140414), ("H", 0.0, 0.0, 0.66140414)),
        units="bohr",
        active_electrons=2,
        active_orbitals=2,
        name="h2",
    ),
    "lih": MoleculeSpec(
        atoms=(("Li", 0.0, 0.0, 0.0), ("H", 0.0, 0.0, 2.969280527)),
        units="bohr",
        active_electrons=2,
        active_orbitals=5,
        name="lih",
    ),
    "h2o": MoleculeSpec(
        atoms=(("H", 0.0, 0.0, 0.0),
               ("O", 1.63234543, 0.86417176, 0.0),
               ("H", 3.36087791, 0.0, 0.0)),
        units="angstrom",
        active_electrons=4,
        active_orbitals=4,
        name="h2o",
    ),
}


def load_spec(path) -> MoleculeSpec:
    """Read a molecule spec JSON file.

    Expected shape: {"atoms": [["H", x, y, z], ...], "units": "bohr",
    "charge": 0, "active_electrons": n, "active_orbitals": m}.
    """
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError(f"{path}: spec must be a JSON object")
    missing = {"atoms", "units", "active_electrons", "active_orbitals"} - set(data)
    if missing:
        raise ValueError(f"{path}: missing keys {sorted(missing)}")
    atoms = tuple(tuple(a) for a in data["atoms"])
    return MoleculeSpec(
        atoms=atoms,
        units=data["units"],
        active_electrons=data["active_electrons"],
        active_orbitals=data["active_orbitals"],
        charge=data.get("charge", 0),
        name=data.get("name", ""),
    )
