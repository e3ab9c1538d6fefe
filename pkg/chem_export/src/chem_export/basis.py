"""STO-3G basis set construction.

Tabulated exponents and contraction coefficients for the elements this
exporter supports. Each contracted function is expanded into Cartesian
Gaussians with normalized primitives, then renormalized as a whole so
every AO has unit self-overlap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

ATOMIC_NUMBER = {"H": 1, "Li": 3, "O": 8}

# exponents / coefficients from the standard STO-3G tabulation
_STO3G = {
    "H": [
        ("s",
         (3.425250914, 0.6239137298, 0.1688554040),
         (0.1543289673, 0.5353281423, 0.4446345422)),
    ],
    "Li": [
        ("s",
         (16.11957475, 2.936200663, 0.7946504870),
         (0.1543289673, 0.5353281423, 0.4446345422)),
        ("sp",
         (0.6362897469, 0.1478600533, 0.0480886784),
         (-0.09996722919, 0.3995128261, 0.7001154689),
         (0.1559162750, 0.6076837186, 0.3919573931)),
    ],
    "O": [
        ("s",
         (130.7093200, 23.80886050, 6.443608313),
         (0.1543289673, 0.5353281423, 0.4446345422)),
        ("sp",
         (5.033151319, 1.169596125, 0.3803889600),
         (-0.09996722919, 0.3995128261, 0.7001154689),
         (0.1559162750, 0.6076837186, 0.3919573931)),
    ],
}


def _double_factorial(k: int) -> int:
    # (-1)!! = 1 by convention
    out = 1
    while k > 1:
        out *= k
        k -= 2
    return out


def primitive_norm(alpha: float, lmn: tuple[int, int, int]) -> float:
    """Normalization constant of a Cartesian Gaussian x^l y^m z^n e^{-a r^2}."""
    l, m, n = lmn
    total = l + m + n
    num = (2.0 * alpha / math.pi) ** 0.75 * (4.0 * alpha) ** (total / 2.0)
    den = math.sqrt(_double_factorial(2 * l - 1)
                    * _double_factorial(2 * m - 1)
                    * _double_factorial(2 * n - 1))
    return num / den


@dataclass
class BasisFunction:
    """One contracted Cartesian Gaussian AO."""

    center: np.ndarray
    lmn: tuple[int, int, int]
    exponents: np.ndarray
    coefficients: np.ndarray  # includes primitive norms and contraction norm
    label: str = ""

    def __post_init__(self):
        self.center = np.asarray(self.center, dtype=float)
        self.exponents = np.asarray(self.exponents, dtype=float)
        self.coefficients = np.asarray(self.coefficients, dtype=float)


def _contracted(center, lmn, exps, coeffs, label) -> BasisFunction:
    from .integrals import overlap_primitive

    exps = np.asarray(exps, dtype=float)
    raw = np.asarray(coeffs, dtype=float)
    scaled = raw * np.array([primitive_norm(a, lmn) for a in exps])
    # self-overlap of the scaled contraction, then renormalize
    s = 0.0
    for ca, a in zip(scaled, exps):
        for cb, b in zip(scaled, exps):
            s += ca * cb * overlap_primitive(a, lmn, center, b, lmn, center)
    return BasisFunction(center, lmn, exps, scaled / math.sqrt(s), label)


def build_basis(atoms: list[tuple[str, np.ndarray]]) -> list[BasisFunction]:
    """Expand STO-3G shells for `atoms` given as (symbol, xyz in Bohr)."""
    aos: list[BasisFunction] = []
    for idx, (symbol, xyz) in enumerate(atoms):
        if symbol not in _STO3G:
            raise ValueError(f"no STO-3G data for element {symbol!r}")
        for shell in _STO3G[symbol]:
            kind, exps = shell[0], shell[1]
            tag = f"{symbol}{idx}"
            if kind == "s":
                aos.append(_contracted(xyz, (0, 0, 0), exps, shell[2],
                                       f"{tag} s"))
            elif kind == "sp":
                aos.append(_contracted(xyz, (0, 0, 0), exps, shell[2],
                                       f"{tag} s"))
                for lmn, ax in (((1, 0, 0), "px"), ((0, 1, 0), "py"),
                                ((0, 0, 1), "pz")):
                    aos.append(_contracted(xyz, lmn, exps, shell[3],
                                           f"{tag} {ax}"))
            else:
                raise ValueError(f"unsupported shell kind {kind!r}")
    return aos
