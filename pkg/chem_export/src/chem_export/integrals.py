"""Molecular integrals over contracted Cartesian Gaussians.

McMurchie-Davidson scheme: overlap distributions are expanded in Hermite
Gaussians (`_hermite_coef`), Coulomb integrals then reduce to the Boys
function through the auxiliary tensor `_hermite_coulomb`. Covers s and p
shells, which is all STO-3G needs for the supported elements.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import gamma, gammainc

from .basis import ATOMIC_NUMBER


def boys(m: int, t: float) -> float:
    """Boys function F_m(t)."""
    if t < 1e-12:
        # short series around t = 0; enough at this cutoff
        return 1.0 / (2 * m + 1) - t / (2 * m + 3) + t * t / (2 * (2 * m + 5))
    a = m + 0.5
    return gammainc(a, t) * gamma(a) / (2.0 * t ** a)


def _hermite_coef(i: int, j: int, t: int, qx: float, a: float, b: float) -> float:
    """Expansion coefficient E_t^{ij} for a Gaussian product along one axis.

    qx is the center separation A - B along the axis.
    """
    p = a + b
    if t < 0 or t > i + j:
        return 0.0
    if i == j == t == 0:
        return math.exp(-a * b / p * qx * qx)
    if i > 0:
        return (_hermite_coef(i - 1, j, t - 1, qx, a, b) / (2 * p)
                - (b * qx / p) * _hermite_coef(i - 1, j, t, qx, a, b)
                + (t + 1) * _hermite_coef(i - 1, j, t + 1, qx, a, b))
    return (_hermite_coef(i, j - 1, t - 1, qx, a, b) / (2 * p)
            + (a * qx / p) * _hermite_coef(i, j - 1, t, qx, a, b)
            + (t + 1) * _hermite_coef(i, j - 1, t + 1, qx, a, b))


def overlap_primitive(a, lmn1, ra, b, lmn2, rb) -> float:
    p = a + b
    out = (math.pi / p) ** 1.5
    for ax in range(3):
        out *= _hermite_coef(lmn1[ax], lmn2[ax], 0, ra[ax] - rb[ax], a, b)
    return out


def _kinetic_primitive(a, lmn1, ra, b, lmn2, rb) -> float:
    l2, m2, n2 = lmn2

    def s(dl, dm, dn):
        return overlap_primitive(a, lmn1, ra, b, (l2 + dl, m2 + dm, n2 + dn), rb)

    term = b * (2 * (l2 + m2 + n2) + 3) * s(0, 0, 0)
    term -= 2 * b * b * (s(2, 0, 0) + s(0, 2, 0) + s(0, 0, 2))
    term -= 0.5 * (l2 * (l2 - 1) * s(-2, 0, 0)
                   + m2 * (m2 - 1) * s(0, -2, 0)
                   + n2 * (n2 - 1) * s(0, 0, -2))
    return term


def _hermite_coulomb(t, u, v, n, p, pcx, pcy, pcz, dist2) -> float:
    if t == u == v == 0:
        return (-2.0 * p) ** n * boys(n, p * dist2)
    if t > 0:
        out = pcx * _hermite_coulomb(t - 1, u, v, n + 1, p, pcx, pcy, pcz, dist2)
        if t > 1:
            out += (t - 1) * _hermite_coulomb(t - 2, u, v, n + 1, p,
                                              pcx, pcy, pcz, dist2)
        return out
    if u > 0:
        out = pcy * _hermite_coulomb(t, u - 1, v, n + 1, p, pcx, pcy, pcz, dist2)
        if u > 1:
            out += (u - 1) * _hermite_coulomb(t, u - 2, v, n + 1, p,
                                              pcx, pcy, pcz, dist2)
        return out
    out = pcz * _hermite_coulomb(t, u, v - 1, n + 1, p, pcx, pcy, pcz, dist2)
    if v > 1:
        out += (v - 1) * _hermite_coulomb(t, u, v - 2, n + 1, p,
                                          pcx, pcy, pcz, dist2)
    return out


def _nuclear_primitive(a, lmn1, ra, b, lmn2, rb, rc) -> float:
    """Attraction integral of a primitive pair to a unit charge at rc."""
    p = a + b
    rp = (a * ra + b * rb) / p
    pc = rp - rc
    dist2 = float(pc @ pc)
    l1, m1, n1 = lmn1
    l2, m2, n2 = lmn2
    total = 0.0
    for t in range(l1 + l2 + 1):
        et = _hermite_coef(l1, l2, t, ra[0] - rb[0], a, b)
        if et == 0.0:
            continue
        for u in range(m1 + m2 + 1):
            eu = _hermite_coef(m1, m2, u, ra[1] - rb[1], a, b)
            if eu == 0.0:
                continue
            for v in range(n1 + n2 + 1):
                ev = _hermite_coef(n1, n2, v, ra[2] - rb[2], a, b)
                if ev == 0.0:
                    continue
                total += et * eu * ev * _hermite_coulomb(
                    t, u, v, 0, p, pc[0], pc[1], pc[2], dist2)
    return 2.0 * math.pi / p * total


def _eri_primitive(a, lmn1, ra, b, lmn2, rb, c, lmn3, rc, d, lmn4, rd) -> float:
    p = a + b
    q = c + d
    alpha = p * q / (p + q)
    rp = (a * ra + b * rb) / p
    rq = (c * rc + d * rd) / q
    pq = rp - rq
    dist2 = float(pq @ pq)
    l1, m1, n1 = lmn1
    l2, m2, n2 = lmn2
    l3, m3, n3 = lmn3
    l4, m4, n4 = lmn4

    bra = []
    for t in range(l1 + l2 + 1):
        et = _hermite_coef(l1, l2, t, ra[0] - rb[0], a, b)
        for u in range(m1 + m2 + 1):
            eu = _hermite_coef(m1, m2, u, ra[1] - rb[1], a, b)
            for v in range(n1 + n2 + 1):
                ev = _hermite_coef(n1, n2, v, ra[2] - rb[2], a, b)
                coef = et * eu * ev
                if coef != 0.0:
                    bra.append((t, u, v, coef))
    total = 0.0
    for tau in range(l3 + l4 + 1):
        ft = _hermite_coef(l3, l4, tau, rc[0] - rd[0], c, d)
        for nu in range(m3 + m4 + 1):
            fu = _hermite_coef(m3, m4, nu, rc[1] - rd[1], c, d)
            for phi in range(n3 + n4 + 1):
                fv = _hermite_coef(n3, n4, phi, rc[2] - rd[2], c, d)
                ket = ft * fu * fv * (-1.0) ** (tau + nu + phi)
                if ket == 0.0:
                    continue
                for t, u, v, coef in bra:
                    total += coef * ket * _hermite_coulomb(
                        t + tau, u + nu, v + phi, 0, alpha,
                        pq[0], pq[1], pq[2], dist2)
    return total * 2.0 * math.pi ** 2.5 / (p * q * math.sqrt(p + q))


def _contract_pair(fa, fb, prim) -> float:
    out = 0.0
    for ca, a in zip(fa.coefficients, fa.exponents):
        for cb, b in zip(fb.coefficients, fb.exponents):
            out += ca * cb * prim(a, b)
    return out


def overlap_matrix(aos) -> np.ndarray:
    n = len(aos)
    s = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1):
            s[i, j] = s[j, i] = _contract_pair(
                aos[i], aos[j],
                lambda a, b, i=i, j=j: overlap_primitive(
                    a, aos[i].lmn, aos[i].center, b, aos[j].lmn, aos[j].center))
    return s


def kinetic_matrix(aos) -> np.ndarray:
    n = len(aos)
    t = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1):
            t[i, j] = t[j, i] = _contract_pair(
                aos[i], aos[j],
                lambda a, b, i=i, j=j: _kinetic_primitive(
                    a, aos[i].lmn, aos[i].center, b, aos[j].lmn, aos[j].center))
    return t


def nuclear_matrix(aos, atoms) -> np.ndarray:
    """Electron-nuclear attraction, atoms as (symbol, xyz in Bohr)."""
    n = len(aos)
    v = np.zeros((n, n))
    for symbol, xyz in atoms:
        z = ATOMIC_NUMBER[symbol]
        xyz = np.asarray(xyz, dtype=float)
        for i in range(n):
            for j in range(i + 1):
                v[i, j] += -z * _contract_pair(
                    aos[i], aos[j],
                    lambda a, b, i=i, j=j: _nuclear_primitive(
                        a, aos[i].lmn, aos[i].center,
                        b, aos[j].lmn, aos[j].center, xyz))
    return v + np.tril(v, -1).T


def eri_tensor(aos) -> np.ndarray:
    """Two-electron integrals (ij|kl) in chemists' notation, 8-fold symmetric."""
    n = len(aos)
    eri = np.zeros((n, n, n, n))

    def contracted(i, j, k, l):
        out = 0.0
        fi, fj, fk, fl = aos[i], aos[j], aos[k], aos[l]
        for ci, a in zip(fi.coefficients, fi.exponents):
            for cj, b in zip(fj.coefficients, fj.exponents):
                for ck, c in zip(fk.coefficients, fk.exponents):
                    for cl, d in zip(fl.coefficients, fl.exponents):
                        out += ci * cj * ck * cl * _eri_primitive(
                            a, fi.lmn, fi.center, b, fj.lmn, fj.center,
                            c, fk.lmn, fk.center, d, fl.lmn, fl.center)
        return out

    for i in range(n):
        for j in range(i + 1):
            ij = i * (i + 1) // 2 + j
            for k in range(n):
                for l in range(k + 1):
                    kl = k * (k + 1) // 2 + l
                    if ij < kl:
                        continue
                    val = contracted(i, j, k, l)
                    for a, b in ((i, j), (j, i)):
                        for c, d in ((k, l), (l, k)):
                            eri[a, b, c, d] = val
                            eri[c, d, a, b] = val
    return eri
