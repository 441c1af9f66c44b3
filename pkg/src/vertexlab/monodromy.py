"""Restriction matrices of both chambers and the monodromy M = S_-^{-1} S_+.

Rows and columns are indexed by fixed points in lexicographic order.  Both
chambers scale entrywise under z -> qz by prod a_nu / prod a_mu, so M is
q-periodic up to conjugation by D_a = diag(prod a_nu).
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import mpmath
import numpy as np

from .errors import Resonance, Singular
from .model import Chamber, FixedPoint, Params, fixed_points
from .qseries import phi, theta
from .stab import StabSpec, stab_restrict
from .summation import ordered_map

CONDITION_LIMIT = 1e12


@dataclass(frozen=True)
class RestrictionMatrix:
    entries: np.ndarray
    chamber: Chamber
    z_point: complex
    basis: tuple[FixedPoint, ...]

    @property
    def condition(self) -> float:
        return float(np.linalg.cond(self.entries))


def restriction_matrix(chamber, p: Params, threads: int = 1) -> RestrictionMatrix:
    """S[nu][mu] = envelope of mu restricted to the fixed point nu."""
    chamber = Chamber.parse(chamber)
    basis = tuple(fixed_points(p.k, p.n))
    cells = [(i, j) for i in range(len(basis)) for j in range(len(basis))]

    def entry(cell):
        i, j = cell
        return stab_restrict(StabSpec(basis[j], chamber, p), basis[i])

    values = ordered_map(entry, cells, threads)
    S = np.array(values, dtype=complex).reshape(len(basis), len(basis))
    if not np.all(np.isfinite(S)):
        raise Singular(f"restriction matrix ({chamber.value}) has non-finite entries")
    cond = np.linalg.cond(S)
    if not cond < CONDITION_LIMIT:
        raise Singular(f"restriction matrix ({chamber.value}) has condition number {cond:.3g}")
    return RestrictionMatrix(S, chamber, p.z, basis)


def weight_diagonal(p: Params) -> np.ndarray:
    """D_a = diag(prod_i a_{nu_i}) over the lexicographic fixed points."""
    return np.array([np.prod([p.a[j - 1] for j in nu.mu]) for nu in fixed_points(p.k, p.n)], dtype=complex)


def monodromy_matrix(p: Params, threads: int = 1) -> np.ndarray:
    """M = S_-^{-1} S_+ at the point z of ``p``."""
    s_plus = restriction_matrix(Chamber.PLUS, p, threads).entries
    s_minus = restriction_matrix(Chamber.MINUS, p, threads).entries
    return np.linalg.solve(s_minus, s_plus)


def periodicity_residual(p: Params, threads: int = 1) -> float:
    """max_ij |M(qz) - D M(z) D^{-1}|_ij / max |M(qz)|."""
    M = monodromy_matrix(p, threads)
    Mq = monodromy_matrix(p.with_z(p.q * p.z), threads)
    d = weight_diagonal(p)
    conj = d[:, None] * M / d[None, :]
    return float(np.max(np.abs(Mq - conj)) / np.max(np.abs(Mq)))


def entry_scaling_residual(chamber, p: Params, threads: int = 1) -> float:
    """max |S(qz) - D S(z) D^{-1}| relative to max |S(qz)|, for one chamber."""
    S = restriction_matrix(chamber, p, threads).entries
    Sq = restriction_matrix(chamber, p.with_z(p.q * p.z), threads).entries
    d = weight_diagonal(p)
    return float(np.max(np.abs(Sq - d[:, None] * S / d[None, :])) / np.max(np.abs(Sq)))


INVERSE_DPS = 50


def inverse_residual(p: Params, threads: int = 1, dps: int | None = INVERSE_DPS) -> float:
    """Frobenius norm of M (S_+^{-1} S_-) - 1.

    The restriction matrices are often conditioned near 1e8, so a double
    precision solve leaves roundoff far above 1e-8 even though the product is
    exactly the identity.  By default the two solves and the product run in
    ``dps`` decimal digits on the double precision entries; ``dps=None`` gives
    the plain double precision residual.
    """
    s_plus = restriction_matrix(Chamber.PLUS, p, threads).entries
    s_minus = restriction_matrix(Chamber.MINUS, p, threads).entries
    if dps is None:
        M = np.linalg.solve(s_minus, s_plus)
        other = np.linalg.solve(s_plus, s_minus)
        return float(np.linalg.norm(M @ other - np.eye(len(M))))
    with mpmath.workdps(dps):
        plus = mpmath.matrix(s_plus.tolist())
        minus = mpmath.matrix(s_minus.tolist())
        M = mpmath.inverse(minus) * plus
        other = mpmath.inverse(plus) * minus
        return float(mpmath.mnorm(M * other - mpmath.eye(len(s_plus)), "f"))


def scalar_theta_monodromy(z: complex, p: Params) -> complex:
    """f_0/f_inf with f_0 = phi(qz), f_inf = 1/phi(1/z); equals theta(z)."""
    z = complex(z)
    if z == 0 or theta(z, p) == 0:
        raise Resonance("scalar monodromy needs z outside q^Z")
    f0 = phi(p.q * z, p)
    f_inf = 1 / phi(1 / z, p)
    value = f0 / f_inf
    if abs(value - theta(z, p)) > 1e-13 * max(1.0, abs(value)):
        raise ArithmeticError("f_0/f_inf differs from theta(z)")
    return value


def annulus_grid(p: Params, radial: int = 8, angular: int = 16, r_inner: float | None = None) -> list[complex]:
    """Log-spaced points covering one fundamental annulus r_inner |q| < |z| <= r_inner."""
    r_inner = abs(p.z) if r_inner is None else r_inner
    lq = math.log(abs(p.q))
    pts = []
    for i in range(radial):
        r = r_inner * math.exp(lq * (i + 0.5) / radial)
        for j in range(angular):
            pts.append(r * complex(math.cos(2 * math.pi * (j + 0.25) / angular),
                                   math.sin(2 * math.pi * (j + 0.25) / angular)))
    return pts


def monodromy_grid_csv(p: Params, points: list[complex], threads: int = 1) -> str:
    """CSV rows z_re, z_im, row, col, abs_M for plotting."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["z_re", "z_im", "row", "col", "abs_M"])
    for z in points:
        M = monodromy_matrix(p.with_z(z), threads)
        for i in range(M.shape[0]):
            for j in range(M.shape[1]):
                w.writerow([repr(z.real), repr(z.imag), i, j, repr(float(abs(M[i, j])))])
    return buf.getvalue()
