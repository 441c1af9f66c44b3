"""Elliptic stable envelopes of T*Gr(k, n) for both stability chambers.

Chamber + is the explicit symmetrized theta expression.  In each
permutation term, the entries of mu are matched to the Weyl-vector slots
in decreasing order: slot r (with 2rho_r = k + 1 - 2r) carries
mu_{k + 1 - r}.  This ordering makes every term vanish on the wheel locus
{a_l, a_l/hbar} and leaves the x-automorphy untouched.

Chamber - is obtained from chamber + through the involution
(x, a_j, z) -> (1/x, hbar/a_{n+1-j}, q^n/z), which preserves TX and
swaps the two stability conditions.  Its fixed points sit at
x_i = a_{nu_i}/hbar, and it has the same x- and z-automorphy as chamber +.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace
from typing import NamedTuple, Sequence

import numpy as np

from .errors import NearDiagonal, Resonance
from .model import Chamber, FixedPoint, Monomial, Params, c_sigma, in_q_lattice
from .qseries import theta, theta_from_gap
from .summation import csum_arrays

MAX_K = 6
NEAR_DIAGONAL_TOL = 1e-8


def weyl_vector(k: int) -> tuple[int, ...]:
    """2rho = (k-1, k-3, ..., 1-k)."""
    return tuple(k + 1 - 2 * r for r in range(1, k + 1))


@dataclass(frozen=True)
class StabSpec:
    mu: FixedPoint
    chamber: Chamber
    params: Params

    def __post_init__(self):
        object.__setattr__(self, "mu", FixedPoint.parse(self.mu))
        object.__setattr__(self, "chamber", Chamber.parse(self.chamber))
        self.mu.check(self.params.k, self.params.n)
        if self.params.k > MAX_K:
            raise ValueError(f"explicit symmetrization supports k <= {MAX_K}")

    def with_params(self, p: Params) -> "StabSpec":
        return replace(self, params=p)


def mirror_params(p: Params) -> Params:
    """Parameters seen by the chamber + formula after the stability-swapping involution."""
    a_t = tuple(p.hbar / p.a[p.n - 1 - j] for j in range(p.n))
    return replace(p, a=a_t, z=p.q ** p.n / p.z)


def mirror_mu(mu: FixedPoint, n: int) -> FixedPoint:
    return FixedPoint(tuple(sorted(n + 1 - m for m in mu.mu)))


def f_building_block(m: int, x, z_eff: complex, p: Params):
    """theta(c_m x/(z a_m))/theta(c_m/z) * prod_{i<m} theta(x/a_i) * prod_{i>m} theta(hbar x/a_i)."""
    if not 1 <= m <= p.n:
        raise ValueError(f"m={m} outside 1..{p.n}")
    c = p.c_m(m)
    if in_q_lattice(c / z_eff, p.q) is not None:
        raise Resonance(f"theta(c_{m}/z) vanishes: z = {z_eff} is resonant")
    x = np.asarray(x, dtype=complex)
    val = np.asarray(theta(c * x / (z_eff * p.a[m - 1]), p)) / theta(c / z_eff, p)
    for i in range(1, p.n + 1):
        if i < m:
            val = val * np.asarray(theta(x / p.a[i - 1], p))
        elif i > m:
            val = val * np.asarray(theta(p.hbar * x / p.a[i - 1], p))
    return complex(val) if val.ndim == 0 else val


def _check_near_diagonal(x: Sequence[np.ndarray], q: complex, tol: float = NEAR_DIAGONAL_TOL):
    lq = math.log(abs(q))
    for i, j in itertools.combinations(range(len(x)), 2):
        r = np.asarray(x[i] / x[j])
        m0 = np.rint(np.log(np.abs(r)) / lq)
        for shift in (-1, 0, 1):
            m = m0 + shift
            if np.any(np.abs(r * q ** (-m) - 1) < tol):
                raise NearDiagonal(f"x_{i + 1}/x_{j + 1} is within {tol} of q^Z")


def _plus_terms(mu: FixedPoint, x: Sequence, z: complex, p: Params, inverted: bool = False) -> list:
    """The k! permutation terms of the chamber + envelope, in lexicographic order.

    With ``inverted`` the formula is evaluated at 1/x.  The vanishing factor of
    each theta(x_i/x_j) denominator is formed from x_i - x_j directly, which
    keeps the near-diagonal cancellation between permutation terms accurate.
    """
    k = len(mu.mu)
    raw = [np.asarray(v, dtype=complex) for v in x]
    if len(raw) != k:
        raise ValueError(f"expected {k} x-values, got {len(raw)}")
    if k > 1:
        _check_near_diagonal(raw, p.q)
    x = [1 / v for v in raw] if inverted else raw
    two_rho = weyl_vector(k)
    slot_mu = mu.mu[::-1]
    F = [[f_building_block(slot_mu[r], x[i], z * p.hbar ** two_rho[r], p) for i in range(k)] for r in range(k)]
    R = {}
    for i, j in itertools.permutations(range(k), 2):
        # 1 - x_j/x_i in the evaluation variables, from a difference of the inputs
        gap = (raw[j] - raw[i]) / raw[j] if inverted else (raw[i] - raw[j]) / raw[i]
        R[i, j] = np.asarray(theta(p.hbar * x[i] / x[j], p)) / np.asarray(theta_from_gap(x[i] / x[j], gap, p))
    terms = []
    for tau in itertools.permutations(range(k)):
        t = np.ones(np.broadcast(*x).shape, dtype=complex)
        for i, j in itertools.permutations(range(k), 2):
            if tau[i] < tau[j]:
                t = t * R[i, j]
        for i in range(k):
            t = t * F[tau[i]][i]
        terms.append(t)
    return terms


def stab_terms(s: StabSpec, x: Sequence) -> list:
    """Per-permutation summands of the envelope (mirrored variables for chamber -)."""
    p = s.params
    if s.chamber is Chamber.PLUS:
        return _plus_terms(s.mu, x, p.z, p)
    pm = mirror_params(p)
    return _plus_terms(mirror_mu(s.mu, p.n), x, pm.z, pm, inverted=True)


def stab_envelope(s: StabSpec, x: Sequence):
    """Evaluate the stable envelope at the k-vector x (entries may be arrays)."""
    total = csum_arrays(stab_terms(s, x))
    return complex(total) if total.ndim == 0 else total


def fixed_point_coords(nu: FixedPoint, chamber: Chamber, p: Params) -> list[complex]:
    """Chern roots at the fixed point nu: a_nu for chamber +, a_nu/hbar for chamber -."""
    nu = FixedPoint.parse(nu).check(p.k, p.n)
    shift = 1 if Chamber.parse(chamber) is Chamber.PLUS else 1 / p.hbar
    return [p.a[j - 1] * shift for j in nu.mu]


def stab_restrict(s: StabSpec, nu: FixedPoint) -> complex:
    return stab_envelope(s, fixed_point_coords(nu, s.chamber, s.params))


def z_quasi_periodicity_factor(s: StabSpec) -> Monomial:
    """Monomial m with envelope(x, qz) = m(x) * envelope(x, z)."""
    p = s.params
    e_a = tuple(-1 if j in s.mu.mu else 0 for j in range(1, p.n + 1))
    e_hbar = 2 * p.k if s.chamber is Chamber.MINUS else 0
    return Monomial(0, e_hbar, e_a, (1,) * p.k)


def x_automorphy_factor(s: StabSpec, l: int, x: Sequence) -> complex:
    """Expected ratio envelope(sigma_l(q) x)/envelope(x) = c_sigma_l(x) * z."""
    return c_sigma(l, s.params, x) * s.params.z


def shift_coordinate(x: Sequence, l: int, factor: complex) -> list:
    out = list(x)
    out[l - 1] = out[l - 1] * factor
    return out


class WheelResult(NamedTuple):
    max_abs: float
    scale: float

    @property
    def relative(self) -> float:
        if self.max_abs == 0:
            return 0.0
        return self.max_abs / self.scale if self.scale > 0 else math.inf


def _free_point(rng: np.random.Generator) -> complex:
    return complex(np.exp(rng.uniform(-0.3, 0.3) + 1j * rng.uniform(0, 2 * np.pi)))


def wheel_check(s: StabSpec, l: int, samples: int = 16, seed: int = 0,
                slots: tuple[int, int] = (1, 2)) -> WheelResult:
    """Max |envelope| on the wheel locus x_a = a_l q^m1, x_b = a_l hbar^{-1} q^m2.

    ``scale`` is the max modulus at the same points with both special
    coordinates moved off the locus by fixed generic factors.
    """
    p = s.params
    if p.k < 2:
        raise ValueError("wheel condition needs k >= 2")
    i1, i2 = slots[0] - 1, slots[1] - 1
    rng = np.random.default_rng(seed)
    max_abs = 0.0
    scale = 0.0
    for _ in range(samples):
        m1, m2 = (int(v) for v in rng.integers(-1, 2, size=2))
        x = [_free_point(rng) for _ in range(p.k)]
        x[i1] = p.a[l - 1] * p.q ** m1
        x[i2] = p.a[l - 1] / p.hbar * p.q ** m2
        max_abs = max(max_abs, abs(stab_envelope(s, x)))
        x[i1] = x[i1] * complex(np.exp(-0.23 + 1.41j))
        x[i2] = x[i2] * complex(np.exp(0.37 + 0.61j))
        scale = max(scale, abs(stab_envelope(s, x)))
    return WheelResult(max_abs, scale)


def diagonal_regularity(s: StabSpec, x: Sequence, i: int = 1, j: int = 2,
                        eps: Sequence[float] = (1e-3, 1e-4, 1e-5)) -> dict:
    """Evaluate with x_j = x_i (1 + eps) and report successive-difference ratios."""
    vals = []
    for e in eps:
        y = list(x)
        y[j - 1] = y[i - 1] * (1 + e)
        vals.append(stab_envelope(s, y))
    diffs = [abs(vals[t] - vals[t + 1]) for t in range(len(vals) - 1)]
    ratios = [diffs[t] / diffs[t + 1] for t in range(len(diffs) - 1) if diffs[t + 1] > 0]
    return {"values": vals, "differences": diffs, "ratios": ratios}
