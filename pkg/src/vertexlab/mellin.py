"""Vertex functions with descendents as Mellin-Barnes integrals over the k-torus.

The integrand is rho * envelope * Phi with the invariant measure
prod dx_i / (2 pi i x_i) and an overall 1/k!.  Two routes evaluate it:

* ``vertex_series``: residues at x_i = q^{d_i} a_{eta_i} (chamber +, |z|
  small) or x_i = q^{-d_i} a_{eta_i}/hbar (chamber -, |z| large), grouped
  by total degree sum(d_i).
* ``quadrature_oracle``: the product trapezoidal rule on |x_i| = 1.

At a pole (1 - p/x) of a phi-factor the measure dx/(2 pi i x) cancels the
derivative of the pole factor, so a residue is the integrand with that
single factor of phi replaced by ``phi_skip``.
"""
from __future__ import annotations

import itertools
import math
import re
import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ConvergenceWarning, NonSimplePole, PoleHit
from .model import Chamber, Monomial, Params, VirtualCharacter, tangent_blocks, tangent_character
from .qseries import phi, phi_circle, phi_skip, phi_virtual
from .stab import StabSpec, stab_envelope
from .summation import csum, csum_flat, ordered_map

Z_MAX = 0.05
DEFAULT_N = 64
COLLISION_TOL = 1e-10


# -- descendents -------------------------------------------------------------


@dataclass(frozen=True)
class Descendent:
    """Symmetric Laurent polynomial in x with monomial coefficients in (q, hbar^{1/2}, a)."""

    terms: tuple[tuple[Monomial, complex], ...]
    k: int
    n: int

    def __post_init__(self):
        merged: dict[Monomial, complex] = {}
        for mono, c in self.terms:
            if len(mono.e_x) != self.k or len(mono.e_a) != self.n:
                raise ValueError("descendent monomial has the wrong shape")
            merged[mono] = merged.get(mono, 0) + complex(c)
        canon = tuple(sorted(((m, c) for m, c in merged.items() if c != 0),
                             key=lambda t: (t[0].e_x, t[0].e_q, t[0].e_hbar, t[0].e_a)))
        object.__setattr__(self, "terms", canon)
        base = dict(canon)
        for perm in itertools.permutations(range(self.k)):
            moved = {m.permute_x(perm): c for m, c in canon}
            if moved != base:
                raise ValueError("descendent is not symmetric in x")

    @classmethod
    def one(cls, k: int, n: int) -> "Descendent":
        return cls(((Monomial.one(k, n), 1.0),), k, n)

    @classmethod
    def zero(cls, k: int, n: int) -> "Descendent":
        return cls((), k, n)

    @classmethod
    def elementary(cls, r: int, k: int, n: int) -> "Descendent":
        terms = []
        for subset in itertools.combinations(range(k), r):
            e_x = tuple(1 if i in subset else 0 for i in range(k))
            terms.append((Monomial(0, 0, (0,) * n, e_x), 1.0))
        return cls(tuple(terms), k, n)

    @classmethod
    def power_sum(cls, r: int, k: int, n: int) -> "Descendent":
        terms = [(Monomial(0, 0, (0,) * n, tuple(r if i == j else 0 for i in range(k))), 1.0) for j in range(k)]
        return cls(tuple(terms), k, n)

    @classmethod
    def parse(cls, expr: str, k: int, n: int) -> "Descendent":
        """Products of factors ``1``, ``e<r>``, ``p<r>``, each optionally ``^<m>``, e.g. ``e1^2*e2``."""
        out = cls.one(k, n)
        for factor in expr.replace(" ", "").split("*"):
            m = re.fullmatch(r"(1|[ep]\d+)(?:\^(\d+))?", factor)
            if not m:
                raise ValueError(f"cannot parse descendent factor {factor!r}")
            base, power = m.group(1), int(m.group(2) or 1)
            if base == "1":
                continue
            r = int(base[1:])
            f = cls.elementary(r, k, n) if base[0] == "e" else cls.power_sum(r, k, n)
            for _ in range(power):
                out = out * f
        return out

    def __mul__(self, other: "Descendent") -> "Descendent":
        return Descendent(tuple((m1 * m2, c1 * c2) for m1, c1 in self.terms for m2, c2 in other.terms), self.k, self.n)

    def __add__(self, other: "Descendent") -> "Descendent":
        return Descendent(self.terms + other.terms, self.k, self.n)

    def scale(self, c: complex) -> "Descendent":
        return Descendent(tuple((m, c * v) for m, v in self.terms), self.k, self.n)

    def evaluate(self, p: Params, x: Sequence):
        shape = np.broadcast(*[np.asarray(v) for v in x]).shape if x else ()
        total = np.zeros(shape, dtype=complex)
        for mono, c in self.terms:
            total = total + c * mono.evaluate(p, x)
        return complex(total) if total.ndim == 0 else total


# -- Gamma functions and Phi ---------------------------------------------------


def _q_mono(k, n):
    return Monomial(1, 0, (0,) * n, (0,) * k)


def gamma_prime(x: Sequence, p: Params):
    """phi(-q (TX - g + g_hbar)^vee), assembled from the tangent character."""
    if len(x) == 0:
        return 1.0 + 0j
    V = -(tangent_character(p.k, p.n).dual().times(_q_mono(p.k, p.n)))
    return phi_virtual(V, x, p)


def gamma_prime_literal(x: Sequence, p: Params):
    """The same product written out factor by factor."""
    x = [np.asarray(v, dtype=complex) for v in x]
    val = 1.0 + 0j
    q, hb = p.q, p.hbar
    for xi in x:
        for aj in p.a:
            val = val / (np.asarray(phi(q * aj / xi, p)) * np.asarray(phi(q * hb * xi / aj, p)))
    for xi in x:
        for xj in x:
            val = val * np.asarray(phi(q * xj / xi, p)) / np.asarray(phi(q * xj / (hb * xi), p))
    return val if np.ndim(val) else complex(val)


def gamma_infty(x: Sequence, p: Params):
    """phi(-q T^vee X + q g^vee - g_hbar^vee): p-fields unconstrained at the origin."""
    if len(x) == 0:
        return 1.0 + 0j
    blocks = tangent_blocks(p.k, p.n)
    qm = _q_mono(p.k, p.n)
    tx = VirtualCharacter(tuple(blocks["hom_wv"] + blocks["hom_vw"]))
    g = -VirtualCharacter(tuple(blocks["gauge"]))
    g_hbar = VirtualCharacter(tuple(blocks["pfield"]))
    V = -(tx.dual().times(qm)) + g.dual().times(qm) + -(g_hbar.dual())
    return phi_virtual(V, x, p)


def phi_a(x: Sequence, p: Params, skip: dict | None = None):
    """prod_{i,j} 1/(phi(a_j/x_i) phi(hbar x_i/a_j)), honouring residue skips."""
    skip = skip or {}
    val = 1.0 + 0j
    for i, xi in enumerate(x):
        xi = np.asarray(xi, dtype=complex)
        for j, aj in enumerate(p.a):
            left = ("a_left", i, j)
            right = ("a_right", i, j)
            dl = phi_skip(aj / xi, skip[left], p) if left in skip else phi(aj / xi, p)
            dr = phi_skip(p.hbar * xi / aj, skip[right], p) if right in skip else phi(p.hbar * xi / aj, p)
            val = val / (np.asarray(dl) * np.asarray(dr))
    return val


def phi_xi(x: Sequence, p: Params, skip: dict | None = None):
    """prod_{i != j} phi°(x_j/x_i)/phi(q x_j/(hbar x_i)), honouring residue skips."""
    skip = skip or {}
    val = 1.0 + 0j
    for i, j in itertools.permutations(range(len(x)), 2):
        xi = np.asarray(x[i], dtype=complex)
        xj = np.asarray(x[j], dtype=complex)
        key = ("xi", i, j)
        arg = p.q * xj / (p.hbar * xi)
        den = phi_skip(arg, skip[key], p) if key in skip else phi(arg, p)
        val = val * np.asarray(phi_circle(xj / xi, p)) / np.asarray(den)
    return val


def phi_diagonal(p: Params) -> complex:
    """(phi(q)/phi(q/hbar))^k, the x-independent diagonal block."""
    return (phi(p.q, p) / phi(p.q / p.hbar, p)) ** p.k


def big_phi(x: Sequence, p: Params, skip: dict | None = None):
    """Gamma' with the contribution of the structure sheaf of [X/G] added."""
    val = phi_diagonal(p) * phi_a(x, p, skip) * phi_xi(x, p, skip)
    if np.any(~np.isfinite(np.asarray(val))):
        raise PoleHit("Phi has a pole at the evaluation point")
    return val if np.ndim(val) else complex(val)


def integrand(rho: Descendent, s: StabSpec, x: Sequence):
    """rho(x) * envelope(x) * Phi(x), without the 1/k! and the measure."""
    p = s.params
    return rho.evaluate(p, x) * stab_envelope(s, x) * big_phi(x, p)


# -- poles -------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class PoleAssignment:
    """Pole x = {q^{d} hbar^{1-level} a_eta} (chamber +) as sorted (eta, level, d) triples.

    Restricted assignments (points of Y) have every level equal to 1 and
    pairwise distinct eta.  Higher levels form towers eta: level 1, 2, ...
    with strictly increasing d.
    """

    entries: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        ent = tuple(sorted((int(e), int(v), int(d)) for e, v, d in self.entries))
        object.__setattr__(self, "entries", ent)
        by_eta: dict[int, list[tuple[int, int]]] = {}
        for eta, lvl, d in ent:
            if d < 0 or eta < 1 or lvl < 1:
                raise ValueError(f"invalid pole entry {(eta, lvl, d)}")
            by_eta.setdefault(eta, []).append((lvl, d))
        for eta, tower in by_eta.items():
            if [lvl for lvl, _ in tower] != list(range(1, len(tower) + 1)):
                raise ValueError(f"tower at eta={eta} must have levels 1..v")
            ds = [d for _, d in tower]
            if any(b <= a for a, b in zip(ds, ds[1:])):
                raise ValueError(f"tower at eta={eta} needs strictly increasing degrees")

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, int]]) -> "PoleAssignment":
        pairs = list(pairs)
        etas = [e for e, _ in pairs]
        if len(set(etas)) != len(etas):
            raise ValueError("restricted assignments need distinct eta")
        return cls(tuple((e, 1, d) for e, d in pairs))

    @property
    def pairs(self) -> tuple[tuple[int, int], ...]:
        return tuple((e, d) for e, _, d in self.entries)

    @property
    def degree(self) -> int:
        return sum(d for _, _, d in self.entries)

    @property
    def is_restricted(self) -> bool:
        return all(lvl == 1 for _, lvl, _ in self.entries)


def _towers(v: int, budget: int):
    """Strictly increasing nonnegative sequences of length v with sum <= budget."""
    def rec(start, left, remaining):
        if left == 0:
            yield ()
            return
        d = start
        # smallest possible sum of the remaining left entries starting at d
        while left * d + left * (left - 1) // 2 <= remaining:
            for rest in rec(d + 1, left - 1, remaining - d):
                yield (d,) + rest
            d += 1
    yield from rec(0, v, budget)


def enumerate_poles(p: Params, D: int, restrict_to_Y: bool = True) -> list[PoleAssignment]:
    """All pole assignments of total degree <= D, in canonical order."""
    if D < 0:
        raise ValueError("D must be >= 0")
    k, n = p.k, p.n
    out = []
    if restrict_to_Y:
        for etas in itertools.combinations(range(1, n + 1), k):
            for ds in itertools.product(range(D + 1), repeat=k):
                if sum(ds) <= D:
                    out.append(PoleAssignment.from_pairs(zip(etas, ds)))
    else:
        for vs in itertools.product(range(k + 1), repeat=n):
            if sum(vs) != k:
                continue
            active = [(l + 1, v) for l, v in enumerate(vs) if v]

            def combine(idx, budget):
                if idx == len(active):
                    yield ()
                    return
                eta, v = active[idx]
                for tower in _towers(v, budget):
                    part = tuple((eta, lvl + 1, d) for lvl, d in enumerate(tower))
                    for rest in combine(idx + 1, budget - sum(tower)):
                        yield part + rest

            for entries in combine(0, D):
                out.append(PoleAssignment(entries))
    return sorted(set(out))


def pole_coordinates(pa: PoleAssignment, chamber: Chamber, p: Params) -> tuple[list[complex], dict]:
    """Coordinates of the pole and the phi-factors whose vanishing produces it."""
    chamber = Chamber.parse(chamber)
    x: list[complex] = []
    skip: dict = {}
    slot: dict[tuple[int, int], int] = {}
    for i, (eta, lvl, d) in enumerate(pa.entries):
        a = p.a[eta - 1]
        if chamber is Chamber.PLUS:
            x.append(p.q ** d * p.hbar ** (1 - lvl) * a)
        else:
            x.append(p.q ** (-d) * p.hbar ** (lvl - 2) * a)
        slot[eta, lvl] = i
        if lvl == 1:
            skip[("a_left" if chamber is Chamber.PLUS else "a_right", i, eta - 1)] = d
        else:
            prev = slot[eta, lvl - 1]
            d_prev = pa.entries[prev][2]
            m = d - d_prev - 1
            if chamber is Chamber.PLUS:
                skip[("xi", i, prev)] = m
            else:
                skip[("xi", prev, i)] = m
    return x, skip


def residue_at(rho: Descendent, s: StabSpec, pa: PoleAssignment) -> complex:
    """Iterated residue of the integrand at the pole ``pa``."""
    p = s.params
    if len(pa.entries) != p.k:
        raise ValueError(f"assignment has {len(pa.entries)} entries, expected k={p.k}")
    x, skip = pole_coordinates(pa, s.chamber, p)
    for i, j in itertools.combinations(range(len(x)), 2):
        if abs(x[i] - x[j]) < COLLISION_TOL * max(abs(x[i]), abs(x[j])):
            raise NonSimplePole(f"pole coordinates {i + 1} and {j + 1} collide")
    env = stab_envelope(s, x)
    if env == 0:
        return 0j
    val = rho.evaluate(p, x) * env * phi_diagonal(p) * phi_a(x, p, skip) * phi_xi(x, p, skip)
    return complex(val)


# -- series and oracle -------------------------------------------------------


@dataclass(frozen=True)
class DegreeLedger:
    contributions: tuple[complex, ...]
    z_point: complex
    truncation: int
    chamber: Chamber = Chamber.PLUS
    n_assignments: int = 0
    restricted: bool = True

    @property
    def total(self) -> complex:
        return csum(self.contributions)

    def decay_ratios(self) -> list[float]:
        c = self.contributions
        return [abs(c[i + 1]) / abs(c[i]) if abs(c[i]) > 0 else math.inf for i in range(len(c) - 1)]

    def partial_sums(self) -> list[complex]:
        return [csum(self.contributions[: i + 1]) for i in range(len(self.contributions))]


def convergence_parameter(s: StabSpec) -> float:
    """|z| for chamber +, |1/z| for chamber -."""
    z = s.params.z
    return abs(z) if s.chamber is Chamber.PLUS else abs(1 / z)


def vertex_series(rho: Descendent, s: StabSpec, D: int, *, restrict_to_Y: bool = True,
                  threads: int = 1, z_max: float = Z_MAX) -> DegreeLedger:
    """Residue expansion of the vertex integral, grouped by total degree."""
    if convergence_parameter(s) > z_max:
        warnings.warn(f"|z| outside the trusted disc (z_max={z_max}) for chamber {s.chamber.value}",
                      ConvergenceWarning, stacklevel=2)
    poles = enumerate_poles(s.params, D, restrict_to_Y)
    values = ordered_map(lambda pa: residue_at(rho, s, pa), poles, threads)
    grouped: list[list[complex]] = [[] for _ in range(D + 1)]
    for pa, v in zip(poles, values):
        grouped[pa.degree].append(v)
    ledger = DegreeLedger(tuple(csum(g) for g in grouped), s.params.z, D, s.chamber, len(poles), restrict_to_Y)
    c = ledger.contributions
    if D >= 1 and abs(c[D]) >= abs(c[D - 1]) and abs(c[D]) > 0:
        warnings.warn("degree ledger is not decaying at the truncation degree", ConvergenceWarning, stacklevel=2)
    return ledger


def torus_grid(k: int, N: int) -> list[np.ndarray]:
    """Per-variable circle nodes with phase offsets 2 pi i / (7k)."""
    base = 2 * np.pi * np.arange(N) / N
    return [np.exp(1j * (base + 2 * np.pi * i / (7 * k))) for i in range(1, k + 1)]


def _grid_chunks(k: int, N: int, rows_per_chunk: int) -> list[tuple[int, int]]:
    return [(r, min(r + rows_per_chunk, N)) for r in range(0, N, rows_per_chunk)]


def quadrature_oracle(rho: Descendent, s: StabSpec, N: int = DEFAULT_N, threads: int = 1) -> complex:
    """Product trapezoidal rule for (1/k!) * integral over the unit torus."""
    if N < 32:
        raise ValueError("quadrature needs N >= 32")
    k = s.params.k
    circles = torus_grid(k, N)
    rows = max(1, 20000 // (N ** (k - 1)))

    def chunk_sum(bounds):
        lo, hi = bounds
        grids = np.meshgrid(circles[0][lo:hi], *circles[1:], indexing="ij")
        return csum_flat(integrand(rho, s, grids))

    partial = ordered_map(chunk_sum, _grid_chunks(k, N, rows), threads)
    return csum(partial) / N ** k / math.factorial(k)


def contour_pole_margin(p: Params, N: int = DEFAULT_N) -> float:
    """Smallest |phi| among the denominator factors of Phi on the quadrature grid."""
    margin = math.inf
    for xi in torus_grid(p.k, N):
        for aj in p.a:
            margin = min(margin, float(np.min(np.abs(phi(aj / xi, p)))),
                         float(np.min(np.abs(phi(p.hbar * xi / aj, p)))))
    circles = torus_grid(p.k, N)
    for i, j in itertools.permutations(range(p.k), 2):
        xi, xj = np.meshgrid(circles[i], circles[j], indexing="ij")
        margin = min(margin, float(np.min(np.abs(phi(p.q * xj / (p.hbar * xi), p)))))
    return margin
