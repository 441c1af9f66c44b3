"""Parameter point, weight bookkeeping and automorphy constants for T*Gr(k, n).

Conventions: ``x`` is the k-vector of Chern roots of V (torus of GL(k)),
``a`` the n equivariant parameters of W, ``hbar`` the symplectic weight and
``hbar_sqrt`` a fixed square root of it.  Half-integer powers of hbar are
always taken as integer powers of ``hbar_sqrt``.
"""
from __future__ import annotations

import cmath
import enum
import itertools
import math
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, ResonantParams

GENERICITY_WINDOW = 64
RESONANCE_TOL = 1e-10


def _finite_pair(v) -> list[float]:
    c = complex(v)
    if not (math.isfinite(c.real) and math.isfinite(c.imag)):
        raise DomainError(f"non-finite complex value {c!r}")
    return [c.real, c.imag]


def complex_from_json(v) -> complex:
    """Decode ``[re, im]`` (or a bare real number) into a complex."""
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise DomainError(f"complex numbers are 2-arrays, got {v!r}")
        c = complex(float(v[0]), float(v[1]))
    elif isinstance(v, (int, float)):
        c = complex(float(v), 0.0)
    else:
        raise DomainError(f"cannot read a complex number from {v!r}")
    if not (math.isfinite(c.real) and math.isfinite(c.imag)):
        raise DomainError(f"non-finite complex value {v!r}")
    return c


def complex_to_json(c) -> list[float]:
    return _finite_pair(c)


def in_q_lattice(w: complex, q: complex, window: int = GENERICITY_WINDOW, tol: float = RESONANCE_TOL) -> int | None:
    """Return m with |w q^{-m} - 1| < tol for |m| <= window, else None."""
    w = complex(w)
    if w == 0:
        return None
    m0 = round(math.log(abs(w)) / math.log(abs(q)))
    for m in (m0 - 1, m0, m0 + 1):
        if abs(m) <= window and abs(w * q ** (-m) - 1) < tol:
            return m
    return None


class Chamber(enum.Enum):
    """Stability parameter: det^{+1} (A surjective) or det^{-1} (B injective)."""

    PLUS = "+"
    MINUS = "-"

    @classmethod
    def parse(cls, s) -> "Chamber":
        if isinstance(s, Chamber):
            return s
        s = str(s).strip().lower()
        if s in ("+", "plus", "p"):
            return cls.PLUS
        if s in ("-", "minus", "m"):
            return cls.MINUS
        raise ValueError(f"unknown chamber {s!r}")


@dataclass(frozen=True)
class FixedPoint:
    """A strictly increasing k-subset of {1..n}; a torus-fixed point of T*Gr(k,n)."""

    mu: tuple[int, ...]

    def __post_init__(self):
        mu = tuple(int(m) for m in self.mu)
        object.__setattr__(self, "mu", mu)
        if not mu:
            raise ValueError("fixed point needs k >= 1 entries")
        if mu[0] < 1 or any(b <= a for a, b in zip(mu, mu[1:])):
            raise ValueError(f"fixed point {mu} must be strictly increasing and >= 1")

    def check(self, k: int, n: int) -> "FixedPoint":
        if len(self.mu) != k or self.mu[-1] > n:
            raise ValueError(f"fixed point {self.mu} is not a {k}-subset of 1..{n}")
        return self

    @classmethod
    def parse(cls, s) -> "FixedPoint":
        if isinstance(s, FixedPoint):
            return s
        if isinstance(s, str):
            return cls(tuple(int(t) for t in s.replace(" ", "").split(",") if t))
        return cls(tuple(s))

    def __str__(self):
        return ",".join(map(str, self.mu))


def fixed_points(k: int, n: int) -> list[FixedPoint]:
    """All fixed points in lexicographic order."""
    return [FixedPoint(c) for c in itertools.combinations(range(1, n + 1), k)]


@dataclass(frozen=True)
class Params:
    q: complex
    hbar: complex
    hbar_sqrt: complex
    a: tuple[complex, ...]
    z: complex
    k: int
    n: int
    genericity_window: int = field(default=GENERICITY_WINDOW, compare=False)

    def __post_init__(self):
        for name in ("q", "hbar", "hbar_sqrt", "z"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        object.__setattr__(self, "a", tuple(complex(v) for v in self.a))
        object.__setattr__(self, "k", int(self.k))
        object.__setattr__(self, "n", int(self.n))

    @property
    def a_array(self) -> np.ndarray:
        return np.array(self.a, dtype=complex)

    def with_z(self, z: complex) -> "Params":
        return replace(self, z=complex(z))

    def hbar_pow_half(self, e: int) -> complex:
        """hbar^{e/2}, computed from the stored square root."""
        return self.hbar_sqrt ** e

    def c_m(self, m: int) -> complex:
        """(-1)^n hbar^{m - n/2}."""
        return (-1) ** self.n * self.hbar_sqrt ** (2 * m - self.n)

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "n": self.n,
            "q": complex_to_json(self.q),
            "hbar": complex_to_json(self.hbar),
            "hbar_sqrt": complex_to_json(self.hbar_sqrt),
            "a": [complex_to_json(v) for v in self.a],
            "z": complex_to_json(self.z),
        }

    @classmethod
    def from_json(cls, d: dict) -> "Params":
        try:
            k, n = int(d["k"]), int(d["n"])
            q = complex_from_json(d["q"])
            hbar = complex_from_json(d["hbar"])
            hs = d.get("hbar_sqrt")
            hbar_sqrt = complex_from_json(hs) if hs is not None else cmath.sqrt(hbar)
            a = tuple(complex_from_json(v) for v in d["a"])
            z = complex_from_json(d["z"])
        except KeyError as exc:
            raise DomainError(f"params JSON is missing key {exc.args[0]!r}") from None
        return cls(q=q, hbar=hbar, hbar_sqrt=hbar_sqrt, a=a, z=z, k=k, n=n)


def validate_params(p: Params) -> Params:
    """Check the convergence inequalities, the square root, genericity and z-resonance."""
    if not (p.n >= 1 and 1 <= p.k <= p.n):
        raise DomainError(f"need 1 <= k <= n, got k={p.k}, n={p.n}")
    if len(p.a) != p.n:
        raise DomainError(f"expected {p.n} equivariant parameters, got {len(p.a)}")
    if not abs(p.q) > 0:
        raise DomainError("q must be nonzero")
    if not abs(p.q) < abs(p.hbar):
        raise DomainError(f"|q| < |hbar| violated: |q|={abs(p.q):.6g}, |hbar|={abs(p.hbar):.6g}")
    for j, aj in enumerate(p.a, 1):
        if not abs(p.hbar) < abs(aj):
            raise DomainError(f"|hbar| < |a_{j}| violated: |hbar|={abs(p.hbar):.6g}, |a_{j}|={abs(aj):.6g}")
        if not abs(aj) < 1:
            raise DomainError(f"|a_{j}| < 1 violated: |a_{j}|={abs(aj):.6g}")
    if abs(p.hbar_sqrt ** 2 - p.hbar) > 1e-14 * abs(p.hbar):
        raise DomainError("hbar_sqrt**2 does not equal hbar to relative 1e-14")
    w = p.genericity_window
    for i, j in itertools.permutations(range(p.n), 2):
        r = p.a[i] / p.a[j]
        for label, shift in (("1", 1.0), ("hbar", p.hbar), ("hbar^-1", 1 / p.hbar)):
            if in_q_lattice(r / shift, p.q, window=w) is not None:
                raise ResonantParams(f"a_{i + 1}/a_{j + 1} lies in q^Z * {label} (non-generic)")
    if p.z == 0:
        raise DomainError("z must be nonzero")
    for m in range(1, p.n + 1):
        hit = in_q_lattice(p.z / p.c_m(m), p.q, window=w)
        if hit is not None:
            raise ResonantParams(f"resonance: z = c_{m} * q^{hit}")
    return p


@dataclass(frozen=True)
class Monomial:
    """q^e_q * hbar^{e_hbar/2} * prod a^e_a * prod x^e_x."""

    e_q: int
    e_hbar: int
    e_a: tuple[int, ...]
    e_x: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "e_a", tuple(int(e) for e in self.e_a))
        object.__setattr__(self, "e_x", tuple(int(e) for e in self.e_x))

    @classmethod
    def one(cls, k: int, n: int) -> "Monomial":
        return cls(0, 0, (0,) * n, (0,) * k)

    def __mul__(self, other: "Monomial") -> "Monomial":
        return Monomial(
            self.e_q + other.e_q,
            self.e_hbar + other.e_hbar,
            tuple(a + b for a, b in zip(self.e_a, other.e_a)),
            tuple(a + b for a, b in zip(self.e_x, other.e_x)),
        )

    def inverse(self) -> "Monomial":
        return Monomial(-self.e_q, -self.e_hbar, tuple(-e for e in self.e_a), tuple(-e for e in self.e_x))

    def permute_x(self, perm: Sequence[int]) -> "Monomial":
        return replace(self, e_x=tuple(self.e_x[i] for i in perm))

    def coefficient(self, p: Params) -> complex:
        """The x-independent part evaluated at p."""
        if len(self.e_a) != p.n:
            raise ValueError(f"monomial has {len(self.e_a)} a-exponents, params have n={p.n}")
        v = p.q ** self.e_q * p.hbar_sqrt ** self.e_hbar
        for aj, e in zip(p.a, self.e_a):
            if e:
                v *= aj ** e
        return v

    def evaluate(self, p: Params, x: Sequence = ()):
        """Evaluate at p and the k-vector x (entries may be numpy arrays)."""
        if len(x) != len(self.e_x):
            raise ValueError(f"monomial needs {len(self.e_x)} x-values, got {len(x)}")
        v = self.coefficient(p)
        for xi, e in zip(x, self.e_x):
            if e:
                v = v * np.asarray(xi, dtype=complex) ** e
        return v

    def __str__(self):
        parts = []
        if self.e_q:
            parts.append(f"q^{self.e_q}")
        if self.e_hbar:
            parts.append(f"hbar^({self.e_hbar}/2)")
        parts += [f"a{j + 1}^{e}" for j, e in enumerate(self.e_a) if e]
        parts += [f"x{i + 1}^{e}" for i, e in enumerate(self.e_x) if e]
        return "*".join(parts) or "1"


@dataclass(frozen=True)
class VirtualCharacter:
    """Signed multiset of monomials, kept in canonical (merged, sorted) form."""

    terms: tuple[tuple[Monomial, int], ...]

    def __post_init__(self):
        counts: Counter = Counter()
        for mono, mult in self.terms:
            counts[mono] += int(mult)
        canon = tuple(sorted(((m, c) for m, c in counts.items() if c),
                             key=lambda t: (t[0].e_q, t[0].e_hbar, t[0].e_a, t[0].e_x)))
        object.__setattr__(self, "terms", canon)

    @classmethod
    def from_terms(cls, terms: Iterable[tuple[Monomial, int]]) -> "VirtualCharacter":
        return cls(tuple(terms))

    def __add__(self, other: "VirtualCharacter") -> "VirtualCharacter":
        return VirtualCharacter(self.terms + other.terms)

    def __neg__(self) -> "VirtualCharacter":
        return VirtualCharacter(tuple((m, -c) for m, c in self.terms))

    def dual(self) -> "VirtualCharacter":
        return VirtualCharacter(tuple((m.inverse(), c) for m, c in self.terms))

    def times(self, mono: Monomial) -> "VirtualCharacter":
        return VirtualCharacter(tuple((m * mono, c) for m, c in self.terms))

    def rank(self) -> int:
        return sum(c for _, c in self.terms)

    def as_counter(self) -> Counter:
        return Counter(dict(self.terms))


def _mono(k, n, *, e_q=0, e_hbar=0, a=None, x=None) -> Monomial:
    e_a = [0] * n
    e_x = [0] * k
    for j, e in (a or {}).items():
        e_a[j] += e
    for i, e in (x or {}).items():
        e_x[i] += e
    return Monomial(e_q, e_hbar, tuple(e_a), tuple(e_x))


def tangent_blocks(k: int, n: int) -> dict[str, list[tuple[Monomial, int]]]:
    """The four blocks of TX - g + g_hbar before any cancellation (any k, n >= 1)."""
    if k < 1 or n < 1:
        raise ValueError(f"need k, n >= 1, got k={k}, n={n}")
    hom_wv = [(_mono(k, n, a={j: -1}, x={i: 1}), 1) for i in range(k) for j in range(n)]
    hom_vw = [(_mono(k, n, e_hbar=-2, a={j: 1}, x={i: -1}), 1) for i in range(k) for j in range(n)]
    gauge = [(_mono(k, n, x={i: 1, j: -1} if i != j else {}), -1) for i in range(k) for j in range(k)]
    pfield = [(_mono(k, n, e_hbar=2, x={i: 1, j: -1} if i != j else {}), 1) for i in range(k) for j in range(k)]
    return {"hom_wv": hom_wv, "hom_vw": hom_vw, "gauge": gauge, "pfield": pfield}


def tangent_character(k: int, n: int) -> VirtualCharacter:
    """TX - g + g_hbar = sum x_i/a_j + sum a_j/(hbar x_i) - sum x_i/x_j + hbar sum x_i/x_j."""
    blocks = tangent_blocks(k, n)
    return VirtualCharacter(tuple(itertools.chain.from_iterable(blocks.values())))


def polarization_form(xi: Sequence[int], alpha: Sequence[int]) -> int:
    """sum_{i,j} (xi_i - alpha_j)^2, the quadratic form of T^{1/2} = Hom(W, V)."""
    return sum((int(s) - int(t)) ** 2 for s in xi for t in alpha)


def _cocharacter(l: int, k: int) -> tuple[int, ...]:
    if not 1 <= l <= k:
        raise ValueError(f"l={l} outside 1..{k}")
    return tuple(1 if i == l - 1 else 0 for i in range(k))


def sigma_dual_general(xi: Sequence[int], k: int, n: int) -> Monomial:
    """sigma^vee for the cocharacter q^xi of the gauge torus: prod_{i,j} (x_i/a_j)^{xi_i}."""
    xi = tuple(int(v) for v in xi)
    if len(xi) != k or n < 1:
        raise ValueError("cocharacter length must equal k and n >= 1")
    return Monomial(0, 0, (-sum(xi),) * n, tuple(n * v for v in xi))


def sigma_dual(l: int, p: Params) -> Monomial:
    """x_l^n / prod a_i."""
    return sigma_dual_general(_cocharacter(l, p.k), p.k, p.n)


def automorphy_exponents(xi: Sequence[int], k: int, n: int) -> tuple[int, int]:
    """(beta_1, 2*beta_2) for the polarization Hom(W, V); beta_2 may be half-integral."""
    beta1 = n * sum(int(v) for v in xi)
    two_beta2 = polarization_form(xi, (0,) * n)
    return beta1, two_beta2


def c_sigma_general(xi: Sequence[int], p: Params, x: Sequence) -> complex:
    """c_sigma = 1 / (q^{beta_2} (hbar^{1/2} q^{1/2})^{beta_1} sigma^vee(x))."""
    beta1, two_beta2 = automorphy_exponents(xi, p.k, p.n)
    two_eq = two_beta2 + beta1
    if two_eq % 2 == 0:
        qpow = p.q ** (two_eq // 2)
    else:
        qpow = cmath.sqrt(p.q) ** two_eq
    inv = qpow * p.hbar_sqrt ** beta1 * sigma_dual_general(xi, p.k, p.n).evaluate(p, x)
    return 1 / inv


def c_sigma(l: int, p: Params, x: Sequence) -> complex:
    """Automorphy constant of the elementary cocharacter sigma_l, evaluated at x."""
    return c_sigma_general(_cocharacter(l, p.k), p, x)
