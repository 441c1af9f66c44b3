"""Polynomial, Laurent and elliptic interpolation through n nodes."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import Resonance
from .model import Params, complex_from_json, in_q_lattice
from .qseries import theta

RESONANCE_WINDOW = 64
RESONANCE_TOL = 1e-10


@dataclass(frozen=True)
class NodeData:
    nodes: tuple[complex, ...]
    values: tuple[complex, ...]

    def __post_init__(self):
        nodes = tuple(complex(v) for v in self.nodes)
        values = tuple(complex(v) for v in self.values)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "values", values)
        if not nodes or len(nodes) != len(values):
            raise ValueError("NodeData needs equally many (>= 1) nodes and values")
        for u, v in itertools.combinations(nodes, 2):
            if abs(u - v) <= 1e-10 * max(abs(u), abs(v), 1e-300):
                raise ValueError(f"nodes {u} and {v} are not distinct")

    @property
    def n(self) -> int:
        return len(self.nodes)

    @classmethod
    def from_json(cls, d: dict) -> "NodeData":
        return cls(tuple(complex_from_json(v) for v in d["nodes"]),
                   tuple(complex_from_json(v) for v in d["values"]))


def lagrange_eval(d: NodeData, x):
    """Value at x of the unique polynomial of degree < n through the nodes."""
    x = np.asarray(x, dtype=complex)
    total = np.zeros(x.shape, dtype=complex)
    for i, (ai, fi) in enumerate(zip(d.nodes, d.values)):
        term = np.full(x.shape, fi, dtype=complex)
        for j, aj in enumerate(d.nodes):
            if j != i:
                term *= (x - aj) / (ai - aj)
        total += term
    return complex(total) if total.ndim == 0 else total


def trig_interp_eval(d: NodeData, L: int, x):
    """Laurent interpolant supported on exponents [L, L + n - 1]."""
    if any(a == 0 for a in d.nodes):
        raise ValueError("Laurent interpolation needs nonzero nodes")
    x = np.asarray(x, dtype=complex)
    total = np.zeros(x.shape, dtype=complex)
    for i, (ai, fi) in enumerate(zip(d.nodes, d.values)):
        term = fi * (x / ai) ** L
        for j, aj in enumerate(d.nodes):
            if j != i:
                term = term * (1 - x / aj) / (1 - ai / aj)
        total = total + term
    return complex(total) if total.ndim == 0 else total


def newton_window(d: NodeData, L: int) -> dict:
    """Recover the Laurent coefficients by a DFT on roots of unity and report the support."""
    M = 4 * (abs(L) + d.n)
    roots = np.exp(2j * np.pi * np.arange(M) / M)
    samples = np.asarray(trig_interp_eval(d, L, roots))
    coeffs = np.fft.fft(samples) / M  # coeffs[m] multiplies x^{m mod M}
    exps = np.arange(M)
    exps = np.where(exps >= M // 2, exps - M, exps)
    inside = (exps >= L) & (exps <= L + d.n - 1)
    max_in = float(np.max(np.abs(coeffs[inside])))
    max_out = float(np.max(np.abs(coeffs[~inside]))) if (~inside).any() else 0.0
    return {
        "window": [L, L + d.n - 1],
        "max_in_window": max_in,
        "max_out_of_window": max_out,
        "relative_leak": max_out / max_in if max_in > 0 else (0.0 if max_out == 0 else math.inf),
        "coefficients": {int(e): [float(c.real), float(c.imag)] for e, c, ok in zip(exps, coeffs, inside) if ok},
    }


def resonance_check(d: NodeData, z: complex, p: Params) -> list[dict]:
    """Flags for z in q^Z and for node pairs with a_i/a_j in q^Z."""
    flags = []
    m = in_q_lattice(z, p.q, RESONANCE_WINDOW, RESONANCE_TOL)
    if m is not None:
        flags.append({"kind": "z", "power": m})
    for i, j in itertools.combinations(range(d.n), 2):
        m = in_q_lattice(d.nodes[i] / d.nodes[j], p.q, RESONANCE_WINDOW, RESONANCE_TOL)
        if m is not None:
            flags.append({"kind": "pair", "pair": (i + 1, j + 1), "power": m})
    return flags


def elliptic_interp_eval(d: NodeData, z: complex, x, p: Params):
    """Section of the degree-n line bundle twisted by z through the nodes."""
    flags = resonance_check(d, z, p)
    if flags:
        raise Resonance(f"elliptic interpolation is resonant: {flags}")
    tz = theta(z, p)
    x = np.asarray(x, dtype=complex)
    total = np.zeros(x.shape, dtype=complex)
    for i, (ai, fi) in enumerate(zip(d.nodes, d.values)):
        term = fi * np.asarray(theta(z * x / ai, p)) / tz
        for j, aj in enumerate(d.nodes):
            if j != i:
                term = term * np.asarray(theta(x / aj, p)) / theta(ai / aj, p)
        total = total + term
    return complex(total) if total.ndim == 0 else total


def elliptic_automorphy_factor(d: NodeData, z: complex, x: complex, p: Params) -> complex:
    """(-1)^n q^{-n} z^{-1} x^{-n} prod a_j, the ratio f_z(qx)/f_z(x)."""
    n = d.n
    return (-1) ** n * p.q ** (-n) / z * x ** (-n) * math.prod(d.nodes)
