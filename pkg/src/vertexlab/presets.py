"""Named parameter points used by the self-test, the examples and the test-suite."""
from __future__ import annotations

import cmath

import numpy as np

from .model import Params, validate_params

# (|a|, |hbar|/|a|, |q|/|hbar|) for the residue-vs-quadrature comparison at N = 96.
# |a|^N, (|hbar|/|a|)^N and (|q|/|hbar|)^N bound the trapezoidal aliasing, while
# the degree-D truncation shrinks as |hbar| and |q| grow; these points balance the two.
_ORACLE_MODULI = {
    (1, 1): (0.79, 0.78, 0.5),
    (1, 2): (0.79, 0.78, 0.5),
    (2, 3): (0.80, 0.76, 0.8),
}
_DEFAULT_MODULI = (0.8, 0.76, 0.8)


def oracle_params(k: int, n: int, z: complex) -> Params:
    """Admissible parameters tuned for agreement of series and quadrature."""
    A, ha, qh = _ORACLE_MODULI.get((k, n), _DEFAULT_MODULI)
    H = A * ha
    Q = H * qh
    hbar = H * cmath.exp(0.7j)
    a = tuple(A * (1 + 0.01 * (j - (n - 1) / 2)) * cmath.exp(1j * (1.1 + 2.3 * j)) for j in range(n))
    return validate_params(Params(Q * cmath.exp(0.3j), hbar, cmath.sqrt(hbar), a, complex(z), k, n))


def random_params(k: int, n: int, rng: np.random.Generator, z: complex | None = None) -> Params:
    """A seeded random admissible point with well separated moduli."""
    while True:
        A = rng.uniform(0.75, 0.9)
        H = A * rng.uniform(0.6, 0.85)
        Q = H * rng.uniform(0.4, 0.8)
        hbar = H * cmath.exp(1j * rng.uniform(-np.pi, np.pi))
        a = tuple(A * rng.uniform(0.95, 1.0) * cmath.exp(1j * rng.uniform(-np.pi, np.pi)) for _ in range(n))
        zz = z if z is not None else rng.uniform(0.2, 3.0) * cmath.exp(1j * rng.uniform(-np.pi, np.pi))
        p = Params(Q * cmath.exp(1j * rng.uniform(-np.pi, np.pi)), hbar, cmath.sqrt(hbar), a, zz, k, n)
        try:
            return validate_params(p)
        except ValueError:
            continue
