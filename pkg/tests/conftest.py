import cmath

import numpy as np
import pytest
from hypothesis import assume, settings
from hypothesis import strategies as st

from vertexlab.errors import DomainError
from vertexlab.model import Params, in_q_lattice, validate_params
from vertexlab.presets import random_params

settings.register_profile("vertexlab", deadline=None, max_examples=40, derandomize=True)
settings.load_profile("vertexlab")

phases = st.floats(min_value=-np.pi, max_value=np.pi, allow_nan=False)


@st.composite
def admissible_params(draw, k=1, n=2, z=None):
    A = draw(st.floats(0.75, 0.92))
    H = A * draw(st.floats(0.55, 0.85))
    Q = H * draw(st.floats(0.3, 0.8))
    hbar = H * cmath.exp(1j * draw(phases))
    a = tuple(A * draw(st.floats(0.93, 1.0)) * cmath.exp(1j * draw(phases)) for _ in range(n))
    zz = z if z is not None else draw(st.floats(0.2, 3.0)) * cmath.exp(1j * draw(phases))
    p = Params(Q * cmath.exp(1j * draw(phases)), hbar, cmath.sqrt(hbar), a, zz, k, n)
    try:
        return validate_params(p)
    except DomainError:
        assume(False)


@st.composite
def annulus_points(draw, lo=-0.4, hi=0.4):
    return cmath.exp(complex(draw(st.floats(lo, hi)), draw(phases)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def p12(rng):
    return random_params(1, 2, rng)


@pytest.fixture
def p23(rng):
    return random_params(2, 3, rng)


@pytest.fixture
def p24(rng):
    return random_params(2, 4, rng)


def off_lattice(p, *ws, tol=1e-6):
    """Discard draws that sit within tol of q^Z, where the identities degenerate to 0 = 0."""
    for w in ws:
        assume(in_q_lattice(w, p.q, 64, tol) is None)


def rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)
