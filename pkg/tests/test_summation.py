import math

import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from vertexlab.summation import csum, csum_arrays, csum_flat, ordered_map


def test_csum_recovers_cancelled_terms():
    vals = [1e16, 1.0, -1e16, 1j * 1e16, 1j, -1j * 1e16]
    assert csum(vals) == complex(1.0, 1.0)


@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=50))
def test_csum_matches_fsum(xs):
    assert csum(xs).real == math.fsum(xs)


@given(st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=30), st.randoms())
def test_csum_is_order_independent(xs, r):
    shuffled = list(xs)
    r.shuffle(shuffled)
    assert csum(xs) == csum(shuffled)


def test_csum_arrays_elementwise():
    arrays = [np.array([1e16, 1.0]), np.array([1.0, 2.0]), np.array([-1e16, 3.0])]
    out = csum_arrays(arrays)
    np.testing.assert_array_equal(out, np.array([1.0, 6.0]))


def test_csum_flat_on_grid():
    grid = np.exp(2j * np.pi * np.arange(64) / 64).reshape(8, 8)
    assert abs(csum_flat(grid)) < 1e-14


def test_ordered_map_preserves_order_across_threads():
    items = list(range(40))
    assert ordered_map(lambda v: v * v, items, 1) == ordered_map(lambda v: v * v, items, 8)
