"""Deterministic compensated summation for complex scalars and arrays."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence

import numpy as np


def csum(values: Iterable[complex]) -> complex:
    """Exactly-rounded sum of complex scalars (real and imaginary parts via fsum)."""
    vals = [complex(v) for v in values]
    return complex(math.fsum(v.real for v in vals), math.fsum(v.imag for v in vals))


def _neumaier(arrays):
    total = None
    comp = None
    for arr in arrays:
        arr = np.asarray(arr, dtype=float)
        if total is None:
            total = arr.copy()
            comp = np.zeros_like(total)
            continue
        t = total + arr
        big = np.abs(total) >= np.abs(arr)
        comp += np.where(big, (total - t) + arr, (arr - t) + total)
        total = t
    return total + comp


def csum_arrays(arrays: Iterable[np.ndarray]) -> np.ndarray:
    """Elementwise Neumaier summation of equally shaped complex arrays, in the given order."""
    arrays = [np.asarray(a, dtype=complex) for a in arrays]
    if not arrays:
        raise ValueError("csum_arrays needs at least one array")
    re = _neumaier(a.real for a in arrays)
    im = _neumaier(a.imag for a in arrays)
    return re + 1j * im


def csum_flat(arr: np.ndarray) -> complex:
    """Exactly-rounded sum of all entries of a complex array, in row-major order."""
    arr = np.asarray(arr, dtype=complex).ravel()
    return complex(math.fsum(arr.real.tolist()), math.fsum(arr.imag.tolist()))


def ordered_map(fn: Callable, items: Sequence, threads: int = 1) -> list:
    """map() over a thread pool; results come back in input order."""
    if threads <= 1 or len(items) < 2:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
