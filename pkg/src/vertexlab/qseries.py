"""q-Pochhammer products, the theta function and the Poincare kernel.

All functions accept scalars or numpy arrays and return the same shape
(a Python complex for scalar input).  Zeros of phi are snapped to exact
zero so that downstream vanishing checks see clean zeros.
"""
from __future__ import annotations

import math
from functools import lru_cache
from typing import Sequence

import numpy as np

from .config import QFunctionConfig, current_qconfig
from .errors import NonConvergent, PoleHit, Resonance
from .model import Params, VirtualCharacter


def _out(arr, scalar):
    return complex(arr) if scalar else arr


def _n_terms(q: complex, xmax: float, cfg: QFunctionConfig) -> int:
    """Number of factors so that the tail |q^N x| / (1 - |q|) stays below the floor."""
    aq = abs(q)
    if not aq < 1:
        raise NonConvergent(f"|q| = {aq} is not < 1")
    if aq == 0:
        return 1
    target = cfg.truncation_floor * (1 - aq)
    if xmax <= target:
        return 1
    n = math.ceil(math.log(target / xmax) / math.log(aq)) + 1
    if n > cfg.max_terms:
        raise NonConvergent(f"phi needs {n} factors, more than max_terms={cfg.max_terms}")
    return max(n, 1)


def _zero_index(x: np.ndarray, q: complex, tol: float) -> np.ndarray:
    """Integer m >= 0 with |x q^m - 1| < tol, or -1 where x is not a zero of phi."""
    out = np.full(x.shape, -1, dtype=np.int64)
    ax = np.abs(x)
    nz = ax > 0
    if not nz.any():
        return out
    m0 = np.zeros(x.shape, dtype=np.int64)
    m0[nz] = np.rint(-np.log(ax[nz]) / math.log(abs(q))).astype(np.int64)
    for shift in (-1, 0, 1):
        m = m0 + shift
        ok = nz & (m >= 0) & (out < 0)
        if ok.any():
            hit = np.abs(x[ok] * q ** m[ok].astype(float) - 1) < tol
            idx = np.flatnonzero(ok)[hit]
            out.flat[idx] = m.flat[idx]
    return out


@lru_cache(maxsize=256)
def _q_powers(q: complex, nterms: int) -> np.ndarray:
    return q ** np.arange(nterms, dtype=float)


def _product(x: np.ndarray, q: complex, cfg: QFunctionConfig, skip: int | None = None) -> np.ndarray:
    xmax = float(np.max(np.abs(x))) if x.size else 0.0
    nterms = _n_terms(q, xmax, cfg)
    if skip is not None:
        nterms = max(nterms, skip + 1)
    factors = 1 - x[..., None] * _q_powers(q, nterms)
    if skip is not None:
        factors[..., skip] = 1
    return np.prod(factors, axis=-1)


def _product_scalar(x: complex, q: complex, cfg: QFunctionConfig, skip: int | None = None) -> complex:
    """Pure-Python loop; much cheaper than numpy for a single argument."""
    nterms = _n_terms(q, abs(x), cfg)
    if skip is not None:
        nterms = max(nterms, skip + 1)
    result = 1 + 0j
    t = x
    for m in range(nterms):
        if m != skip:
            result *= 1 - t
        t *= q
    return result


def _zero_index_scalar(x: complex, q: complex, tol: float) -> int:
    if x == 0:
        return -1
    m0 = round(-math.log(abs(x)) / math.log(abs(q)))
    for m in (m0 - 1, m0, m0 + 1):
        if m >= 0 and abs(x * q ** m - 1) < tol:
            return m
    return -1


def phi(x, p: Params, cfg: QFunctionConfig | None = None):
    """prod_{n >= 0} (1 - q^n x)."""
    cfg = cfg or current_qconfig()
    scalar = np.ndim(x) == 0
    if scalar:
        xs = complex(x)
        return 0j if _zero_index_scalar(xs, p.q, cfg.zero_tol) >= 0 else _product_scalar(xs, p.q, cfg)
    xa = np.asarray(x, dtype=complex)
    res = _product(xa, p.q, cfg)
    zeros = _zero_index(xa, p.q, cfg.zero_tol) >= 0
    if zeros.any():
        res = np.where(zeros, 0.0, res)
    return _out(res, scalar)


def phi_skip(x, m: int, p: Params, cfg: QFunctionConfig | None = None):
    """prod_{n >= 0, n != m} (1 - q^n x); finite and nonzero at x = q^{-m}."""
    if m < 0:
        raise ValueError("phi_skip needs m >= 0")
    cfg = cfg or current_qconfig()
    scalar = np.ndim(x) == 0
    if scalar:
        xs = complex(x)
        zi = _zero_index_scalar(xs, p.q, cfg.zero_tol)
        return 0j if zi >= 0 and zi != m else _product_scalar(xs, p.q, cfg, skip=m)
    xa = np.asarray(x, dtype=complex)
    res = _product(xa, p.q, cfg, skip=m)
    zi = _zero_index(xa, p.q, cfg.zero_tol)
    zeros = (zi >= 0) & (zi != m)
    if zeros.any():
        res = np.where(zeros, 0.0, res)
    return _out(res, scalar)


def phi_circle(x, p: Params, cfg: QFunctionConfig | None = None):
    """phi(x) away from x = 1, and phi(q) at x = 1."""
    cfg = cfg or current_qconfig()
    scalar = np.ndim(x) == 0
    xa = np.asarray(x, dtype=complex)
    at_one = np.abs(xa - 1) < cfg.circle_tol
    res = phi(np.where(at_one, 0.5, xa), p, cfg)
    if at_one.any():
        res = np.where(at_one, phi(p.q, p, cfg), res)
    return _out(res, scalar)


def theta(z, p: Params, cfg: QFunctionConfig | None = None):
    """phi(q z) phi(1/z); simple zeros on q^Z."""
    scalar = np.ndim(z) == 0
    if scalar:
        zs = complex(z)
        if zs == 0:
            raise Resonance("theta is undefined at z = 0")
        return phi(p.q * zs, p, cfg) * phi(1 / zs, p, cfg)
    za = np.asarray(z, dtype=complex)
    if np.any(za == 0):
        raise Resonance("theta is undefined at z = 0")
    res = np.asarray(phi(p.q * za, p, cfg)) * np.asarray(phi(1 / za, p, cfg))
    return _out(res, scalar)


def theta_from_gap(w, gap, p: Params, cfg: QFunctionConfig | None = None):
    """theta(w) written as phi(q w) * (1 - 1/w) * phi(q/w), with ``gap`` = 1 - 1/w supplied.

    Near w = 1 the caller can often form the gap from differences of its own
    inputs far more accurately than 1 - 1/w computed from w.
    """
    scalar = np.ndim(w) == 0 and np.ndim(gap) == 0
    res = np.asarray(phi(p.q * np.asarray(w), p, cfg)) * np.asarray(gap) * np.asarray(phi(p.q / np.asarray(w), p, cfg))
    return _out(res, scalar)


def u_kernel(s, z, p: Params, cfg: QFunctionConfig | None = None):
    """theta(s z) / (theta(s) theta(z))."""
    ts = np.asarray(theta(s, p, cfg))
    tz = np.asarray(theta(z, p, cfg))
    if np.any(ts == 0) or np.any(tz == 0):
        raise Resonance("u_kernel: s or z lies in q^Z")
    res = np.asarray(theta(np.asarray(s) * np.asarray(z), p, cfg)) / (ts * tz)
    return _out(res, np.ndim(s) == 0 and np.ndim(z) == 0)


def phi_virtual(V: VirtualCharacter, x: Sequence, p: Params, cfg: QFunctionConfig | None = None):
    """Multiplicative extension prod phi(w)^mult over the terms of V."""
    result = 1.0 + 0j
    for mono, mult in V.terms:
        val = np.asarray(phi(mono.evaluate(p, x), p, cfg))
        if mult < 0:
            if np.any(val == 0):
                raise PoleHit(f"phi_virtual: pole at monomial {mono}", monomial=mono)
            result = result / val ** (-mult)
        else:
            result = result * val ** mult
    return result if np.ndim(result) else complex(result)
