"""Invariant battery for stable envelopes.

Each check returns a residual (smaller is better) together with the
threshold it is judged against, so callers can print tables or fail fast.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .model import Params, c_sigma_general
from .stab import (StabSpec, diagonal_regularity, shift_coordinate, stab_envelope, stab_terms,
                   wheel_check, x_automorphy_factor, z_quasi_periodicity_factor)

SYMMETRY_TOL = 1e-12
AUTOMORPHY_TOL = 1e-9
WHEEL_TOL = 1e-9
DIAGONAL_RATIO_RANGE = (5.0, 20.0)


@dataclass(frozen=True)
class CheckResult:
    name: str
    residual: float
    threshold: float
    passed: bool

    def to_json(self) -> dict:
        return {"residual": self.residual, "threshold": self.threshold, "passed": self.passed}


def judge(name, residual, threshold) -> CheckResult:
    residual = float(residual)
    return CheckResult(name, residual, threshold, bool(residual < threshold))


def sample_points(p: Params, count: int, rng: np.random.Generator) -> list[list[complex]]:
    """Random x-vectors in the annulus 0.7 < |x| < 1.3 with well separated phases."""
    pts = []
    while len(pts) < count:
        x = [complex(np.exp(rng.uniform(-0.35, 0.25) + 1j * rng.uniform(0, 2 * np.pi))) for _ in range(p.k)]
        phases = sorted(np.angle(v) % (2 * np.pi) for v in x)
        gaps = np.diff(phases + [phases[0] + 2 * np.pi]) if p.k > 1 else [1.0]
        if min(gaps) > 0.2:
            pts.append(x)
    return pts


def symmetry_residual(s: StabSpec, points) -> float:
    worst = 0.0
    for x in points:
        base = stab_envelope(s, x)
        for perm in itertools.permutations(range(len(x))):
            v = stab_envelope(s, [x[i] for i in perm])
            worst = max(worst, abs(v - base) / abs(base))
    return worst


def _eq_x_factor(s: StabSpec, l: int, x) -> complex:
    """z q^{-n} hbar^{-n/2} (x_l^n / prod a)^{-1}, the constant form of the x-automorphy."""
    p = s.params
    return p.z * p.q ** (-p.n) * p.hbar_sqrt ** (-p.n) * np.prod(p.a) / x[l - 1] ** p.n


def x_automorphy_residuals(s: StabSpec, points) -> dict[str, float]:
    """Residuals of the x_l -> q x_l law for the sum, each summand, and the general c_sigma."""
    p = s.params
    total = summand = general = 0.0
    for x in points:
        base = stab_envelope(s, x)
        base_terms = stab_terms(s, x)
        for l in range(1, p.k + 1):
            moved = shift_coordinate(x, l, p.q)
            expected = _eq_x_factor(s, l, x)
            ratio = stab_envelope(s, moved) / base
            total = max(total, abs(ratio / expected - 1))
            for t0, t1 in zip(base_terms, stab_terms(s, moved)):
                if abs(t0) > 1e-300:
                    summand = max(summand, abs(t1 / t0 / expected - 1))
            general = max(general, abs(ratio / x_automorphy_factor(s, l, x) - 1))
            # a two-step shift exercises the quadratic part of the general formula
            xi = tuple(2 if i == l - 1 else 0 for i in range(p.k))
            twice = shift_coordinate(x, l, p.q ** 2)
            ratio2 = stab_envelope(s, twice) / base
            general = max(general, abs(ratio2 / (c_sigma_general(xi, p, x) * p.z ** 2) - 1))
    return {"x_automorphy": total, "x_automorphy_per_summand": summand, "c_sigma_general": general}


def z_automorphy_residual(s: StabSpec, points) -> float:
    p = s.params
    shifted = s.with_params(p.with_z(p.q * p.z))
    factor = z_quasi_periodicity_factor(s)
    worst = 0.0
    for x in points:
        ratio = stab_envelope(shifted, x) / stab_envelope(s, x)
        worst = max(worst, abs(ratio / factor.evaluate(p, x) - 1))
    return worst


def wheel_residual(s: StabSpec, samples: int = 8, seed: int = 0) -> float:
    """Worst relative wheel residual over all l and both ordered special slots."""
    p = s.params
    worst = 0.0
    for l in range(1, p.n + 1):
        for slots in ((1, 2), (2, 1)) if p.k == 2 else ((1, 2), (2, 1), (1, p.k)):
            worst = max(worst, wheel_check(s, l, samples=samples, seed=seed, slots=slots).relative)
    return worst


def diagonal_ratio_range(s: StabSpec, points) -> tuple[float, float]:
    lo, hi = np.inf, -np.inf
    for x in points:
        ratios = diagonal_regularity(s, x)["ratios"]
        for r in ratios:
            lo, hi = min(lo, r), max(hi, r)
    return float(lo), float(hi)


def envelope_battery(s: StabSpec, samples: int = 6, seed: int = 0) -> list[CheckResult]:
    """Run every envelope invariant at ``samples`` seeded points."""
    rng = np.random.default_rng(seed)
    points = sample_points(s.params, samples, rng)
    out = []
    if s.params.k > 1:
        out.append(judge("symmetry", symmetry_residual(s, points), SYMMETRY_TOL))
    for name, v in x_automorphy_residuals(s, points).items():
        out.append(judge(name, v, AUTOMORPHY_TOL))
    out.append(judge("z_automorphy", z_automorphy_residual(s, points), AUTOMORPHY_TOL))
    if s.params.k > 1:
        out.append(judge("wheel", wheel_residual(s, seed=seed), WHEEL_TOL))
        lo, hi = diagonal_ratio_range(s, points)
        dev = max(DIAGONAL_RATIO_RANGE[0] - lo, hi - DIAGONAL_RATIO_RANGE[1], 0.0)
        # residual is the distance of the observed ratios from the accepted band
        out.append(CheckResult("diagonal_regularity", dev, 0.0, dev == 0.0))
    return out

