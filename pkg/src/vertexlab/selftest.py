"""Seeded self-test: every module's invariants at three random admissible points.

The report is plain text with residuals printed to four significant digits.
All parallel reductions are order-fixed, so the report is byte-identical for
any thread count.
"""
from __future__ import annotations

import cmath
import itertools
from dataclasses import dataclass, replace

import numpy as np

from . import interp
from .checks import CheckResult, envelope_battery, judge
from .mellin import Descendent, gamma_prime, gamma_prime_literal, quadrature_oracle, vertex_series
from .model import Chamber, FixedPoint, Params, fixed_points
from .monodromy import entry_scaling_residual, inverse_residual, periodicity_residual
from .presets import oracle_params, random_params
from .qseries import phi, phi_skip, theta, u_kernel
from .stab import StabSpec

POINTS = ((1, 2), (2, 3), (2, 4))
VERTEX_Z = 0.02


@dataclass(frozen=True)
class Row:
    point: int
    k: int
    n: int
    check: CheckResult


def _rel(a, b) -> float:
    return float(abs(a - b) / max(abs(b), 1e-300))


def _random_annulus(rng, count, lo=-0.4, hi=0.4):
    return [complex(np.exp(rng.uniform(lo, hi) + 1j * rng.uniform(-np.pi, np.pi))) for _ in range(count)]


def qseries_rows(p: Params, rng) -> list[tuple[str, float, float]]:
    xs = _random_annulus(rng, 20)
    q = p.q
    phi_res = max(_rel(phi(q * x, p) * (1 - x), phi(x, p)) for x in xs)
    theta_res = 0.0
    for x in xs:
        for k in range(-3, 4):
            expected = (-1) ** k * q ** (-k * (k + 1) / 2) * x ** (-k) * theta(x, p)
            theta_res = max(theta_res, _rel(theta(q ** k * x, p), expected))
    inv_res = max(abs(theta(1 / x, p) + x * theta(x, p)) / abs(x * theta(x, p)) for x in xs)
    skip_res = max(_rel(phi_skip(x, m, p) * (1 - q ** m * x), phi(x, p)) for x in xs for m in range(6))
    u_s = u_z = 0.0
    for s, z in zip(xs[::2], xs[1::2]):
        u = u_kernel(s, z, p)
        u_s = max(u_s, _rel(u_kernel(q * s, z, p), u / z))
        u_z = max(u_z, _rel(u_kernel(s, q * z, p), u / s))
    return [
        ("phi q-difference", phi_res, 1e-12),
        ("theta quasi-periodicity |k|<=3", theta_res, 1e-10),
        ("theta inversion", inv_res, 1e-12),
        ("phi_skip factor identity", skip_res, 1e-13),
        ("u_kernel shift in s", u_s, 1e-10),
        ("u_kernel shift in z", u_z, 1e-10),
    ]


def interp_rows(p: Params, rng) -> list[tuple[str, float, float]]:
    nodes = tuple(p.a)
    values = tuple(complex(v) for v in rng.normal(size=p.n) + 1j * rng.normal(size=p.n))
    d = interp.NodeData(nodes, values)
    z = complex(rng.uniform(0.5, 2.0) * cmath.exp(1j * rng.uniform(-np.pi, np.pi)))
    node_res = 0.0
    for a, v in zip(nodes, values):
        node_res = max(node_res, _rel(interp.lagrange_eval(d, a), v), _rel(interp.trig_interp_eval(d, 1, a), v),
                       _rel(interp.elliptic_interp_eval(d, z, a, p), v))
    leak = interp.newton_window(d, 1)["relative_leak"]
    auto = 0.0
    for x in _random_annulus(rng, 10):
        ratio = interp.elliptic_interp_eval(d, z, p.q * x, p) / interp.elliptic_interp_eval(d, z, x, p)
        auto = max(auto, _rel(ratio, interp.elliptic_automorphy_factor(d, z, x, p)))
    return [
        ("interpolation node reproduction", node_res, 1e-11),
        ("trigonometric Newton window leak", leak, 1e-10),
        ("elliptic interpolation automorphy", auto, 1e-9),
    ]


def stab_rows(p: Params, seed: int) -> list[CheckResult]:
    rows = []
    basis = fixed_points(p.k, p.n)
    for chamber in (Chamber.PLUS, Chamber.MINUS):
        for mu in (basis[0], basis[-1]):
            for res in envelope_battery(StabSpec(mu, chamber, p), samples=4, seed=seed):
                rows.append(replace(res, name=f"envelope[{chamber.value}{mu}] {res.name.replace('_', ' ')}"))
    return rows


def mellin_rows(p: Params, k: int, n: int, rng, threads: int) -> list[tuple[str, float, float]]:
    x = _random_annulus(rng, k, -0.1, 0.1)
    rows = [("gamma_prime two assemblies", _rel(gamma_prime(x, p), gamma_prime_literal(x, p)), 1e-12)]
    if (k, n) not in ((1, 2), (2, 3)):
        return rows
    po = oracle_params(k, n, VERTEX_Z * cmath.exp(0.4j))
    s = StabSpec(FixedPoint(tuple(range(1, k + 1))), Chamber.PLUS, po)
    for expr in ("1", "e1"):
        rho = Descendent.parse(expr, k, n)
        series = vertex_series(rho, s, 6, threads=threads)
        oracle = quadrature_oracle(rho, s, 96, threads=threads)
        rows.append((f"vertex series vs quadrature rho={expr}", _rel(series.total, oracle), 1e-8))
    if k >= 2:
        rho = Descendent.one(k, n)
        restricted = vertex_series(rho, s, 3, threads=threads)
        full = vertex_series(rho, s, 3, restrict_to_Y=False, threads=threads)
        rows.append(("tower poles vanish", _rel(full.total, restricted.total), 1e-9))
    return rows


def monodromy_rows(p: Params, threads: int) -> list[tuple[str, float, float]]:
    return [
        ("restriction scaling chamber +", entry_scaling_residual(Chamber.PLUS, p, threads), 1e-9),
        ("restriction scaling chamber -", entry_scaling_residual(Chamber.MINUS, p, threads), 1e-9),
        ("monodromy periodicity", periodicity_residual(p, threads), 1e-8),
        ("monodromy inverse composition", inverse_residual(p, threads), 1e-8),
    ]


def run_selftest(seed: int = 0, threads: int = 1, extra: Params | None = None) -> list[Row]:
    """Run the suite; ``extra`` appends a user-supplied point after the random ones."""
    rng = np.random.default_rng(seed)
    points = [random_params(k, n, rng) for k, n in POINTS]
    if extra is not None:
        points.append(extra)
    rows: list[Row] = []
    for idx, p in enumerate(points, 1):
        k, n = p.k, p.n
        groups = itertools.chain(
            qseries_rows(p, rng),
            interp_rows(p, rng),
            stab_rows(p, seed),
            mellin_rows(p, k, n, rng, threads),
            monodromy_rows(p, threads),
        )
        for item in groups:
            rows.append(Row(idx, k, n, item if isinstance(item, CheckResult) else judge(*item)))
    return rows


def format_report(rows: list[Row], seed: int) -> str:
    lines = [f"vertexlab selftest seed={seed}",
             f"{'pt':>2} {'k':>1} {'n':>1}  {'check':<52} {'residual':>10}  {'threshold':>9}  status"]
    for r in rows:
        c = r.check
        lines.append(f"{r.point:>2} {r.k:>1} {r.n:>1}  {c.name:<52} {c.residual:10.3e}  {c.threshold:9.1e}  "
                     f"{'ok' if c.passed else 'FAIL'}")
    failed = [r for r in rows if not r.check.passed]
    lines.append(f"summary: {len(rows)} checks, {len(failed)} failed")
    if failed:
        f = failed[0]
        lines.append(f"first failure: point {f.point} (k={f.k}, n={f.n}) {f.check.name}")
    return "\n".join(lines) + "\n"


def all_passed(rows: list[Row]) -> bool:
    return all(r.check.passed for r in rows)
