"""Command-line front end: ``vertexlab {interp,stab,vertex,monodromy,selftest}``.

Exit codes: 0 success, 1 invariant failure, 2 domain error, 3 resonance or
singular matrix.  Results are JSON (CSV for plot grids) on stdout or --out.
"""
from __future__ import annotations

import argparse
import json
import sys
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from . import interp
from .checks import envelope_battery
from .config import QFunctionConfig, load_config, set_qconfig
from .errors import ConvergenceWarning, DomainError, NonConvergent, Resonance
from .mellin import DEFAULT_N, Z_MAX, Descendent, convergence_parameter, quadrature_oracle, vertex_series
from .model import Chamber, FixedPoint, Params, complex_from_json, complex_to_json, fixed_points, validate_params
from .monodromy import (annulus_grid, inverse_residual, monodromy_grid_csv, monodromy_matrix,
                        periodicity_residual)
from .selftest import all_passed, format_report, run_selftest
from .stab import StabSpec, stab_envelope, wheel_check

MAX_D = 12
MAX_N = 4096
EXIT_OK, EXIT_INVARIANT, EXIT_DOMAIN, EXIT_RESONANCE = 0, 1, 2, 3


@dataclass
class RunConfig:
    """Parsed configuration shared by every command."""

    raw: dict[str, Any]
    threads: int = 1
    seed: int = 0
    out: Path | None = None
    params: Params | None = None

    def require_params(self) -> Params:
        if self.params is None:
            raise DomainError("this command needs a 'params' object in the config")
        return self.params


def parse_complex(text: str) -> complex:
    """Accept '0.3+0i', '0.3+0j', '-2i' or plain reals."""
    t = text.strip().replace(" ", "").replace("i", "j")
    try:
        return complex(t)
    except ValueError:
        raise DomainError(f"cannot parse complex number {text!r}") from None


def parse_complex_list(text: str) -> list[complex]:
    return [parse_complex(t) for t in text.split(",") if t.strip()]


def _positive(name: str, value: float) -> float:
    if not value > 0:
        raise DomainError(f"{name} must be positive, got {value}")
    return value


def _emit(cfg: RunConfig, payload: str) -> None:
    if cfg.out is not None:
        cfg.out.write_text(payload)
    else:
        sys.stdout.write(payload)


def _emit_json(cfg: RunConfig, obj: Any) -> None:
    _emit(cfg, json.dumps(obj, indent=2) + "\n")


def _checks_json(results) -> dict:
    return {c.name: c.to_json() for c in results}


# -- commands ----------------------------------------------------------------


def cmd_interp(cfg: RunConfig, args) -> int:
    sec = dict(cfg.raw.get("interp", {}))
    if "nodes_file" in sec:
        path = Path(sec["nodes_file"])
        if not path.is_file():
            raise DomainError(f"nodes file {path} not found")
        sec.update(json.loads(path.read_text()))
    if "nodes" not in sec or "values" not in sec:
        raise DomainError("interp needs 'nodes' and 'values' (inline or via 'nodes_file')")
    try:
        d = interp.NodeData.from_json(sec)
    except ValueError as exc:
        raise DomainError(str(exc)) from None
    x = parse_complex(args.x)
    out: dict[str, Any] = {"mode": args.mode, "x": complex_to_json(x)}
    if args.mode == "lagrange":
        value = interp.lagrange_eval(d, x)
        node_res = max(abs(interp.lagrange_eval(d, a) - v) / max(abs(v), 1e-300) for a, v in zip(d.nodes, d.values))
    elif args.mode == "trig":
        value = interp.trig_interp_eval(d, args.L, x)
        node_res = max(abs(interp.trig_interp_eval(d, args.L, a) - v) / max(abs(v), 1e-300)
                       for a, v in zip(d.nodes, d.values))
        out["L"] = args.L
        out["newton_window"] = interp.newton_window(d, args.L)
    else:
        p = cfg.require_params()
        z = parse_complex(args.z) if args.z else complex_from_json(sec["z"]) if "z" in sec else p.z
        out["z"] = complex_to_json(z)
        out["resonance"] = interp.resonance_check(d, z, p)
        value = interp.elliptic_interp_eval(d, z, x, p)
        node_res = max(abs(interp.elliptic_interp_eval(d, z, a, p) - v) / max(abs(v), 1e-300)
                       for a, v in zip(d.nodes, d.values))
        ratio = interp.elliptic_interp_eval(d, z, p.q * x, p) / value
        out["automorphy_residual"] = abs(ratio / interp.elliptic_automorphy_factor(d, z, x, p) - 1)
    out["value"] = complex_to_json(value)
    out["node_residual"] = node_res
    _emit_json(cfg, out)
    ok = node_res < 1e-11 and out.get("automorphy_residual", 0.0) < 1e-9
    if args.mode == "trig":
        ok = ok and out["newton_window"]["relative_leak"] < 1e-10
    return EXIT_OK if ok else EXIT_INVARIANT


def _default_mu(p: Params) -> FixedPoint:
    return FixedPoint(tuple(range(1, p.k + 1)))


def cmd_stab(cfg: RunConfig, args) -> int:
    p = cfg.require_params()
    if args.action == "eval":
        s = StabSpec(FixedPoint.parse(args.mu) if args.mu else _default_mu(p), args.chamber, p)
        out: dict[str, Any] = {"mu": str(s.mu), "chamber": s.chamber.value}
        if args.wheel is not None:
            if p.k < 2:
                raise DomainError("the wheel locus needs k >= 2")
            w = wheel_check(s, args.wheel, samples=args.samples, seed=cfg.seed)
            out["wheel"] = {"l": args.wheel, "max_abs": w.max_abs, "scale": w.scale, "relative": w.relative}
        if args.x:
            x = parse_complex_list(args.x)
            if len(x) != p.k:
                raise DomainError(f"--x needs {p.k} values")
            out["x"] = [complex_to_json(v) for v in x]
            out["value"] = complex_to_json(stab_envelope(s, x))
        elif args.wheel is None:
            raise DomainError("stab eval needs --x or --wheel")
        checks = envelope_battery(s, samples=args.samples, seed=cfg.seed)
        out["checks"] = _checks_json(checks)
        ok = all(c.passed for c in checks) and ("wheel" not in out or out["wheel"]["relative"] < 1e-9)
        _emit_json(cfg, out)
        return EXIT_OK if ok else EXIT_INVARIANT
    if args.all:
        specs = [StabSpec(mu, ch, p) for ch in (Chamber.PLUS, Chamber.MINUS) for mu in fixed_points(p.k, p.n)]
    else:
        specs = [StabSpec(FixedPoint.parse(args.mu) if args.mu else _default_mu(p), args.chamber, p)]
    results = []
    ok = True
    for s in specs:
        checks = envelope_battery(s, samples=args.samples, seed=cfg.seed)
        ok = ok and all(c.passed for c in checks)
        results.append({"mu": str(s.mu), "chamber": s.chamber.value, "checks": _checks_json(checks)})
    _emit_json(cfg, {"results": results, "passed": ok})
    return EXIT_OK if ok else EXIT_INVARIANT


def cmd_vertex(cfg: RunConfig, args) -> int:
    p = cfg.require_params()
    sec = cfg.raw.get("vertex", {})
    D = args.D if args.D is not None else int(sec.get("D", 6))
    N = args.N if args.N is not None else int(sec.get("N", DEFAULT_N))
    z_max = _positive("z_max", args.z_max if args.z_max is not None else float(sec.get("z_max", Z_MAX)))
    tol = _positive("tolerance", args.tolerance if args.tolerance is not None else float(sec.get("tolerance", 1e-8)))
    if not 0 <= D <= MAX_D:
        raise DomainError(f"D must lie in [0, {MAX_D}]")
    if not 32 <= N <= MAX_N:
        raise DomainError(f"N must lie in [32, {MAX_N}]")
    s = StabSpec(FixedPoint.parse(args.mu) if args.mu else _default_mu(p), args.chamber, p)
    rho = Descendent.parse(args.rho, p.k, p.n)
    if convergence_parameter(s) > z_max:
        raise DomainError(f"z outside the trusted disc of chamber {s.chamber.value} (z_max={z_max})")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ConvergenceWarning)
        ledger = vertex_series(rho, s, D, threads=cfg.threads, z_max=z_max)
    oracle = quadrature_oracle(rho, s, N, threads=cfg.threads)
    rel_err = abs(ledger.total - oracle) / abs(oracle)
    meta: dict[str, Any] = {
        "k": p.k, "n": p.n, "mu": str(s.mu), "chamber": s.chamber.value, "rho": args.rho, "D": D, "N": N,
        "z_max": z_max, "assignments": ledger.n_assignments, "decay_ratios": ledger.decay_ratios(),
        "warnings": [str(w.message) for w in caught if issubclass(w.category, ConvergenceWarning)],
    }
    if args.unrestricted_poles:
        full = vertex_series(rho, s, D, restrict_to_Y=False, threads=cfg.threads, z_max=z_max)
        meta["unrestricted"] = {
            "assignments": full.n_assignments,
            "total": complex_to_json(full.total),
            "difference": abs(full.total - ledger.total),
            "relative_difference": abs(full.total - ledger.total) / abs(ledger.total),
        }
    out = {
        "z": complex_to_json(p.z),
        "degree_ledger": [complex_to_json(c) for c in ledger.contributions],
        "total": complex_to_json(ledger.total),
        "oracle": complex_to_json(oracle),
        "rel_err": rel_err,
        "meta": meta,
    }
    _emit_json(cfg, out)
    ok = rel_err < tol and ("unrestricted" not in meta or meta["unrestricted"]["relative_difference"] < 1e-9)
    return EXIT_OK if ok else EXIT_INVARIANT


def chamber_minus_summary(p: Params, samples: int, seed: int) -> dict:
    summary: dict[str, Any] = {}
    ok = True
    for mu in fixed_points(p.k, p.n):
        checks = envelope_battery(StabSpec(mu, Chamber.MINUS, p), samples=samples, seed=seed)
        ok = ok and all(c.passed for c in checks)
        summary[str(mu)] = {c.name: c.residual for c in checks}
    summary["all_passed"] = ok
    return summary


def cmd_monodromy(cfg: RunConfig, args) -> int:
    p = cfg.require_params()
    if args.grid:
        pts = annulus_grid(p, args.radial, args.angular)
        _emit(cfg, monodromy_grid_csv(p, pts, cfg.threads))
        return EXIT_OK
    minus = chamber_minus_summary(p, args.samples, cfg.seed)
    M = monodromy_matrix(p, cfg.threads)
    per = periodicity_residual(p, cfg.threads)
    inv = inverse_residual(p, cfg.threads)
    out = {
        "M": [[complex_to_json(v) for v in row] for row in M],
        "basis": [str(mu) for mu in fixed_points(p.k, p.n)],
        "periodicity_residual": per,
        "inverse_residual": inv,
        "inverse_residual_double": inverse_residual(p, cfg.threads, dps=None),
        "chamber_minus_checks": minus,
    }
    _emit_json(cfg, out)
    return EXIT_OK if (minus["all_passed"] and per < 1e-8 and inv < 1e-8) else EXIT_INVARIANT


def cmd_selftest(cfg: RunConfig, args) -> int:
    rows = run_selftest(seed=cfg.seed, threads=cfg.threads, extra=cfg.params)
    report = format_report(rows, cfg.seed)
    _emit(cfg, report)
    return EXIT_OK if all_passed(rows) else EXIT_INVARIANT


# -- argument parsing --------------------------------------------------------


def _global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--config", default=d(None), help="JSON config (falls back to $VERTEXLAB_CONFIG)")
    parser.add_argument("--threads", type=int, default=d(1), help="worker threads for parallel loops")
    parser.add_argument("--seed", type=int, default=d(0), help="seed for sampled checks")
    parser.add_argument("--out", default=d(None), help="write output here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vertexlab", description=__doc__.splitlines()[0])
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text):
        sp = sub.add_parser(name, help=help_text)
        _global_flags(sp, suppress=True)
        sp.add_argument("--z", default=None, help="override the Kaehler variable of the config")
        return sp

    sp = add("interp", "polynomial, trigonometric or elliptic interpolation")
    sp.add_argument("--mode", choices=("lagrange", "trig", "elliptic"), default="lagrange")
    sp.add_argument("--x", required=True, help="evaluation point, e.g. 0.3+0i")
    sp.add_argument("--L", type=int, default=0, help="lowest exponent of the Laurent window")

    sp = add("stab", "evaluate or check elliptic stable envelopes")
    sp.add_argument("action", choices=("eval", "check"))
    sp.add_argument("--mu", default=None, help="fixed point, e.g. 1,3")
    sp.add_argument("--chamber", default="+", choices=("+", "-"))
    sp.add_argument("--x", default=None, help="comma-separated k-vector")
    sp.add_argument("--wheel", type=int, default=None, metavar="L", help="sample the wheel locus of a_L")
    sp.add_argument("--all", action="store_true", help="check every fixed point in both chambers")
    sp.add_argument("--samples", type=int, default=6)

    sp = add("vertex", "vertex function by residues, checked against quadrature")
    sp.add_argument("--D", type=int, default=None, help="maximal total degree")
    sp.add_argument("--N", type=int, default=None, help="quadrature points per circle")
    sp.add_argument("--rho", default="1", help="descendent, e.g. 1, e1, e1^2, e1*e2")
    sp.add_argument("--mu", default=None)
    sp.add_argument("--chamber", default="+", choices=("+", "-"))
    sp.add_argument("--z-max", dest="z_max", type=float, default=None)
    sp.add_argument("--tolerance", type=float, default=None)
    sp.add_argument("--unrestricted-poles", action="store_true", help="also sum the hbar-shifted towers")

    sp = add("monodromy", "monodromy matrix between the two chambers")
    sp.add_argument("--grid", action="store_true", help="emit |M_ij| over a z-annulus as CSV")
    sp.add_argument("--radial", type=int, default=8)
    sp.add_argument("--angular", type=int, default=16)
    sp.add_argument("--samples", type=int, default=3)

    add("selftest", "seeded invariant suite at three random points")
    return parser


COMMANDS = {"interp": cmd_interp, "stab": cmd_stab, "vertex": cmd_vertex,
            "monodromy": cmd_monodromy, "selftest": cmd_selftest}


def _make_config(args) -> RunConfig:
    try:
        raw = load_config(args.config)
    except FileNotFoundError as exc:
        raise DomainError(f"config file not found: {exc.filename}") from None
    except (json.JSONDecodeError, ValueError) as exc:
        raise DomainError(f"unreadable config: {exc}") from None
    set_qconfig(QFunctionConfig.from_dict(raw.get("qseries")))
    if args.threads < 1:
        raise DomainError("--threads must be >= 1")
    cfg = RunConfig(raw=raw, threads=args.threads, seed=args.seed, out=Path(args.out) if args.out else None)
    if "params" in raw:
        p = Params.from_json(raw["params"])
        if getattr(args, "z", None):
            p = p.with_z(parse_complex(args.z))
        cfg.params = validate_params(p)
    return cfg


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _make_config(args)
        return COMMANDS[args.command](cfg, args)
    except Resonance as exc:
        print(f"vertexlab: {exc}", file=sys.stderr)
        return EXIT_RESONANCE
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (NonConvergent, ValueError) as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
