"""Batch front door: solve, decompose, verify, selftest.

Configs are JSON documents; field dumps are CSV (columns r,rho,value);
boundary tables are CSV (columns theta,value).  Reports are JSON with
deterministic key order and no timestamps, so identical configs and
seeds give byte-identical reports.

Exit status: 0 on success, 2 when residuals are flagged or solvability
fails (the report names the violations), 1 on configuration or internal
errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .almansi import decompose as almansi_decompose
from .almansi import recompose
from .cliffordalg import Signature
from .complexrh import DiskGeometry, SolvabilityFailure, SolveConfig
from .domains import ProjectedDomain
from .expressions import ExpressionError, compile_expression
from .fields import BiaxialQuadruple, ChartGrid, GridField
from .operators import dirac_biaxial
from .solver import NumericsConfig, RHProblemSpec, solve as run_solve, verify_solution


class ConfigError(ValueError):
    pass


_NUMERIC_KEYS = {
    "boundary_samples": int, "tau_cells": int, "grid_nu": int, "grid_nv": int,
    "fixed_point_tol": float, "max_iterations": int, "damping": float,
    "axis_strip": bool, "coefficient_floor": float, "f_floor": float,
    "ramp_iterations": int, "boundary_smoothing": int, "corner_zone": float,
    "zone_floor": float,
    "pde_tol": float, "bc_tol": float, "component_tol": float,
    "fd_step": (float, type(None)), "cloud_points": int,
}

_TOP_KEYS = {
    "solve": {"p", "q", "k", "alpha", "domain", "radius", "eps",
              "coefficients", "data", "constants", "numerics", "seed"},
    "decompose": {"p", "q", "k", "domain", "radius", "eps", "field",
                  "numerics", "seed"},
    "verify": {"p", "q", "k", "alpha", "domain", "radius", "eps",
               "coefficients", "data", "constants", "numerics", "seed",
               "bundle_dir"},
    "selftest": set(),
}


def _require(cond, path, message):
    if not cond:
        raise ConfigError(f"{path}: {message}")


def _build_numerics(raw: dict) -> NumericsConfig:
    solve_kwargs = {}
    extra = {}
    for key, value in raw.items():
        _require(key in _NUMERIC_KEYS, f"numerics.{key}", "unknown key")
        want = _NUMERIC_KEYS[key]
        if not isinstance(want, tuple):
            want = (want,)
        if bool in want and not isinstance(value, bool):
            raise ConfigError(f"numerics.{key}: expected a boolean")
        if key in ("pde_tol", "bc_tol", "component_tol", "fd_step", "cloud_points"):
            extra[key] = value
        else:
            solve_kwargs[key] = value
    cfg = SolveConfig(**solve_kwargs)
    _require(cfg.boundary_samples >= 8 and (cfg.boundary_samples & (cfg.boundary_samples - 1)) == 0,
             "numerics.boundary_samples", "must be a power of two >= 8")
    _require(0 < cfg.damping <= 1.0, "numerics.damping", "must lie in (0, 1]")
    num = NumericsConfig(solve=cfg)
    for key, value in extra.items():
        setattr(num, key, None if value is None else
                (int(value) if key == "cloud_points" else float(value)))
    return num


def _build_domain(cfg: dict) -> ProjectedDomain:
    kind = cfg.get("domain")
    _require(kind in ("quarter_disk", "unit_disk"), "domain",
             f"unknown or unsupported domain {kind!r}")
    return ProjectedDomain(kind, radius=float(cfg.get("radius", 1.0)),
                           eps=float(cfg.get("eps", 1e-3)))


def _data_callable(value, path):
    if isinstance(value, str):
        try:
            return compile_expression(value)
        except ExpressionError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    if isinstance(value, dict) and "csv" in value:
        table = np.loadtxt(value["csv"], delimiter=",", skiprows=1)
        _require(table.ndim == 2 and table.shape[1] == 2, path,
                 "boundary table must have columns theta,value")
        th = np.concatenate([table[:, 0], [table[0, 0] + 2 * np.pi]])
        vv = np.concatenate([table[:, 1], [table[0, 1]]])

        def fn(r, rho, theta):
            return np.interp(np.mod(theta, 2 * np.pi), th, vv)

        fn.source = {"csv": str(value["csv"])}
        return fn
    raise ConfigError(f"{path}: expected an expression string or {{'csv': path}}")


def parse_solve_config(cfg: dict, command: str = "solve") -> RHProblemSpec:
    """Validate a solve/verify config document and build the problem spec."""
    _require(isinstance(cfg, dict), "<root>", "config must be a JSON object")
    allowed = _TOP_KEYS[command]
    for key in cfg:
        _require(key in allowed, key, "unknown key")
    for key in ("p", "q", "k", "domain", "coefficients", "data"):
        _require(key in cfg, key, "missing required key")
    p, q, k = cfg["p"], cfg["q"], cfg["k"]
    _require(isinstance(p, int) and p >= 1, "p", "must be an integer >= 1")
    _require(isinstance(q, int) and q >= 1, "q", "must be an integer >= 1")
    _require(isinstance(k, int) and 1 <= k <= 6, "k", "must be an integer in 1..6")
    sig = Signature(p, q)
    alpha = cfg.get("alpha", [0.0] * sig.n)
    _require(isinstance(alpha, list) and len(alpha) == sig.n, "alpha",
             f"needs exactly {sig.n} entries")
    domain = _build_domain(cfg)

    coeffs = {}
    raw_coeffs = cfg["coefficients"]
    for name in ("A_b", "B_b", "C_b", "D_b"):
        _require(name in raw_coeffs, f"coefficients.{name}", "missing coefficient")
        coeffs[name] = _data_callable(raw_coeffs[name], f"coefficients.{name}")
    for name in raw_coeffs:
        _require(name in ("A_b", "B_b", "C_b", "D_b"), f"coefficients.{name}", "unknown key")

    data = {}
    raw_data = cfg["data"]
    for name in raw_data:
        parts = name.split("_")
        _require(len(parts) == 3 and parts[0] == "g", f"data.{name}",
                 "keys look like g_<i>_<l>")
        i, l = int(parts[1]), int(parts[2])
        _require(i in (1, 2) and 0 <= l < k, f"data.{name}", "index out of range")
        data[(i, l)] = _data_callable(raw_data[name], f"data.{name}")
    for i in (1, 2):
        for l in range(k):
            _require((i, l) in data, f"data.g_{i}_{l}", "missing boundary data entry")

    constants = {}
    for name, value in cfg.get("constants", {}).items():
        parts = name.split("_")
        _require(len(parts) == 3 and parts[0] == "c", f"constants.{name}",
                 "keys look like c_<i>_<l>")
        i, l = int(parts[1]), int(parts[2])
        _require(i in (1, 2) and 0 <= l < k, f"constants.{name}", "index out of range")
        arr = np.asarray(value, dtype=float)
        _require(arr.ndim == 2 and arr.shape[1] == 2, f"constants.{name}",
                 "expected a list of [re, im] pairs")
        constants[(i, l)] = arr[:, 0] + 1j * arr[:, 1]

    numerics = _build_numerics(cfg.get("numerics", {}))
    if "seed" in cfg:
        numerics.seed = int(cfg["seed"])

    echo = echo_config(cfg, command)
    return RHProblemSpec(sig=sig, k=k, alpha=np.asarray(alpha, float), domain=domain,
                         coefficients=coeffs, data=data, numerics=numerics,
                         constants=constants, config_echo=echo)


def echo_config(cfg: dict, command: str = "solve") -> dict:
    """Fully-defaulted copy of the config; reparses to an equivalent spec."""
    out = json.loads(json.dumps(cfg))
    out.setdefault("alpha", [0.0] * (cfg["p"] + cfg["q"]))
    out.setdefault("radius", 1.0)
    out.setdefault("eps", 1e-3)
    out.setdefault("seed", 12345)
    base = NumericsConfig()
    defaults = {
        "boundary_samples": base.solve.boundary_samples,
        "tau_cells": base.solve.tau_cells,
        "grid_nu": base.solve.grid_nu,
        "grid_nv": base.solve.grid_nv,
        "fixed_point_tol": base.solve.fixed_point_tol,
        "max_iterations": base.solve.max_iterations,
        "damping": base.solve.damping,
        "axis_strip": base.solve.axis_strip,
        "pde_tol": base.pde_tol,
        "bc_tol": base.bc_tol,
        "component_tol": base.component_tol,
        "fd_step": base.fd_step,
        "cloud_points": base.cloud_points,
    }
    num = dict(out.get("numerics", {}))
    for key, val in defaults.items():
        num.setdefault(key, val)
    out["numerics"] = num
    return out


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def _write_quadruple(quad: BiaxialQuadruple, outdir: Path, prefix: str):
    for name, fld in zip("ABCD", quad.fields):
        fld.to_csv(outdir / f"{prefix}_{name}.csv")


def _write_report(report_dict: dict, path: Path):
    path.write_text(json.dumps(report_dict, indent=2, sort_keys=True) + "\n")


def cmd_solve(cfg: dict, outdir: Path) -> int:
    spec = parse_solve_config(cfg, "solve")
    outdir.mkdir(parents=True, exist_ok=True)
    try:
        bundle = run_solve(spec)
    except SolvabilityFailure as exc:
        _write_report({
            "error": "solvability_failure",
            "violated_conditions": [{"k": k, "moment": m} for k, m in exc.violations],
            "config_echo": spec.config_echo,
        }, outdir / "report.json")
        print(f"solve failed: {exc}", file=sys.stderr)
        return 2
    for j, comp in enumerate(bundle.components.components):
        _write_quadruple(comp, outdir, f"component_{j}")
    _write_quadruple(bundle.assembled, outdir, "assembled")
    _write_report(bundle.report.to_dict(), outdir / "report.json")
    if bundle.report.flags:
        print("flagged: " + "; ".join(bundle.report.flags), file=sys.stderr)
        return 2
    return 0


def cmd_decompose(cfg: dict, outdir: Path) -> int:
    for key in cfg:
        _require(key in _TOP_KEYS["decompose"], key, "unknown key")
    for key in ("p", "q", "k", "domain", "field"):
        _require(key in cfg, key, "missing required key")
    sig = Signature(cfg["p"], cfg["q"])
    k = cfg["k"]
    _require(isinstance(k, int) and 1 <= k <= 6, "k", "must be an integer in 1..6")
    domain = _build_domain(cfg)
    _require(domain.star_like, "domain", "decomposition needs a star-like domain")
    numerics = _build_numerics(cfg.get("numerics", {}))
    grid = ChartGrid.for_domain(domain, numerics.solve.grid_nu, numerics.solve.grid_nv)
    raw = cfg["field"]
    fields = []
    if "csv_dir" in raw:
        base = Path(raw["csv_dir"])
        for name in "ABCD":
            fields.append(GridField.from_csv(grid, base / f"field_{name}.csv"))
    else:
        theta = np.arctan2(grid.RHO, grid.R)
        for name in "ABCD":
            _require(name in raw, f"field.{name}", "missing field expression")
            fn = _data_callable(raw[name], f"field.{name}")
            fields.append(GridField(grid, fn(grid.R, grid.RHO, theta) * np.ones_like(grid.R)))
    quad = BiaxialQuadruple(sig, *fields)

    outdir.mkdir(parents=True, exist_ok=True)
    try:
        result = almansi_decompose(quad, k, tol=1e-6)
    except Exception as exc:
        _write_report({"error": str(exc), "config_echo": echo_config(cfg, "decompose")},
                      outdir / "report.json")
        print(f"decompose failed: {exc}", file=sys.stderr)
        return 2
    for j, comp in enumerate(result.components):
        _write_quadruple(comp, outdir, f"component_{j}")
    recon_err = max(f.max_abs() for f in (recompose(result) - quad).fields)
    report = {
        "path": result.diagnostics.get("path"),
        "component_residuals": result.diagnostics.get("component_residuals"),
        "reconstruction_error": recon_err,
        "config_echo": echo_config(cfg, "decompose"),
    }
    _write_report(report, outdir / "report.json")
    return 0


def cmd_verify(cfg: dict, outdir: Path) -> int:
    _require("bundle_dir" in cfg, "bundle_dir", "missing required key")
    spec = parse_solve_config(cfg, "verify")
    bundle_dir = Path(cfg["bundle_dir"])
    geo = DiskGeometry.build(spec.domain, spec.numerics.solve)
    comps = []
    for j in range(spec.k):
        fields = [GridField.from_csv(geo.grid, bundle_dir / f"component_{j}_{n}.csv")
                  for n in "ABCD"]
        comps.append(BiaxialQuadruple(spec.sig, *fields))
    from .almansi import AlmansiComponents
    from .operators import x_power_multiply
    from .solver import SolutionBundle

    assembled = None
    for j, comp in enumerate(comps):
        term = x_power_multiply(comp, j)
        assembled = term if assembled is None else assembled + term
    bundle = SolutionBundle(spec, AlmansiComponents(spec.k, comps, spec.alpha),
                            assembled, geo, layer_diagnostics=[])
    report = verify_solution(bundle, spec)
    outdir.mkdir(parents=True, exist_ok=True)
    _write_report(report.to_dict(), outdir / "verify_report.json")
    if report.flags:
        print("flagged: " + "; ".join(report.flags), file=sys.stderr)
        return 2
    return 0


def cmd_selftest(outdir: Path | None) -> int:
    """Quick built-in invariant checks, one line per suite."""
    from fractions import Fraction

    from .almansi import make_k_monogenic_sample, decompose as alm_decompose
    from .cliffordalg import Multivector, mv_multiply
    from .complexrh import boundary_angles, compute_index, schwarz_operator
    from .fields import PolyField, poly_quadruple
    from .operators import euler_op, i_op

    rng = np.random.default_rng(0)
    results = []

    sig = Signature(2, 2)
    ok = True
    for _ in range(200):
        a, b, c = (Multivector(sig, rng.uniform(-1, 1, 16)) for _ in range(3))
        lhs = mv_multiply(mv_multiply(a, b), c)
        rhs = mv_multiply(a, mv_multiply(b, c))
        ok &= bool(np.max(np.abs(lhs.coeffs - rhs.coeffs)) < 1e-12)
    results.append(("algebra associativity", ok))

    f = poly_quadruple(sig, A=PolyField({(2, 1): Fraction(3, 2)}))
    s = Fraction(5, 2)
    results.append(("euler/ray inverse pair", euler_op(s, i_op(s, f)) - f is not None
                    and (euler_op(s, i_op(s, f)) - f).is_zero))

    th = boundary_angles(256)
    S = schwarz_operator(np.cos(3 * th))
    zb = np.exp(1j * th)
    results.append(("schwarz boundary reproduction",
                    bool(np.max(np.abs(S(zb).real - np.cos(3 * th))) < 1e-10)))
    results.append(("winding index", compute_index(np.exp(2j * th)) == 2))

    phi = make_k_monogenic_sample(sig, 3, seed=5)
    out = alm_decompose(phi, 3)
    from .almansi import recompose as alm_recompose
    results.append(("almansi round trip", (alm_recompose(out) - phi).is_zero))

    width = max(len(name) for name, _ in results)
    failed = False
    for name, passed in results:
        print(f"{name:<{width}}  {'pass' if passed else 'FAIL'}")
        failed |= not passed
    if outdir is not None:
        outdir.mkdir(parents=True, exist_ok=True)
        _write_report({"selftest": [{"name": n, "pass": bool(p)} for n, p in results]},
                      outdir / "selftest.json")
    return 2 if failed else 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="biaxialrh",
        description="Riemann-Hilbert solves for bi-axial poly-monogenic functions")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("solve", "decompose", "verify"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True)
        sp.add_argument("--out", default="out")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--grid", type=int, default=None,
                        help="override the tau quadrature cells per axis")
        sp.add_argument("--eps", type=float, default=None,
                        help="override the axis margin")
    st = sub.add_parser("selftest")
    st.add_argument("--out", default=None)

    args = parser.parse_args(argv)
    try:
        if args.command == "selftest":
            return cmd_selftest(Path(args.out) if args.out else None)
        cfg = json.loads(Path(args.config).read_text())
        if args.seed is not None:
            cfg["seed"] = args.seed
        if args.grid is not None:
            cfg.setdefault("numerics", {})["tau_cells"] = args.grid
        if args.eps is not None:
            cfg["eps"] = args.eps
        outdir = Path(args.out)
        if args.command == "solve":
            return cmd_solve(cfg, outdir)
        if args.command == "decompose":
            return cmd_decompose(cfg, outdir)
        return cmd_verify(cfg, outdir)
    except (ConfigError, ExpressionError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"missing file: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
