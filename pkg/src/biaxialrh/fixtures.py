"""Manufactured problems with known exact solutions.

Each fixture plants exact polynomial monogenic components, renders the
boundary data Re{lambda_i (D^l phi*)} as expression strings from the
closed-form traces, and emits a ready-to-run config dict plus the
planted quadruple for field-error measurement.

Index-zero scalar problems carry a one-real-parameter family (an
imaginary constant behind e^{-chi}), so exact recovery of a generic
plant requires pinning that constant.  The fixture computes it from the
similarity representation of the planted solution, using the same tau
quadrature the solver runs, and stores it in the config; the boundary
residual checks are independent of this choice.

The planted solutions vanish to second order at the corner of the
quarter disk, keeping the transplanted boundary data smooth enough for
the spectral boundary machinery at its default resolution.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .almansi import harmonic_radial_poly
from .cliffordalg import Signature
from .complexrh import (
    AnalyticDisk,
    DiskGeometry,
    SolveConfig,
    compute_index,
    schwarz_operator,
)
from .domains import ProjectedDomain, quarter_disk, unit_disk
from .expressions import poly_to_expression
from .fields import BiaxialQuadruple, PolyField, poly_quadruple
from .operators import dirac_biaxial, euler_op, x_power_multiply

R = PolyField.monomial(1, 0)
RHO = PolyField.monomial(0, 1)


# ---------------------------------------------------------------------------
# Planted solutions
# ---------------------------------------------------------------------------

def type1_quadratic(sig: Signature, c=1) -> BiaxialQuadruple:
    """A = c (p rho^2 - q r^2)/2, B = c r rho; first-type monogenic."""
    c = Fraction(c)
    return poly_quadruple(
        sig,
        A=PolyField({(0, 2): c * Fraction(sig.p, 2), (2, 0): -c * Fraction(sig.q, 2)}),
        B=PolyField.monomial(1, 1, c))


def type2_cubic(sig: Signature, c=1) -> BiaxialQuadruple:
    """Gradient-type second-kind monogenic from a degree-4 radial harmonic."""
    h = harmonic_radial_poly(sig, 2).scale(Fraction(c))
    return poly_quadruple(sig, C=h.d_dr(), D=h.d_drho())


def type2_linear(sig: Signature, c=1) -> BiaxialQuadruple:
    c = Fraction(c)
    return poly_quadruple(sig, C=PolyField.monomial(1, 0, 2 * sig.q * c),
                          D=PolyField.monomial(0, 1, -2 * sig.p * c))


def f_parts(quad: BiaxialQuadruple, kind: int):
    """(real, imag) polynomial parts of f_1 = B + iA or f_2 = D + iC."""
    if kind == 1:
        return quad.B, quad.A
    return quad.D, quad.C


def f_values(quad: BiaxialQuadruple, kind: int, z):
    re_p, im_p = f_parts(quad, kind)
    z = np.asarray(z, dtype=complex)
    return re_p.evaluate(z.real, z.imag) + 1j * im_p.evaluate(z.real, z.imag)


# ---------------------------------------------------------------------------
# Boundary data rendering
# ---------------------------------------------------------------------------

def re_lambda_poly(coeff_polys: dict, i: int, quad: BiaxialQuadruple) -> PolyField:
    """Re{lambda_i phi} as an exact polynomial."""
    if i == 1:
        return coeff_polys["A_b"] * quad.A - coeff_polys["B_b"] * quad.B
    return (coeff_polys["C_b"] * quad.C + coeff_polys["D_b"] * quad.D).scale(-1)


def _planted_constant(kind: int, quad: BiaxialQuadruple, lam_hat_fn, geo: DiskGeometry,
                      sig: Signature) -> list:
    """Free constant [i t] of the index-0 problem matching the plant.

    c_0 = i Im{ e^{chi(0)} Phi*(0) } with Phi*(0) = f*(psi(0)) e^{-tau*(psi(0))},
    where tau* and chi use the solver's own discrete machinery (masses,
    redirected sampling, boundary smoothing) at the plant's exact ratio,
    so the stored constant matches the converged discrete state.
    """
    from .complexrh import _smooth_boundary

    re_p, im_p = f_parts(quad, kind)
    if re_p.is_zero and im_p.is_zero:
        return [[0.0, 0.0]]
    z0 = complex(np.atleast_1d(geo.cmap.forward(np.array([0.0 + 0.0j])))[0])
    if geo.quad is None:
        tau_b = np.zeros(len(geo.z_b), dtype=complex)
        tau_0 = 0.0 + 0.0j
    else:
        targets = np.concatenate([geo.z_b, [z0]])
        W = geo.quad.weight_matrix(targets)
        fv = f_values(quad, kind, geo.quad.ratio_pos)
        ratio = np.conj(fv) / fv
        tau_all = geo.quad.apply(W, ratio, kind, sig.p, sig.q)
        tau_b, tau_0 = tau_all[:-1], tau_all[-1]
        tau_b = _smooth_boundary(tau_b, len(tau_b) // 8)
    lam = lam_hat_fn(geo.z_b)
    lam_e = lam * np.exp(tau_b)
    m = -compute_index(lam)
    if m != 0:
        raise ValueError(f"fixture coefficients must give index 0, got {m}")
    ang = np.unwrap(np.angle(np.concatenate([lam_e, lam_e[:1]])))[:-1]
    s_q = schwarz_operator(ang + m * geo.theta)
    chi0 = 1j * s_q.coeffs[0]
    phi0 = f_values(quad, kind, np.array([z0]))[0] * np.exp(-tau_0)
    c0 = 1j * float(np.imag(np.exp(chi0) * phi0))
    return [[c0.real, c0.imag]]


# ---------------------------------------------------------------------------
# Fixtures
# ---------------------------------------------------------------------------

_DEFAULT_COEFFS = {
    "A_b": PolyField({(0, 0): 1, (0, 1): Fraction(1, 5)}),
    "B_b": PolyField({(1, 0): Fraction(3, 10)}),
    "C_b": PolyField({(0, 1): Fraction(1, 5)}),
    "D_b": PolyField({(0, 0): 1, (1, 0): Fraction(1, 10)}),
}


def _lam_hat_fn(coeff_polys: dict, i: int):
    def fn(z):
        z = np.asarray(z, dtype=complex)
        r, rho = z.real, z.imag
        if i == 1:
            return -coeff_polys["B_b"].evaluate(r, rho) \
                - 1j * coeff_polys["A_b"].evaluate(r, rho)
        return -coeff_polys["D_b"].evaluate(r, rho) \
            + 1j * coeff_polys["C_b"].evaluate(r, rho)
    return fn


def _numerics_dict(**overrides) -> dict:
    base = {"boundary_samples": 512, "tau_cells": 64, "grid_nu": 33, "grid_nv": 33}
    base.update(overrides)
    return base


def _config_shell(sig: Signature, k: int, domain: ProjectedDomain,
                  coeff_polys: dict, numerics: dict) -> dict:
    return {
        "p": sig.p, "q": sig.q, "k": k,
        "alpha": [0.0] * sig.n,
        "domain": domain.kind,
        "radius": domain.radius,
        "eps": domain.eps,
        "coefficients": {name: poly_to_expression(poly)
                         for name, poly in coeff_polys.items()},
        "data": {},
        "constants": {},
        "numerics": numerics,
        "seed": 20240811,
    }


def fixture_k1(p: int = 2, q: int = 2, eps: float = 1e-3,
               numerics: dict | None = None):
    """k = 1 quarter-disk problem with both Vekua types planted."""
    sig = Signature(p, q)
    domain = quarter_disk(eps=eps)
    plant = type1_quadratic(sig, 1) + type2_cubic(sig, Fraction(1, 8))
    coeffs = _DEFAULT_COEFFS
    numerics = _numerics_dict(**(numerics or {}))
    cfg = _config_shell(sig, 1, domain, coeffs, numerics)
    for i in (1, 2):
        cfg["data"][f"g_{i}_0"] = poly_to_expression(re_lambda_poly(coeffs, i, plant))
    geo = DiskGeometry.build(domain, SolveConfig(**{k: v for k, v in numerics.items()
                                                    if k in SolveConfig.__dataclass_fields__}))
    for i in (1, 2):
        cfg["constants"][f"c_{i}_0"] = _planted_constant(
            i, plant, _lam_hat_fn(coeffs, i), geo, sig)
    return cfg, plant, geo


def fixture_k2(p: int = 2, q: int = 2, eps: float = 1e-3,
               numerics: dict | None = None):
    """k = 2 quarter-disk problem: phi* = x m + m' with planted layers."""
    sig = Signature(p, q)
    domain = quarter_disk(eps=eps)
    m1 = type2_cubic(sig, Fraction(1, 8))                       # phi_1
    m0 = type1_quadratic(sig, Fraction(1, 2)) \
        + type2_linear(sig, Fraction(1, 4))                     # phi_0
    plant = m0 + x_power_multiply(m1, 1)
    coeffs = _DEFAULT_COEFFS
    numerics = _numerics_dict(**(numerics or {}))
    cfg = _config_shell(sig, 2, domain, coeffs, numerics)

    # layer traces: D phi* = -2 E_{n/2} m1; phi* itself for l = 0
    u1 = euler_op(Fraction(sig.n, 2), m1).scale(-2)
    for i in (1, 2):
        cfg["data"][f"g_{i}_0"] = poly_to_expression(re_lambda_poly(coeffs, i, plant))
        cfg["data"][f"g_{i}_1"] = poly_to_expression(re_lambda_poly(coeffs, i, u1))
    geo = DiskGeometry.build(domain, SolveConfig(**{k: v for k, v in numerics.items()
                                                    if k in SolveConfig.__dataclass_fields__}))
    for i in (1, 2):
        cfg["constants"][f"c_{i}_1"] = _planted_constant(
            i, u1, _lam_hat_fn(coeffs, i), geo, sig)
        cfg["constants"][f"c_{i}_0"] = _planted_constant(
            i, m0, _lam_hat_fn(coeffs, i), geo, sig)
    return cfg, {"plant": plant, "components": [m0, m1]}, geo


def fixture_disk_k1(numerics: dict | None = None):
    """Degenerate p = q = 1 disk problem with the holomorphic plant f_1 = z."""
    sig = Signature(1, 1)
    domain = unit_disk()
    plant = poly_quadruple(sig, A=RHO, B=R)      # f_1 = r + i rho = z
    coeffs = {"A_b": PolyField.constant(1), "B_b": PolyField.zero(),
              "C_b": PolyField.zero(), "D_b": PolyField.constant(1)}
    numerics = _numerics_dict(**(numerics or {}))
    cfg = _config_shell(sig, 1, domain, coeffs, numerics)
    for i in (1, 2):
        cfg["data"][f"g_{i}_0"] = poly_to_expression(re_lambda_poly(coeffs, i, plant))
    return cfg, plant


def fixture_perturbed(k: int = 1, alpha=None, p: int = 2, q: int = 2,
                      eps: float = 1e-3, numerics: dict | None = None):
    """Perturbed variant: same planted layers, data scaled by the meridian trace.

    The planted full-space solution is e^beta (sum x^j phi_j*); the config
    data carries the factor exp(beta) evaluated on the meridian section, so
    the solver's reduction recovers the unperturbed layer data exactly.
    """
    if k == 1:
        cfg, plant, geo = fixture_k1(p, q, eps, numerics)
        planted = {"plant": plant, "components": [plant]}
    elif k == 2:
        cfg, planted, geo = fixture_k2(p, q, eps, numerics)
    else:
        raise ValueError("perturbed fixtures cover k in {1, 2}")
    sig = Signature(p, q)
    alpha = np.zeros(sig.n) if alpha is None else np.asarray(alpha, dtype=float)
    cfg["alpha"] = [float(a) for a in alpha]
    a1, a2 = alpha[0], alpha[sig.p]
    factor = f"exp(({a1!r})*r + ({a2!r})*rho)"
    for name, expr in list(cfg["data"].items()):
        cfg["data"][name] = f"{factor}*({expr})"
    return cfg, planted, geo


def fixture_negative_index(g_expr: str = "cos(3*theta)"):
    """Disk problem whose first coefficient loop winds once: index m = -1.

    lambda_hat_1 = e^{i theta} needs A_b = -sin(theta), B_b = -cos(theta);
    the moment conditions on the data then accept cos(3 theta) and reject
    cos(theta).
    """
    return {
        "p": 1, "q": 1, "k": 1,
        "alpha": [0.0, 0.0],
        "domain": "unit_disk",
        "coefficients": {
            "A_b": "-sin(theta)", "B_b": "-cos(theta)",
            "C_b": "0", "D_b": "1",
        },
        "data": {"g_1_0": g_expr, "g_2_0": "0"},
        "numerics": _numerics_dict(),
        "seed": 7,
    }


def planted_field_error(bundle_assembled: BiaxialQuadruple,
                        plant: BiaxialQuadruple) -> float:
    """Sup difference of the four fields on the solution grid."""
    grid = bundle_assembled.A.grid
    worst = 0.0
    for got, want in zip(bundle_assembled.fields, plant.fields):
        ref = want.evaluate(grid.R, grid.RHO)
        worst = max(worst, float(np.max(np.abs(got.values - ref))))
    return worst
