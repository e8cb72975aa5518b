from fractions import Fraction

import numpy as np
import pytest

from biaxialrh.cliffordalg import Multivector, Signature, VectorX, mv_multiply
from biaxialrh.domains import quarter_disk, rect_domain, unit_disk
from biaxialrh.fields import (
    AxisEvaluationError,
    BiaxialQuadruple,
    ChartGrid,
    DivisibilityError,
    GridField,
    PolyField,
    cheb_diff_matrix,
    cheb_nodes,
    divide_by_axis,
    field_arith,
    poly_quadruple,
    quadruple_evaluate,
    vekua_residual_type1,
    vekua_residual_type2,
)

R = PolyField.monomial(1, 0)
RHO = PolyField.monomial(0, 1)


def random_rotation(dim, rng):
    if dim == 1:
        return np.array([[1.0]])
    m = rng.normal(size=(dim, dim))
    qm, _ = np.linalg.qr(m)
    if np.linalg.det(qm) < 0:
        qm[:, 0] = -qm[:, 0]
    return qm


# -- polynomial backend -----------------------------------------------------

def test_poly_arithmetic():
    assert field_arith(R, R, "add") == R.scale(2)
    assert field_arith(R, RHO, "mul") == PolyField.monomial(1, 1)
    assert field_arith(PolyField.monomial(2, 0), -1, "scale") == PolyField.monomial(2, 0, -1)


def test_poly_divide_axis():
    assert divide_by_axis(PolyField.monomial(2, 1), "r") == PolyField.monomial(1, 1)
    with pytest.raises(DivisibilityError):
        divide_by_axis(PolyField.monomial(2, 0) + PolyField.constant(1), "r")


def test_poly_exact_rationals():
    f = PolyField.monomial(1, 1, 1)
    g = f.ray_integral(Fraction(5, 2))
    assert g.coeffs[(1, 1)] == Fraction(2, 9)
    assert g.euler(Fraction(5, 2)) == f


def test_poly_derivatives_and_eval():
    f = PolyField({(2, 1): 3})  # 3 r^2 rho
    assert f.d_dr() == PolyField({(1, 1): 6})
    assert f.d_drho() == PolyField({(2, 0): 3})
    assert f.evaluate(2.0, 0.5) == pytest.approx(6.0)
    vals = f.evaluate(np.array([1.0, 2.0]), np.array([1.0, 1.0]))
    assert np.allclose(vals, [3.0, 12.0])


# -- Chebyshev machinery ------------------------------------------------------

def test_cheb_diff_exact_on_polynomials():
    x = cheb_nodes(12, 0.3, 2.0)
    D = cheb_diff_matrix(12, 0.3, 2.0)
    f = x**5 - 2 * x**2 + 1
    assert np.allclose(D @ f, 5 * x**4 - 4 * x, atol=1e-10)


def test_grid_interpolation_reproduces_poly():
    # degree well under grid order: 1e-9 relative reproduction
    poly = PolyField({(3, 2): 1.5, (1, 0): -2, (0, 4): Fraction(1, 3)})
    rng = np.random.default_rng(2)
    for dom in (rect_domain(0.2, 1.1, 0.3, 0.9), quarter_disk()):
        grid = ChartGrid.for_domain(dom, 21, 21)
        gf = GridField.from_poly(grid, poly)
        pts_r = rng.uniform(0.35, 0.6, 40)
        pts_rho = rng.uniform(0.35, 0.6, 40)
        exact = poly.evaluate(pts_r, pts_rho)
        got = gf.evaluate(pts_r, pts_rho)
        assert np.max(np.abs(got - exact) / np.maximum(np.abs(exact), 1e-6)) < 1e-9


def test_grid_derivatives_polar():
    grid = ChartGrid.for_domain(quarter_disk(), 25, 25)
    f = GridField.from_poly(grid, PolyField.monomial(2, 0))  # r^2
    assert np.max(np.abs(f.d_dr().values - 2 * grid.R)) < 1e-9
    assert np.max(np.abs(f.d_drho().values)) < 1e-9
    g = GridField.from_poly(grid, PolyField.monomial(1, 1))
    assert np.max(np.abs(g.d_drho().values - grid.R)) < 1e-9


def test_grid_divide_axis():
    grid = ChartGrid.for_domain(quarter_disk(), 17, 17)
    f = GridField.from_poly(grid, PolyField.monomial(2, 0))
    got = divide_by_axis(f, "r")
    assert np.max(np.abs(got.values - grid.R)) < 1e-12


def test_grid_ray_integral_matches_poly():
    grid = ChartGrid.for_domain(quarter_disk(), 17, 17)
    poly = PolyField({(2, 0): 1, (1, 1): -3, (0, 0): 2})
    f = GridField.from_poly(grid, poly)
    s = 2.5
    exact = GridField.from_poly(grid, poly.ray_integral(Fraction(5, 2)))
    got = f.ray_integral(s)
    assert np.max(np.abs(got.values - exact.values)) < 1e-10


def test_grid_euler_matches_poly():
    grid = ChartGrid.for_domain(quarter_disk(), 17, 17)
    poly = PolyField({(2, 0): 1, (0, 3): 2})
    f = GridField.from_poly(grid, poly)
    exact = GridField.from_poly(grid, poly.euler(2))
    assert np.max(np.abs(f.euler(2).values - exact.values)) < 1e-9


def test_grid_csv_roundtrip(tmp_path):
    grid = ChartGrid.for_domain(rect_domain(0.2, 1.0, 0.2, 1.0), 9, 9)
    f = GridField.from_poly(grid, PolyField({(1, 2): 0.7}))
    path = tmp_path / "field.csv"
    f.to_csv(path)
    first = path.read_text().splitlines()[0]
    assert first == "r,rho,value"
    g = GridField.from_csv(grid, path)
    assert np.array_equal(f.values, g.values)


# -- quadruples ---------------------------------------------------------------

def test_quadruple_evaluate_constant():
    sig = Signature(2, 2)
    f = poly_quadruple(sig, A=PolyField.constant(1))
    x = VectorX(sig, [0.3, 0.1, -0.2, 0.5])
    out = quadruple_evaluate(f, x)
    assert out.scalar_part == pytest.approx(1.0)
    assert np.allclose(out.coeffs[1:], 0.0)


def test_quadruple_evaluate_vector():
    sig = Signature(2, 2)
    f = poly_quadruple(sig, C=R, D=RHO)
    x = VectorX(sig, [0.3, 0.1, -0.2, 0.5])
    out = quadruple_evaluate(f, x)
    assert np.allclose(out.coeffs, x.as_multivector().coeffs)


def test_quadruple_evaluate_bivector():
    sig = Signature(2, 2)
    f = poly_quadruple(sig, B=PolyField.constant(1))
    x = VectorX(sig, [1.0, 0.0, 1.0, 0.0])
    out = quadruple_evaluate(f, x)
    e1 = Multivector.basis_blade(sig, 0b0001)
    e3 = Multivector.basis_blade(sig, 0b0100)
    assert np.allclose(out.coeffs, mv_multiply(e1, e3).coeffs)


def test_quadruple_axis_guard():
    sig = Signature(2, 2)
    ok = poly_quadruple(sig, C=R, D=RHO)
    x_axis = VectorX(sig, [0.0, 0.0, 1.0, 0.0])  # r = 0
    out = quadruple_evaluate(ok, x_axis)  # C vanishes there
    assert np.allclose(out.coeffs, x_axis.as_multivector().coeffs)
    bad = poly_quadruple(sig, C=PolyField.constant(1))
    with pytest.raises(AxisEvaluationError):
        quadruple_evaluate(bad, x_axis)


def test_quadruple_rotation_invariance():
    # evaluating at (P y, Q z) only rotates omega and nu; the scalar part
    # and the coefficients along the rotated directions are unchanged
    rng = np.random.default_rng(4)
    sig = Signature(2, 3)
    f = poly_quadruple(
        sig,
        A=PolyField({(2, 0): 1, (0, 2): -2}),
        B=PolyField.monomial(1, 1, 1),
        C=R.scale(2),
        D=RHO.scale(-1),
    )
    for _ in range(10):
        coords = rng.uniform(0.2, 0.9, 5)
        x = VectorX(sig, coords)
        P = random_rotation(2, rng)
        Q = random_rotation(3, rng)
        xr = VectorX(sig, np.concatenate([P @ x.y, Q @ x.z]))
        out, out_r = quadruple_evaluate(f, x), quadruple_evaluate(f, xr)
        assert out_r.scalar_part == pytest.approx(out.scalar_part, abs=1e-12)
        # vector parts rotate with block-diag(P, Q)
        block = np.zeros((5, 5))
        block[:2, :2] = P
        block[2:, 2:] = Q
        assert np.allclose(out_r.vector_part(), block @ out.vector_part(), atol=1e-12)


# -- Vekua residuals -----------------------------------------------------------

def test_vekua_type1_residuals():
    sig = Signature(2, 3)
    const = poly_quadruple(sig, A=PolyField.constant(1))
    r1, r2 = vekua_residual_type1(const)
    assert r1.is_zero and r2.is_zero
    f = poly_quadruple(sig, A=RHO)
    r1, r2 = vekua_residual_type1(f)
    assert r1.is_zero and r2 == PolyField.constant(1)
    g = poly_quadruple(sig, A=R)
    r1, r2 = vekua_residual_type1(g)
    assert r1 == PolyField.constant(1) and r2.is_zero


def test_vekua_type2_residuals():
    sig = Signature(2, 3)
    p, q = sig.p, sig.q
    zero = poly_quadruple(sig)
    r1, r2 = vekua_residual_type2(zero)
    assert r1.is_zero and r2.is_zero
    f = poly_quadruple(sig, C=R.scale(2 * q), D=RHO.scale(-2 * p))
    r1, r2 = vekua_residual_type2(f)
    assert r1.is_zero and r2.is_zero
    g = poly_quadruple(sig, C=R)
    r1, r2 = vekua_residual_type2(g)
    assert r1 == PolyField.constant(p) and r2.is_zero


def test_vekua_linearity():
    sig = Signature(3, 2)
    f = poly_quadruple(sig, A=PolyField({(2, 0): 1}), B=PolyField.monomial(1, 1, 2))
    g = poly_quadruple(sig, A=PolyField({(0, 2): 3}), B=PolyField.monomial(1, 1, -1))
    fr = vekua_residual_type1(f)
    gr = vekua_residual_type1(g)
    sr = vekua_residual_type1(f + g)
    assert sr[0] == fr[0] + gr[0]
    assert sr[1] == fr[1] + gr[1]


def test_unit_disk_chart_covers_circle():
    grid = ChartGrid.for_domain(unit_disk(), 13, 21)
    f = GridField.from_function(grid, lambda r, rho: r**2 + rho**2)
    assert f.evaluate(0.3, -0.4) == pytest.approx(0.25, abs=1e-9)
