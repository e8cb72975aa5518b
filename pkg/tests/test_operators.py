from fractions import Fraction

import numpy as np
import pytest

from biaxialrh.almansi import monogenic_generators, planted_monogenic
from biaxialrh.cliffordalg import Multivector, Signature, VectorX
from biaxialrh.fields import BiaxialQuadruple, PolyField, poly_quadruple, quadruple_evaluate
from biaxialrh.operators import (
    beta_eval,
    bracket_fn,
    component_extractor,
    dirac_biaxial,
    dirac_power,
    dirac_power_of_x,
    euler_op,
    fd_dirac_fullspace,
    frak_coeff,
    i_op,
    perturbed_dirac_pointwise,
    q_op,
    x_multiply,
    x_power_multiply,
)

R = PolyField.monomial(1, 0)
RHO = PolyField.monomial(0, 1)


def smooth_random_quadruple(sig, rng, nterms=3):
    """Random quadruple in the smooth bi-axial class:
    A, and the cofactors of B/(r rho), C/r, D/rho, are polynomials in (r^2, rho^2)."""

    def even_poly():
        out = {}
        for _ in range(nterms):
            i, j = rng.integers(0, 3, 2)
            out[(2 * i, 2 * j)] = out.get((2 * i, 2 * j), 0) + Fraction(
                int(rng.integers(-3, 4)), int(rng.integers(1, 3)))
        return PolyField(out)

    A = even_poly()
    B = PolyField.monomial(1, 1) * even_poly()
    C = R * even_poly()
    D = RHO * even_poly()
    return BiaxialQuadruple(sig, A, B, C, D)


def quad_equal(f, g):
    return (f - g).is_zero


# -- Dirac in the four-component reduction ------------------------------------

def test_dirac_constants():
    sig = Signature(2, 2)
    f = poly_quadruple(sig, A=PolyField.constant(1))
    assert dirac_biaxial(f).is_zero


def test_dirac_of_x():
    for p, q in [(1, 1), (2, 2), (2, 3)]:
        sig = Signature(p, q)
        f = poly_quadruple(sig, C=R, D=RHO)
        out = dirac_biaxial(f)
        assert out.A == PolyField.constant(-(p + q))
        assert out.B.is_zero and out.C.is_zero and out.D.is_zero


def test_dirac_of_r_squared():
    sig = Signature(2, 2)
    f = poly_quadruple(sig, A=PolyField.monomial(2, 0))
    out = dirac_biaxial(f)
    assert out.C == R.scale(2)
    assert out.A.is_zero and out.B.is_zero and out.D.is_zero


def test_dirac_matches_fullspace_fd():
    rng = np.random.default_rng(12)
    for p, q in [(1, 1), (2, 2), (2, 3)]:
        sig = Signature(p, q)
        f = smooth_random_quadruple(sig, rng)
        df = dirac_biaxial(f)
        phi = lambda x: quadruple_evaluate(f, x)
        for _ in range(10):
            coords = rng.uniform(0.25, 0.8, sig.n)
            x = VectorX(sig, coords)
            fd = fd_dirac_fullspace(phi, x, 1e-4)
            exact = quadruple_evaluate(df, x)
            scale = max(np.max(np.abs(exact.coeffs)), 1.0)
            assert np.max(np.abs(fd.coeffs - exact.coeffs)) / scale < 1e-6


# -- multiplication by x --------------------------------------------------------

def test_x_multiply_on_scalar():
    sig = Signature(2, 2)
    f = poly_quadruple(sig, A=PolyField.constant(1))
    out = x_multiply(f)
    assert quad_equal(out, poly_quadruple(sig, C=R, D=RHO))


def test_x_multiply_squares_vector():
    sig = Signature(2, 2)
    xq = poly_quadruple(sig, C=R, D=RHO)
    out = x_multiply(xq)
    expect = poly_quadruple(sig, A=PolyField({(2, 0): -1, (0, 2): -1}))
    assert quad_equal(out, expect)


def test_x_multiply_on_bivector():
    sig = Signature(2, 2)
    f = poly_quadruple(sig, B=PolyField.constant(1))
    out = x_multiply(f)
    assert quad_equal(out, poly_quadruple(sig, C=RHO, D=R.scale(-1)))
    # cross-check against the blade product at random points
    rng = np.random.default_rng(3)
    for _ in range(5):
        x = VectorX(sig, rng.uniform(0.2, 1.0, 4))
        lhs = quadruple_evaluate(out, x)
        rhs = x.as_multivector() * quadruple_evaluate(f, x)
        assert np.allclose(lhs.coeffs, rhs.coeffs, atol=1e-12)


# -- Euler and ray-integral operators -------------------------------------------

def test_euler_on_homogeneous():
    sig = Signature(2, 2)
    c = poly_quadruple(sig, A=PolyField.constant(3))
    assert quad_equal(euler_op(2, c), c.scale(2))
    f = poly_quadruple(sig, A=PolyField.monomial(2, 0))
    assert quad_equal(euler_op(2, f), f.scale(4))


def test_ray_integral_values():
    sig = Signature(2, 2)
    one = poly_quadruple(sig, A=PolyField.constant(1))
    assert quad_equal(i_op(2, one), one.scale(Fraction(1, 2)))
    r2 = poly_quadruple(sig, A=PolyField.monomial(2, 0))
    assert quad_equal(i_op(Fraction(5, 2), r2), r2.scale(Fraction(2, 9)))
    with pytest.raises(ValueError):
        i_op(0, one)


def test_euler_ray_inverse_pair():
    rng = np.random.default_rng(8)
    sig = Signature(2, 3)
    f = smooth_random_quadruple(sig, rng)
    s = Fraction(5, 2)
    assert quad_equal(euler_op(s, i_op(s, f)), f)
    assert quad_equal(i_op(s, euler_op(s, f)), f)


def test_dirac_euler_commutation():
    rng = np.random.default_rng(15)
    sig = Signature(2, 2)
    f = smooth_random_quadruple(sig, rng)
    s = Fraction(7, 3)
    lhs = dirac_biaxial(euler_op(s, f))
    rhs = euler_op(s + 1, dirac_biaxial(f))
    assert quad_equal(lhs, rhs)


def test_monogenicity_preserved_by_euler_and_ray():
    rng = np.random.default_rng(30)
    sig = Signature(2, 2)
    m = planted_monogenic(sig, rng)
    assert dirac_biaxial(m).is_zero
    assert dirac_biaxial(euler_op(Fraction(3, 2), m)).is_zero
    assert dirac_biaxial(i_op(Fraction(3, 2), m)).is_zero


# -- bracket, coefficients, closed form ------------------------------------------

def test_bracket_fn():
    assert bracket_fn(1) == 1
    assert bracket_fn(Fraction(1, 2)) == 1
    assert bracket_fn(Fraction(3, 2)) == 2
    assert bracket_fn(4) == 4
    with pytest.raises(ValueError):
        bracket_fn(0)


def test_frak_coefficients():
    assert frak_coeff(1, 1) == -2
    assert frak_coeff(1, 2) == -2
    assert frak_coeff(2, 2) == 4
    assert frak_coeff(2, 3) == 4
    assert frak_coeff(3, 3) == -8
    assert frak_coeff(4, 4) == 32
    with pytest.raises(ValueError):
        frak_coeff(3, 2)


def test_q_op_k1():
    sig = Signature(2, 2)  # n = 4, Q_1 = -(1/2) I_2
    f = poly_quadruple(sig, A=PolyField.constant(-4))
    assert quad_equal(q_op(1, f), poly_quadruple(sig, A=PolyField.constant(1)))
    xq = poly_quadruple(sig, C=R, D=RHO)
    assert quad_equal(q_op(1, dirac_biaxial(xq)), poly_quadruple(sig, A=PolyField.constant(1)))


def test_dirac_power_of_x_closed_form_matches_composition():
    rng = np.random.default_rng(40)
    for p, q in [(2, 2), (2, 3)]:
        sig = Signature(p, q)
        m = planted_monogenic(sig, rng)
        for j in range(1, 5):
            xj = x_power_multiply(m, j)
            for l in range(1, j + 1):
                closed = dirac_power_of_x(l, j, m)
                composed = dirac_power(xj, l)
                assert quad_equal(closed, composed), (p, q, l, j)


def test_dirac_power_of_x_base_conventions():
    sig = Signature(2, 2)  # n = 4
    c = poly_quadruple(sig, A=PolyField.constant(1))
    # D(x c) = -n c under the self-consistent chain base n/2
    out = dirac_power_of_x(1, 1, c)
    assert quad_equal(out, c.scale(-4))
    # the alternative (n+1)/2 convention gives -(n+1) c instead
    alt = dirac_power_of_x(1, 1, c, euler_base=Fraction(5, 2))
    assert quad_equal(alt, c.scale(-5))
    # l=1, j=2: -2 x f, base-independent (empty chain)
    out2 = dirac_power_of_x(1, 2, c)
    assert quad_equal(out2, x_multiply(c).scale(-2))


def test_dirac_power_of_x_rejects_non_monogenic():
    sig = Signature(2, 2)
    bad = poly_quadruple(sig, A=PolyField.monomial(2, 0))
    with pytest.raises(ValueError, match="not monogenic"):
        dirac_power_of_x(1, 1, bad)


def test_component_extractor_inverts():
    rng = np.random.default_rng(41)
    sig = Signature(2, 3)
    m = planted_monogenic(sig, rng)
    for j in range(1, 5):
        image = dirac_power(x_power_multiply(m, j), j)
        assert quad_equal(component_extractor(j, image), m), j


# -- perturbation utilities -------------------------------------------------------

def test_beta_eval():
    sig = Signature(2, 2)
    assert beta_eval([1, 0, 0, 0], VectorX(sig, [2, 0, 0, 0])) == pytest.approx(2.0)
    assert beta_eval([0, 0, 0, 0], VectorX(sig, [1, 2, 3, 4])) == 0.0
    assert beta_eval([1, 1, 0, 0], VectorX(sig, [1, -1, 0, 0])) == pytest.approx(0.0)


def test_perturbed_dirac_pointwise():
    sig = Signature(2, 2)
    x_fn = lambda x: x.as_multivector()
    pt = VectorX(sig, [0.3, 0.4, 0.5, 0.1])
    out = perturbed_dirac_pointwise(np.zeros(4), x_fn, pt, 1e-5)
    assert out.scalar_part == pytest.approx(-4.0, abs=1e-9)
    assert np.allclose(out.coeffs[1:], 0.0, atol=1e-9)

    alpha = np.array([0.4, -0.2, 0.1, 0.3])
    exp_beta = lambda x: Multivector.scalar(sig, np.exp(beta_eval(alpha, x)))
    out = perturbed_dirac_pointwise(alpha, exp_beta, pt, 1e-4)
    assert np.max(np.abs(out.coeffs)) < 1e-7

    const = lambda x: Multivector.scalar(sig, 2.0)
    out = perturbed_dirac_pointwise(np.zeros(4), const, pt, 1e-4)
    assert np.max(np.abs(out.coeffs)) == 0.0
