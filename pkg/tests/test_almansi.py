from fractions import Fraction

import numpy as np
import pytest

from biaxialrh.almansi import (
    AlmansiComponents,
    DecompositionError,
    decompose,
    decompose_perturbed,
    harmonic_radial_poly,
    make_k_monogenic_sample,
    monogenic_generators,
    planted_monogenic,
    recompose,
)
from biaxialrh.cliffordalg import Multivector, Signature, VectorX
from biaxialrh.domains import quarter_disk
from biaxialrh.fields import (
    BiaxialQuadruple,
    ChartGrid,
    GridField,
    PolyField,
    poly_quadruple,
    quadruple_evaluate,
)
from biaxialrh.operators import (
    beta_eval,
    dirac_biaxial,
    dirac_power,
    perturbed_dirac_pointwise,
    x_power_multiply,
)

R = PolyField.monomial(1, 0)
RHO = PolyField.monomial(0, 1)


def quad_equal(f, g):
    return (f - g).is_zero


def test_harmonic_radial_poly_is_weighted_harmonic():
    for p, q in [(2, 2), (2, 3), (3, 3)]:
        sig = Signature(p, q)
        for d in (1, 2, 3):
            h = harmonic_radial_poly(sig, d)
            lap = h.d_dr().d_dr() + h.d_drho().d_drho()
            lap = lap + h.d_dr().divide_axis("r").scale(p - 1)
            lap = lap + h.d_drho().divide_axis("rho").scale(q - 1)
            assert lap.is_zero


def test_generators_are_monogenic():
    for p, q in [(1, 1), (2, 2), (2, 3), (3, 3)]:
        sig = Signature(p, q)
        for g in monogenic_generators(sig):
            assert dirac_biaxial(g).is_zero


def test_decompose_constant():
    sig = Signature(2, 2)
    c = poly_quadruple(sig, A=PolyField.constant(5))
    out = decompose(c, 2)
    assert quad_equal(out.components[0], c)
    assert out.components[1].is_zero


def test_decompose_vector():
    sig = Signature(2, 2)
    xq = poly_quadruple(sig, C=R, D=RHO)
    out = decompose(xq, 2)
    assert out.components[0].is_zero
    assert quad_equal(out.components[1], poly_quadruple(sig, A=PolyField.constant(1)))
    assert quad_equal(recompose(out), xq)


def test_construct_then_decompose_k2():
    rng = np.random.default_rng(50)
    sig = Signature(2, 2)
    g = planted_monogenic(sig, rng)
    f = planted_monogenic(sig, rng)
    phi = g + x_power_multiply(f, 1)
    out = decompose(phi, 2)
    assert quad_equal(out.components[0], g)
    assert quad_equal(out.components[1], f)


@pytest.mark.parametrize("k", [2, 3, 4])
def test_construct_then_decompose_exact(k):
    rng = np.random.default_rng(60 + k)
    for p, q in [(2, 2), (2, 3)]:
        sig = Signature(p, q)
        planted = [planted_monogenic(sig, rng) for _ in range(k)]
        phi = None
        for j, m in enumerate(planted):
            term = x_power_multiply(m, j)
            phi = term if phi is None else phi + term
        out = decompose(phi, k)
        for got, want in zip(out.components, planted):
            assert quad_equal(got, want)
        assert quad_equal(recompose(out), phi)
        for comp in out.components:
            assert dirac_biaxial(comp).is_zero


def test_decompose_paths():
    # the printed Q_k normalization inverts only k <= 2; above that the
    # frak-normalized extractor chain takes over and is recorded
    rng = np.random.default_rng(77)
    sig = Signature(2, 2)
    phi2 = make_k_monogenic_sample(sig, 2, seed=1)
    assert decompose(phi2, 2).diagnostics["path"] == "q_op"
    phi3 = make_k_monogenic_sample(sig, 3, seed=2)
    assert decompose(phi3, 3).diagnostics["path"] == "extractor"


def test_decompose_uniqueness():
    sig = Signature(2, 3)
    phi = make_k_monogenic_sample(sig, 3, seed=9)
    a = decompose(phi, 3)
    b = decompose(phi, 3)
    for x, y in zip(a.components, b.components):
        assert quad_equal(x, y)


def test_decompose_rejects_non_polymonogenic():
    sig = Signature(2, 2)
    bad = poly_quadruple(sig, A=PolyField.monomial(4, 0))
    with pytest.raises(DecompositionError, match="not 2-monogenic"):
        decompose(bad, 2)


def test_recompose_trivials():
    sig = Signature(2, 2)
    c = poly_quadruple(sig, A=PolyField.constant(3))
    zero = BiaxialQuadruple.zero_poly(sig)
    out = recompose(AlmansiComponents(2, [c, zero], np.zeros(4)))
    assert quad_equal(out, c)
    one = poly_quadruple(sig, A=PolyField.constant(1))
    out = recompose(AlmansiComponents(2, [zero, one], np.zeros(4)))
    assert quad_equal(out, poly_quadruple(sig, C=R, D=RHO))


def test_make_k_monogenic_sample_orders():
    sig = Signature(2, 2)
    m1 = make_k_monogenic_sample(sig, 1, seed=3)
    assert dirac_biaxial(m1).is_zero
    m2 = make_k_monogenic_sample(sig, 2, seed=4)
    assert dirac_power(m2, 2).is_zero
    assert not dirac_biaxial(m2).is_zero


def test_smooth_low_degree_is_polymonogenic():
    # degree <= k-1 quadruples in the smooth class: each Dirac drops degree
    sig = Signature(2, 3)
    f = poly_quadruple(sig, A=PolyField.constant(2), C=R.scale(3), D=RHO.scale(-1))
    assert dirac_power(f, 2).is_zero


def test_decompose_perturbed_alpha_zero_matches_plain():
    sig = Signature(2, 2)
    phi = make_k_monogenic_sample(sig, 2, seed=11)
    a = decompose(phi, 2)
    b = decompose_perturbed(phi, 2, np.zeros(4))
    for x, y in zip(a.components, b.components):
        assert quad_equal(x, y)


def test_decompose_perturbed_exponential_factor():
    sig = Signature(2, 2)
    alpha = np.array([0.3, -0.1, 0.2, 0.0])
    psi = poly_quadruple(sig, A=PolyField.constant(1))
    out = decompose_perturbed(psi, 1, alpha)
    assert quad_equal(out.components[0], psi)

    # full-space solution e^beta satisfies (D - alpha) e^beta = 0
    def solution(x):
        val = quadruple_evaluate(recompose(out), x)
        return val.scale(np.exp(beta_eval(alpha, x)))

    rng = np.random.default_rng(5)
    for _ in range(5):
        x = VectorX(sig, rng.uniform(0.2, 0.8, 4))
        res = perturbed_dirac_pointwise(alpha, solution, x, 1e-4)
        assert np.max(np.abs(res.coeffs)) < 1e-7


def test_decompose_perturbed_vector_times_exponential():
    sig = Signature(2, 2)
    alpha = np.array([1.0, 0.0, 0.0, 0.0])
    psi = poly_quadruple(sig, C=R, D=RHO)  # the vector x as a quadruple
    out = decompose_perturbed(psi, 2, alpha)
    assert out.components[0].is_zero
    assert quad_equal(out.components[1], poly_quadruple(sig, A=PolyField.constant(1)))

    def solution(x):
        val = quadruple_evaluate(recompose(out), x)
        return val.scale(np.exp(beta_eval(alpha, x)))

    rng = np.random.default_rng(6)
    for _ in range(3):
        x = VectorX(sig, rng.uniform(0.3, 0.7, 4))
        inner = lambda y, _a=alpha: perturbed_dirac_pointwise(_a, solution, y, 1e-3)
        res = perturbed_dirac_pointwise(alpha, inner, x, 1e-3)
        assert np.max(np.abs(res.coeffs)) < 1e-4


def test_grid_decompose_matches_poly():
    sig = Signature(2, 2)
    phi = make_k_monogenic_sample(sig, 2, seed=21)
    grid = ChartGrid.for_domain(quarter_disk(), 25, 25)
    phig = phi.to_grid(grid)
    out = decompose(phig, 2)
    ref = decompose(phi, 2)
    for got, want in zip(out.components, ref.components):
        want_g = want.to_grid(grid)
        err = max((a - b).max_abs() for a, b in zip(got.fields, want_g.fields))
        assert err < 1e-8
    recon_err = max(f.max_abs() for f in (recompose(out) - phig).fields)
    assert recon_err < 1e-8
    # Dirac residuals of grid components are measured spectrally; the 1/r,
    # 1/rho divisions near the trim make this a relative-scale check
    scale = phig.max_abs()
    assert all(r < 1e-8 * scale for r in out.diagnostics["component_residuals"])
