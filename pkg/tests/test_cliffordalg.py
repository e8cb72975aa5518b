import numpy as np
import pytest

from biaxialrh.cliffordalg import (
    Multivector,
    Signature,
    VectorX,
    blade_product,
    conjugate,
    inner_product,
    mv_multiply,
    scalar_part,
    vector_inverse,
)


def random_mv(sig, rng):
    return Multivector(sig, rng.uniform(-1, 1, sig.blade_count))


def test_signature_validation():
    with pytest.raises(ValueError):
        Signature(0, 2)
    with pytest.raises(ValueError):
        Signature(7, 6)
    assert Signature(2, 3).n == 5


def test_blade_product_generators():
    # e_j^2 = -1
    assert blade_product(0b1, 0b1) == (-1, 0)
    # anticommutation: e1 e2 = +e12, e2 e1 = -e12
    assert blade_product(0b01, 0b10) == (1, 0b11)
    assert blade_product(0b10, 0b01) == (-1, 0b11)
    # scalar unit acts trivially
    assert blade_product(0, 0b10000) == (1, 0b10000)
    assert blade_product(0b10000, 0) == (1, 0b10000)


def test_blade_product_words():
    # e1e2 * e1e2 = -1
    assert blade_product(0b11, 0b11) == (-1, 0)
    # (e1e2) e2 = -e1 ; e2 (e1e2) = +e1
    assert blade_product(0b11, 0b10) == (-1, 0b01)
    assert blade_product(0b10, 0b11) == (1, 0b01)


def test_vector_square_law():
    sig = Signature(1, 1)
    x = Multivector.from_vector(sig, [1.0, 2.0])
    sq = mv_multiply(x, x)
    assert sq.scalar_part == pytest.approx(-5.0)
    assert np.allclose(sq.coeffs[1:], 0.0)


def test_multiply_expansion():
    sig = Signature(1, 1)
    one = Multivector.scalar(sig, 1.0)
    e1 = Multivector.basis_blade(sig, 0b1)
    prod = mv_multiply(one + e1, one - e1)
    assert prod.scalar_part == pytest.approx(2.0)
    assert np.allclose(prod.coeffs[1:], 0.0)


def test_unit_element():
    rng = np.random.default_rng(7)
    sig = Signature(2, 2)
    a = random_mv(sig, rng)
    one = Multivector.scalar(sig, 1.0)
    assert np.allclose(mv_multiply(a, one).coeffs, a.coeffs)
    assert np.allclose(mv_multiply(one, a).coeffs, a.coeffs)


def test_scalar_part_and_inner_product():
    sig = Signature(1, 1)
    a = Multivector(sig, [3.0, 0.0, 0.0, 2.0])  # 3 + 2 e1e2
    assert scalar_part(a) == pytest.approx(3.0)
    assert scalar_part(Multivector.basis_blade(sig, 0b1)) == 0.0
    rng = np.random.default_rng(11)
    sig = Signature(2, 1)
    for _ in range(20):
        u, v = random_mv(sig, rng), random_mv(sig, rng)
        assert inner_product(u, v) == pytest.approx(mv_multiply(u, v).scalar_part)


def test_inner_product_on_vectors_is_euclidean():
    rng = np.random.default_rng(3)
    sig = Signature(2, 2)
    for _ in range(50):
        xc = rng.normal(size=4)
        yc = rng.normal(size=4)
        x = Multivector.from_vector(sig, xc)
        ybar = conjugate(Multivector.from_vector(sig, yc))
        got = inner_product(x, ybar)
        assert got == pytest.approx(np.dot(xc, yc), rel=1e-13, abs=1e-13)


def test_conjugate():
    sig = Signature(2, 2)
    e1 = Multivector.basis_blade(sig, 0b1)
    assert np.allclose(conjugate(e1).coeffs, -e1.coeffs)
    c = Multivector.scalar(sig, 4.5)
    assert np.allclose(conjugate(c).coeffs, c.coeffs)
    rng = np.random.default_rng(5)
    xc = rng.normal(size=4)
    x = Multivector.from_vector(sig, xc)
    assert np.allclose(conjugate(x).coeffs, -x.coeffs)
    a = random_mv(sig, rng)
    assert np.array_equal(conjugate(conjugate(a)).coeffs, a.coeffs)


def test_conjugate_is_antiautomorphism():
    rng = np.random.default_rng(9)
    sig = Signature(2, 1)
    for _ in range(20):
        a, b = random_mv(sig, rng), random_mv(sig, rng)
        lhs = conjugate(mv_multiply(a, b))
        rhs = mv_multiply(conjugate(b), conjugate(a))
        assert np.allclose(lhs.coeffs, rhs.coeffs, atol=1e-13)


def test_vector_inverse():
    sig = Signature(1, 1)
    e1 = VectorX(sig, [1.0, 0.0])
    inv = vector_inverse(e1)
    assert np.allclose(inv.coeffs, [0.0, -1.0, 0.0, 0.0])
    x = VectorX(sig, [2.0, 0.0])
    inv = vector_inverse(x)
    prod = mv_multiply(x.as_multivector(), inv)
    assert prod.scalar_part == pytest.approx(1.0)
    assert np.allclose(prod.coeffs[1:], 0.0, atol=1e-15)
    with pytest.raises(ZeroDivisionError):
        vector_inverse(VectorX(sig, [0.0, 0.0]))


def test_associativity_sample():
    rng = np.random.default_rng(21)
    for p, q in [(1, 1), (2, 2), (3, 3)]:
        sig = Signature(p, q)
        for _ in range(50):
            a, b, c = (random_mv(sig, rng) for _ in range(3))
            lhs = mv_multiply(mv_multiply(a, b), c)
            rhs = mv_multiply(a, mv_multiply(b, c))
            assert np.max(np.abs(lhs.coeffs - rhs.coeffs)) < 1e-12


def test_vectorx_split():
    sig = Signature(2, 3)
    x = VectorX(sig, [3.0, 4.0, 0.0, 0.0, 12.0])
    assert x.r == pytest.approx(5.0)
    assert x.rho == pytest.approx(12.0)
    assert np.allclose(x.omega(), [0.6, 0.8])
    assert x.r**2 + x.rho**2 == pytest.approx(np.dot(x.coords, x.coords))
