"""Dense multivector arithmetic in the real Clifford algebra R_{0,n}.

Generators e_1..e_n square to -1 and anticommute.  A blade e_A is indexed
by the bitmask of A (bit j-1 set  <=>  e_j present), so blade 0 is the
scalar unit.  Multivectors store all 2^n coefficients in a flat float
array; for the dimensions used here (n <= 12, and in practice n <= 6)
this is small and keeps the geometric product a table lookup.

The bi-axial splitting R^n = R^p (+) R^q drives everything downstream:
a vector x = y + z with y the first p coordinates and z the last q,
r = |y|, rho = |z|, and unit directions omega = y/r, nu = z/rho.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

MAX_DIMENSION = 12
# Dense product tables are cached up to this dimension (2^8 x 2^8 ints).
_TABLE_DIMENSION = 8


@dataclass(frozen=True)
class Signature:
    """Bi-axial splitting (p, q) of R^n with n = p + q."""

    p: int
    q: int

    def __post_init__(self):
        if self.p < 1 or self.q < 1:
            raise ValueError(f"signature needs p >= 1 and q >= 1, got ({self.p}, {self.q})")
        if self.p + self.q > MAX_DIMENSION:
            raise ValueError(
                f"n = p + q = {self.p + self.q} exceeds the dimension cap {MAX_DIMENSION}"
            )

    @property
    def n(self) -> int:
        return self.p + self.q

    @property
    def blade_count(self) -> int:
        return 1 << self.n


def blade_product(a_mask: int, b_mask: int) -> tuple[int, int]:
    """Signed product of two basis blades: e_A e_B = sign * e_(A xor B).

    The sign counts the transpositions needed to interleave the two sorted
    generator words (each swap of distinct generators flips the sign) plus
    one flip per repeated generator, since e_j^2 = -1.
    """
    swaps = 0
    b = b_mask
    while b:
        bit = b & -b
        # generators of A strictly above this one must be crossed
        swaps += int(a_mask >> (bit.bit_length())).bit_count()
        b ^= bit
    swaps += (a_mask & b_mask).bit_count()
    return (-1 if swaps & 1 else 1), a_mask ^ b_mask


@lru_cache(maxsize=8)
def _product_tables(n: int):
    size = 1 << n
    signs = np.empty((size, size), dtype=np.int8)
    masks = np.empty((size, size), dtype=np.intp)
    for a in range(size):
        for b in range(size):
            s, m = blade_product(a, b)
            signs[a, b] = s
            masks[a, b] = m
    return signs, masks


@lru_cache(maxsize=16)
def _conjugation_signs(n: int) -> np.ndarray:
    # conj(e_A) = (-1)^(k(k+1)/2) e_A for a grade-k blade
    grades = np.array([int(m).bit_count() for m in range(1 << n)])
    return np.where((grades * (grades + 1) // 2) % 2 == 0, 1.0, -1.0)


class Multivector:
    """Element of R_{0,n}; immutable by convention."""

    __slots__ = ("sig", "coeffs")

    def __init__(self, sig: Signature, coeffs):
        self.sig = sig
        arr = np.asarray(coeffs, dtype=float)
        if arr.shape != (sig.blade_count,):
            raise ValueError(f"expected {sig.blade_count} coefficients, got {arr.shape}")
        self.coeffs = arr

    # -- constructors -------------------------------------------------
    @classmethod
    def zero(cls, sig: Signature) -> "Multivector":
        return cls(sig, np.zeros(sig.blade_count))

    @classmethod
    def scalar(cls, sig: Signature, value: float) -> "Multivector":
        c = np.zeros(sig.blade_count)
        c[0] = value
        return cls(sig, c)

    @classmethod
    def basis_blade(cls, sig: Signature, mask: int, value: float = 1.0) -> "Multivector":
        if not 0 <= mask < sig.blade_count:
            raise ValueError(f"blade mask {mask} out of range for n = {sig.n}")
        c = np.zeros(sig.blade_count)
        c[mask] = value
        return cls(sig, c)

    @classmethod
    def from_vector(cls, sig: Signature, coords) -> "Multivector":
        coords = np.asarray(coords, dtype=float)
        if coords.shape != (sig.n,):
            raise ValueError(f"vector needs {sig.n} coordinates")
        c = np.zeros(sig.blade_count)
        for j, x in enumerate(coords):
            c[1 << j] = x
        return cls(sig, c)

    # -- linear structure ---------------------------------------------
    def _check(self, other: "Multivector"):
        if self.sig != other.sig:
            raise ValueError("signature mismatch")

    def __add__(self, other):
        if isinstance(other, Multivector):
            self._check(other)
            return Multivector(self.sig, self.coeffs + other.coeffs)
        return Multivector(self.sig, self.coeffs + Multivector.scalar(self.sig, other).coeffs)

    def __sub__(self, other):
        if isinstance(other, Multivector):
            self._check(other)
            return Multivector(self.sig, self.coeffs - other.coeffs)
        return self + (-other)

    def __neg__(self):
        return Multivector(self.sig, -self.coeffs)

    def scale(self, a: float) -> "Multivector":
        return Multivector(self.sig, a * self.coeffs)

    def __mul__(self, other):
        if isinstance(other, Multivector):
            return mv_multiply(self, other)
        return self.scale(float(other))

    def __rmul__(self, other):
        return self.scale(float(other))

    # -- algebra operations -------------------------------------------
    @property
    def scalar_part(self) -> float:
        return float(self.coeffs[0])

    def conjugate(self) -> "Multivector":
        return Multivector(self.sig, self.coeffs * _conjugation_signs(self.sig.n))

    def norm(self) -> float:
        return float(np.sqrt(np.sum(self.coeffs**2)))

    def vector_part(self) -> np.ndarray:
        return np.array([self.coeffs[1 << j] for j in range(self.sig.n)])

    def __repr__(self):
        nz = {int(m): float(c) for m, c in enumerate(self.coeffs) if c != 0.0}
        return f"Multivector(n={self.sig.n}, {nz})"


def mv_multiply(a: Multivector, b: Multivector) -> Multivector:
    """Geometric product, bilinear and associative."""
    if a.sig != b.sig:
        raise ValueError("signature mismatch")
    n = a.sig.n
    if n <= _TABLE_DIMENSION:
        signs, masks = _product_tables(n)
        prod = np.outer(a.coeffs, b.coeffs) * signs
        out = np.bincount(masks.ravel(), weights=prod.ravel(), minlength=a.sig.blade_count)
        return Multivector(a.sig, out)
    out = np.zeros(a.sig.blade_count)
    for ma in np.flatnonzero(a.coeffs):
        ca = a.coeffs[ma]
        for mb in np.flatnonzero(b.coeffs):
            s, m = blade_product(int(ma), int(mb))
            out[m] += s * ca * b.coeffs[mb]
    return Multivector(a.sig, out)


def scalar_part(a: Multivector) -> float:
    return a.scalar_part


def conjugate(a: Multivector) -> Multivector:
    return a.conjugate()


def inner_product(a: Multivector, b: Multivector) -> float:
    """(a, b) = scalar part of the geometric product a b."""
    return mv_multiply(a, b).scalar_part


class VectorX:
    """Point of R^n seen through the bi-axial splitting."""

    __slots__ = ("sig", "coords")

    def __init__(self, sig: Signature, coords):
        self.sig = sig
        arr = np.asarray(coords, dtype=float)
        if arr.shape != (sig.n,):
            raise ValueError(f"point needs {sig.n} coordinates")
        self.coords = arr

    @property
    def y(self) -> np.ndarray:
        return self.coords[: self.sig.p]

    @property
    def z(self) -> np.ndarray:
        return self.coords[self.sig.p :]

    @property
    def r(self) -> float:
        return float(np.linalg.norm(self.y))

    @property
    def rho(self) -> float:
        return float(np.linalg.norm(self.z))

    def omega(self) -> np.ndarray:
        r = self.r
        if r == 0.0:
            raise ZeroDivisionError("omega undefined at r = 0")
        return self.y / r

    def nu(self) -> np.ndarray:
        rho = self.rho
        if rho == 0.0:
            raise ZeroDivisionError("nu undefined at rho = 0")
        return self.z / rho

    def as_multivector(self) -> Multivector:
        return Multivector.from_vector(self.sig, self.coords)

    def shifted(self, j: int, h: float) -> "VectorX":
        c = self.coords.copy()
        c[j] += h
        return VectorX(self.sig, c)


def vector_inverse(x: VectorX) -> Multivector:
    """x^{-1} = conj(x) / |x|^2; requires x != 0."""
    norm2 = float(np.dot(x.coords, x.coords))
    if norm2 == 0.0:
        raise ZeroDivisionError("zero vector has no inverse")
    return Multivector.from_vector(x.sig, -x.coords / norm2)
