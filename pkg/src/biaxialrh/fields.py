"""Scalar fields over the projected (r, rho) domain and bi-axial quadruples.

Two interchangeable backends:

* ``PolyField`` -- bivariate polynomials in (r, rho) with exact ``Fraction``
  coefficients when built from integer data.  Operator identities are
  checked on this backend, where they hold exactly.

* ``GridField`` -- values on a tensor Chebyshev grid expressed in a
  coordinate chart fitted to the domain: a polar chart (s, t) with
  r = s cos t, rho = s sin t for the disk-like domains, or the identity
  chart for rectangles.  Differentiation is spectral; interpolation is
  barycentric.  The polar chart is what makes radial ray integrals and
  Euler scalings one-dimensional, and it keeps every grid node inside
  the curved domain (a plain bounding-box grid would not).

A bi-axial function  phi = A + omega nu B + omega C + nu D  is stored as
the quadruple of its four scalar fields.  Smooth bi-axial functions have
B and C divisible by r and B and D divisible by rho; the divide-by-axis
operations enforce this exactly on polynomials and pointwise on grids.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi

from .cliffordalg import Multivector, Signature, VectorX, mv_multiply
from .domains import ProjectedDomain


class DivisibilityError(ValueError):
    """A 1/r or 1/rho application hit a non-divisible polynomial term."""


class AxisEvaluationError(ValueError):
    """Direction-dependent component does not vanish on the axis."""


# ---------------------------------------------------------------------------
# Chebyshev machinery
# ---------------------------------------------------------------------------

def cheb_nodes(m: int, a: float, b: float) -> np.ndarray:
    """m Chebyshev-Gauss-Lobatto nodes on [a, b], ascending."""
    if m < 2:
        raise ValueError("need at least 2 nodes")
    j = np.arange(m)
    t = -np.cos(np.pi * j / (m - 1))        # ascending on [-1, 1]
    return 0.5 * (a + b) + 0.5 * (b - a) * t


def cheb_bary_weights(m: int) -> np.ndarray:
    w = np.ones(m)
    w[1::2] = -1.0
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def cheb_diff_matrix(m: int, a: float, b: float) -> np.ndarray:
    """Spectral differentiation matrix on the ascending CGL nodes."""
    n = m - 1
    if n == 0:
        return np.zeros((1, 1))
    x = -np.cos(np.pi * np.arange(m) / n)
    c = np.ones(m)
    c[0] = c[-1] = 2.0
    c *= (-1.0) ** np.arange(m)
    X = np.tile(x, (m, 1)).T
    dX = X - X.T + np.eye(m)
    D = np.outer(c, 1.0 / c) / dX
    D -= np.diag(D.sum(axis=1))
    return D * (2.0 / (b - a))


def barycentric_matrix(nodes: np.ndarray, weights: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Rows evaluate the interpolant through ``nodes`` at each point."""
    pts = np.atleast_1d(np.asarray(pts, dtype=float))
    diff = pts[:, None] - nodes[None, :]
    exact = np.isclose(diff, 0.0, atol=1e-14)
    diff = np.where(exact, 1.0, diff)
    m = weights[None, :] / diff
    rows = m / m.sum(axis=1, keepdims=True)
    hit = exact.any(axis=1)
    if np.any(hit):
        rows[hit] = 0.0
        idx = np.argmax(exact[hit], axis=1)
        rows[np.flatnonzero(hit), idx] = 1.0
    return rows


class ChartGrid:
    """Tensor Chebyshev grid in chart coordinates (u, v)."""

    def __init__(self, chart: str, u_range, v_range, nu: int, nv: int,
                 domain: ProjectedDomain | None = None):
        if chart not in ("polar", "cartesian"):
            raise ValueError(f"unknown chart {chart!r}")
        self.chart = chart
        self.domain = domain
        self.u = cheb_nodes(nu, *u_range)
        self.v = cheb_nodes(nv, *v_range)
        self.wu = cheb_bary_weights(nu)
        self.wv = cheb_bary_weights(nv)
        self.Du = cheb_diff_matrix(nu, *u_range)
        self.Dv = cheb_diff_matrix(nv, *v_range)
        U, V = np.meshgrid(self.u, self.v, indexing="ij")
        if chart == "polar":
            self.R = U * np.cos(V)
            self.RHO = U * np.sin(V)
        else:
            self.R = U
            self.RHO = V
        self.U, self.V = U, V
        self._ray_cache: dict = {}

    @classmethod
    def for_domain(cls, domain: ProjectedDomain, nu: int = 33, nv: int = 33) -> "ChartGrid":
        return cls(domain.chart(), domain.chart_box()[:2], domain.chart_box()[2:], nu, nv,
                   domain=domain)

    @property
    def shape(self):
        return (len(self.u), len(self.v))

    def same_as(self, other: "ChartGrid") -> bool:
        return (self.chart == other.chart and self.shape == other.shape
                and np.array_equal(self.u, other.u) and np.array_equal(self.v, other.v))

    # -- calculus -------------------------------------------------------
    def d_du(self, values: np.ndarray) -> np.ndarray:
        return self.Du @ values

    def d_dv(self, values: np.ndarray) -> np.ndarray:
        return values @ self.Dv.T

    def d_dr(self, values: np.ndarray) -> np.ndarray:
        if self.chart == "cartesian":
            return self.d_du(values)
        # r = s cos t, rho = s sin t
        return np.cos(self.V) * self.d_du(values) - (np.sin(self.V) / self.U) * self.d_dv(values)

    def d_drho(self, values: np.ndarray) -> np.ndarray:
        if self.chart == "cartesian":
            return self.d_dv(values)
        return np.sin(self.V) * self.d_du(values) + (np.cos(self.V) / self.U) * self.d_dv(values)

    def radial_scaling(self, values: np.ndarray) -> np.ndarray:
        """r d/dr + rho d/drho, the generator of dilations."""
        if self.chart == "polar":
            return self.U * self.d_du(values)
        return self.R * self.d_du(values) + self.RHO * self.d_dv(values)

    # -- interpolation ----------------------------------------------------
    def chart_coords(self, r, rho):
        r = np.asarray(r, dtype=float)
        rho = np.asarray(rho, dtype=float)
        if self.chart == "cartesian":
            return r, rho
        s = np.hypot(r, rho)
        t = np.arctan2(rho, r)
        if self.v[-1] > np.pi:            # full-circle chart
            t = np.mod(t, 2.0 * np.pi)
        return s, t

    def interpolate(self, values: np.ndarray, r, rho) -> np.ndarray:
        uu, vv = self.chart_coords(r, rho)
        scalar = np.isscalar(r) or (np.ndim(r) == 0)
        uu = np.atleast_1d(uu).ravel()
        vv = np.atleast_1d(vv).ravel()
        rows_u = barycentric_matrix(self.u, self.wu, uu)
        rows_v = barycentric_matrix(self.v, self.wv, vv)
        out = np.einsum("pi,ij,pj->p", rows_u, values, rows_v)
        if scalar:
            return out[0]
        return out.reshape(np.shape(r))

    # -- ray integral -----------------------------------------------------
    def ray_integral(self, values: np.ndarray, s: float, order: int = 32) -> np.ndarray:
        """(I_s f)(x) = int_0^1 f(t x) t^(s-1) dt, per node.

        Rays from the origin are u-lines of the polar chart, so this is a
        1-D quadrature with barycentric sampling along each line.  Points
        below the inner radius are mild extrapolations of the Chebyshev
        interpolant; their Gauss-Jacobi weights are O(u_lo^s).
        """
        if self.chart != "polar":
            raise ValueError("ray integrals need a star-like domain in the polar chart")
        key = (float(s), order)
        if key not in self._ray_cache:
            xk, wk = roots_jacobi(order, 0.0, float(s) - 1.0)
            tk = 0.5 * (xk + 1.0)
            wk = wk * 0.5 ** float(s)
            mats = []
            for t in tk:
                mats.append(barycentric_matrix(self.u, self.wu, t * self.u))
            self._ray_cache[key] = (np.array(mats), wk)
        mats, wk = self._ray_cache[key]
        # mats[k] maps a u-line to its samples at t_k * u
        out = np.tensordot(wk, np.tensordot(mats, values, axes=([2], [0])), axes=([0], [0]))
        return out


# ---------------------------------------------------------------------------
# Polynomial backend
# ---------------------------------------------------------------------------

def _as_number(c):
    if isinstance(c, (int, np.integer)):
        return Fraction(int(c))
    return c


class PolyField:
    """Bivariate polynomial in (r, rho); coefficients Fraction or float."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: dict | None = None):
        cleaned = {}
        for (i, j), c in (coeffs or {}).items():
            c = _as_number(c)
            if c != 0:
                cleaned[(int(i), int(j))] = c
        self.coeffs = cleaned

    @classmethod
    def zero(cls) -> "PolyField":
        return cls({})

    @classmethod
    def constant(cls, c) -> "PolyField":
        return cls({(0, 0): c})

    @classmethod
    def monomial(cls, i: int, j: int, c=1) -> "PolyField":
        return cls({(i, j): c})

    # -- ring structure ---------------------------------------------------
    def __add__(self, other: "PolyField") -> "PolyField":
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out.get(k, 0) + c
        return PolyField(out)

    def __sub__(self, other: "PolyField") -> "PolyField":
        return self + other.scale(-1)

    def __mul__(self, other: "PolyField") -> "PolyField":
        out: dict = {}
        for (i1, j1), c1 in self.coeffs.items():
            for (i2, j2), c2 in other.coeffs.items():
                k = (i1 + i2, j1 + j2)
                out[k] = out.get(k, 0) + c1 * c2
        return PolyField(out)

    def scale(self, a) -> "PolyField":
        a = _as_number(a)
        return PolyField({k: a * c for k, c in self.coeffs.items()})

    def __neg__(self):
        return self.scale(-1)

    def __eq__(self, other):
        return isinstance(other, PolyField) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(frozenset(self.coeffs.items()))

    # -- calculus -----------------------------------------------------------
    def d_dr(self) -> "PolyField":
        return PolyField({(i - 1, j): i * c for (i, j), c in self.coeffs.items() if i > 0})

    def d_drho(self) -> "PolyField":
        return PolyField({(i, j - 1): j * c for (i, j), c in self.coeffs.items() if j > 0})

    def divide_axis(self, axis: str) -> "PolyField":
        idx = 0 if axis == "r" else 1
        bad = [k for k in self.coeffs if k[idx] == 0]
        if bad:
            raise DivisibilityError(
                f"terms {sorted(bad)} have no {axis} factor; cannot divide by {axis}")
        shift = (-1, 0) if axis == "r" else (0, -1)
        return PolyField({(i + shift[0], j + shift[1]): c for (i, j), c in self.coeffs.items()})

    def euler(self, s) -> "PolyField":
        """s f + (r d_r + rho d_rho) f: scales degree-d terms by (s + d)."""
        s = _as_number(s)
        return PolyField({(i, j): (s + i + j) * c for (i, j), c in self.coeffs.items()})

    def ray_integral(self, s) -> "PolyField":
        """int_0^1 f(t x) t^(s-1) dt: divides degree-d terms by (s + d)."""
        s = _as_number(s)
        return PolyField({(i, j): c / (s + i + j) for (i, j), c in self.coeffs.items()})

    # -- queries ------------------------------------------------------------
    def evaluate(self, r, rho):
        r = np.asarray(r, dtype=float)
        rho = np.asarray(rho, dtype=float)
        out = np.zeros(np.broadcast(r, rho).shape)
        for (i, j), c in self.coeffs.items():
            out = out + float(c) * r**i * rho**j
        if out.shape == ():
            return float(out)
        return out

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    def degree(self) -> int:
        return max((i + j for i, j in self.coeffs), default=-1)

    def max_abs_coeff(self) -> float:
        return max((abs(float(c)) for c in self.coeffs.values()), default=0.0)

    def to_float(self) -> "PolyField":
        return PolyField({k: float(c) for k, c in self.coeffs.items()})

    def __repr__(self):
        if not self.coeffs:
            return "PolyField(0)"
        terms = [f"{c}*r^{i}*rho^{j}" for (i, j), c in sorted(self.coeffs.items())]
        return "PolyField(" + " + ".join(terms) + ")"


# ---------------------------------------------------------------------------
# Grid backend
# ---------------------------------------------------------------------------

class GridField:
    """Samples of a scalar field on a ChartGrid."""

    __slots__ = ("grid", "values")

    def __init__(self, grid: ChartGrid, values):
        self.grid = grid
        arr = np.asarray(values, dtype=float)
        if arr.shape != grid.shape:
            raise ValueError(f"values shape {arr.shape} != grid shape {grid.shape}")
        self.values = arr

    @classmethod
    def zero(cls, grid: ChartGrid) -> "GridField":
        return cls(grid, np.zeros(grid.shape))

    @classmethod
    def constant(cls, grid: ChartGrid, c: float) -> "GridField":
        return cls(grid, np.full(grid.shape, float(c)))

    @classmethod
    def from_function(cls, grid: ChartGrid, fn) -> "GridField":
        return cls(grid, fn(grid.R, grid.RHO))

    @classmethod
    def from_poly(cls, grid: ChartGrid, poly: PolyField) -> "GridField":
        return cls(grid, poly.evaluate(grid.R, grid.RHO))

    def _check(self, other: "GridField"):
        if self.grid is not other.grid and not self.grid.same_as(other.grid):
            raise ValueError("grid mismatch between fields")

    def __add__(self, other):
        self._check(other)
        return GridField(self.grid, self.values + other.values)

    def __sub__(self, other):
        self._check(other)
        return GridField(self.grid, self.values - other.values)

    def __mul__(self, other):
        self._check(other)
        return GridField(self.grid, self.values * other.values)

    def scale(self, a) -> "GridField":
        return GridField(self.grid, float(a) * self.values)

    def __neg__(self):
        return self.scale(-1.0)

    def d_dr(self) -> "GridField":
        return GridField(self.grid, self.grid.d_dr(self.values))

    def d_drho(self) -> "GridField":
        return GridField(self.grid, self.grid.d_drho(self.values))

    def divide_axis(self, axis: str) -> "GridField":
        den = self.grid.R if axis == "r" else self.grid.RHO
        if np.min(np.abs(den)) < 1e-14:
            raise DivisibilityError(f"grid touches the {axis} = 0 axis; cannot divide")
        return GridField(self.grid, self.values / den)

    def euler(self, s) -> "GridField":
        return GridField(self.grid, float(s) * self.values + self.grid.radial_scaling(self.values))

    def ray_integral(self, s, order: int = 32) -> "GridField":
        return GridField(self.grid, self.grid.ray_integral(self.values, s, order))

    def evaluate(self, r, rho):
        return self.grid.interpolate(self.values, r, rho)

    @property
    def is_zero(self) -> bool:
        return bool(np.all(self.values == 0.0))

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    # -- CSV export: header r,rho,value; rows row-major over nodes ----------
    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write("r,rho,value\n")
            R, RHO, V = self.grid.R, self.grid.RHO, self.values
            for i in range(R.shape[0]):
                for j in range(R.shape[1]):
                    fh.write(f"{R[i, j]:.17g},{RHO[i, j]:.17g},{V[i, j]:.17g}\n")

    @classmethod
    def from_csv(cls, grid: ChartGrid, path) -> "GridField":
        data = np.loadtxt(path, delimiter=",", skiprows=1)
        if data.shape[0] != grid.R.size:
            raise ValueError(f"{path}: expected {grid.R.size} rows, got {data.shape[0]}")
        r = data[:, 0].reshape(grid.shape)
        rho = data[:, 1].reshape(grid.shape)
        if not (np.allclose(r, grid.R, atol=1e-9) and np.allclose(rho, grid.RHO, atol=1e-9)):
            raise ValueError(f"{path}: node coordinates do not match the grid")
        return cls(grid, data[:, 2].reshape(grid.shape))


def field_arith(a, b, op: str):
    """Pointwise arithmetic on matching backends: add | sub | mul | scale."""
    if op == "scale":
        return a.scale(b)
    if type(a) is not type(b):
        raise ValueError("backend mismatch between fields")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown op {op!r}")


def divide_by_axis(a, axis: str):
    if axis not in ("r", "rho"):
        raise ValueError("axis must be 'r' or 'rho'")
    return a.divide_axis(axis)


# ---------------------------------------------------------------------------
# Bi-axial quadruples
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BiaxialQuadruple:
    """phi = A + omega nu B + omega C + nu D with fields over (r, rho)."""

    sig: Signature
    A: object
    B: object
    C: object
    D: object

    def __post_init__(self):
        kinds = {type(f) for f in (self.A, self.B, self.C, self.D)}
        if len(kinds) != 1:
            raise ValueError("all four fields must share a backend")

    @property
    def fields(self):
        return (self.A, self.B, self.C, self.D)

    @property
    def backend(self) -> str:
        return "poly" if isinstance(self.A, PolyField) else "grid"

    def map(self, fn) -> "BiaxialQuadruple":
        return BiaxialQuadruple(self.sig, *(fn(f) for f in self.fields))

    def zip_with(self, other: "BiaxialQuadruple", fn) -> "BiaxialQuadruple":
        if self.sig != other.sig:
            raise ValueError("signature mismatch")
        return BiaxialQuadruple(self.sig, *(fn(a, b) for a, b in zip(self.fields, other.fields)))

    def __add__(self, other):
        return self.zip_with(other, lambda a, b: a + b)

    def __sub__(self, other):
        return self.zip_with(other, lambda a, b: a - b)

    def scale(self, a) -> "BiaxialQuadruple":
        return self.map(lambda f: f.scale(a))

    def __neg__(self):
        return self.scale(-1)

    def max_abs(self) -> float:
        if self.backend == "poly":
            return max(f.max_abs_coeff() for f in self.fields)
        return max(f.max_abs() for f in self.fields)

    @property
    def is_zero(self) -> bool:
        return all(f.is_zero for f in self.fields)

    @classmethod
    def zero_poly(cls, sig: Signature) -> "BiaxialQuadruple":
        return cls(sig, PolyField.zero(), PolyField.zero(), PolyField.zero(), PolyField.zero())

    @classmethod
    def zero_grid(cls, sig: Signature, grid: ChartGrid) -> "BiaxialQuadruple":
        z = GridField.zero(grid)
        return cls(sig, z, GridField.zero(grid), GridField.zero(grid), GridField.zero(grid))

    def to_grid(self, grid: ChartGrid) -> "BiaxialQuadruple":
        if self.backend != "poly":
            raise ValueError("to_grid expects the polynomial backend")
        return BiaxialQuadruple(self.sig, *(GridField.from_poly(grid, f) for f in self.fields))

    def to_float(self) -> "BiaxialQuadruple":
        if self.backend != "poly":
            return self
        return self.map(lambda f: f.to_float())


def poly_quadruple(sig: Signature, A=None, B=None, C=None, D=None) -> BiaxialQuadruple:
    z = PolyField.zero()
    return BiaxialQuadruple(sig, A or z, B or z, C or z, D or z)


def quadruple_evaluate(f: BiaxialQuadruple, x: VectorX, axis_tol: float = 1e-10) -> Multivector:
    """Evaluate phi(x) = A + omega nu B + omega C + nu D as a multivector.

    On an axis (r = 0 or rho = 0) the direction omega (resp. nu) is
    undefined; evaluation is allowed only when the components that need it
    vanish there, and errors otherwise.
    """
    if f.sig != x.sig:
        raise ValueError("signature mismatch")
    r, rho = x.r, x.rho
    vals = [float(np.asarray(g.evaluate(r, rho))) for g in f.fields]
    a, b, c, d = vals
    scale = max(f.max_abs(), 1.0)
    out = Multivector.scalar(x.sig, a)
    if r == 0.0:
        if max(abs(b), abs(c)) > axis_tol * scale:
            raise AxisEvaluationError(
                f"components B, C = ({b}, {c}) do not vanish at r = 0")
        omega_mv = None
    else:
        omega_mv = Multivector.from_vector(x.sig, np.concatenate([x.omega(), np.zeros(x.sig.q)]))
    if rho == 0.0:
        if max(abs(b), abs(d)) > axis_tol * scale:
            raise AxisEvaluationError(
                f"components B, D = ({b}, {d}) do not vanish at rho = 0")
        nu_mv = None
    else:
        nu_mv = Multivector.from_vector(x.sig, np.concatenate([np.zeros(x.sig.p), x.nu()]))
    if omega_mv is not None:
        out = out + omega_mv.scale(c)
        if nu_mv is not None:
            out = out + mv_multiply(omega_mv, nu_mv).scale(b)
    if nu_mv is not None:
        out = out + nu_mv.scale(d)
    return out


# ---------------------------------------------------------------------------
# Vekua-type system residuals
# ---------------------------------------------------------------------------

def _first_type_pieces(A, B, p: int, q: int):
    """The omega and nu components of D(A + omega nu B)."""
    r1 = A.d_dr() + B.d_drho()
    if q > 1:
        r1 = r1 + B.divide_axis("rho").scale(q - 1)
    r2 = A.d_drho() - B.d_dr()
    if p > 1:
        r2 = r2 - B.divide_axis("r").scale(p - 1)
    return r1, r2


def _second_type_pieces(C, D, p: int, q: int):
    """Scalar and omega-nu components of -D(omega C + nu D)."""
    r1 = C.d_dr() + D.d_drho()
    if p > 1:
        r1 = r1 + C.divide_axis("r").scale(p - 1)
    if q > 1:
        r1 = r1 + D.divide_axis("rho").scale(q - 1)
    r2 = C.d_drho() - D.d_dr()
    return r1, r2


def vekua_residual_type1(f: BiaxialQuadruple):
    """Residual of the first-type system; (0, 0) iff A + omega nu B is monogenic."""
    if not (f.C.is_zero and f.D.is_zero):
        raise ValueError("first-type residual needs C = D = 0")
    return _first_type_pieces(f.A, f.B, f.sig.p, f.sig.q)


def vekua_residual_type2(f: BiaxialQuadruple):
    """Residual of the second-type system; (0, 0) iff omega C + nu D is monogenic."""
    if not (f.A.is_zero and f.B.is_zero):
        raise ValueError("second-type residual needs A = B = 0")
    return _second_type_pieces(f.C, f.D, f.sig.p, f.sig.q)
