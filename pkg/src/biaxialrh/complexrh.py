"""Complex-plane engine for the bi-axially monogenic boundary problem.

The two halves (A, B) and (C, D) of a bi-axially monogenic quadruple are
complex functions f_1 = B + iA and f_2 = D + iC of z = r + i rho that
satisfy Vekua equations

    d f_1 / dzbar = -K (f_1 + conj f_1),
    d f_2 / dzbar = -K f_2 + conj(K) conj(f_2),   K = (p-1)/(4r) + i (q-1)/(4 rho),

so each f factors as f = Phi e^tau with Phi holomorphic and tau an area
(Pompeiu-type) integral involving the unimodular ratio conj(f)/f.  The
boundary conditions Re{lambda_i phi} = g_i reduce to scalar problems
Re{lambda_hat_i f_i} = g_i, transplanted to the unit disk through the
conformal map of the projected domain and solved there with the Schwarz
kernel, a winding-number index and, for negative index, explicit moment
conditions.  The self-referential tau is resolved by a damped fixed
point on the ratio.

Quadrature for tau uses tensor cells over the trimmed domain with the
1/r and 1/rho kernel factors integrated exactly per cell, exact
rectangle Cauchy integrals near each target, subdivision near the
corner, and optional thin strip cells along the trimmed axis bands
(where the physical integrand vanishes linearly).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .domains import ProjectedDomain
from .fields import BiaxialQuadruple, ChartGrid, GridField, barycentric_matrix

_TWO_PI = 2.0 * np.pi


class DegeneracyError(ValueError):
    """Coefficient or denominator magnitude fell below the safe floor."""


class FixedPointError(RuntimeError):
    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = history or []


class SolvabilityFailure(RuntimeError):
    """Negative-index problem whose moment conditions fail."""

    def __init__(self, violations):
        self.violations = violations  # list of (k, |moment|)
        ks = ", ".join(str(k) for k, _ in violations)
        super().__init__(f"solvability conditions violated at k = {ks}")


# ---------------------------------------------------------------------------
# Conformal maps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConformalMap:
    """Pair of maps psi: unit disk -> S and phi = psi^{-1}."""

    label: str
    forward: object
    inverse: object

    def roundtrip_error(self, n: int = 100, seed: int = 0) -> float:
        rng = np.random.default_rng(seed)
        zeta = rng.uniform(-0.7, 0.7, n) + 1j * rng.uniform(-0.7, 0.7, n)
        zeta = zeta[np.abs(zeta) < 0.95]
        return float(np.max(np.abs(self.inverse(self.forward(zeta)) - zeta)))


def identity_disk_map(radius: float = 1.0) -> ConformalMap:
    return ConformalMap("identity_disk",
                        forward=lambda zeta: radius * np.asarray(zeta, dtype=complex),
                        inverse=lambda z: np.asarray(z, dtype=complex) / radius)


def quarter_disk_map(radius: float = 1.0) -> ConformalMap:
    """Quarter disk {r, rho > 0, |z| < R} <-> unit disk.

    Composition: z -> w = (z/R)^2 (upper half disk), w -> u = -(w + 1/w)/2
    (upper half-plane), u -> zeta = (u - i)/(u + i) (Cayley).  The corner
    z = 0 corresponds to zeta = 1; both directions handle that limit, and
    the quadratic for w is solved through the larger root so the inside
    root 1/w_big never cancels catastrophically.
    """

    def forward(zeta):
        zeta = np.atleast_1d(np.asarray(zeta, dtype=complex))
        at_one = np.abs(zeta - 1.0) < 1e-13
        zs = np.where(at_one, 0.0, zeta)
        u = 1j * (1.0 + zs) / (1.0 - zs)
        root = np.sqrt(u * u - 1.0)
        big = np.where(np.abs(-u + root) >= np.abs(-u - root), -u + root, -u - root)
        w = 1.0 / big
        out = radius * np.sqrt(w)
        # w sits in the closed upper half disk; roundoff can push boundary
        # points a hair below the cut, flipping the sqrt into rho < 0
        out = np.where(out.imag < 0.0, np.conj(out), out)
        out[at_one] = 0.0
        return out if out.shape != (1,) else complex(out[0])

    def inverse(z):
        z = np.atleast_1d(np.asarray(z, dtype=complex)) / radius
        at_corner = np.abs(z) < 1e-13
        zs = np.where(at_corner, 1.0, z)
        w = zs * zs
        u = -(w + 1.0 / w) / 2.0
        zeta = (u - 1j) / (u + 1j)
        zeta[at_corner] = 1.0
        return zeta if zeta.shape != (1,) else complex(zeta[0])

    return ConformalMap("quarter_disk", forward=forward, inverse=inverse)


def conformal_map_for(domain: ProjectedDomain) -> ConformalMap:
    if domain.kind == "quarter_disk":
        return quarter_disk_map(domain.radius)
    if domain.kind == "unit_disk":
        return identity_disk_map(domain.radius)
    raise ValueError(f"no conformal map in the catalog for domain {domain.kind!r}")


# ---------------------------------------------------------------------------
# Boundary Fourier machinery on the unit circle
# ---------------------------------------------------------------------------

def boundary_angles(n: int) -> np.ndarray:
    if n < 8 or n & (n - 1):
        raise ValueError("boundary sample count must be a power of two >= 8")
    return _TWO_PI * np.arange(n) / n


class AnalyticDisk:
    """Polynomial-in-zeta representation of an analytic function on the disk."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        self.coeffs = np.asarray(coeffs, dtype=complex)

    def __call__(self, zeta):
        zeta = np.asarray(zeta, dtype=complex)
        out = np.zeros_like(zeta)
        for c in self.coeffs[::-1]:
            out = out * zeta + c
        return out

    def scale(self, a) -> "AnalyticDisk":
        return AnalyticDisk(a * self.coeffs)


def schwarz_operator(samples) -> AnalyticDisk:
    """Analytic completion with Re Phi = u on |zeta| = 1 and Im Phi(0) = 0.

    Discrete form of the circle integral of u(t) (t + zeta)/(t - zeta) over
    2 pi t: Phi = u_hat_0 + 2 sum_{m >= 1} u_hat_m zeta^m.
    """
    u = np.asarray(samples, dtype=float)
    n = len(u)
    coeff = np.fft.fft(u) / n
    out = np.zeros(n // 2 + 1, dtype=complex)
    out[0] = coeff[0]
    out[1 : n // 2] = 2.0 * coeff[1 : n // 2]
    out[n // 2] = coeff[n // 2]
    return AnalyticDisk(out)


def cauchy_projection(samples, shift: int = 0) -> AnalyticDisk:
    """Analytic part sum_{j >= 0} c_{j + shift} zeta^j of boundary samples."""
    u = np.asarray(samples, dtype=complex)
    n = len(u)
    coeff = np.fft.fft(u) / n
    idx = np.arange(shift, n // 2 + 1)
    return AnalyticDisk(coeff[idx])


def compute_index(samples, floor: float = 1e-8) -> int:
    """Winding number of a closed sample loop about the origin."""
    s = np.asarray(samples, dtype=complex)
    if np.min(np.abs(s)) < floor:
        raise DegeneracyError("loop passes too close to the origin for a winding number")
    ang = np.unwrap(np.angle(np.concatenate([s, s[:1]])))
    return int(np.round((ang[-1] - ang[0]) / _TWO_PI))


# ---------------------------------------------------------------------------
# Area quadrature for the Pompeiu-type integrals
# ---------------------------------------------------------------------------

def cauchy_rectangle(x0, x1, y0, y1, z):
    """Exact integral of dA / (zeta - z) over an axis-aligned rectangle.

    Contour form (1/2i) oint (conj zeta - conj z)/(zeta - z) dzeta; each
    edge needs only the principal log of its endpoint ratio because a
    straight segment never subtends a half-turn from an external point.
    """
    x0, x1, y0, y1, z = np.broadcast_arrays(
        np.asarray(x0, dtype=float), np.asarray(x1, dtype=float),
        np.asarray(y0, dtype=float), np.asarray(y1, dtype=float),
        np.asarray(z, dtype=complex))
    corners = [x0 + 1j * y0, x1 + 1j * y0, x1 + 1j * y1, x0 + 1j * y1]
    total = np.zeros(np.broadcast(x0, z).shape, dtype=complex)
    tiny = 1e-300
    for k in range(4):
        p0 = corners[k]
        p1 = corners[(k + 1) % 4]
        d = p1 - p0
        w = p0 - z
        w = np.where(np.abs(w) < tiny, tiny, w)
        wd = np.where(np.abs(w + d) < tiny, tiny, w + d)
        num = np.conj(w) * d - np.conj(d) * w
        total = total + np.conj(d) + (num / d) * np.log(wd / w)
    return total / 2j


class TauQuadrature:
    """Cells, kernel masses and Cauchy weights for the tau integrals.

    Per cell: M1 = int dA / r and M2 = int dA / rho exact per rectangle,
    scaled by the in-domain area fraction; a position where the
    ratio-dependent factor is sampled; and the rectangle itself for
    near-field exact Cauchy integrals.  Cells near the corner are
    subdivided.  Strip cells along the trimmed axis bands carry modified
    masses modelling the linear vanishing of the physical integrand.
    """

    def __init__(self, domain: ProjectedDomain, cells_per_axis: int = 64,
                 axis_strip: bool = True):
        if domain.kind == "unit_disk":
            raise ValueError("tau quadrature applies to quadrant domains")
        self.domain = domain
        self.cells_per_axis = cells_per_axis
        self.axis_strip = axis_strip

        qa, qb, qc, qd = domain.quad_box()
        g = cells_per_axis
        xs = np.linspace(qa, qb, g + 1)
        ys = np.linspace(qc, qd, g + 1)
        h = max(xs[1] - xs[0], ys[1] - ys[0])
        self.cell_size = h

        rects, fracs = [], []
        for i in range(g):
            for j in range(g):
                rect = (xs[i], xs[i + 1], ys[j], ys[j + 1])
                for r2 in self._corner_refined(rect, h, domain.eps):
                    fr = self._fraction(r2)
                    if fr > 0.0:
                        rects.append(r2)
                        fracs.append(fr)
        arr = np.array(rects)
        self.x0, self.x1, self.y0, self.y1 = arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3]
        fr = np.array(fracs)
        dx, dy = self.x1 - self.x0, self.y1 - self.y0
        self.center = 0.5 * (self.x0 + self.x1) + 0.5j * (self.y0 + self.y1)
        self.area = fr * dx * dy
        # exact per-cell kernel masses (midpoint masses would leave an
        # h-independent aggregate deficit in the near-axis band)
        self.M1 = fr * dy * np.log(self.x1 / self.x0)
        self.M2 = fr * dx * np.log(self.y1 / self.y0)
        self.ratio_pos = self.center.copy()
        self.kpos = self.center.copy()
        self._centroid_split(fr)
        if axis_strip:
            self._append_strips(xs, ys)
        self._redirect_axis_sampling()

    def _redirect_axis_sampling(self):
        """Never sample the ratio closer to an axis than the local scale.

        The physical factors 1 +/- ratio vanish linearly toward their
        axis while the phase of conj(f)/f is ill-conditioned exactly
        there; sampling at a reference point at distance min(3h, |z|/2)
        and carrying the linear scaling keeps the iteration stable and is
        the same model the strip masses use.  Which factor receives which
        scaling depends on the Vekua type and is applied in
        ``integrand_masses``.
        """
        h = self.cell_size
        x = self.ratio_pos.real
        y = self.ratio_pos.imag
        d = np.hypot(x, y)
        lim_x = np.minimum(3.0 * h, d / 3.0)
        lim_y = np.minimum(3.0 * h, d / 3.0)
        move_x = (x < lim_x) & (y >= lim_y)
        move_y = (y < lim_y) & (x >= lim_x)
        plain = ~(move_x | move_y)

        names = ("x0", "x1", "y0", "y1", "area", "M1", "M2", "center", "kpos")
        n_plain = int(plain.sum())
        parts = {k: [getattr(self, k)[plain]] for k in names}
        pos_parts = [self.ratio_pos[plain]]
        van_x = [np.ones(n_plain)]     # vanishing-factor coefficient, x direction
        van_y = [np.ones(n_plain)]
        smo_x = [np.ones(n_plain)]     # smooth-factor interpolation weight
        smo_y = [np.ones(n_plain)]
        # stable single-point variants for the fixed-point sweeps (the sharp
        # two-point model carries signed weights that raise the loop gain)
        van_x0 = [np.ones(n_plain)]
        van_y0 = [np.ones(n_plain)]
        smo_x0 = [np.ones(n_plain)]
        smo_y0 = [np.ones(n_plain)]

        def emit(idx, coord, lim, horizontal):
            """Two entries per redirected cell: the factor vanishing toward
            the axis is modelled quadratically through zero (linear
            interpolation of s/coord between offsets lim and 2 lim); a
            factor smooth across the axis takes plain interpolation
            weights that sum to one."""
            r1 = lim[idx]
            r2 = 2.0 * lim[idx]
            c = coord[idx]
            t = (c - r1) / (r2 - r1)
            pairs = (
                (r1, c * (1.0 - t) / r1, 1.0 - t, c / r1, 1.0),
                (r2, c * t / r2, t, 0.0 * c, 0.0),
            )
            for ref, coef_v, coef_s, coef_v0, coef_s0 in pairs:
                for k in names:
                    parts[k].append(getattr(self, k)[idx])
                ones_i = np.ones(len(idx))
                if horizontal:
                    pos_parts.append(ref + 1j * y[idx])
                    van_x.append(coef_v); van_y.append(ones_i)
                    smo_x.append(coef_s * ones_i); smo_y.append(ones_i)
                    van_x0.append(coef_v0); van_y0.append(ones_i)
                    smo_x0.append(coef_s0 * ones_i); smo_y0.append(ones_i)
                else:
                    pos_parts.append(x[idx] + 1j * ref)
                    van_x.append(ones_i); van_y.append(coef_v)
                    smo_x.append(ones_i); smo_y.append(coef_s * ones_i)
                    van_x0.append(ones_i); van_y0.append(coef_v0)
                    smo_x0.append(ones_i); smo_y0.append(coef_s0 * ones_i)

        emit(np.nonzero(move_x)[0], x, lim_x, horizontal=True)
        emit(np.nonzero(move_y)[0], y, lim_y, horizontal=False)
        for k in names:
            setattr(self, k, np.concatenate(parts[k]))
        self.ratio_pos = np.concatenate(pos_parts)
        self.s_scale_x = np.concatenate(van_x)
        self.s_scale_y = np.concatenate(van_y)
        self.w_smooth_x = np.concatenate(smo_x)
        self.w_smooth_y = np.concatenate(smo_y)

    @staticmethod
    def _gauss_log_rule(a, b):
        """2-point Gauss nodes/weights for the measure dx/x on [a, b],
        plus matched weights for the plain measure dx at the same nodes.

        Sampling every factor at these shared nodes keeps the two kernel
        terms cancelling pointwise while integrating 1/x exactly through
        cubic variation of the smooth factor.
        """
        m0 = np.log(b / a)
        m1 = b - a
        m2 = 0.5 * (b * b - a * a)
        m3 = (b**3 - a**3) / 3.0
        det = m1 * m1 - m2 * m0
        beta = (m2 * m1 - m3 * m0) / det
        gamma = (m2 * m2 - m3 * m1) / det
        disc = np.sqrt(np.maximum(beta * beta - 4.0 * gamma, 0.0))
        x1 = 0.5 * (beta - disc)
        x2 = 0.5 * (beta + disc)
        w1 = (m1 - m0 * x2) / (x1 - x2)
        w2 = m0 - w1
        o1 = (m2 - m1 * x2) / (x1 - x2)
        o2 = m1 - o1
        return (x1, x2), (w1, w2), (o1, o2)

    def _centroid_split(self, fr):
        """Replace axis-hugging cells by shared-node Gauss entries.

        Cells where 1/r (resp 1/rho) varies strongly get 2 entries at the
        Gauss nodes of the dx/x measure; cells hugging both axes get the
        2 x 2 tensor.  M1 carries the 1/x-measure weights, M2 the plain-dx
        weights at the same nodes (and symmetrically in y), so both kernel
        terms and the ratio are evaluated at identical points.
        """
        sx = self.x1 / self.x0 > 1.5
        sy = self.y1 / self.y0 > 1.5
        split = sx | sy
        if not np.any(split):
            return
        keep = ~split
        new = {k: [getattr(self, k)[keep]] for k in
               ("x0", "x1", "y0", "y1", "area", "M1", "M2")}
        new_pos = [self.center[keep]]

        def emit(idx, xnodes, xw_log, xw_lin, ynodes, yw_log, yw_lin):
            # xw_log integrates dx/x, xw_lin integrates dx, both at xnodes
            f = fr[idx]
            for xi, wl, wp in zip(xnodes, xw_log, xw_lin):
                for yj, vl, vp in zip(ynodes, yw_log, yw_lin):
                    new["x0"].append(self.x0[idx]); new["x1"].append(self.x1[idx])
                    new["y0"].append(self.y0[idx]); new["y1"].append(self.y1[idx])
                    new["area"].append(f * wp * vp)
                    new["M1"].append(f * wl * vp)
                    new["M2"].append(f * wp * vl)
                    new_pos.append(xi + 1j * yj)

        idx = np.nonzero(split)[0]
        x0, x1, y0, y1 = self.x0[idx], self.x1[idx], self.y0[idx], self.y1[idx]
        cx, cy = self.center.real[idx], self.center.imag[idx]
        dx, dy = x1 - x0, y1 - y0
        gx_nodes, gx_wlog, gx_wlin = self._gauss_log_rule(x0, x1)
        gy_nodes, gy_wlog, gy_wlin = self._gauss_log_rule(y0, y1)
        for k in range(len(idx)):
            i = idx[k]
            if sx[i] and sy[i]:
                emit(i, [gx_nodes[0][k], gx_nodes[1][k]],
                     [gx_wlog[0][k], gx_wlog[1][k]], [gx_wlin[0][k], gx_wlin[1][k]],
                     [gy_nodes[0][k], gy_nodes[1][k]],
                     [gy_wlog[0][k], gy_wlog[1][k]], [gy_wlin[0][k], gy_wlin[1][k]])
            elif sx[i]:
                emit(i, [gx_nodes[0][k], gx_nodes[1][k]],
                     [gx_wlog[0][k], gx_wlog[1][k]], [gx_wlin[0][k], gx_wlin[1][k]],
                     [cy[k]], [dy[k] / cy[k]], [dy[k]])
            else:
                emit(i, [cx[k]], [dx[k] / cx[k]], [dx[k]],
                     [gy_nodes[0][k], gy_nodes[1][k]],
                     [gy_wlog[0][k], gy_wlog[1][k]], [gy_wlin[0][k], gy_wlin[1][k]])

        for name, vals in new.items():
            setattr(self, name, np.concatenate([vals[0], np.array(vals[1:], dtype=float)])
                    if len(vals) > 1 else vals[0])
        self.kpos = np.concatenate([new_pos[0], np.array(new_pos[1:], dtype=complex)]) \
            if len(new_pos) > 1 else new_pos[0]
        self.center = self.kpos.copy()
        self.ratio_pos = self.kpos.copy()

    @staticmethod
    def _corner_refined(rect, h, eps):
        """Split cells near the corner until their size resolves the scale
        on which ratio fields rotate there (proportional to the distance
        from the origin), with a floor at the trim margin."""
        out = []
        stack = [rect]
        while stack:
            x0, x1, y0, y1 = stack.pop()
            cx, cy = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
            size = max(x1 - x0, y1 - y0)
            d = np.hypot(cx, cy)
            if d < 4.0 * h and size > max(0.25 * d, 0.7 * eps):
                xm, ym = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
                stack.extend([(x0, xm, y0, ym), (xm, x1, y0, ym),
                              (x0, xm, ym, y1), (xm, x1, ym, y1)])
            else:
                out.append((x0, x1, y0, y1))
        return out

    def _fraction(self, rect, nsub: int = 8) -> float:
        x0, x1, y0, y1 = rect
        corners_in = self.domain.contains(np.array([x0, x1, x0, x1]),
                                          np.array([y0, y0, y1, y1]))
        if np.all(corners_in):
            return 1.0
        xm = x0 + (x1 - x0) * (np.arange(nsub) + 0.5) / nsub
        ym = y0 + (y1 - y0) * (np.arange(nsub) + 0.5) / nsub
        XM, YM = np.meshgrid(xm, ym, indexing="ij")
        return float(np.mean(self.domain.contains(XM, YM)))

    def _append_strips(self, xs, ys):
        """Thin bands [0, eps] along each axis, left out of the cell grid.

        Each band row carries two Gauss-Legendre nodes across the band;
        the 1/r kernel weight 1/xi is applied at the node, so the product
        with a ratio factor vanishing linearly toward the axis stays
        bounded and is integrated to second order.  Rows near the corner
        are subdivided to the local variation scale.
        """
        dom = self.domain
        eps = dom.eps
        rows = {k: [] for k in ("x0", "x1", "y0", "y1", "area", "M1", "M2", "pos")}
        gl_off = np.array([0.5 - 0.5 / np.sqrt(3.0), 0.5 + 0.5 / np.sqrt(3.0)])

        def push(x0, x1, y0, y1, m1, m2, pos):
            rows["x0"].append(x0); rows["x1"].append(x1)
            rows["y0"].append(y0); rows["y1"].append(y1)
            rows["area"].append((x1 - x0) * (y1 - y0) / 2.0)
            rows["M1"].append(m1); rows["M2"].append(m2)
            rows["pos"].append(pos)

        lim = np.sqrt(max(dom.radius**2 - eps**2, 0.0)) \
            if dom.kind == "quarter_disk" else ys[-1]
        h = self.cell_size

        def segments(edges):
            out = []
            stack = [(edges[j], min(edges[j + 1], lim)) for j in range(len(edges) - 1)]
            while stack:
                a, b = stack.pop()
                if b <= a:
                    continue
                mid = 0.5 * (a + b)
                if mid < 4.0 * h and (b - a) > max(0.25 * mid, 0.7 * eps):
                    stack.extend([(a, mid), (mid, b)])
                else:
                    out.append((a, b))
            return out

        for y0v, y1v in segments(ys):
            yc = 0.5 * (y0v + y1v)
            for xi in eps * gl_off:
                push(0.0, eps, y0v, y1v,
                     m1=(0.5 * eps / xi) * (y1v - y0v),
                     m2=0.5 * eps * np.log(y1v / y0v),
                     pos=xi + 1j * yc)
        for x0v, x1v in segments(xs):
            xc = 0.5 * (x0v + x1v)
            for eta in eps * gl_off:
                push(x0v, x1v, 0.0, eps,
                     m1=0.5 * eps * np.log(x1v / x0v),
                     m2=(0.5 * eps / eta) * (x1v - x0v),
                     pos=xc + 1j * eta)

        if rows["x0"]:
            for name in ("x0", "x1", "y0", "y1", "area", "M1", "M2"):
                setattr(self, name, np.concatenate([getattr(self, name), rows[name]]))
            pos = np.array(rows["pos"], dtype=complex)
            self.center = np.concatenate([self.center, pos])
            self.kpos = np.concatenate([self.kpos, pos])
            self.ratio_pos = np.concatenate([self.ratio_pos, pos])

    @property
    def n_cells(self) -> int:
        return len(self.area)

    def weight_matrix(self, targets, near_mult: float = 2.5) -> np.ndarray:
        """Area-averaged Cauchy factors W[t, c] ~ (int_cell dA/(zeta - z)) / area."""
        z = np.asarray(targets, dtype=complex).ravel()
        W = 1.0 / (self.kpos[None, :] - z[:, None])
        sizes = np.maximum(self.x1 - self.x0, self.y1 - self.y0)
        near = np.abs(self.center[None, :] - z[:, None]) <= near_mult * sizes[None, :]
        ti, ci = np.nonzero(near)
        if len(ti):
            exact = cauchy_rectangle(self.x0[ci], self.x1[ci], self.y0[ci],
                                     self.y1[ci], z[ti])
            full_area = (self.x1[ci] - self.x0[ci]) * (self.y1[ci] - self.y0[ci])
            W[ti, ci] = exact / full_area
        return W

    def integrand_masses(self, ratio_cells, kind: int, p: int, q: int) -> np.ndarray:
        """Per-cell mass kp M1 s1 + i kq M2 s2 for the chosen Vekua type.

        The first-type factors vanish linearly at both axes (they carry
        the B component), so both receive the redirected-sampling scales;
        in the second type 1 - ratio vanishes at the r axis only and
        1 + ratio at the rho axis only.
        """
        kp = (p - 1) / 4.0
        kq = (q - 1) / 4.0
        if kind == 1:
            s1 = (1.0 + ratio_cells) * self.s_scale_x * self.s_scale_y
            s2 = s1
        elif kind == 2:
            s1 = (1.0 - ratio_cells) * self.s_scale_x * self.w_smooth_y
            s2 = (1.0 + ratio_cells) * self.s_scale_y * self.w_smooth_x
        else:
            raise ValueError("kind must be 1 or 2")
        return kp * self.M1 * s1 + 1j * kq * self.M2 * s2

    def apply(self, W, ratio_cells, kind: int, p: int, q: int) -> np.ndarray:
        return (W @ self.integrand_masses(ratio_cells, kind, p, q)) / np.pi


def tau_integral(ratio_fn, kind: int, domain: ProjectedDomain, targets,
                 p: int, q: int, cells: int = 64, axis_strip: bool = True,
                 quad: TauQuadrature | None = None) -> np.ndarray:
    """tau(z) at the targets for a unimodular ratio field given as a callable.

    kind 1 integrates K (1 + ratio), kind 2 integrates K - conj(K) ratio,
    both against dA / (pi (zeta - z)) over the trimmed domain.  With
    p = q = 1 both kernels vanish and tau is identically zero.
    """
    z = np.asarray(targets, dtype=complex)
    if p == 1 and q == 1:
        return np.zeros(z.shape, dtype=complex)
    box = domain.quad_box()
    margin = 0.05 * max(box[1] - box[0], box[3] - box[2])
    ok = (z.real >= box[0] - margin) & (z.real <= box[1] + margin) \
        & (z.imag >= min(box[2], 0.0) - margin) & (z.imag <= box[3] + margin)
    if not np.all(ok):
        raise ValueError("tau target outside the closed projected domain")
    quad = quad or TauQuadrature(domain, cells, axis_strip)
    ratio_cells = np.asarray(
        ratio_fn(quad.ratio_pos.real, quad.ratio_pos.imag), dtype=complex)
    if np.max(np.abs(np.abs(ratio_cells) - 1.0)) > 1e-6:
        raise ValueError("ratio field is not unimodular")
    W = quad.weight_matrix(z.ravel())
    return quad.apply(W, ratio_cells, kind, p, q).reshape(z.shape)


# ---------------------------------------------------------------------------
# Riemann-Hilbert pieces on the disk
# ---------------------------------------------------------------------------

def build_g_hat(g_samples, lam_samples, tau_samples, chi_boundary,
                floor: float = 1e-8) -> np.ndarray:
    """g_hat = g e^{Re chi} / |lambda e^tau| on the boundary samples."""
    lam_e = np.asarray(lam_samples, dtype=complex) \
        * np.exp(np.asarray(tau_samples, dtype=complex))
    mag = np.abs(lam_e)
    if np.min(mag) < floor:
        raise DegeneracyError("|lambda e^tau| fell below the degeneracy floor")
    return np.asarray(g_samples, dtype=float) * np.exp(np.real(chi_boundary)) / mag


def validate_constants(m: int, constants) -> np.ndarray:
    c = np.zeros(2 * m + 1, dtype=complex) if constants is None \
        else np.asarray(constants, dtype=complex)
    if c.shape != (2 * m + 1,):
        raise ValueError(f"index {m} needs exactly {2 * m + 1} free constants, got {list(c.shape)}")
    scale = max(float(np.max(np.abs(c))), 1.0) if c.size else 1.0
    for k in range(m + 1):
        if abs(c[2 * m - k] + np.conj(c[k])) > 1e-12 * scale:
            raise ValueError(
                f"free constants break the reality constraint at k = {k}: "
                f"c[{2 * m - k}] must equal -conj(c[{k}])")
    return c


class PhiSolution:
    """Holomorphic factor on the disk, evaluable anywhere inside it."""

    def __init__(self, m: int, chi: AnalyticDisk, series: AnalyticDisk, constants):
        self.m = m
        self.chi = chi
        self.series = series
        self.constants = np.asarray(constants, dtype=complex)

    def __call__(self, zeta):
        zeta = np.asarray(zeta, dtype=complex)
        if self.m >= 0:
            out = zeta**self.m * self.series(zeta)
            if self.constants.size and np.any(self.constants):
                poly = np.zeros_like(zeta)
                for c in self.constants[::-1]:
                    poly = poly * zeta + c
                out = out + poly
        else:
            out = self.series(zeta)
        return np.exp(-self.chi(zeta)) * out


def phi_nonneg_index(m: int, g_hat, chi: AnalyticDisk, constants=None) -> PhiSolution:
    """Phi = zeta^m e^{-chi} S[g_hat] + e^{-chi} sum_k c_k zeta^k, index m >= 0.

    The 2m + 1 constants satisfy c_{2m-k} = -conj(c_k) for k = 0..m.
    """
    if m < 0:
        raise ValueError("phi_nonneg_index needs m >= 0")
    return PhiSolution(m, chi, schwarz_operator(g_hat), validate_constants(m, constants))


def phi_neg_index(m: int, g_hat, chi: AnalyticDisk, tol: float = 1e-8) -> PhiSolution:
    """Negative-index solution; raises SolvabilityFailure listing violated moments.

    Moment conditions int g_hat e^{-ik theta} dtheta = 0 are required for
    k = 0 .. -m + 1 at tolerance tol * sup|g_hat|; on success Phi is the
    shifted Cauchy integral e^{-chi} / (pi i) oint g_hat t^m dt / (t - zeta).
    """
    if m >= 0:
        raise ValueError("phi_neg_index needs m < 0")
    g = np.asarray(g_hat, dtype=float)
    coeff = np.fft.fft(g) / len(g)
    scale = float(np.max(np.abs(g)))
    violations = []
    for k in range(0, -m + 2):
        moment = _TWO_PI * coeff[k]
        if abs(moment) > tol * max(scale, 1e-30):
            violations.append((int(k), float(abs(moment))))
    if violations:
        raise SolvabilityFailure(violations)
    return PhiSolution(m, chi, cauchy_projection(g, shift=-m).scale(2.0),
                       np.zeros(0, dtype=complex))


# ---------------------------------------------------------------------------
# The monogenic RHBVP solve
# ---------------------------------------------------------------------------

@dataclass
class BoundaryCoefficients:
    """Boundary samples of the two bi-axial coefficient functions.

    lambda_1 = A_b + omega nu B_b reduces to lambda_hat_1 = -B_b - i A_b,
    lambda_2 = omega C_b + nu D_b to lambda_hat_2 = -D_b + i C_b.
    """

    A_b: np.ndarray
    B_b: np.ndarray
    C_b: np.ndarray
    D_b: np.ndarray
    floor: float = 1e-8

    def __post_init__(self):
        for i in (1, 2):
            if np.min(np.abs(self.lambda_hat(i))) < self.floor:
                raise DegeneracyError(f"|lambda_hat_{i}| below the degeneracy floor")

    def lambda_hat(self, i: int) -> np.ndarray:
        if i == 1:
            return -np.asarray(self.B_b, float) - 1j * np.asarray(self.A_b, float)
        if i == 2:
            return -np.asarray(self.D_b, float) + 1j * np.asarray(self.C_b, float)
        raise ValueError("i must be 1 or 2")


@dataclass
class SolveConfig:
    boundary_samples: int = 512
    tau_cells: int = 64
    grid_nu: int = 33
    grid_nv: int = 33
    fixed_point_tol: float = 1e-8
    max_iterations: int = 100
    damping: float = 0.5
    axis_strip: bool = True
    coefficient_floor: float = 1e-8
    f_floor: float = 1e-12
    # stabilizers of the similarity fixed point (see _solve_one_problem)
    ramp_iterations: int = 10
    boundary_smoothing: int = 8       # keep N/boundary_smoothing tau modes
    corner_zone: float = 3.0          # continuation radius = corner_zone/sqrt(N)
    zone_floor: float = 8.0           # phase floor multiplier for the fit zone


@dataclass
class DiskGeometry:
    """Everything tied to (domain, resolution): map, samples, grid, quadrature."""

    domain: ProjectedDomain
    cfg: SolveConfig
    cmap: ConformalMap = None
    theta: np.ndarray = None
    zeta_b: np.ndarray = None
    z_b: np.ndarray = None
    grid: ChartGrid = None
    z_grid: np.ndarray = None
    zeta_grid: np.ndarray = None
    quad: TauQuadrature = None
    W: np.ndarray = None
    tau_interp: np.ndarray = None
    zeta_cells: np.ndarray = None

    @classmethod
    def build(cls, domain: ProjectedDomain, cfg: SolveConfig | None = None,
              need_tau: bool = True) -> "DiskGeometry":
        cfg = cfg or SolveConfig()
        geo = cls(domain, cfg)
        geo.cmap = conformal_map_for(domain)
        geo.theta = boundary_angles(cfg.boundary_samples)
        geo.zeta_b = np.exp(1j * geo.theta)
        geo.z_b = np.asarray(geo.cmap.forward(geo.zeta_b), dtype=complex)
        geo.grid = ChartGrid.for_domain(domain, cfg.grid_nu, cfg.grid_nv)
        geo.z_grid = (geo.grid.R + 1j * geo.grid.RHO).ravel()
        geo.zeta_grid = np.asarray(geo.cmap.inverse(geo.z_grid), dtype=complex)
        if need_tau and domain.kind != "unit_disk":
            geo.quad = TauQuadrature(domain, cfg.tau_cells, cfg.axis_strip)
            targets = np.concatenate([geo.z_grid, geo.z_b])
            geo.W = geo.quad.weight_matrix(targets)
            pos = geo.quad.ratio_pos
            # barycentric rows extrapolate the smooth tau field from the
            # polar grid to the cells (the oscillatory ratio itself is
            # never interpolated: its phase would not extrapolate stably)
            uu, vv = geo.grid.chart_coords(pos.real, pos.imag)
            ru = barycentric_matrix(geo.grid.u, geo.grid.wu, np.atleast_1d(uu))
            rv = barycentric_matrix(geo.grid.v, geo.grid.wv, np.atleast_1d(vv))
            geo.tau_interp = np.einsum("ci,cj->cij", ru, rv).reshape(len(pos), -1)
            zc = np.asarray(geo.cmap.inverse(pos), dtype=complex)
            mag = np.abs(zc)
            geo.zeta_cells = np.where(mag > 1.0, zc / mag, zc)
        return geo


@dataclass
class ProblemDiagnostics:
    index_m: int
    iterations: int
    converged: bool
    bc_residual: float
    ratio_changes: list = field(default_factory=list)
    constants_used: np.ndarray = None
    f_boundary: np.ndarray = None


def corner_expansion_basis(sig, kind: int):
    """Homogeneous polynomial solutions of the kind's Vekua system.

    Used as a real-linear expansion basis for the solution near the
    corner, where the conformal map crushes distances below the boundary
    sample resolution.  The f-parts of the exact monogenic generators
    provide degrees up to five; kind 1 additionally has the imaginary
    constant mode.
    """
    from .almansi import monogenic_generators

    fns = []
    for gq in monogenic_generators(sig):
        re_p, im_p = (gq.B, gq.A) if kind == 1 else (gq.D, gq.C)
        if re_p.is_zero and im_p.is_zero:
            continue
        fns.append(lambda z, re_p=re_p, im_p=im_p:
                   re_p.evaluate(np.asarray(z).real, np.asarray(z).imag)
                   + 1j * im_p.evaluate(np.asarray(z).real, np.asarray(z).imag))
    if kind == 1:
        fns.append(lambda z: 1j * np.ones_like(np.asarray(z, dtype=complex)))
    return fns


def _fit_corner_modes(stacked_basis, f_ring):
    """Real-linear least squares with rejection of insignificant modes.

    The Vekua solution space is real-linear only, and modes whose ring
    contribution drowns in the fit residual would inject phase noise at
    the deep cells where the fitted field is tiny; the dominant mode is
    always retained so the continuation stays engaged far from the
    solution.
    """
    ff = np.concatenate([f_ring.real, f_ring.imag])
    coef, *_ = np.linalg.lstsq(stacked_basis, ff, rcond=None)
    resid = float(np.linalg.norm(stacked_basis @ coef - ff))
    contrib = np.array([np.linalg.norm(coef[i] * stacked_basis[:, i])
                        for i in range(len(coef))])
    if contrib.max() <= 0.0:
        return np.zeros_like(coef), resid
    keep = (contrib >= 2.0 * resid) | (contrib >= 0.999 * contrib.max())
    if not np.all(keep):
        sub, *_ = np.linalg.lstsq(stacked_basis[:, keep], ff, rcond=None)
        coef = np.zeros_like(coef)
        coef[keep] = sub
    return coef, resid


def _smooth_boundary(values, keep: int):
    n = len(values)
    c = np.fft.fft(values) / n
    c[keep + 1 : n - keep] = 0.0
    return np.fft.ifft(c * n)


def _solve_one_problem(kind: int, lam_hat, g_samples, geo: DiskGeometry,
                       cfg: SolveConfig, sig, constants=None):
    """Similarity fixed point for one scalar RH problem on the disk.

    The state is the unimodular ratio at the quadrature cells.  Each
    sweep: tau from the current ratio (kernel strength ramped up over
    the first iterations), boundary machinery for the holomorphic
    factor, then the ratio from the factor evaluated at the cell
    preimages and the smooth tau carried over from the grid.  Cells
    where the disk-side representation cannot resolve the phase (the
    fitted field magnitude under the noise floor, or inside the corner
    continuation radius) take the structural phase of a real-linear fit
    to homogeneous Vekua solutions on a resolvable ring.  Convergence is
    measured on the tau field.
    """
    p, q = sig.p, sig.q
    n_nodes = len(geo.z_grid)
    n_b = len(geo.z_b)
    n_boundary = n_b
    degenerate = (p == 1 and q == 1) or geo.quad is None
    n_cells = 0 if degenerate else geo.quad.n_cells
    ratio_cells = np.ones(n_cells, dtype=complex)
    tau_grid = np.zeros(n_nodes, dtype=complex)
    tau_b = np.zeros(n_b, dtype=complex)
    tau_cells = np.zeros(n_cells, dtype=complex)
    changes: list[float] = []
    converged = False
    m = -compute_index(lam_hat, floor=cfg.coefficient_floor)
    c_used = None
    phi = None
    prev_tau = None
    it = 0

    if not degenerate:
        r_cont = cfg.corner_zone / np.sqrt(n_boundary) * geo.domain.radius
        s_nodes = np.abs(geo.z_grid)
        ring = (s_nodes >= 1.2 * r_cont) & (s_nodes <= 3.6 * r_cont)
        basis = corner_expansion_basis(sig, kind)
        b_ring = np.array([f(geo.z_grid[ring]) for f in basis]).T
        b_cells = np.array([f(geo.quad.ratio_pos) for f in basis]).T
        stacked = np.vstack([b_ring.real, b_ring.imag])
        n_ring = int(ring.sum())
        in_fit_range = np.abs(geo.quad.ratio_pos) <= 3.6 * r_cont
        core = np.abs(geo.quad.ratio_pos) < r_cont

    for it in range(1, cfg.max_iterations + 1):
        if not degenerate:
            ramp = min(1.0, (it - 1) / max(cfg.ramp_iterations, 1))
            if ramp > 0.0:
                masses = geo.quad.integrand_masses(ratio_cells, kind, p, q)
                tau_all = ramp * (geo.W @ masses) / np.pi
                tau_grid, tau_b = tau_all[:n_nodes], tau_all[n_nodes:]
                tau_b = _smooth_boundary(tau_b, n_b // cfg.boundary_smoothing)
                tau_cells = geo.tau_interp @ tau_grid

        lam_e = lam_hat * np.exp(tau_b)
        if np.min(np.abs(lam_e)) < cfg.coefficient_floor:
            raise DegeneracyError("|lambda e^tau| fell below the degeneracy floor")
        ang = np.unwrap(np.angle(np.concatenate([lam_e, lam_e[:1]])))
        if abs((ang[-1] - ang[0]) / _TWO_PI + m) > 0.25:
            raise FixedPointError(
                "boundary argument lost the single-valued branch", history=changes)
        q_tilde = ang[:-1] + m * geo.theta
        s_q = schwarz_operator(q_tilde)
        chi = AnalyticDisk(1j * s_q.coeffs)
        chi_b = chi(geo.zeta_b)
        g_hat = build_g_hat(g_samples, lam_hat, tau_b, chi_b, floor=cfg.coefficient_floor)
        phi = phi_nonneg_index(m, g_hat, chi, constants) if m >= 0 \
            else phi_neg_index(m, g_hat, chi)
        c_used = phi.constants

        if degenerate:
            converged = True
            break
        phi_c = phi(geo.zeta_cells)
        scale = max(float(np.max(np.abs(phi_c))), cfg.f_floor)
        safe = np.abs(phi_c) > cfg.f_floor * scale
        raw = np.where(safe,
                       np.conj(phi_c) / np.where(safe, phi_c, 1.0)
                       * np.exp(-2j * tau_cells.imag),
                       ratio_cells)
        f_ring = phi(geo.zeta_grid[ring]) * np.exp(tau_grid[ring])
        coef, resid = _fit_corner_modes(stacked, f_ring)
        f_fit = b_cells @ coef
        floor = 6.0 * resid / np.sqrt(2.0 * n_ring)
        zone = in_fit_range & (core | (np.abs(f_fit) < max(floor, 1e-14) * cfg.zone_floor))
        fit_ok = np.abs(f_fit) > 1e-14
        raw = np.where(zone & fit_ok,
                       np.conj(f_fit) / np.where(fit_ok, f_fit, 1.0), raw)
        blended = ratio_cells + cfg.damping * (raw - ratio_cells)
        bmod = np.abs(blended)
        ratio_cells = np.where(bmod > 0.1, blended / np.where(bmod > 0.1, bmod, 1.0), raw)
        change = float(np.max(np.abs(tau_grid - prev_tau))) if prev_tau is not None \
            else float("inf")
        changes.append(change)
        prev_tau = tau_grid.copy()
        if it > cfg.ramp_iterations + 2 and change <= cfg.fixed_point_tol:
            converged = True
            break

    if not converged:
        raise FixedPointError(
            f"similarity fixed point did not converge in {cfg.max_iterations} "
            f"iterations (last tau change {changes[-1]:.3e})", history=changes)

    f_b = phi(geo.zeta_b) * np.exp(tau_b)
    f_grid = phi(geo.zeta_grid) * np.exp(tau_grid)
    bc_res = float(np.max(np.abs(np.real(lam_hat * f_b) - np.asarray(g_samples, float))))
    diag = ProblemDiagnostics(index_m=m, iterations=it, converged=converged,
                              bc_residual=bc_res, ratio_changes=changes,
                              constants_used=c_used, f_boundary=f_b)
    return f_grid, diag


def solve_monogenic_rhbvp(sig, coeffs: BoundaryCoefficients, g1, g2,
                          geo: DiskGeometry, cfg: SolveConfig | None = None,
                          constants: dict | None = None):
    """Solve D phi = 0, Re{lambda_1 phi} = g_1, Re{lambda_2 phi} = g_2.

    The two scalar problems decouple: f_1 = B + iA carries the first-type
    coefficient pair, f_2 = D + iC the second.  ``constants`` may supply
    free-constant vectors under keys 1 and 2 (defaults are zeros).
    Returns the quadruple on the geometry's grid plus per-problem
    diagnostics.
    """
    cfg = cfg or geo.cfg
    constants = constants or {}
    f1, d1 = _solve_one_problem(1, coeffs.lambda_hat(1), g1, geo, cfg,
                                sig, constants.get(1))
    f2, d2 = _solve_one_problem(2, coeffs.lambda_hat(2), g2, geo, cfg,
                                sig, constants.get(2))
    shape = geo.grid.shape
    quad = BiaxialQuadruple(
        sig,
        GridField(geo.grid, f1.imag.reshape(shape)),
        GridField(geo.grid, f1.real.reshape(shape)),
        GridField(geo.grid, f2.imag.reshape(shape)),
        GridField(geo.grid, f2.real.reshape(shape)),
    )
    return quad, {1: d1, 2: d2}
