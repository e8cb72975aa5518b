"""Catalog of projected domains S in the (r, rho) quarter-plane.

`quarter_disk` is the projection of a ball centered at the origin: the
quarter of the unit disk in the open quadrant, trimmed away from both
axes by a small margin eps because the reduced Vekua systems carry 1/r
and 1/rho coefficients.  `unit_disk` is a complex-plane test domain used
for the degenerate p = q = 1 problems and for exercising the disk-side
boundary machinery; it is not confined to the quadrant.  `rect_domain`
is an axis-aligned rectangle strictly inside the open quadrant, used for
field/operator tests (it is not star-like about the origin, so the ray
integral operators reject it).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ProjectedDomain:
    kind: str                      # "quarter_disk" | "unit_disk" | "rect"
    radius: float = 1.0
    eps: float = 1e-3              # axis margin
    bounds: tuple = ()             # rect only: (r0, r1, rho0, rho1)

    def __post_init__(self):
        if self.kind not in ("quarter_disk", "unit_disk", "rect"):
            raise ValueError(f"unknown domain kind {self.kind!r}")
        if self.eps <= 0:
            raise ValueError("axis margin eps must be positive")
        if self.kind == "rect":
            r0, r1, rho0, rho1 = self.bounds
            if not (0 < r0 < r1 and 0 < rho0 < rho1):
                raise ValueError("rect bounds must lie in the open quadrant")

    # -- membership of the eps-trimmed domain --------------------------
    def contains(self, xi, eta):
        xi = np.asarray(xi, dtype=float)
        eta = np.asarray(eta, dtype=float)
        if self.kind == "quarter_disk":
            return (xi >= self.eps) & (eta >= self.eps) & (xi**2 + eta**2 <= self.radius**2)
        if self.kind == "unit_disk":
            return xi**2 + eta**2 <= self.radius**2
        r0, r1, rho0, rho1 = self.bounds
        return (xi >= r0) & (xi <= r1) & (eta >= rho0) & (eta <= rho1)

    # -- chart box for the storage grid --------------------------------
    @property
    def star_like(self) -> bool:
        return self.kind in ("quarter_disk", "unit_disk")

    def chart(self) -> str:
        return "cartesian" if self.kind == "rect" else "polar"

    def chart_box(self) -> tuple[float, float, float, float]:
        """(u_lo, u_hi, v_lo, v_hi) for the tensor grid in chart coords."""
        if self.kind == "quarter_disk":
            # polar (s, t): radial range keeps the corner off the grid (the
            # 1/s chain-rule factor would otherwise amplify derivative
            # roundoff); the angular margin keeps min(r, rho) >= eps at the
            # inner radius, matching the axis trim
            s_lo = max(2.0 * self.eps, 0.04 * self.radius)
            t_lo = float(np.arcsin(min(0.5, self.eps / s_lo)))
            return (s_lo, self.radius, t_lo, np.pi / 2 - t_lo)
        if self.kind == "unit_disk":
            return (0.05 * self.radius, self.radius, 0.0, 2.0 * np.pi)
        r0, r1, rho0, rho1 = self.bounds
        return (r0, r1, rho0, rho1)

    def quad_box(self) -> tuple[float, float, float, float]:
        """Bounding box of the eps-trimmed domain for tensor quadrature cells."""
        if self.kind == "quarter_disk":
            return (self.eps, self.radius, self.eps, self.radius)
        if self.kind == "unit_disk":
            return (-self.radius, self.radius, -self.radius, self.radius)
        return self.bounds


def quarter_disk(radius: float = 1.0, eps: float = 1e-3) -> ProjectedDomain:
    return ProjectedDomain("quarter_disk", radius=radius, eps=eps)


def unit_disk(radius: float = 1.0, eps: float = 1e-3) -> ProjectedDomain:
    return ProjectedDomain("unit_disk", radius=radius, eps=eps)


def rect_domain(r0: float, r1: float, rho0: float, rho1: float, eps: float = 1e-3) -> ProjectedDomain:
    return ProjectedDomain("rect", eps=eps, bounds=(r0, r1, rho0, rho1))
