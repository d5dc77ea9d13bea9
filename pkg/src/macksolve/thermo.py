"""Thermodynamic closures and the two distinguished points.

Everything here is an exact function of the tabulated base flow: temperature
and density from the insulated-wall relation, the relative Mach number and
its Y-derivatives by chain rule on (u, du, d2u, d3u), and the turning /
critical points by a quadratic formula plus monotone inversion.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .baseflow import BaseFlow, DomainError


@dataclass(frozen=True)
class SpectralPoint:
    """Wave number and complex phase speed (alpha, c_r + i c_i)."""

    alpha: float
    c_r: float
    c_i: float = 0.0

    def __post_init__(self):
        if self.alpha <= 0:
            raise DomainError("alpha must be positive")
        if not (0.0 < self.c_r < 1.0):
            raise DomainError("c_r must lie in (0, 1)")
        if self.c_i < 0:
            raise DomainError("c_i must be >= 0")

    @property
    def c(self) -> complex:
        return complex(self.c_r, self.c_i)


@dataclass(frozen=True)
class ThermoProfile:
    """Base temperature/density for a supersonic flow past an insulated wall."""

    flow: BaseFlow
    mach: float
    gamma: float = 1.4

    def __post_init__(self):
        if self.mach <= 1.0:
            raise DomainError("supersonic base flow required (mach > 1)")
        if self.gamma <= 1.0:
            raise DomainError("gamma must exceed 1")

    # -- temperature and density -------------------------------------------
    def t0(self, y, order: int = 0):
        """T0 = 1 + (gamma-1)/2 * M^2 (1 - u^2) and its Y-derivatives."""
        k = 0.5 * (self.gamma - 1.0) * self.mach**2
        u = self.flow.eval_u(y, 0)
        if order == 0:
            return 1.0 + k * (1.0 - u * u)
        du = self.flow.eval_u(y, 1)
        if order == 1:
            return -2.0 * k * u * du
        d2u = self.flow.eval_u(y, 2)
        if order == 2:
            return -2.0 * k * (du * du + u * d2u)
        d3u = self.flow.eval_u(y, 3)
        if order == 3:
            return -2.0 * k * (3.0 * du * d2u + u * d3u)
        raise ValueError("order must be 0..3")

    def rho0(self, y):
        return 1.0 / self.t0(y)

    @property
    def t0_wall(self) -> float:
        return float(self.t0(0.0))

    # -- relative Mach number ----------------------------------------------
    def mbar(self, y, c, order: int = 0):
        """Relative Mach number M(u - c)/sqrt(T0) or one of its derivatives.

        c may be complex (c_i > 0) or real (c_i = 0 gives the real part used
        by turning-point geometry).  sqrt(T0) is the positive real root.
        """
        t0 = self.t0(y)
        g = self.mach / np.sqrt(t0)
        h = self.flow.eval_u(y, 0) - c
        if order == 0:
            return g * h
        t1 = self.t0(y, 1)
        du = self.flow.eval_u(y, 1)
        r1 = t1 / t0
        if order == 1:
            return g * (du - 0.5 * h * r1)
        t2 = self.t0(y, 2)
        d2u = self.flow.eval_u(y, 2)
        r2 = t2 / t0
        if order == 2:
            return g * (d2u - du * r1 + h * (0.75 * r1 * r1 - 0.5 * r2))
        t3 = self.t0(y, 3)
        d3u = self.flow.eval_u(y, 3)
        r3 = t3 / t0
        if order == 3:
            g2 = 0.75 * r1 * r1 - 0.5 * r2
            g3 = -1.875 * r1**3 + 2.25 * r1 * r2 - 0.5 * r3
            return g * (d3u + 3.0 * g2 * du - 1.5 * r1 * d2u + h * g3)
        raise ValueError("order must be 0..3")

    # -- F = 1 - Mbar^2 ------------------------------------------------------
    def f_complex(self, y, c):
        m = self.mbar(y, c)
        return 1.0 - m * m

    def f_real(self, y, c_r):
        m = self.mbar(y, c_r)
        return 1.0 - m * m

    def f_split(self, y, c):
        """(F_r, F_i) with F_r frozen at c_r and F_i = F - F_r (carries c_i)."""
        fr = self.f_real(y, np.real(c))
        return fr, self.f_complex(y, c) - fr

    def f_real_deriv(self, y, c_r, order: int = 1):
        """Y-derivatives of F_r = 1 - Mbar_r^2, orders 1..3."""
        m0 = self.mbar(y, c_r, 0)
        m1 = self.mbar(y, c_r, 1)
        if order == 1:
            return -2.0 * m0 * m1
        m2 = self.mbar(y, c_r, 2)
        if order == 2:
            return -2.0 * (m1 * m1 + m0 * m2)
        m3 = self.mbar(y, c_r, 3)
        if order == 3:
            return -2.0 * (3.0 * m1 * m2 + m0 * m3)
        raise ValueError("order must be 1..3")


def temperature_profile(flow: BaseFlow, mach: float, gamma: float = 1.4) -> ThermoProfile:
    return ThermoProfile(flow=flow, mach=mach, gamma=gamma)


@dataclass(frozen=True)
class TurningData:
    """Turning point Y0 (F_r = 0) and critical point Y_c (u = c_r)."""

    y0: float
    yc: float
    dFr_y0: float
    ub_y0: float
    c_r: float

    def __post_init__(self):
        if not (0.0 < self.y0 < self.yc):
            raise DomainError(f"need 0 < Y0 < Yc, got Y0={self.y0}, Yc={self.yc}")
        if self.dFr_y0 <= 0:
            raise DomainError("dF_r/dY at the turning point must be positive")


def supersonic_window(mach: float) -> tuple[float, float]:
    """Admissible phase-speed window (1 - 1/M, 1) for mode searches."""
    return 1.0 - 1.0 / mach, 1.0


def turning_point_ub(c_r: float, mach: float, gamma: float = 1.4) -> float:
    """Base-flow speed at the turning point, from the quadratic for U_B(Y0).

    F_r(Y0) = 0 reduces to (gamma+1)/2 M^2 x^2 - 2M^2 c_r x
    + M^2 c_r^2 - (gamma-1)/2 M^2 - 1 = 0; the admissible root is the
    smaller one.
    """
    disc = (gamma**2 - 1.0) + 2.0 * (gamma + 1.0) / mach**2 - 2.0 * (gamma - 1.0) * c_r**2
    if disc <= 0:
        raise DomainError("turning-point quadratic has no real root")
    return (2.0 * c_r - np.sqrt(disc)) / (gamma + 1.0)


def turning_point(
    thermo: ThermoProfile,
    flow: BaseFlow,
    c_r: float,
    window: tuple[float, float] | None = None,
    n_sign_samples: int = 1000,
) -> TurningData:
    """Locate Y0 and Y_c for a phase speed in the admissible window.

    window=None applies the mode-search window (1 - 1/M, 1); scans over the
    wider admissibility set pass their own bounds.
    """
    lo, hi = window if window is not None else supersonic_window(thermo.mach)
    if not (lo < c_r < hi):
        raise DomainError(f"c_r = {c_r} outside window ({lo:.6f}, {hi:.6f})")

    ub0 = turning_point_ub(c_r, thermo.mach, thermo.gamma)
    if not (flow.u[0] < ub0 < flow.u[-1] - 1e-9):
        raise DomainError(
            f"turning-point speed {ub0:.6f} not bracketed by the profile table"
        )
    y0 = flow.invert_u(ub0)
    if not (flow.u[0] < c_r < flow.u[-1]):
        raise DomainError(f"critical speed {c_r} not bracketed by the profile table")
    yc = flow.invert_u(c_r)

    dfr = float(thermo.f_real_deriv(y0, c_r, 1))
    td = TurningData(y0=y0, yc=yc, dFr_y0=dfr, ub_y0=ub0, c_r=c_r)

    # sign pattern of F_r on both sides of Y0
    ys = np.linspace(flow.grid[0], flow.y_max, n_sign_samples)
    fr = thermo.f_real(ys, c_r)
    bad_lo = np.any(fr[ys < y0 - 1e-6] >= 0)
    bad_hi = np.any(fr[ys > y0 + 1e-6] <= 0)
    if bad_lo or bad_hi:
        raise DomainError("F_r does not change sign exactly once across Y0")
    return td
