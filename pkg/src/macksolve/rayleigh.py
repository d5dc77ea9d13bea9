"""Critical-layer machinery on the finite window around Y_c.

The homogeneous solution phi of the Rayleigh-type operator is integrated
directly as an ODE outward from the critical point (where its data are
Mbar and Mbar'); the hyperbolic-profile psi serves as the quantitative
validation target.  The nonhomogeneous problem is solved by the
variation-of-parameters representation whose free constant mu_f enforces
the second boundary condition.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .baseflow import BaseFlow, DomainError
from .langer import LangerMap, _Cumulative, default_window
from .thermo import ThermoProfile

CI_FLOOR = 1e-13


class PrecisionError(RuntimeError):
    """Requested c_i below what double precision can resolve here."""


@dataclass(frozen=True)
class CriticalWindow:
    """Interval [y1s, y2s] around Y_c, inside the subsonic regime."""

    y1s: float
    y2s: float
    yc: float
    wc_left: float    # w_c(y1s) < 0
    wc_right: float   # w_c(y2s) > 0

    def __post_init__(self):
        if not (self.y1s < self.yc < self.y2s):
            raise DomainError("window must straddle the critical point")

    @property
    def asymmetry(self) -> float:
        return abs(abs(self.wc_left) - abs(self.wc_right))


def critical_window(lmap: LangerMap, min_asymmetry: float = 1e-2) -> CriticalWindow:
    """Default window endpoints, nudged +/-5% if the wc-asymmetry is tight."""
    y1s, y2s = default_window(lmap.turning)
    yc = lmap.turning.yc
    for shift in (0.0, 0.05, -0.05):
        a = y1s * (1 + shift) if shift else y1s
        b = y2s * (1 + shift) if shift else y2s
        wl = float(lmap.wc(np.array([a]))[0])
        wr = float(lmap.wc(np.array([b]))[0])
        if abs(abs(wl) - abs(wr)) >= min_asymmetry:
            return CriticalWindow(y1s=a, y2s=b, yc=yc, wc_left=wl, wc_right=wr)
    raise DomainError("could not find an asymmetric critical window")


def psi_profile(lmap: LangerMap, window: CriticalWindow, alpha: float, y):
    """Hyperbolic reference profile matching (Mbar, Mbar') at Y_c."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    th = lmap.thermo
    c = lmap.c
    yc = window.yc
    m_c = th.mbar(yc, c, 0)
    dm_c = th.mbar(yc, c, 1)
    fr = th.f_real(y, c.real)
    if np.any(fr <= 0):
        raise DomainError("psi needs the subsonic regime (F_r > 0)")
    wc = lmap.wc(y)
    fq = fr**0.25
    return (dm_c / alpha) * fq * np.sinh(alpha * wc) + m_c * fq * np.cosh(alpha * wc)


@dataclass(frozen=True)
class PhiSolution:
    """Homogeneous critical-layer solution with evaluators on the window."""

    lmap: LangerMap
    window: CriticalWindow
    alpha: float
    _left: object    # dense solutions from solve_ivp
    _right: object

    @property
    def c(self) -> complex:
        return self.lmap.c

    def _eval(self, y, row):
        y = np.atleast_1d(np.asarray(y, dtype=float))
        yc = self.window.yc
        out = np.empty(y.shape, dtype=complex)
        left = y <= yc
        if left.any():
            v = self._left(y[left])
            out[left] = v[2 * row] + 1j * v[2 * row + 1]
        if (~left).any():
            v = self._right(y[~left])
            out[~left] = v[2 * row] + 1j * v[2 * row + 1]
        return out

    def phi(self, y):
        return self._eval(y, 0)

    def dphi(self, y):
        return self._eval(y, 1)

    def psi(self, y):
        return psi_profile(self.lmap, self.window, self.alpha, y)


def _rayleigh_rhs(thermo: ThermoProfile, c: complex, alpha: float):
    def rhs(y, s):
        phi = s[0] + 1j * s[1]
        dphi = s[2] + 1j * s[3]
        m0 = thermo.mbar(y, c, 0)
        m1 = thermo.mbar(y, c, 1)
        m2 = thermo.mbar(y, c, 2)
        F = 1.0 - m0 * m0
        dF = -2.0 * m0 * m1
        d2 = (dF / F) * dphi + (alpha**2 * F + m2 / m0 - (m1 / m0) * (dF / F)) * phi
        return [s[2], s[3], d2.real, d2.imag]

    return rhs


def homogeneous_phi(
    lmap: LangerMap,
    window: CriticalWindow,
    alpha: float,
    rtol: float = 1e-10,
    atol: float = 1e-14,
) -> PhiSolution:
    """Integrate the homogeneous Rayleigh operator outward from Y_c.

    phi grows like sinh(alpha |w_c|) in both directions, so outward
    integration tracks the dominant solution and is stable.  Requires
    c_i above the double-precision floor (the ODE coefficients carry
    Mbar^{-1} ~ (|Y-Yc| + c_i)^{-1}).
    """
    c = lmap.c
    if c.imag < CI_FLOOR:
        raise PrecisionError(
            f"c_i = {c.imag:g} below the resolvable floor {CI_FLOOR:g}"
        )
    th = lmap.thermo
    yc = window.yc
    m_c = complex(th.mbar(yc, c, 0))
    dm_c = complex(th.mbar(yc, c, 1))
    y0_state = [m_c.real, m_c.imag, dm_c.real, dm_c.imag]
    rhs = _rayleigh_rhs(th, c, alpha)
    max_step = min(0.5 / alpha, 0.05)
    kw = dict(method="DOP853", rtol=rtol, atol=atol, dense_output=True,
              max_step=max_step)
    sol_r = solve_ivp(rhs, (yc, window.y2s), y0_state, **kw)
    sol_l = solve_ivp(rhs, (yc, window.y1s), y0_state, **kw)
    if not (sol_r.success and sol_l.success):
        raise PrecisionError("critical-layer integration failed: "
                             + sol_r.message + " / " + sol_l.message)
    return PhiSolution(lmap=lmap, window=window, alpha=alpha,
                       _left=sol_l.sol, _right=sol_r.sol)


def _graded_edges(a: float, b: float, yc: float, scale: float, ratio: float = 1.2):
    """Panel edges on [a, b] geometrically refined toward yc from both sides."""
    def side(outer: float):
        gaps = []
        g = abs(outer - yc)
        while g > scale:
            gaps.append(g)
            g /= ratio
        gaps.append(scale)
        gaps.append(0.0)
        return np.array(gaps)

    left = yc - side(a)
    right = yc + side(b)
    edges = np.unique(np.concatenate([[a], left[left >= a], right[right <= b], [b]]))
    return edges


def phi_inverse_square_integral(phi: PhiSolution, window: CriticalWindow | None = None):
    """int F / phi^2 over the window, refined near the critical layer."""
    if window is None:
        window = phi.window
    th = phi.lmap.thermo
    c = phi.c
    # the integrand's off-axis double pole sits c_i-close to Y_c; panels
    # must shrink to that scale or the two near-pole lobes do not cancel
    scale = max(c.imag, 1e-9) / 2.0

    def fun(y):
        m = th.mbar(y, c, 0)
        return (1.0 - m * m) / phi.phi(y) ** 2

    edges = _graded_edges(window.y1s, window.y2s, window.yc, scale)
    cum = _Cumulative(fun, edges=edges)
    return complex(cum.eval(np.array([window.y2s]))[0])


@dataclass(frozen=True)
class RayleighSolution:
    """Representation-formula solution of the nonhomogeneous window problem."""

    phi: PhiSolution
    mu_f: complex
    _cum_g: _Cumulative       # prefix of G_f from y1s
    _cum_invsq: _Cumulative   # prefix of F/phi^2 from y1s
    _total_g: complex
    _total_invsq: complex

    def __call__(self, y):
        y = np.atleast_1d(np.asarray(y, dtype=float))
        w = self.phi.window
        pv = self.phi.phi(y)
        g_pre = self._cum_g.eval(y)
        i_pre = self._cum_invsq.eval(y)
        out = np.empty(y.shape, dtype=complex)
        left = y <= w.yc
        # two equivalent forms; the mirrored one avoids cancellation on the
        # right of the critical point
        out[left] = pv[left] * (g_pre[left] + self.mu_f * i_pre[left])
        r = ~left
        out[r] = -pv[r] * ((self._total_g - g_pre[r])
                           + self.mu_f * (self._total_invsq - i_pre[r]))
        return out

    def left_form(self, y):
        y = np.atleast_1d(np.asarray(y, dtype=float))
        return self.phi.phi(y) * (self._cum_g.eval(y) + self.mu_f * self._cum_invsq.eval(y))

    def right_form(self, y):
        y = np.atleast_1d(np.asarray(y, dtype=float))
        return -self.phi.phi(y) * ((self._total_g - self._cum_g.eval(y))
                                   + self.mu_f * (self._total_invsq - self._cum_invsq.eval(y)))


def solve_rayleigh_bvp(phi: PhiSolution, f, window: CriticalWindow | None = None,
                       support: tuple | None = None) -> RayleighSolution:
    """Solve the window problem L_cr[phi_sol] = f, phi_sol = 0 at both ends.

    f must vanish near the critical point (its support sits against the
    window ends); mu_f is the unique constant annihilating the value at the
    far end.
    """
    if window is None:
        window = phi.window
    th = phi.lmap.thermo
    c = phi.c
    yc = window.yc
    scale = max(c.imag, 1e-9) / 2.0
    edges = _graded_edges(window.y1s, window.y2s, yc, scale)
    if support is not None:
        extra = [p for seg in support for p in seg]
        edges = np.unique(np.concatenate([edges, np.asarray(extra, float)]))

    inner = _Cumulative(lambda y: phi.phi(y) * f(y) / th.mbar(y, c, 0), edges=edges)
    inner_at_yc = inner.eval(np.array([yc]))[0]

    def g_f(y):
        m = th.mbar(y, c, 0)
        F = 1.0 - m * m
        return (F / phi.phi(y) ** 2) * (inner.eval(y) - inner_at_yc)

    def inv_sq(y):
        m = th.mbar(y, c, 0)
        return (1.0 - m * m) / phi.phi(y) ** 2

    cum_g = _Cumulative(g_f, edges=edges)
    cum_invsq = _Cumulative(inv_sq, edges=edges)
    total_g = complex(cum_g.prefix[-1])
    total_invsq = complex(cum_invsq.prefix[-1])
    if total_invsq == 0:
        raise RuntimeError("degenerate window: int F/phi^2 vanished")
    mu = -total_g / total_invsq
    return RayleighSolution(phi=phi, mu_f=mu, _cum_g=cum_g, _cum_invsq=cum_invsq,
                            _total_g=total_g, _total_invsq=total_invsq)


def apply_rayleigh_operator(thermo: ThermoProfile, c: complex, alpha: float,
                            fun, y, h: float = 1e-4):
    """L_cr[fun] by 6th-order finite differences of fun (independent check)."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    off = np.arange(-3, 4)
    w1 = np.array([-1, 9, -45, 0, 45, -9, 1]) / 60.0
    w2 = np.array([2, -27, 270, -490, 270, -27, 2]) / 180.0
    vals = np.stack([np.atleast_1d(fun(y + k * h)) for k in off])
    d1 = np.tensordot(w1, vals, axes=(0, 0)) / h
    d2 = np.tensordot(w2, vals, axes=(0, 0)) / h**2
    v = np.atleast_1d(fun(y))
    m0 = thermo.mbar(y, c, 0)
    m1 = thermo.mbar(y, c, 1)
    m2 = thermo.mbar(y, c, 2)
    F = 1.0 - m0 * m0
    dF = -2.0 * m0 * m1
    return (m0 * (d2 / F - d1 * dF / F**2 - alpha**2 * v)
            - (m2 / F - m1 * dF / F**2) * v)


def solve_rayleigh_fd(thermo: ThermoProfile, c: complex, alpha: float,
                      window: CriticalWindow, f, n: int = 400):
    """Direct finite-difference BVP solve of the window problem (oracle).

    Fourth-order stencils inside, second-order at the two near-boundary
    rows; returns (grid, values).
    """
    y = np.linspace(window.y1s, window.y2s, n + 1)
    h = y[1] - y[0]
    m0 = thermo.mbar(y, c, 0)
    m1 = thermo.mbar(y, c, 1)
    m2 = thermo.mbar(y, c, 2)
    F = 1.0 - m0 * m0
    dF = -2.0 * m0 * m1
    a_c = m0 / F
    b_c = -m0 * dF / F**2
    d_c = -alpha**2 * m0 - m2 / F + m1 * dF / F**2

    N = n + 1
    A = np.zeros((N, N), dtype=complex)
    rhs = np.zeros(N, dtype=complex)
    A[0, 0] = 1.0
    A[N - 1, N - 1] = 1.0
    s2_4 = np.array([-1, 16, -30, 16, -1]) / 12.0
    s1_4 = np.array([1, -8, 0, 8, -1]) / 12.0
    s2_2 = np.array([1, -2, 1], dtype=float)
    s1_2 = np.array([-0.5, 0.0, 0.5])
    for i in range(1, N - 1):
        if 2 <= i <= N - 3:
            sl = slice(i - 2, i + 3)
            A[i, sl] += a_c[i] * s2_4 / h**2 + b_c[i] * s1_4 / h
        else:
            sl = slice(i - 1, i + 2)
            A[i, sl] += a_c[i] * s2_2 / h**2 + b_c[i] * s1_2 / h
        A[i, i] += d_c[i]
        rhs[i] = f(y[i])
    sol = np.linalg.solve(A, rhs)
    return y, sol
