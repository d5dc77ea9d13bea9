"""Langer coordinate, turning-point potentials, and WKB weights.

The Langer coordinate solves dF(Y0) * eta * (d eta)^2 = F(Y) with
eta(Y0) = 0, where F is the modified type-changing coefficient: F_r below
the cutoff band, F_r plus the damped imaginary part beyond it.  eta is
computed from its closed-form branch integrals; the square-root vanishing
at Y0 is removed exactly by the substitution Z = Y0 +/- t^2, so the
cumulative quadrature sees only smooth integrands.

Derivatives of eta come from the defining identity away from Y0 and from a
quartic Taylor model inside a small window where the identity is 0/0.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .baseflow import BaseFlow, DomainError
from .thermo import ThermoProfile, TurningData, turning_point

_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)

H_TAYLOR = 0.01  # half-width of the Taylor window around Y0


class MapError(RuntimeError):
    """Langer map failed its construction checks."""


def smoothstep(t):
    """Quintic smoothstep: 0 below 0, 1 above 1, C^2 across both edges."""
    t = np.clip(t, 0.0, 1.0)
    return t**3 * (10.0 + t * (-15.0 + 6.0 * t))


def _smoothstep_d1(t):
    inside = (t > 0) & (t < 1)
    t = np.clip(t, 0.0, 1.0)
    return np.where(inside, 30.0 * t**2 * (1.0 - t) ** 2, 0.0)


def _smoothstep_d2(t):
    inside = (t > 0) & (t < 1)
    t = np.clip(t, 0.0, 1.0)
    return np.where(inside, 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t), 0.0)


class _Cumulative:
    """Prefix Gauss-Legendre quadrature of a smooth integrand on [a, b].

    eval(x) = integral_a^x, by prefix sums at panel edges plus one GL pass
    over the trailing partial panel; vectorized over x.
    """

    def __init__(self, fun, a: float = 0.0, b: float = 1.0, n_panels: int = 100,
                 edges: np.ndarray | None = None):
        self.fun = fun
        self.edges = np.asarray(edges, float) if edges is not None \
            else np.linspace(a, b, n_panels + 1)
        mid = 0.5 * (self.edges[:-1] + self.edges[1:])
        half = 0.5 * np.diff(self.edges)
        nodes = mid[:, None] + half[:, None] * _GL_X[None, :]
        vals = fun(nodes.ravel()).reshape(nodes.shape)
        panel = (vals * _GL_W[None, :]).sum(axis=1) * half
        self.prefix = np.concatenate([[0.0], np.cumsum(panel)])
        if not np.all(np.isfinite(self.prefix)):
            raise MapError("cumulative quadrature produced non-finite values")

    def eval(self, x):
        x = np.asarray(x, dtype=float)
        lo, hi = self.edges[0], self.edges[-1]
        if np.any(x < lo - 1e-12) or np.any(x > hi + 1e-12):
            raise DomainError("cumulative quadrature evaluated outside its range")
        xc = np.clip(x, lo, hi)
        idx = np.clip(np.searchsorted(self.edges, xc, side="right") - 1, 0, len(self.edges) - 2)
        a = self.edges[idx]
        mid = 0.5 * (a + xc)
        half = 0.5 * (xc - a)
        nodes = mid[..., None] + half[..., None] * _GL_X
        vals = self.fun(nodes.ravel()).reshape(nodes.shape)
        tail = (vals * _GL_W).sum(axis=-1) * half
        return self.prefix[idx] + tail


@dataclass(frozen=True)
class LangerMap:
    """Langer coordinate map plus derived potentials and weights."""

    thermo: ThermoProfile
    turning: TurningData
    c: complex
    alpha: float
    delta0: float
    y1s: float                # critical-window endpoints (subsonic side)
    y2s: float
    kappa: float
    _s_plus: _Cumulative      # S(Y>=Y0) via t = sqrt(Y - Y0)
    _s_minus: _Cumulative     # S(Y<=Y0) via t = sqrt(Y0 - Y)
    _wc_cum: _Cumulative
    _wc_at_yc: float
    _taylor: tuple            # (p, q, r) of eta = t + p t^2 + q t^3 + r t^4
    _dfr0: float

    # -- modified coefficient ------------------------------------------------
    @property
    def cutoff_start(self) -> float:
        return self.y2s + self.delta0

    def chi0(self, y):
        """Cutoff: 1 up to y2s + delta0, 0 beyond y2s + 2*delta0."""
        return 1.0 - smoothstep((np.asarray(y, float) - self.cutoff_start) / self.delta0)

    def f_tilde(self, y, order: int = 0):
        """F_r + (1 - chi0) F_i and its first two Y-derivatives."""
        y = np.asarray(y, dtype=float)
        th, c = self.thermo, self.c
        c_r = c.real
        if order == 0:
            fr = th.f_real(y, c_r)
            fi = th.f_complex(y, c) - fr
            return fr + (1.0 - self.chi0(y)) * fi
        # complex F' = -2 M M', F'' = -2 (M'^2 + M M'')
        m0, m1 = th.mbar(y, c, 0), th.mbar(y, c, 1)
        m0r, m1r = th.mbar(y, c_r, 0), th.mbar(y, c_r, 1)
        dfr = -2.0 * m0r * m1r
        dfc = -2.0 * m0 * m1
        dfi = dfc - dfr
        fi = (1.0 - th.mbar(y, c, 0) ** 2) - th.f_real(y, c_r)
        t = (y - self.cutoff_start) / self.delta0
        s1 = _smoothstep_d1(t) / self.delta0
        one_m_chi = smoothstep(t)
        if order == 1:
            return dfr + one_m_chi * dfi + s1 * fi
        m2 = th.mbar(y, c, 2)
        m2r = th.mbar(y, c_r, 2)
        d2fr = -2.0 * (m1r * m1r + m0r * m2r)
        d2fc = -2.0 * (m1 * m1 + m0 * m2)
        d2fi = d2fc - d2fr
        s2 = _smoothstep_d2(t) / self.delta0**2
        if order == 2:
            return d2fr + one_m_chi * d2fi + 2.0 * s1 * dfi + s2 * fi
        raise ValueError("order must be 0..2")

    # -- Langer coordinate ---------------------------------------------------
    def eta(self, y):
        y = np.asarray(y, dtype=float)
        y0 = self.turning.y0
        out = np.empty(y.shape, dtype=complex)
        above = y >= y0
        if above.any():
            s = self._s_plus.eval(np.sqrt(np.maximum(y[above] - y0, 0.0)))
            out[above] = (1.5 * s) ** (2.0 / 3.0)
        if (~above).any():
            s = self._s_minus.eval(np.sqrt(np.maximum(y0 - y[~above], 0.0)))
            out[~above] = -((1.5 * np.real(s)) ** (2.0 / 3.0))
        real_zone = y <= self.cutoff_start
        out[real_zone] = np.real(out[real_zone])
        return out

    def _eta_derivs(self, y):
        """(eta, eta', eta'', eta''') with the Taylor model near Y0."""
        y = np.asarray(y, dtype=float)
        y0 = self.turning.y0
        e0 = self.eta(y)
        t = y - y0
        near = np.abs(t) <= H_TAYLOR
        p, q, r = self._taylor
        e1 = np.empty_like(e0)
        e2 = np.empty_like(e0)
        e3 = np.empty_like(e0)
        if near.any():
            tn = t[near]
            e0[near] = tn * (1.0 + tn * (p + tn * (q + tn * r)))
            e1[near] = 1.0 + tn * (2 * p + tn * (3 * q + tn * 4 * r))
            e2[near] = 2 * p + tn * (6 * q + tn * 12 * r)
            e3[near] = 6 * q + tn * 24 * r
        far = ~near
        if far.any():
            yf = y[far]
            g = self.f_tilde(yf, 0) / self._dfr0
            g1 = self.f_tilde(yf, 1) / self._dfr0
            g2 = self.f_tilde(yf, 2) / self._dfr0
            ef = e0[far]
            d1 = np.sqrt(g / ef)
            d2 = (g1 - d1**3) / (2.0 * ef * d1)
            d3 = (g2 - 5.0 * d1**2 * d2 - 2.0 * ef * d2**2) / (2.0 * ef * d1)
            e1[far], e2[far], e3[far] = d1, d2, d3
        real_zone = y <= self.cutoff_start
        for arr in (e1, e2, e3):
            arr[real_zone] = np.real(arr[real_zone])
        return e0, e1, e2, e3

    def deta(self, y):
        return self._eta_derivs(y)[1]

    def d2eta(self, y):
        return self._eta_derivs(y)[2]

    def d3eta(self, y):
        return self._eta_derivs(y)[3]

    # -- weights ---------------------------------------------------------------
    def w0(self, y):
        """WKB weight from the turning point: 0 below Y0."""
        y = np.asarray(y, dtype=float)
        y0 = self.turning.y0
        out = np.zeros(y.shape, dtype=float)
        above = y > y0
        if above.any():
            s = self._s_plus.eval(np.sqrt(y[above] - y0))
            out[above] = np.sqrt(self._dfr0) * np.real(s)
        return out

    def w_supersonic(self, y):
        """integral_Y^{Y0} sqrt(-F) for Y <= Y0 (phase weight of the wall side)."""
        y = np.asarray(y, dtype=float)
        y0 = self.turning.y0
        out = np.zeros(y.shape, dtype=float)
        below = y < y0
        if below.any():
            s = self._s_minus.eval(np.sqrt(y0 - y[below]))
            out[below] = np.sqrt(self._dfr0) * np.real(s)
        return out

    @property
    def w_y0(self) -> float:
        """Total supersonic phase weight integral_0^{Y0} sqrt(-F_r)."""
        return float(self.w_supersonic(np.array([0.0]))[0])

    def wc(self, y):
        """integral_{Yc}^{Y} sqrt(F_r) on the subsonic side."""
        return self._wc_cum.eval(y) - self._wc_at_yc

    # -- potentials --------------------------------------------------------------
    def q1(self, y, guard: float | None = None):
        """Turning-point potential away from the critical layer.

        Singular at Y_c as c_i -> 0; a guard band around Y_c is enforced.
        """
        y = np.asarray(y, dtype=float)
        c_i = self.c.imag
        if guard is None:
            guard = max(10.0 * abs(c_i), 1e-3)
        if np.any(np.abs(y - self.turning.yc) < guard):
            raise DomainError("q1 evaluated inside the critical-layer guard band")
        return self._q1_raw(y, self.c)

    def _q1_raw(self, y, c):
        th = self.thermo
        m0 = th.mbar(y, c, 0)
        m1 = th.mbar(y, c, 1)
        m2 = th.mbar(y, c, 2)
        _, e1, e2, e3 = self._eta_derivs(np.asarray(y, dtype=float))
        return (m2 / m0 - 2.0 * (m1 / m0) ** 2
                + 0.75 * (e2 / e1) ** 2 - e3 / (2.0 * e1))

    def q2(self, y):
        """-alpha^2 chi0 F_i: the part of F not absorbed into the Langer map."""
        y = np.asarray(y, dtype=float)
        fr = self.thermo.f_real(y, self.c.real)
        fi = self.thermo.f_complex(y, self.c) - fr
        return -self.alpha**2 * self.chi0(y) * fi

    def with_alpha(self, alpha: float) -> "LangerMap":
        """Same geometry, different wave number (geometry is alpha-free)."""
        kappa = (alpha**2 * self._dfr0) ** (1.0 / 3.0)
        return replace(self, alpha=float(alpha), kappa=float(kappa))

    # -- construction checks ----------------------------------------------------
    def identity_residual(self, y):
        """|dF(Y0) eta (eta')^2 - F| / (1 + |F|) on sample points."""
        y = np.asarray(y, dtype=float)
        e0, e1, _, _ = self._eta_derivs(y)
        ft = self.f_tilde(y, 0)
        return np.abs(self._dfr0 * e0 * e1**2 - ft) / (1.0 + np.abs(ft))


def default_window(turning: TurningData) -> tuple[float, float]:
    """Critical-window endpoints: one third of the gap above Y0, wider on
    the far side of Y_c so the wc-weights are asymmetric."""
    y0, yc = turning.y0, turning.yc
    y1s = y0 + (yc - y0) / 3.0
    y2s = yc + 1.5 * (yc - y1s)
    return y1s, y2s


def default_delta0(turning: TurningData) -> float:
    return min(0.5, (turning.yc - turning.y0) / 6.0)


def build_langer_map(
    thermo: ThermoProfile,
    flow: BaseFlow,
    c: complex,
    alpha: float,
    delta0: float | None = None,
    turning: TurningData | None = None,
    n_panels: int = 700,
    validate: bool = True,
) -> LangerMap:
    """Assemble the Langer map for one (c, alpha).

    The geometry (eta, weights) depends only on c_r below the cutoff and on
    c beyond it; alpha enters only through kappa, so alpha sweeps should
    reuse the map via with_alpha.
    """
    if alpha <= 0:
        raise DomainError("alpha must be positive")
    c = complex(c)
    if turning is None:
        turning = turning_point(thermo, flow, c.real)
    y0, yc = turning.y0, turning.yc
    y1s, y2s = default_window(turning)
    if delta0 is None:
        delta0 = default_delta0(turning)
    if y2s + delta0 <= yc:
        raise MapError("cutoff band must lie beyond the critical point")

    dfr0 = turning.dFr_y0
    kappa = (alpha**2 * dfr0) ** (1.0 / 3.0)
    y_max = flow.y_max
    cutoff_start = y2s + delta0

    chi0 = lambda y: 1.0 - smoothstep((np.asarray(y, float) - cutoff_start) / delta0)

    def f_tilde0(y):
        fr = thermo.f_real(y, c.real)
        fi = thermo.f_complex(y, c) - fr
        return fr + (1.0 - chi0(y)) * fi

    def integrand_plus(t):
        yv = y0 + t * t
        return 2.0 * t * np.sqrt(f_tilde0(yv) / dfr0 + 0j)

    def integrand_minus(t):
        yv = y0 - t * t
        return 2.0 * t * np.sqrt(-f_tilde0(yv) / dfr0 + 0j)

    s_plus = _Cumulative(integrand_plus, 0.0, np.sqrt(y_max - y0), n_panels)
    s_minus = _Cumulative(integrand_minus, 0.0, np.sqrt(y0), max(n_panels // 2, 200))

    # Taylor model of eta at Y0 from F-derivatives (fourth one by a single
    # central difference of the third; it only feeds the smallest coefficient)
    f1 = float(thermo.f_real_deriv(y0, c.real, 1))
    f2 = float(thermo.f_real_deriv(y0, c.real, 2))
    f3 = float(thermo.f_real_deriv(y0, c.real, 3))
    hfd = 1e-3
    f4 = float(
        (thermo.f_real_deriv(y0 + hfd, c.real, 3) - thermo.f_real_deriv(y0 - hfd, c.real, 3))
        / (2.0 * hfd)
    )
    bb, cc, dd = f2 / f1, f3 / f1, f4 / f1
    p = bb / 10.0
    q = cc / 42.0 - 2.0 * bb**2 / 175.0
    r = (dd / 24.0 - 22.0 * p * q - 4.0 * p**3) / 9.0

    # wc cumulative on the subsonic side (real sqrt of F_r)
    wc_lo = y0 + min(0.25 * (yc - y0), 0.05)
    wc_cum = _Cumulative(
        lambda y: np.sqrt(np.maximum(thermo.f_real(y, c.real), 0.0)),
        wc_lo, y_max, max(n_panels // 2, 300),
    )

    lm = LangerMap(
        thermo=thermo, turning=turning, c=c, alpha=float(alpha), delta0=float(delta0),
        y1s=float(y1s), y2s=float(y2s), kappa=float(kappa),
        _s_plus=s_plus, _s_minus=s_minus,
        _wc_cum=wc_cum, _wc_at_yc=float(wc_cum.eval(np.array([yc]))[0]),
        _taylor=(p, q, r), _dfr0=dfr0,
    )
    if validate:
        ys = np.linspace(0.0, y_max, 60)
        res = lm.identity_residual(ys)
        if np.max(res) > 1e-8:
            raise MapError(f"Langer identity residual {np.max(res):.3e} exceeds 1e-8")
        ends = lm.eta(np.array([y0 - H_TAYLOR / 2, y0, y0 + H_TAYLOR / 2]))
        if abs(ends[1]) > 1e-10:
            raise MapError("eta(Y0) must vanish")
    return lm


# ---------------------------------------------------------------------------
# Real supersonic zone for admissibility scans (no critical point required)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SupersonicZone:
    """[0, Y0] geometry at c_i = 0, for the admissibility integrand."""

    thermo: ThermoProfile
    c_r: float
    y0: float
    dfr0: float
    _s_minus: _Cumulative
    _taylor: tuple

    def eta(self, y):
        s = self._s_minus.eval(np.sqrt(np.maximum(self.y0 - np.asarray(y, float), 0.0)))
        return -((1.5 * np.real(s)) ** (2.0 / 3.0))

    def _eta_derivs(self, y):
        y = np.asarray(y, dtype=float)
        t = y - self.y0
        near = np.abs(t) <= H_TAYLOR
        p, q, r = self._taylor
        e0 = self.eta(y).astype(float)
        e1 = np.empty_like(e0)
        e2 = np.empty_like(e0)
        e3 = np.empty_like(e0)
        if near.any():
            tn = t[near]
            e0[near] = tn * (1.0 + tn * (p + tn * (q + tn * r)))
            e1[near] = 1.0 + tn * (2 * p + tn * (3 * q + tn * 4 * r))
            e2[near] = 2 * p + tn * (6 * q + tn * 12 * r)
            e3[near] = 6 * q + tn * 24 * r
        far = ~near
        if far.any():
            yf = y[far]
            th = self.thermo
            g = th.f_real(yf, self.c_r) / self.dfr0
            g1 = th.f_real_deriv(yf, self.c_r, 1) / self.dfr0
            g2 = th.f_real_deriv(yf, self.c_r, 2) / self.dfr0
            ef = e0[far]
            d1 = np.sqrt(g / ef)
            d2 = (g1 - d1**3) / (2.0 * ef * d1)
            d3 = (g2 - 5.0 * d1**2 * d2 - 2.0 * ef * d2**2) / (2.0 * ef * d1)
            e1[far], e2[far], e3[far] = d1, d2, d3
        return e0, e1, e2, e3

    def q1_tilde(self, y):
        """Real turning-point potential on [0, Y0] (c_i frozen to zero)."""
        y = np.asarray(y, dtype=float)
        if np.any(y < -1e-12) or np.any(y > self.y0 + 1e-12):
            raise DomainError("q1_tilde is defined on [0, Y0] only")
        th = self.thermo
        m0 = th.mbar(y, self.c_r, 0)
        m1 = th.mbar(y, self.c_r, 1)
        m2 = th.mbar(y, self.c_r, 2)
        _, e1, e2, e3 = self._eta_derivs(y)
        return (m2 / m0 - 2.0 * (m1 / m0) ** 2
                + 0.75 * (e2 / e1) ** 2 - e3 / (2.0 * e1))

    def w_y0(self) -> float:
        s = self._s_minus.eval(np.array([np.sqrt(self.y0)]))
        return float(np.sqrt(self.dfr0) * np.real(s)[0])


def supersonic_zone(thermo: ThermoProfile, flow: BaseFlow, c_r: float,
                    n_panels: int = 400) -> SupersonicZone:
    """Turning-point geometry on [0, Y0] for a phase speed in the wide
    admissibility range (no critical layer needed)."""
    lo = thermo.t0_wall**0.5 / thermo.mach - 1e-12
    hi = 1.0 + 1.0 / thermo.mach + 1e-12
    if not (lo <= c_r <= hi):
        raise DomainError(f"c_r = {c_r} outside admissibility range [{lo}, {hi}]")
    from .thermo import turning_point_ub

    ub0 = turning_point_ub(c_r, thermo.mach, thermo.gamma)
    if ub0 <= flow.u[0]:
        raise DomainError("turning point collapses to the wall at this c_r")
    if ub0 >= flow.u[-1] - 1e-9:
        raise DomainError("turning point beyond the tabulated profile")
    y0 = flow.invert_u(ub0)
    dfr0 = float(thermo.f_real_deriv(y0, c_r, 1))
    if dfr0 <= 0:
        raise DomainError("dF_r/dY at Y0 must be positive")

    def integrand_minus(t):
        yv = y0 - t * t
        return 2.0 * t * np.sqrt(np.maximum(-thermo.f_real(yv, c_r), 0.0) / dfr0)

    s_minus = _Cumulative(integrand_minus, 0.0, np.sqrt(y0), n_panels)

    f1 = float(thermo.f_real_deriv(y0, c_r, 1))
    f2 = float(thermo.f_real_deriv(y0, c_r, 2))
    f3 = float(thermo.f_real_deriv(y0, c_r, 3))
    hfd = 1e-3
    f4 = float(
        (thermo.f_real_deriv(y0 + hfd, c_r, 3) - thermo.f_real_deriv(y0 - hfd, c_r, 3))
        / (2.0 * hfd)
    )
    bb, cc, dd = f2 / f1, f3 / f1, f4 / f1
    p = bb / 10.0
    q = cc / 42.0 - 2.0 * bb**2 / 175.0
    r = (dd / 24.0 - 22.0 * p * q - 4.0 * p**3) / 9.0
    return SupersonicZone(thermo=thermo, c_r=c_r, y0=y0, dfr0=dfr0,
                          _s_minus=s_minus, _taylor=(p, q, r))


def q1_tilde(thermo: ThermoProfile, flow: BaseFlow, c_r: float, y):
    """Convenience wrapper: real potential on [0, Y0] at phase speed c_r."""
    return supersonic_zone(thermo, flow, c_r).q1_tilde(y)
