"""Amplitude-modulated Airy basis and the outer quadrature solver.

A = E*Ai(kappa*eta) and B = E*Bi(kappa*eta) with E = Mbar/sqrt(eta') solve
the approximate pressure operator exactly; the generic variation-of-
parameters formula then inverts that operator for decaying sources.  The
weighted evaluators keep e^{alpha w0}-scaled quantities finite far beyond
the point where A and B themselves leave double range.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from .airy import airy_many
from .baseflow import DomainError
from .langer import LangerMap


@dataclass(frozen=True)
class OuterBasis:
    """Evaluators for the outer solution pair and its derivatives."""

    lmap: LangerMap

    @property
    def kappa(self) -> float:
        return self.lmap.kappa

    @property
    def alpha(self) -> float:
        return self.lmap.alpha

    @property
    def c(self) -> complex:
        return self.lmap.c

    def amplitude(self, y):
        """E = Mbar / sqrt(eta') and its derivative (E, dE)."""
        y = np.atleast_1d(np.asarray(y, dtype=float))
        th = self.lmap.thermo
        _, e1, e2, _ = self.lmap._eta_derivs(y)
        m0 = th.mbar(y, self.c, 0)
        m1 = th.mbar(y, self.c, 1)
        E = m0 / np.sqrt(e1)
        dE = E * (m1 / m0 - e2 / (2.0 * e1))
        return E, dE

    def eval(self, y):
        """(A, dA, B, dB) plus the shared scaling exponents (a_exp, b_exp).

        True values are A*exp(a_exp) etc.; exponents are zero until the
        argument of the Airy pair is deep in its exponential regime.
        """
        y = np.atleast_1d(np.asarray(y, dtype=float))
        lm = self.lmap
        e0, e1, _, _ = lm._eta_derivs(y)
        E, dE = self.amplitude(y)
        z = lm.kappa * e0
        ai, dai, bi, dbi, ai_exp, bi_exp = airy_many(z)
        deta = e1
        A = E * ai
        dA = dE * ai + E * lm.kappa * deta * dai
        B = E * bi
        dB = dE * bi + E * lm.kappa * deta * dbi
        return A, dA, B, dB, ai_exp, bi_exp

    def eval_weighted(self, y):
        """(A e^{+aw0}, dA e^{+aw0}, B e^{-aw0}, dB e^{-aw0}); always finite.

        Uses Re(2/3)(kappa eta)^{3/2} = alpha*w0, so the carried Airy
        exponents cancel against the weights exactly.
        """
        y = np.atleast_1d(np.asarray(y, dtype=float))
        A, dA, B, dB, a_exp, b_exp = self.eval(y)
        aw = self.alpha * self.lmap.w0(y)
        fa = np.exp(a_exp + aw)
        fb = np.exp(b_exp - aw)
        return A * fa, dA * fa, B * fb, dB * fb

    def wronskian(self, y):
        """dA*B - A*dB; identically -kappa/pi * Mbar^2 on plain-mode points."""
        A, dA, B, dB, a_exp, b_exp = self.eval(y)
        return (dA * B - A * dB) * np.exp(a_exp + b_exp)

    def wall_values(self):
        """(A, dA, B, dB) at Y = 0 (oscillatory zone, never scaled)."""
        A, dA, B, dB, a_exp, b_exp = self.eval(np.array([0.0]))
        if a_exp[0] != 0.0 or b_exp[0] != 0.0:
            raise DomainError("wall values unexpectedly in scaled mode")
        return A[0], dA[0], B[0], dB[0]


def outer_basis(lmap: LangerMap) -> OuterBasis:
    return OuterBasis(lmap=lmap)


def tail_cutoff(basis: OuterBasis, y: float, drop: float = 19.0) -> float:
    """Smallest Z with alpha*(w0(Z) - w0(Y)) >= drop, capped at the grid end.

    Beyond it the B-integrand of the outer formula is suppressed by
    e^{-2*drop} relative to its value at Y.
    """
    lm = basis.lmap
    y_end = lm.thermo.flow.y_max
    target = basis.alpha * lm.w0(np.array([max(y, lm.turning.y0)]))[0] + drop
    if basis.alpha * lm.w0(np.array([y_end]))[0] <= target:
        return y_end
    lo, hi = max(y, lm.turning.y0), y_end
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if basis.alpha * lm.w0(np.array([mid]))[0] < target:
            lo = mid
        else:
            hi = mid
    return hi


def _as_array_fun(f):
    def wrapped(t):
        t = np.asarray(t, dtype=float)
        v = np.asarray(f(t))
        if v.shape != t.shape:
            v = np.array([f(float(tt)) for tt in np.ravel(t)]).reshape(t.shape)
        return v

    return wrapped


def _outer_edges(basis: OuterBasis, hi: float) -> np.ndarray:
    """Panel edges on [0, hi] resolving the Airy oscillation (phase scale
    1/alpha) with extra grading into the critical point."""
    lm = basis.lmap
    h = min(2.0 / max(basis.alpha, 2.0), 0.25)
    edges = [np.linspace(0.0, hi, max(int(np.ceil(hi / h)), 8) + 1)]
    yc = lm.turning.yc
    if 0.0 < yc < hi:
        g = 0.3
        while g > 1e-5:
            for s in (-1.0, 1.0):
                p = yc + s * g
                if 0.0 < p < hi:
                    edges.append([p])
            g /= 1.6
        edges.append([yc])
    return np.unique(np.concatenate([np.atleast_1d(e) for e in edges]))


def solve_outer(basis: OuterBasis, f, y, eps_rel: float = 1e-10):
    """Particular solution P(Y) of the approximate outer operator with
    source f: P = Acoef*A + Bcoef*B with

        Acoef(Y) = -pi/kappa * int_0^Y  B f / Mbar^2,
        Bcoef(Y) = -pi/kappa * int_Y^oo A f / Mbar^2,

    the far tail truncated where the weighted integrand has dropped below
    ~1e-16 of its local scale.  f must decay at least like A and should
    accept array arguments (scalar-only callables are wrapped).
    Returns (P, Acoef, Bcoef) at scalar Y.

    Quadrature is fixed-order Gauss-Legendre on oscillation-resolving
    panels (deterministic by construction).
    """
    from .langer import _Cumulative

    y = float(y)
    lm = basis.lmap
    th = lm.thermo
    fv = _as_array_fun(f)

    def integrand_b(t):
        t = np.asarray(t, dtype=float)
        A, _, _, _, a_exp, _ = basis.eval(t)
        m = th.mbar(t, basis.c, 0)
        return A * np.exp(a_exp) * fv(t) / m**2

    def integrand_a(t):
        t = np.asarray(t, dtype=float)
        _, _, B, _, _, b_exp = basis.eval(t)
        m = th.mbar(t, basis.c, 0)
        return B * np.exp(b_exp) * fv(t) / m**2

    pref = -np.pi / basis.kappa
    zcut = tail_cutoff(basis, y)
    edges = _outer_edges(basis, zcut)

    if y > 0:
        e_a = np.unique(np.clip(np.concatenate([edges, [y]]), 0.0, y))
        acoef = pref * complex(_Cumulative(integrand_a, edges=e_a).prefix[-1])
    else:
        acoef = 0.0
    e_b = np.unique(np.clip(np.concatenate([edges, [y]]), y, zcut))
    bcoef = pref * complex(_Cumulative(integrand_b, edges=e_b).prefix[-1])

    A, _, B, _, a_exp, b_exp = basis.eval(np.array([y]))
    P = acoef * A[0] * np.exp(a_exp[0]) + bcoef * B[0] * np.exp(b_exp[0])
    return P, acoef, bcoef


def apply_pressure_operator(thermo, c, alpha, fun, y, h: float | None = None):
    """L[fun] = fun'' - (2 Mbar'/Mbar) fun' - alpha^2 F fun by 6th-order
    central differences of fun; fun must accept array arguments.

    Independent of any analytic derivative bookkeeping, so it is the
    residual check of record for candidate solutions.
    """
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if h is None:
        h = min(1e-2, 0.18 / max(alpha, 1.0))
    off = np.arange(-3, 4)
    w1 = np.array([-1, 9, -45, 0, 45, -9, 1]) / 60.0
    w2 = np.array([2, -27, 270, -490, 270, -27, 2]) / 180.0
    vals = np.stack([np.atleast_1d(fun(y + k * h)) for k in off])
    d1 = np.tensordot(w1, vals, axes=(0, 0)) / h
    d2 = np.tensordot(w2, vals, axes=(0, 0)) / h**2
    m0 = thermo.mbar(y, c, 0)
    m1 = thermo.mbar(y, c, 1)
    F = thermo.f_complex(y, c)
    return d2 - 2.0 * (m1 / m0) * d1 - alpha**2 * F * np.atleast_1d(fun(y))
