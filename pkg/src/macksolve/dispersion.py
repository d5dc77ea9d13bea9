"""Admissibility integral, real dispersion roots, and growth-rate fits.

The J-integral decides which phase speeds can carry the acoustic mode
family; the leading-order real dispersion relation then pins the discrete
wave numbers {alpha_k} at fixed phase speed, with the boundary coefficient
calibrated once from the outer quadrature.  The imaginary part (growth
rate) is delegated to the shooting oracle and only fitted here.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .baseflow import BaseFlow, DomainError
from .langer import (LangerMap, SupersonicZone, _Cumulative, build_langer_map,
                     default_window, default_delta0, smoothstep, supersonic_zone)
from .outer import OuterBasis, outer_basis
from .thermo import ThermoProfile, supersonic_window


# ---------------------------------------------------------------------------
# J-integral
# ---------------------------------------------------------------------------

def _sqrt_minus_f(zone: SupersonicZone, yv):
    """sqrt(Mbar_r^2 - 1) on [0, Y0) via the Langer identity
    -F_r = dfr * (-eta) * (eta')^2, which has no cancellation at Y0."""
    e0, e1, _, _ = zone._eta_derivs(np.asarray(yv, dtype=float))
    return np.sqrt(zone.dfr0 * np.maximum(-e0, 0.0)) * e1


def _j_by_substitution(zone: SupersonicZone, n_panels: int) -> float:
    """J via Z = Y0 - u^2, which removes the endpoint 1/sqrt singularity."""
    y0 = zone.y0

    def integrand(u):
        u = np.asarray(u, dtype=float)
        yv = np.clip(y0 - u * u, 0.0, y0)
        q = zone.q1_tilde(yv)
        root = _sqrt_minus_f(zone, yv)
        out = 2.0 * u * q / np.where(root > 0, root, 1.0)
        # at u -> 0: -eta ~ u^2, so the limit is 2 q / sqrt(dfr)
        tiny = root <= 0
        if np.any(tiny):
            out = np.where(tiny, 2.0 * q / np.sqrt(zone.dfr0), out)
        return out

    cum = _Cumulative(integrand, 0.0, np.sqrt(y0), n_panels)
    return float(np.real(cum.prefix[-1]))


def _j_by_graded_mesh(zone: SupersonicZone, n_per_decade: int = 16) -> float:
    """Independent oracle: direct Z-quadrature on panels graded into Y0.

    The mesh stops a hair short of Y0 (where -F_r crosses zero within
    rounding); the remaining sliver is added analytically from the local
    linear model -F_r ~ dfr*(Y0 - Z).
    """
    y0 = zone.y0
    delta = 1e-10 * max(y0, 1.0)
    gaps = [y0]
    while gaps[-1] > delta:
        gaps.append(gaps[-1] / 10 ** (1.0 / n_per_decade))
    g_last = gaps[-1]
    edges = np.unique(np.concatenate([[0.0], np.clip(y0 - np.array(gaps), 0.0, None)]))

    def integrand(yv):
        yv = np.clip(np.asarray(yv, dtype=float), 0.0, y0)
        root = _sqrt_minus_f(zone, yv)
        return zone.q1_tilde(yv) / np.where(root > 0, root, 1.0)

    cum = _Cumulative(integrand, edges=edges)
    # analytic sliver [Y0 - g_last, Y0] from the local model -F ~ dfr*(Y0-Z)
    tail = 2.0 * float(zone.q1_tilde(np.array([y0]))[0]) * np.sqrt(g_last / zone.dfr0)
    return float(np.real(cum.prefix[-1])) + tail


@dataclass(frozen=True)
class JResult:
    c_r: float
    value: float
    oracle: float

    @property
    def self_agreement(self) -> float:
        scale = max(abs(self.value), abs(self.oracle), 1e-30)
        return abs(self.value - self.oracle) / scale


def j_integral(thermo: ThermoProfile, flow: BaseFlow, c_r: float,
               n_panels: int = 96, check: bool = True) -> JResult:
    """Admissibility integral over the supersonic zone at phase speed c_r.

    Computed twice: the substitution route at two refinement levels (their
    gap is the accuracy estimate), plus the graded-mesh oracle.
    """
    zone = supersonic_zone(thermo, flow, c_r)
    j1 = _j_by_substitution(zone, n_panels)
    j2 = _j_by_substitution(zone, 2 * n_panels)
    scale = max(abs(j2), 1e-30)
    if check and abs(j1 - j2) / scale > 1e-4:
        raise RuntimeError(
            f"J refinement levels disagree by {abs(j1 - j2) / scale:.2e} at c_r={c_r}"
        )
    oracle = _j_by_graded_mesh(zone)
    return JResult(c_r=c_r, value=j2, oracle=oracle)


@dataclass
class AdmissibilityReport:
    mach: float
    c_r: np.ndarray
    j: np.ndarray
    admissible: np.ndarray          # bool per sample (inside mode window, |J| above floor)
    intervals: list = field(default_factory=list)   # (lo, hi) refined
    noise_floor: float = 0.0
    window: tuple = (0.0, 1.0)


def admissible_set_scan(thermo: ThermoProfile, flow: BaseFlow,
                        cr_min: float | None = None, cr_max: float | None = None,
                        step: float = 1e-3) -> AdmissibilityReport:
    """Scan J over the admissibility range and report usable c_r intervals.

    Intervals are maximal runs with |J| above the noise floor, intersected
    with the supersonic-mode window; sign-change boundaries are refined by
    bisection to 1e-6.
    """
    if step > 1e-3 + 1e-12:
        raise DomainError("scan step must be <= 1e-3")
    lo_adm = thermo.t0_wall**0.5 / thermo.mach
    hi_adm = 1.0 + 1.0 / thermo.mach
    cr_min = lo_adm if cr_min is None else max(cr_min, lo_adm)
    cr_max = hi_adm if cr_max is None else min(cr_max, hi_adm)

    crs, js = [], []
    c = cr_min
    while c <= cr_max + 1e-12:
        try:
            js.append(j_integral(thermo, flow, c, check=False).value)
            crs.append(c)
        except DomainError:
            pass  # turning point off the table at this c_r
        c += step
    crs = np.asarray(crs)
    js = np.asarray(js)
    if crs.size == 0:
        # nothing reachable on this profile/Mach combination: empty report
        return AdmissibilityReport(mach=thermo.mach, c_r=crs, j=js,
                                   admissible=np.zeros(0, dtype=bool),
                                   window=supersonic_window(thermo.mach))

    floor = 1e-6 * np.max(np.abs(js))
    win = supersonic_window(thermo.mach)
    inside = (crs > win[0]) & (crs < win[1])
    ok = (np.abs(js) > floor) & inside

    intervals = []
    i = 0
    while i < crs.size:
        if ok[i]:
            j0 = i
            while i + 1 < crs.size and ok[i + 1]:
                i += 1
            lo, hi = crs[j0], crs[i]
            if j0 > 0 and np.sign(js[j0 - 1]) != np.sign(js[j0]) and inside[j0]:
                lo = _bisect_j_zero(thermo, flow, crs[j0 - 1], crs[j0])
            if i + 1 < crs.size and np.sign(js[i + 1]) != np.sign(js[i]) and inside[i]:
                hi = _bisect_j_zero(thermo, flow, crs[i], crs[i + 1])
            intervals.append((max(lo, win[0]), min(hi, win[1])))
        i += 1
    return AdmissibilityReport(mach=thermo.mach, c_r=crs, j=js, admissible=ok,
                               intervals=intervals, noise_floor=float(floor), window=win)


def _bisect_j_zero(thermo, flow, lo: float, hi: float, tol: float = 1e-6) -> float:
    flo = j_integral(thermo, flow, lo, check=False).value
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        fm = j_integral(thermo, flow, mid, check=False).value
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
        if hi - lo < tol:
            break
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# Real dispersion relation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DispersionRoot:
    alpha: float
    theta_phase: float      # (2/3)(-kappa*eta(0))^{3/2} - pi/4 at the root
    cos_sign: int
    flagged: bool           # within 1e-6 of a tan pole


@dataclass
class ModeFamily:
    c_r: float
    w_y0: float             # supersonic phase weight, spacing = pi/w_y0
    c0: complex             # calibrated boundary coefficient
    roots: list
    selected: list = field(default_factory=list)
    sign_target: int = +1


class DispersionContext:
    """Shared geometry for alpha sweeps at fixed real phase speed."""

    def __init__(self, thermo: ThermoProfile, flow: BaseFlow, c_r: float,
                 alpha_ref: float = 20.0):
        self.thermo = thermo
        self.flow = flow
        self.c_r = float(c_r)
        self.lmap = build_langer_map(thermo, flow, complex(c_r), alpha_ref)
        self.eta0 = float(np.real(self.lmap.eta(np.array([0.0]))[0]))
        self.w_y0 = self.lmap.w_y0
        self.w0_yc = float(self.lmap.w0(np.array([self.lmap.turning.yc]))[0])
        self._c0 = None
        self.alpha_ref = float(alpha_ref)

    # -- calibration of the alpha^{-1} boundary coefficient ------------------
    def window_cutoff(self, y):
        """chi = 1 inside the critical window core, 0 outside the window."""
        lm = self.lmap
        d0 = lm.delta0
        y = np.asarray(y, dtype=float)
        return smoothstep((y - lm.y1s) / d0) * smoothstep((lm.y2s - y) / d0)

    def c0_coefficient(self) -> complex:
        """C0 with dP0(0) = dA(0) + C0 alpha^{-1} dB(0): the outer-quadrature
        image of the cut-off turning-point potential, frozen at alpha_ref."""
        if self._c0 is None:
            lm = self.lmap
            basis = outer_basis(lm)
            th = self.thermo

            def integrand(t):
                t = np.asarray(t, dtype=float)
                A, _, _, _, a_exp, _ = basis.eval(t)
                m = th.mbar(t, lm.c, 0)
                q = lm._q1_raw(t, lm.c) + lm.q2(t)
                w = 1.0 - self.window_cutoff(t)
                return A**2 * np.exp(2.0 * a_exp) * w * q / m**2

            from .outer import _outer_edges, tail_cutoff

            zcut = tail_cutoff(basis, 0.0)
            edges = _outer_edges(basis, zcut)
            val = complex(_Cumulative(integrand, edges=edges).prefix[-1])
            self._c0 = complex(self.alpha_ref * np.pi / lm.kappa * val)
        return self._c0

    # -- the dispersion function ----------------------------------------------
    def wall_derivatives(self, alpha: float):
        lm = self.lmap.with_alpha(alpha)
        basis = outer_basis(lm)
        A0, dA0, B0, dB0 = basis.wall_values()
        return dA0, dB0

    def dispersion_function(self, alpha: float) -> float:
        """Re of the leading-order boundary derivative dP0(0)."""
        dA0, dB0 = self.wall_derivatives(alpha)
        c0 = self.c0_coefficient()
        return float(np.real(dA0 + c0 / alpha * dB0))

    def theta_phase(self, alpha: float) -> float:
        kappa = (alpha**2 * self.lmap._dfr0) ** (1.0 / 3.0)
        return (2.0 / 3.0) * (-kappa * self.eta0) ** 1.5 - 0.25 * np.pi

    def predicted_ci(self, alpha: float) -> float:
        """Crude growth-rate scale e^{-alpha w0(Yc)} used to cap alpha."""
        return float(np.exp(-alpha * self.w0_yc))

    def alpha_cap(self, floor: float = 1e-12) -> float:
        return float(-np.log(floor) / self.w0_yc)


def real_dispersion_roots(ctx: DispersionContext, alpha_min: float,
                          alpha_max: float, samples_per_period: int = 40) -> ModeFamily:
    """Zeros in alpha of the leading-order real dispersion function.

    Roots are bracketed on a grid resolving the tan period pi/w(Y0) and
    refined by bisection to 1e-8; roots within 1e-6 of a tan pole are
    flagged and dropped from the family.
    """
    if not (0 < alpha_min < alpha_max):
        raise DomainError("need 0 < alpha_min < alpha_max")
    period = np.pi / ctx.w_y0
    n = max(int(np.ceil((alpha_max - alpha_min) / period * samples_per_period)), 8)
    grid = np.linspace(alpha_min, alpha_max, n + 1)
    vals = np.array([ctx.dispersion_function(a) for a in grid])

    roots = []
    for i in range(n):
        if vals[i] == 0.0:
            roots.append(grid[i])
            continue
        if np.sign(vals[i]) * np.sign(vals[i + 1]) < 0:
            lo, hi = grid[i], grid[i + 1]
            flo = vals[i]
            while hi - lo > 1e-8:
                mid = 0.5 * (lo + hi)
                fm = ctx.dispersion_function(mid)
                if fm == 0.0:
                    lo = hi = mid
                    break
                if (fm > 0) == (flo > 0):
                    lo, flo = mid, fm
                else:
                    hi = mid
            roots.append(0.5 * (lo + hi))

    out = []
    for a in roots:
        th = ctx.theta_phase(a)
        cth = np.cos(th)
        flagged = bool(abs(cth) < 1e-6)
        out.append(DispersionRoot(alpha=float(a), theta_phase=float(th),
                                  cos_sign=int(np.sign(cth)) if not flagged else 0,
                                  flagged=flagged))
    return ModeFamily(c_r=ctx.c_r, w_y0=ctx.w_y0, c0=ctx.c0_coefficient(),
                      roots=[r for r in out if not r.flagged])


def select_unstable_subsequence(family: ModeFamily, sign_target: int = +1) -> ModeFamily:
    """Keep the alternating subfamily with cos(theta-phase) of one sign.

    The cosine sign flips between consecutive roots, so the selection takes
    every other root; selection is idempotent.
    """
    if len(family.roots) < 4 and not family.selected:
        raise DomainError("need at least 4 roots to select a subsequence")
    sel = [r for r in family.roots if r.cos_sign == sign_target]
    if len(sel) < 2:
        raise DomainError("fewer than 2 roots selected")
    family.selected = sel
    family.sign_target = sign_target
    return family


@dataclass(frozen=True)
class GrowthFit:
    decay: float     # s in log c_i = p log(alpha) - s alpha + b
    power: float     # p
    intercept: float
    r_squared: float


def growth_rate_fit(alphas, cis) -> GrowthFit:
    """Least-squares fit of the predicted growth-rate law to oracle modes."""
    alphas = np.asarray(alphas, dtype=float)
    cis = np.asarray(cis, dtype=float)
    keep = cis >= 1e-12
    if np.count_nonzero(keep) < 4:
        raise DomainError("need >= 4 modes with c_i >= 1e-12 for the fit")
    a, ci = alphas[keep], cis[keep]
    y = np.log(ci)
    M = np.column_stack([np.log(a), -a, np.ones_like(a)])
    coef, *_ = np.linalg.lstsq(M, y, rcond=None)
    resid = y - M @ coef
    ss_res = float(np.sum(resid**2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return GrowthFit(decay=float(coef[1]), power=float(coef[0]),
                     intercept=float(coef[2]), r_squared=r2)
