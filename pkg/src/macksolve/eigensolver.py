"""Shooting oracle for the pressure eigenvalue problem.

Integrates the pressure equation inward from the far field with the
decaying normalization and hunts complex phase speeds where the wall
derivative vanishes.  This is the ground truth the asymptotic pipeline is
validated against: it shares no machinery with the Langer/Airy side.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .baseflow import BaseFlow, DomainError
from .thermo import ThermoProfile

CI_FLOOR = 1e-13


class FloorError(RuntimeError):
    """Growth rate below double-precision resolution at this wave number."""


class ConvergenceError(RuntimeError):
    pass


class _BudgetExceeded(Exception):
    pass


@dataclass(frozen=True)
class ShootResult:
    """Inward integration result, normalized to max|P| = 1."""

    alpha: float
    c: complex
    y: np.ndarray
    p: np.ndarray
    dp: np.ndarray

    @property
    def dp_wall(self) -> complex:
        return complex(self.dp[0])

    @property
    def p_wall(self) -> complex:
        return complex(self.p[0])

    @property
    def dp_sup(self) -> float:
        return float(np.max(np.abs(self.dp)))


def _far_field_y(flow: BaseFlow, thermo: ThermoProfile, alpha: float, c_r: float) -> float:
    """Smallest Y with alpha * w0(Y) >= 26 (decay e^{-26} ~ 5e-12), capped
    at the grid end.  Uses a trapezoid cumulative of sqrt(max(F_r, 0))."""
    y = flow.grid
    fr = np.maximum(thermo.f_real(y, c_r), 0.0)
    w0 = np.concatenate([[0.0], np.cumsum(0.5 * (np.sqrt(fr[1:]) + np.sqrt(fr[:-1]))
                                          * np.diff(y))])
    target = 26.0 / alpha
    idx = np.searchsorted(w0, target)
    if idx >= y.size:
        return float(y[-1])
    return float(y[min(idx + 1, y.size - 1)])


def shoot_pressure(flow: BaseFlow, thermo: ThermoProfile, alpha: float, c: complex,
                   y_far: float | None = None, rtol: float = 1e-10,
                   n_profile: int = 1200, max_nfev: int = 400_000) -> ShootResult:
    """Integrate P'' = (2 Mbar'/Mbar) P' + alpha^2 F P inward from the far
    field with the decaying seed P' / P = -alpha sqrt(F).

    The decaying-at-infinity solution grows in the marching direction, so
    inward integration filters the unwanted branch automatically.  The
    state is renormalized between chunks; linearity keeps the eigenvalue
    condition intact.  A step budget bounds the critical-layer grind when
    c_i sits near the floor.
    """
    c = complex(c)
    if abs(c.imag) < CI_FLOOR:
        raise FloorError(
            f"|c_i| = {abs(c.imag):g} below the double-precision floor {CI_FLOOR:g}")
    if alpha <= 0:
        raise DomainError("alpha must be positive")
    if y_far is None:
        y_far = _far_field_y(flow, thermo, alpha, c.real)

    nfev = [0]

    def rhs(y, s):
        nfev[0] += 1
        if nfev[0] > max_nfev:
            raise _BudgetExceeded()
        p = s[0] + 1j * s[1]
        dp = s[2] + 1j * s[3]
        m0 = thermo.mbar(y, c, 0)
        m1 = thermo.mbar(y, c, 1)
        F = 1.0 - m0 * m0
        d2 = 2.0 * (m1 / m0) * dp + alpha**2 * F * p
        return [s[2], s[3], d2.real, d2.imag]

    f_far = complex(1.0 - thermo.mbar(y_far, c, 0) ** 2)
    slope = -alpha * np.sqrt(f_far)
    p0, dp0 = 1.0 + 0.0j, slope

    n_chunks = 40
    bounds = np.linspace(y_far, 0.0, n_chunks + 1)
    ys, ps, dps = [], [], []
    state = np.array([p0.real, p0.imag, dp0.real, dp0.imag])
    log_scale = 0.0
    max_step = min(0.5 / alpha, 0.05)
    for k in range(n_chunks):
        a, b = bounds[k], bounds[k + 1]
        try:
            sol = solve_ivp(rhs, (a, b), state, method="DOP853", rtol=rtol,
                            atol=1e-14, dense_output=True, max_step=max_step)
        except _BudgetExceeded:
            if abs(c.imag) < 1e-9:
                raise FloorError(
                    f"integration budget exhausted at the critical layer "
                    f"(c_i = {c.imag:g})") from None
            raise ConvergenceError(
                f"integration budget exhausted on [{b:.3f}, {a:.3f}]") from None
        if not sol.success:
            if abs(c.imag) < 1e-10:
                # the critical-layer pole sits closer to the axis than the
                # integrator can step: growth rate unresolvable here
                raise FloorError(
                    f"step underflow at the critical layer (c_i = {c.imag:g})")
            raise ConvergenceError(f"shooting failed on [{b:.3f}, {a:.3f}]: {sol.message}")
        t = np.linspace(a, b, max(int(n_profile / n_chunks), 8), endpoint=False)
        v = sol.sol(t)
        ys.append(t)
        ps.append((v[0] + 1j * v[1]) * np.exp(log_scale))
        dps.append((v[2] + 1j * v[3]) * np.exp(log_scale))
        state = sol.y[:, -1]
        mag = np.max(np.abs(state))
        if mag > 1e120:
            state = state / mag
            log_scale += np.log(mag)

    # wall values
    ys.append(np.array([0.0]))
    ps.append(np.array([(state[0] + 1j * state[1]) * np.exp(log_scale)]))
    dps.append(np.array([(state[2] + 1j * state[3]) * np.exp(log_scale)]))

    y_all = np.concatenate(ys)[::-1]
    p_all = np.concatenate(ps)[::-1]
    dp_all = np.concatenate(dps)[::-1]
    # overall scale is arbitrary (linear problem): pin max|P| = 1
    scale = np.max(np.abs(p_all))
    return ShootResult(alpha=alpha, c=c, y=y_all, p=p_all / scale, dp=dp_all / scale)


@dataclass(frozen=True)
class Mode:
    """One converged eigen-solution of the pressure problem.

    floor_limited marks modes whose c_i came to rest on the double-precision
    floor: the eigenvalue is genuine, but the sign of its (tiny) imaginary
    part is not resolved.
    """

    alpha: float
    c: complex
    y: np.ndarray
    p: np.ndarray
    dp: np.ndarray
    boundary_residual: float
    iterations: int
    floor_limited: bool = False
    fields: dict = field(default=None, repr=False)
    residuals: dict = field(default=None, repr=False)

    def to_json(self) -> dict:
        out = {
            "alpha": self.alpha,
            "c": [self.c.real, self.c.imag],
            "boundary_residual": self.boundary_residual,
            "profile": {
                "Y": self.y.tolist(),
                "P_re": np.real(self.p).tolist(),
                "P_im": np.imag(self.p).tolist(),
            },
        }
        if self.residuals is not None:
            out["residuals"] = self.residuals
        return out


def find_eigenvalue(flow: BaseFlow, thermo: ThermoProfile, alpha: float,
                    c_guess: complex, tol_dc: float = 1e-12,
                    max_iter: int = 50) -> Mode:
    """Damped complex Newton on D(c) = dP/dY at the wall.

    The derivative comes from one complex finite difference (D is analytic
    in c away from the real axis).  Steps are halved while |D| fails to
    decrease, at most 8 times; convergence needs both a small normalized
    wall derivative and a small step.
    """
    c = complex(c_guess)
    if c.imag <= 0:
        raise DomainError("seed must have c_i > 0")

    state = {"sharp": False, "floor": 1.5 * CI_FLOOR, "shots": 0}

    def dfun(cc):
        # integration through the critical layer gets fragile and slow as
        # c_i approaches the floor; lift the working floor when it breaks
        while True:
            state["shots"] += 1
            if state["shots"] > 150:
                raise ConvergenceError(f"shot budget exhausted at alpha={alpha}")
            # tight tolerance only where the layer crossing stays cheap
            rtol = 1e-12 if (state["sharp"] and cc.imag > 1e-10) else 1e-10
            try:
                r = shoot_pressure(flow, thermo, alpha, cc, rtol=rtol)
                return r.dp_wall / r.dp_sup, r
            except FloorError:
                state["floor"] *= 10.0
                if state["floor"] > 2e-9 or cc.imag >= state["floor"]:
                    raise
                cc = complex(cc.real, state["floor"])

    def finish(it, dc, stalled=False):
        wall_resid = abs(res.dp_wall)  # max|P| = 1 normalization
        riding = c.imag <= 2.0 * state["floor"]
        if abs(d) <= 1e-8 and wall_resid <= 1e-8 and (dc <= tol_dc or riding or stalled):
            return Mode(alpha=alpha, c=c, y=res.y, p=res.p, dp=res.dp,
                        boundary_residual=wall_resid, iterations=it,
                        floor_limited=riding)
        if stalled and riding:
            raise FloorError(
                f"growth rate below double-precision resolution at alpha={alpha} "
                f"(residual {wall_resid:.2e} at the c_i floor {state['floor']:.1e})")
        return None

    d, res = dfun(c)
    for it in range(1, max_iter + 1):
        if not state["sharp"] and abs(d) < 1e-7:
            state["sharp"] = True
            d, res = dfun(c)
        h = 1e-7 * abs(c)
        d_h, _ = dfun(c + h)
        deriv = (d_h - d) / h
        if deriv == 0:
            raise ConvergenceError("degenerate Newton derivative")
        step = -d / deriv
        accepted = False
        for _ in range(9):
            c_new = c + step
            if c_new.imag < state["floor"]:
                if c.imag <= 2.0 * state["floor"]:
                    # already riding the floor: slide along it in Re(c)
                    c_new = complex(c.real + step.real, max(c.imag, state["floor"]))
                else:
                    # pull back toward the floor rather than crossing it
                    lam = (c.imag - state["floor"]) / max(c.imag - c_new.imag, 1e-300)
                    c_new = c + lam * step
            if c_new == c:
                break
            d_new, res_new = dfun(c_new)
            if abs(d_new) < abs(d):
                accepted = True
                break
            step *= 0.5
        if not accepted:
            # stalled at the evaluation noise ball: accept if the residuals
            # already meet tolerance, otherwise report honestly
            mode = finish(it, dc=0.0, stalled=True)
            if mode is not None:
                return mode
            raise ConvergenceError(
                f"Newton stalled at alpha={alpha}: |D| = {abs(d):.3e}")
        dc = abs(c_new - c)
        c, d, res = c_new, d_new, res_new
        mode = finish(it, dc)
        if mode is not None:
            return mode
    raise ConvergenceError(
        f"no convergence after {max_iter} iterations at alpha={alpha} "
        f"(|D| = {abs(d):.3e}, c = {c})")


# ---------------------------------------------------------------------------
# Field reconstruction and residuals
# ---------------------------------------------------------------------------

def reconstruct_fields(mode: Mode, flow: BaseFlow, thermo: ThermoProfile) -> dict:
    """Rebuild (rho, U, V, T) from the pressure profile.

    V and U come from the momentum equations, rho from continuity (using
    P'' from the pressure equation itself, not differencing), and T from
    the equation of state, which then holds to machine precision.
    """
    alpha, c = mode.alpha, mode.c
    y, p, dp = mode.y, mode.p, mode.dp
    gm2 = thermo.gamma * thermo.mach**2
    u_b = flow.eval_u(y, 0)
    du_b = flow.eval_u(y, 1)
    t0 = thermo.t0(y)
    m0 = thermo.mbar(y, c, 0)
    m1 = thermo.mbar(y, c, 1)
    ddp = 2.0 * (m1 / m0) * dp + alpha**2 * (1.0 - m0 * m0) * p  # P'' from the ODE
    ub_c = u_b - c
    v = 1j * t0 * dp / (gm2 * alpha * ub_c)
    u = -t0 * p / (gm2 * ub_c) - t0 * dp * du_b / (gm2 * alpha**2 * ub_c**2)
    rho = (p / (gm2 * ub_c**2) + 2.0 * dp * du_b / (gm2 * alpha**2 * ub_c**3)
           - ddp / (gm2 * alpha**2 * ub_c**2))
    tem = p * t0 - rho * t0**2
    return {"Y": y, "rho": rho, "U": u, "V": v, "T": tem, "P": p, "dP": dp}


def _fd4(y: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Fourth-order first derivative on a uniform grid (one-sided at ends)."""
    h = y[1] - y[0]
    out = np.empty_like(f)
    out[2:-2] = (f[:-4] - 8 * f[1:-3] + 8 * f[3:-1] - f[4:]) / (12 * h)
    for i in (0, 1):
        out[i] = (-25 * f[i] + 48 * f[i + 1] - 36 * f[i + 2]
                  + 16 * f[i + 3] - 3 * f[i + 4]) / (12 * h)
    for i in (-2, -1):
        out[i] = (25 * f[i] - 48 * f[i - 1] + 36 * f[i - 2]
                  - 16 * f[i - 3] + 3 * f[i - 4]) / (12 * h)
    return out


def residual_check(mode: Mode, flow: BaseFlow, thermo: ThermoProfile,
                   fields: dict | None = None) -> dict:
    """Sup-norm residuals of the five linearized equations, each relative
    to its own term scale, outside a guard band around the critical layer.

    Differentiation is 4th-order finite differences on the mode's own
    (uniform) profile grid; resampling would cap the achievable accuracy.
    """
    if fields is None:
        fields = reconstruct_fields(mode, flow, thermo)
    alpha, c = mode.alpha, mode.c
    yu = np.asarray(fields["Y"], dtype=float)
    steps = np.diff(yu)
    if steps.size < 9 or np.max(np.abs(steps - steps[0])) > 1e-9 * steps[0]:
        raise DomainError("residual check needs the uniform shooting grid")
    p = fields["P"]
    rho = fields["rho"]
    u = fields["U"]
    v = fields["V"]
    tem = fields["T"]

    u_b = flow.eval_u(yu, 0)
    du_b = flow.eval_u(yu, 1)
    t0 = thermo.t0(yu)
    dt0 = thermo.t0(yu, 1)
    rho0 = 1.0 / t0
    gm2 = thermo.gamma * thermo.mach**2
    g = thermo.gamma
    ia = 1j * alpha
    ub_c = u_b - c

    yc = flow.invert_u(c.real) if flow.u[0] < c.real < flow.u[-1] else None
    h = yu[1] - yu[0]
    guard = np.ones(yu.size, dtype=bool)
    if yc is not None:
        guard = np.abs(yu - yc) > 10.0 * max(c.imag, h)
    guard &= (yu > 4 * h) & (yu < yu[-1] - 4 * h)

    def rel_sup(terms):
        resid = np.abs(sum(terms))
        scale = np.max(sum(np.abs(t) for t in terms)[guard]) + 1e-300
        return float(np.max(resid[guard]) / scale)

    eqs = {
        "continuity": [ia * ub_c * rho, ia * rho0 * u, _fd4(yu, v * rho0)],
        "momentum_x": [ia * ub_c * u * rho0, rho0 * v * du_b, ia * p / gm2],
        "momentum_y": [ia * ub_c * v * rho0, _fd4(yu, p) / gm2],
        "energy": [ia * ub_c * rho0 * tem, rho0 * v * dt0,
                   -(g - 1.0) / g * ia * ub_c * p],
        "state": [p, -rho * t0, -tem * rho0],
    }
    return {name: rel_sup(terms) for name, terms in eqs.items()}


def save_mode(mode: Mode, path) -> None:
    with open(path, "w") as fh:
        json.dump(mode.to_json(), fh)


def load_mode(path) -> dict:
    with open(path) as fh:
        return json.load(fh)
