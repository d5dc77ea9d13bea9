"""Complex Airy functions built from two independent branches.

The inner branch sums the Maclaurin series; the outer branch anchors the
large-argument asymptotic expansions at |z| = 9..12 and, below the radius
where those expansions reach full accuracy, transports the values inward
by Taylor stepping of w'' = z w along the ray (the recessive solution is
dominant in the inward direction, so the transport is stable).  Production
evaluation switches branches at M_SWITCH; the two branches overlap on
5 <= |z| <= 7 and their agreement there is a CI gate.

Only Ai is computed directly; Bi and the left half-plane come from the
standard rotation identities, which keeps every core evaluation inside
|arg z| <= 2*pi/3.

Values carry an optional exponent so that e.g. exp(-2*a*w0) * Bi^2 stays
finite after Bi itself has left double range.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

M_SWITCH = 6.0          # series/asymptotics switch radius
_RESCUE_RE_ZETA = 5.2   # series cancellation limit for the recessive part
_ASYM_RADIUS = 8.7      # direct asymptotics beyond this modulus
_SCALE_RE_ZETA = 300.0  # switch to exponent-carrying representation
_ZMAX = 1.0e4

_SQRTPI = np.sqrt(np.pi)
_AI0 = 0.3550280538878172392600631860041831763980  # 3^(-2/3)/Gamma(2/3)
_DAI0 = -0.2588194037928067984051835601892039634793  # -3^(-1/3)/Gamma(1/3)
_OMEGA = np.exp(2j * np.pi / 3.0)


class SectorError(ValueError):
    """Argument in a sector the chosen expansion does not cover."""


@dataclass(frozen=True)
class AiryValue:
    """Ai, Ai', Bi, Bi' at one argument, with optional scaling exponents.

    The true values are ai*exp(ai_exp) etc.; exponents are zero unless the
    argument is deep in the exponential regime.
    """

    z: complex
    ai: complex
    dai: complex
    bi: complex
    dbi: complex
    ai_exp: float = 0.0
    bi_exp: float = 0.0

    def wronskian(self) -> complex:
        """ai*dbi - dai*bi, times the carried exponents; constant 1/pi."""
        return (self.ai * self.dbi - self.dai * self.bi) * np.exp(self.ai_exp + self.bi_exp)


def theta(x):
    """Oscillatory Airy phase (2/3) x^(3/2) - pi/4 for x > 0."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("theta requires x > 0")
    return (2.0 / 3.0) * x**1.5 - 0.25 * np.pi


def _zeta(z):
    return (2.0 / 3.0) * z**1.5


# ---------------------------------------------------------------------------
# Branch 1: Maclaurin series
# ---------------------------------------------------------------------------

def _series_raw(z):
    """(Ai, Ai', Bi, Bi') by direct Maclaurin summation; entire but loses
    relative accuracy for the recessive component once Re zeta is large."""
    z = np.asarray(z, dtype=complex)
    z3 = z**3
    f = np.ones_like(z)
    tf = np.ones_like(z)
    g = z.copy()
    tg = z.copy()
    fp = 0.5 * z**2
    tfp = fp.copy()
    gp = np.ones_like(z)
    tgp = np.ones_like(z)
    for k in range(1, 160):
        tf = tf * z3 / ((3 * k) * (3 * k - 1))
        tg = tg * z3 / ((3 * k + 1) * (3 * k))
        tgp = tgp * z3 / ((3 * k) * (3 * k - 2))
        f += tf
        g += tg
        gp += tgp
        if k >= 2:
            tfp = tfp * z3 / ((3 * k - 1) * (3 * k - 3))
            fp += tfp
        if max(np.max(np.abs(tf)), np.max(np.abs(tg))) < 1e-25 * max(1.0, np.max(np.abs(f))):
            break
    c1, c2 = _AI0, -_DAI0
    ai = c1 * f - c2 * g
    dai = c1 * fp - c2 * gp
    sq3 = np.sqrt(3.0)
    bi = sq3 * (c1 * f + c2 * g)
    dbi = sq3 * (c1 * fp + c2 * gp)
    return ai, dai, bi, dbi


# ---------------------------------------------------------------------------
# Branch 2: asymptotic expansion + stable inward transport
# ---------------------------------------------------------------------------

def _asym_coeffs(nmax=30):
    u = np.empty(nmax + 1)
    v = np.empty(nmax + 1)
    u[0] = v[0] = 1.0
    for k in range(1, nmax + 1):
        u[k] = u[k - 1] * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / (216.0 * k * (2 * k - 1))
        v[k] = u[k] * (6 * k + 1) / (1.0 - 6 * k)
    return u, v


_UK, _VK = _asym_coeffs()


def _asym_ai_scaled(z):
    """(Ai, Ai') times e^{+zeta}: asymptotic series, |arg z| < pi - delta.

    Truncated at the smallest term per point; accurate to ~1e-13 relative
    for |zeta| >= 16.
    """
    z = np.asarray(z, dtype=complex)
    zeta = _zeta(z)
    inv = 1.0 / zeta
    sa = np.ones_like(z)
    sda = np.ones_like(z)
    term = np.ones_like(z)
    live = np.ones(z.shape, dtype=bool)
    prev = np.full(z.shape, np.inf)
    for k in range(1, _UK.size):
        term = term * (-inv)
        mag = np.abs(term) * _UK[k]
        stop = mag >= prev
        live &= ~stop
        if not live.any():
            break
        sa = np.where(live, sa + _UK[k] * term, sa)
        sda = np.where(live, sda + _VK[k] * term, sda)
        prev = np.where(live, mag, prev)
    q = z**0.25
    ai_s = 0.5 / _SQRTPI / q * sa
    dai_s = -0.5 / _SQRTPI * q * sda
    return ai_s, dai_s


def _asym_bi_scaled(z):
    """(Bi, Bi') times e^{-zeta}; valid |arg z| <= pi/3 - delta."""
    z = np.asarray(z, dtype=complex)
    zeta = _zeta(z)
    inv = 1.0 / zeta
    sb = np.ones_like(z)
    sdb = np.ones_like(z)
    term = np.ones_like(z)
    live = np.ones(z.shape, dtype=bool)
    prev = np.full(z.shape, np.inf)
    for k in range(1, _UK.size):
        term = term * inv
        mag = np.abs(term) * _UK[k]
        stop = mag >= prev
        live &= ~stop
        if not live.any():
            break
        sb = np.where(live, sb + _UK[k] * term, sb)
        sdb = np.where(live, sdb + _VK[k] * term, sdb)
        prev = np.where(live, mag, prev)
    q = z**0.25
    return 1.0 / _SQRTPI / q * sb, 1.0 / _SQRTPI * q * sdb


def _taylor_steps(z0, ai, dai, z1, nstep, nterms=30):
    """Advance (Ai, Ai') from z0 to z1 by Taylor recurrence steps."""
    h = (z1 - z0) / nstep
    za = z0
    for _ in range(nstep):
        coef = [ai, dai]
        for n in range(nterms):
            a_nm1 = coef[n - 1] if n >= 1 else np.zeros_like(ai)
            coef.append((za * coef[n] + a_nm1) / ((n + 1) * (n + 2)))
        val = np.zeros_like(ai)
        der = np.zeros_like(ai)
        for a in reversed(coef):
            val = val * h + a
        for n in range(len(coef) - 1, 0, -1):
            der = der * h + n * coef[n]
        ai, dai = val, der
        za = za + h
    return ai, dai


def _transport_ai(z):
    """(Ai, Ai') for moderate |z|, |arg z| <= 2*pi/3, by Taylor stepping
    from an asymptotic anchor on the positive real axis.

    Path: 9 -> |z| along the real axis, then the chord |z| -> z.  Re zeta
    is non-increasing along this path, so Ai never decays in the marching
    direction and the dominant-solution contamination cannot amplify.
    """
    z = np.asarray(z, dtype=complex)
    absz = np.abs(z).astype(complex)
    za = np.full(z.shape, 9.0 + 0.0j)
    ai_s, dai_s = _asym_ai_scaled(za)
    damp = np.exp(-_zeta(za))
    ai, dai = ai_s * damp, dai_s * damp
    ai, dai = _taylor_steps(za, ai, dai, absz, nstep=10)
    ai, dai = _taylor_steps(absz, ai, dai, z, nstep=14)
    return ai, dai


# ---------------------------------------------------------------------------
# Core evaluation (Ai only, |arg z| <= 2*pi/3)
# ---------------------------------------------------------------------------

def _core_ai(z, branch: str):
    """(Ai, Ai') on the sector |arg z| <= 2*pi/3 + eps.

    branch 'series': Maclaurin, with transported rescue where cancellation
    would spoil the recessive values.  branch 'asymptotic': anchored
    expansion everywhere (transported below _ASYM_RADIUS).  branch 'auto':
    series inside M_SWITCH, asymptotic outside.
    """
    z = np.asarray(z, dtype=complex)
    absz = np.abs(z)
    re_zeta = np.real(_zeta(z))
    ai = np.empty_like(z)
    dai = np.empty_like(z)

    if branch == "auto":
        inner = absz < M_SWITCH
    elif branch == "series":
        inner = np.ones(z.shape, dtype=bool)
    elif branch == "asymptotic":
        inner = np.zeros(z.shape, dtype=bool)
    else:
        raise ValueError(f"unknown branch {branch!r}")

    m_series = inner & (re_zeta <= _RESCUE_RE_ZETA)
    m_rescue = inner & ~m_series
    m_far = ~inner & (absz >= _ASYM_RADIUS)
    m_transport = ~inner & ~m_far

    if m_series.any():
        a, da, _, _ = _series_raw(z[m_series])
        ai[m_series], dai[m_series] = a, da
    if m_rescue.any():
        ai[m_rescue], dai[m_rescue] = _transport_ai(z[m_rescue])
    if m_transport.any():
        ai[m_transport], dai[m_transport] = _transport_ai(z[m_transport])
    if m_far.any():
        zf = z[m_far]
        a_s, da_s = _asym_ai_scaled(zf)
        damp = np.exp(-_zeta(zf))
        ai[m_far], dai[m_far] = a_s * damp, da_s * damp
    return ai, dai


def _bi_from_rotations(z, ai, dai, branch):
    """Bi, Bi' on |arg z| <= 2*pi/3 from one rotated Ai evaluation."""
    arg = np.angle(z)
    upper = arg >= 0.0
    rot = np.where(upper, _OMEGA.conjugate(), _OMEGA)
    a_r, da_r = _core_ai(z * rot, branch)
    pref = np.where(upper, 1j, -1j)
    ph = np.where(upper, 2.0 * np.exp(-1j * np.pi / 6), 2.0 * np.exp(1j * np.pi / 6))
    phd = np.where(upper, 2.0 * np.exp(-1j * 5 * np.pi / 6), 2.0 * np.exp(1j * 5 * np.pi / 6))
    bi = pref * ai + ph * a_r
    dbi = pref * dai + phd * da_r
    return bi, dbi


def airy_many(z, branch: str = "auto"):
    """Vectorized (Ai, Ai', Bi, Bi', ai_exp, bi_exp) over complex z.

    Exponents are nonzero only where Re zeta exceeds the scaling threshold
    (deep exponential regime on the right); there the true functions are
    ai*exp(ai_exp), bi*exp(bi_exp).
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if np.any(np.abs(z) > _ZMAX):
        raise SectorError(f"|z| beyond validated range {_ZMAX:g}")
    was_real = np.all(np.abs(z.imag) == 0.0)

    ai = np.empty_like(z)
    dai = np.empty_like(z)
    bi = np.empty_like(z)
    dbi = np.empty_like(z)
    ai_exp = np.zeros(z.shape, dtype=float)
    bi_exp = np.zeros(z.shape, dtype=float)

    re_zeta = np.real(_zeta(np.where(np.abs(np.angle(z)) <= 2 * np.pi / 3, z, 1.0)))
    arg = np.angle(z)
    in_right = np.abs(arg) <= 2 * np.pi / 3 + 1e-12
    m_scaled = in_right & (re_zeta > _SCALE_RE_ZETA)
    if m_scaled.any():
        zs = z[m_scaled]
        if np.any(np.abs(np.angle(zs)) > np.pi / 3 - 1e-3):
            raise SectorError("scaled evaluation restricted to |arg z| <= pi/3")
        a_s, da_s = _asym_ai_scaled(zs)
        b_s, db_s = _asym_bi_scaled(zs)
        zeta_s = _zeta(zs)
        osc = np.exp(-1j * zeta_s.imag)
        ai[m_scaled], dai[m_scaled] = a_s * osc, da_s * osc
        bi[m_scaled], dbi[m_scaled] = b_s / osc, db_s / osc
        ai_exp[m_scaled] = -zeta_s.real
        bi_exp[m_scaled] = zeta_s.real

    m_right = in_right & ~m_scaled
    if m_right.any():
        zr = z[m_right]
        a, da = _core_ai(zr, branch)
        b, db = _bi_from_rotations(zr, a, da, branch)
        ai[m_right], dai[m_right] = a, da
        bi[m_right], dbi[m_right] = b, db

    m_left = ~in_right
    if m_left.any():
        zl = z[m_left]
        # wrap both rotations back into the core sector
        z_m = zl * _OMEGA.conjugate()        # arg - 2*pi/3
        z_p = zl * _OMEGA                    # arg + 2*pi/3 (wraps for arg > pi/3)
        a_m, da_m = _core_ai(z_m, branch)
        a_p, da_p = _core_ai(z_p, branch)
        w = _OMEGA
        ai[m_left] = -w.conjugate() * a_m - w * a_p
        dai[m_left] = -w * da_m - w.conjugate() * da_p
        bi[m_left] = np.exp(1j * np.pi / 6) * a_p + np.exp(-1j * np.pi / 6) * a_m
        dbi[m_left] = np.exp(1j * 5 * np.pi / 6) * da_p + np.exp(-1j * 5 * np.pi / 6) * da_m

    if was_real:
        ai, dai, bi, dbi = (np.real(v) + 0j for v in (ai, dai, bi, dbi))
    return ai, dai, bi, dbi, ai_exp, bi_exp


def airy_pair(z, branch: str = "auto") -> AiryValue:
    """Ai, Ai', Bi, Bi' at a single complex argument."""
    ai, dai, bi, dbi, ae, be = airy_many(np.array([z]), branch)
    return AiryValue(z=complex(z), ai=complex(ai[0]), dai=complex(dai[0]),
                     bi=complex(bi[0]), dbi=complex(dbi[0]),
                     ai_exp=float(ae[0]), bi_exp=float(be[0]))


def crossover_gap(n_radial: int = 9, n_angular: int = 24) -> float:
    """Worst relative disagreement of the two branches on 5 <= |z| <= 7.

    Relative per function, against the larger of the two branch values.
    This is the CI gate behind the M_SWITCH choice.
    """
    rs = np.linspace(5.0, 7.0, n_radial)
    ths = np.linspace(-np.pi, np.pi, n_angular, endpoint=False)
    zs = np.array([r * np.exp(1j * t) for r in rs for t in ths])
    worst = 0.0
    a1 = airy_many(zs, branch="series")
    a2 = airy_many(zs, branch="asymptotic")
    for v1, v2 in zip(a1[:4], a2[:4]):
        scale = np.maximum(np.abs(v1), np.abs(v2))
        gap = np.max(np.abs(v1 - v2) / np.where(scale > 0, scale, 1.0))
        worst = max(worst, float(gap))
    return worst
