import numpy as np
import pytest
from scipy.integrate import quad

from macksolve.baseflow import DomainError
from macksolve.langer import (build_langer_map, q1_tilde, supersonic_zone)
from macksolve.thermo import turning_point


@pytest.fixture(scope="module")
def lmap(thermo_m3, blasius):
    return build_langer_map(thermo_m3, blasius, 0.8 + 1e-4j, alpha=20.0)


def test_eta_at_turning_point(lmap):
    y0 = lmap.turning.y0
    assert abs(lmap.eta(np.array([y0]))[0]) <= 1e-6
    assert abs(lmap.deta(np.array([y0]))[0] - 1.0) <= 1e-6


def test_langer_identity_residual(lmap, blasius):
    ys = np.linspace(0.0, blasius.y_max, 400)
    assert np.max(lmap.identity_residual(ys)) <= 1e-8


def test_phase_identity_vs_independent_quadrature(lmap, thermo_m3):
    # (2/3)(-kappa eta(0))^{3/2} = alpha * int_0^{Y0} sqrt(-F_r), the right
    # side by scipy quadrature with the endpoint substitution
    y0 = lmap.turning.y0
    lhs = (2.0 / 3.0) * (-lmap.kappa * np.real(lmap.eta(np.array([0.0]))[0])) ** 1.5
    rhs, _ = quad(lambda t: 2 * t * np.sqrt(max(-thermo_m3.f_real(y0 - t * t, 0.8), 0.0)),
                  0.0, np.sqrt(y0), epsabs=1e-13, epsrel=1e-12)
    assert abs(lhs - lmap.alpha * rhs) <= 1e-8


def test_eta_monotone_and_signed(lmap, blasius):
    ys = np.linspace(0.0, blasius.y_max, 300)
    eta = np.real(lmap.eta(ys))
    assert np.all(np.diff(eta) > 0)
    assert np.all(np.sign(eta) == np.sign(ys - lmap.turning.y0))


def test_eta_derivative_growth_bounds(lmap, blasius):
    # |d^k eta| <= C (1 + |Y - Y0|)^{2/3 - k}, fitted C <= 20
    ys = np.linspace(0.05, blasius.y_max - 0.5, 200)
    t = np.abs(ys - lmap.turning.y0)
    e0, e1, e2, e3 = lmap._eta_derivs(ys)
    for k, ek in enumerate((e0, e1, e2, e3)):
        c_fit = np.max(np.abs(ek) / (1 + t) ** (2.0 / 3.0 - k))
        assert c_fit <= 20.0, f"k={k}: C={c_fit}"


def test_eta_real_below_cutoff(lmap):
    ys = np.linspace(0.0, lmap.cutoff_start, 100)
    assert np.max(np.abs(np.imag(lmap.eta(ys)))) <= 1e-12


def test_w0_shape(lmap):
    y0 = lmap.turning.y0
    ys = np.linspace(0.0, y0, 40)
    assert np.max(lmap.w0(ys)) == 0.0
    ys = np.linspace(0.0, 18.0, 300)
    assert np.all(np.diff(lmap.w0(ys)) >= 0)


def test_w0_refinement_stable(thermo_m3, blasius, lmap):
    finer = build_langer_map(thermo_m3, blasius, 0.8 + 1e-4j, alpha=20.0,
                             n_panels=1400)
    ys = np.linspace(0.5, 15.0, 50)
    assert np.max(np.abs(finer.w0(ys) - lmap.w0(ys))) <= 1e-9


def test_wc_vanishes_at_critical_point(lmap):
    assert abs(lmap.wc(np.array([lmap.turning.yc]))[0]) <= 1e-12


def test_q1_real_when_ci_zero(thermo_m3, blasius):
    lm = build_langer_map(thermo_m3, blasius, complex(0.8), alpha=20.0)
    ys = np.array([0.1, 0.3, 0.5])   # supersonic regime
    q = lm.q1(ys)
    assert np.max(np.abs(np.imag(q))) == 0.0


def test_q1_guard_band(lmap):
    with pytest.raises(DomainError):
        lmap.q1(np.array([lmap.turning.yc + 1e-5]))


def test_q1_envelope_bound(lmap, blasius, thermo_m3):
    # |Q1| <= C (|u''| + |u'|^2 + (1+|Y-Y0|)^{-2}) with fitted C <= 50, in
    # the regime an O(1) distance away from the critical layer (where the
    # bound is claimed; Q1 grows like dist^{-2} on approach)
    ys = np.linspace(0.05, 12.0, 200)
    ys = ys[np.abs(ys - lmap.turning.yc) > 0.5]
    q = lmap.q1(ys)
    envelope = (np.abs(blasius.eval_u(ys, 2)) + blasius.eval_u(ys, 1) ** 2
                + (1 + np.abs(ys - lmap.turning.y0)) ** -2)
    assert np.max(np.abs(q) / envelope) <= 50.0


def test_q1_imaginary_part_linear_in_ci(thermo_m3, blasius):
    # Im Q1 / c_i approaches a finite limit: finite differences at two c_i
    # levels agree to 3 digits
    ys = np.array([0.3, 1.1, 1.9])
    vals = []
    for ci in (1e-6, 1e-7):
        lm = build_langer_map(thermo_m3, blasius, 0.8 + 1j * ci, alpha=20.0)
        vals.append(np.imag(lm.q1(ys)) / ci)
    assert np.max(np.abs(vals[0] - vals[1]) / np.abs(vals[1])) < 1e-3


def test_q1_tilde_negative_at_left_endpoint(thermo_m3, blasius):
    c_left = thermo_m3.t0_wall**0.5 / thermo_m3.mach + 1e-9
    zone = supersonic_zone(thermo_m3, blasius, c_left)
    assert zone.q1_tilde(np.array([0.0]))[0] < 0.0


def test_q1_tilde_matches_q1_limit(thermo_m3, blasius):
    # |Q1 - Q1tilde| <= C c_i on the supersonic side
    ys = np.array([0.2, 0.45, 0.7])
    zone = supersonic_zone(thermo_m3, blasius, 0.8)
    qt = zone.q1_tilde(ys)
    for ci in (1e-5, 1e-6):
        lm = build_langer_map(thermo_m3, blasius, 0.8 + 1j * ci, alpha=20.0)
        gap = np.max(np.abs(lm.q1(ys) - qt))
        assert gap <= 100.0 * ci


def test_q1_tilde_domain(thermo_m3, blasius):
    zone = supersonic_zone(thermo_m3, blasius, 0.8)
    with pytest.raises(DomainError):
        zone.q1_tilde(np.array([zone.y0 + 0.5]))


def test_q1_tilde_finite_at_turning_point_tanh(thermo_tanh, tanh_flow):
    val = q1_tilde(thermo_tanh, tanh_flow, 0.8,
                   np.array([supersonic_zone(thermo_tanh, tanh_flow, 0.8).y0]))
    assert np.isfinite(val).all()


def test_delta0_band_beyond_critical_point(lmap):
    assert lmap.cutoff_start > lmap.turning.yc
    assert lmap.delta0 == pytest.approx(
        min(0.5, (lmap.turning.yc - lmap.turning.y0) / 6.0))


def test_with_alpha_shares_geometry(lmap):
    lm2 = lmap.with_alpha(40.0)
    assert lm2.kappa == pytest.approx((40.0**2 * lmap._dfr0) ** (1 / 3))
    ys = np.linspace(0.2, 5.0, 20)
    assert np.max(np.abs(lm2.eta(ys) - lmap.eta(ys))) == 0.0
