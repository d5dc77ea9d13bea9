import numpy as np
import pytest
from hypothesis import given, strategies as st

from macksolve.baseflow import DomainError, solve_blasius
from macksolve.thermo import (SpectralPoint, temperature_profile, turning_point,
                              turning_point_ub)

_FLOW = solve_blasius(20.0, 1000)


def test_wall_temperature(thermo_m3):
    # M=3, gamma=1.4: T0(0) = 1 + 0.2*9 = 2.8
    assert thermo_m3.t0(0.0) == pytest.approx(2.8, abs=1e-12)


@given(y=st.floats(0.0, 20.0), mach=st.floats(1.5, 8.0))
def test_density_temperature_product(y, mach):
    th = temperature_profile(_FLOW, mach)
    assert th.rho0(y) * th.t0(y) == pytest.approx(1.0, abs=1e-12)


def test_supersonic_precondition(blasius):
    with pytest.raises(DomainError):
        temperature_profile(blasius, mach=0.9)


def test_mbar_limits(thermo_m3, blasius):
    c = 0.8 + 1e-3j
    # wall: U_B(0) = 0
    m0 = thermo_m3.mbar(0.0, c)
    assert m0 == pytest.approx(-3.0 * c / np.sqrt(2.8), rel=1e-12)
    # far field: T0 -> 1, U_B -> 1
    m_inf = thermo_m3.mbar(blasius.y_max, c)
    assert m_inf == pytest.approx(3.0 * (1.0 - c), rel=1e-5)
    # critical point: purely imaginary
    yc = blasius.invert_u(0.8)
    mc = thermo_m3.mbar(yc, c)
    assert mc == pytest.approx(-1j * 3.0 * c.imag / np.sqrt(thermo_m3.t0(yc)), rel=1e-6)


def test_mbar_derivative_orders(thermo_m3):
    # chain-rule derivatives against central differences of the lower order
    ys = np.array([0.3, 0.9, 1.7, 2.5, 3.6, 5.0])
    c = 0.8 + 1e-3j
    h = 1e-5
    for order in (1, 2, 3):
        fd = (thermo_m3.mbar(ys + h, c, order - 1)
              - thermo_m3.mbar(ys - h, c, order - 1)) / (2 * h)
        an = thermo_m3.mbar(ys, c, order)
        assert np.max(np.abs(fd - an) / (np.abs(an) + 1)) < 1e-6


def test_f_values(thermo_m3, blasius):
    c_r = 0.8
    yc = blasius.invert_u(c_r)
    # F_r(Yc) = 1 since Mbar_r vanishes there
    assert thermo_m3.f_real(yc, c_r) == pytest.approx(1.0, abs=1e-10)
    # c_i = 0 makes the split part vanish
    fr, fi = thermo_m3.f_split(np.array([0.5, 1.5, 3.0]), complex(c_r))
    assert np.max(np.abs(fi)) == 0.0
    # split reassembles the complex value exactly
    c = c_r + 1e-4j
    ys = np.array([0.2, 1.0, 2.0, 4.0])
    fr, fi = thermo_m3.f_split(ys, c)
    assert np.max(np.abs(fr + fi - thermo_m3.f_complex(ys, c))) < 1e-15


def test_turning_point_canonical(thermo_m3, blasius):
    # gamma=1.4, M=3, c_r=0.8: discriminant and root of the quadratic
    disc = (1.4**2 - 1) + 2 * 2.4 / 9 - 2 * 0.4 * 0.64
    assert disc == pytest.approx(0.98133, abs=1e-5)
    ub0 = turning_point_ub(0.8, 3.0)
    assert ub0 == pytest.approx(0.25391, abs=1e-5)

    td = turning_point(thermo_m3, blasius, 0.8)
    assert abs(thermo_m3.f_real(td.y0, 0.8)) <= 1e-8
    assert abs(blasius.eval_u(td.yc) - 0.8) <= 1e-10
    assert td.y0 < td.yc
    assert td.dFr_y0 > 0


def test_turning_point_sign_pattern(thermo_m3, blasius):
    td = turning_point(thermo_m3, blasius, 0.8)
    ys = np.linspace(0, blasius.y_max, 1000)
    fr = thermo_m3.f_real(ys, 0.8)
    assert np.all(fr[ys < td.y0 - 1e-6] < 0)
    assert np.all(fr[ys > td.y0 + 1e-6] > 0)
    # regime classification via |Mbar_r|
    mr = np.abs(thermo_m3.mbar(ys, 0.8))
    assert np.all(mr[ys < td.y0 - 1e-6] > 1)
    assert np.all(mr[ys > td.y0 + 1e-6] < 1)


def test_turning_point_window(thermo_m3, blasius):
    with pytest.raises(DomainError):
        turning_point(thermo_m3, blasius, 0.5)   # below 1 - 1/M
    with pytest.raises(DomainError):
        turning_point(thermo_m3, blasius, 1.01)


def test_spectral_point_validation():
    SpectralPoint(alpha=10.0, c_r=0.8, c_i=1e-6)
    with pytest.raises(DomainError):
        SpectralPoint(alpha=-1.0, c_r=0.8)
    with pytest.raises(DomainError):
        SpectralPoint(alpha=1.0, c_r=1.2)
    with pytest.raises(DomainError):
        SpectralPoint(alpha=1.0, c_r=0.8, c_i=-1e-9)
