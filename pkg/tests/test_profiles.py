import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from soliton_imaging import profiles as pr


def fd_abs(profile, x, h=1e-5, *extra):
    up = np.abs(np.sqrt(profile.shifted(profile.q + h).density(x, *extra)))
    dn = np.abs(np.sqrt(profile.shifted(profile.q - h).density(x, *extra)))
    return (up - dn) / (2 * h)


def test_amplitude_zero_at_center_and_background():
    p = pr.DarkSolitonParams(1.0)
    assert pr.soliton_amplitude(p, 0.0) == 0
    assert abs(abs(pr.soliton_amplitude(p, 60.0)) ** 2 - 1.0) < 1e-12


def test_grey_center_density():
    p = pr.DarkSolitonParams(1.0, 0.5)
    assert math.isclose(abs(p.amplitude(0.0)) ** 2, 0.25, rel_tol=1e-14)


def test_dq_at_notch_and_far():
    p = pr.DarkSolitonParams(100.0)
    dens, dq = pr.soliton_density_dq(p, 0.0)
    assert dens == 0
    assert math.isclose(dq, -math.sqrt(100.0) * p.kappa, rel_tol=1e-14)
    far = -math.sqrt(p.n) * p.kappa / math.cosh(10 * p.kappa) ** 2
    assert math.isclose(p.abs_dq(10.0), far, rel_tol=1e-12)
    assert abs(far) < 3e-6 * math.sqrt(p.n)


@pytest.mark.xfail(strict=True, reason="sqrt(n) kappa sech^2(10 kappa) = 2.04e-6 sqrt(n), twice the stated bound")
def test_dq_far_below_one_ppm():
    p = pr.DarkSolitonParams(100.0)
    assert abs(p.abs_dq(10.0)) < 1e-6 * math.sqrt(p.n)


def test_dq_is_odd_about_q():
    # the sech^2 slope flips sign with the tanh branch, so the derivative is odd
    p = pr.DarkSolitonParams(100.0, q=0.3)
    a = np.linspace(0.01, 6, 50)
    assert np.allclose(p.abs_dq(p.q + a), -p.abs_dq(p.q - a), rtol=1e-12, atol=0)


@settings(max_examples=40, deadline=None)
@given(
    nu=st.floats(0.0, 0.95),
    q=st.floats(-3, 3),
    x=st.floats(-8, 8),
)
def test_dark_dq_matches_finite_difference(nu, q, x):
    p = pr.DarkSolitonParams(50.0, nu, q)
    if abs(x - q) < 1e-3:
        return
    ref = fd_abs(p, x)
    assert abs(p.abs_dq(x) - ref) <= 1e-8 * max(abs(ref), 1e-3 * math.sqrt(p.n))


@settings(max_examples=40, deadline=None)
@given(nu=st.floats(0.0, 0.9), x=st.floats(-0.4, 0.4))
def test_quintic_dq_matches_finite_difference(nu, x):
    # the notch is only 1/(4 pi) wide here, so the step is scaled down with it
    p = pr.QuinticSolitonParams(2.0, nu, 0.0)
    if abs(x) < 1e-3:
        return
    ref = fd_abs(p, x, 1e-6)
    assert abs(p.abs_dq(x) - ref) <= 1e-8 * max(abs(ref), 1e-3)


def test_vortex_and_trapped_dq_match_finite_difference():
    v = pr.VortexParams(10.0, q=0.2)
    x, y = np.array([0.7, -1.3, 2.0]), np.array([0.4, 0.9, -1.5])
    up = np.sqrt(v.shifted(0.2 + 1e-5).areal_density(x, y))
    dn = np.sqrt(v.shifted(0.2 - 1e-5).areal_density(x, y))
    assert np.allclose(v.abs_dq(x, y), (up - dn) / 2e-5, rtol=1e-8)
    t = pr.TrappedSolitonParams(100.0, 60.0, q=1.0)
    xs = np.array([-5.0, 3.0, 20.0])
    assert np.allclose(t.abs_dq(xs), fd_abs(t, xs), rtol=1e-8)


def test_quintic_limits():
    p = pr.QuinticSolitonParams(1.0)
    assert abs(pr.quintic_density(p, 0.0)) < 1e-15
    assert math.isclose(pr.quintic_density(p, 50.0), 1.0, rel_tol=1e-12)
    assert np.allclose(pr.QuinticSolitonParams(1.0, 1.0).f2(np.linspace(-1, 1, 5)), 1.0)


def test_vortex_values():
    v = pr.VortexParams(3.0, L=2.0)
    assert pr.vortex_density(v, 0.0, 0.0) == 0
    assert math.isclose(v.f2(1.0, 1.0), 0.5)
    assert math.isclose(v.f2(1e5, 0.0), 1.0, rel_tol=1e-9)
    assert math.isclose(pr.vortex_density(v, 1.0, 1.0), 3.0 / 2.0 * 0.5)
    with pytest.raises(ValueError):
        pr.VortexParams(1.0, winding=2)


def test_trapped_values():
    t = pr.TrappedSolitonParams(100.0, 40.0)
    assert pr.trapped_soliton_density(t, 0.0) == 0
    assert pr.trapped_soliton_density(t, 40.0) == 0
    expect = 100.0 * 0.75 * math.tanh(40.0 / (2 * math.sqrt(2))) ** 2
    assert math.isclose(pr.trapped_soliton_density(t, 20.0), expect, rel_tol=1e-14)
    with pytest.raises(ValueError):
        pr.TrappedSolitonParams(100.0, 40.0, q=41.0)
    assert math.isclose(pr.TrappedSolitonParams.from_coupling(100.0, 0.005, 40.0).xi0, 1.0)


def test_missing_atoms_and_phase_jump():
    p = pr.DarkSolitonParams(7.0)
    x, w = np.polynomial.legendre.leggauss(400)
    ell = 40.0
    missing = np.sum(w * ell * (p.n - p.density(ell * x)))
    assert math.isclose(missing, 2 * p.n / p.kappa, rel_tol=1e-6)
    jump = np.angle(p.amplitude(50.0)) - np.angle(p.amplitude(-50.0))
    assert math.isclose(abs(jump), math.pi)


@settings(max_examples=30, deadline=None)
@given(x=st.floats(-30, 30), nu=st.floats(0, 0.99))
def test_densities_nonnegative(x, nu):
    assert pr.DarkSolitonParams(5.0, nu).density(x) >= 0
    assert pr.QuinticSolitonParams(5.0, nu).density(x) >= 0
    assert pr.TrappedSolitonParams(5.0, 20.0).density(x) >= 0


def test_invalid_params():
    for bad in [dict(n=0.0), dict(n=1.0, v_over_c=1.0), dict(n=1.0, v_over_c=-0.1)]:
        with pytest.raises(ValueError):
            pr.DarkSolitonParams(**bad)
