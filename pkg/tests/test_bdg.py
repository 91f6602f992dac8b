import math

import numpy as np
import pytest

from soliton_imaging import bdg
from soliton_imaging.units import KAPPA0

GL_X, GL_W = np.polynomial.legendre.leggauss(3000)


def box_quadrature(ell):
    return GL_X * ell, GL_W * ell


def test_fig5_wavenumbers():
    m = bdg.solve_wavenumbers(10.0, 3)
    assert np.allclose(m.wavenumbers[:3] / (math.pi / 10), [0.5379, 1.6093, 2.6704], atol=5e-4)
    assert np.all(np.abs(m.residuals()) <= 1e-10)
    assert np.array_equal(m.wavenumbers[3:], -m.wavenumbers[:3])


def test_spectrum_properties(modes140):
    k = modes140.wavenumbers[: modes140.pairs]
    assert np.all(np.diff(k) > 0)
    assert np.all(modes140.energies > 0)
    assert 0 not in modes140.j
    kk = np.linspace(0.01, 5, 40)
    assert np.allclose(bdg.energy(kk), np.sqrt(kk**2 / 2 * (kk**2 / 2 + 1)), rtol=1e-14)
    assert math.isclose(bdg.energy(KAPPA0), 0.559, abs_tol=5e-4)


def test_large_box_free_particle_limit():
    ell = 2000.0
    m = bdg.solve_wavenumbers(ell, 3)
    j = np.arange(1, 4)
    approx = j * math.pi / ell - math.pi / (2 * ell)  # phase shift -> pi as k -> 0
    assert np.allclose(m.wavenumbers[:3], approx, rtol=1e-3)


def test_refuses_small_box_and_bad_bracket(monkeypatch):
    with pytest.raises(ValueError):
        bdg.solve_wavenumbers(4.0, 3)
    monkeypatch.setattr(bdg, "quantization_lhs", lambda k, ell: np.ones_like(k))
    with pytest.raises(bdg.BracketError):
        bdg.solve_wavenumbers(10.0, 2)


def test_eval_phonon_and_real_v_at_origin(modes140):
    u, v = bdg.eval_phonon(modes140, 2, np.array([0.0, 1.0]))
    U, V = modes140.uv(np.array([0.0, 1.0]))
    i = modes140.index(2)
    assert np.array_equal(u, U[i]) and np.array_equal(v, V[i])
    for j in (1, 2, 3):
        _, v0 = bdg.eval_phonon(modes140, j, np.array([0.0]))
        assert abs(v0[0].imag) < 1e-15
    with pytest.raises(KeyError):
        modes140.index(71)


def test_bdg_equation_by_finite_differences():
    m = bdg.solve_wavenumbers(20.0, 10, n=50.0)
    x = np.linspace(-20, 20, 200001)
    h = x[1] - x[0]
    U, V = m.uv(x)
    gphi2 = 0.5 * np.tanh(KAPPA0 * x[1:-1]) ** 2

    def lap(f):
        return (f[2:] - 2 * f[1:-1] + f[:-2]) / h**2

    for i in (0, 4, 9, 12):
        u, v, E = U[i], V[i], m.energies[i]
        ru = -0.5 * lap(u) + (2 * gphi2 - 0.5) * u[1:-1] + gphi2 * v[1:-1] - E * u[1:-1]
        rv = -0.5 * lap(v) + (2 * gphi2 - 0.5) * v[1:-1] + gphi2 * u[1:-1] + E * v[1:-1]
        assert max(np.abs(ru).max(), np.abs(rv).max()) < 1e-6


def test_orthonormality_and_duality_at_l20():
    ell = 20.0
    m = bdg.solve_wavenumbers(ell, 10, n=100.0)
    x, w = box_quadrature(ell)
    U, V = m.uv(x)
    G = (U.conj() * w) @ U.T - (V.conj() * w) @ V.T
    assert np.abs(G - np.eye(20)).max() < 1e-8
    fams = [bdg.ZeroModeFamily(a, 100.0, ell) for a in ("theta", "q")]
    Z = [bdg.zero_modes(f, x) for f in fams]
    D = np.array([[np.sum(w * (Z[a][2].conj() * Z[b][0] - Z[a][3].conj() * Z[b][1])) for b in range(2)] for a in range(2)])
    assert np.abs(D - np.eye(2)).max() < 1e-8


def test_zero_mode_algebra():
    fam = bdg.ZeroModeFamily("q", 100.0, 10.0)
    x = np.linspace(-9, 9, 101)
    u, v, uad, vad = fam(x)
    assert np.array_equal(v, -u.conj()) and np.array_equal(vad, uad.conj())
    assert np.all(np.abs(u) ** 2 - np.abs(v) ** 2 == 0)
    assert math.isclose(fam.effective_mass, -4 * 100 / KAPPA0)
    _, _, uad_t, _ = bdg.ZeroModeFamily("theta", 100.0, 10.0)(x)
    assert np.all(uad_t.imag == 0)
    with pytest.raises(ValueError):
        bdg.ZeroModeFamily("phi", 1.0, 10.0)


def test_displacement_mode_orthogonal_to_phonons():
    ell = 20.0
    m = bdg.solve_wavenumbers(ell, 10, n=100.0)
    x, w = box_quadrature(ell)
    U, V = m.uv(x)
    u, v, _, _ = bdg.zero_modes(bdg.ZeroModeFamily("q", 100.0, ell), x)
    O = (U.conj() * w) @ u - (V.conj() * w) @ v
    assert np.abs(O).max() < 1e-7


def test_phase_mode_overlap_is_the_boundary_wronskian():
    # the kink is antiperiodic while the phonons are periodic, so only the
    # boundary term of the BdG product survives
    ell, n = 10.0, 100.0
    m = bdg.solve_wavenumbers(ell, 6, n=n)
    x, w = box_quadrature(ell)
    U, V = m.uv(x)
    phi = bdg.kink(x, n, 0.0)
    overlap = (U.conj() * w) @ phi + (V.conj() * w) @ phi
    b = np.array([-ell, ell])
    d = 1e-6
    (Up, Vp), (Um, Vm), (U0, V0) = m.uv(b + d), m.uv(b - d), m.uv(b)
    D = (Up - Vp - Um + Vm).conj() / (2 * d)
    D0 = (U0 - V0).conj()
    ph = bdg.kink(b, n, 0.0)
    dph = math.sqrt(n) * KAPPA0 / np.cosh(KAPPA0 * b) ** 2
    wr = D * ph - D0 * dph
    boundary = -0.5 * (wr[:, 1] - wr[:, 0]) / m.energies
    assert np.allclose(overlap, boundary, rtol=1e-6)
    assert np.abs(overlap).max() > 1.0


def test_zero_mode_states():
    s = bdg.zero_mode_state("zeta", 1.0, 100.0, 10.0)
    assert s.h_mean == 0 and math.isclose(s.uncertainty_product, 0.25)
    s100 = bdg.zero_mode_state("zeta", 100.0, 100.0, 10.0)
    assert math.isclose(s100.h_mean, KAPPA0 / 8 * 98.01, rel_tol=1e-12)
    assert math.isclose(s100.P_q2, 2 * 100 * KAPPA0 / 100) and math.isclose(s100.Q_q2, 100 / (800 * KAPPA0))
    cold = bdg.zero_mode_state("tau", 1e-4, 100.0, 10.0)
    assert math.isclose(cold.P_q2, s.P_q2) and math.isclose(cold.Q_q2, s.Q_q2)
    for tau in (0.2, 1.0, 5.0):
        t = bdg.zero_mode_state("tau", tau, 100.0, 10.0)
        coth = 1 / math.tanh(KAPPA0 / (4 * tau))
        assert math.isclose(t.uncertainty_product, coth**2 / 4, rel_tol=1e-12) and t.uncertainty_product > 0.25
        assert math.isclose(t.h_mean, 0.5 * KAPPA0 / math.expm1(KAPPA0 / (2 * tau)))
    assert math.isclose(s.P_theta2, bdg.condensate_number(100.0, 10.0))
    assert math.isclose(s.P_theta2 * s.Q_theta2, 0.25)
    for bad in (("zeta", 0.0), ("tau", -1.0), ("other", 1.0)):
        with pytest.raises(ValueError):
            bdg.zero_mode_state(*bad)


def test_condensate_number_positive():
    assert math.isclose(bdg.condensate_number(100.0, 10.0), 2000 - 200 * math.sqrt(2))
    with pytest.raises(ValueError):
        bdg.ZeroModeFamily("q", 1.0, 1.0)


def window_average(modeset, a, b, zero=True):
    t, w = np.polynomial.legendre.leggauss(16)
    R = bdg.completeness_residual(modeset, a + 0.5 + 0.5 * t, b + 0.5 + 0.5 * t, include_zero_modes=zero)
    return abs(0.25 * w @ R @ w)


def test_completeness_residual_bound_and_symmetry(modes140):
    m = modes140
    xs = np.array([-7.5, -2.5, 0.0, 2.5])
    r = np.abs(np.diagonal(bdg.completeness_residual(m, xs, xs + 5.0)))
    assert np.all(r < 0.05 * m.n)
    A = bdg.completeness_residual(m, xs, xs + 5.0)
    B = bdg.completeness_residual(m, xs + 5.0, xs)
    assert np.allclose(A, B.conj().T, atol=1e-12)


def test_completeness_residual_decays_with_box_size():
    avg = [window_average(bdg.solve_wavenumbers(ell, int(7 * ell), n=100.0), 2.5, -2.5) for ell in (10.0, 20.0, 40.0)]
    assert avg[0] > avg[1] > avg[2]
    assert math.isclose(avg[0] / avg[2], 4.0, rel_tol=0.15)


def test_completeness_needs_zero_modes(modes140):
    for pairs in (20, 40, 70):
        m = modes140.truncated(pairs)
        with_zero, without = window_average(m, 0.2, -1.2), window_average(m, 0.2, -1.2, zero=False)
        assert without > 0.25 and without > 5 * with_zero
