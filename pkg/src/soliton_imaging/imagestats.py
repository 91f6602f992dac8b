"""Beyond-mean-field density statistics of the kink and their pixel reduction.

Point functions (mean density, two-point correlations) are evaluated from
the Bogoliubov mode functions; ``build_image_statistics`` integrates them
over pixels with a fixed Gauss-Legendre rule to give the mean count vector
and covariance matrix used by the Gaussian likelihood.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import units
from .bdg import PhononModeSet, ZeroModeFamily, ZeroModeState, kink, zero_modes
from .meanfield import PixelGrid, pixel_means
from .profiles import DarkSolitonParams

DEFAULT_ORDER = 8


class CovarianceError(ValueError):
    def __init__(self, message, smallest_eigenvalue):
        super().__init__(f"{message} (smallest eigenvalue {smallest_eigenvalue:.6g})")
        self.smallest_eigenvalue = smallest_eigenvalue


@dataclass(frozen=True)
class ThermalOccupation:
    """Bose occupation of the phonons at inverse temperature beta (inf means T = 0)."""

    beta: float = math.inf

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError(f"inverse temperature must be positive, got {self.beta}")

    @property
    def is_zero(self) -> bool:
        return math.isinf(self.beta)

    def occupation(self, E):
        E = np.asarray(E, dtype=float)
        if self.is_zero:
            return np.zeros_like(E)
        with np.errstate(over="ignore"):
            return 1.0 / np.expm1(self.beta * E)

    def to_dict(self) -> dict:
        return {"beta": None if self.is_zero else self.beta}


T_ZERO = ThermalOccupation()


def _check_match(modeset: PhononModeSet, state: ZeroModeState):
    if not (math.isclose(modeset.n, state.n) and math.isclose(modeset.half_length, state.half_length)):
        raise ValueError(
            f"mode set (n={modeset.n}, l={modeset.half_length}) and zero-mode state "
            f"(n={state.n}, l={state.half_length}) describe different systems"
        )


def _zero_terms(modeset, state, x):
    """[(u, u_ad, P^2, Q^2)] for the phase and displacement modes at points x."""
    out = []
    for which in ("theta", "q"):
        fam = ZeroModeFamily(which, modeset.n, modeset.half_length, modeset.q)
        u, _, uad, _ = zero_modes(fam, x)
        if which == "theta":
            out.append((u, uad, state.P_theta2, state.Q_theta2))
        else:
            out.append((u, uad, state.P_q2, state.Q_q2))
    return out


def zero_mode_density(modeset: PhononModeSet, state: ZeroModeState, x):
    """Zero-mode contribution Z(x) to the mean density."""
    _check_match(modeset, state)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    Z = np.zeros(x.shape)
    for u, uad, P2, Q2 in _zero_terms(modeset, state, x):
        Z += np.abs(uad) ** 2 * P2 + np.abs(u) ** 2 * Q2 - np.real(np.conj(u) * uad)
    return Z


def mean_density_bogoliubov(modeset: PhononModeSet, state: ZeroModeState, temp: ThermalOccupation, x):
    """<Psi^dag Psi>(x): condensate, phonon depletion, thermal phonons and zero modes."""
    _check_match(modeset, state)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    U, V = modeset.uv(x)
    nk = temp.occupation(modeset.energies)[:, None]
    phonons = np.sum((1.0 + nk) * np.abs(V) ** 2 + nk * np.abs(U) ** 2, axis=0)
    return kink(x, modeset.n, modeset.q) ** 2 + phonons + zero_mode_density(modeset, state, x)


def correlation_general(modeset: PhononModeSet, state: ZeroModeState, temp: ThermalOccupation, x, y):
    """Mode-sum form of the normally ordered density correlation, matrix over (x, y).

    Note the phonon sum contains the truncated completeness kernel, so this
    equals Phi Phi [C_N + J] with C_N the finite-mode stand-in for delta(x - y).
    """
    _check_match(modeset, state)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    phx, phy = kink(x, modeset.n, modeset.q), kink(y, modeset.n, modeset.q)
    Ux, Vx = modeset.uv(x)
    Uy, Vy = modeset.uv(y)
    # f_k = Phi (u_k + v_k) and f'_k = Phi (v_k + u_k)^* for real Phi
    fx, fy = phx * (Ux + Vx), phy * (Uy + Vy)
    nk = temp.occupation(modeset.energies)[:, None]
    total = ((1.0 + nk) * fx).T @ fy.conj() + (nk * fx.conj()).T @ fy
    for u, uad, P2, Q2, u_y, uad_y in _paired(modeset, state, x, y):
        eta_x = phx * uad + np.conj(uad) * phx
        eta_y = phy * uad_y + np.conj(uad_y) * phy
        phi_x = 1j * phx * u - 1j * np.conj(u) * phx
        phi_y = 1j * phy * u_y - 1j * np.conj(u_y) * phy
        total = total + P2 * np.outer(eta_x, eta_y.conj()) + Q2 * np.outer(phi_x, phi_y.conj())
    return np.real(total)


def _paired(modeset, state, x, y):
    zx, zy = _zero_terms(modeset, state, x), _zero_terms(modeset, state, y)
    for (u, uad, P2, Q2), (u_y, uad_y, _, _) in zip(zx, zy):
        yield u, uad, P2, Q2, u_y, uad_y


def correlation_J_parts(modeset, state, x, y, temp: ThermalOccupation = T_ZERO):
    """(phonon, zero-mode) parts of J(x, y); thermal phonons are folded into the first."""
    _check_match(modeset, state)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    Ux, Vx = modeset.uv(x)
    Uy, Vy = modeset.uv(y)
    ph = 2.0 * Vx.T @ Vy.conj() + Ux.T @ Vy.conj() + Vx.T @ Uy.conj()
    if not temp.is_zero:
        nk = temp.occupation(modeset.energies)[:, None]
        Wx, Wy = Ux + Vx, Uy + Vy
        ph = ph + (nk * Wx).T @ Wy.conj() + (nk * Wx.conj()).T @ Wy
    zero = np.zeros(ph.shape, dtype=complex)
    (ut, uadt, Pt, _), (uq, _, _, Qq) = _zero_terms(modeset, state, x)
    (ut_y, uadt_y, _, _), (uq_y, _, _, _) = _zero_terms(modeset, state, y)
    zero += 4.0 * (Pt * np.outer(uadt, uadt_y.conj()) + Qq * np.outer(uq, uq_y.conj()))
    for u, uad, _, _, u_y, uad_y in _paired(modeset, state, x, y):
        zero -= np.outer(u, uad_y.conj()) + np.outer(uad, u_y.conj())
    return np.real(ph), np.real(zero)


def correlation_J(modeset: PhononModeSet, state: ZeroModeState, x, y, temp: ThermalOccupation = T_ZERO):
    """J(x, y) in P(x, y) = Phi(x) Phi(y) [delta(x - y) + J(x, y)], matrix over (x, y).

    The zero-temperature form is the default; a finite ``temp`` adds the
    thermal phonon term 2 n_k Re[W_k(x) W_k(y)^*], W_k = u_k + v_k.
    """
    ph, zero = correlation_J_parts(modeset, state, x, y, temp)
    return ph + zero


def completeness_kernel(modeset: PhononModeSet, x, y):
    """Real part of the truncated completeness sum including the zero modes."""
    from .bdg import completeness_residual

    return np.real(completeness_residual(modeset, x, y, include_zero_modes=True))


@dataclass
class ImageStatistics:
    """Mean pixel counts and their covariance for a kink at q.

    ``components`` holds the separable covariance pieces
    (meanfield, phonon, goldstone) with cov = meanfield + phonon - goldstone;
    it is empty for the mean-field Poisson model.
    """

    grid: PixelGrid
    q: float
    rho_bar: np.ndarray
    cov: np.ndarray
    model: str
    params: dict = field(default_factory=dict)
    components: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    def __post_init__(self):
        self.rho_bar = np.asarray(self.rho_bar, dtype=float)
        self.cov = np.asarray(self.cov, dtype=float)
        m = self.grid.count
        if self.rho_bar.shape != (m,) or self.cov.shape != (m, m):
            raise ValueError("rho_bar / cov shapes do not match the grid")
        if not np.allclose(self.cov, self.cov.T, rtol=0, atol=1e-12 * max(1.0, np.abs(self.cov).max())):
            raise ValueError("covariance is not symmetric")
        self.cov = 0.5 * (self.cov + self.cov.T)
        if np.any(np.diag(self.cov) <= 0):
            raise CovarianceError("covariance has a non-positive diagonal entry", float(np.min(np.diag(self.cov))))
        if np.any(self.rho_bar < 1.0):
            self.warnings.append(
                f"{int(np.sum(self.rho_bar < 1.0))} pixel(s) with mean count < 1: Gaussian approximation questionable"
            )

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "q": self.q,
            "grid": self.grid.to_dict(),
            "params": self.params,
            "rho_bar": self.rho_bar.tolist(),
            "cov": self.cov.ravel().tolist(),
            "warnings": list(self.warnings),
            "units": units.TAG,
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def meanfield_statistics(params: DarkSolitonParams, grid: PixelGrid, q: float | None = None) -> ImageStatistics:
    """Independent Poisson pixels: cov = diag(rho_bar)."""
    q = params.q if q is None else q
    rho = pixel_means(params, grid, q)
    return ImageStatistics(
        grid, q, rho, np.diag(rho), "meanfield-poisson",
        params={"n": params.n, "v_over_c": params.v_over_c},
    )


def _check_psd(cov):
    lam = np.linalg.eigvalsh(cov)
    if lam[0] < -1e-9 * np.trace(cov):
        raise CovarianceError("covariance is not positive semidefinite", float(lam[0]))
    return float(lam[0])


def build_image_statistics(
    modeset: PhononModeSet,
    state: ZeroModeState,
    temp: ThermalOccupation,
    grid: PixelGrid,
    q: float,
    order: int = DEFAULT_ORDER,
) -> ImageStatistics:
    """Pixel means and covariance from the Bogoliubov description.

    cov = diag(int_px Phi^2) + int int_px Phi Phi J; at finite temperature J
    carries the thermal phonon term.
    """
    _check_match(modeset, state)
    ell = modeset.half_length
    if grid.lo < -ell - 1e-12 or grid.hi > ell + 1e-12:
        raise ValueError(f"pixel window [{grid.lo}, {grid.hi}] extends outside the box [-{ell}, {ell}]")
    ms = modeset.at(q)
    X, W = grid.gauss_nodes(order)
    x = X.ravel()
    rho = np.sum(W * mean_density_bogoliubov(ms, state, temp, x).reshape(X.shape), axis=1)
    phi = kink(x, ms.n, q)
    # A[s, p]: quadrature weight times Phi for node p inside pixel s
    A = np.zeros((grid.count, x.size))
    for s in range(grid.count):
        A[s, s * order : (s + 1) * order] = W[s] * phi[s * order : (s + 1) * order]
    ph, zero = correlation_J_parts(ms, state, x, x, temp)
    mf = np.diag(np.sum(W * (phi**2).reshape(X.shape), axis=1))
    phonon = A @ ph @ A.T
    goldstone = -(A @ zero @ A.T)
    phonon, goldstone = 0.5 * (phonon + phonon.T), 0.5 * (goldstone + goldstone.T)
    cov = mf + phonon - goldstone
    lam_min = _check_psd(cov)
    return ImageStatistics(
        grid,
        q,
        rho,
        cov,
        "bogoliubov",
        params={
            "n": ms.n,
            "half_length": ell,
            "mode_count": ms.mode_count,
            "zero_mode_state": state.to_dict(),
            "temperature": temp.to_dict(),
            "quadrature_order": order,
            "smallest_eigenvalue": lam_min,
        },
        components={"meanfield": mf, "phonon": phonon, "goldstone": goldstone},
    )


def bogoliubov_family(modeset, state, grid, temp: ThermalOccupation = T_ZERO, order: int = DEFAULT_ORDER):
    """q -> ImageStatistics for the Gaussian Fisher information."""

    def family(q):
        return build_image_statistics(modeset, state, temp, grid, q, order)

    return family


def meanfield_family(params: DarkSolitonParams, grid: PixelGrid):
    def family(q):
        return meanfield_statistics(params, grid, q)

    return family
