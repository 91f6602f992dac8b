"""Gaussian-image Fisher information, linear gain filters and their noise budget."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import linalg

from .imagestats import ImageStatistics
from .meanfield import FisherReport, PixelGrid, pixel_means, pixel_slopes
from .profiles import DarkSolitonParams

DEFAULT_FD_STEP = 1e-3
COND_LIMIT = 1e12
FLOOR = 1e-12


def floored(stats: ImageStatistics) -> np.ndarray:
    """Symmetrized covariance with the diagonal floor 1e-12 * n * dx."""
    P = 0.5 * (stats.cov + stats.cov.T)
    n = stats.params.get("n", float(np.max(stats.rho_bar)) / stats.grid.dx)
    floor = FLOOR * n * stats.grid.dx
    d = np.diag(P)
    if np.any(d < floor):
        P = P.copy()
        P[np.diag_indices_from(P)] = np.maximum(d, floor)
    return P


def _stencil(stats_family, q, h):
    s_m, s_0, s_p = stats_family(q - h), stats_family(q), stats_family(q + h)
    P = [floored(s) for s in (s_m, s_0, s_p)]
    return s_0, P, (s_m.rho_bar, s_0.rho_bar, s_p.rho_bar)


def _fisher_terms(stats_family, q, h):
    s0, (Pm, P0, Pp), (rm, _, rp) = _stencil(stats_family, q, h)
    dP = (Pp - Pm) / (2.0 * h)
    d2P = (Pp - 2.0 * P0 + Pm) / h**2
    drho = (rp - rm) / (2.0 * h)
    cho = linalg.cho_factor(P0)
    Pinv_dP = linalg.cho_solve(cho, dP)
    Pinv_d2P = linalg.cho_solve(cho, d2P)
    # d^2 (P^-1) = 2 P^-1 P' P^-1 P' P^-1 - P^-1 P'' P^-1, contracted with P
    tr_d2inv_P = 2.0 * np.trace(Pinv_dP @ Pinv_dP) - np.trace(Pinv_d2P)
    logdets = [np.linalg.slogdet(P)[1] for P in (Pm, P0, Pp)]
    d2_logdet = (logdets[2] - 2.0 * logdets[1] + logdets[0]) / h**2
    quad = float(drho @ linalg.cho_solve(cho, drho))
    literal = 0.5 * (d2_logdet + tr_d2inv_P) + quad
    standard = 0.5 * np.trace(Pinv_dP @ Pinv_dP) + quad
    return s0, P0, drho, {
        "literal": float(literal),
        "standard": float(standard),
        "mean_term": quad,
        "covariance_term": float(standard - quad),
        "d2_logdet": float(d2_logdet),
    }


def gaussian_fisher(stats_family, q: float, fd_step: float = DEFAULT_FD_STEP, check_step: bool = True) -> FisherReport:
    """Fisher information of a Gaussian image whose mean and covariance depend on q.

    ``stats_family`` maps a position to ImageStatistics.  The reported F is
    1/2 {d^2 log det P + sum d^2(P^-1)_sj P_sj} + drho P^-1 drho from 3-point
    stencils; ``parts['standard']`` is the equivalent 1/2 Tr[(P^-1 P')^2] form.
    """
    s0, P0, drho, parts = _fisher_terms(stats_family, q, fd_step)
    notes = []
    cond = float(np.linalg.cond(P0))
    if cond > COND_LIMIT:
        notes.append(f"ill-conditioned covariance (condition number {cond:.3g})")
    F = parts["literal"]
    if check_step:
        F_half = _fisher_terms(stats_family, q, 0.5 * fd_step)[3]["literal"]
        parts["F_half_step"] = F_half
        if abs(F_half - F) > 0.01 * abs(F):
            notes.append(f"finite-difference inconsistency: F={F:.6g} vs {F_half:.6g} at half step")
    parts["condition_number"] = cond
    return FisherReport(
        F=F,
        model=f"gaussian-{s0.model}",
        provenance={"q": q, "fd_step": fd_step, "grid": s0.grid.to_dict(), "stats": s0.params},
        parts=parts,
        warnings=notes,
    )


def mean_slope(stats_family, q: float, fd_step: float = DEFAULT_FD_STEP) -> np.ndarray:
    """Central-difference d rho_bar / dq."""
    return (stats_family(q + fd_step).rho_bar - stats_family(q - fd_step).rho_bar) / (2.0 * fd_step)


@dataclass
class GainFunction:
    """Per-pixel weights g_s of the linear signal S = dx * sum g_s rho_s."""

    grid: PixelGrid
    values: np.ndarray
    normalization: str = "max-abs"
    scale: float = 1.0
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.count,):
            raise ValueError("gain length does not match the grid")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("gain has non-finite entries")

    @classmethod
    def normalized(cls, grid, raw, **info) -> "GainFunction":
        raw = np.asarray(raw, dtype=float)
        top = float(np.max(np.abs(raw)))
        if top == 0.0:
            raise ValueError("gain is identically zero")
        return cls(grid, raw / top, "max-abs", top, info)

    def signal(self, counts) -> np.ndarray:
        return self.grid.dx * (np.asarray(counts) @ self.values)


def _pixel_profile(profile, grid, q, order=8, h=1e-4):
    if isinstance(profile, DarkSolitonParams):
        return pixel_means(profile, grid, q), pixel_slopes(profile, grid, q)
    X, W = grid.gauss_nodes(order)
    rho = np.sum(W * profile.shifted(q).density(X), axis=1)
    up = np.sum(W * profile.shifted(q + h).density(X), axis=1)
    dn = np.sum(W * profile.shifted(q - h).density(X), axis=1)
    return rho, (up - dn) / (2.0 * h)


def optimal_gain_meanfield(profile, grid: PixelGrid, q: float | None = None) -> GainFunction:
    """g_s proportional to (d rho_bar_s / dq) / rho_bar_s, the Poisson-optimal weights.

    The pixel ratio stays finite on the notch pixel because the pixel integral
    of the density is positive there.
    """
    q = profile.q if q is None else q
    rho, slope = _pixel_profile(profile, grid, q)
    if np.any(rho <= 0):
        raise ValueError("non-positive mean pixel count")
    return GainFunction.normalized(grid, slope / rho, kind="optimal-meanfield", q=q)


def almost_optimal_gain(stats: ImageStatistics, drho_dq) -> GainFunction:
    """Solve P g = d rho_bar / dq (Cholesky, with a reported ridge if that fails)."""
    drho = np.asarray(drho_dq, dtype=float)
    P = floored(stats)
    ridge = 0.0
    target = 1e-10 * np.linalg.norm(drho)
    scale = np.trace(P) / len(P)
    g = None
    while True:
        A = P + ridge * np.eye(len(P))
        try:
            g = linalg.cho_solve(linalg.cho_factor(A), drho)
            if np.linalg.norm(A @ g - drho) <= target:
                break
        except linalg.LinAlgError:
            pass
        ridge = 1e-14 * scale if ridge == 0.0 else ridge * 10.0
        if ridge > 1e-2 * scale:
            raise linalg.LinAlgError("covariance solve failed even with ridge regularization")
    residual = float(np.linalg.norm(P @ g - drho))
    return GainFunction.normalized(stats.grid, g, kind="almost-optimal", ridge=ridge, residual=residual)


@dataclass(frozen=True)
class NoiseSplit:
    total: float
    meanfield: float
    phonon: float
    goldstone: float

    def __post_init__(self):
        recomposed = self.meanfield + self.phonon - self.goldstone
        if abs(recomposed - self.total) > 1e-10 * max(abs(self.total), 1e-300):
            raise ValueError(f"noise split does not add up: {recomposed!r} vs {self.total!r}")

    def to_dict(self) -> dict:
        return asdict(self)


def snr_and_split(stats: ImageStatistics, gain: GainFunction, drho_dq):
    """Return (slope of S, variance of S, NoiseSplit) for the gain on these statistics."""
    g = gain.values
    dx = stats.grid.dx
    slope = float(g @ np.asarray(drho_dq, dtype=float)) * dx

    def form(M):
        return float(g @ M @ g) * dx**2

    total = form(stats.cov)
    if stats.components:
        c = stats.components
        split = NoiseSplit(total, form(c["meanfield"]), form(c["phonon"]), form(c["goldstone"]))
    else:
        split = NoiseSplit(total, total, 0.0, 0.0)
    return slope, total, split


def snr_information(slope: float, variance: float) -> float:
    """slope^2 / Var(S): the information an estimator built from S attains."""
    return slope**2 / variance if variance > 0 else math.inf
