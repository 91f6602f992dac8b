"""Fisher information under single-mode (Poisson) counting statistics.

Three routes are provided: the continuum integral 4 * int (d|Phi|/dq)^2,
the closed form for the dark soliton, and sums over finite pixels built from
the exact pixel integrals of the soliton density.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import integrate

from . import units
from .profiles import DarkSolitonParams, TrappedSolitonParams

# documented trap conversions; not recomputed (their assumptions are not fully pinned down)
TRAP_CONSTANTS = {
    "F_trap_over_N0_times_ax2": 14.1,
    "F_hom_over_F_trap": 0.11,
    "note": "local-density results quoted for comparison; corrections O(xi/R_TF) neglected",
}


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""

    def __init__(self, message, estimate, residual):
        super().__init__(f"{message} (estimate={estimate!r}, residual={residual!r})")
        self.estimate = estimate
        self.residual = residual


@dataclass(frozen=True)
class PixelGrid:
    """Contiguous row of pixels [s*dx, (s+1)*dx) for s = first .. first+count-1."""

    dx: float
    first: int
    count: int

    def __post_init__(self):
        if not self.dx > 0:
            raise ValueError(f"pixel width must be positive, got {self.dx}")
        if self.count < 2:
            raise ValueError(f"need at least 2 pixels, got {self.count}")

    @classmethod
    def from_window(cls, half_length: float, dx: float) -> "PixelGrid":
        """All whole pixels inside [-half_length, half_length]."""
        if not dx > 0:
            raise ValueError(f"pixel width must be positive, got {dx}")
        eps = 1e-9
        lo = math.ceil(-half_length / dx - eps)
        hi = math.floor(half_length / dx + eps)
        return cls(dx, lo, hi - lo)

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.first, self.first + self.count)

    @property
    def edges(self) -> np.ndarray:
        return np.arange(self.first, self.first + self.count + 1) * self.dx

    @property
    def left(self) -> np.ndarray:
        return self.indices * self.dx

    @property
    def centers(self) -> np.ndarray:
        return (self.indices + 0.5) * self.dx

    @property
    def lo(self) -> float:
        return self.first * self.dx

    @property
    def hi(self) -> float:
        return (self.first + self.count) * self.dx

    @property
    def half_length(self) -> float:
        return 0.5 * (self.hi - self.lo)

    def pixel_of(self, x: float) -> int:
        """Index s with x in [x_s, x_s + dx)."""
        return int(math.floor(x / self.dx))

    def gauss_nodes(self, order: int = 8):
        """Gauss-Legendre nodes and weights per pixel, each of shape (count, order)."""
        t, w = np.polynomial.legendre.leggauss(order)
        half = 0.5 * self.dx
        x = self.centers[:, None] + half * t[None, :]
        return x, np.broadcast_to(half * w, x.shape).copy()

    def to_dict(self) -> dict:
        return {"dx": self.dx, "first": self.first, "count": self.count, "lo": self.lo, "hi": self.hi}


@dataclass
class FisherReport:
    """Fisher information F with its Cramer-Rao width and provenance."""

    F: float
    model: str
    xi: float = units.XI
    provenance: dict = field(default_factory=dict)
    parts: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    def __post_init__(self):
        if not (self.F > 0 and math.isfinite(self.F)):
            raise ValueError(f"Fisher information must be positive and finite, got {self.F}")

    @property
    def F_scaled(self) -> float:
        return self.F * self.xi**2

    @property
    def crb_sigma(self) -> float:
        return self.F ** -0.5

    def to_dict(self) -> dict:
        d = asdict(self)
        d.update(F_scaled=self.F_scaled, crb_sigma=self.crb_sigma, units=units.TAG)
        return d


def _quad(func, a, b, tol, points=None, limit=400):
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(func, a, b, epsabs=0.0, epsrel=tol, limit=limit, points=points)
        except integrate.IntegrationWarning as exc:
            # rerun quietly to recover the best estimate for the error record
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, err = integrate.quad(func, a, b, epsabs=0.0, epsrel=tol, limit=limit, points=points)
            raise QuadratureError(str(exc).splitlines()[0], val, err) from None
    return val, err


def fisher_poisson_continuum(profile, window: PixelGrid | None = None, quad_tol: float = 1e-8) -> FisherReport:
    """F = 4 * int (d|Phi|/dq)^2 over the window (a plane for 2D profiles)."""
    notes = []
    q = profile.q
    if profile.ndim == 2:
        return _fisher_plane(profile, quad_tol)

    reach = 10.0 * max(profile.width, getattr(profile, "xi", 1.0))
    if window is None:
        lo, hi = q - max(reach, 10.0), q + max(reach, 10.0)
    else:
        lo, hi = window.lo, window.hi
        if lo > q - reach or hi < q + reach:
            notes.append("window covers less than 10 dip widths on one side of q")
    points = [q] if lo < q < hi else None
    val, err = _quad(lambda x: 4.0 * profile.abs_dq(x) ** 2, lo, hi, quad_tol, points=points)
    xi = getattr(profile, "xi", getattr(profile, "xi0", units.XI))
    return FisherReport(
        F=val,
        model="poisson-continuum",
        xi=xi,
        provenance={"profile": type(profile).__name__, **_echo(profile), "window": [lo, hi], "quad_tol": quad_tol},
        parts={"quad_error": err},
        warnings=notes,
    )


def _radial_cutoff(profile, rel=1e-12):
    # double R until the angular maximum of the integrand drops below rel * its peak
    def peak(r):
        return r * profile.abs_dq_polar(r, 0.0) ** 2

    r_grid = np.linspace(0.0, 10.0 * profile.width, 2001)
    top = float(np.max(peak(r_grid)))
    R = 10.0 * profile.width
    while peak(R) > rel * top:
        R *= 2.0
    return R


def _fisher_plane(profile, quad_tol):
    R = _radial_cutoff(profile)

    def radial(r):
        inner, _ = integrate.quad(
            lambda phi: profile.abs_dq_polar(r, phi) ** 2, 0.0, 2.0 * math.pi, epsabs=0.0, epsrel=quad_tol * 0.1
        )
        return 4.0 * r * inner

    val, err = _quad(radial, 0.0, R, quad_tol)
    return FisherReport(
        F=val,
        model="poisson-continuum",
        xi=profile.xi,
        provenance={"profile": type(profile).__name__, **_echo(profile), "radial_cutoff": R, "quad_tol": quad_tol},
        parts={"quad_error": err},
    )


def _echo(obj) -> dict:
    return {k: v for k, v in vars(obj).items() if isinstance(v, (int, float, str))}


def fisher_dark_soliton_closed(params: DarkSolitonParams) -> FisherReport:
    """Closed-form continuum Poisson information of the grey soliton (independent of q)."""
    nu = params.v_over_c
    n, xi, k = params.n, params.xi, params.kappa
    root = math.sqrt(2.0) * xi * k  # = sqrt(1 - nu^2)
    F = 8.0 * n / 3.0 * (2.0 + nu**2) * k
    if nu > 0:
        F += (
            4.0 * n * math.sqrt(2.0) / xi * nu
            * (math.atan((nu - 1.0 / (2.0 * nu)) / root) - math.atan(nu / root))
        )
    return FisherReport(F=F, model="closed-form", xi=xi, provenance={"profile": "DarkSolitonParams", **_echo(params)})


def _sech(z):
    e = np.exp(-np.abs(z))
    return 2.0 * e / (1.0 + e * e)


def pixel_means(params: DarkSolitonParams, grid: PixelGrid, q: float = 0.0) -> np.ndarray:
    """Exact pixel integrals of the soliton density, rho_bar_s(q)."""
    k = params.kappa
    a = k * (grid.left - q)
    b = a + k * grid.dx
    # tanh(b) - tanh(a) written without cancellation
    dtanh = math.sinh(k * grid.dx) * _sech(a) * _sech(b)
    return params.n * grid.dx - params.n * params.depth / k * dtanh


def pixel_slopes(params: DarkSolitonParams, grid: PixelGrid, q: float = 0.0) -> np.ndarray:
    """d rho_bar_s / dq."""
    k = params.kappa
    a = k * (grid.left - q)
    return params.n * params.depth * (_sech(a + k * grid.dx) ** 2 - _sech(a) ** 2)


def _pixel_sums(params, grid, q, mask=None):
    rho = pixel_means(params, grid, q)
    slope = pixel_slopes(params, grid, q)
    if mask is not None:
        rho, slope = rho[mask], slope[mask]
    if np.any(rho <= 0):
        bad = int(np.flatnonzero(rho <= 0)[0])
        raise ValueError(f"non-positive mean pixel count {rho[bad]!r} (unphysical)")
    first = float(np.sum(slope**2 / rho))
    second = 0.5 * float(np.sum(slope**2 / rho**2))
    notes = []
    if np.any(rho < 1.0):
        notes.append(f"{int(np.sum(rho < 1.0))} pixel(s) with mean count < 1: Gaussian correction unreliable")
    return first, second, notes


def fisher_pixelized_poisson(params: DarkSolitonParams, grid: PixelGrid, q: float | None = None) -> FisherReport:
    """Pixel-sum information: Poisson part plus the Gaussian correction term.

    ``F`` is the sum of both terms; ``parts['poisson']`` is the pure Poisson
    sum (the exact information of independent Poisson pixels) and
    ``parts['gaussian_correction']`` the half-sum over rho_bar^2.
    """
    q = params.q if q is None else q
    first, second, notes = _pixel_sums(params, grid, q)
    return FisherReport(
        F=first + second,
        model="gaussian-pixel",
        xi=params.xi,
        provenance={"profile": "DarkSolitonParams", **_echo(params), "q": q, "grid": grid.to_dict()},
        parts={"poisson": first, "gaussian_correction": second},
        warnings=notes,
    )


def fisher_poisson_pixels(params: DarkSolitonParams, grid: PixelGrid, q: float | None = None) -> FisherReport:
    """Exact information of independent Poisson pixels (first sum only)."""
    q = params.q if q is None else q
    first, second, notes = _pixel_sums(params, grid, q)
    return FisherReport(
        F=first,
        model="poisson-pixel",
        xi=params.xi,
        provenance={"profile": "DarkSolitonParams", **_echo(params), "q": q, "grid": grid.to_dict()},
        parts={"poisson": first, "gaussian_correction": second},
        warnings=[w for w in notes if "Gaussian" not in w],
    )


def fisher_box(params: DarkSolitonParams, grid: PixelGrid, box_half_length: float) -> FisherReport:
    """Poisson pixel sum restricted to pixels with |x_s| <= box_half_length."""
    notes = []
    if abs(params.q) + 5.0 * params.xi >= box_half_length:
        notes.append("soliton closer than 5 healing lengths to the box wall")
    mask = np.abs(grid.left) <= box_half_length
    if not np.any(mask):
        raise ValueError("no pixel inside the box")
    first, second, more = _pixel_sums(params, grid, params.q, mask)
    return FisherReport(
        F=first,
        model="poisson-pixel",
        xi=params.xi,
        provenance={
            "profile": "DarkSolitonParams",
            **_echo(params),
            "grid": grid.to_dict(),
            "box_half_length": box_half_length,
        },
        parts={"poisson": first, "gaussian_correction": second, "pixels_in_box": int(mask.sum())},
        warnings=notes + [w for w in more if "Gaussian" not in w],
    )


def fisher_trapped(params: TrappedSolitonParams, method: str = "closed", quad_tol: float = 1e-8) -> FisherReport:
    """Information of a kink near the centre of a Thomas-Fermi cloud.

    ``method='closed'`` uses the local-density result (16 / 3 sqrt 2) n0 / xi0;
    ``method='quadrature'`` integrates the trapped profile directly.
    """
    if params.R_TF < 10.0 * params.xi0:
        raise ValueError(f"R_TF={params.R_TF} < 10 xi0: Thomas-Fermi background not valid")
    prov = {"profile": "TrappedSolitonParams", **_echo(params), "constants": TRAP_CONSTANTS}
    if method == "closed":
        F = 16.0 / (3.0 * math.sqrt(2.0)) * params.n0 / params.xi0
        return FisherReport(F=F, model="closed-form", xi=params.xi0, provenance=prov)
    if method == "quadrature":
        q = params.q
        val, err = _quad(
            lambda x: 4.0 * params.abs_dq(x) ** 2, -params.R_TF, params.R_TF, quad_tol, points=[q]
        )
        return FisherReport(F=val, model="poisson-continuum", xi=params.xi0, provenance=prov, parts={"quad_error": err})
    raise ValueError(f"unknown method {method!r}")
