"""Analytic order parameters and their mean-field densities.

Every profile is an immutable record that knows its density and the exact
derivative of the amplitude modulus with respect to the defect position q.
The Fisher-information integrals only ever need |Phi| and d|Phi|/dq, so the
phase is implemented only where it is cheap and useful (dark soliton, vortex).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import units


def _sech2(z):
    return 1.0 / np.cosh(z) ** 2


def _branch_sign(y):
    # half-open convention: the point x = q belongs to the right branch
    return np.where(np.asarray(y) >= 0.0, 1.0, -1.0)


@dataclass(frozen=True)
class DarkSolitonParams:
    """Grey/dark soliton on a homogeneous background.

    n is the background linear density, v_over_c the velocity as a fraction of
    the sound speed, q the position and xi the healing length (1 in internal
    units; other values are only used for scaling studies).
    """

    n: float
    v_over_c: float = 0.0
    q: float = 0.0
    xi: float = units.XI

    ndim = 1

    def __post_init__(self):
        if not self.n > 0:
            raise ValueError(f"background density must be positive, got n={self.n}")
        if not 0.0 <= self.v_over_c < 1.0:
            raise ValueError(f"need 0 <= v/c < 1, got {self.v_over_c}")
        if not self.xi > 0:
            raise ValueError(f"healing length must be positive, got {self.xi}")

    @property
    def kappa(self) -> float:
        return math.sqrt(1.0 - self.v_over_c**2) / (math.sqrt(2.0) * self.xi)

    @property
    def width(self) -> float:
        return 1.0 / self.kappa

    @property
    def depth(self) -> float:
        """Fractional depth 1 - v^2/c^2 of the density dip."""
        return 1.0 - self.v_over_c**2

    def shifted(self, q: float) -> "DarkSolitonParams":
        return DarkSolitonParams(self.n, self.v_over_c, q, self.xi)

    def amplitude(self, x):
        nu = self.v_over_c
        t = np.tanh(self.kappa * (np.asarray(x, dtype=float) - self.q))
        return math.sqrt(self.n) * (1j * nu + math.sqrt(1.0 - nu**2) * t)

    def density(self, x):
        y = np.asarray(x, dtype=float) - self.q
        return self.n * (1.0 - self.depth * _sech2(self.kappa * y))

    def density_dq(self, x):
        """d|Phi|^2/dq."""
        y = np.asarray(x, dtype=float) - self.q
        k = self.kappa
        return -2.0 * self.n * self.depth * k * _sech2(k * y) * np.tanh(k * y)

    def abs_dq(self, x):
        """d|Phi|/dq; at v = 0 the kink branch sign is taken per side of q."""
        y = np.asarray(x, dtype=float) - self.q
        k = self.kappa
        if self.v_over_c == 0.0:
            return -math.sqrt(self.n) * k * _sech2(k * y) * _branch_sign(y)
        return self.density_dq(x) / (2.0 * np.sqrt(self.density(x)))


@dataclass(frozen=True)
class QuinticSolitonParams:
    """Dark soliton of the quintic (three-body) nonlinear equation.

    Units hbar = m = 1 with the universal coupling gamma = pi^2 / 2, so the
    inverse width is 2 pi n sqrt(1 - v^2/c^2).
    """

    n: float
    v_over_c: float = 0.0
    q: float = 0.0

    ndim = 1

    def __post_init__(self):
        if not self.n > 0:
            raise ValueError(f"background density must be positive, got n={self.n}")
        if not 0.0 <= self.v_over_c <= 1.0:
            raise ValueError(f"need 0 <= v/c <= 1, got {self.v_over_c}")

    @property
    def kappa(self) -> float:
        return 2.0 * math.pi * self.n * math.sqrt(1.0 - self.v_over_c**2)

    @property
    def width(self) -> float:
        # v = c has no dip; keep a finite nominal scale
        return 1.0 / self.kappa if self.kappa > 0 else 1.0 / (2.0 * math.pi * self.n)

    def shifted(self, q: float) -> "QuinticSolitonParams":
        return QuinticSolitonParams(self.n, self.v_over_c, q)

    def _coeffs(self):
        nu2 = self.v_over_c**2
        return 3.0 * (1.0 - nu2), math.sqrt(1.0 + 3.0 * nu2)

    def _decay(self, x):
        # e = exp(-|kappa y|) keeps cosh and sinh ratios finite far from the notch
        z = self.kappa * (np.asarray(x, dtype=float) - self.q)
        return z, np.exp(-np.abs(z))

    def f2(self, x):
        a, b = self._coeffs()
        _, e = self._decay(x)
        return 1.0 - 2.0 * a * e / (4.0 * e + b * (1.0 + e * e))

    def density(self, x):
        return self.n * self.f2(x)

    def density_dq(self, x):
        a, b = self._coeffs()
        z, e = self._decay(x)
        ratio = 2.0 * e * (1.0 - e * e) / (4.0 * e + b * (1.0 + e * e)) ** 2
        return -self.n * a * b * self.kappa * np.sign(z) * ratio

    def abs_dq(self, x):
        y = np.asarray(x, dtype=float) - self.q
        if self.v_over_c != 0.0:
            return self.density_dq(x) / (2.0 * np.sqrt(self.density(x)))
        # f = sqrt(2) |sinh(k y / 2)| / sqrt(2 + cosh(k y)); regular form near the notch
        k = self.kappa
        h = np.clip(0.5 * k * y, -1.0, 1.0)
        c = np.cosh(2.0 * h)
        df = math.sqrt(2.0) * 0.5 * k * (np.cosh(h) * (2.0 + c) - np.sinh(h) * np.sinh(2.0 * h)) / (2.0 + c) ** 1.5
        near = -math.sqrt(self.n) * df * _branch_sign(y)
        with np.errstate(divide="ignore", invalid="ignore"):
            far = self.density_dq(x) / (2.0 * np.sqrt(self.density(x)))
        return np.where(np.abs(0.5 * k * y) <= 1.0, near, far)


@dataclass(frozen=True)
class VortexParams:
    """Singly charged straight vortex line along z at (q, 0).

    n is the areal density (integrated along z), L the axial length.
    """

    n: float
    L: float = 1.0
    q: float = 0.0
    winding: int = 1
    xi: float = units.XI

    ndim = 2

    def __post_init__(self):
        if not self.n > 0:
            raise ValueError(f"areal density must be positive, got n={self.n}")
        if not self.L > 0:
            raise ValueError(f"axial length must be positive, got L={self.L}")
        if abs(self.winding) != 1:
            raise ValueError(f"only singly charged vortices are supported, got s={self.winding}")

    @property
    def width(self) -> float:
        return math.sqrt(2.0) * self.xi

    def shifted(self, q: float) -> "VortexParams":
        return VortexParams(self.n, self.L, q, self.winding, self.xi)

    def f2(self, x, y):
        r2 = (np.asarray(x, dtype=float) - self.q) ** 2 + np.asarray(y, dtype=float) ** 2
        return r2 / (2.0 * self.xi**2 + r2)

    def amplitude(self, x, y):
        dx = np.asarray(x, dtype=float) - self.q
        phase = np.exp(1j * self.winding * np.arctan2(y, dx))
        return np.sqrt(self.n / self.L * self.f2(x, y)) * phase

    def density(self, x, y):
        """Volume density |Phi|^2 = (n / L) f^2."""
        return self.n / self.L * self.f2(x, y)

    def areal_density(self, x, y):
        return self.n * self.f2(x, y)

    def abs_dq_polar(self, r, phi):
        """d|Phi|/dq of the z-integrated amplitude sqrt(n) f, in polar coordinates about the core."""
        r = np.asarray(r, dtype=float)
        s2 = 2.0 * self.xi**2
        return -math.sqrt(self.n) * np.cos(phi) * s2 / (s2 + r**2) ** 1.5

    def abs_dq(self, x, y):
        dx = np.asarray(x, dtype=float) - self.q
        return self.abs_dq_polar(np.hypot(dx, y), np.arctan2(y, dx))


@dataclass(frozen=True)
class TrappedSolitonParams:
    """Kink on a Thomas-Fermi background in a harmonic trap.

    xi0 is the healing length at the background density n0; the default unit
    value corresponds to measuring lengths in xi0.
    """

    n0: float
    R_TF: float
    q: float = 0.0
    xi0: float = units.XI

    ndim = 1

    def __post_init__(self):
        if not self.n0 > 0:
            raise ValueError(f"peak density must be positive, got n0={self.n0}")
        if not (self.R_TF > 0 and self.xi0 > 0):
            raise ValueError("R_TF and xi0 must be positive")
        if abs(self.q) > self.R_TF:
            raise ValueError(f"soliton position q={self.q} outside the Thomas-Fermi radius {self.R_TF}")

    @classmethod
    def from_coupling(cls, n0: float, g: float, R_TF: float, q: float = 0.0) -> "TrappedSolitonParams":
        """Build with xi0 = hbar / sqrt(2 m g n0)."""
        return cls(n0, R_TF, q, 1.0 / math.sqrt(2.0 * units.MASS * g * n0) * units.HBAR)

    @property
    def width(self) -> float:
        return math.sqrt(2.0) * self.xi0

    def shifted(self, q: float) -> "TrappedSolitonParams":
        return TrappedSolitonParams(self.n0, self.R_TF, q, self.xi0)

    def background(self, x):
        x = np.asarray(x, dtype=float)
        return self.n0 * np.clip(1.0 - (x / self.R_TF) ** 2, 0.0, None)

    def density(self, x):
        y = np.asarray(x, dtype=float) - self.q
        return self.background(x) * np.tanh(y / self.width) ** 2

    def abs_dq(self, x):
        y = np.asarray(x, dtype=float) - self.q
        w = self.width
        return -np.sqrt(self.background(x)) * _sech2(y / w) / w * _branch_sign(y)


def soliton_amplitude(params: DarkSolitonParams, x):
    return params.amplitude(x)


def soliton_density_dq(params: DarkSolitonParams, x):
    """Return (|Phi|^2, d|Phi|/dq) at x."""
    return params.density(x), params.abs_dq(x)


def quintic_density(params: QuinticSolitonParams, x):
    return params.density(x)


def vortex_density(params: VortexParams, x, y):
    return params.density(x, y)


def trapped_soliton_density(params: TrappedSolitonParams, x):
    return params.density(x)
