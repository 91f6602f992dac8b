"""Bogoliubov excitations of a kink at rest in a periodic box [-l, l].

Phonon modes use the closed-form solutions on the infinite line, quantized
by the phase shift the kink imprints on a phonon.  The two Goldstone modes
(global phase and kink displacement) come with adjoint partners, and the
displacement mode is given a Gaussian quantum state.

All formulas assume kappa * l >> 1; terms of order exp(-2 kappa l) are
dropped, which is why box lengths below 5 healing lengths are refused.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.optimize import brentq

from .units import G_TIMES_N, KAPPA0, MC2, SOUND_SPEED

MIN_HALF_LENGTH = 5.0


class BracketError(RuntimeError):
    pass


def phase_shift(k):
    """Phase 2 arctan(2 kappa / k) picked up by a phonon crossing the kink (k -> 0+ limit at 0)."""
    k = np.asarray(k, dtype=float)
    return 2.0 * np.where(k < 0, -1.0, 1.0) * np.arctan2(2.0 * KAPPA0, np.abs(k))


def quantization_lhs(k, half_length):
    return 2.0 * k * half_length + phase_shift(k)


def energy(k):
    """Bogoliubov dispersion hbar c |k| sqrt(1 + k^2 / 4 kappa^2)."""
    k = np.asarray(k, dtype=float)
    return SOUND_SPEED * np.abs(k) * np.sqrt(1.0 + k**2 / (4.0 * KAPPA0**2))


def kink(x, n, q):
    """Real order parameter sqrt(n) tanh(kappa (x - q)) (global phase theta = 0)."""
    return math.sqrt(n) * np.tanh(KAPPA0 * (np.asarray(x, dtype=float) - q))


@dataclass(frozen=True, eq=False)
class PhononModeSet:
    """Quantized phonon modes j = +-1 .. +-pairs for a kink at q.

    ``wavenumbers`` is ordered as j = 1..pairs followed by j = -1..-pairs.
    """

    half_length: float
    wavenumbers: np.ndarray
    n: float = 1.0
    q: float = 0.0

    @property
    def pairs(self) -> int:
        return len(self.wavenumbers) // 2

    @property
    def mode_count(self) -> int:
        return len(self.wavenumbers)

    @property
    def j(self) -> np.ndarray:
        p = np.arange(1, self.pairs + 1)
        return np.concatenate([p, -p])

    @cached_property
    def energies(self) -> np.ndarray:
        return energy(self.wavenumbers)

    @cached_property
    def norms(self) -> np.ndarray:
        """Closed-form normalization M_k (odd in k)."""
        k = self.wavenumbers
        kap, ell = KAPPA0, self.half_length
        E = self.energies
        bracket = ell * kap * (k**2 / (2.0 * kap**2) + 2.0) - 1.0
        return kap / (2.0 * k) * np.sqrt(kap * G_TIMES_N / (2.0 * E)) / np.sqrt(bracket)

    @cached_property
    def beta(self):
        k = self.wavenumbers
        r = (k / KAPPA0) ** 2
        s = 2.0 * self.energies / MC2
        return r + s, r - s

    def index(self, j: int) -> int:
        hits = np.flatnonzero(self.j == j)
        if len(hits) == 0:
            raise KeyError(f"mode j={j} not in this set (pairs={self.pairs})")
        return int(hits[0])

    def at(self, q: float) -> "PhononModeSet":
        """Same spectrum with the kink moved to q (k_j does not depend on q)."""
        return PhononModeSet(self.half_length, self.wavenumbers, self.n, q)

    def truncated(self, pairs: int) -> "PhononModeSet":
        p = self.pairs
        if pairs > p:
            raise ValueError(f"only {p} pairs available")
        k = np.concatenate([self.wavenumbers[:pairs], self.wavenumbers[p : p + pairs]])
        return PhononModeSet(self.half_length, k, self.n, self.q)

    def uv(self, x):
        """Mode functions u_k(x), v_k(x) as complex arrays of shape (modes, points)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        k = self.wavenumbers[:, None]
        y = KAPPA0 * (x[None, :] - self.q)
        sech2 = 1.0 / np.cosh(y) ** 2
        core = 1j * np.tanh(y) + k / (2.0 * KAPPA0)
        pref = self.norms[:, None] * np.exp(1j * k * x[None, :])
        bp, bm = self.beta
        head = (k / KAPPA0) * sech2
        return pref * (head + bp[:, None] * core), pref * (head + bm[:, None] * core)

    def residuals(self) -> np.ndarray:
        return quantization_lhs(self.wavenumbers, self.half_length) - 2.0 * math.pi * self.j


def solve_wavenumbers(half_length: float, pair_count: int, n: float = 1.0, q: float = 0.0) -> PhononModeSet:
    """Roots of 2 k l + 2 arctan(2 kappa / k) = 2 pi j, one per bracket ((j-1) pi/l, j pi/l)."""
    if half_length < MIN_HALF_LENGTH:
        raise ValueError(f"box half-length {half_length} < {MIN_HALF_LENGTH} healing lengths")
    if pair_count < 1:
        raise ValueError("need at least one mode pair")
    ks = np.empty(pair_count)
    for j in range(1, pair_count + 1):
        lo, hi = (j - 1) * math.pi / half_length, j * math.pi / half_length

        def f(k, j=j):
            return quantization_lhs(k, half_length) - 2.0 * math.pi * j

        if not f(lo) < 0.0 < f(hi):
            raise BracketError(f"no sign change for j={j} on [{lo}, {hi}]")
        ks[j - 1] = brentq(f, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=200)
    modes = PhononModeSet(half_length, np.concatenate([ks, -ks]), n, q)
    worst = float(np.max(np.abs(modes.residuals())))
    if worst > 1e-10:
        raise BracketError(f"quantization residual {worst:.3g} above 1e-10")
    return modes


def eval_phonon(modeset: PhononModeSet, j: int, x):
    """(u_k(x), v_k(x)) for the mode with quantum number j."""
    i = modeset.index(j)
    u, v = modeset.uv(x)
    return u[i], v[i]


@dataclass(frozen=True)
class ZeroModeFamily:
    """Goldstone mode of the broken phase ('theta') or translation ('q') symmetry."""

    which: str
    n: float
    half_length: float
    q: float = 0.0

    def __post_init__(self):
        if self.which not in ("theta", "q"):
            raise ValueError(f"unknown zero mode {self.which!r}")
        if self.N0 <= 0:
            raise ValueError("box too small: condensate number N0 <= 0")

    @property
    def kappa(self) -> float:
        return KAPPA0

    @property
    def N0(self) -> float:
        return condensate_number(self.n, self.half_length)

    @property
    def effective_mass(self):
        """Generalized eigenvalue of the displacement mode, m_q = -4 m n / kappa (metadata only)."""
        return -4.0 * self.n / KAPPA0 if self.which == "q" else None

    def __call__(self, x):
        return zero_modes(self, x)


def condensate_number(n: float, half_length: float) -> float:
    """N0 = 2 l n - 2 n / kappa: box atoms minus those missing from the notch."""
    return 2.0 * half_length * n - 2.0 * n / KAPPA0


def zero_modes(family: ZeroModeFamily, x):
    """Return (u, v, u_ad, v_ad) with v = -u*, v_ad = u_ad*."""
    x = np.asarray(x, dtype=float)
    n, q, kap = family.n, family.q, KAPPA0
    sech2 = 1.0 / np.cosh(kap * (x - q)) ** 2
    u_q = -1j * kap * math.sqrt(n) * sech2
    if family.which == "q":
        u = u_q
        u_ad = np.full(x.shape, -1j / (4.0 * math.sqrt(n)), dtype=complex)
    else:
        phi = kink(x, n, q)
        u = phi.astype(complex)
        # (x - q) keeps the adjoint covariant under translation of the kink
        u_ad = kap / (2.0 * (family.N0 * kap + n)) * (phi + 1j * (x - q) * u_q)
    return u, -np.conj(u), u_ad, np.conj(u_ad)


@dataclass(frozen=True)
class ZeroModeState:
    """Gaussian state of the zero modes.

    kind is 'squeezed' (parameter zeta > 0) or 'thermal' (parameter tau > 0,
    a density).  The phase mode is always the coherent-state value
    <P_theta^2> = N0, <Q_theta^2> = 1 / (4 N0).
    """

    kind: str
    parameter: float
    n: float
    half_length: float

    def __post_init__(self):
        if self.kind not in ("squeezed", "thermal"):
            raise ValueError(f"unknown zero-mode state kind {self.kind!r}")
        if not self.parameter > 0:
            raise ValueError(f"{self.kind} parameter must be positive, got {self.parameter}")

    @property
    def _coth(self) -> float:
        z = KAPPA0 / (4.0 * self.parameter)
        return 1.0 if z > 350.0 else 1.0 / math.tanh(z)

    @property
    def P_q2(self) -> float:
        base = 2.0 * self.n * KAPPA0
        return base / self.parameter if self.kind == "squeezed" else base * self._coth

    @property
    def Q_q2(self) -> float:
        base = 1.0 / (8.0 * self.n * KAPPA0)
        return base * self.parameter if self.kind == "squeezed" else base * self._coth

    @property
    def PQ_anticommutator(self) -> float:
        return 0.0

    @property
    def N0(self) -> float:
        return condensate_number(self.n, self.half_length)

    @property
    def P_theta2(self) -> float:
        return self.N0

    @property
    def Q_theta2(self) -> float:
        return 1.0 / (4.0 * self.N0)

    @property
    def h_mean(self) -> float:
        """<h> of the pinning 'Hamiltonian' P^2/16n + n kappa^2 Q^2 - kappa/4."""
        kap = KAPPA0
        if self.kind == "squeezed":
            z = self.parameter
            return kap / 8.0 * (1.0 / z + z - 2.0)
        return 0.5 * kap / math.expm1(kap / (2.0 * self.parameter))

    @property
    def uncertainty_product(self) -> float:
        return self.P_q2 * self.Q_q2

    def label(self) -> str:
        return f"zeta={self.parameter:g}" if self.kind == "squeezed" else f"tau={self.parameter:g}"

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "parameter": self.parameter,
            "P_q2": self.P_q2,
            "Q_q2": self.Q_q2,
            "P_theta2": self.P_theta2,
            "Q_theta2": self.Q_theta2,
            "h_mean": self.h_mean,
        }


def zero_mode_state(kind: str, parameter: float, n: float = 1.0, half_length: float = 10.0) -> ZeroModeState:
    aliases = {"zeta": "squeezed", "tau": "thermal"}
    return ZeroModeState(aliases.get(kind, kind), float(parameter), n, half_length)


def completeness_residual(modeset: PhononModeSet, x, y, include_zero_modes: bool = True):
    """Truncated mode sum that should approach delta(x - y).

    Returns a complex matrix over the points x (rows) and y (columns).
    """
    ux, vx = modeset.uv(x)
    uy, vy = modeset.uv(y)
    total = ux.T @ uy.conj() - vx.T.conj() @ vy
    if include_zero_modes:
        for which in ("theta", "q"):
            fam = ZeroModeFamily(which, modeset.n, modeset.half_length, modeset.q)
            u_x, _, _, vad_x = zero_modes(fam, np.atleast_1d(x))
            _, v_y, uad_y, _ = zero_modes(fam, np.atleast_1d(y))
            total = total + np.outer(u_x, uad_y.conj()) - np.outer(vad_x, v_y.conj())
    return total
