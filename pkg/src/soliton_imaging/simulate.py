"""Monte Carlo images and the empirical variance of the linear position estimator.

Gaussian images may contain negative counts; they are kept as drawn, since
truncating them would bias the variance that is compared with the Cramer-Rao
bound.
"""

from __future__ import annotations

import json
import math
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .imagestats import CovarianceError, ImageStatistics
from .inference import GainFunction, floored

RNG_ALGORITHM = "numpy.random.PCG64 (SeedSequence.spawn per chunk)"
CHUNK = 8192


@dataclass(frozen=True)
class ImageSample:
    counts: np.ndarray
    q_true: float
    seed: int


@dataclass(frozen=True)
class ImageBatch(Sequence):
    """Images stacked row-wise; indexing yields ImageSample records."""

    counts: np.ndarray
    q_true: float
    seed: int
    model: str

    def __len__(self):
        return self.counts.shape[0]

    def __getitem__(self, i):
        return ImageSample(self.counts[i], self.q_true, self.seed)


def _factor(stats: ImageStatistics):
    P = floored(stats)
    lam, vec = np.linalg.eigh(P)
    if lam[0] < -1e-9 * np.trace(P):
        raise CovarianceError("cannot factor covariance for sampling", float(lam[0]))
    return vec * np.sqrt(np.clip(lam, 0.0, None))


def sample_images(stats: ImageStatistics, count: int, seed: int, model: str | None = None, jobs: int = 1) -> ImageBatch:
    """Draw ``count`` images; Poisson for mean-field statistics, Gaussian otherwise.

    Chunks of fixed size get their own spawned stream, so the result does
    not depend on ``jobs``.
    """
    if count < 1:
        raise ValueError("need at least one sample")
    model = model or ("poisson" if stats.model == "meanfield-poisson" else "gaussian")
    if model not in ("poisson", "gaussian"):
        raise ValueError(f"unknown sampling model {model!r}")
    sizes = [CHUNK] * (count // CHUNK) + ([count % CHUNK] if count % CHUNK else [])
    streams = np.random.SeedSequence(seed).spawn(len(sizes))
    mean = stats.rho_bar
    L = _factor(stats) if model == "gaussian" else None

    def draw(args):
        size, ss = args
        rng = np.random.Generator(np.random.PCG64(ss))
        if model == "poisson":
            return rng.poisson(mean, size=(size, mean.size))
        return mean + rng.standard_normal((size, mean.size)) @ L.T

    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        parts = list(pool.map(draw, zip(sizes, streams)))
    return ImageBatch(np.concatenate(parts), stats.q, seed, model)


@dataclass(frozen=True)
class Calibration:
    """Linearization of S(q) = dx * g . rho about the reference image statistics."""

    slope: float
    mean_signal: float
    q0: float = 0.0

    def __post_init__(self):
        if self.slope == 0.0 or not math.isfinite(self.slope):
            raise ValueError("calibration slope must be finite and nonzero")


def calibrate(stats: ImageStatistics, gain: GainFunction, drho_dq) -> Calibration:
    slope = float(gain.values @ np.asarray(drho_dq, dtype=float)) * stats.grid.dx
    return Calibration(slope, float(gain.signal(stats.rho_bar)), stats.q)


def estimate_position(sample, gain: GainFunction, calibration: Calibration):
    """q_hat = q0 + [S(sample) - S_bar] / slope; accepts one image or a stack."""
    counts = sample.counts if hasattr(sample, "counts") else sample
    return calibration.q0 + (gain.signal(counts) - calibration.mean_signal) / calibration.slope


def variance_stderr(values) -> tuple[float, float]:
    """Unbiased sample variance and its standard error from the fourth central moment."""
    v = np.asarray(values, dtype=float)
    N = v.size
    d = v - v.mean()
    var = float(d @ d) / (N - 1)
    m4 = float(np.mean(d**4))
    se = math.sqrt(max(m4 - var**2 * (N - 3) / (N - 1), 0.0) / N)
    return var, se


@dataclass
class ExperimentManifest:
    model: str
    params: dict
    seed: int
    samples: int
    rng: str = RNG_ALGORITHM

    def to_json(self, **kw) -> str:
        return json.dumps(asdict(self), **kw)


@dataclass
class ExperimentResult:
    var_q: float
    var_q_stderr: float
    F: float
    ratio: float
    ratio_stderr: float
    mean_q: float
    manifest: dict = field(default_factory=dict)

    def to_json(self, **kw) -> str:
        return json.dumps(asdict(self), **kw)


def crb_experiment(
    stats: ImageStatistics,
    gain: GainFunction,
    drho_dq,
    F: float,
    samples: int = 100_000,
    seed: int = 0,
    model: str | None = None,
    jobs: int = 1,
) -> ExperimentResult:
    """Var(q_hat) * F over ``samples`` images drawn at the calibration point."""
    batch = sample_images(stats, samples, seed, model, jobs)
    cal = calibrate(stats, gain, drho_dq)
    q_hat = estimate_position(batch, gain, cal)
    var, se = variance_stderr(q_hat)
    manifest = ExperimentManifest(batch.model, {"q": stats.q, **stats.params}, seed, samples)
    return ExperimentResult(var, se, F, var * F, se * F, float(np.mean(q_hat)), asdict(manifest))
