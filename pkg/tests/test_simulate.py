import json
import math

import numpy as np
import pytest

from soliton_imaging import imagestats as ist
from soliton_imaging import inference as inf
from soliton_imaging import simulate as sim
from soliton_imaging.meanfield import PixelGrid, fisher_poisson_pixels, pixel_slopes
from soliton_imaging.profiles import DarkSolitonParams


@pytest.fixture(scope="module")
def poisson_setup():
    p = DarkSolitonParams(100.0)
    g = PixelGrid.from_window(6.0, 0.7)
    return p, g, ist.meanfield_statistics(p, g, 0.0)


@pytest.fixture(scope="module")
def toy_gaussian():
    g = PixelGrid.from_window(1.4, 0.7)
    rng = np.random.default_rng(3)
    A = rng.standard_normal((g.count, g.count))
    cov = A @ A.T + g.count * np.eye(g.count)
    return ist.ImageStatistics(g, 0.0, np.linspace(5.0, 8.0, g.count), cov, "toy", {"n": 10.0})


def test_poisson_moments(poisson_setup):
    _, _, stats = poisson_setup
    batch = sim.sample_images(stats, 100_000, seed=1)
    assert batch.model == "poisson" and batch.counts.dtype.kind == "i" and batch.counts.min() >= 0
    m = batch.counts.mean(axis=0)
    se = np.sqrt(stats.rho_bar / len(batch))
    assert np.all(np.abs(m - stats.rho_bar) < 4 * se + 1e-12)


def test_gaussian_moments(toy_gaussian):
    stats = toy_gaussian
    X = sim.sample_images(stats, 100_000, seed=2).counts
    N = X.shape[0]
    assert np.all(np.abs(X.mean(axis=0) - stats.rho_bar) < 4 * np.sqrt(np.diag(stats.cov) / N))
    C = np.cov(X, rowvar=False)
    d = np.diag(stats.cov)
    se = np.sqrt((stats.cov**2 + np.outer(d, d)) / (N - 1))
    assert np.all(np.abs(C - stats.cov) < 5 * se)


def test_gaussian_negatives_retained():
    g = PixelGrid.from_window(0.7, 0.7)
    stats = ist.ImageStatistics(g, 0.0, np.full(g.count, 0.5), np.eye(g.count), "toy", {"n": 1.0})
    assert sim.sample_images(stats, 1000, seed=0).counts.min() < 0


def test_determinism_and_jobs(poisson_setup, toy_gaussian):
    for stats in (poisson_setup[2], toy_gaussian):
        a = sim.sample_images(stats, 20_000, seed=9).counts
        b = sim.sample_images(stats, 20_000, seed=9, jobs=4).counts
        c = sim.sample_images(stats, 20_000, seed=10).counts
        assert np.array_equal(a, b) and not np.array_equal(a, c)


def test_sample_records(poisson_setup):
    batch = sim.sample_images(poisson_setup[2], 3, seed=4)
    assert len(batch) == 3 and batch[1].seed == 4 and batch[1].q_true == 0.0
    with pytest.raises(ValueError):
        sim.sample_images(poisson_setup[2], 0, seed=4)
    with pytest.raises(ValueError):
        sim.sample_images(poisson_setup[2], 5, seed=4, model="binomial")


def test_factorization_failure(toy_gaussian):
    bad = ist.ImageStatistics.__new__(ist.ImageStatistics)
    bad.__dict__.update(toy_gaussian.__dict__)
    bad.cov = toy_gaussian.cov - 1e3 * np.eye(toy_gaussian.grid.count)
    with pytest.raises(ist.CovarianceError):
        sim.sample_images(bad, 10, seed=0)


def test_estimator_is_exact_at_mean_and_linear(poisson_setup):
    p, g, stats = poisson_setup
    gain = inf.optimal_gain_meanfield(p, g)
    cal = sim.calibrate(stats, gain, pixel_slopes(p, g, 0.0))
    assert abs(sim.estimate_position(stats.rho_bar, gain, cal)) < 1e-12
    rng = np.random.default_rng(0)
    d1, d2 = rng.standard_normal((2, g.count))
    a, b = 0.3, -1.7
    lhs = sim.estimate_position(stats.rho_bar + a * d1 + b * d2, gain, cal)
    rhs = a * sim.estimate_position(stats.rho_bar + d1, gain, cal) + b * sim.estimate_position(stats.rho_bar + d2, gain, cal)
    assert math.isclose(lhs, rhs, rel_tol=1e-9, abs_tol=1e-13)
    with pytest.raises(ValueError):
        sim.Calibration(0.0, 1.0)


def test_variance_stderr_gaussian():
    x = np.random.default_rng(1).standard_normal(200_000)
    var, se = sim.variance_stderr(x)
    assert math.isclose(se, math.sqrt(2 / x.size), rel_tol=0.05)
    assert abs(var - 1) < 4 * se


def test_poisson_crb_saturation(poisson_setup):
    p, g, stats = poisson_setup
    gain = inf.optimal_gain_meanfield(p, g)
    F = fisher_poisson_pixels(p, g).F
    res = sim.crb_experiment(stats, gain, pixel_slopes(p, g, 0.0), F, samples=100_000, seed=7)
    assert abs(res.ratio - 1) < 0.02
    doc = json.loads(res.to_json())
    assert doc["manifest"]["model"] == "poisson" and doc["manifest"]["samples"] == 100_000
    assert doc["manifest"]["rng"] == sim.RNG_ALGORITHM and doc["manifest"]["seed"] == 7


def test_crb_never_violated_and_optimal_beats_random(poisson_setup):
    p, g, stats = poisson_setup
    F = fisher_poisson_pixels(p, g).F
    drho = pixel_slopes(p, g, 0.0)
    batch = sim.sample_images(stats, 10_000, seed=21)
    rng = np.random.default_rng(2)
    gains = [inf.optimal_gain_meanfield(p, g)] + [
        inf.GainFunction.normalized(g, rng.standard_normal(g.count)) for _ in range(20)
    ]
    variances = []
    for gain in gains:
        q_hat = sim.estimate_position(batch, gain, sim.calibrate(stats, gain, drho))
        var, se = sim.variance_stderr(q_hat)
        assert var >= 1 / F - 3 * se
        variances.append(var)
    assert variances[0] <= min(variances[1:])


def test_manifest_json():
    m = sim.ExperimentManifest("gaussian", {"n": 100.0}, 3, 10)
    assert json.loads(m.to_json()) == {"model": "gaussian", "params": {"n": 100.0}, "seed": 3, "samples": 10, "rng": sim.RNG_ALGORITHM}
