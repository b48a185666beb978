"""Gaussian lattice generators, transforms and Riemann-sum functionals."""

from math import pi

import numpy as np
import pytest

import fieldclt.simulate as simulate
from fieldclt.cumulants import k_statistic, theoretical_variance
from fieldclt.domains import ConvexBody
from fieldclt.exceptions import EmbeddingError
from fieldclt.simulate import (
    AdditiveFunctional,
    FieldGrid,
    GaussianFieldSimulator,
    HermiteTransformer,
    SimConfig,
    export_grid,
    generate_field,
    hermite_transform,
    integrate_functional,
    lattice_shape,
    nested_integrals,
    replicate_functionals,
)
from fieldclt.spectra import SpectralDensity, WeightFunction

OU = SpectralDensity.cauchy(1.0, c=1 / pi)  # covariance exp(-|tau|)
LINE = ConvexBody.cube(1)


def _config(**kw):
    base = dict(density=OU, body=LINE, T=4.0, h=0.1, seed=7, replications=200)
    base.update(kw)
    return SimConfig(**base)


def test_lattice_shape_and_centres():
    shape, origin = lattice_shape(ConvexBody.ball(2), 4.0, 0.5)
    assert shape == (8, 8)
    assert np.allclose(origin, [-2.0, -2.0])
    grid = FieldGrid(np.zeros(shape), 0.5, origin, 4.0, ConvexBody.ball(2))
    assert np.allclose(grid.centers()[0, 0], [-1.75, -1.75])
    assert grid.mask().sum() == 52


def test_config_validation():
    with pytest.raises(ValueError):
        _config(generator="fft")
    with pytest.raises(ValueError):
        _config(density=SpectralDensity.cauchy(1.0, d=2))
    with pytest.raises(ValueError):
        _config(replications=1)


@pytest.mark.parametrize("generator", ["circulant_embedding", "spectral_superposition", "white_noise"])
def test_replications_are_pure_functions_of_index(generator):
    cfg = _config(generator=generator)
    a = generate_field(cfg, 5).values
    b = GaussianFieldSimulator.from_config(cfg).fit().sample([3, 5]).values[1]
    assert np.array_equal(a, b)
    assert not np.array_equal(a, generate_field(cfg, 6).values)


def test_thread_count_does_not_change_results():
    cfg = _config(replications=300)
    one = replicate_functionals(cfg, threads=1)
    four = replicate_functionals(cfg, threads=4)
    assert np.array_equal(one, four)


@pytest.mark.parametrize("generator,slack", [("circulant_embedding", 0.0), ("spectral_superposition", 0.01)])
def test_lattice_covariance_matches_theory(generator, slack):
    cfg = _config(generator=generator, T=6.0, h=0.25, replications=4000)
    x = GaussianFieldSimulator.from_config(cfg).fit().sample(np.arange(cfg.replications)).values
    for lag in range(9):
        prod = x[:, 3] * x[:, 3 + lag]
        est, se = prod.mean(), prod.std(ddof=1) / np.sqrt(prod.size)
        assert abs(est - np.exp(-lag * 0.25)) <= 4.5 * se + slack


def test_superposition_reports_truncation():
    sim = GaussianFieldSimulator(OU, LINE, T=4.0, h=0.1, generator="spectral_superposition").fit()
    assert 0 < sim.metadata_["variance_truncation_error"] < 0.02


def test_embedding_error_when_padding_fails(monkeypatch):
    # the indicator of |tau| <= 1 is not a covariance
    monkeypatch.setattr(simulate, "covariance_radial", lambda f, r: (np.asarray(r) <= 1.0).astype(float))
    with pytest.raises(EmbeddingError):
        GaussianFieldSimulator(OU, LINE, T=4.0, h=0.1).fit()


def test_hermite_transform_values():
    grid = FieldGrid(np.array([0.0, 1.0, 2.0]), 1.0, np.zeros(1), 3.0, LINE)
    assert hermite_transform(grid, 2, 1.0).values.tolist() == [-1.0, 0.0, 3.0]
    assert hermite_transform(grid, 2, 2.0).values.tolist() == [-1.0, -0.75, 0.0]
    assert hermite_transform(grid, 3, 1.0).values.tolist() == [0.0, -2.0, 2.0]
    with pytest.raises(ValueError):
        hermite_transform(grid, 5, 1.0)
    est = HermiteTransformer(m=2, sigma0=1.0).fit(grid.values)
    assert np.array_equal(est.transform(grid.values), [-1.0, 0.0, 3.0])


def test_riemann_sum_of_cosine_field():
    for h, tol in ((0.1, 1e-3), (0.01, 1e-5)):
        T = 5.0
        shape, origin = lattice_shape(LINE, T, h)
        grid = FieldGrid(np.zeros(shape), h, origin, T, LINE)
        grid = grid.with_values(np.cos(grid.centers()[..., 0]))
        assert integrate_functional(grid) == pytest.approx(2 * np.sin(T / 2), abs=tol)


def test_weighted_riemann_sum_converges():
    body = ConvexBody.cube(2, anchored=True)
    linear = WeightFunction("power_sum", 2)
    quadratic = WeightFunction("power_gamma_sum", 2, nu=1.0, gamma=2.0)
    errors = []
    for h in (0.2, 0.1, 0.05):
        shape, origin = lattice_shape(body, 2.0, h)
        grid = FieldGrid(np.ones(shape), h, origin, 2.0, body)
        # midpoint rule is exact for linear weights and second order otherwise
        assert integrate_functional(grid, linear) == pytest.approx(8.0, abs=1e-12)
        errors.append(abs(integrate_functional(grid, quadratic) - 32 / 3))
    assert errors[0] / errors[1] == pytest.approx(4.0, rel=1e-6)
    assert errors[1] / errors[2] == pytest.approx(4.0, rel=1e-6)


def test_variance_of_window_integral_matches_theory():
    cfg = _config(T=8.0, replications=4000, seed=11)
    s = replicate_functionals(cfg) / np.sqrt(cfg.T)
    k2 = k_statistic(s, 2)
    theory = theoretical_variance(OU, LINE, cfg.T).finite_T
    # cell-centre discretization changes the variance by O(h^2)
    assert abs(k2.estimate - theory) < 4 * k2.standard_error + 0.01


def test_generators_agree_on_window_variance():
    est = {}
    for gen in ("circulant_embedding", "spectral_superposition"):
        cfg = _config(generator=gen, T=8.0, replications=3000, seed=3)
        est[gen] = k_statistic(replicate_functionals(cfg) / np.sqrt(cfg.T), 2)
    a, b = est.values()
    assert abs(a.estimate - b.estimate) < 4 * np.hypot(a.standard_error, b.standard_error) + 0.02


def test_white_noise_long_run_variance():
    cfg = _config(generator="white_noise", T=8.0, replications=3000, seed=5)
    s = replicate_functionals(cfg) / np.sqrt(cfg.T)
    k2 = k_statistic(s, 2)
    assert abs(k2.estimate - 2.0) < 4 * k2.standard_error


def test_nested_integrals_are_consistent():
    cfg = _config(replications=64)
    grid = GaussianFieldSimulator.from_config(cfg).fit().sample(np.arange(64))
    nested = nested_integrals(grid, [0.5, 1.0])
    assert np.allclose(nested[:, 1], integrate_functional(grid))
    assert np.all(np.abs(nested[:, 0]) <= np.sum(np.abs(grid.values), axis=-1) * grid.h)


def test_additive_functional_normalizes():
    cfg = _config(replications=64)
    grid = GaussianFieldSimulator.from_config(cfg).fit().sample(np.arange(10))
    raw = AdditiveFunctional().fit_transform(grid)
    scaled = AdditiveFunctional(normalize=True).fit_transform(grid)
    assert np.allclose(scaled, raw / 2.0)


@pytest.mark.parametrize("fmt", ["binary", "csv"])
def test_export_grid_round_trip(tmp_path, fmt):
    grid = generate_field(_config(body=ConvexBody.cube(2), density=SpectralDensity.gaussian(1.0, d=2), T=2.0,
                                  h=0.25), 0)
    path = tmp_path / f"grid.{fmt}"
    export_grid(grid, path, seed=7, fmt=fmt)
    if fmt == "binary":
        raw = path.read_bytes()
        header, payload = raw.split(b"\n", 1)
        assert b"shape=8,8" in header and b"seed=7" in header
        back = np.frombuffer(payload, dtype="<f8").reshape(8, 8)
    else:
        rows = np.loadtxt(path, delimiter=",", comments="#")
        assert np.allclose(rows[:, :2], grid.centers().reshape(-1, 2))
        back = rows[:, 2].reshape(8, 8)
    assert np.array_equal(back, grid.values)
