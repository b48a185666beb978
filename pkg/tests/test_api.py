"""scikit-learn conventions for the public estimators."""

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline

import fieldclt
from fieldclt import AdditiveFunctional, CumulantEstimator, GaussianFieldSimulator, HermiteTransformer
from fieldclt.domains import ConvexBody
from fieldclt.spectra import SpectralDensity

SIM = dict(density=SpectralDensity.gaussian(1.0), body=ConvexBody.cube(1), T=8.0, seed=3)


@pytest.mark.parametrize("est", [GaussianFieldSimulator(**SIM), HermiteTransformer(m=3, sigma0=2.0),
                                 AdditiveFunctional(normalize=True), CumulantEstimator(orders=(2, 4))])
def test_params_and_clone(est):
    params = est.get_params()
    twin = clone(est)
    assert twin.get_params() == params
    assert twin is not est


def test_set_params_changes_output():
    sim = GaussianFieldSimulator(**SIM).fit()
    a = sim.sample([0]).values
    sim.set_params(seed=4).fit()
    assert not np.array_equal(a, sim.sample([0]).values)


def test_unfitted_errors():
    with pytest.raises(NotFittedError):
        GaussianFieldSimulator(**SIM).sample([0])
    with pytest.raises(NotFittedError):
        HermiteTransformer().transform(np.zeros(3))
    with pytest.raises(NotFittedError):
        CumulantEstimator().report(2)


def test_pipeline_from_field_to_cumulants():
    sim = GaussianFieldSimulator(**SIM).fit()
    grid = sim.sample(np.arange(400))
    h2 = HermiteTransformer(m=2, sigma0=float(np.sqrt(np.sqrt(2 * np.pi))))
    grid = grid.with_values(h2.fit_transform(grid.values))
    values = make_pipeline(AdditiveFunctional(normalize=True)).fit_transform(grid)
    est = CumulantEstimator().fit(values)
    assert est.n_samples_ == 400
    assert est.cumulants_[2] > 0


def test_hermite_transformer_estimates_scale():
    x = np.random.default_rng(0).normal(scale=3.0, size=100_000)
    est = HermiteTransformer(m=2).fit(x)
    assert est.scale_ == pytest.approx(3.0, rel=0.01)
    assert abs(est.transform(x).mean()) < 0.02


def test_public_namespace():
    for name in fieldclt.__all__:
        assert hasattr(fieldclt, name)
    assert fieldclt.__version__ == "0.1.0"
