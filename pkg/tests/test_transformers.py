import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline

from loctime.estimators import j_eps, scheme_curve
from loctime.exceptions import AlignmentError, ConfigurationError, DegenerateFitError
from loctime.oracle import tanaka_local_time
from loctime.paths import GridSpec, Path, brownian_batch
from loctime.transformers import ConvergenceRateRegressor, LocalTimeTransformer, OracleTransformer

X = brownian_batch(GridSpec(1.0, 256), 4, range(5))


def test_transformer_matches_path_api():
    t = LocalTimeTransformer(scheme="I42", eps=2.0**-4, level=0.1).fit(X)
    assert t.lag_ == 16 and t.n_steps_ == 256
    out = t.transform(X)
    assert out.shape == X.shape
    for row, x in zip(out, X):
        assert np.array_equal(row, scheme_curve(Path.from_values(x), "I42", 2.0**-4, 0.1).values)


def test_params_and_clone():
    t = LocalTimeTransformer(scheme="J", eps=0.125)
    assert t.get_params() == {"scheme": "J", "eps": 0.125, "level": 0.0, "horizon": 1.0}
    c = clone(t.set_params(level=0.5))
    assert c.level == 0.5 and not hasattr(c, "lag_")


def test_validation():
    with pytest.raises(NotFittedError):
        LocalTimeTransformer().transform(X)
    with pytest.raises(AlignmentError):
        LocalTimeTransformer(eps=0.1).fit(X)
    with pytest.raises(ConfigurationError):
        LocalTimeTransformer(scheme="COV").fit(X)
    t = LocalTimeTransformer(eps=0.25).fit(X)
    with pytest.raises(ConfigurationError):
        t.transform(X[:, :-1])
    with pytest.raises(ValueError):
        LocalTimeTransformer(eps=0.25).fit(np.full((2, 9), np.nan))


def test_oracle_transformer():
    out = OracleTransformer().fit_transform(X)
    assert np.array_equal(out[2], tanaka_local_time(Path.from_values(X[2])).values)
    assert OracleTransformer(oracle="occupation", width=0.05).fit_transform(X).shape == X.shape
    with pytest.raises(ConfigurationError):
        OracleTransformer(oracle="bogus").fit(X)


def test_pipeline_composition():
    pipe = make_pipeline(LocalTimeTransformer(eps=2.0**-3))
    np.testing.assert_array_equal(pipe.fit_transform(X)[0], j_eps(Path.from_values(X[0]), 0.0, 2.0**-3).values)


def test_rate_regressor():
    eps = np.array([2.0**-k for k in range(3, 9)])
    reg = ConvergenceRateRegressor().fit(eps[:, None], 0.8 * eps**0.3)
    assert abs(reg.slope_ - 0.3) < 1e-12
    assert reg.r_squared_ == pytest.approx(1.0)
    np.testing.assert_allclose(reg.predict([[0.5]]), 0.8 * 0.5**0.3, rtol=1e-12)
    assert reg.score(eps[:, None], 0.8 * eps**0.3) == pytest.approx(1.0)
    with pytest.raises(DegenerateFitError):
        ConvergenceRateRegressor().fit(eps[:, None], np.zeros(6))
