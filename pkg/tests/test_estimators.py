import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import brute_scheme, linear_path
from loctime.estimators import (
    Curve,
    Epsilon,
    SchemeId,
    batch_scheme,
    catalog_table,
    covariation_eps,
    hat_function,
    i1_eps,
    i2_eps,
    i3_eps,
    i4_eps,
    i_sub,
    j_eps,
    j_truncated,
    quadratic_variation_eps,
    r_terms,
    reversal_split,
    scheme_curve,
    weak_pairing,
)
from loctime.exceptions import AlignmentError, ConfigurationError
from loctime.paths import GridSpec, Path, negate_path, reverse_path, shift_level

SINGLE_PATH = ["J", "I1", "I2", "I3", "I4", "I31", "I32", "I41", "I42", "R3", "R4", "QV", "R_EPS"]


@st.composite
def small_paths(draw):
    n = draw(st.integers(1, 24))
    m = draw(st.integers(1, n))
    # values on a 0.5 lattice hit the level exactly, exercising every tie branch
    steps = draw(st.lists(st.integers(-3, 3), min_size=n, max_size=n))
    x0 = draw(st.integers(-2, 2))
    x = 0.5 * np.concatenate([[x0], x0 + np.cumsum(steps)])
    return x, m


@settings(max_examples=150, deadline=None)
@given(small_paths(), st.sampled_from(SINGLE_PATH))
def test_kernels_match_brute_force(case, scheme):
    x, m = case
    np.testing.assert_allclose(batch_scheme(x, m, scheme), brute_scheme(x, m, scheme),
                               rtol=0, atol=1e-12)


@settings(max_examples=80, deadline=None)
@given(small_paths())
def test_decompositions_on_lattice_paths(case):
    x, m = case
    b = {s: batch_scheme(x, m, s) for s in SINGLE_PATH}
    np.testing.assert_allclose(b["J"], -b["I1"] + b["I2"], atol=1e-12)
    np.testing.assert_allclose(b["I3"], b["I31"] + b["I32"] + b["R3"], atol=1e-12)
    np.testing.assert_allclose(b["I4"], b["I41"] + b["I42"] + b["R4"], atol=1e-12)
    np.testing.assert_allclose(b["J"], b["I3"] + b["I4"] + b["R_EPS"], atol=1e-12)


def test_identities_on_brownian_fixtures(brownian_fixtures):
    for p in brownian_fixtures:
        for eps in (2.0**-4, 2.0**-7):
            j = j_eps(p, 0.0, eps).values
            np.testing.assert_allclose(j, -i1_eps(p, 0.0, eps).values + i2_eps(p, 0.0, eps).values,
                                       rtol=0, atol=1e-12)
            i3 = i3_eps(p, 0.0, eps).values
            parts = sum(i_sub(p, 0.0, eps, s).values for s in ("I31", "I32")) + r_terms(p, 0.0, eps, "R3").values
            np.testing.assert_allclose(i3, parts, rtol=0, atol=1e-12)
            np.testing.assert_allclose(j_truncated(p, 0.0, eps).values,
                                       i3 + i4_eps(p, 0.0, eps).values, rtol=0, atol=1e-12)


def test_linear_crossing_closed_forms():
    n = 1000
    p = linear_path(n)
    h = 1.0 / n
    eps = 0.1
    assert j_eps(p, 0.0, eps).terminal == pytest.approx(eps, abs=1e-12)
    # grid-exact: the atom X = 0 at u = 1/2 goes to I3's {X <= 0} branch
    assert i3_eps(p, 0.0, eps).terminal == pytest.approx((eps + h) / 2, abs=1e-12)
    assert i4_eps(p, 0.0, eps).terminal == pytest.approx((eps - h) / 2, abs=1e-12)
    for s in ("J", "I3", "I4"):
        assert scheme_curve(p, s, eps).terminal == pytest.approx(brute_scheme(p.values, 100, s)[-1], abs=1e-12)


def test_i1_linear_closed_form_under_clamp():
    # X_u = u: (1/eps) sum_{i<n} (X_{min(i+m,n)} - X_i) 1{X_i > 0} h = 1 - eps/2 - h/2
    n, m = 1024, 64
    p = Path.from_values(np.arange(n + 1) / n)
    eps, h = m / n, 1 / n
    assert i1_eps(p, 0.0, eps).terminal == pytest.approx(1 - eps / 2 - h / 2, abs=1e-12)


def test_qv_linear_slope():
    a, n, m = 3.0, 16, 4
    p = Path.from_values(a * np.arange(n + 1) / n)
    eps = m / n
    qv = quadratic_variation_eps(p, eps).terminal
    assert qv == pytest.approx(brute_scheme(p.values, m, "QV")[-1], abs=1e-12)
    # a^2 eps (1 - (eps - h)/2 ... ) with the clamp: exact grid sum
    exact = sum((a * (min(i + m, n) - i) / n) ** 2 for i in range(n)) / m
    assert qv == pytest.approx(exact, abs=1e-12)


@pytest.mark.parametrize("scheme", SINGLE_PATH)
def test_constant_path_gives_zero(scheme):
    p = Path.from_values(np.ones(65))
    assert np.all(scheme_curve(p, scheme, 2.0**-3).values == 0.0)


def test_positive_path_has_zero_local_time_estimates():
    p = Path.from_values(1.0 + np.linspace(0, 1, 33) ** 2)
    for s in ("J", "I3", "I4", "I31", "I32", "I41", "I42"):
        assert np.all(scheme_curve(p, s, 0.125).values == 0.0)


def test_level_shift_invariance_is_exact(brownian_fixtures):
    for p in brownian_fixtures[:10]:
        for s in SINGLE_PATH:
            if s == "QV":
                continue
            a = scheme_curve(p, s, 2.0**-5, level=0.3)
            b = scheme_curve(shift_level(p, 0.3), s, 2.0**-5, level=0.0)
            assert a == b


def test_sign_symmetry(brownian_fixtures):
    for p in brownian_fixtures:
        q = negate_path(p)
        assert i_sub(q, 0.0, 2.0**-5, "I31") == i_sub(p, 0.0, 2.0**-5, "I32")
        assert i_sub(q, 0.0, 2.0**-5, "I41") == i_sub(p, 0.0, 2.0**-5, "I42")


def test_covariation_symmetry_and_polarization(brownian_fixtures):
    eps = 2.0**-6
    for p, q in zip(brownian_fixtures[:25], brownian_fixtures[25:]):
        assert covariation_eps(p, q, eps) == covariation_eps(q, p, eps)
        assert covariation_eps(p, p, eps) == quadratic_variation_eps(p, eps)
        s = Path.from_values(p.values + q.values)
        d = Path.from_values(p.values - q.values)
        pol = (quadratic_variation_eps(s, eps).values - quadratic_variation_eps(d, eps).values) / 4
        np.testing.assert_allclose(covariation_eps(p, q, eps).values, pol, rtol=0, atol=1e-12)


def test_covariation_needs_same_grid():
    p = Path.from_values(np.zeros(9))
    q = Path.from_values(np.zeros(17))
    with pytest.raises(ConfigurationError):
        covariation_eps(p, q, 0.125)


def test_weak_pairing_reduces_to_qv(brownian_fixtures):
    p = brownian_fixtures[0]
    lhs, _ = weak_pairing(p, lambda x: np.ones_like(x), lambda x: x, 2.0**-6)
    assert lhs == quadratic_variation_eps(p, 2.0**-6)


def test_weak_pairing_rejects_wrong_antiderivative(brownian_fixtures):
    f, _ = hat_function()
    with pytest.raises(ConfigurationError):
        weak_pairing(brownian_fixtures[0], f, lambda x: 2 * x, 2.0**-6)


def test_hat_function_pieces():
    f, F = hat_function(1.0, 0.25)
    assert f(0.0) == 1.0 and f(1.0) == 1.0 and f(1.25) == 0.0 and f(-3.0) == 0.0
    assert F(0.0) == 0.0
    assert F(2.0) == pytest.approx(1.125)
    assert F(-2.0) == pytest.approx(-1.125)


def test_reversal_split_identity(brownian_fixtures):
    for p in brownian_fixtures[:20]:
        for eps in (2.0**-3, 2.0**-6, 1.0):
            i2, rev, d2 = reversal_split(p, eps, 0.1)
            np.testing.assert_allclose(i2.values, rev.values + d2.values, rtol=0, atol=1e-12)


def test_reverse_path_round_trip_estimates(brownian_fixtures):
    p = brownian_fixtures[3]
    assert j_eps(reverse_path(reverse_path(p)), 0.0, 2.0**-5) == j_eps(p, 0.0, 2.0**-5)


def test_alignment_errors():
    g = GridSpec(1.0, 64)
    with pytest.raises(AlignmentError):
        Epsilon.aligned(0.1, g)
    with pytest.raises(AlignmentError):
        Epsilon.aligned(2.0, g)
    with pytest.raises(AlignmentError):
        Epsilon.aligned(-0.5, g)
    assert Epsilon.aligned(2.0**-3, g).lag_m == 8
    with pytest.raises(AlignmentError):
        Epsilon.from_lag(8, GridSpec(1.0, 64)).check(GridSpec(1.0, 128))
    p = Path.from_values(np.zeros(65))
    with pytest.raises(AlignmentError):
        j_eps(p, 0.0, 0.1)


def test_unknown_or_multi_path_scheme():
    with pytest.raises(ConfigurationError):
        SchemeId.parse("nope")
    with pytest.raises(ConfigurationError):
        batch_scheme(np.zeros(5), 1, "COV")
    with pytest.raises(ConfigurationError):
        i_sub(Path.from_values(np.zeros(5)), 0.0, 0.25, "J")


def test_curve_helpers(tmp_path):
    p = linear_path(16)
    c = j_eps(p, 0.0, 0.25)
    assert c.at(1.0) == c.terminal
    with pytest.raises(AlignmentError):
        c.at(0.3)
    text = c.to_csv(tmp_path / "c.csv")
    assert text.splitlines()[0] == "t,value"
    assert len(text.splitlines()) == 18
    assert c.sup_distance(Curve(c.grid, np.zeros(17))) == np.max(np.abs(c.values))


def test_catalog_lists_every_scheme():
    table = catalog_table()
    for s in SchemeId:
        assert f"| {s.value} |" in table
