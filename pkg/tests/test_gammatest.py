import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from ratiotail import gammatest as gt
from ratiotail.errors import DegenerateStatisticError, ModelError, NormingError
from ratiotail.sampler import sample_batch
from ratiotail.spectral import make_discrete, make_independent, make_logistic, make_rho

# ratios 4 and 1/3: R+ = 4, R- = 3
HAND_PAIRS = np.array([[4.0, 1.0], [1.0, 3.0], [2.0, 2.0]])


def test_quotient_hand_example():
    assert gt.quotient_coefficient(HAND_PAIRS) == pytest.approx(5 / 11, rel=1e-15)
    assert gt.modified_quotient(HAND_PAIRS) == pytest.approx(7 / 12, rel=1e-15)


def test_identical_coordinates():
    p = sample_batch(make_rho(0.0), 50, 1).pairs
    with pytest.raises(DegenerateStatisticError):
        gt.quotient_coefficient(p)
    assert gt.modified_quotient(p) == 2.0
    with pytest.raises(DegenerateStatisticError):
        gt.gamma_test(p, variant="original")
    assert gt.gamma_test(p).statistic == 100.0


def test_degenerate_error_is_a_numerical_error():
    from ratiotail.errors import NumericalError

    assert issubclass(DegenerateStatisticError, NumericalError)


@pytest.mark.parametrize("pairs", [np.ones((0, 2)), np.array([[1.0, -1.0]]), np.array([1.0, 2.0]), np.array([[1.0, np.nan]])])
def test_quotient_rejects_bad_pairs(pairs):
    with pytest.raises(ModelError):
        gt.modified_quotient(pairs)


def test_independent_single_draw_and_variants_agree():
    n = 10**4
    p = sample_batch(make_independent(), n, 8).pairs
    q, qm = n * gt.quotient_coefficient(p), n * gt.modified_quotient(p)
    assert 0.05 <= q <= 15
    assert qm == pytest.approx(q, rel=0.01)


def test_gamma_law_examples():
    assert gt.gamma_cdf(0.0, 2.5) == 0.0
    assert gt.gamma_cdf(math.inf, 2.5) == 1.0
    assert gt.gamma_quantile(0.95, 1.0) == pytest.approx(4.74386, abs=1e-5)
    assert gt.gamma_cdf(6.0, 3.0) == pytest.approx(1 - 3 * math.exp(-2), rel=1e-14)
    assert gt.gamma_cdf(6.0, 3.0) == pytest.approx(0.59399, abs=1e-5)


@pytest.mark.parametrize("theta", [0.3, 1.0, 1.0 / (1 - math.exp(-1)), 40.0])
def test_gamma_law_against_scipy(theta):
    law = stats.gamma(2, scale=theta)
    for x in [1e-8, 0.1, 1.0, 5.0, 50.0, 400.0]:
        assert gt.gamma_cdf(x, theta) == pytest.approx(law.cdf(x), rel=1e-12, abs=1e-300)
        assert gt.gamma_sf(x, theta) == pytest.approx(law.sf(x), rel=1e-12, abs=1e-300)
    for p in [1e-6, 0.05, 0.5, 0.95, 1 - 1e-9]:
        x = gt.gamma_quantile(p, theta)
        assert gt.gamma_cdf(x, theta) == pytest.approx(p, abs=1e-12)
        assert x == pytest.approx(law.ppf(p), rel=1e-9)


@pytest.mark.parametrize("args", [(-1.0, 1.0), (1.0, 0.0), (1.0, -2.0), (1.0, math.inf)])
def test_gamma_cdf_domain(args):
    with pytest.raises(ModelError):
        gt.gamma_cdf(*args)


@pytest.mark.parametrize("p", [0.0, 1.0, -0.1, math.nan])
def test_gamma_quantile_domain(p):
    with pytest.raises(ModelError):
        gt.gamma_quantile(p, 1.0)


def test_null_theta():
    assert gt.null_theta(0.0) == 1.0
    assert gt.null_theta(1.0) == pytest.approx(1 / (1 - math.exp(-1)), rel=1e-15)
    assert gt.null_theta(1e-3) == pytest.approx(1.0, rel=1e-12)
    with pytest.raises(ModelError):
        gt.null_theta(-1.0)


def test_report_invariants():
    p = sample_batch(make_logistic(2), 100, 4).pairs
    for u in (0.0, 1.0):
        for variant in gt.VARIANTS:
            rep = gt.gamma_test(p, 0.05, u, variant)
            assert rep.p_value == pytest.approx(1 - gt.gamma_cdf(rep.statistic, rep.null_theta), abs=1e-15)
            assert rep.reject == (rep.p_value < rep.level)
            assert rep.reject == (rep.statistic > rep.critical_value)
            d = rep.as_dict()
            assert d["variant"] == variant and d["n"] == 100


@pytest.mark.parametrize("kwargs", [{"level": 0.0}, {"level": 1.0}, {"variant": "other"}, {"u": -1.0}])
def test_gamma_test_rejects_bad_arguments(kwargs):
    with pytest.raises(ModelError):
        gt.gamma_test(HAND_PAIRS, **kwargs)


def test_gamma_test_needs_two_pairs():
    with pytest.raises(ModelError):
        gt.gamma_test(np.array([[1.0, 2.0]]))


def test_null_rejection_rate():
    assert gt.rejection_rate(make_independent(), 100, 2000, seed=0) == pytest.approx(0.05, abs=0.015)


def test_rho_one_is_the_null():
    assert gt.rejection_rate(make_rho(1.0), 100, 1000, seed=1) == pytest.approx(0.05, abs=0.02)


def test_logistic_is_rejected():
    assert gt.rejection_rate(make_logistic(2), 100, 500, seed=0) >= 0.99


def test_threshold_invariance_of_null_law():
    n, reps = 200, 1000
    scaled = {u: [] for u in (0.0, 0.5, 1.0)}
    for r in range(reps):
        p = sample_batch(make_independent(), n, 1, key=(r,)).pairs
        for u in scaled:
            scaled[u].append(n * gt.modified_quotient(p, u) / gt.null_theta(u))
    for u in (0.5, 1.0):
        assert stats.ks_2samp(scaled[0.0], scaled[u]).statistic <= 0.05


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.tuples(st.floats(0.01, 100), st.floats(0.01, 100)), min_size=2, max_size=30),
    st.floats(0.01, 100),
    st.floats(0.0, 5.0),
)
def test_scale_invariance(pairs, c, u):
    p = np.array(pairs)
    assert gt.modified_quotient(c * p, u * c) == pytest.approx(gt.modified_quotient(p, u), rel=1e-12)
    try:
        q = gt.quotient_coefficient(p)
    except DegenerateStatisticError:
        return
    assert gt.quotient_coefficient(c * p) == pytest.approx(q, rel=1e-9, abs=1e-12)


def median_statistic(model, n, reps=200, seed=2):
    return float(np.median([n * gt.modified_quotient(sample_batch(model, n, seed, key=(r,)).pairs) for r in range(reps)]))


@pytest.fixture(scope="module")
def logistic_medians():
    m = make_logistic(2)
    return {n: median_statistic(m, n) for n in (50, 100, 200, 400)}


def test_statistic_diverges_under_dependence(logistic_medians):
    meds = [logistic_medians[n] for n in (50, 100, 200, 400)]
    assert np.all(np.diff(meds) > 0)
    # the ratio maxima scale like sqrt(n), so n q grows like sqrt(n)
    assert logistic_medians[400] / logistic_medians[100] == pytest.approx(2.0, abs=0.4)
    assert meds[0] > gt.gamma_quantile(0.95)


@pytest.mark.xfail(strict=True, reason="n q grows like sqrt(n) under logistic(2), so quadrupling n roughly doubles it")
def test_statistic_quadruples_from_100_to_400(logistic_medians):
    assert logistic_medians[400] > 4 * logistic_medians[100]


def test_limit_power_examples():
    assert gt.limit_power(1.0) == pytest.approx(0.05, abs=1e-12)
    q = gt.gamma_quantile(0.95)
    tail = integrate.quad(lambda x: x / 25 * math.exp(-x / 5), q, math.inf)[0]
    assert gt.limit_power(0.2) == pytest.approx(tail, rel=1e-9)
    assert gt.limit_power(0.2) == pytest.approx(0.7547, abs=2e-4)
    assert gt.limit_power(0.9) == pytest.approx(0.073715, abs=1e-6)
    assert gt.limit_power(1e-6) == pytest.approx(1.0, abs=1e-9)
    with pytest.raises(ModelError):
        gt.limit_power(0.0)


def test_limit_power_is_decreasing():
    rhos = np.linspace(0.01, 1, 50)
    assert np.all(np.diff([gt.limit_power(r) for r in rhos]) < 0)


def test_power_simulation_examples():
    curve = gt.power_simulation([0.2, 0.9, 1.0], n=20, reps=1000, seed=7)
    emp = dict(zip(curve.rho, curve.empirical_power))
    assert emp[1.0] == pytest.approx(0.05, abs=0.02)
    assert emp[0.2] == pytest.approx(0.7547, abs=0.05)
    assert emp[0.9] == pytest.approx(0.0737, abs=0.025)
    rows = list(curve.rows())
    assert rows[0][0] == 0.2 and rows[0][3] == 1000


def test_power_simulation_matches_gamma_test():
    # the vectorised rho statistic must equal the generic test on the same draws
    from ratiotail.sampler import derive_seed, sample_frechet

    rng = np.random.Generator(np.random.PCG64(derive_seed(3, 0)))
    z = sample_frechet(rng, (20, 3))
    rho = 0.4
    x = np.maximum(rho * z[:, 2], (1 - rho) * z[:, 1])
    y = np.maximum(rho * z[:, 0], (1 - rho) * z[:, 1])
    stat = gt._rho_stats(z, np.array([rho]))[0]
    assert stat == pytest.approx(gt.gamma_test(np.column_stack([x, y])).statistic, rel=1e-14)


def test_power_simulation_ignores_workers():
    a = gt.power_simulation([0.3, 0.7], n=20, reps=60, seed=5, workers=1)
    b = gt.power_simulation([0.3, 0.7], n=20, reps=60, seed=5, workers=3)
    assert np.array_equal(a.empirical_power, b.empirical_power)


@pytest.mark.parametrize("kwargs", [{"rho_grid": [0.0]}, {"rho_grid": [1.5]}, {"rho_grid": []}, {"reps": 0}, {"n": 1}])
def test_power_simulation_rejects(kwargs):
    args = {"rho_grid": [0.5], "n": 20, "reps": 10}
    args.update(kwargs)
    with pytest.raises(ModelError):
        gt.power_simulation(**args)


def test_maxima_check_small_run():
    res = gt.joint_maxima_independence_check(make_rho(0.3), 200, 300, seed=1)
    assert res.kappa_plus == pytest.approx(0.3 * 200, rel=1e-6)
    assert res.alpha_plus == pytest.approx(1.0, rel=1e-6)
    assert res.deviation <= 0.08
    assert res.as_dict()["grid"] == [0.5, 1.0, 2.0]


def test_maxima_check_bounded_model_fails():
    with pytest.raises(NormingError):
        gt.joint_maxima_independence_check(make_discrete([0.2, 0.8], [0.7, 0.3]), 100, 10)
