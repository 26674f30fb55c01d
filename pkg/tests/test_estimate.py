import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ratiotail.estimate import default_k, empirical_tail_dependence, hill, hill_clt_check
from ratiotail.errors import ModelError
from ratiotail.sampler import sample_batch
from ratiotail.spectral import make_independent, make_logistic, make_rho

N = 10**5


def test_hill_hand_example():
    est = hill(np.exp([0.0, 1.0, 2.0, 3.0]), 3)
    assert est.gamma_hat == pytest.approx(2.0, abs=1e-15)
    assert (est.k, est.n) == (3, 4)
    assert est.se_approx == pytest.approx(2.0 / math.sqrt(3))
    assert est.as_dict()["gamma_hat"] == est.gamma_hat


def test_hill_uses_largest_values():
    # the two smallest values must not matter for k = 2
    a = hill([1e-9, 5e-7, 3.0, 4.0, 10.0], 2)
    b = hill([2.0, 2.5, 3.0, 4.0, 10.0], 2)
    assert a.gamma_hat == b.gamma_hat
    assert a.gamma_hat == pytest.approx(0.5 * (math.log(4) + math.log(10)) - math.log(3))


@pytest.mark.parametrize("k", [0, 4, -1, 1.5])
def test_hill_rejects_bad_k(k):
    with pytest.raises(ModelError):
        hill([1.0, 2.0, 3.0, 4.0], k)


@pytest.mark.parametrize("data", [[1.0, 0.0, 2.0], [1.0, -2.0, 3.0], [1.0, math.inf, 2.0]])
def test_hill_rejects_bad_data(data):
    with pytest.raises(ModelError):
        hill(data, 1)


def test_default_k():
    assert default_k(N) == 31
    assert default_k(2) == 1
    assert default_k(1000) == 7


positive = st.lists(st.floats(1e-3, 1e3), min_size=3, max_size=40)


@settings(max_examples=80, deadline=None)
@given(positive, st.floats(1e-3, 1e3), st.randoms(use_true_random=False))
def test_hill_scale_and_permutation_invariance(data, c, rnd):
    k = len(data) // 2
    base = hill(data, k).gamma_hat
    assert hill(np.array(data) * c, k).gamma_hat == pytest.approx(base, abs=1e-9)
    shuffled = list(data)
    rnd.shuffle(shuffled)
    assert hill(shuffled, k).gamma_hat == base


def median_hill(model, seeds=20):
    k = default_k(N)
    return float(np.median([hill(sample_batch(model, N, s).ratios(0.0), k).gamma_hat for s in range(seeds)]))


@pytest.mark.parametrize("alpha", [1.5, 2.0, 3.0])
def test_hill_consistency_sweep(alpha):
    assert abs(median_hill(make_logistic(alpha)) - 1 / alpha) <= 0.12


def test_hill_independent_ratios():
    assert median_hill(make_independent(), seeds=5) == pytest.approx(1.0, abs=0.15)


def test_clt_check_small_run_is_reproducible():
    a = hill_clt_check(make_logistic(2), 2.0, 2000, 0.5, 20, seed=3)
    b = hill_clt_check(make_logistic(2), 2.0, 2000, 0.5, 20, seed=3, workers=3)
    assert a.k == math.floor(2000**0.25)
    assert np.array_equal(a.values, b.values)
    assert a.mean == pytest.approx(a.values.mean())


@pytest.mark.parametrize(
    "alpha,beta",
    [(1.0, 0.5), (2.0, 2.0 / 3.0), (2.0, 0.0), (2.0, 0.9)],
)
def test_clt_check_rejects(alpha, beta):
    with pytest.raises(ModelError):
        hill_clt_check(make_logistic(2), alpha, 1000, beta, 10)


def tail_dep_at_p95(model, seed=3):
    p = sample_batch(model, N, seed).pairs
    return empirical_tail_dependence(p, np.quantile(p[:, 1], 0.95))


def test_empirical_tail_dependence_rho():
    assert tail_dep_at_p95(make_rho(0.3)) == pytest.approx(0.7, abs=0.05)


def test_empirical_tail_dependence_independent():
    # under independence P(X > t | Y > t) = P(X > t) = 0.05 at this t
    se = math.sqrt(0.05 * 0.95 / (0.05 * N))
    assert tail_dep_at_p95(make_independent()) == pytest.approx(0.05, abs=3 * se)


def test_empirical_tail_dependence_full():
    assert tail_dep_at_p95(make_rho(0.0)) == 1.0


def test_empirical_tail_dependence_needs_exceedances():
    with pytest.raises(ModelError):
        empirical_tail_dependence(np.array([[1.0, 1.0], [2.0, 2.0]]), 5.0)
