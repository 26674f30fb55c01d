import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from ratiotail import dist, spectral
from ratiotail.errors import ModelError
from ratiotail.spectral import (
    check_ratio_order,
    equivalent,
    from_spec,
    make_discrete,
    make_exp_ratio,
    make_independent,
    make_logistic,
    make_mixed,
    make_rho,
    swap,
)

from conftest import ZOO

SYMMETRIC = ["independent", "rho0.3", "logistic1.5", "logistic2", "logistic3", "mixed0.5", "mixed1", "exp_ratio"]


def test_zoo_is_standard(zoo_model):
    ft, gt = zoo_model.totals()
    assert abs(ft - 1) <= 1e-8
    assert abs(gt - 1) <= 1e-8


def test_zoo_ratio_order(zoo_model):
    assert check_ratio_order(zoo_model, grid=1000)
    assert check_ratio_order(swap(zoo_model), grid=1000)


def test_independent_joint_cdf_factorises():
    m = make_independent()
    assert dist.joint_cdf(m, 1.0, 1.0) == pytest.approx(math.exp(-2), abs=1e-15)
    assert dist.tail_dependence(m) == 0.0
    for t in [0.01, 0.5, 1.0, 7.0, 1e6]:
        assert dist.gamma(m, "plus", t) == pytest.approx(1 / t, rel=1e-15)


def test_rho_model_examples():
    m = make_rho(0.3)
    assert dist.gamma(m, "plus", 2.0) == pytest.approx(0.15, rel=1e-14)
    assert dist.tail_dependence(m) == pytest.approx(0.7, abs=1e-15)
    assert equivalent(make_rho(1.0), make_independent())


@pytest.mark.parametrize("rho", [-0.1, 1.1, float("nan")])
def test_rho_out_of_range(rho):
    with pytest.raises(ModelError):
        make_rho(rho)


@pytest.mark.parametrize("alpha", [1.0, 0.5, float("inf"), float("nan")])
def test_logistic_rejects_bad_alpha(alpha):
    with pytest.raises(ModelError):
        make_logistic(alpha)


def test_logistic_examples():
    m = make_logistic(2.0)
    assert dist.gamma(m, "plus", 2.0) == pytest.approx(0.5 / math.sqrt(5), rel=1e-14)
    assert dist.joint_cdf(m, 1.0, 1.0) == pytest.approx(math.exp(-math.sqrt(2)), rel=1e-14)
    assert dist.ratio_tail_index(make_logistic(3.0)) == pytest.approx(3.0, rel=1e-6)


@pytest.mark.parametrize("alpha", [1.5, 2.0, 4.0])
@pytest.mark.parametrize("xy", [(0.5, 2.0), (1.0, 1.0), (3.0, 0.7)])
def test_logistic_joint_cdf_closed_form(alpha, xy):
    x, y = xy
    m = make_logistic(alpha)
    expected = math.exp(-((x**-alpha + y**-alpha) ** (1 / alpha)))
    assert dist.joint_cdf(m, x, y, "closed") == pytest.approx(expected, rel=1e-13)
    assert dist.joint_cdf(m, x, y, "quad") == pytest.approx(expected, rel=1e-9)


def test_mixed_examples():
    m1, mh = make_mixed(1.0), make_mixed(0.5)
    assert dist.gamma(m1, "plus", 1.0, "quad") == pytest.approx(0.75, rel=1e-10)
    assert dist.gamma(m1, "plus", 1.0) == pytest.approx(0.75, rel=1e-14)
    t = 1e5
    assert dist.gamma(m1, "plus", t) * t**2 == pytest.approx(2.0, rel=1e-4)
    assert dist.gamma(mh, "plus", t) * t == pytest.approx(0.5, rel=1e-4)
    assert equivalent(make_mixed(0.0), make_independent())


@pytest.mark.parametrize("k", [-0.5, 1.5])
def test_mixed_out_of_range(k):
    with pytest.raises(ModelError):
        make_mixed(k)


def test_discrete_examples():
    assert equivalent(make_discrete([0, 1], [1, 0]), make_independent())
    m = make_discrete([0.3, 0.7], [1.0, 0.0])
    for t in [0.31, 1.0, 50.0]:
        assert dist.gamma(m, "plus", t) == pytest.approx(0.7 / t, rel=1e-14)
    bounded = make_discrete([0.2, 0.8], [0.7, 0.3])
    sup = bounded.atom_arrays[0].max()
    assert sup == pytest.approx(8 / 3, rel=1e-15)
    assert dist.gamma(bounded, "plus", sup) == 0.0
    assert dist.gamma(bounded, "plus", 3.0) == 0.0


def test_discrete_rescales_and_records():
    m = make_discrete([1.0, 3.0], [2.0, 2.0])
    assert m.params["scale_a"] == 4.0 and m.params["scale_b"] == 4.0
    np.testing.assert_allclose(m.atom_arrays[1], [0.25, 0.75])
    np.testing.assert_allclose(m.atom_arrays[2], [0.5, 0.5])


@pytest.mark.parametrize(
    "a,b",
    [
        ([0.5, 0.5], [0.5]),
        ([0.0, 0.0], [1.0, 0.0]),
        ([0.2, 0.4], [0.1, 0.2]),
        ([0.5, 0.5], [0.0, 0.0]),
        ([1.0, 1.0], [0.0, 0.0]),
        ([-0.1, 1.1], [0.5, 0.5]),
    ],
)
def test_discrete_rejects(a, b):
    with pytest.raises(ModelError):
        make_discrete(a, b)


def test_exp_ratio_constant_matches_exponential_integral():
    # total mass 2 C (E1(1) + 4/e) after substituting w = s / (1 - s)
    c = 1.0 / (special.exp1(1.0) + 4.0 / math.e)
    m = make_exp_ratio()
    assert m.params["C"] == pytest.approx(c, rel=1e-10)
    assert m.params["C"] == pytest.approx(0.5914004347759103, rel=1e-12)
    d = m.density
    mass = integrate.quad(lambda s: float(d.h(s)), 0, 0.5)[0] + integrate.quad(lambda s: float(d.h(s)), 0.5, 1)[0]
    assert mass == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("t", [5.0, 10.0, 20.0])
def test_exp_ratio_gamma_decays_like_exp(t):
    m = make_exp_ratio()
    c = m.params["C"]
    assert dist.gamma(m, "plus", t) == pytest.approx(c * (t + 2) * math.exp(-t) / t, rel=1e-12)
    step = dist.gamma(m, "plus", t + 1) / dist.gamma(m, "plus", t)
    assert step * math.e == pytest.approx(1.0, abs=3 / t**2)


def test_swap_examples():
    assert equivalent(swap(make_independent()), make_independent())
    a, b = [0.1, 0.5, 0.4], [0.6, 0.3, 0.1]
    assert equivalent(swap(make_discrete(a, b)), make_discrete(b, a))


def test_swap_is_involution(zoo_model):
    assert swap(swap(zoo_model)) is zoo_model
    assert equivalent(swap(swap(zoo_model)), zoo_model)


@pytest.mark.parametrize("name", SYMMETRIC)
def test_symmetric_models_have_equal_gammas(name):
    m = ZOO[name]
    for t in [0.3, 1.0, 2.5, 40.0]:
        assert dist.gamma(m, "plus", t) == pytest.approx(dist.gamma(m, "minus", t), rel=1e-9, abs=1e-300)


def test_spec_round_trip(zoo_model):
    again = from_spec(zoo_model.to_spec())
    assert equivalent(again, zoo_model)
    mirrored = from_spec(swap(zoo_model).to_spec())
    assert equivalent(mirrored, swap(zoo_model))


@pytest.mark.parametrize(
    "spec",
    [{"alpha": 2}, {"form": "nope"}, {"form": "rho"}, {"form": "rho", "rho": 0.3, "k": 1}, {"form": "rho", "rho": "x"}],
)
def test_from_spec_rejects(spec):
    with pytest.raises(ModelError):
        from_spec(spec)


def test_custom_model_rejects_unsorted_ratios():
    with pytest.raises(ModelError):
        spectral.custom([(0.0, 2.0, 0.0, 0.5), (1.0, 0.0, 2.0, 0.5)])


def test_custom_model_rejects_nonstandard():
    with pytest.raises(ModelError):
        spectral.custom([(0.0, 0.0, 2.0, 0.5), (1.0, 1.0, 0.0, 0.5)])


weights = st.lists(st.floats(0.01, 10.0), min_size=1, max_size=6)


@settings(max_examples=60, deadline=None)
@given(weights, weights)
def test_random_discrete_models_are_valid(a, b):
    m = min(len(a), len(b))
    a, b = np.array(a[:m]), np.array(b[:m])
    ratios = a / b
    if m > 1 and np.min(np.diff(np.sort(ratios))) < 1e-9 * ratios.max():
        return
    model = make_discrete(a, b)
    ft, gt = model.totals()
    assert ft == pytest.approx(1.0, abs=1e-12) and gt == pytest.approx(1.0, abs=1e-12)
    assert np.all(np.diff(model.atom_arrays[0]) > 0)
    assert check_ratio_order(model)
