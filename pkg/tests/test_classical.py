import math

import numpy as np
import pytest

from gravamp import bmv, classical
from gravamp import linalg as la
from gravamp.quantum import ppt_min_eigenvalue, visibility
from oracles import classical_visibility_pi2

GRID = [(t, e) for t in (1e-5, 1e-3, 1e-1) for e in (0.72, 0.8, 0.9, 0.99)]


@pytest.mark.parametrize("theta,eps", GRID)
def test_mixture_is_separable_and_normalised(theta, eps):
    model = classical.build_separable(bmv.BmvParams(theta, eps))
    assert ppt_min_eigenvalue(model.density) >= -1e-10
    assert sum(model.weights) == pytest.approx(1, abs=1e-12)
    assert abs(model.weight_deficit) < 1e-12


def test_mixture_without_coupling():
    eps = 0.8
    model = classical.build_separable(bmv.BmvParams(0.0, eps))
    assert model.weights[:2] == pytest.approx((0.25, 0.25))
    for _, _, proj_b in model.components:
        assert np.allclose(proj_b, la.projector(la.PLUS), atol=1e-15)
    rep = classical.classical_visibilities(model, bmv.BmvParams(0.0, eps))
    assert rep.values == pytest.approx((1, 1, 1, 1), abs=1e-12)


def test_raw_weights_record_deficit():
    comps = ((0.3, la.projector(la.ZERO), la.projector(la.PLUS)), (0.3, la.projector(la.ONE), la.projector(la.PLUS)))
    model = classical.SeparableModel.from_raw_weights(comps)
    assert model.weights == pytest.approx((0.5, 0.5))
    assert model.weight_deficit == pytest.approx(-0.4)


def test_invalid_weights_rejected():
    with pytest.raises(ValueError):
        classical.SeparableModel(((0.7, la.projector(la.ZERO), la.projector(la.PLUS)),))


def test_conditional_given_eps_is_mixed():
    params = bmv.BmvParams.from_k(1e-3, 1)
    _, ens_b = classical.classical_steered_states(classical.build_separable(params), params)
    assert ens_b.conditional(0).purity() < 1 - 1e-6


@pytest.mark.parametrize("theta", [1e-3, 1e-2, 0.1])
def test_steered_numerators_match_displayed_terms(theta):
    params = bmv.BmvParams.from_k(theta, 1)
    ens_a, ens_b = classical.classical_steered_states(classical.build_separable(params), params)
    raw = ens_a.unnormalized + ens_b.unnormalized
    for got, want in zip(raw, classical.displayed_conditional_numerators(params)):
        assert np.max(np.abs(got - want)) <= 1e-10


@pytest.mark.parametrize("theta,eps", GRID)
def test_ratio_formulas_match_exact_steering(theta, eps):
    params = bmv.BmvParams(theta, eps)
    exact = classical.classical_visibilities(classical.build_separable(params), params).values
    assert np.allclose(exact, classical.displayed_classical_visibilities(params), atol=1e-10)
    assert np.allclose(exact, classical.expanded_classical_visibilities(params), atol=1e-10)


def test_unit_k_limit_is_one_half():
    params = bmv.BmvParams.from_k(1e-5, 1)
    v = classical.classical_visibilities(classical.build_separable(params), params).values
    assert v[2] == pytest.approx(0.5, abs=1e-6)


def test_k_two_example():
    params = bmv.BmvParams.from_k(1e-4, 2)
    v = classical.classical_visibilities(classical.build_separable(params), params).values
    assert v[2] == pytest.approx(0.2, abs=5e-3)


@pytest.mark.parametrize("k,expected", [(1, 0.5), (1e-9, 1.0), (3, 0.1)])
def test_limit_formula(k, expected):
    assert classical.classical_visibility_limit(k) == pytest.approx(expected)


@pytest.mark.parametrize("k", [0.5, 1, 2])
def test_convergence_to_limit_is_monotone(k):
    errs = []
    for theta in (1e-3, 1e-4, 1e-5):
        params = bmv.BmvParams.from_k(theta, k)
        v = classical.classical_visibilities(classical.build_separable(params), params).values
        err = abs(v[2] - 1 / (1 + k * k))
        assert err <= 10 * theta * k
        errs.append(err)
        assert max(abs(v[i] - 1) for i in (0, 1, 3)) <= 10 * theta
    assert errs[0] > errs[1] > errs[2]


def test_plus_component_overlap_matches_oracle():
    # V of |+> on Pi_2 is the weight of the unamplified branch in the mixture
    params = bmv.BmvParams.from_k(1e-3, 2)
    pi2 = bmv.reference_projectors(params)[2]
    v = visibility(la.projector(la.PLUS), pi2)
    assert v == pytest.approx(classical_visibility_pi2(params.theta, params.weak.a_w), abs=1e-12)


def test_product_simulator_reproduces_probabilities_to_second_order():
    for theta in (1e-3, 1e-2):
        params = bmv.BmvParams.from_k(theta, 1)
        q = classical.heralding_distribution(bmv.entangled_state(theta), params)
        c = classical.heralding_distribution(classical.product_simulator(params).density, params)
        assert classical.tv_distance(q, c) <= 5 * theta**2


def test_matched_product_reproduces_probabilities_exactly():
    params = bmv.BmvParams.from_k(1e-2, 1)
    model = classical.product_simulator(params, match_heralding=True)
    q = classical.heralding_distribution(bmv.entangled_state(params.theta), params)
    c = classical.heralding_distribution(model.density, params)
    assert classical.tv_distance(q, c) <= 1e-14
    v = classical.classical_visibilities(model, params).values
    assert v[2] == pytest.approx(0.5, abs=1e-3)


def test_mixture_probability_distance_is_not_second_order():
    # The canonical mixture heralds eps with probability 1/4 + p_eps/2, far from p_eps.
    params = bmv.BmvParams.from_k(1e-2, 1)
    q = classical.heralding_distribution(bmv.entangled_state(params.theta), params)
    c = classical.heralding_distribution(classical.build_separable(params).density, params)
    assert classical.tv_distance(q, c) == pytest.approx(0.1274487586, abs=1e-9)


@pytest.mark.xfail(strict=True, reason="the canonical mixture does not reproduce the heralding probabilities")
def test_mixture_probability_distance_within_four_theta_squared():
    params = bmv.BmvParams.from_k(1e-2, 1)
    q = classical.heralding_distribution(bmv.entangled_state(params.theta), params)
    c = classical.heralding_distribution(classical.build_separable(params).density, params)
    assert classical.tv_distance(q, c) <= 4 * params.theta**2


def test_zero_herald_is_reported():
    params = bmv.BmvParams(0.1, 1.0)
    # eps = 1 means |eps_perp> = |1>; a model with A fixed in |0> never heralds eps_perp
    model = classical.SeparableModel(((1.0, la.projector(la.ZERO), la.projector(la.PLUS)),))
    with pytest.raises(classical.ZeroHeraldError):
        classical.classical_visibilities(model, params)


def test_generic_construction_from_state_matches_canonical():
    params = bmv.BmvParams.from_k(1e-2, 1)
    generic = classical.separable_from_state(bmv.entangled_state(params.theta), (bmv.basis_a(), bmv.basis_b(params)))
    canonical = classical.build_separable(params)
    assert np.max(np.abs(generic.density - canonical.density)) <= 1e-12
    assert math.isclose(sum(generic.weights), 1, abs_tol=1e-12)
