import logging
import math

import numpy as np
import pytest

from gravamp import bmv, classical, criterion
from gravamp.criterion import DeviceModel
from gravamp.quantum import DepolarizingNoise

DEVICE = DeviceModel(gamma=1e-4)


def test_device_validation():
    for bad in (dict(gamma=0), dict(gamma=1), dict(gamma=0.1, shot_rate=0), dict(gamma=0.1, duration=-1),
                dict(gamma=0.1, basis_choice_prob=1.0)):
        with pytest.raises(ValueError):
            DeviceModel(**bad)


def test_criterion_core_example():
    rep = criterion.evaluate_criterion(bmv.BmvParams.from_k(1e-2, 1), DEVICE)
    assert rep.v_quantum == pytest.approx((1, 1, 1, 1), abs=1e-10)
    assert rep.v_classical[2] == pytest.approx(0.5, abs=1e-3)
    assert rep.visibility_gap == pytest.approx(0.5, abs=1e-3)
    assert rep.distinguishable_by_visibility
    # probability distance is on the gamma scale: theta^2 / 2 = 5e-5
    assert rep.prob_tv_distance == pytest.approx(0.5 * 1e-4, rel=1e-2)
    assert rep.amplification_factor == pytest.approx(100, rel=1e-9)


def test_criterion_without_coupling():
    rep = criterion.evaluate_criterion(bmv.BmvParams(0.0, 0.9), DEVICE)
    assert rep.visibility_gap == pytest.approx(0, abs=1e-12)
    assert not rep.distinguishable_by_visibility
    assert not rep.distinguishable_by_probability


def test_criterion_k_two():
    rep = criterion.evaluate_criterion(bmv.BmvParams.from_k(1e-3, 2), DEVICE)
    assert rep.visibility_gap == pytest.approx(0.8, abs=2e-2)


def test_report_as_dict_keeps_all_fields():
    d = criterion.evaluate_criterion(bmv.BmvParams.from_k(1e-2, 1), DEVICE).as_dict()
    for key in ("v_quantum", "v_classical", "visibility_gap", "prob_tv_distance", "distinguishable_by_probability",
                "distinguishable_by_visibility", "shift", "amplification_factor"):
        assert key in d


@pytest.mark.parametrize("k", [0.5, 1, 2])
def test_gap_approaches_limit(k):
    for theta in (1e-2, 1e-3, 1e-4):
        gap = criterion.evaluate_criterion(bmv.BmvParams.from_k(theta, k), DEVICE).visibility_gap
        assert abs(gap - k * k / (1 + k * k)) <= 10 * theta * k


def test_visibility_flag_monotone_in_k():
    flags = [criterion.evaluate_criterion(bmv.BmvParams.from_k(1e-3, k), DeviceModel(0.05)).distinguishable_by_visibility
             for k in np.linspace(0.05, 3, 15)]
    first = flags.index(True)
    assert all(flags[first:])
    assert not flags[0]


@pytest.mark.parametrize("k,expected", [(1, 0.5), (math.sqrt(2), 2 / 3)])
def test_expectation_shift_examples(k, expected):
    assert criterion.expectation_shift(bmv.BmvParams.from_k(1e-2, k)) == pytest.approx(expected, abs=1e-10)


def test_expectation_shift_without_coupling():
    assert criterion.expectation_shift(bmv.BmvParams(0.0, 0.9)) == 0.0


@pytest.mark.parametrize("gamma", [1e-2, 1e-4, 1e-6])
def test_resolution_regime_shift(gamma):
    theta = math.sqrt(gamma)
    params = bmv.BmvParams.from_weak_value(theta, criterion.resolution_ceiling(gamma))
    shift = criterion.expectation_shift(params)
    assert shift == pytest.approx(2 / 3, abs=1e-10)
    assert shift > 10 * gamma
    # the exact steered state deviates at O(theta^2)
    assert abs(criterion.exact_expectation_shift(params) - 2 / 3) <= 2 * theta**2


@pytest.mark.parametrize("gamma,expected", [(1e-4, 141.4213562373095), (0.5, 2.0), (2e-8, 1e4)])
def test_resolution_ceiling(gamma, expected):
    assert criterion.resolution_ceiling(DeviceModel(gamma)) == pytest.approx(expected, rel=1e-12)


def test_budget_printed_example(caplog):
    device = DeviceModel(1e-4, shot_rate=1e6, duration=86400)
    with caplog.at_level(logging.INFO, logger="gravamp.criterion"):
        rep = criterion.experiment_budget(None, device, p_herald=2e-8)
    assert rep.heralded_events == 864
    assert rep.unweighted_events == 1728
    assert "basis-selection" in caplog.text


def test_budget_exact_probability_path():
    params = bmv.BmvParams.from_weak_value(1e-4, 1e4)
    rep = criterion.experiment_budget(params, DEVICE)
    # exact p = alpha^2 (cos^2 + sin^2 a_w^2) ~ 1e-8 * 2
    assert rep.p_herald == pytest.approx(2e-8, rel=1e-6)
    assert rep.unweighted_events == pytest.approx(1728, rel=1e-6)
    assert rep.heralded_events == pytest.approx(864, rel=1e-6)
    assert rep.saving_factor == pytest.approx(1e4, rel=1e-9)


def test_budget_scales_linearly():
    base = criterion.experiment_budget(None, DeviceModel(1e-4, 1e6, 100.0, 0.25), p_herald=1e-6).heralded_events
    for kw, factor in ((dict(shot_rate=3e6), 3), (dict(duration=700.0), 7), (dict(basis_choice_prob=0.5), 2)):
        args = dict(gamma=1e-4, shot_rate=1e6, duration=100.0, basis_choice_prob=0.25)
        args.update(kw)
        got = criterion.experiment_budget(None, DeviceModel(**args), p_herald=1e-6).heralded_events
        assert got == pytest.approx(factor * base, rel=1e-12)


def test_budget_needs_an_input():
    with pytest.raises(ValueError):
        criterion.experiment_budget(None, DEVICE)


PARAMS = bmv.BmvParams.from_k(1e-2, 1)


def test_noisy_endpoints():
    assert criterion.noisy_visibilities(PARAMS, DepolarizingNoise(0)).values == pytest.approx((1,) * 4, abs=1e-10)
    assert criterion.noisy_visibilities(PARAMS, DepolarizingNoise(1)).values == pytest.approx((0.5,) * 4, abs=1e-12)


def test_noisy_monotone():
    vals = np.array([criterion.noisy_visibilities(PARAMS, DepolarizingNoise(q)).values for q in np.linspace(0, 1, 21)])
    assert np.all(np.diff(vals, axis=0) <= 1e-12)


def test_noisy_matches_derived_form_not_printed_one(caplog):
    with caplog.at_level(logging.INFO, logger="gravamp.criterion"):
        rep = criterion.noisy_visibilities(PARAMS, DepolarizingNoise(0.2))
    assert rep.values[0] == pytest.approx(1 - 0.2 / 2, abs=1e-12)
    assert rep.diagnostics["max_abs_exact_minus_derived"] <= 1e-12
    assert rep.diagnostics["max_abs_exact_minus_printed"] == pytest.approx(0.9 - 1 / 1.2, abs=1e-12)
    assert "printed" in caplog.text


def test_noisy_joint_probabilities_are_affine():
    qs = (0.1, 0.4, 0.7)
    for i in range(4):
        joint = []
        for q in qs:
            rep = criterion.noisy_visibilities(PARAMS, DepolarizingNoise(q))
            joint.append(rep.values[i] * rep.probabilities[i])
        slope1 = (joint[1] - joint[0]) / (qs[1] - qs[0])
        slope2 = (joint[2] - joint[1]) / (qs[2] - qs[1])
        assert slope1 == pytest.approx(slope2, abs=1e-12)


@pytest.mark.parametrize("i", [0, 1])
def test_unamplified_noisy_visibilities_are_affine(i):
    v = [criterion.noisy_visibilities(PARAMS, DepolarizingNoise(q)).values[i] for q in (0.1, 0.4, 0.7)]
    assert v[1] - v[0] == pytest.approx(v[2] - v[1], abs=1e-12)


def test_amplified_noisy_visibility_is_not_affine():
    v = [criterion.noisy_visibilities(PARAMS, DepolarizingNoise(q)).values[2] for q in (0.1, 0.4, 0.7)]
    assert abs((v[1] - v[0]) - (v[2] - v[1])) > 1e-6


def test_decoherence_threshold():
    device = DeviceModel(1e-3)
    q_star = criterion.decoherence_threshold(PARAMS, device)
    assert 0 < q_star < 1
    v_c = classical.classical_visibilities(classical.build_separable(PARAMS), PARAMS).values[2]
    margin = lambda q: criterion.noisy_visibilities(PARAMS, DepolarizingNoise(q)).values[2] - v_c - device.gamma
    assert margin(q_star) > 0
    assert margin(q_star + 2e-6) <= 0


def test_threshold_zero_when_nothing_resolvable():
    assert criterion.decoherence_threshold(PARAMS, DeviceModel(0.999)) == 0.0


def test_flag_clears_above_threshold():
    device = DeviceModel(1e-3)
    q_star = criterion.decoherence_threshold(PARAMS, device)
    below = criterion.evaluate_criterion(PARAMS, device, DepolarizingNoise(q_star * 0.5))
    above = criterion.evaluate_criterion(PARAMS, device, DepolarizingNoise(min(1.0, q_star + 1e-3)))
    assert below.distinguishable_by_visibility
    assert not above.distinguishable_by_visibility
