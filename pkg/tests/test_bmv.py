import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gravamp import bmv
from gravamp import linalg as la
from gravamp.quantum import concurrence, steer
from oracles import entangled_state_unitary, si_theta, weak_value_definition

EPS_GRID = np.linspace(0.72, 0.99, 10)


def test_phase_unit_geometry():
    gp = bmv.GravityParams(G=1, m1=1, m2=1, d=1, L=math.sqrt(3), tau=2, hbar=1)
    dphi, theta = bmv.gravitational_phase(gp)
    assert dphi == pytest.approx(0.5, abs=1e-15)
    assert theta == pytest.approx(0.5, abs=1e-15)


def test_phase_vanishes_without_arm_length():
    gp = bmv.GravityParams(G=6.674e-11, m1=1e-14, m2=2e-14, d=1e-4, L=0, tau=1, hbar=1.054571817e-34)
    assert bmv.gravitational_phase(gp) == (0.0, 0.0)


def test_phase_si_example_against_high_precision():
    G, d, L, tau, hbar = 6.674e-11, 2.5e-4, 2.5e-4, 2.5, 1.054571817e-34
    geom = 1 / d - 1 / math.hypot(d, L)
    m = math.sqrt(2 * hbar * 1e-2 / (G * geom * tau))
    _, theta = bmv.gravitational_phase(bmv.GravityParams(G, m, m, d, L, tau, hbar))
    _, ref = si_theta(G, m, m, d, L, tau, hbar)
    assert ref == pytest.approx(1e-2, rel=1e-12)
    assert abs(theta - ref) <= 1e-15


def test_gravity_params_validation():
    with pytest.raises(ValueError):
        bmv.GravityParams(G=1, m1=1, m2=1, d=0, L=1, tau=1, hbar=1)
    with pytest.raises(ValueError):
        bmv.GravityParams(G=1, m1=-1, m2=1, d=1, L=1, tau=1, hbar=1)
    with pytest.raises(ValueError):
        bmv.GravityParams(G=1, m1=1, m2=1, d=1, L=-1, tau=1, hbar=1)


def test_evolution_unitary_examples():
    assert np.allclose(bmv.evolution_unitary(0), np.eye(4))
    zz = np.kron(np.diag([1, -1]), np.diag([1, -1]))
    assert np.allclose(bmv.evolution_unitary(math.pi / 2), 1j * zz, atol=1e-15)
    out = bmv.evolution_unitary(0.1) @ la.kron(la.PLUS, la.PLUS)
    expected = math.cos(0.1) * la.kron(la.PLUS, la.PLUS) + 1j * math.sin(0.1) * la.kron(la.MINUS, la.MINUS)
    assert np.allclose(out, expected, atol=1e-15)


@settings(max_examples=100, deadline=None)
@given(st.floats(-10, 10))
def test_unitary_on_plus_plus_matches_state(theta):
    u = bmv.evolution_unitary(theta)
    assert np.max(np.abs(u.conj().T @ u - np.eye(4))) <= 1e-12
    assert np.max(np.abs(u @ la.kron(la.PLUS, la.PLUS) - bmv.entangled_state(theta).vector)) <= 1e-12
    assert np.max(np.abs(bmv.entangled_state(theta).vector - entangled_state_unitary(theta))) <= 1e-12


@pytest.mark.parametrize("theta,c", [(0, 0), (math.pi / 4, 1), (0.1, math.sin(0.2))])
def test_entangled_state_concurrence(theta, c):
    assert concurrence(bmv.entangled_state(theta)) == pytest.approx(c, abs=1e-12)


def test_weak_value_examples():
    w = bmv.weak_values(1.0)
    assert (w.a_w, w.a_w_perp) == (1.0, -1.0)
    w = bmv.weak_values(0.8)
    assert w.a_w == pytest.approx(7, abs=1e-12)
    assert w.a_w_perp == pytest.approx(-1 / 7, abs=1e-12)


def test_weak_value_rejects_orthogonal_post_selection():
    with pytest.raises(bmv.PostSelectionError):
        bmv.weak_values(1 / math.sqrt(2))
    with pytest.raises(ValueError):
        bmv.weak_values(0.5)


@pytest.mark.parametrize("eps", EPS_GRID)
def test_weak_values_match_definition_and_product(eps):
    w = bmv.weak_values(eps)
    assert w.a_w == pytest.approx(weak_value_definition(eps), rel=1e-12)
    assert w.a_w * w.a_w_perp == pytest.approx(-1, abs=1e-10)


def test_large_weak_value_overlaps():
    p = bmv.BmvParams.from_weak_value(1e-4, 1e4)
    assert p.weak.a_w == pytest.approx(1e4, rel=1e-9)
    f = p.sqrt_comp
    assert p.epsilon - f == pytest.approx(math.sqrt(2) * 1e-4, rel=1e-3)
    assert p.alpha == pytest.approx(1e-4, rel=1e-3)
    # the product that is close to sqrt(2) is (eps - f) * a_w, not alpha * a_w
    assert (p.epsilon - f) * p.weak.a_w == pytest.approx(math.sqrt(2), rel=1e-6)
    assert p.alpha * p.weak.a_w == pytest.approx(1, rel=1e-6)


@settings(max_examples=50, deadline=None)
@given(st.floats(1.0, 1e6))
def test_epsilon_inversion_round_trip(a_w):
    eps = bmv.epsilon_for_weak_value(a_w)
    assert bmv.weak_values(eps).a_w == pytest.approx(a_w, rel=1e-8)


def test_params_validation():
    with pytest.raises(ValueError):
        bmv.BmvParams(math.pi / 2, 0.8)
    with pytest.raises(ValueError):
        bmv.BmvParams(0.1, 0.7)
    with pytest.raises(ValueError):
        bmv.BmvParams.from_k(0, 1)
    assert bmv.BmvParams.from_k(1e-2, 1).k == pytest.approx(1, rel=1e-12)


def test_predictions_without_coupling():
    eps = 0.85
    _, _, rep = bmv.quantum_predictions(bmv.BmvParams(0.0, eps))
    f = math.sqrt(1 - eps**2)
    assert rep.probabilities[:2] == pytest.approx((0.5, 0.5))
    assert rep.probabilities[2] == pytest.approx((eps - f) ** 2 / 2, abs=1e-15)
    assert rep.values == pytest.approx((1, 1, 1, 1), abs=1e-12)


def test_predictions_example():
    ens_a, ens_b, rep = bmv.quantum_predictions(bmv.BmvParams(0.1, 0.8))
    assert rep.probabilities[2] == pytest.approx(0.02 * (math.cos(0.1) ** 2 + 49 * math.sin(0.1) ** 2), abs=1e-12)
    assert max(abs(v - 1) for v in rep.values) <= 1e-10


def test_steered_chi_at_unit_k_is_balanced():
    params = bmv.BmvParams.from_k(1e-2, 1)
    _, ens_b, _ = bmv.quantum_predictions(params)
    target = la.projector((la.PLUS + 1j * la.MINUS) / math.sqrt(2))
    # equal up to O(theta^2)
    assert np.max(np.abs(ens_b.conditional(0).matrix - target)) < 1e-3


@pytest.mark.parametrize("theta", np.logspace(-5, -1, 5))
@pytest.mark.parametrize("eps", EPS_GRID)
def test_probabilities_close_and_visibilities_equal_one(theta, eps):
    params = bmv.BmvParams(theta, eps)
    ens_a, ens_b, rep = bmv.quantum_predictions(params)
    assert sum(ens_a.probabilities) == pytest.approx(1, abs=1e-10)
    assert sum(ens_b.probabilities) == pytest.approx(1, abs=1e-10)
    assert max(abs(v - 1) for v in rep.values) <= 1e-10
    assert np.allclose(rep.probabilities, bmv.closed_form_probabilities(params), atol=1e-12)
    brute = steer(bmv.entangled_state(theta).density(), bmv.eps_kets(eps))
    assert brute.probabilities[0] == pytest.approx(bmv.closed_form_probabilities(params)[2], abs=1e-12)
