"""Quantum-mediator predictions for the two-mass interferometer.

The protocol is parameterised by the coupling phase ``theta`` (the
gravitational phase times the interaction time over 2 hbar) and the
post-selection parameter ``epsilon`` of the basis
``|eps> = eps|0> - sqrt(1-eps^2)|1>``, ``|eps_perp> = sqrt(1-eps^2)|0> + eps|1>``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import linalg as la
from .quantum import PureState, SteeringEnsemble, VisibilityReport, steer, visibility

EPS_MIN = 1 / math.sqrt(2)


class PostSelectionError(ValueError):
    """The post-selected state is orthogonal to the pre-selected one."""


@dataclass(frozen=True)
class GravityParams:
    G: float
    m1: float
    m2: float
    d: float
    L: float
    tau: float
    hbar: float

    def __post_init__(self):
        if self.d == 0:
            raise ValueError("arm separation d must be non-zero")
        for name in ("G", "m1", "m2", "d", "tau", "hbar"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive, got {getattr(self, name)}")
        if self.L < 0:
            raise ValueError(f"arm length L must be non-negative, got {self.L}")


def gravitational_phase(gp: GravityParams) -> tuple[float, float]:
    """Return ``(delta_phi, theta)``.

    ``delta_phi = G m1 m2 (1/d - 1/sqrt(d^2 + L^2))`` is the energy difference
    between the near and far path pairings, ``theta = delta_phi tau / (2 hbar)``.
    """
    inv_near = 1.0 / gp.d
    inv_far = 1.0 / math.hypot(gp.d, gp.L)
    delta_phi = gp.G * gp.m1 * gp.m2 * (inv_near - inv_far)
    theta = delta_phi * gp.tau / (2.0 * gp.hbar)
    return delta_phi, max(theta, 0.0)


@dataclass(frozen=True)
class WeakValuePair:
    a_w: float
    a_w_perp: float
    k: float | None = None


def weak_values(epsilon: float, theta: float | None = None) -> WeakValuePair:
    """Weak values of Z for pre-selection |+> and post-selection |eps>, |eps_perp>."""
    if not EPS_MIN <= epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in (1/sqrt(2), 1], got {epsilon}")
    f = math.sqrt(1.0 - epsilon * epsilon)
    den = epsilon - f
    if epsilon == EPS_MIN or den <= 0.0:
        raise PostSelectionError("post-selection orthogonal: <eps|+> = 0, the weak value diverges")
    a_w = (epsilon + f) / den
    a_w_perp = -den / (epsilon + f)
    return WeakValuePair(a_w, a_w_perp, None if theta is None else theta * a_w)


def epsilon_for_weak_value(a_w: float) -> float:
    """Invert ``a_w = (t + 1)/(t - 1)`` with ``t = eps/sqrt(1 - eps^2)``."""
    if not a_w >= 1.0:
        raise ValueError(f"weak value must be >= 1, got {a_w}")
    if math.isinf(a_w):
        raise PostSelectionError("an infinite weak value needs an orthogonal post-selection")
    if a_w == 1.0:
        return 1.0
    t = (a_w + 1.0) / (a_w - 1.0)
    return t / math.sqrt(1.0 + t * t)


@dataclass(frozen=True)
class BmvParams:
    theta: float
    epsilon: float

    def __post_init__(self):
        if not (math.isfinite(self.theta) and 0.0 <= self.theta < math.pi / 2):
            raise ValueError(f"theta must lie in [0, pi/2), got {self.theta}")
        if not (EPS_MIN < self.epsilon <= 1.0):
            raise ValueError(f"epsilon must lie in (1/sqrt(2), 1], got {self.epsilon}")

    @classmethod
    def from_weak_value(cls, theta: float, a_w: float) -> "BmvParams":
        return cls(theta, epsilon_for_weak_value(a_w))

    @classmethod
    def from_k(cls, theta: float, k: float) -> "BmvParams":
        """Amplification regime ``a_w = k / theta``."""
        if not theta > 0:
            raise ValueError("the k parameterisation needs theta > 0")
        if not k > 0:
            raise ValueError(f"k must be positive, got {k}")
        return cls.from_weak_value(theta, k / theta)

    @property
    def sqrt_comp(self) -> float:
        return math.sqrt(1.0 - self.epsilon**2)

    @property
    def weak(self) -> WeakValuePair:
        return weak_values(self.epsilon, self.theta)

    @property
    def k(self) -> float:
        return self.theta * self.weak.a_w

    @property
    def alpha(self) -> float:
        """<eps|+>."""
        return (self.epsilon - self.sqrt_comp) / math.sqrt(2.0)

    @property
    def beta(self) -> float:
        """<eps_perp|+>."""
        return (self.epsilon + self.sqrt_comp) / math.sqrt(2.0)


def evolution_unitary(theta: float) -> np.ndarray:
    """``cos(theta) I x I + i sin(theta) Z x Z``."""
    zz = la.kron(la.PAULI_Z, la.PAULI_Z)
    return la.as_matrix(math.cos(theta) * np.eye(4) + 1j * math.sin(theta) * zz)


def entangled_state(theta: float) -> PureState:
    """``cos(theta)|++> + i sin(theta)|-->``."""
    v = math.cos(theta) * la.kron(la.PLUS, la.PLUS) + 1j * math.sin(theta) * la.kron(la.MINUS, la.MINUS)
    return PureState.normalized(v)


def eps_kets(epsilon: float) -> tuple[np.ndarray, np.ndarray]:
    f = math.sqrt(1.0 - epsilon * epsilon)
    return la.ket(epsilon, -f), la.ket(f, epsilon)


def basis_a() -> tuple[np.ndarray, np.ndarray]:
    return la.ZERO, la.ONE


def basis_b(params: BmvParams) -> tuple[np.ndarray, np.ndarray]:
    return eps_kets(params.epsilon)


def phi_ket(theta: float, sign: int) -> np.ndarray:
    """``|phi_pm> = cos(theta)|+> +- i sin(theta)|->``."""
    return la.as_vector(math.cos(theta) * la.PLUS + sign * 1j * math.sin(theta) * la.MINUS)


def chi_tilde(theta: float, weak_value: float) -> np.ndarray:
    """Unnormalised steered ket ``cos(theta)|+> + i sin(theta) A_w |->``."""
    return la.as_vector(math.cos(theta) * la.PLUS + 1j * math.sin(theta) * weak_value * la.MINUS)


def chi_norm_sq(theta: float, weak_value: float) -> float:
    return math.cos(theta) ** 2 + math.sin(theta) ** 2 * weak_value**2


def reference_projectors(params: BmvParams) -> tuple[np.ndarray, ...]:
    """Pi_0..Pi_3 = projectors onto phi_+, phi_-, chi_eps, chi_eps_perp."""
    w = params.weak
    return (
        la.projector(phi_ket(params.theta, +1)),
        la.projector(phi_ket(params.theta, -1)),
        la.projector(chi_tilde(params.theta, w.a_w)),
        la.projector(chi_tilde(params.theta, w.a_w_perp)),
    )


def closed_form_probabilities(params: BmvParams) -> tuple[float, float, float, float]:
    """Heralding probabilities {1/2, 1/2, alpha^2 |chi_eps|^2, beta^2 |chi_perp|^2}."""
    w = params.weak
    return (
        0.5,
        0.5,
        params.alpha**2 * chi_norm_sq(params.theta, w.a_w),
        params.beta**2 * chi_norm_sq(params.theta, w.a_w_perp),
    )


def two_setting_ensembles(rho_AB, params: BmvParams) -> tuple[SteeringEnsemble, SteeringEnsemble]:
    """Steer ``rho_AB`` with basis a = {0, 1} and basis b = {eps, eps_perp}."""
    ens_a = steer(rho_AB, basis_a(), labels=("0", "1"))
    ens_b = steer(rho_AB, basis_b(params), labels=("eps", "eps_perp"))
    return ens_a, ens_b


def ensemble_visibilities(ens_a: SteeringEnsemble, ens_b: SteeringEnsemble, params: BmvParams) -> tuple[float, ...]:
    pis = reference_projectors(params)
    conds = (ens_a.conditional(0), ens_a.conditional(1), ens_b.conditional(0), ens_b.conditional(1))
    return tuple(visibility(c, p) for c, p in zip(conds, pis))


def ensemble_probabilities(ens_a: SteeringEnsemble, ens_b: SteeringEnsemble) -> tuple[float, ...]:
    return ens_a.probabilities + ens_b.probabilities


def quantum_predictions(params: BmvParams) -> tuple[SteeringEnsemble, SteeringEnsemble, VisibilityReport]:
    psi = entangled_state(params.theta)
    ens_a, ens_b = two_setting_ensembles(psi, params)
    report = VisibilityReport(
        model="quantum",
        values=ensemble_visibilities(ens_a, ens_b, params),
        probabilities=ensemble_probabilities(ens_a, ens_b),
    )
    return ens_a, ens_b, report
