"""Separable (classical-mediator) models and their steering predictions.

The canonical model mixes the four product states singled out by the
quantum steering ensembles,

    rho_C = 1/2 [p0 |0><0| x Pi_0 + p1 |1><1| x Pi_1]
          + 1/2 [p_eps |eps><eps| x Pi_2 + p_perp |eps_perp><eps_perp| x Pi_3],

with ``p_i`` the quantum heralding probabilities and ``Pi_i`` the quantum
steered states. Its conditional states are evaluated both by generic 4x4
algebra and by the explicit ratio formulas, so the two can be compared.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import bmv
from . import linalg as la
from .quantum import (
    STATE_TOL,
    DensityMatrix,
    SteeringEnsemble,
    VisibilityReport,
    ppt_min_eigenvalue,
    steer,
)


class SeparabilityError(ValueError):
    pass


class ZeroHeraldError(ZeroDivisionError):
    """A classical conditional state was requested for a zero-probability outcome."""


@dataclass(frozen=True)
class SeparableModel:
    """Convex mixture of product states ``sum_i w_i rho_A^i x rho_B^i``.

    ``weight_deficit`` records ``sum(raw weights) - 1`` before renormalisation.
    """

    components: tuple[tuple[float, np.ndarray, np.ndarray], ...]
    weight_deficit: float = 0.0
    label: str = "classical"
    _rho: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        total = sum(w for w, _, _ in self.components)
        if abs(total - 1.0) > STATE_TOL:
            raise SeparabilityError(f"weights sum to {total!r}, not 1")
        if any(w < 0 for w, _, _ in self.components):
            raise SeparabilityError("negative mixture weight")
        rho = sum(w * la.kron(a, b) for w, a, b in self.components)
        dm = DensityMatrix(rho)
        if dm.dim == 4 and ppt_min_eigenvalue(dm) < -STATE_TOL:
            raise SeparabilityError("assembled state fails the PPT test")
        object.__setattr__(self, "_rho", dm.matrix)

    @classmethod
    def from_raw_weights(
        cls, raw: Sequence[tuple[float, np.ndarray, np.ndarray]], label: str = "classical"
    ) -> "SeparableModel":
        total = math.fsum(w for w, _, _ in raw)
        comps = tuple((w / total, la.as_matrix(a), la.as_matrix(b)) for w, a, b in raw)
        return cls(comps, weight_deficit=total - 1.0, label=label)

    @property
    def density(self) -> np.ndarray:
        return self._rho

    @property
    def weights(self) -> tuple[float, ...]:
        return tuple(w for w, _, _ in self.components)


def separable_from_ensembles(
    bases: Sequence[Sequence[np.ndarray]],
    probabilities: Sequence[Sequence[float]],
    states_B: Sequence[Sequence[np.ndarray]],
    basis_weights: Sequence[float] | None = None,
    label: str = "classical",
) -> SeparableModel:
    """Mix ``|x><x| x rho_B^x`` over every outcome ``x`` of every basis.

    Outcome ``x`` of basis ``j`` gets raw weight ``basis_weights[j] * p_x``.
    """
    if basis_weights is None:
        basis_weights = [1.0 / len(bases)] * len(bases)
    raw = []
    for wj, kets, probs, rhos in zip(basis_weights, bases, probabilities, states_B):
        for x, p, rb in zip(kets, probs, rhos):
            raw.append((wj * p, la.projector(x), rb))
    return SeparableModel.from_raw_weights(raw, label=label)


def separable_from_state(psi_AB, bases: Sequence[Sequence[np.ndarray]], basis_weights=None) -> SeparableModel:
    """Generic construction from any two-qubit pure state and measurement bases on A."""
    probs, states = [], []
    for kets in bases:
        ens = steer(psi_AB, kets)
        probs.append(ens.probabilities)
        states.append([ens.conditional(i).matrix for i in range(len(kets))])
    return separable_from_ensembles(bases, probs, states, basis_weights)


def build_separable(params: bmv.BmvParams) -> SeparableModel:
    """The canonical mixture built from the displayed closed forms."""
    p = bmv.closed_form_probabilities(params)
    pis = bmv.reference_projectors(params)
    bases = (bmv.basis_a(), bmv.basis_b(params))
    return separable_from_ensembles(bases, (p[:2], p[2:]), (pis[:2], pis[2:]), (0.5, 0.5))


def product_simulator(params: bmv.BmvParams, match_heralding: bool = False) -> SeparableModel:
    """Single product state ``|s> x |+>`` mimicking the quantum statistics.

    With ``match_heralding=False`` this is ``|+> x |+>``, which reproduces the
    quantum heralding probabilities up to O(theta^2). With ``True`` the phase
    of ``|s> = (|0> + e^{i phi}|1>)/sqrt(2)`` is tuned so that ``|<eps|s>|^2``
    equals the quantum ``p_eps`` exactly, so all four heralding probabilities
    coincide with the quantum ones.
    """
    if not match_heralding:
        return SeparableModel(((1.0, la.projector(la.PLUS), la.projector(la.PLUS)),), label="product")
    e, f = params.epsilon, params.sqrt_comp
    p_eps = bmv.closed_form_probabilities(params)[2]
    if f == 0.0:
        cos_phi = 1.0
    else:
        cos_phi = (1.0 - 2.0 * p_eps) / (2.0 * e * f)
    if cos_phi < -1.0 - 1e-12 or cos_phi > 1.0 + 1e-12:
        raise SeparabilityError("no product state |s> x |+> reproduces this heralding probability")
    phi = math.acos(min(1.0, max(-1.0, cos_phi)))
    s = la.ket(1 / math.sqrt(2), np.exp(1j * phi) / math.sqrt(2))
    return SeparableModel(((1.0, la.projector(s), la.projector(la.PLUS)),), label="product-matched")


def classical_steered_states(model: SeparableModel, params: bmv.BmvParams) -> tuple[SteeringEnsemble, SteeringEnsemble]:
    return bmv.two_setting_ensembles(model.density, params)


def classical_visibilities(model: SeparableModel, params: bmv.BmvParams) -> VisibilityReport:
    ens_a, ens_b = classical_steered_states(model, params)
    for ens in (ens_a, ens_b):
        for label, c in zip(ens.basis_labels, ens.conditional_states):
            if c is None:
                raise ZeroHeraldError(f"classical heralding probability for outcome {label!r} is zero")
    return VisibilityReport(
        model=model.label,
        values=bmv.ensemble_visibilities(ens_a, ens_b, params),
        probabilities=bmv.ensemble_probabilities(ens_a, ens_b),
        diagnostics={"weight_deficit": model.weight_deficit},
    )


def classical_visibility_limit(k: float) -> float:
    """Small-coupling limit ``1/(1 + k^2)`` of the classical Pi_2 visibility."""
    return 1.0 / (1.0 + k * k)


def _overlaps(params: bmv.BmvParams) -> dict[str, float]:
    """|<phi_pm|chi>|^2 from the closed forms |cos^2 +- sin^2 A_w|^2 / |chi~|^2."""
    c2 = math.cos(params.theta) ** 2
    s2 = math.sin(params.theta) ** 2
    w = params.weak
    out = {}
    for name, a in (("eps", w.a_w), ("perp", w.a_w_perp)):
        norm = c2 + s2 * a * a
        out[f"plus_{name}"] = (c2 + s2 * a) ** 2 / norm
        out[f"minus_{name}"] = (c2 - s2 * a) ** 2 / norm
    return out


def displayed_conditional_numerators(params: bmv.BmvParams) -> tuple[np.ndarray, ...]:
    """Unnormalised classical conditionals written term by term."""
    e2 = params.epsilon**2
    p0, p1, pe, pp = bmv.closed_form_probabilities(params)
    P0, P1, P2, P3 = bmv.reference_projectors(params)
    return (
        0.5 * p0 * P0 + 0.5 * e2 * pe * P2 + 0.5 * (1 - e2) * pp * P3,
        0.5 * p1 * P1 + 0.5 * (1 - e2) * pe * P2 + 0.5 * e2 * pp * P3,
        0.5 * e2 * p0 * P0 + 0.5 * (1 - e2) * p1 * P1 + 0.5 * pe * P2,
        0.5 * (1 - e2) * p0 * P0 + 0.5 * e2 * p1 * P1 + 0.5 * pp * P3,
    )


def displayed_classical_visibilities(params: bmv.BmvParams) -> tuple[float, float, float, float]:
    """Ratio formulas for V^C_{Pi_0..Pi_3} in terms of heralding probabilities and overlaps."""
    e2 = params.epsilon**2
    p0, p1, pe, pp = bmv.closed_form_probabilities(params)
    o = _overlaps(params)
    v0 = (0.5 * p0 + 0.5 * e2 * pe * o["plus_eps"] + 0.5 * (1 - e2) * pp * o["plus_perp"]) / (
        0.5 * p0 + 0.5 * e2 * pe + 0.5 * (1 - e2) * pp
    )
    v1 = (0.5 * p1 + 0.5 * (1 - e2) * pe * o["minus_eps"] + 0.5 * e2 * pp * o["minus_perp"]) / (
        0.5 * p1 + 0.5 * (1 - e2) * pe + 0.5 * e2 * pp
    )
    v2 = (0.5 * e2 * p0 * o["plus_eps"] + 0.5 * (1 - e2) * p1 * o["minus_eps"] + 0.5 * pe) / (
        0.5 * e2 * p0 + 0.5 * (1 - e2) * p1 + 0.5 * pe
    )
    # The eps_perp denominator pairs e^2 with p1 (the outcome-1 weight).
    v3 = (0.5 * (1 - e2) * p0 * o["plus_perp"] + 0.5 * e2 * p1 * o["minus_perp"] + 0.5 * pp) / (
        0.5 * (1 - e2) * p0 + 0.5 * e2 * p1 + 0.5 * pp
    )
    return v0, v1, v2, v3


def expanded_classical_visibilities(params: bmv.BmvParams) -> tuple[float, float, float, float]:
    """The same visibilities with p0 = p1 = 1/2 and p = alpha^2 |chi~|^2 substituted."""
    th = params.theta
    c2, s2 = math.cos(th) ** 2, math.sin(th) ** 2
    e2 = params.epsilon**2
    a2, b2 = params.alpha**2, params.beta**2
    w = params.weak
    A, Ap = w.a_w, w.a_w_perp
    nA, nAp = c2 + s2 * A * A, c2 + s2 * Ap * Ap
    v0 = (0.25 + 0.5 * e2 * a2 * (c2 + s2 * A) ** 2 + 0.5 * (1 - e2) * b2 * (c2 + s2 * Ap) ** 2) / (
        0.25 + 0.5 * e2 * a2 * nA + 0.5 * (1 - e2) * b2 * nAp
    )
    v1 = (0.25 + 0.5 * (1 - e2) * a2 * (c2 - s2 * A) ** 2 + 0.5 * e2 * b2 * (c2 - s2 * Ap) ** 2) / (
        0.25 + 0.5 * (1 - e2) * a2 * nA + 0.5 * e2 * b2 * nAp
    )
    v2 = (0.25 * e2 * (c2 + s2 * A) ** 2 / nA + 0.25 * (1 - e2) * (c2 - s2 * A) ** 2 / nA + 0.5 * a2 * nA) / (
        0.25 * e2 + 0.25 * (1 - e2) + 0.5 * a2 * nA
    )
    v3 = (
        0.25 * (1 - e2) * (c2 + s2 * Ap) ** 2 / nAp + 0.25 * e2 * (c2 - s2 * Ap) ** 2 / nAp + 0.5 * b2 * nAp
    ) / (0.25 * (1 - e2) + 0.25 * e2 + 0.5 * b2 * nAp)
    return v0, v1, v2, v3


def heralding_distribution(rho_AB, params: bmv.BmvParams, basis_choice_prob: float = 0.5) -> np.ndarray:
    """Joint distribution over (basis, A outcome): outcomes 0, 1, eps, eps_perp.

    Basis b is chosen with probability ``basis_choice_prob``.
    """
    ens_a, ens_b = bmv.two_setting_ensembles(rho_AB, params)
    wa, wb = 1.0 - basis_choice_prob, basis_choice_prob
    return np.array([wa * ens_a.probabilities[0], wa * ens_a.probabilities[1],
                     wb * ens_b.probabilities[0], wb * ens_b.probabilities[1]])


def tv_distance(p, q) -> float:
    return 0.5 * float(np.sum(np.abs(np.asarray(p) - np.asarray(q))))
