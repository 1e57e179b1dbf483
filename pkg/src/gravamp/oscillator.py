"""Harmonic oscillator coupled to a two-level atom.

The oscillator is displaced by ``+-eta`` depending on the atom's position
(``|L>`` or ``|R>``), leaving a pair of cat states entangled with the atom.
Oscillator states are kept as finite sums of coherent states, whose inner
products are closed-form Gaussians; Fock vectors appear only in the
cross-check helpers at the bottom of this module.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import expm

from . import classical
from . import linalg as la
from .quantum import steer, visibility

HERALD_FLOOR = 1e-30
QUAD_ORDER = 32
QUAD_TOL = 1e-8
DEFAULT_GAMMA = 1e-4


class DegenerateCatError(ValueError):
    """The odd cat state does not exist for eta = 0."""


class UnobservableError(ValueError):
    """Heralding probability is below the configured floor."""


class QuadratureError(RuntimeError):
    """Thermal quadrature did not converge."""


@dataclass(frozen=True)
class OscillatorParams:
    omega: float
    g: float
    t: float
    theta_v: float
    nbar: float = 0.0
    max_lambda: float = 0.1

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError(f"omega must be positive, got {self.omega}")
        if self.g < 0:
            raise ValueError(f"g must be non-negative, got {self.g}")
        if self.g / self.omega > self.max_lambda:
            raise ValueError(f"lambda = g/omega = {self.g / self.omega:.3g} exceeds {self.max_lambda} (weak coupling)")
        if not 0.0 < self.theta_v < math.pi / 4:
            raise ValueError(f"theta_v must lie in (0, pi/4), got {self.theta_v}")
        if self.nbar < 0:
            raise ValueError(f"nbar must be non-negative, got {self.nbar}")
        if not math.isfinite(self.t):
            raise ValueError("t must be finite")

    @property
    def lam(self) -> float:
        return self.g / self.omega

    @classmethod
    def from_lambda(cls, lam: float, omega_t: float, theta_v: float, nbar: float = 0.0, **kw) -> "OscillatorParams":
        """Dimensionless construction with omega = 1."""
        return cls(omega=1.0, g=lam, t=omega_t, theta_v=theta_v, nbar=nbar, **kw)


def displaced_amplitude(params: OscillatorParams) -> complex:
    """``eta = lambda (exp(-i omega t) - 1)``."""
    return params.lam * (cmath.exp(-1j * params.omega * params.t) - 1.0)


def coherent_overlap(alpha: complex, beta: complex) -> complex:
    """``<alpha|beta>`` for coherent states."""
    alpha, beta = complex(alpha), complex(beta)
    return cmath.exp(-0.5 * abs(alpha) ** 2 - 0.5 * abs(beta) ** 2 + alpha.conjugate() * beta)


@dataclass(frozen=True)
class CoherentSuperposition:
    """``sum_j c_j |alpha_j>``."""

    terms: tuple[tuple[complex, complex], ...]

    def __post_init__(self):
        terms = tuple((complex(c), complex(a)) for c, a in self.terms)
        for c, a in terms:
            if not (cmath.isfinite(c) and cmath.isfinite(a)):
                raise ValueError("non-finite coefficient or amplitude")
        object.__setattr__(self, "terms", terms)

    def inner(self, other: "CoherentSuperposition") -> complex:
        """``<self|other>``."""
        return sum(
            c1.conjugate() * c2 * coherent_overlap(a1, a2) for c1, a1 in self.terms for c2, a2 in other.terms
        )

    def norm(self) -> float:
        return math.sqrt(max(self.inner(self).real, 0.0))

    def normalized(self) -> "CoherentSuperposition":
        n = self.norm()
        if n == 0:
            raise ValueError("cannot normalise a zero superposition")
        return self.scaled(1.0 / n)

    def scaled(self, s: complex) -> "CoherentSuperposition":
        return CoherentSuperposition(tuple((s * c, a) for c, a in self.terms))

    def __add__(self, other: "CoherentSuperposition") -> "CoherentSuperposition":
        return CoherentSuperposition(self.terms + other.terms)


def cat_constants(eta: complex) -> tuple[float, float]:
    """``(c_plus, c_minus)``; ``c_minus`` is infinite at eta = 0."""
    x = 2.0 * abs(eta) ** 2
    c_plus = 1.0 / math.sqrt(2.0 * (1.0 + math.exp(-x)))
    # 1 - e^{-x} via expm1 keeps precision for small |eta|
    den = -math.expm1(-x)
    c_minus = math.inf if den == 0 else 1.0 / math.sqrt(2.0 * den)
    return c_plus, c_minus


def cat_states(eta: complex) -> tuple[CoherentSuperposition, CoherentSuperposition]:
    """Even and odd cats ``c_+-(|eta> +- |-eta>)``."""
    if eta == 0:
        raise DegenerateCatError("eta = 0: the odd cat state is undefined")
    c_plus, c_minus = cat_constants(eta)
    plus = CoherentSuperposition(((c_plus, eta), (c_plus, -eta)))
    minus = CoherentSuperposition(((c_minus, eta), (-c_minus, -eta)))
    return plus, minus


@dataclass(frozen=True)
class JointState:
    """``sum_k |osc_k> x |atom_k>`` with the atom in the L/R basis (L = |0>, R = |1>)."""

    branches: tuple[tuple[CoherentSuperposition, np.ndarray], ...]

    def norm_sq(self) -> float:
        total = 0j
        for o1, a1 in self.branches:
            for o2, a2 in self.branches:
                total += o1.inner(o2) * la.inner(a1, a2)
        return total.real

    def branch_weights(self) -> tuple[float, ...]:
        return tuple(o.inner(o).real * float(np.vdot(a, a).real) for o, a in self.branches)

    def atom_amplitudes(self, bra: CoherentSuperposition) -> np.ndarray:
        """Unnormalised atom ket ``(<bra| x I)|self>``."""
        out = np.zeros(2, dtype=np.complex128)
        for osc, atom in self.branches:
            out += bra.inner(osc) * np.asarray(atom)
        return out


def evolved_joint_state(params: OscillatorParams) -> JointState:
    """``(1/2c_+)|cat_+>|L> + (1/2c_-)|cat_->|R>``."""
    eta = displaced_amplitude(params)
    plus, minus = cat_states(eta)
    c_plus, c_minus = cat_constants(eta)
    return JointState(((plus.scaled(0.5 / c_plus), la.ZERO), (minus.scaled(0.5 / c_minus), la.ONE)))


def branch_weights(eta: complex) -> tuple[float, float]:
    """``((1/2c_+)^2, (1/2c_-)^2)`` = ``((1 + e^{-2|eta|^2})/2, (1 - e^{-2|eta|^2})/2)``."""
    x = 2.0 * abs(eta) ** 2
    return 0.5 * (1.0 + math.exp(-x)), -0.5 * math.expm1(-x)


def steering_basis_v(theta_v: float, eta: complex) -> tuple[CoherentSuperposition, CoherentSuperposition]:
    """``|v> = sin|cat_+> + cos|cat_->`` and ``|v_perp> = cos|cat_+> - sin|cat_->``."""
    plus, minus = cat_states(eta)
    s, c = math.sin(theta_v), math.cos(theta_v)
    return plus.scaled(s) + minus.scaled(c), plus.scaled(c) + minus.scaled(-s)


def balanced_theta_v(eta: complex) -> float:
    """Angle with ``<v|cat_+>/2c_+ = <v|cat_->/2c_-``, i.e. ``tan(theta_v) = c_+/c_-``."""
    c_plus, c_minus = cat_constants(eta)
    if math.isinf(c_minus):
        raise DegenerateCatError("eta = 0: no balancing angle")
    return math.atan2(c_plus, c_minus)


def mu_ket(theta_v: float, eta: complex) -> np.ndarray:
    """Normalised displayed amplified atom state for outcome ``v``."""
    c_plus, c_minus = cat_constants(eta)
    if math.isinf(c_minus):
        return la.ZERO
    amp = np.array([math.sin(theta_v) / (2 * c_plus), math.cos(theta_v) / (2 * c_minus)], dtype=np.complex128)
    return la.as_vector(amp / np.linalg.norm(amp))


@dataclass(frozen=True)
class OscillatorVisibility:
    heralding_prob: float
    visibility: float
    k_factor: float
    classical_visibility: float
    gamma: float

    def __iter__(self):
        return iter((self.heralding_prob, self.visibility, self.k_factor))


def effective_two_qubit(eta: complex) -> np.ndarray:
    """The cat/atom state written on {cat_+, cat_-} x {L, R}."""
    w_plus, w_minus = branch_weights(eta)
    return la.ket(math.sqrt(w_plus), 0, 0, math.sqrt(w_minus))


def classical_comparator(theta_v: float, eta: complex) -> float:
    """V^C for outcome ``v`` from the separable mixture of the effective two-qubit state."""
    psi = effective_two_qubit(eta)
    s, c = math.sin(theta_v), math.cos(theta_v)
    bases = (
        (la.ket(1 / math.sqrt(2), 1 / math.sqrt(2)), la.ket(1 / math.sqrt(2), -1 / math.sqrt(2))),
        (la.ket(s, c), la.ket(c, -s)),
    )
    model = classical.separable_from_state(psi, bases)
    ens = steer(model.density, bases[1])
    return visibility(ens.conditional(0), la.projector(mu_ket(theta_v, eta)))


def oscillator_visibility(
    params: OscillatorParams, gamma: float = DEFAULT_GAMMA, floor: float = HERALD_FLOOR
) -> OscillatorVisibility:
    """Pure-state visibility of the atom steered by the oscillator outcome ``v``."""
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma must lie in (0, 1), got {gamma}")
    eta = displaced_amplitude(params)
    if eta == 0:
        # no coupling: the oscillator stays in |0> = cat_+ limit and the atom in |L>
        p = math.sin(params.theta_v) ** 2
        if p <= floor:
            raise UnobservableError(f"heralding probability {p:.3g} below floor {floor:.3g}")
        return OscillatorVisibility(p, 1.0, 0.0, 1.0, gamma)
    joint = evolved_joint_state(params)
    v, _ = steering_basis_v(params.theta_v, eta)
    amp = joint.atom_amplitudes(v)
    p = float(np.vdot(amp, amp).real)
    if p <= floor:
        raise UnobservableError(f"heralding probability {p:.3g} below floor {floor:.3g}")
    cond = la.projector(amp)
    vis = visibility(cond, la.projector(mu_ket(params.theta_v, eta)))
    v_c = classical_comparator(params.theta_v, eta)
    return OscillatorVisibility(p, vis, (vis - v_c) / gamma, v_c, gamma)


def thermal_amplitude(zeta: complex, eta: complex, bra: CoherentSuperposition) -> np.ndarray:
    """``(<bra| x I)|Psi_zeta>`` with ``|Psi_zeta> = 1/2(|z+eta> + |z-eta>)|L> + 1/2(|z+eta> - |z-eta>)|R>``."""
    a = sum(c.conjugate() * coherent_overlap(al, zeta + eta) for c, al in bra.terms)
    b = sum(c.conjugate() * coherent_overlap(al, zeta - eta) for c, al in bra.terms)
    return np.array([0.5 * (a + b), 0.5 * (a - b)], dtype=np.complex128)


def _fsum_matrix(mats: Sequence[np.ndarray]) -> np.ndarray:
    stack = np.asarray(mats)
    out = np.empty(stack.shape[1:], dtype=np.complex128)
    for idx in np.ndindex(*stack.shape[1:]):
        col = stack[(slice(None),) + idx]
        out[idx] = complex(math.fsum(col.real), math.fsum(col.imag))
    return out


def _thermal_unnormalized(params: OscillatorParams, order: int) -> np.ndarray:
    eta = displaced_amplitude(params)
    v, _ = steering_basis_v(params.theta_v, eta)
    x, w = np.polynomial.hermite.hermgauss(order)
    s = math.sqrt(params.nbar)
    terms = []
    for xi, wi in zip(x, w):
        for xj, wj in zip(x, w):
            amp = thermal_amplitude(s * complex(xi, xj), eta, v)
            terms.append((wi * wj / math.pi) * np.outer(amp, amp.conj()))
    return _fsum_matrix(terms)


@dataclass(frozen=True)
class ThermalVisibility:
    heralding_prob: float
    visibility: float
    order: int
    convergence: float

    def __iter__(self):
        return iter((self.heralding_prob, self.visibility))


def _herald_and_visibility(rho_un: np.ndarray, mu: np.ndarray, floor: float) -> tuple[float, float]:
    p = float(np.trace(rho_un).real)
    if p <= floor:
        raise UnobservableError(f"heralding probability {p:.3g} below floor {floor:.3g}")
    return p, float(np.real(np.vdot(mu, rho_un @ mu))) / p


def thermal_visibility(
    params: OscillatorParams, order: int = QUAD_ORDER, tol: float = QUAD_TOL, floor: float = HERALD_FLOOR
) -> ThermalVisibility:
    """Thermal average by 2-D Gauss-Hermite quadrature in (Re zeta, Im zeta).

    The result at ``order`` is compared with ``2 * order``; a difference
    above ``tol`` raises :class:`QuadratureError`.
    """
    if not params.nbar > 0:
        raise ValueError("thermal_visibility needs nbar > 0; use oscillator_visibility for the ground state")
    eta = displaced_amplitude(params)
    mu = mu_ket(params.theta_v, eta)
    p1, v1 = _herald_and_visibility(_thermal_unnormalized(params, order), mu, floor)
    _, v2 = _herald_and_visibility(_thermal_unnormalized(params, 2 * order), mu, floor)
    diff = abs(v1 - v2)
    if diff > tol:
        raise QuadratureError(f"quadrature orders {order} and {2 * order} differ by {diff:.3g} > {tol:.3g}")
    return ThermalVisibility(p1, v1, order, diff)


def thermal_visibility_mc(
    params: OscillatorParams, n_samples: int, rng: np.random.Generator, n_batches: int = 20
) -> tuple[float, float]:
    """Monte Carlo thermal visibility ``(value, standard_error)`` from batch means."""
    if not params.nbar > 0:
        raise ValueError("Monte Carlo average needs nbar > 0")
    if n_samples < n_batches:
        raise ValueError("need at least one sample per batch")
    eta = displaced_amplitude(params)
    v, _ = steering_basis_v(params.theta_v, eta)
    mu = mu_ket(params.theta_v, eta)
    sd = math.sqrt(params.nbar / 2.0)
    zetas = sd * (rng.standard_normal(n_samples) + 1j * rng.standard_normal(n_samples))
    batches = np.array_split(zetas, n_batches)
    vals = []
    for batch in batches:
        rho = sum(np.outer(a, a.conj()) for a in (thermal_amplitude(z, eta, v) for z in batch))
        vals.append(float(np.real(np.vdot(mu, rho @ mu)) / np.trace(rho).real))
    vals = np.asarray(vals)
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(n_batches))


# Fock-space cross-checks

def fock_coherent(alpha: complex, cutoff: int = 40) -> np.ndarray:
    """Truncated Fock vector of ``|alpha>``."""
    n = np.arange(cutoff)
    log_fact = np.array([math.lgamma(k + 1) for k in n])
    alpha = complex(alpha)
    if alpha == 0:
        v = np.zeros(cutoff, dtype=np.complex128)
        v[0] = 1.0
        return v
    log_mag = -0.5 * abs(alpha) ** 2 + n * math.log(abs(alpha)) - 0.5 * log_fact
    return np.exp(log_mag) * np.exp(1j * n * cmath.phase(alpha))


def fock_superposition(state: CoherentSuperposition, cutoff: int = 40) -> np.ndarray:
    return sum(c * fock_coherent(a, cutoff) for c, a in state.terms)


def fock_displacement(eta: complex, cutoff: int = 64) -> np.ndarray:
    """Truncated ``D(eta) = exp(eta a^dag - conj(eta) a)``."""
    a = np.diag(np.sqrt(np.arange(1, cutoff)), k=1).astype(np.complex128)
    return expm(eta * a.conj().T - np.conj(eta) * a)
