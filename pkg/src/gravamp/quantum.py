"""Quantum states, projective steering, depolarising noise and entanglement oracles."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import linalg as la

log = logging.getLogger(__name__)

STATE_TOL = 1e-10
# Branches with heralding probability at or below this are treated as never occurring.
ZERO_BRANCH = 1e-30


class InvalidStateError(ValueError):
    pass


class UndefinedBranchError(ValueError):
    """A conditional state was requested for a zero-probability outcome."""


@dataclass(frozen=True)
class PureState:
    vector: np.ndarray

    def __post_init__(self):
        v = la.as_vector(self.vector)
        n = np.linalg.norm(v)
        if abs(n - 1) > STATE_TOL:
            raise InvalidStateError(f"state norm {n!r} differs from 1")
        object.__setattr__(self, "vector", v)

    @classmethod
    def normalized(cls, v) -> "PureState":
        v = np.asarray(v, dtype=np.complex128)
        n = np.linalg.norm(v)
        if n == 0:
            raise InvalidStateError("cannot normalise the zero vector")
        return cls(v / n)

    @property
    def dim(self) -> int:
        return self.vector.size

    def density(self) -> "DensityMatrix":
        return DensityMatrix(la.outer(self.vector, self.vector))

    def projector(self) -> np.ndarray:
        return la.outer(self.vector, self.vector)


@dataclass(frozen=True)
class DensityMatrix:
    matrix: np.ndarray

    def __post_init__(self):
        m = la.as_matrix(self.matrix)
        if m.shape[0] != m.shape[1]:
            raise InvalidStateError(f"density matrix must be square, got {m.shape}")
        if not la.is_hermitian(m, STATE_TOL):
            raise InvalidStateError("density matrix is not Hermitian")
        tr = np.trace(m).real
        if abs(tr - 1) > STATE_TOL:
            raise InvalidStateError(f"trace {tr!r} differs from 1")
        lo = la.hermitian_eigvals(m).min()
        if lo < -STATE_TOL:
            raise InvalidStateError(f"negative eigenvalue {lo!r}")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))


def maximally_mixed(d: int) -> DensityMatrix:
    return DensityMatrix(la.identity(d) / d)


@dataclass(frozen=True)
class SteeringEnsemble:
    """Conditional states of B after a complete projective measurement on A.

    ``conditional_states[i]`` is ``None`` when outcome ``i`` has zero
    probability; use :meth:`conditional` to get an error instead.
    """

    basis_labels: tuple[str, ...]
    projectors_A: tuple[np.ndarray, ...]
    conditional_states: tuple[DensityMatrix | None, ...]
    probabilities: tuple[float, ...]
    unnormalized: tuple[np.ndarray, ...] = field(repr=False, default=())

    def conditional(self, i: int) -> DensityMatrix:
        rho = self.conditional_states[i]
        if rho is None:
            raise UndefinedBranchError(
                f"outcome {self.basis_labels[i]!r} has zero probability; its conditional state is undefined"
            )
        return rho

    def index(self, label: str) -> int:
        return self.basis_labels.index(label)


@dataclass(frozen=True)
class DepolarizingNoise:
    q: float

    def __post_init__(self):
        if not 0.0 <= self.q <= 1.0:
            raise ValueError(f"decoherence degree q must lie in [0, 1], got {self.q}")


@dataclass(frozen=True)
class VisibilityReport:
    """Four visibilities V_{Pi_0..Pi_3} for one model."""

    model: str
    values: tuple[float, float, float, float]
    probabilities: tuple[float, float, float, float] | None = None
    diagnostics: dict = field(default_factory=dict)

    def __getitem__(self, i: int) -> float:
        return self.values[i]

    def as_dict(self) -> dict:
        d = {"model": self.model, "visibilities": list(self.values)}
        if self.probabilities is not None:
            d["probabilities"] = list(self.probabilities)
        if self.diagnostics:
            d["diagnostics"] = dict(self.diagnostics)
        return d


def _as_density_array(rho) -> np.ndarray:
    if isinstance(rho, DensityMatrix):
        return rho.matrix
    if isinstance(rho, PureState):
        return rho.projector()
    a = np.asarray(rho, dtype=np.complex128)
    return la.outer(a, a) if a.ndim == 1 else a


def steer(
    rho_AB,
    basis_A: Sequence,
    labels: Sequence[str] | None = None,
    dims: tuple[int, int] | None = None,
) -> SteeringEnsemble:
    """Measure A in a complete rank-1 basis and return B's conditional ensemble.

    ``basis_A`` holds projectors (or kets, which are turned into projectors).
    """
    rho = _as_density_array(rho_AB)
    projs = []
    for b in basis_A:
        b = np.asarray(b, dtype=np.complex128)
        projs.append(la.projector(b) if b.ndim == 1 else la.as_matrix(b))
    da = projs[0].shape[0]
    if dims is None:
        dims = (da, rho.shape[0] // da)
    if dims[0] != da or rho.shape != (dims[0] * dims[1],) * 2:
        raise la.DimensionError(f"state of shape {rho.shape} does not split as {dims}")
    total = sum(projs)
    if np.max(np.abs(total - np.eye(da))) > STATE_TOL:
        raise ValueError("projectors do not sum to the identity: basis is not complete")
    labels = tuple(labels) if labels is not None else tuple(str(i) for i in range(len(projs)))

    pure = _pure_vector(rho_AB)
    eye_b = la.identity(dims[1])
    probs, conds, raw = [], [], []
    for p in projs:
        if pure is not None:
            # Gram form keeps relative accuracy when the branch probability is tiny
            x = p @ pure.reshape(dims)
            unnorm = la.as_matrix(x.T @ x.conj())
        else:
            unnorm = la.partial_trace(la.kron(p, eye_b) @ rho, dims, keep="B")
        prob = float(np.trace(unnorm).real)
        raw.append(unnorm)
        probs.append(prob)
        if prob <= ZERO_BRANCH:
            conds.append(None)
        else:
            tol = STATE_TOL if pure is not None else max(STATE_TOL, _ROUNDOFF * np.abs(rho).sum() / prob)
            conds.append(_conditional(unnorm / prob, tol))
    return SteeringEnsemble(labels, tuple(projs), tuple(conds), tuple(probs), tuple(raw))


# Backward-error scale for partial traces of mixed states.
_ROUNDOFF = 64 * np.finfo(float).eps


def _pure_vector(state) -> np.ndarray | None:
    if isinstance(state, PureState):
        return state.vector
    a = np.asarray(state) if not isinstance(state, DensityMatrix) else None
    if a is not None and a.ndim == 1:
        return np.asarray(a, dtype=np.complex128) / np.linalg.norm(a)
    return None


def _conditional(m: np.ndarray, tol: float) -> DensityMatrix:
    """Symmetrise and, within ``tol``, clip negative eigenvalues left by roundoff."""
    m = 0.5 * (m + m.conj().T)
    w, v = np.linalg.eigh(m)
    if w.min() < -tol:
        raise InvalidStateError(f"conditional state has eigenvalue {w.min()!r} beyond roundoff {tol:.3g}")
    if w.min() < -STATE_TOL:
        log.info("clipping roundoff eigenvalue %.3g of a conditional state (tolerance %.3g)", w.min(), tol)
        w = np.clip(w, 0.0, None)
        m = (v * w) @ v.conj().T
        m = m / np.trace(m).real
    return DensityMatrix(m)


def visibility(rho_B, projector) -> float:
    """Tr(Pi rho) for a rank-1 projector Pi."""
    if rho_B is None:
        raise UndefinedBranchError("visibility of an undefined conditional state")
    rho = _as_density_array(rho_B)
    pi = np.asarray(projector, dtype=np.complex128)
    if pi.ndim == 1:
        pi = la.projector(pi)
    if pi.shape != rho.shape:
        raise la.DimensionError(f"projector {pi.shape} does not match state {rho.shape}")
    if not la.is_hermitian(pi, STATE_TOL) or abs(np.trace(pi).real - 1) > STATE_TOL or np.max(
        np.abs(pi @ pi - pi)
    ) > STATE_TOL:
        raise ValueError("visibility needs a rank-1 projector")
    return float(np.real(np.trace(pi @ rho)))


def depolarize(rho, noise: DepolarizingNoise) -> DensityMatrix:
    m = _as_density_array(rho)
    d = m.shape[0]
    return DensityMatrix((1 - noise.q) * m + noise.q * np.eye(d) / d)


def concurrence(psi) -> float:
    """Wootters concurrence of a two-qubit pure state, |<psi|Y x Y|psi*>|."""
    v = psi.vector if isinstance(psi, PureState) else np.asarray(psi, dtype=np.complex128)
    if v.shape != (4,):
        raise la.DimensionError(f"concurrence needs a two-qubit pure state, got shape {v.shape}")
    yy = np.kron(la.PAULI_Y, la.PAULI_Y)
    return float(abs(np.vdot(v, yy @ v.conj())))


def ppt_min_eigenvalue(rho_AB) -> float:
    """Smallest eigenvalue of the partial transpose of a two-qubit state."""
    m = _as_density_array(rho_AB)
    if m.shape != (4, 4):
        raise la.DimensionError(f"PPT test needs a 4x4 state, got {m.shape}")
    return float(la.hermitian_eigvals(la.partial_transpose(m, (2, 2))).min())


def mixture(weights: Sequence[float], states: Sequence) -> np.ndarray:
    return sum(w * _as_density_array(s) for w, s in zip(weights, states))
