"""Finite-shot Monte Carlo of the two-setting protocol.

Each run picks basis ``a`` or ``b``, draws A's outcome, possibly misreports
it (cross-talk with probability ``gamma``), then measures B with the
reference projector belonging to the *reported* outcome. Shots are
generated in blocks; block ``i`` uses its own PCG64 stream spawned from the
seed, so results do not depend on the number of workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np

from . import bmv, classical
from .criterion import DeviceModel, quantum_state
from .quantum import DepolarizingNoise, visibility

BASES = ("a", "b")
OUTCOMES = (("0", "1"), ("eps", "eps_perp"))
DEFAULT_BLOCK = 100_000
MODELS = ("quantum", "classical", "product", "noisy")


@dataclass(frozen=True)
class ShotRecord:
    run_index: int
    basis: str
    outcome_A: str
    outcome_B: int


@dataclass(frozen=True)
class ShotBlock:
    """Shots ``start .. start + n`` as parallel arrays.

    ``basis`` is 0 (a) or 1 (b), ``outcome_A`` the reported index within the
    basis, ``outcome_B`` 1 when B passes the reference projector.
    """

    start: int
    basis: np.ndarray
    outcome_A: np.ndarray
    outcome_B: np.ndarray

    def __len__(self) -> int:
        return self.basis.size

    def records(self) -> Iterator[ShotRecord]:
        for j in range(len(self)):
            b = int(self.basis[j])
            yield ShotRecord(self.start + j, BASES[b], OUTCOMES[b][int(self.outcome_A[j])], int(self.outcome_B[j]))

    def counts(self) -> np.ndarray:
        """Integer counts indexed ``[basis, reported, outcome_B]``."""
        flat = self.basis.astype(np.int64) * 4 + self.outcome_A.astype(np.int64) * 2 + self.outcome_B
        return np.bincount(flat, minlength=8).reshape(2, 2, 2)


@dataclass(frozen=True)
class ShotModel:
    """Exact per-shot probabilities for one model.

    ``p_outcome[b, t]`` is P(true outcome t | basis b); ``p_pass[b, t, r]``
    is Tr(Pi_r rho_t) for reported outcome r.
    """

    name: str
    p_outcome: np.ndarray
    p_pass: np.ndarray

    def cell_probabilities(self, device: DeviceModel) -> np.ndarray:
        """Exact probabilities of ``[basis, reported, outcome_B]``."""
        g = device.gamma
        wb = np.array([1 - device.basis_choice_prob, device.basis_choice_prob])
        flip = np.array([[1 - g, g], [g, 1 - g]])  # [true, reported]
        out = np.zeros((2, 2, 2))
        for b in range(2):
            for t in range(2):
                for r in range(2):
                    w = wb[b] * self.p_outcome[b, t] * flip[t, r]
                    out[b, r, 1] += w * self.p_pass[b, t, r]
                    out[b, r, 0] += w * (1 - self.p_pass[b, t, r])
        return out


def build_model(model: str, params: bmv.BmvParams, noise: DepolarizingNoise | None = None) -> ShotModel:
    """``quantum``, ``classical`` (canonical mixture), ``product`` (heralding-matched) or ``noisy``."""
    if model == "quantum":
        rho, name = quantum_state(params), "quantum"
    elif model == "noisy":
        if noise is None:
            raise ValueError("the noisy model needs a DepolarizingNoise")
        rho, name = quantum_state(params, noise), f"noisy(q={noise.q})"
    elif model == "classical":
        rho, name = classical.build_separable(params).density, "classical"
    elif model == "product":
        rho, name = classical.product_simulator(params, match_heralding=True).density, "product"
    else:
        raise ValueError(f"unknown model {model!r}; choose from {MODELS}")
    ens = bmv.two_setting_ensembles(rho, params)
    pis = bmv.reference_projectors(params)
    p_outcome = np.array([e.probabilities for e in ens])
    p_pass = np.zeros((2, 2, 2))
    for b, e in enumerate(ens):
        for t in range(2):
            cond = e.conditional_states[t]
            for r in range(2):
                p_pass[b, t, r] = 0.0 if cond is None else min(1.0, max(0.0, visibility(cond, pis[2 * b + r])))
    return ShotModel(name, p_outcome, p_pass)


def _draw_block(sm: ShotModel, device: DeviceModel, start: int, n: int, seed_seq: np.random.SeedSequence) -> ShotBlock:
    rng = np.random.Generator(np.random.PCG64(seed_seq))
    basis = (rng.random(n) < device.basis_choice_prob).astype(np.uint8)
    true = (rng.random(n) >= sm.p_outcome[basis, 0]).astype(np.uint8)
    flip = rng.random(n) < device.gamma
    reported = np.where(flip, 1 - true, true).astype(np.uint8)
    passed = (rng.random(n) < sm.p_pass[basis, true, reported]).astype(np.uint8)
    return ShotBlock(start, basis, reported, passed)


def sample_blocks(
    model: str | ShotModel,
    params: bmv.BmvParams,
    device: DeviceModel,
    n_shots: int,
    seed: int,
    noise: DepolarizingNoise | None = None,
    block_size: int = DEFAULT_BLOCK,
    workers: int = 1,
) -> list[ShotBlock]:
    """Draw ``n_shots`` shots in blocks; identical output for any ``workers``."""
    if n_shots <= 0:
        raise ValueError(f"n_shots must be positive, got {n_shots}")
    sm = model if isinstance(model, ShotModel) else build_model(model, params, noise)
    n_blocks = -(-n_shots // block_size)
    children = np.random.SeedSequence(seed).spawn(n_blocks)
    jobs = [(i * block_size, min(block_size, n_shots - i * block_size), children[i]) for i in range(n_blocks)]
    if workers <= 1:
        return [_draw_block(sm, device, *job) for job in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda job: _draw_block(sm, device, *job), jobs))


def sample_shots(
    model: str,
    params: bmv.BmvParams,
    device: DeviceModel,
    n_shots: int,
    seed: int,
    noise: DepolarizingNoise | None = None,
) -> Iterator[ShotRecord]:
    """Stream of individual shot records."""
    for block in sample_blocks(model, params, device, n_shots, seed, noise):
        yield from block.records()


def sample_counts(
    model: str | ShotModel,
    params: bmv.BmvParams,
    device: DeviceModel,
    n_shots: int,
    seed: int,
    noise: DepolarizingNoise | None = None,
    heralded_equivalent: bool = False,
) -> np.ndarray:
    """Multinomial counts over ``[basis, reported, outcome_B]``.

    With ``heralded_equivalent`` the run length is chosen so that the
    amplified cell (basis b, reported eps) expects ``n_shots`` events under
    the quantum model.
    """
    if n_shots <= 0:
        raise ValueError(f"n_shots must be positive, got {n_shots}")
    sm = model if isinstance(model, ShotModel) else build_model(model, params, noise)
    cells = sm.cell_probabilities(device)
    total = n_shots
    if heralded_equivalent:
        herald = build_model("quantum", params).cell_probabilities(device)[1, 0].sum()
        total = int(round(n_shots / herald))
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    flat = cells.ravel()
    return rng.multinomial(total, flat / flat.sum()).reshape(2, 2, 2)


@dataclass(frozen=True)
class Estimate:
    """Binomial proportion; ``value`` is ``None`` when there are no trials."""

    value: float | None
    standard_error: float | None
    successes: int
    trials: int

    @property
    def has_data(self) -> bool:
        return self.trials > 0

    def __str__(self) -> str:
        if not self.has_data:
            return "no data"
        return f"{self.value:.6g} +- {self.standard_error:.3g}"

    def as_dict(self) -> dict:
        if not self.has_data:
            return {"value": "no data", "standard_error": "no data", "successes": 0, "trials": 0}
        return {"value": self.value, "standard_error": self.standard_error, "successes": self.successes, "trials": self.trials}


def proportion(successes: int, trials: int, interval: str = "wilson", z: float = 1.0) -> Estimate:
    """Point estimate with a Wilson (default) or Wald standard error."""
    if trials < 0 or not 0 <= successes <= trials:
        raise ValueError(f"invalid counts {successes}/{trials}")
    if trials == 0:
        return Estimate(None, None, 0, 0)
    p = successes / trials
    if interval == "wald":
        se = math.sqrt(p * (1 - p) / trials)
    elif interval == "wilson":
        z2 = z * z
        se = (z / (1 + z2 / trials)) * math.sqrt(p * (1 - p) / trials + z2 / (4 * trials * trials)) / z
    else:
        raise ValueError(f"interval must be 'wilson' or 'wald', got {interval!r}")
    return Estimate(p, se, successes, trials)


@dataclass(frozen=True)
class EstimateReport:
    estimated_visibilities: tuple[Estimate, ...]
    estimated_probabilities: tuple[Estimate, ...]
    shots_used: int
    seed: int | None
    counts: np.ndarray = field(repr=False, default=None)

    def visibility_values(self) -> tuple[float | None, ...]:
        return tuple(e.value for e in self.estimated_visibilities)

    def as_dict(self) -> dict:
        return {
            "estimated_visibilities": [e.as_dict() for e in self.estimated_visibilities],
            "estimated_probabilities": [e.as_dict() for e in self.estimated_probabilities],
            "shots_used": self.shots_used,
            "seed": self.seed,
        }


def _counts_from(shots) -> np.ndarray:
    if isinstance(shots, np.ndarray):
        return shots.astype(np.int64)
    total = np.zeros((2, 2, 2), dtype=np.int64)
    for item in shots:
        if isinstance(item, ShotBlock):
            total += item.counts()
        elif isinstance(item, ShotRecord):
            b = BASES.index(item.basis)
            total[b, OUTCOMES[b].index(item.outcome_A), item.outcome_B] += 1
        else:
            raise TypeError(f"cannot estimate from {type(item).__name__}")
    return total


def estimate(shots: Iterable | np.ndarray, seed: int | None = None, interval: str = "wilson") -> EstimateReport:
    """Visibilities P(B passes | basis, reported) and probabilities P(reported | basis)."""
    counts = _counts_from(shots)
    n = int(counts.sum())
    if n == 0:
        raise ValueError("estimate needs at least one shot")
    vis, probs = [], []
    for b in range(2):
        n_basis = int(counts[b].sum())
        for r in range(2):
            cell = int(counts[b, r].sum())
            vis.append(proportion(int(counts[b, r, 1]), cell, interval))
            probs.append(proportion(cell, n_basis, interval))
    return EstimateReport(tuple(vis), tuple(probs), n, seed, counts)


def combined_z(e1: Estimate, e2: Estimate) -> float:
    """``|v1 - v2| / sqrt(se1^2 + se2^2)``; NaN if either cell has no data."""
    if not (e1.has_data and e2.has_data):
        return math.nan
    se = math.hypot(e1.standard_error, e2.standard_error)
    diff = abs(e1.value - e2.value)
    if se == 0:
        return 0.0 if diff == 0 else math.inf
    return diff / se


def exact_expectations(model: str | ShotModel, params: bmv.BmvParams, device: DeviceModel, noise=None):
    """Exact (visibilities, probabilities) that :func:`estimate` converges to."""
    sm = model if isinstance(model, ShotModel) else build_model(model, params, noise)
    cells = sm.cell_probabilities(device)
    vis, probs = [], []
    for b in range(2):
        for r in range(2):
            cell = cells[b, r].sum()
            vis.append(cells[b, r, 1] / cell if cell > 0 else math.nan)
            probs.append(cell / cells[b].sum())
    return tuple(vis), tuple(probs)


def reported_distribution(model: str | ShotModel, params: bmv.BmvParams, device: DeviceModel, noise=None) -> np.ndarray:
    """Exact four-outcome distribution ``P(basis, reported)``."""
    sm = model if isinstance(model, ShotModel) else build_model(model, params, noise)
    return sm.cell_probabilities(device).sum(axis=2).ravel()
