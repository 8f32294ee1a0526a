"""The sparse Ising machine pipeline: embed, rescale, sample, discard, check.

Probabilities here are over the physical Gibbs distribution of the rescaled
embedded Hamiltonian. ``p_sparse`` is the joint mass of states that are chain
consistent *and* unembed to a ground state of the problem; the conditional
success rate among consistent samples is ``p_sparse / p_cc``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .embedding import Embedding, EmbeddedHamiltonian, HardwareGraph, embed, with_chain_strength
from .errors import ParameterError, SaturationError
from .gibbs_engine import EventEstimate, SamplerConfig, estimate_from_mask, mcmc_sample
from .ising_core import (
    DEFAULT_ENUMERATION_LIMIT,
    DEFAULT_TIE_TOL,
    IsingHamiltonian,
    boltzmann,
    check_enumerable,
    energies,
    enumerate_energies,
    ground_mask,
    iter_blocks,
)
from .rescaling import DEFAULT_RANGES, HardwareRanges, effective_beta, scale_factor


class ChainEvents:
    """Vectorized chain events over rows of physical spins.

    Rows are in the node order of the embedded Hamiltonian. Logical ground
    membership is looked up through each chain's first qubit, which is the
    natural bijection on consistent rows.
    """

    def __init__(self, H_e: EmbeddedHamiltonian, tie_tol: float = DEFAULT_TIE_TOL,
                 limit: int = DEFAULT_ENUMERATION_LIMIT):
        problem = H_e.problem
        if problem is None:
            raise ParameterError("embedded Hamiltonian does not carry its problem Hamiltonian")
        index = H_e.hamiltonian.index
        self.labels = tuple(problem.nodes)
        self.chain_columns = {
            label: np.array([index[u] for u in H_e.embedding.chains[label]], dtype=np.intp)
            for label in self.labels
        }
        self._reps = np.array([cols[0] for cols in self.chain_columns.values()], dtype=np.intp)
        self._weights = np.int64(1) << np.arange(len(self.labels), dtype=np.int64)
        self.problem_energies = enumerate_energies(problem, limit)
        self.problem_ground = ground_mask(self.problem_energies, tie_tol)

    def broken(self, S: np.ndarray) -> dict:
        out = {}
        for label, cols in self.chain_columns.items():
            if cols.size < 2:
                out[label] = np.zeros(len(S), dtype=bool)
            else:
                out[label] = np.any(S[:, cols] != S[:, cols[:1]], axis=1)
        return out

    def consistent(self, S: np.ndarray, broken: Mapping | None = None) -> np.ndarray:
        broken = broken if broken is not None else self.broken(S)
        mask = np.ones(len(S), dtype=bool)
        for b in broken.values():
            mask &= ~b
        return mask

    def logical_index(self, S: np.ndarray) -> np.ndarray:
        bits = (1 - S[:, self._reps].astype(np.int64)) // 2
        return bits @ self._weights

    def solves(self, S: np.ndarray, consistent: np.ndarray | None = None) -> np.ndarray:
        """Consistent rows whose unembedded configuration is a problem ground state."""
        consistent = consistent if consistent is not None else self.consistent(S)
        return consistent & self.problem_ground[self.logical_index(S)]


@dataclass
class PhysicalEnumeration:
    """Lambda-independent masks over every physical configuration.

    ``intra`` holds the intra-chain alignment ``sum s_u s_v`` per state, so the
    embedded energy at chain strength ``lam`` is ``base - lam * intra``.
    """

    events: ChainEvents
    consistent: np.ndarray
    solves: np.ndarray
    broken: dict
    intra: np.ndarray
    n_physical: int

    @classmethod
    def build(cls, H_e: EmbeddedHamiltonian, tie_tol: float = DEFAULT_TIE_TOL,
              limit: int = DEFAULT_ENUMERATION_LIMIT) -> "PhysicalEnumeration":
        n = len(H_e.hamiltonian)
        check_enumerable(n, limit)
        events = ChainEvents(H_e, tie_tol, limit)
        total = 1 << n
        consistent = np.empty(total, dtype=bool)
        solves = np.empty(total, dtype=bool)
        intra = np.empty(total, dtype=float)
        broken = {label: np.empty(total, dtype=bool) for label in events.labels}
        for start, block in iter_blocks(n):
            stop = start + len(block)
            b = events.broken(block)
            for label in b:
                broken[label][start:stop] = b[label]
            c = events.consistent(block, b)
            consistent[start:stop] = c
            solves[start:stop] = events.solves(block, c)
            intra[start:stop] = H_e.intra_energy(block)
        return cls(events, consistent, solves, broken, intra, n)

    def base_energies(self, H_e: EmbeddedHamiltonian, limit: int = DEFAULT_ENUMERATION_LIMIT) -> np.ndarray:
        """Embedded energies with the chain term removed."""
        return enumerate_energies(H_e.hamiltonian, limit) + H_e.chain_strength * self.intra


@dataclass(frozen=True)
class PipelineReport:
    chain_strength: float
    scale: float
    beta_eff: float
    p_cc: float
    p_solve_eff: float
    p_sparse: float
    per_chain_break: Mapping
    method: str = "exact"
    intervals: Mapping = field(default_factory=dict)

    @property
    def p_sparse_given_cc(self) -> float:
        """Success rate among samples that survive the discard step."""
        return self.p_sparse / self.p_cc if self.p_cc > 0 else float("nan")

    @property
    def decomposition_residual(self) -> float:
        return abs(self.p_sparse - self.p_cc * self.p_solve_eff)


def _problem_solve_probability(events: ChainEvents, beta_eff: float) -> float:
    P = boltzmann(events.problem_energies, beta_eff)
    return float(np.sum(P[events.problem_ground]))


def _report_from_energies(enum: PhysicalEnumeration, E: np.ndarray, lam: float, scale: float,
                          beta_eff: float) -> PipelineReport:
    P = boltzmann(E, beta_eff)
    return PipelineReport(
        chain_strength=lam,
        scale=scale,
        beta_eff=beta_eff,
        p_cc=float(np.sum(P[enum.consistent])),
        p_solve_eff=_problem_solve_probability(enum.events, beta_eff),
        p_sparse=float(np.sum(P[enum.solves])),
        per_chain_break={label: float(np.sum(P[mask])) for label, mask in enum.broken.items()},
    )


def evaluate_embedded(
    H_e: EmbeddedHamiltonian,
    beta: float,
    ranges: HardwareRanges = DEFAULT_RANGES,
    sampler_cfg: SamplerConfig | None = None,
    clamp_to_one: bool = True,
    tie_tol: float = DEFAULT_TIE_TOL,
    limit: int = DEFAULT_ENUMERATION_LIMIT,
    enumeration: PhysicalEnumeration | None = None,
    rescale: bool = True,
) -> PipelineReport:
    """Pipeline metrics for an already embedded Hamiltonian.

    ``rescale=False`` fixes the scale at 1, i.e. the machine without range
    limits, which is useful as a baseline.
    """
    cfg = sampler_cfg or SamplerConfig()
    scale = scale_factor(H_e.hamiltonian, ranges, clamp_to_one) if rescale else 1.0
    beta_eff = effective_beta(beta, scale)
    lam = H_e.chain_strength

    if cfg.mode == "exact":
        enum = enumeration or PhysicalEnumeration.build(H_e, tie_tol, limit)
        E = enumerate_energies(H_e.hamiltonian, limit)
        return _report_from_energies(enum, E, lam, scale, beta_eff)

    events = ChainEvents(H_e, tie_tol, limit)
    # Sampling H/scale at beta is sampling H at beta/scale.
    S = mcmc_sample(H_e.hamiltonian, beta_eff, cfg)
    broken = events.broken(S)
    consistent = events.consistent(S, broken)
    intervals: dict[str, EventEstimate] = {
        "p_cc": estimate_from_mask(consistent),
        "p_sparse": estimate_from_mask(events.solves(S, consistent)),
    }
    for label, mask in broken.items():
        intervals[f"break:{label}"] = estimate_from_mask(mask)
    return PipelineReport(
        chain_strength=lam,
        scale=scale,
        beta_eff=beta_eff,
        p_cc=intervals["p_cc"].estimate,
        p_solve_eff=_problem_solve_probability(events, beta_eff),
        p_sparse=intervals["p_sparse"].estimate,
        per_chain_break={label: intervals[f"break:{label}"].estimate for label in broken},
        method="mcmc",
        intervals=intervals,
    )


def run_pipeline(
    H_p: IsingHamiltonian,
    G_hw: HardwareGraph,
    emb: Embedding,
    ranges: HardwareRanges = DEFAULT_RANGES,
    beta: float = 1.0,
    chain_strength: float = 1.0,
    sampler_cfg: SamplerConfig | None = None,
    clamp_to_one: bool = True,
    tie_tol: float = DEFAULT_TIE_TOL,
    limit: int = DEFAULT_ENUMERATION_LIMIT,
) -> PipelineReport:
    """Embed at ``chain_strength``, rescale into ``ranges`` and report every metric."""
    H_e = embed(H_p, G_hw, emb, chain_strength)
    return evaluate_embedded(H_e, beta, ranges, sampler_cfg, clamp_to_one, tie_tol, limit)


def sweep(
    H_p: IsingHamiltonian,
    G_hw: HardwareGraph,
    emb: Embedding,
    chain_strengths: Sequence[float],
    beta: float,
    ranges: HardwareRanges = DEFAULT_RANGES,
    sampler_cfg: SamplerConfig | None = None,
    clamp_to_one: bool = True,
    tie_tol: float = DEFAULT_TIE_TOL,
    limit: int = DEFAULT_ENUMERATION_LIMIT,
    rescale: bool = True,
) -> list[PipelineReport]:
    """One report per chain strength, in grid order; exact mode enumerates the masks once."""
    cfg = sampler_cfg or SamplerConfig()
    enum = None
    reports = []
    for lam in chain_strengths:
        H_e = embed(H_p, G_hw, emb, lam)
        if cfg.mode == "exact" and enum is None:
            enum = PhysicalEnumeration.build(H_e, tie_tol, limit)
        reports.append(
            evaluate_embedded(H_e, beta, ranges, cfg, clamp_to_one, tie_tol, limit, enum, rescale)
        )
    return reports


def chain_consistency_probability(
    H_e: EmbeddedHamiltonian,
    ranges: HardwareRanges = DEFAULT_RANGES,
    beta: float = 1.0,
    clamp_to_one: bool = True,
    limit: int = DEFAULT_ENUMERATION_LIMIT,
) -> float:
    return evaluate_embedded(H_e, beta, ranges, None, clamp_to_one, limit=limit).p_cc


def sparse_solve_probability(
    H_p: IsingHamiltonian,
    H_e: EmbeddedHamiltonian,
    ranges: HardwareRanges = DEFAULT_RANGES,
    beta: float = 1.0,
    tie_tol: float = DEFAULT_TIE_TOL,
    clamp_to_one: bool = True,
    conditional: bool = False,
    limit: int = DEFAULT_ENUMERATION_LIMIT,
) -> float:
    """Probability that the machine returns a problem ground state.

    By default this is the joint mass of consistent states that unembed to
    a ground state. ``conditional=True`` renormalizes over consistent states
    instead, which gives the success rate among retained samples.
    """
    if H_e.problem is not H_p and H_e.problem is not None:
        H_e = embed(H_p, H_e.hardware, H_e.embedding, H_e.chain_strength)
    report = evaluate_embedded(H_e, beta, ranges, None, clamp_to_one, tie_tol, limit)
    return report.p_sparse_given_cc if conditional else report.p_sparse


def decomposition_check(
    H_p: IsingHamiltonian,
    G_hw: HardwareGraph,
    emb: Embedding,
    ranges: HardwareRanges = DEFAULT_RANGES,
    beta: float = 1.0,
    chain_strength: float = 1.0,
    clamp_to_one: bool = True,
    limit: int = DEFAULT_ENUMERATION_LIMIT,
) -> float:
    """``|p_sparse - p_cc * p_solve_eff|`` by exact enumeration."""
    return run_pipeline(
        H_p, G_hw, emb, ranges, beta, chain_strength, None, clamp_to_one, limit=limit
    ).decomposition_residual


def energy_decomposition_residual(H_e: EmbeddedHamiltonian, limit: int = DEFAULT_ENUMERATION_LIMIT) -> float:
    """Worst ``|E_e(s) - (E_p(unembed s) - lam * intra_edge_count)|`` over consistent states."""
    n = len(H_e.hamiltonian)
    check_enumerable(n, limit)
    events = ChainEvents(H_e, limit=limit)
    offset = H_e.chain_strength * H_e.intra_edge_count
    worst = 0.0
    for _, block in iter_blocks(n):
        consistent = events.consistent(block)
        if not consistent.any():
            continue
        rows = block[consistent]
        E_e = energies(H_e.hamiltonian, rows)
        E_p = events.problem_energies[events.logical_index(rows)]
        worst = max(worst, float(np.max(np.abs(E_e - (E_p - offset)))))
    return worst


# -- approximations ---------------------------------------------------------


def two_level_solve_approx(beta_eff: float, gap: float) -> float:
    """Ground-state probability of a two-level system, ``1 / (1 + exp(-beta_eff * gap))``."""
    if not gap > 0:
        raise ParameterError(f"gap must be positive, got {gap}")
    x = beta_eff * gap
    return 1.0 / (1.0 + math.exp(-x)) if x > -700 else 0.0


def solve_decay_approx(beta: float, j_min_mag: float, gap: float, chain_strength: float) -> float:
    """Large-lambda decay ``exp(-beta |J_min| gap / lambda)``."""
    if not chain_strength > 0:
        raise ParameterError(f"chain strength must be positive, got {chain_strength}")
    return math.exp(-beta * j_min_mag * gap / chain_strength)


# -- chain strength search by enumeration -----------------------------------


def pcc_saturation_limit(enum: PhysicalEnumeration, beta: float, j_min_mag: float) -> float:
    """``p_cc`` as lambda grows without bound under clamped rescaling.

    Once lambda dominates, the rescaled energy tends to ``-|j_min| * intra``.
    """
    P = boltzmann(-j_min_mag * enum.intra, beta)
    return float(np.sum(P[enum.consistent]))


def required_chain_strength_enumerated(
    H_e: EmbeddedHamiltonian,
    beta: float,
    target: float,
    ranges: HardwareRanges = DEFAULT_RANGES,
    grid_step: float = 0.01,
    max_strength: float = 1e3,
    limit: int = DEFAULT_ENUMERATION_LIMIT,
) -> float:
    """Smallest grid chain strength whose exact ``p_cc`` reaches ``target``.

    ``H_e`` fixes the instance; its own chain strength is irrelevant.
    """
    if not grid_step > 0:
        raise ParameterError("grid_step must be positive")
    enum = PhysicalEnumeration.build(H_e, limit=limit)
    base = enum.base_energies(H_e, limit)
    saturation = pcc_saturation_limit(enum, beta, ranges.j_min_magnitude)
    if target >= saturation:
        raise SaturationError(target, saturation)
    steps = int(math.floor(max_strength / grid_step + 1e-9))
    for k in range(steps + 1):
        lam = round(k * grid_step, 12)
        scale = scale_factor(with_chain_strength(H_e, lam).hamiltonian, ranges)
        P = boltzmann(base - lam * enum.intra, beta / scale)
        if float(np.sum(P[enum.consistent])) >= target:
            return lam
    raise SaturationError(target, saturation)


# -- CSV ------------------------------------------------------------------------


def report_columns(labels: Sequence) -> list[str]:
    return ["lambda", "scale", "beta_eff", "p_cc", "p_solve_eff", "p_sparse",
            *[f"break_{label}" for label in labels], "p_cc_x_p_solve_eff"]


def report_row(report: PipelineReport, labels: Sequence) -> list[str]:
    values = [report.chain_strength, report.scale, report.beta_eff, report.p_cc,
              report.p_solve_eff, report.p_sparse,
              *[report.per_chain_break[label] for label in labels],
              report.p_cc * report.p_solve_eff]
    return [repr(float(v)) for v in values]


def reports_to_csv(reports: Sequence[PipelineReport], labels: Sequence) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(report_columns(labels))
    for r in reports:
        writer.writerow(report_row(r, labels))
    return buf.getvalue()
