"""Exact and Metropolis-sampled Gibbs statistics behind one interface.

``event_probability`` is the common entry point: in exact mode it sums the
enumerated distribution over an event, in MCMC mode it estimates the event
frequency from single-spin-flip Metropolis chains and attaches a Wilson
interval.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Callable, Literal

import numba
import numpy as np

from .errors import ParameterError
from .ising_core import (
    DEFAULT_ENUMERATION_LIMIT,
    IsingHamiltonian,
    boltzmann,
    check_enumerable,
    config_block,
    config_index,
    enumerate_energies,
    iter_blocks,
    spin_vector,
)

DEFAULT_SEED = 42
SEED_ENV_VAR = "SPARSE_ISING_SEED"
WILSON_Z = 1.959963984540054  # two-sided 95%
_SWEEP_BLOCK = 4096


def resolve_seed(flag: int | None = None) -> int:
    """Seed precedence: explicit flag, then ``$SPARSE_ISING_SEED``, then 42."""
    if flag is not None:
        return int(flag)
    env = os.environ.get(SEED_ENV_VAR)
    if env not in (None, ""):
        try:
            return int(env)
        except ValueError:
            raise ParameterError(f"{SEED_ENV_VAR}={env!r} is not an integer") from None
    return DEFAULT_SEED


@dataclass(frozen=True)
class SamplerConfig:
    mode: Literal["exact", "mcmc"] = "exact"
    sweeps: int = 2000
    burn_in: int = 200
    num_chains: int = 16
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if self.mode not in ("exact", "mcmc"):
            raise ParameterError(f"mode must be 'exact' or 'mcmc', got {self.mode!r}")
        if self.mode == "mcmc":
            if self.sweeps < 1:
                raise ParameterError("sweeps must be >= 1 in mcmc mode")
            if self.burn_in < 0:
                raise ParameterError("burn_in must be >= 0")
            if self.num_chains < 1:
                raise ParameterError("num_chains must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ParameterError("seed must fit in an unsigned 64-bit integer")


@dataclass(frozen=True)
class EventEstimate:
    estimate: float
    ci_low: float
    ci_high: float
    n_samples: int

    def contains(self, value: float) -> bool:
        return self.ci_low <= value <= self.ci_high


def wilson_interval(successes: int, n: int, z: float = WILSON_Z) -> tuple[float, float]:
    if n <= 0:
        raise ParameterError("Wilson interval needs at least one sample")
    p = successes / n
    z2 = z * z
    denom = 1.0 + z2 / n
    center = (p + z2 / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / denom
    low = max(0.0, center - half)
    high = min(1.0, center + half)
    # Pin the degenerate ends so the estimate always lies inside its interval.
    if successes == 0:
        low = 0.0
    if successes == n:
        high = 1.0
    return low, high


def estimate_from_mask(mask) -> EventEstimate:
    mask = np.asarray(mask, dtype=bool)
    n = int(mask.size)
    if n == 0:
        raise ParameterError("cannot estimate an event from an empty sample stream")
    k = int(mask.sum())
    low, high = wilson_interval(k, n)
    return EventEstimate(k / n, low, high, n)


def estimate_event(samples, predicate: Callable) -> EventEstimate:
    """Frequency of ``predicate(sample)`` over a sample stream, with a 95% Wilson interval."""
    outcomes = [bool(predicate(s)) for s in samples]
    if not outcomes:
        raise ParameterError("cannot estimate an event from an empty sample stream")
    return estimate_from_mask(outcomes)


# -- exact ------------------------------------------------------------------


@dataclass(frozen=True)
class ExactDistribution:
    """Enumerated Gibbs distribution; ``probabilities[k]`` belongs to configuration index ``k``."""

    nodes: tuple
    energies: np.ndarray
    probabilities: np.ndarray

    def probability(self, s) -> float:
        H = IsingHamiltonian(nodes=self.nodes)
        return float(self.probabilities[config_index(spin_vector(H, s))])

    def configuration(self, k: int) -> dict:
        vec = config_block(len(self.nodes), k, k + 1)[0]
        return {label: int(v) for label, v in zip(self.nodes, vec)}

    def items(self):
        for k, p in enumerate(self.probabilities):
            yield self.configuration(k), float(p)

    def event_mass(self, event: Callable[[np.ndarray], np.ndarray]) -> float:
        total = 0.0
        for start, block in iter_blocks(len(self.nodes)):
            mask = np.asarray(event(block), dtype=bool)
            total += float(self.probabilities[start : start + len(block)][mask].sum())
        return total


def exact_distribution(
    H: IsingHamiltonian, beta: float, limit: int = DEFAULT_ENUMERATION_LIMIT
) -> ExactDistribution:
    E = enumerate_energies(H, limit)
    return ExactDistribution(H.nodes, E, boltzmann(E, beta))


# -- Metropolis -------------------------------------------------------------


def metropolis_acceptance(delta_e, beta: float):
    """``min(1, exp(-beta * delta_e))``, elementwise."""
    return np.exp(-beta * np.maximum(np.asarray(delta_e, dtype=float), 0.0))


def _neighbourhoods(H: IsingHamiltonian):
    """CSR adjacency ``(h, offsets, neighbours, weights)`` with zero couplings dropped."""
    hv, i, j, w = H.arrays()
    n = len(H)
    keep = w != 0.0
    src = np.concatenate([i[keep], j[keep]])
    dst = np.concatenate([j[keep], i[keep]])
    wt = np.concatenate([w[keep], w[keep]])
    order = np.argsort(src, kind="stable")
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.add.at(offsets, src + 1, 1)
    return hv, np.cumsum(offsets), dst[order].astype(np.int64), wt[order]


@numba.njit(cache=True)
def _metropolis_chain(spins, hv, offsets, nbrs, weights, beta, uniforms, t0, burn_in, out):
    n = spins.shape[0]
    for step in range(uniforms.shape[0]):
        t = t0 + step
        for k in range(n):
            field = hv[k]
            for e in range(offsets[k], offsets[k + 1]):
                field += weights[e] * spins[nbrs[e]]
            delta = -2.0 * spins[k] * field
            if delta <= 0.0 or uniforms[step, k] < np.exp(-beta * delta):
                spins[k] = -spins[k]
        if t >= burn_in:
            out[t - burn_in, :] = spins


def chain_generators(seed: int, num_chains: int) -> list[np.random.Generator]:
    """One independent generator per chain, split from ``seed`` by spawn counter."""
    children = np.random.SeedSequence(seed).spawn(num_chains)
    return [np.random.default_rng(child) for child in children]


def mcmc_sample(H: IsingHamiltonian, beta: float, cfg: SamplerConfig) -> np.ndarray:
    """Single-spin-flip Metropolis samples of ``exp(-beta H)``.

    Returns an int8 array of shape ``(num_chains * sweeps, n)`` in node order,
    chain 0's samples first. Each chain starts from a uniformly random state,
    discards ``burn_in`` sweeps and then records one sample per sweep, where a
    sweep visits every spin once in node order. Flips are accepted with
    probability ``min(1, exp(-beta * dE))``.

    Samples within a chain are autocorrelated. For calibrated intervals use
    many chains with a long burn-in and few recorded sweeps.
    """
    if cfg.mode != "mcmc":
        raise ParameterError("mcmc_sample requires SamplerConfig(mode='mcmc')")
    if not beta >= 0 or math.isinf(beta):
        raise ParameterError(f"beta must be a finite value >= 0, got {beta}")
    n = len(H)
    total = cfg.burn_in + cfg.sweeps
    hv, offsets, nbrs, weights = _neighbourhoods(H)
    out = np.empty((cfg.num_chains, cfg.sweeps, n), dtype=np.int8)
    chain_out = np.empty((cfg.sweeps, n), dtype=np.float64)
    for c, rng in enumerate(chain_generators(cfg.seed, cfg.num_chains)):
        spins = rng.choice(np.array([-1.0, 1.0]), size=n)
        for t0 in range(0, total, _SWEEP_BLOCK):
            uniforms = rng.random((min(_SWEEP_BLOCK, total - t0), n))
            _metropolis_chain(spins, hv, offsets, nbrs, weights, float(beta), uniforms, t0,
                              cfg.burn_in, chain_out)
        out[c] = chain_out
    return out.reshape(cfg.num_chains * cfg.sweeps, n)


def event_probability(
    H: IsingHamiltonian,
    beta: float,
    event: Callable[[np.ndarray], np.ndarray],
    cfg: SamplerConfig | None = None,
    limit: int = DEFAULT_ENUMERATION_LIMIT,
) -> EventEstimate:
    """Probability that a configuration satisfies ``event``.

    ``event`` maps an ``(m, n)`` array of +-1 rows to a boolean vector of length m.
    Exact mode returns a zero-width interval.
    """
    cfg = cfg or SamplerConfig()
    if cfg.mode == "exact":
        check_enumerable(len(H), limit)
        p = exact_distribution(H, beta, limit).event_mass(event)
        return EventEstimate(p, p, p, 0)
    samples = mcmc_sample(H, beta, cfg)
    return estimate_from_mask(event(samples))
