"""Closed-form statistics of the star problem and chain-strength scaling.

The star has a centre spin of degree ``2 l`` split over two hub qubits. Every
quantity is a function of ``z = 2 * beta_eff``, where ``beta_eff`` folds in the
rescaling forced by the chain strength.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.special import expit

from .embedding import build_star_instance, embed
from .errors import ParameterError, SaturationError
from .pipeline import required_chain_strength_enumerated
from .rescaling import DEFAULT_RANGES, HardwareRanges


@dataclass(frozen=True)
class StarParams:
    """``l`` auxiliaries per hub; ``l = 0`` is allowed as a two-spin edge case."""

    l: int
    beta: float
    chain_strength: float
    ranges: HardwareRanges = DEFAULT_RANGES

    def __post_init__(self):
        if int(self.l) != self.l or self.l < 0:
            raise ParameterError(f"l must be a non-negative integer, got {self.l}")
        if not self.beta >= 0 or math.isinf(self.beta):
            raise ParameterError(f"beta must be a finite value >= 0, got {self.beta}")
        if not self.chain_strength >= 0:
            raise ParameterError(f"chain strength must be >= 0, got {self.chain_strength}")

    @property
    def degree(self) -> int:
        return 2 * self.l


def _log_cosh(x):
    x = np.abs(np.asarray(x, dtype=float))
    return x + np.log1p(np.exp(-2.0 * x)) - math.log(2.0)


def _star_scale(l: int, lam, r: HardwareRanges):
    """Clamped scale factor of the embedded star, vectorized over ``lam``."""
    lam = np.asarray(lam, dtype=float)
    fixed = 1.0
    if l > 0:
        fixed = max(fixed, 1.0 / r.m_max, -1.0 / r.m_min, 1.0 / r.j_max)
    return np.maximum(fixed, lam / -r.j_min)


def _pcc(l: int, beta: float, lam, r: HardwareRanges):
    lam = np.asarray(lam, dtype=float)
    z = 2.0 * beta / _star_scale(l, lam, r)
    lc = l * _log_cosh(z)
    # 2 / (2 + e^{-z lam} (cosh^l z + cosh^-l z)) == expit(ln 2 - logaddexp(a, b))
    a = -z * lam + lc
    b = -z * lam - lc
    return expit(math.log(2.0) - np.logaddexp(a, b))


def star_scale(p: StarParams) -> float:
    return float(_star_scale(p.l, p.chain_strength, p.ranges))


def star_z(p: StarParams) -> float:
    return 2.0 * p.beta / star_scale(p)


def star_pcc(p: StarParams) -> float:
    return float(_pcc(p.l, p.beta, p.chain_strength, p.ranges))


def star_solve(p: StarParams) -> float:
    """Ground-state probability of the logical star at ``beta_eff``: ``(1 + e^{-2z})^{-l}``."""
    z = star_z(p)
    return math.exp(-p.l * math.log1p(math.exp(-2.0 * z)))


def star_sparse_solve(p: StarParams) -> float:
    return star_pcc(p) * star_solve(p)


def pcc_limit(beta: float, j_min_mag: float) -> float:
    """``star_pcc`` as the chain strength grows without bound."""
    return float(expit(2.0 * beta * j_min_mag))


# -- minimum chain strength -------------------------------------------------


@dataclass(frozen=True)
class BoundResult:
    c_delta: float
    delta_0: float
    bound_at: dict
    flags: tuple = field(default=())

    @property
    def vacuous(self) -> bool:
        return "vacuous" in self.flags


def min_chain_strength_bound(
    delta: float, beta: float, j_min_mag: float, delta_grid: Iterable[int] = ()
) -> BoundResult:
    """Lower bound ``C * sqrt(Delta)`` on the chain strength needed for ``p_cc >= delta``.

    ``C = J beta / sqrt(4 beta J + 2 ln(2 (1 - delta) / delta))`` and the bound
    applies for degrees above ``16 beta J + 8 ln(2 (1 - delta) / delta)``. Here
    ``J`` is the magnitude of the most negative allowed coupling.

    Flags: ``log-term-negative`` when ``delta > 2/3``; ``vacuous`` when the
    radicand is not positive, in which case ``c_delta`` is NaN.
    """
    if not 0 < delta < 1:
        raise ParameterError(f"delta must lie in (0, 1), got {delta}")
    if j_min_mag <= 0:
        raise ParameterError("j_min_mag is a magnitude and must be positive")
    grid = [int(d) for d in delta_grid]
    for d in grid:
        if d < 2 or d % 2:
            raise ParameterError(f"degrees must be even and >= 2, got {d}")
    log_term = math.log(2.0 * (1.0 - delta) / delta)
    radicand = 4.0 * beta * j_min_mag + 2.0 * log_term
    flags = []
    if log_term < 0:
        flags.append("log-term-negative")
    if radicand <= 0:
        flags.append("vacuous")
        c_delta = float("nan")
    else:
        c_delta = j_min_mag * beta / math.sqrt(radicand)
    delta_0 = 16.0 * beta * j_min_mag + 8.0 * log_term
    bound_at = {d: c_delta * math.sqrt(d) for d in sorted(grid)}
    return BoundResult(c_delta, delta_0, bound_at, tuple(flags))


def required_chain_strength(
    l: int,
    beta: float,
    delta: float,
    grid_step: float = 0.01,
    ranges: HardwareRanges = DEFAULT_RANGES,
    max_strength: float = 1e4,
) -> float:
    """Smallest multiple of ``grid_step`` at which the closed-form ``p_cc`` reaches ``delta``.

    Returns 0 when ``delta`` is already met without chains.
    """
    if not grid_step > 0:
        raise ParameterError("grid_step must be positive")
    limit = pcc_limit(beta, -ranges.j_min)
    if delta >= limit:
        raise SaturationError(delta, limit)
    steps = int(math.floor(max_strength / grid_step + 1e-9))
    chunk = 4096
    for start in range(0, steps + 1, chunk):
        k = np.arange(start, min(start + chunk, steps + 1))
        lams = np.round(k * grid_step, 12)
        hit = np.flatnonzero(_pcc(l, beta, lams, ranges) >= delta)
        if hit.size:
            return float(lams[hit[0]])
    raise SaturationError(delta, limit)


def required_chain_strength_for_chain_length(
    l: int,
    chain_length: int,
    beta: float,
    delta: float,
    grid_step: float = 0.01,
    ranges: HardwareRanges = DEFAULT_RANGES,
    layout: str = "split",
) -> float:
    """Grid search by exhaustive enumeration with the centre on a path of ``chain_length`` qubits."""
    H_star, hw, emb = build_star_instance(l, chain_length, layout)
    H_e = embed(H_star, hw, emb, 0.0)
    return required_chain_strength_enumerated(H_e, beta, delta, ranges, grid_step)


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    residual: float


def scaling_exponent_fit(points: Sequence[tuple[float, float]]) -> FitResult:
    """Least-squares line through ``(ln x, ln y)``; ``residual`` is the RMS misfit."""
    pts = [(float(x), float(y)) for x, y in points]
    if len(pts) < 3:
        raise ParameterError("need at least 3 points for a scaling fit")
    if any(x <= 0 or y <= 0 for x, y in pts):
        raise ParameterError("scaling fit needs strictly positive coordinates")
    lx = np.log([x for x, _ in pts])
    ly = np.log([y for _, y in pts])
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    return FitResult(float(slope), float(intercept), float(np.sqrt(np.mean(resid**2))))


def critical_degree_threshold(beta: float, j_min_mag: float, gap: float, c: float = 1.0) -> float:
    """Degree ``(beta |J_min| gap / c)**2`` beyond which chains erode the solve rate.

    ``c`` is problem dependent; 1 is a placeholder default.
    """
    for name, v in (("beta", beta), ("j_min_mag", j_min_mag), ("gap", gap), ("c", c)):
        if not v > 0:
            raise ParameterError(f"{name} must be positive, got {v}")
    return (beta * j_min_mag * gap / c) ** 2
