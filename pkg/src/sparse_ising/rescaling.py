"""Hardware-range rescaling and the effective inverse temperature."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ParameterError
from .ising_core import IsingHamiltonian


@dataclass(frozen=True)
class HardwareRanges:
    m_max: float = 4.0
    m_min: float = -4.0
    j_max: float = 1.0
    j_min: float = -2.0

    def __post_init__(self):
        if not (self.m_min < 0 < self.m_max):
            raise ParameterError(f"bias range must straddle 0, got [{self.m_min}, {self.m_max}]")
        if not (self.j_min < 0 < self.j_max):
            raise ParameterError(f"coupling range must straddle 0, got [{self.j_min}, {self.j_max}]")

    @classmethod
    def from_intervals(cls, h_range=None, j_range=None) -> "HardwareRanges":
        """Build from ``(low, high)`` pairs; ``None`` keeps the default."""
        d = cls()
        m_min, m_max = h_range if h_range is not None else (d.m_min, d.m_max)
        j_min, j_max = j_range if j_range is not None else (d.j_min, d.j_max)
        return cls(float(m_max), float(m_min), float(j_max), float(j_min))

    @property
    def j_min_magnitude(self) -> float:
        return -self.j_min


DEFAULT_RANGES = HardwareRanges()


def scale_factor(H: IsingHamiltonian, r: HardwareRanges = DEFAULT_RANGES, clamp_to_one: bool = True) -> float:
    """Smallest divisor that brings every nonzero coefficient of ``H`` into range.

    Zero entries are ignored. Under ``clamp_to_one`` the result never drops
    below 1, so small problems are not amplified.
    """
    hs, js = H.coefficients()
    hs = [v for v in hs if v != 0.0]
    js = [v for v in js if v != 0.0]
    terms = []
    if hs:
        terms += [max(hs) / r.m_max, min(hs) / r.m_min]
    if js:
        terms += [max(js) / r.j_max, min(js) / r.j_min]
    if not terms:
        if clamp_to_one:
            return 1.0
        raise ParameterError("cannot rescale an all-zero Hamiltonian without clamping")
    raw = max(terms)
    if clamp_to_one:
        return max(1.0, raw)
    if raw <= 0:
        # Unreachable for nonzero H: the sign-matched term is always positive.
        raise ParameterError("non-positive scale factor")
    return raw


def rescale(
    H: IsingHamiltonian, r: HardwareRanges = DEFAULT_RANGES, clamp_to_one: bool = True
) -> tuple[IsingHamiltonian, float]:
    scale = scale_factor(H, r, clamp_to_one)
    if scale == 1.0:
        return H, 1.0
    # Divide rather than multiply by 1/scale so boundary values land exactly on the range ends.
    divided = IsingHamiltonian(
        {k: v / scale for k, v in H.h.items()},
        {k: v / scale for k, v in H.J.items()},
        nodes=H.nodes,
    )
    return divided, scale


def effective_beta(beta: float, scale: float) -> float:
    beta = float(beta)
    if not beta >= 0 or math.isinf(beta):
        raise ParameterError(f"beta must be a finite value >= 0, got {beta}")
    if not scale > 0:
        raise ParameterError(f"scale must be positive, got {scale}")
    return beta / scale
