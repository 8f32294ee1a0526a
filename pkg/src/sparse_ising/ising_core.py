"""Ising Hamiltonians and exact statistics by exhaustive enumeration.

Configurations are indexed by integers: bit ``i`` of the index is 1 when the
spin of ``nodes[i]`` is -1, so index 0 is the all-(+1) state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from types import MappingProxyType
from typing import Hashable, Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import (
    HamiltonianError,
    InvalidConfigurationError,
    ParameterError,
    SizeLimitError,
)

DEFAULT_TIE_TOL = 1e-9
DEFAULT_ENUMERATION_LIMIT = 24
_CHUNK = 1 << 16

Label = Hashable


class IsingHamiltonian:
    """Sparse Ising energy ``sum_i h_i s_i + sum_(i,j) J_ij s_i s_j``.

    Args:
        h: bias per label. Labels listed in ``nodes`` without an entry get 0.
        J: couplings, either a mapping ``(a, b) -> value`` or an iterable of
            ``(a, b, value)`` triples. Each unordered pair may appear once.
        nodes: explicit node order. When omitted, nodes are ordered by first
            appearance in ``h`` and then in ``J``.

    Instances are immutable; ``h`` and ``J`` are exposed as read-only views.
    Coupling keys are stored with the pair ordered by node position.
    """

    __slots__ = ("_nodes", "_index", "_h", "_J", "_arrays")

    def __init__(self, h=None, J=None, nodes: Iterable[Label] | None = None):
        h = dict(h or {})
        triples = _coupling_triples(J)

        if nodes is None:
            order: dict = {}
            for label in h:
                order.setdefault(label, None)
            for a, b, _ in triples:
                order.setdefault(a, None)
                order.setdefault(b, None)
            node_list = list(order)
        else:
            node_list = list(nodes)
            if len(set(node_list)) != len(node_list):
                raise HamiltonianError("duplicate labels in nodes")
        index = {label: k for k, label in enumerate(node_list)}

        unknown = [label for label in h if label not in index]
        if unknown:
            raise HamiltonianError(f"bias given for labels not in nodes: {unknown!r}")

        couplings: dict = {}
        for a, b, value in triples:
            if a == b:
                raise HamiltonianError(f"self-coupling on {a!r}")
            if a not in index or b not in index:
                raise HamiltonianError(f"coupling ({a!r}, {b!r}) references an unknown label")
            key = (a, b) if index[a] < index[b] else (b, a)
            if key in couplings:
                raise HamiltonianError(f"duplicate coupling for pair {key!r}")
            couplings[key] = float(value)

        self._nodes = tuple(node_list)
        self._index = MappingProxyType(index)
        self._h = MappingProxyType({label: float(h.get(label, 0.0)) for label in node_list})
        self._J = MappingProxyType(couplings)
        self._arrays = None

    @property
    def nodes(self) -> tuple:
        return self._nodes

    @property
    def h(self) -> Mapping:
        return self._h

    @property
    def J(self) -> Mapping:
        return self._J

    @property
    def index(self) -> Mapping:
        return self._index

    def __len__(self) -> int:
        return len(self._nodes)

    def __repr__(self) -> str:
        return f"IsingHamiltonian(n={len(self._nodes)}, couplings={len(self._J)})"

    def arrays(self):
        """Return ``(h, i, j, w)``: dense bias vector and coupling index/value arrays."""
        if self._arrays is None:
            hv = np.array([self._h[label] for label in self._nodes], dtype=float)
            pairs = [(self._index[a], self._index[b], w) for (a, b), w in self._J.items()]
            i = np.array([p[0] for p in pairs], dtype=np.intp)
            j = np.array([p[1] for p in pairs], dtype=np.intp)
            w = np.array([p[2] for p in pairs], dtype=float)
            self._arrays = (hv, i, j, w)
        return self._arrays

    def scaled(self, factor: float) -> "IsingHamiltonian":
        """Multiply every bias and coupling by ``factor``."""
        factor = float(factor)
        return IsingHamiltonian(
            {k: v * factor for k, v in self._h.items()},
            {k: v * factor for k, v in self._J.items()},
            nodes=self._nodes,
        )

    def coefficients(self) -> tuple[list[float], list[float]]:
        return list(self._h.values()), list(self._J.values())

    def is_zero(self) -> bool:
        return not any(self._h.values()) and not any(self._J.values())


def _coupling_triples(J) -> list[tuple]:
    if J is None:
        return []
    if isinstance(J, Mapping):
        out = []
        for key, value in J.items():
            try:
                a, b = key
            except (TypeError, ValueError):
                raise HamiltonianError(f"coupling key {key!r} is not a pair") from None
            out.append((a, b, value))
        return out
    out = []
    for item in J:
        try:
            a, b, value = item
        except (TypeError, ValueError):
            raise HamiltonianError(f"coupling entry {item!r} is not an (a, b, value) triple") from None
        out.append((a, b, value))
    return out


# -- configurations ---------------------------------------------------------


def spin_vector(H: IsingHamiltonian, s) -> np.ndarray:
    """Convert a configuration (mapping or node-ordered sequence) to an int8 vector."""
    n = len(H)
    if isinstance(s, Mapping):
        keys = set(s)
        expected = set(H.nodes)
        if keys != expected:
            missing = sorted(map(repr, expected - keys))
            extra = sorted(map(repr, keys - expected))
            raise InvalidConfigurationError(
                f"configuration labels do not match the Hamiltonian (missing: {missing}, extra: {extra})"
            )
        values = [s[label] for label in H.nodes]
    else:
        values = list(s)
        if len(values) != n:
            raise InvalidConfigurationError(f"expected {n} spins, got {len(values)}")
    vec = np.asarray(values)
    if vec.size and not np.all((vec == 1) | (vec == -1)):
        raise InvalidConfigurationError("spins must be +1 or -1")
    return vec.astype(np.int8)


def config_dict(nodes: Sequence[Label], vec) -> dict:
    return {label: int(v) for label, v in zip(nodes, vec)}


def config_index(vec) -> int:
    bits = (1 - np.asarray(vec, dtype=np.int64)) // 2
    return int(np.sum(bits << np.arange(len(bits), dtype=np.int64)))


def config_block(n: int, start: int, stop: int) -> np.ndarray:
    """Spins for configuration indices ``start..stop-1`` as an int8 array."""
    idx = np.arange(start, stop, dtype=np.int64)
    bits = (idx[:, None] >> np.arange(n, dtype=np.int64)) & 1
    return (1 - 2 * bits).astype(np.int8)


def iter_blocks(n: int, chunk: int = _CHUNK) -> Iterator[tuple[int, np.ndarray]]:
    total = 1 << n
    for start in range(0, total, chunk):
        yield start, config_block(n, start, min(start + chunk, total))


def check_enumerable(n: int, limit: int = DEFAULT_ENUMERATION_LIMIT) -> None:
    if n > limit:
        raise SizeLimitError(n, limit)


# -- energies ---------------------------------------------------------------


def energy(H: IsingHamiltonian, s) -> float:
    """Energy of one configuration, summed with ``math.fsum``."""
    vec = spin_vector(H, s)
    hv, i, j, w = H.arrays()
    terms = list(hv * vec) + list(w * vec[i] * vec[j])
    return math.fsum(terms)


def energies(H: IsingHamiltonian, S: np.ndarray) -> np.ndarray:
    """Vectorized energies for a ``(m, n)`` array of +-1 rows in node order."""
    hv, i, j, w = H.arrays()
    Sf = np.asarray(S, dtype=float)
    out = Sf @ hv
    if w.size:
        out += (Sf[:, i] * Sf[:, j]) @ w
    return out


def enumerate_energies(H: IsingHamiltonian, limit: int = DEFAULT_ENUMERATION_LIMIT) -> np.ndarray:
    """Energies of all ``2**n`` configurations, in configuration-index order."""
    n = len(H)
    check_enumerable(n, limit)
    out = np.empty(1 << n, dtype=float)
    for start, block in iter_blocks(n):
        out[start : start + len(block)] = energies(H, block)
    return out


# -- Gibbs statistics -------------------------------------------------------


def _check_beta(beta: float) -> float:
    beta = float(beta)
    if not beta >= 0 or math.isinf(beta):
        raise ParameterError(f"beta must be a finite value >= 0, got {beta}")
    return beta


def log_partition(E: np.ndarray, beta: float) -> float:
    """``log sum exp(-beta E)`` with the minimum energy shifted out."""
    beta = _check_beta(beta)
    e0 = float(E.min())
    return -beta * e0 + math.log(float(np.sum(np.exp(-beta * (E - e0)))))


def boltzmann(E: np.ndarray, beta: float) -> np.ndarray:
    """Normalized Gibbs probabilities ``exp(-beta E) / Z`` for an energy vector."""
    beta = _check_beta(beta)
    weights = np.exp(-beta * (E - E.min()))
    return weights / np.sum(weights)


def ground_mask(E: np.ndarray, tie_tol: float = DEFAULT_TIE_TOL) -> np.ndarray:
    return E <= E.min() + tie_tol


@dataclass(frozen=True)
class SpectrumSummary:
    ground_energy: float
    ground_states: tuple
    gap: float
    degeneracy: int


def enumerate_spectrum(
    H: IsingHamiltonian,
    tie_tol: float = DEFAULT_TIE_TOL,
    limit: int = DEFAULT_ENUMERATION_LIMIT,
) -> SpectrumSummary:
    """Exhaustive scan for the ground energy, ground states and gap.

    ``gap`` is the distance to the lowest energy more than ``tie_tol`` above
    the ground energy; it is 0 only when every configuration ties.
    """
    E = enumerate_energies(H, limit)
    e0 = float(E.min())
    mask = ground_mask(E, tie_tol)
    excited = E[~mask]
    gap = float(excited.min() - e0) if excited.size else 0.0
    n = len(H)
    states = tuple(
        config_dict(H.nodes, config_block(n, int(k), int(k) + 1)[0]) for k in np.flatnonzero(mask)
    )
    return SpectrumSummary(e0, states, gap, len(states))


def gibbs_probability(
    H: IsingHamiltonian,
    beta: float,
    s,
    limit: int = DEFAULT_ENUMERATION_LIMIT,
) -> float:
    beta = _check_beta(beta)
    vec = spin_vector(H, s)
    E = enumerate_energies(H, limit)
    logz = log_partition(E, beta)
    return math.exp(-beta * float(E[config_index(vec)]) - logz)


def solve_probability(
    H: IsingHamiltonian,
    beta: float,
    tie_tol: float = DEFAULT_TIE_TOL,
    limit: int = DEFAULT_ENUMERATION_LIMIT,
) -> float:
    """Gibbs mass of the ground-state set at inverse temperature ``beta``."""
    beta = _check_beta(beta)
    E = enumerate_energies(H, limit)
    return float(np.sum(boltzmann(E, beta)[ground_mask(E, tie_tol)]))
