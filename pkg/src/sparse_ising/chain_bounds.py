"""Chain-strength lower bounds from chain conductance and the weighted Laplacian.

Each chain becomes a small graph whose vertices carry ``a_u``, the largest
field the rest of the machine can exert on qubit ``u``. A chain whose weakest
cut is small relative to the volume on one side of it needs a strong
coupling to stay aligned in the ground state.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Mapping

import networkx as nx
import numpy as np

from .embedding import Embedding, EmbeddedHamiltonian, HardwareGraph, embed
from .errors import DegenerateVolumeError, NumericalError, ParameterError, StructuralError
from .ising_core import (
    DEFAULT_ENUMERATION_LIMIT,
    DEFAULT_TIE_TOL,
    IsingHamiltonian,
    config_dict,
    enumerate_energies,
    ground_mask,
    iter_blocks,
)

WEIGHT_FLOOR = 1e-12
MAX_EXACT_VERTICES = 20
CHEEGER_SLACK = 1e-9


@dataclass(frozen=True)
class ChainGraph:
    label: object
    vertices: tuple
    weights: Mapping
    edges: tuple

    @property
    def volume(self) -> float:
        return math.fsum(self.weights[u] for u in self.vertices)

    def weight_vector(self) -> np.ndarray:
        return np.array([self.weights[u] for u in self.vertices], dtype=float)

    def edge_indices(self) -> np.ndarray:
        pos = {u: k for k, u in enumerate(self.vertices)}
        return np.array([(pos[u], pos[v]) for u, v in self.edges], dtype=np.intp).reshape(-1, 2)

    def is_connected(self) -> bool:
        g = nx.Graph()
        g.add_nodes_from(self.vertices)
        g.add_edges_from(self.edges)
        return nx.is_connected(g)


def chain_graph(vertices, edges, weights: Mapping, label=None) -> ChainGraph:
    """Build a chain graph directly, e.g. for synthetic tests."""
    vertices = tuple(vertices)
    w = {u: float(weights[u]) for u in vertices}
    if any(v < 0 for v in w.values()):
        raise ParameterError("vertex weights must be non-negative")
    return ChainGraph(label, vertices, w, tuple((u, v) for u, v in edges))


def build_chain_graph(H_e: EmbeddedHamiltonian, logical) -> ChainGraph:
    """Chain graph of ``logical`` with ``a_u = |h_u| + sum of |J_uv|`` over couplings leaving the chain."""
    chain = H_e.embedding.chains[logical]
    members = set(chain)
    H = H_e.hamiltonian
    weights = {u: abs(H.h[u]) for u in chain}
    for (u, v), value in H.J.items():
        if value == 0.0:
            continue
        if u in members and v not in members:
            weights[u] += abs(value)
        elif v in members and u not in members:
            weights[v] += abs(value)
    edges = tuple((u, v) for u, v in H_e.intra_edges if u in members)
    return ChainGraph(logical, tuple(chain), weights, edges)


def _require_connected(g: ChainGraph) -> None:
    if len(g.vertices) > 1 and not g.is_connected():
        raise StructuralError(f"chain {g.label!r} is not connected")


# -- conductance ------------------------------------------------------------


@dataclass(frozen=True)
class ConductanceResult:
    phi: float
    witness: frozenset
    cut: int
    vol_s: float

    @property
    def bound(self) -> float:
        """The ``1 / (2 phi)`` chain-strength threshold; 0 when no partition is admissible."""
        return 0.0 if math.isinf(self.phi) else 1.0 / (2.0 * self.phi)


def subset_conductance(g: ChainGraph, subset) -> tuple[float, int, float]:
    """``(phi, cut, vol_s)`` for one vertex subset."""
    subset = set(subset)
    cut = sum(1 for u, v in g.edges if (u in subset) != (v in subset))
    vol_s = math.fsum(g.weights[u] for u in subset)
    denom = min(vol_s, g.volume - vol_s)
    return (cut / denom if denom > 0 else math.inf), cut, vol_s


def conductance_exact(g: ChainGraph, max_vertices: int = MAX_EXACT_VERTICES) -> ConductanceResult:
    """Minimum of ``cut / min(Vol S, Vol rest)`` over subsets with ``0 < Vol S <= Vol / 2``.

    A chain without any admissible subset (e.g. a single qubit) has ``phi = inf``.
    """
    k = len(g.vertices)
    if k > max_vertices:
        raise ParameterError(f"exact conductance is limited to {max_vertices} vertices, chain has {k}")
    _require_connected(g)
    w = g.weight_vector()
    total = float(w.sum())
    if total <= 0:
        raise DegenerateVolumeError(f"chain {g.label!r} has zero volume")
    if k < 2:
        return ConductanceResult(math.inf, frozenset(), 0, 0.0)

    masks = np.arange(1, (1 << k) - 1, dtype=np.int64)
    bits = (masks[:, None] >> np.arange(k, dtype=np.int64)) & 1
    vol = bits @ w
    e = g.edge_indices()
    cut = np.sum(bits[:, e[:, 0]] != bits[:, e[:, 1]], axis=1) if len(e) else np.zeros(len(masks), int)
    admissible = (vol > 0) & (vol <= total / 2 + 1e-12 * total)
    if not admissible.any():
        return ConductanceResult(math.inf, frozenset(), 0, 0.0)
    denom = np.minimum(vol, total - vol)
    phi = np.full(len(masks), np.inf)
    phi[admissible] = cut[admissible] / denom[admissible]
    best = int(np.argmin(phi))
    witness = frozenset(u for u, b in zip(g.vertices, bits[best]) if b)
    return ConductanceResult(float(phi[best]), witness, int(cut[best]), float(vol[best]))


def chain_graphs(H_e: EmbeddedHamiltonian) -> dict:
    return {label: build_chain_graph(H_e, label) for label in H_e.embedding.chains}


def conductance_bounds(H_e: EmbeddedHamiltonian) -> dict:
    """Per-chain ``1 / (2 phi)``; singleton chains contribute 0."""
    out = {}
    for label, g in chain_graphs(H_e).items():
        if len(g.vertices) < 2:
            out[label] = 0.0
            continue
        out[label] = conductance_exact(g).bound
    return out


def conductance_bound(H_e: EmbeddedHamiltonian) -> float:
    """``max_i 1 / (2 phi_i)`` over the chains of ``H_e``."""
    return max(conductance_bounds(H_e).values(), default=0.0)


def flip_safe_bound(H_e: EmbeddedHamiltonian) -> float:
    """``max_i 1 / phi_i``, twice :func:`conductance_bound`.

    Flipping the lighter side ``S`` of a broken chain gains ``2 lam cut`` in
    chain energy and loses at most ``2 Vol S`` in field energy, so any
    chain strength above this value keeps every ground state consistent.
    """
    return 2.0 * conductance_bound(H_e)


# -- spectral ---------------------------------------------------------------


@dataclass(frozen=True)
class SpectralResult:
    bound: float
    lambda2: float
    floored: bool


def weighted_normalized_laplacian(g: ChainGraph, floor: float = WEIGHT_FLOOR) -> tuple[np.ndarray, bool]:
    """``A^{-1/2} (D - W) A^{-1/2}`` with unit adjacency ``W`` and ``A = diag(a_u)``.

    Weights below ``floor`` are raised to it; the flag reports whether that happened.
    """
    k = len(g.vertices)
    W = np.zeros((k, k))
    for a, b in g.edge_indices():
        W[a, b] = W[b, a] = 1.0
    L = np.diag(W.sum(axis=1)) - W
    w = g.weight_vector()
    floored = bool(np.any(w < floor))
    inv_sqrt = 1.0 / np.sqrt(np.maximum(w, floor))
    return inv_sqrt[:, None] * L * inv_sqrt[None, :], floored


def _spectrum(g: ChainGraph, floor: float):
    _require_connected(g)
    L, floored = weighted_normalized_laplacian(g, floor)
    vals, vecs = np.linalg.eigh(L)
    lam2 = float(vals[1])
    if lam2 <= 1e-12 * max(1.0, float(vals[-1])):
        raise NumericalError(f"second eigenvalue {lam2:g} is not positive on connected chain {g.label!r}")
    return vals, vecs, floored


def spectral_bound(g: ChainGraph, floor: float = WEIGHT_FLOOR) -> SpectralResult:
    """``1 / lambda_2`` of the weighted normalized Laplacian; 0 for a single qubit."""
    if len(g.vertices) < 2:
        return SpectralResult(0.0, math.nan, False)
    vals, _, floored = _spectrum(g, floor)
    if floored:
        warnings.warn(f"chain {g.label!r} has vertex weights below {floor:g}; they were floored",
                      RuntimeWarning, stacklevel=2)
    return SpectralResult(1.0 / float(vals[1]), float(vals[1]), floored)


def spectral_chain_bound(H_e: EmbeddedHamiltonian) -> float:
    return max((spectral_bound(g).bound for g in chain_graphs(H_e).values()), default=0.0)


@dataclass(frozen=True)
class CheegerResult:
    lower: float
    phi: float
    upper: float
    lower_ok: bool
    upper_ok: bool

    @property
    def ok(self) -> bool:
        return self.lower_ok and self.upper_ok


def cheeger_check(g: ChainGraph, slack: float = CHEEGER_SLACK) -> CheegerResult:
    """Test ``lambda_2 / 2 <= phi <= sqrt(2 lambda_2)`` for one chain."""
    lam2 = spectral_bound(g).lambda2
    phi = conductance_exact(g).phi
    lower, upper = lam2 / 2.0, math.sqrt(2.0 * lam2)
    return CheegerResult(lower, phi, upper, lower <= phi + slack, phi <= upper + slack)


def fiedler_partition(g: ChainGraph, floor: float = WEIGHT_FLOOR) -> tuple[frozenset, frozenset]:
    """Split by the sign of the second eigenvector; zeros join the positive side.

    The eigenvector sign is fixed so the first vertex lands on the positive side.
    """
    if len(g.vertices) < 2:
        raise ParameterError("a Fiedler split needs at least two vertices")
    _, vecs, _ = _spectrum(g, floor)
    v = vecs[:, 1]
    tol = 1e-12 * float(np.max(np.abs(v)))
    v = np.where(np.abs(v) <= tol, 0.0, v)
    if v[0] < 0:
        v = -v
    pos = frozenset(u for u, x in zip(g.vertices, v) if x >= 0)
    return pos, frozenset(g.vertices) - pos


# -- ground-state check -----------------------------------------------------


@dataclass(frozen=True)
class ConsistencyResult:
    consistent: bool
    counterexample: dict | None
    ground_states: int


def ground_state_consistency_check(
    H_p: IsingHamiltonian,
    G_hw: HardwareGraph,
    emb: Embedding,
    chain_strength: float,
    tie_tol: float = DEFAULT_TIE_TOL,
    limit: int = DEFAULT_ENUMERATION_LIMIT,
) -> ConsistencyResult:
    """Whether every ground state of the unrescaled embedded Hamiltonian is chain consistent.

    Rescaling divides all energies by one positive factor, so it leaves the
    ground set unchanged and is skipped here.
    """
    H_e = embed(H_p, G_hw, emb, chain_strength)
    H = H_e.hamiltonian
    E = enumerate_energies(H, limit)
    ground = ground_mask(E, tie_tol)
    cols = [np.array([H.index[u] for u in chain], dtype=np.intp) for chain in emb.chains.values()]
    n = len(H)
    for start, block in iter_blocks(n):
        rows = np.flatnonzero(ground[start : start + len(block)])
        if rows.size == 0:
            continue
        S = block[rows]
        broken = np.zeros(len(S), dtype=bool)
        for c in cols:
            if c.size > 1:
                broken |= np.any(S[:, c] != S[:, c[:1]], axis=1)
        if broken.any():
            return ConsistencyResult(False, config_dict(H.nodes, S[np.argmax(broken)]), int(ground.sum()))
    return ConsistencyResult(True, None, int(ground.sum()))
