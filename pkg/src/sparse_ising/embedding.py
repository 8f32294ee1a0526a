"""Hardware graphs, minor-embeddings and embedded Hamiltonians."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Hashable, Iterable, Mapping

import networkx as nx
import numpy as np

from .errors import EmbeddingError, InvalidConfigurationError, ParameterError
from .ising_core import IsingHamiltonian


def _pair(a, b) -> frozenset:
    return frozenset((a, b))


@dataclass(frozen=True)
class HardwareGraph:
    nodes: tuple
    edges: tuple

    @classmethod
    def from_edges(cls, edges: Iterable, nodes: Iterable | None = None) -> "HardwareGraph":
        seen: dict = {}
        if nodes is not None:
            for u in nodes:
                seen.setdefault(u, None)
        canonical = []
        pairs = set()
        for u, v in edges:
            if u == v:
                raise ParameterError(f"hardware self-loop on {u!r}")
            key = _pair(u, v)
            if key in pairs:
                continue
            pairs.add(key)
            seen.setdefault(u, None)
            seen.setdefault(v, None)
            canonical.append((u, v))
        return cls(tuple(seen), tuple(canonical))

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(self.nodes)
        g.add_edges_from(self.edges)
        return g

    def has_edge(self, u, v) -> bool:
        return _pair(u, v) in self._edge_set

    @property
    def _edge_set(self) -> frozenset:
        cached = self.__dict__.get("_edges_cache")
        if cached is None:
            cached = frozenset(_pair(u, v) for u, v in self.edges)
            object.__setattr__(self, "_edges_cache", cached)
        return cached


@dataclass(frozen=True)
class Embedding:
    """Chains ``C_i``: logical label -> tuple of physical labels."""

    chains: Mapping

    def __post_init__(self):
        object.__setattr__(
            self, "chains", MappingProxyType({k: tuple(v) for k, v in dict(self.chains).items()})
        )

    @property
    def physical_nodes(self) -> tuple:
        return tuple(u for chain in self.chains.values() for u in chain)

    def owner(self) -> dict:
        return {u: label for label, chain in self.chains.items() for u in chain}


@dataclass(frozen=True)
class Diagnostic:
    kind: str
    subject: tuple
    message: str

    def __str__(self) -> str:
        return f"[{self.kind}] {self.message}"


def validate(emb: Embedding, problem: IsingHamiltonian, hw: HardwareGraph) -> list[Diagnostic]:
    """Every violated embedding invariant; an empty list means the embedding is valid."""
    out: list[Diagnostic] = []
    hw_nodes = set(hw.nodes)
    g = hw.to_networkx()

    for label in problem.nodes:
        if label not in emb.chains:
            out.append(Diagnostic("missing-chain", (label,), f"logical spin {label!r} has no chain"))
    for label, chain in emb.chains.items():
        if label not in problem.index:
            out.append(Diagnostic("unknown-logical", (label,), f"chain given for unknown logical spin {label!r}"))
        if not chain:
            out.append(Diagnostic("empty-chain", (label,), f"chain of {label!r} is empty"))
            continue
        missing = [u for u in chain if u not in hw_nodes]
        if missing:
            out.append(
                Diagnostic("unknown-qubit", (label, *missing), f"chain of {label!r} uses qubits not in hardware: {missing!r}")
            )
        if len(set(chain)) != len(chain):
            out.append(Diagnostic("repeated-qubit", (label,), f"chain of {label!r} lists a qubit twice"))
        present = [u for u in chain if u in hw_nodes]
        if present and len(present) == len(chain) and not nx.is_connected(g.subgraph(present)):
            out.append(
                Diagnostic("disconnected", (label,), f"chain of {label!r} {list(chain)!r} is not connected in hardware")
            )

    holders: dict = defaultdict(list)
    for label, chain in emb.chains.items():
        for u in set(chain):
            holders[u].append(label)
    for u, labels in holders.items():
        if len(labels) > 1:
            out.append(Diagnostic("overlap", (u, *labels), f"qubit {u!r} is shared by chains {labels!r}"))

    for a, b in problem.J:
        ca, cb = emb.chains.get(a), emb.chains.get(b)
        if not ca or not cb:
            continue
        if not any(hw.has_edge(u, v) for u in ca for v in cb):
            out.append(
                Diagnostic("missing-inter-edge", (a, b), f"no hardware edge joins the chains of {a!r} and {b!r}")
            )
    return out


@dataclass(frozen=True)
class EmbeddedHamiltonian:
    hamiltonian: IsingHamiltonian
    chain_strength: float
    intra_edge_count: int
    embedding: Embedding
    intra_edges: tuple = field(default=())
    problem: IsingHamiltonian | None = field(default=None, compare=False)
    hardware: HardwareGraph | None = field(default=None, compare=False)

    def intra_energy(self, S: np.ndarray) -> np.ndarray:
        """``sum_{intra (u,v)} s_u s_v`` for each row of physical spins."""
        index = self.hamiltonian.index
        S = np.asarray(S, dtype=float)
        out = np.zeros(len(S))
        for u, v in self.intra_edges:
            out += S[:, index[u]] * S[:, index[v]]
        return out


def embed(
    problem: IsingHamiltonian,
    hw: HardwareGraph,
    emb: Embedding,
    chain_strength: float,
) -> EmbeddedHamiltonian:
    """Build ``H_e`` by splitting biases and couplings equally over chains.

    Intra-chain hardware edges carry ``-chain_strength``; hardware edges
    between chains with no logical coupling are kept with coupling 0.
    """
    diagnostics = validate(emb, problem, hw)
    if diagnostics:
        raise EmbeddingError(diagnostics)
    lam = float(chain_strength)
    if lam < 0:
        raise ParameterError(f"chain strength must be >= 0, got {lam}")

    owner = emb.owner()
    physical = [u for label in problem.nodes for u in emb.chains[label]]
    h = {}
    for label in problem.nodes:
        chain = emb.chains[label]
        share = problem.h[label] / len(chain)
        for u in chain:
            h[u] = share

    inter: dict = defaultdict(list)
    intra = []
    for u, v in hw.edges:
        if u not in owner or v not in owner:
            continue
        a, b = owner[u], owner[v]
        if a == b:
            intra.append((u, v))
        else:
            inter[_pair(a, b)].append((u, v))

    J = {}
    for (a, b), value in problem.J.items():
        edges = inter.get(_pair(a, b), [])
        for u, v in edges:
            J[(u, v)] = value / len(edges)
    for key, edges in inter.items():
        a, b = tuple(key)
        if (a, b) in problem.J or (b, a) in problem.J:
            continue
        for u, v in edges:
            J[(u, v)] = 0.0
    for u, v in intra:
        J[(u, v)] = -lam

    H = IsingHamiltonian(h, J, nodes=physical)
    return EmbeddedHamiltonian(H, lam, len(intra), emb, tuple(intra), problem, hw)


def with_chain_strength(H_e: EmbeddedHamiltonian, chain_strength: float) -> EmbeddedHamiltonian:
    return embed(H_e.problem, H_e.hardware, H_e.embedding, chain_strength)


# -- unembedding ------------------------------------------------------------


def _physical_values(emb: Embedding, s_phys: Mapping) -> None:
    missing = [u for u in emb.physical_nodes if u not in s_phys]
    if missing:
        raise InvalidConfigurationError(f"configuration is missing physical qubits {missing!r}")
    bad = [u for u in emb.physical_nodes if s_phys[u] not in (1, -1)]
    if bad:
        raise InvalidConfigurationError(f"spins must be +1 or -1 (offending qubits {bad!r})")


def is_chain_consistent(emb: Embedding, s_phys: Mapping) -> bool:
    _physical_values(emb, s_phys)
    return all(len({s_phys[u] for u in chain}) == 1 for chain in emb.chains.values())


def unembed_discard(emb: Embedding, s_phys: Mapping) -> dict | None:
    """Logical configuration for a chain-consistent sample, or ``None`` if any chain is broken."""
    if not is_chain_consistent(emb, s_phys):
        return None
    return {label: int(s_phys[chain[0]]) for label, chain in emb.chains.items()}


def unembed_majority(emb: Embedding, s_phys: Mapping, tie_rule: int = 1) -> dict:
    """Per-chain majority vote; even splits resolve to ``tie_rule``."""
    if tie_rule not in (1, -1):
        raise ParameterError("tie_rule must be +1 or -1")
    _physical_values(emb, s_phys)
    out = {}
    for label, chain in emb.chains.items():
        total = sum(s_phys[u] for u in chain)
        out[label] = 1 if total > 0 else -1 if total < 0 else tie_rule
    return out


def embed_configuration(emb: Embedding, logical: Mapping) -> dict:
    """The chain-consistent physical image of a logical configuration."""
    return {u: int(logical[label]) for label, chain in emb.chains.items() for u in chain}


# -- constructors -----------------------------------------------------------


def build_star_instance(l: int, chain_length: int = 2, layout: str = "split"):
    """Star problem centred on ``c`` with ``l`` auxiliaries on each side.

    The problem is ``(1 + s_c) sum x_i - (1 - s_c) sum y_i``, so the centre
    has degree ``2 l``. The centre is embedded as a path of ``chain_length``
    hub qubits. With the default length of 2 the hubs are ``s1`` and ``s2``,
    carrying the x and y auxiliaries respectively; longer paths use ``h1..hk``.

    ``layout`` decides where auxiliaries attach on longer paths:
    ``"split"`` deals the x auxiliaries round-robin over the first
    ``chain_length // 2`` hubs and the y auxiliaries over the rest, while
    ``"ends"`` puts every x on the first hub and every y on the last.

    Returns ``(H_star, hardware, embedding)``.
    """
    if l < 1:
        raise ParameterError("l must be >= 1")
    if chain_length < 2:
        raise ParameterError("chain_length must be >= 2")
    if layout not in ("split", "ends"):
        raise ParameterError(f"layout must be 'split' or 'ends', got {layout!r}")
    xs = [f"x{i}" for i in range(1, l + 1)]
    ys = [f"y{i}" for i in range(1, l + 1)]
    h = {"c": 0.0, **{x: 1.0 for x in xs}, **{y: -1.0 for y in ys}}
    J = {**{("c", x): 1.0 for x in xs}, **{("c", y): 1.0 for y in ys}}
    H_star = IsingHamiltonian(h, J, nodes=["c", *xs, *ys])

    if chain_length == 2:
        hubs = ["s1", "s2"]
    else:
        hubs = [f"h{i}" for i in range(1, chain_length + 1)]
    if layout == "split":
        x_side = hubs[: chain_length // 2]
        y_side = hubs[chain_length // 2 :]
    else:
        x_side, y_side = hubs[:1], hubs[-1:]
    edges = list(zip(hubs[:-1], hubs[1:]))
    edges += [(x_side[i % len(x_side)], x) for i, x in enumerate(xs)]
    edges += [(y_side[i % len(y_side)], y) for i, y in enumerate(ys)]
    hw = HardwareGraph.from_edges(edges, nodes=[*hubs, *xs, *ys])
    emb = Embedding({"c": tuple(hubs), **{x: (x,) for x in xs}, **{y: (y,) for y in ys}})
    return H_star, hw, emb
