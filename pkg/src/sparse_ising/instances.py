"""Built-in instances: a frustrated triangle and random embedded problems."""

from __future__ import annotations

import numpy as np

from .chain_bounds import ChainGraph, chain_graph
from .embedding import Embedding, HardwareGraph
from .ising_core import IsingHamiltonian


def frustrated_triangle_instance():
    """Three-spin frustrated problem embedded with chains of length 2, 3 and 1.

    ``H = -s1 - 0.3 s2 - s1 s2 + s2 s3 - s1 s3``; its ground states are
    ``(+1, +1, +1)`` and ``(+1, +1, -1)``. Chain ``1`` is ``{p1, p2}``, chain
    ``2`` is the path ``p3 - p4 - p5`` and chain ``3`` is ``{p6}``.

    Returns ``(H_p, hardware, embedding)``.
    """
    H_p = IsingHamiltonian(
        {"1": -1.0, "2": -0.3, "3": 0.0},
        [("1", "2", -1.0), ("2", "3", 1.0), ("1", "3", -1.0)],
        nodes=["1", "2", "3"],
    )
    hw = HardwareGraph.from_edges(
        [("p1", "p2"), ("p3", "p4"), ("p4", "p5"), ("p2", "p3"), ("p1", "p6"), ("p4", "p6")],
        nodes=[f"p{i}" for i in range(1, 7)],
    )
    emb = Embedding({"1": ("p1", "p2"), "2": ("p3", "p4", "p5"), "3": ("p6",)})
    return H_p, hw, emb


def _random_tree_edges(rng: np.random.Generator, nodes: list) -> list:
    return [(nodes[int(rng.integers(0, k))], nodes[k]) for k in range(1, len(nodes))]


def random_embedded_instance(
    rng: np.random.Generator,
    n_logical: tuple[int, int] = (2, 5),
    max_chain: int = 4,
    max_physical: int = 14,
    extra_edge_prob: float = 0.3,
):
    """Random problem, hardware graph and valid embedding.

    Chains are random trees, sometimes with one extra cycle edge. Each logical
    coupling is realized by one or two hardware edges; occasionally a
    hardware edge joins two chains that share no logical coupling.
    """
    n = int(rng.integers(n_logical[0], n_logical[1] + 1))
    logical = [f"v{i}" for i in range(n)]

    sizes = [int(rng.integers(1, max_chain + 1)) for _ in logical]
    while sum(sizes) > max_physical:
        k = int(np.argmax(sizes))
        sizes[k] -= 1

    chains, edges, q = {}, [], 0
    for label, size in zip(logical, sizes):
        qubits = [f"q{q + i}" for i in range(size)]
        q += size
        chains[label] = tuple(qubits)
        edges += _random_tree_edges(rng, qubits)
        if size >= 3 and rng.random() < extra_edge_prob:
            a, b = rng.choice(size, 2, replace=False)
            edges.append((qubits[int(a)], qubits[int(b)]))

    pairs = [(logical[i], logical[j]) for i in range(n) for j in range(i + 1, n)]
    coupled = [p for p in pairs if rng.random() < 0.6] or [pairs[int(rng.integers(len(pairs)))]]
    J = {}
    for a, b in coupled:
        J[(a, b)] = float(rng.choice([-1, 1]) * rng.uniform(0.2, 1.0))
        for _ in range(int(rng.integers(1, 3))):
            edges.append((chains[a][int(rng.integers(len(chains[a])))],
                          chains[b][int(rng.integers(len(chains[b])))]))
    uncoupled = [p for p in pairs if p not in J]
    if uncoupled and rng.random() < extra_edge_prob:
        a, b = uncoupled[int(rng.integers(len(uncoupled)))]
        edges.append((chains[a][0], chains[b][-1]))

    h = {label: float(rng.uniform(-1.0, 1.0)) for label in logical}
    H_p = IsingHamiltonian(h, J, nodes=logical)
    hw = HardwareGraph.from_edges(edges, nodes=[u for label in logical for u in chains[label]])
    return H_p, hw, Embedding(chains)


def random_chain_graph(
    rng: np.random.Generator,
    max_vertices: int = 8,
    weight_range: tuple[float, float] = (0.1, 3.0),
    extra_edge_prob: float = 0.3,
) -> ChainGraph:
    """Connected random chain with 2 to ``max_vertices`` vertices and uniform weights."""
    k = int(rng.integers(2, max_vertices + 1))
    nodes = [f"u{i}" for i in range(k)]
    edges = set(tuple(sorted(e)) for e in _random_tree_edges(rng, nodes))
    for i in range(k):
        for j in range(i + 1, k):
            if (nodes[i], nodes[j]) not in edges and rng.random() < extra_edge_prob:
                edges.add((nodes[i], nodes[j]))
    weights = {u: float(rng.uniform(*weight_range)) for u in nodes}
    return chain_graph(nodes, sorted(edges), weights)
