import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sparse_ising import (
    Embedding,
    EmbeddingError,
    HardwareGraph,
    InvalidConfigurationError,
    IsingHamiltonian,
    ParameterError,
    build_star_instance,
    embed,
    is_chain_consistent,
    unembed_discard,
    unembed_majority,
    validate,
)
from sparse_ising.embedding import embed_configuration, with_chain_strength
from sparse_ising.instances import random_embedded_instance
from oracles import all_states, dict_energy


def _kinds(diagnostics):
    return {d.kind for d in diagnostics}


def test_triangle_embedding_is_valid(triangle):
    H_p, hw, emb = triangle
    assert validate(emb, H_p, hw) == []


def test_overlapping_chains_are_reported():
    H = IsingHamiltonian({}, {("a", "b"): 1.0})
    hw = HardwareGraph.from_edges([(1, 2), (2, 3)])
    diags = validate(Embedding({"a": (1, 2), "b": (2, 3)}), H, hw)
    assert "overlap" in _kinds(diags)


def test_disconnected_chain_is_reported():
    H = IsingHamiltonian({"a": 1.0})
    hw = HardwareGraph.from_edges([(1, 2), (2, 3)])
    diags = validate(Embedding({"a": (1, 3)}), H, hw)
    assert _kinds(diags) == {"disconnected"}


def test_other_diagnostics():
    H = IsingHamiltonian({}, {("a", "b"): 1.0, ("b", "c"): 1.0})
    hw = HardwareGraph.from_edges([(1, 2), (3, 4)])
    diags = validate(Embedding({"a": (1,), "b": (3, 3), "z": (9,), "c": ()}), H, hw)
    assert {"repeated-qubit", "unknown-logical", "unknown-qubit", "empty-chain", "missing-inter-edge"} <= _kinds(diags)
    diags = validate(Embedding({"a": (1,)}), H, hw)
    assert "missing-chain" in _kinds(diags)


def test_embed_rejects_invalid_embedding_and_negative_strength(triangle):
    H_p, hw, emb = triangle
    with pytest.raises(EmbeddingError) as info:
        embed(H_p, hw, Embedding({"1": ("p1", "p5"), "2": ("p3",), "3": ("p6",)}), 1.0)
    assert info.value.diagnostics
    with pytest.raises(ParameterError):
        embed(H_p, hw, emb, -1.0)


def test_star_embedding_coefficients():
    H, hw, emb = build_star_instance(2)
    H_e = embed(H, hw, emb, 1.7)
    J = {frozenset(k): v for k, v in H_e.hamiltonian.J.items()}
    for x in ("x1", "x2"):
        assert J[frozenset(("s1", x))] == 1.0
        assert H_e.hamiltonian.h[x] == 1.0
    for y in ("y1", "y2"):
        assert J[frozenset(("s2", y))] == 1.0
        assert H_e.hamiltonian.h[y] == -1.0
    assert J[frozenset(("s1", "s2"))] == -1.7
    assert H_e.intra_edge_count == 1


def test_star_instance_structure():
    H, hw, emb = build_star_instance(1)
    assert len(H.nodes) == 3
    assert len(hw.nodes) == 4
    assert {frozenset(e) for e in hw.edges} == {frozenset(e) for e in [("s1", "s2"), ("s1", "x1"), ("s2", "y1")]}
    H_e = embed(H, hw, emb, 0.7)
    assert H_e.hamiltonian.J[("s1", "s2")] == -0.7


def test_star_instance_layouts():
    _, hw, emb = build_star_instance(3, chain_length=4)
    assert emb.chains["c"] == ("h1", "h2", "h3", "h4")
    x_hubs = {u for u, v in hw.edges if v.startswith("x")}
    y_hubs = {u for u, v in hw.edges if v.startswith("y")}
    assert x_hubs == {"h1", "h2"} and y_hubs == {"h3", "h4"}
    _, hw, _ = build_star_instance(3, chain_length=4, layout="ends")
    assert {u for u, v in hw.edges if v.startswith("x")} == {"h1"}
    assert {u for u, v in hw.edges if v.startswith("y")} == {"h4"}
    for bad in ({"l": 0}, {"l": 1, "chain_length": 1}, {"l": 1, "layout": "zigzag"}):
        with pytest.raises(ParameterError):
            build_star_instance(**bad)


def test_equal_splitting():
    H = IsingHamiltonian({"a": -0.3, "b": 0.0}, {("a", "b"): 1.0})
    hw = HardwareGraph.from_edges([(1, 2), (2, 3), (4, 5), (1, 4), (3, 5)])
    H_e = embed(H, hw, Embedding({"a": (1, 2, 3), "b": (4, 5)}), 2.0)
    h = H_e.hamiltonian.h
    assert [h[u] for u in (1, 2, 3)] == pytest.approx([-0.1] * 3)
    assert H_e.hamiltonian.J[(1, 4)] == 0.5
    assert H_e.hamiltonian.J[(3, 5)] == 0.5


def test_uncoupled_inter_chain_edge_gets_zero():
    H = IsingHamiltonian({"a": 1.0, "b": 1.0})
    hw = HardwareGraph.from_edges([(1, 2)])
    H_e = embed(H, hw, Embedding({"a": (1,), "b": (2,)}), 1.0)
    assert H_e.hamiltonian.J[(1, 2)] == 0.0


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.0, 4.0))
def test_consistent_energy_shift(seed, lam):
    H_p, hw, emb = random_embedded_instance(np.random.default_rng(seed), max_physical=9)
    H_e = embed(H_p, hw, emb, lam)
    hp, Jp = dict(H_p.h), dict(H_p.J)
    he, Je = dict(H_e.hamiltonian.h), dict(H_e.hamiltonian.J)
    for s in all_states(list(H_p.nodes)):
        phys = embed_configuration(emb, s)
        shift = dict_energy(he, Je, phys) - (dict_energy(hp, Jp, s) - lam * H_e.intra_edge_count)
        assert abs(shift) < 1e-10


def test_with_chain_strength_rebuilds(triangle):
    H_e = embed(*triangle, 1.0)
    other = with_chain_strength(H_e, 2.5)
    assert other.chain_strength == 2.5
    assert other.hamiltonian.J[("p1", "p2")] == -2.5


def test_chain_consistency(triangle):
    _, _, emb = triangle
    up = {u: 1 for u in emb.physical_nodes}
    assert is_chain_consistent(emb, up)
    assert not is_chain_consistent(emb, {**up, "p2": -1})
    singles = Embedding({"a": (1,), "b": (2,)})
    assert all(is_chain_consistent(singles, {1: a, 2: b}) for a in (1, -1) for b in (1, -1))
    with pytest.raises(InvalidConfigurationError):
        is_chain_consistent(emb, {"p1": 1})


def test_unembed_discard(triangle):
    _, _, emb = triangle
    up = {u: 1 for u in emb.physical_nodes}
    assert unembed_discard(emb, up) == {"1": 1, "2": 1, "3": 1}
    assert unembed_discard(emb, {**up, "p4": -1}) is None


def test_round_trip(triangle):
    _, _, emb = triangle
    for s in all_states(["1", "2", "3"]):
        assert unembed_discard(emb, embed_configuration(emb, s)) == s


def test_unembed_majority():
    emb = Embedding({"a": (1, 2, 3), "b": (4, 5)})
    s = {1: 1, 2: 1, 3: -1, 4: 1, 5: -1}
    assert unembed_majority(emb, s) == {"a": 1, "b": 1}
    assert unembed_majority(emb, s, tie_rule=-1)["b"] == -1
    consistent = {1: -1, 2: -1, 3: -1, 4: 1, 5: 1}
    assert unembed_majority(emb, consistent) == unembed_discard(emb, consistent)
    with pytest.raises(ParameterError):
        unembed_majority(emb, s, tie_rule=0)


def test_hardware_graph_dedupes_and_rejects_loops():
    hw = HardwareGraph.from_edges([(1, 2), (2, 1)])
    assert hw.edges == ((1, 2),)
    assert hw.has_edge(2, 1)
    with pytest.raises(ParameterError):
        HardwareGraph.from_edges([(1, 1)])
