import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import hamiltonians
from oracles import all_states, dict_energy, gibbs_table, ground_set
from sparse_ising import (
    HamiltonianError,
    InvalidConfigurationError,
    IsingHamiltonian,
    ParameterError,
    SizeLimitError,
    build_star_instance,
    energy,
    enumerate_spectrum,
    gibbs_probability,
    solve_probability,
)
from sparse_ising.gibbs_engine import exact_distribution
from sparse_ising.ising_core import config_block, config_index, enumerate_energies


def test_triangle_energy_all_up(triangle):
    H_p, _, _ = triangle
    assert energy(H_p, {"1": 1, "2": 1, "3": 1}) == pytest.approx(-2.3, abs=1e-15)


def test_zero_hamiltonian_energy():
    H = IsingHamiltonian(nodes=["a", "b"])
    assert energy(H, {"a": 1, "b": -1}) == 0.0


def test_energy_accepts_sequence_in_node_order(triangle):
    H_p, _, _ = triangle
    assert energy(H_p, [1, 1, -1]) == pytest.approx(-2.3)


@pytest.mark.parametrize("bad", [{"1": 1, "2": 1}, {"1": 1, "2": 1, "3": 1, "4": 1}, {"1": 1, "2": 0, "3": 1}])
def test_energy_rejects_bad_configurations(triangle, bad):
    H_p, _, _ = triangle
    with pytest.raises(InvalidConfigurationError):
        energy(H_p, bad)


def test_construction_rejects_malformed_input():
    with pytest.raises(HamiltonianError):
        IsingHamiltonian({}, {("a", "a"): 1.0})
    with pytest.raises(HamiltonianError):
        IsingHamiltonian({}, [("a", "b", 1.0), ("b", "a", 2.0)])
    with pytest.raises(HamiltonianError):
        IsingHamiltonian({"a": 1.0}, {("a", "z"): 1.0}, nodes=["a"])


def test_bias_defaults_to_zero():
    H = IsingHamiltonian({}, {("a", "b"): 1.0}, nodes=["a", "b", "c"])
    assert dict(H.h) == {"a": 0.0, "b": 0.0, "c": 0.0}


def test_hamiltonian_views_are_read_only():
    H = IsingHamiltonian({"a": 1.0})
    with pytest.raises(TypeError):
        H.h["a"] = 2.0


@given(hamiltonians(zero_bias=True), st.data())
def test_energy_spin_flip_symmetry(H, data):
    s = {u: data.draw(st.sampled_from([-1, 1])) for u in H.nodes}
    assert energy(H, s) == pytest.approx(energy(H, {u: -v for u, v in s.items()}), abs=1e-12)


@given(hamiltonians())
def test_enumerated_energies_match_direct_sums(H):
    E = enumerate_energies(H)
    h, J = dict(H.h), dict(H.J)
    for s in all_states(list(H.nodes)):
        vec = [s[u] for u in H.nodes]
        assert E[config_index(vec)] == pytest.approx(dict_energy(h, J, s), abs=1e-12)


def test_config_index_round_trip():
    block = config_block(5, 0, 32)
    assert [config_index(row) for row in block] == list(range(32))
    assert (block[0] == 1).all()


def test_triangle_spectrum(triangle):
    H_p, _, _ = triangle
    spec = enumerate_spectrum(H_p)
    assert spec.ground_energy == pytest.approx(-2.3)
    assert spec.degeneracy == 2
    assert {tuple(s[u] for u in "123") for s in spec.ground_states} == {(1, 1, 1), (1, 1, -1)}
    assert spec.gap > 0


def test_single_spin_spectrum():
    spec = enumerate_spectrum(IsingHamiltonian({"a": -1.0}))
    assert spec.ground_energy == -1.0
    assert spec.ground_states == ({"a": 1},)
    assert spec.gap == 2.0


def test_star_spectrum_degeneracy():
    H, _, _ = build_star_instance(1)
    spec = enumerate_spectrum(H)
    assert spec.ground_energy == -2.0
    assert spec.degeneracy == 4


def test_flat_spectrum_has_zero_gap():
    spec = enumerate_spectrum(IsingHamiltonian(nodes=["a", "b"]))
    assert spec.gap == 0.0
    assert spec.degeneracy == 4


@given(hamiltonians(max_nodes=5))
def test_ground_set_matches_brute_force(H):
    spec = enumerate_spectrum(H)
    expected, e0 = ground_set(dict(H.h), dict(H.J), list(H.nodes))
    assert spec.ground_energy == pytest.approx(e0, abs=1e-12)
    key = lambda s: tuple(s[u] for u in H.nodes)
    assert sorted(map(key, spec.ground_states)) == sorted(map(key, expected))


def test_size_limit_points_to_mcmc():
    H = IsingHamiltonian(nodes=[f"s{i}" for i in range(5)])
    with pytest.raises(SizeLimitError, match="mcmc"):
        enumerate_spectrum(H, limit=4)


def test_gibbs_uniform_at_zero_beta(triangle):
    H_p, _, _ = triangle
    for s in all_states(list(H_p.nodes)):
        assert gibbs_probability(H_p, 0.0, s) == pytest.approx(1 / 8, abs=1e-15)


def test_single_spin_gibbs_value():
    H = IsingHamiltonian({"a": -1.0})
    assert gibbs_probability(H, 1.0, {"a": 1}) == pytest.approx(0.8807970779778824, abs=1e-15)


def test_negative_beta_rejected():
    with pytest.raises(ParameterError):
        gibbs_probability(IsingHamiltonian({"a": 1.0}), -0.5, {"a": 1})


def test_gibbs_is_stable_at_huge_beta(triangle):
    H_p, _, _ = triangle
    p = gibbs_probability(H_p, 1e4, {"1": 1, "2": 1, "3": 1})
    assert p == pytest.approx(0.5)


@settings(max_examples=50)
@given(hamiltonians(), st.floats(0.0, 5.0))
def test_gibbs_normalization_and_oracle(H, beta):
    dist = exact_distribution(H, beta)
    assert abs(dist.probabilities.sum() - 1.0) < 1e-12
    for s, _, p in gibbs_table(dict(H.h), dict(H.J), list(H.nodes), beta):
        assert dist.probability(s) == pytest.approx(p, abs=1e-12)


@given(hamiltonians(zero_bias=True), st.floats(0.0, 3.0), st.data())
def test_gibbs_spin_flip_symmetry(H, beta, data):
    s = {u: data.draw(st.sampled_from([-1, 1])) for u in H.nodes}
    flipped = {u: -v for u, v in s.items()}
    assert gibbs_probability(H, beta, s) == pytest.approx(gibbs_probability(H, beta, flipped), abs=1e-12)


def test_triangle_solve_probability_limits(triangle):
    H_p, _, _ = triangle
    assert solve_probability(H_p, 0.0) == pytest.approx(0.25, abs=1e-15)
    assert solve_probability(H_p, 50.0) > 1 - 1e-6


def test_star_solve_matches_closed_form():
    H, _, _ = build_star_instance(1)
    assert solve_probability(H, 1.0) == pytest.approx(1 / (1 + math.exp(-4)), abs=1e-12)


@settings(max_examples=30)
@given(hamiltonians(max_nodes=5))
def test_solve_probability_monotone_in_beta(H):
    values = [solve_probability(H, b) for b in np.linspace(0, 6, 13)]
    assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))


@settings(max_examples=30)
@given(hamiltonians(max_nodes=5), st.floats(0.1, 4.0), st.floats(0.0, 3.0))
def test_solve_probability_scale_covariance(H, alpha, beta):
    assert solve_probability(H.scaled(alpha), beta) == pytest.approx(solve_probability(H, alpha * beta), abs=1e-12)
