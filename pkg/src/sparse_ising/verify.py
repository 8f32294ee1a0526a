"""Randomized invariant suite behind the ``verify`` command.

Each family returns a :class:`FamilyResult`. Failures carry a counterexample
dump; findings are noteworthy but non-failing observations.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .chain_bounds import (
    cheeger_check,
    conductance_bound,
    conductance_exact,
    flip_safe_bound,
    ground_state_consistency_check,
    spectral_bound,
)
from .embedding import build_star_instance, embed
from .ising_core import boltzmann, enumerate_energies
from .instances import frustrated_triangle_instance, random_chain_graph, random_embedded_instance
from .io import embedding_to_json, hamiltonian_to_json, hardware_to_json
from .pipeline import energy_decomposition_residual, evaluate_embedded
from .rescaling import DEFAULT_RANGES, rescale
from .star import StarParams, star_pcc, star_sparse_solve

CHAIN_STRENGTHS = (0.0, 0.5, 1.0, 2.0, 3.0)
BETAS = (0.5, 1.0, 4.0)


@dataclass
class FamilyResult:
    family: str
    instances: int = 0
    failures: list = field(default_factory=list)
    findings: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        out = asdict(self)
        out["passed"] = self.passed
        return out


def _instance_dump(H_p, hw, emb) -> dict:
    return {"problem": hamiltonian_to_json(H_p), "hardware": hardware_to_json(hw),
            "embedding": embedding_to_json(emb)}


def _random_instances(rng, count, max_physical):
    yield frustrated_triangle_instance()
    for _ in range(count - 1):
        yield random_embedded_instance(rng, max_physical=max_physical)


def check_decomposition(rng, count: int = 20, max_physical: int = 12, tol: float = 1e-9) -> FamilyResult:
    """Probability identity ``p_sparse = p_cc * p_solve_eff`` and the consistent-state energy shift."""
    res = FamilyResult("decomposition")
    for H_p, hw, emb in _random_instances(rng, count, max_physical):
        res.instances += 1
        beta = float(rng.choice(BETAS))
        for lam in CHAIN_STRENGTHS:
            H_e = embed(H_p, hw, emb, lam)
            residual = evaluate_embedded(H_e, beta, DEFAULT_RANGES).decomposition_residual
            shift = energy_decomposition_residual(H_e)
            if residual >= tol or shift >= 1e-10:
                res.failures.append({
                    "chain_strength": lam, "beta": beta, "probability_residual": residual,
                    "energy_residual": shift, "instance": _instance_dump(H_p, hw, emb),
                })
                break
    return res


def check_conductance_bound(rng, count: int = 20, max_physical: int = 14, margin: float = 1.01,
                   flip_safe: bool = False) -> FamilyResult:
    """Every ground state is chain consistent just above the conductance bound."""
    res = FamilyResult("conductance_bound_flip_safe" if flip_safe else "conductance_bound")
    for _ in range(count):
        H_p, hw, emb = random_embedded_instance(rng, max_chain=4, max_physical=max_physical)
        res.instances += 1
        H_e = embed(H_p, hw, emb, 1.0)
        bound = flip_safe_bound(H_e) if flip_safe else conductance_bound(H_e)
        lam = bound * margin
        out = ground_state_consistency_check(H_p, hw, emb, lam)
        if not out.consistent:
            res.failures.append({"chain_strength": lam, "bound": bound,
                                 "broken_ground_state": out.counterexample,
                                 "instance": _instance_dump(H_p, hw, emb)})
    return res


def check_cheeger(rng, count: int = 50, max_vertices: int = 8, slack: float = 1e-9) -> FamilyResult:
    """Spectral bound dominance and the lower Cheeger side must hold; upper-side misses are findings."""
    res = FamilyResult("cheeger")
    for _ in range(count):
        g = random_chain_graph(rng, max_vertices)
        res.instances += 1
        c = cheeger_check(g, slack)
        spectral = spectral_bound(g).bound
        conductance = conductance_exact(g).bound
        dump = {"vertices": list(g.vertices), "edges": [list(e) for e in g.edges],
                "weights": dict(g.weights), "lambda2": 2 * c.lower, "phi": c.phi}
        if not c.lower_ok or spectral < conductance - slack:
            res.failures.append(dump)
        elif not c.upper_ok:
            res.findings.append({"kind": "cheeger-upper-violated", **dump})
    return res


def check_star_closed_form(tol: float = 1e-9) -> FamilyResult:
    res = FamilyResult("star_closed_form")
    for l in (1, 2, 3):
        H_star, hw, emb = build_star_instance(l)
        for lam in (0.0, 0.5, 1.0, 2.0, 4.0, 8.0):
            H_e = embed(H_star, hw, emb, lam)
            for beta in BETAS:
                res.instances += 1
                report = evaluate_embedded(H_e, beta, DEFAULT_RANGES)
                p = StarParams(l, beta, lam)
                err = max(abs(report.p_cc - star_pcc(p)), abs(report.p_sparse - star_sparse_solve(p)))
                if err >= tol:
                    res.failures.append({"l": l, "chain_strength": lam, "beta": beta, "error": err})
    return res


def check_rescaling(rng, count: int = 20, tol: float = 1e-12) -> FamilyResult:
    """The distribution of ``H / scale`` at ``beta`` equals that of ``H`` at ``beta / scale``."""
    res = FamilyResult("rescaling")
    for _ in range(count):
        H_p, hw, emb = random_embedded_instance(rng, max_physical=10)
        lam = float(rng.uniform(0.0, 6.0))
        beta = float(rng.uniform(0.1, 4.0))
        H = embed(H_p, hw, emb, lam).hamiltonian
        H_scaled, scale = rescale(H)
        res.instances += 1
        a = boltzmann(enumerate_energies(H_scaled), beta)
        b = boltzmann(enumerate_energies(H), beta / scale)
        err = float(np.max(np.abs(a - b)))
        if err >= tol:
            res.failures.append({"chain_strength": lam, "beta": beta, "scale": scale, "error": err})
    return res


def run_suite(seed: int, count: int = 20) -> list[FamilyResult]:
    rng = np.random.default_rng(seed)
    return [
        check_decomposition(rng, count),
        check_conductance_bound(rng, count),
        check_conductance_bound(rng, count, flip_safe=True),
        check_cheeger(rng, max(count, 50)),
        check_star_closed_form(),
        check_rescaling(rng, count),
    ]


def summary(results) -> dict:
    return {
        "passed": all(r.passed for r in results),
        "families": [r.to_json() for r in results],
    }

