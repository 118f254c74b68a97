from __future__ import annotations

import numpy as np
import pytest

from wpqc import circuit as C
from wpqc.circuit import QuantumCircuit, check_weight_preserving
from wpqc.hamiltonian import classify_sparsity, energies_by_label, validate_instance
from wpqc.reductions.clock import (
    full_gate_matrix,
    gate_incidence,
    grid_embed,
    history_state,
    propagation_block,
    wpcsat_to_sparse_ham,
)
from wpqc.simulator import acceptance_probability, final_batch, optimal_sector_witness
from wpqc.weightspace import SectorState, min_energy_in_sector


def rand_u(rng):
    return np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))[0]


def random_wp(rng, n_wit, n_anc, n_gates, accept, init=None):
    n = n_wit + n_anc
    gates = []
    for _ in range(n_gates):
        a, b = (int(v) for v in rng.choice(n, 2, replace=False))
        gates.append(C.hat(a, b, rand_u(rng)))
    return QuantumCircuit(n_wit, n_anc, init or "0" * n_anc, tuple(gates), accept)


def test_grid_examples():
    one = QuantumCircuit(2, 0, "", (C.hat(0, 1, rand_u(np.random.default_rng(0))),), ((0, 1),))
    g = grid_embed(one)
    assert g.meta["layers"] == 2 and g.n_wires == 4 and len(g.gates) == 3
    rng = np.random.default_rng(1)
    for _ in range(10):
        c = random_wp(rng, 3, 0, 5, ((0, 1),))
        g = grid_embed(c)
        assert gate_incidence(g).max() <= 3
        assert check_weight_preserving(g)


def test_grid_simulates_faithfully():
    rng = np.random.default_rng(2)
    c = random_wp(rng, 2, 1, 4, ((1, 1),))
    g = grid_embed(c)
    psi = SectorState.random(2, 1, rng)
    k0, a0 = final_batch(c, psi)
    k1, a1 = final_batch(g, psi)
    r = len(c.gates)
    # all weight sits on the last layer, which carries the original register
    assert np.all(k1 < (1 << c.n_wires))
    order0, order1 = np.argsort(k0), np.argsort(k1)
    assert np.array_equal(k0[order0], k1[order1])
    assert np.abs(a0[order0] - a1[order1]).max() < 1e-10
    assert acceptance_probability(g, psi).probability == pytest.approx(acceptance_probability(c, psi).probability)
    assert r == g.meta["layers"] - 1


def test_full_gate_matrix_and_propagation_projector():
    g = C.hat(0, 2, rand_u(np.random.default_rng(3)), controls=(1,), polarities=(0,))
    m = full_gate_matrix(g)
    assert np.allclose(m.conj().T @ m, np.eye(8))
    p = propagation_block(m[:4, :4])
    assert np.allclose(p @ p, p) and np.allclose(p, p.conj().T)


def perfect_seed(rng, n_gates):
    c = random_wp(rng, 3, 0, n_gates, ((0, 1),))
    w, p = optimal_sector_witness(c, 1)
    return c, w, p


def test_kitaev_structure():
    rng = np.random.default_rng(4)
    c = random_wp(rng, 2, 1, 2, ((0, 1),), init="1")
    g = grid_embed(c)
    art = wpcsat_to_sparse_ham(g, 1, 1e-12)
    H = art.instance
    t = art.metadata["T"]
    assert H.n == 2 * g.n_wires + t + 1
    assert art.k_out == 2 * (1 + 1) + 1
    assert validate_instance(H).ok and validate_instance(H).all_projectors
    assert classify_sparsity(H, bound=6).kind == "almost-spatially-sparse"
    a, b = art.thresholds
    assert a == pytest.approx(1e-12 / (t + 1))


def test_history_state_energies():
    rng = np.random.default_rng(5)
    c = random_wp(rng, 2, 1, 3, ((0, 1),))
    g = grid_embed(c)
    art = wpcsat_to_sparse_ham(g, 1, 1e-12)
    psi = SectorState.random(2, 1, rng)
    hs = history_state(g, psi)
    assert hs.k == art.k_out and hs.is_normalized
    e = energies_by_label(art.instance, hs)
    for label in ("in", "prop", "clock", "state"):
        assert abs(e[label]) <= 1e-10
    rej = 1 - acceptance_probability(c, psi).probability
    assert e["out"] == pytest.approx(rej / (art.metadata["T"] + 1), abs=1e-12)


def test_empty_circuit_history_is_ground_state():
    c = QuantumCircuit(2, 0, "", (), ((0, 1),))
    g = grid_embed(c)
    art = wpcsat_to_sparse_ham(g, 1, 0.0)
    hs = history_state(g, "10")
    e0, _ = min_energy_in_sector(art.instance, art.k_out)
    assert abs(e0) < 1e-12
    assert abs(sum(energies_by_label(art.instance, hs).values())) < 1e-12


@pytest.mark.parametrize("seed", [6, 7])
def test_perfect_completeness_and_rejection(seed):
    rng = np.random.default_rng(seed)
    c, w, p = perfect_seed(rng, 2)
    assert p == pytest.approx(1)
    g = grid_embed(c)
    art = wpcsat_to_sparse_ham(g, 1, 1e-12)
    e0, _ = min_energy_in_sector(art.instance, art.k_out)
    assert e0 <= 1e-9
    reject = c.with_gates(c.gates, accept=((0, 1), (1, 1)))
    art_r = wpcsat_to_sparse_ham(grid_embed(reject), 1, 1e-12)
    e1, _ = min_energy_in_sector(art_r.instance, art_r.k_out)
    assert e1 >= 1e-6


def test_rejects_non_wp():
    c = QuantumCircuit(2, 0, "", (C.cnot(0, 1),), ((0, 1),))
    with pytest.raises(ValueError):
        wpcsat_to_sparse_ham(grid_embed(c), 1, 0.1)
