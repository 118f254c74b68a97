from __future__ import annotations

import numpy as np
import pytest

from wpqc import circuit as C
from wpqc.circuit import QuantumCircuit
from wpqc.hamiltonian import LocalHamiltonian
from wpqc.reductions.lightcone import (
    fanout_cone_example,
    light_cone,
    random_sqw_circuit,
    rewire_classical_fanouts,
    sqw1_to_qsat,
)
from wpqc.simulator import circuit_unitary, optimal_sector_witness
from wpqc.weightspace import min_energy_in_sector


def test_fanout_example_cone():
    c, w = fanout_cone_example()
    wires, gates = light_cone(c, w)
    assert wires == {1, 2, 3, 4, 5}
    assert [c.gates[i].label for i in gates] == ["V1", "V2", "V3", "V4", "V5", "V6"]


def test_rewiring_moves_copy_controls_to_source():
    c, _ = fanout_cone_example()
    rc = rewire_classical_fanouts(c)
    assert rc.gates[5].controls == (5,)
    assert rc.gates[4].controls == (5,) and rc.gates[4].polarities == (0,)


def test_quantum_fanout_pulls_in_all_wires():
    c, w = fanout_cone_example()
    q = c.with_gates([C.fanout(5, (7, 8), classical=False) if g.kind == "fanout" else g for g in c.gates])
    wires, _ = light_cone(q, w)
    assert {7, 8} <= wires


def test_single_wire_and_disjoint_layer():
    c = QuantumCircuit(1, 0, "", (), ())
    assert light_cone(c, 0) == (frozenset({0}), ())
    rng = np.random.default_rng(0)
    gates = tuple(C.unitary((2 * i, 2 * i + 1), np.linalg.qr(rng.normal(size=(4, 4)))[0]) for i in range(3))
    gates += (C.measure(0, 2, 4), C.big_and((0, 2, 4), 6))
    sq = QuantumCircuit(6, 1, "0", gates, ((6, 1),))
    art = sqw1_to_qsat(sq, 1)
    assert all(len(t.support) <= 2 for t in art.instance.terms)


@pytest.mark.parametrize("seed", range(12))
def test_projectors_match_full_conjugation(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 5))
    c = random_sqw_circuit(rng, n, 3, n_copies=int(rng.integers(0, 3)))
    art = sqw1_to_qsat(c, 1)
    body = c.with_gates(c.gates[:-1])
    u = circuit_unitary(body)
    nw = c.n_wires
    valid = np.array([(x & ((1 << c.n_ancilla) - 1)) == 0 for x in range(1 << nw)])
    final = c.gates[-1]
    for term, w, p in zip(art.instance.terms, final.controls, final.polarities):
        assert set(term.support) <= light_cone(body, w)[0]
        bad = np.array([((x >> (nw - 1 - w)) & 1) != p for x in range(1 << nw)], dtype=float)
        full = u.conj().T @ (bad[:, None] * u)
        mine = LocalHamiltonian(nw, (term,)).dense()
        assert np.abs((full - mine)[np.ix_(valid, valid)]).max() < 1e-10
        assert term.is_projector()


@pytest.mark.parametrize("seed", range(20))
def test_frustration_free_iff_perfect_acceptance(seed):
    rng = np.random.default_rng(100 + seed)
    c = random_sqw_circuit(rng, int(rng.integers(2, 6)), 3, n_copies=int(rng.integers(0, 3)), quantum_share=0.2)
    art = sqw1_to_qsat(c, 1)
    e, _ = min_energy_in_sector(art.instance, art.k_out)
    _, acc = optimal_sector_witness(c, 1)
    assert (e <= 1e-9) == (acc >= 1 - 1e-9)


def test_form_errors():
    c = QuantumCircuit(2, 1, "0", (C.cnot(0, 1),), ((2, 1),))
    with pytest.raises(ValueError, match="SQW form"):
        sqw1_to_qsat(c, 1)
    c = QuantumCircuit(3, 1, "0", (C.toffoli((0, 1), 2), C.big_and((0, 1), 3)), ((3, 1),))
    with pytest.raises(ValueError, match="big gate before"):
        sqw1_to_qsat(c, 1)
