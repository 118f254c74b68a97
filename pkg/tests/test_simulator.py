from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wpqc import circuit as C
from wpqc.circuit import QuantumCircuit, check_weight_preserving, circuit_on
from wpqc.simulator import (
    FullState,
    acceptance_probability,
    apply_circuit,
    apply_sector_restricted,
    circuit_unitary,
    optimal_sector_witness,
    sector_matrix,
)
from wpqc.weightspace import BasisIndexer, SectorState

H = np.array([[1, 1], [1, -1]]) / np.sqrt(2)


def haar_u2(rng):
    z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_wp_gate(rng, n):
    q = [int(x) for x in rng.choice(n, size=min(3, n), replace=False)]
    kind = rng.integers(4)
    if kind == 0 or n < 3:
        return C.hat(q[0], q[1], haar_u2(rng))
    if kind == 1:
        return C.fredkin(q[0], q[1], q[2])
    if kind == 2:
        return C.hat(q[0], q[1], haar_u2(rng), controls=(q[2],), polarities=(int(rng.integers(2)),))
    return C.projector_phase((q[0], q[1]), (1, 0), float(rng.normal()), controls=(q[2],))


def random_wp_circuit(rng, n, g):
    return circuit_on(n, [random_wp_gate(rng, n) for _ in range(g)])


def test_apply_examples():
    psi = FullState.basis("10")
    assert np.allclose(apply_circuit(circuit_on(2), psi).amplitudes, psi.amplitudes)
    assert np.allclose(apply_circuit(circuit_on(2, [C.swap(0, 1)]), psi).amplitudes, FullState.basis("01").amplitudes)
    out = apply_circuit(circuit_on(2, [C.hat(0, 1, H)]), FullState.basis("01")).amplitudes
    assert np.allclose(out, [0, 1 / np.sqrt(2), 1 / np.sqrt(2), 0])
    with pytest.raises(ValueError):
        apply_circuit(circuit_on(3), psi)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_dense_and_sparse_paths_agree(seed):
    rng = np.random.default_rng(seed)
    n = 4
    gates = [random_wp_gate(rng, n) for _ in range(5)] + [C.u1(int(rng.integers(n)), haar_u2(rng)), C.toffoli((0, 1), 3, (0, 1))]
    c = circuit_on(n, gates)
    u = circuit_unitary(c)
    v = rng.normal(size=16) + 1j * rng.normal(size=16)
    v /= np.linalg.norm(v)
    dense = apply_circuit(c, FullState(n, v))
    assert np.allclose(dense.amplitudes, u @ v, atol=1e-12)
    assert abs(dense.norm - 1) < 1e-10


def test_acceptance_examples():
    c = circuit_on(3, accept=((0, 1),))
    assert acceptance_probability(c, "100").probability == 1.0
    assert acceptance_probability(c, "010").probability == 0.0
    assert acceptance_probability(circuit_on(2), SectorState.basis("01")).probability == pytest.approx(1.0)


def test_acceptance_refuses_bad_fanout():
    c = QuantumCircuit(1, 1, "1", (C.fanout(0, (1,)),), ((1, 1),))
    with pytest.raises(ValueError, match="fanout"):
        acceptance_probability(c, "1")


def test_deferred_measurement_matches_classical_copy():
    # measuring then copying is the same as copying with CNOTs
    c = QuantumCircuit(1, 3, "000", (C.u1(0, H), C.measure(0), C.fanout(0, (1, 2)), C.big_and((1, 2), 3)), ((3, 0),))
    assert acceptance_probability(c, "0").probability == pytest.approx(0.5)


def test_optimal_witness_examples():
    # diagonal acceptance: accept iff wire 1 is 1, inside k=1 of 3 wires
    c = circuit_on(3, accept=((1, 1),))
    psi, p = optimal_sector_witness(c, 1)
    assert p == pytest.approx(1.0)
    assert abs(psi.amplitudes[psi.indexer.rank("010")]) == pytest.approx(1.0)
    assert optimal_sector_witness(circuit_on(3), 2)[1] == pytest.approx(1.0)


def test_optimal_witness_vs_random_search():
    rng = np.random.default_rng(7)
    c = random_wp_circuit(rng, 3, 6).with_gates(random_wp_circuit(rng, 3, 6).gates, accept=((0, 1),))
    psi, p = optimal_sector_witness(c, 1)
    assert acceptance_probability(c, psi).probability == pytest.approx(p, abs=1e-9)
    best = 0.0
    for _ in range(4000):
        v = rng.normal(size=3) + 1j * rng.normal(size=3)
        best = max(best, acceptance_probability(c, SectorState(BasisIndexer(3, 1), v / np.linalg.norm(v))).probability)
    assert best <= p + 1e-9
    assert p - best < 5e-2
    # local refinement of the best random start converges to the eigenvalue
    from scipy.optimize import minimize

    def neg(x):
        v = x[:3] + 1j * x[3:]
        return -acceptance_probability(c, SectorState(BasisIndexer(3, 1), v / np.linalg.norm(v))).probability

    res = min((minimize(neg, rng.normal(size=6)) for _ in range(5)), key=lambda r: r.fun)
    assert -res.fun == pytest.approx(p, abs=1e-6)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=30, deadline=None)
def test_sector_and_full_agree(seed):
    rng = np.random.default_rng(seed)
    n = 5
    c = random_wp_circuit(rng, n, 8)
    assert check_weight_preserving(c)
    u = circuit_unitary(c)
    for k in range(n + 1):
        psi = SectorState.random(n, k, rng)
        out = apply_sector_restricted(c, psi)
        assert np.abs(out.to_dense() - u @ psi.to_dense()).max() < 1e-10
        sm = sector_matrix(c, k).to_dense()
        st_ = BasisIndexer(n, k).states
        assert np.abs(sm - u[np.ix_(st_, st_)]).max() < 1e-12


def test_sector_restricted_refuses_non_wp():
    with pytest.raises(ValueError, match="weight preserving"):
        apply_sector_restricted(circuit_on(2, [C.cnot(0, 1)]), SectorState.basis("10"))


def test_swap_network_permutes_sector():
    c = circuit_on(3, [C.swap(0, 2)])
    out = apply_sector_restricted(c, SectorState.basis("110"))
    assert abs(out.amplitudes[out.indexer.rank("011")]) == pytest.approx(1.0)
