from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wpqc import circuit as C
from wpqc.circuit import QuantumCircuit, check_weight_preserving
from wpqc.reductions import qsvt as Q
from wpqc.simulator import acceptance_probability, accepted_amplitude_matrix
from wpqc.weightspace import SectorState


def reflection_product(psi, x):
    out = []
    for xv in x:
        r = math.sqrt(1 - xv * xv)
        w = np.array([[xv, 1j * r], [1j * r, xv]])
        u = np.diag(np.exp(1j * psi[0] * np.array([1, -1])))
        for p in psi[1:]:
            u = u @ w @ np.diag(np.exp(1j * p * np.array([1, -1])))
        out.append(u[0, 0])
    return np.array(out)


@pytest.mark.parametrize("d", [2, 4, 6, 8])
def test_phase_convention_map(d):
    rng = np.random.default_rng(d)
    psi = rng.normal(size=d + 1)
    x = np.linspace(0, 1, 9)
    mine = Q.scalar_amplitude(Q.wx_to_projector_phases(psi), x)
    assert np.abs(mine - reflection_product(psi, x)).max() < 1e-12


def test_endpoints_are_exact():
    g = Q.minimal_polynomial(0.7, 0.3, 0.01)
    seq = Q.solve_phases(g)
    acc = Q.amplified_acceptance(seq.phases, [0.0, 1.0])
    assert acc[1] == pytest.approx(1, abs=1e-12) and acc[0] < 1e-20


@pytest.mark.parametrize("c,s,eps", [(0.7, 0.3, 0.1), (0.7, 0.3, 0.001), (0.9, 0.8, 0.01)])
def test_scalar_thresholds(c, s, eps):
    seq = Q.solve_phases(Q.minimal_polynomial(c, s, eps))
    grid = np.linspace(0, 1, 401)
    acc = Q.amplified_acceptance(seq.phases, grid)
    assert acc[grid >= c].min() >= 1 - eps - 1e-9
    assert acc[grid <= s].max() <= eps + 1e-9
    assert np.all(np.diff(acc) >= -1e-9)


def test_degree_is_minimal():
    c, s, eps = 0.7, 0.3, 0.01
    g = Q.minimal_polynomial(c, s, eps)
    q = (g.degree() - 1) // 2
    assert not Q.polynomial_meets(Q.design_polynomial(c, s, eps, q - 1), c, s, eps)


def test_iterations_scale_with_log_eps_over_gap():
    c, s = 0.7, 0.3
    ratios = []
    for eps in (0.1, 0.01, 0.001):
        m = Q.minimal_polynomial(c, s, eps).degree()
        ratios.append(m / (math.log(1 / eps) / Q.gap_measure(c, s)))
    assert max(ratios) / min(ratios) < 2.0


def test_gap_too_small_raises():
    with pytest.raises(Q.PhaseSolverError, match="gap too small"):
        Q.minimal_polynomial(0.5, 0.499, 0.01, cap=15)


def _rand_u(rng):
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    return np.linalg.qr(a)[0]


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=8, deadline=None)
def test_circuit_matches_scalar_model(seed):
    rng = np.random.default_rng(seed)
    wires = 5
    gates = []
    for _ in range(6):
        a, b = (int(v) for v in rng.choice(wires, 2, replace=False))
        gates.append(C.hat(a, b, _rand_u(rng)))
    c = QuantumCircuit(3, 2, "10", tuple(gates), ((0, 1),))
    art = Q.qsvt_amplify(c, (0.6, 0.4), 0.05)
    amp = art.instance
    assert check_weight_preserving(amp)
    assert amp.n_wires == c.n_wires + 2
    ph = np.array(art.metadata["phases"])
    idx, a = accepted_amplitude_matrix(c, 1)
    _, sv, vh = np.linalg.svd(a.toarray())
    for i in range(len(sv)):
        w = SectorState(idx, vh[i].conj())
        got = acceptance_probability(amp, w).probability
        assert abs(got - Q.amplified_acceptance(ph, sv[i] ** 2)[0]) < 1e-9


def test_already_separated_is_unchanged():
    c = QuantumCircuit(2, 0, "", (C.hat(0, 1, np.eye(2)),), ((0, 1),))
    art = Q.qsvt_amplify(c, (1.0, 0.0), 0.1)
    assert art.metadata["m"] == 0 and art.instance is c


def test_perfect_witness_stays_perfect():
    c = QuantumCircuit(2, 0, "", (C.hat(0, 1, Q.HADAMARD),), ((0, 1),))
    art = Q.qsvt_amplify(c, (0.5, 0.2), 0.05)
    plus = SectorState.from_dense(np.array([0, 1, -1, 0]) / math.sqrt(2), 1)
    got = acceptance_probability(art.instance, plus).probability
    assert acceptance_probability(c, plus).probability == pytest.approx(1)
    assert got == pytest.approx(1, abs=1e-10)


def test_input_checks():
    c = QuantumCircuit(2, 0, "", (C.cnot(0, 1),), ((0, 1),))
    with pytest.raises(ValueError):
        Q.qsvt_amplify(c, (0.7, 0.3), 0.1)
    good = QuantumCircuit(2, 0, "", (), ((0, 1),))
    with pytest.raises(ValueError):
        Q.qsvt_amplify(good, (0.3, 0.7), 0.1)
    with pytest.raises(ValueError):
        Q.qsvt_amplify(good, (0.7, 0.3), 0.7)


def test_margin_fallback_meets_thresholds():
    c, s, eps = 0.5, 0.25, 1e-4
    with pytest.raises(Q.PhaseSolverError):
        Q.solve_phases(Q.minimal_polynomial(c, s, eps))
    wires = QuantumCircuit(2, 0, "", (C.hat(0, 1, Q.HADAMARD),), ((0, 1),))
    art = Q.qsvt_amplify(wires, (c, s), eps)
    assert art.metadata["scale"] < 1
    acc = Q.amplified_acceptance(np.array(art.metadata["phases"]), [s, c])
    assert acc[1] >= 1 - eps and acc[0] <= eps
