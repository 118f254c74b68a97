"""Grid embedding and the indicator-clock circuit-to-Hamiltonian construction.

Register layout of the Hamiltonian: grid wire ``q`` is duplicated onto the
pair ``(2q, 2q+1)`` (|0> -> |00>, |1> -> |11>), followed by ``T + 1`` clock
qubits ``C_t = 2N + t``.  Clock state ``t`` is the one-hot string with its one
on ``C_t``; time step ``t`` applies grid gate ``W_t`` (t = 1..T) and moves
the clock from ``C_{t-1}`` to ``C_t``.
"""
from __future__ import annotations

import math

import numpy as np

from .. import circuit as C
from ..circuit import Gate, QuantumCircuit, check_weight_preserving
from ..hamiltonian import LocalHamiltonian, LocalTerm
from ..sparse import MAX_KEY_WIRES
from ..simulator import _witness_batch, run_batch
from ..weightspace import BasisIndexer, SectorState
from .artifacts import ReductionArtifact

P_STATE = np.diag([0.0, 1.0, 1.0, 0.0])
P_BOTH = np.diag([0.0, 0.0, 0.0, 1.0])
P_CODE = np.diag([1.0, 0.0, 0.0, 1.0])


# grid -----------------------------------------------------------------------


def grid_embed(c: QuantumCircuit) -> QuantumCircuit:
    """Lay gate ``i`` on layer ``i`` and swap every column into layer ``i + 1``.

    Wire ``q`` of layer ``L`` is ``L * n + q``; the accept predicate is read on
    the last layer.  Each grid wire meets at most three gates.
    """
    if c.has_measurements:
        raise ValueError("grid embedding needs a unitary circuit")
    n = c.n_wires
    r = len(c.gates)
    gates: list[Gate] = []
    for layer, g in enumerate(c.gates):
        gates.append(g.remap(lambda w, off=layer * n: off + w))
        for q in range(n - 1, -1, -1):
            gates.append(C.swap(layer * n + q, (layer + 1) * n + q))
    init = c.ancilla_init + "0" * (n * r)
    accept = tuple((r * n + w, b) for w, b in c.accept)
    meta = {"layers": r + 1, "columns": n, "T": len(gates)}
    return QuantumCircuit(c.n_witness, c.n_ancilla + n * r, init, tuple(gates), accept,
                          name=f"{c.name}+grid", meta=meta)


def grid_step(c: QuantumCircuit, k: int, thresholds=(2 / 3, 1 / 3)) -> ReductionArtifact:
    """Grid embedding as a reduction step; acceptance is unchanged, so are the thresholds."""
    g = grid_embed(c)
    meta = dict(g.meta, max_incidence=int(gate_incidence(g).max(initial=0)))
    return ReductionArtifact("grid", g, k, k, tuple(thresholds), "cs", meta)


def gate_incidence(c: QuantumCircuit) -> np.ndarray:
    counts = np.zeros(c.n_wires, dtype=int)
    for g in c.gates:
        for w in g.wires:
            counts[w] += 1
    return counts


def full_gate_matrix(g: Gate) -> np.ndarray:
    """Dense matrix of a gate on ``g.wires`` (controls first, then targets)."""
    nc, nt = len(g.controls), len(g.targets)
    dc, dt = 1 << nc, 1 << nt
    m = np.eye(dc * dt, dtype=complex)
    on = int("".join(str(p) for p in g.polarities), 2) if nc else 0
    m[on * dt:(on + 1) * dt, on * dt:(on + 1) * dt] = g.local_dense()
    return m


# Hamiltonian ----------------------------------------------------------------


def _doubled(block: np.ndarray) -> np.ndarray:
    """U B U^dag for the duplication isometry on every wire of ``block``."""
    s = int(round(math.log2(block.shape[0])))
    dup = np.zeros(1 << s, dtype=np.int64)
    for x in range(1 << s):
        v = 0
        for j in range(s):
            b = (x >> (s - 1 - j)) & 1
            v = (v << 2) | (3 * b)
        dup[x] = v
    out = np.zeros((1 << (2 * s),) * 2, dtype=complex)
    out[np.ix_(dup, dup)] = block
    return out


def _code_projector(s: int) -> np.ndarray:
    out = np.eye(1)
    for _ in range(s):
        out = np.kron(out, P_CODE)
    return out


def _pairs(wires) -> tuple[int, ...]:
    return tuple(q for w in wires for q in (2 * w, 2 * w + 1))


def propagation_block(w: np.ndarray) -> np.ndarray:
    """Projector 1/2 [P (|10><10| + |01><01|) - W' |01><10| - W'^dag |10><01|].

    ``P`` is the code-space projector of the doubled gate support and ``W'``
    the doubled gate; the last two local qubits are (C_{t-1}, C_t).
    """
    s = int(round(math.log2(w.shape[0])))
    wd = _doubled(w)
    p = _code_projector(s)
    e = lambda i, j: np.outer(np.eye(4)[i], np.eye(4)[j])  # noqa: E731
    h = np.kron(p, e(1, 1) + e(2, 2)) - np.kron(wd, e(1, 2)) - np.kron(wd.conj().T, e(2, 1))
    return h / 2


def first_use(c: QuantumCircuit) -> dict[int, int]:
    """Earliest time step (1-based) at which each wire is touched."""
    first: dict[int, int] = {}
    for t, g in enumerate(c.gates, start=1):
        for w in g.wires:
            first.setdefault(w, t)
    return first


def clock_layout(c: QuantumCircuit) -> dict:
    n_grid = c.n_wires
    t_steps = len(c.gates)
    clock = tuple(range(2 * n_grid, 2 * n_grid + t_steps + 1))
    return {"N": n_grid, "T": t_steps, "clock": clock, "n_qubits": 2 * n_grid + t_steps + 1}


def wpcsat_to_sparse_ham(c: QuantumCircuit, k: int, eps: float, b_constant: float = 1.0) -> ReductionArtifact:
    """Indicator-clock Hamiltonian of a grid-embedded weight-preserving circuit.

    Thresholds are a = eps/(T+1) and b = b_constant (1 - sqrt(eps) - eps)/T^3;
    the constant is not pinned down, so verification reports the measured
    (gap * T^3) instead of trusting ``b``.
    """
    if c.has_measurements:
        raise ValueError("the clock construction needs a unitary circuit")
    if not check_weight_preserving(c):
        raise ValueError("the clock construction needs a weight-preserving circuit")
    if not 0 <= eps < 1:
        raise ValueError("eps must lie in [0, 1)")
    lay = clock_layout(c)
    n_grid, t_steps, clock = lay["N"], lay["T"], lay["clock"]
    terms: list[LocalTerm] = []
    init = c.ancilla_init
    first = first_use(c)
    for q in range(c.n_witness, n_grid):
        bad = 1 - int(init[q - c.n_witness])
        t_q = first.get(q, 1)
        blk = np.kron(_doubled(np.diag([1.0 - bad, float(bad)])), np.diag([0.0, 1.0]))
        terms.append(LocalTerm(_pairs([q]) + (clock[t_q - 1],), blk, "in"))
    if c.accept:
        acc_w = [w for w, _ in c.accept]
        s = len(acc_w)
        idx = int("".join(str(b) for _, b in c.accept), 2)
        pi = np.zeros((1 << s, 1 << s))
        pi[idx, idx] = 1
        out = _code_projector(s) - _doubled(pi)
        terms.append(LocalTerm(_pairs(acc_w) + (clock[t_steps],), np.kron(out, np.diag([0.0, 1.0])), "out"))
    for t, g in enumerate(c.gates, start=1):
        blk = propagation_block(full_gate_matrix(g))
        terms.append(LocalTerm(_pairs(g.wires) + (clock[t - 1], clock[t]), blk, "prop"))
    for i in range(len(clock)):
        for j in range(i + 1, len(clock)):
            terms.append(LocalTerm((clock[i], clock[j]), P_BOTH, "clock"))
    for q in range(n_grid):
        terms.append(LocalTerm(_pairs([q]), P_STATE, "state"))
    k_prime = k + c.ancilla_ones
    a = eps / (t_steps + 1)
    b = b_constant * (1 - math.sqrt(eps) - eps) / max(t_steps, 1) ** 3
    if not b > a:
        raise ValueError(f"thresholds collapse: a={a:.3e} >= b={b:.3e}; eps is too large for T={t_steps}")
    H = LocalHamiltonian(lay["n_qubits"], tuple(terms), clock_register=clock, thresholds=(a, b),
                         meta={"T": t_steps, "N": n_grid})
    meta = {"T": t_steps, "N": n_grid, "clock_register": clock, "k_prime": k_prime,
            "witness_weight": 2 * k_prime + 1, "eps": eps, "b_ratio": (1 - math.sqrt(eps) - eps),
            "b_constant": b_constant, "n_qubits": lay["n_qubits"]}
    return ReductionArtifact("kitaev", H, k, 2 * k_prime + 1, (a, b), "ab", meta)


# history state --------------------------------------------------------------


def history_state(c: QuantumCircuit, witness) -> SectorState:
    """Uniform superposition over clock steps of the doubled partial computations."""
    lay = clock_layout(c)
    n_grid, t_steps, clock = lay["N"], lay["T"], lay["clock"]
    nq = lay["n_qubits"]
    if nq > MAX_KEY_WIRES:
        raise ValueError(f"history state needs {nq} qubits; the guard is {MAX_KEY_WIRES}")
    keys, amps = _witness_batch(c, witness)
    cols = np.zeros(len(keys), dtype=np.int64)
    weights = np.unique([bin(int(x)).count("1") for x in keys])
    if len(weights) != 1:
        raise ValueError("witness must have a single Hamming weight")
    # doubling on integers: bit of grid wire q -> bits of pair (2q, 2q+1)
    shifts = np.array([n_grid - 1 - q for q in range(n_grid)], dtype=np.int64)
    pair_shift = np.array([nq - 2 - 2 * q for q in range(n_grid)], dtype=np.int64)

    def doubled_keys(ks: np.ndarray) -> np.ndarray:
        out = np.zeros_like(ks)
        for q in range(n_grid):
            bit = (ks >> shifts[q]) & 1
            out |= (bit * 3) << pair_shift[q]
        return out

    all_k, all_a = [], []
    norm = 1 / math.sqrt(t_steps + 1)
    for t in range(t_steps + 1):
        if t:
            keys, cols, amps = run_batch(c.with_gates([c.gates[t - 1]]), keys, cols, amps)
        clock_bit = np.int64(1) << np.int64(nq - 1 - clock[t])
        all_k.append(doubled_keys(keys) | clock_bit)
        all_a.append(amps * norm)
    ks = np.concatenate(all_k)
    am = np.concatenate(all_a)
    k_prime = int(weights[0])
    idx = BasisIndexer(nq, 2 * k_prime + 1)
    vec = np.zeros(idx.dim, dtype=complex)
    np.add.at(vec, idx.rank_many(ks), am)
    return SectorState(idx, vec)
