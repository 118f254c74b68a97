"""Exact simulation: dense state vectors, sparse basis batches, sector evolution.

Mid-circuit measurements are deferred: a ``measure`` gate is a no-op on the
amplitudes, which is exact because measured wires are only used classically
afterwards (checked by :func:`validate_classical_fanout`).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sps

from .circuit import QuantumCircuit, check_weight_preserving, validate_classical_fanout
from .sparse import apply_local, check_width, control_mask, merge, pattern_mask
from .weightspace import DENSE_MATRIX_MAX, BasisIndexer, SectorOperator, SectorState, lanczos_lowest

MAX_FULL_WIRES = 24


@dataclass(frozen=True, eq=False)
class FullState:
    n: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.n > MAX_FULL_WIRES:
            raise ValueError(f"full state vectors are limited to {MAX_FULL_WIRES} wires")
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != (1 << self.n,):
            raise ValueError(f"expected {1 << self.n} amplitudes, got {amps.shape}")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def basis(cls, bits: str) -> FullState:
        amps = np.zeros(1 << len(bits), dtype=np.complex128)
        amps[int(bits, 2) if bits else 0] = 1.0
        return cls(len(bits), amps)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    @property
    def is_normalized(self) -> bool:
        return abs(self.norm - 1.0) <= 1e-12

    def weight_distribution(self) -> dict[int, float]:
        probs = np.abs(self.amplitudes) ** 2
        weights = np.array([bin(i).count("1") for i in range(len(probs))])
        return {int(w): float(probs[weights == w].sum()) for w in np.unique(weights[probs > 0])}


@dataclass(frozen=True)
class AcceptanceResult:
    probability: float
    post_measurement_state: FullState | None = None


# dense path -----------------------------------------------------------------


def _apply_dense_gate(psi: np.ndarray, n: int, g) -> np.ndarray:
    t = psi.reshape([2] * n)
    index = [slice(None)] * n
    for q, p in zip(g.controls, g.polarities):
        index[q] = p
    index = tuple(index)
    sub = t[index]
    # axes of the sliced tensor that correspond to the targets
    free = [q for q in range(n) if q not in g.controls]
    axes = [free.index(q) for q in g.targets]
    s = len(g.targets)
    if g.kind == "projector_phase":
        phi = g.params[0]
        # an empty pattern matches every state
        factor = np.full([2] * s, np.exp(-1j * phi))
        factor[tuple(g.pattern)] = np.exp(1j * phi)
        moved = np.moveaxis(sub, axes, list(range(s)))
        moved = moved * factor.reshape(factor.shape + (1,) * (moved.ndim - s))
        new = np.moveaxis(moved, list(range(s)), axes)
    else:
        mat = g.local_dense().reshape([2] * (2 * s))
        new = np.tensordot(mat, sub, axes=(list(range(s, 2 * s)), axes))
        new = np.moveaxis(new, list(range(s)), axes)
    out = t.copy()
    out[index] = new
    return out.reshape(-1)


def apply_circuit(c: QuantumCircuit, state: FullState, deferred: bool = False) -> FullState:
    """Evolve a full state vector through the gate list in order."""
    if state.n != c.n_wires:
        raise ValueError(f"state has {state.n} wires, circuit has {c.n_wires}")
    psi = state.amplitudes
    for g in c.gates:
        if g.is_measure:
            if not deferred:
                raise ValueError("apply_circuit handles unitary circuits; use acceptance_probability")
            continue
        psi = _apply_dense_gate(psi, c.n_wires, g)
    return FullState(c.n_wires, psi)


# sparse batch path ----------------------------------------------------------


def run_batch(c: QuantumCircuit, keys, cols, amps, tol: float = 1e-15):
    """Push a batch of (key, column, amplitude) triples through ``c``."""
    n = c.n_wires
    check_width(n)
    keys = np.asarray(keys, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    amps = np.asarray(amps, dtype=np.complex128)
    for g in c.gates:
        if g.is_measure:
            continue
        if g.kind == "projector_phase":
            cm, cv = control_mask(g.controls, g.polarities, n)
            pm, pv = pattern_mask(zip(g.targets, g.pattern), n)
            active = (keys & cm) == cv
            hit = (keys & pm) == pv
            phi = g.params[0]
            factor = np.where(hit, np.exp(1j * phi), np.exp(-1j * phi))
            amps = np.where(active, amps * factor, amps)
            continue
        if g.kind == "fanout":
            cm, cv = control_mask(g.controls, g.polarities, n)
            tm, _ = control_mask(g.targets, (1,) * len(g.targets), n)
            keys = np.where((keys & cm) == cv, keys ^ tm, keys)
            continue
        keys, cols, amps = apply_local(keys, cols, amps, n, g.targets, g.matrix, g.controls, g.polarities, tol)
    return keys, cols, amps


def ancilla_key(c: QuantumCircuit) -> int:
    return int(c.ancilla_init, 2) if c.n_ancilla else 0


def _witness_batch(c: QuantumCircuit, witness):
    """Keys and amplitudes of |witness> (x) |ancilla_init>."""
    nw = c.n_witness
    if isinstance(witness, str):
        if len(witness) != nw:
            raise ValueError(f"witness has {len(witness)} bits, circuit expects {nw}")
        wkeys = np.array([int(witness, 2) if witness else 0], dtype=np.int64)
        wamps = np.ones(1, dtype=np.complex128)
    elif isinstance(witness, SectorState):
        if witness.n != nw:
            raise ValueError(f"witness has {witness.n} qubits, circuit expects {nw}")
        wkeys = witness.indexer.states
        wamps = witness.amplitudes
    else:
        vec = witness.amplitudes if isinstance(witness, FullState) else np.asarray(witness, dtype=np.complex128)
        if len(vec) != 1 << nw:
            raise ValueError(f"witness vector has length {len(vec)}, circuit expects {1 << nw}")
        wkeys = np.flatnonzero(vec).astype(np.int64)
        wamps = vec[wkeys]
    keys = (wkeys << c.n_ancilla) | ancilla_key(c)
    return keys, wamps


def _accept_mask(c: QuantumCircuit, keys: np.ndarray) -> np.ndarray:
    pm, pv = pattern_mask(c.accept, c.n_wires)
    return (keys & pm) == pv


def _require_fanout_valid(c: QuantumCircuit) -> None:
    chk = validate_classical_fanout(c)
    if not chk:
        raise ValueError(f"invalid classical fanout structure at gate {chk.gate_index}: {chk.reason}")


def acceptance_probability(c: QuantumCircuit, witness, keep_state: bool = False) -> AcceptanceResult:
    """Probability that ``c`` accepts ``witness`` (deferred measurement)."""
    _require_fanout_valid(c)
    keys, amps = _witness_batch(c, witness)
    keys, _, amps = run_batch(c, keys, np.zeros(len(keys), dtype=np.int64), amps)
    hit = _accept_mask(c, keys)
    prob = float(np.sum(np.abs(amps[hit]) ** 2))
    post = None
    if keep_state and c.n_wires <= MAX_FULL_WIRES:
        vec = np.zeros(1 << c.n_wires, dtype=np.complex128)
        np.add.at(vec, keys[hit], amps[hit])
        if prob > 0:
            vec /= np.sqrt(prob)
        post = FullState(c.n_wires, vec)
    return AcceptanceResult(prob, post)


def accepted_amplitude_matrix(c: QuantumCircuit, k: int):
    """Sparse matrix whose column i is Pi_accept U |x_i, anc> for sector basis x_i."""
    _require_fanout_valid(c)
    idx = BasisIndexer(c.n_witness, k)
    wkeys = idx.states
    keys = (wkeys << c.n_ancilla) | ancilla_key(c)
    cols = np.arange(idx.dim, dtype=np.int64)
    keys, cols, amps = run_batch(c, keys, cols, np.ones(idx.dim, dtype=np.complex128))
    hit = _accept_mask(c, keys)
    keys, cols, amps = keys[hit], cols[hit], amps[hit]
    uniq, rows = np.unique(keys, return_inverse=True)
    a = sps.csr_matrix((amps, (rows, cols)), shape=(len(uniq), idx.dim))
    return idx, a


def optimal_sector_witness(c: QuantumCircuit, k: int, method: str = "auto") -> tuple[SectorState, float]:
    """Weight-k witness maximizing the acceptance probability, and that maximum."""
    idx, a = accepted_amplitude_matrix(c, k)
    if method == "auto":
        method = "dense" if idx.dim <= DENSE_MATRIX_MAX else "lanczos"
    if method == "dense":
        m = (a.conj().T @ a).toarray()
        vals, vecs = np.linalg.eigh(m)
        return SectorState(idx, vecs[:, -1]), float(vals[-1])
    ah = a.conj().T.tocsr()
    energy, vec, _ = lanczos_lowest(lambda v: -(ah @ (a @ v)), idx.dim)
    return SectorState(idx, vec), float(-energy)


def _require_wp(c: QuantumCircuit) -> None:
    chk = check_weight_preserving(c.with_gates(c.unitary_gates()))
    if not chk:
        raise ValueError(
            f"circuit is not weight preserving: gate {chk.gate_index} maps {chk.input_bits} to {chk.output_bits}"
        )


def apply_sector_restricted(c: QuantumCircuit, state: SectorState) -> SectorState:
    """Evolve a sector state of all ``c.n_wires`` wires without leaving the sector."""
    _require_wp(c)
    if state.n != c.n_wires:
        raise ValueError(f"state has {state.n} qubits, circuit has {c.n_wires} wires")
    idx = state.indexer
    nz = np.flatnonzero(state.amplitudes)
    keys, _, amps = run_batch(c, idx.states[nz], np.zeros(len(nz), dtype=np.int64), state.amplitudes[nz])
    out = np.zeros(idx.dim, dtype=np.complex128)
    np.add.at(out, idx.rank_many(keys), amps)
    return SectorState(idx, out)


def sector_matrix(c: QuantumCircuit, k: int) -> SectorOperator:
    """Matrix of a weight-preserving circuit on the weight-k sector of all wires."""
    _require_wp(c)
    idx = BasisIndexer(c.n_wires, k)
    cols = np.arange(idx.dim, dtype=np.int64)
    keys, cols, amps = run_batch(c, idx.states, cols, np.ones(idx.dim, dtype=np.complex128))
    rows = idx.rank_many(keys)
    mat = np.zeros((idx.dim, idx.dim), dtype=np.complex128)
    np.add.at(mat, (rows, cols), amps)
    return SectorOperator(idx, mat)


def circuit_unitary(c: QuantumCircuit) -> np.ndarray:
    """Full 2^n unitary of a measurement-free circuit (small n)."""
    n = c.n_wires
    if n > 12:
        raise ValueError("full unitaries are limited to 12 wires")
    dim = 1 << n
    keys = np.arange(dim, dtype=np.int64)
    keys, cols, amps = run_batch(c.with_gates(c.unitary_gates()), keys, keys.copy(), np.ones(dim, dtype=complex))
    u = np.zeros((dim, dim), dtype=np.complex128)
    np.add.at(u, (keys, cols), amps)
    return u


def final_batch(c: QuantumCircuit, witness):
    """Sparse final state (keys, amplitudes) for ``witness`` with ancillas appended."""
    keys, amps = _witness_batch(c, witness)
    keys, _, amps = run_batch(c, keys, np.zeros(len(keys), dtype=np.int64), amps)
    keys, _, amps = merge(keys, np.zeros(len(keys), dtype=np.int64), amps)
    return keys, amps
