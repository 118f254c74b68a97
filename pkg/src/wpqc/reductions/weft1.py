"""Constant-depth verifier with one final big AND for projector Hamiltonians.

The verifier draws a color h uniformly from the term groups, measures every
term of group h in parallel (disjoint supports) and accepts iff all outcomes
say "not violated".  Terms confined to the clock register are checked
classically after a computational-basis readout of the clock.
"""
from __future__ import annotations

import math

import numpy as np

from .. import circuit as C
from ..circuit import Gate, QuantumCircuit
from ..hamiltonian import (
    ColoringResult,
    LocalHamiltonian,
    LocalTerm,
    sparse_state,
    apply_term,
    color_terms,
    validate_instance,
)
from ..sparse import merge
from .artifacts import ReductionArtifact

X = np.array([[0, 1], [1, 0]], dtype=complex)


def selection_chain(wires) -> list[Gate]:
    """Hat rotations spreading a one on ``wires[0]`` uniformly over all wires."""
    gates = []
    size = len(wires)
    for h in range(size - 1):
        alpha = 1 / math.sqrt(size - h)
        beta = math.sqrt(1 - alpha * alpha)
        # hat basis (|01>, |10>) on (wires[h], wires[h+1]): |10> -> alpha|10> + beta|01>
        u = np.array([[alpha, beta], [-beta, alpha]], dtype=complex)
        gates.append(C.hat(wires[h], wires[h + 1], u, label="select"))
    return gates


def check_unitary(term: LocalTerm) -> np.ndarray:
    """H (x) X + (I - H) (x) I on (support, flag) for a projector H."""
    h = term.block
    d = h.shape[0]
    return np.kron(h, X) + np.kron(np.eye(d) - h, np.eye(2))


def violating_patterns(term: LocalTerm, tol: float = 1e-12) -> list[tuple[int, ...]]:
    """Basis patterns flagged by a diagonal 0/1 projector."""
    blk = term.block
    if np.abs(blk - np.diag(np.diag(blk))).max() > tol:
        raise ValueError("clock-register terms must be diagonal")
    diag = np.diag(blk).real
    if np.abs(diag * (1 - diag)).max() > tol:
        raise ValueError("clock-register terms must be 0/1 diagonal projectors")
    s = term.locality
    return [tuple((x >> (s - 1 - j)) & 1 for j in range(s)) for x in range(1 << s) if diag[x] > 0.5]


class _Alloc:
    def __init__(self, start: int):
        self.next = start
        self.init: list[str] = []

    def take(self, count: int, bit: str = "0") -> tuple[int, ...]:
        out = tuple(range(self.next, self.next + count))
        self.next += count
        self.init.extend(bit * count)
        return out


def sparse_ham_to_weft1(H: LocalHamiltonian, clock_register=None, a: float | None = None,
                        b: float | None = None, k: int = 0) -> ReductionArtifact:
    """Weft-1 verifier accepting with probability (1/N) sum_h <psi| prod_{j in G_h} (I - H_j) |psi>."""
    reg = tuple(clock_register) if clock_register is not None else H.clock_register
    if a is None or b is None:
        if H.thresholds is None:
            raise ValueError("energy thresholds required")
        a, b = H.thresholds
    rep = validate_instance(H)
    if not rep.all_projectors:
        bad = [t.index for t in rep.terms if not t.projector]
        raise ValueError(f"terms {bad} are not projectors")
    n = H.n
    if not b / n**2 > a:
        raise ValueError(f"strong gap violated: b/n^2 = {b / n**2:.3e} <= a = {a:.3e}")
    col: ColoringResult = color_terms(H, reg)
    groups = col.all_groups
    n_sel = len(groups)
    if n_sel == 0:
        raise ValueError("Hamiltonian has no terms")
    clock_idx = n_sel - 1 if col.clock_group else None
    alloc = _Alloc(n)
    sel = alloc.take(n_sel)
    alloc.init[0] = "1"
    gates: list[Gate] = selection_chain(sel)
    gates.append(C.measure(*sel))
    ok_bits: list[int] = []
    late: list[Gate] = []
    for h, group in enumerate(groups):
        if h == clock_idx:
            continue
        copies = alloc.take(len(group))
        gates.append(C.fanout(sel[h], copies))
        oks = alloc.take(len(group), "1")
        for j, cp, ok in zip(group, copies, oks):
            t = H.terms[j]
            gates.append(C.unitary(t.support + (ok,), check_unitary(t), controls=(cp,), label=f"check{j}"))
        late.append(C.measure(*oks))
        ok_bits.extend(oks)
    if clock_idx is not None:
        cterms = [H.terms[j] for j in col.clock_group]
        qubits = sorted({q for t in cterms for q in t.support})
        copies = alloc.take(len(qubits))
        gates.append(C.fanout(sel[clock_idx], copies))
        reads = alloc.take(len(qubits))
        for q, cp, r in zip(qubits, copies, reads):
            gates.append(C.xgate(r, controls=(cp, q)))
        gates.append(C.measure(*reads))
        uses = {q: [i for i, t in enumerate(cterms) if q in t.support] for q in qubits}
        read_copy: dict[tuple[int, int], int] = {}
        for q, r in zip(qubits, reads):
            cps = alloc.take(len(uses[q]))
            gates.append(C.fanout(r, cps))
            for i, cp in zip(uses[q], cps):
                read_copy[(q, i)] = cp
        oks = alloc.take(len(cterms), "1")
        for i, (t, ok) in enumerate(zip(cterms, oks)):
            ctrl = tuple(read_copy[(q, i)] for q in t.support)
            for pat in violating_patterns(t):
                gates.append(C.xgate(ok, controls=ctrl, polarities=pat))
        late.append(C.measure(*oks))
        ok_bits.extend(oks)
    gates.extend(late)
    (out,) = alloc.take(1)
    gates.append(C.big_and(tuple(ok_bits), out))
    init = "".join(alloc.init)
    circ = QuantumCircuit(n, len(init), init, tuple(gates), ((out, 1),), name="weft1-verifier")
    c_thr = 1 - a / n_sel
    s_thr = 1 - b / (n**2 * n_sel)
    meta = {"n_color": col.n_color, "n_groups": n_sel, "groups": [list(g) for g in groups],
            "clock_group": list(col.clock_group), "a": a, "b": b, "n": n}
    return ReductionArtifact("weft1", circ, k, k, (c_thr, s_thr), "cs", meta)


def group_product_acceptance(H: LocalHamiltonian, groups, psi) -> float:
    """(1/N) sum_h <psi| prod_{j in G_h} (I - H_j) |psi> on the full space."""
    n, keys, amps = sparse_state(psi)
    order = np.argsort(keys)
    keys, amps = keys[order], amps[order]
    total = 0.0
    for g in groups:
        k, v = keys, amps
        for j in g:
            hk, ha = apply_term(H.terms[j], n, k, v)
            k, _, v = merge(np.concatenate([k, hk]), np.zeros(len(k) + len(hk), dtype=np.int64),
                            np.concatenate([v, -ha]), 0.0)
        pos = np.minimum(np.searchsorted(keys, k), len(keys) - 1)
        hit = keys[pos] == k
        total += float(np.sum(np.conj(amps[pos[hit]]) * v[hit]).real)
    return total / len(groups)
