"""One-hot encoding of a k*log(n)-qubit circuit into a weight-preserving circuit.

Each block of L = log2(n) witness qubits becomes a group of n wires holding a
single one; basis string x sits at position n - 1 - int(x), so the encoding
keeps lexicographic order.  Every encoded gate leaves the weight of each
group unchanged, which lets a per-group one-hot counter verify the encoding
at the end.

Wire layout: groups (k*n), CNOT pair (2, |01>), output pair (2, |01>),
counters (k*(n+1), each |10...0>), final pair (2, |01>).
"""
from __future__ import annotations

import numpy as np

from .. import circuit as C
from ..circuit import Gate, QuantumCircuit
from ..weightspace import BasisIndexer, SectorState
from .artifacts import ReductionArtifact


def encode_bits(x: str) -> str:
    """One-hot image of a bit string: the one sits at position 2^len - 1 - int(x)."""
    n = 1 << len(x)
    pos = n - 1 - (int(x, 2) if x else 0)
    return "".join("1" if j == pos else "0" for j in range(n))


def _check_power(n: int) -> int:
    if n < 2 or n & (n - 1):
        raise ValueError(f"n={n} is not a power of 2 (>= 2)")
    return n.bit_length() - 1


def mini_layout(k: int, n: int) -> dict:
    base = k * n
    cnot_pair = (base, base + 1)
    out_pair = (base + 2, base + 3)
    counters = tuple(tuple(range(base + 4 + g * (n + 1), base + 4 + (g + 1) * (n + 1))) for g in range(k))
    fin = base + 4 + k * (n + 1)
    return {"groups": tuple(tuple(range(g * n, (g + 1) * n)) for g in range(k)), "cnot_pair": cnot_pair,
            "out_pair": out_pair, "counters": counters, "final_pair": (fin, fin + 1), "n_wires": fin + 2}


def _classify(g: Gate) -> str:
    if g.is_measure:
        raise ValueError("mini circuits are unitary")
    if len(g.targets) == 1 and not g.controls and g.kind != "fanout":
        return "single"
    cnot_like = (len(g.targets) == 1 and len(g.controls) == 1 and g.polarities == (1,)
                 and g.kind not in ("projector_phase", "fanout") and np.allclose(g.matrix, C.X))
    if cnot_like:
        return "cnot"
    raise ValueError(f"mini circuits use 1-qubit gates and CNOTs, got {g.kind} on {g.wires}")


def mini_to_wpcsat(mini: QuantumCircuit, k: int, n: int, thresholds=(2 / 3, 1 / 3)) -> ReductionArtifact:
    """Weight-preserving simulation of ``mini`` on weight-k one-hot witnesses."""
    ell = _check_power(n)
    if mini.n_ancilla:
        raise ValueError("mini circuits take all qubits as witness")
    if mini.n_witness != k * ell:
        raise ValueError(f"mini circuit has {mini.n_witness} qubits, expected k*log2(n) = {k * ell}")
    if len(mini.accept) != 1:
        raise ValueError("mini circuits have a single output qubit")
    lay = mini_layout(k, n)
    groups = lay["groups"]
    p0, p1 = lay["cnot_pair"]

    def pos(g: int, x: int) -> int:
        return groups[g][n - 1 - x]

    def split(w: int) -> tuple[int, int]:
        # local bit i of group g is the (ell - 1 - i)-th bit of the integer x
        return w // ell, ell - 1 - (w % ell)

    gates: list[Gate] = []
    for g in mini.gates:
        kind = _classify(g)
        if kind == "single":
            grp, bit = split(g.targets[0])
            for x in range(n):
                if not (x >> bit) & 1:
                    # hat basis |01> (one at pos(x), value 0), |10> (one at pos(x'), value 1)
                    gates.append(C.hat(pos(grp, x | (1 << bit)), pos(grp, x), g.matrix, label="Vhat"))
            continue
        (gc, bc), (gt, bt) = split(g.controls[0]), split(g.targets[0])
        if gc == gt:
            for x in range(n):
                if (x >> bc) & 1 and not (x >> bt) & 1:
                    gates.append(C.swap(pos(gt, x), pos(gt, x | (1 << bt))))
            continue
        flips = [C.fredkin(pos(gc, x), p0, p1) for x in range(n) if (x >> bc) & 1]
        gates += flips
        for y in range(n):
            if not (y >> bt) & 1:
                gates.append(C.swap(pos(gt, y), pos(gt, y | (1 << bt)), controls=(p0,)))
        gates += list(reversed(flips))
    (w_out, b_out), = mini.accept
    g_out, bit_out = split(w_out)
    o0, o1 = lay["out_pair"]
    for x in range(n):
        if ((x >> bit_out) & 1) == b_out:
            gates.append(C.fredkin(pos(g_out, x), o0, o1))
    for grp, cnt in zip(groups, lay["counters"]):
        for j, q in enumerate(grp):
            # increment the one-hot counter: swaps from the top down move it by one step
            for i in range(min(j, n - 1), -1, -1):
                gates.append(C.fredkin(q, cnt[i], cnt[i + 1]))
    f0, f1 = lay["final_pair"]
    gates.append(C.swap(f0, f1, controls=tuple(cnt[1] for cnt in lay["counters"])))
    init = "01" + "01" + ("1" + "0" * n) * k + "01"
    accept = ((o0, 1), (o1, 0), (f0, 1), (f1, 0))
    circ = QuantumCircuit(k * n, len(init), init, tuple(gates), accept, name="mini-encoded")
    meta = {"k": k, "n": n, "log_n": ell, "n_wires": circ.n_wires, "witness_weight": k,
            "total_weight": k + circ.ancilla_ones, "layout": lay}
    # the simulation is faithful, so the thresholds carry over unchanged
    return ReductionArtifact("mini", circ, k, k, tuple(thresholds), "cs", meta)


def encode_state(vec: np.ndarray, k: int, n: int) -> SectorState:
    """Map a k*log2(n)-qubit state vector to its weight-k one-hot image."""
    ell = _check_power(n)
    vec = np.asarray(vec, dtype=complex)
    if len(vec) != 1 << (k * ell):
        raise ValueError("state length does not match k*log2(n) qubits")
    idx = BasisIndexer(k * n, k)
    out = np.zeros(idx.dim, dtype=complex)
    for z in np.flatnonzero(vec):
        bits = format(int(z), f"0{k * ell}b") if k * ell else ""
        enc = "".join(encode_bits(bits[g * ell:(g + 1) * ell]) for g in range(k))
        out[idx.rank(enc)] += vec[z]
    return SectorState(idx, out)


def encoding_table(ell: int) -> dict[str, str]:
    return {format(x, f"0{ell}b"): encode_bits(format(x, f"0{ell}b")) for x in range(1 << ell)}

