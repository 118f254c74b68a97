"""Projector extraction from constant-depth circuits that end in one big AND.

Each AND input ``j`` yields the projector V^dag |not ok><not ok|_j V, which is
nontrivial only on the backward light cone of wire ``j``.  The witness is
accepted with certainty iff it has zero energy on every projector, with the
ancilla initialization enforced by single-qubit pins.
"""
from __future__ import annotations

from dataclasses import replace

import numpy as np

from .. import circuit as C
from ..circuit import Gate, QuantumCircuit, validate_classical_fanout
from ..hamiltonian import LocalHamiltonian, LocalTerm, projector_term
from ..simulator import circuit_unitary
from .artifacts import ReductionArtifact


def _classical_since(c: QuantumCircuit) -> dict[int, int]:
    """Wire -> first gate index from which it only ever serves as a control.

    A wire becomes classical when it is measured, copied into by a classical
    fanout, or used as the control of one; it stays classical only if no
    later gate targets it.
    """
    last_target: dict[int, int] = {}
    for i, g in enumerate(c.gates):
        if g.is_measure:
            continue
        for t in g.targets:
            last_target[t] = i
    since: dict[int, int] = {}
    for i, g in enumerate(c.gates):
        if g.is_measure:
            cands = g.targets
        elif g.is_classical_fanout:
            cands = g.controls + g.targets
        else:
            continue
        for w in cands:
            start = i + 1 if (g.is_classical_fanout and w in g.targets) else i
            if w not in since and last_target.get(w, -1) < start:
                since[w] = start
    return since


def rewire_classical_fanouts(c: QuantumCircuit) -> QuantumCircuit:
    """Point every control on a classical-fanout copy at the fanout's control.

    Copies are 0-initialized, so a copy equals the source bit as long as the
    source is not modified afterwards; sources that are modified are left
    alone.  Gate indices are unchanged.
    """
    since = _classical_since(c)
    source: dict[int, int] = {}
    gates = list(c.gates)
    for i, g in enumerate(gates):
        if g.is_classical_fanout:
            q = g.controls[0]
            if since.get(q, len(gates)) <= i:
                for t in g.targets:
                    source[t] = q
            continue
        if g.is_measure or not g.controls:
            continue
        ctrls = tuple(source.get(w, w) for w in g.controls)
        if ctrls == g.controls:
            continue
        pairs: dict[int, int] = {}
        clash = False
        for w, p in zip(ctrls, g.polarities):
            if pairs.setdefault(w, p) != p:
                clash = True
        if clash or set(pairs) & set(g.targets):
            continue
        gates[i] = replace(g, controls=tuple(pairs), polarities=tuple(pairs.values()))
    return c.with_gates(gates)


def light_cone(c: QuantumCircuit, wire: int) -> tuple[frozenset[int], tuple[int, ...]]:
    """Wires and gate indices that the final value of ``wire`` depends on.

    Backward sweep over the rewired circuit.  A gate enters the cone when one
    of its targets is in it, or one of its controls is in it and is still
    quantum at that point; it then brings all of its wires.  A gate seen only
    through classical controls commutes with everything later in the cone, so
    a classical fanout contributes nothing beyond its control.
    """
    if not 0 <= wire < c.n_wires:
        raise ValueError(f"wire {wire} outside {c.n_wires} wires")
    rc = rewire_classical_fanouts(c)
    since = _classical_since(rc)
    cone = {wire}
    picked: list[int] = []
    for i in range(len(rc.gates) - 1, -1, -1):
        g = rc.gates[i]
        if g.is_measure or g.is_identity():
            continue
        hit_t = any(t in cone for t in g.targets)
        hit_c = [w for w in g.controls if w in cone]
        if not hit_t:
            if not hit_c or all(since.get(w, len(rc.gates)) <= i for w in hit_c):
                continue
        cone.update(g.wires)
        picked.append(i)
    return frozenset(cone), tuple(reversed(picked))


def growth_profile(c: QuantumCircuit, wire: int) -> list[int]:
    """Cone size after each depth layer, from the output backwards."""
    cone, gates = light_cone(c, wire)
    rc = rewire_classical_fanouts(c)
    level = [0] * c.n_wires
    layer_of = {}
    for i, g in enumerate(rc.gates):
        if g.is_measure or g.is_identity():
            continue
        d = max(level[w] for w in g.wires) + 1
        for w in g.wires:
            level[w] = d
        layer_of[i] = d
    sizes = []
    seen = {wire}
    for d in sorted({layer_of[i] for i in gates}, reverse=True):
        for i in gates:
            if layer_of[i] == d:
                seen.update(rc.gates[i].wires)
        sizes.append(len(seen))
    return sizes


def check_sqw_form(c: QuantumCircuit) -> tuple[Gate, int]:
    """Return the final AND gate and its output wire; raise if the form is violated."""
    if not c.gates or c.gates[-1].kind != "and":
        raise ValueError("circuit not in SQW form: the last gate must be a big AND")
    final = c.gates[-1]
    if any(g.is_big for g in c.gates[:-1]):
        raise ValueError("circuit not in SQW form: big gate before the final AND")
    (out,) = final.targets
    if c.accept != ((out, 1),):
        raise ValueError("circuit not in SQW form: acceptance must read the AND output in 1")
    if out < c.n_witness or c.ancilla_init[out - c.n_witness] != "0":
        raise ValueError("circuit not in SQW form: the AND output must be a 0-initialized ancilla")
    if any(out in g.wires for g in c.gates[:-1]):
        raise ValueError("circuit not in SQW form: the AND output is used before the AND")
    chk = validate_classical_fanout(c)
    if not chk:
        raise ValueError(f"circuit not in SQW form: {chk.reason}")
    return final, out


def cone_projector(c: QuantumCircuit, wire: int, bad_bit: int) -> LocalTerm:
    """U^dag |bad_bit><bad_bit|_wire U restricted to the light cone of ``wire``."""
    cone, gates = light_cone(c, wire)
    rc = rewire_classical_fanouts(c)
    support = tuple(sorted(cone))
    local = {w: i for i, w in enumerate(support)}
    sub = QuantumCircuit(len(support), 0, "", tuple(rc.gates[i].remap(lambda w: local[w]) for i in gates))
    u = circuit_unitary(sub)
    s = len(support)
    mask = 1 << (s - 1 - local[wire])
    diag = np.array([1.0 if bool(x & mask) == bool(bad_bit) else 0.0 for x in range(1 << s)])
    block = u.conj().T @ (diag[:, None] * u)
    return LocalTerm(support, (block + block.conj().T) / 2, "cone")


def sqw1_to_qsat(c: QuantumCircuit, k: int, soundness: float = 0.5) -> ReductionArtifact:
    """Weighted quantum SAT instance on all wires, enforced weight k + ancilla ones."""
    final, _ = check_sqw_form(c)
    body = c.with_gates(c.gates[:-1])
    terms: list[LocalTerm] = []
    cones = {}
    for w, p in zip(final.controls, final.polarities):
        t = cone_projector(body, w, 1 - p)
        cones[w] = t.support
        terms.append(t)
    for a in range(c.n_ancilla):
        q = c.n_witness + a
        terms.append(projector_term((q,), (1 - int(c.ancilla_init[a]),), label="pin"))
    k_out = k + c.ancilla_ones
    b = 1.0 - soundness
    H = LocalHamiltonian(c.n_wires, tuple(terms), thresholds=(0.0, b))
    meta = {"cones": cones, "max_support": max((len(s) for s in cones.values()), default=0),
            "depth": C.depth_of(body), "n_outputs": len(final.controls), "k_prime": k_out}
    return ReductionArtifact("sqw2qsat", H, k, k_out, (0.0, b), "ab", meta)


def fanout_cone_example(seed: int = 0) -> tuple[QuantumCircuit, int]:
    """Nine-wire circuit with one classical fanout; the cone of wire 3 is {1, ..., 5}.

    Wires 7 and 8 are 0-initialized copies of wire 5.  Gates on the copies as
    controls reach back to wire 5 only.
    """
    rng = np.random.default_rng(seed)

    def rand(d):
        q, _ = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
        return q

    gates = (
        C.unitary((4, 5), rand(4), label="V1"),
        C.unitary((2, 3), rand(4), label="V2"),
        C.fanout(5, (7, 8)),
        C.unitary((1, 2), rand(4), label="V3"),
        C.unitary((6,), rand(2), controls=(7,), polarities=(0,)),
        C.unitary((2, 3), rand(4), controls=(8,), label="V4"),
        C.unitary((1, 2), rand(4), label="V5"),
        C.unitary((4,), rand(2), controls=(6,), polarities=(0,)),
        C.unitary((2, 3), rand(4), label="V6"),
        C.unitary((0, 1), rand(4)),
        C.unitary((4,), rand(2), controls=(8,)),
    )
    return QuantumCircuit(7, 2, "00", gates, ((3, 1),), name="fanout-cone"), 3


def random_sqw_circuit(rng: np.random.Generator, n: int, depth: int = 3, n_copies: int = 1,
                       quantum_share: float = 0.5) -> QuantumCircuit:
    """Random circuit of the form above on ``n`` witness wires.

    Layers of disjoint 1- and 2-qubit gates, one measured wire copied by a
    classical fanout into ``n_copies`` ancillas that then control gates, and a
    final AND over a random subset of output wires.  ``quantum_share`` is
    the probability that a gate is drawn with a continuous random unitary
    instead of a permutation or Hadamard.
    """

    def rand_u(d):
        q, _ = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
        return q

    def pick_gate(ws):
        if len(ws) == 1:
            if rng.random() < quantum_share:
                return C.u1(ws[0], rand_u(2))
            return C.u1(ws[0], C.X) if rng.random() < 0.5 else C.u1(ws[0], np.array([[1, 1], [1, -1]]) / np.sqrt(2))
        if rng.random() < quantum_share:
            return C.hat(ws[0], ws[1], rand_u(2)) if rng.random() < 0.5 else C.unitary(ws, rand_u(4))
        r = rng.integers(3)
        return C.cnot(ws[0], ws[1]) if r == 0 else C.swap(ws[0], ws[1]) if r == 1 else C.xgate(ws[1], (ws[0],), (0,))

    copies = tuple(range(n, n + n_copies))
    out = n + n_copies
    gates: list[Gate] = []
    for _ in range(max(depth - 1, 1)):
        order = [int(w) for w in rng.permutation(n)]
        while order:
            size = 2 if len(order) >= 2 and rng.random() < 0.7 else 1
            ws, order = tuple(order[:size]), order[size:]
            gates.append(pick_gate(ws))
    src = int(rng.integers(n))
    if n_copies:
        gates.append(C.measure(src))
        gates.append(C.fanout(src, copies))
        others = [w for w in range(n) if w != src]
        for cp in copies:
            if others:
                t = others[int(rng.integers(len(others)))]
                gates.append(C.unitary((t,), C.X if rng.random() < 0.5 else rand_u(2), controls=(cp,),
                                       polarities=(int(rng.integers(2)),)))
    size = int(rng.integers(1, n + 1))
    oks = tuple(sorted(int(w) for w in rng.choice(n, size, replace=False)))
    pols = tuple(int(p) for p in rng.integers(0, 2, size))
    gates.append(C.measure(*oks))
    gates.append(C.big_and(oks, out, pols))
    return QuantumCircuit(n, n_copies + 1, "0" * (n_copies + 1), tuple(gates), ((out, 1),), name="random-sqw")
