"""Reversible simulation of classical AND/OR/NOT circuits.

Every AND and OR writes into a fresh 0-initialized ancilla, a NOT is applied
to a fresh copy, and each reuse of a value beyond its first is served by a
CNOT copy.  Basis witnesses are therefore evaluated deterministically and
the acceptance probability is 1 on satisfying inputs and 0 otherwise.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import circuit as C
from ..circuit import Gate, QuantumCircuit
from .artifacts import ReductionArtifact

OPS = ("and", "or", "not")


@dataclass(frozen=True)
class ClassicalCircuit:
    """Boolean circuit; node ``i < n_inputs`` is input ``i``, gate ``j`` is node ``n_inputs + j``."""

    n_inputs: int
    gates: tuple[tuple[str, tuple[int, ...]], ...]
    output: int
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        gates = tuple((str(op).lower(), tuple(int(i) for i in ins)) for op, ins in self.gates)
        object.__setattr__(self, "gates", gates)
        for j, (op, ins) in enumerate(gates):
            if op not in OPS:
                raise ValueError(f"unsupported gate kind {op!r}; use and, or, not")
            if op == "not" and len(ins) != 1:
                raise ValueError(f"gate {j}: not takes one input")
            if op != "not" and len(ins) < 1:
                raise ValueError(f"gate {j}: {op} needs inputs")
            if any(not 0 <= i < self.n_inputs + j for i in ins):
                raise ValueError(f"gate {j} reads a node that is not yet defined")
        if not 0 <= self.output < self.n_inputs + len(gates):
            raise ValueError("output node out of range")

    @property
    def n_nodes(self) -> int:
        return self.n_inputs + len(self.gates)

    def evaluate(self, bits) -> int:
        vals = [int(b) for b in bits]
        if len(vals) != self.n_inputs:
            raise ValueError("wrong number of inputs")
        for op, ins in self.gates:
            xs = [vals[i] for i in ins]
            vals.append(int(all(xs)) if op == "and" else int(any(xs)) if op == "or" else 1 - xs[0])
        return vals[self.output]

    def weft(self, small: int = 2) -> int:
        """Largest number of gates with fan-in above ``small`` on an input-output path."""
        level = [0] * self.n_inputs
        for op, ins in self.gates:
            level.append(max(level[i] for i in ins) + (1 if len(ins) > small else 0))
        return level[self.output]


def reversibilize_classical(cc: ClassicalCircuit, k: int | None = None) -> ReductionArtifact:
    """Quantum circuit on ``n_inputs`` witness wires accepting iff the output node is 1."""
    uses = [0] * cc.n_nodes
    for _, ins in cc.gates:
        for i in ins:
            uses[i] += 1
    uses[cc.output] += 1
    n = cc.n_inputs
    next_wire = n
    gates: list[Gate] = []
    # wires currently holding the value of each node, consumed one per use
    holders: dict[int, list[int]] = {}

    def fresh() -> int:
        nonlocal next_wire
        next_wire += 1
        return next_wire - 1

    def place(node: int, wire: int) -> None:
        copies = [wire]
        for _ in range(max(uses[node] - 1, 0)):
            cp = fresh()
            gates.append(C.cnot(wire, cp))
            copies.append(cp)
        holders[node] = copies

    def take(node: int) -> int:
        return holders[node].pop()

    for i in range(n):
        place(i, i)
    for j, (op, ins) in enumerate(cc.gates):
        node = n + j
        srcs = [take(i) for i in ins]
        anc = fresh()
        if op == "and":
            gates.append(C.xgate(anc, tuple(srcs)))
        elif op == "or":
            gates.append(C.xgate(anc, tuple(srcs), (0,) * len(srcs)))
            gates.append(C.xgate(anc))
        else:
            gates.append(C.cnot(srcs[0], anc))
            gates.append(C.xgate(anc))
        place(node, anc)
    out = take(cc.output)
    n_anc = next_wire - n
    circ = QuantumCircuit(n, n_anc, "0" * n_anc, tuple(gates), ((out, 1),), name="reversible")
    meta = {"n_ancilla": n_anc, "n_gates": len(cc.gates), "output_wire": out, "weft": cc.weft()}
    kk = 0 if k is None else k
    return ReductionArtifact("reversibilize", circ, kk, kk, (1.0, 0.0), "cs", meta)


def random_classical_circuit(rng: np.random.Generator, n_inputs: int, n_gates: int, max_fan_in: int = 2) -> ClassicalCircuit:
    gates = []
    for j in range(n_gates):
        op = OPS[int(rng.integers(3))]
        pool = n_inputs + j
        if op == "not":
            ins = (int(rng.integers(pool)),)
        else:
            size = int(rng.integers(1, min(max_fan_in, pool) + 1))
            ins = tuple(int(i) for i in rng.choice(pool, size, replace=False))
        gates.append((op, ins))
    return ClassicalCircuit(n_inputs, tuple(gates), n_inputs + n_gates - 1)
