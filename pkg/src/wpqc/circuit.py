"""Circuit representation and structural analyses.

Every unitary gate is stored uniformly as a local matrix on ``targets`` that
fires when each control wire holds its polarity.  Wire ``w`` of a circuit is
wire ``w`` of the register: witness wires come first, then ancillas.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

UNITARY_TOL = 1e-12

KINDS = (
    "u1",
    "unitary",
    "hat",
    "swap",
    "fredkin",
    "phase",
    "cnot",
    "toffoli",
    "and",
    "fanout",
    "projector_phase",
    "measure",
)
BIG_KINDS = ("toffoli", "and")

X = np.array([[0, 1], [1, 0]], dtype=complex)
SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)


def _frozen(m) -> np.ndarray:
    a = np.array(m, dtype=np.complex128)
    a.setflags(write=False)
    return a


def kron_all(mats) -> np.ndarray:
    out = np.eye(1, dtype=complex)
    for m in mats:
        out = np.kron(out, m)
    return out


def hat_matrix(u) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    m = np.eye(4, dtype=complex)
    m[1:3, 1:3] = u
    return m


@dataclass(frozen=True, eq=False)
class Gate:
    """One gate.

    ``matrix`` acts on ``targets`` (first target is the most significant local
    bit).  ``pattern`` is only used by ``projector_phase`` gates, whose action
    is ``exp(i phi)`` on the basis state ``targets == pattern`` and
    ``exp(-i phi)`` on every other target state.
    """

    kind: str
    targets: tuple[int, ...]
    controls: tuple[int, ...] = ()
    polarities: tuple[int, ...] = ()
    matrix: np.ndarray | None = None
    params: tuple[float, ...] = ()
    pattern: tuple[int, ...] = ()
    classical: bool = False
    label: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        object.__setattr__(self, "targets", tuple(int(w) for w in self.targets))
        object.__setattr__(self, "controls", tuple(int(w) for w in self.controls))
        pols = tuple(int(p) for p in self.polarities) if self.polarities else (1,) * len(self.controls)
        object.__setattr__(self, "polarities", pols)
        object.__setattr__(self, "params", tuple(self.params))
        object.__setattr__(self, "pattern", tuple(int(b) for b in self.pattern))
        if len(pols) != len(self.controls) or any(p not in (0, 1) for p in pols):
            raise ValueError("polarities must be 0/1, one per control")
        wires = self.wires
        if len(set(wires)) != len(wires):
            raise ValueError(f"repeated wire in {self.kind} gate: {wires}")
        if any(w < 0 for w in wires):
            raise ValueError("negative wire index")
        if self.kind == "measure":
            if self.controls or self.matrix is not None:
                raise ValueError("measurement carries no controls or matrix")
            return
        if self.kind == "fanout":
            # X on every target when the single control is set; kept matrix-free
            if len(self.controls) != 1 or self.polarities != (1,) or self.matrix is not None:
                raise ValueError("fanout has one positive control and no matrix")
            return
        if self.kind == "projector_phase":
            if len(self.pattern) != len(self.targets) or len(self.params) != 1:
                raise ValueError("projector_phase needs one pattern bit per target and one angle")
            return
        if self.matrix is None:
            raise ValueError(f"{self.kind} gate needs a matrix")
        mat = _frozen(self.matrix)
        d = 1 << len(self.targets)
        if mat.shape != (d, d):
            raise ValueError(f"matrix shape {mat.shape} does not match {len(self.targets)} targets")
        err = np.abs(mat.conj().T @ mat - np.eye(d)).max()
        if err > UNITARY_TOL:
            raise ValueError(f"{self.kind} matrix is not unitary (error {err:.2e})")
        object.__setattr__(self, "matrix", mat)

    @property
    def wires(self) -> tuple[int, ...]:
        return self.controls + self.targets

    @property
    def is_big(self) -> bool:
        return self.kind in BIG_KINDS

    @property
    def is_measure(self) -> bool:
        return self.kind == "measure"

    @property
    def is_classical_fanout(self) -> bool:
        return self.kind == "fanout" and self.classical

    def is_identity(self) -> bool:
        if self.kind == "measure":
            return False
        if self.kind == "projector_phase":
            return not self.controls and not self.targets and self.params[0] == 0
        if self.kind == "fanout":
            return not self.targets
        return bool(np.array_equal(self.matrix, np.eye(self.matrix.shape[0])))

    def local_dense(self) -> np.ndarray:
        """Target matrix; diagonal gates are expanded (small supports only)."""
        if self.kind == "projector_phase":
            s = len(self.targets)
            phi = self.params[0]
            idx = int("".join(map(str, self.pattern)), 2) if s else 0
            diag = np.full(1 << s, np.exp(-1j * phi))
            diag[idx] = np.exp(1j * phi)
            return np.diag(diag)
        if self.kind == "fanout":
            if len(self.targets) > 12:
                raise ValueError("dense fanout matrices are limited to 12 targets")
            return kron_all([X] * len(self.targets))
        if self.matrix is None:
            raise ValueError("measurement has no matrix")
        return self.matrix

    def inverse(self) -> Gate:
        if self.kind == "measure":
            raise ValueError("measurement is not invertible")
        if self.kind == "projector_phase":
            return replace(self, params=(-self.params[0],), label=self.label)
        if self.kind == "fanout":
            return self
        return replace(self, matrix=self.matrix.conj().T)

    def with_controls(self, controls, polarities=None) -> Gate:
        """Same gate with extra controls prepended."""
        if self.kind == "measure":
            raise ValueError("cannot control a measurement")
        controls = tuple(controls)
        pols = tuple(polarities) if polarities is not None else (1,) * len(controls)
        return replace(self, controls=controls + self.controls, polarities=pols + self.polarities)

    def remap(self, mapping) -> Gate:
        """Rename wires through a callable, dict or sequence."""
        f = mapping if callable(mapping) else mapping.__getitem__
        return replace(self, targets=tuple(f(w) for w in self.targets), controls=tuple(f(w) for w in self.controls))


# constructors ---------------------------------------------------------------


def u1(q: int, u, label: str = "") -> Gate:
    return Gate("u1", (q,), matrix=u, label=label)


def unitary(targets, u, controls=(), polarities=(), label: str = "") -> Gate:
    return Gate("unitary", tuple(targets), tuple(controls), tuple(polarities), matrix=u, label=label)


def hat(q0: int, q1: int, u, controls=(), polarities=(), label: str = "") -> Gate:
    return Gate("hat", (q0, q1), tuple(controls), tuple(polarities), matrix=hat_matrix(u), label=label)


def swap(a: int, b: int, controls=(), polarities=()) -> Gate:
    return Gate("swap", (a, b), tuple(controls), tuple(polarities), matrix=SWAP)


def fredkin(c: int, a: int, b: int, polarity: int = 1) -> Gate:
    return Gate("fredkin", (a, b), (c,), (polarity,), matrix=SWAP)


def phase_e(q: int, delta: float) -> Gate:
    return Gate("phase", (q,), matrix=np.diag([1.0, np.exp(1j * delta)]), params=(delta,))


def cnot(c: int, t: int, polarity: int = 1) -> Gate:
    return Gate("cnot", (t,), (c,), (polarity,), matrix=X)


def xgate(q: int, controls=(), polarities=()) -> Gate:
    return Gate("unitary", (q,), tuple(controls), tuple(polarities), matrix=X, label="X")


def toffoli(controls, t: int, polarities=()) -> Gate:
    return Gate("toffoli", (t,), tuple(controls), tuple(polarities), matrix=X)


def big_and(inputs, out: int, polarities=()) -> Gate:
    return Gate("and", (out,), tuple(inputs), tuple(polarities), matrix=X, classical=True)


def fanout(control: int, targets, classical: bool = True) -> Gate:
    return Gate("fanout", tuple(targets), (control,), (1,), classical=classical)


def projector_phase(wires, bits, phi: float, controls=(), polarities=(), label: str = "") -> Gate:
    return Gate("projector_phase", tuple(wires), tuple(controls), tuple(polarities),
                params=(float(phi),), pattern=tuple(bits), label=label)


def measure(*wires: int) -> Gate:
    return Gate("measure", tuple(wires))


# circuits -------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class QuantumCircuit:
    """Gate list over ``n_witness + n_ancilla`` wires.

    ``accept`` lists ``(wire, bit)`` pairs; the circuit accepts when every
    listed wire is measured in its bit.  An empty list accepts always.
    """

    n_witness: int
    n_ancilla: int = 0
    ancilla_init: str = ""
    gates: tuple[Gate, ...] = ()
    accept: tuple[tuple[int, int], ...] = ()
    name: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        init = self.ancilla_init or "0" * self.n_ancilla
        if len(init) != self.n_ancilla or set(init) - {"0", "1"}:
            raise ValueError(f"ancilla_init {init!r} does not describe {self.n_ancilla} ancillas")
        object.__setattr__(self, "ancilla_init", init)
        object.__setattr__(self, "gates", tuple(self.gates))
        acc = tuple((int(w), int(b)) for w, b in self.accept)
        object.__setattr__(self, "accept", acc)
        n = self.n_wires
        for i, g in enumerate(self.gates):
            if max(g.wires, default=-1) >= n:
                raise ValueError(f"gate {i} ({g.kind}) touches a wire outside {n} wires")
        if any(w >= n or b not in (0, 1) for w, b in acc):
            raise ValueError("accept predicate out of range")
        if len({w for w, _ in acc}) != len(acc):
            raise ValueError("accept predicate repeats a wire")

    @property
    def n_wires(self) -> int:
        return self.n_witness + self.n_ancilla

    @property
    def ancilla_ones(self) -> int:
        return self.ancilla_init.count("1")

    @property
    def has_measurements(self) -> bool:
        return any(g.is_measure for g in self.gates)

    def with_gates(self, gates, **changes) -> QuantumCircuit:
        return replace(self, gates=tuple(gates), **changes)

    def append(self, *gates: Gate) -> QuantumCircuit:
        return replace(self, gates=self.gates + tuple(gates))

    def inverse(self) -> QuantumCircuit:
        return replace(self, gates=tuple(g.inverse() for g in reversed(self.gates)))

    def unitary_gates(self) -> tuple[Gate, ...]:
        return tuple(g for g in self.gates if not g.is_measure)


def circuit_on(n: int, gates=(), accept=()) -> QuantumCircuit:
    """Ancilla-free circuit on ``n`` witness wires."""
    return QuantumCircuit(n, 0, "", tuple(gates), tuple(accept))


# analyses -------------------------------------------------------------------


def weft_of(c: QuantumCircuit) -> int:
    """Largest number of big gates along any wire path."""
    count = [0] * c.n_wires
    for g in c.gates:
        if g.is_identity():
            continue
        if g.kind == "fanout":
            src = count[g.controls[0]]
            for t in g.targets:
                count[t] = src
            continue
        if g.is_measure:
            continue
        level = max(count[w] for w in g.wires) + (1 if g.is_big else 0)
        for w in g.wires:
            count[w] = level
    return max(count, default=0)


def depth_of(c: QuantumCircuit) -> int:
    """Number of layers when each gate waits for all of its wires.

    Measurements occupy one layer like any other gate.
    """
    level = [0] * c.n_wires
    for g in c.gates:
        if g.is_identity():
            continue
        d = max(level[w] for w in g.wires) + 1
        for w in g.wires:
            level[w] = d
    return max(level, default=0)


@dataclass(frozen=True)
class WeightCheck:
    ok: bool
    gate_index: int | None = None
    input_bits: str | None = None
    output_bits: str | None = None

    def __bool__(self) -> bool:
        return self.ok


def _popcounts(s: int) -> np.ndarray:
    return np.array([bin(b).count("1") for b in range(1 << s)])


def check_weight_preserving(c: QuantumCircuit, tol: float = 1e-12) -> WeightCheck:
    """Check that every gate keeps the total Hamming weight fixed.

    Controls never change, so only the target matrix matters.  On failure the
    counterexample is a full-register basis state (untouched wires 0) and one
    basis state in the support of its image with a different weight.
    """
    if c.has_measurements:
        raise ValueError("weight-preservation check is defined for unitary circuits only")
    n = c.n_wires
    for i, g in enumerate(c.gates):
        if g.kind == "projector_phase":
            continue
        if g.kind == "fanout":
            if g.targets:
                base = ["0"] * n
                base[g.controls[0]] = "1"
                out = list(base)
                for t in g.targets:
                    out[t] = "1"
                return WeightCheck(False, i, "".join(base), "".join(out))
            continue
        m = g.matrix
        s = len(g.targets)
        w = _popcounts(s)
        # transpose so the first hit has the smallest input pattern
        bad = np.argwhere(((np.abs(m) > tol) & (w[:, None] != w[None, :])).T)
        if len(bad):
            b_in, b_out = (int(v) for v in bad[0])
            base = ["0"] * n
            for q, p in zip(g.controls, g.polarities):
                base[q] = str(p)
            inp = list(base)
            out = list(base)
            for j, q in enumerate(g.targets):
                inp[q] = str((b_in >> (s - 1 - j)) & 1)
                out[q] = str((b_out >> (s - 1 - j)) & 1)
            return WeightCheck(False, i, "".join(inp), "".join(out))
    return WeightCheck(True)


@dataclass(frozen=True)
class FanoutCheck:
    ok: bool
    gate_index: int | None = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


def validate_classical_fanout(c: QuantumCircuit) -> FanoutCheck:
    """Check classical-fanout legality and classical use of measured wires.

    Fanout targets must be 0-initialized ancillas untouched before the fanout
    and afterwards serve only as controls, measurement inputs or AND inputs.
    The same restriction applies to a wire after it is measured.
    """
    touched: set[int] = set()
    classical: dict[int, int] = {}  # wire -> index of the gate that made it classical
    for i, g in enumerate(c.gates):
        for t in g.targets:
            if t in classical and not g.is_measure:
                j = classical[t]
                return FanoutCheck(False, i, f"wire {t} is classical after gate {j} but is a target of gate {i}")
        if g.is_classical_fanout:
            for t in g.targets:
                if t < c.n_witness:
                    return FanoutCheck(False, i, f"fanout target {t} is a witness wire")
                if c.ancilla_init[t - c.n_witness] != "0":
                    return FanoutCheck(False, i, f"fanout target {t} is not initialized to 0")
                if t in touched:
                    return FanoutCheck(False, i, f"fanout target {t} was used before the fanout")
        touched.update(g.wires)
        if g.is_classical_fanout:
            for t in g.targets:
                classical[t] = i
        elif g.is_measure:
            for t in g.targets:
                classical.setdefault(t, i)
    return FanoutCheck(True)


def gate_dag(c: QuantumCircuit) -> list[tuple[int, int, int]]:
    """Edges ``(gate_i, gate_j, wire)`` linking consecutive gates on a wire."""
    last: dict[int, int] = {}
    edges = []
    for j, g in enumerate(c.gates):
        for w in g.wires:
            if w in last:
                edges.append((last[w], j, w))
            last[w] = j
    return edges
