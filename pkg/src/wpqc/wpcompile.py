"""Weight-preserving synthesis: hat gates, two-level gadgets, controlled gadgets, W states."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import circuit as C
from .circuit import Gate, QuantumCircuit, circuit_on
from .weightspace import SectorOperator

HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)

MAX_SYNTH_QUBITS = 8
MAX_SYNTH_DIM = 70


def _require_unitary(u: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {u.shape}")
    err = np.abs(u.conj().T @ u - np.eye(u.shape[0])).max()
    if err > tol:
        raise ValueError(f"matrix is not unitary (error {err:.2e})")
    return u


def hat_gate(u, wires: tuple[int, int] = (0, 1)) -> Gate:
    """Two-qubit gate acting as ``u`` on span{|01>, |10>} and trivially on |00>, |11>."""
    u = _require_unitary(u)
    if u.shape != (2, 2):
        raise ValueError("hat gates embed single-qubit unitaries")
    return C.hat(wires[0], wires[1], u)


@dataclass(frozen=True, eq=False)
class TwoLevelSpec:
    """A unitary acting as ``V`` on span{|s>, |t>} (in that order) and as identity elsewhere."""

    n: int
    s: str
    t: str
    V: np.ndarray

    def __post_init__(self):
        if len(self.s) != self.n or len(self.t) != self.n:
            raise ValueError("basis states must have n bits")
        if self.s == self.t:
            raise ValueError("the two basis states must differ")
        if self.s.count("1") != self.t.count("1"):
            raise ValueError("the two basis states must have equal weight")
        v = _require_unitary(self.V, 1e-10)
        if v.shape != (2, 2):
            raise ValueError("V must be 2x2")
        object.__setattr__(self, "V", v)

    @property
    def k(self) -> int:
        return self.s.count("1")


def _ones(x: list[int]) -> list[int]:
    return [i for i, b in enumerate(x) if b]


def _transposition(x: list[int], a: int, b: int, strict: bool) -> Gate:
    """SWAP of wires a, b acting only on the basis state x and its image."""
    if strict:
        ctrl = [q for q in range(len(x)) if q not in (a, b)]
        return C.swap(a, b, controls=ctrl, polarities=[x[q] for q in ctrl])
    ctrl = [q for q in _ones(x) if q not in (a, b)]
    return C.swap(a, b, controls=ctrl)


def two_level_path(s: str, t: str) -> list[tuple[int, int]]:
    """Transpositions moving ``s`` next to ``t``: at most ``k`` steps.

    After the moves the current string differs from ``t`` in two wires; when
    possible they are adjacent.
    """
    x = [int(b) for b in s]
    y = [int(b) for b in t]
    extra_s = [i for i in range(len(x)) if x[i] and not y[i]]
    extra_t = [i for i in range(len(x)) if y[i] and not x[i]]
    moves = list(zip(extra_s[:-1], extra_t[:-1]))
    a, b = extra_s[-1], extra_t[-1]
    if abs(a - b) != 1:
        for nb in (b + 1, b - 1):
            if 0 <= nb < len(x) and not x[nb] and not y[nb]:
                moves.append((a, nb))
                break
    return moves


def two_level_wp(spec: TwoLevelSpec, strict: bool = True) -> QuantumCircuit:
    """Weight-preserving circuit for a two-level unitary.

    Controlled SWAPs walk ``s`` to a string one transposition away from
    ``t``, a controlled hat gate applies ``V`` on the two differing wires,
    and the walk is undone.  Strict mode controls every other wire, which
    makes the circuit two-level on the whole space; loose mode controls
    only the ``k - 1`` shared ones and is exact on the weight-k sector only.
    """
    n = spec.n
    x = [int(b) for b in spec.s]
    y = [int(b) for b in spec.t]
    forward = []
    for a, b in two_level_path(spec.s, spec.t):
        forward.append(_transposition(x, a, b, strict))
        x[a], x[b] = x[b], x[a]
    diff = [i for i in range(n) if x[i] != y[i]]
    p, q = sorted(diff)
    # hat acts on span{|01>, |10>} of wires (p, q); order V's basis accordingly
    v = spec.V if (x[p], x[q]) == (0, 1) else PAULI_X @ spec.V @ PAULI_X
    if strict:
        ctrl = [w for w in range(n) if w not in (p, q)]
        pol = [x[w] for w in ctrl]
    else:
        ctrl = [w for w in _ones(x) if w not in (p, q)]
        pol = [1] * len(ctrl)
    middle = C.hat(p, q, v, controls=ctrl, polarities=pol)
    gates = forward + [middle] + [g.inverse() for g in reversed(forward)]
    return circuit_on(n, gates)


def _blocks_of_wp(m: np.ndarray) -> list[np.ndarray]:
    w = np.array([bin(b).count("1") for b in range(m.shape[0])])
    return [np.flatnonzero(w == k) for k in range(int(w.max()) + 1)]


def wp_fractional_power(m: np.ndarray, p: float) -> np.ndarray:
    """Principal power of a weight-preserving unitary, computed block by block."""
    m = np.asarray(m, dtype=complex)
    out = np.zeros_like(m)
    for idx in _blocks_of_wp(m):
        blk = m[np.ix_(idx, idx)]
        # complex Schur form of a unitary is diagonal
        t, z = scipy.linalg.schur(blk, output="complex")
        theta = np.angle(np.diag(t))
        out[np.ix_(idx, idx)] = z @ np.diag(np.exp(1j * p * theta)) @ z.conj().T
    return out


def multi_controlled_wp(w_hat: Gate, controls, n_wires: int | None = None) -> QuantumCircuit:
    """Controlled version of a two-qubit weight-preserving gate.

    ``controls`` is a list of ``(wire, polarity)``.  Two ancillas prepared in
    |01> hold the parity of a Gray-code subset of the controls; Fredkin gates
    update it and hat-type powers of ``w_hat`` are applied conditioned on it.
    The ancillas return to |01>.
    """
    if len(w_hat.targets) != 2 or w_hat.controls:
        raise ValueError("expected an uncontrolled two-qubit gate")
    mat = w_hat.local_dense()
    if not C.check_weight_preserving(circuit_on(2, [C.unitary((0, 1), mat)])):
        raise ValueError("gate is not weight preserving")
    controls = [(int(w), int(p)) for w, p in controls]
    used = set(w_hat.targets) | {w for w, _ in controls}
    n = n_wires if n_wires is not None else max(used) + 1
    if max(used) >= n:
        raise ValueError("wires outside the register")
    p0, p1 = n, n + 1
    a, b = w_hat.targets
    m = len(controls)
    if m == 0:
        return QuantumCircuit(n, 2, "01", (w_hat,))
    root = wp_fractional_power(mat, 1.0 / 2 ** (m - 1))
    root_inv = root.conj().T
    gates: list[Gate] = []

    def flip_parity(j: int) -> None:
        w, pol = controls[j]
        gates.append(C.fredkin(w, p0, p1))
        if pol == 0:
            gates.append(C.swap(p0, p1))

    prev = 0
    for i in range(1, 2**m):
        code = i ^ (i >> 1)
        flip_parity((code ^ prev).bit_length() - 1)
        prev = code
        # parity 1 is |10> on the pair, so wire p0 carries the parity bit
        power = root if bin(code).count("1") % 2 else root_inv
        gates.append(C.unitary((a, b), power, controls=(p0,), label="V"))
    flip_parity(prev.bit_length() - 1)
    return QuantumCircuit(n, 2, "01", tuple(gates))


def w_state_prep(r: int) -> QuantumCircuit:
    """Circuit on 2^r wires mapping |0^n> to itself and |0^(n-1)1> to |W_n>."""
    if r < 0:
        raise ValueError("r must be non-negative")
    n = 1 << r
    return circuit_on(n, _w_gates(0, n))


def _w_gates(lo: int, size: int) -> list[Gate]:
    if size == 1:
        return []
    half = size // 2
    return [C.hat(lo + half - 1, lo + size - 1, HADAMARD, label="Hhat")] + _w_gates(lo, half) + _w_gates(lo + half, half)


def _two_level_block(u: np.ndarray, tol: float) -> tuple[int, int] | None:
    off = np.abs(u - np.eye(u.shape[0])) > tol
    rows = np.flatnonzero(off.any(axis=0) | off.any(axis=1))
    if len(rows) == 2:
        return int(rows[0]), int(rows[1])
    return None


def two_level_factors(u: np.ndarray, tol: float = 1e-13) -> list[tuple[int, int, np.ndarray]]:
    """Factors (p, q, M) with u = F_1 F_2 ... F_L, F_i acting as M on rows (p, q)."""
    u = _require_unitary(u, 1e-9).copy()
    d = u.shape[0]
    single = _two_level_block(u, tol)
    if single is not None:
        p, q = single
        return [(p, q, u[np.ix_([p, q], [p, q])])]
    applied = []  # G's with G_L ... G_1 u = I
    for j in range(d - 1):
        for i in range(j + 1, d):
            x, y = u[j, j], u[i, j]
            last_slot = j == d - 2
            # the last row of a column also fixes the phase of the diagonal entry
            if abs(y) <= tol and not (i == d - 1 and abs(x - 1) > tol) and not last_slot:
                continue
            rho = np.hypot(abs(x), abs(y))
            g = np.array([[np.conj(x), np.conj(y)], [-y, x]]) / rho
            rows = [j, i]
            new = g @ u[rows, :]
            if last_slot:
                # free phase on the second row makes the final diagonal entry 1
                ph = new[1, i]
                g[1] *= np.conj(ph) / abs(ph)
                new = g @ u[rows, :]
            if np.abs(g - np.eye(2)).max() <= tol:
                continue
            u[rows, :] = new
            applied.append((j, i, g))
    return [(p, q, g.conj().T) for p, q, g in applied]


def decompose_wp_unitary(target: SectorOperator, strict: bool = True) -> QuantumCircuit:
    """Weight-preserving circuit whose action on the sector equals ``target``."""
    idx = target.indexer
    if idx.n > MAX_SYNTH_QUBITS or idx.dim > MAX_SYNTH_DIM:
        raise ValueError(
            f"synthesis guard: n={idx.n} (max {MAX_SYNTH_QUBITS}), dim={idx.dim} (max {MAX_SYNTH_DIM})"
        )
    u = target.to_dense()
    gates: list[Gate] = []
    # u = F_1 ... F_L, so F_L is applied first
    for p, q, m in reversed(two_level_factors(u)):
        spec = TwoLevelSpec(idx.n, idx.unrank(p), idx.unrank(q), m)
        gates.extend(two_level_wp(spec, strict).gates)
    return circuit_on(idx.n, gates)
