"""Energy measurement by a weight-preserving circuit.

A single term is measured with an encoded flag held in a |01>/|10> ancilla
pair.  The weight of the untouched witness qubits is written into a one-hot
counter so that the flag rotation can depend on the weight seen by the
term's support, which keeps every gate weight preserving.  Summing over a
W-state selection register measures the full Hamiltonian.
"""
from __future__ import annotations

import math

import numpy as np

from .. import circuit as C
from ..circuit import Gate, QuantumCircuit
from ..hamiltonian import LocalHamiltonian, LocalTerm, validate_instance
from ..wpcompile import w_state_prep
from .artifacts import ReductionArtifact

PSD_TOL = 1e-10


def _psd_sqrt(a: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh((a + a.conj().T) / 2)
    if vals.min(initial=0.0) < -PSD_TOL:
        raise ValueError(f"operator is not positive semidefinite (eigenvalue {vals.min():.3e})")
    return (vecs * np.sqrt(np.clip(vals, 0, None))) @ vecs.conj().T


def flag_rotation(o: np.ndarray, w: int) -> np.ndarray:
    """Unitary on (pair, support) rotating the flag by sqrt(O) on support weight w.

    In the pair basis {|01>, |10>} and on the weight-w block of the support it
    is [[sqrt(O_w), sqrt(I-O_w)], [sqrt(I-O_w), -sqrt(O_w)]]; elsewhere identity.
    """
    ell = int(round(math.log2(o.shape[0])))
    d = 1 << ell
    sub = np.array([x for x in range(d) if bin(x).count("1") == w])
    ow = o[np.ix_(sub, sub)]
    a = _psd_sqrt(ow)
    b = _psd_sqrt(np.eye(len(sub)) - ow)
    u = np.eye(4 * d, dtype=complex)
    rows01 = d + sub
    rows10 = 2 * d + sub
    u[np.ix_(rows01, rows01)] = a
    u[np.ix_(rows01, rows10)] = b
    u[np.ix_(rows10, rows01)] = b
    u[np.ix_(rows10, rows10)] = -a
    return u


def _rotate_left(counter) -> list[Gate]:
    """One-hot position i -> i-1 (mod len) as a chain of SWAPs."""
    return [C.swap(counter[i], counter[i + 1]) for i in range(len(counter) - 1)]


def weight_counter(rest, counter) -> list[Gate]:
    """Gates moving the counter's one from position 0 to position len-1-weight(rest)."""
    gates = _rotate_left(counter)
    for r in rest:
        gates += [g.with_controls((r,)) for g in _rotate_left(counter)]
    return gates


def measurement_gates(block, support, rest, pair, counter, k: int, controls=()) -> list[Gate]:
    """Gate list of one energy-measurement gadget embedded in a larger register.

    ``block`` is H_j on ``support``; the flag on ``pair`` (|01> initially)
    stays |01> with probability <psi|(I - H_j)/2|psi>.
    """
    block = np.asarray(block, dtype=complex)
    ell = len(support)
    o = (np.eye(1 << ell) - block) / 2
    _psd_sqrt(o)
    _psd_sqrt(np.eye(1 << ell) - o)
    vw = weight_counter(rest, counter)
    gates = list(vw)
    lo, hi = max(0, k - len(rest)), min(k, ell)
    for w in range(lo, hi + 1):
        # after the counter step the one sits at position k - weight(rest) = w
        u = flag_rotation(o, w)
        gates.append(C.unitary(tuple(pair) + tuple(support), u, controls=(counter[w],) + tuple(controls), label=f"U{w}"))
    gates += [g.inverse() for g in reversed(vw)]
    return gates


def energy_measurement_gadget(term: LocalTerm, n: int, k: int) -> QuantumCircuit:
    """Circuit accepting a weight-k witness with probability <psi|(I - H_j)/2|psi>.

    Wires: witness 0..n-1, flag pair (n, n+1) in |01>, counter of k+1 wires
    in |10...0>.
    """
    if k > n:
        raise ValueError("k exceeds n")
    block = np.asarray(term.block, dtype=complex)
    support = tuple(term.support)
    rest = tuple(q for q in range(n) if q not in support)
    pair = (n, n + 1)
    counter = tuple(range(n + 2, n + 3 + k))
    gates = measurement_gates(block, support, rest, pair, counter, k)
    init = "01" + "1" + "0" * k
    return QuantumCircuit(n, 2 + k + 1, init, tuple(gates), ((n, 0), (n + 1, 1)), name="energy-gadget")


def routing_swaps(support, n: int) -> list[tuple[int, int]]:
    """Transpositions bringing ``support[i]`` onto wire ``i``."""
    holder = list(range(n))  # wire -> original qubit currently on it
    swaps = []
    for i, q in enumerate(support):
        cur = holder.index(q)
        if cur != i:
            swaps.append((i, cur))
            holder[i], holder[cur] = holder[cur], holder[i]
    return swaps


def wlh_layout(n: int, m: int, k: int) -> dict:
    big_m = 1 << max(0, math.ceil(math.log2(m)))
    sel = tuple(range(n, n + big_m))
    pair = (n + big_m, n + big_m + 1)
    counter = tuple(range(n + big_m + 2, n + big_m + 3 + k))
    return {"M": big_m, "selection": sel, "pair": pair, "counter": counter, "n_wires": n + big_m + k + 3}


def wlh_to_wpcsat(H: LocalHamiltonian, k: int, a: float | None = None, b: float | None = None) -> ReductionArtifact:
    """Weight-preserving energy test accepting with probability 1 - (m + <H>)/(2M)."""
    m = H.m
    if m == 0:
        raise ValueError("Hamiltonian has no terms")
    if a is None or b is None:
        if H.thresholds is None:
            raise ValueError("energy thresholds required")
        a, b = H.thresholds
    if not b > a:
        raise ValueError("need b > a")
    rep = validate_instance(H)
    bad = [t.index for t in rep.terms if not (t.norm_ok and t.hermitian_ok)]
    if bad:
        raise ValueError(f"terms {bad} violate the norm or Hermiticity bound")
    n = H.n
    lay = wlh_layout(n, m, k)
    big_m, sel, pair, counter = lay["M"], lay["selection"], lay["pair"], lay["counter"]
    gates: list[Gate] = [g.remap(lambda w: sel[w]) for g in w_state_prep(int(math.log2(big_m))).gates]
    for j, term in enumerate(H.terms):
        ell = term.locality
        swaps = routing_swaps(term.support, n)
        route = [C.swap(x, y, controls=(sel[j],)) for x, y in swaps]
        gates += route
        support = tuple(range(ell))
        rest = tuple(range(ell, n))
        gates += measurement_gates(term.block, support, rest, pair, counter, k, controls=(sel[j],))
        gates += [g.inverse() for g in reversed(route)]
    init = "0" * (big_m - 1) + "1" + "01" + "1" + "0" * k
    circ = QuantumCircuit(n, len(init), init, tuple(gates), ((pair[0], 0), (pair[1], 1)), name="energy-test")
    c_thr = 1 - (m + a) / (2 * big_m)
    s_thr = 1 - (m + b) / (2 * big_m)
    meta = {"m": m, "M": big_m, "n_wires": circ.n_wires, "a": a, "b": b, "ancilla_ones": circ.ancilla_ones}
    return ReductionArtifact("wlh2wpcsat", circ, k, k, (c_thr, s_thr), "cs", meta)


def expected_acceptance(H: LocalHamiltonian, energy: float) -> float:
    big_m = 1 << max(0, math.ceil(math.log2(H.m)))
    return 1 - (H.m + energy) / (2 * big_m)
