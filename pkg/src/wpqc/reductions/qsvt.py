"""Gap amplification by alternating projector phases (weight preserving).

Conventions.  For a verifier ``U`` with input projector ``Pi_in`` (ancillas in
their initial pattern) and accept projector ``Pi_acc`` the sequence

    U_Phi = F_1 F_2 ... F_m,   F_j = e^{i phi_{2j-1}(2 Pi_in - I)} U^dag e^{i phi_{2j}(2 Pi_acc - I)} U

acts on each singular vector of ``Pi_acc U Pi_in`` (singular value sigma) like
the 2x2 product  D(phi_1) R D(phi_2) R ... D(phi_2m) R  with
D(phi) = diag(e^{i phi}, e^{-i phi}) and R = [[sigma, r], [r, -sigma]],
r = sqrt(1 - sigma^2).  Its top-left entry is a polynomial P(sigma).  An
encoded control qubit running U_Phi and U_{-Phi} in superposition yields the
amplitude Re P(sigma), so a witness accepted with probability p by ``U`` is
accepted with probability (Re P(sqrt p))^2 by the amplified circuit.

The amplitude polynomial is G(p) = int_0^p Q^2 / int_0^1 Q^2, which is
monotone with G(0) = 0 and G(1) = 1; Q minimizes the weighted tail mass
outside the threshold window.  Phases are found in the standard reflection
("Wx") convention with symmetric phases and then mapped to the one above.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from numpy.polynomial import Legendre
from scipy.optimize import least_squares

from .. import circuit as C
from ..circuit import QuantumCircuit, check_weight_preserving
from ..wpcompile import HADAMARD
from .artifacts import ReductionArtifact

M_CAP_CONSTANT = 12.0
PHASE_TOL = 1e-11


class PhaseSolverError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class PhaseSequence:
    phases: np.ndarray  # length 2m
    polynomial: Legendre | None = None  # amplitude polynomial in p on [0, 1]

    def __post_init__(self):
        ph = np.asarray(self.phases, dtype=float)
        if len(ph) % 2:
            raise ValueError("phase sequences have even length")
        object.__setattr__(self, "phases", ph)

    @property
    def m(self) -> int:
        return len(self.phases) // 2


# scalar model ---------------------------------------------------------------


def scalar_amplitude(phases, sigma) -> np.ndarray:
    """Top-left entry of D(phi_1) R D(phi_2) R ... for each sigma."""
    sigma = np.atleast_1d(np.asarray(sigma, dtype=float))
    r = np.sqrt(np.clip(1 - sigma**2, 0, None))
    # row vector <0| pushed through the product from the left
    a = np.ones_like(sigma, dtype=complex)
    b = np.zeros_like(sigma, dtype=complex)
    for phi in phases:
        a, b = a * np.exp(1j * phi), b * np.exp(-1j * phi)
        a, b = a * sigma + b * r, a * r - b * sigma
    return a


def amplified_acceptance(phases, p) -> np.ndarray:
    """Acceptance of the amplified circuit on a witness accepted with probability p."""
    p = np.clip(np.asarray(p, dtype=float), 0, 1)
    return scalar_amplitude(phases, np.sqrt(p)).real ** 2


# polynomial design ----------------------------------------------------------


def _gram(q: int, lo: float, hi: float) -> np.ndarray:
    """Gram matrix of shifted Legendre polynomials P_i(2p - 1) on [lo, hi]."""
    if hi <= lo:
        return np.zeros((q + 1, q + 1))
    x, w = np.polynomial.legendre.leggauss(q + 2)
    p = lo + (hi - lo) * (x + 1) / 2
    w = w * (hi - lo) / 2
    vals = np.polynomial.legendre.legvander(2 * p - 1, q)
    return (vals * w[:, None]).T @ vals


def design_polynomial(c: float, s: float, eps: float, q: int) -> Legendre:
    """Monotone amplitude polynomial of degree 2q+1 in p."""
    w_low = 1 / math.sqrt(eps)
    w_high = 1 / (1 - math.sqrt(1 - eps))
    a = w_low * _gram(q, 0.0, s) + w_high * _gram(q, c, 1.0)
    b = _gram(q, 0.0, 1.0)
    vals, vecs = scipy.linalg.eigh(a, b)
    coef = vecs[:, 0]
    poly_q = Legendre(coef, domain=[0, 1])
    sq = poly_q * poly_q
    integral = sq.integ(lbnd=0)
    return integral / integral(1.0)


def polynomial_meets(g: Legendre, c: float, s: float, eps: float) -> bool:
    return g(c) ** 2 >= 1 - eps and g(s) ** 2 <= eps


def gap_measure(c: float, s: float) -> float:
    return max(math.sqrt(c) - math.sqrt(s), math.sqrt(1 - s) - math.sqrt(1 - c))


def m_cap(c: float, s: float, eps: float, constant: float = M_CAP_CONSTANT) -> int:
    return int(math.ceil(constant * math.log(1 / eps) / gap_measure(c, s))) + 1


def minimal_polynomial(c: float, s: float, eps: float, cap: int | None = None) -> Legendre:
    """Lowest-degree design polynomial meeting the thresholds."""
    cap = cap if cap is not None else m_cap(c, s, eps)
    q = 0
    while 2 * q + 1 <= cap:
        g = design_polynomial(c, s, eps, q)
        if polynomial_meets(g, c, s, eps):
            return g
        q += 1
    raise PhaseSolverError(f"gap too small: no polynomial of degree <= {cap} separates c={c} from s={s} at eps={eps}")


# phase factors --------------------------------------------------------------


def _wx_amplitude_and_jac(half, d: int, x: np.ndarray, need_jac: bool = True):
    """Re <0|U|0> and its derivatives for symmetric reflection-convention phases.

    U = e^{i psi_0 Z} prod_k W(x) e^{i psi_k Z} with psi_k = psi_{d-k};
    ``half`` holds psi_0 .. psi_{d/2}.
    """
    psi = np.concatenate([half, half[: d // 2][::-1]]) if d % 2 == 0 else np.concatenate([half, half[::-1]])
    n = len(x)
    r = np.sqrt(np.clip(1 - x**2, 0, None))
    w = np.empty((n, 2, 2), dtype=complex)
    w[:, 0, 0] = x
    w[:, 1, 1] = x
    w[:, 0, 1] = 1j * r
    w[:, 1, 0] = 1j * r

    def zrot(t):
        return np.array([np.exp(1j * t), np.exp(-1j * t)])

    # prefix row vectors <0| A_0 B_1 A_1 ... ; suffix column vectors ... A_d |0>
    pre = np.empty((d + 1, n, 2), dtype=complex)
    row = np.zeros((n, 2), dtype=complex)
    row[:, 0] = 1
    for k in range(d + 1):
        if k:
            row = np.einsum("ni,nij->nj", row, w)
        row = row * zrot(psi[k])[None, :]
        pre[k] = row
    amp = pre[d][:, 0]
    if not need_jac:
        return amp.real, None
    suf = np.empty((d + 1, n, 2), dtype=complex)
    col = np.zeros((n, 2), dtype=complex)
    col[:, 0] = 1
    for k in range(d, -1, -1):
        suf[k] = col  # product to the right of A_k, applied to |0>
        if k:
            col = np.einsum("nij,nj->ni", w, zrot(psi[k])[None, :] * col)
    # d/dpsi_k of <0| ... A_k ... |0> = pre_k . diag(i, -i) . suf_k
    dfull = np.einsum("kni,kni->kn", pre * np.array([1j, -1j])[None, None, :], suf)
    jac = np.zeros((n, len(half)))
    for k in range(d + 1):
        j = k if k <= d // 2 else d - k
        jac[:, j] += dfull[k].real
    return amp.real, jac


def solve_phases(poly: Legendre, tol: float = PHASE_TOL, max_nfev: int = 400) -> PhaseSequence:
    """Phase sequence whose scalar amplitude equals ``poly`` at every p."""
    m = poly.degree()
    d = 2 * m
    nh = d // 2 + 1
    j = np.arange(1, nh + 1)
    x = np.cos((2 * j - 1) * np.pi / (4 * nh))
    target = poly(x**2)
    x0 = np.zeros(nh)
    x0[0] = np.pi / 4

    def fun(h):
        return _wx_amplitude_and_jac(h, d, x, need_jac=False)[0] - target

    def jac(h):
        return _wx_amplitude_and_jac(h, d, x)[1]

    res = least_squares(fun, x0, jac=jac, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=max_nfev)
    half = res.x
    psi = np.concatenate([half, half[: d // 2][::-1]])
    phases = wx_to_projector_phases(psi)
    grid = np.linspace(0, 1, 4 * d + 21)
    err = np.abs(scalar_amplitude(phases, np.sqrt(grid)).real - poly(grid)).max()
    if err > tol:
        raise PhaseSolverError(f"phase solver reached error {err:.2e} after {res.nfev} evaluations (degree {m})")
    return PhaseSequence(phases, poly)


def wx_to_projector_phases(psi) -> np.ndarray:
    """Map reflection-convention phases psi_0..psi_d (d even) to phi_1..phi_d.

    The two products agree up to the sign (-1)^(d/2), which is absorbed by
    shifting phi_1 by pi when d/2 is odd.
    """
    psi = np.asarray(psi, dtype=float)
    d = len(psi) - 1
    phi = psi[:d] - np.pi / 2
    phi[0] = psi[0] + psi[d] - np.pi / 2
    if (d // 2) % 2:
        phi[0] += np.pi
    return phi


# circuit --------------------------------------------------------------------


def _reflection_pair(wires, bits, phi, flag):
    """e^{+i phi(2P-I)} on flag=0 and e^{-i phi(2P-I)} on flag=1."""
    return [
        C.projector_phase(wires, bits, phi, controls=(flag,), polarities=(0,)),
        C.projector_phase(wires, bits, -phi, controls=(flag,), polarities=(1,)),
    ]


def amplified_circuit(c: QuantumCircuit, seq: PhaseSequence) -> QuantumCircuit:
    n = c.n_wires
    p0, p1 = n, n + 1
    anc = tuple(range(c.n_witness, n))
    anc_bits = tuple(int(b) for b in c.ancilla_init)
    acc_w = tuple(w for w, _ in c.accept)
    acc_b = tuple(b for _, b in c.accept)
    u = c.unitary_gates()
    u_inv = c.inverse().gates
    gates = [C.hat(p0, p1, HADAMARD, label="encode")]
    ph = seq.phases
    for j in range(seq.m - 1, -1, -1):
        # F_j is applied right to left: U, accept phase, U^dag, input phase
        gates += list(u)
        gates += _reflection_pair(acc_w, acc_b, ph[2 * j + 1], p0)
        gates += list(u_inv)
        gates += _reflection_pair(anc, anc_bits, ph[2 * j], p0)
    gates.append(C.hat(p0, p1, HADAMARD, label="decode"))
    accept = ((p0, 0), (p1, 1)) + tuple(zip(anc, anc_bits))
    return QuantumCircuit(c.n_witness, c.n_ancilla + 2, c.ancilla_init + "01", tuple(gates), accept,
                          name=f"{c.name}+amplified")


def _solve_with_margin(c_thr: float, s_thr: float, eps: float, cap: int):
    """Retry on a target bounded away from 1 in magnitude.

    The solver stalls when the target touches |P| = 1.  Designing for eps/10
    and scaling by 1 - 0.4 eps still meets (1 - eps, eps); convergence is
    quick while the margin 0.4 eps stays above roughly 1e-5.
    """
    lam = 1.0 - 0.4 * eps
    poly = minimal_polynomial(c_thr, s_thr, eps / 10, cap) * lam
    if not polynomial_meets(poly, c_thr, s_thr, eps):
        raise PhaseSolverError("scaled polynomial misses the target thresholds")
    return poly, solve_phases(poly, max_nfev=2000), lam


def qsvt_amplify(c: QuantumCircuit, thresholds: tuple[float, float], eps: float,
                 cap_constant: float = M_CAP_CONSTANT, k: int = 0) -> ReductionArtifact:
    """Amplify a weight-preserving verifier to thresholds (1 - eps, eps)."""
    c_thr, s_thr = (float(v) for v in thresholds)
    if not 0 < eps < 0.5:
        raise ValueError("eps must lie in (0, 1/2)")
    if not c_thr > s_thr:
        raise ValueError("need c > s")
    if c.has_measurements:
        raise ValueError("amplification needs a measurement-free verifier")
    if not check_weight_preserving(c):
        raise ValueError("amplification needs a weight-preserving verifier")
    meta = {"eps": eps, "input_thresholds": (c_thr, s_thr), "m_cap": m_cap(c_thr, s_thr, eps, cap_constant)}
    if c_thr >= 1 - eps and s_thr <= eps:
        meta.update(m=0, achieved=(c_thr, s_thr))
        return ReductionArtifact("amplify", c, k, k, (c_thr, s_thr), "cs", meta)
    poly = minimal_polynomial(c_thr, s_thr, eps, meta["m_cap"])
    try:
        seq = solve_phases(poly)
        meta["scale"] = 1.0
    except PhaseSolverError:
        poly, seq, meta["scale"] = _solve_with_margin(c_thr, s_thr, eps, meta["m_cap"])
    circ = amplified_circuit(c, seq)
    achieved = (float(poly(c_thr) ** 2), float(poly(s_thr) ** 2))
    meta.update(m=seq.m, phases=seq.phases.tolist(), achieved=achieved, gap_measure=gap_measure(c_thr, s_thr))
    return ReductionArtifact("amplify", circ, k, k, (1 - eps, eps), "cs", meta)
