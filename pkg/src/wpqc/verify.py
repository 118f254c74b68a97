"""Numerical oracles tying reduction outputs back to their source instances.

Every check is an exact-numerics comparison: simulated acceptance against a
closed-form prediction, sector ground energies against thresholds, or
operator identities evaluated in the weight sector.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .circuit import QuantumCircuit, weft_of
from .hamiltonian import LocalHamiltonian, LocalTerm, energies_by_label, energy_expectation
from .sparse import MAX_KEY_WIRES
from .simulator import accepted_amplitude_matrix, acceptance_probability
from .weightspace import SectorState, min_energy_in_sector, subspace_dim

FORMULA_TOL = 1e-9
UNITARY_TOL = 1e-10
COMMUTE_TOL = 1e-10
DEFAULT_MAX_DIM = 4096


# report ---------------------------------------------------------------------


@dataclass(frozen=True)
class Residual:
    """One comparison; ``relation`` is 'eq', 'le' (observed <= expected) or 'ge'."""

    name: str
    expected: float
    observed: float
    tol: float
    relation: str = "eq"
    formula: str = ""

    @property
    def value(self) -> float:
        if self.relation == "eq":
            return abs(self.observed - self.expected)
        if self.relation == "le":
            return max(0.0, self.observed - self.expected)
        return max(0.0, self.expected - self.observed)

    @property
    def ok(self) -> bool:
        return bool(self.value <= self.tol)

    def to_dict(self) -> dict:
        return {"name": self.name, "expected": self.expected, "observed": self.observed, "tol": self.tol,
                "relation": self.relation, "formula": self.formula, "residual": self.value, "ok": self.ok}


@dataclass
class VerificationReport:
    instance_id: str
    step: str
    residuals: list[Residual] = field(default_factory=list)
    info: dict = field(default_factory=dict)
    source_verdict: str | None = None
    target_verdict: str | None = None
    partial: bool = False
    notes: list[str] = field(default_factory=list)

    @property
    def verdict(self) -> str:
        return "pass" if all(r.ok for r in self.residuals) else "fail"

    @property
    def failures(self) -> list[Residual]:
        return [r for r in self.residuals if not r.ok]

    def add(self, name, expected, observed, tol=FORMULA_TOL, relation="eq", formula="") -> None:
        self.residuals.append(Residual(name, float(expected), float(observed), float(tol), relation, formula))

    def add_flag(self, name: str, ok: bool, formula: str = "") -> None:
        self.add(name, 1.0, 1.0 if ok else 0.0, 0.0, "eq", formula)

    def skip(self, why: str) -> None:
        self.partial = True
        self.notes.append(why)

    def to_dict(self) -> dict:
        return {"instance_id": self.instance_id, "step": self.step, "verdict": self.verdict,
                "source_verdict": self.source_verdict, "target_verdict": self.target_verdict,
                "partial": self.partial, "notes": list(self.notes), "info": dict(self.info),
                "residuals": [r.to_dict() for r in self.residuals]}


# sum versus product ---------------------------------------------------------


@dataclass(frozen=True)
class SumProdResult:
    lower: np.ndarray
    product: np.ndarray
    upper: np.ndarray
    violation: float
    ok: bool


def _scalar_bounds(x: np.ndarray):
    x = np.asarray(x, dtype=float)
    m = x.shape[-1]
    return 1 - x.sum(-1), np.prod(1 - x, axis=-1), 1 - x.sum(-1) / m


def sum_prod_check(values, tol: float = 1e-12) -> SumProdResult:
    """Check 1 - sum M_j <= prod (I - M_j) <= I - mean M_j.

    ``values`` is a 1-D array of scalars in [0, 1] (or a stack of such rows)
    or a sequence of commuting Hermitian matrices with spectrum in [0, 1].
    Matrices are reduced to scalars in a joint eigenbasis.
    """
    if isinstance(values, np.ndarray) and values.ndim <= 2 and values.dtype != object:
        x = np.atleast_1d(values).astype(float)
        if x.size and (x.min() < -tol or x.max() > 1 + tol):
            raise ValueError("scalar inputs must lie in [0, 1]")
        lo, pr, up = _scalar_bounds(x)
        viol = float(max(np.max(lo - pr, initial=0.0), np.max(pr - up, initial=0.0)))
        return SumProdResult(lo, pr, up, viol, viol <= tol)
    mats = [np.asarray(v, dtype=complex) for v in values]
    if not mats:
        raise ValueError("need at least one operator")
    d = mats[0].shape[0]
    for i, a in enumerate(mats):
        if np.abs(a - a.conj().T).max() > COMMUTE_TOL:
            raise ValueError(f"operator {i} is not Hermitian")
        for j in range(i):
            if np.abs(a @ mats[j] - mats[j] @ a).max() > COMMUTE_TOL:
                raise ValueError(f"operators {j} and {i} do not commute")
    # a generic combination separates every joint eigenspace
    coef = np.random.default_rng(0).normal(size=len(mats))
    _, basis = np.linalg.eigh(sum(c * a for c, a in zip(coef, mats)))
    diag = np.array([np.real(np.diag(basis.conj().T @ a @ basis)) for a in mats]).T
    off = max(np.abs(basis.conj().T @ a @ basis - np.diag(np.diag(basis.conj().T @ a @ basis))).max() for a in mats)
    if off > 1e-8:
        raise ValueError("no joint eigenbasis found")
    if diag.min() < -tol or diag.max() > 1 + tol:
        raise ValueError("operators must satisfy 0 <= M <= I")
    eye = np.eye(d)
    lower = eye - sum(mats)
    product = eye.astype(complex)
    for a in mats:
        product = product @ (eye - a)
    upper = eye - sum(mats) / len(mats)
    lo, pr, up = _scalar_bounds(diag)
    viol = float(max(np.max(lo - pr, initial=0.0), np.max(pr - up, initial=0.0)))
    return SumProdResult(lower, product, upper, viol, viol <= tol)


# frustration freeness -------------------------------------------------------


@dataclass(frozen=True)
class FrustrationResult:
    frustration_free: bool
    energy: float
    above_b: bool | None


def frustration_free_check(projectors, k: int, n: int | None = None, b: float | None = None,
                           tol: float = FORMULA_TOL) -> FrustrationResult:
    """Sector-k ground energy of the projector sum compared with 0 and with ``b``."""
    if isinstance(projectors, LocalHamiltonian):
        H = projectors
    else:
        terms = tuple(projectors)
        if n is None:
            n = max((q for t in terms for q in t.support), default=-1) + 1
        H = LocalHamiltonian(max(n, 1), terms) if terms else None
    if H is None or H.m == 0:
        return FrustrationResult(True, 0.0, None if b is None else 0.0 >= b)
    for i, t in enumerate(H.terms):
        if not t.is_projector():
            raise ValueError(f"term {i} is not a projector")
    e, _ = min_energy_in_sector(H, k)
    return FrustrationResult(bool(e <= tol), float(e), None if b is None else bool(e >= b - tol))


# helpers --------------------------------------------------------------------


def weight_leakage(c: QuantumCircuit) -> float:
    """Largest weight-changing matrix entry over all gates (0 for weight-preserving circuits)."""
    worst = 0.0
    for g in c.gates:
        if g.is_measure or g.kind == "projector_phase":
            continue
        if g.kind == "fanout":
            worst = max(worst, 1.0 if g.targets else 0.0)
            continue
        s = len(g.targets)
        w = np.array([bin(b).count("1") for b in range(1 << s)])
        mask = w[:, None] != w[None, :]
        if mask.any():
            worst = max(worst, float(np.abs(g.matrix[mask]).max()))
    return worst


def _fits(c: QuantumCircuit) -> bool:
    return c.n_wires <= MAX_KEY_WIRES


def acceptance_operator(c: QuantumCircuit, k: int) -> np.ndarray:
    """Dense Gram matrix A^dag A with A the accepted-amplitude map on weight-k witnesses."""
    _, a = accepted_amplitude_matrix(c, k)
    return (a.conj().T @ a).toarray()


def _energy_verdict(e: float, a: float, b: float, tol: float = FORMULA_TOL) -> str:
    if e <= a + tol:
        return "yes"
    if e >= b - tol:
        return "no"
    return "outside-promise"


def _accept_verdict(p: float, c: float, s: float, tol: float = FORMULA_TOL) -> str:
    if p >= c - tol:
        return "yes"
    if p <= s + tol:
        return "no"
    return "outside-promise"


def _sector_operator(H: LocalHamiltonian, k: int) -> np.ndarray:
    from .weightspace import restrict_operator

    return restrict_operator(H, H.n, k, dense=True).to_dense()


def _random_witnesses(n: int, k: int, count: int, rng: np.random.Generator) -> list[SectorState]:
    return [SectorState.random(n, k, rng) for _ in range(count)]


# per-step checks ------------------------------------------------------------


def _check_indset(rep, art, source, k, tol, max_dim, rng):
    edges = [tuple(e) for e in (source["edges"] if isinstance(source, dict) else source)]
    n = art.metadata["n"]
    H = art.instance
    if subspace_dim(n, k) > max_dim:
        rep.skip(f"sector dimension C({n},{k}) exceeds {max_dim}")
        return
    best = min((sum(1 for a, b in edges if a in s and b in s) for s in itertools.combinations(range(n), k)),
               default=0)
    e0, _ = min_energy_in_sector(H, k)
    rep.add("ground_energy", best, e0, tol, formula="min over k-sets of edges inside the set")
    rep.source_verdict = "yes" if best == 0 else "no"
    rep.target_verdict = _energy_verdict(e0, *art.thresholds, tol)
    rep.add_flag("verdict_match", rep.source_verdict == rep.target_verdict)


def _check_wlh(rep, art, H, k, tol, max_dim, rng):
    c = art.instance
    big_m = art.metadata["M"]
    m = H.m
    rep.add("weight_leakage", 0.0, weight_leakage(c), UNITARY_TOL, formula="weight-changing entries")
    if subspace_dim(H.n, k) > max_dim or not _fits(c):
        rep.skip("sector or register too large for simulation")
        return
    hk = _sector_operator(H, k)
    want = (1 - m / (2 * big_m)) * np.eye(len(hk)) - hk / (2 * big_m)
    got = acceptance_operator(c, k)
    rep.add("acceptance_operator", 0.0, np.abs(got - want).max(), tol, formula="1 - (m + H)/(2M) on the sector")
    for i, psi in enumerate(_random_witnesses(H.n, k, 3, rng)):
        e = energy_expectation(H, psi)
        p = acceptance_probability(c, psi).probability
        rep.add(f"acceptance[{i}]", 1 - (m + e) / (2 * big_m), p, tol, formula="1 - (m + <H>)/(2M)")
    e0 = float(np.linalg.eigvalsh(hk)[0])
    p_max = float(np.linalg.eigvalsh(got)[-1])
    rep.add("optimal_acceptance", 1 - (m + e0) / (2 * big_m), p_max, tol)
    rep.source_verdict = _energy_verdict(e0, art.metadata["a"], art.metadata["b"], tol)
    rep.target_verdict = _accept_verdict(p_max, *art.thresholds, tol)
    if rep.source_verdict != "outside-promise":
        rep.add_flag("verdict_match", rep.source_verdict == rep.target_verdict)


def _check_amplify(rep, art, c0, k, tol, max_dim, rng):
    from .reductions.qsvt import amplified_acceptance

    c1 = art.instance
    rep.add("weight_leakage", 0.0, weight_leakage(c1), UNITARY_TOL)
    if subspace_dim(c0.n_witness, k) > max_dim or not _fits(c1):
        rep.skip("sector or register too large for simulation")
        return
    m0 = acceptance_operator(c0, k)
    p, v = np.linalg.eigh(m0)
    p = np.clip(p, 0, 1)
    if art.metadata.get("m", 0) == 0:
        g = p
    else:
        g = amplified_acceptance(np.asarray(art.metadata["phases"]), p)
    want = (v * g) @ v.conj().T
    got = acceptance_operator(c1, k)
    rep.add("acceptance_operator", 0.0, np.abs(got - want).max(), max(tol, 1e-8),
            formula="polynomial applied to each singular value squared")
    c_in, s_in = art.metadata["input_thresholds"]
    rep.source_verdict = _accept_verdict(float(p[-1]), c_in, s_in, tol)
    p_max = float(np.linalg.eigvalsh(got)[-1])
    rep.target_verdict = _accept_verdict(p_max, *art.thresholds, tol)
    rep.info.update(source_optimum=float(p[-1]), target_optimum=p_max)
    if rep.source_verdict != "outside-promise":
        rep.add_flag("verdict_match", rep.source_verdict == rep.target_verdict)


def _check_grid(rep, art, c0, k, tol, max_dim, rng):
    from .reductions.clock import gate_incidence

    g = art.instance
    rep.add("max_incidence", 3, int(gate_incidence(g).max()), 0, "le", "gates per grid wire")
    rep.add("weight_leakage", 0.0, weight_leakage(g), UNITARY_TOL)
    if subspace_dim(c0.n_witness, k) > max_dim or not _fits(g):
        rep.skip("grid register too large for simulation")
        return
    rep.add("acceptance_operator", 0.0, np.abs(acceptance_operator(g, k) - acceptance_operator(c0, k)).max(), tol)


def _check_kitaev(rep, art, c, k, tol, max_dim, rng, witness=None):
    from .reductions.clock import history_state
    from .simulator import optimal_sector_witness

    H = art.instance
    t_steps = art.metadata["T"]
    expect_terms = c.n_ancilla + (1 if c.accept else 0) + t_steps + (t_steps + 1) * t_steps // 2 + c.n_wires
    rep.add("term_count", expect_terms, H.m, 0, formula="in + out + prop + clock pairs + state")
    if witness is None:
        if subspace_dim(c.n_witness, k) > max_dim or not _fits(c):
            rep.skip("no witness given and the source circuit is too large to optimize")
            return
        witness, _ = optimal_sector_witness(c, k)
    p_w = acceptance_probability(c, witness).probability
    if H.n > MAX_KEY_WIRES:
        rep.skip("history state exceeds the key width")
        return
    hist = history_state(c, witness)
    by = energies_by_label(H, hist)
    for label in ("in", "prop", "clock", "state"):
        rep.add(f"history_{label}", 0.0, by.get(label, 0.0), UNITARY_TOL)
    rep.add("history_out", (1 - p_w) / (t_steps + 1), by.get("out", 0.0), tol, formula="(1 - p)/(T + 1)")
    rep.info["witness_acceptance"] = p_w
    k_out = art.k_out
    if subspace_dim(H.n, k_out) > max_dim:
        rep.skip(f"sector dimension C({H.n},{k_out}) exceeds {max_dim}")
        return
    e0, _ = min_energy_in_sector(H, k_out)
    rep.add("ground_energy_bound", (1 - p_w) / (t_steps + 1), e0, tol, "le")
    rep.info["ground_energy"] = e0
    rep.info["gap_T3"] = e0 * t_steps**3
    rep.target_verdict = _energy_verdict(e0, *art.thresholds, tol)


def _check_weft1(rep, art, H, k, tol, max_dim, rng, witness=None):
    from .reductions.weft1 import group_product_acceptance

    c = art.instance
    groups = art.metadata["groups"]
    rep.add("weft", 1, weft_of(c), 0, "le")
    rep.add_flag("and_last", c.gates[-1].kind == "and")
    n_sel = art.metadata["n_groups"]
    covered = sorted(j for g in groups for j in g)
    rep.add_flag("groups_partition_terms", covered == list(range(H.m)), "every term in exactly one group")
    if covered != list(range(H.m)):
        return
    if witness is not None:
        f = group_product_acceptance(H, groups, witness)
        ew = energy_expectation(H, witness)
        if ew <= art.metadata["a"] + tol:
            rep.add("witness_formula_bound", art.thresholds[0], f, tol, "ge", "1 - a/N on a yes witness")
        rep.info.update(witness_formula=f, witness_energy=ew)
    if not _fits(c) or subspace_dim(H.n, k) > max_dim:
        rep.skip("verifier register too large for simulation")
        return
    for i, psi in enumerate(_random_witnesses(H.n, k, 3, rng) + ([witness] if witness is not None else [])):
        rep.add(f"acceptance[{i}]", group_product_acceptance(H, groups, psi),
                acceptance_probability(c, psi).probability, tol, formula="(1/N) sum_h <prod (I - H_j)>")
    e0, psi0 = min_energy_in_sector(H, k)
    a, b = art.metadata["a"], art.metadata["b"]
    rep.source_verdict = _energy_verdict(e0, a, b, tol)
    p0 = acceptance_probability(c, psi0).probability
    p_max = float(np.linalg.eigvalsh(acceptance_operator(c, k))[-1])
    rep.info.update(ground_energy=e0, ground_acceptance=p0, optimal_acceptance=p_max, n_groups=n_sel)
    if rep.source_verdict == "yes":
        rep.add("completeness", art.thresholds[0], p0, tol, "ge")
    elif rep.source_verdict == "no":
        rep.add("soundness", art.thresholds[1], p_max, tol, "le")
    rep.target_verdict = _accept_verdict(p_max, *art.thresholds, tol)
    if rep.source_verdict != "outside-promise":
        rep.add_flag("verdict_match", rep.source_verdict == rep.target_verdict)


def _check_mini(rep, art, mini, k, tol, max_dim, rng):
    from .reductions.mini import encode_state

    c = art.instance
    n = art.metadata["n"]
    rep.add("weight_leakage", 0.0, weight_leakage(c), UNITARY_TOL)
    dim = 1 << mini.n_witness
    if dim > max_dim or not _fits(c):
        rep.skip("mini circuit too large for exhaustive comparison")
        return
    worst = 0.0
    vecs = list(np.eye(dim))
    for _ in range(3):
        v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        vecs.append(v / np.linalg.norm(v))
    for v in vecs:
        want = acceptance_probability(mini, v).probability
        got = acceptance_probability(c, encode_state(v, k, n)).probability
        worst = max(worst, abs(got - want))
    rep.add("encoded_acceptance", 0.0, worst, tol, formula="encoded acceptance equals mini acceptance")
    if subspace_dim(c.n_witness, k) <= max_dim:
        best_mini = max(float(np.linalg.eigvalsh(acceptance_operator(mini, w))[-1]) for w in range(mini.n_witness + 1))
        best = float(np.linalg.eigvalsh(acceptance_operator(c, k))[-1])
        rep.add("optimal_acceptance", best_mini, best, tol, formula="cheating witnesses do not help")


def _check_sqw(rep, art, c, k, tol, max_dim, rng):
    from .reductions.lightcone import light_cone

    H = art.instance
    body = c.with_gates(c.gates[:-1])
    ok = all(set(H.terms[i].support) <= light_cone(body, w)[0] for i, w in enumerate(art.metadata["cones"]))
    rep.add_flag("support_in_cone", ok)
    rep.add_flag("projectors", all(t.is_projector() for t in H.terms))
    if subspace_dim(H.n, art.k_out) > max_dim or subspace_dim(c.n_witness, k) > max_dim or not _fits(c):
        rep.skip("instance too large for diagonalization")
        return
    ff = frustration_free_check(H, art.k_out)
    p_max = float(np.linalg.eigvalsh(acceptance_operator(c, k))[-1])
    rep.source_verdict = "yes" if p_max >= 1 - tol else "no"
    rep.target_verdict = "yes" if ff.frustration_free else "no"
    rep.info.update(ground_energy=ff.energy, optimal_acceptance=p_max)
    rep.add_flag("verdict_match", rep.source_verdict == rep.target_verdict)


def _check_reversible(rep, art, cc, k, tol, max_dim, rng):
    c = art.instance
    if cc.n_inputs > 16 or not _fits(c):
        rep.skip("too many inputs for exhaustive enumeration")
        return
    worst = 0.0
    for bits in itertools.product("01", repeat=cc.n_inputs):
        x = "".join(bits)
        worst = max(worst, abs(acceptance_probability(c, x).probability - cc.evaluate(x)))
    rep.add("truth_table", 0.0, worst, tol, formula="acceptance equals the Boolean value")


CHECKS = {
    "indset": _check_indset,
    "wlh2wpcsat": _check_wlh,
    "amplify": _check_amplify,
    "grid": _check_grid,
    "kitaev": _check_kitaev,
    "weft1": _check_weft1,
    "mini": _check_mini,
    "sqw2qsat": _check_sqw,
    "reversibilize": _check_reversible,
}


def verify_reduction(artifact, source, k: int, *, instance_id: str = "", tol: float = FORMULA_TOL,
                     max_dim: int = DEFAULT_MAX_DIM, seed: int = 0, witness=None) -> VerificationReport:
    """Compare a reduction output with its source instance.

    ``source`` is the input of the step (edge list, Hamiltonian, circuit or
    classical circuit).  Checks that need more than ``max_dim`` sector
    dimensions are skipped and the report is marked partial.
    """
    if artifact.step not in CHECKS:
        raise ValueError(f"no verifier for step {artifact.step!r}")
    rep = VerificationReport(instance_id or artifact.step, artifact.step)
    rep.info["thresholds"] = list(artifact.thresholds)
    rng = np.random.default_rng(seed)
    fn = CHECKS[artifact.step]
    if artifact.step in ("kitaev", "weft1"):
        fn(rep, artifact, source, k, tol, max_dim, rng, witness=witness)
    else:
        fn(rep, artifact, source, k, tol, max_dim, rng)
    return rep


# negative controls ----------------------------------------------------------


def drop_term(H: LocalHamiltonian, j: int) -> LocalHamiltonian:
    terms = tuple(t for i, t in enumerate(H.terms) if i != j)
    return LocalHamiltonian(H.n, terms, H.locality, H.clock_register, H.thresholds, dict(H.meta))


def replace_term(H: LocalHamiltonian, j: int, rng: np.random.Generator) -> LocalHamiltonian:
    """Swap term ``j`` for a random rank-1 projector on the same support."""
    t = H.terms[j]
    d = t.block.shape[0]
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    v /= np.linalg.norm(v)
    terms = list(H.terms)
    terms[j] = LocalTerm(t.support, np.outer(v, v.conj()), t.label)
    return LocalHamiltonian(H.n, tuple(terms), H.locality, H.clock_register, H.thresholds, dict(H.meta))


def corrupt_gate(c: QuantumCircuit, rng: np.random.Generator, index: int | None = None) -> tuple[QuantumCircuit, int]:
    """Replace one matrix gate by a random unitary on the same targets."""
    from dataclasses import replace

    cands = [i for i, g in enumerate(c.gates) if g.matrix is not None and not g.is_measure]
    if not cands:
        raise ValueError("circuit has no matrix gates")
    i = cands[int(rng.integers(len(cands)))] if index is None else index
    g = c.gates[i]
    d = g.matrix.shape[0]
    q, r = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
    u = q * (np.diag(r) / np.abs(np.diag(r)))
    gates = list(c.gates)
    gates[i] = replace(g, matrix=u, kind="unitary")
    return c.with_gates(gates), i


def random_projector_hamiltonian(rng: np.random.Generator, n: int, m: int, locality: int = 2,
                                 rank: int = 1) -> LocalHamiltonian:
    """Random rank-``rank`` projector terms on random supports."""
    terms = []
    d = 1 << locality
    for _ in range(m):
        sup = tuple(sorted(int(q) for q in rng.choice(n, locality, replace=False)))
        v, _ = np.linalg.qr(rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank)))
        terms.append(LocalTerm(sup, v @ v.conj().T, "proj"))
    return LocalHamiltonian(n, tuple(terms))


def random_hermitian_hamiltonian(rng: np.random.Generator, n: int, m: int, locality: int = 2) -> LocalHamiltonian:
    """Random terms with spectrum in [-1, 1]."""
    terms = []
    d = 1 << locality
    for _ in range(m):
        sup = tuple(sorted(int(q) for q in rng.choice(n, locality, replace=False)))
        a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        h = (a + a.conj().T) / 2
        h /= max(1.0, float(np.abs(np.linalg.eigvalsh(h)).max()))
        terms.append(LocalTerm(sup, h, "rand"))
    return LocalHamiltonian(n, tuple(terms))
