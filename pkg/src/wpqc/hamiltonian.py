"""Local Hamiltonians: data model, validation, sparsity classes, term coloring."""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .weightspace import SectorState

SPARSITY_BOUND = 16
MAX_TERMS = 200_000


@dataclass(frozen=True, eq=False)
class LocalTerm:
    """Dense block on ``support``; the first support qubit is the most significant local bit."""

    support: tuple[int, ...]
    block: np.ndarray
    label: str = ""

    def __post_init__(self):
        sup = tuple(int(q) for q in self.support)
        if len(set(sup)) != len(sup):
            raise ValueError(f"repeated qubit in support {sup}")
        blk = np.array(self.block, dtype=np.complex128)
        d = 1 << len(sup)
        if blk.shape != (d, d):
            raise ValueError(f"block shape {blk.shape} does not match support of size {len(sup)}")
        blk.setflags(write=False)
        object.__setattr__(self, "support", sup)
        object.__setattr__(self, "block", blk)

    @property
    def locality(self) -> int:
        return len(self.support)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.block, 2)) if self.block.size else 0.0

    @property
    def hermitian_error(self) -> float:
        return float(np.abs(self.block - self.block.conj().T).max())

    def is_projector(self, tol: float = 1e-10) -> bool:
        b = self.block
        return self.hermitian_error <= tol and float(np.abs(b @ b - b).max()) <= tol


@dataclass(frozen=True, eq=False)
class LocalHamiltonian:
    n: int
    terms: tuple[LocalTerm, ...]
    locality: int | None = None
    clock_register: tuple[int, ...] | None = None
    thresholds: tuple[float, float] | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        terms = tuple(self.terms)
        if len(terms) > MAX_TERMS:
            raise ValueError(f"{len(terms)} terms exceed the cap of {MAX_TERMS}")
        for i, t in enumerate(terms):
            if any(q < 0 or q >= self.n for q in t.support):
                raise ValueError(f"term {i} support {t.support} outside {self.n} qubits")
        object.__setattr__(self, "terms", terms)
        if self.locality is None:
            object.__setattr__(self, "locality", max((t.locality for t in terms), default=0))
        if self.clock_register is not None:
            object.__setattr__(self, "clock_register", tuple(int(q) for q in self.clock_register))
        if self.thresholds is not None:
            a, b = (float(v) for v in self.thresholds)
            if not b > a:
                raise ValueError(f"thresholds need b > a, got a={a}, b={b}")
            object.__setattr__(self, "thresholds", (a, b))

    @property
    def m(self) -> int:
        return len(self.terms)

    def dense(self) -> np.ndarray:
        """Full 2^n matrix (small n only)."""
        if self.n > 12:
            raise ValueError("dense Hamiltonians are limited to 12 qubits")
        dim = 1 << self.n
        out = np.zeros((dim, dim), dtype=np.complex128)
        keys = np.arange(dim, dtype=np.int64)
        for t in self.terms:
            k, c, a = _expand(t, keys, keys, np.ones(dim, dtype=complex), self.n)
            np.add.at(out, (k, c), a)
        return out

    def subset(self, indices) -> LocalHamiltonian:
        return LocalHamiltonian(self.n, tuple(self.terms[i] for i in indices), self.locality, self.clock_register, None)


def _expand(term: LocalTerm, keys, cols, amps, n):
    shifts = np.array([n - 1 - q for q in term.support], dtype=np.int64)
    return kernels.expand_local(keys, cols, amps, shifts, 0, 0, term.block)


# validation -----------------------------------------------------------------


@dataclass(frozen=True)
class TermReport:
    index: int
    locality: int
    norm: float
    hermitian_error: float
    projector: bool
    norm_ok: bool
    hermitian_ok: bool
    locality_ok: bool

    @property
    def ok(self) -> bool:
        return self.norm_ok and self.hermitian_ok and self.locality_ok


@dataclass(frozen=True)
class InstanceReport:
    terms: tuple[TermReport, ...]
    thresholds_ok: bool = True

    @property
    def ok(self) -> bool:
        return self.thresholds_ok and all(t.ok for t in self.terms)

    @property
    def all_projectors(self) -> bool:
        return all(t.projector for t in self.terms)

    @property
    def failures(self) -> list[int]:
        return [t.index for t in self.terms if not t.ok]


def validate_instance(H: LocalHamiltonian, norm_tol: float = 1e-9, herm_tol: float = 1e-12) -> InstanceReport:
    """Per-term norm, Hermiticity and locality verdicts."""
    reports = []
    for i, t in enumerate(H.terms):
        herm = t.hermitian_error
        reports.append(
            TermReport(
                index=i,
                locality=t.locality,
                norm=t.norm,
                hermitian_error=herm,
                projector=t.is_projector(),
                norm_ok=t.norm <= 1 + norm_tol,
                hermitian_ok=herm <= herm_tol,
                locality_ok=t.locality <= H.locality,
            )
        )
    ok_thr = H.thresholds is None or H.thresholds[1] > H.thresholds[0]
    return InstanceReport(tuple(reports), ok_thr)


# sparsity -------------------------------------------------------------------


@dataclass(frozen=True)
class SparsityResult:
    kind: str  # "spatially-sparse", "almost-spatially-sparse" or "neither"
    max_degree: int  # over terms not confined to the clock register
    max_degree_all: int
    bound: int


def _degrees(terms, n) -> int:
    deg = np.zeros(n, dtype=np.int64)
    for t in terms:
        for q in t.support:
            deg[q] += 1
    return int(deg.max()) if n else 0


def _clock_only(t: LocalTerm, clock: set[int]) -> bool:
    return bool(clock) and set(t.support) <= clock


def classify_sparsity(H: LocalHamiltonian, clock_register=None, bound: int = SPARSITY_BOUND) -> SparsityResult:
    """Degree statistics and sparsity class relative to an optional clock register."""
    reg = clock_register if clock_register is not None else H.clock_register
    clock = set(reg or ())
    deg_all = _degrees(H.terms, H.n)
    deg = _degrees([t for t in H.terms if not _clock_only(t, clock)], H.n)
    if deg_all <= bound:
        kind = "spatially-sparse"
    elif clock and deg <= bound:
        kind = "almost-spatially-sparse"
    else:
        kind = "neither"
    return SparsityResult(kind, deg, deg_all, bound)


# coloring -------------------------------------------------------------------


@dataclass(frozen=True)
class ColoringResult:
    """Groups of pairwise-disjoint terms plus the group of clock-only terms."""

    groups: tuple[tuple[int, ...], ...]
    clock_group: tuple[int, ...] = ()

    @property
    def n_color(self) -> int:
        return len(self.groups)

    @property
    def all_groups(self) -> tuple[tuple[int, ...], ...]:
        return self.groups + ((self.clock_group,) if self.clock_group else ())

    @property
    def n_groups(self) -> int:
        return len(self.all_groups)


def color_terms(H: LocalHamiltonian, clock_register=None) -> ColoringResult:
    """Greedy coloring of the term conflict graph (largest supports first)."""
    reg = clock_register if clock_register is not None else H.clock_register
    clock = set(reg or ())
    clock_terms = [i for i, t in enumerate(H.terms) if _clock_only(t, clock)]
    rest = [i for i, t in enumerate(H.terms) if not _clock_only(t, clock)]
    order = sorted(rest, key=lambda i: (-H.terms[i].locality, i))
    # colors already present on each qubit
    used: dict[int, set[int]] = defaultdict(set)
    color: dict[int, int] = {}
    for i in order:
        taken = set().union(*(used[q] for q in H.terms[i].support)) if H.terms[i].support else set()
        c = 0
        while c in taken:
            c += 1
        color[i] = c
        for q in H.terms[i].support:
            used[q].add(c)
    n_color = max(color.values(), default=-1) + 1
    groups = tuple(tuple(sorted(i for i in rest if color[i] == c)) for c in range(n_color))
    return ColoringResult(groups, tuple(clock_terms))


# expectations ---------------------------------------------------------------


def sparse_state(state):
    from .simulator import FullState

    if isinstance(state, SectorState):
        keys = state.indexer.states
        return state.n, keys, state.amplitudes
    if isinstance(state, FullState):
        keys = np.flatnonzero(state.amplitudes).astype(np.int64)
        return state.n, keys, state.amplitudes[keys]
    raise TypeError(f"unsupported state type {type(state).__name__}")


def sparse_term_expectation(term: LocalTerm, n: int, keys: np.ndarray, amps: np.ndarray) -> complex:
    """<psi|T|psi> for a state given by sorted keys and amplitudes."""
    out_k, out_c, out_a = _expand(term, keys, np.arange(len(keys), dtype=np.int64), amps, n)
    pos = np.searchsorted(keys, out_k)
    pos = np.minimum(pos, len(keys) - 1)
    hit = keys[pos] == out_k
    return complex(np.sum(np.conj(amps[pos[hit]]) * out_a[hit]))


def apply_term(term: LocalTerm, n: int, keys: np.ndarray, amps: np.ndarray):
    """T|psi> for a sparse state; returns merged (keys, amps)."""
    from .sparse import merge

    k, c, a = _expand(term, keys, np.zeros(len(keys), dtype=np.int64), amps, n)
    k, _, a = merge(k, c, a, 0.0)
    return k, a


def term_energies(H: LocalHamiltonian, state) -> np.ndarray:
    n, keys, amps = sparse_state(state)
    if n != H.n:
        raise ValueError(f"state has {n} qubits, Hamiltonian has {H.n}")
    order = np.argsort(keys)
    keys, amps = keys[order], amps[order]
    return np.array([sparse_term_expectation(t, n, keys, amps).real for t in H.terms])


def energy_expectation(H: LocalHamiltonian, state) -> float:
    """Sum of term expectations on a sector or full state."""
    return float(term_energies(H, state).sum())


def energies_by_label(H: LocalHamiltonian, state) -> dict[str, float]:
    out: dict[str, float] = defaultdict(float)
    for t, e in zip(H.terms, term_energies(H, state)):
        out[t.label] += float(e)
    return dict(out)


def projector_term(support, bits, label: str = "") -> LocalTerm:
    """|bits><bits| on ``support``."""
    s = len(support)
    blk = np.zeros((1 << s, 1 << s))
    idx = int("".join(str(b) for b in bits), 2) if s else 0
    blk[idx, idx] = 1.0
    return LocalTerm(tuple(support), blk, label)
