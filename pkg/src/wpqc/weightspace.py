"""Fixed-Hamming-weight sectors: indexing and restricted linear algebra.

Basis order inside a sector is ascending integer value of the bitstring with
qubit 0 as the leftmost (most significant) bit, so for ``n=4, k=2`` the basis
starts ``0011, 0101, 0110, 1001``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg
import scipy.sparse as sps

from . import kernels
from .sparse import MAX_KEY_WIRES

DENSE_EIG_MAX = 2048
DENSE_MATRIX_MAX = 4096
MAX_SECTOR_DIM = 400_000


class EigensolverError(RuntimeError):
    def __init__(self, message: str, iterations: int):
        super().__init__(message)
        self.iterations = iterations


def subspace_dim(n: int, k: int) -> int:
    """Number of weight-k bitstrings of length n."""
    if n < 0 or k < 0 or k > n:
        raise ValueError(f"invalid sector (n={n}, k={k})")
    return math.comb(n, k)


def _check_bits(x: str) -> None:
    if not x or set(x) - {"0", "1"}:
        raise ValueError(f"not a bitstring: {x!r}")


def rank_string(x: str) -> int:
    """Position of the bitstring ``x`` inside its weight sector."""
    _check_bits(x)
    n = len(x)
    powers = sorted(n - 1 - i for i, ch in enumerate(x) if ch == "1")
    return sum(math.comb(p, j + 1) for j, p in enumerate(powers))


def unrank_index(n: int, k: int, i: int) -> str:
    """Inverse of :func:`rank_string` for the (n, k) sector."""
    dim = subspace_dim(n, k)
    if not 0 <= i < dim:
        raise ValueError(f"index {i} outside sector of dimension {dim}")
    bits = ["0"] * n
    p = n - 1
    for j in range(k, 0, -1):
        while math.comb(p, j) > i:
            p -= 1
        i -= math.comb(p, j)
        bits[n - 1 - p] = "1"
        p -= 1
    return "".join(bits)


def bits_to_int(x: str) -> int:
    return int(x, 2) if x else 0


def int_to_bits(v: int, n: int) -> str:
    return format(v, f"0{n}b") if n else ""


@dataclass(frozen=True)
class BasisIndexer:
    n: int
    k: int

    def __post_init__(self):
        subspace_dim(self.n, self.k)

    @property
    def dim(self) -> int:
        return math.comb(self.n, self.k)

    @cached_property
    def states(self) -> np.ndarray:
        """Sector basis as integers, ascending."""
        if self.n > MAX_KEY_WIRES:
            raise ValueError(f"array paths support at most {MAX_KEY_WIRES} qubits")
        if self.dim > MAX_SECTOR_DIM:
            raise ValueError(f"sector dimension {self.dim} exceeds guard {MAX_SECTOR_DIM}")
        return kernels.weight_states(self.n, self.k)

    def rank(self, x) -> int:
        if isinstance(x, str):
            if len(x) != self.n or x.count("1") != self.k:
                raise ValueError(f"{x!r} is not in sector (n={self.n}, k={self.k})")
            return rank_string(x)
        return self.rank(int_to_bits(int(x), self.n))

    def unrank(self, i: int) -> str:
        return unrank_index(self.n, self.k, i)

    def rank_many(self, values: np.ndarray) -> np.ndarray:
        return kernels.rank_states(np.asarray(values, dtype=np.int64), self.n)


@dataclass(frozen=True, eq=False)
class SectorState:
    indexer: BasisIndexer
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != (self.indexer.dim,):
            raise ValueError(f"expected {self.indexer.dim} amplitudes, got {amps.shape}")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def n(self) -> int:
        return self.indexer.n

    @property
    def k(self) -> int:
        return self.indexer.k

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    @property
    def is_normalized(self) -> bool:
        return abs(self.norm - 1.0) <= 1e-12

    def normalized(self) -> SectorState:
        return SectorState(self.indexer, self.amplitudes / self.norm)

    @classmethod
    def basis(cls, x: str) -> SectorState:
        idx = BasisIndexer(len(x), x.count("1"))
        amps = np.zeros(idx.dim, dtype=np.complex128)
        amps[idx.rank(x)] = 1.0
        return cls(idx, amps)

    @classmethod
    def random(cls, n: int, k: int, rng: np.random.Generator) -> SectorState:
        idx = BasisIndexer(n, k)
        v = rng.normal(size=idx.dim) + 1j * rng.normal(size=idx.dim)
        return cls(idx, v / np.linalg.norm(v))

    def keys(self) -> np.ndarray:
        return self.indexer.states

    def to_dense(self) -> np.ndarray:
        """Embed into the 2^n vector (small n only)."""
        if self.n > 24:
            raise ValueError("dense embedding limited to 24 qubits")
        out = np.zeros(1 << self.n, dtype=np.complex128)
        out[self.indexer.states] = self.amplitudes
        return out

    @classmethod
    def from_dense(cls, vec: np.ndarray, k: int, tol: float = 1e-10) -> SectorState:
        vec = np.asarray(vec, dtype=np.complex128)
        n = int(round(math.log2(len(vec))))
        idx = BasisIndexer(n, k)
        amps = vec[idx.states]
        leak = np.linalg.norm(vec) ** 2 - np.linalg.norm(amps) ** 2
        if leak > tol:
            raise ValueError(f"state has weight {leak:.3e} outside sector k={k}")
        return cls(idx, amps)

    def overlap(self, other: SectorState) -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass(frozen=True, eq=False)
class SectorOperator:
    indexer: BasisIndexer
    matrix: object  # dense ndarray or scipy sparse matrix

    @property
    def dim(self) -> int:
        return self.indexer.dim

    @property
    def is_dense(self) -> bool:
        return isinstance(self.matrix, np.ndarray)

    def to_dense(self) -> np.ndarray:
        if self.is_dense:
            return self.matrix
        return self.matrix.toarray()

    def hermiticity_error(self) -> float:
        diff = self.matrix - self.matrix.conj().T
        if sps.issparse(diff):
            return float(abs(diff).max()) if diff.nnz else 0.0
        return float(np.abs(diff).max()) if diff.size else 0.0

    @property
    def is_hermitian(self) -> bool:
        return self.hermiticity_error() <= 1e-12

    def matvec(self, v: np.ndarray) -> np.ndarray:
        return self.matrix @ v

    def expectation(self, state: SectorState) -> complex:
        return complex(np.vdot(state.amplitudes, self.matvec(state.amplitudes)))

    def __add__(self, other: SectorOperator) -> SectorOperator:
        if isinstance(other, SectorOperator):
            return SectorOperator(self.indexer, self.matrix + other.matrix)
        return NotImplemented


def _same_weight_mask(block: np.ndarray) -> np.ndarray:
    s = int(round(math.log2(block.shape[0])))
    w = np.array([bin(b).count("1") for b in range(1 << s)])
    return block * (w[:, None] == w[None, :])


def sector_triplets(indexer: BasisIndexer, support, block: np.ndarray):
    """COO triplets of one local term restricted to the sector."""
    states = indexer.states
    n = indexer.n
    block = _same_weight_mask(np.asarray(block, dtype=np.complex128))
    shifts = np.array([n - 1 - q for q in support], dtype=np.int64)
    cols = np.arange(len(states), dtype=np.int64)
    ones = np.ones(len(states), dtype=np.complex128)
    keys, cols, vals = kernels.expand_local(states, cols, ones, shifts, 0, 0, block)
    rows = indexer.rank_many(keys)
    return rows, cols, vals


def _term_pairs(op):
    terms = getattr(op, "terms", op)
    if hasattr(terms, "support") and hasattr(terms, "block"):
        terms = [terms]
    grouped: dict[tuple, np.ndarray] = {}
    for t in terms:
        sup = tuple(int(q) for q in t.support)
        blk = np.asarray(t.block, dtype=np.complex128)
        if sup in grouped:
            grouped[sup] = grouped[sup] + blk
        else:
            grouped[sup] = blk
    return grouped.items()


def restrict_operator(op, n: int, k: int, dense: bool | None = None) -> SectorOperator:
    """Matrix of ``op`` between weight-k basis states.

    ``op`` is either a dense 2^n x 2^n array or a collection of local terms
    (anything exposing ``support`` and ``block``, or an object with a
    ``terms`` attribute).  Local terms never touch the full space.
    """
    indexer = BasisIndexer(n, k)
    dim = indexer.dim
    if dense is None:
        dense = dim <= DENSE_MATRIX_MAX
    if isinstance(op, np.ndarray):
        if op.shape != (1 << n, 1 << n):
            raise ValueError(f"dense operator must be {1 << n}x{1 << n}")
        st = indexer.states
        sub = np.asarray(op, dtype=np.complex128)[np.ix_(st, st)]
        return SectorOperator(indexer, sub if dense else sps.csr_matrix(sub))
    rows, cols, vals = [], [], []
    for support, block in _term_pairs(op):
        if any(q < 0 or q >= n for q in support):
            raise ValueError(f"term support {support} outside {n} qubits")
        r, c, v = sector_triplets(indexer, support, block)
        rows.append(r)
        cols.append(c)
        vals.append(v)
    if rows:
        r = np.concatenate(rows)
        c = np.concatenate(cols)
        v = np.concatenate(vals)
    else:
        r = c = np.zeros(0, dtype=np.int64)
        v = np.zeros(0, dtype=np.complex128)
    mat = sps.coo_matrix((v, (r, c)), shape=(dim, dim)).tocsr()
    mat.sum_duplicates()
    return SectorOperator(indexer, mat.toarray() if dense else mat)


def lanczos_lowest(matvec, dim: int, tol: float = 1e-10, max_iter: int | None = None, seed: int = 0):
    """Lowest eigenpair of a Hermitian operator by Lanczos with full reorthogonalization."""
    max_iter = min(dim, max_iter or 800)
    rng = np.random.default_rng(seed)
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    basis = np.zeros((max_iter + 1, dim), dtype=np.complex128)
    basis[0] = v / np.linalg.norm(v)
    alpha: list[float] = []
    beta: list[float] = []
    for j in range(max_iter):
        w = matvec(basis[j])
        a = float(np.vdot(basis[j], w).real)
        w = w - a * basis[j]
        if j:
            w = w - beta[-1] * basis[j - 1]
        for _ in range(2):
            w = w - basis[: j + 1].T @ (basis[: j + 1].conj() @ w)
        b = float(np.linalg.norm(w))
        alpha.append(a)
        last = j == max_iter - 1
        if (j + 1) % 10 == 0 or b < 1e-13 or last:
            theta, vecs = scipy.linalg.eigh_tridiagonal(np.array(alpha), np.array(beta))
            resid = b * abs(vecs[-1, 0])
            if resid <= tol * max(1.0, abs(theta[0])) or b < 1e-13 or j + 1 == dim:
                x = basis[: j + 1].T @ vecs[:, 0]
                return float(theta[0]), x / np.linalg.norm(x), j + 1
        if last:
            break
        beta.append(b)
        basis[j + 1] = w / b
    raise EigensolverError(f"Lanczos did not converge after {max_iter} iterations", max_iter)


def lowest_eigenpair(op: SectorOperator, method: str = "auto", **kw) -> tuple[float, SectorState]:
    dim = op.dim
    if method == "auto":
        method = "dense" if dim <= DENSE_EIG_MAX else "lanczos"
    if method == "dense":
        vals, vecs = np.linalg.eigh(op.to_dense())
        return float(vals[0]), SectorState(op.indexer, vecs[:, 0])
    if method != "lanczos":
        raise ValueError(f"unknown method {method!r}")
    energy, vec, _ = lanczos_lowest(op.matvec, dim, **kw)
    return energy, SectorState(op.indexer, vec)


def min_energy_in_sector(H, k: int, method: str = "auto", **kw) -> tuple[float, SectorState]:
    """Ground energy of ``H`` restricted to weight ``k`` and one ground state."""
    dim = subspace_dim(H.n, k)
    dense = method == "dense" or (method == "auto" and dim <= DENSE_EIG_MAX)
    op = restrict_operator(H, H.n, k, dense=dense)
    return lowest_eigenpair(op, method, **kw)
