"""Independent set as a weighted local Hamiltonian problem."""
from __future__ import annotations

import numpy as np

from ..hamiltonian import LocalHamiltonian, LocalTerm
from .artifacts import ReductionArtifact

EDGE_PENALTY = np.diag([0.0, 0.0, 0.0, 1.0])


def indset_to_wlh(edges, k: int, n: int | None = None) -> ReductionArtifact:
    """One |11><11| penalty per edge; weight-k ground energy 0 iff an independent k-set exists.

    The spectrum on basis states counts edges inside the chosen set, so the
    no-instance energy is at least 1.
    """
    edges = [tuple(sorted((int(a), int(b)))) for a, b in edges]
    if any(a == b for a, b in edges):
        raise ValueError("graph has a self-loop")
    if len(set(edges)) != len(edges):
        raise ValueError("graph has repeated edges")
    if n is None:
        n = max((b for _, b in edges), default=-1) + 1
    if not 0 <= k <= n:
        raise ValueError(f"k={k} outside 0..{n}")
    terms = tuple(LocalTerm(e, EDGE_PENALTY, label="edge") for e in edges)
    H = LocalHamiltonian(n, terms, locality=2, thresholds=(0.0, 1.0))
    return ReductionArtifact("indset", H, k, k, (0.0, 1.0), "ab", {"n": n, "edges": edges})
