"""Sparse batches of computational-basis states.

A batch is three parallel arrays: integer keys (basis states), column ids
(which input each amplitude belongs to) and complex amplitudes.  Gates act on
keys through :func:`kernels.expand_local`; duplicates are merged afterwards.
"""
from __future__ import annotations

import numpy as np

from . import kernels

MAX_KEY_WIRES = 62


def check_width(n_wires: int) -> None:
    if n_wires > MAX_KEY_WIRES:
        raise ValueError(f"{n_wires} wires exceed the {MAX_KEY_WIRES}-wire limit of 64-bit keys")


def shifts_of(wires, n_wires: int) -> np.ndarray:
    return np.array([n_wires - 1 - w for w in wires], dtype=np.int64)


def control_mask(controls, polarities, n_wires: int) -> tuple[int, int]:
    mask = 0
    value = 0
    for w, p in zip(controls, polarities):
        bit = 1 << (n_wires - 1 - w)
        mask |= bit
        if p:
            value |= bit
    return mask, value


def merge(keys, cols, amps, tol: float = 0.0):
    """Sum amplitudes sharing a (col, key) pair and drop entries with |amp| <= tol."""
    if len(keys) == 0:
        return keys, cols, amps
    order = np.lexsort((keys, cols))
    keys = keys[order]
    cols = cols[order]
    amps = amps[order]
    start = np.ones(len(keys), dtype=bool)
    start[1:] = (keys[1:] != keys[:-1]) | (cols[1:] != cols[:-1])
    idx = np.flatnonzero(start)
    amps = np.add.reduceat(amps, idx)
    keys = keys[idx]
    cols = cols[idx]
    keep = np.abs(amps) > tol
    return keys[keep], cols[keep], amps[keep]


def apply_local(keys, cols, amps, n_wires, targets, matrix, controls=(), polarities=(), tol=1e-15):
    shifts = shifts_of(targets, n_wires)
    cmask, cval = control_mask(controls, polarities, n_wires)
    k, c, a = kernels.expand_local(keys, cols, amps, shifts, cmask, cval, matrix)
    return merge(k, c, a, tol)


def pattern_mask(pairs, n_wires: int) -> tuple[int, int]:
    """Mask/value for a sequence of (wire, bit) pairs."""
    pairs = list(pairs)
    return control_mask([w for w, _ in pairs], [v for _, v in pairs], n_wires)
