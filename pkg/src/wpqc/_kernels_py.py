"""Pure numpy implementations of the hot loops.

Bit convention shared by every kernel: wire ``w`` of an ``n``-wire register
lives at bit ``n - 1 - w`` of the integer key, so wire 0 is the most
significant bit.  Callers pass the bit shift of each wire, not the wire.
"""
from __future__ import annotations

import itertools
import math

import numpy as np

_BINOM = np.array([[math.comb(p, j) for j in range(64)] for p in range(64)], dtype=np.int64)


def expand_local(keys, cols, amps, shifts, cmask, cval, mat):
    """Apply a controlled local matrix to a sparse batch of basis states.

    Entries whose control bits do not match ``cval`` pass through untouched.
    The output is not merged; duplicate ``(col, key)`` pairs may appear.
    """
    keys = np.asarray(keys, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    amps = np.asarray(amps, dtype=np.complex128)
    shifts = np.asarray(shifts, dtype=np.int64)
    mat = np.asarray(mat, dtype=np.complex128)
    s = len(shifts)
    active = (keys & cmask) == cval
    out_k = [keys[~active]]
    out_c = [cols[~active]]
    out_a = [amps[~active]]
    k_act = keys[active]
    c_act = cols[active]
    a_act = amps[active]
    if s == 0:
        if mat[0, 0] != 0:
            out_k.append(k_act)
            out_c.append(c_act)
            out_a.append(a_act * mat[0, 0])
        return np.concatenate(out_k), np.concatenate(out_c), np.concatenate(out_a)
    tmask = 0
    for sh in shifts:
        tmask |= 1 << int(sh)
    local = np.zeros(len(k_act), dtype=np.int64)
    for j, sh in enumerate(shifts):
        local |= ((k_act >> sh) & 1) << (s - 1 - j)
    base = k_act & ~np.int64(tmask)
    deposit = np.zeros(1 << s, dtype=np.int64)
    for b in range(1 << s):
        v = 0
        for j, sh in enumerate(shifts):
            if (b >> (s - 1 - j)) & 1:
                v |= 1 << int(sh)
        deposit[b] = v
    for b_in in range(1 << s):
        sel = local == b_in
        if not sel.any():
            continue
        column = mat[:, b_in]
        nz = np.nonzero(column)[0]
        kb = base[sel]
        cb = c_act[sel]
        ab = a_act[sel]
        for b_out in nz:
            out_k.append(kb | deposit[b_out])
            out_c.append(cb)
            out_a.append(ab * column[b_out])
    return np.concatenate(out_k), np.concatenate(out_c), np.concatenate(out_a)


def rank_states(states, n):
    """Combinadic rank of each weight-k integer in ascending-value order."""
    states = np.asarray(states, dtype=np.int64)
    rank = np.zeros(len(states), dtype=np.int64)
    seen = np.zeros(len(states), dtype=np.int64)
    for p in range(n):
        bit = (states >> p) & 1
        seen += bit
        rank += bit * _BINOM[p, seen]
    return rank


def weight_states(n, k):
    """All n-bit integers of popcount k, ascending."""
    if k == 0:
        return np.zeros(1, dtype=np.int64)
    count = math.comb(n, k)
    flat = np.fromiter(
        itertools.chain.from_iterable(itertools.combinations(range(n), k)),
        dtype=np.int64,
        count=count * k,
    ).reshape(count, k)
    # itertools order is not value order
    values = (np.int64(1) << flat).sum(axis=1)
    values.sort()
    return values
