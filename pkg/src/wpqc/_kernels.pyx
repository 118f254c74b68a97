# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the sparse-state kernels (see _kernels_py)."""
import math

import numpy as np
cimport numpy as cnp
from libc.stdint cimport int64_t, uint64_t

cnp.import_array()

cdef extern int __builtin_ctzll(unsigned long long x) nogil

cdef int64_t[:, ::1] _BINOM = np.array(
    [[math.comb(p, j) for j in range(65)] for p in range(64)], dtype=np.int64
)


def expand_local(keys, cols, amps, shifts, int64_t cmask, int64_t cval, mat):
    cdef const int64_t[::1] k_in = np.ascontiguousarray(keys, dtype=np.int64)
    cdef const int64_t[::1] c_in = np.ascontiguousarray(cols, dtype=np.int64)
    cdef const double complex[::1] a_in = np.ascontiguousarray(amps, dtype=np.complex128)
    cdef const int64_t[::1] sh = np.ascontiguousarray(shifts, dtype=np.int64)
    cdef const double complex[:, ::1] m = np.ascontiguousarray(mat, dtype=np.complex128)
    cdef Py_ssize_t n = k_in.shape[0]
    cdef int s = sh.shape[0]
    cdef int dim = 1 << s
    cdef Py_ssize_t i, out = 0
    cdef int j, b_in, b_out
    cdef int64_t key, base, tmask = 0
    cdef double complex v, a

    cdef int64_t[::1] deposit = np.zeros(dim, dtype=np.int64)
    for b_out in range(dim):
        for j in range(s):
            if (b_out >> (s - 1 - j)) & 1:
                deposit[b_out] |= (<int64_t>1) << sh[j]
    for j in range(s):
        tmask |= (<int64_t>1) << sh[j]

    # nonzero pattern of each column, computed once
    cdef int[:, ::1] nz = np.zeros((dim, dim), dtype=np.intc)
    cdef int[::1] nnz = np.zeros(dim, dtype=np.intc)
    for b_in in range(dim):
        for b_out in range(dim):
            if m[b_out, b_in] != 0:
                nz[b_in, nnz[b_in]] = b_out
                nnz[b_in] += 1

    cdef Py_ssize_t cap = 0
    for i in range(n):
        key = k_in[i]
        if (key & cmask) != cval:
            cap += 1
        else:
            b_in = 0
            for j in range(s):
                b_in |= <int>(((key >> sh[j]) & 1) << (s - 1 - j))
            cap += nnz[b_in]

    res_k = np.empty(cap, dtype=np.int64)
    res_c = np.empty(cap, dtype=np.int64)
    res_a = np.empty(cap, dtype=np.complex128)
    cdef int64_t[::1] ok = res_k
    cdef int64_t[::1] oc = res_c
    cdef double complex[::1] oa = res_a
    with nogil:
        for i in range(n):
            key = k_in[i]
            if (key & cmask) != cval:
                ok[out] = key
                oc[out] = c_in[i]
                oa[out] = a_in[i]
                out += 1
                continue
            b_in = 0
            for j in range(s):
                b_in |= <int>(((key >> sh[j]) & 1) << (s - 1 - j))
            base = key & ~tmask
            a = a_in[i]
            for j in range(nnz[b_in]):
                b_out = nz[b_in, j]
                ok[out] = base | deposit[b_out]
                oc[out] = c_in[i]
                oa[out] = a * m[b_out, b_in]
                out += 1
    return res_k, res_c, res_a


def rank_states(states, int n):
    cdef const int64_t[::1] st = np.ascontiguousarray(states, dtype=np.int64)
    cdef Py_ssize_t i, size = st.shape[0]
    res = np.zeros(size, dtype=np.int64)
    cdef int64_t[::1] r = res
    cdef int p, seen
    cdef int64_t x, acc
    with nogil:
        for i in range(size):
            x = st[i]
            seen = 0
            acc = 0
            for p in range(n):
                if (x >> p) & 1:
                    seen += 1
                    acc += _BINOM[p, seen]
            r[i] = acc
    return res


def weight_states(int n, int k):
    if k == 0:
        return np.zeros(1, dtype=np.int64)
    cdef Py_ssize_t count = math.comb(n, k)
    res = np.empty(count, dtype=np.int64)
    cdef int64_t[::1] r = res
    cdef uint64_t v = ((<uint64_t>1) << k) - 1
    cdef uint64_t t
    cdef Py_ssize_t i
    with nogil:
        for i in range(count):
            r[i] = <int64_t>v
            # Gosper's hack: next integer with the same popcount
            t = v | (v - 1)
            if i + 1 < count:
                v = (t + 1) | (((~t & (t + 1)) - 1) >> (__builtin_ctzll(v) + 1))
    return res
