# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; same contract as :mod:`idcert._kernels_py`."""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, fabs, isfinite
from libc.stdlib cimport malloc, free

cnp.import_array()

BACKEND = "cython"

ctypedef unsigned long long u64


cdef extern from *:
    int __builtin_parityll(unsigned long long) nogil


cdef inline int parity64(u64 v) nogil:
    return __builtin_parityll(v)


cdef bint _restricted_commute(u64* xs, u64* zs, int m, u64 mask) nogil:
    cdef int i, j
    for i in range(m):
        for j in range(i + 1, m):
            if parity64(((xs[i] & zs[j]) ^ (zs[i] & xs[j])) & mask):
                return False
    return True


def xor_zero_subsets(keys, int m_min, int m_max):
    cdef Py_ssize_t n = len(keys)
    pos = {k: i for i, k in enumerate(keys)}
    out = []
    chosen = []

    def rec(int start, acc, int depth, int size):
        cdef int i
        if depth == size - 1:
            j = pos.get(acc)
            if j is not None and j >= start:
                out.append(tuple(chosen) + (j,))
            return
        for i in range(start, n - (size - 1 - depth)):
            chosen.append(i)
            rec(i + 1, acc ^ keys[i], depth + 1, size)
            chosen.pop()

    for size in range(max(2, m_min), m_max + 1):
        rec(0, 0, 0, size)
    return out


cdef int _load_rows(xs_in, zs_in, u64** xs, u64** zs) except -1:
    cdef int m = len(xs_in), i
    xs[0] = <u64*> malloc(m * sizeof(u64))
    zs[0] = <u64*> malloc(m * sizeof(u64))
    if xs[0] == NULL or zs[0] == NULL:
        raise MemoryError()
    for i in range(m):
        xs[0][i] = xs_in[i]
        zs[0][i] = zs_in[i]
    return m


def id_is_entangled(xs_in, zs_in, int n):
    cdef u64 *xs
    cdef u64 *zs
    cdef int m = _load_rows(xs_in, zs_in, &xs, &zs)
    cdef u64 full = (<u64> 1 << n) - 1 if n < 64 else <u64> -1
    cdef u64 side
    cdef bint ent = True
    try:
        side = 1
        while side < full:
            if _restricted_commute(xs, zs, m, side) and _restricted_commute(xs, zs, m, full & ~side):
                ent = False
                break
            side += 2
    finally:
        free(xs)
        free(zs)
    return ent


def _gf2_rank(vals):
    basis = []
    for v in vals:
        for b in basis:
            v = min(v, v ^ b)
        if v:
            basis.append(v)
            basis.sort(reverse=True)
    return len(basis)


def id_is_critical(xs_in, zs_in, int n):
    cdef int m = len(xs_in)
    if _gf2_rank([x | (z << n) for x, z in zip(xs_in, zs_in)]) != m - 1:
        return False
    cdef u64 *xs
    cdef u64 *zs
    cdef u64 *kx
    cdef u64 *kz
    _load_rows(xs_in, zs_in, &xs, &zs)
    kx = <u64*> malloc(m * sizeof(u64))
    kz = <u64*> malloc(m * sizeof(u64))
    cdef u64 full = (<u64> 1 << n) - 1
    cdef u64 cols
    cdef int i, k
    cdef bint crit = True
    try:
        cols = 1
        while cols < full:
            k = 0
            for i in range(m):
                if (xs[i] | zs[i]) & cols:
                    kx[k] = xs[i]
                    kz[k] = zs[i]
                    k += 1
            if k >= 2 and _restricted_commute(kx, kz, k, cols):
                crit = False
                break
            cols += 1
    finally:
        free(xs)
        free(zs)
        free(kx)
        free(kz)
    return crit


# -- LU orbit objective --------------------------------------------------------

cdef struct Problem:
    int n
    int d
    int m
    double* seed_re
    double* seed_im
    long long* perms
    double* c_re
    double* c_im
    double* w_re
    double* w_im


cdef void _lu_state(Problem* pb, double* params) nogil:
    cdef int n = pb.n, d = pb.d, q, b, stride, lo, hi
    cdef double a, bb, c, cb, sb, ep_re, ep_im, em_re, em_im
    cdef double u00r, u00i, u01r, u01i, u10r, u10i, u11r, u11i
    cdef double xr, xi, yr, yi
    for b in range(d):
        pb.w_re[b] = pb.seed_re[b]
        pb.w_im[b] = pb.seed_im[b]
    for q in range(n):
        a = params[3 * q]
        bb = params[3 * q + 1]
        c = params[3 * q + 2]
        cb = cos(bb / 2)
        sb = sin(bb / 2)
        ep_re = cos((a + c) / 2)
        ep_im = sin((a + c) / 2)
        em_re = cos((a - c) / 2)
        em_im = sin((a - c) / 2)
        # U = [[conj(ep) cb, -conj(em) sb], [em sb, ep cb]]
        u00r = ep_re * cb
        u00i = -ep_im * cb
        u01r = -em_re * sb
        u01i = em_im * sb
        u10r = em_re * sb
        u10i = em_im * sb
        u11r = ep_re * cb
        u11i = ep_im * cb
        stride = 1 << (n - 1 - q)
        for lo in range(d):
            if lo & stride:
                continue
            hi = lo | stride
            xr = pb.w_re[lo]
            xi = pb.w_im[lo]
            yr = pb.w_re[hi]
            yi = pb.w_im[hi]
            pb.w_re[lo] = u00r * xr - u00i * xi + u01r * yr - u01i * yi
            pb.w_im[lo] = u00r * xi + u00i * xr + u01r * yi + u01i * yr
            pb.w_re[hi] = u10r * xr - u10i * xi + u11r * yr - u11i * yi
            pb.w_im[hi] = u10r * xi + u10i * xr + u11r * yi + u11i * yr


cdef double _objective(Problem* pb, double* params) nogil:
    cdef int i, b, j, d = pb.d
    cdef double total = 0.0, acc, tr, ti
    _lu_state(pb, params)
    for i in range(pb.m):
        acc = 0.0
        for b in range(d):
            j = <int> pb.perms[i * d + b]
            # Re(conj(psi[j]) * c[b] * psi[b])
            tr = pb.c_re[i * d + b] * pb.w_re[b] - pb.c_im[i * d + b] * pb.w_im[b]
            ti = pb.c_re[i * d + b] * pb.w_im[b] + pb.c_im[i * d + b] * pb.w_re[b]
            acc += pb.w_re[j] * tr + pb.w_im[j] * ti
        total += fabs(acc)
    return total


cdef class _Holder:
    """Keeps contiguous numpy buffers alive for the duration of a call."""
    cdef public object seed_re, seed_im, perms, c_re, c_im, w_re, w_im


cdef _Holder _setup(Problem* pb, seed_re, seed_im, perms, coeffs_re, coeffs_im, int n):
    h = _Holder()
    h.seed_re = np.ascontiguousarray(seed_re, dtype=np.float64)
    h.seed_im = np.ascontiguousarray(seed_im, dtype=np.float64)
    h.perms = np.ascontiguousarray(perms, dtype=np.int64)
    h.c_re = np.ascontiguousarray(coeffs_re, dtype=np.float64)
    h.c_im = np.ascontiguousarray(coeffs_im, dtype=np.float64)
    d = 1 << n
    if h.seed_re.shape[0] != d or h.perms.shape[1] != d:
        raise ValueError("seed / observable dimensions do not match n")
    h.w_re = np.empty(d)
    h.w_im = np.empty(d)
    pb.n = n
    pb.d = d
    pb.m = h.perms.shape[0]
    pb.seed_re = <double*> cnp.PyArray_DATA(h.seed_re)
    pb.seed_im = <double*> cnp.PyArray_DATA(h.seed_im)
    pb.perms = <long long*> cnp.PyArray_DATA(h.perms)
    pb.c_re = <double*> cnp.PyArray_DATA(h.c_re)
    pb.c_im = <double*> cnp.PyArray_DATA(h.c_im)
    pb.w_re = <double*> cnp.PyArray_DATA(h.w_re)
    pb.w_im = <double*> cnp.PyArray_DATA(h.w_im)
    return h


def lu_state(seed, params, int n):
    cdef Problem pb
    seed = np.asarray(seed, dtype=complex)
    dummy = np.zeros((0, 1 << n), dtype=np.int64)
    h = _setup(&pb, seed.real, seed.imag, dummy, np.zeros((0, 1 << n)), np.zeros((0, 1 << n)), n)
    p = np.ascontiguousarray(params, dtype=np.float64)
    _lu_state(&pb, <double*> cnp.PyArray_DATA(p))
    return h.w_re + 1j * h.w_im


def sum_abs_at(seed_re, seed_im, perms, coeffs_re, coeffs_im, int n, params):
    """Objective value at one parameter vector (for testing and benchmarks)."""
    cdef Problem pb
    h = _setup(&pb, seed_re, seed_im, perms, coeffs_re, coeffs_im, n)
    p = np.ascontiguousarray(params, dtype=np.float64)
    return _objective(&pb, <double*> cnp.PyArray_DATA(p))


cdef double _neg_obj(Problem* pb, double* x) except? -1e300:
    cdef double v = _objective(pb, x)
    if not isfinite(v):
        raise FloatingPointError("objective returned a non-finite value")
    return -v


def maximize_sum_abs(seed_re, seed_im, perms, coeffs_re, coeffs_im, int n, x0,
                     double tol, int max_iter):
    """Nelder-Mead maximization; mirrors ``_kernels_py.nelder_mead_max``."""
    cdef Problem pb
    h = _setup(&pb, seed_re, seed_im, perms, coeffs_re, coeffs_im, n)
    x0a = np.ascontiguousarray(x0, dtype=np.float64)
    cdef int dim = x0a.shape[0]
    cdef int np1 = dim + 1
    sim_a = np.empty((np1, dim))
    tmp_a = np.empty((np1, dim))
    vals_a = np.empty(np1)
    tvals_a = np.empty(np1)
    cen_a = np.empty(dim)
    xr_a = np.empty(dim)
    xe_a = np.empty(dim)
    xc_a = np.empty(dim)
    order_a = np.empty(np1, dtype=np.intp)
    cdef double[:, ::1] sim = sim_a
    cdef double[:, ::1] tmp = tmp_a
    cdef double[::1] vals = vals_a
    cdef double[::1] tvals = tvals_a
    cdef double[::1] cen = cen_a
    cdef double[::1] xr = xr_a
    cdef double[::1] xe = xe_a
    cdef double[::1] xc = xc_a
    cdef double[::1] x0v = x0a
    cdef Py_ssize_t[::1] order = order_a
    cdef int i, k, j, it = 0
    cdef Py_ssize_t key
    cdef double fr, fe, fc, diam, v, kv
    cdef bint converged = False, accept

    for k in range(dim):
        sim[0, k] = x0v[k]
    for i in range(dim):
        for k in range(dim):
            sim[i + 1, k] = x0v[k]
        if x0v[i] != 0:
            sim[i + 1, i] = x0v[i] * 1.05
        else:
            sim[i + 1, i] = 0.00025
    for i in range(np1):
        vals[i] = _neg_obj(&pb, &sim[i, 0])

    while it < max_iter:
        # stable insertion sort of the vertices by value
        for i in range(np1):
            order[i] = i
        for i in range(1, np1):
            key = order[i]
            kv = vals[key]
            j = i - 1
            while j >= 0 and vals[order[j]] > kv:
                order[j + 1] = order[j]
                j -= 1
            order[j + 1] = key
        for i in range(np1):
            tvals[i] = vals[order[i]]
            for k in range(dim):
                tmp[i, k] = sim[order[i], k]
        for i in range(np1):
            vals[i] = tvals[i]
            for k in range(dim):
                sim[i, k] = tmp[i, k]

        diam = 0.0
        for i in range(1, np1):
            for k in range(dim):
                v = fabs(sim[i, k] - sim[0, k])
                if v > diam:
                    diam = v
        if diam <= tol and vals[dim] - vals[0] <= tol:
            converged = True
            break
        it += 1

        for k in range(dim):
            v = 0.0
            for i in range(dim):
                v += sim[i, k]
            cen[k] = v / dim
        for k in range(dim):
            xr[k] = cen[k] + (cen[k] - sim[dim, k])
        fr = _neg_obj(&pb, &xr[0])
        if fr < vals[0]:
            for k in range(dim):
                xe[k] = cen[k] + 2.0 * (cen[k] - sim[dim, k])
            fe = _neg_obj(&pb, &xe[0])
            if fe < fr:
                for k in range(dim):
                    sim[dim, k] = xe[k]
                vals[dim] = fe
            else:
                for k in range(dim):
                    sim[dim, k] = xr[k]
                vals[dim] = fr
        elif fr < vals[dim - 1]:
            for k in range(dim):
                sim[dim, k] = xr[k]
            vals[dim] = fr
        else:
            if fr < vals[dim]:
                for k in range(dim):
                    xc[k] = cen[k] + 0.5 * (xr[k] - cen[k])
                fc = _neg_obj(&pb, &xc[0])
                accept = fc <= fr
            else:
                for k in range(dim):
                    xc[k] = cen[k] + 0.5 * (sim[dim, k] - cen[k])
                fc = _neg_obj(&pb, &xc[0])
                accept = fc < vals[dim]
            if accept:
                for k in range(dim):
                    sim[dim, k] = xc[k]
                vals[dim] = fc
            else:
                for i in range(1, np1):
                    for k in range(dim):
                        sim[i, k] = sim[0, k] + 0.5 * (sim[i, k] - sim[0, k])
                    vals[i] = _neg_obj(&pb, &sim[i, 0])

    j = 0
    for i in range(1, np1):
        if vals[i] < vals[j]:
            j = i
    return sim_a[j].copy(), float(-vals[j]), it, bool(converged)
