# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled pairwise-update solver for the weighted soft-margin dual.

Operation-for-operation twin of ``_smo_fallback``; see that module for the
shared conventions (gradient definition, pair selection, clipping, cache
layout).  This version exists because pair updates are inherently sequential
and per-update Python overhead dominates once training sets reach tens of
thousands of vectors.
"""

import numpy as np

from libc.math cimport INFINITY, exp, sqrt


cdef inline Py_ssize_t _fetch_row(
    Py_ssize_t r,
    double[:, ::1] X,
    double delta,
    bint paper_form,
    double[:, ::1] rows,
    long long[::1] owner,
    long long[::1] slot_of,
    long long[::1] stamp,
    long long[::1] clock,
) noexcept:
    """Return the cache slot holding kernel row ``r``, computing on miss."""
    cdef Py_ssize_t M = X.shape[0]
    cdef Py_ssize_t d = X.shape[1]
    cdef Py_ssize_t s, k, col, old, n_slots
    cdef long long best_stamp
    cdef double acc, diff, scale
    s = <Py_ssize_t> slot_of[r]
    if s < 0:
        n_slots = rows.shape[0]
        s = 0
        best_stamp = stamp[0]
        for k in range(1, n_slots):
            if stamp[k] < best_stamp:
                best_stamp = stamp[k]
                s = k
        old = <Py_ssize_t> owner[s]
        if old >= 0:
            slot_of[old] = -1
        scale = -1.0 / (2.0 * delta * delta)
        for k in range(M):
            acc = 0.0
            for col in range(d):
                diff = X[k, col] - X[r, col]
                acc += diff * diff
            if paper_form:
                acc = sqrt(acc)
            rows[s, k] = exp(acc * scale)
        owner[s] = r
        slot_of[r] = s
    clock[0] += 1
    stamp[s] = clock[0]
    return s


def solve(X_in, y_in, C_in, double delta, bint paper_form, double tol,
          long long max_updates, rows_in, owner_in, slot_of_in, stamp_in,
          clock_in):
    """Maximize the dual over the box [0, C] with the balance constraint.

    Returns (alpha, G, bias, n_updates, converged, gap).
    """
    cdef double[:, ::1] X = X_in
    cdef double[::1] y = y_in
    cdef double[::1] C = C_in
    cdef double[:, ::1] rows = rows_in
    cdef long long[::1] owner = owner_in
    cdef long long[::1] slot_of = slot_of_in
    cdef long long[::1] stamp = stamp_in
    cdef long long[::1] clock = clock_in

    cdef Py_ssize_t M = X.shape[0]
    alpha_arr = np.zeros(M, dtype=np.float64)
    G_arr = np.zeros(M, dtype=np.float64)
    cdef double[::1] alpha = alpha_arr
    cdef double[::1] G = G_arr

    cdef long long n_updates = 0
    cdef bint converged = 0
    cdef bint pos_i, pos_j
    cdef Py_ssize_t i, j, k, si, sj
    cdef double m, Mv, v, a, t, room_i, room_j, bias, gap, bias_acc
    cdef Py_ssize_t n_free

    while n_updates < max_updates:
        m = -INFINITY
        Mv = INFINITY
        i = -1
        j = -1
        for k in range(M):
            v = y[k] - G[k]
            if y[k] > 0.0:
                if alpha[k] < C[k] and v > m:
                    m = v
                    i = k
                if alpha[k] > 0.0 and v < Mv:
                    Mv = v
                    j = k
            else:
                if alpha[k] > 0.0 and v > m:
                    m = v
                    i = k
                if alpha[k] < C[k] and v < Mv:
                    Mv = v
                    j = k
        if i < 0 or j < 0 or m - Mv <= tol:
            converged = 1
            break
        si = _fetch_row(i, X, delta, paper_form, rows, owner, slot_of, stamp, clock)
        sj = _fetch_row(j, X, delta, paper_form, rows, owner, slot_of, stamp, clock)
        a = rows[si, i] + rows[sj, j] - 2.0 * rows[si, j]
        if a <= 0.0:
            a = 1e-12
        t = (m - Mv) / a
        pos_i = y[i] > 0.0
        pos_j = y[j] > 0.0
        room_i = (C[i] - alpha[i]) if pos_i else alpha[i]
        room_j = alpha[j] if pos_j else (C[j] - alpha[j])
        if room_i < t:
            t = room_i
        if room_j < t:
            t = room_j
        if t == room_i:
            alpha[i] = C[i] if pos_i else 0.0
        else:
            alpha[i] = alpha[i] + (t if pos_i else -t)
        if t == room_j:
            alpha[j] = 0.0 if pos_j else C[j]
        else:
            alpha[j] = alpha[j] + (-t if pos_j else t)
        for k in range(M):
            G[k] = G[k] + t * (rows[si, k] - rows[sj, k])
        n_updates += 1

    # Final optimality gap and bias from the terminal state.
    m = -INFINITY
    Mv = INFINITY
    for k in range(M):
        v = y[k] - G[k]
        if y[k] > 0.0:
            if alpha[k] < C[k] and v > m:
                m = v
            if alpha[k] > 0.0 and v < Mv:
                Mv = v
        else:
            if alpha[k] > 0.0 and v > m:
                m = v
            if alpha[k] < C[k] and v < Mv:
                Mv = v
    gap = m - Mv
    n_free = 0
    bias_acc = 0.0
    for k in range(M):
        if 0.0 < alpha[k] < C[k]:
            n_free += 1
            bias_acc += G[k] - y[k]
    if n_free > 0:
        bias = bias_acc / n_free
    else:
        bias = -(m + Mv) / 2.0
    return alpha_arr, G_arr, bias, int(n_updates), bool(converged), gap
