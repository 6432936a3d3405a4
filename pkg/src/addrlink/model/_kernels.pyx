# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled node-attention kernels.

Drop-in replacement for ``_kernels_py``: same signatures, same results to
floating-point accumulation order differences (summations here run in plain
index order, which the parity tests bound at 1e-12).
"""

from libc.math cimport exp as c_exp
from libc.math cimport INFINITY

import numpy as np


def node_attention_forward(double[:, :, ::1] h,
                           unsigned char[:, :, ::1] nbr,
                           unsigned char[:, ::1] node_mask,
                           double[:, ::1] attn,
                           double slope):
    cdef Py_ssize_t B = h.shape[0]
    cdef Py_ssize_t N = h.shape[1]
    cdef Py_ssize_t F = h.shape[2]
    cdef Py_ssize_t K = attn.shape[0]

    z_arr = np.zeros((B, N, K * F), dtype=np.float64)
    alpha_arr = np.zeros((B, K, N, N), dtype=np.float64)
    sl_arr = np.zeros((B, N, K), dtype=np.float64)
    sr_arr = np.zeros((B, N, K), dtype=np.float64)
    acc_arr = np.zeros(F, dtype=np.float64)

    cdef double[:, :, ::1] z = z_arr
    cdef double[:, :, :, ::1] alpha = alpha_arr
    cdef double[:, :, ::1] sl = sl_arr
    cdef double[:, :, ::1] sr = sr_arr
    cdef double[::1] acc = acc_arr

    cdef Py_ssize_t b, u, v, k, f
    cdef double tl, tr, e, m, denom, a

    with nogil:
        for b in range(B):
            for u in range(N):
                if node_mask[b, u] == 0:
                    continue
                for k in range(K):
                    tl = 0.0
                    tr = 0.0
                    for f in range(F):
                        tl += attn[k, f] * h[b, u, f]
                        tr += attn[k, F + f] * h[b, u, f]
                    sl[b, u, k] = tl
                    sr[b, u, k] = tr
            for u in range(N):
                if node_mask[b, u] == 0:
                    continue
                for k in range(K):
                    m = -INFINITY
                    for v in range(N):
                        if nbr[b, u, v]:
                            e = sl[b, u, k] + sr[b, v, k]
                            if e < 0.0:
                                e = slope * e
                            if e > m:
                                m = e
                    if m == -INFINITY:
                        continue
                    denom = 0.0
                    for v in range(N):
                        if nbr[b, u, v]:
                            e = sl[b, u, k] + sr[b, v, k]
                            if e < 0.0:
                                e = slope * e
                            a = c_exp(e - m)
                            alpha[b, k, u, v] = a
                            denom += a
                    for f in range(F):
                        acc[f] = 0.0
                    for v in range(N):
                        if nbr[b, u, v]:
                            a = alpha[b, k, u, v] / denom
                            alpha[b, k, u, v] = a
                            for f in range(F):
                                acc[f] += a * h[b, v, f]
                    for f in range(F):
                        e = acc[f]
                        if e < 0.0:
                            e = slope * e
                        z[b, u, k * F + f] = e

    return z_arr, alpha_arr, sl_arr, sr_arr


def node_attention_backward(double[:, :, ::1] dz,
                            double[:, :, ::1] h,
                            unsigned char[:, :, ::1] nbr,
                            unsigned char[:, ::1] node_mask,
                            double[:, ::1] attn,
                            double slope,
                            double[:, :, :, ::1] alpha,
                            double[:, :, ::1] sl,
                            double[:, :, ::1] sr):
    cdef Py_ssize_t B = h.shape[0]
    cdef Py_ssize_t N = h.shape[1]
    cdef Py_ssize_t F = h.shape[2]
    cdef Py_ssize_t K = attn.shape[0]

    dh_arr = np.zeros((B, N, F), dtype=np.float64)
    dattn_arr = np.zeros((K, 2 * F), dtype=np.float64)
    agg_arr = np.zeros(F, dtype=np.float64)
    dagg_arr = np.zeros(F, dtype=np.float64)
    dalpha_arr = np.zeros(N, dtype=np.float64)
    dsr_arr = np.zeros(N, dtype=np.float64)

    cdef double[:, :, ::1] dh = dh_arr
    cdef double[:, ::1] dattn = dattn_arr
    cdef double[::1] agg = agg_arr
    cdef double[::1] dagg = dagg_arr
    cdef double[::1] dalpha = dalpha_arr
    cdef double[::1] dsr = dsr_arr

    cdef Py_ssize_t b, u, v, k, f
    cdef double a, dot, de, epre, dsl, t

    with nogil:
        for b in range(B):
            for k in range(K):
                for v in range(N):
                    dsr[v] = 0.0
                for u in range(N):
                    if node_mask[b, u] == 0:
                        continue
                    # Recompute the pre-activation aggregate for the
                    # LeakyReLU derivative, then dagg.
                    for f in range(F):
                        agg[f] = 0.0
                    for v in range(N):
                        if nbr[b, u, v]:
                            a = alpha[b, k, u, v]
                            for f in range(F):
                                agg[f] += a * h[b, v, f]
                    for f in range(F):
                        t = dz[b, u, k * F + f]
                        if agg[f] < 0.0:
                            t = slope * t
                        dagg[f] = t
                    # dalpha, dh contribution through the aggregation, and
                    # the softmax Jacobian dot product.
                    dot = 0.0
                    for v in range(N):
                        if nbr[b, u, v]:
                            a = alpha[b, k, u, v]
                            t = 0.0
                            for f in range(F):
                                t += dagg[f] * h[b, v, f]
                                dh[b, v, f] += a * dagg[f]
                            dalpha[v] = t
                            dot += a * t
                    dsl = 0.0
                    for v in range(N):
                        if nbr[b, u, v]:
                            de = alpha[b, k, u, v] * (dalpha[v] - dot)
                            epre = sl[b, u, k] + sr[b, v, k]
                            if epre < 0.0:
                                de = slope * de
                            dsl += de
                            dsr[v] += de
                    for f in range(F):
                        dattn[k, f] += dsl * h[b, u, f]
                        dh[b, u, f] += dsl * attn[k, f]
                for v in range(N):
                    t = dsr[v]
                    if t != 0.0:
                        for f in range(F):
                            dattn[k, F + f] += t * h[b, v, f]
                            dh[b, v, f] += t * attn[k, F + f]

    return dh_arr, dattn_arr
