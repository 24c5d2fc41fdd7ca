# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: fused ReLU-MLP passes (BLAS dgemm) and sum-tree ops.

Keep in lockstep with ``fallback.py`` — same signatures, same descent and
parent-recompute rules.
"""

import numpy as np

cimport numpy as cnp
from scipy.linalg.cython_blas cimport dgemm

cnp.import_array()


cdef void _gemm_xwt(double[:, ::1] x, double[:, ::1] w, double[:, ::1] out) noexcept:
    # out(B,m) = x(B,k) @ w(m,k)^T, all row-major.  Column-major view:
    # out'(m,B) = w'(k,m)^T @ x'(k,B)
    cdef int m = w.shape[0]
    cdef int b = x.shape[0]
    cdef int k = w.shape[1]
    cdef double one = 1.0, zero = 0.0
    dgemm("T", "N", &m, &b, &k, &one, &w[0, 0], &k, &x[0, 0], &k, &zero,
          &out[0, 0], &m)


def mlp_forward(list weights, list biases, cnp.ndarray x):
    cdef Py_ssize_t n_layers = len(weights)
    cdef Py_ssize_t li, i, j
    cdef Py_ssize_t b = x.shape[0]
    cdef double[:, ::1] h = x
    cdef double[:, ::1] out
    cdef double[::1] bias
    cdef Py_ssize_t m
    acts = [x]
    for li in range(n_layers):
        w = <cnp.ndarray> weights[li]
        bias = biases[li]
        m = w.shape[0]
        out_arr = np.empty((b, m), dtype=np.float64)
        out = out_arr
        _gemm_xwt(h, w, out)
        if li < n_layers - 1:
            for i in range(b):
                for j in range(m):
                    out[i, j] += bias[j]
                    if out[i, j] < 0.0:
                        out[i, j] = 0.0
        else:
            for i in range(b):
                for j in range(m):
                    out[i, j] += bias[j]
        acts.append(out_arr)
        h = out
    return acts[n_layers], acts


def mlp_backward(list weights, list acts, cnp.ndarray grad_out):
    cdef Py_ssize_t n_layers = len(weights)
    cdef Py_ssize_t li, i, j
    cdef int b = grad_out.shape[0]
    cdef int m, k
    cdef double one = 1.0, zero = 0.0
    cdef double[:, ::1] g = grad_out
    cdef double[:, ::1] w, a, dw, dx
    cdef double[::1] db
    cdef double s
    grad_ws = [None] * n_layers
    grad_bs = [None] * n_layers
    for li in range(n_layers - 1, -1, -1):
        w = <cnp.ndarray> weights[li]
        a = <cnp.ndarray> acts[li]
        m = w.shape[0]
        k = w.shape[1]
        dw_arr = np.empty((m, k), dtype=np.float64)
        dw = dw_arr
        # dw(m,k) = g(B,m)^T @ a(B,k); column-major: dw'(k,m) = a'(k,B) @ g'(m,B)^T
        dgemm("N", "T", &k, &m, &b, &one, &a[0, 0], &k, &g[0, 0], &m, &zero,
              &dw[0, 0], &k)
        db_arr = np.empty(m, dtype=np.float64)
        db = db_arr
        for j in range(m):
            s = 0.0
            for i in range(b):
                s += g[i, j]
            db[j] = s
        grad_ws[li] = dw_arr
        grad_bs[li] = db_arr
        dx_arr = np.empty((b, k), dtype=np.float64)
        dx = dx_arr
        # dx(B,k) = g(B,m) @ w(m,k); column-major: dx'(k,B) = w'(k,m) @ g'(m,B)
        dgemm("N", "N", &k, &b, &m, &one, &w[0, 0], &k, &g[0, 0], &m, &zero,
              &dx[0, 0], &k)
        if li > 0:
            for i in range(b):
                for j in range(k):
                    if a[i, j] <= 0.0:
                        dx[i, j] = 0.0
        g = dx
    return grad_ws, grad_bs, np.asarray(g)


def tree_set(double[::1] tree, Py_ssize_t cap, Py_ssize_t idx, double value):
    cdef Py_ssize_t node = cap + idx
    tree[node] = value
    node >>= 1
    while node >= 1:
        tree[node] = tree[2 * node] + tree[2 * node + 1]
        node >>= 1


def tree_set_many(double[::1] tree, Py_ssize_t cap, long long[::1] idxs,
                  double[::1] values):
    cdef Py_ssize_t i, node
    for i in range(idxs.shape[0]):
        node = cap + idxs[i]
        tree[node] = values[i]
        node >>= 1
        while node >= 1:
            tree[node] = tree[2 * node] + tree[2 * node + 1]
            node >>= 1


def tree_prefix_find(double[::1] tree, Py_ssize_t cap, double[::1] targets):
    cdef Py_ssize_t n = targets.shape[0]
    cdef cnp.ndarray out_arr = np.empty(n, dtype=np.int64)
    cdef long long[::1] out = out_arr
    cdef Py_ssize_t i, node
    cdef double t, left
    for i in range(n):
        t = targets[i]
        node = 1
        while node < cap:
            left = tree[2 * node]
            if t > left:
                t -= left
                node = 2 * node + 1
            else:
                node = 2 * node
        out[i] = node - cap
    return out_arr
