# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled TreeSHAP kernel: the hot loop of the workbench.

Mirrors the recursion in ``_kernel_py`` exactly; both backends must produce
bit-identical results so either can serve the same contracts.
"""

import numpy as np

cimport numpy as cnp

NAME = "compiled"


cdef void _extend(double* pd, double* pz, double* po, double* pw, int l,
                  double p_z, double p_o, double p_i) noexcept nogil:
    cdef int i
    pd[l] = p_i
    pz[l] = p_z
    po[l] = p_o
    pw[l] = 1.0 if l == 0 else 0.0
    for i in range(l - 1, -1, -1):
        pw[i + 1] += p_o * pw[i] * (i + 1) / (l + 1)
        pw[i] = p_z * pw[i] * (l - i) / (l + 1)


cdef double _unwound_sum(double* pz, double* po, double* pw, int l, int i) noexcept nogil:
    cdef double one = po[i]
    cdef double zero = pz[i]
    cdef double n = pw[l - 1]
    cdef double total = 0.0
    cdef double w
    cdef int j
    for j in range(l - 2, -1, -1):
        if one != 0.0:
            w = n * l / ((j + 1) * one)
            total += w
            n = pw[j] - w * zero * (l - 1 - j) / l
        else:
            total += pw[j] * l / (zero * (l - 1 - j))
    return total


cdef void _unwind(double* pd, double* pz, double* po, double* pw, int l, int i) noexcept nogil:
    cdef double one = po[i]
    cdef double zero = pz[i]
    cdef double n = pw[l - 1]
    cdef double t
    cdef int j
    for j in range(l - 2, -1, -1):
        if one != 0.0:
            t = pw[j]
            pw[j] = n * l / ((j + 1) * one)
            n = t - pw[j] * zero * (l - 1 - j) / l
        else:
            pw[j] = pw[j] * l / (zero * (l - 1 - j))
    for j in range(i, l - 1):
        pd[j] = pd[j + 1]
        pz[j] = pz[j + 1]
        po[j] = po[j + 1]


cdef void _recurse(int node, int depth, int l,
                   double* parent_d, double* parent_z, double* parent_o, double* parent_w,
                   double p_z, double p_o, double p_i,
                   const cnp.int32_t* feat, const double* thr, const cnp.int32_t* left, const cnp.int32_t* right,
                   const double* val, const double* cov,
                   const double* x, double* phi, double scale,
                   double* sd, double* sz, double* so, double* sw, int stride) noexcept nogil:
    cdef double* pd = sd + depth * stride
    cdef double* pz = sz + depth * stride
    cdef double* po = so + depth * stride
    cdef double* pw = sw + depth * stride
    cdef int i, f, hot, cold, k, plen
    cdef double i_z, i_o, w
    for i in range(l):
        pd[i] = parent_d[i]
        pz[i] = parent_z[i]
        po[i] = parent_o[i]
        pw[i] = parent_w[i]
    _extend(pd, pz, po, pw, l, p_z, p_o, p_i)
    plen = l + 1
    f = feat[node]
    if f < 0:
        for i in range(1, plen):
            w = _unwound_sum(pz, po, pw, plen, i)
            phi[<int> pd[i]] += w * (po[i] - pz[i]) * val[node] * scale
        return
    if x[f] < thr[node]:
        hot = left[node]
        cold = right[node]
    else:
        hot = right[node]
        cold = left[node]
    i_z = 1.0
    i_o = 1.0
    k = -1
    for i in range(1, plen):
        if <int> pd[i] == f:
            k = i
            break
    if k >= 0:
        i_z = pz[k]
        i_o = po[k]
        _unwind(pd, pz, po, pw, plen, k)
        plen -= 1
    _recurse(hot, depth + 1, plen, pd, pz, po, pw,
             i_z * cov[hot] / cov[node], i_o, f,
             feat, thr, left, right, val, cov, x, phi, scale,
             sd, sz, so, sw, stride)
    _recurse(cold, depth + 1, plen, pd, pz, po, pw,
             i_z * cov[cold] / cov[node], 0.0, f,
             feat, thr, left, right, val, cov, x, phi, scale,
             sd, sz, so, sw, stride)


def tree_shap_batch(cnp.int32_t[::1] feature_index, double[::1] threshold,
                    cnp.int32_t[::1] left, cnp.int32_t[::1] right,
                    double[::1] leaf_value, double[::1] cover,
                    double[:, ::1] X, double[:, ::1] phi,
                    double scale, int max_depth):
    """Accumulate one tree's scaled SHAP contributions for a batch of rows."""
    cdef int stride = max_depth + 3
    scratch = np.zeros((4, (max_depth + 2) * stride), dtype=np.float64)
    cdef double[:, ::1] s = scratch
    cdef double dummy = 0.0
    cdef int r
    cdef int n = X.shape[0]
    with nogil:
        for r in range(n):
            _recurse(0, 0, 0, &dummy, &dummy, &dummy, &dummy, 1.0, 1.0, -1.0,
                     &feature_index[0], &threshold[0], &left[0], &right[0],
                     &leaf_value[0], &cover[0],
                     &X[r, 0], &phi[r, 0], scale,
                     &s[0, 0], &s[1, 0], &s[2, 0], &s[3, 0], stride)
