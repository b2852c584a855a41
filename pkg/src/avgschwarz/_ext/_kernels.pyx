# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled per-triangle loops for P1 assembly."""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def p1_stiffness_triplets(const double[:, ::1] nodes, const long long[:, ::1] triangles,
                          const double[::1] coef):
    cdef Py_ssize_t nt = triangles.shape[0]
    rows_a = np.empty(9 * nt, dtype=np.int64)
    cols_a = np.empty(9 * nt, dtype=np.int64)
    vals_a = np.empty(9 * nt, dtype=np.float64)
    cdef long long[::1] rows = rows_a
    cdef long long[::1] cols = cols_a
    cdef double[::1] vals = vals_a
    cdef double b[3]
    cdef double c[3]
    cdef long long v[3]
    cdef double area2, s
    cdef Py_ssize_t t, a, q, p
    for t in range(nt):
        for a in range(3):
            v[a] = triangles[t, a]
        b[0] = nodes[v[1], 1] - nodes[v[2], 1]
        b[1] = nodes[v[2], 1] - nodes[v[0], 1]
        b[2] = nodes[v[0], 1] - nodes[v[1], 1]
        c[0] = nodes[v[2], 0] - nodes[v[1], 0]
        c[1] = nodes[v[0], 0] - nodes[v[2], 0]
        c[2] = nodes[v[1], 0] - nodes[v[0], 0]
        area2 = c[2] * b[1] - c[1] * b[2]
        if area2 < 0:
            area2 = -area2
        s = coef[t] / (2.0 * area2)
        p = 9 * t
        for a in range(3):
            for q in range(3):
                rows[p] = v[a]
                cols[p] = v[q]
                vals[p] = s * (b[a] * b[q] + c[a] * c[q])
                p += 1
    return rows_a, cols_a, vals_a


def p1_load(const double[:, ::1] nodes, const long long[:, ::1] triangles,
            const double[:, ::1] f_mid, Py_ssize_t num_nodes):
    out_a = np.zeros(num_nodes, dtype=np.float64)
    cdef double[::1] out = out_a
    cdef Py_ssize_t nt = triangles.shape[0]
    cdef Py_ssize_t t, a
    cdef long long v0, v1, v2
    cdef double area, w
    for t in range(nt):
        v0 = triangles[t, 0]
        v1 = triangles[t, 1]
        v2 = triangles[t, 2]
        area = 0.5 * ((nodes[v1, 0] - nodes[v0, 0]) * (nodes[v2, 1] - nodes[v0, 1])
                      - (nodes[v2, 0] - nodes[v0, 0]) * (nodes[v1, 1] - nodes[v0, 1]))
        if area < 0:
            area = -area
        w = area / 6.0
        # edge e joins vertex e and vertex e+1
        out[v0] += w * (f_mid[t, 0] + f_mid[t, 2])
        out[v1] += w * (f_mid[t, 0] + f_mid[t, 1])
        out[v2] += w * (f_mid[t, 1] + f_mid[t, 2])
    return out_a
