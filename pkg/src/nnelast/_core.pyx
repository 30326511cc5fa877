# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled per-element kernel: geometry, tensor basis, nodal shape solve.

Mirrors nnelast._core_py.build_shapes with plain C loops per element and a
LAPACK dgesv for the 30x30 degree-of-freedom system.  The rational moment
tables are taken from nnelast.ref_element at import time so both backends
integrate against identical constants.
"""

import numpy as np

from libc.math cimport fabs, sqrt
from libc.string cimport memset
from scipy.linalg.cython_lapack cimport dgesv

from .errors import DegenerateTet, SingularDofMatrix
from . import ref_element as _ref

# ---------------------------------------------------------------------------
# shared rational tables (unit-volume barycentric integrals)

cdef double[:, :, ::1] FACE_TAB = np.array(_ref.FACE_MOMENT_TABLE, dtype=np.float64)
cdef double[::1] VOL_TAB = np.array(_ref.MONO_VOLUME, dtype=np.float64)
cdef double[:, ::1] P1M = np.array(_ref.P1_MASS, dtype=np.float64)

cdef int[:, ::1] PAIRS = np.array(_ref.MONO_PAIRS, dtype=np.intc)

def _pair_index_table():
    tab = np.full((4, 4), -1, dtype=np.intc)
    for k, (a, b) in enumerate(_ref.MONO_PAIRS):
        tab[a, b] = 4 + k
        tab[b, a] = 4 + k
    return tab

cdef int[:, ::1] PAIR_IDX = _pair_index_table()

cdef double[6] W6
W6[0] = 1.0; W6[1] = 1.0; W6[2] = 1.0; W6[3] = 2.0; W6[4] = 2.0; W6[5] = 2.0

# complement vertex pair (k, l) of the edge shared by faces (i, j)
cdef int[6][4] EDGE_COMPLEMENT
EDGE_COMPLEMENT[0][:] = [0, 1, 2, 3]
EDGE_COMPLEMENT[1][:] = [0, 2, 1, 3]
EDGE_COMPLEMENT[2][:] = [0, 3, 1, 2]
EDGE_COMPLEMENT[3][:] = [1, 2, 0, 3]
EDGE_COMPLEMENT[4][:] = [1, 3, 0, 2]
EDGE_COMPLEMENT[5][:] = [2, 3, 0, 1]

# ---------------------------------------------------------------------------

cdef inline double _dot(const double* a, const double* b) nogil:
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


cdef inline void _sym_outer(const double* a, const double* b, double* out) nogil:
    out[0] = a[0] * b[0]
    out[1] = a[1] * b[1]
    out[2] = a[2] * b[2]
    out[3] = 0.5 * (a[0] * b[1] + a[1] * b[0])
    out[4] = 0.5 * (a[0] * b[2] + a[2] * b[0])
    out[5] = 0.5 * (a[1] * b[2] + a[2] * b[1])


cdef inline void _matvec6(const double* t, const double* v, double* out) nogil:
    out[0] = t[0] * v[0] + t[3] * v[1] + t[4] * v[2]
    out[1] = t[3] * v[0] + t[1] * v[1] + t[5] * v[2]
    out[2] = t[4] * v[0] + t[5] * v[1] + t[2] * v[2]


cdef inline double _nn_quad(const double* t, const double* n) nogil:
    return (t[0] * n[0] * n[0] + t[1] * n[1] * n[1] + t[2] * n[2] * n[2]
            + 2.0 * (t[3] * n[0] * n[1] + t[4] * n[0] * n[2] + t[5] * n[1] * n[2]))


cdef void _dof_apply(const double* poly, const double* grad, const double* normals,
                     const double* area, double volume, double* out) nogil:
    """All 30 degrees of freedom of a dense (10, 6) polynomial."""
    cdef int i, p, m, c, v, j, d, k, a, b
    cdef double s, acc
    cdef double nq[10]
    cdef double divc[12]
    cdef double tmp[3]
    # 12 face moments
    for i in range(4):
        for m in range(10):
            nq[m] = _nn_quad(&poly[6 * m], &normals[3 * i])
        for p in range(3):
            acc = 0.0
            for m in range(10):
                acc += nq[m] * FACE_TAB[i, m, p]
            out[3 * i + p] = area[i] * area[i] * acc
    # 6 volume moments against the canonical symmetric basis
    for c in range(6):
        acc = 0.0
        for m in range(10):
            acc += poly[6 * m + c] * VOL_TAB[m]
        out[12 + c] = acc * volume * W6[c]
    # 12 divergence moments against l_v e_d
    memset(divc, 0, sizeof(divc))
    for a in range(4):
        _matvec6(&poly[6 * a], &grad[3 * a], tmp)
        for j in range(4):
            for d in range(3):
                divc[3 * j + d] += tmp[d]
    for k in range(6):
        a = PAIRS[k, 0]
        b = PAIRS[k, 1]
        _matvec6(&poly[6 * (4 + k)], &grad[3 * a], tmp)
        for d in range(3):
            divc[3 * b + d] += tmp[d]
        _matvec6(&poly[6 * (4 + k)], &grad[3 * b], tmp)
        for d in range(3):
            divc[3 * a + d] += tmp[d]
    for v in range(4):
        for d in range(3):
            acc = 0.0
            for j in range(4):
                acc += divc[3 * j + d] * P1M[j, v]
            out[18 + 3 * v + d] = acc * volume


cdef int _build_one(const double* v, double* out_vol, double* out_h,
                    double* grad, double* coeffs) nogil:
    """Returns 0 on success, 1 for a degenerate tet, 2 for a singular solve."""
    cdef int i, j, k, l, m, c, p, t, nm
    cdef double r0[3]
    cdef double r1[3]
    cdef double r2[3]
    cdef double det, volume, h, d2, denom, w
    cdef double normals[12]
    cdef double area[4]
    cdef double edge[48]  # edge[(4*i+j)*3 + d]
    cdef double nn[36]
    cdef double poly[60]
    cdef double vmat[900]  # column-major for LAPACK
    cdef double combo[900]
    cdef int ipiv[30]
    cdef int n30 = 30, info = 0
    cdef int monos[4]

    for i in range(3):
        r0[i] = v[3 + i] - v[i]
        r1[i] = v[6 + i] - v[i]
        r2[i] = v[9 + i] - v[i]
    det = (r0[0] * (r1[1] * r2[2] - r1[2] * r2[1])
           - r0[1] * (r1[0] * r2[2] - r1[2] * r2[0])
           + r0[2] * (r1[0] * r2[1] - r1[1] * r2[0]))
    h = 0.0
    for i in range(4):
        for j in range(i + 1, 4):
            d2 = 0.0
            for k in range(3):
                d2 += (v[3 * i + k] - v[3 * j + k]) ** 2
            if d2 > h:
                h = d2
    h = sqrt(h)
    volume = fabs(det) / 6.0
    if volume < 1e-14 * h * h * h:
        return 1
    out_vol[0] = volume
    out_h[0] = h
    # grad[1] = r1 x r2 / det, cyclic; grad[0] = -(g1+g2+g3)
    grad[3 + 0] = (r1[1] * r2[2] - r1[2] * r2[1]) / det
    grad[3 + 1] = (r1[2] * r2[0] - r1[0] * r2[2]) / det
    grad[3 + 2] = (r1[0] * r2[1] - r1[1] * r2[0]) / det
    grad[6 + 0] = (r2[1] * r0[2] - r2[2] * r0[1]) / det
    grad[6 + 1] = (r2[2] * r0[0] - r2[0] * r0[2]) / det
    grad[6 + 2] = (r2[0] * r0[1] - r2[1] * r0[0]) / det
    grad[9 + 0] = (r0[1] * r1[2] - r0[2] * r1[1]) / det
    grad[9 + 1] = (r0[2] * r1[0] - r0[0] * r1[2]) / det
    grad[9 + 2] = (r0[0] * r1[1] - r0[1] * r1[0]) / det
    for k in range(3):
        grad[k] = -(grad[3 + k] + grad[6 + k] + grad[9 + k])
    for i in range(4):
        d2 = sqrt(_dot(&grad[3 * i], &grad[3 * i]))
        area[i] = 3.0 * volume * d2
        for k in range(3):
            normals[3 * i + k] = -grad[3 * i + k] / d2
    # unit edge vectors, lower- to higher-indexed endpoint
    for m in range(6):
        i = EDGE_COMPLEMENT[m][0]
        j = EDGE_COMPLEMENT[m][1]
        k = EDGE_COMPLEMENT[m][2]
        l = EDGE_COMPLEMENT[m][3]
        d2 = 0.0
        for c in range(3):
            poly[c] = v[3 * l + c] - v[3 * k + c]
            d2 += poly[c] * poly[c]
        d2 = sqrt(d2)
        for c in range(3):
            edge[(4 * i + j) * 3 + c] = poly[c] / d2
            edge[(4 * j + i) * 3 + c] = poly[c] / d2
    # tensors T1..T6
    for i in range(4):
        j = (i + 1) % 4
        denom = (_dot(&normals[3 * i], &edge[(4 * j + (i + 2) % 4) * 3])
                 * _dot(&normals[3 * i], &edge[(4 * j + (i + 3) % 4) * 3]))
        _sym_outer(&edge[(4 * j + (i + 2) % 4) * 3], &edge[(4 * j + (i + 3) % 4) * 3], &nn[6 * i])
        for c in range(6):
            nn[6 * i + c] /= denom
    _sym_outer(&edge[(4 * 0 + 1) * 3], &edge[(4 * 2 + 3) * 3], &nn[24])
    _sym_outer(&edge[(4 * 0 + 2) * 3], &edge[(4 * 1 + 3) * 3], &nn[30])

    # dof matrix column by column over the spanning basis
    for l in range(30):
        memset(poly, 0, sizeof(poly))
        if l < 28:
            i = l // 7
            p = l % 7
            t = i
            if p < 4:
                nm = 1
                monos[0] = p
            else:
                nm = 1
                monos[0] = PAIR_IDX[i, (i + p - 3) % 4]
        else:
            t = 4 + (l - 28)
            nm = 4
            for k in range(4):
                monos[k] = k
        for k in range(nm):
            for c in range(6):
                poly[6 * monos[k] + c] = nn[6 * t + c]
        _dof_apply(poly, grad, normals, area, volume, combo)
        for k in range(30):
            vmat[30 * l + k] = combo[k]
    # combo := V^{-1} via dgesv on V X = I
    memset(combo, 0, sizeof(combo))
    for k in range(30):
        combo[30 * k + k] = 1.0
    dgesv(&n30, &n30, vmat, &n30, ipiv, combo, &n30, &info)
    if info != 0:
        return 2
    # nodal coefficients: N_l = sum_m combo[m, l] span_m
    memset(coeffs, 0, sizeof(double) * 30 * 60)
    for m in range(30):
        if m < 28:
            i = m // 7
            p = m % 7
            t = i
            nm = 1
            if p < 4:
                monos[0] = p
            else:
                monos[0] = PAIR_IDX[i, (i + p - 3) % 4]
        else:
            t = 4 + (m - 28)
            nm = 4
            for k in range(4):
                monos[k] = k
        for l in range(30):
            w = combo[30 * l + m]
            if w == 0.0:
                continue
            for k in range(nm):
                for c in range(6):
                    coeffs[60 * l + 6 * monos[k] + c] += w * nn[6 * t + c]
    return 0


def build_shapes(double[:, :, ::1] verts):
    """Geometry and nodal shape coefficients for a (ne, 4, 3) vertex batch."""
    cdef Py_ssize_t ne = verts.shape[0]
    if verts.shape[1] != 4 or verts.shape[2] != 3:
        raise ValueError("expected a (ne, 4, 3) vertex array")
    volume = np.empty(ne)
    h = np.empty(ne)
    grad = np.empty((ne, 4, 3))
    coeffs = np.empty((ne, 30, 10, 6))
    cdef double[::1] vol_v = volume
    cdef double[::1] h_v = h
    cdef double[:, :, ::1] grad_v = grad
    cdef double[:, :, :, ::1] coeff_v = coeffs
    cdef Py_ssize_t e
    cdef int status = 0
    cdef Py_ssize_t bad = -1
    with nogil:
        for e in range(ne):
            status = _build_one(&verts[e, 0, 0], &vol_v[e], &h_v[e],
                                &grad_v[e, 0, 0], &coeff_v[e, 0, 0, 0])
            if status != 0:
                bad = e
                break
    if status == 1:
        raise DegenerateTet(f"degenerate tetrahedron at batch index {bad}")
    if status == 2:
        raise SingularDofMatrix(f"singular 30x30 DOF matrix at batch index {bad}")
    return volume, h, grad, coeffs
