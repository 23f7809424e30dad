# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of ``pyback``; same functions, scalar loops in C."""

import numpy as np

from libc.math cimport sqrt, fabs

NAME = "cython"

cdef int _PI[6]
cdef int _PJ[6]
_PI[0] = 0; _PJ[0] = 1
_PI[1] = 0; _PJ[1] = 2
_PI[2] = 0; _PJ[2] = 3
_PI[3] = 2; _PJ[3] = 3
_PI[4] = 3; _PJ[4] = 1
_PI[5] = 1; _PJ[5] = 2


def quat_mul(a, b):
    cdef const double[:] av = np.ascontiguousarray(a, dtype=np.float64)
    cdef const double[:] bv = np.ascontiguousarray(b, dtype=np.float64)
    out = np.empty(4)
    cdef double[:] ov = out
    ov[0] = av[0] * bv[0] - av[1] * bv[1] - av[2] * bv[2] - av[3] * bv[3]
    ov[1] = av[0] * bv[1] + av[1] * bv[0] + av[2] * bv[3] - av[3] * bv[2]
    ov[2] = av[0] * bv[2] + av[2] * bv[0] + av[3] * bv[1] - av[1] * bv[3]
    ov[3] = av[0] * bv[3] + av[3] * bv[0] + av[1] * bv[2] - av[2] * bv[1]
    return out


def quat_conj(a):
    cdef const double[:] av = np.ascontiguousarray(a, dtype=np.float64)
    out = np.empty(4)
    cdef double[:] ov = out
    ov[0] = av[0]
    ov[1] = -av[1]
    ov[2] = -av[2]
    ov[3] = -av[3]
    return out


def quat_inv(a):
    cdef const double[:] av = np.ascontiguousarray(a, dtype=np.float64)
    cdef double n2 = av[0] * av[0] + av[1] * av[1] + av[2] * av[2] + av[3] * av[3]
    if n2 == 0.0:
        raise ZeroDivisionError("zero quaternion has no inverse")
    out = np.empty(4)
    cdef double[:] ov = out
    ov[0] = av[0] / n2
    ov[1] = -av[1] / n2
    ov[2] = -av[2] / n2
    ov[3] = -av[3] / n2
    return out


def plucker_from_frame(u, v):
    cdef const double[:] uv = np.ascontiguousarray(u, dtype=np.float64)
    cdef const double[:] vv = np.ascontiguousarray(v, dtype=np.float64)
    out = np.empty(6)
    cdef double[:] ov = out
    cdef int k, i, j
    for k in range(6):
        i = _PI[k]
        j = _PJ[k]
        ov[k] = uv[i] * vv[j] - uv[j] * vv[i]
    return out


def klein_form(p):
    cdef const double[:] pv = np.ascontiguousarray(p, dtype=np.float64)
    return pv[0] * pv[3] + pv[1] * pv[4] + pv[2] * pv[5]


def plucker_pairing(p, q):
    cdef const double[:] pv = np.ascontiguousarray(p, dtype=np.float64)
    cdef const double[:] qv = np.ascontiguousarray(q, dtype=np.float64)
    return (pv[0] * qv[3] + pv[1] * qv[4] + pv[2] * qv[5]
            + pv[3] * qv[0] + pv[4] * qv[1] + pv[5] * qv[2])


def sign_canonical(v):
    arr = np.array(v, dtype=np.float64, copy=True)
    cdef double[:] av = arr
    cdef int n = av.shape[0]
    cdef int i, idx = 0
    cdef double best = fabs(av[0])
    for i in range(1, n):
        if fabs(av[i]) > best:
            best = fabs(av[i])
            idx = i
    if av[idx] < 0.0:
        for i in range(n):
            av[i] = -av[i]
    return arr


def orthonormalize_pair(u, v):
    u1 = np.array(u, dtype=np.float64, copy=True)
    v1 = np.array(v, dtype=np.float64, copy=True)
    cdef double[:] uv = u1
    cdef double[:] vv = v1
    cdef double nu = 0.0, dot = 0.0, nw = 0.0
    cdef int i
    for i in range(4):
        nu += uv[i] * uv[i]
    nu = sqrt(nu)
    if nu == 0.0:
        return u1, v1, False
    for i in range(4):
        uv[i] /= nu
    for i in range(4):
        dot += uv[i] * vv[i]
    for i in range(4):
        vv[i] -= dot * uv[i]
    for i in range(4):
        nw += vv[i] * vv[i]
    nw = sqrt(nw)
    if nw == 0.0:
        return u1, v1, False
    for i in range(4):
        vv[i] /= nw
    return u1, v1, True


def frame_distance(f, g):
    # projector difference first; cancellation-free for nearby frames
    cdef const double[:, :] fv = np.ascontiguousarray(f, dtype=np.float64)
    cdef const double[:, :] gv = np.ascontiguousarray(g, dtype=np.float64)
    cdef double s = 0.0, pf, pg, d
    cdef int i, j
    for i in range(4):
        for j in range(4):
            pf = fv[i, 0] * fv[j, 0] + fv[i, 1] * fv[j, 1]
            pg = gv[i, 0] * gv[j, 0] + gv[i, 1] * gv[j, 1]
            d = pf - pg
            s += d * d
    return sqrt(s / 2.0)


def chordal_point_distance(x, y):
    # norm of the rejection of x from y; cancellation-free for nearby spans
    cdef const double[:] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef const double[:] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef double c = 0.0, s = 0.0, r
    cdef int i
    for i in range(4):
        c += xv[i] * yv[i]
    for i in range(4):
        r = xv[i] - c * yv[i]
        s += r * r
    s = sqrt(s)
    if s > 1.0:
        s = 1.0
    return s


def apply_to_frame(m, f):
    img = np.asarray(m, dtype=np.float64) @ np.asarray(f, dtype=np.float64)
    sv = np.linalg.svd(img, compute_uv=False)
    if sv[1] == 0.0:
        return img, np.inf, False
    cond = float(sv[0] / sv[1])
    u, v, ok = orthonormalize_pair(img[:, 0], img[:, 1])
    return np.column_stack([u, v]), cond, ok
