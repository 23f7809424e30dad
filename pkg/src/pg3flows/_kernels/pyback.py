"""Pure-numpy implementations of the hot geometric kernels.

This is the fallback backend; ``pg3flows._kernels`` prefers the compiled
Cython twin (``fastback``) when it is importable.  Both expose the same
functions with the same semantics, and the test suite checks them against
each other.
"""

import numpy as np

NAME = "python"

# Plücker ordering (p01, p02, p03, p23, p31, p12), indices into a 4-vector.
_PAIRS = ((0, 1), (0, 2), (0, 3), (2, 3), (3, 1), (1, 2))


def quat_mul(a, b):
    """Hamilton product of quaternions given as length-4 arrays (w,x,y,z)."""
    w1, x1, y1, z1 = a
    w2, x2, y2, z2 = b
    return np.array([
        w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
        w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
        w1 * y2 + y1 * w2 + z1 * x2 - x1 * z2,
        w1 * z2 + z1 * w2 + x1 * y2 - y1 * x2,
    ])


def quat_conj(a):
    out = np.array(a, dtype=float, copy=True)
    out[1:] = -out[1:]
    return out


def quat_inv(a):
    n2 = float(np.dot(a, a))
    if n2 == 0.0:
        raise ZeroDivisionError("zero quaternion has no inverse")
    return quat_conj(a) / n2


def plucker_from_frame(u, v):
    """Unnormalized Plücker 6-vector (the 2x2 minors of the pair u, v)."""
    out = np.empty(6)
    for k, (i, j) in enumerate(_PAIRS):
        out[k] = u[i] * v[j] - u[j] * v[i]
    return out


def klein_form(p):
    """Quadric value p01*p23 + p02*p31 + p03*p12."""
    return float(p[0] * p[3] + p[1] * p[4] + p[2] * p[5])


def plucker_pairing(p, q):
    """Symplectic pairing; zero iff the two lines meet."""
    return float(p[0] * q[3] + p[1] * q[4] + p[2] * q[5]
                 + p[3] * q[0] + p[4] * q[1] + p[5] * q[2])


def sign_canonical(v):
    """Flip sign so the entry of largest magnitude (lowest index on ties)
    is positive.  Returns a new array."""
    v = np.asarray(v, dtype=float)
    idx = int(np.argmax(np.abs(v)))
    if v[idx] < 0.0:
        return -v
    return v.copy()


def orthonormalize_pair(u, v):
    """Gram-Schmidt a pair of 4-vectors; returns (u', v', ok)."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    nu = float(np.linalg.norm(u))
    if nu == 0.0:
        return u, v, False
    u1 = u / nu
    w = v - np.dot(u1, v) * u1
    nw = float(np.linalg.norm(w))
    if nw == 0.0:
        return u1, w, False
    return u1, w / nw, True


def frame_distance(f, g):
    """Projector (chordal Grassmann) distance of two orthonormal 4x2 frames,
    ||P_f - P_g||_F / sqrt(2).  The projector difference is formed first so
    small distances are not lost to cancellation under the square root."""
    d = f @ f.T - g @ g.T
    return float(np.linalg.norm(d) / np.sqrt(2.0))


def chordal_point_distance(x, y):
    """sin of the angle between the 1-spaces spanned by unit vectors x, y,
    computed as the norm of the rejection of x from y (cancellation-free
    for nearly equal spans)."""
    c = float(np.dot(x, y))
    r = x - c * np.asarray(y, dtype=float)
    return min(1.0, float(np.linalg.norm(r)))


def apply_to_frame(m, f):
    """Image frame m @ f, re-orthonormalized.  Returns (frame, cond, ok)."""
    img = m @ f
    sv = np.linalg.svd(img, compute_uv=False)
    if sv[1] == 0.0:
        return img, np.inf, False
    cond = float(sv[0] / sv[1])
    u, v, ok = orthonormalize_pair(img[:, 0], img[:, 1])
    return np.column_stack([u, v]), cond, ok
