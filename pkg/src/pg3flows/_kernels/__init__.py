"""Kernel backend selection.

The compiled Cython backend is preferred; the pure-numpy fallback is used
when the extension is unavailable or PG3FLOWS_PURE_PYTHON is set.
"""

import os

if os.environ.get("PG3FLOWS_PURE_PYTHON"):
    from . import pyback as backend
else:
    try:
        from . import fastback as backend  # type: ignore[attr-defined]
    except ImportError:
        from . import pyback as backend

BACKEND = backend.NAME

quat_mul = backend.quat_mul
quat_conj = backend.quat_conj
quat_inv = backend.quat_inv
plucker_from_frame = backend.plucker_from_frame
klein_form = backend.klein_form
plucker_pairing = backend.plucker_pairing
sign_canonical = backend.sign_canonical
orthonormalize_pair = backend.orthonormalize_pair
frame_distance = backend.frame_distance
chordal_point_distance = backend.chordal_point_distance
apply_to_frame = backend.apply_to_frame
