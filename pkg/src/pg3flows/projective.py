"""Points, lines, hyperplanes and projective maps of PG(3,R).

Lines are carried both as an orthonormal 2-frame and as a unit,
sign-canonicalized Plücker 6-vector on the Klein quadric, ordering
(p01, p02, p03, p23, p31, p12).  All values are immutable; equality is
metric (chordal for points, projector distance for lines).
"""

import enum
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from . import _kernels as K
from .errors import ConditioningLoss, DegenerateJoin, OffQuadric
from .tolerances import TOL

E = np.eye(4)

_COND_LIMIT = 1e12


def _readonly(a):
    a = np.asarray(a, dtype=float)
    a.setflags(write=False)
    return a


class ProjPoint:
    """1-dimensional subspace of R^4, stored unit-norm and sign-canonical."""

    __slots__ = ("coords",)

    def __init__(self, coords):
        v = np.asarray(coords, dtype=float).reshape(4)
        n = np.linalg.norm(v)
        if n == 0.0 or not np.isfinite(n):
            raise ValueError("point coordinates must be finite and nonzero")
        self.coords = _readonly(K.sign_canonical(v / n))

    def distance(self, other: "ProjPoint") -> float:
        return K.chordal_point_distance(self.coords, other.coords)

    def isclose(self, other: "ProjPoint", tol: float = TOL.decision) -> bool:
        return self.distance(other) <= tol

    def __repr__(self):
        return f"ProjPoint({np.round(self.coords, 6).tolist()})"


class Hyperplane:
    """Kernel of a covector, normalized like a point."""

    __slots__ = ("covector",)

    def __init__(self, covector):
        v = np.asarray(covector, dtype=float).reshape(4)
        n = np.linalg.norm(v)
        if n == 0.0 or not np.isfinite(n):
            raise ValueError("covector must be finite and nonzero")
        self.covector = _readonly(K.sign_canonical(v / n))

    def point_residual(self, p: ProjPoint) -> float:
        return abs(float(self.covector @ p.coords))

    def contains(self, p: ProjPoint, tol: float = TOL.decision) -> bool:
        return self.point_residual(p) <= tol

    def basis(self) -> np.ndarray:
        """Orthonormal 4x3 basis of the hyperplane."""
        # null space of the covector
        _, _, vt = np.linalg.svd(self.covector.reshape(1, 4))
        return vt[1:].T

    def __repr__(self):
        return f"Hyperplane({np.round(self.covector, 6).tolist()})"


class Line:
    """2-dimensional subspace of R^4: orthonormal frame + Plücker vector."""

    __slots__ = ("frame", "plucker")

    def __init__(self, frame):
        f = np.asarray(frame, dtype=float)
        if f.shape != (4, 2):
            raise ValueError("line frame must be a 4x2 column pair")
        u, v, ok = K.orthonormalize_pair(f[:, 0], f[:, 1])
        if not ok:
            raise ValueError("frame vectors do not span a 2-space")
        self.frame = _readonly(np.column_stack([u, v]))
        p = K.plucker_from_frame(u, v)
        p = p / np.linalg.norm(p)
        self.plucker = _readonly(K.sign_canonical(p))

    @classmethod
    def from_spanning(cls, u, v):
        return cls(np.column_stack([u, v]))

    def projector(self) -> np.ndarray:
        return self.frame @ self.frame.T

    def klein_residual(self) -> float:
        return abs(K.klein_form(self.plucker))

    def contains(self, p: ProjPoint, tol: float = TOL.decision) -> bool:
        return incidence_residual(p, self) <= tol

    def point(self, weights=(1.0, 0.0)) -> ProjPoint:
        """A point of the line, given combination weights for the frame."""
        return ProjPoint(self.frame @ np.asarray(weights, dtype=float))

    def isclose(self, other: "Line", tol: float = TOL.decision) -> bool:
        return grassmann_distance(self, other) <= tol

    def __repr__(self):
        return f"Line(plucker={np.round(self.plucker, 6).tolist()})"


class ProjMap:
    """Invertible 4x4 matrix, unit Frobenius norm, sign-canonical."""

    __slots__ = ("matrix",)

    def __init__(self, matrix):
        m = np.asarray(matrix, dtype=float).reshape(4, 4)
        n = np.linalg.norm(m)
        if n == 0.0 or not np.isfinite(n):
            raise ValueError("matrix must be finite and nonzero")
        m = m / n
        if abs(np.linalg.det(m)) == 0.0:
            raise ValueError("matrix must be invertible")
        self.matrix = _readonly(K.sign_canonical(m.ravel()).reshape(4, 4))

    @classmethod
    def identity(cls):
        return cls(E)

    def compose(self, other: "ProjMap") -> "ProjMap":
        """self after other: (L^other)^self == L^(self.compose(other))."""
        return ProjMap(self.matrix @ other.matrix)

    def inverse(self) -> "ProjMap":
        return ProjMap(np.linalg.inv(self.matrix))

    def apply_point(self, p: ProjPoint) -> ProjPoint:
        return ProjPoint(self.matrix @ p.coords)

    def isclose(self, other: "ProjMap", tol: float = TOL.decision) -> bool:
        return float(np.linalg.norm(self.matrix - other.matrix)) <= tol

    def __repr__(self):
        return f"ProjMap({np.round(self.matrix, 6).tolist()})"


# ---------------------------------------------------------------------------
# operations


def join_points(p: ProjPoint, q: ProjPoint, tol: float = 1e-9) -> Line:
    """Line p v q; raises DegenerateJoin when the points coincide."""
    if p.distance(q) <= tol:
        raise DegenerateJoin(f"points within {tol} of each other")
    return Line.from_spanning(p.coords, q.coords)


# index pairs of the Plücker ordering, used to rebuild the bivector matrix
_PAIRS = ((0, 1), (0, 2), (0, 3), (2, 3), (3, 1), (1, 2))


def plucker_to_bivector(p) -> np.ndarray:
    """Antisymmetric 4x4 matrix B with B[i,j] = p_ij."""
    b = np.zeros((4, 4))
    for k, (i, j) in enumerate(_PAIRS):
        b[i, j] = p[k]
        b[j, i] = -p[k]
    return b


def plucker_lift(v, tol: float = 1e-8) -> Line:
    """Inverse of the Plücker embedding for a 6-vector on the quadric."""
    v = np.asarray(v, dtype=float).reshape(6)
    n = np.linalg.norm(v)
    if n == 0.0:
        raise OffQuadric(np.inf)
    v = v / n
    residual = abs(K.klein_form(v))
    if residual > tol:
        raise OffQuadric(residual)
    b = plucker_to_bivector(v)
    # columns of a decomposable bivector matrix span the line
    u, _, _ = np.linalg.svd(b)
    return Line(u[:, :2])


def grassmann_distance(l: Line, m: Line) -> float:
    """Projector metric ||P_L - P_M||_F / sqrt(2), in [0, sqrt(2)]."""
    return K.frame_distance(l.frame, m.frame)


def incidence_residual(p: ProjPoint, l: Line) -> float:
    """Distance of the unit point vector from its projection onto the line."""
    x = p.coords
    r = x - l.frame @ (l.frame.T @ x)
    return float(np.linalg.norm(r))


class MeetKind(enum.Enum):
    EQUAL = "equal"
    MEET = "meet"
    DISJOINT = "disjoint"


@dataclass(frozen=True)
class MeetResult:
    kind: MeetKind
    pairing: float
    point: Optional[ProjPoint] = None


def lines_meet(l: Line, m: Line, tol: float = TOL.decision) -> MeetResult:
    """Classify a pair of lines via the symplectic Plücker pairing."""
    omega = K.plucker_pairing(l.plucker, m.plucker)
    if grassmann_distance(l, m) <= tol:
        return MeetResult(MeetKind.EQUAL, omega)
    if abs(omega) > tol:
        return MeetResult(MeetKind.DISJOINT, omega)
    # 1-dimensional common subspace: smallest right singular vector of the
    # stacked complementary projectors
    stack = np.vstack([np.eye(4) - l.projector(), np.eye(4) - m.projector()])
    _, _, vt = np.linalg.svd(stack)
    return MeetResult(MeetKind.MEET, omega, point=ProjPoint(vt[-1]))


def apply_to_line(g: ProjMap, l: Line, cond_limit: float = _COND_LIMIT) -> Line:
    """Image line, frame re-orthonormalized before Plücker computation."""
    frame, cond, ok = K.apply_to_frame(g.matrix, l.frame)
    if not ok or cond > cond_limit:
        raise ConditioningLoss(f"image frame condition {cond:.3e}")
    return Line(frame)


def exterior_square(matrix) -> np.ndarray:
    """Induced 6x6 action on Plücker vectors (second exterior power)."""
    m = np.asarray(matrix, dtype=float)
    out = np.empty((6, 6))
    for a, (i, j) in enumerate(_PAIRS):
        for b, (k, l) in enumerate(_PAIRS):
            out[a, b] = m[i, k] * m[j, l] - m[i, l] * m[j, k]
    return out


def _as_rng(seed: Union[int, np.random.Generator]) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def sample_point(seed: Union[int, np.random.Generator]) -> ProjPoint:
    """Rotation-invariant random point (normalized standard Gaussian)."""
    rng = _as_rng(seed)
    return ProjPoint(rng.standard_normal(4))


def sample_line(seed: Union[int, np.random.Generator]) -> Line:
    """Rotation-invariant random line (orthonormalized 4x2 Gaussian)."""
    rng = _as_rng(seed)
    return Line(rng.standard_normal((4, 2)))


def sample_hyperplane(seed: Union[int, np.random.Generator]) -> Hyperplane:
    rng = _as_rng(seed)
    return Hyperplane(rng.standard_normal(4))
