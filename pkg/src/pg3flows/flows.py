"""The nine canonical one-parameter projective flows and their classifier.

Each case tag names a real Jordan structure of a 4x4 generator, normalized
by a scalar shift so that one eigenvalue is 0 (or purely imaginary).  The
closed-form evaluator is authoritative; the matrix exponential of the
stored generator is only a cross-check.
"""

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product as iproduct
from typing import List, Optional, Tuple

import numpy as np

from . import _kernels as K
from .errors import NotClassifiable, PreconditionError
from .projective import Line, ProjMap, exterior_square, plucker_lift
from .tolerances import TOL


class JordanCase(enum.Enum):
    A1 = "a1"
    A2 = "a2"
    B1 = "b1"
    B2 = "b2"
    C1 = "c1"
    C2 = "c2"
    C3 = "c3"
    C4 = "c4"
    C5 = "c5"


@dataclass(frozen=True)
class FlowParams:
    a: float = 0.0
    b: float = 0.0
    c: float = 0.0
    d: float = 0.0

    def to_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "c": self.c, "d": self.d}


def _rot(alpha: float) -> np.ndarray:
    c, s = math.cos(alpha), math.sin(alpha)
    return np.array([[c, -s], [s, c]])


def _rot_gen(a: float) -> np.ndarray:
    return np.array([[0.0, -a], [a, 0.0]])


def _check_params(case: JordanCase, p: FlowParams):
    need_a = case in (JordanCase.A1, JordanCase.A2, JordanCase.B1, JordanCase.B2)
    if need_a and p.a == 0.0:
        raise PreconditionError(f"case {case.value} requires a != 0")
    if case is JordanCase.A1 and p.c == 0.0:
        raise PreconditionError("case a1 requires c != 0")


def canonical_generator(case: JordanCase, p: FlowParams) -> np.ndarray:
    a, b, c, d = p.a, p.b, p.c, p.d
    g = np.zeros((4, 4))
    if case is JordanCase.A1:
        g[:2, :2] = _rot_gen(a)
        g[2:, 2:] = _rot_gen(c) + b * np.eye(2)
    elif case is JordanCase.A2:
        g[:2, :2] = _rot_gen(a)
        g[2:, 2:] = _rot_gen(a)
        g[:2, 2:] = np.eye(2)
    elif case is JordanCase.B1:
        g[:2, :2] = _rot_gen(a)
        g[2, 2] = b
        g[3, 3] = c
    elif case is JordanCase.B2:
        g[:2, :2] = _rot_gen(a)
        g[2, 2] = g[3, 3] = b
        g[2, 3] = 1.0
    elif case is JordanCase.C1:
        g[0, 1] = g[1, 2] = g[2, 3] = 1.0
    elif case is JordanCase.C2:
        g[0, 1] = g[1, 2] = 1.0
        g[3, 3] = b
    elif case is JordanCase.C3:
        g[0, 0] = g[1, 1] = a
        g[0, 1] = 1.0
        g[2, 3] = 1.0
    elif case is JordanCase.C4:
        g[0, 1] = 1.0
        g[2, 2] = b
        g[3, 3] = c
    elif case is JordanCase.C5:
        g[1, 1] = b
        g[2, 2] = c
        g[3, 3] = d
    else:  # pragma: no cover
        raise ValueError(case)
    return g


def gamma_matrix(case: JordanCase, p: FlowParams, t: float) -> np.ndarray:
    """Closed-form exp(t*A) for the canonical generator, unnormalized."""
    a, b, c, d = p.a, p.b, p.c, p.d
    g = np.zeros((4, 4))
    if case is JordanCase.A1:
        g[:2, :2] = _rot(a * t)
        g[2:, 2:] = math.exp(b * t) * _rot(c * t)
    elif case is JordanCase.A2:
        r = _rot(a * t)
        g[:2, :2] = r
        g[2:, 2:] = r
        g[:2, 2:] = t * r
    elif case is JordanCase.B1:
        g[:2, :2] = _rot(a * t)
        g[2, 2] = math.exp(b * t)
        g[3, 3] = math.exp(c * t)
    elif case is JordanCase.B2:
        g[:2, :2] = _rot(a * t)
        eb = math.exp(b * t)
        g[2, 2] = g[3, 3] = eb
        g[2, 3] = t * eb
    elif case is JordanCase.C1:
        g = np.eye(4)
        g[0, 1] = g[1, 2] = g[2, 3] = t
        g[0, 2] = g[1, 3] = t * t / 2.0
        g[0, 3] = t ** 3 / 6.0
    elif case is JordanCase.C2:
        g = np.eye(4)
        g[0, 1] = g[1, 2] = t
        g[0, 2] = t * t / 2.0
        g[3, 3] = math.exp(b * t)
    elif case is JordanCase.C3:
        ea = math.exp(a * t)
        g[0, 0] = g[1, 1] = ea
        g[0, 1] = t * ea
        g[2, 2] = g[3, 3] = 1.0
        g[2, 3] = t
    elif case is JordanCase.C4:
        g = np.eye(4)
        g[0, 1] = t
        g[2, 2] = math.exp(b * t)
        g[3, 3] = math.exp(c * t)
    elif case is JordanCase.C5:
        g[0, 0] = 1.0
        g[1, 1] = math.exp(b * t)
        g[2, 2] = math.exp(c * t)
        g[3, 3] = math.exp(d * t)
    else:  # pragma: no cover
        raise ValueError(case)
    return g


@dataclass(frozen=True)
class OneParamFlow:
    case: JordanCase
    params: FlowParams
    generator: np.ndarray = field(compare=False, default=None)

    def __post_init__(self):
        _check_params(self.case, self.params)
        if self.generator is None:
            object.__setattr__(
                self, "generator", canonical_generator(self.case, self.params)
            )

    def gamma_matrix(self, t: float) -> np.ndarray:
        return gamma_matrix(self.case, self.params, t)

    def gamma(self, t: float) -> ProjMap:
        return ProjMap(self.gamma_matrix(t))

    def eigenvalues(self) -> np.ndarray:
        """Exact eigenvalues of the canonical generator, from the params."""
        a, b, c, d = self.params.a, self.params.b, self.params.c, self.params.d
        case = self.case
        if case is JordanCase.A1:
            return np.array([1j * a, -1j * a, b + 1j * c, b - 1j * c])
        if case is JordanCase.A2:
            return np.array([1j * a, -1j * a, 1j * a, -1j * a])
        if case is JordanCase.B1:
            return np.array([1j * a, -1j * a, b, c])
        if case is JordanCase.B2:
            return np.array([1j * a, -1j * a, b, b])
        if case is JordanCase.C1:
            return np.zeros(4, dtype=complex)
        if case is JordanCase.C2:
            return np.array([0.0, 0.0, 0.0, b], dtype=complex)
        if case is JordanCase.C3:
            return np.array([a, a, 0.0, 0.0], dtype=complex)
        if case is JordanCase.C4:
            return np.array([0.0, 0.0, b, c], dtype=complex)
        return np.array([0.0, b, c, d], dtype=complex)

    def rotation_period(self) -> Optional[float]:
        """t0 = 2*pi/a for the cases with a rotation block."""
        if self.case in (JordanCase.A1, JordanCase.A2, JordanCase.B1, JordanCase.B2):
            return 2.0 * math.pi / self.params.a
        return None


def make_flow(case: JordanCase, **params) -> OneParamFlow:
    return OneParamFlow(case, FlowParams(**params))


def gamma(flow: OneParamFlow, t: float) -> ProjMap:
    if not np.isfinite(t):
        raise ValueError("t must be finite")
    return flow.gamma(t)


# ---------------------------------------------------------------------------
# classification


@dataclass
class ClassificationResult:
    case: JordanCase
    params: FlowParams
    conjugator: np.ndarray
    residual: float
    ambiguous: bool
    shift: float

    def flow(self) -> OneParamFlow:
        return OneParamFlow(self.case, self.params)

    def to_dict(self) -> dict:
        return {
            "case": self.case.value,
            "params": self.params.to_dict(),
            "conjugator": self.conjugator.tolist(),
            "residual": self.residual,
            "ambiguous": self.ambiguous,
            "shift": self.shift,
        }


def _partitions(n: int):
    if n == 0:
        yield ()
        return
    for first in range(n, 0, -1):
        for rest in _partitions(n - first):
            if not rest or first >= rest[0]:
                yield (first,) + rest


def _dendrogram_clusterings(values: List[complex]):
    """All clusterings obtained by cutting the single-linkage dendrogram."""
    clusters = [[i] for i in range(len(values))]
    yield [list(c) for c in clusters]
    while len(clusters) > 1:
        best = None
        for i in range(len(clusters)):
            for j in range(i + 1, len(clusters)):
                d = min(
                    abs(values[x] - values[y])
                    for x in clusters[i]
                    for y in clusters[j]
                )
                if best is None or d < best[0]:
                    best = (d, i, j)
        _, i, j = best
        merged = clusters[i] + clusters[j]
        clusters = [c for k, c in enumerate(clusters) if k not in (i, j)]
        clusters.append(merged)
        yield [list(c) for c in clusters]


def _solve_conjugation(b: np.ndarray, target: np.ndarray, trials: int = 16):
    """Find invertible g with g^-1 b g ~ target via the commutation kernel."""
    m = np.kron(np.eye(4), b) - np.kron(target.T, np.eye(4))
    _, sv, vt = np.linalg.svd(m)
    null_mask = sv <= max(1e-8 * sv[0], 1e-12)
    basis = vt[null_mask.sum() * -1:] if null_mask.any() else None
    if basis is None or len(basis) == 0:
        return None, np.inf
    rng = np.random.default_rng(12345)
    best_g, best_res = None, np.inf
    for _ in range(trials):
        coeffs = rng.standard_normal(len(basis))
        g = (coeffs @ basis).reshape(4, 4, order="F")
        sv_g = np.linalg.svd(g, compute_uv=False)
        if sv_g[-1] < 1e-6 * sv_g[0] or sv_g[0] == 0.0:
            continue
        g = g / sv_g[0]
        res = float(np.linalg.norm(np.linalg.solve(g, b @ g) - target))
        if res < best_res:
            best_g, best_res = g, res
    if best_g is None:
        return None, np.inf
    return best_g, best_res


def _hypotheses_for_atoms(atoms):
    """Enumerate (case, params, shift) guesses for one set of spectral atoms.

    ``atoms`` is a list of (value: complex, weight: int) where weight 2
    marks a conjugate pair (value has positive imaginary part) and weight
    1 a real eigenvalue.
    """
    out = []
    for clustering in _dendrogram_clusterings([a[0] for a in atoms]):
        # cluster summaries: (mean value, total pair weight, is_complex)
        summaries = []
        ok = True
        for cl in clustering:
            vals = [atoms[i][0] for i in cl]
            weights = [atoms[i][1] for i in cl]
            is_complex = any(w == 2 for w in weights)
            if is_complex and any(w == 1 for w in weights):
                ok = False  # refuse mixed real/complex clusters
                break
            summaries.append((np.mean(vals), sum(weights) // (2 if is_complex else 1), is_complex))
        if not ok:
            continue
        complex_cl = [s for s in summaries if s[2]]
        real_cl = [s for s in summaries if not s[2]]
        cweight = sum(s[1] for s in complex_cl)
        rweight = sum(s[1] for s in real_cl)

        if cweight == 2 and rweight == 0:
            if len(complex_cl) == 2:
                out.extend(_a1_hypothesis(complex_cl))
            else:
                out.extend(_a1_hypothesis([complex_cl[0], complex_cl[0]]))
                v = complex_cl[0][0]
                out.append((JordanCase.A2, FlowParams(a=abs(v.imag)), v.real))
        elif cweight == 1 and rweight == 2:
            v = complex_cl[0][0]
            shift = v.real
            a = abs(v.imag)
            if len(real_cl) == 2:
                b, c = sorted(s[0].real - shift for s in real_cl)
                out.append((JordanCase.B1, FlowParams(a=a, b=b, c=c), shift))
            else:
                b = real_cl[0][0].real - shift
                out.append((JordanCase.B1, FlowParams(a=a, b=b, c=b), shift))
                out.append((JordanCase.B2, FlowParams(a=a, b=b), shift))
        elif cweight == 0 and rweight == 4:
            out.extend(_real_hypotheses(real_cl))
    return out


def _a1_hypothesis(pairs):
    (v1, _, _), (v2, _, _) = pairs
    if v2.real < v1.real:
        v1, v2 = v2, v1
    return [
        (
            JordanCase.A1,
            FlowParams(a=abs(v1.imag), b=v2.real - v1.real, c=abs(v2.imag)),
            v1.real,
        )
    ]


def _real_hypotheses(real_cl):
    """Case guesses for an all-real spectrum given clusters (value, mult)."""
    out = []
    # for every way of splitting each cluster's multiplicity into blocks
    per_cluster = []
    for val, mult, _ in real_cl:
        per_cluster.append([(val.real, part) for part in _partitions(mult)])
    for combo in iproduct(*per_cluster):
        blocks = []  # (eigenvalue, block size)
        for val, part in combo:
            blocks.extend((val, s) for s in part)
        sizes = sorted((s for _, s in blocks), reverse=True)
        if sizes == [4]:
            shift = blocks[0][0]
            out.append((JordanCase.C1, FlowParams(), shift))
        elif sizes == [3, 1]:
            big = next(v for v, s in blocks if s == 3)
            small = next(v for v, s in blocks if s == 1)
            out.append((JordanCase.C2, FlowParams(b=small - big), big))
        elif sizes == [2, 2]:
            v1, v2 = sorted(v for v, _ in blocks)
            out.append((JordanCase.C3, FlowParams(a=v2 - v1), v1))
        elif sizes == [2, 1, 1]:
            big = next(v for v, s in blocks if s == 2)
            rest = sorted(v - big for v, s in blocks if s == 1)
            out.append((JordanCase.C4, FlowParams(b=rest[0], c=rest[1]), big))
        elif sizes == [1, 1, 1, 1]:
            vals = sorted(v for v, _ in blocks)
            shift = vals[0]
            b, c, d = (v - shift for v in vals[1:])
            out.append((JordanCase.C5, FlowParams(b=b, c=c, d=d), shift))
    # dedupe
    seen = set()
    uniq = []
    for case, params, shift in out:
        key = (case, round(params.a, 12), round(params.b, 12),
               round(params.c, 12), round(params.d, 12), round(shift, 12))
        if key not in seen:
            seen.add(key)
            uniq.append((case, params, shift))
    return uniq


def _spectral_atoms(eigs: np.ndarray, imag_cut: float):
    """Pair up conjugate eigenvalues; imaginary parts below the cut are
    treated as numerical noise on real eigenvalues."""
    eigs = sorted(eigs, key=lambda z: (z.real, z.imag))
    atoms = []
    used = [False] * len(eigs)
    for i, z in enumerate(eigs):
        if used[i]:
            continue
        if abs(z.imag) <= imag_cut:
            atoms.append((complex(z.real, 0.0), 1))
            used[i] = True
            continue
        # find the best conjugate partner
        best_j, best_d = None, np.inf
        for j in range(len(eigs)):
            if j != i and not used[j]:
                d = abs(eigs[j] - z.conjugate())
                if d < best_d:
                    best_j, best_d = j, d
        if best_j is None:
            return None  # unpaired complex eigenvalue; interpretation invalid
        used[i] = used[best_j] = True
        w = (z + eigs[best_j].conjugate()) / 2.0
        atoms.append((complex(w.real, abs(w.imag)), 2))
    return atoms


def classify_generator(a_matrix, tol: float = 1e-6) -> ClassificationResult:
    """Map an arbitrary real generator to its Jordan case.

    Hypotheses (eigenvalue clusterings x block partitions, plus real vs.
    complex readings of small imaginary parts) are scored by the residual
    of an explicitly constructed conjugation onto the canonical shifted
    generator; the smallest residual wins.  Jordan structure is
    discontinuous, so near-ties set the ``ambiguous`` flag instead of
    being silently resolved.
    """
    a = np.asarray(a_matrix, dtype=float).reshape(4, 4)
    scale = max(float(np.linalg.norm(a)), 1e-300)
    shift0 = float(np.trace(a)) / 4.0
    if np.linalg.norm(a - shift0 * np.eye(4)) <= tol * scale:
        raise NotClassifiable("generator is scalar within tolerance")

    eigs = np.linalg.eigvals(a)
    # two readings of borderline imaginary parts: strictly complex above
    # tol, and real up to the defective-perturbation scale eps^(1/4)
    cuts = sorted({tol * scale, 5e-2 * scale})
    hypotheses = []
    for cut in cuts:
        atoms = _spectral_atoms(eigs, cut)
        if atoms is not None:
            hypotheses.extend(_hypotheses_for_atoms(atoms))

    scored = []
    for case, params, shift in hypotheses:
        try:
            target = canonical_generator(case, params)
        except ValueError:
            continue
        g, res = _solve_conjugation(a - shift * np.eye(4), target)
        if g is not None:
            scored.append((res, case, params, shift, g))
    if not scored:
        raise NotClassifiable("no Jordan hypothesis admits a conjugation")
    scored.sort(key=lambda s: s[0])
    res, case, params, shift, g = scored[0]

    # ambiguity: competing distinct-case hypothesis within 10x, or a
    # small eigenvalue gap
    ambiguous = False
    for other in scored[1:]:
        if other[1] is not case and other[0] <= 10.0 * max(res, tol * scale):
            ambiguous = True
            break
    vals = sorted(eigs, key=lambda z: (z.real, z.imag))
    for i in range(len(vals)):
        for j in range(i + 1, len(vals)):
            gap = abs(vals[i] - vals[j])
            if 0.0 < gap < 10.0 * tol * scale:
                ambiguous = True

    return ClassificationResult(
        case=case, params=params, conjugator=g, residual=res,
        ambiguous=ambiguous, shift=shift,
    )


# ---------------------------------------------------------------------------
# closedness / compactness


class ClosureKind(enum.Enum):
    COMPACT_CLOSURE = "compact"
    NON_CLOSED_TORUS = "non-closed (closure is a 2-torus)"
    CLOSED_NON_COMPACT = "closed non-compact"


@dataclass(frozen=True)
class CompactnessStatus:
    kind: ClosureKind
    ratio: Optional[float] = None
    reconstruction: Optional[Tuple[int, int]] = None
    reconstruction_error: Optional[float] = None

    def to_dict(self) -> dict:
        d = {"kind": self.kind.value}
        if self.ratio is not None:
            d["ratio"] = self.ratio
            d["reconstruction"] = list(self.reconstruction)
            d["reconstruction_error"] = self.reconstruction_error
        return d


_DENOMINATOR_CUTOFF = 10 ** 6


def _rational_reconstruction(x: float):
    frac = Fraction(x).limit_denominator(_DENOMINATOR_CUTOFF)
    err = abs(x - float(frac))
    is_rational = err <= 1e-9 / max(frac.denominator, 1)
    return (frac.numerator, frac.denominator), err, is_rational


def compactness_status(flow: OneParamFlow) -> CompactnessStatus:
    """Closedness/compactness of the projective one-parameter group.

    Rationality of c/a is undecidable in floats; the verdict uses a
    continued-fraction reconstruction with denominator cutoff 10^6 and
    reports the reconstruction alongside it.
    """
    case, p = flow.case, flow.params
    if case is JordanCase.A1 and p.b == 0.0:
        ratio = p.c / p.a
        rec, err, rational = _rational_reconstruction(ratio)
        kind = ClosureKind.COMPACT_CLOSURE if rational else ClosureKind.NON_CLOSED_TORUS
        return CompactnessStatus(kind, ratio=ratio, reconstruction=rec,
                                 reconstruction_error=err)
    if case is JordanCase.B1 and p.b == 0.0 and p.c == 0.0:
        return CompactnessStatus(ClosureKind.COMPACT_CLOSURE)
    return CompactnessStatus(ClosureKind.CLOSED_NON_COMPACT)


# ---------------------------------------------------------------------------
# fixed lines


@dataclass
class FixedLinesResult:
    lines: List[Line]
    continuum: bool = False

    def to_dict(self) -> dict:
        return {
            "lines": [l.plucker.tolist() for l in self.lines],
            "continuum": self.continuum,
        }


def exterior_generator(a_matrix) -> np.ndarray:
    """Derivation of the generator on Plücker 6-vectors:
    d/dt Lambda^2(exp tA) at t = 0."""
    a = np.asarray(a_matrix, dtype=float)
    out = np.empty((6, 6))
    pairs = ((0, 1), (0, 2), (0, 3), (2, 3), (3, 1), (1, 2))
    basis = np.eye(4)
    for col, (k, l) in enumerate(pairs):
        u, v = basis[k], basis[l]
        image = K.plucker_from_frame(a @ u, v) + K.plucker_from_frame(u, a @ v)
        out[:, col] = image
    return out


# Klein quadratic form as a symmetric 6x6 matrix
_KLEIN_S = np.zeros((6, 6))
for _i in range(3):
    _KLEIN_S[_i, _i + 3] = _KLEIN_S[_i + 3, _i] = 0.5


def _quadric_points_in_subspace(basis: np.ndarray, tol: float):
    """Intersect the Klein quadric with span(columns of basis).

    Returns (list of 6-vectors, continuum_flag)."""
    k = basis.shape[1]
    m = basis.T @ _KLEIN_S @ basis
    w, vecs = np.linalg.eigh(m)
    atol = max(tol, 1e-12) * max(1.0, float(np.max(np.abs(w), initial=0.0)))
    pos = w > atol
    neg = w < -atol
    zero = ~(pos | neg)
    n_pos, n_neg, n_zero = int(pos.sum()), int(neg.sum()), int(zero.sum())

    if n_pos == 0 and n_neg == 0:
        # form vanishes identically on the subspace
        if k == 1:
            return [basis[:, 0]], False
        return [], True
    if n_pos > 0 and n_neg > 0:
        if k == 2 and n_zero == 0:
            wp = w[pos][0]
            wn = w[neg][0]
            vp = vecs[:, pos][:, 0]
            vn = vecs[:, neg][:, 0]
            r = math.sqrt(-wn / wp)
            sols = [basis @ (r * vp + vn), basis @ (r * vp - vn)]
            return sols, False
        return [], True
    # semidefinite: solutions are exactly the kernel directions
    if n_zero == 0:
        return [], False
    if n_zero == 1:
        return [basis @ vecs[:, zero][:, 0]], False
    return [], True


def fixed_lines(flow: OneParamFlow, tol: float = 1e-8) -> FixedLinesResult:
    """All lines invariant under the whole flow.

    A line is fixed iff its Plücker vector is a real eigenvector of the
    induced 6x6 generator.  Candidate real eigenvalues are the pairwise
    sums of the generator's eigenvalues (known exactly from the params);
    each eigenspace is intersected with the Klein quadric.
    """
    b = exterior_generator(flow.generator)
    eigs = flow.eigenvalues()
    sums = []
    for i in range(4):
        for j in range(i + 1, 4):
            s = eigs[i] + eigs[j]
            if abs(s.imag) <= tol:
                sums.append(float(s.real))
    # dedupe candidate eigenvalues
    candidates: List[float] = []
    for s in sorted(sums):
        if not candidates or abs(s - candidates[-1]) > tol:
            candidates.append(s)

    scale = max(1.0, float(np.linalg.norm(b)))
    lines: List[Line] = []
    continuum = False
    for lam in candidates:
        _, sv, vt = np.linalg.svd(b - lam * np.eye(6))
        null_dim = int(np.sum(sv <= max(tol, 1e-10) * scale))
        if null_dim == 0:
            continue
        basis = vt[6 - null_dim:].T
        sols, cont = _quadric_points_in_subspace(basis, tol)
        continuum = continuum or cont
        for v in sols:
            if abs(K.klein_form(v / np.linalg.norm(v))) > 10 * tol:
                continue
            line = plucker_lift(v, tol=math.sqrt(tol))
            if not any(line.isclose(other, tol=math.sqrt(tol)) for other in lines):
                lines.append(line)
    return FixedLinesResult(lines=lines, continuum=continuum)
