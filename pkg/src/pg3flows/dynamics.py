"""Orbit limits and the case-replay harness.

Line orbits are iterated with frame re-orthonormalization at every step;
a step is split recursively whenever the image frame would lose more than
twelve digits to conditioning, so exponential factors never overflow.
Polynomially convergent orbits (the unipotent cases) get their limits from
polynomial extrapolation in 1/n, which is exact in the limit because the
normalized orbit directions are rational functions of 1/n.
"""

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from . import _kernels as K
from .clifford import clifford_parallel
from .errors import ConditioningLoss, GenericityExhausted, PreconditionError
from .flows import FlowParams, JordanCase, OneParamFlow
from .projective import (
    E,
    Hyperplane,
    Line,
    MeetKind,
    ProjMap,
    ProjPoint,
    apply_to_line,
    grassmann_distance,
    incidence_residual,
    join_points,
    lines_meet,
    sample_line,
    sample_point,
)

SCHEMA_VERSION = 1

_COND_LIMIT = 1e12
_MAX_SPLIT_DEPTH = 64


# ---------------------------------------------------------------------------
# schedules


@dataclass(frozen=True)
class Schedule:
    kind: str  # "geometric" | "discrete"
    t0: float
    steps: int
    ratio: float = 0.0
    direction: str = "forward"

    def __post_init__(self):
        if self.kind not in ("geometric", "discrete"):
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if not (self.t0 > 0.0):
            raise ValueError("t0 must be positive")
        if self.steps < 2:
            raise ValueError("steps must be >= 2")
        if self.kind == "geometric" and not (self.ratio > 1.0):
            raise ValueError("geometric ratio must be > 1")
        if self.direction not in ("forward", "backward"):
            raise ValueError("direction must be forward or backward")

    @classmethod
    def geometric(cls, t0=0.5, ratio=1.3, steps=40, direction="forward"):
        return cls("geometric", t0, steps, ratio, direction)

    @classmethod
    def discrete(cls, t0, steps=200, direction="forward"):
        return cls("discrete", t0, steps, direction=direction)

    def times(self) -> np.ndarray:
        if self.kind == "geometric":
            t = self.t0 * self.ratio ** np.arange(self.steps)
        else:
            t = self.t0 * np.arange(1, self.steps + 1)
        if self.direction == "backward":
            t = -t
        return t


def default_schedule() -> Schedule:
    return Schedule.geometric()


# ---------------------------------------------------------------------------
# overflow-safe stepping


def _step_frame(flow: OneParamFlow, frame: np.ndarray, dt: float, depth=0):
    if dt == 0.0:
        return frame
    if depth > _MAX_SPLIT_DEPTH:
        raise ConditioningLoss("step splitting failed to control conditioning")
    try:
        m = flow.gamma_matrix(dt)
    except OverflowError:
        m = None
    if m is not None and np.all(np.isfinite(m)):
        new, cond, ok = K.apply_to_frame(m, frame)
        if ok and cond <= _COND_LIMIT:
            return new
    half = dt / 2.0
    frame = _step_frame(flow, frame, half, depth + 1)
    return _step_frame(flow, frame, dt - half, depth + 1)


def _step_point(flow: OneParamFlow, x: np.ndarray, dt: float, depth=0):
    if dt == 0.0:
        return x
    if depth > _MAX_SPLIT_DEPTH:
        raise ConditioningLoss("step splitting failed to control conditioning")
    try:
        m = flow.gamma_matrix(dt)
    except OverflowError:
        m = None
    if m is not None and np.all(np.isfinite(m)):
        y = m @ x
        n = np.linalg.norm(y)
        if np.isfinite(n) and n > 1e-300:
            return y / n
    half = dt / 2.0
    x = _step_point(flow, x, half, depth + 1)
    return _step_point(flow, x, dt - half, depth + 1)


def _orbit_frames(flow: OneParamFlow, line: Line, times: np.ndarray):
    frames = []
    frame = line.frame.copy()
    prev = 0.0
    for t in times:
        frame = _step_frame(flow, frame, float(t) - prev)
        prev = float(t)
        frames.append(frame)
    return frames


# ---------------------------------------------------------------------------
# reports


@dataclass
class OrbitLimitReport:
    limit: Union[Line, ProjPoint, None]
    converged: bool
    trace: List[Tuple[float, float]]
    final_residuals: Dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        if isinstance(self.limit, Line):
            lim = {"kind": "line", "plucker": self.limit.plucker.tolist(),
                   "frame": self.limit.frame.tolist()}
        elif isinstance(self.limit, ProjPoint):
            lim = {"kind": "point", "coords": self.limit.coords.tolist()}
        else:
            lim = None
        return {
            "schema_version": SCHEMA_VERSION,
            "limit": lim,
            "converged": self.converged,
            "trace": [[float(t), float(d)] for t, d in self.trace],
            "final_residuals": dict(self.final_residuals),
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, **kw)


def _converged(dists: Sequence[float], tol: float) -> bool:
    if len(dists) < 4:
        return False
    if any(d > tol for d in dists[-3:]):
        return False
    q = max(2, len(dists) // 4)
    tail = dists[-q:]
    return all(tail[k + 1] <= max(tail[k], tol) + 1e-12 for k in range(len(tail) - 1))


def line_orbit_limit(
    flow: OneParamFlow,
    line: Line,
    schedule: Optional[Schedule] = None,
    tol: float = 1e-9,
) -> OrbitLimitReport:
    """Iterated line orbit; the candidate limit is the final iterate and
    convergence means a settled, non-increasing tail.  Divergence is
    reported, not raised."""
    schedule = schedule or default_schedule()
    times = schedule.times()
    frames = _orbit_frames(flow, line, times)
    candidate = frames[-1]
    dists = [K.frame_distance(f, candidate) for f in frames]
    converged = _converged(dists, tol)
    limit_line = Line(candidate)
    return OrbitLimitReport(
        limit=limit_line if converged else None,
        converged=converged,
        trace=list(zip((float(t) for t in times), dists)),
        final_residuals={
            "last_step": dists[-2] if len(dists) > 1 else np.inf,
            "klein_residual": limit_line.klein_residual(),
        },
    )


def point_orbit_limit(
    flow: OneParamFlow,
    point: ProjPoint,
    schedule: Optional[Schedule] = None,
    tol: float = 1e-9,
) -> OrbitLimitReport:
    schedule = schedule or default_schedule()
    times = schedule.times()
    xs = []
    x = point.coords.copy()
    prev = 0.0
    for t in times:
        x = _step_point(flow, x, float(t) - prev)
        prev = float(t)
        xs.append(x)
    candidate = xs[-1]
    dists = [K.chordal_point_distance(v, candidate) for v in xs]
    converged = _converged(dists, tol)
    return OrbitLimitReport(
        limit=ProjPoint(candidate) if converged else None,
        converged=converged,
        trace=list(zip((float(t) for t in times), dists)),
        final_residuals={"last_step": dists[-2] if len(dists) > 1 else np.inf},
    )


def accumulation_lines(
    flow: OneParamFlow,
    line: Line,
    schedule: Optional[Schedule] = None,
    cluster_tol: float = 0.05,
) -> List[Tuple[Line, float]]:
    """Cluster the renormalized orbit tail (last half of the schedule);
    a convergent orbit yields exactly one cluster."""
    schedule = schedule or Schedule.discrete(0.35, 200)
    if schedule.steps < 50:
        raise PreconditionError("accumulation analysis needs >= 50 steps")
    frames = _orbit_frames(flow, line, schedule.times())
    tail = frames[len(frames) // 2:]
    reps: List[np.ndarray] = []
    counts: List[int] = []
    for f in tail:
        for i, r in enumerate(reps):
            if K.frame_distance(f, r) <= cluster_tol:
                counts[i] += 1
                break
        else:
            reps.append(f)
            counts.append(1)
    total = float(len(tail))
    return [(Line(r), c / total) for r, c in zip(reps, counts)]


# ---------------------------------------------------------------------------
# polynomial limit extrapolation


def extrapolate_direction(fn: Callable[[int], np.ndarray], n_max: int,
                          levels: int = 7) -> np.ndarray:
    """Limit of a normalized direction sequence as n -> infinity.

    ``fn(n)`` returns a 4-vector; the normalized directions are assumed
    rational in h = 1/n, so Neville extrapolation of samples at
    n_max, n_max/2, ... to h = 0 converges at order ``levels``.
    """
    ns = []
    n = int(n_max)
    for _ in range(levels):
        if n < 1:
            break
        ns.append(n)
        n //= 2
    hs = [1.0 / n for n in ns]
    vals = []
    ref = None
    for n in ns:
        v = np.asarray(fn(n), dtype=float)
        v = v / np.linalg.norm(v)
        if ref is None:
            ref = v
        elif float(v @ ref) < 0.0:
            v = -v
        vals.append(v)
    # Neville tableau on vectors
    tab = list(vals)
    m = len(tab)
    for k in range(1, m):
        for i in range(m - 1, k - 1, -1):
            tab[i] = tab[i] + (tab[i] - tab[i - 1]) * (hs[i] / (hs[i - k] - hs[i]))
    out = tab[m - 1]
    return out / np.linalg.norm(out)


# ---------------------------------------------------------------------------
# replay reports


@dataclass
class CaseReplayReport:
    case: str
    params: dict
    seed: Optional[int]
    samples: int
    passes: int
    rejects: int
    max_residuals: Dict[str, float]
    certificate: dict
    verdicts: List[dict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.samples > 0 and self.passes == self.samples

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "case": self.case,
            "params": dict(self.params),
            "seed": self.seed,
            "samples": self.samples,
            "passes": self.passes,
            "rejects": self.rejects,
            "max_residuals": {k: float(v) for k, v in self.max_residuals.items()},
            "certificate": self.certificate,
            "verdicts": list(self.verdicts),
            "passed": self.passed,
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, **kw)


def _coord_line(i: int, j: int) -> Line:
    return Line.from_spanning(E[i], E[j])


def _sample_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(index)])


# ---------------------------------------------------------------------------
# replay (a1)


def replay_a1(
    params: FlowParams,
    samples: int = 100,
    seed: int = 0,
    schedule: Optional[Schedule] = None,
    tol: float = 1e-6,
) -> CaseReplayReport:
    """Case (a1): disjoint-from-K lines converge to <e3,e4> while their
    parallels through K accumulate only at lines meeting both K and
    <e3,e4>; intersecting distinct limits cannot be parallel in any
    topological parallelism, which is the recorded contradiction."""
    if params.b <= 0.0:
        raise PreconditionError("replay a1 needs b > 0 (b = 0 is the compact/torus branch)")
    if abs(params.a - params.c) <= 1e-12:
        raise PreconditionError("a == c reduces to the diagonal discrete treatment")
    flow = OneParamFlow(JordanCase.A1, params)
    k_line = _coord_line(0, 1)
    l_inf = _coord_line(2, 3)
    schedule = schedule or Schedule.discrete(0.35, 200)

    rejects = 0
    passes = 0
    verdicts = []
    res = {"h_limit": 0.0, "acc_meets_k": 0.0, "acc_meets_l": 0.0}
    min_gap = np.inf
    certificate: dict = {}

    for i in range(samples):
        rng = _sample_rng(seed, i)
        h = None
        for _ in range(100):
            cand = sample_line(rng)
            verdict = lines_meet(cand, k_line)
            if verdict.kind is MeetKind.DISJOINT and abs(verdict.pairing) >= 1e-3:
                h = cand
                break
            rejects += 1
        if h is None:
            raise GenericityExhausted("no generic line disjoint from K found")

        h_report = line_orbit_limit(flow, h, schedule)
        h_res = grassmann_distance(h_report.limit, l_inf) \
            if h_report.limit else np.inf
        res["h_limit"] = max(res["h_limit"], h_res)

        m = None
        for _ in range(100):
            theta = rng.uniform(0.0, 2.0 * np.pi)
            anchor = ProjPoint(k_line.frame @ np.array([np.cos(theta), np.sin(theta)]))
            cand = clifford_parallel(anchor, h)
            if grassmann_distance(cand, k_line) >= 0.05:
                m = cand
                break
            rejects += 1
        if m is None:
            raise GenericityExhausted("parallel through K degenerated onto K")

        clusters = accumulation_lines(flow, m, schedule, cluster_tol=0.05)
        sample_ok = h_report.converged and h_res <= tol
        worst_gap = np.inf
        first_n = None
        for n_line, _weight in clusters:
            mk = abs(K.plucker_pairing(n_line.plucker, k_line.plucker))
            ml = abs(K.plucker_pairing(n_line.plucker, l_inf.plucker))
            gap = grassmann_distance(n_line, l_inf)
            res["acc_meets_k"] = max(res["acc_meets_k"], mk)
            res["acc_meets_l"] = max(res["acc_meets_l"], ml)
            worst_gap = min(worst_gap, gap)
            if first_n is None:
                first_n = (n_line, mk, ml, gap)
            if mk > tol or ml > tol or gap < 0.05:
                sample_ok = False
        min_gap = min(min_gap, worst_gap)
        if sample_ok:
            passes += 1
        verdicts.append({
            "sample": i,
            "pass": bool(sample_ok),
            "h_limit_residual": float(h_res),
            "accumulation_clusters": len(clusters),
            "min_gap_to_L": float(worst_gap),
        })
        if i == 0 and first_n is not None:
            n_line, mk, ml, gap = first_n
            certificate = {
                "limit_a": l_inf.plucker.tolist(),
                "limit_b": n_line.plucker.tolist(),
                "distance": float(gap),
                "incidences": [float(mk), float(ml)],
                "note": "limit lines intersect and differ; disjoint-line "
                        "spreads cannot relate them",
            }

    return CaseReplayReport(
        case="a1",
        params=params.to_dict(),
        seed=seed,
        samples=samples,
        passes=passes,
        rejects=rejects,
        max_residuals={**res, "min_gap_to_L": float(min_gap)},
        certificate=certificate,
        verdicts=verdicts,
    )


# ---------------------------------------------------------------------------
# replay lemma for (c1)


def replay_lemma_c1(n_max: int, sequences: int = 8, seed: int = 0) -> CaseReplayReport:
    """Unipotent full-block case, continuity lemma: point maps collapse to
    <e1> off the hyperplane x4 = 0, and pencil lines through <e1> collapse
    to <e1,e2>, with the image line recomputed independently from the
    normalized-vector formula (2/n^2)(y_n - y_n1*e1)."""
    if n_max < 10:
        raise PreconditionError("n_max must be >= 10")
    flow = OneParamFlow(JordanCase.C1, FlowParams())
    p = ProjPoint(E[0])
    l_line = _coord_line(0, 1)

    res = {
        "point_limit_forward": 0.0,
        "point_limit_backward": 0.0,
        "formula_discrepancy": 0.0,
        "terminal_distance_to_L": 0.0,
        "extrapolated_line_limit": 0.0,
    }
    passes = 0
    verdicts = []

    checkpoints = sorted({max(1, n_max // 100), max(2, n_max // 10), n_max})
    decade = sorted({max(1, n_max // 10) + k * max(1, (n_max - n_max // 10) // 8)
                     for k in range(9)} | {n_max})

    for s in range(sequences):
        rng = _sample_rng(seed, s)
        x = rng.standard_normal(4)
        while abs(x[3]) < 0.3:
            x = rng.standard_normal(4)
        w = rng.standard_normal(4)

        def u_of(n, sign=1.0):
            xn = x + w / n
            return flow.gamma_matrix(sign * n) @ xn

        fwd = extrapolate_direction(lambda n: u_of(n, 1.0), n_max)
        bwd = extrapolate_direction(lambda n: u_of(n, -1.0), n_max)
        d_fwd = K.chordal_point_distance(fwd, p.coords)
        d_bwd = K.chordal_point_distance(bwd, p.coords)
        res["point_limit_forward"] = max(res["point_limit_forward"], d_fwd)
        res["point_limit_backward"] = max(res["point_limit_backward"], d_bwd)
        chords = [K.chordal_point_distance(
            u_of(n) / np.linalg.norm(u_of(n)), p.coords) for n in checkpoints]
        monotone_a = all(chords[k + 1] <= chords[k] + 1e-12 for k in range(len(chords) - 1))

        # part (b): X_n = <e1, x_n> with fourth coordinate pinned to 1
        xb = x / x[3]
        wb = w.copy()
        wb[3] = 0.0
        max_disc = 0.0
        decade_dists = {}
        terminal = None
        for n in range(1, n_max + 1):
            xn = xb + wb / n
            y = flow.gamma_matrix(n) @ xn
            formula = (2.0 / n ** 2) * (y - y[0] * E[0])
            formula_line = Line.from_spanning(E[0], formula)
            # independent route: image of the orthonormalized pencil line
            direct_line = apply_to_line(ProjMap(flow.gamma_matrix(n)),
                                        Line.from_spanning(E[0], xn))
            max_disc = max(max_disc, grassmann_distance(direct_line, formula_line))
            if n in decade:
                decade_dists[n] = grassmann_distance(direct_line, l_line)
            if n == n_max:
                terminal = grassmann_distance(direct_line, l_line)

        dd = [decade_dists[n] for n in sorted(decade_dists)]
        monotone_b = all(dd[k + 1] <= dd[k] + 1e-12 for k in range(len(dd) - 1))

        def line_dir(n):
            xn = xb + wb / n
            y = flow.gamma_matrix(n) @ xn
            return y - y[0] * E[0]

        ext = extrapolate_direction(line_dir, n_max)
        ext_line_dist = grassmann_distance(Line.from_spanning(E[0], ext), l_line)

        res["formula_discrepancy"] = max(res["formula_discrepancy"], max_disc)
        res["terminal_distance_to_L"] = max(res["terminal_distance_to_L"], terminal)
        res["extrapolated_line_limit"] = max(res["extrapolated_line_limit"], ext_line_dist)

        ok = (d_fwd <= 1e-9 and d_bwd <= 1e-9 and monotone_a
              and max_disc <= 1e-8 and monotone_b and ext_line_dist <= 1e-8)
        if ok:
            passes += 1
        verdicts.append({
            "sample": s,
            "pass": bool(ok),
            "formula_discrepancy": float(max_disc),
            "terminal_distance_to_L": float(terminal),
        })

    certificate = {
        "limit_a": p.coords.tolist(),
        "limit_b": l_line.plucker.tolist(),
        "distance": float(res["extrapolated_line_limit"]),
        "incidences": [float(res["point_limit_forward"]),
                       float(res["formula_discrepancy"])],
        "note": "point limit <e1> and pencil-line limit <e1,e2>, formula "
                "and direct images agree",
    }
    return CaseReplayReport(
        case="c1-lemma",
        params={"n_max": n_max},
        seed=seed,
        samples=sequences,
        passes=passes,
        rejects=0,
        max_residuals=res,
        certificate=certificate,
        verdicts=verdicts,
    )


# ---------------------------------------------------------------------------
# replay (c1)


def replay_c1(n_max: int, seed: int = 0) -> CaseReplayReport:
    """Full unipotent case: the pencil-transported lines and the directly
    imaged lines have distinct limits <e1,e2> vs <e1,e3>."""
    if n_max < 10:
        raise PreconditionError("n_max must be >= 10")
    flow = OneParamFlow(JordanCase.C1, FlowParams())
    p = ProjPoint(E[0])
    q = ProjPoint(E[2])
    r = ProjPoint(E[3])
    m_line = _coord_line(0, 3)
    k_target = _coord_line(0, 2)
    l_target = _coord_line(0, 1)

    def s_vec(n):
        return flow.gamma_matrix(-n) @ q.coords

    # s_n -> p, monotone tail
    ns = sorted({5, 10, max(10, n_max // 10), n_max})
    s_dists = [K.chordal_point_distance(
        s_vec(n) / np.linalg.norm(s_vec(n)), p.coords) for n in ns]
    monotone = all(s_dists[k + 1] <= s_dists[k] + 1e-12 for k in range(len(s_dists) - 1))
    s_limit = extrapolate_direction(s_vec, n_max)
    s_limit_res = K.chordal_point_distance(s_limit, p.coords)

    # M_n -> <e1,e4>
    sn = ProjPoint(s_vec(n_max) / np.linalg.norm(s_vec(n_max)))
    m_n = join_points(sn, r)
    m_dist = grassmann_distance(m_n, m_line)

    # direct images M_n^{gamma_n} = q v r^{gamma_n}, with extrapolated limit
    gamma_n = ProjMap(flow.gamma_matrix(n_max))
    direct = Line.from_spanning(gamma_n.matrix @ sn.coords, gamma_n.matrix @ r.coords)
    via_q = join_points(q, gamma_n.apply_point(r))
    consistency = grassmann_distance(direct, via_q)

    r_limit = extrapolate_direction(lambda n: flow.gamma_matrix(n) @ r.coords, n_max)
    k_limit_line = join_points(q, ProjPoint(r_limit))
    k_limit_res = grassmann_distance(k_limit_line, k_target)

    # parallel-transported branch: (Pi(p, M_n))^{gamma_n} -> <e1,e2>
    def transported_dir(n):
        s = s_vec(n)
        mn = join_points(ProjPoint(s / np.linalg.norm(s)), r)
        par = clifford_parallel(p, mn)
        # direction of the image line inside the pencil of p
        v = par.frame[:, 0] if abs(
            float(par.frame[:, 0] @ E[0])) < abs(float(par.frame[:, 1] @ E[0])) \
            else par.frame[:, 1]
        y = flow.gamma_matrix(n) @ v
        return y - y[0] * E[0]

    l_limit = extrapolate_direction(transported_dir, n_max)
    l_limit_line = Line.from_spanning(E[0], l_limit)
    l_limit_res = grassmann_distance(l_limit_line, l_target)

    gap = grassmann_distance(k_limit_line, l_limit_line)
    ok = (monotone and s_limit_res <= 1e-9 and m_dist <= 1e-2
          and consistency <= 1e-6 and k_limit_res <= 1e-6
          and l_limit_res <= 1e-6 and gap >= 0.1)

    res = {
        "s_limit": float(s_limit_res),
        "m_line_distance": float(m_dist),
        "direct_vs_qr_consistency": float(consistency),
        "k_limit": float(k_limit_res),
        "l_limit": float(l_limit_res),
        "certificate_gap": float(gap),
    }
    certificate = {
        "limit_a": k_limit_line.plucker.tolist(),
        "limit_b": l_limit_line.plucker.tolist(),
        "distance": float(gap),
        "incidences": [float(incidence_residual(p, k_limit_line)),
                       float(incidence_residual(p, l_limit_line))],
        "note": "image-line limit K and parallel-transported limit L differ "
                "while both pass through p",
    }
    return CaseReplayReport(
        case="c1",
        params={"n_max": n_max},
        seed=seed,
        samples=1,
        passes=1 if ok else 0,
        rejects=0,
        max_residuals=res,
        certificate=certificate,
        verdicts=[{"sample": 0, "pass": bool(ok), **res}],
    )


# ---------------------------------------------------------------------------
# plane-flow census machinery (cases c3 and c4)


def _clipped_exp(x: float) -> float:
    return math.exp(min(max(x, -700.0), 700.0))


def _projective_plane_grid(n: int) -> List[np.ndarray]:
    """Deterministic P^2 grid: a Fibonacci sphere, the three coordinate
    circles (exact zeros), and the coordinate points."""
    pts = []
    golden = (1.0 + math.sqrt(5.0)) / 2.0
    for i in range(n):
        z = 1.0 - 2.0 * (i + 0.5) / n
        r = math.sqrt(max(0.0, 1.0 - z * z))
        phi = 2.0 * math.pi * ((i / golden) % 1.0)
        pts.append(np.array([r * math.cos(phi), r * math.sin(phi), z]))
    ring = max(8, n // 4)
    for zero_axis in range(3):
        for k in range(ring):
            ang = math.pi * (k + 0.5) / ring
            v = np.zeros(3)
            other = [ax for ax in range(3) if ax != zero_axis]
            v[other[0]] = math.cos(ang)
            v[other[1]] = math.sin(ang)
            pts.append(v)
    pts.extend(np.eye(3))
    return [K.sign_canonical(v / np.linalg.norm(v)) for v in pts]


def _chordal3(x, y):
    c = float(np.dot(x, y))
    return float(np.linalg.norm(x - c * np.asarray(y, dtype=float)))


def _safe_unit(v: np.ndarray) -> np.ndarray:
    # scale by the largest magnitude first so squaring cannot overflow
    v = v / np.max(np.abs(v))
    return v / np.linalg.norm(v)


@dataclass
class PlaneCensus:
    clusters: List[dict]          # {"limit": [...], "members": [...]}
    fixed_indices: List[int]
    unconverged: List[int]

    @property
    def limit_count(self) -> int:
        return len(self.clusters)


def plane_flow_census(
    matrix_fn: Callable[[float], np.ndarray],
    points: List[np.ndarray],
    fixed_tol: float = 1e-10,
    cluster_tol: float = 1e-3,
    probe_times: Tuple[float, float] = (1e8, 2.718e8),
) -> PlaneCensus:
    """Limit-point census of a projective-plane flow over a point grid."""
    t1, t2 = probe_times
    clusters: List[dict] = []
    fixed = []
    unconverged = []
    for idx, x in enumerate(points):
        moved = 0.0
        for t in (1.0, math.sqrt(2.0)):
            y = matrix_fn(t) @ x
            moved = max(moved, _chordal3(_safe_unit(y), x))
        if moved <= fixed_tol:
            fixed.append(idx)
            continue
        u1 = _safe_unit(matrix_fn(t1) @ x)
        u2 = _safe_unit(matrix_fn(t2) @ x)
        if _chordal3(u1, u2) > 1e-5:
            unconverged.append(idx)
            continue
        limit = K.sign_canonical(u2)
        for cl in clusters:
            if _chordal3(cl["limit"], limit) <= cluster_tol:
                cl["members"].append(idx)
                break
        else:
            clusters.append({"limit": limit, "members": [idx]})
    return PlaneCensus(clusters=clusters, fixed_indices=fixed, unconverged=unconverged)


def _census_summary(census: PlaneCensus) -> dict:
    return {
        "limit_points": [np.asarray(c["limit"]).tolist() for c in census.clusters],
        "cluster_sizes": [len(c["members"]) for c in census.clusters],
        "fixed_count": len(census.fixed_indices),
        "unconverged": len(census.unconverged),
    }


def _c3_pencil_matrices(a: float):
    def pencil_p(t):
        return np.array([
            [_clipped_exp(a * t), 0.0, 0.0],
            [0.0, 1.0, t],
            [0.0, 0.0, 1.0],
        ])

    def pencil_q(t):
        return np.array([
            [1.0, t, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, _clipped_exp(-a * t)],
        ])

    return pencil_p, pencil_q


def _run_c3_censuses(a: float, grid: int):
    pts = _projective_plane_grid(grid)
    pencil_p, pencil_q = _c3_pencil_matrices(a)
    return pts, plane_flow_census(pencil_p, pts), plane_flow_census(pencil_q, pts)


def _exceptional_axis(census: PlaneCensus, points) -> Optional[int]:
    """If the census has two clusters and the smaller one consists exactly
    of the non-fixed points on one coordinate circle, return that axis."""
    if census.limit_count != 2:
        return None
    small = min(census.clusters, key=lambda c: len(c["members"]))
    members = set(small["members"])
    for axis in range(3):
        on_axis = {
            i for i, x in enumerate(points)
            if x[axis] == 0.0 and i not in census.fixed_indices
        }
        if members == on_axis and on_axis:
            return axis
    return None


def replay_c3(a: float, grid: int = 201) -> CaseReplayReport:
    """Case (c3), a != 0: the two pencil actions have inequivalent limit
    dynamics (single attractor vs. attractor plus an exceptional line)."""
    if a == 0.0:
        raise PreconditionError("a = 0 is the Baer-subplane branch, out of scope")
    if grid < 51:
        raise PreconditionError("grid must be >= 51")

    pts, cen_p, cen_q = _run_c3_censuses(a, grid)
    pts2, cen_p2, cen_q2 = _run_c3_censuses(a, 2 * grid)

    def classify(cen, pt_list):
        axis = _exceptional_axis(cen, pt_list)
        return {
            "limits": cen.limit_count,
            "exceptional_axis": axis,
            "unconverged": len(cen.unconverged),
        }

    sp, sq = classify(cen_p, pts), classify(cen_q, pts)
    sp2, sq2 = classify(cen_p2, pts2), classify(cen_q2, pts2)

    counts = sorted([sp["limits"], sq["limits"]])
    two_sided = sp if sp["limits"] == 2 else sq
    one_sided = sq if sp["limits"] == 2 else sp
    ok = (
        counts == [1, 2]
        and two_sided["exceptional_axis"] is not None
        and one_sided["unconverged"] == 0
        and two_sided["unconverged"] == 0
        and sorted([sp2["limits"], sq2["limits"]]) == counts
        and (sp2["exceptional_axis"], sq2["exceptional_axis"])
        == (sp["exceptional_axis"], sq["exceptional_axis"])
    )

    res = {
        "pencil_p_limits": float(sp["limits"]),
        "pencil_q_limits": float(sq["limits"]),
        "unconverged": float(sp["unconverged"] + sq["unconverged"]),
    }
    certificate = {
        "pencil_p": _census_summary(cen_p),
        "pencil_q": _census_summary(cen_q),
        "refined_consistent": bool(
            sorted([sp2["limits"], sq2["limits"]]) == counts),
        "note": "limit censuses of the two pencil actions are inequivalent",
    }
    return CaseReplayReport(
        case="c3",
        params={"a": a, "grid": grid},
        seed=None,
        samples=1,
        passes=1 if ok else 0,
        rejects=0,
        max_residuals=res,
        certificate=certificate,
        verdicts=[{"sample": 0, "pass": bool(ok), **sp, **{f"q_{k}": v for k, v in sq.items()}}],
    )


def replay_c4(b: float, c: float, grid: int = 201) -> CaseReplayReport:
    """Case (c4): the two pencil actions differ already in their fixed-point
    structure (three isolated fixed points vs. two)."""
    if b == 0.0 or c == 0.0 or b == c:
        raise PreconditionError("replay c4 needs distinct nonzero b, c")
    if grid < 51:
        raise PreconditionError("grid must be >= 51")

    def pencil_p(t):
        return np.diag([1.0, _clipped_exp(b * t), _clipped_exp(c * t)])

    def pencil_q(t):
        return np.array([
            [1.0, t, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, _clipped_exp(c * t)],
        ])

    def fixed_reps(census: PlaneCensus, pts):
        reps: List[np.ndarray] = []
        for i in census.fixed_indices:
            if not any(_chordal3(pts[i], r) <= 1e-8 for r in reps):
                reps.append(pts[i])
        return reps

    results = {}
    for label, g in (("grid", grid), ("grid2", 2 * grid)):
        pts = _projective_plane_grid(g)
        cen_p = plane_flow_census(pencil_p, pts)
        cen_q = plane_flow_census(pencil_q, pts)
        results[label] = (len(fixed_reps(cen_p, pts)), len(fixed_reps(cen_q, pts)))

    (fp, fq), (fp2, fq2) = results["grid"], results["grid2"]
    ok = fp == 3 and fq == 2 and (fp2, fq2) == (fp, fq)
    res = {"pencil_p_fixed": float(fp), "pencil_q_fixed": float(fq)}
    certificate = {
        "pencil_p_fixed": fp,
        "pencil_q_fixed": fq,
        "refined_consistent": (fp2, fq2) == (fp, fq),
        "note": "pencil actions cannot be equivalent: fixed-point counts differ",
    }
    return CaseReplayReport(
        case="c4",
        params={"b": b, "c": c, "grid": grid},
        seed=None,
        samples=1,
        passes=1 if ok else 0,
        rejects=0,
        max_residuals=res,
        certificate=certificate,
        verdicts=[{"sample": 0, "pass": bool(ok), **{k: float(v) for k, v in res.items()}}],
    )


# ---------------------------------------------------------------------------
# replay (c5)


def replay_c5(
    params: FlowParams,
    samples: int = 100,
    seed: int = 0,
    tol: float = 1e-6,
    variant: str = "both",  # "both" | "geometric" | "discrete"
) -> CaseReplayReport:
    """Distinct-eigenvalue diagonal case: parallels of the invariant line
    K = <e2,e4> converge to L = <e3,e4> although their parallels stay at K."""
    b, c, d = params.b, params.c, params.d
    if not (0.0 < b < c < d):
        raise PreconditionError("replay c5 needs 0 < b < c < d")
    if variant not in ("both", "geometric", "discrete"):
        raise ValueError(f"unknown variant {variant!r}")
    flow = OneParamFlow(JordanCase.C5, params)
    k_line = _coord_line(1, 3)
    l_line = _coord_line(2, 3)
    e12 = _coord_line(0, 1)
    gh_line = _coord_line(1, 2)  # G /\ H
    g_hyp = Hyperplane(E[0])
    h_hyp = Hyperplane(E[3])

    schedules = []
    if variant in ("both", "geometric"):
        schedules.append(("geometric", default_schedule()))
    if variant in ("both", "discrete"):
        schedules.append(("discrete", Schedule.discrete(1.0, 40)))

    # invariance drift of K over t in [0, 40]
    drift = 0.0
    for t in np.linspace(0.5, 40.0, 80):
        frame = _step_frame(flow, k_line.frame, float(t))
        drift = max(drift, K.frame_distance(frame, k_line.frame))

    res = {"k_drift": drift, "p_limit": 0.0, "q_limit": 0.0, "m_limit": 0.0}
    passes = 0
    rejects = 0
    verdicts = []

    def hyperplane_cut(line: Line, hyp: Hyperplane) -> ProjPoint:
        row = hyp.covector @ line.frame  # 2 coefficients
        s = np.array([-row[1], row[0]])
        v = line.frame @ s
        # re-project: a leftover 1e-18 off-hyperplane component would be
        # amplified exponentially by the flow
        v = v - float(hyp.covector @ v) * hyp.covector
        return ProjPoint(v)

    for i in range(samples):
        rng = _sample_rng(seed, i)
        m = None
        for _ in range(100):
            cand = clifford_parallel(sample_point(rng), k_line)
            if grassmann_distance(cand, k_line) < 0.05:
                rejects += 1
                continue
            if lines_meet(cand, gh_line).kind is not MeetKind.DISJOINT:
                rejects += 1
                continue
            if lines_meet(cand, e12).kind is not MeetKind.DISJOINT:
                rejects += 1
                continue
            p_pt = hyperplane_cut(cand, g_hyp)
            q_pt = hyperplane_cut(cand, h_hyp)
            if abs(p_pt.coords[3]) < 1e-3 or abs(q_pt.coords[2]) < 1e-3:
                rejects += 1
                continue
            m = cand
            break
        if m is None:
            raise GenericityExhausted("100 consecutive resamples failed genericity")

        p_rep = point_orbit_limit(flow, p_pt, Schedule.discrete(1.0, 40))
        q_rep = point_orbit_limit(flow, q_pt, Schedule.discrete(1.0, 40))
        p_res = K.chordal_point_distance(p_rep.limit.coords, E[3]) \
            if p_rep.limit else np.inf
        q_res = K.chordal_point_distance(q_rep.limit.coords, E[2]) \
            if q_rep.limit else np.inf

        m_res = 0.0
        sched_ok = True
        for _label, sched in schedules:
            rep = line_orbit_limit(flow, m, sched)
            if not rep.converged:
                sched_ok = False
                continue
            m_res = max(m_res, grassmann_distance(rep.limit, l_line))

        res["p_limit"] = max(res["p_limit"], p_res)
        res["q_limit"] = max(res["q_limit"], q_res)
        res["m_limit"] = max(res["m_limit"], m_res)

        ok = (sched_ok and p_res <= tol and q_res <= tol and m_res <= tol
              and drift <= 1e-8)
        if ok:
            passes += 1
        verdicts.append({
            "sample": i, "pass": bool(ok),
            "p_limit": float(p_res), "q_limit": float(q_res),
            "m_limit": float(m_res),
        })

    gap = grassmann_distance(k_line, l_line)
    certificate = {
        "limit_a": k_line.plucker.tolist(),
        "limit_b": l_line.plucker.tolist(),
        "distance": float(gap),
        "incidences": [float(drift), float(res["m_limit"])],
        "note": "parallels of the invariant K converge to L != K",
    }
    return CaseReplayReport(
        case="c5",
        params=params.to_dict(),
        seed=seed,
        samples=samples,
        passes=passes,
        rejects=rejects,
        max_residuals=res,
        certificate=certificate,
        verdicts=verdicts,
    )


def replay_discrete(params: FlowParams, samples: int = 100, seed: int = 0,
                    tol: float = 1e-6) -> CaseReplayReport:
    """Powers of a single diagonal map (the discrete reduction the rotation
    cases (a1 with a=c), (b1) and (b2) are sent to)."""
    report = replay_c5(params, samples=samples, seed=seed, tol=tol,
                       variant="discrete")
    report.case = "discrete"
    return report


# ---------------------------------------------------------------------------
# Vandermonde fixed-line argument


@dataclass
class RankReport:
    rank: int
    singular_values: List[float]
    nonzero_coordinates: int

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "rank": self.rank,
            "singular_values": list(self.singular_values),
            "nonzero_coordinates": self.nonzero_coordinates,
        }


def vandermonde_rank_check(x, flow: OneParamFlow, t: float) -> RankReport:
    """Rank of (x, x^{gamma_t}, x^{gamma_2t}): 3 when x has three or more
    nonzero coordinates (scaled-Vandermonde minors), <= 2 otherwise."""
    if flow.case is not JordanCase.C5:
        raise PreconditionError("vandermonde check applies to diagonal flows")
    eigs = sorted(flow.eigenvalues().real)
    if min(np.diff(eigs)) <= 0.0:
        raise PreconditionError("vandermonde check needs distinct eigenvalues")
    if t == 0.0:
        raise PreconditionError("t must be nonzero")
    x = np.asarray(x, dtype=float).reshape(4)
    cols = []
    for k in range(3):
        y = _step_point(flow, x / np.linalg.norm(x), k * t)
        cols.append(y)
    m = np.column_stack(cols)
    sv = np.linalg.svd(m, compute_uv=False)
    rank = int(np.sum(sv > 1e-8 * sv[0]))
    return RankReport(
        rank=rank,
        singular_values=[float(s) for s in sv],
        nonzero_coordinates=int(np.sum(np.abs(x) > 1e-12 * np.max(np.abs(x)))),
    )
