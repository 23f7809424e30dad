"""Acceptance gate: one verification criterion per test, one printed line each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
verdict lines as they are produced.
"""

import time

import numpy as np
from scipy.linalg import expm

from pg3flows.clifford import CLIFFORD, pencil_collapse_witness, spread_audit
from pg3flows.dynamics import (
    replay_a1,
    replay_c1,
    replay_c3,
    replay_c5,
    replay_discrete,
    replay_lemma_c1,
    vandermonde_rank_check,
)
from pg3flows.flows import (
    ClosureKind,
    FlowParams,
    JordanCase,
    canonical_generator,
    classify_generator,
    compactness_status,
    fixed_lines,
    gamma_matrix,
    make_flow,
)
from pg3flows.projective import (
    E,
    Line,
    MeetKind,
    grassmann_distance,
    lines_meet,
    plucker_lift,
    sample_line,
)

CANONICAL_PARAMS = {
    JordanCase.A1: FlowParams(a=1, b=1, c=2),
    JordanCase.A2: FlowParams(a=1),
    JordanCase.B1: FlowParams(a=1, b=1, c=0.5),
    JordanCase.B2: FlowParams(a=1, b=0.3),
    JordanCase.C1: FlowParams(),
    JordanCase.C2: FlowParams(b=1),
    JordanCase.C3: FlowParams(a=1),
    JordanCase.C4: FlowParams(b=1, c=2),
    JordanCase.C5: FlowParams(b=1, c=2, d=3),
}


def coord_line(i, j):
    return Line.from_spanning(E[i], E[j])


def _verdict(num, label, ok, detail=""):
    line = f"[criterion {num:2d}] {label}: {'PASS' if ok else 'FAIL'}"
    if detail:
        line += f"  ({detail})"
    print(line, flush=True)
    assert ok, line


def test_criterion_01_geometry_substrate():
    start = time.perf_counter()
    rng = np.random.default_rng(0)
    max_klein = 0.0
    max_roundtrip = 0.0
    for _ in range(10 ** 5):
        l = sample_line(rng)
        max_klein = max(max_klein, l.klein_residual())
        max_roundtrip = max(max_roundtrip,
                            grassmann_distance(l, plucker_lift(l.plucker)))
    disagreements = 0
    expect = {4: MeetKind.DISJOINT, 3: MeetKind.MEET, 2: MeetKind.EQUAL}
    for _ in range(10 ** 4):
        l, m = sample_line(rng), sample_line(rng)
        rank = np.linalg.matrix_rank(np.hstack([l.frame, m.frame]), tol=1e-8)
        if lines_meet(l, m).kind is not expect[rank]:
            disagreements += 1
    elapsed = time.perf_counter() - start
    ok = (max_klein <= 1e-10 and max_roundtrip <= 1e-9
          and disagreements == 0 and elapsed < 30.0)
    _verdict(1, "geometry substrate", ok,
             f"klein {max_klein:.2e}, roundtrip {max_roundtrip:.2e}, "
             f"disagreements {disagreements}, {elapsed:.1f}s")


def test_criterion_02_clifford_witness():
    start = time.perf_counter()
    clean = spread_audit(CLIFFORD, samples=10 ** 4, seed=0, tol=1e-8,
                         equivariance_maps=50)
    mutated = spread_audit(pencil_collapse_witness(), samples=500, seed=0,
                           tol=1e-8)
    elapsed = time.perf_counter() - start
    ok = (clean.passed and len(clean.violations) == 0
          and clean.max_residuals["equivariance"] <= 1e-8
          and len(mutated.violations) >= 1 and elapsed < 60.0)
    _verdict(2, "clifford parallelism witness", ok,
             f"clean violations {len(clean.violations)}, "
             f"mutated violations {len(mutated.violations)}, {elapsed:.1f}s")


def test_criterion_03_flows_and_classifier():
    ok = True
    worst_conj = 0.0
    worst_hom = 0.0
    worst_expm = 0.0
    rng = np.random.default_rng(1)
    for case, p in CANONICAL_PARAMS.items():
        g = canonical_generator(case, p)
        if classify_generator(g).case is not case:
            ok = False
        for _ in range(100):
            s = rng.standard_normal((4, 4))
            while abs(np.linalg.det(s)) < 0.1:
                s = rng.standard_normal((4, 4))
            result = classify_generator(s @ g @ np.linalg.inv(s))
            if result.case is not case:
                ok = False
            worst_conj = max(worst_conj, result.residual)
        st_pairs = rng.uniform(-2.0, 2.0, (10 ** 3, 2))
        for s_t, t_t in st_pairs:
            diff = np.abs(gamma_matrix(case, p, s_t) @ gamma_matrix(case, p, t_t)
                          - gamma_matrix(case, p, s_t + t_t)).max()
            worst_hom = max(worst_hom, diff)
        for t in np.linspace(-5.0, 5.0, 21):
            worst_expm = max(worst_expm, np.abs(
                gamma_matrix(case, p, t) - expm(t * g)).max())
    ok = ok and worst_conj <= 1e-6 and worst_hom <= 1e-9 and worst_expm <= 1e-9
    _verdict(3, "nine flows and classifier", ok,
             f"conjugate residual {worst_conj:.2e}, homomorphism "
             f"{worst_hom:.2e}, exponential {worst_expm:.2e}")


def test_criterion_04_fixed_lines():
    targets = [coord_line(i, j) for i in range(4) for j in range(i + 1, 4)]
    ok = True
    for d in (4.0, 3.0):
        result = fixed_lines(make_flow(JordanCase.C5, b=1, c=2, d=d))
        if len(result.lines) != 6:
            ok = False
        else:
            for target in targets:
                if min(grassmann_distance(target, l)
                       for l in result.lines) > 1e-8:
                    ok = False
    c1 = fixed_lines(make_flow(JordanCase.C1))
    ok = ok and len(c1.lines) == 1 and grassmann_distance(
        c1.lines[0], coord_line(0, 1)) <= 1e-8
    _verdict(4, "fixed lines of c5 and c1", ok)


def test_criterion_05_replay_a1():
    start = time.perf_counter()
    report = replay_a1(FlowParams(a=1, b=1, c=2), samples=100, seed=7)
    elapsed = time.perf_counter() - start
    ok = (report.passed and report.passes == 100
          and report.max_residuals["h_limit"] <= 1e-6
          and report.max_residuals["acc_meets_k"] <= 1e-6
          and report.max_residuals["acc_meets_l"] <= 1e-6
          and report.max_residuals["min_gap_to_L"] >= 0.05
          and elapsed < 60.0)
    _verdict(5, "replay a1 accumulation clusters", ok,
             f"passes {report.passes}/100, {elapsed:.1f}s")


def test_criterion_06_replay_lemma_c1():
    report = replay_lemma_c1(1000, seed=0)
    terminal = report.max_residuals["terminal_distance_to_L"]
    ok = (report.passed
          and report.max_residuals["formula_discrepancy"] <= 1e-8
          and terminal <= 1e-4)
    _verdict(6, "replay c1 continuity lemma", ok,
             f"formula {report.max_residuals['formula_discrepancy']:.2e}, "
             f"terminal {terminal:.2e}")


def test_criterion_07_replay_c1():
    report = replay_c1(1000)
    ok = (report.passed and report.max_residuals["k_limit"] <= 1e-6
          and report.certificate["distance"] >= 0.1)
    _verdict(7, "replay c1 distinct line limits", ok,
             f"k limit {report.max_residuals['k_limit']:.2e}, "
             f"gap {report.certificate['distance']:.2f}")


def test_criterion_08_replay_c3():
    report = replay_c3(1.0, grid=201)
    counts = sorted([len(report.certificate["pencil_p"]["limit_points"]),
                     len(report.certificate["pencil_q"]["limit_points"])])
    ok = report.passed and counts == [1, 2]
    _verdict(8, "replay c3 pencil censuses", ok,
             f"limit point counts {counts}")


def test_criterion_09_replay_c5():
    params = FlowParams(b=1, c=2, d=3)
    cont = replay_c5(params, samples=100, seed=0)
    disc = replay_discrete(params, samples=100, seed=0)
    flow = make_flow(JordanCase.C5, b=1, c=2, d=3)
    ranks = (vandermonde_rank_check([1, 1, 1, 1], flow, 1.0).rank,
             vandermonde_rank_check([1, 1, 0, 0], flow, 1.0).rank,
             vandermonde_rank_check([0, 0, 1, 0], flow, 1.0).rank)
    ok = (cont.passed and cont.passes == 100
          and cont.max_residuals["k_drift"] <= 1e-8
          and cont.max_residuals["m_limit"] <= 1e-6
          and disc.passed and disc.passes == 100
          and ranks == (3, 2, 1))
    _verdict(9, "replay c5 continuous and discrete", ok,
             f"passes {cont.passes}/{disc.passes}, ranks {ranks}")


def test_criterion_10_compactness_table():
    a = compactness_status(make_flow(JordanCase.A1, a=1, b=0, c=2))
    b = compactness_status(make_flow(JordanCase.A1, a=1, b=0, c=np.sqrt(2)))
    c = compactness_status(make_flow(JordanCase.B1, a=1, b=0, c=0))
    ok = (a.kind is ClosureKind.COMPACT_CLOSURE and a.reconstruction == (2, 1)
          and b.kind is ClosureKind.NON_CLOSED_TORUS
          and b.reconstruction is not None
          and "reconstruction" in b.to_dict()
          and c.kind is ClosureKind.COMPACT_CLOSURE)
    _verdict(10, "compactness decision table", ok,
             f"verdicts {a.kind.value!r}, {b.kind.value!r}, {c.kind.value!r}")
