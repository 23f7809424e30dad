"""Line geometry of PG(3,R): Plucker/Klein substrate, Clifford parallelism,
one-parameter projective flows, and an orbit-dynamics replay harness."""

from ._kernels import BACKEND
from .clifford import (
    CLIFFORD,
    AuditReport,
    ParallelismWitness,
    Quaternion,
    clifford_member_in_hyperplane,
    clifford_parallel,
    is_clifford_parallel,
    left_mult_matrix,
    pencil_collapse_witness,
    right_mult_matrix,
    so4_block_rotation,
    spread_audit,
    transfer,
)
from .dynamics import (
    CaseReplayReport,
    OrbitLimitReport,
    Schedule,
    accumulation_lines,
    extrapolate_direction,
    line_orbit_limit,
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
from .errors import (
    ConditioningLoss,
    ContinuumOfFixedLines,
    DegenerateJoin,
    GenericityExhausted,
    NotClassifiable,
    NotInPencil,
    OffQuadric,
    PG3Error,
    PreconditionError,
    ZeroDivisor,
)
from .flows import (
    ClassificationResult,
    ClosureKind,
    CompactnessStatus,
    FixedLinesResult,
    FlowParams,
    JordanCase,
    OneParamFlow,
    canonical_generator,
    classify_generator,
    compactness_status,
    fixed_lines,
    gamma,
    gamma_matrix,
    make_flow,
)
from .projective import (
    Hyperplane,
    Line,
    MeetKind,
    MeetResult,
    ProjMap,
    ProjPoint,
    apply_to_line,
    exterior_square,
    grassmann_distance,
    incidence_residual,
    join_points,
    lines_meet,
    plucker_lift,
    sample_hyperplane,
    sample_line,
    sample_point,
)
from .tolerances import TOL, Tolerances

__version__ = "0.1.0"
