"""
Weighted Pose - blended SVD cross-pose solver for point clouds.
"""

__version__ = "1.0.0"

from typing import Optional

from weighted_pose.errors import (
    DegenerateGeometry,
    InvalidProblem,
    InvalidTransform,
    InvalidWeights,
    OracleError,
    ScenarioFormatError,
    WeightedPoseError,
)
from weighted_pose.geometry import (
    MetricTriple,
    PointCloud,
    RigidTransform,
    apply,
    compose,
    invert,
    metric_triple,
    per_point_mse,
    rotation_error_deg,
    translation_error,
)
from weighted_pose.models import (
    CorruptionKind,
    CorruptionSpec,
    CrossPoseProblem,
    DemeanMode,
    FlowWeighting,
    LossBundle,
    OracleResult,
    RevoluteJoint,
    ScenarioBundle,
    ScenarioKind,
    SolveReport,
    SolverOptions,
    SvdSystem,
)
from weighted_pose.solver import (
    WeightedPoseSolver,
    build_svd_system,
    closed_form_translation,
    kabsch_rotation,
    objective_value,
    solve_goalflow,
    solve_taxpose,
    solve_weighted_pose,
)
from weighted_pose.report import ReportGenerator

__all__ = [
    "WeightedPoseError",
    "InvalidTransform",
    "InvalidProblem",
    "InvalidWeights",
    "DegenerateGeometry",
    "OracleError",
    "ScenarioFormatError",
    "RigidTransform",
    "PointCloud",
    "MetricTriple",
    "compose",
    "invert",
    "apply",
    "rotation_error_deg",
    "translation_error",
    "per_point_mse",
    "metric_triple",
    "CrossPoseProblem",
    "SvdSystem",
    "SolveReport",
    "SolverOptions",
    "DemeanMode",
    "FlowWeighting",
    "LossBundle",
    "OracleResult",
    "RevoluteJoint",
    "ScenarioBundle",
    "ScenarioKind",
    "CorruptionKind",
    "CorruptionSpec",
    "WeightedPoseSolver",
    "build_svd_system",
    "kabsch_rotation",
    "closed_form_translation",
    "objective_value",
    "solve_weighted_pose",
    "solve_taxpose",
    "solve_goalflow",
    "ReportGenerator",
    "solve_file",
    "evaluate_solution",
]


def solve_file(path: str, options: Optional[SolverOptions] = None, blend: Optional[float] = None) -> SolveReport:
    """Read a scenario file and solve it, optionally overriding its blend."""
    from weighted_pose.scenario_io import read_scenario

    bundle = read_scenario(path)
    problem = bundle.problem if blend is None else bundle.problem.with_blend(blend)
    return solve_weighted_pose(problem, options)


def evaluate_solution(report: SolveReport, bundle: ScenarioBundle) -> MetricTriple:
    """Score a solve against the scenario's ground truth on the action cloud."""
    return metric_triple(report.transform, bundle.gt, bundle.problem.action_cloud)
