"""
Weighted Pose solver.

Blends the bidirectional correspondence residual (weight 1 - w) with the
goal-flow residual (weight w) into one weighted Procrustes problem:

    J(R, t) = (1-w) [ sum_i a_i ||R p_i + t - v_i||^2 + sum_j b_j ||R^T (q_j - t) - u_j||^2 ]
            + sum_i g_i ||R p_i + t - (p_i + d_i)||^2

Since ||R^T (q - t) - u|| = ||q - (R u + t)||, every term has the form
||R s + t - d||^2, so the stacks are source [P_A; V_B; P_A] and target
[V_A; P_B; P_A + flow]. Rotation comes from a weighted SVD with reflection
correction, translation from the stationarity condition dJ/dt = 0.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from weighted_pose import tolerances
from weighted_pose.errors import DegenerateGeometry, InvalidProblem, InvalidWeights
from weighted_pose.geometry import RigidTransform
from weighted_pose.models import (
    CrossPoseProblem,
    DemeanMode,
    FlowWeighting,
    SolveReport,
    SolverOptions,
    SvdSystem,
)

logger = logging.getLogger(__name__)


def _flow_targets(problem: CrossPoseProblem, mode: DemeanMode) -> np.ndarray:
    flow = problem.goal_flow
    if mode is DemeanMode.PAPER_LITERAL:
        flow = flow - flow.mean(axis=0)
    return problem.action_cloud.points + flow


def build_svd_system(problem: CrossPoseProblem, options: Optional[SolverOptions] = None) -> SvdSystem:
    """Stack the three residual blocks and their weights."""
    options = options or SolverOptions()
    w = problem.blend
    action = problem.action_cloud.points
    source = np.vstack([action, problem.corr_anchor, action])
    target = np.vstack([problem.corr_action, problem.anchor_cloud.points, _flow_targets(problem, options.mode)])
    weights = np.concatenate(
        [
            (1.0 - w) * problem.alpha_action,
            (1.0 - w) * problem.alpha_anchor,
            problem.flow_weights(options.flow_weighting),
        ]
    )
    return SvdSystem(
        source_stack=source,
        target_stack=target,
        weight_diag=weights,
        n_action=problem.n_action,
        n_anchor=problem.n_anchor,
        mode=options.mode,
    )


@dataclass(frozen=True, eq=False)
class RotationFit:
    rotation: np.ndarray
    singular_values: Tuple[float, float, float]
    degenerate: bool


def fit_rotation(system: SvdSystem, degeneracy_ratio: float = tolerances.DEGENERACY_RATIO) -> RotationFit:
    """
    Weighted Kabsch rotation with diagnostics.

    Raises DegenerateGeometry when the weighted de-meaned source stack has
    rank < 2, whatever the mode.
    """
    weights = system.weight_diag
    total = float(weights.sum())
    if total <= 0.0:
        raise InvalidWeights("all effective weights are zero")

    source = system.source_stack
    target = system.target_stack
    source_centered = source - (weights @ source) / total

    spread = np.linalg.svd(np.sqrt(weights)[:, None] * source_centered, compute_uv=False)
    if spread[0] == 0.0 or spread[1] < degeneracy_ratio * spread[0]:
        raise DegenerateGeometry(
            f"weighted source stack has rank < 2 (singular values {spread.tolist()})",
            singular_values=tuple(float(s) for s in spread),
        )

    if system.mode is DemeanMode.DEMEAN:
        target_centered = target - (weights @ target) / total
        covariance = (source_centered * weights[:, None]).T @ target_centered
    else:
        covariance = (source * weights[:, None]).T @ target

    u, sigma, vt = np.linalg.svd(covariance)
    v = vt.T
    correction = np.diag([1.0, 1.0, np.sign(np.linalg.det(v @ u.T)) or 1.0])
    rotation = v @ correction @ u.T

    degenerate = bool(
        sigma[0] == 0.0
        or sigma[1] < degeneracy_ratio * sigma[0]
        or sigma[1] - sigma[2] < degeneracy_ratio * sigma[0]
    )
    return RotationFit(rotation, (float(sigma[0]), float(sigma[1]), float(sigma[2])), degenerate)


def kabsch_rotation(system: SvdSystem) -> np.ndarray:
    """R = V diag(1, 1, det(V U^T)) U^T of the weighted cross-covariance."""
    return fit_rotation(system).rotation


def closed_form_translation(
    problem: CrossPoseProblem,
    rotation: np.ndarray,
    flow_weighting: FlowWeighting = FlowWeighting.PAPER_LITERAL,
) -> np.ndarray:
    """
    Translation solving dJ/dt = 0 at fixed rotation.

    Weighted sum of the action correspondence term, the goal-flow term and
    the anchor correspondence term, each pulling t toward its own
    translation estimate. The anchor term is sum b_j (q_j - R u_j).
    """
    rotation = np.asarray(rotation, dtype=np.float64)
    if rotation.shape != (3, 3):
        raise InvalidProblem(f"rotation must be 3x3, got shape {rotation.shape}")
    w = problem.blend
    a = (1.0 - w) * problem.alpha_action
    b = (1.0 - w) * problem.alpha_anchor
    g = problem.flow_weights(flow_weighting)

    denominator = float(a.sum() + g.sum() + b.sum())
    if denominator <= 0.0:
        raise InvalidWeights("translation denominator is zero")

    action = problem.action_cloud.points
    rotated_action = action @ rotation.T
    numerator = (
        a @ (problem.corr_action - rotated_action)
        + g @ (action + problem.goal_flow - rotated_action)
        + b @ (problem.anchor_cloud.points - problem.corr_anchor @ rotation.T)
    )
    return numerator / denominator


def evaluate_objective(
    problem: CrossPoseProblem,
    rotation: np.ndarray,
    translation: np.ndarray,
    flow_weighting: FlowWeighting = FlowWeighting.PAPER_LITERAL,
) -> float:
    """objective_value on raw (rotation, translation) arrays."""
    w = problem.blend
    action = problem.action_cloud.points
    moved = action @ rotation.T + translation
    res_action = moved - problem.corr_action
    # T^-1 q = R^T (q - t), as rows: (q - t) R
    res_anchor = (problem.anchor_cloud.points - translation) @ rotation - problem.corr_anchor
    res_flow = moved - (action + problem.goal_flow)

    correspondence = problem.alpha_action @ np.sum(res_action**2, axis=1) + problem.alpha_anchor @ np.sum(
        res_anchor**2, axis=1
    )
    flow = problem.flow_weights(flow_weighting) @ np.sum(res_flow**2, axis=1)
    return float((1.0 - w) * correspondence + flow)


def objective_value(
    problem: CrossPoseProblem,
    transform: RigidTransform,
    flow_weighting: FlowWeighting = FlowWeighting.PAPER_LITERAL,
) -> float:
    """Blended objective J at the given transform."""
    return evaluate_objective(problem, transform.rotation, transform.translation, FlowWeighting(flow_weighting))


def weighted_kabsch(source: np.ndarray, target: np.ndarray, weights: Optional[np.ndarray] = None) -> RigidTransform:
    """Plain weighted Kabsch: the proper T minimizing sum w ||T s - d||^2."""
    source = np.asarray(source, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    weights = np.ones(len(source)) if weights is None else np.asarray(weights, dtype=np.float64)

    source_mean = np.average(source, axis=0, weights=weights)
    target_mean = np.average(target, axis=0, weights=weights)
    h = ((source - source_mean) * weights[:, None]).T @ (target - target_mean)
    u, _, vt = np.linalg.svd(h)
    rotation = vt.T @ u.T
    if np.linalg.det(rotation) < 0:
        vt[2, :] *= -1
        rotation = vt.T @ u.T
    return RigidTransform(rotation, target_mean - rotation @ source_mean)


class WeightedPoseSolver:
    """
    Closed-form blended cross-pose solver.

    - demean mode: weighted centroids are removed before the SVD (global minimizer of J)
    - paper-literal mode: un-centered A Gamma B^T with de-meaned flow (diagnostic)
    """

    def __init__(self, options: Optional[SolverOptions] = None):
        self.options = options or SolverOptions()

    def solve(self, problem: CrossPoseProblem) -> SolveReport:
        system = build_svd_system(problem, self.options)
        fit = fit_rotation(system, self.options.degeneracy_ratio)
        translation = closed_form_translation(problem, fit.rotation, self.options.flow_weighting)
        transform = RigidTransform(fit.rotation, translation)
        objective = objective_value(problem, transform, self.options.flow_weighting)

        if fit.degenerate:
            logger.debug("near-degenerate covariance, singular values %s", fit.singular_values)
        logger.debug(
            "solved w=%.3f mode=%s objective=%.6g", problem.blend, self.options.mode.value, objective
        )
        return SolveReport(
            transform=transform,
            objective=objective,
            mode=self.options.mode,
            singular_values=fit.singular_values,
            degenerate_flag=fit.degenerate,
            flow_weighting=self.options.flow_weighting,
            blend=problem.blend,
        )


def solve_weighted_pose(problem: CrossPoseProblem, options: Optional[SolverOptions] = None) -> SolveReport:
    return WeightedPoseSolver(options).solve(problem)


def solve_taxpose(problem: CrossPoseProblem, options: Optional[SolverOptions] = None) -> SolveReport:
    """Correspondence-only endpoint (w = 0)."""
    return solve_weighted_pose(problem.with_blend(0.0), options)


def solve_goalflow(problem: CrossPoseProblem, options: Optional[SolverOptions] = None) -> SolveReport:
    """Goal-flow-only endpoint (w = 1)."""
    return solve_weighted_pose(problem.with_blend(1.0), options)
