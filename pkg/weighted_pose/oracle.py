"""
Numerical minimizer of the blended objective over SE(3).

Independent of the SVD path: Gauss-Newton steps on a 6-parameter tangent
(rotation perturbed on the left by exp(phi), translation additively) with a
monotone Armijo line search, restarted from several rotations. Used to
certify the closed-form solver.
"""

import logging
from typing import List, Tuple

import numpy as np

from weighted_pose import tolerances
from weighted_pose.errors import OracleError
from weighted_pose.geometry import RigidTransform, random_rotation, rotation_about_axis, so3_exp
from weighted_pose.models import CrossPoseProblem, FlowWeighting, OracleResult
from weighted_pose.solver import evaluate_objective, objective_value

logger = logging.getLogger(__name__)

_AXES = np.eye(3)


def _batch_hat(v: np.ndarray) -> np.ndarray:
    """Stack of skew matrices [v_k]x, shape (N, 3, 3)."""
    out = np.zeros((len(v), 3, 3))
    out[:, 0, 1], out[:, 0, 2] = -v[:, 2], v[:, 1]
    out[:, 1, 0], out[:, 1, 2] = v[:, 2], -v[:, 0]
    out[:, 2, 0], out[:, 2, 1] = -v[:, 1], v[:, 0]
    return out


def _retract(rotation: np.ndarray, translation: np.ndarray, delta: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    return so3_exp(delta[:3]) @ rotation, translation + delta[3:]


def _residuals(
    problem: CrossPoseProblem, rotation: np.ndarray, translation: np.ndarray, weighting: FlowWeighting
) -> Tuple[np.ndarray, np.ndarray]:
    """Weighted residual vector r (J = ||r||^2) and its 6-column Jacobian."""
    w = problem.blend
    action = problem.action_cloud.points
    rotated = action @ rotation.T
    moved = rotated + translation
    offset = problem.anchor_cloud.points - translation

    sa = np.sqrt((1.0 - w) * problem.alpha_action)[:, None]
    sb = np.sqrt((1.0 - w) * problem.alpha_anchor)[:, None]
    sg = np.sqrt(problem.flow_weights(weighting))[:, None]

    r_action = sa * (moved - problem.corr_action)
    r_anchor = sb * (offset @ rotation - problem.corr_anchor)
    r_flow = sg * (moved - (action + problem.goal_flow))

    # d(exp(phi) R p + t) = -[R p]x dphi + dt
    jac_moved = np.concatenate([-_batch_hat(rotated), np.broadcast_to(np.eye(3), (len(action), 3, 3))], axis=2)
    # d(R^T exp(-phi) (q - t)) = R^T [q - t]x dphi - R^T dt
    rt = rotation.T
    jac_anchor = np.concatenate(
        [np.einsum("ij,njk->nik", rt, _batch_hat(offset)), np.broadcast_to(-rt, (len(offset), 3, 3))], axis=2
    )

    residual = np.concatenate([r_action.ravel(), r_anchor.ravel(), r_flow.ravel()])
    jacobian = np.concatenate(
        [
            (sa[:, :, None] * jac_moved).reshape(-1, 6),
            (sb[:, :, None] * jac_anchor).reshape(-1, 6),
            (sg[:, :, None] * jac_moved).reshape(-1, 6),
        ]
    )
    return residual, jacobian


def objective_gradient(
    problem: CrossPoseProblem,
    transform: RigidTransform,
    flow_weighting: FlowWeighting = FlowWeighting.PAPER_LITERAL,
) -> np.ndarray:
    """Analytic dJ along the 6 tangent directions (3 rotation, 3 translation)."""
    residual, jacobian = _residuals(problem, transform.rotation, transform.translation, FlowWeighting(flow_weighting))
    return 2.0 * jacobian.T @ residual


def finite_difference_gradient(
    problem: CrossPoseProblem,
    transform: RigidTransform,
    h: float = tolerances.FD_STEP,
    flow_weighting: FlowWeighting = FlowWeighting.PAPER_LITERAL,
) -> np.ndarray:
    """Central differences (J(T + h e_i) - J(T - h e_i)) / 2h along the tangent directions."""
    if not h > 0:
        raise ValueError(f"finite-difference step must be positive, got {h}")
    weighting = FlowWeighting(flow_weighting)
    grad = np.zeros(6)
    for i in range(6):
        step = np.zeros(6)
        step[i] = h
        plus = evaluate_objective(problem, *_retract(transform.rotation, transform.translation, step), weighting)
        minus = evaluate_objective(problem, *_retract(transform.rotation, transform.translation, -step), weighting)
        grad[i] = (plus - minus) / (2.0 * h)
    return grad


def _check_gradient(problem, rotation, translation, gradient, weighting) -> None:
    numeric = finite_difference_gradient(
        problem, RigidTransform(rotation, translation), tolerances.ORACLE_GRADIENT_CHECK_STEP, weighting
    )
    gap = float(np.linalg.norm(gradient - numeric))
    if gap > tolerances.ORACLE_GRADIENT_CHECK_TOL:
        raise OracleError(f"analytic and finite-difference gradients disagree by {gap:.3e}")


def _restart_rotations(restarts: int, rng: np.random.Generator) -> List[np.ndarray]:
    """Identity, quarter and half turns about each axis, then uniform random rotations."""
    fixed = [np.eye(3)]
    fixed += [rotation_about_axis(axis, np.pi / 2) for axis in _AXES]
    fixed += [rotation_about_axis(axis, np.pi) for axis in _AXES]
    starts = fixed[:restarts]
    while len(starts) < restarts:
        starts.append(random_rotation(rng))
    return starts


def _descend(problem, rotation, translation, max_iters, weighting, check_gradient):
    value = evaluate_objective(problem, rotation, translation, weighting)
    for iteration in range(max_iters):
        residual, jacobian = _residuals(problem, rotation, translation, weighting)
        gradient = 2.0 * jacobian.T @ residual
        if check_gradient and iteration == 0:
            _check_gradient(problem, rotation, translation, gradient, weighting)

        step = np.linalg.lstsq(jacobian, -residual, rcond=None)[0]
        if np.linalg.norm(step) < tolerances.ORACLE_STEP_TOL:
            return rotation, translation, value, True, iteration
        slope = float(gradient @ step)
        if slope >= 0:
            step = -gradient
            slope = -float(gradient @ gradient)

        scale = 1.0
        for _ in range(tolerances.LINE_SEARCH_HALVINGS):
            candidate = _retract(rotation, translation, scale * step)
            candidate_value = evaluate_objective(problem, *candidate, weighting)
            if candidate_value < value and candidate_value <= value + tolerances.ARMIJO_C * scale * slope:
                break
            scale *= 0.5
        else:
            # no decrease left; stationary only if the predicted one is below rounding
            stalled = -slope <= tolerances.STALL_DECREASE * value
            return rotation, translation, value, stalled, iteration

        (rotation, translation), value = candidate, candidate_value
    return rotation, translation, value, False, max_iters


def minimize_objective(
    problem: CrossPoseProblem,
    restarts: int = tolerances.ORACLE_RESTARTS,
    max_iters: int = tolerances.ORACLE_MAX_ITERS,
    *,
    seed: int = 0,
    flow_weighting: FlowWeighting = FlowWeighting.PAPER_LITERAL,
    check_gradient: bool = True,
) -> OracleResult:
    """Best local minimum of J over the restarts; never worse than any start point."""
    if restarts < 1:
        raise ValueError(f"restarts must be >= 1, got {restarts}")
    weighting = FlowWeighting(flow_weighting)
    rng = np.random.default_rng(seed)

    best = None
    for k, start in enumerate(_restart_rotations(restarts, rng)):
        outcome = _descend(problem, start, np.zeros(3), max_iters, weighting, check_gradient and k == 0)
        logger.debug("restart %d: objective=%.6g converged=%s iters=%d", k, outcome[2], outcome[3], outcome[4])
        if best is None or outcome[2] < best[2]:
            best = outcome

    rotation, translation, _, converged, iterations = best
    transform = RigidTransform(rotation, translation)
    return OracleResult(
        transform=transform,
        objective=objective_value(problem, transform, weighting),
        restarts_used=restarts,
        converged=converged,
        iterations=iterations,
    )
