"""
Training losses evaluated against known ground truth.

Squared cloud norms are means over points of squared row norms, so values
are comparable across cloud sizes.
"""

import numpy as np

from weighted_pose.geometry import PointCloud, RigidTransform, compose, invert, transform_points
from weighted_pose.models import LossBundle, ScenarioBundle


def _mean_squared(diff: np.ndarray) -> float:
    return float(np.mean(np.sum(diff * diff, axis=1)))


def _moved(t: RigidTransform, pc: PointCloud) -> np.ndarray:
    return transform_points(t.rotation, t.translation, pc.points)


def ground_truth_transform(t_alpha: RigidTransform, t_beta: RigidTransform) -> RigidTransform:
    """T_beta o T_alpha^-1 for demonstrations perturbed by T_alpha (action) and T_beta (anchor)."""
    return compose(t_beta, invert(t_alpha))


def point_displacement_loss(pred: RigidTransform, gt: RigidTransform, pa: PointCloud, pb: PointCloud) -> float:
    pred_inv, gt_inv = invert(pred), invert(gt)
    return _mean_squared(_moved(pred, pa) - _moved(gt, pa)) + _mean_squared(_moved(pred_inv, pb) - _moved(gt_inv, pb))


def correspondence_loss(corr_a, corr_b, gt: RigidTransform, pa: PointCloud, pb: PointCloud) -> float:
    corr_a = np.asarray(corr_a, dtype=np.float64)
    corr_b = np.asarray(corr_b, dtype=np.float64)
    return _mean_squared(corr_a - _moved(gt, pa)) + _mean_squared(corr_b - _moved(invert(gt), pb))


def consistency_loss(corr_a, corr_b, pred: RigidTransform, pa: PointCloud, pb: PointCloud) -> float:
    """Correspondence loss against the prediction instead of ground truth."""
    return correspondence_loss(corr_a, corr_b, pred, pa, pb)


def transform_loss(pred: RigidTransform, gt: RigidTransform) -> float:
    """Frobenius norm of the difference of the 4x4 homogeneous matrices."""
    return float(np.linalg.norm(pred.matrix - gt.matrix, ord="fro"))


def loss_bundle(pred: RigidTransform, bundle: ScenarioBundle) -> LossBundle:
    problem = bundle.problem
    pa, pb = problem.action_cloud, problem.anchor_cloud
    return LossBundle(
        disp=point_displacement_loss(pred, bundle.gt, pa, pb),
        corr=correspondence_loss(problem.corr_action, problem.corr_anchor, bundle.gt, pa, pb),
        cons=consistency_loss(problem.corr_action, problem.corr_anchor, pred, pa, pb),
        tf=transform_loss(pred, bundle.gt),
    )
