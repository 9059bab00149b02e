"""
Synthetic scenarios with exact ground truth.

Free-floating: demonstration clouds in the goal pose, each perturbed by its
own random transform. Articulated: a door (or drawer) on a joint that must be
moved to its open state, the static body acting as anchor.
"""

import dataclasses
import logging
import math

import numpy as np

from weighted_pose import tolerances
from weighted_pose.errors import InvalidProblem
from weighted_pose.geometry import (
    PointCloud,
    RigidTransform,
    apply,
    invert,
    random_rotation,
    random_transform,
    rotation_about_axis,
    transform_points,
)
from weighted_pose.losses import ground_truth_transform
from weighted_pose.models import (
    CorruptionKind,
    CorruptionSpec,
    CrossPoseProblem,
    RevoluteJoint,
    ScenarioBundle,
    ScenarioKind,
)

logger = logging.getLogger(__name__)

DOOR_THICKNESS = 0.02
DOOR_MIN_RADIUS = 0.05
BODY_GAP = 0.05


def _check_sizes(n_a: int, n_b: int, noise_sigma: float) -> None:
    if n_a < tolerances.MIN_POINTS or n_b < tolerances.MIN_POINTS:
        raise InvalidProblem(f"need at least {tolerances.MIN_POINTS} points per cloud, got {n_a}, {n_b}")
    if not (math.isfinite(noise_sigma) and noise_sigma >= 0):
        raise InvalidProblem(f"noise_sigma must be >= 0, got {noise_sigma}")


def _unit_box_cloud(rng: np.random.Generator, n: int) -> np.ndarray:
    half = tolerances.CLOUD_HALF_EXTENT
    return rng.uniform(-half, half, size=(n, 3))


def _sample_noise_scales(rng: np.random.Generator, n: int) -> np.ndarray:
    """Per-point multipliers on noise_sigma, log-uniform with geometric mean 1."""
    low, high = tolerances.NOISE_SCALE_RANGE
    return np.exp(rng.uniform(math.log(low), math.log(high), size=n))


def _alpha_from_scales(scales: np.ndarray) -> np.ndarray:
    """Inverse-variance weights: alpha_i proportional to 1 / s_i^2."""
    alpha = 1.0 / scales**2
    return alpha / alpha.sum()


def _axis_frame(direction: np.ndarray):
    """Two unit vectors completing direction to a right-handed frame."""
    helper = np.array([1.0, 0.0, 0.0]) if abs(direction[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    u = np.cross(direction, helper)
    u /= np.linalg.norm(u)
    return u, np.cross(direction, u)


def _assemble(
    rng: np.random.Generator,
    action: np.ndarray,
    anchor: np.ndarray,
    gt: RigidTransform,
    *,
    kind: ScenarioKind,
    seed: int,
    noise_sigma: float,
    blend: float,
    joint=None,
) -> ScenarioBundle:
    """
    Exact correspondences and flow from gt, then isotropic noise.

    Each correspondence gets its own noise scale s_i * noise_sigma and the
    matching confidence alpha_i ~ 1 / s_i^2. Flow noise has the plain scale.
    """
    corr_action = transform_points(gt.rotation, gt.translation, action)
    gt_inv = invert(gt)
    corr_anchor = transform_points(gt_inv.rotation, gt_inv.translation, anchor)
    flow = corr_action - action
    scales_action = _sample_noise_scales(rng, len(action))
    scales_anchor = _sample_noise_scales(rng, len(anchor))
    alpha_action = _alpha_from_scales(scales_action)
    alpha_anchor = _alpha_from_scales(scales_anchor)
    if noise_sigma > 0:
        corr_action = corr_action + rng.normal(size=corr_action.shape) * (noise_sigma * scales_action)[:, None]
        corr_anchor = corr_anchor + rng.normal(size=corr_anchor.shape) * (noise_sigma * scales_anchor)[:, None]
        flow = flow + rng.normal(scale=noise_sigma, size=flow.shape)

    problem = CrossPoseProblem(
        action_cloud=PointCloud(action),
        anchor_cloud=PointCloud(anchor),
        corr_action=corr_action,
        corr_anchor=corr_anchor,
        alpha_action=alpha_action,
        alpha_anchor=alpha_anchor,
        goal_flow=flow,
        blend=blend,
    )
    return ScenarioBundle(problem=problem, gt=gt, kind=kind, seed=seed, noise_sigma=float(noise_sigma), joint=joint)


def make_free_floating(
    seed: int, n_a: int, n_b: int, noise_sigma: float = 0.0, *, blend: float = 0.0
) -> ScenarioBundle:
    """Placement scenario: gt = T_beta T_alpha^-1 undoes the action perturbation."""
    _check_sizes(n_a, n_b, noise_sigma)
    rng = np.random.default_rng(seed)
    demo_action = _unit_box_cloud(rng, n_a)
    demo_anchor = _unit_box_cloud(rng, n_b)
    t_alpha = random_transform(rng)
    t_beta = random_transform(rng)

    action = apply(t_alpha, PointCloud(demo_action)).points
    anchor = apply(t_beta, PointCloud(demo_anchor)).points
    gt = ground_truth_transform(t_alpha, t_beta)
    return _assemble(
        rng, action, anchor, gt,
        kind=ScenarioKind.FREE_FLOATING, seed=seed, noise_sigma=noise_sigma, blend=blend,
    )


def joint_transform(joint: RevoluteJoint) -> RigidTransform:
    """Rigid motion taking the part from current_angle to open_angle."""
    if joint.prismatic:
        return RigidTransform.from_translation(joint.travel * joint.axis_direction)
    rotation = rotation_about_axis(joint.axis_direction, joint.travel)
    return RigidTransform(rotation, joint.axis_point - rotation @ joint.axis_point)


def random_joint(rng: np.random.Generator, prismatic: bool = False) -> RevoluteJoint:
    half = tolerances.CLOUD_HALF_EXTENT
    direction = random_rotation(rng)[:, 2]
    if prismatic:
        current = rng.uniform(0.0, 0.1)
        opening = rng.uniform(0.2, 0.6)
    else:
        current = rng.uniform(0.0, math.pi / 4)
        opening = rng.uniform(math.pi / 6, math.pi / 2)
    return RevoluteJoint(
        axis_point=rng.uniform(-half, half, size=3),
        axis_direction=direction,
        current_angle=current,
        open_angle=current + opening,
        prismatic=prismatic,
    )


def make_articulated(
    seed: int,
    n_a: int,
    n_b: int,
    joint: RevoluteJoint,
    noise_sigma: float = 0.0,
    *,
    blend: float = 1.0,
) -> ScenarioBundle:
    """Opening scenario: the action cloud is the door at current_angle, flow moves it fully open."""
    if not isinstance(joint, RevoluteJoint):
        raise InvalidProblem("joint must be a RevoluteJoint")
    _check_sizes(n_a, n_b, noise_sigma)
    rng = np.random.default_rng(seed)
    axis = joint.axis_direction
    u, v = _axis_frame(axis)
    half = tolerances.CLOUD_HALF_EXTENT

    # door slab in the (u, axis) plane, hinged on the axis
    radial = rng.uniform(DOOR_MIN_RADIUS, 2 * half, size=n_a)
    height = rng.uniform(-half, half, size=n_a)
    thickness = rng.uniform(-DOOR_THICKNESS, DOOR_THICKNESS, size=n_a)
    door = radial[:, None] * u + height[:, None] * axis + thickness[:, None] * v
    if joint.prismatic:
        door = door + joint.current_angle * axis
    else:
        door = door @ rotation_about_axis(axis, joint.current_angle).T
    action = door + joint.axis_point

    # static body behind the hinge
    body = (
        rng.uniform(0.0, 2 * half, size=n_b)[:, None] * u
        + rng.uniform(-half, half, size=n_b)[:, None] * axis
        + rng.uniform(-2 * half, -BODY_GAP, size=n_b)[:, None] * v
    )
    anchor = body + joint.axis_point

    return _assemble(
        rng, action, anchor, joint_transform(joint),
        kind=ScenarioKind.ARTICULATED, seed=seed, noise_sigma=noise_sigma, blend=blend, joint=joint,
    )


def _outlier_rows(rng: np.random.Generator, values: np.ndarray, fraction: float) -> np.ndarray:
    """Replace round(fraction * N) rows by uniform points around the rows' centroid."""
    out = np.array(values, copy=True)
    k = int(round(fraction * len(out)))
    if k == 0:
        return out
    rows = rng.choice(len(out), size=k, replace=False)
    width = tolerances.OUTLIER_HALF_WIDTH
    out[rows] = out.mean(axis=0) + rng.uniform(-width, width, size=(k, 3))
    return out


def corrupt(bundle: ScenarioBundle, corruption: CorruptionSpec) -> ScenarioBundle:
    """Apply one named corruption to the problem; gt is left untouched."""
    if not isinstance(corruption, CorruptionSpec):
        corruption = CorruptionSpec(*corruption)
    if corruption.level == 0:
        return bundle

    problem = bundle.problem
    rng = np.random.default_rng(corruption.seed)
    changes = {}
    kind = corruption.kind
    if kind is CorruptionKind.CORRESPONDENCE_OUTLIERS:
        changes["corr_action"] = _outlier_rows(rng, problem.corr_action, corruption.level)
        changes["corr_anchor"] = _outlier_rows(rng, problem.corr_anchor, corruption.level)
    elif kind is CorruptionKind.FLOW_OUTLIERS:
        action = problem.action_cloud.points
        changes["goal_flow"] = _outlier_rows(rng, action + problem.goal_flow, corruption.level) - action
    elif kind is CorruptionKind.FLOW_SCALE:
        changes["goal_flow"] = problem.goal_flow * (1.0 + corruption.level)
    elif kind is CorruptionKind.ALPHA_RANDOMIZE:
        mix = min(corruption.level, 1.0)
        for name in ("alpha_action", "alpha_anchor"):
            alpha = getattr(problem, name)
            noise = rng.uniform(0.0, 1.0, size=alpha.shape)
            changes[name] = (1.0 - mix) * alpha + mix * noise / noise.sum()

    logger.debug("corrupted seed=%d with %s level=%g", bundle.seed, kind.value, corruption.level)
    return dataclasses.replace(bundle, problem=dataclasses.replace(problem, **changes))
