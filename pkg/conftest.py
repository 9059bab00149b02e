"""Shared fixtures for the weighted_pose test suites."""

import numpy as np
import pytest

from weighted_pose.geometry import PointCloud, RigidTransform, random_transform, so3_angle, transform_points
from weighted_pose.models import CrossPoseProblem

BLEND_GRID = (0.0, 0.25, 0.5, 0.75, 1.0)


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running acceptance sweeps")


def random_problem(rng: np.random.Generator, n_a: int = 32, n_b: int = 24, blend: float = 0.5) -> CrossPoseProblem:
    """Arbitrary valid problem: every input drawn independently, no consistent pose."""
    return CrossPoseProblem(
        action_cloud=rng.uniform(-0.5, 0.5, size=(n_a, 3)),
        anchor_cloud=rng.uniform(-0.5, 0.5, size=(n_b, 3)),
        corr_action=rng.uniform(-0.5, 0.5, size=(n_a, 3)),
        corr_anchor=rng.uniform(-0.5, 0.5, size=(n_b, 3)),
        alpha_action=rng.uniform(0.1, 1.0, size=n_a),
        alpha_anchor=rng.uniform(0.1, 1.0, size=n_b),
        goal_flow=rng.normal(scale=0.2, size=(n_a, 3)),
        blend=blend,
    )


def consistent_problem(rng: np.random.Generator, n_a: int = 32, n_b: int = 24, blend: float = 0.5, noise: float = 0.0):
    """Problem whose correspondences and flow all agree with one random gt; returns (problem, gt)."""
    gt = random_transform(rng)
    action = rng.uniform(-0.5, 0.5, size=(n_a, 3))
    anchor = rng.uniform(-0.5, 0.5, size=(n_b, 3))
    inv_rotation = gt.rotation.T
    corr_action = transform_points(gt.rotation, gt.translation, action)
    corr_anchor = transform_points(inv_rotation, -inv_rotation @ gt.translation, anchor)
    flow = corr_action - action
    if noise:
        corr_action = corr_action + rng.normal(scale=noise, size=corr_action.shape)
        corr_anchor = corr_anchor + rng.normal(scale=noise, size=corr_anchor.shape)
        flow = flow + rng.normal(scale=noise, size=flow.shape)
    problem = CrossPoseProblem(
        action_cloud=PointCloud(action),
        anchor_cloud=PointCloud(anchor),
        corr_action=corr_action,
        corr_anchor=corr_anchor,
        alpha_action=rng.uniform(0.1, 1.0, size=n_a),
        alpha_anchor=rng.uniform(0.1, 1.0, size=n_b),
        goal_flow=flow,
        blend=blend,
    )
    return problem, gt


def zero_residual_problem(rng: np.random.Generator, n_a: int = 16, n_b: int = 12, blend: float = 0.5) -> CrossPoseProblem:
    """Demonstration configuration: every prediction already in place, T = I."""
    action = rng.uniform(-0.5, 0.5, size=(n_a, 3))
    anchor = rng.uniform(-0.5, 0.5, size=(n_b, 3))
    return CrossPoseProblem(
        action_cloud=action,
        anchor_cloud=anchor,
        corr_action=action,
        corr_anchor=anchor,
        alpha_action=np.ones(n_a),
        alpha_anchor=np.ones(n_b),
        goal_flow=np.zeros((n_a, 3)),
        blend=blend,
    )


def rotation_gap(a: RigidTransform, b: RigidTransform) -> float:
    """Geodesic distance in radians between the rotations of a and b."""
    return so3_angle(a.rotation @ b.rotation.T)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)
