import numpy as np
import pytest

from weighted_pose.geometry import PointCloud, RigidTransform, compose, invert, random_transform, transform_points
from weighted_pose.losses import (
    consistency_loss,
    correspondence_loss,
    ground_truth_transform,
    loss_bundle,
    point_displacement_loss,
    transform_loss,
)
from weighted_pose.models import LossBundle
from weighted_pose.synthetic import make_free_floating


def _moved_loop(t: RigidTransform, points):
    return [t.rotation @ p + t.translation for p in points]


def _mean_sq_loop(a, b):
    return sum(float((x - y) @ (x - y)) for x, y in zip(a, b)) / len(a)


def _clouds(rng, n_a=20, n_b=15):
    return PointCloud(rng.uniform(-0.5, 0.5, (n_a, 3))), PointCloud(rng.uniform(-0.5, 0.5, (n_b, 3)))


class TestGroundTruthTransform:
    def test_equal_perturbations(self, rng):
        t = random_transform(rng)
        gt = ground_truth_transform(t, t)
        np.testing.assert_allclose(gt.rotation, np.eye(3), atol=1e-12)
        np.testing.assert_allclose(gt.translation, np.zeros(3), atol=1e-12)

    def test_identity_alpha(self, rng):
        t_beta = random_transform(rng)
        gt = ground_truth_transform(RigidTransform.identity(), t_beta)
        np.testing.assert_allclose(gt.matrix, t_beta.matrix, atol=1e-15)

    def test_maps_perturbed_action_to_perturbed_anchor_frame(self, rng):
        t_alpha, t_beta = random_transform(rng), random_transform(rng)
        points = rng.uniform(-0.5, 0.5, (10, 3))
        gt = ground_truth_transform(t_alpha, t_beta)
        moved = transform_points(t_alpha.rotation, t_alpha.translation, points)
        np.testing.assert_allclose(
            transform_points(gt.rotation, gt.translation, moved),
            transform_points(t_beta.rotation, t_beta.translation, points),
            atol=1e-10,
        )


class TestPointDisplacementLoss:
    def test_zero_at_gt(self, rng):
        gt = random_transform(rng)
        pa, pb = _clouds(rng)
        assert point_displacement_loss(gt, gt, pa, pb) == 0.0

    def test_single_point_unit_shift(self):
        pred = RigidTransform.from_translation([1.0, 0.0, 0.0])
        one = PointCloud(np.zeros((1, 3)))
        assert point_displacement_loss(pred, RigidTransform.identity(), one, one) == pytest.approx(2.0)

    def test_matches_loop(self, rng):
        for _ in range(100):
            pred, gt = random_transform(rng), random_transform(rng)
            pa, pb = _clouds(rng)
            expected = _mean_sq_loop(_moved_loop(pred, pa.points), _moved_loop(gt, pa.points)) + _mean_sq_loop(
                _moved_loop(invert(pred), pb.points), _moved_loop(invert(gt), pb.points)
            )
            assert point_displacement_loss(pred, gt, pa, pb) == pytest.approx(expected, rel=1e-10)

    def test_permutation_invariant(self, rng):
        pred, gt = random_transform(rng), random_transform(rng)
        pa, pb = _clouds(rng)
        shuffled_a = PointCloud(pa.points[rng.permutation(pa.n)])
        shuffled_b = PointCloud(pb.points[rng.permutation(pb.n)])
        assert point_displacement_loss(pred, gt, shuffled_a, shuffled_b) == pytest.approx(
            point_displacement_loss(pred, gt, pa, pb), rel=1e-12
        )

    def test_continuous(self, rng):
        pred, gt = random_transform(rng), random_transform(rng)
        pa, pb = _clouds(rng)
        eps = 1e-6
        nudged = compose(RigidTransform.from_translation([eps, 0.0, 0.0]), pred)
        change = abs(point_displacement_loss(nudged, gt, pa, pb) - point_displacement_loss(pred, gt, pa, pb))
        assert change <= 100 * eps


class TestCorrespondenceLoss:
    def test_zero_when_consistent(self, rng):
        gt = random_transform(rng)
        pa, pb = _clouds(rng)
        inv = invert(gt)
        corr_a = transform_points(gt.rotation, gt.translation, pa.points)
        corr_b = transform_points(inv.rotation, inv.translation, pb.points)
        assert correspondence_loss(corr_a, corr_b, gt, pa, pb) == pytest.approx(0.0, abs=1e-28)

    def test_positive_when_inconsistent(self, rng):
        gt = random_transform(rng)
        pa, pb = _clouds(rng)
        corr_a = transform_points(gt.rotation, gt.translation, pa.points)
        corr_a[3] += 0.1
        corr_b = transform_points(invert(gt).rotation, invert(gt).translation, pb.points)
        assert correspondence_loss(corr_a, corr_b, gt, pa, pb) > 0.0

    def test_unit_offset(self, rng):
        pa, pb = _clouds(rng)
        offset = np.array([0.0, 0.0, 1.0])
        loss = correspondence_loss(pa.points + offset, pb.points, RigidTransform.identity(), pa, pb)
        assert loss == pytest.approx(1.0, abs=1e-12)

    def test_matches_loop(self, rng):
        for _ in range(100):
            gt = random_transform(rng)
            pa, pb = _clouds(rng)
            corr_a, corr_b = rng.standard_normal((pa.n, 3)), rng.standard_normal((pb.n, 3))
            expected = _mean_sq_loop(list(corr_a), _moved_loop(gt, pa.points)) + _mean_sq_loop(
                list(corr_b), _moved_loop(invert(gt), pb.points)
            )
            assert correspondence_loss(corr_a, corr_b, gt, pa, pb) == pytest.approx(expected, rel=1e-10)

    def test_continuous(self, rng):
        gt = random_transform(rng)
        pa, pb = _clouds(rng)
        corr_a, corr_b = rng.standard_normal((pa.n, 3)), rng.standard_normal((pb.n, 3))
        eps = 1e-6
        base = correspondence_loss(corr_a, corr_b, gt, pa, pb)
        assert abs(correspondence_loss(corr_a + eps, corr_b, gt, pa, pb) - base) <= 100 * eps


class TestConsistencyLoss:
    def test_zero_for_own_correspondences(self, rng):
        pred = random_transform(rng)
        pa, pb = _clouds(rng)
        inv = invert(pred)
        corr_a = transform_points(pred.rotation, pred.translation, pa.points)
        corr_b = transform_points(inv.rotation, inv.translation, pb.points)
        assert consistency_loss(corr_a, corr_b, pred, pa, pb) == pytest.approx(0.0, abs=1e-28)

    def test_equals_correspondence_loss_at_gt(self, rng):
        for _ in range(100):
            gt = random_transform(rng)
            pa, pb = _clouds(rng)
            corr_a, corr_b = rng.standard_normal((pa.n, 3)), rng.standard_normal((pb.n, 3))
            assert consistency_loss(corr_a, corr_b, gt, pa, pb) == pytest.approx(
                correspondence_loss(corr_a, corr_b, gt, pa, pb), abs=1e-12
            )

    def test_matches_loop(self, rng):
        for _ in range(100):
            pred = random_transform(rng)
            pa, pb = _clouds(rng)
            corr_a, corr_b = rng.standard_normal((pa.n, 3)), rng.standard_normal((pb.n, 3))
            expected = _mean_sq_loop(list(corr_a), _moved_loop(pred, pa.points)) + _mean_sq_loop(
                list(corr_b), _moved_loop(invert(pred), pb.points)
            )
            assert consistency_loss(corr_a, corr_b, pred, pa, pb) == pytest.approx(expected, rel=1e-10)


class TestTransformLoss:
    def test_zero_at_gt(self, rng):
        t = random_transform(rng)
        assert transform_loss(t, t) == 0.0

    def test_unit_translation(self):
        gt = RigidTransform.from_translation([1.0, 0.0, 0.0])
        assert transform_loss(RigidTransform.identity(), gt) == 1.0

    def test_matches_elementwise(self, rng):
        for _ in range(100):
            pred, gt = random_transform(rng), random_transform(rng)
            a, b = pred.matrix, gt.matrix
            expected = sum((a[i, j] - b[i, j]) ** 2 for i in range(4) for j in range(4)) ** 0.5
            assert transform_loss(pred, gt) == pytest.approx(expected, rel=1e-12)


class TestLossBundle:
    def test_all_zero_on_exact_scenario(self):
        bundle = make_free_floating(5, 32, 24)
        losses = loss_bundle(bundle.gt, bundle)
        assert losses.disp == 0.0
        assert losses.tf == 0.0
        assert losses.corr == pytest.approx(0.0, abs=1e-28)
        assert losses.cons == pytest.approx(0.0, abs=1e-28)

    def test_fields_match_individual_losses(self, rng):
        bundle = make_free_floating(6, 32, 24, noise_sigma=0.01)
        pred = random_transform(rng)
        problem = bundle.problem
        pa, pb = problem.action_cloud, problem.anchor_cloud
        losses = loss_bundle(pred, bundle)
        assert losses.disp == point_displacement_loss(pred, bundle.gt, pa, pb)
        assert losses.corr == correspondence_loss(problem.corr_action, problem.corr_anchor, bundle.gt, pa, pb)
        assert losses.cons == consistency_loss(problem.corr_action, problem.corr_anchor, pred, pa, pb)
        assert losses.tf == transform_loss(pred, bundle.gt)
        assert losses.corr > 0.0

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            LossBundle(disp=0.0, corr=-1.0, cons=0.0, tf=0.0)
