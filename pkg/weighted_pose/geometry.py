"""
SE(3) transforms, point clouds and the pose-error metrics.

All types are immutable after construction: arrays are copied and marked
read-only, so values can be shared between threads freely.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.transform import Rotation

from weighted_pose import tolerances
from weighted_pose.errors import InvalidProblem, InvalidTransform


def _frozen(array: np.ndarray) -> np.ndarray:
    out = np.array(array, dtype=np.float64, copy=True)
    out.setflags(write=False)
    return out


def _orthonormality_defect(rotation: np.ndarray) -> float:
    return float(np.linalg.norm(rotation.T @ rotation - np.eye(3), ord="fro"))


def _polar_rotation(rotation: np.ndarray) -> np.ndarray:
    """Closest orthonormal matrix (polar factor) via SVD."""
    u, _, vt = np.linalg.svd(rotation)
    return u @ vt


@dataclass(frozen=True, eq=False)
class RigidTransform:
    """
    Proper rigid transform x -> R x + t.

    Rotations within ORTHO_TOL of SO(3) are stored as given; up to
    ORTHO_REPAIR_TOL they are re-orthonormalized; anything else (including
    reflections) raises InvalidTransform.
    """

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        rotation = np.asarray(self.rotation, dtype=np.float64)
        translation = np.asarray(self.translation, dtype=np.float64).reshape(-1)
        if rotation.shape != (3, 3):
            raise InvalidTransform(f"rotation must be 3x3, got shape {rotation.shape}")
        if translation.shape != (3,):
            raise InvalidTransform(f"translation must have 3 entries, got {translation.shape}")
        if not (np.all(np.isfinite(rotation)) and np.all(np.isfinite(translation))):
            raise InvalidTransform("transform contains non-finite values")

        defect = _orthonormality_defect(rotation)
        if defect > tolerances.ORTHO_REPAIR_TOL:
            raise InvalidTransform(f"rotation is not orthonormal (defect {defect:.3e})")
        if np.linalg.det(rotation) < 0:
            raise InvalidTransform("rotation is a reflection (det < 0)")
        if defect > tolerances.ORTHO_TOL:
            rotation = _polar_rotation(rotation)
        det = float(np.linalg.det(rotation))
        if abs(det - 1.0) > tolerances.DET_TOL:
            raise InvalidTransform(f"rotation determinant {det!r} is not +1")

        object.__setattr__(self, "rotation", _frozen(rotation))
        object.__setattr__(self, "translation", _frozen(translation))

    @classmethod
    def identity(cls) -> "RigidTransform":
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def from_translation(cls, translation) -> "RigidTransform":
        return cls(np.eye(3), translation)

    @classmethod
    def from_rotvec(cls, rotvec, translation=(0.0, 0.0, 0.0)) -> "RigidTransform":
        return cls(so3_exp(rotvec), translation)

    @property
    def matrix(self) -> np.ndarray:
        """4x4 homogeneous matrix."""
        out = np.eye(4)
        out[:3, :3] = self.rotation
        out[:3, 3] = self.translation
        return out

    def __repr__(self) -> str:
        angle = math.degrees(so3_angle(self.rotation))
        t = ", ".join(f"{x:.4g}" for x in self.translation)
        return f"RigidTransform(angle={angle:.4g}deg, t=({t}))"


@dataclass(frozen=True, eq=False)
class PointCloud:
    """Ordered N x 3 set of finite points, N >= 1."""

    points: np.ndarray

    def __post_init__(self):
        points = np.asarray(self.points, dtype=np.float64)
        if points.ndim != 2 or points.shape[1] != 3:
            raise InvalidProblem(f"point cloud must be N x 3, got shape {points.shape}")
        if points.shape[0] < 1:
            raise InvalidProblem("point cloud must contain at least one point")
        if not np.all(np.isfinite(points)):
            raise InvalidProblem("point cloud contains non-finite coordinates")
        object.__setattr__(self, "points", _frozen(points))

    @property
    def n(self) -> int:
        return self.points.shape[0]

    def __len__(self) -> int:
        return self.n


@dataclass(frozen=True)
class MetricTriple:
    """Rotation error (degrees), translation error, per-point MSE."""

    rot_err_deg: float
    trans_err: float
    pp_mse: float

    def __post_init__(self):
        for name in ("rot_err_deg", "trans_err", "pp_mse"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")


# --- SO(3) helpers ---------------------------------------------------------


def so3_hat(phi) -> np.ndarray:
    """Skew-symmetric matrix [phi]x such that [phi]x v = phi x v."""
    x, y, z = np.asarray(phi, dtype=np.float64).reshape(3)
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def so3_exp(phi) -> np.ndarray:
    """Rotation matrix of the exponential coordinates phi (axis * angle)."""
    return Rotation.from_rotvec(np.asarray(phi, dtype=np.float64).reshape(3)).as_matrix()


def so3_angle(rotation: np.ndarray) -> float:
    """Geodesic angle of a rotation matrix in radians, in [0, pi]."""
    cos = (np.trace(rotation) - 1.0) / 2.0
    skew = rotation - rotation.T
    sin = math.sqrt(skew[2, 1] ** 2 + skew[0, 2] ** 2 + skew[1, 0] ** 2) / 2.0
    return math.atan2(sin, cos)


def rotation_about_axis(axis, angle: float) -> np.ndarray:
    axis = np.asarray(axis, dtype=np.float64).reshape(3)
    return so3_exp(axis / np.linalg.norm(axis) * angle)


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Uniform rotation from SO(3) via a normalized Gaussian 4-vector."""
    q = rng.standard_normal(4)
    return Rotation.from_quat(q / np.linalg.norm(q)).as_matrix()


def random_transform(
    rng: np.random.Generator, translation_range: float = tolerances.TRANSLATION_RANGE
) -> RigidTransform:
    rotation = random_rotation(rng)
    translation = rng.uniform(-translation_range, translation_range, size=3)
    return RigidTransform(rotation, translation)


def transform_points(rotation: np.ndarray, translation: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Rows R p + t for raw arrays."""
    return points @ rotation.T + translation


# --- Group operations ------------------------------------------------------


def compose(a: RigidTransform, b: RigidTransform) -> RigidTransform:
    """a o b: apply b first, then a."""
    return RigidTransform(a.rotation @ b.rotation, a.rotation @ b.translation + a.translation)


def invert(t: RigidTransform) -> RigidTransform:
    rt = t.rotation.T
    return RigidTransform(rt, -rt @ t.translation)


def apply(t: RigidTransform, pc: PointCloud) -> PointCloud:
    return PointCloud(transform_points(t.rotation, t.translation, pc.points))


# --- Metrics ---------------------------------------------------------------


def rotation_error_deg(pred: RigidTransform, gt: RigidTransform) -> float:
    """Geodesic angle of R_pred R_gt^T in degrees, in [0, 180]."""
    return math.degrees(so3_angle(pred.rotation @ gt.rotation.T))


def translation_error(pred: RigidTransform, gt: RigidTransform) -> float:
    return float(np.linalg.norm(pred.translation - gt.translation))


def per_point_mse(pred: RigidTransform, gt: RigidTransform, pc: PointCloud) -> float:
    """Mean over points of ||T_pred p - T_gt p||^2."""
    diff = transform_points(pred.rotation, pred.translation, pc.points) - transform_points(
        gt.rotation, gt.translation, pc.points
    )
    return float(np.mean(np.sum(diff * diff, axis=1)))


def metric_triple(pred: RigidTransform, gt: RigidTransform, pc: PointCloud) -> MetricTriple:
    return MetricTriple(
        rot_err_deg=rotation_error_deg(pred, gt),
        trans_err=translation_error(pred, gt),
        pp_mse=per_point_mse(pred, gt, pc),
    )
