"""
Data models for the Weighted Pose solver.
"""

import dataclasses
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from weighted_pose import tolerances
from weighted_pose.errors import InvalidProblem, InvalidWeights
from weighted_pose.geometry import PointCloud, RigidTransform


class DemeanMode(str, Enum):
    """How the stacked system is centred before the SVD."""

    DEMEAN = "demean"
    PAPER_LITERAL = "paper-literal"


class FlowWeighting(str, Enum):
    """Per-point weight of the goal-flow rows."""

    PAPER_LITERAL = "paper-literal-weighting"  # gamma_i = w
    NORMALIZED = "normalized-weighting"  # gamma_i = w / N_A


class ScenarioKind(str, Enum):
    FREE_FLOATING = "free-floating"
    ARTICULATED = "articulated"


class CorruptionKind(str, Enum):
    CORRESPONDENCE_OUTLIERS = "correspondence-outliers"
    FLOW_OUTLIERS = "flow-outliers"
    FLOW_SCALE = "flow-scale"
    ALPHA_RANDOMIZE = "alpha-randomize"


def _frozen_array(value, name: str, shape: Tuple[int, ...]) -> np.ndarray:
    try:
        array = np.array(value, dtype=np.float64, copy=True)
    except (TypeError, ValueError) as e:
        raise InvalidProblem(f"{name}: not a numeric array ({e})") from e
    if array.shape != shape:
        raise InvalidProblem(f"{name}: expected shape {shape}, got {array.shape}")
    if not np.all(np.isfinite(array)):
        raise InvalidProblem(f"{name}: contains non-finite values")
    array.setflags(write=False)
    return array


def _normalized_weights(value, name: str, n: int) -> np.ndarray:
    try:
        alpha = np.array(value, dtype=np.float64, copy=True).reshape(-1)
    except (TypeError, ValueError) as e:
        raise InvalidProblem(f"{name}: not a numeric array ({e})") from e
    if alpha.shape != (n,):
        raise InvalidProblem(f"{name}: expected {n} weights, got {alpha.shape[0]}")
    if not np.all(np.isfinite(alpha)):
        raise InvalidProblem(f"{name}: contains non-finite values")
    if np.any(alpha < 0):
        raise InvalidWeights(f"{name}: weights must be nonnegative")
    total = float(alpha.sum())
    if total <= 0.0:
        raise InvalidWeights(f"{name}: all weights are zero")
    # already-normalized input is kept bit-for-bit
    if abs(total - 1.0) > tolerances.ALPHA_SUM_TOL:
        alpha = alpha / total
    alpha.setflags(write=False)
    return alpha


def _as_cloud(value, name: str) -> PointCloud:
    if isinstance(value, PointCloud):
        return value
    try:
        return PointCloud(value)
    except InvalidProblem as e:
        raise InvalidProblem(f"{name}: {e}") from e


@dataclass(frozen=True)
class SolverOptions:
    """Solver configuration."""

    mode: DemeanMode = DemeanMode.DEMEAN
    flow_weighting: FlowWeighting = FlowWeighting.PAPER_LITERAL
    degeneracy_ratio: float = tolerances.DEGENERACY_RATIO

    def __post_init__(self):
        object.__setattr__(self, "mode", DemeanMode(self.mode))
        object.__setattr__(self, "flow_weighting", FlowWeighting(self.flow_weighting))


@dataclass(frozen=True, eq=False)
class CrossPoseProblem:
    """
    Full solver input.

    corr_action[i] is the predicted position of action point i in the anchor
    frame; corr_anchor[j] the predicted position of anchor point j in the
    action frame. goal_flow[i] displaces action point i to its goal state.
    Alpha weights are normalized per cloud at construction.
    """

    action_cloud: PointCloud
    anchor_cloud: PointCloud
    corr_action: np.ndarray
    corr_anchor: np.ndarray
    alpha_action: np.ndarray
    alpha_anchor: np.ndarray
    goal_flow: np.ndarray
    blend: float

    def __post_init__(self):
        action = _as_cloud(self.action_cloud, "action_cloud")
        anchor = _as_cloud(self.anchor_cloud, "anchor_cloud")
        n_a, n_b = action.n, anchor.n
        object.__setattr__(self, "action_cloud", action)
        object.__setattr__(self, "anchor_cloud", anchor)
        object.__setattr__(self, "corr_action", _frozen_array(self.corr_action, "corr_action", (n_a, 3)))
        object.__setattr__(self, "corr_anchor", _frozen_array(self.corr_anchor, "corr_anchor", (n_b, 3)))
        object.__setattr__(self, "goal_flow", _frozen_array(self.goal_flow, "goal_flow", (n_a, 3)))
        object.__setattr__(self, "alpha_action", _normalized_weights(self.alpha_action, "alpha_action", n_a))
        object.__setattr__(self, "alpha_anchor", _normalized_weights(self.alpha_anchor, "alpha_anchor", n_b))

        try:
            blend = float(self.blend)
        except (TypeError, ValueError) as e:
            raise InvalidProblem(f"blend: not a number ({self.blend!r})") from e
        if not (math.isfinite(blend) and 0.0 <= blend <= 1.0):
            raise InvalidProblem(f"blend must lie in [0, 1], got {self.blend!r}")
        object.__setattr__(self, "blend", blend)

    @property
    def n_action(self) -> int:
        return self.action_cloud.n

    @property
    def n_anchor(self) -> int:
        return self.anchor_cloud.n

    def with_blend(self, blend: float) -> "CrossPoseProblem":
        return dataclasses.replace(self, blend=blend)

    def flow_weights(self, weighting: FlowWeighting = FlowWeighting.PAPER_LITERAL) -> np.ndarray:
        """Per-row weights gamma of the goal-flow block."""
        gamma = self.blend if FlowWeighting(weighting) is FlowWeighting.PAPER_LITERAL else self.blend / self.n_action
        return np.full(self.n_action, gamma)


@dataclass(frozen=True, eq=False)
class SvdSystem:
    """Stacked weighted Procrustes system: rows [action | anchor | flow]."""

    source_stack: np.ndarray
    target_stack: np.ndarray
    weight_diag: np.ndarray
    n_action: int
    n_anchor: int
    mode: DemeanMode = DemeanMode.DEMEAN

    def __post_init__(self):
        m = 2 * self.n_action + self.n_anchor
        if self.source_stack.shape != (m, 3) or self.target_stack.shape != (m, 3):
            raise InvalidProblem(f"stacks must be {m} x 3")
        if self.weight_diag.shape != (m,):
            raise InvalidProblem(f"weight_diag must have {m} entries")
        if np.any(self.weight_diag < 0):
            raise InvalidWeights("weight_diag entries must be nonnegative")
        for name in ("source_stack", "target_stack", "weight_diag"):
            getattr(self, name).setflags(write=False)

    @property
    def blocks(self) -> Tuple[slice, slice, slice]:
        a, b = self.n_action, self.n_anchor
        return slice(0, a), slice(a, a + b), slice(a + b, 2 * a + b)


@dataclass(frozen=True, eq=False)
class SolveReport:
    """Solved cross-pose plus diagnostics."""

    transform: RigidTransform
    objective: float
    mode: DemeanMode
    singular_values: Tuple[float, float, float]
    degenerate_flag: bool
    flow_weighting: FlowWeighting = FlowWeighting.PAPER_LITERAL
    blend: float = 0.0

    def __post_init__(self):
        if self.objective < 0:
            raise ValueError("objective must be nonnegative")
        sv = self.singular_values
        if any(s < 0 for s in sv) or list(sv) != sorted(sv, reverse=True):
            raise ValueError("singular values must be nonnegative and sorted descending")


@dataclass(frozen=True)
class LossBundle:
    """Displacement, correspondence, consistency and direct transform losses."""

    disp: float
    corr: float
    cons: float
    tf: float

    def __post_init__(self):
        for name in ("disp", "corr", "cons", "tf"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ValueError(f"{name} must be finite and nonnegative, got {value}")


@dataclass(frozen=True, eq=False)
class OracleResult:
    transform: RigidTransform
    objective: float
    restarts_used: int
    converged: bool
    iterations: int = 0


@dataclass(frozen=True, eq=False)
class RevoluteJoint:
    """
    Hinge through axis_point along axis_direction.
    With prismatic=True the angles are displacements along the axis instead.
    """

    axis_point: np.ndarray
    axis_direction: np.ndarray
    current_angle: float
    open_angle: float
    prismatic: bool = False

    def __post_init__(self):
        point = _frozen_array(self.axis_point, "axis_point", (3,))
        direction = np.array(self.axis_direction, dtype=np.float64).reshape(-1)
        norm = float(np.linalg.norm(direction)) if direction.shape == (3,) else 0.0
        if not (math.isfinite(norm) and norm > 0):
            raise InvalidProblem("axis_direction must be a nonzero finite 3-vector")
        direction = direction / norm
        direction.setflags(write=False)
        for name in ("current_angle", "open_angle"):
            if not math.isfinite(float(getattr(self, name))):
                raise InvalidProblem(f"{name} must be finite")
            object.__setattr__(self, name, float(getattr(self, name)))
        object.__setattr__(self, "axis_point", point)
        object.__setattr__(self, "axis_direction", direction)

    @property
    def travel(self) -> float:
        return self.open_angle - self.current_angle


@dataclass(frozen=True, eq=False)
class ScenarioBundle:
    """A problem paired with its ground-truth cross-pose."""

    problem: CrossPoseProblem
    gt: RigidTransform
    kind: ScenarioKind
    seed: int
    noise_sigma: float
    joint: Optional[RevoluteJoint] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", ScenarioKind(self.kind))
        if self.noise_sigma < 0:
            raise InvalidProblem("noise_sigma must be nonnegative")


@dataclass(frozen=True)
class CorruptionSpec:
    kind: CorruptionKind
    level: float
    seed: int = 0

    def __post_init__(self):
        try:
            object.__setattr__(self, "kind", CorruptionKind(self.kind))
        except ValueError as e:
            names = ", ".join(k.value for k in CorruptionKind)
            raise InvalidProblem(f"unknown corruption '{self.kind}' (expected one of: {names})") from e
        if not (math.isfinite(self.level) and self.level >= 0):
            raise InvalidProblem(f"corruption level must be >= 0, got {self.level}")
        outliers = (CorruptionKind.CORRESPONDENCE_OUTLIERS, CorruptionKind.FLOW_OUTLIERS)
        if self.kind in outliers and self.level > 1:
            raise InvalidProblem(f"outlier fraction must be <= 1, got {self.level}")
