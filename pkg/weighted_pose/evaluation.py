"""
Batch evaluation: solve scenarios over a blend grid and solver modes, score
against ground truth and certify each solve against the oracle.

Rows are sorted by (scenario_id, w, mode) so the output never depends on
processing order.
"""

import dataclasses
import logging
import math
import statistics
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from weighted_pose import tolerances
from weighted_pose.errors import DegenerateGeometry, ScenarioFormatError
from weighted_pose.geometry import MetricTriple, metric_triple
from weighted_pose.models import (
    CorruptionSpec,
    DemeanMode,
    FlowWeighting,
    ScenarioBundle,
    SolverOptions,
)
from weighted_pose.oracle import minimize_objective
from weighted_pose.scenario_io import read_scenario
from weighted_pose.solver import solve_weighted_pose
from weighted_pose.synthetic import corrupt

logger = logging.getLogger(__name__)

NAN = float("nan")
GAP_FAILURE = -1e-6


@dataclass(frozen=True)
class MetricsRow:
    scenario_id: str
    kind: str
    w: float
    mode: str
    metrics: MetricTriple
    objective: float
    oracle_gap: float
    corruption: Optional[str] = None
    level: Optional[float] = None

    @property
    def solved(self) -> bool:
        return not math.isnan(self.objective)

    def as_record(self) -> Dict[str, object]:
        return {
            "scenario_id": self.scenario_id,
            "kind": self.kind,
            "w": self.w,
            "mode": self.mode,
            "rot_err_deg": self.metrics.rot_err_deg,
            "trans_err": self.metrics.trans_err,
            "pp_mse": self.metrics.pp_mse,
            "objective": self.objective,
            "oracle_gap": self.oracle_gap,
            "corruption": self.corruption,
            "level": self.level,
        }


@dataclass
class ScenarioSet:
    """Loaded scenarios plus the files that could not be read."""

    bundles: List[Tuple[str, ScenarioBundle]] = field(default_factory=list)
    failures: List[Tuple[Path, str]] = field(default_factory=list)


def load_scenario_dir(directory: Path) -> ScenarioSet:
    result = ScenarioSet()
    for path in sorted(Path(directory).glob("*.json")):
        try:
            result.bundles.append((path.stem, read_scenario(path)))
        except (OSError, ScenarioFormatError) as e:
            logger.warning("skipping %s: %s", path, e)
            result.failures.append((path, str(e)))
    return result


def evaluate_bundle(
    scenario_id: str,
    bundle: ScenarioBundle,
    w_grid: Sequence[float],
    modes: Sequence[DemeanMode] = (DemeanMode.DEMEAN,),
    *,
    flow_weighting: FlowWeighting = FlowWeighting.PAPER_LITERAL,
    oracle_restarts: int = tolerances.ORACLE_RESTARTS,
    seed: int = 0,
) -> List[MetricsRow]:
    """One row per (w, mode); the oracle runs once per w and is shared by the modes."""
    rows = []
    nan_metrics = MetricTriple(NAN, NAN, NAN)
    for w in w_grid:
        problem = bundle.problem.with_blend(w)
        oracle = None
        if oracle_restarts > 0:
            oracle = minimize_objective(problem, oracle_restarts, seed=seed, flow_weighting=flow_weighting)
            if not oracle.converged:
                logger.warning("oracle did not converge on %s at w=%g", scenario_id, w)
        for mode in modes:
            options = SolverOptions(mode=mode, flow_weighting=flow_weighting)
            try:
                report = solve_weighted_pose(problem, options)
            except DegenerateGeometry as e:
                logger.warning("%s at w=%g: %s", scenario_id, w, e)
                rows.append(MetricsRow(scenario_id, bundle.kind.value, float(w), options.mode.value, nan_metrics, NAN, NAN))
                continue
            gap = oracle.objective - report.objective if oracle is not None else NAN
            rows.append(
                MetricsRow(
                    scenario_id=scenario_id,
                    kind=bundle.kind.value,
                    w=float(w),
                    mode=options.mode.value,
                    metrics=metric_triple(report.transform, bundle.gt, problem.action_cloud),
                    objective=report.objective,
                    oracle_gap=gap,
                )
            )
    return rows


def _row_key(row: MetricsRow):
    return (row.scenario_id, row.w, row.mode)


def evaluate_scenarios(
    scenarios: Iterable[Tuple[str, ScenarioBundle]],
    w_grid: Sequence[float],
    modes: Sequence[DemeanMode] = (DemeanMode.DEMEAN,),
    **kwargs,
) -> List[MetricsRow]:
    rows = []
    for scenario_id, bundle in scenarios:
        rows.extend(evaluate_bundle(scenario_id, bundle, w_grid, modes, **kwargs))
    return sorted(rows, key=_row_key)


def sweep_scenarios(
    scenarios: Sequence[Tuple[str, ScenarioBundle]],
    corruption: str,
    levels: Sequence[float],
    w_grid: Sequence[float],
    modes: Sequence[DemeanMode] = (DemeanMode.DEMEAN,),
    **kwargs,
) -> List[MetricsRow]:
    """evaluate_scenarios at each corruption level; rows ordered by level then (scenario, w, mode)."""
    rows = []
    for level in levels:
        corrupted = [
            (scenario_id, corrupt(bundle, CorruptionSpec(corruption, float(level), seed=bundle.seed)))
            for scenario_id, bundle in scenarios
        ]
        level_rows = evaluate_scenarios(corrupted, w_grid, modes, **kwargs)
        kind = CorruptionSpec(corruption, float(level)).kind.value
        rows.extend(
            dataclasses.replace(row, corruption=kind, level=float(level)) for row in level_rows
        )
    return rows


def _mean(values: Iterable[float]) -> float:
    finite = [v for v in values if not math.isnan(v)]
    return statistics.fmean(finite) if finite else NAN


@dataclass(frozen=True)
class GroupSummary:
    kind: str
    w: float
    mode: str
    count: int
    rot_err_deg: float
    trans_err: float
    pp_mse: float
    oracle_gap: float


def group_means(rows: Sequence[MetricsRow]) -> List[GroupSummary]:
    """Mean metrics per (kind, w, mode), free-floating and articulated side by side."""
    groups: Dict[Tuple[str, float, str], List[MetricsRow]] = {}
    for row in rows:
        groups.setdefault((row.kind, row.w, row.mode), []).append(row)
    return [
        GroupSummary(
            kind=kind,
            w=w,
            mode=mode,
            count=len(members),
            rot_err_deg=_mean(r.metrics.rot_err_deg for r in members),
            trans_err=_mean(r.metrics.trans_err for r in members),
            pp_mse=_mean(r.metrics.pp_mse for r in members),
            oracle_gap=_mean(r.oracle_gap for r in members),
        )
        for (kind, w, mode), members in sorted(groups.items())
    ]


@dataclass(frozen=True)
class ModeGapSummary:
    mode: str
    count: int
    mean_gap: float
    min_gap: float
    failures: int
    certified: int

    @property
    def uncertified(self) -> int:
        return self.count - self.certified

    @property
    def passed(self) -> bool:
        """At least one row was checked against the oracle and none lost to it."""
        return self.certified > 0 and self.failures == 0


def mode_gap_summary(rows: Sequence[MetricsRow]) -> List[ModeGapSummary]:
    """
    Oracle-gap statistics per solver mode; a failure is a gap below GAP_FAILURE.
    Rows with a NaN gap (degenerate solve, or no oracle run) count as uncertified.
    """
    by_mode: Dict[str, List[float]] = {}
    for row in rows:
        by_mode.setdefault(row.mode, []).append(row.oracle_gap)
    summaries = []
    for mode, gaps in sorted(by_mode.items()):
        finite = [g for g in gaps if not math.isnan(g)]
        summaries.append(
            ModeGapSummary(
                mode=mode,
                count=len(gaps),
                mean_gap=_mean(finite),
                min_gap=min(finite) if finite else NAN,
                failures=sum(1 for g in finite if g < GAP_FAILURE),
                certified=len(finite),
            )
        )
    return summaries


def median_rotation_error(rows: Sequence[MetricsRow], w: float, mode: str = DemeanMode.DEMEAN.value) -> float:
    values = [r.metrics.rot_err_deg for r in rows if r.w == w and r.mode == mode]
    return float(np.median(values)) if values else NAN
