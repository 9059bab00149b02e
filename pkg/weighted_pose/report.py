"""
Report Generator - text and JSON output for solves and evaluation summaries.
"""

import json
import math
from typing import Any, Dict, Optional, Sequence

from weighted_pose.evaluation import GroupSummary, ModeGapSummary
from weighted_pose.geometry import MetricTriple
from weighted_pose.models import LossBundle, SolveReport


def _loss_to_dict(losses: LossBundle) -> Dict[str, float]:
    return {"disp": losses.disp, "corr": losses.corr, "cons": losses.cons, "tf": losses.tf}


def _metrics_to_dict(metrics: MetricTriple) -> Dict[str, float]:
    return {"rot_err_deg": metrics.rot_err_deg, "trans_err": metrics.trans_err, "pp_mse": metrics.pp_mse}


def to_dict(
    report: SolveReport,
    losses: Optional[LossBundle] = None,
    metrics: Optional[MetricTriple] = None,
) -> Dict[str, Any]:
    """Serialize a solve to a dict for JSON output."""
    result = {
        "rotation": report.transform.rotation.reshape(-1).tolist(),
        "translation": report.transform.translation.tolist(),
        "objective": report.objective,
        "degenerate_flag": report.degenerate_flag,
        "singular_values": list(report.singular_values),
        "mode": report.mode.value,
        "flow_weighting": report.flow_weighting.value,
        "blend": report.blend,
    }
    if metrics is not None:
        result["metrics"] = _metrics_to_dict(metrics)
    if losses is not None:
        result["losses"] = _loss_to_dict(losses)
    return result


def format_json(report: SolveReport, indent: int = 2, **extras) -> str:
    return json.dumps(to_dict(report, **extras), indent=indent)


def format_text(report: SolveReport, metrics: Optional[MetricTriple] = None) -> str:
    """Human-readable solve report."""
    t = report.transform
    lines = [
        "=" * 60,
        "WEIGHTED POSE - CROSS-POSE SOLUTION",
        "=" * 60,
        f"Blend w: {report.blend}",
        f"Mode: {report.mode.value} / {report.flow_weighting.value}",
        f"Objective J: {report.objective:.6g}",
        "=" * 60,
        "",
        "Rotation:",
    ]
    for row in t.rotation:
        lines.append("  [" + "  ".join(f"{x: .6f}" for x in row) + "]")
    lines.append("Translation: [" + "  ".join(f"{x: .6f}" for x in t.translation) + "]")
    lines.append("Singular values: " + ", ".join(f"{s:.4g}" for s in report.singular_values))
    if report.degenerate_flag:
        lines.append("⚠️  Near-degenerate covariance: rotation may not be unique")
    if metrics is not None:
        lines.append("")
        lines.append("Against ground truth:")
        lines.append(f"  • Rotation error: {metrics.rot_err_deg:.6g} deg")
        lines.append(f"  • Translation error: {metrics.trans_err:.6g}")
        lines.append(f"  • Per-point MSE: {metrics.pp_mse:.6g}")
    return "\n".join(lines)


def _cell(value: float) -> str:
    return "nan" if math.isnan(value) else f"{value:.4g}"


def format_group_table(groups: Sequence[GroupSummary]) -> str:
    """Mean metrics per (kind, w, mode), one line per group."""
    header = f"{'kind':<14} {'w':>5} {'mode':<14} {'n':>4} {'rot_err':>10} {'trans_err':>10} {'pp_mse':>10} {'gap':>10}"
    lines = [header, "-" * len(header)]
    for g in groups:
        lines.append(
            f"{g.kind:<14} {g.w:>5.2f} {g.mode:<14} {g.count:>4} "
            f"{_cell(g.rot_err_deg):>10} {_cell(g.trans_err):>10} {_cell(g.pp_mse):>10} {_cell(g.oracle_gap):>10}"
        )
    lines.append("(means over scenarios)")
    return "\n".join(lines)


def format_mode_summary(summaries: Sequence[ModeGapSummary]) -> str:
    lines = ["Oracle gap by mode (gap = oracle J - solver J; negative means the solver lost):"]
    for s in summaries:
        if s.failures:
            status = "❌"
        elif s.passed:
            status = "✅"
        else:
            status = "⚠️ "
        lines.append(
            f"  {status} {s.mode:<14} rows={s.count} certified={s.certified} mean={_cell(s.mean_gap)} "
            f"min={_cell(s.min_gap)} below_tolerance={s.failures}"
        )
    return "\n".join(lines)


class ReportGenerator:
    """
    Generates solve and evaluation reports in text or JSON format.
    """

    @staticmethod
    def text(report: SolveReport, metrics: Optional[MetricTriple] = None) -> str:
        return format_text(report, metrics)

    @staticmethod
    def json(report: SolveReport, indent: int = 2, **extras) -> str:
        return format_json(report, indent=indent, **extras)

    @staticmethod
    def groups(groups: Sequence[GroupSummary]) -> str:
        return format_group_table(groups)

    @staticmethod
    def modes(summaries: Sequence[ModeGapSummary]) -> str:
        return format_mode_summary(summaries)
