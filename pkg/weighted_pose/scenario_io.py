"""
Scenario files (JSON) and metrics tables (CSV).

Floats are written with Python's shortest round-trip repr, so
parse(serialize(x)) reproduces every value bit for bit. Files are written
to a temporary sibling and renamed into place.
"""

import csv
import io
import json
import os
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

import numpy as np

from weighted_pose import tolerances
from weighted_pose.errors import InvalidProblem, InvalidTransform, ScenarioFormatError
from weighted_pose.geometry import RigidTransform
from weighted_pose.models import CrossPoseProblem, ScenarioBundle, ScenarioKind

SCENARIO_KEYS = (
    "version",
    "kind",
    "seed",
    "noise_sigma",
    "action_points",
    "anchor_points",
    "corr_action",
    "corr_anchor",
    "alpha_action",
    "alpha_anchor",
    "goal_flow",
    "blend",
    "gt_rotation",
    "gt_translation",
)

METRICS_COLUMNS = (
    "scenario_id",
    "kind",
    "w",
    "mode",
    "rot_err_deg",
    "trans_err",
    "pp_mse",
    "objective",
    "oracle_gap",
)
SWEEP_COLUMNS = METRICS_COLUMNS + ("corruption", "level")

# validation-message prefix -> scenario key
_PROBLEM_FIELDS = {
    "action_cloud": "action_points",
    "anchor_cloud": "anchor_points",
    "corr_action": "corr_action",
    "corr_anchor": "corr_anchor",
    "alpha_action": "alpha_action",
    "alpha_anchor": "alpha_anchor",
    "goal_flow": "goal_flow",
    "blend": "blend",
    "noise_sigma": "noise_sigma",
}

PathLike = Union[str, Path]


# --- writing ---------------------------------------------------------------


def _dump(value: Any) -> str:
    if isinstance(value, np.ndarray) and value.ndim == 2:
        rows = ",\n".join("    " + json.dumps(row) for row in value.tolist())
        return "[\n" + rows + "\n  ]"
    if isinstance(value, np.ndarray):
        return json.dumps(value.tolist())
    return json.dumps(value)


def scenario_to_dict(bundle: ScenarioBundle) -> Dict[str, Any]:
    problem = bundle.problem
    return {
        "version": tolerances.SCENARIO_VERSION,
        "kind": bundle.kind.value,
        "seed": int(bundle.seed),
        "noise_sigma": float(bundle.noise_sigma),
        "action_points": problem.action_cloud.points,
        "anchor_points": problem.anchor_cloud.points,
        "corr_action": problem.corr_action,
        "corr_anchor": problem.corr_anchor,
        "alpha_action": problem.alpha_action,
        "alpha_anchor": problem.alpha_anchor,
        "goal_flow": problem.goal_flow,
        "blend": float(problem.blend),
        "gt_rotation": bundle.gt.rotation.reshape(-1),
        "gt_translation": bundle.gt.translation,
    }


def serialize_scenario(bundle: ScenarioBundle) -> str:
    doc = scenario_to_dict(bundle)
    body = ",\n".join(f'  "{key}": {_dump(doc[key])}' for key in SCENARIO_KEYS)
    return "{\n" + body + "\n}\n"


def atomic_write_text(path: PathLike, text: str) -> None:
    """Write via a temporary sibling and os.replace; never leaves a partial file."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    try:
        with open(tmp, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except OSError:
        tmp.unlink(missing_ok=True)
        raise


def write_scenario(bundle: ScenarioBundle, path: PathLike) -> Path:
    atomic_write_text(path, serialize_scenario(bundle))
    return Path(path)


# --- reading ---------------------------------------------------------------


def _line_of(text: str, key: str) -> Optional[int]:
    needle = f'"{key}"'
    for number, line in enumerate(text.splitlines(), start=1):
        if needle in line:
            return number
    return None


class _Reader:
    """Field-level validation with line diagnostics."""

    def __init__(self, doc: Dict[str, Any], text: str, path: Optional[str]):
        self.doc = doc
        self.text = text
        self.path = path

    def error(self, key: str, message: str) -> ScenarioFormatError:
        return ScenarioFormatError(message, path=self.path, field=key, line=_line_of(self.text, key))

    def get(self, key: str) -> Any:
        if key not in self.doc:
            raise ScenarioFormatError("missing required field", path=self.path, field=key)
        return self.doc[key]

    def number(self, key: str) -> float:
        value = self.get(key)
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise self.error(key, f"expected a number, got {type(value).__name__}")
        return float(value)

    def integer(self, key: str) -> int:
        value = self.get(key)
        if isinstance(value, bool) or not isinstance(value, int):
            raise self.error(key, f"expected an integer, got {type(value).__name__}")
        return value

    def array(self, key: str, shape: Sequence[Optional[int]]) -> np.ndarray:
        value = self.get(key)
        try:
            array = np.array(value, dtype=np.float64)
        except (TypeError, ValueError):
            raise self.error(key, "array is not rectangular or not numeric") from None
        if array.ndim != len(shape) or any(want is not None and got != want for got, want in zip(array.shape, shape)):
            expected = " x ".join("N" if s is None else str(s) for s in shape)
            raise self.error(key, f"expected shape {expected}, got {array.shape}")
        if not np.all(np.isfinite(array)):
            raise self.error(key, "contains non-finite values")
        return array


def parse_scenario(text: str, path: Optional[PathLike] = None) -> ScenarioBundle:
    """Parse and validate a scenario document."""
    where = str(path) if path is not None else None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioFormatError(f"invalid JSON: {e.msg}", path=where, line=e.lineno) from None
    if not isinstance(doc, dict):
        raise ScenarioFormatError("top level must be a JSON object", path=where, line=1)

    reader = _Reader(doc, text, where)
    version = reader.integer("version")
    if version != tolerances.SCENARIO_VERSION:
        raise reader.error("version", f"unsupported version {version}")
    try:
        kind = ScenarioKind(reader.get("kind"))
    except ValueError:
        raise reader.error("kind", f"unknown kind {doc['kind']!r}") from None

    action = reader.array("action_points", (None, 3))
    anchor = reader.array("anchor_points", (None, 3))
    n_a, n_b = len(action), len(anchor)
    fields = {
        "corr_action": reader.array("corr_action", (n_a, 3)),
        "corr_anchor": reader.array("corr_anchor", (n_b, 3)),
        "alpha_action": reader.array("alpha_action", (n_a,)),
        "alpha_anchor": reader.array("alpha_anchor", (n_b,)),
        "goal_flow": reader.array("goal_flow", (n_a, 3)),
    }
    blend = reader.number("blend")
    noise_sigma = reader.number("noise_sigma")
    seed = reader.integer("seed")

    try:
        gt = RigidTransform(
            reader.array("gt_rotation", (9,)).reshape(3, 3),
            reader.array("gt_translation", (3,)),
        )
    except InvalidTransform as e:
        raise reader.error("gt_rotation", str(e)) from None

    try:
        problem = CrossPoseProblem(action_cloud=action, anchor_cloud=anchor, blend=blend, **fields)
        return ScenarioBundle(problem=problem, gt=gt, kind=kind, seed=seed, noise_sigma=noise_sigma)
    except InvalidProblem as e:
        message = str(e)
        for prefix, key in _PROBLEM_FIELDS.items():
            if message.startswith(prefix):
                raise reader.error(key, message) from None
        raise ScenarioFormatError(message, path=where) from None


def read_scenario(path: PathLike) -> ScenarioBundle:
    """Read a scenario file; OSError propagates for the caller's I/O exit code."""
    path = Path(path)
    return parse_scenario(path.read_text(encoding="utf-8"), path)


# --- metrics ---------------------------------------------------------------


def format_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    if hasattr(value, "value"):
        return str(value.value)
    return str(value)


def metrics_csv(records: Iterable[Dict[str, Any]], columns: Sequence[str] = METRICS_COLUMNS) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for record in records:
        writer.writerow([format_cell(record.get(column)) for column in columns])
    return buffer.getvalue()


def write_metrics_csv(
    records: Iterable[Dict[str, Any]], path: PathLike, columns: Sequence[str] = METRICS_COLUMNS
) -> Path:
    atomic_write_text(path, metrics_csv(records, columns))
    return Path(path)


def read_metrics_csv(path: PathLike) -> List[Dict[str, str]]:
    with open(path, encoding="utf-8", newline="") as f:
        return list(csv.DictReader(f))
