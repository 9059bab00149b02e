#!/usr/bin/env python3
"""
Weighted Pose - CLI entry point.
Generates synthetic cross-pose scenarios, solves them with the blended SVD
solver, and evaluates batches into metric tables.

Exit codes: 0 success, 2 input error, 3 degenerate geometry, 4 I/O error.
"""

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

import numpy as np

# Allow running as script from repo root or as module
try:
    from weighted_pose import DegenerateGeometry, InvalidProblem, ScenarioFormatError
except ImportError:
    # Run from project root without package install
    sys.path.insert(0, str(Path(__file__).resolve().parent))
    from weighted_pose import DegenerateGeometry, InvalidProblem, ScenarioFormatError

from weighted_pose import evaluation, scenario_io, synthetic
from weighted_pose.geometry import metric_triple
from weighted_pose.losses import loss_bundle
from weighted_pose.models import CorruptionKind, DemeanMode, FlowWeighting, ScenarioKind, SolverOptions
from weighted_pose.report import ReportGenerator
from weighted_pose.solver import solve_weighted_pose

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_DEGENERATE = 3
EXIT_IO = 4

DEFAULT_W_GRID = "0,0.25,0.5,0.75,1"

logger = logging.getLogger("weighted_pose.cli")


def _blend(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"w must lie in [0, 1], got {value}")
    return value


def _blend_grid(text: str):
    grid = [_blend(part) for part in text.split(",") if part.strip()]
    if not grid:
        raise argparse.ArgumentTypeError("w grid is empty")
    return grid


def _levels(text: str):
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"levels must be a comma list of numbers: {text!r}") from None


def _count(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"count must be >= 0, got {value}")
    return value


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _scenario_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, index]).generate_state(1, dtype=np.uint64)[0])


def _make_bundle(kind: str, seed: int, args):
    if kind == ScenarioKind.ARTICULATED.value:
        joint = synthetic.random_joint(np.random.default_rng([seed, 1]), prismatic=args.prismatic)
        return synthetic.make_articulated(seed, args.n_action, args.n_anchor, joint, args.noise)
    return synthetic.make_free_floating(seed, args.n_action, args.n_anchor, args.noise)


def _run_generate(args) -> int:
    out_dir = Path(args.out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        print(f"Error: cannot create {out_dir}: {e}", file=sys.stderr)
        return EXIT_IO

    for index in range(args.count):
        kind = args.kind
        if kind == "mixed":
            kind = ScenarioKind.FREE_FLOATING.value if index % 2 == 0 else ScenarioKind.ARTICULATED.value
        try:
            bundle = _make_bundle(kind, _scenario_seed(args.seed, index), args)
        except InvalidProblem as e:
            print(f"Error: {e}", file=sys.stderr)
            return EXIT_INPUT
        path = out_dir / f"scenario_{args.seed}_{index}.json"
        try:
            scenario_io.write_scenario(bundle, path)
        except OSError as e:
            print(f"Error writing {path}: {e}", file=sys.stderr)
            return EXIT_IO
        logger.debug("wrote %s (%s)", path, kind)

    print(f"Wrote {args.count} scenario(s) to {out_dir}")
    return EXIT_OK


def _run_solve(args) -> int:
    try:
        bundle = scenario_io.read_scenario(args.scenario)
    except ScenarioFormatError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as e:
        print(f"Error reading {args.scenario}: {e}", file=sys.stderr)
        return EXIT_IO

    problem = bundle.problem if args.w is None else bundle.problem.with_blend(args.w)
    options = SolverOptions(mode=args.mode, flow_weighting=args.flow_weighting)
    try:
        report = solve_weighted_pose(problem, options)
    except DegenerateGeometry as e:
        print(f"Error: degenerate geometry in {args.scenario}: {e}", file=sys.stderr)
        return EXIT_DEGENERATE

    extras = {}
    if args.losses:
        extras["losses"] = loss_bundle(report.transform, dataclasses.replace(bundle, problem=problem))
        extras["metrics"] = metric_triple(report.transform, bundle.gt, problem.action_cloud)

    if args.output_format == "text":
        print(ReportGenerator.text(report, extras.get("metrics")))
    else:
        print(ReportGenerator.json(report, **extras))
    return EXIT_OK


def _load(directory: str):
    """Scenarios of a directory plus an exit status; warns about skipped files."""
    if not Path(directory).is_dir():
        print(f"Error: {directory} is not a directory", file=sys.stderr)
        return None, EXIT_IO
    loaded = evaluation.load_scenario_dir(Path(directory))
    for path, reason in loaded.failures:
        print(f"Warning: skipped {path}: {reason}", file=sys.stderr)
    if not loaded.bundles:
        print(f"Error: no readable scenarios in {directory}", file=sys.stderr)
        return None, EXIT_INPUT
    return loaded, EXIT_OK


def _write_rows(rows, path: str, columns) -> int:
    try:
        scenario_io.write_metrics_csv((row.as_record() for row in rows), path, columns)
    except OSError as e:
        print(f"Error writing {path}: {e}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def _finish(rows, path: str, columns) -> int:
    status = _write_rows(rows, path, columns)
    if status != EXIT_OK:
        return status
    print(ReportGenerator.groups(evaluation.group_means(rows)))
    print()
    print(ReportGenerator.modes(evaluation.mode_gap_summary(rows)))
    if not any(row.solved for row in rows):
        print("Error: no (scenario, w, mode) could be solved; geometry is degenerate", file=sys.stderr)
        return EXIT_DEGENERATE
    return EXIT_OK


def _eval_kwargs(args):
    return {
        "flow_weighting": FlowWeighting(args.flow_weighting),
        "oracle_restarts": args.oracle_restarts,
        "seed": args.seed,
    }


def _run_eval(args) -> int:
    loaded, status = _load(args.scenario_dir)
    if loaded is None:
        return status
    modes = [DemeanMode(m) for m in dict.fromkeys(args.mode or [DemeanMode.DEMEAN.value])]
    rows = evaluation.evaluate_scenarios(loaded.bundles, args.w_grid, modes, **_eval_kwargs(args))
    return _finish(rows, args.out, scenario_io.METRICS_COLUMNS)


def _run_sweep(args) -> int:
    loaded, status = _load(args.scenario_dir)
    if loaded is None:
        return status
    modes = [DemeanMode(m) for m in dict.fromkeys(args.mode or [DemeanMode.DEMEAN.value])]
    try:
        rows = evaluation.sweep_scenarios(
            loaded.bundles, args.corruption, args.levels, args.w_grid, modes, **_eval_kwargs(args)
        )
    except InvalidProblem as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_INPUT
    return _finish(rows, args.out, scenario_io.SWEEP_COLUMNS)


def _add_shared(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=_seed, default=0, help="64-bit seed for all randomness (default: 0)")
    parser.add_argument(
        "--flow-weighting",
        choices=[f.value for f in FlowWeighting],
        default=FlowWeighting.PAPER_LITERAL.value,
        help="Goal-flow row weight: w per point, or w / N_A",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging to stderr")


def _add_eval_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("scenario_dir", help="Directory of scenario JSON files")
    parser.add_argument("--w-grid", type=_blend_grid, default=_blend_grid(DEFAULT_W_GRID), help="Comma list of blends")
    parser.add_argument(
        "--mode",
        action="append",
        choices=[m.value for m in DemeanMode],
        help="Solver mode; repeat to compare modes (default: demean)",
    )
    parser.add_argument("--oracle-restarts", type=int, default=8, help="Oracle restarts per (scenario, w); 0 disables")
    parser.add_argument("--out", required=True, help="Metrics CSV path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Weighted Pose - blended SVD cross-pose solver")
    commands = parser.add_subparsers(dest="command", required=True)

    gen = commands.add_parser("generate", help="Write synthetic scenario files")
    _add_shared(gen)
    gen.add_argument("--count", type=_count, default=10)
    gen.add_argument("--kind", choices=[k.value for k in ScenarioKind] + ["mixed"], default="mixed")
    gen.add_argument("--noise", type=float, default=0.0, help="Gaussian noise sigma on correspondences and flow")
    gen.add_argument("--n-action", type=int, default=128)
    gen.add_argument("--n-anchor", type=int, default=128)
    gen.add_argument("--prismatic", action="store_true", help="Articulated scenarios use prismatic joints")
    gen.add_argument("--out", required=True, help="Output directory")
    gen.set_defaults(handler=_run_generate)

    solve = commands.add_parser("solve", help="Solve one scenario file")
    _add_shared(solve)
    solve.add_argument("scenario", help="Scenario JSON file")
    solve.add_argument("--w", type=_blend, default=None, help="Override the file's blend")
    solve.add_argument("--mode", choices=[m.value for m in DemeanMode], default=DemeanMode.DEMEAN.value)
    solve.add_argument("--losses", action="store_true", help="Include losses and metrics against ground truth")
    solve.add_argument("-o", "--output-format", choices=["json", "text"], default="json")
    solve.set_defaults(handler=_run_solve)

    ev = commands.add_parser("eval", help="Evaluate a scenario directory into a metrics CSV")
    _add_shared(ev)
    _add_eval_flags(ev)
    ev.set_defaults(handler=_run_eval)

    sweep = commands.add_parser("sweep", help="Evaluate across corruption levels")
    _add_shared(sweep)
    _add_eval_flags(sweep)
    sweep.add_argument("--corruption", choices=[c.value for c in CorruptionKind], required=True)
    sweep.add_argument("--levels", type=_levels, default=[0.0, 0.25, 0.5])
    sweep.set_defaults(handler=_run_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    return args.handler(args)


if __name__ == "__main__":
    sys.exit(main())
