"""End-to-end property checks over batches of synthetic scenarios."""

import numpy as np
import pytest

from conftest import BLEND_GRID
from weighted_pose.evaluation import evaluate_scenarios, median_rotation_error, mode_gap_summary, sweep_scenarios
from weighted_pose.losses import loss_bundle
from weighted_pose.models import DemeanMode
from weighted_pose.oracle import minimize_objective
from weighted_pose.solver import solve_weighted_pose
from weighted_pose.synthetic import make_articulated, make_free_floating, random_joint

pytestmark = pytest.mark.slow

NOISE_LEVELS = (0.0, 0.01, 0.05)


def _bundle(kind, s, noise, n=128):
    if kind == "free-floating":
        return make_free_floating(s, n, n, noise)
    return make_articulated(s, n, n, random_joint(np.random.default_rng([s, 1])), noise)


def _scenarios(count, noise=None):
    """Half free-floating, half articulated; noise cycles through NOISE_LEVELS unless fixed."""
    bundles = []
    for s in range(count):
        kind = "free-floating" if s % 2 == 0 else "articulated"
        level = NOISE_LEVELS[(s // 2) % len(NOISE_LEVELS)] if noise is None else noise
        bundles.append((f"scenario_{s}", _bundle(kind, s, level)))
    return bundles


def test_solver_never_loses_to_oracle():
    for _, bundle in _scenarios(200):
        for w in BLEND_GRID:
            problem = bundle.problem.with_blend(w)
            oracle = minimize_objective(problem, restarts=4, seed=bundle.seed)
            assert solve_weighted_pose(problem).objective <= oracle.objective + 1e-6


def test_exact_recovery_on_zero_noise():
    rows = evaluate_scenarios(_scenarios(100, noise=0.0), BLEND_GRID, oracle_restarts=0)
    assert len(rows) == 100 * len(BLEND_GRID)
    for row in rows:
        assert row.metrics.rot_err_deg < 1e-6
        assert row.metrics.trans_err < 1e-8
        assert row.metrics.pp_mse < 1e-16


def _median_errors(kind, corruption, seeds=50):
    scenarios = [(f"s{s}", _bundle(kind, s, 0.0, n=64)) for s in range(seeds)]
    rows = sweep_scenarios(scenarios, corruption, [0.5], [0.0, 1.0], oracle_restarts=0)
    return median_rotation_error(rows, 0.0), median_rotation_error(rows, 1.0)


@pytest.mark.parametrize("kind", ["free-floating", "articulated"])
def test_correspondence_outliers_break_pure_correspondence_solve(kind):
    at_zero, at_one = _median_errors(kind, "correspondence-outliers")
    assert at_one < 1e-6
    assert at_zero > 5.0


@pytest.mark.parametrize("kind", ["free-floating", "articulated"])
def test_flow_outliers_break_pure_flow_solve(kind):
    at_zero, at_one = _median_errors(kind, "flow-outliers")
    assert at_zero < 1e-6
    assert at_one > 5.0


def test_mode_comparison_reports_both_modes():
    rows = evaluate_scenarios(
        _scenarios(100),
        BLEND_GRID,
        [DemeanMode.DEMEAN, DemeanMode.PAPER_LITERAL],
        oracle_restarts=2,
    )
    summary = {s.mode: s for s in mode_gap_summary(rows)}
    assert set(summary) == {"demean", "paper-literal"}
    assert summary["demean"].passed
    assert summary["demean"].certified == 100 * len(BLEND_GRID)
    assert summary["paper-literal"].count == 100 * len(BLEND_GRID)


def test_losses_vanish_on_exact_instances():
    for _, bundle in _scenarios(100, noise=0.0):
        losses = loss_bundle(bundle.gt, bundle)
        assert losses.disp == 0.0 and losses.tf == 0.0
        assert losses.corr < 1e-24 and losses.cons < 1e-24
